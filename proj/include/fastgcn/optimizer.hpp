#pragma once

#include <cstdint>
#include <vector>

#include "fastgcn/model.hpp"

namespace fastgcn {

enum class OptimizerKind { kSgd, kAdam };

/// Adam moment estimates, one pair per weight matrix.
struct AdamState {
    std::vector<DenseMatrix> m;
    std::vector<DenseMatrix> v;
    std::uint64_t step = 0;

    static AdamState zeros_like(const ModelParams& params);
};

struct AdamConfig {
    Real beta1 = 0.9;
    Real beta2 = 0.999;
    Real epsilon = 1e-8;
};

/// W <- W - lr * grad
void sgd_step(ModelParams& params, const GradientSet& grads, Real learning_rate);

/// Standard Adam update with bias-corrected moments.
void adam_step(ModelParams& params, const GradientSet& grads, AdamState& state,
               Real learning_rate, const AdamConfig& config = {});

}  // namespace fastgcn
