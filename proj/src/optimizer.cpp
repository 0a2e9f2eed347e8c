#include "fastgcn/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace fastgcn {

namespace {

void check_shapes(const ModelParams& params, const GradientSet& grads) {
    if (grads.size() != params.weights.size()) {
        throw std::invalid_argument("optimizer: gradient count does not match layer count");
    }
    for (std::size_t l = 0; l < grads.size(); ++l) {
        if (!grads[l].same_shape(params.weights[l])) {
            throw std::invalid_argument("optimizer: gradient shape mismatch at layer " +
                                        std::to_string(l));
        }
    }
}

}  // namespace

AdamState AdamState::zeros_like(const ModelParams& params) {
    AdamState state;
    state.m.reserve(params.weights.size());
    state.v.reserve(params.weights.size());
    for (const auto& w : params.weights) {
        state.m.emplace_back(w.rows(), w.cols());
        state.v.emplace_back(w.rows(), w.cols());
    }
    return state;
}

void sgd_step(ModelParams& params, const GradientSet& grads, Real learning_rate) {
    check_shapes(params, grads);
    for (std::size_t l = 0; l < grads.size(); ++l) {
        auto& w = params.weights[l].data();
        const auto& g = grads[l].data();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= learning_rate * g[i];
    }
}

void adam_step(ModelParams& params, const GradientSet& grads, AdamState& state,
               Real learning_rate, const AdamConfig& config) {
    check_shapes(params, grads);
    if (state.m.size() != params.weights.size()) {
        throw std::invalid_argument("adam_step: state does not match layer count");
    }
    state.step += 1;
    const Real bias1 = 1.0 - std::pow(config.beta1, static_cast<Real>(state.step));
    const Real bias2 = 1.0 - std::pow(config.beta2, static_cast<Real>(state.step));
    for (std::size_t l = 0; l < grads.size(); ++l) {
        auto& w = params.weights[l].data();
        auto& m = state.m[l].data();
        auto& v = state.v[l].data();
        const auto& g = grads[l].data();
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
            v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
            const Real m_hat = m[i] / bias1;
            const Real v_hat = v[i] / bias2;
            w[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
        }
    }
}

}  // namespace fastgcn
