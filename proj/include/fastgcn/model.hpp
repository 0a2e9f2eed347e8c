#pragma once

#include <utility>
#include <vector>

#include "fastgcn/matrix.hpp"
#include "fastgcn/sampling.hpp"

namespace fastgcn {

/// Layer weights W(0)..W(M-1); W(l) maps d_l -> d_{l+1}. Hidden layers use
/// ReLU, the output layer is linear (softmax lives in the loss).
struct ModelParams {
    std::vector<DenseMatrix> weights;

    Index num_layers() const { return weights.size(); }

    /// d_0 .. d_M.
    std::vector<Index> dims() const;

    /// Glorot-uniform initialization over the given dimension chain.
    static ModelParams glorot(const std::vector<Index>& dims, RngState& rng);
};

/// One gradient matrix per weight matrix.
using GradientSet = std::vector<DenseMatrix>;

/// Everything backward() needs from a sampled forward pass. Blocks carry the
/// per-sample scale folded in: entry (i, j) of scaled_blocks[l] is
/// A(next_level[i], level_l[j]) * w_j with w_j = n/t_l under uniform sampling
/// and (dP/dQ)(u_j) * n/t_l = 1/(t_l q(u_j)) under importance sampling.
struct ForwardCache {
    SamplingMode mode = SamplingMode::kUniform;
    bool used_precompute = false;
    std::vector<DenseMatrix> weights;        // W(l) as used in the pass
    std::vector<DenseMatrix> inputs;         // X_l, rows at the layer-l sample points
    std::vector<DenseMatrix> preacts;        // Z_{l+1}, before the activation
    std::vector<DenseMatrix> scaled_blocks;  // t_{l+1} x t_l (empty at layer 0 when precomputed)
};

struct SampledForward {
    DenseMatrix logits;  // t_M x d_M
    ForwardCache cache;
};

/// Full-architecture forward pass: logits for every vertex.
DenseMatrix forward_full(const SparseMatrix& a, const DenseMatrix& h0,
                         const ModelParams& params);

/// Monte Carlo forward pass over the sampled vertex sets. q must be present
/// exactly in importance mode. When precomputed_u is given, layer 0 is not
/// sampled: its output at the level-1 points comes exactly from the rows of
/// U = A * H0.
SampledForward forward_sampled(const SparseMatrix& a, const DenseMatrix& h0,
                               const ModelParams& params, const LayerSampleSet& samples,
                               const ImportanceDistribution* q = nullptr,
                               const DenseMatrix* precomputed_u = nullptr);

/// Mean softmax cross-entropy over the batch rows and its exact gradient
/// (softmax - onehot) / batch_size. Stable under large logits.
std::pair<Real, DenseMatrix> loss_and_output_grad(const DenseMatrix& logits,
                                                  const std::vector<int>& labels);

/// Exact gradient of the sampled batch loss for the fixed sample set the
/// cache was built from.
GradientSet backward(const ForwardCache& cache, const DenseMatrix& d_logits);

/// U = A * H0, computed once per training run; the input features never
/// change, so neither does this product.
DenseMatrix precompute_input_product(const SparseMatrix& a, const DenseMatrix& h0);

}  // namespace fastgcn
