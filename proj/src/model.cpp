#include "fastgcn/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fastgcn {

namespace {

DenseMatrix gather_rows(const DenseMatrix& m, std::span<const Index> rows) {
    DenseMatrix out(rows.size(), m.cols());
    for (Index i = 0; i < rows.size(); ++i) {
        const auto src = m.row(rows[i]);
        std::copy(src.begin(), src.end(), &out.data()[i * m.cols()]);
    }
    return out;
}

void relu_inplace(DenseMatrix& m) {
    for (Real& v : m.data()) v = v > 0.0 ? v : 0.0;
}

/// Per-sample scale factors for one sampled layer.
std::vector<Real> sample_weights(const std::vector<Index>& level, SamplingMode mode,
                                 Index n, const ImportanceDistribution* q) {
    const Real uniform_scale = static_cast<Real>(n) / static_cast<Real>(level.size());
    std::vector<Real> w(level.size(), uniform_scale);
    if (mode == SamplingMode::kImportance) {
        const Real base_mass = 1.0 / static_cast<Real>(n);
        for (Index j = 0; j < level.size(); ++j) {
            const Real qj = q->mass(level[j]);
            if (qj <= 0.0) {
                // A zero-mass vertex cannot be drawn from q; the sampler and
                // the distribution disagree.
                throw std::logic_error("forward_sampled: drawn sample has zero importance mass");
            }
            w[j] = (base_mass / qj) * uniform_scale;
        }
    }
    return w;
}

DenseMatrix scaled_block(const SparseMatrix& a, const std::vector<Index>& out_level,
                         const std::vector<Index>& in_level, const std::vector<Real>& w) {
    DenseMatrix block = submatrix(a, out_level, in_level);
    for (Index i = 0; i < block.rows(); ++i) {
        for (Index j = 0; j < block.cols(); ++j) {
            block(i, j) *= w[j];
        }
    }
    return block;
}

}  // namespace

std::vector<Index> ModelParams::dims() const {
    std::vector<Index> d;
    d.reserve(weights.size() + 1);
    if (weights.empty()) return d;
    d.push_back(weights.front().rows());
    for (const auto& w : weights) d.push_back(w.cols());
    return d;
}

ModelParams ModelParams::glorot(const std::vector<Index>& dims, RngState& rng) {
    if (dims.size() < 2) throw std::invalid_argument("ModelParams::glorot: need at least two dims");
    ModelParams params;
    params.weights.reserve(dims.size() - 1);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const Real limit = std::sqrt(6.0 / static_cast<Real>(dims[l] + dims[l + 1]));
        DenseMatrix w(dims[l], dims[l + 1]);
        for (Real& v : w.data()) v = (2.0 * rng.next_double() - 1.0) * limit;
        params.weights.push_back(std::move(w));
    }
    return params;
}

DenseMatrix forward_full(const SparseMatrix& a, const DenseMatrix& h0,
                         const ModelParams& params) {
    if (a.rows() != a.cols() || a.cols() != h0.rows()) {
        throw std::invalid_argument("forward_full: kernel is " + std::to_string(a.rows()) + "x" +
                                    std::to_string(a.cols()) + " but features have " +
                                    std::to_string(h0.rows()) + " rows");
    }
    if (params.weights.empty()) throw std::invalid_argument("forward_full: no layers");
    const Index n_layers = params.num_layers();
    DenseMatrix h = h0;
    for (Index l = 0; l < n_layers; ++l) {
        DenseMatrix z = spmm(a, matmul(h, params.weights[l]));
        if (l + 1 < n_layers) relu_inplace(z);
        h = std::move(z);
    }
    return h;
}

SampledForward forward_sampled(const SparseMatrix& a, const DenseMatrix& h0,
                               const ModelParams& params, const LayerSampleSet& samples,
                               const ImportanceDistribution* q,
                               const DenseMatrix* precomputed_u) {
    const Index n_layers = params.num_layers();
    const Index n = a.rows();
    if (samples.levels.size() != n_layers + 1) {
        throw std::invalid_argument("forward_sampled: expected " + std::to_string(n_layers + 1) +
                                    " sample levels, got " + std::to_string(samples.levels.size()));
    }
    if ((samples.mode == SamplingMode::kImportance) != (q != nullptr)) {
        throw std::invalid_argument(
            "forward_sampled: distribution must be given exactly in importance mode");
    }
    if (samples.levels.back().empty()) {
        throw std::invalid_argument("forward_sampled: empty output batch");
    }
    const bool precompute = precomputed_u != nullptr;
    const Index first_sampled = precompute ? 1 : 0;
    for (Index l = first_sampled; l < n_layers; ++l) {
        if (samples.levels[l].empty()) {
            throw std::invalid_argument("forward_sampled: no samples for layer " + std::to_string(l));
        }
    }
    for (const auto& level : samples.levels) {
        for (Index u : level) {
            if (u >= n) throw std::out_of_range("forward_sampled: sample index out of range");
        }
    }

    ForwardCache cache;
    cache.mode = samples.mode;
    cache.used_precompute = precompute;
    cache.weights = params.weights;
    cache.inputs.resize(n_layers);
    cache.preacts.resize(n_layers);
    cache.scaled_blocks.resize(n_layers);

    DenseMatrix x;
    Index layer = 0;
    if (precompute) {
        // Layer 0 output at the level-1 points is exact: rows of U times W(0).
        const auto& level1 = samples.levels[1];
        cache.inputs[0] = gather_rows(*precomputed_u, level1);
        DenseMatrix z = matmul(cache.inputs[0], params.weights[0]);
        cache.preacts[0] = z;
        if (n_layers > 1) relu_inplace(z);
        x = std::move(z);
        layer = 1;
    } else {
        x = gather_rows(h0, samples.levels[0]);
    }

    for (; layer < n_layers; ++layer) {
        const auto& level = samples.levels[layer];
        const auto& next_level = samples.levels[layer + 1];
        const std::vector<Real> w = sample_weights(level, samples.mode, n, q);
        cache.inputs[layer] = std::move(x);
        cache.scaled_blocks[layer] = scaled_block(a, next_level, level, w);
        DenseMatrix z = matmul(cache.scaled_blocks[layer],
                               matmul(cache.inputs[layer], params.weights[layer]));
        cache.preacts[layer] = z;
        if (layer + 1 < n_layers) relu_inplace(z);
        x = std::move(z);
    }
    return {std::move(x), std::move(cache)};
}

std::pair<Real, DenseMatrix> loss_and_output_grad(const DenseMatrix& logits,
                                                  const std::vector<int>& labels) {
    if (labels.size() != logits.rows()) {
        throw std::invalid_argument("loss_and_output_grad: " + std::to_string(labels.size()) +
                                    " labels for " + std::to_string(logits.rows()) + " rows");
    }
    const Index t = logits.rows();
    const Index k = logits.cols();
    DenseMatrix grad(t, k);
    Real loss = 0.0;
    const Real inv_t = 1.0 / static_cast<Real>(t);
    for (Index i = 0; i < t; ++i) {
        const int label = labels[i];
        if (label < 0 || static_cast<Index>(label) >= k) {
            throw std::invalid_argument("loss_and_output_grad: label " + std::to_string(label) +
                                        " outside [0, " + std::to_string(k) + ")");
        }
        const auto row = logits.row(i);
        const Real row_max = *std::max_element(row.begin(), row.end());
        Real sum_exp = 0.0;
        for (Index j = 0; j < k; ++j) sum_exp += std::exp(row[j] - row_max);
        const Real log_sum = std::log(sum_exp) + row_max;
        loss += (log_sum - row[static_cast<Index>(label)]) * inv_t;
        for (Index j = 0; j < k; ++j) {
            const Real softmax_j = std::exp(row[j] - log_sum);
            grad(i, j) = (softmax_j - (static_cast<Index>(label) == j ? 1.0 : 0.0)) * inv_t;
        }
    }
    return {loss, std::move(grad)};
}

GradientSet backward(const ForwardCache& cache, const DenseMatrix& d_logits) {
    const Index n_layers = cache.weights.size();
    if (n_layers == 0) throw std::invalid_argument("backward: empty cache");
    if (d_logits.rows() != cache.preacts.back().rows() ||
        d_logits.cols() != cache.preacts.back().cols()) {
        throw std::invalid_argument("backward: gradient shape does not match the output layer");
    }

    GradientSet grads(n_layers);
    DenseMatrix dz = d_logits;
    for (Index l = n_layers; l-- > 0;) {
        if (cache.used_precompute && l == 0) {
            grads[0] = matmul_trans_a(cache.inputs[0], dz);
            break;
        }
        const DenseMatrix dp = matmul_trans_a(cache.scaled_blocks[l], dz);
        grads[l] = matmul_trans_a(cache.inputs[l], dp);
        if (l == 0) break;
        DenseMatrix dx = matmul_trans_b(dp, cache.weights[l]);
        // The layer below is hidden, so its output passed through ReLU.
        const DenseMatrix& z_below = cache.preacts[l - 1];
        for (Index i = 0; i < dx.rows(); ++i) {
            for (Index j = 0; j < dx.cols(); ++j) {
                if (z_below(i, j) <= 0.0) dx(i, j) = 0.0;
            }
        }
        dz = std::move(dx);
    }
    return grads;
}

DenseMatrix precompute_input_product(const SparseMatrix& a, const DenseMatrix& h0) {
    return spmm(a, h0);
}

}  // namespace fastgcn
