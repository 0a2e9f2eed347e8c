#include "fastgcn/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fastgcn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

RngState::RngState(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

RngState RngState::split(std::uint64_t stream_id) const {
    return RngState(splitmix64(seed_ ^ splitmix64(stream_id + 1)));
}

std::uint64_t RngState::next_u64() { return gen_(); }

Real RngState::next_double() {
    return static_cast<Real>(next_u64() >> 11) * 0x1.0p-53;
}

Index RngState::next_index(Index n) {
    if (n == 0) throw std::invalid_argument("next_index: n must be >= 1");
    const std::uint64_t range = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return static_cast<Index>(x % range);
}

Real RngState::next_gaussian() {
    if (spare_gaussian_) {
        const Real z = *spare_gaussian_;
        spare_gaussian_.reset();
        return z;
    }
    Real u1 = next_double();
    while (u1 == 0.0) u1 = next_double();
    const Real u2 = next_double();
    const Real r = std::sqrt(-2.0 * std::log(u1));
    const Real theta = 2.0 * std::numbers::pi * u2;
    spare_gaussian_ = r * std::sin(theta);
    return r * std::cos(theta);
}

ImportanceDistribution ImportanceDistribution::from_mass(std::vector<Real> mass) {
    if (mass.empty()) throw std::invalid_argument("ImportanceDistribution: empty mass vector");
    Real total = 0.0;
    for (Real m : mass) {
        if (m < 0.0 || !std::isfinite(m)) {
            throw std::invalid_argument("ImportanceDistribution: mass entries must be finite and >= 0");
        }
        total += m;
    }
    if (total <= 0.0) {
        throw std::invalid_argument("ImportanceDistribution: degenerate distribution, total mass is zero");
    }
    ImportanceDistribution q;
    q.mass_.resize(mass.size());
    q.cumulative_.resize(mass.size());
    Real running = 0.0;
    for (Index u = 0; u < mass.size(); ++u) {
        q.mass_[u] = mass[u] / total;
        running += q.mass_[u];
        q.cumulative_[u] = running;
    }
    q.cumulative_.back() = 1.0;
    return q;
}

ImportanceDistribution ImportanceDistribution::uniform(Index n) {
    if (n == 0) throw std::invalid_argument("ImportanceDistribution::uniform: n must be >= 1");
    ImportanceDistribution q;
    q.mass_.assign(n, 1.0 / static_cast<Real>(n));
    q.cumulative_.resize(n);
    for (Index u = 0; u < n; ++u) {
        q.cumulative_[u] = static_cast<Real>(u + 1) / static_cast<Real>(n);
    }
    q.cumulative_.back() = 1.0;
    return q;
}

Index ImportanceDistribution::sample(RngState& rng) const {
    const Real u = rng.next_double();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) return mass_.size() - 1;
    return static_cast<Index>(it - cumulative_.begin());
}

ImportanceDistribution compute_importance_distribution(const SparseMatrix& a) {
    return ImportanceDistribution::from_mass(column_squared_norms(a));
}

std::vector<Index> sample_uniform(Index n, Index t, RngState& rng) {
    if (n == 0) throw std::invalid_argument("sample_uniform: n must be >= 1");
    std::vector<Index> out(t);
    for (Index& u : out) u = rng.next_index(n);
    return out;
}

std::vector<Index> sample_importance(const ImportanceDistribution& q, Index t, RngState& rng) {
    std::vector<Index> out(t);
    for (Index& u : out) u = q.sample(rng);
    return out;
}

std::vector<std::vector<Index>> epoch_batches(const std::vector<Index>& train_indices,
                                              Index batch_size, RngState& rng) {
    if (train_indices.empty()) throw std::invalid_argument("epoch_batches: empty training set");
    if (batch_size == 0) throw std::invalid_argument("epoch_batches: batch_size must be >= 1");

    std::vector<Index> order = train_indices;
    // Fisher-Yates with the shared stream so epochs are reproducible.
    for (Index i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.next_index(i)]);
    }
    std::vector<std::vector<Index>> batches;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t stop = std::min(order.size(), start + batch_size);
        batches.emplace_back(order.begin() + start, order.begin() + stop);
    }
    return batches;
}

LayerSampleSet draw_layer_samples(const std::vector<Index>& layer_counts, SamplingMode mode,
                                  Index n, const ImportanceDistribution* q,
                                  std::vector<Index> batch, RngState& rng) {
    if (mode == SamplingMode::kImportance && q == nullptr) {
        throw std::invalid_argument("draw_layer_samples: importance mode requires a distribution");
    }
    if (mode == SamplingMode::kUniform && q != nullptr) {
        throw std::invalid_argument("draw_layer_samples: uniform mode takes no distribution");
    }
    LayerSampleSet samples;
    samples.mode = mode;
    samples.levels.reserve(layer_counts.size() + 1);
    for (Index t : layer_counts) {
        if (t == 0) {
            samples.levels.emplace_back();
        } else if (mode == SamplingMode::kImportance) {
            samples.levels.push_back(sample_importance(*q, t, rng));
        } else {
            samples.levels.push_back(sample_uniform(n, t, rng));
        }
    }
    samples.levels.push_back(std::move(batch));
    return samples;
}

}  // namespace fastgcn
