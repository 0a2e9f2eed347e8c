#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "fastgcn/matrix.hpp"

namespace fastgcn {

/// Deterministic, splittable random stream. The generator is mt19937_64
/// seeded through splitmix64, so identical seeds give identical streams on
/// every platform; the derived distributions below are hand-rolled for the
/// same reason.
class RngState {
public:
    explicit RngState(std::uint64_t seed);

    /// Independent stream derived from (seed, stream_id); the parent state
    /// is not advanced.
    RngState split(std::uint64_t stream_id) const;

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 random bits.
    Real next_double();

    /// Unbiased uniform draw from [0, n); rejection sampling, no modulo bias.
    Index next_index(Index n);

    /// Standard normal via Box-Muller (second value cached).
    Real next_gaussian();

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
    std::optional<Real> spare_gaussian_;
};

/// Probability mass over graph vertices with its cumulative table;
/// sampling is inverse-CDF by binary search.
class ImportanceDistribution {
public:
    /// Normalizes the given nonnegative masses. Throws if they sum to zero.
    static ImportanceDistribution from_mass(std::vector<Real> mass);

    /// Mass 1/n on each of n vertices.
    static ImportanceDistribution uniform(Index n);

    Index size() const { return mass_.size(); }
    Real mass(Index u) const { return mass_[u]; }
    const std::vector<Real>& masses() const { return mass_; }

    Index sample(RngState& rng) const;

private:
    std::vector<Real> mass_;
    std::vector<Real> cumulative_;
};

enum class SamplingMode { kUniform, kImportance };

/// Vertex samples for one batch: levels[l] holds the layer-l integration
/// points for l = 0..M-1 (drawn with replacement), and levels[M] is the
/// batch of output vertices.
struct LayerSampleSet {
    SamplingMode mode = SamplingMode::kUniform;
    std::vector<std::vector<Index>> levels;

    Index num_layers() const { return levels.empty() ? 0 : levels.size() - 1; }
};

/// q(u) proportional to the squared column norm of the kernel; the same
/// distribution serves every layer.
ImportanceDistribution compute_importance_distribution(const SparseMatrix& a);

/// t iid draws from uniform over [0, n), with replacement.
std::vector<Index> sample_uniform(Index n, Index t, RngState& rng);

/// t iid draws from q, with replacement.
std::vector<Index> sample_importance(const ImportanceDistribution& q, Index t, RngState& rng);

/// One epoch of output-vertex batches: a seeded shuffle of the training
/// indices chunked into batch_size pieces (the last may be short).
std::vector<std::vector<Index>> epoch_batches(const std::vector<Index>& train_indices,
                                              Index batch_size, RngState& rng);

/// Draws the per-layer sample lists for one batch. layer_counts[l] is t_l for
/// l = 0..M-1; a zero count leaves that level empty (the precompute path).
/// q must be present exactly when mode is importance and is shared by all
/// layers.
LayerSampleSet draw_layer_samples(const std::vector<Index>& layer_counts, SamplingMode mode,
                                  Index n, const ImportanceDistribution* q,
                                  std::vector<Index> batch, RngState& rng);

}  // namespace fastgcn
