#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastgcn/dataio.hpp"
#include "fastgcn/model.hpp"
#include "fastgcn/optimizer.hpp"

namespace fastgcn {

/// Loss became non-finite; carries the offending epoch and batch.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(Index epoch, Index batch)
        : std::runtime_error("loss diverged (non-finite) at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch)),
          epoch(epoch),
          batch(batch) {}
    Index epoch;
    Index batch;
};

/// full_batch is the no-sampling baseline: every layer uses all n vertices
/// exactly once (scale 1), batches only the output.
enum class TrainMode { kUniform, kImportance, kFullBatch };

struct TrainConfig {
    TrainMode mode = TrainMode::kImportance;
    std::vector<Index> sample_counts = {400, 400};  // t_l per layer; t_0 unused with precompute
    std::vector<Index> hidden_dims = {16};          // d_1 .. d_{M-1}
    Index batch_size = 256;
    Real learning_rate = 0.01;
    OptimizerKind optimizer = OptimizerKind::kAdam;
    Index epochs = 1;
    bool precompute = false;
    std::uint64_t seed = 1;

    Index num_layers() const { return hidden_dims.size() + 1; }
};

struct EpochStats {
    Index epoch = 0;            // 1-based
    Real mean_loss = 0.0;
    Real batch_time_s = 0.0;    // mean wall time around the gradient step
    Real epoch_time_s = 0.0;    // training portion only, validation excluded
    Index distinct_vertices = 0;  // max over the epoch's batches
    Real val_f1 = 0.0;
};

struct BatchRecord {
    Real seconds = 0.0;
    Index distinct_vertices = 0;
};

struct TrainResult {
    ModelParams final_params;
    ModelParams best_params;  // highest validation micro-F1 checkpoint
    Real best_val_f1 = 0.0;
    Index best_epoch = 0;
    std::vector<EpochStats> epochs;
    std::optional<AdamState> adam;  // final state, for checkpointing
};

/// Batched training. Importance mode computes q once before the loop;
/// precompute replaces input-layer sampling with rows of U = A * H0.
/// Deterministic given the seed. batch_log, when given, receives one record
/// per gradient step.
TrainResult train(const LabeledGraphDataset& dataset, const TrainConfig& config,
                  std::vector<BatchRecord>* batch_log = nullptr);

/// Runs just enough epochs to time warmup + measured gradient steps and
/// returns the measured records.
std::vector<BatchRecord> bench_batches(const LabeledGraphDataset& dataset,
                                       const TrainConfig& config, Index warmup, Index measured);

}  // namespace fastgcn
