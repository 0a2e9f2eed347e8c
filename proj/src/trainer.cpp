#include "fastgcn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "fastgcn/metrics.hpp"

namespace fastgcn {

namespace {

using Clock = std::chrono::steady_clock;

Real seconds_since(Clock::time_point start) {
    return std::chrono::duration<Real>(Clock::now() - start).count();
}

void validate_config(const TrainConfig& config, const LabeledGraphDataset& dataset) {
    if (config.epochs == 0) throw std::invalid_argument("train: epochs must be >= 1");
    if (config.batch_size == 0) throw std::invalid_argument("train: batch_size must be >= 1");
    if (!(config.learning_rate > 0.0)) {
        throw std::invalid_argument("train: learning rate must be > 0");
    }
    if (dataset.train_idx.empty()) throw std::invalid_argument("train: empty training split");
    if (config.mode != TrainMode::kFullBatch) {
        const Index n_layers = config.num_layers();
        if (config.sample_counts.size() != n_layers) {
            throw std::invalid_argument("train: expected " + std::to_string(n_layers) +
                                        " sample counts, got " +
                                        std::to_string(config.sample_counts.size()));
        }
        const Index first_sampled = config.precompute ? 1 : 0;
        for (Index l = first_sampled; l < n_layers; ++l) {
            if (config.sample_counts[l] == 0) {
                throw std::invalid_argument("train: sample count for layer " + std::to_string(l) +
                                            " must be >= 1");
            }
        }
    }
}

Index count_distinct(const LayerSampleSet& samples, std::vector<char>& mark,
                     std::vector<Index>& touched) {
    touched.clear();
    for (const auto& level : samples.levels) {
        for (Index u : level) {
            if (!mark[u]) {
                mark[u] = 1;
                touched.push_back(u);
            }
        }
    }
    for (Index u : touched) mark[u] = 0;
    return touched.size();
}

std::vector<Index> exhaustive_vertices(Index n) {
    std::vector<Index> all(n);
    std::iota(all.begin(), all.end(), Index{0});
    return all;
}

}  // namespace

TrainResult train(const LabeledGraphDataset& dataset, const TrainConfig& config,
                  std::vector<BatchRecord>* batch_log) {
    validate_config(config, dataset);
    const Index n = dataset.num_nodes;
    const Index n_layers = config.num_layers();

    const SparseMatrix a = build_normalized_adjacency(dataset.edges, n);

    // Algorithm step done once per run: the sampling distribution has no
    // layer or iteration dependence.
    std::optional<ImportanceDistribution> q;
    if (config.mode == TrainMode::kImportance) {
        q = compute_importance_distribution(a);
    }
    std::optional<DenseMatrix> u_product;
    if (config.precompute) {
        u_product = precompute_input_product(a, dataset.features);
    }

    std::vector<Index> dims;
    dims.push_back(dataset.features.cols());
    dims.insert(dims.end(), config.hidden_dims.begin(), config.hidden_dims.end());
    dims.push_back(static_cast<Index>(dataset.num_classes));

    RngState rng(config.seed);
    ModelParams params = ModelParams::glorot(dims, rng);
    AdamState adam = AdamState::zeros_like(params);

    // Sampled-layer counts; zero marks a layer that is not sampled.
    std::vector<Index> layer_counts(n_layers, 0);
    Index sampled_sum = 0;
    if (config.mode != TrainMode::kFullBatch) {
        for (Index l = config.precompute ? 1 : 0; l < n_layers; ++l) {
            layer_counts[l] = config.sample_counts[l];
            sampled_sum += config.sample_counts[l];
        }
    }
    const SamplingMode sampling_mode =
        config.mode == TrainMode::kImportance ? SamplingMode::kImportance : SamplingMode::kUniform;
    const std::vector<Index> all_vertices =
        config.mode == TrainMode::kFullBatch ? exhaustive_vertices(n) : std::vector<Index>{};

    TrainResult result;
    result.best_val_f1 = -1.0;
    std::vector<char> mark(n, 0);
    std::vector<Index> touched;
    std::vector<int> batch_labels;

    for (Index epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto epoch_start = Clock::now();
        const auto batches = epoch_batches(dataset.train_idx, config.batch_size, rng);
        Real loss_sum = 0.0;
        Real batch_seconds_sum = 0.0;
        Index max_distinct = 0;

        for (std::size_t b = 0; b < batches.size(); ++b) {
            const auto batch_start = Clock::now();

            LayerSampleSet samples;
            if (config.mode == TrainMode::kFullBatch) {
                samples.mode = SamplingMode::kUniform;
                samples.levels.assign(n_layers, all_vertices);
                samples.levels.push_back(batches[b]);
            } else {
                samples = draw_layer_samples(layer_counts, sampling_mode, n,
                                             q ? &*q : nullptr, batches[b], rng);
            }

            auto [logits, cache] = forward_sampled(a, dataset.features, params, samples,
                                                   q ? &*q : nullptr,
                                                   u_product ? &*u_product : nullptr);
            batch_labels.clear();
            for (Index v : batches[b]) batch_labels.push_back(dataset.labels[v]);
            auto [loss, d_logits] = loss_and_output_grad(logits, batch_labels);
            if (!std::isfinite(loss)) throw DivergenceError(epoch, b);

            const GradientSet grads = backward(cache, d_logits);
            if (config.optimizer == OptimizerKind::kAdam) {
                adam_step(params, grads, adam, config.learning_rate);
            } else {
                sgd_step(params, grads, config.learning_rate);
            }
            const Real batch_seconds = seconds_since(batch_start);

            const Index distinct = count_distinct(samples, mark, touched);
            if (config.mode != TrainMode::kFullBatch &&
                distinct > config.batch_size + sampled_sum) {
                // Guaranteed by construction: a batch touches at most the
                // batch itself plus every per-layer sample.
                throw std::logic_error("train: batch touched " + std::to_string(distinct) +
                                       " distinct vertices, bound is " +
                                       std::to_string(config.batch_size + sampled_sum));
            }

            loss_sum += loss;
            batch_seconds_sum += batch_seconds;
            max_distinct = std::max(max_distinct, distinct);
            if (batch_log) batch_log->push_back({batch_seconds, distinct});
        }
        const Real epoch_seconds = seconds_since(epoch_start);

        EpochStats stats;
        stats.epoch = epoch;
        stats.mean_loss = loss_sum / static_cast<Real>(batches.size());
        stats.batch_time_s = batch_seconds_sum / static_cast<Real>(batches.size());
        stats.epoch_time_s = epoch_seconds;
        stats.distinct_vertices = max_distinct;
        if (!dataset.val_idx.empty()) {
            stats.val_f1 = micro_f1(predict_full(dataset, a, params, dataset.val_idx));
        }
        result.epochs.push_back(stats);

        if (stats.val_f1 > result.best_val_f1) {
            result.best_val_f1 = stats.val_f1;
            result.best_epoch = epoch;
            result.best_params = params;
        }
    }

    if (result.best_epoch == 0) {
        result.best_params = params;
        result.best_val_f1 = 0.0;
    }
    result.final_params = std::move(params);
    result.adam = config.optimizer == OptimizerKind::kAdam ? std::optional<AdamState>(std::move(adam))
                                                           : std::nullopt;
    return result;
}

std::vector<BatchRecord> bench_batches(const LabeledGraphDataset& dataset,
                                       const TrainConfig& config, Index warmup, Index measured) {
    if (measured == 0) throw std::invalid_argument("bench_batches: nothing to measure");
    const Index per_epoch =
        (dataset.train_idx.size() + config.batch_size - 1) / config.batch_size;
    TrainConfig run = config;
    run.epochs = (warmup + measured + per_epoch - 1) / per_epoch;

    std::vector<BatchRecord> log;
    train(dataset, run, &log);
    if (log.size() < warmup + measured) {
        throw std::logic_error("bench_batches: fewer steps than requested");
    }
    return {log.begin() + static_cast<std::ptrdiff_t>(warmup),
            log.begin() + static_cast<std::ptrdiff_t>(warmup + measured)};
}

}  // namespace fastgcn
