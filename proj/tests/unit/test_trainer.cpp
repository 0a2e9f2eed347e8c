#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "fastgcn/metrics.hpp"
#include "fastgcn/trainer.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace fastgcn;

namespace {

LabeledGraphDataset desk_sbm(std::uint64_t seed = 11, Real noise = 0.3) {
    return generate_sbm(2, 30, 0.3, 0.05, noise, seed);
}

TrainConfig desk_config() {
    TrainConfig config;
    config.mode = TrainMode::kImportance;
    config.sample_counts = {15, 15};
    config.hidden_dims = {8};
    config.batch_size = 12;
    config.learning_rate = 0.01;
    config.optimizer = OptimizerKind::kAdam;
    config.epochs = 30;
    config.precompute = true;
    config.seed = 1;
    return config;
}

Real train_f1(const LabeledGraphDataset& ds, const ModelParams& params,
              const std::vector<Index>& nodes) {
    const SparseMatrix a = build_normalized_adjacency(ds.edges, ds.num_nodes);
    return micro_f1(predict_full(ds, a, params, nodes));
}

/// Plain dense full-batch trainer used as the trajectory oracle. Everything
/// runs on nested vectors through the test-side dense kernels.
std::vector<double> oracle_full_batch_losses(const LabeledGraphDataset& ds,
                                             std::vector<oracle::Grid> weights, double lr,
                                             int steps) {
    std::vector<std::pair<std::size_t, std::size_t>> edges(ds.edges.begin(), ds.edges.end());
    const oracle::Grid a_hat = oracle::dense_normalized_adjacency(edges, ds.num_nodes);
    const oracle::Grid h0 = testutil::to_grid(ds.features);
    std::vector<std::size_t> batch(ds.train_idx.begin(), ds.train_idx.end());
    std::vector<int> labels;
    for (Index v : ds.train_idx) labels.push_back(ds.labels[v]);

    std::vector<double> losses;
    for (int s = 0; s < steps; ++s) {
        const oracle::Grid logits = oracle::dense_gcn_logits(a_hat, h0, weights);
        losses.push_back(oracle::dense_ce_loss(logits, batch, labels));
        const auto grads = oracle::dense_gcn_gradients(a_hat, h0, weights, batch, labels);
        for (std::size_t l = 0; l < weights.size(); ++l) {
            for (std::size_t i = 0; i < weights[l].size(); ++i) {
                for (std::size_t j = 0; j < weights[l][0].size(); ++j) {
                    weights[l][i][j] -= lr * grads[l][i][j];
                }
            }
        }
    }
    return losses;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("optimizer steps: sgd basics and the adam first step") {
    ModelParams params;
    params.weights.push_back(DenseMatrix(2, 2));
    GradientSet zero_grads{DenseMatrix(2, 2)};
    sgd_step(params, zero_grads, 0.5);
    for (Real v : params.weights[0].data()) CHECK(v == 0.0);

    GradientSet grads{DenseMatrix(2, 2)};
    grads[0](0, 0) = 3.0;
    grads[0](0, 1) = -2.0;
    grads[0](1, 1) = 0.25;
    sgd_step(params, grads, 1.0);
    CHECK(params.weights[0](0, 0) == -3.0);
    CHECK(params.weights[0](0, 1) == 2.0);
    CHECK(params.weights[0](1, 0) == 0.0);
    CHECK(params.weights[0](1, 1) == -0.25);

    // First Adam step: bias correction makes the update lr * g / (|g| + eps).
    ModelParams fresh;
    fresh.weights.push_back(DenseMatrix(2, 2));
    AdamState state = AdamState::zeros_like(fresh);
    const Real lr = 0.1;
    adam_step(fresh, grads, state, lr);
    CHECK(state.step == 1);
    for (Index i = 0; i < 2; ++i) {
        for (Index j = 0; j < 2; ++j) {
            const Real g = grads[0](i, j);
            const Real expected = g == 0.0 ? 0.0 : -lr * g / (std::abs(g) + 1e-8);
            CHECK(fresh.weights[0](i, j) == doctest::Approx(expected).epsilon(1e-9));
        }
    }

    GradientSet bad{DenseMatrix(3, 2)};
    CHECK_THROWS_AS(sgd_step(fresh, bad, 0.1), std::invalid_argument);
}

TEST_CASE("one optimizer step when the batch covers the training split") {
    const LabeledGraphDataset ds = desk_sbm();
    TrainConfig config = desk_config();
    config.epochs = 1;
    config.batch_size = ds.train_idx.size() + 10;

    std::vector<BatchRecord> log;
    const TrainResult result = train(ds, config, &log);
    CHECK(log.size() == 1);
    CHECK(result.epochs.size() == 1);
    CHECK(result.epochs[0].epoch == 1);
}

TEST_CASE("importance training separates the two-block dataset") {
    const LabeledGraphDataset ds = desk_sbm();

    // The dense full-batch oracle must solve it first; otherwise the
    // dataset, not the trainer, is at fault.
    RngState init_rng(1);
    const ModelParams start = ModelParams::glorot({2, 8, 2}, init_rng);
    const auto oracle_losses =
        oracle_full_batch_losses(ds, testutil::to_grids(start.weights), 0.5, 120);
    CHECK(oracle_losses.back() < 0.15);

    const TrainResult result = train(ds, desk_config());
    CHECK(train_f1(ds, result.final_params, ds.train_idx) >= 0.95);
}

TEST_CASE("training is bitwise deterministic for a fixed seed") {
    const LabeledGraphDataset ds = desk_sbm();
    TrainConfig config = desk_config();
    config.epochs = 5;
    const TrainResult a = train(ds, config);
    const TrainResult b = train(ds, config);
    REQUIRE(a.final_params.weights.size() == b.final_params.weights.size());
    for (std::size_t l = 0; l < a.final_params.weights.size(); ++l) {
        CHECK(a.final_params.weights[l].data() == b.final_params.weights[l].data());
    }
    CHECK(a.best_epoch == b.best_epoch);
}

TEST_CASE("full-batch mode follows the dense oracle's loss trajectory") {
    const LabeledGraphDataset ds = desk_sbm(19, 0.2);
    TrainConfig config;
    config.mode = TrainMode::kFullBatch;
    config.hidden_dims = {8};
    config.batch_size = ds.train_idx.size();  // one step per epoch
    config.learning_rate = 0.3;
    config.optimizer = OptimizerKind::kSgd;
    config.epochs = 5;
    config.seed = 2;

    // Replicate the trainer's initialization stream to share the start point.
    RngState init_rng(config.seed);
    const ModelParams start =
        ModelParams::glorot({ds.features.cols(), 8, static_cast<Index>(ds.num_classes)}, init_rng);
    const auto expected =
        oracle_full_batch_losses(ds, testutil::to_grids(start.weights), 0.3, 5);

    const TrainResult result = train(ds, config);
    REQUIRE(result.epochs.size() == 5);
    for (int s = 0; s < 5; ++s) {
        CHECK(std::abs(result.epochs[s].mean_loss - expected[s]) < 1e-8);
    }
}

TEST_CASE("every batch respects the distinct-vertex budget") {
    const LabeledGraphDataset ds = desk_sbm();
    TrainConfig config = desk_config();
    config.precompute = false;
    config.sample_counts = {7, 9};
    config.batch_size = 8;
    config.epochs = 3;

    std::vector<BatchRecord> log;
    const TrainResult result = train(ds, config, &log);
    CHECK(!log.empty());
    for (const auto& record : log) {
        CHECK(record.distinct_vertices <= config.batch_size + 7 + 9);
    }
    for (const auto& stats : result.epochs) {
        CHECK(stats.distinct_vertices <= config.batch_size + 7 + 9);
    }

    // With precompute only the sampled layer counts.
    config.precompute = true;
    std::vector<BatchRecord> pre_log;
    train(ds, config, &pre_log);
    for (const auto& record : pre_log) {
        CHECK(record.distinct_vertices <= config.batch_size + 9);
    }
}

TEST_CASE("importance sampling scores at least as well as uniform on the desk dataset") {
    // Mean validation F1 over 20 seeds at a small sample budget.
    const LabeledGraphDataset ds = desk_sbm(23, 0.4);
    Real importance_sum = 0.0, uniform_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        TrainConfig config = desk_config();
        config.sample_counts = {10, 10};
        config.epochs = 20;
        config.seed = seed;

        config.mode = TrainMode::kImportance;
        importance_sum += train(ds, config).best_val_f1;
        config.mode = TrainMode::kUniform;
        uniform_sum += train(ds, config).best_val_f1;
    }
    CHECK(importance_sum / 20.0 >= uniform_sum / 20.0);
}

TEST_CASE("divergence raises an error naming the failing step") {
    LabeledGraphDataset ds = desk_sbm();
    // Finite but overflow-scale features: the first forward pass produces
    // infinities and the loss turns NaN immediately.
    for (Real& v : ds.features.data()) v *= 1e308;
    TrainConfig config = desk_config();
    config.epochs = 3;
    try {
        train(ds, config);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& err) {
        CHECK(err.epoch == 1);
        CHECK(std::string(err.what()).find("epoch 1") != std::string::npos);
    }
}

TEST_CASE("config validation") {
    const LabeledGraphDataset ds = desk_sbm();
    TrainConfig config = desk_config();
    config.epochs = 0;
    CHECK_THROWS_AS(train(ds, config), std::invalid_argument);

    config = desk_config();
    config.learning_rate = 0.0;
    CHECK_THROWS_AS(train(ds, config), std::invalid_argument);

    config = desk_config();
    config.sample_counts = {5};
    CHECK_THROWS_AS(train(ds, config), std::invalid_argument);

    config = desk_config();
    config.precompute = false;
    config.sample_counts = {0, 5};
    CHECK_THROWS_AS(train(ds, config), std::invalid_argument);

    // t_0 is ignored under precompute.
    config = desk_config();
    config.precompute = true;
    config.sample_counts = {0, 5};
    CHECK_NOTHROW(train(ds, config));

    LabeledGraphDataset empty_train = ds;
    empty_train.train_idx.clear();
    CHECK_THROWS_AS(train(empty_train, desk_config()), std::invalid_argument);
}

TEST_CASE("bench produces the requested number of measured steps") {
    const LabeledGraphDataset ds = desk_sbm();
    TrainConfig config = desk_config();
    config.epochs = 1;
    const auto records = bench_batches(ds, config, 2, 5);
    CHECK(records.size() == 5);
    for (const auto& r : records) CHECK(r.seconds >= 0.0);
}

}  // TEST_SUITE
