#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "fastgcn/dataio.hpp"
#include "fastgcn/metrics.hpp"
#include "fastgcn/trainer.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace fastgcn;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("fastgcn_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_SUITE("dataio") {

TEST_CASE("sbm with extreme probabilities gives disjoint cliques") {
    const LabeledGraphDataset ds = generate_sbm(2, 5, 1.0, 0.0, 0.0, 1);
    CHECK(ds.num_nodes == 10);
    CHECK(ds.num_classes == 2);
    // Every within-block pair, no cross edges.
    CHECK(ds.edges.size() == 2 * 10);
    for (const auto& [u, v] : ds.edges) CHECK(ds.labels[u] == ds.labels[v]);
    CHECK(ds.train_idx.size() == 6);
    CHECK(ds.val_idx.size() == 2);
    CHECK(ds.test_idx.size() == 2);
}

TEST_CASE("sbm is reproducible for a fixed seed") {
    const LabeledGraphDataset a = generate_sbm(3, 8, 0.5, 0.1, 0.25, 77);
    const LabeledGraphDataset b = generate_sbm(3, 8, 0.5, 0.1, 0.25, 77);
    CHECK(a.edges == b.edges);
    CHECK(a.features.data() == b.features.data());
    CHECK(a.labels == b.labels);
    CHECK(a.train_idx == b.train_idx);
    const LabeledGraphDataset c = generate_sbm(3, 8, 0.5, 0.1, 0.25, 78);
    CHECK(a.edges != c.edges);
}

TEST_CASE("noise-free sbm features are separable by a full-batch dense model") {
    // Disjoint blocks keep the convolved features block-pure, so perfect
    // training accuracy is reachable.
    const LabeledGraphDataset ds = generate_sbm(2, 15, 0.4, 0.0, 0.0, 5);
    TrainConfig config;
    config.mode = TrainMode::kFullBatch;
    config.hidden_dims = {4};
    config.batch_size = ds.train_idx.size();
    config.learning_rate = 0.05;
    config.optimizer = OptimizerKind::kAdam;
    config.epochs = 60;
    config.seed = 9;
    const TrainResult result = train(ds, config);
    const SparseMatrix a = build_normalized_adjacency(ds.edges, ds.num_nodes);
    CHECK(micro_f1(predict_full(ds, a, result.final_params, ds.train_idx)) == 1.0);
}

TEST_CASE("sbm parameter validation") {
    CHECK_THROWS_AS(generate_sbm(2, 5, 0.2, 0.5, 0.1, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_sbm(2, 5, 1.5, 0.0, 0.1, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_sbm(0, 5, 0.5, 0.1, 0.1, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_sbm(2, 5, 0.5, 0.1, -0.1, 1), std::invalid_argument);
}

TEST_CASE("sbm within-block edge counts follow the block probability") {
    const Index m = 200;
    const Real p_in = 0.1;
    const Real expected = p_in * static_cast<Real>(m * (m - 1) / 2) * 2.0;  // two blocks
    Real total = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const LabeledGraphDataset ds = generate_sbm(2, m, p_in, 0.01, 0.0, seed);
        for (const auto& [u, v] : ds.edges) {
            if (ds.labels[u] == ds.labels[v]) total += 1.0;
        }
    }
    CHECK(std::abs(total / 10.0 - expected) / expected < 0.05);
}

TEST_CASE("dataset save and load round-trips every field") {
    const fs::path dir = fresh_dir("roundtrip");
    LabeledGraphDataset ds = generate_sbm(2, 10, 0.4, 0.1, 0.3, 13);
    ds.name = "unit";
    const fs::path manifest = save_dataset(ds, dir);
    const LabeledGraphDataset loaded = load_dataset(manifest);

    CHECK(loaded.name == ds.name);
    CHECK(loaded.num_nodes == ds.num_nodes);
    CHECK(loaded.num_classes == ds.num_classes);
    CHECK(loaded.edges == ds.edges);
    CHECK(loaded.labels == ds.labels);
    CHECK(loaded.train_idx == ds.train_idx);
    CHECK(loaded.val_idx == ds.val_idx);
    CHECK(loaded.test_idx == ds.test_idx);
    // Shortest-round-trip formatting keeps features bitwise.
    CHECK(loaded.features.data() == ds.features.data());
    fs::remove_all(dir);
}

TEST_CASE("loading rejects count mismatches against the manifest") {
    const fs::path dir = fresh_dir("integrity");
    LabeledGraphDataset ds = generate_sbm(2, 5, 0.6, 0.1, 0.1, 3);
    ds.name = "bad";
    const fs::path manifest_path = save_dataset(ds, dir);

    DatasetManifest manifest = DatasetManifest::load(manifest_path);
    manifest.nodes = 11;  // one more than the files contain
    manifest.save(manifest_path);
    CHECK_THROWS_AS(load_dataset(manifest_path), DataError);

    manifest = DatasetManifest::load(manifest_path);
    manifest.nodes = 10;
    manifest.edges += 1;
    manifest.save(manifest_path);
    CHECK_THROWS_AS(load_dataset(manifest_path), DataError);

    CHECK_THROWS_AS(load_dataset(dir / "missing.manifest.txt"), DataError);
    fs::remove_all(dir);
}

TEST_CASE("loading rejects malformed features and overlapping splits") {
    const fs::path dir = fresh_dir("malformed");
    LabeledGraphDataset ds = generate_sbm(2, 5, 0.6, 0.1, 0.1, 3);
    ds.name = "bad";
    const fs::path manifest_path = save_dataset(ds, dir);

    {
        std::ofstream feat(dir / "bad.feat.csv");
        for (Index i = 0; i < 10; ++i) feat << (i == 4 ? "nan,1\n" : "0.5,1\n");
    }
    CHECK_THROWS_AS(load_dataset(manifest_path), DataError);

    save_dataset(ds, dir);
    {
        std::ofstream split(dir / "bad.split.txt");
        split << "fastgcn-split v1\n";
        split << "train range 0 6\n";
        split << "val range 5 8\n";  // overlaps train
        split << "test range 8 10\n";
    }
    CHECK_THROWS_AS(load_dataset(manifest_path), DataError);
    fs::remove_all(dir);
}

TEST_CASE("split ranges and lists load equivalently") {
    const fs::path dir = fresh_dir("split");
    LabeledGraphDataset ds = generate_sbm(2, 5, 0.6, 0.1, 0.1, 3);
    ds.name = "ranges";
    ds.train_idx = {0, 1, 2, 3, 4, 5};
    ds.val_idx = {6, 7};
    ds.test_idx = {8, 9};
    const fs::path manifest_path = save_dataset(ds, dir);
    {
        std::ofstream split(dir / "ranges.split.txt");
        split << "fastgcn-split v1\n";
        split << "train range 0 4\n";
        split << "train list 4 5\n";
        split << "val range 6 8\n";
        split << "test list 8 9\n";
    }
    const LabeledGraphDataset loaded = load_dataset(manifest_path);
    CHECK(loaded.train_idx == ds.train_idx);
    CHECK(loaded.val_idx == ds.val_idx);
    CHECK(loaded.test_idx == ds.test_idx);
    fs::remove_all(dir);
}

TEST_CASE("checkpoints round-trip bitwise") {
    const fs::path dir = fresh_dir("ckpt");
    std::mt19937 gen(5);
    Checkpoint ckpt;
    ckpt.params = testutil::random_params({7, 4, 3}, gen);
    ckpt.adam = AdamState::zeros_like(ckpt.params);
    ckpt.adam->step = 17;
    for (auto& m : ckpt.adam->m) m = testutil::random_dense(m.rows(), m.cols(), gen);
    for (auto& v : ckpt.adam->v) v = testutil::random_dense(v.rows(), v.cols(), gen, 0.0, 1.0);
    ckpt.config = "mode=importance t1=400 seed=1";

    const fs::path path = dir / "model.ckpt";
    save_checkpoint(ckpt, path);
    const Checkpoint loaded = load_checkpoint(path);

    REQUIRE(loaded.params.weights.size() == 2);
    for (std::size_t l = 0; l < 2; ++l) {
        CHECK(loaded.params.weights[l].data() == ckpt.params.weights[l].data());
        CHECK(loaded.adam->m[l].data() == ckpt.adam->m[l].data());
        CHECK(loaded.adam->v[l].data() == ckpt.adam->v[l].data());
    }
    CHECK(loaded.adam->step == 17);
    CHECK(loaded.config == ckpt.config);
    fs::remove_all(dir);
}

TEST_CASE("truncated checkpoints are rejected without partial state") {
    const fs::path dir = fresh_dir("ckpt_trunc");
    std::mt19937 gen(6);
    Checkpoint ckpt;
    ckpt.params = testutil::random_params({5, 3}, gen);
    const fs::path path = dir / "model.ckpt";
    save_checkpoint(ckpt, path);

    const auto size = fs::file_size(path);
    fs::resize_file(path, size - 9);
    CHECK_THROWS_AS(load_checkpoint(path), DataError);

    std::ofstream garbage(dir / "garbage.ckpt");
    garbage << "not a checkpoint\n";
    garbage.close();
    CHECK_THROWS_AS(load_checkpoint(dir / "garbage.ckpt"), DataError);
    fs::remove_all(dir);
}

TEST_CASE("dimension mismatches between checkpoint and dataset are caught") {
    // A model trained on 1433-dimensional inputs cannot score 500-dimensional
    // features; the error must name both sizes.
    std::mt19937 gen(7);
    Checkpoint ckpt;
    ckpt.params = testutil::random_params({1433, 16, 7}, gen);

    const LabeledGraphDataset ds = generate_sbm(2, 5, 0.6, 0.1, 0.1, 3);  // 2 features
    const SparseMatrix a = build_normalized_adjacency(ds.edges, ds.num_nodes);
    try {
        predict_full(ds, a, ckpt.params, ds.test_idx);
        FAIL("expected a dimension error");
    } catch (const std::invalid_argument& err) {
        const std::string message = err.what();
        CHECK(message.find("1433") != std::string::npos);
        CHECK(message.find("2") != std::string::npos);
    }
}

}  // TEST_SUITE
