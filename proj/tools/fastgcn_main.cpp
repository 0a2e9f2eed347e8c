// Command-line front end: train / eval / variance / bench / synth.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric divergence.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fastgcn/dataio.hpp"
#include "fastgcn/metrics.hpp"
#include "fastgcn/trainer.hpp"
#include "fastgcn/variance_lab.hpp"

namespace fs = std::filesystem;
using namespace fastgcn;

namespace {

constexpr const char* kVersion = "fastgcn 1.0.0";

std::string format_real(Real v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

fs::path data_root() {
    if (const char* env = std::getenv("FASTGCN_DATA_DIR")) return fs::path(env);
    return fs::path("data");
}

/// --data accepts either a manifest path or a dataset name under the data
/// root (<root>/<name>/<name>.manifest.txt).
fs::path resolve_manifest(const std::string& data_arg) {
    const fs::path direct(data_arg);
    if (fs::exists(direct) && fs::is_regular_file(direct)) return direct;
    const fs::path named = data_root() / data_arg / (data_arg + ".manifest.txt");
    if (fs::exists(named)) return named;
    throw DataError("dataset not found: no file '" + data_arg + "' and no manifest at " +
                    named.string());
}

struct TrainFlags {
    std::string data;
    std::string mode = "importance";
    Index t0 = 400;
    Index t1 = 400;
    Index batch_size = 256;
    Real lr = 0.01;
    std::string optimizer = "adam";
    Index epochs = 100;
    Index hidden = 16;
    bool precompute = true;
    std::uint64_t seed = 1;
    std::string out = "runs";
};

TrainMode parse_mode(const std::string& mode) {
    if (mode == "uniform") return TrainMode::kUniform;
    if (mode == "importance") return TrainMode::kImportance;
    if (mode == "full") return TrainMode::kFullBatch;
    throw std::invalid_argument("unknown mode: " + mode);
}

TrainConfig to_config(const TrainFlags& flags) {
    TrainConfig config;
    config.mode = parse_mode(flags.mode);
    config.sample_counts = {flags.t0, flags.t1};
    config.hidden_dims = {flags.hidden};
    config.batch_size = flags.batch_size;
    config.learning_rate = flags.lr;
    config.optimizer = flags.optimizer == "sgd" ? OptimizerKind::kSgd : OptimizerKind::kAdam;
    config.epochs = flags.epochs;
    config.precompute = flags.precompute;
    config.seed = flags.seed;
    return config;
}

std::string config_echo(const TrainFlags& flags, const std::string& dataset_name) {
    return "data=" + dataset_name + " mode=" + flags.mode + " t0=" + std::to_string(flags.t0) +
           " t1=" + std::to_string(flags.t1) + " batch_size=" + std::to_string(flags.batch_size) +
           " lr=" + format_real(flags.lr) + " optimizer=" + flags.optimizer +
           " epochs=" + std::to_string(flags.epochs) + " hidden=" + std::to_string(flags.hidden) +
           " precompute=" + (flags.precompute ? "1" : "0") +
           " seed=" + std::to_string(flags.seed);
}

void write_stats_csv(const fs::path& path, const std::vector<EpochStats>& stats) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "epoch,mean_loss,batch_time_s,epoch_time_s,distinct_vertices,val_f1\n";
    for (const auto& row : stats) {
        out << row.epoch << ',' << format_real(row.mean_loss) << ','
            << format_real(row.batch_time_s) << ',' << format_real(row.epoch_time_s) << ','
            << row.distinct_vertices << ',' << format_real(row.val_f1) << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

int cmd_train(const TrainFlags& flags, const std::string& command_line) {
    const auto started = std::chrono::steady_clock::now();
    const LabeledGraphDataset dataset = load_dataset(resolve_manifest(flags.data));
    const TrainConfig config = to_config(flags);
    const TrainResult result = train(dataset, config);

    fs::create_directories(flags.out);
    const fs::path out_dir(flags.out);
    write_stats_csv(out_dir / "stats.csv", result.epochs);

    Checkpoint ckpt;
    ckpt.params = result.best_params;
    ckpt.config = config_echo(flags, dataset.name);
    save_checkpoint(ckpt, out_dir / "checkpoint.ckpt");

    const SparseMatrix a = build_normalized_adjacency(dataset.edges, dataset.num_nodes);
    const Real test_f1 = micro_f1(predict_full(dataset, a, result.best_params, dataset.test_idx));
    const Real total_seconds =
        std::chrono::duration<Real>(std::chrono::steady_clock::now() - started).count();

    {
        std::ofstream run(out_dir / "run.txt");
        if (!run) throw DataError("cannot write " + (out_dir / "run.txt").string());
        run << "version " << kVersion << '\n';
        run << "command " << command_line << '\n';
        run << "config " << ckpt.config << '\n';
        run << "epochs_run " << result.epochs.size() << '\n';
        run << "best_epoch " << result.best_epoch << '\n';
        run << "best_val_f1 " << format_real(result.best_val_f1) << '\n';
        run << "test_f1 " << format_real(test_f1) << '\n';
        run << "total_wall_s " << format_real(total_seconds) << '\n';
    }

    std::cout << "best epoch " << result.best_epoch << ", val micro-F1 "
              << format_real(result.best_val_f1) << ", test micro-F1 " << format_real(test_f1)
              << '\n';
    std::cout << "wrote " << (out_dir / "checkpoint.ckpt").string() << ", "
              << (out_dir / "stats.csv").string() << ", " << (out_dir / "run.txt").string()
              << '\n';
    return 0;
}

struct EvalFlags {
    std::string data;
    std::string checkpoint;
    std::string out = "predictions.csv";
};

int cmd_eval(const EvalFlags& flags) {
    const LabeledGraphDataset dataset = load_dataset(resolve_manifest(flags.data));
    const Checkpoint ckpt = load_checkpoint(flags.checkpoint);

    const auto dims = ckpt.params.dims();
    if (dims.front() != dataset.features.cols()) {
        throw DataError("checkpoint input dimension " + std::to_string(dims.front()) +
                        " does not match dataset feature dimension " +
                        std::to_string(dataset.features.cols()));
    }
    if (dims.back() != static_cast<Index>(dataset.num_classes)) {
        throw DataError("checkpoint output dimension " + std::to_string(dims.back()) +
                        " does not match dataset class count " +
                        std::to_string(dataset.num_classes));
    }

    const SparseMatrix a = build_normalized_adjacency(dataset.edges, dataset.num_nodes);
    const PredictionSet pred = predict_full(dataset, a, ckpt.params, dataset.test_idx);

    std::ofstream out(flags.out);
    if (!out) throw DataError("cannot write " + flags.out);
    out << "node,predicted,label\n";
    for (std::size_t i = 0; i < pred.nodes.size(); ++i) {
        out << pred.nodes[i] << ',' << pred.predicted[i] << ',' << pred.actual[i] << '\n';
    }

    char f1_text[16];
    std::snprintf(f1_text, sizeof(f1_text), "%.4f", micro_f1(pred));
    std::cout << "test micro-F1: " << f1_text << '\n';
    return 0;
}

struct VarianceFlags {
    Index snapshots = 20;
    Index min_n = 4;
    Index max_n = 10;
    Index outer_samples = 2;
    Index inner_samples = 2;
    Index trials = 100000;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_variance(const VarianceFlags& flags) {
    if (flags.min_n == 0 || flags.max_n < flags.min_n) {
        throw std::invalid_argument("variance: need 1 <= min-n <= max-n");
    }
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!flags.out.empty()) {
        file.open(flags.out);
        if (!file) throw DataError("cannot write " + flags.out);
        out = &file;
    }
    *out << "snapshot,n,s,t,R,var_uniform,var_optimal,var_compromise,"
            "emp_uniform,se_uniform,emp_optimal,se_optimal,emp_compromise,se_compromise\n";

    RngState rng(flags.seed);
    for (Index i = 0; i < flags.snapshots; ++i) {
        RngState snap_rng = rng.split(2 * i);
        RngState trial_rng = rng.split(2 * i + 1);
        const Index n = flags.min_n + snap_rng.next_index(flags.max_n - flags.min_n + 1);
        const LayerSnapshot snap =
            random_snapshot(n, flags.outer_samples, flags.inner_samples, snap_rng);
        const VarianceReport report = make_variance_report(snap, flags.trials, trial_rng);

        if (report.var_optimal > report.var_uniform + 1e-12 ||
            report.var_optimal > report.var_compromise + 1e-12) {
            throw std::logic_error("variance: the optimal measure lost its lower-bound ordering");
        }
        *out << i << ',' << n << ',' << flags.outer_samples << ',' << flags.inner_samples << ','
             << format_real(report.r) << ',' << format_real(report.var_uniform) << ','
             << format_real(report.var_optimal) << ',' << format_real(report.var_compromise)
             << ',' << format_real(report.emp_uniform.variance) << ','
             << format_real(report.emp_uniform.standard_error) << ','
             << format_real(report.emp_optimal.variance) << ','
             << format_real(report.emp_optimal.standard_error) << ','
             << format_real(report.emp_compromise.variance) << ','
             << format_real(report.emp_compromise.standard_error) << '\n';
    }
    return 0;
}

struct BenchFlags {
    std::string data;
    Index t0 = 100;
    Index t1 = 100;
    Index batch_size = 256;
    Real lr = 0.01;
    Index warmup = 5;
    Index batches = 30;
    std::uint64_t seed = 1;
    std::string out;
};

Real median_seconds(std::vector<BatchRecord> records) {
    std::vector<Real> seconds;
    seconds.reserve(records.size());
    for (const auto& r : records) seconds.push_back(r.seconds);
    std::sort(seconds.begin(), seconds.end());
    const std::size_t mid = seconds.size() / 2;
    return seconds.size() % 2 ? seconds[mid] : 0.5 * (seconds[mid - 1] + seconds[mid]);
}

int cmd_bench(const BenchFlags& flags) {
    const LabeledGraphDataset dataset = load_dataset(resolve_manifest(flags.data));

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!flags.out.empty()) {
        file.open(flags.out);
        if (!file) throw DataError("cannot write " + flags.out);
        out = &file;
    }
    *out << "contender,precompute,t0,t1,batch_size,median_batch_s,max_distinct_vertices\n";

    struct Contender {
        const char* name;
        TrainMode mode;
        bool precompute;
    };
    const Contender contenders[] = {
        {"fastgcn-importance", TrainMode::kImportance, true},
        {"fastgcn-importance", TrainMode::kImportance, false},
        {"fastgcn-uniform", TrainMode::kUniform, true},
        {"fastgcn-uniform", TrainMode::kUniform, false},
        {"gcn-full-batch", TrainMode::kFullBatch, false},
    };
    for (const auto& contender : contenders) {
        TrainConfig config;
        config.mode = contender.mode;
        config.sample_counts = {flags.t0, flags.t1};
        config.batch_size = flags.batch_size;  // identical across contenders
        config.learning_rate = flags.lr;
        config.precompute = contender.precompute;
        config.seed = flags.seed;
        config.epochs = 1;  // bench_batches extends as needed

        const auto records = bench_batches(dataset, config, flags.warmup, flags.batches);
        Index max_distinct = 0;
        for (const auto& r : records) max_distinct = std::max(max_distinct, r.distinct_vertices);
        *out << contender.name << ',' << (contender.precompute ? 1 : 0) << ',' << flags.t0 << ','
             << flags.t1 << ',' << flags.batch_size << ',' << format_real(median_seconds(records))
             << ',' << max_distinct << '\n';
    }
    return 0;
}

struct SynthFlags {
    Index blocks = 2;
    Index nodes_per_block = 30;
    Real p_in = 0.3;
    Real p_out = 0.05;
    Real noise = 0.3;
    std::uint64_t seed = 1;
    std::string name = "sbm";
    std::string out = "data";
};

int cmd_synth(const SynthFlags& flags) {
    LabeledGraphDataset ds = generate_sbm(flags.blocks, flags.nodes_per_block, flags.p_in,
                                          flags.p_out, flags.noise, flags.seed);
    ds.name = flags.name;
    const fs::path manifest = save_dataset(ds, fs::path(flags.out) / flags.name);
    std::cout << "wrote " << manifest.string() << " (" << ds.num_nodes << " nodes, "
              << ds.edges.size() << " edges)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sampling-based minibatch training for graph convolutional networks"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    TrainFlags train_flags;
    CLI::App* train_cmd = app.add_subcommand("train", "Train a model and write checkpoint/stats");
    train_cmd->add_option("--data", train_flags.data,
                          "Dataset name under the data root (or FASTGCN_DATA_DIR), "
                          "or a manifest path")->required();
    train_cmd->add_option("--mode", train_flags.mode, "Sampling mode: importance, uniform, full")
        ->capture_default_str()
        ->check(CLI::IsMember({"importance", "uniform", "full"}));
    train_cmd->add_option("--t0", train_flags.t0, "Input-layer sample count (ignored with --precompute)")
        ->capture_default_str();
    train_cmd->add_option("--t1", train_flags.t1, "Hidden-layer sample count")->capture_default_str();
    train_cmd->add_option("--batch-size", train_flags.batch_size, "Output vertices per batch")
        ->capture_default_str();
    train_cmd->add_option("--lr", train_flags.lr, "Learning rate")->capture_default_str();
    train_cmd->add_option("--optimizer", train_flags.optimizer, "adam or sgd")
        ->capture_default_str()
        ->check(CLI::IsMember({"adam", "sgd"}));
    train_cmd->add_option("--epochs", train_flags.epochs, "Training epochs")->capture_default_str();
    train_cmd->add_option("--hidden", train_flags.hidden, "Hidden layer width")->capture_default_str();
    train_cmd->add_flag("--precompute,!--no-precompute", train_flags.precompute,
                        "Precompute the input-layer product once instead of sampling layer 0")
        ->capture_default_str();
    train_cmd->add_option("--seed", train_flags.seed, "RNG seed; runs are bit-reproducible")
        ->capture_default_str();
    train_cmd->add_option("--out", train_flags.out, "Output directory")->capture_default_str();

    EvalFlags eval_flags;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Score a checkpoint on the test split");
    eval_cmd->add_option("--data", eval_flags.data, "Dataset name or manifest path")->required();
    eval_cmd->add_option("--checkpoint", eval_flags.checkpoint, "Checkpoint path")->required();
    eval_cmd->add_option("--out", eval_flags.out, "Predictions CSV path")->capture_default_str();

    VarianceFlags variance_flags;
    CLI::App* variance_cmd =
        app.add_subcommand("variance", "Analytic vs Monte Carlo layer-variance report");
    variance_cmd->add_option("--snapshots", variance_flags.snapshots, "Number of random snapshots")
        ->capture_default_str();
    variance_cmd->add_option("--min-n", variance_flags.min_n, "Smallest snapshot size")
        ->capture_default_str();
    variance_cmd->add_option("--max-n", variance_flags.max_n, "Largest snapshot size")
        ->capture_default_str();
    variance_cmd->add_option("--outer-samples", variance_flags.outer_samples,
                             "Outer (v) draws per trial")->capture_default_str();
    variance_cmd->add_option("--inner-samples", variance_flags.inner_samples,
                             "Inner (u) draws per outer draw")->capture_default_str();
    variance_cmd->add_option("--trials", variance_flags.trials, "Monte Carlo trials per measure")
        ->capture_default_str();
    variance_cmd->add_option("--seed", variance_flags.seed, "RNG seed")->capture_default_str();
    variance_cmd->add_option("--out", variance_flags.out, "CSV path (default: stdout)");

    BenchFlags bench_flags;
    CLI::App* bench_cmd =
        app.add_subcommand("bench", "Median per-batch training time per contender");
    bench_cmd->add_option("--data", bench_flags.data, "Dataset name or manifest path")->required();
    bench_cmd->add_option("--t0", bench_flags.t0, "Input-layer sample count")->capture_default_str();
    bench_cmd->add_option("--t1", bench_flags.t1, "Hidden-layer sample count")->capture_default_str();
    bench_cmd->add_option("--batch-size", bench_flags.batch_size, "Output vertices per batch")
        ->capture_default_str();
    bench_cmd->add_option("--lr", bench_flags.lr, "Learning rate")->capture_default_str();
    bench_cmd->add_option("--warmup", bench_flags.warmup, "Untimed warmup batches")
        ->capture_default_str();
    bench_cmd->add_option("--batches", bench_flags.batches, "Timed batches")->capture_default_str();
    bench_cmd->add_option("--seed", bench_flags.seed, "RNG seed")->capture_default_str();
    bench_cmd->add_option("--out", bench_flags.out, "CSV path (default: stdout)");

    SynthFlags synth_flags;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a stochastic block model dataset");
    synth_cmd->add_option("--blocks", synth_flags.blocks, "Number of blocks (= classes)")
        ->capture_default_str();
    synth_cmd->add_option("--nodes-per-block", synth_flags.nodes_per_block, "Nodes per block")
        ->capture_default_str();
    synth_cmd->add_option("--p-in", synth_flags.p_in, "Within-block edge probability")
        ->capture_default_str();
    synth_cmd->add_option("--p-out", synth_flags.p_out, "Cross-block edge probability")
        ->capture_default_str();
    synth_cmd->add_option("--noise", synth_flags.noise, "Feature noise standard deviation")
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth_flags.seed, "RNG seed")->capture_default_str();
    synth_cmd->add_option("--name", synth_flags.name, "Dataset name")->capture_default_str();
    synth_cmd->add_option("--out", synth_flags.out, "Data root to write into")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 1;
    }

    std::string command_line;
    for (int i = 0; i < argc; ++i) {
        if (i) command_line += ' ';
        command_line += argv[i];
    }

    try {
        if (train_cmd->parsed()) return cmd_train(train_flags, command_line);
        if (eval_cmd->parsed()) return cmd_eval(eval_flags);
        if (variance_cmd->parsed()) return cmd_variance(variance_flags);
        if (bench_cmd->parsed()) return cmd_bench(bench_flags);
        if (synth_cmd->parsed()) return cmd_synth(synth_flags);
    } catch (const DivergenceError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 3;
    } catch (const DataError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    } catch (const std::out_of_range& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    return 1;
}
