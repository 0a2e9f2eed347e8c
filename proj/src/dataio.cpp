#include "fastgcn/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "fastgcn/sampling.hpp"

namespace fastgcn {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kManifestMagic = "fastgcn-manifest v1";
constexpr std::string_view kSplitMagic = "fastgcn-split v1";
constexpr std::string_view kCheckpointMagic = "fastgcn-ckpt v1";

std::string format_real(Real v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

Real parse_real(std::string_view text, const std::string& where) {
    Real v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw DataError(where + ": cannot parse real value '" + std::string(text) + "'");
    }
    return v;
}

std::uint64_t parse_count(std::string_view text, const std::string& where) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw DataError(where + ": cannot parse count '" + std::string(text) + "'");
    }
    return v;
}

std::ifstream open_text(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

void write_doubles(std::ofstream& out, const std::vector<Real>& values) {
    static_assert(sizeof(Real) == 8);
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(Real)));
}

void read_doubles(std::ifstream& in, std::vector<Real>& values, const fs::path& path) {
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(Real)));
    if (static_cast<std::size_t>(in.gcount()) != values.size() * sizeof(Real)) {
        throw DataError("checkpoint truncated: " + path.string());
    }
}

void validate_split_indices(const std::vector<Index>& idx, Index n, const std::string& which,
                            std::vector<char>& seen) {
    for (Index i : idx) {
        if (i >= n) {
            throw DataError("split: " + which + " index " + std::to_string(i) +
                            " outside [0, " + std::to_string(n) + ")");
        }
        if (seen[i]) {
            throw DataError("split: index " + std::to_string(i) +
                            " appears in more than one section");
        }
        seen[i] = 1;
    }
}

}  // namespace

DatasetManifest DatasetManifest::load(const fs::path& path) {
    std::ifstream in = open_text(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty manifest: " + path.string());
    strip_cr(line);
    if (line != kManifestMagic) {
        throw DataError("not a dataset manifest (bad first line): " + path.string());
    }
    DatasetManifest m;
    while (std::getline(in, line)) {
        strip_cr(line);
        if (line.empty()) continue;
        const std::size_t sp = line.find(' ');
        if (sp == std::string::npos) throw DataError("manifest: malformed line '" + line + "'");
        const std::string key = line.substr(0, sp);
        const std::string value = line.substr(sp + 1);
        const std::string where = "manifest " + key;
        if (key == "name") m.name = value;
        else if (key == "nodes") m.nodes = parse_count(value, where);
        else if (key == "edges") m.edges = parse_count(value, where);
        else if (key == "feature_dim") m.feature_dim = parse_count(value, where);
        else if (key == "classes") m.classes = static_cast<int>(parse_count(value, where));
        else if (key == "train_count") m.train_count = parse_count(value, where);
        else if (key == "val_count") m.val_count = parse_count(value, where);
        else if (key == "test_count") m.test_count = parse_count(value, where);
        else if (key == "edges_file") m.edges_file = value;
        else if (key == "features_file") m.features_file = value;
        else if (key == "labels_file") m.labels_file = value;
        else if (key == "split_file") m.split_file = value;
        else throw DataError("manifest: unknown key '" + key + "'");
    }
    if (m.name.empty() || m.edges_file.empty() || m.features_file.empty() ||
        m.labels_file.empty() || m.split_file.empty()) {
        throw DataError("manifest missing required fields: " + path.string());
    }
    return m;
}

void DatasetManifest::save(const fs::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << kManifestMagic << "\n"
        << "name " << name << "\n"
        << "nodes " << nodes << "\n"
        << "edges " << edges << "\n"
        << "feature_dim " << feature_dim << "\n"
        << "classes " << classes << "\n"
        << "train_count " << train_count << "\n"
        << "val_count " << val_count << "\n"
        << "test_count " << test_count << "\n"
        << "edges_file " << edges_file << "\n"
        << "features_file " << features_file << "\n"
        << "labels_file " << labels_file << "\n"
        << "split_file " << split_file << "\n";
    if (!out) throw DataError("write failed: " + path.string());
}

namespace {

std::vector<std::pair<Index, Index>> load_edges(const fs::path& path, Index n) {
    std::ifstream in = open_text(path);
    std::vector<std::pair<Index, Index>> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_fields(line, '\t');
        const std::string where = path.filename().string() + " line " + std::to_string(line_no);
        if (fields.size() != 2) throw DataError(where + ": expected 'u<TAB>v'");
        const Index u = parse_count(fields[0], where);
        const Index v = parse_count(fields[1], where);
        if (u >= n || v >= n) {
            throw DataError(where + ": endpoint " + std::to_string(std::max(u, v)) +
                            " outside [0, " + std::to_string(n) + ")");
        }
        edges.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

DenseMatrix load_features(const fs::path& path, Index n, Index dim) {
    std::ifstream in = open_text(path);
    DenseMatrix features(n, dim);
    std::string line;
    Index row = 0;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const std::string where = path.filename().string() + " line " + std::to_string(line_no);
        if (row >= n) throw DataError(where + ": more feature rows than declared nodes");
        const auto fields = split_fields(line, ',');
        if (fields.size() != dim) {
            throw DataError(where + ": " + std::to_string(fields.size()) +
                            " values, expected " + std::to_string(dim));
        }
        for (Index j = 0; j < dim; ++j) {
            const Real v = parse_real(fields[j], where);
            if (!std::isfinite(v)) throw DataError(where + ": non-finite feature value");
            features(row, j) = v;
        }
        ++row;
    }
    if (row != n) {
        throw DataError(path.filename().string() + ": " + std::to_string(row) +
                        " feature rows, manifest declares " + std::to_string(n));
    }
    return features;
}

std::vector<int> load_labels(const fs::path& path, Index n, int classes) {
    std::ifstream in = open_text(path);
    std::vector<int> labels;
    labels.reserve(n);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const std::string where = path.filename().string() + " line " + std::to_string(line_no);
        const int label = static_cast<int>(parse_count(line, where));
        if (label >= classes) {
            throw DataError(where + ": label " + std::to_string(label) + " >= classes " +
                            std::to_string(classes));
        }
        labels.push_back(label);
    }
    if (labels.size() != n) {
        throw DataError(path.filename().string() + ": " + std::to_string(labels.size()) +
                        " labels, manifest declares " + std::to_string(n));
    }
    return labels;
}

void load_split(const fs::path& path, LabeledGraphDataset& ds) {
    std::ifstream in = open_text(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty split file: " + path.string());
    strip_cr(line);
    if (line != kSplitMagic) throw DataError("not a split file (bad first line): " + path.string());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const std::string where = path.filename().string() + " line " + std::to_string(line_no);
        std::istringstream tokens(line);
        std::string section, kind;
        tokens >> section >> kind;
        std::vector<Index>* target = nullptr;
        if (section == "train") target = &ds.train_idx;
        else if (section == "val") target = &ds.val_idx;
        else if (section == "test") target = &ds.test_idx;
        else throw DataError(where + ": unknown section '" + section + "'");
        if (kind == "range") {
            // Half-open [start, stop).
            std::uint64_t start = 0, stop = 0;
            if (!(tokens >> start >> stop) || stop < start) {
                throw DataError(where + ": expected 'range <start> <stop>'");
            }
            for (std::uint64_t i = start; i < stop; ++i) target->push_back(i);
        } else if (kind == "list") {
            std::uint64_t idx = 0;
            while (tokens >> idx) target->push_back(idx);
        } else {
            throw DataError(where + ": unknown kind '" + kind + "' (want range or list)");
        }
    }
}

void check_count(std::size_t actual, Index declared, const std::string& what) {
    if (actual != declared) {
        throw DataError(what + ": file has " + std::to_string(actual) +
                        ", manifest declares " + std::to_string(declared));
    }
}

}  // namespace

LabeledGraphDataset load_dataset(const fs::path& manifest_path) {
    const DatasetManifest manifest = DatasetManifest::load(manifest_path);
    const fs::path base = manifest_path.parent_path();
    if (manifest.nodes == 0) throw DataError("manifest declares zero nodes");
    if (manifest.classes <= 0) throw DataError("manifest declares no classes");

    LabeledGraphDataset ds;
    ds.name = manifest.name;
    ds.num_nodes = manifest.nodes;
    ds.num_classes = manifest.classes;
    ds.edges = load_edges(base / manifest.edges_file, manifest.nodes);
    check_count(ds.edges.size(), manifest.edges, "edges");
    ds.features = load_features(base / manifest.features_file, manifest.nodes,
                                manifest.feature_dim);
    ds.labels = load_labels(base / manifest.labels_file, manifest.nodes, manifest.classes);
    load_split(base / manifest.split_file, ds);
    check_count(ds.train_idx.size(), manifest.train_count, "train split");
    check_count(ds.val_idx.size(), manifest.val_count, "val split");
    check_count(ds.test_idx.size(), manifest.test_count, "test split");

    std::vector<char> seen(ds.num_nodes, 0);
    validate_split_indices(ds.train_idx, ds.num_nodes, "train", seen);
    validate_split_indices(ds.val_idx, ds.num_nodes, "val", seen);
    validate_split_indices(ds.test_idx, ds.num_nodes, "test", seen);
    return ds;
}

std::filesystem::path save_dataset(const LabeledGraphDataset& dataset, const fs::path& dir) {
    if (dataset.name.empty()) throw DataError("save_dataset: dataset has no name");
    fs::create_directories(dir);
    const std::string& name = dataset.name;

    {
        std::ofstream out(dir / (name + ".edges.tsv"));
        for (const auto& [u, v] : dataset.edges) out << u << '\t' << v << '\n';
        if (!out) throw DataError("write failed: " + (dir / (name + ".edges.tsv")).string());
    }
    {
        std::ofstream out(dir / (name + ".feat.csv"));
        for (Index i = 0; i < dataset.features.rows(); ++i) {
            for (Index j = 0; j < dataset.features.cols(); ++j) {
                if (j) out << ',';
                out << format_real(dataset.features(i, j));
            }
            out << '\n';
        }
        if (!out) throw DataError("write failed: " + (dir / (name + ".feat.csv")).string());
    }
    {
        std::ofstream out(dir / (name + ".labels.txt"));
        for (int label : dataset.labels) out << label << '\n';
        if (!out) throw DataError("write failed: " + (dir / (name + ".labels.txt")).string());
    }
    {
        std::ofstream out(dir / (name + ".split.txt"));
        out << kSplitMagic << '\n';
        for (const auto& [section, idx] :
             {std::pair{"train", &dataset.train_idx}, {"val", &dataset.val_idx},
              {"test", &dataset.test_idx}}) {
            out << section << " list";
            for (Index i : *idx) out << ' ' << i;
            out << '\n';
        }
        if (!out) throw DataError("write failed: " + (dir / (name + ".split.txt")).string());
    }

    DatasetManifest manifest;
    manifest.name = name;
    manifest.nodes = dataset.num_nodes;
    manifest.edges = dataset.edges.size();
    manifest.feature_dim = dataset.features.cols();
    manifest.classes = dataset.num_classes;
    manifest.train_count = dataset.train_idx.size();
    manifest.val_count = dataset.val_idx.size();
    manifest.test_count = dataset.test_idx.size();
    manifest.edges_file = name + ".edges.tsv";
    manifest.features_file = name + ".feat.csv";
    manifest.labels_file = name + ".labels.txt";
    manifest.split_file = name + ".split.txt";
    const fs::path manifest_path = dir / (name + ".manifest.txt");
    manifest.save(manifest_path);
    return manifest_path;
}

LabeledGraphDataset generate_sbm(Index blocks, Index nodes_per_block, Real p_in, Real p_out,
                                 Real feature_noise, std::uint64_t seed) {
    if (blocks == 0 || nodes_per_block == 0) {
        throw std::invalid_argument("generate_sbm: blocks and nodes_per_block must be >= 1");
    }
    if (!(0.0 <= p_out && p_out < p_in && p_in <= 1.0)) {
        throw std::invalid_argument("generate_sbm: need 0 <= p_out < p_in <= 1");
    }
    if (feature_noise < 0.0) {
        throw std::invalid_argument("generate_sbm: feature_noise must be >= 0");
    }
    const Index n = blocks * nodes_per_block;
    RngState rng(seed);

    LabeledGraphDataset ds;
    ds.name = "sbm";
    ds.num_nodes = n;
    ds.num_classes = static_cast<int>(blocks);
    ds.labels.resize(n);
    for (Index i = 0; i < n; ++i) ds.labels[i] = static_cast<int>(i / nodes_per_block);

    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            const Real p = ds.labels[i] == ds.labels[j] ? p_in : p_out;
            if (rng.next_double() < p) ds.edges.emplace_back(i, j);
        }
    }

    ds.features = DenseMatrix(n, blocks);
    for (Index i = 0; i < n; ++i) {
        for (Index b = 0; b < blocks; ++b) {
            const Real base = static_cast<Index>(ds.labels[i]) == b ? 1.0 : 0.0;
            ds.features(i, b) = base + feature_noise * rng.next_gaussian();
        }
    }

    // 60/20/20 per block.
    for (Index b = 0; b < blocks; ++b) {
        std::vector<Index> members(nodes_per_block);
        for (Index i = 0; i < nodes_per_block; ++i) members[i] = b * nodes_per_block + i;
        for (Index i = members.size(); i > 1; --i) {
            std::swap(members[i - 1], members[rng.next_index(i)]);
        }
        const Index n_train = static_cast<Index>(std::floor(0.6 * static_cast<Real>(nodes_per_block)));
        const Index n_val = static_cast<Index>(std::floor(0.2 * static_cast<Real>(nodes_per_block)));
        for (Index i = 0; i < nodes_per_block; ++i) {
            if (i < n_train) ds.train_idx.push_back(members[i]);
            else if (i < n_train + n_val) ds.val_idx.push_back(members[i]);
            else ds.test_idx.push_back(members[i]);
        }
    }
    std::sort(ds.train_idx.begin(), ds.train_idx.end());
    std::sort(ds.val_idx.begin(), ds.val_idx.end());
    std::sort(ds.test_idx.begin(), ds.test_idx.end());
    return ds;
}

void save_checkpoint(const Checkpoint& checkpoint, const fs::path& path) {
    if (checkpoint.params.weights.empty()) {
        throw std::invalid_argument("save_checkpoint: no weights");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << kCheckpointMagic << '\n';
    out << "dims";
    for (Index d : checkpoint.params.dims()) out << ' ' << d;
    out << '\n';
    if (checkpoint.adam) {
        out << "optimizer adam\n";
        out << "adam_step " << checkpoint.adam->step << '\n';
    } else {
        out << "optimizer none\n";
    }
    out << "config " << checkpoint.config << '\n';
    out << "payload\n";
    for (const auto& w : checkpoint.params.weights) write_doubles(out, w.data());
    if (checkpoint.adam) {
        for (const auto& m : checkpoint.adam->m) write_doubles(out, m.data());
        for (const auto& v : checkpoint.adam->v) write_doubles(out, v.data());
    }
    if (!out) throw DataError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty checkpoint: " + path.string());
    strip_cr(line);
    if (line != kCheckpointMagic) {
        throw DataError("not a checkpoint (bad first line): " + path.string());
    }

    std::vector<Index> dims;
    bool has_adam = false;
    std::uint64_t adam_step = 0;
    std::string config;
    while (std::getline(in, line)) {
        strip_cr(line);
        if (line == "payload") break;
        const std::size_t sp = line.find(' ');
        const std::string key = sp == std::string::npos ? line : line.substr(0, sp);
        const std::string value = sp == std::string::npos ? "" : line.substr(sp + 1);
        if (key == "dims") {
            std::istringstream tokens(value);
            std::uint64_t d = 0;
            while (tokens >> d) dims.push_back(d);
        } else if (key == "optimizer") {
            if (value == "adam") has_adam = true;
            else if (value != "none") throw DataError("checkpoint: unknown optimizer '" + value + "'");
        } else if (key == "adam_step") {
            adam_step = parse_count(value, "checkpoint adam_step");
        } else if (key == "config") {
            config = value;
        } else {
            throw DataError("checkpoint: unknown header key '" + key + "'");
        }
    }
    if (line != "payload") throw DataError("checkpoint has no payload marker: " + path.string());
    if (dims.size() < 2) throw DataError("checkpoint dims header missing or too short");

    Checkpoint ckpt;
    ckpt.config = config;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        DenseMatrix w(dims[l], dims[l + 1]);
        read_doubles(in, w.data(), path);
        ckpt.params.weights.push_back(std::move(w));
    }
    if (has_adam) {
        AdamState state = AdamState::zeros_like(ckpt.params);
        state.step = adam_step;
        for (auto& m : state.m) read_doubles(in, m.data(), path);
        for (auto& v : state.v) read_doubles(in, v.data(), path);
        ckpt.adam = std::move(state);
    }
    char extra = 0;
    if (in.read(&extra, 1); in.gcount() != 0) {
        throw DataError("checkpoint has trailing bytes: " + path.string());
    }
    return ckpt;
}

}  // namespace fastgcn
