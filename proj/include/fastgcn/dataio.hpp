#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastgcn/matrix.hpp"
#include "fastgcn/optimizer.hpp"

namespace fastgcn {

/// Malformed, inconsistent, or missing data files.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Graph, dense features, integer labels, and a disjoint train/val/test split.
struct LabeledGraphDataset {
    std::string name;
    Index num_nodes = 0;
    std::vector<std::pair<Index, Index>> edges;  // undirected, deduplicated
    DenseMatrix features;                        // num_nodes x feature_dim
    std::vector<int> labels;                     // length num_nodes
    int num_classes = 0;
    std::vector<Index> train_idx;
    std::vector<Index> val_idx;
    std::vector<Index> test_idx;
};

/// Declared counts plus relative paths of the four data files; loading
/// cross-checks every count against the file contents.
struct DatasetManifest {
    std::string name;
    Index nodes = 0;
    Index edges = 0;
    Index feature_dim = 0;
    int classes = 0;
    Index train_count = 0;
    Index val_count = 0;
    Index test_count = 0;
    std::string edges_file;
    std::string features_file;
    std::string labels_file;
    std::string split_file;

    static DatasetManifest load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

LabeledGraphDataset load_dataset(const std::filesystem::path& manifest_path);

/// Writes <name>.{edges.tsv,feat.csv,labels.txt,split.txt,manifest.txt}
/// under dir; returns the manifest path.
std::filesystem::path save_dataset(const LabeledGraphDataset& dataset,
                                   const std::filesystem::path& dir);

/// Stochastic block model. Labels are the blocks; features are a one-hot
/// block indicator plus Gaussian noise; the split is 60/20/20 stratified by
/// block. Requires 0 <= p_out < p_in <= 1.
LabeledGraphDataset generate_sbm(Index blocks, Index nodes_per_block, Real p_in, Real p_out,
                                 Real feature_noise, std::uint64_t seed);

struct Checkpoint {
    ModelParams params;
    std::optional<AdamState> adam;
    std::string config;  // one-line run configuration echo
};

/// Text header plus a raw little-endian float64 payload (weights in layer
/// order, then Adam moments when present). Round-trips bitwise.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fastgcn
