#pragma once

#include <vector>

#include "fastgcn/dataio.hpp"
#include "fastgcn/model.hpp"

namespace fastgcn {

struct PredictionSet {
    std::vector<Index> nodes;
    std::vector<int> predicted;
    std::vector<int> actual;
};

/// Argmax class per logits row; ties break toward the lowest class index.
int argmax_class(std::span<const Real> logits_row);

/// Full-architecture inference restricted to node_set.
PredictionSet predict_full(const LabeledGraphDataset& dataset, const SparseMatrix& a,
                           const ModelParams& params, const std::vector<Index>& node_set);

/// Micro-averaged F1 from pooled true/false positives and negatives. For
/// single-label predictions this equals plain accuracy.
Real micro_f1(const PredictionSet& pred);

}  // namespace fastgcn
