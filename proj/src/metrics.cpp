#include "fastgcn/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace fastgcn {

int argmax_class(std::span<const Real> logits_row) {
    int best = 0;
    for (std::size_t j = 1; j < logits_row.size(); ++j) {
        if (logits_row[j] > logits_row[static_cast<std::size_t>(best)]) {
            best = static_cast<int>(j);
        }
    }
    return best;
}

PredictionSet predict_full(const LabeledGraphDataset& dataset, const SparseMatrix& a,
                           const ModelParams& params, const std::vector<Index>& node_set) {
    const DenseMatrix logits = forward_full(a, dataset.features, params);
    PredictionSet pred;
    pred.nodes = node_set;
    pred.predicted.reserve(node_set.size());
    pred.actual.reserve(node_set.size());
    for (Index v : node_set) {
        if (v >= dataset.num_nodes) {
            throw std::out_of_range("predict_full: node " + std::to_string(v) +
                                    " outside the graph");
        }
        pred.predicted.push_back(argmax_class(logits.row(v)));
        pred.actual.push_back(dataset.labels[v]);
    }
    return pred;
}

Real micro_f1(const PredictionSet& pred) {
    if (pred.predicted.empty() || pred.predicted.size() != pred.actual.size()) {
        throw std::invalid_argument("micro_f1: empty or mismatched prediction set");
    }
    const int max_pred = *std::max_element(pred.predicted.begin(), pred.predicted.end());
    const int max_actual = *std::max_element(pred.actual.begin(), pred.actual.end());
    const std::size_t classes = static_cast<std::size_t>(std::max(max_pred, max_actual)) + 1;

    std::vector<std::size_t> tp(classes, 0), fp(classes, 0), fn(classes, 0);
    for (std::size_t i = 0; i < pred.predicted.size(); ++i) {
        const auto p = static_cast<std::size_t>(pred.predicted[i]);
        const auto y = static_cast<std::size_t>(pred.actual[i]);
        if (p == y) {
            ++tp[p];
        } else {
            ++fp[p];
            ++fn[y];
        }
    }
    std::size_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        tp_sum += tp[c];
        fp_sum += fp[c];
        fn_sum += fn[c];
    }
    const Real precision_den = static_cast<Real>(tp_sum + fp_sum);
    const Real recall_den = static_cast<Real>(tp_sum + fn_sum);
    if (tp_sum == 0) return 0.0;
    const Real precision = static_cast<Real>(tp_sum) / precision_den;
    const Real recall = static_cast<Real>(tp_sum) / recall_den;
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace fastgcn
