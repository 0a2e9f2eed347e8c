#pragma once

// Independent dense reference implementations used only by tests. Everything
// here works on plain nested vectors and never calls into the library's
// sparse or sampled code paths, so agreement between the two is meaningful.

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

using Grid = std::vector<std::vector<double>>;

Grid zeros(std::size_t rows, std::size_t cols);
Grid identity(std::size_t n);
Grid matmul(const Grid& a, const Grid& b);
Grid transpose(const Grid& a);

/// D^(-1/2) (A + I) D^(-1/2) built densely from the edge list.
Grid dense_normalized_adjacency(const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                std::size_t n);

/// Full dense GCN forward pass; ReLU on hidden layers, linear output.
Grid dense_gcn_logits(const Grid& a_hat, const Grid& h0, const std::vector<Grid>& weights);

/// Mean softmax cross-entropy over the given rows of the logits.
double dense_ce_loss(const Grid& logits, const std::vector<std::size_t>& rows,
                     const std::vector<int>& labels);

/// Analytic gradients of dense_ce_loss(dense_gcn_logits(...)) w.r.t. every
/// weight matrix, derived by the chain rule on the dense computation.
std::vector<Grid> dense_gcn_gradients(const Grid& a_hat, const Grid& h0,
                                      const std::vector<Grid>& weights,
                                      const std::vector<std::size_t>& batch_rows,
                                      const std::vector<int>& labels);

/// Central finite differences of an arbitrary scalar function of the
/// weights, one perturbation per entry.
std::vector<Grid> finite_difference_gradients(
    const std::function<double(const std::vector<Grid>&)>& loss,
    const std::vector<Grid>& weights, double step);

/// max_ij |a - b|
double max_abs_diff(const Grid& a, const Grid& b);

/// |a - b| / max(1, |a|, |b|), the scale-aware error used by gradient checks.
double relative_error(double a, double b);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace oracle
