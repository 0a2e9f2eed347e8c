#pragma once

#include <stdexcept>
#include <vector>

#include "fastgcn/matrix.hpp"
#include "fastgcn/sampling.hpp"

namespace fastgcn {

/// One layer frozen for variance analysis: the kernel, a scalar integrand
/// value per vertex (the embedding-times-weight reduced to one coordinate),
/// and the two sample counts. The base measure is uniform mass 1/n.
struct LayerSnapshot {
    SparseMatrix kernel;  // n x n
    std::vector<Real> x;  // length n
    Index outer_samples = 1;  // draws of the layer-above variable v
    Index inner_samples = 1;  // draws of the integration variable u
};

struct EmpiricalVariance {
    Real variance = 0.0;
    Real standard_error = 0.0;  // jackknife SE of the variance estimate
    Real mean = 0.0;
    Real mean_standard_error = 0.0;
};

struct VarianceReport {
    Real r = 0.0;
    Real var_uniform = 0.0;
    Real var_optimal = 0.0;
    Real var_compromise = 0.0;
    EmpiricalVariance emp_uniform;
    EmpiricalVariance emp_optimal;
    EmpiricalVariance emp_compromise;
};

/// The importance measure misses part of the integrand's support, so the
/// reweighted estimator would be biased.
class ImportanceSupportError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Exact layer output e(v) = (1/n) sum_u kernel(v,u) x(u) for every v.
std::vector<Real> exact_layer_output(const LayerSnapshot& snap);

/// Variance contributed by the outer sampling alone:
/// (1/s)(1 - 1/t) E[e^2] - (1/s) (E[e])^2.
Real analytic_r(const LayerSnapshot& snap);

/// Variance of the two-stage sample average under the base measure:
/// R + (1/st) E_v E_u [kernel(v,u)^2 x(u)^2].
Real analytic_variance_uniform(const LayerSnapshot& snap);

/// The variance-minimizing importance measure, mass proportional to
/// b(u) |x(u)| with b(u) the base-measure-weighted column norm.
ImportanceDistribution optimal_distribution(const LayerSnapshot& snap);

/// The practical measure that drops the |x| factor: mass proportional to
/// b(u)^2, i.e. exactly the squared-column-norm distribution used in
/// training.
ImportanceDistribution compromise_distribution(const LayerSnapshot& snap);

/// R + (1/st) (E[b |x|])^2; a lower bound for every importance measure.
Real analytic_variance_optimal(const LayerSnapshot& snap);

/// R + (1/st) E[b^2] E[x^2].
Real analytic_variance_compromise(const LayerSnapshot& snap);

/// Monte Carlo variance of the reweighted two-stage average under q. Each
/// outer draw gets its own independent inner sample set, matching the
/// analytic decomposition. Also checks that the empirical mean agrees with
/// the exact integral within 4 standard errors. Requires trials >= 1000.
EmpiricalVariance empirical_variance(const LayerSnapshot& snap, const ImportanceDistribution& q,
                                     Index trials, RngState& rng);

/// Analytic figures plus the three empirical counterparts in one shot.
VarianceReport make_variance_report(const LayerSnapshot& snap, Index trials, RngState& rng);

/// Random snapshot on n vertices: normalized adjacency of an Erdos-Renyi
/// edge set and x uniform in [-2, 2].
LayerSnapshot random_snapshot(Index n, Index outer_samples, Index inner_samples, RngState& rng);

struct ConvergenceResult {
    std::vector<Real> sq_distances;  // ||x_k - x*||^2 for k = 1..steps
    Real max_grad_norm = 0.0;        // largest observed ||g_k||
};

/// SGD on f(x) = x' diag(curvatures) x / 2 with step 1/(l k), l the smallest
/// curvature, and an additive Gaussian perturbation of scale noise/sqrt(k)
/// standing in for a consistent gradient estimator.
ConvergenceResult convergence_experiment(const std::vector<Real>& curvatures,
                                         const std::vector<Real>& start, Real noise,
                                         Index steps, RngState& rng);

}  // namespace fastgcn
