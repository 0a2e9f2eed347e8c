#include "fastgcn/variance_lab.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fastgcn {

namespace {

void check_snapshot(const LayerSnapshot& snap) {
    if (snap.kernel.rows() != snap.kernel.cols()) {
        throw std::invalid_argument("LayerSnapshot: kernel must be square");
    }
    if (snap.x.size() != snap.kernel.cols()) {
        throw std::invalid_argument("LayerSnapshot: x length does not match the kernel");
    }
    if (snap.outer_samples == 0 || snap.inner_samples == 0) {
        throw std::invalid_argument("LayerSnapshot: sample counts must be >= 1");
    }
    for (Real v : snap.x) {
        if (!std::isfinite(v)) throw std::invalid_argument("LayerSnapshot: x must be finite");
    }
}

/// b(u)^2 = E_v[kernel(v,u)^2] = column norm^2 / n.
std::vector<Real> b_squared(const LayerSnapshot& snap) {
    std::vector<Real> b2 = column_squared_norms(snap.kernel);
    const Real inv_n = 1.0 / static_cast<Real>(snap.kernel.rows());
    for (Real& v : b2) v *= inv_n;
    return b2;
}

}  // namespace

std::vector<Real> exact_layer_output(const LayerSnapshot& snap) {
    check_snapshot(snap);
    const Index n = snap.kernel.rows();
    const Real inv_n = 1.0 / static_cast<Real>(n);
    std::vector<Real> e(n, 0.0);
    const auto& offs = snap.kernel.row_offsets();
    const auto& cols = snap.kernel.col_indices();
    const auto& vals = snap.kernel.values();
    for (Index v = 0; v < n; ++v) {
        Real acc = 0.0;
        for (Index k = offs[v]; k < offs[v + 1]; ++k) acc += vals[k] * snap.x[cols[k]];
        e[v] = acc * inv_n;
    }
    return e;
}

Real analytic_r(const LayerSnapshot& snap) {
    const std::vector<Real> e = exact_layer_output(snap);
    const Real inv_n = 1.0 / static_cast<Real>(e.size());
    Real mean_e = 0.0, mean_e2 = 0.0;
    for (Real v : e) {
        mean_e += v * inv_n;
        mean_e2 += v * v * inv_n;
    }
    const Real s = static_cast<Real>(snap.outer_samples);
    const Real t = static_cast<Real>(snap.inner_samples);
    return (1.0 / s) * (1.0 - 1.0 / t) * mean_e2 - (1.0 / s) * mean_e * mean_e;
}

Real analytic_variance_uniform(const LayerSnapshot& snap) {
    check_snapshot(snap);
    const Index n = snap.kernel.rows();
    const Real inv_n2 = 1.0 / (static_cast<Real>(n) * static_cast<Real>(n));
    const auto& cols = snap.kernel.col_indices();
    const auto& vals = snap.kernel.values();
    Real double_integral = 0.0;
    for (std::size_t k = 0; k < vals.size(); ++k) {
        const Real xu = snap.x[cols[k]];
        double_integral += vals[k] * vals[k] * xu * xu * inv_n2;
    }
    const Real st = static_cast<Real>(snap.outer_samples) * static_cast<Real>(snap.inner_samples);
    return analytic_r(snap) + double_integral / st;
}

ImportanceDistribution optimal_distribution(const LayerSnapshot& snap) {
    check_snapshot(snap);
    const std::vector<Real> b2 = b_squared(snap);
    std::vector<Real> mass(b2.size());
    for (Index u = 0; u < b2.size(); ++u) {
        mass[u] = std::sqrt(b2[u]) * std::abs(snap.x[u]);
    }
    return ImportanceDistribution::from_mass(std::move(mass));
}

ImportanceDistribution compromise_distribution(const LayerSnapshot& snap) {
    check_snapshot(snap);
    // Mass proportional to b(u)^2; the uniform base-measure weights cancel,
    // leaving the squared column norms.
    return compute_importance_distribution(snap.kernel);
}

Real analytic_variance_optimal(const LayerSnapshot& snap) {
    check_snapshot(snap);
    const std::vector<Real> b2 = b_squared(snap);
    const Real inv_n = 1.0 / static_cast<Real>(b2.size());
    Real mean_b_abs_x = 0.0;
    for (Index u = 0; u < b2.size(); ++u) {
        mean_b_abs_x += std::sqrt(b2[u]) * std::abs(snap.x[u]) * inv_n;
    }
    const Real st = static_cast<Real>(snap.outer_samples) * static_cast<Real>(snap.inner_samples);
    return analytic_r(snap) + mean_b_abs_x * mean_b_abs_x / st;
}

Real analytic_variance_compromise(const LayerSnapshot& snap) {
    check_snapshot(snap);
    const std::vector<Real> b2 = b_squared(snap);
    const Real inv_n = 1.0 / static_cast<Real>(b2.size());
    Real mean_b2 = 0.0, mean_x2 = 0.0;
    for (Index u = 0; u < b2.size(); ++u) {
        mean_b2 += b2[u] * inv_n;
        mean_x2 += snap.x[u] * snap.x[u] * inv_n;
    }
    const Real st = static_cast<Real>(snap.outer_samples) * static_cast<Real>(snap.inner_samples);
    return analytic_r(snap) + mean_b2 * mean_x2 / st;
}

EmpiricalVariance empirical_variance(const LayerSnapshot& snap, const ImportanceDistribution& q,
                                     Index trials, RngState& rng) {
    check_snapshot(snap);
    if (trials < 1000) throw std::invalid_argument("empirical_variance: need >= 1000 trials");
    if (q.size() != snap.kernel.rows()) {
        throw std::invalid_argument("empirical_variance: distribution size does not match kernel");
    }
    const std::vector<Real> b2 = b_squared(snap);
    for (Index u = 0; u < q.size(); ++u) {
        if (q.mass(u) == 0.0 && b2[u] * std::abs(snap.x[u]) > 0.0) {
            throw ImportanceSupportError(
                "empirical_variance: measure assigns zero mass to vertex " + std::to_string(u) +
                " where the integrand is nonzero");
        }
    }

    const Index n = snap.kernel.rows();
    const Real inv_s = 1.0 / static_cast<Real>(snap.outer_samples);
    const Real inv_t = 1.0 / static_cast<Real>(snap.inner_samples);
    const Real base_mass = 1.0 / static_cast<Real>(n);

    std::vector<Real> g(trials);
    for (Index trial = 0; trial < trials; ++trial) {
        Real outer_acc = 0.0;
        for (Index i = 0; i < snap.outer_samples; ++i) {
            const Index v = rng.next_index(n);
            Real inner_acc = 0.0;
            // Fresh inner samples for every outer draw; the two-stage
            // variance decomposition assumes the per-v averages are
            // conditionally independent.
            for (Index j = 0; j < snap.inner_samples; ++j) {
                const Index u = q.sample(rng);
                inner_acc += snap.kernel.at(v, u) * snap.x[u] * (base_mass / q.mass(u));
            }
            outer_acc += inner_acc * inv_t;
        }
        g[trial] = outer_acc * inv_s;
    }

    const Real n_trials = static_cast<Real>(trials);
    Real mean = 0.0;
    for (Real v : g) mean += v;
    mean /= n_trials;

    Real s2c = 0.0;
    for (Real v : g) s2c += (v - mean) * (v - mean);
    const Real variance = s2c / (n_trials - 1.0);

    // Jackknife over the leave-one-out variances.
    Real se_acc = 0.0;
    for (Real v : g) {
        const Real c2 = (v - mean) * (v - mean);
        const Real loo = (s2c - c2 * n_trials / (n_trials - 1.0)) / (n_trials - 2.0);
        se_acc += (loo - variance) * (loo - variance);
    }
    EmpiricalVariance out;
    out.variance = variance;
    out.standard_error = std::sqrt(se_acc * (n_trials - 1.0) / n_trials);
    out.mean = mean;
    out.mean_standard_error = std::sqrt(variance / n_trials);

    // Reweighting must not move the expectation.
    const std::vector<Real> e = exact_layer_output(snap);
    Real exact_mean = 0.0;
    for (Real v : e) exact_mean += v / static_cast<Real>(e.size());
    if (std::abs(mean - exact_mean) > 4.0 * out.mean_standard_error + 1e-12) {
        throw std::logic_error("empirical_variance: estimator mean " + std::to_string(mean) +
                               " deviates from the exact integral " + std::to_string(exact_mean) +
                               " by more than 4 standard errors");
    }
    return out;
}

VarianceReport make_variance_report(const LayerSnapshot& snap, Index trials, RngState& rng) {
    VarianceReport report;
    report.r = analytic_r(snap);
    report.var_uniform = analytic_variance_uniform(snap);
    report.var_optimal = analytic_variance_optimal(snap);
    report.var_compromise = analytic_variance_compromise(snap);
    const ImportanceDistribution uniform = ImportanceDistribution::uniform(snap.kernel.rows());
    report.emp_uniform = empirical_variance(snap, uniform, trials, rng);
    report.emp_optimal = empirical_variance(snap, optimal_distribution(snap), trials, rng);
    report.emp_compromise = empirical_variance(snap, compromise_distribution(snap), trials, rng);
    return report;
}

LayerSnapshot random_snapshot(Index n, Index outer_samples, Index inner_samples, RngState& rng) {
    if (n == 0) throw std::invalid_argument("random_snapshot: n must be >= 1");
    std::vector<std::pair<Index, Index>> edges;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            if (rng.next_double() < 0.4) edges.emplace_back(i, j);
        }
    }
    LayerSnapshot snap;
    snap.kernel = build_normalized_adjacency(edges, n);
    snap.x.resize(n);
    for (Real& v : snap.x) v = 4.0 * rng.next_double() - 2.0;
    snap.outer_samples = outer_samples;
    snap.inner_samples = inner_samples;
    return snap;
}

ConvergenceResult convergence_experiment(const std::vector<Real>& curvatures,
                                         const std::vector<Real>& start, Real noise,
                                         Index steps, RngState& rng) {
    if (curvatures.empty() || curvatures.size() != start.size()) {
        throw std::invalid_argument("convergence_experiment: dimension mismatch");
    }
    for (Real d : curvatures) {
        if (!(d > 0.0)) {
            throw std::invalid_argument("convergence_experiment: curvatures must be positive");
        }
    }
    if (steps == 0) throw std::invalid_argument("convergence_experiment: steps must be >= 1");
    if (noise < 0.0) throw std::invalid_argument("convergence_experiment: noise must be >= 0");

    const Real strict_convexity = *std::min_element(curvatures.begin(), curvatures.end());
    std::vector<Real> x = start;
    std::vector<Real> grad(x.size());

    ConvergenceResult result;
    result.sq_distances.reserve(steps);
    auto sq_norm = [](const std::vector<Real>& v) {
        Real acc = 0.0;
        for (Real c : v) acc += c * c;
        return acc;
    };
    result.sq_distances.push_back(sq_norm(x));

    for (Index k = 1; k < steps; ++k) {
        const Real sigma = noise / std::sqrt(static_cast<Real>(k));
        Real grad_sq = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            grad[i] = curvatures[i] * x[i];
            if (sigma > 0.0) grad[i] += sigma * rng.next_gaussian();
            grad_sq += grad[i] * grad[i];
        }
        result.max_grad_norm = std::max(result.max_grad_norm, std::sqrt(grad_sq));
        const Real step = 1.0 / (strict_convexity * static_cast<Real>(k));
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= step * grad[i];
        result.sq_distances.push_back(sq_norm(x));
    }
    return result;
}

}  // namespace fastgcn
