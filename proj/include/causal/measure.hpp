#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "causal/grid.hpp"
#include "causal/model.hpp"
#include "causal/parallel.hpp"
#include "causal/paths.hpp"
#include "causal/report.hpp"
#include "causal/solver.hpp"

namespace causal {

/// Euler scheme for the translated Wiener process
/// dw~ = -kappa(c(w~)) dt + dw, w~(0) = 0.
inline Path simulate_w_tilde(const ModelSpec& model, const Path& w) {
    const double dt = w.grid().dt();
    Path wt(w.grid());
    wt[0] = 0.0;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
        wt[k + 1] = wt[k] - model.kappa_of_c(wt[k]) * dt + (w[k + 1] - w[k]);
    }
    return wt;
}

/// log of the Girsanov weight with Ito (left-endpoint) sums:
/// -sum kappa(c(b_k)) (b_{k+1} - b_k) - 1/2 sum kappa(c(b_k))^2 dt.
inline double girsanov_log_weight(const ModelSpec& model, const Path& b) {
    const double dt = b.grid().dt();
    double stochastic = 0.0;
    double quadratic = 0.0;
    for (std::size_t k = 0; k + 1 < b.size(); ++k) {
        const double v = model.kappa_of_c(b[k]);
        stochastic += v * (b[k + 1] - b[k]);
        quadratic += v * v * dt;
    }
    return -stochastic - 0.5 * quadratic;
}

inline double girsanov_weight(const ModelSpec& model, const Path& b) { return std::exp(girsanov_log_weight(model, b)); }

struct WeightSummary {
    std::size_t n_samples = 0;
    double mean = 0.0;
    double stderr_mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

inline WeightSummary summarize(const std::vector<double>& samples) {
    WeightSummary s;
    s.n_samples = samples.size();
    if (samples.empty()) return s;
    const double n = static_cast<double>(samples.size());
    s.mean = pairwise_sum(samples) / n;
    std::vector<double> sq(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double d = samples[i] - s.mean;
        sq[i] = d * d;
    }
    const double var = samples.size() > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;
    s.stderr_mean = std::sqrt(var / n);
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    s.min = *lo;
    s.max = *hi;
    return s;
}

/// Monte-Carlo estimate of E[Lambda] over independent Brownian paths.
inline WeightSummary expected_weight(const ModelSpec& model, const Grid& grid, std::size_t n_samples, Seed seed,
                                     std::vector<double>* samples_out = nullptr) {
    if (n_samples < 100) throw std::invalid_argument("expected_weight: need at least 100 samples");
    std::vector<double> weights(n_samples);
    parallel_for(n_samples, [&](std::size_t i) {
        weights[i] = girsanov_weight(model, sample_wiener(grid, seed.substream("girsanov", i)));
    });
    WeightSummary s = summarize(weights);
    if (samples_out) *samples_out = std::move(weights);
    return s;
}

/// Right-continuous empirical distribution function.
class EmpiricalCdf {
public:
    explicit EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
        if (sorted_.empty()) throw std::invalid_argument("EmpiricalCdf: no samples");
        std::sort(sorted_.begin(), sorted_.end());
    }

    /// Fraction of samples <= x.
    double operator()(double x) const {
        const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
        return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
    }

    const std::vector<double>& sorted() const noexcept { return sorted_; }
    std::size_t size() const noexcept { return sorted_.size(); }

private:
    std::vector<double> sorted_;
};

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|, with
/// ties handled by advancing both samples past equal values.
inline double ks_statistic(const EmpiricalCdf& a, const EmpiricalCdf& b) {
    const auto& xa = a.sorted();
    const auto& xb = b.sorted();
    const double na = static_cast<double>(xa.size());
    const double nb = static_cast<double>(xb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < xa.size() && j < xb.size()) {
        const double v = std::min(xa[i], xb[j]);
        while (i < xa.size() && xa[i] == v) ++i;
        while (j < xb.size() && xb[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    return ks_statistic(EmpiricalCdf(std::move(a)), EmpiricalCdf(std::move(b)));
}

/// Asymptotic two-sample critical value sqrt(-ln(alpha/2)/2) sqrt((n+m)/(nm)).
inline double ks_critical_value(std::size_t n, std::size_t m, double alpha = 0.01) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    const double nn = static_cast<double>(n);
    const double mm = static_cast<double>(m);
    return c * std::sqrt((nn + mm) / (nn * mm));
}

struct CdfComparison {
    double ks_statistic = 0.0;          // X_t samples vs c(w~(t)) samples
    double ks_inverse_statistic = 0.0;  // c^{-1}(X_t) vs w~(t): same value, since c is increasing
    double negative_control = 0.0;      // X_t vs raw w(t)
    double critical_value = 0.0;
    std::vector<double> x_samples;
    std::vector<double> w_tilde_samples;
    RunReport report;
};

/// Compares the law of X_t (causal solves on one set of drivers) with
/// c applied to samples of w~(t) (Euler scheme on an independent set), i.e.
/// P(X_t <= x) against F~(c^{-1}(x)).
inline CdfComparison cdf_comparison(const ModelSpec& model, double t, const Grid& grid, std::size_t n_samples,
                                    Seed seed, const SolverConfig& config = {}, double alpha = 0.01) {
    const std::size_t node = grid.index_of(t);
    if (node == Grid::npos) throw std::invalid_argument("cdf_comparison: t must be a grid node");
    if (n_samples < 2) throw std::invalid_argument("cdf_comparison: need at least two samples");

    std::vector<double> xs(n_samples);
    std::vector<double> wts(n_samples);
    std::vector<double> raw(n_samples);
    parallel_for(n_samples, [&](std::size_t i) {
        const Path w = sample_wiener(grid, seed.substream("density_solve", i));
        xs[i] = require_converged(solve_fixed_point(model, w, config)).x[node];
        const Path v = sample_wiener(grid, seed.substream("density_w_tilde", i));
        wts[i] = simulate_w_tilde(model, v)[node];
        raw[i] = v[node];
    });

    CdfComparison out;
    std::vector<double> cw(n_samples);
    std::vector<double> inv(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        cw[i] = model.c(wts[i]);
        inv[i] = model.c_inverse(xs[i]);
    }
    out.ks_statistic = ks_statistic(xs, cw);
    out.ks_inverse_statistic = ks_statistic(inv, wts);
    out.negative_control = ks_statistic(xs, raw);
    out.critical_value = ks_critical_value(n_samples, n_samples, alpha);
    out.x_samples = xs;
    out.w_tilde_samples = wts;

    out.report.experiment = "cdf_comparison";
    out.report.details["t"] = t;
    out.report.details["n_samples"] = n_samples;
    out.report.details["alpha"] = alpha;
    out.report.details["ks_inverse_statistic"] = out.ks_inverse_statistic;
    out.report.details["negative_control_ks"] = out.negative_control;
    out.report.expect_at_most("ks_below_critical", out.ks_statistic, out.critical_value);
    out.report.expect_at_least("negative_control_rejected", out.negative_control, out.critical_value);
    out.report.seeds.push_back(seed);
    return out;
}

}  // namespace causal
