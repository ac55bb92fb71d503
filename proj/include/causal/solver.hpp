#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "causal/errors.hpp"
#include "causal/grid.hpp"
#include "causal/model.hpp"

namespace causal {

enum class Quadrature {
    trapezoid,      // second order; default
    left_endpoint,  // explicit in the past only; gives a bitwise-causal solver
};

/// How the fBm kernel handles the t^(2H-1) singularity at t = 0 when H < 1/2.
enum class FirstCellRule {
    analytic,   // integrate H s^(2H-1) exactly over [0, dt] with g' frozen on the cell
    pointwise,  // evaluate the kernel at t = 0; rejected when it diverges
};

struct SolverConfig {
    double tol = 1e-10;
    int max_iter = 200;
    double lambda = 0.0;  // weight of the reported gap norm; stopping always uses lambda = 0
    Quadrature quadrature = Quadrature::trapezoid;
    std::optional<Path> initial_guess;  // defaults to the constant path c(xi + w(0))
    FirstCellRule first_cell = FirstCellRule::analytic;

    void validate() const {
        if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be positive");
        if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be at least 1");
        if (!(lambda >= 0.0)) throw std::invalid_argument("SolverConfig: lambda must be non-negative");
    }
};

struct SolveDiagnostics {
    int iterations = 0;               // applications of the Picard map
    std::vector<double> gaps;         // ||x_{n+1} - x_n||_lambda, one per iteration
    std::vector<double> sup_gaps;     // same at lambda = 0
    double residual = std::numeric_limits<double>::infinity();  // sup_k |Phi(X)(t_k) - X(t_k)|
    bool converged = false;
    bool exact = false;               // X is a bitwise fixed point of the discrete map
};

/// Solved path X together with the argument of c that produced it, so that
/// X(t_k) = c(w_tilde(t_k)) holds exactly at every node. With a random
/// initial value xi the argument includes xi.
struct Solution {
    Path x;
    Path w_tilde;
    SolveDiagnostics diagnostics;
};

/// max_k e^{-lambda t_k} |x(t_k)|.
inline double weighted_norm(const Path& x, double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("weighted_norm: lambda must be non-negative");
    double best = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        best = std::max(best, std::exp(-lambda * x.time(k)) * std::abs(x[k]));
    }
    return best;
}

/// fBm kernel H t^(2H-1) g'(x) - f(x)/g(x). At H = 1/2 this is, operation
/// for operation, g'(x)/2 - f(x)/g(x).
inline double kappa_fbm(const ModelSpec& model, double hurst, double t, double x) {
    const double gx = model.g(x);
    if (gx == 0.0) throw DivisionByZeroDiffusion(x);
    return hurst * std::pow(t, 2.0 * hurst - 1.0) * model.g_prime(x) - model.f(x) / gx;
}

namespace detail {

struct StationaryKernel {
    const ModelSpec& model;
    double operator()(std::size_t, double x) const { return model.kappa(x); }
};

struct FbmKernel {
    const ModelSpec& model;
    const Grid& grid;
    double hurst;
    double operator()(std::size_t k, double x) const { return kappa_fbm(model, hurst, grid.time(k), x); }
};

/// Integral of the fBm kernel over the first cell for H < 1/2:
/// dt^(2H)/2 * g' - dt * f/g, with both factors frozen (left endpoint) or
/// averaged (trapezoid) over the cell.
struct FbmFirstCell {
    const ModelSpec& model;
    double hurst;
    double operator()(double dt, double x0, double x1, Quadrature q) const {
        auto drift_ratio = [&](double x) {
            const double gx = model.g(x);
            if (gx == 0.0) throw DivisionByZeroDiffusion(x);
            return model.f(x) / gx;
        };
        const double time_mass = 0.5 * std::pow(dt, 2.0 * hurst);
        if (q == Quadrature::left_endpoint) return time_mass * model.g_prime(x0) - dt * drift_ratio(x0);
        return time_mass * 0.5 * (model.g_prime(x0) + model.g_prime(x1)) -
               0.5 * dt * (drift_ratio(x0) + drift_ratio(x1));
    }
};

struct NoFirstCell {
    double operator()(double, double, double, Quadrature) const { return 0.0; }
};

/// One application of the Picard map: out = c(xi + w - Q), arg = xi + w - Q,
/// Q the running quadrature of kernel(k, x_k).
template <typename Kernel, typename FirstCell>
void picard_map(const ModelSpec& model, const Path& w, const Path& x, double xi, Quadrature q, const Kernel& kernel,
                const FirstCell& first_cell, bool override_first, std::vector<double>& kv, Path& out, Path& arg) {
    const std::size_t n = w.size();
    const double dt = w.grid().dt();
    kv.resize(n);
    const std::size_t first_node = override_first ? 1 : 0;
    for (std::size_t k = first_node; k < n; ++k) kv[k] = kernel(k, x[k]);

    double integral = 0.0;
    arg[0] = (w[0] + xi) - integral;
    out[0] = model.c(arg[0]);
    for (std::size_t k = 1; k < n; ++k) {
        if (k == 1 && override_first) {
            integral = first_cell(dt, x[0], x[1], q);
        } else if (q == Quadrature::trapezoid) {
            integral = integral + 0.5 * dt * (kv[k - 1] + kv[k]);
        } else {
            integral = integral + dt * kv[k - 1];
        }
        arg[k] = (w[k] + xi) - integral;
        out[k] = model.c(arg[k]);
    }
}

template <typename Kernel, typename FirstCell>
Solution picard_solve(const ModelSpec& model, const Path& w, double xi, const SolverConfig& config, const Kernel& kernel,
                      const FirstCell& first_cell, bool override_first) {
    config.validate();
    if (!w.all_finite()) throw std::invalid_argument("solve: driver path has non-finite values");
    const Grid& grid = w.grid();

    Path x(grid);
    if (config.initial_guess) {
        require_same_grid(w, *config.initial_guess, "solve");
        x = *config.initial_guess;
    } else {
        const double start = model.c(w[0] + xi);
        for (std::size_t k = 0; k < x.size(); ++k) x[k] = start;
    }

    const bool want_exact = config.quadrature == Quadrature::left_endpoint;
    Path y(grid);
    Path arg(grid);
    Path prev_arg(grid);
    Path diff(grid);
    std::vector<double> kv;
    SolveDiagnostics diag;

    for (int it = 1; it <= config.max_iter; ++it) {
        picard_map(model, w, x, xi, config.quadrature, kernel, first_cell, override_first, kv, y, arg);
        double sup_gap = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) {
            diff[k] = y[k] - x[k];
            sup_gap = std::max(sup_gap, std::abs(diff[k]));
        }
        if (std::isnan(sup_gap)) throw std::runtime_error("solve: Picard iterate became NaN");
        diag.iterations = it;
        diag.sup_gaps.push_back(sup_gap);
        diag.gaps.push_back(config.lambda == 0.0 ? sup_gap : weighted_norm(diff, config.lambda));

        // x is an image of the map from iteration 2 on; its residual is sup_gap.
        if (it >= 2) {
            const bool done = want_exact ? sup_gap == 0.0 : sup_gap <= config.tol;
            if (done || it == config.max_iter) {
                diag.residual = sup_gap;
                diag.converged = sup_gap <= config.tol;
                diag.exact = sup_gap == 0.0;
                return {std::move(x), std::move(prev_arg), std::move(diag)};
            }
        }
        std::swap(prev_arg, arg);
        std::swap(x, y);
    }
    // max_iter == 1: the single image has no measured residual.
    diag.residual = std::numeric_limits<double>::infinity();
    return {std::move(x), std::move(prev_arg), std::move(diag)};
}

}  // namespace detail

/// Phi_w(x)(t_k) = c(w(t_k) - Q_k), Q_k the running quadrature of kappa(x)
/// over [0, t_k] with Q_0 = 0.
inline Path apply_phi(const ModelSpec& model, const Path& w, const Path& x, Quadrature q = Quadrature::trapezoid) {
    require_same_grid(w, x, "apply_phi");
    Path out(w.grid());
    Path arg(w.grid());
    std::vector<double> kv;
    detail::picard_map(model, w, x, 0.0, q, detail::StationaryKernel{model}, detail::NoFirstCell{}, false, kv, out, arg);
    return out;
}

/// Successive approximation of X = c(w - int_0^t kappa(X) ds). Stops when the
/// sup-norm gap (the residual of the returned iterate) is <= tol; under
/// left-endpoint quadrature it continues until the iterate is a bitwise
/// fixed point, which makes the result exactly nonanticipative. A run that
/// exhausts max_iter returns the last iterate with converged = false.
inline Solution solve_fixed_point(const ModelSpec& model, const Path& w, const SolverConfig& config = {}) {
    return detail::picard_solve(model, w, 0.0, config, detail::StationaryKernel{model}, detail::NoFirstCell{}, false);
}

/// X = c(xi + w - int kappa(X)), so X(0) = c(xi) for a driver with w(0) = 0.
inline Solution solve_with_random_initial(const ModelSpec& model, const Path& w, double xi,
                                          const SolverConfig& config = {}) {
    if (!std::isfinite(xi)) throw std::invalid_argument("solve_with_random_initial: xi must be finite");
    return detail::picard_solve(model, w, xi, config, detail::StationaryKernel{model}, detail::NoFirstCell{}, false);
}

/// Fixed point for an fBm driver with the time-dependent kernel kappa^H.
/// Requires f, g, g' (the kernel needs f/g explicitly).
inline Solution solve_fixed_point_fbm(const ModelSpec& model, const Path& b_h, double hurst,
                                      const SolverConfig& config = {}) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw InvalidHurst(hurst);
    if (!model.has_coefficients()) throw std::invalid_argument("solve_fixed_point_fbm: model lacks f, g or g'");
    const bool singular = hurst < 0.5;
    bool override_first = false;
    if (singular) {
        if (config.first_cell == FirstCellRule::analytic) {
            override_first = true;
        } else {
            const double start = model.c(b_h[0]);
            if (model.g_prime(start) != 0.0) throw KernelSingularity(hurst);
        }
    }
    const Grid& grid = b_h.grid();
    auto kernel = [&](std::size_t k, double x) {
        if (k == 0 && singular) {
            // only reachable under the pointwise rule with g'(x) == 0 at t = 0
            const double gp = model.g_prime(x);
            if (gp != 0.0) throw KernelSingularity(hurst);
            const double gx = model.g(x);
            if (gx == 0.0) throw DivisionByZeroDiffusion(x);
            return -model.f(x) / gx;
        }
        return kappa_fbm(model, hurst, grid.time(k), x);
    };
    return detail::picard_solve(model, b_h, 0.0, config, kernel, detail::FbmFirstCell{model, hurst}, override_first);
}

/// Integrates the feedback form y' = kappa(c(w(t) - y)), y(0) = 0, with
/// classical RK4 on the grid (w linear between nodes) and returns
/// X(t_k) = c(w(t_k) - y(t_k)).
inline Path solve_feedback_ode(const ModelSpec& model, const Path& w) {
    const std::size_t n = w.size();
    const double dt = w.grid().dt();
    auto rate = [&](double wt, double y) { return model.kappa_of_c(wt - y); };
    Path x(w.grid());
    double y = 0.0;
    x[0] = model.c(w[0] - y);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double w0 = w[k];
        const double w1 = w[k + 1];
        const double wm = 0.5 * (w0 + w1);
        const double k1 = rate(w0, y);
        const double k2 = rate(wm, y + 0.5 * dt * k1);
        const double k3 = rate(wm, y + 0.5 * dt * k2);
        const double k4 = rate(w1, y + dt * k3);
        y += dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        x[k + 1] = model.c(w1 - y);
    }
    return x;
}

/// Interval that contains every argument of c the Picard iteration can
/// produce from this driver: [min w - K T, max w + K T] shifted by xi.
inline Interval working_range(const ModelSpec& model, const Path& w, double xi = 0.0) {
    const auto [lo, hi] = std::minmax_element(w.values().begin(), w.values().end());
    const double reach = model.kappa_bound * w.grid().horizon();
    return {*lo + xi - reach, *hi + xi + reach};
}

/// lambda = 2 L_c K_kappa with L_c the bound of |c'| on the working range.
inline double contraction_lambda(const ModelSpec& model, const Path& w, double xi = 0.0) {
    const Interval r = working_range(model, w, xi);
    return 2.0 * lipschitz_bound(model, r.lo, r.hi) * model.kappa_bound;
}

/// Throws NoConvergence for an unconverged solution; returns it otherwise.
inline const Solution& require_converged(const Solution& s) {
    if (!s.diagnostics.converged) throw NoConvergence(s.diagnostics.iterations, s.diagnostics.residual);
    return s;
}

}  // namespace causal
