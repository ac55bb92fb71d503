#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "causal/errors.hpp"
#include "causal/grid.hpp"
#include "causal/model.hpp"
#include "causal/parallel.hpp"
#include "causal/paths.hpp"
#include "causal/solver.hpp"

namespace causal {

inline constexpr double kDefaultBlowupGuard = 1e8;

/// x_{k+1} = x_k + f(x_k) dt + g(x_k) (w_{k+1} - w_k).
inline Path euler_maruyama(const ModelSpec& model, const Path& w, double x0, double guard = kDefaultBlowupGuard) {
    if (!model.f || !model.g) throw std::invalid_argument("euler_maruyama: model lacks f or g");
    const double dt = w.grid().dt();
    Path x(w.grid());
    x[0] = x0;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
        const double xk = x[k];
        x[k + 1] = xk + model.f(xk) * dt + model.g(xk) * (w[k + 1] - w[k]);
        if (!(std::abs(x[k + 1]) <= guard)) throw NumericalBlowup(k + 1, x[k + 1]);
    }
    return x;
}

/// Euler step plus g g' ((dw)^2 - dt) / 2.
inline Path milstein(const ModelSpec& model, const Path& w, double x0, double guard = kDefaultBlowupGuard) {
    if (!model.has_coefficients()) throw std::invalid_argument("milstein: model lacks f, g or g'");
    const double dt = w.grid().dt();
    Path x(w.grid());
    x[0] = x0;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
        const double xk = x[k];
        const double dw = w[k + 1] - w[k];
        const double gk = model.g(xk);
        x[k + 1] = xk + model.f(xk) * dt + gk * dw + 0.5 * gk * model.g_prime(xk) * (dw * dw - dt);
        if (!(std::abs(x[k + 1]) <= guard)) throw NumericalBlowup(k + 1, x[k + 1]);
    }
    return x;
}

/// max_k |x(t_k) - y(t_k)|.
inline double strong_error(const Path& x, const Path& y) {
    require_same_grid(x, y, "strong_error");
    double e = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) e = std::max(e, std::abs(x[k] - y[k]));
    return e;
}

/// Least-squares slope of log(err) against log(dt). Positive for errors
/// that shrink under refinement. NaN when any error is not positive.
inline double fit_loglog_slope(std::span<const double> dts, std::span<const double> errs) {
    if (dts.size() != errs.size() || dts.size() < 2) {
        throw std::invalid_argument("fit_loglog_slope: need at least two (dt, error) pairs");
    }
    const double n = static_cast<double>(dts.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < dts.size(); ++i) {
        if (!(errs[i] > 0.0) || !(dts[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        const double lx = std::log(dts[i]);
        const double ly = std::log(errs[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct ConvergenceRow {
    std::size_t n = 0;
    double dt = 0.0;
    double mean_error = 0.0;
    double max_error = 0.0;
    std::size_t paths = 0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;  // sorted by n
    double slope = std::numeric_limits<double>::quiet_NaN();
    std::size_t failed_paths = 0;
    std::vector<std::string> failures;

    bool mean_strictly_decreasing() const {
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (!(rows[i].mean_error < rows[i - 1].mean_error)) return false;
        }
        return true;
    }

    bool all_zero() const {
        return std::all_of(rows.begin(), rows.end(), [](const ConvergenceRow& r) { return r.max_error == 0.0; });
    }
};

/// Strong error between the causal construction and Euler-Maruyama on shared
/// Brownian paths. Each path is sampled once on the finest grid and
/// restricted to the coarser ones. A path whose solve or reference run fails
/// is dropped from every row and counted.
inline ConvergenceTable convergence_study(const ModelSpec& model, std::vector<std::size_t> n_list, std::size_t n_paths,
                                          Seed seed, double horizon = 1.0, const SolverConfig& config = {}) {
    if (n_list.size() < 2) throw std::invalid_argument("convergence_study: need at least two grid sizes (slope undefined)");
    if (n_paths == 0) throw std::invalid_argument("convergence_study: n_paths must be positive");
    std::sort(n_list.begin(), n_list.end());
    if (std::adjacent_find(n_list.begin(), n_list.end()) != n_list.end()) {
        throw std::invalid_argument("convergence_study: grid sizes must be distinct");
    }
    const Grid fine(horizon, n_list.back());
    for (std::size_t n : n_list) {
        if (n == 0 || !fine.refines(Grid(horizon, n))) {
            throw std::invalid_argument("convergence_study: every n must divide the finest n");
        }
    }

    const std::size_t rows = n_list.size();
    std::vector<double> errors(n_paths * rows, 0.0);
    std::vector<std::string> failure(n_paths);

    parallel_for(n_paths, [&](std::size_t p) {
        try {
            const Path w_fine = sample_wiener(fine, seed.substream("convergence", p));
            for (std::size_t r = 0; r < rows; ++r) {
                const Path w = w_fine.restrict_to(Grid(horizon, n_list[r]));
                const Solution s = solve_fixed_point(model, w, config);
                require_converged(s);
                const Path e = euler_maruyama(model, w, model.x0);
                errors[p * rows + r] = strong_error(s.x, e);
            }
        } catch (const std::exception& ex) {
            failure[p] = "path " + std::to_string(p) + ": " + ex.what();
        }
    });

    ConvergenceTable table;
    for (std::size_t p = 0; p < n_paths; ++p) {
        if (!failure[p].empty()) {
            ++table.failed_paths;
            table.failures.push_back(failure[p]);
        }
    }
    const std::size_t used = n_paths - table.failed_paths;
    std::vector<double> dts;
    std::vector<double> means;
    for (std::size_t r = 0; r < rows; ++r) {
        ConvergenceRow row;
        row.n = n_list[r];
        row.dt = horizon / static_cast<double>(row.n);
        row.paths = used;
        std::vector<double> col;
        col.reserve(used);
        for (std::size_t p = 0; p < n_paths; ++p) {
            if (!failure[p].empty()) continue;
            col.push_back(errors[p * rows + r]);
            row.max_error = std::max(row.max_error, errors[p * rows + r]);
        }
        row.mean_error = used ? pairwise_sum(col) / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
        dts.push_back(row.dt);
        means.push_back(row.mean_error);
        table.rows.push_back(row);
    }
    table.slope = fit_loglog_slope(dts, means);
    return table;
}

/// CSV: n,dt,mean_err,max_err,paths with a trailing `slope,<value>` row.
inline void write_convergence_csv(const std::string& file, const ConvergenceTable& table) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open " + file + " for writing");
    out << "n,dt,mean_err,max_err,paths\n" << std::setprecision(17);
    for (const auto& r : table.rows) {
        out << r.n << ',' << r.dt << ',' << r.mean_error << ',' << r.max_error << ',' << r.paths << '\n';
    }
    out << "slope," << table.slope << '\n';
}

}  // namespace causal
