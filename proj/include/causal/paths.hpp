#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "causal/errors.hpp"
#include "causal/grid.hpp"
#include "causal/rng.hpp"

namespace causal {

/// Node values of sampled paths are rounded to multiples of this quantum.
/// Differences of any two nodes (|w| < 2^12) are then exact, so
/// x + (w[j] - w[i]) reproduces w[j] bit for bit, also after restriction.
inline constexpr double kPathQuantum = 0x1.0p-40;

inline double quantize(double v) noexcept { return std::nearbyint(v / kPathQuantum) * kPathQuantum; }

/// Standard Wiener path: w(0) = 0, independent N(0, dt) increments.
inline Path sample_wiener(const Grid& grid, Seed seed) {
    CounterRng rng(seed);
    const double sd = std::sqrt(grid.dt());
    Path w(grid);
    for (std::size_t k = 1; k < grid.size(); ++k) w[k] = quantize(w[k - 1] + sd * rng.normal());
    return w;
}

inline constexpr std::size_t kMaxFbmSteps = 4096;

/// Exact fractional Brownian motion on a uniform grid. The covariance of
/// the increments (fractional Gaussian noise) is factorized once with a
/// dense Cholesky decomposition; each path is L z summed cumulatively, which
/// reproduces R(s,t) = (s^2H + t^2H - |t-s|^2H)/2 at the nodes.
class FbmGenerator {
public:
    FbmGenerator(Grid grid, double hurst) : grid_(grid), hurst_(hurst) {
        if (!(hurst > 0.0 && hurst < 1.0)) throw InvalidHurst(hurst);
        const std::size_t n = grid.steps();
        if (n > kMaxFbmSteps) {
            throw std::invalid_argument("FbmGenerator: at most " + std::to_string(kMaxFbmSteps) + " steps supported");
        }
        const double two_h = 2.0 * hurst;
        const double scale = 0.5 * std::pow(grid.dt(), two_h);
        std::vector<double> gamma(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double k = static_cast<double>(j);
            gamma[j] = scale * (std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) + std::pow(std::abs(k - 1.0), two_h));
        }
        Eigen::MatrixXd cov(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) cov(i, j) = gamma[i > j ? i - j : j - i];
        }
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
            throw FactorizationFailure(eig.eigenvalues().minCoeff());
        }
        factor_ = llt.matrixL();
    }

    const Grid& grid() const noexcept { return grid_; }
    double hurst() const noexcept { return hurst_; }

    Path sample(Seed seed) const {
        CounterRng rng(seed);
        const std::size_t n = grid_.steps();
        Eigen::VectorXd z(n);
        for (std::size_t i = 0; i < n; ++i) z(i) = rng.normal();
        const Eigen::VectorXd increments = factor_.triangularView<Eigen::Lower>() * z;
        Path b(grid_);
        for (std::size_t k = 1; k <= n; ++k) b[k] = b[k - 1] + increments(k - 1);
        return b;
    }

private:
    Grid grid_;
    double hurst_;
    Eigen::MatrixXd factor_;
};

/// One-shot convenience; factorizes the covariance on every call.
inline Path sample_fbm(const Grid& grid, double hurst, Seed seed) { return FbmGenerator(grid, hurst).sample(seed); }

/// fBm covariance R(s, t).
inline double fbm_covariance(double s, double t, double hurst) {
    const double two_h = 2.0 * hurst;
    return 0.5 * (std::pow(s, two_h) + std::pow(t, two_h) - std::pow(std::abs(t - s), two_h));
}

namespace driver {
struct Zero {};
struct Linear {
    double slope = 1.0;
};
/// Knots (t, value) with increasing t; constant extrapolation outside.
struct PiecewiseLinear {
    std::vector<std::pair<double, double>> knots;
};
struct Sampled {
    std::function<double(double)> fn;
};
}  // namespace driver

using DeterministicKind = std::variant<driver::Zero, driver::Linear, driver::PiecewiseLinear, driver::Sampled>;

/// Deterministic test drivers evaluated exactly at the grid nodes.
inline Path deterministic_path(const DeterministicKind& kind, const Grid& grid) {
    Path p(grid);
    struct Visitor {
        Path& p;
        void operator()(const driver::Zero&) const {}
        void operator()(const driver::Linear& l) const {
            for (std::size_t k = 0; k < p.size(); ++k) p[k] = l.slope * p.time(k);
        }
        void operator()(const driver::PiecewiseLinear& pl) const {
            const auto& kn = pl.knots;
            if (kn.empty()) throw std::invalid_argument("deterministic_path: no knots");
            for (std::size_t i = 0; i < kn.size(); ++i) {
                if (kn[i].first < 0.0 || kn[i].first > p.grid().horizon()) {
                    throw std::invalid_argument("deterministic_path: knot outside [0, T]");
                }
                if (i > 0 && !(kn[i].first > kn[i - 1].first)) {
                    throw std::invalid_argument("deterministic_path: knot times must increase");
                }
            }
            for (std::size_t k = 0; k < p.size(); ++k) {
                const double t = p.time(k);
                if (t <= kn.front().first) {
                    p[k] = kn.front().second;
                } else if (t >= kn.back().first) {
                    p[k] = kn.back().second;
                } else {
                    std::size_t i = 1;
                    while (kn[i].first < t) ++i;
                    const auto [t0, v0] = kn[i - 1];
                    const auto [t1, v1] = kn[i];
                    p[k] = v0 + (v1 - v0) * (t - t0) / (t1 - t0);
                }
            }
        }
        void operator()(const driver::Sampled& s) const {
            for (std::size_t k = 0; k < p.size(); ++k) p[k] = s.fn(p.time(k));
        }
    };
    std::visit(Visitor{p}, kind);
    return p;
}

}  // namespace causal
