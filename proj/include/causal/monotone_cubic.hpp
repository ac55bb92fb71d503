#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace causal {

/// Piecewise cubic Hermite interpolant on strictly increasing data with the
/// Fritsch-Carlson limiter applied to the node slopes, so the interpolant is
/// monotone whenever the data are. Node slopes may be supplied (e.g. exact
/// derivatives from an ODE right-hand side); otherwise they are estimated
/// from secants.
class MonotoneCubic {
public:
    MonotoneCubic() = default;

    MonotoneCubic(std::vector<double> x, std::vector<double> y, std::vector<double> slopes = {})
        : x_(std::move(x)), y_(std::move(y)), d_(std::move(slopes)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n || (!d_.empty() && d_.size() != n)) {
            throw std::invalid_argument("MonotoneCubic: need >= 2 nodes and matching array sizes");
        }
        for (std::size_t i = 1; i < n; ++i) {
            if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("MonotoneCubic: abscissae must increase");
        }
        std::vector<double> secant(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) secant[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);

        if (d_.empty()) {
            d_.resize(n);
            d_.front() = secant.front();
            d_.back() = secant.back();
            for (std::size_t i = 1; i + 1 < n; ++i) {
                d_[i] = (secant[i - 1] * secant[i] <= 0.0) ? 0.0 : 0.5 * (secant[i - 1] + secant[i]);
            }
        }
        limit(secant);
        increasing_ = y_.back() > y_.front();
    }

    double operator()(double xq) const {
        const std::size_t i = cell_of(xq);
        return hermite(i, xq);
    }

    /// First derivative of the interpolant.
    double derivative(double xq) const { return cell_derivative(cell_of(xq), xq); }

    /// Inverse of a monotone interpolant: bisection over the node values to
    /// locate the cell, then safeguarded Newton on that cell's cubic.
    double inverse(double yq) const {
        const std::size_t n = y_.size();
        std::size_t lo = 0;
        std::size_t hi = n - 1;
        auto before = [this](double a, double b) { return increasing_ ? a < b : a > b; };
        if (before(yq, y_.front()) || before(y_.back(), yq)) {
            throw std::out_of_range("MonotoneCubic::inverse: value outside tabulated range");
        }
        while (hi - lo > 1) {
            const std::size_t mid = lo + (hi - lo) / 2;
            if (before(yq, y_[mid])) hi = mid; else lo = mid;
        }
        if (yq == y_[lo]) return x_[lo];
        if (yq == y_[hi]) return x_[hi];

        double a = x_[lo];
        double b = x_[hi];
        double xq = a + (b - a) * (yq - y_[lo]) / (y_[hi] - y_[lo]);
        for (int it = 0; it < 60; ++it) {
            const double r = hermite(lo, xq) - yq;
            if (r == 0.0) break;
            if ((r > 0.0) == increasing_) b = xq; else a = xq;
            const double slope = cell_derivative(lo, xq);
            double next = (slope != 0.0) ? xq - r / slope : 0.5 * (a + b);
            if (!(next > a && next < b)) next = 0.5 * (a + b);
            if (std::abs(next - xq) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(xq))) {
                xq = next;
                break;
            }
            xq = next;
        }
        return xq;
    }

    double x_min() const noexcept { return x_.front(); }
    double x_max() const noexcept { return x_.back(); }
    double y_min() const noexcept { return std::min(y_.front(), y_.back()); }
    double y_max() const noexcept { return std::max(y_.front(), y_.back()); }
    const std::vector<double>& nodes() const noexcept { return x_; }
    const std::vector<double>& values() const noexcept { return y_; }
    const std::vector<double>& slopes() const noexcept { return d_; }

private:
    void limit(const std::vector<double>& secant) {
        for (std::size_t i = 0; i < secant.size(); ++i) {
            if (secant[i] == 0.0) {
                d_[i] = 0.0;
                d_[i + 1] = 0.0;
                continue;
            }
            const double alpha = d_[i] / secant[i];
            const double beta = d_[i + 1] / secant[i];
            if (alpha < 0.0) d_[i] = 0.0;
            if (beta < 0.0) d_[i + 1] = 0.0;
            const double r2 = alpha * alpha + beta * beta;
            if (r2 > 9.0) {
                const double tau = 3.0 / std::sqrt(r2);
                d_[i] = tau * alpha * secant[i];
                d_[i + 1] = tau * beta * secant[i];
            }
        }
    }

    std::size_t cell_of(double xq) const {
        if (!(xq >= x_.front() && xq <= x_.back())) {
            throw std::out_of_range("MonotoneCubic: abscissa outside tabulated range");
        }
        auto it = std::upper_bound(x_.begin(), x_.end(), xq);
        std::size_t i = static_cast<std::size_t>(it - x_.begin());
        i = (i == 0) ? 0 : i - 1;
        return std::min(i, x_.size() - 2);
    }

    double hermite(std::size_t i, double xq) const {
        const double h = x_[i + 1] - x_[i];
        const double s = (xq - x_[i]) / h;
        const double s2 = s * s;
        const double s3 = s2 * s;
        const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        const double h10 = s3 - 2.0 * s2 + s;
        const double h01 = -2.0 * s3 + 3.0 * s2;
        const double h11 = s3 - s2;
        return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
    }

    double cell_derivative(std::size_t i, double xq) const {
        const double h = x_[i + 1] - x_[i];
        const double s = (xq - x_[i]) / h;
        const double dh00 = 6.0 * s * s - 6.0 * s;
        return (dh00 * (y_[i] - y_[i + 1])) / h + (3.0 * s * s - 4.0 * s + 1.0) * d_[i] +
               (3.0 * s * s - 2.0 * s) * d_[i + 1];
    }

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> d_;
    bool increasing_ = true;
};

}  // namespace causal
