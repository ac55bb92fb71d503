#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace causal {

/// Base of every error raised by the library. `code()` is a stable,
/// machine-readable identifier used in CLI error records.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class DivisionByZeroDiffusion : public Error {
public:
    explicit DivisionByZeroDiffusion(double x)
        : Error("DivisionByZeroDiffusion",
                "g(x) = 0 at x = " + std::to_string(x) + "; the model must supply kappa directly"),
          x_(x) {}
    double state() const noexcept { return x_; }

private:
    double x_;
};

class OdeBlowup : public Error {
public:
    OdeBlowup(double reached_lo, double reached_hi)
        : Error("OdeBlowup", "tabulation of c left the domain; reached argument interval [" +
                                 std::to_string(reached_lo) + ", " + std::to_string(reached_hi) + "]"),
          lo_(reached_lo), hi_(reached_hi) {}
    double reached_lo() const noexcept { return lo_; }
    double reached_hi() const noexcept { return hi_; }

private:
    double lo_;
    double hi_;
};

class NonmonotoneC : public Error {
public:
    explicit NonmonotoneC(double state)
        : Error("NonmonotoneC", "g(c) <= 0 encountered at state " + std::to_string(state) +
                                    "; c would not be strictly increasing") {}
};

class InvalidAlpha : public Error {
public:
    explicit InvalidAlpha(double alpha)
        : Error("InvalidAlpha", "catalog entry b requires |alpha| < 1, got " + std::to_string(alpha)) {}
};

class UnboundedKappa : public Error {
public:
    UnboundedKappa(double observed, double declared)
        : Error("UnboundedKappa", "sampled |kappa| = " + std::to_string(observed) + " exceeds the declared bound " +
                                      std::to_string(declared)) {}
};

class InvalidHurst : public Error {
public:
    explicit InvalidHurst(double h)
        : Error("InvalidHurst", "Hurst index must lie in (0,1), got " + std::to_string(h)) {}
};

class FactorizationFailure : public Error {
public:
    explicit FactorizationFailure(double smallest_eigenvalue)
        : Error("FactorizationFailure", "covariance matrix is not positive definite; smallest eigenvalue " +
                                            std::to_string(smallest_eigenvalue)),
          eig_(smallest_eigenvalue) {}
    double smallest_eigenvalue() const noexcept { return eig_; }

private:
    double eig_;
};

class DomainEscape : public Error {
public:
    DomainEscape(double argument, double lo, double hi)
        : Error("DomainEscape", "argument " + std::to_string(argument) + " of c left the tabulated interval [" +
                                    std::to_string(lo) + ", " + std::to_string(hi) + "]"),
          argument_(argument) {}
    double argument() const noexcept { return argument_; }

private:
    double argument_;
};

class KernelSingularity : public Error {
public:
    explicit KernelSingularity(double hurst)
        : Error("KernelSingularity", "time factor t^(2H-1) diverges at t = 0 for H = " + std::to_string(hurst) +
                                         " and g'(X_0) != 0; use the analytic first-cell rule") {}
};

class NumericalBlowup : public Error {
public:
    NumericalBlowup(std::size_t node, double value)
        : Error("NumericalBlowup", "reference scheme exceeded guard at node " + std::to_string(node) +
                                       " (value " + std::to_string(value) + ")"),
          node_(node) {}
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

class NoConvergence : public Error {
public:
    NoConvergence(int iterations, double residual)
        : Error("NoConvergence", "Picard iteration did not converge after " + std::to_string(iterations) +
                                     " iterations (residual " + std::to_string(residual) + ")") {}
};

class GridMismatch : public Error {
public:
    explicit GridMismatch(const std::string& what) : Error("GridMismatch", what) {}
};

class InverseDomainError : public Error {
public:
    InverseDomainError(std::size_t node, double value)
        : Error("InverseDomainError", "observed value " + std::to_string(value) + " at node " +
                                          std::to_string(node) + " lies outside the range of c"),
          node_(node), value_(value) {}
    std::size_t node() const noexcept { return node_; }
    double value() const noexcept { return value_; }

private:
    std::size_t node_;
    double value_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

}  // namespace causal
