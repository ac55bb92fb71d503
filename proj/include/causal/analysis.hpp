#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "causal/errors.hpp"
#include "causal/grid.hpp"
#include "causal/model.hpp"
#include "causal/solver.hpp"

namespace causal {

/// Inverts the causal map: w(t_k) = c^{-1}(x(t_k)) + Q_k, where Q_k is the
/// running quadrature of kappa(x) with the same rule as the forward solver.
/// Node k of the output depends on nodes 0..k of the input only.
inline Path recover_driver(const ModelSpec& model, const Path& x, Quadrature q = Quadrature::trapezoid) {
    const std::size_t n = x.size();
    const double dt = x.grid().dt();
    std::vector<double> base(n);
    for (std::size_t k = 0; k < n; ++k) {
        try {
            base[k] = model.c_inverse(x[k]);
        } catch (const std::out_of_range&) {
            throw InverseDomainError(k, x[k]);
        }
        if (!std::isfinite(base[k])) throw InverseDomainError(k, x[k]);
    }

    Path w(x.grid());
    double integral = 0.0;
    double prev = model.kappa(x[0]);
    w[0] = base[0] + integral;
    for (std::size_t k = 1; k < n; ++k) {
        const double cur = model.kappa(x[k]);
        if (q == Quadrature::trapezoid) {
            integral = integral + 0.5 * dt * (prev + cur);
        } else {
            integral = integral + dt * prev;
        }
        w[k] = base[k] + integral;
        prev = cur;
    }
    return w;
}

/// Observable input/output pair for identifying a second instrument Y that
/// is driven by the same Wiener process as X. The shared driver is an
/// assumption of the caller; it cannot be checked from the data.
struct AlignedPair {
    Path input;   // recovered driver w
    Path output;  // observed Y on the same nodes
};

inline AlignedPair co_driven_pairing(const ModelSpec& model_x, const Path& x, const Path& y,
                                     Quadrature q = Quadrature::trapezoid) {
    require_same_grid(x, y, "co_driven_pairing");
    return {recover_driver(model_x, x, q), y};
}

}  // namespace causal
