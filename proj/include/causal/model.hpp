#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "causal/errors.hpp"
#include "causal/monotone_cubic.hpp"
#include "causal/report.hpp"

namespace causal {

using ScalarFn = std::function<double(double)>;

struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double x) const noexcept { return x >= lo && x <= hi; }
    bool bounded() const noexcept { return std::isfinite(lo) && std::isfinite(hi); }
    static Interval whole_line() noexcept { return {}; }
};

enum class CEvaluation { closed_form, tabulated_ode };

/// Diffusion dx = f(x)dt + g(x)dw together with its causal representation:
/// the transform c (c' = g(c)), its inverse, and the kernel
/// kappa = g'/2 - f/g. kappa is stored as its own function so models whose
/// g vanishes somewhere stay usable. Immutable once built; copies share the
/// tabulation of c.
struct ModelSpec {
    std::string name;

    ScalarFn f;
    ScalarFn g;
    ScalarFn g_prime;

    ScalarFn c_fn;
    ScalarFn c_inverse_fn;
    ScalarFn kappa;

    CEvaluation mode = CEvaluation::closed_form;
    double kappa_bound = 0.0;
    double x0 = 0.0;
    double shift_a = 0.0;

    Interval domain;          // where g is C^1 (up to the singular state)
    Interval argument_range;  // where c can be evaluated
    Interval state_range;     // image of argument_range under c

    std::optional<double> singular_argument;  // kink of c (entry b: z = -a)
    std::optional<double> singular_state;     // zero of g (entry b: x = 0)

    /// c(z); throws DomainEscape outside the tabulated interval.
    double c(double z) const {
        if (!argument_range.contains(z)) throw DomainEscape(z, argument_range.lo, argument_range.hi);
        return c_fn(z);
    }

    /// c^{-1}(y); throws std::out_of_range when y is not in the image of c.
    double c_inverse(double y) const {
        if (!state_range.contains(y) || !std::isfinite(y)) {
            throw std::out_of_range("c_inverse: value outside the range of c");
        }
        return c_inverse_fn(y);
    }

    /// c'(z) = g(c(z)).
    double c_prime(double z) const { return g(c(z)); }

    /// The composition kappa o c that drives the translated Wiener process.
    double kappa_of_c(double z) const { return kappa(c(z)); }

    bool has_coefficients() const noexcept { return f && g && g_prime; }
};

/// kappa(x) = g'(x)/2 - f(x)/g(x).
inline double kappa_from_fg(const ScalarFn& f, const ScalarFn& g, const ScalarFn& g_prime, double x) {
    const double gx = g(x);
    if (gx == 0.0) throw DivisionByZeroDiffusion(x);
    return g_prime(x) / 2.0 - f(x) / gx;
}

/// Bounded continuous function used as the kernel of the catalog models.
struct Phi {
    std::string name;
    ScalarFn fn;
    double bound = 0.0;

    static Phi arctan() { return {"arctan", [](double x) { return std::atan(x); }, std::numbers::pi / 2.0}; }
    static Phi zero() { return {"zero", [](double) { return 0.0; }, 0.0}; }
    static Phi constant(double v) { return {"constant", [v](double) { return v; }, std::abs(v)}; }
};

namespace detail {

inline double sign(double x) noexcept { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Samples |fn| over a spread of states, including large magnitudes, and
// rejects the function if it exceeds the declared bound.
inline void require_bounded(const ScalarFn& fn, double declared) {
    if (!(declared >= 0.0) || !std::isfinite(declared)) throw UnboundedKappa(declared, declared);
    double worst = 0.0;
    auto probe = [&](double x) {
        const double v = std::abs(fn(x));
        if (std::isnan(v)) return;
        worst = std::max(worst, v);
    };
    for (int i = -2000; i <= 2000; ++i) probe(0.05 * i);
    for (double m : {1e3, 1e4, 1e6, 1e9}) {
        probe(m);
        probe(-m);
    }
    if (worst > declared * (1.0 + 1e-9) + 1e-300) throw UnboundedKappa(worst, declared);
}

}  // namespace detail

struct OdeConfig {
    double step = 1e-3;        // RK4 step for c' = g(c)
    double half_width = 10.0;  // c tabulated on [-half_width, half_width]
    double kappa_bound = std::numeric_limits<double>::quiet_NaN();  // declared sup |kappa|, required
};

/// Builds c for arbitrary (f, g) by fixed-step RK4 on c' = g(c), c(0) = x0,
/// tabulated on [-M, M] with node slopes g(c) and monotone cubic
/// interpolation between nodes. kappa comes from kappa_from_fg.
inline ModelSpec build_model_from_fg(ScalarFn f, ScalarFn g, ScalarFn g_prime, double x0,
                                     Interval domain = Interval::whole_line(), const OdeConfig& ode = {},
                                     std::string name = "fg") {
    if (!(ode.step > 0.0) || !(ode.half_width > 0.0)) {
        throw std::invalid_argument("build_model_from_fg: step and half_width must be positive");
    }
    if (!domain.contains(x0)) throw OdeBlowup(0.0, 0.0);

    const auto steps = static_cast<std::size_t>(std::llround(ode.half_width / ode.step));
    if (steps < 1) throw std::invalid_argument("build_model_from_fg: half_width smaller than one step");
    const double h = ode.step;
    const double span = static_cast<double>(steps) * h;

    auto rhs = [&](double y) {
        if (!domain.contains(y) || !std::isfinite(y)) return std::numeric_limits<double>::quiet_NaN();
        const double v = g(y);
        if (!(v > 0.0)) throw NonmonotoneC(y);
        return v;
    };

    // One direction of the tabulation; dir = +1 or -1.
    auto sweep = [&](double dir, std::vector<double>& zs, std::vector<double>& ys) {
        double z = 0.0;
        double y = x0;
        zs.assign(1, 0.0);
        ys.assign(1, x0);
        for (std::size_t i = 0; i < steps; ++i) {
            const double k1 = dir * rhs(y);
            const double k2 = dir * rhs(y + 0.5 * h * k1);
            const double k3 = dir * rhs(y + 0.5 * h * k2);
            const double k4 = dir * rhs(y + h * k3);
            const double next = y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
            if (!std::isfinite(next) || !domain.contains(next) || std::abs(next) > 1e150) {
                const double reached = dir * z;
                throw OdeBlowup(dir > 0 ? 0.0 : reached, dir > 0 ? reached : 0.0);
            }
            z = (i + 1 == steps && std::abs(span - ode.half_width) <= 1e-9 * ode.half_width) ? ode.half_width
                                                                                             : static_cast<double>(i + 1) * h;
            y = next;
            zs.push_back(dir * z);
            ys.push_back(y);
        }
    };

    std::vector<double> z_pos, y_pos, z_neg, y_neg;
    (void)rhs(x0);
    sweep(+1.0, z_pos, y_pos);
    try {
        sweep(-1.0, z_neg, y_neg);
    } catch (const OdeBlowup& e) {
        throw OdeBlowup(e.reached_lo(), z_pos.back());
    }

    std::vector<double> zs;
    std::vector<double> ys;
    zs.reserve(2 * steps + 1);
    ys.reserve(2 * steps + 1);
    for (std::size_t i = z_neg.size(); i-- > 1;) {
        zs.push_back(z_neg[i]);
        ys.push_back(y_neg[i]);
    }
    zs.insert(zs.end(), z_pos.begin(), z_pos.end());
    ys.insert(ys.end(), y_pos.begin(), y_pos.end());
    std::vector<double> slopes(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) slopes[i] = g(ys[i]);

    auto table = std::make_shared<const MonotoneCubic>(zs, ys, slopes);

    ModelSpec m;
    m.name = std::move(name);
    m.mode = CEvaluation::tabulated_ode;
    m.c_fn = [table](double z) { return (*table)(z); };
    m.c_inverse_fn = [table](double y) { return table->inverse(y); };
    m.kappa = [f, g, g_prime](double x) { return kappa_from_fg(f, g, g_prime, x); };
    m.f = std::move(f);
    m.g = std::move(g);
    m.g_prime = std::move(g_prime);
    m.x0 = x0;
    m.domain = domain;
    m.argument_range = {table->x_min(), table->x_max()};
    m.state_range = {table->y_min(), table->y_max()};

    double worst = 0.0;
    for (double y : ys) worst = std::max(worst, std::abs(m.kappa(y)));
    const double declared = ode.kappa_bound;
    if (!std::isfinite(declared)) throw UnboundedKappa(worst, declared);
    if (worst > declared * (1.0 + 1e-9)) throw UnboundedKappa(worst, declared);
    m.kappa_bound = declared;
    return m;
}

enum class CatalogKind {
    sinh,   // g(x) = sqrt(1 + x^2), c(z) = sinh(a + z)
    power,  // g(x) = |x|^alpha, c(z) = sign(a + z) [(1 - alpha)|a + z|]^(1/(1 - alpha))
    unit,   // g = 1, c(z) = a + z, f = -phi
};

struct CatalogEntry {
    CatalogKind kind = CatalogKind::sinh;
    double a = 0.0;
    double alpha = 0.0;
    Phi phi = Phi::arctan();
};

/// Closed-form models with kappa = phi.
inline ModelSpec catalog_model(const CatalogEntry& entry) {
    const double a = entry.a;
    const Phi phi = entry.phi;
    detail::require_bounded(phi.fn, phi.bound);

    ModelSpec m;
    m.mode = CEvaluation::closed_form;
    m.kappa = phi.fn;
    m.kappa_bound = phi.bound;
    m.shift_a = a;

    switch (entry.kind) {
    case CatalogKind::sinh: {
        m.name = "sinh";
        m.g = [](double x) { return std::hypot(1.0, x); };
        m.g_prime = [](double x) { return x / std::hypot(1.0, x); };
        m.f = [p = phi.fn](double x) { return x / 2.0 - p(x) * std::hypot(1.0, x); };
        m.c_fn = [a](double z) { return std::sinh(a + z); };
        m.c_inverse_fn = [a](double y) { return std::asinh(y) - a; };
        break;
    }
    case CatalogKind::power: {
        const double alpha = entry.alpha;
        if (!(std::abs(alpha) < 1.0)) throw InvalidAlpha(alpha);
        m.name = "power";
        const double q = 1.0 - alpha;
        m.g = [alpha](double x) { return std::pow(std::abs(x), alpha); };
        m.g_prime = [alpha](double x) {
            if (alpha == 0.0) return 0.0;
            if (x == 0.0) return std::numeric_limits<double>::quiet_NaN();
            return alpha * detail::sign(x) * std::pow(std::abs(x), alpha - 1.0);
        };
        m.f = [alpha, p = phi.fn](double x) {
            const double drift = (x == 0.0) ? 0.0 : alpha / 2.0 * detail::sign(x) * std::pow(std::abs(x), 2.0 * alpha - 1.0);
            return drift - std::pow(std::abs(x), alpha) * p(x);
        };
        m.c_fn = [a, q](double z) { return detail::sign(a + z) * std::pow(q * std::abs(a + z), 1.0 / q); };
        m.c_inverse_fn = [a, q](double y) { return detail::sign(y) * std::pow(std::abs(y), q) / q - a; };
        m.singular_argument = -a;
        m.singular_state = 0.0;
        break;
    }
    case CatalogKind::unit: {
        m.name = "unit";
        m.g = [](double) { return 1.0; };
        m.g_prime = [](double) { return 0.0; };
        m.f = [p = phi.fn](double x) { return -p(x); };
        m.c_fn = [a](double z) { return a + z; };
        m.c_inverse_fn = [a](double y) { return y - a; };
        break;
    }
    }
    m.x0 = m.c_fn(0.0);
    return m;
}

/// c = id, kappa = 0: the driver itself is the diffusion.
inline ModelSpec identity_model() { return catalog_model({CatalogKind::unit, 0.0, 0.0, Phi::zero()}); }

/// Copy of `model` whose kappa is recomputed from its coefficients as
/// g'/2 - f/g instead of the stored closed form.
inline ModelSpec with_kappa_from_fg(ModelSpec model) {
    if (!model.has_coefficients()) throw std::invalid_argument("with_kappa_from_fg: model lacks f, g or g'");
    model.kappa = [f = model.f, g = model.g, gp = model.g_prime](double x) { return kappa_from_fg(f, g, gp, x); };
    model.name += "+fg";
    return model;
}

/// Checks the defining relations of a model on `test_points`:
/// c' = g(c) by five-point central differences, kappa = g'/2 - f/g where
/// g != 0, c^{-1}(c(z)) = z, and sup |kappa| <= declared bound. Failures are
/// reported, not thrown.
inline RunReport verify_model(const ModelSpec& model, std::span<const double> test_points, double tol) {
    RunReport report;
    report.experiment = "verify_model";
    report.details["model"] = model.name;
    report.details["points"] = test_points.size();

    constexpr double kink_exclusion = 1e-6;
    double transform_dev = 0.0;
    double kappa_dev = 0.0;
    double inverse_dev = 0.0;
    double kappa_sup = 0.0;
    std::size_t skipped = 0;
    std::vector<std::string> errors;

    for (double z : test_points) {
        try {
            const double dist = model.singular_argument ? std::abs(z - *model.singular_argument)
                                                        : std::numeric_limits<double>::infinity();
            if (dist >= kink_exclusion) {
                // power-of-two step; the stencil stays well inside the smooth branch
                const double target = std::min(1e-4 * std::max(1.0, std::abs(z)), dist / 100.0);
                const double h = std::exp2(std::floor(std::log2(target)));
                if (model.argument_range.contains(z - 2.0 * h) && model.argument_range.contains(z + 2.0 * h)) {
                    const double d = (8.0 * (model.c(z + h) - model.c(z - h)) - (model.c(z + 2.0 * h) - model.c(z - 2.0 * h))) /
                                     (12.0 * h);
                    transform_dev = std::max(transform_dev, std::abs(d - model.g(model.c(z))));
                } else {
                    ++skipped;
                }
            } else {
                ++skipped;
            }
            const double y = model.c(z);
            inverse_dev = std::max(inverse_dev, std::abs(model.c_inverse(y) - z));
        } catch (const std::exception& e) {
            errors.emplace_back(e.what());
            transform_dev = std::numeric_limits<double>::infinity();
        }

        const double x = z;  // kappa relations are checked on the same points, read as states
        const double kx = model.kappa(x);
        kappa_sup = std::max(kappa_sup, std::abs(kx));
        if (model.has_coefficients()) {
            const double gx = model.g(x);
            const double gpx = model.g_prime(x);
            if (gx != 0.0 && std::isfinite(gx) && std::isfinite(gpx)) {
                kappa_dev = std::max(kappa_dev, std::abs(kx - kappa_from_fg(model.f, model.g, model.g_prime, x)));
            }
        }
    }

    report.expect_at_most("transform_ode", transform_dev, tol);
    report.expect_at_most("kappa_consistency", kappa_dev, tol);
    report.expect_at_most("inverse_roundtrip", inverse_dev, tol);
    report.expect_at_most("kappa_bound", kappa_sup, model.kappa_bound * (1.0 + 1e-12));
    report.details["skipped_points"] = skipped;
    if (!errors.empty()) report.details["errors"] = errors;
    return report;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
    if (count < 2) return {lo};
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    out.back() = hi;
    return out;
}

/// Upper bound of |c'| = |g(c)| on [lo, hi] by dense sampling.
inline double lipschitz_bound(const ModelSpec& model, double lo, double hi, std::size_t samples = 4001) {
    double best = 0.0;
    for (double z : linspace(lo, hi, samples)) {
        const double v = std::abs(model.c_prime(z));
        if (std::isfinite(v)) best = std::max(best, v);
    }
    return best;
}

}  // namespace causal
