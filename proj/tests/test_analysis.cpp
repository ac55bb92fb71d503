#include <catch_amalgamated.hpp>

#include <cmath>

#include "causal/analysis.hpp"
#include "causal/model.hpp"
#include "causal/paths.hpp"
#include "causal/reference.hpp"
#include "causal/solver.hpp"

using namespace causal;
using Catch::Approx;

namespace {

ModelSpec sinh_model(Phi phi = Phi::arctan()) { return catalog_model({CatalogKind::sinh, 0.0, 0.0, phi}); }

}  // namespace

TEST_CASE("recovery on the identity model is the identity") {
    const Grid g(1.0, 128);
    const Path x = sample_wiener(g, Seed{1, 0});
    CHECK(recover_driver(identity_model(), x) == x);
}

TEST_CASE("recovery with kappa = 0 is the pointwise inverse") {
    const Grid g(1.0, 64);
    const Path x = sample_wiener(g, Seed{2, 0});
    const Path w = recover_driver(sinh_model(Phi::zero()), x);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(w[k] == std::asinh(x[k]));
}

TEST_CASE("recovery uses the plus sign") {
    // X = c(w - Q) with kappa = 1 and c = id means w = X + t.
    const Grid g(1.0, 16);
    const auto m = catalog_model({CatalogKind::unit, 0.0, 0.0, Phi::constant(1.0)});
    const Path x = sample_wiener(g, Seed{3, 0});
    const Path w = recover_driver(m, x);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(w[k] == Approx(x[k] + g.time(k)).margin(1e-15));
}

TEST_CASE("forward then inverse recovers the driver") {
    const Grid g(1.0, 512);
    const auto m = sinh_model();
    for (std::uint64_t i = 0; i < 10; ++i) {
        const Path w = sample_wiener(g, Seed{4, 0}.substream("rt", i));
        const Solution s = solve_fixed_point(m, w);
        CHECK(strong_error(recover_driver(m, s.x), w) <= 1e-9);
        const Path back = recover_driver(m, solve_fixed_point(m, recover_driver(m, s.x)).x);
        CHECK(strong_error(back, w) <= 1e-9);
    }
}

TEST_CASE("inverse then forward reproduces the observed path") {
    const Grid g(1.0, 512);
    const auto m = sinh_model();
    // an arbitrary admissible observation, not itself produced by the solver
    const Path x = deterministic_path(driver::Sampled{[](double t) { return std::sin(6.0 * t) + t; }}, g);
    const Solution s = solve_fixed_point(m, recover_driver(m, x));
    CHECK(strong_error(s.x, x) <= 1e-10);
}

TEST_CASE("recovery is nonanticipative under left-endpoint quadrature") {
    const Grid g(1.0, 128);
    const auto m = sinh_model();
    const Path x = sample_wiener(g, Seed{5, 0});
    Path y = x;
    for (std::size_t k = 65; k < g.size(); ++k) y[k] += 0.3;
    const Path a = recover_driver(m, x, Quadrature::left_endpoint);
    const Path b = recover_driver(m, y, Quadrature::left_endpoint);
    for (std::size_t k = 0; k <= 64; ++k) CHECK(a[k] == b[k]);
    CHECK(a[65] != b[65]);
}

TEST_CASE("co-driven pairing recovers the shared driver") {
    const Grid g(1.0, 1024);
    const auto mx = sinh_model();
    const auto my = catalog_model({CatalogKind::power, 1.0, 0.5, Phi::arctan()});
    const Path w = sample_wiener(g, Seed{6, 0});
    const Path x = solve_fixed_point(mx, w).x;
    const Path y = euler_maruyama(my, w, my.x0);
    const AlignedPair pair = co_driven_pairing(mx, x, y);
    CHECK(strong_error(pair.input, w) <= 1e-9);
    CHECK(pair.output == y);

    const AlignedPair self = co_driven_pairing(mx, x, x);
    CHECK(strong_error(solve_fixed_point(mx, self.input).x, x) <= 1e-10);
    CHECK_THROWS_AS(co_driven_pairing(mx, x, Path(Grid(1.0, 8))), GridMismatch);
}

TEST_CASE("recovery names the node outside the range of c") {
    const Grid g(1.0, 32);
    Path x = sample_wiener(g, Seed{7, 0});
    x[17] = std::nan("");
    try {
        recover_driver(sinh_model(), x);
        FAIL("expected InverseDomainError");
    } catch (const InverseDomainError& e) {
        CHECK(e.node() == 17);
    }

    OdeConfig ode;
    ode.kappa_bound = 1.6;
    const auto ref = sinh_model();
    const auto tab = build_model_from_fg(ref.f, ref.g, ref.g_prime, 0.0, Interval::whole_line(), ode);
    Path big = sample_wiener(g, Seed{8, 0});
    big[5] = 1e6;  // beyond sinh(10)
    try {
        recover_driver(tab, big);
        FAIL("expected InverseDomainError");
    } catch (const InverseDomainError& e) {
        CHECK(e.node() == 5);
        CHECK(e.value() == 1e6);
    }
}
