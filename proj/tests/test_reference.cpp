#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "causal/model.hpp"
#include "causal/parallel.hpp"
#include "causal/paths.hpp"
#include "causal/reference.hpp"

using namespace causal;
using Catch::Approx;

namespace {

ModelSpec sinh_model() { return catalog_model({CatalogKind::sinh, 0.0, 0.0, Phi::arctan()}); }

ModelSpec coefficient_model(ScalarFn f, ScalarFn g, ScalarFn gp) {
    ModelSpec m;
    m.name = "coefficients";
    m.f = std::move(f);
    m.g = std::move(g);
    m.g_prime = std::move(gp);
    return m;
}

ScalarFn constant(double v) {
    return [v](double) { return v; };
}

}  // namespace

TEST_CASE("Euler with f = 0, g = 1 returns the driver") {
    const Grid g(1.0, 512);
    for (std::uint64_t i = 0; i < 50; ++i) {
        const Path w = sample_wiener(g, Seed{5, 0}.substream("em", i));
        CHECK(euler_maruyama(identity_model(), w, 0.0) == w);
        CHECK(milstein(identity_model(), w, 0.0) == w);
    }
}

TEST_CASE("Euler with constant drift and no diffusion") {
    const Grid g(1.0, 64);
    const auto m = coefficient_model(constant(1.0), constant(0.0), constant(0.0));
    const Path x = euler_maruyama(m, sample_wiener(g, Seed{1, 0}), 0.0);
    CHECK(x.back() == 1.0);
}

TEST_CASE("Euler matches a hand-rolled recurrence bit for bit") {
    const Grid g(1.0, 256);
    const Path w = sample_wiener(g, Seed{2024, 0});
    const Path x = euler_maruyama(sinh_model(), w, 0.0);
    const double dt = 1.0 / 256.0;
    double y = 0.0;
    for (std::size_t k = 0; k + 1 < g.size(); ++k) {
        const double h = std::hypot(1.0, y);
        const double f = y / 2.0 - std::atan(y) * h;
        y = y + f * dt + h * (w[k + 1] - w[k]);
        REQUIRE(x[k + 1] == y);
    }
}

TEST_CASE("Milstein reduces to Euler for constant g") {
    const Grid g(1.0, 128);
    const auto m = coefficient_model([](double x) { return -x; }, constant(0.7), constant(0.0));
    const Path w = sample_wiener(g, Seed{8, 0});
    CHECK(milstein(m, w, 0.3) == euler_maruyama(m, w, 0.3));
}

TEST_CASE("Milstein single step for g(x) = x") {
    const Grid g(0.25, 1);
    const auto m = coefficient_model(constant(0.0), [](double x) { return x; }, constant(1.0));
    const double d = 0.4;
    const Path w(g, {0.0, d});
    CHECK(milstein(m, w, 1.0)[1] == Approx(1.0 + d + 0.5 * (d * d - 0.25)).epsilon(1e-15));
}

TEST_CASE("Milstein is closer than Euler to a dense Euler reference") {
    const Grid dense(1.0, 65536);
    const Grid coarse(1.0, 256);
    const auto m = sinh_model();
    const std::size_t paths = 100;
    std::vector<int> milstein_wins(paths, 0);
    parallel_for(paths, [&](std::size_t p) {
        const Path wd = sample_wiener(dense, Seed{99, 0}.substream("milstein", p));
        const Path ref = euler_maruyama(m, wd, 0.0).restrict_to(coarse);
        const Path wc = wd.restrict_to(coarse);
        const double em = strong_error(euler_maruyama(m, wc, 0.0), ref);
        const double mil = strong_error(milstein(m, wc, 0.0), ref);
        milstein_wins[p] = mil < em ? 1 : 0;
    });
    const int wins = std::accumulate(milstein_wins.begin(), milstein_wins.end(), 0);
    INFO("Milstein closer on " << wins << " of " << paths);
    CHECK(wins >= 90);
}

TEST_CASE("Euler guards against blow-up") {
    const Grid g(1.0, 64);
    const auto m = coefficient_model([](double x) { return x * x; }, constant(0.0), constant(0.0));
    CHECK_THROWS_AS(euler_maruyama(m, Path(g), 100.0), NumericalBlowup);
    CHECK_THROWS_AS(euler_maruyama(ModelSpec{}, Path(g), 0.0), std::invalid_argument);
}

TEST_CASE("strong_error") {
    const Grid g(1.0, 32);
    const Path a = sample_wiener(g, Seed{1, 0});
    const Path b = sample_wiener(g, Seed{2, 0});
    CHECK(strong_error(a, a) == 0.0);
    Path shifted = a;
    for (auto& v : shifted.values()) v += 0.1;
    CHECK(strong_error(a, shifted) == Approx(0.1).epsilon(1e-12));
    double brute = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) brute = std::max(brute, std::abs(a[k] - b[k]));
    CHECK(strong_error(a, b) == brute);
    CHECK_THROWS_AS(strong_error(a, Path(Grid(1.0, 16))), GridMismatch);
}

TEST_CASE("log-log slope") {
    const std::vector<double> dts{0.1, 0.01, 0.001};
    const std::vector<double> errs{std::sqrt(0.1), std::sqrt(0.01), std::sqrt(0.001)};
    CHECK(fit_loglog_slope(dts, errs) == Approx(0.5).epsilon(1e-12));
    const std::vector<double> with_zero{1.0, 0.0, 1.0};
    CHECK(std::isnan(fit_loglog_slope(dts, with_zero)));
    CHECK_THROWS_AS(fit_loglog_slope(std::vector<double>{0.1}, std::vector<double>{0.2}), std::invalid_argument);
}

TEST_CASE("convergence study on the identity model is identically zero") {
    const auto t = convergence_study(identity_model(), {16, 32, 64}, 20, Seed{1, 0});
    REQUIRE(t.rows.size() == 3);
    CHECK(t.all_zero());
    for (const auto& r : t.rows) CHECK(r.mean_error == 0.0);
    CHECK(std::isnan(t.slope));
}

TEST_CASE("convergence study input checks") {
    CHECK_THROWS_AS(convergence_study(sinh_model(), {64}, 10, Seed{}), std::invalid_argument);
    CHECK_THROWS_AS(convergence_study(sinh_model(), {64, 64}, 10, Seed{}), std::invalid_argument);
    CHECK_THROWS_AS(convergence_study(sinh_model(), {48, 64}, 10, Seed{}), std::invalid_argument);
    CHECK_THROWS_AS(convergence_study(sinh_model(), {32, 64}, 0, Seed{}), std::invalid_argument);
}

TEST_CASE("convergence study for the sinh model") {
    const auto t = convergence_study(sinh_model(), {1024, 64, 256, 128, 512}, 200, Seed{20240611, 0});
    REQUIRE(t.rows.size() == 5);
    CHECK(t.rows.front().n == 64);
    CHECK(t.failed_paths == 0);
    CHECK(t.mean_strictly_decreasing());
    CHECK(t.slope >= 0.4);

    const auto dir = std::filesystem::temp_directory_path() / "causal_test_reference";
    std::filesystem::create_directories(dir);
    const auto file = (dir / "table.csv").string();
    write_convergence_csv(file, t);
    std::ifstream in(file);
    std::string header;
    std::getline(in, header);
    CHECK(header == "n,dt,mean_err,max_err,paths");
}

TEST_CASE("convergence study counts failing paths") {
    // A drift that explodes in Euler for large states makes some paths fail.
    auto m = sinh_model();
    m.f = [](double x) { return std::abs(x) > 0.5 ? 1e12 : 0.0; };
    const auto t = convergence_study(m, {16, 32}, 10, Seed{4, 0});
    CHECK(t.failed_paths > 0);
    CHECK(t.failures.size() == t.failed_paths);
    CHECK(t.rows[0].paths == 10 - t.failed_paths);
}
