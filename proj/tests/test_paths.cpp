#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "causal/grid.hpp"
#include "causal/parallel.hpp"
#include "causal/paths.hpp"
#include "causal/rng.hpp"

using namespace causal;
using Catch::Approx;

namespace {

struct Moments {
    double mean_a = 0, mean_b = 0, var_a = 0, var_b = 0, cov = 0;
};

// Plain two-pass sample moments of (a_i, b_i).
Moments moments(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    Moments m;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m.mean_a += a[i];
        m.mean_b += b[i];
    }
    m.mean_a /= n;
    m.mean_b /= n;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m.var_a += (a[i] - m.mean_a) * (a[i] - m.mean_a);
        m.var_b += (b[i] - m.mean_b) * (b[i] - m.mean_b);
        m.cov += (a[i] - m.mean_a) * (b[i] - m.mean_b);
    }
    m.var_a /= n - 1;
    m.var_b /= n - 1;
    m.cov /= n - 1;
    return m;
}

}  // namespace

TEST_CASE("Grid nodes and lookup") {
    const Grid g(2.0, 8);
    CHECK(g.size() == 9);
    CHECK(g.dt() == 0.25);
    CHECK(g.time(0) == 0.0);
    CHECK(g.time(8) == 2.0);
    CHECK(g.index_of(0.5) == 2);
    CHECK(g.index_of(0.6) == Grid::npos);
    CHECK(g.index_of(2.5) == Grid::npos);
    CHECK(Grid(2.0, 16).refines(g));
    CHECK_FALSE(Grid(2.0, 12).refines(g));
    CHECK_THROWS_AS(Grid(0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(Grid(1.0, 0), std::invalid_argument);
    const Grid odd(1.0, 3);
    CHECK(odd.time(3) == 1.0);
}

TEST_CASE("Path restriction and grid checks") {
    const Grid fine(1.0, 8);
    Path p(fine);
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = static_cast<double>(k);
    const Path coarse = p.restrict_to(Grid(1.0, 2));
    CHECK(coarse.values() == std::vector<double>{0.0, 4.0, 8.0});
    CHECK_THROWS_AS(p.restrict_to(Grid(1.0, 3)), GridMismatch);
    CHECK_THROWS_AS(require_same_grid(p, coarse, "test"), GridMismatch);
}

TEST_CASE("CSV round trip keeps every bit") {
    const Grid g(1.0, 16);
    const Path w = sample_wiener(g, Seed{3, 0});
    const Path v = sample_wiener(g, Seed{4, 0});
    const auto dir = std::filesystem::temp_directory_path() / "causal_test_paths";
    std::filesystem::create_directories(dir);
    const auto file = (dir / "p.csv").string();
    write_paths_csv(file, {"w", "v"}, {&w, &v});
    CHECK(read_path_csv(file) == w);
    CHECK(read_path_csv(file, 2) == v);
    CHECK(read_path_csv(file, std::string("v")) == v);
    CHECK(read_csv_header(file) == std::vector<std::string>{"t", "w", "v"});
    CHECK_THROWS(read_path_csv(file, std::string("nope")));
}

TEST_CASE("CSV reader rejects non-uniform times") {
    const auto dir = std::filesystem::temp_directory_path() / "causal_test_paths";
    std::filesystem::create_directories(dir);
    const auto file = (dir / "bad.csv").string();
    std::ofstream(file) << "t,x\n0,1\n0.5,2\n0.7,3\n";
    CHECK_THROWS_AS(read_path_csv(file), GridMismatch);
}

TEST_CASE("Seeds: determinism and distinct substreams") {
    const Grid g(1.0, 64);
    const Seed s{42, 0};
    CHECK(sample_wiener(g, s) == sample_wiener(g, s));
    CHECK_FALSE(sample_wiener(g, s) == sample_wiener(g, Seed{43, 0}));
    std::set<std::uint64_t> streams;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        streams.insert(s.substream("a", i).stream);
        streams.insert(s.substream("b", i).stream);
    }
    CHECK(streams.size() == 2000);
    CounterRng r(s);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("Wiener ensemble moments") {
    const Grid g(1.0, 256);
    const std::size_t n = 100000;
    std::vector<double> half(n), one(n), incr(n);
    const Seed root{20240611, 0};
    parallel_for(n, [&](std::size_t i) {
        const Path w = sample_wiener(g, root.substream("moments", i));
        half[i] = w[128];
        one[i] = w[256];
        incr[i] = (w[1] - w[0]) / std::sqrt(g.dt());
    });
    CHECK(sample_wiener(g, root)[0] == 0.0);
    const Moments m = moments(half, one);
    CHECK(std::abs(m.mean_b) <= 3.0 / std::sqrt(static_cast<double>(n)));
    CHECK(m.var_b == Approx(1.0).epsilon(0.05));
    // Cov(w(0.5), w(1)) = 0.5; standard error of the sample covariance ~ sqrt(0.75 / n).
    CHECK(std::abs(m.cov - 0.5) <= 4.0 * std::sqrt(0.75 / static_cast<double>(n)));

    // Normality sanity check on standardized increments: kurtosis 3 with sd ~ sqrt(24/n).
    double m2 = 0, m4 = 0;
    for (double z : incr) {
        m2 += z * z;
        m4 += z * z * z * z;
    }
    m2 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    CHECK(std::abs(m4 / (m2 * m2) - 3.0) <= 3.0 * std::sqrt(24.0 / static_cast<double>(n)));
}

TEST_CASE("fBm covariance function") {
    CHECK(fbm_covariance(1.0, 1.0, 0.75) == Approx(1.0));
    CHECK(fbm_covariance(0.5, 1.0, 0.75) == Approx(0.5).margin(1e-15));
    CHECK(fbm_covariance(0.3, 0.8, 0.5) == Approx(0.3).margin(1e-15));
}

TEST_CASE("fBm ensemble at H = 0.75") {
    const Grid g(1.0, 64);
    const FbmGenerator gen(g, 0.75);
    const std::size_t n = 100000;
    std::vector<double> half(n), one(n);
    const Seed root{7, 0};
    parallel_for(n, [&](std::size_t i) {
        const Path b = gen.sample(root.substream("fbm", i));
        half[i] = b[32];
        one[i] = b[64];
    });
    const Moments m = moments(half, one);
    const double se = 1.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(m.mean_b) <= 3.0 * se);
    CHECK(m.var_b == Approx(1.0).epsilon(0.02));
    CHECK(m.var_a == Approx(std::pow(0.5, 1.5)).epsilon(0.02));
    CHECK(m.cov == Approx(0.5).epsilon(0.03));
}

TEST_CASE("fBm at H = 0.5 has uncorrelated increments") {
    const Grid g(1.0, 16);
    const FbmGenerator gen(g, 0.5);
    const std::size_t n = 50000;
    std::vector<double> d1(n), d2(n), w1(n), b1(n);
    parallel_for(n, [&](std::size_t i) {
        const Path b = gen.sample(Seed{11, 0}.substream("fbm", i));
        d1[i] = b[3] - b[2];
        d2[i] = b[9] - b[8];
        b1[i] = b[16];
        w1[i] = sample_wiener(g, Seed{11, 0}.substream("wiener", i))[16];
    });
    const Moments inc = moments(d1, d2);
    CHECK(std::abs(inc.cov) <= 4.0 * g.dt() / std::sqrt(static_cast<double>(n)));
    CHECK(inc.var_a == Approx(g.dt()).epsilon(0.03));
    const Moments ends = moments(b1, w1);
    CHECK(std::abs(ends.mean_a - ends.mean_b) <= 4.0 * std::sqrt(2.0 / static_cast<double>(n)));
    CHECK(ends.var_a == Approx(ends.var_b).epsilon(0.05));
}

TEST_CASE("fBm generator argument checks") {
    const Grid g(1.0, 16);
    CHECK_THROWS_AS(FbmGenerator(g, 0.0), InvalidHurst);
    CHECK_THROWS_AS(FbmGenerator(g, 1.0), InvalidHurst);
    CHECK_THROWS_AS(sample_fbm(g, -0.2, Seed{}), InvalidHurst);
    CHECK_THROWS_AS(FbmGenerator(Grid(1.0, kMaxFbmSteps + 1), 0.5), std::invalid_argument);
    const Path b = sample_fbm(g, 0.3, Seed{1, 2});
    CHECK(b[0] == 0.0);
    CHECK(b == sample_fbm(g, 0.3, Seed{1, 2}));
}

TEST_CASE("deterministic drivers") {
    const Grid g(1.0, 4);
    CHECK(deterministic_path(driver::Zero{}, g).values() == std::vector<double>(5, 0.0));
    CHECK(deterministic_path(driver::Linear{1.0}, g).values() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    const Path tent = deterministic_path(driver::PiecewiseLinear{{{0.0, 0.0}, {0.5, 1.0}, {1.0, 0.0}}}, g);
    CHECK(tent[1] == 0.5);
    CHECK(tent[2] == 1.0);
    CHECK(tent[3] == 0.5);
    const Path sq = deterministic_path(driver::Sampled{[](double t) { return t * t; }}, g);
    CHECK(sq[2] == 0.25);
    CHECK_THROWS_AS(deterministic_path(driver::PiecewiseLinear{{{0.5, 0.0}, {0.2, 1.0}}}, g), std::invalid_argument);
}

TEST_CASE("pairwise_sum and parallel_for") {
    std::vector<double> v(1001, 0.1);
    CHECK(pairwise_sum(v) == Approx(100.1).epsilon(1e-14));
    std::vector<int> hits(500, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, 4);
    CHECK(std::count(hits.begin(), hits.end(), 1) == 500);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }, 3),
                    std::runtime_error);
}
