#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "causal/config.hpp"

using namespace causal;

TEST_CASE("minimal config takes defaults and records the seed as defaulted") {
    const auto c = RunConfig::from_string("[model]\nname = sinh\n");
    CHECK(c.model.name == "sinh");
    CHECK(c.seed == kDefaultSeed);
    CHECK(c.seed_defaulted);
    CHECK(c.steps == 512);
    CHECK(c.horizon == 1.0);
    CHECK(c.solver.tol == 1e-10);
    CHECK(c.n_list == std::vector<std::size_t>{64, 128, 256, 512, 1024});
}

TEST_CASE("full config is parsed") {
    const auto c = RunConfig::from_string(R"(
[run]
seed = 7
out = results

[model]
name = power
a = 1
alpha = -0.5
phi = constant
phi_value = 0.25

[model_y]
name = unit

[grid]
T = 2
n = 128

[solver]
tol = 1e-9
max_iter = 50
lambda = auto
quadrature = left_endpoint
first_cell = pointwise

[experiment]
n_paths = 3
n_samples = 500
H = 0.3
t = 0.5
n_list = 32, 64,128
xi = 0.25
negative_control = false
dump_samples = yes
)");
    CHECK(c.seed == 7);
    CHECK_FALSE(c.seed_defaulted);
    CHECK(c.out_dir == "results");
    CHECK(c.model.alpha == -0.5);
    CHECK(c.model.phi_value == 0.25);
    REQUIRE(c.model_y);
    CHECK(c.model_y->name == "unit");
    CHECK(c.grid() == Grid(2.0, 128));
    CHECK(c.lambda_auto);
    CHECK(c.solver.quadrature == Quadrature::left_endpoint);
    CHECK(c.solver.first_cell == FirstCellRule::pointwise);
    CHECK(c.solver.max_iter == 50);
    CHECK(c.n_list == std::vector<std::size_t>{32, 64, 128});
    CHECK(c.hurst == 0.3);
    CHECK(c.xi == 0.25);
    CHECK_FALSE(c.negative_control);
    CHECK(c.dump_samples);
}

TEST_CASE("resolved config reproduces the run configuration") {
    const auto c = RunConfig::from_string("[model]\nname = sinh\na = 0.1\n[solver]\nlambda = auto\n[experiment]\nH = 0.7\n");
    const auto again = RunConfig::from_string(c.to_ini());
    CHECK(again.to_ini() == c.to_ini());
    CHECK(again.model.a == 0.1);
    CHECK(again.hurst == 0.7);
    CHECK(again.seed == kDefaultSeed);
    CHECK_FALSE(again.seed_defaulted);
    CHECK(again.lambda_auto);
}

TEST_CASE("config errors name the offending key") {
    auto message = [](const std::string& text) {
        try {
            RunConfig::from_string(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message("[grid]\nn = 10\n").find("model.name") != std::string::npos);
    CHECK(message("[model]\na = 1\n").find("model.name") != std::string::npos);
    CHECK(message("[model]\nname = sinh\nbogus = 1\n").find("model.bogus") != std::string::npos);
    CHECK(message("[model]\nname = sinh\n[extra]\nk = 1\n").find("extra") != std::string::npos);
    CHECK(message("[model]\nname = sinh\n[grid]\nn = ten\n").find("grid.n") != std::string::npos);
    CHECK(message("[model]\nname = sinh\n[solver]\nquadrature = simpson\n").find("solver.quadrature") != std::string::npos);
    CHECK(message("[model]\nname = sinh\n[solver]\ntol = -1\n").find("tol") != std::string::npos);
    CHECK(message("[model]\nname = sinh\n[experiment]\ninput = /nonexistent/x.csv\n").find("does not exist") !=
          std::string::npos);
    CHECK(message("[model]\nname = sinh\n[experiment]\nnegative_control = maybe\n").find("negative_control") !=
          std::string::npos);
}

TEST_CASE("input paths resolve relative to the config file") {
    const auto dir = std::filesystem::temp_directory_path() / "causal_test_config";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "obs.csv") << "t,X\n0,0\n1,1\n";
    std::ofstream(dir / "run.ini") << "[model]\nname = sinh\n[experiment]\ninput = obs.csv\n";
    const auto c = RunConfig::from_file((dir / "run.ini").string());
    REQUIRE(c.input);
    CHECK(std::filesystem::equivalent(*c.input, dir / "obs.csv"));
    CHECK_THROWS_AS(RunConfig::from_file((dir / "missing.ini").string()), ConfigError);
}

TEST_CASE("model factory") {
    ModelSelection s;
    s.name = "sinh";
    s.a = 1.0;
    CHECK(make_model(s).c(0.0) == std::sinh(1.0));
    s.name = "identity";
    CHECK(make_model(s).c(0.3) == 0.3);
    s.name = "fg_linear";
    s.mu = 0.5;
    s.sigma = 2.0;
    const auto lin = make_model(s);
    CHECK(lin.c(1.0) == Catch::Approx(2.0).margin(1e-12));
    CHECK(lin.kappa_bound == 0.25);
    s.name = "nope";
    CHECK_THROWS_AS(make_model(s), ConfigError);
    s.name = "sinh";
    s.phi = "cubic";
    CHECK_THROWS_AS(make_model(s), ConfigError);
}
