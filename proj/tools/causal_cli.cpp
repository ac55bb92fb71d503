#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "causal/config.hpp"
#include "causal/harness.hpp"

namespace {

using Command = std::function<int(const causal::RunConfig&, std::ostream&)>;

const std::map<std::string, std::pair<Command, std::string>>& commands() {
    namespace h = causal::harness;
    static const std::map<std::string, std::pair<Command, std::string>> table{
        {"simulate", {h::cmd_simulate, "solve the causal fixed point on seeded Wiener drivers"}},
        {"converge", {h::cmd_converge, "strong-error study against Euler-Maruyama"}},
        {"girsanov", {h::cmd_girsanov, "Monte-Carlo estimate of the expected Girsanov weight"}},
        {"density", {h::cmd_density, "KS comparison of X_t against c(w~(t))"}},
        {"fbm", {h::cmd_fbm, "fixed point with the fractional kernel on fBm drivers"}},
        {"identify", {h::cmd_identify, "recover the driving path from an observed path"}},
    };
    return table;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal pathwise construction of scalar diffusions"};
    app.require_subcommand(1);

    std::string config_file;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool quiet = false;
    auto* config_opt = app.add_option("--config", config_file, "run configuration (INI)")->required()->check(CLI::ExistingFile);
    auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides run.out)");
    auto* seed_opt = app.add_option("--seed", seed, "root seed (overrides run.seed)");
    app.add_flag("--quiet", quiet, "only report failures");
    (void)config_opt;

    std::string chosen;
    for (const auto& [name, entry] : commands()) {
        app.add_subcommand(name, entry.second)->callback([&chosen, n = name] { chosen = n; });
    }
    // Global options may appear before or after the subcommand.
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : causal::harness::kRunError;
    }

    causal::RunConfig cfg;
    std::filesystem::path error_dir = out_dir.empty() ? std::filesystem::path("out") : std::filesystem::path(out_dir);
    try {
        cfg = causal::RunConfig::from_file(config_file);
        if (*out_opt) cfg.out_dir = out_dir;
        if (*seed_opt) {
            cfg.seed = seed;
            cfg.seed_defaulted = false;
        }
        error_dir = cfg.out_dir;
    } catch (const causal::Error& e) {
        causal::harness::write_error_record(error_dir, e.code(), e.what());
        std::cerr << "error: " << e.what() << '\n';
        return causal::harness::kRunError;
    } catch (const std::exception& e) {
        causal::harness::write_error_record(error_dir, "ConfigError", e.what());
        std::cerr << "error: " << e.what() << '\n';
        return causal::harness::kRunError;
    }

    std::ostringstream log;
    int rc = causal::harness::kRunError;
    try {
        rc = commands().at(chosen).first(cfg, log);
    } catch (const causal::Error& e) {
        causal::harness::write_error_record(error_dir, e.code(), e.what());
        std::cerr << "error: " << e.what() << '\n';
        return causal::harness::kRunError;
    } catch (const std::exception& e) {
        causal::harness::write_error_record(error_dir, "runtime_error", e.what());
        std::cerr << "error: " << e.what() << '\n';
        return causal::harness::kRunError;
    }
    if (!quiet || rc != causal::harness::kPass) std::cout << log.str();
    if (!quiet) std::cout << chosen << ": " << (rc == causal::harness::kPass ? "PASS" : "FAIL") << " (" << cfg.out_dir << ")\n";
    return rc;
}
