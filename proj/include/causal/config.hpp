#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "causal/errors.hpp"
#include "causal/model.hpp"
#include "causal/solver.hpp"

namespace causal {

inline constexpr std::uint64_t kDefaultSeed = 20240611ULL;

/// Which built-in model to instantiate and with which parameters.
///
/// Names: `sinh`, `power`, `unit`, `identity` (closed-form catalog entries)
/// and `fg_sinh`, `fg_linear` (c tabulated from the coefficients).
struct ModelSelection {
    std::string name;
    double a = 0.0;
    double alpha = 0.5;
    std::string phi = "arctan";
    double phi_value = 0.0;
    double mu = 0.0;
    double sigma = 1.0;
    double x0 = 0.0;
    double ode_step = 1e-3;
    double ode_half_width = 10.0;
};

inline Phi make_phi(const std::string& name, double value) {
    if (name == "arctan") return Phi::arctan();
    if (name == "zero") return Phi::zero();
    if (name == "constant") return Phi::constant(value);
    throw ConfigError("unknown phi '" + name + "' (expected arctan, zero or constant)");
}

inline ModelSpec make_model(const ModelSelection& sel) {
    const Phi phi = make_phi(sel.phi, sel.phi_value);
    if (sel.name == "sinh") return catalog_model({CatalogKind::sinh, sel.a, 0.0, phi});
    if (sel.name == "power") return catalog_model({CatalogKind::power, sel.a, sel.alpha, phi});
    if (sel.name == "unit") return catalog_model({CatalogKind::unit, sel.a, 0.0, phi});
    if (sel.name == "identity") return identity_model();

    OdeConfig ode;
    ode.step = sel.ode_step;
    ode.half_width = sel.ode_half_width;
    if (sel.name == "fg_sinh") {
        const ModelSpec closed = catalog_model({CatalogKind::sinh, sel.a, 0.0, phi});
        ode.kappa_bound = phi.bound;
        return build_model_from_fg(closed.f, closed.g, closed.g_prime, closed.x0, Interval::whole_line(), ode, "fg_sinh");
    }
    if (sel.name == "fg_linear") {
        if (!(sel.sigma > 0.0)) throw ConfigError("fg_linear requires sigma > 0");
        const double mu = sel.mu;
        const double sigma = sel.sigma;
        ode.kappa_bound = std::abs(mu / sigma);
        return build_model_from_fg([mu](double) { return mu; }, [sigma](double) { return sigma; },
                                   [](double) { return 0.0; }, sel.x0, Interval::whole_line(), ode, "fg_linear");
    }
    throw ConfigError("unknown model name '" + sel.name + "'");
}

/// Resolved run configuration. Loaded from a sectioned key = value file;
/// unknown sections or keys are rejected.
struct RunConfig {
    ModelSelection model;
    std::optional<ModelSelection> model_y;  // second instrument for `identify`

    double horizon = 1.0;
    std::size_t steps = 512;

    SolverConfig solver;
    bool lambda_auto = false;

    std::size_t n_paths = 10;
    std::size_t n_samples = 10000;
    double hurst = 0.7;
    double t_eval = 1.0;
    std::vector<std::size_t> n_list{64, 128, 256, 512, 1024};
    double xi = 0.0;
    std::optional<std::string> input;
    bool negative_control = true;
    bool dump_samples = false;

    std::uint64_t seed = kDefaultSeed;
    bool seed_defaulted = true;
    std::string out_dir = "out";

    Grid grid() const { return Grid(horizon, steps); }

    static RunConfig from_string(const std::string& text, const std::filesystem::path& base_dir = {}) {
        boost::property_tree::ptree tree;
        std::istringstream in(text);
        try {
            boost::property_tree::ini_parser::read_ini(in, tree);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw ConfigError(std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
        }
        return from_tree(tree, base_dir);
    }

    static RunConfig from_file(const std::string& file) {
        std::ifstream in(file);
        if (!in) throw ConfigError("cannot open config file '" + file + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return from_string(ss.str(), std::filesystem::path(file).parent_path());
    }

    /// Full resolved configuration in the same format; re-running from it
    /// reproduces the run.
    std::string to_ini() const {
        std::ostringstream o;
        o << std::setprecision(17);
        o << "[run]\nseed = " << seed << "\nout = " << out_dir << "\n\n";
        write_model(o, "model", model);
        if (model_y) write_model(o, "model_y", *model_y);
        o << "[grid]\nT = " << horizon << "\nn = " << steps << "\n\n";
        o << "[solver]\ntol = " << solver.tol << "\nmax_iter = " << solver.max_iter << "\nlambda = ";
        if (lambda_auto) o << "auto"; else o << solver.lambda;
        o << "\nquadrature = " << (solver.quadrature == Quadrature::trapezoid ? "trapezoid" : "left_endpoint")
          << "\nfirst_cell = " << (solver.first_cell == FirstCellRule::analytic ? "analytic" : "pointwise") << "\n\n";
        o << "[experiment]\nn_paths = " << n_paths << "\nn_samples = " << n_samples << "\nH = " << hurst
          << "\nt = " << t_eval << "\nn_list = ";
        for (std::size_t i = 0; i < n_list.size(); ++i) o << (i ? "," : "") << n_list[i];
        o << "\nxi = " << xi << "\nnegative_control = " << (negative_control ? "true" : "false")
          << "\ndump_samples = " << (dump_samples ? "true" : "false") << "\n";
        if (input) o << "input = " << *input << "\n";
        return o.str();
    }

private:
    using Tree = boost::property_tree::ptree;

    static void write_model(std::ostream& o, const char* section, const ModelSelection& m) {
        o << "[" << section << "]\nname = " << m.name << "\na = " << m.a << "\nalpha = " << m.alpha
          << "\nphi = " << m.phi << "\nphi_value = " << m.phi_value << "\nmu = " << m.mu << "\nsigma = " << m.sigma
          << "\nx0 = " << m.x0 << "\node_step = " << m.ode_step << "\node_half_width = " << m.ode_half_width
          << "\n\n";
    }

    static void check_keys(const Tree& section, const std::string& name, const std::set<std::string>& allowed) {
        for (const auto& [key, value] : section) {
            if (!allowed.count(key)) throw ConfigError("unknown key '" + name + "." + key + "'");
        }
    }

    template <typename T>
    static T get(const Tree& section, const std::string& sname, const std::string& key, T fallback) {
        auto v = section.get_optional<std::string>(key);
        if (!v) return fallback;
        std::istringstream in(*v);
        T out{};
        in >> out;
        if (in.fail() || !(in >> std::ws).eof()) {
            throw ConfigError("invalid value '" + *v + "' for key '" + sname + "." + key + "'");
        }
        return out;
    }

    static bool get_bool(const Tree& section, const std::string& sname, const std::string& key, bool fallback) {
        auto v = section.get_optional<std::string>(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "1" || *v == "yes") return true;
        if (*v == "false" || *v == "0" || *v == "no") return false;
        throw ConfigError("invalid boolean '" + *v + "' for key '" + sname + "." + key + "'");
    }

    static ModelSelection read_model(const Tree& s, const std::string& sname) {
        check_keys(s, sname, {"name", "a", "alpha", "phi", "phi_value", "mu", "sigma", "x0", "ode_step", "ode_half_width"});
        ModelSelection m;
        auto name = s.get_optional<std::string>("name");
        if (!name || name->empty()) throw ConfigError("missing required key '" + sname + ".name'");
        m.name = *name;
        m.a = get(s, sname, "a", m.a);
        m.alpha = get(s, sname, "alpha", m.alpha);
        m.phi = s.get<std::string>("phi", m.phi);
        m.phi_value = get(s, sname, "phi_value", m.phi_value);
        m.mu = get(s, sname, "mu", m.mu);
        m.sigma = get(s, sname, "sigma", m.sigma);
        m.x0 = get(s, sname, "x0", m.x0);
        m.ode_step = get(s, sname, "ode_step", m.ode_step);
        m.ode_half_width = get(s, sname, "ode_half_width", m.ode_half_width);
        return m;
    }

    static RunConfig from_tree(const Tree& tree, const std::filesystem::path& base_dir) {
        static const std::set<std::string> sections{"run", "model", "model_y", "grid", "solver", "experiment"};
        for (const auto& [name, sub] : tree) {
            if (!sections.count(name)) throw ConfigError("unknown section '" + name + "'");
        }
        RunConfig c;
        const Tree empty;
        auto section = [&](const std::string& name) -> const Tree& {
            auto it = tree.find(name);
            return it == tree.not_found() ? empty : it->second;
        };

        const Tree& run = section("run");
        check_keys(run, "run", {"seed", "out"});
        if (run.get_optional<std::string>("seed")) {
            c.seed = get<std::uint64_t>(run, "run", "seed", kDefaultSeed);
            c.seed_defaulted = false;
        }
        c.out_dir = run.get<std::string>("out", c.out_dir);

        if (tree.find("model") == tree.not_found()) throw ConfigError("missing required key 'model.name'");
        c.model = read_model(section("model"), "model");
        if (tree.find("model_y") != tree.not_found()) c.model_y = read_model(section("model_y"), "model_y");

        const Tree& grid = section("grid");
        check_keys(grid, "grid", {"T", "n"});
        c.horizon = get(grid, "grid", "T", c.horizon);
        c.steps = get(grid, "grid", "n", c.steps);
        (void)c.grid();

        const Tree& solver = section("solver");
        check_keys(solver, "solver", {"tol", "max_iter", "lambda", "quadrature", "first_cell"});
        c.solver.tol = get(solver, "solver", "tol", c.solver.tol);
        c.solver.max_iter = get(solver, "solver", "max_iter", c.solver.max_iter);
        const std::string lambda = solver.get<std::string>("lambda", "0");
        if (lambda == "auto") {
            c.lambda_auto = true;
        } else {
            c.solver.lambda = get(solver, "solver", "lambda", 0.0);
        }
        const std::string quad = solver.get<std::string>("quadrature", "trapezoid");
        if (quad == "trapezoid") c.solver.quadrature = Quadrature::trapezoid;
        else if (quad == "left_endpoint") c.solver.quadrature = Quadrature::left_endpoint;
        else throw ConfigError("invalid value '" + quad + "' for key 'solver.quadrature'");
        const std::string first = solver.get<std::string>("first_cell", "analytic");
        if (first == "analytic") c.solver.first_cell = FirstCellRule::analytic;
        else if (first == "pointwise") c.solver.first_cell = FirstCellRule::pointwise;
        else throw ConfigError("invalid value '" + first + "' for key 'solver.first_cell'");
        try {
            c.solver.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }

        const Tree& ex = section("experiment");
        check_keys(ex, "experiment", {"n_paths", "n_samples", "H", "t", "n_list", "xi", "input", "negative_control",
                                      "dump_samples"});
        c.n_paths = get(ex, "experiment", "n_paths", c.n_paths);
        c.n_samples = get(ex, "experiment", "n_samples", c.n_samples);
        c.hurst = get(ex, "experiment", "H", c.hurst);
        c.t_eval = get(ex, "experiment", "t", c.t_eval);
        c.xi = get(ex, "experiment", "xi", c.xi);
        c.negative_control = get_bool(ex, "experiment", "negative_control", c.negative_control);
        c.dump_samples = get_bool(ex, "experiment", "dump_samples", c.dump_samples);
        if (auto list = ex.get_optional<std::string>("n_list")) {
            c.n_list.clear();
            std::stringstream ss(*list);
            std::string item;
            while (std::getline(ss, item, ',')) {
                Tree tmp;
                tmp.put("n_list", item);
                c.n_list.push_back(get<std::size_t>(tmp, "experiment", "n_list", 0));
            }
        }
        if (auto input = ex.get_optional<std::string>("input")) {
            std::filesystem::path p(*input);
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            if (!std::filesystem::exists(p)) throw ConfigError("input file '" + p.string() + "' does not exist");
            c.input = p.string();
        }
        return c;
    }
};

}  // namespace causal
