/**
 * Command-line front end: spectrum, sweep, holonomy and verify.
 *
 * Every run-configuration key is both a `--key value` flag and a line
 * `key = value` in the file given by `--config`; flags win over the file and
 * unknown keys are rejected. Exit codes: 0 success, 1 computational failure
 * or invariant violation, 2 configuration error.
 */
#pragma once

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "experiments.hpp"
#include "io.hpp"
#include "verify.hpp"

namespace mflux {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_config = 2;

/// Invalid configuration; maps to exit code 2.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct RunConfig {
    std::string topology = "moebius";
    int nx = 48;
    int ny = 9;
    double tx = 1.0;
    double ty = 1.0;
    double f = 0.0;
    double f_min = -0.25;
    double f_max = 1.25;
    int f_steps = 151;
    int k = 6;
    std::string solver = "auto";
    double tol = 1e-10;
    std::uint64_t seed = 20130517;
    std::string sectors;  // empty: command default
    std::string out;
    std::string plot;
    std::string loop = "center";
    bool strict = false;
    int threads = 1;

    StripLattice lattice() const {
        try {
            return build_lattice(nx, ny, parse_topology(topology));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }

    HoppingParams hopping() const {
        HoppingParams hop{tx, ty};
        try {
            hop.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        return hop;
    }

    SolverConfig solver_config() const {
        SolverConfig cfg;
        cfg.k = k;
        cfg.tol = tol;
        cfg.seed = seed;
        try {
            cfg.method = parse_solver_method(solver);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        if (k < 1) throw ConfigError("k must be positive");
        if (!(tol > 0.0)) throw ConfigError("tol must be positive");
        return cfg;
    }

    SectorSet sector_set(const std::string& fallback) const {
        SectorSet set{false, false, false};
        std::stringstream ss(sectors.empty() ? fallback : sectors);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item == "full") set.full = true;
            else if (item == "even") set.even = true;
            else if (item == "odd") set.odd = true;
            else throw ConfigError("unknown sector '" + item + "' (expected full, even or odd)");
        }
        return set;
    }
};

namespace cli_detail {

inline void register_keys(CLI::App& app, RunConfig& cfg) {
    app.add_option("--topology", cfg.topology, "annulus or moebius")->capture_default_str();
    app.add_option("--nx", cfg.nx, "sites around the ring")->capture_default_str();
    app.add_option("--ny", cfg.ny, "sites across the strip")->capture_default_str();
    app.add_option("--tx", cfg.tx, "hopping along the ring")->capture_default_str();
    app.add_option("--ty", cfg.ty, "hopping across the strip")->capture_default_str();
    app.add_option("--f", cfg.f, "flux Phi/Phi0 (spectrum, holonomy)")->capture_default_str();
    app.add_option("--f_min", cfg.f_min, "sweep start")->capture_default_str();
    app.add_option("--f_max", cfg.f_max, "sweep end")->capture_default_str();
    app.add_option("--f_steps", cfg.f_steps, "sweep points")->capture_default_str();
    app.add_option("--k", cfg.k, "eigenpairs per solve")->capture_default_str();
    app.add_option("--solver", cfg.solver, "dense, lanczos or auto")->capture_default_str();
    app.add_option("--tol", cfg.tol, "relative residual target")->capture_default_str();
    app.add_option("--seed", cfg.seed, "Lanczos start-vector seed")->capture_default_str();
    app.add_option("--sectors", cfg.sectors, "comma list of full, even, odd");
    app.add_option("--out", cfg.out, "sweep CSV path (default: standard output)");
    app.add_option("--plot", cfg.plot, "sweep SVG path");
    app.add_option("--loop", cfg.loop, "holonomy loop: center or offset=<row>")->capture_default_str();
    app.add_flag("--strict", cfg.strict, "sweep: exit 1 if any grid point fails");
    app.add_option("--threads", cfg.threads, "sweep worker threads")->capture_default_str();
}

inline void print_spectrum_csv(std::ostream& out, const EigenResult& res) {
    out << "index,eigenvalue,residual\n";
    for (std::size_t i = 0; i < res.size(); ++i) {
        out << i << ',' << format_double(res.values[i]) << ',' << format_double(res.residuals[i]) << '\n';
    }
}

inline int cmd_spectrum(const RunConfig& cfg, std::ostream& out) {
    const StripLattice lat = cfg.lattice();
    const HoppingParams hop = cfg.hopping();
    SolverConfig solver = cfg.solver_config();
    const SectorSet set = cfg.sector_set("full");
    if (int(set.full) + int(set.even) + int(set.odd) != 1) throw ConfigError("spectrum takes exactly one sector");
    if ((set.even || set.odd) && !lat.has_center_row()) throw ConfigError("parity sectors need odd ny");
    SparseHermitian h = assemble(lat, uniform_flux_field(lat, cfg.f), hop, PotentialField::zero(lat));
    if (!set.full) h = restrict(h, sector_isometry(lat, set.even ? Parity::even : Parity::odd));
    if (solver.k > h.dim()) throw ConfigError("k exceeds the operator dimension " + std::to_string(h.dim()));
    print_spectrum_csv(out, solve_lowest(h, solver));
    return exit_ok;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    SweepConfig sc;
    const StripLattice lat = cfg.lattice();
    sc.nx = lat.nx();
    sc.ny = lat.ny();
    sc.topology = lat.topology();
    sc.hop = cfg.hopping();
    sc.f_min = cfg.f_min;
    sc.f_max = cfg.f_max;
    sc.f_steps = cfg.f_steps;
    sc.k = cfg.k;
    sc.solver = cfg.solver_config();
    sc.sectors = cfg.sector_set(lat.has_center_row() ? "full,even,odd" : "full");
    sc.threads = cfg.threads;
    try {
        sc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const std::vector<SweepRecord> records = flux_sweep(sc);

    if (cfg.out.empty()) {
        write_sweep_csv(out, records);
    } else {
        std::ofstream file(cfg.out);
        if (!file) throw ConfigError("cannot write " + cfg.out);
        write_sweep_csv(file, records);
    }
    if (!cfg.plot.empty()) {
        std::ofstream file(cfg.plot);
        if (!file) throw ConfigError("cannot write " + cfg.plot);
        write_sweep_svg(file, records,
                        "ground energies, " + to_string(lat.topology()) + " " + std::to_string(lat.nx()) + "x" +
                            std::to_string(lat.ny()));
    }
    int failed = 0;
    for (const auto& r : records) {
        if (!r.ok) {
            ++failed;
            err << "f=" << format_double(r.f) << ": " << r.error << '\n';
        }
    }
    return failed > 0 && cfg.strict ? exit_failure : exit_ok;
}

inline LoopPath parse_loop(const StripLattice& lat, const std::string& selector) {
    try {
        if (selector == "center") return center_loop(lat);
        const std::string prefix = "offset=";
        if (selector.rfind(prefix, 0) == 0) {
            std::size_t used = 0;
            const std::string row = selector.substr(prefix.size());
            const int j = std::stoi(row, &used);
            if (used != row.size()) throw ConfigError("bad offset row '" + row + "'");
            return offset_loop(lat, j);
        }
    } catch (const LatticeError& e) {
        throw ConfigError(e.what());
    } catch (const std::logic_error& e) {
        if (dynamic_cast<const ConfigError*>(&e)) throw;
        throw ConfigError("bad loop selector '" + selector + "'");
    }
    throw ConfigError("bad loop selector '" + selector + "' (expected center or offset=<row>)");
}

/// Prints a holonomy component with round-off below 1e-12 shown as 0.
inline std::string clean(double x) { return format_double(std::abs(x) < 1e-12 ? 0.0 : x); }

inline int cmd_holonomy(const RunConfig& cfg, std::ostream& out) {
    const StripLattice lat = cfg.lattice();
    const LoopPath loop = parse_loop(lat, cfg.loop);
    const Holonomy hol = wilson_loop(uniform_flux_field(lat, cfg.f), loop);
    out << "loop: " << cfg.loop << " (" << loop.size() << " steps)\n"
        << "homology_class: " << homology_class(lat, loop) << '\n'
        << "wilson_angle: " << format_double(hol.angle) << '\n'
        << "holonomy: " << clean(hol.value.real()) << (hol.value.imag() < -1e-12 ? " - " : " + ")
        << clean(std::abs(hol.value.imag())) << "i\n";
    return exit_ok;
}

inline int cmd_verify(const RunConfig& cfg, bool break_seam, std::ostream& out) {
    VerifyOptions opts;
    opts.seed = cfg.seed;
    opts.break_seam = break_seam;
    bool all = true;
    for (const auto& check : run_verification(opts)) {
        out << (check.pass ? "PASS " : "FAIL ") << check.name << ": " << check.detail << '\n';
        all = all && check.pass;
    }
    return all ? exit_ok : exit_failure;
}

}  // namespace cli_detail

/// Entry point shared by the executable and the tests.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Flux quantization on annulus and Moebius lattice rings"};
    app.require_subcommand(1);
    app.fallthrough();
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "key = value configuration file");
    RunConfig cfg;
    cli_detail::register_keys(app, cfg);
    bool break_seam = false;
    CLI::App* spectrum = app.add_subcommand("spectrum", "lowest eigenvalues at one flux value (CSV)");
    CLI::App* sweep = app.add_subcommand("sweep", "ground energies over a flux grid (CSV, optional SVG)");
    CLI::App* holonomy = app.add_subcommand("holonomy", "Wilson loop of the uniform flux field");
    CLI::App* verify = app.add_subcommand("verify", "run the invariant suite");
    verify->add_flag("--break-seam", break_seam)->group("");  // mutation hook for tests

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }

    try {
        if (spectrum->parsed()) return cli_detail::cmd_spectrum(cfg, out);
        if (sweep->parsed()) return cli_detail::cmd_sweep(cfg, out, err);
        if (holonomy->parsed()) return cli_detail::cmd_holonomy(cfg, out);
        if (verify->parsed()) return cli_detail::cmd_verify(cfg, break_seam, out);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_config;
}

inline int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(std::move(args), out, err);
}

}  // namespace mflux
