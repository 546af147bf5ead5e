#include "hdiff/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <utility>

#include "hdiff/classify.hpp"
#include "hdiff/csv.hpp"
#include "hdiff/error.hpp"
#include "hdiff/experiment.hpp"
#include "hdiff/family.hpp"
#include "hdiff/identities.hpp"
#include "hdiff/measure_io.hpp"
#include "hdiff/resolvent.hpp"

namespace hdiff {

namespace {

constexpr std::pair<Command, std::string_view> kCommands[] = {
    {Command::Classify, "classify"},   {Command::Eigen, "eigen"},         {Command::H0, "h0"},
    {Command::GroundState, "groundstate"}, {Command::Resolvent, "resolvent"}, {Command::Transform, "transform"},
    {Command::Simulate, "simulate"},   {Command::Verify, "verify"},
};

/// Thrown by the parser when help was requested; carries the help text.
struct HelpRequested {
    std::string text;
};

/// Routes one table either to the output stream or to a file in the output directory.
class Sink {
public:
    Sink(const RunConfig& cfg, std::ostream& out) : dir_(cfg.out_dir), out_(out) {}

    void table(const std::string& file, const std::function<void(std::ostream&)>& write) const {
        if (dir_.empty()) {
            write(out_);
            return;
        }
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        const auto path = dir_ / file;
        std::ofstream f(path);
        if (!f) throw InputError("cannot write " + path.string());
        write(f);
        if (!f) throw InputError("failed writing " + path.string());
        out_ << "wrote " << path.string() << "\n";
    }

    /// Summary line: printed only when tables go to files.
    void note(const std::string& line) const {
        if (!dir_.empty()) out_ << line << "\n";
    }

private:
    std::filesystem::path dir_;
    std::ostream& out_;
};

DiscretizationPtr discretize(const SpeedMeasure& m, const RunConfig& cfg) {
    GridOptions g;
    if (cfg.grid) g.cells = *cfg.grid;
    return Discretization::build(m, g);
}

SpeedMeasure require_measure(const RunConfig& cfg) {
    if (cfg.measure.empty()) throw InputError(std::string(to_string(cfg.command)) + " needs --measure");
    return resolve_measure(cfg.measure);
}

int run_classify(const RunConfig& cfg, std::ostream& out) {
    const auto m = require_measure(cfg);
    out << "left: " << to_string(classify_boundary(m, Side::Left).kind) << "\n";
    out << "right: " << to_string(classify_boundary(m, Side::Right).kind) << "\n";
    out << "recurrence: " << to_string(recurrence_class(m)) << "\n";
    return kExitOk;
}

int run_eigen(const RunConfig& cfg, const Sink& sink) {
    const auto disc = discretize(require_measure(cfg), cfg);
    std::vector<EigenSystem> systems;
    for (double q : cfg.qs) systems.push_back(solve_eigen(disc, q));
    sink.table("eigen.csv", [&](std::ostream& os) {
        CsvWriter w(os, cfg.pretty);
        w.header({"q", "x", "phi", "psi", "rho", "H"});
        for (const auto& es : systems)
            for (std::size_t i = 0; i < disc->size(); ++i) {
                w << es.q << disc->nodes()[i] << es.phi.values()[i] << es.psi.values()[i] << es.rho.values()[i]
                  << es.H;
                w.end_row();
            }
    });
    for (const auto& es : systems) sink.note("H(" + format_number(es.q, true) + ") = " + format_number(es.H, true));
    return kExitOk;
}

int run_h0(const RunConfig& cfg, const Sink& sink) {
    const auto disc = discretize(require_measure(cfg), cfg);
    const auto zr = zero_resolvent(disc);
    sink.table("h0.csv", [&](std::ostream& os) {
        CsvWriter w(os, cfg.pretty);
        w.header({"x", "h0"});
        for (std::size_t i = 0; i < disc->size(); ++i) {
            w << disc->nodes()[i] << zr.h0.values()[i];
            w.end_row();
        }
    });
    sink.note("pi0 = " + format_number(zr.pi0, true));
    return kExitOk;
}

int run_groundstate(const RunConfig& cfg, const Sink& sink) {
    const auto disc = discretize(require_measure(cfg), cfg);
    const auto gs = ground_state(disc);
    sink.table("groundstate.csv", [&](std::ostream& os) {
        CsvWriter w(os, cfg.pretty);
        w.header({"gamma_star", "x", "h_star"});
        for (std::size_t i = 0; i < disc->size(); ++i) {
            w << gs.gamma_star << disc->nodes()[i] << gs.h_star.values()[i];
            w.end_row();
        }
    });
    sink.note("gamma* = " + format_number(gs.gamma_star, true));
    return kExitOk;
}

int run_resolvent(const RunConfig& cfg, const Sink& sink) {
    const auto disc = discretize(require_measure(cfg), cfg);
    IdentityContext ctx(disc);
    auto points = ctx.lattice();
    points.insert(points.begin(), 0.0);
    sink.table("resolvent.csv", [&](std::ostream& os) {
        CsvWriter w(os, cfg.pretty);
        w.header({"q", "x", "y", "r", "r0"});
        for (double q : cfg.qs) {
            const auto& rk = ctx.kernel(q);
            for (double x : points)
                for (double y : points) {
                    w << q << x << y << rk.kernel(x, y) << rk.kernel0(x, y);
                    w.end_row();
                }
        }
    });
    return kExitOk;
}

int run_transform(const RunConfig& cfg, const Sink& sink) {
    const auto disc = discretize(require_measure(cfg), cfg);
    const auto ht = build_htransform(disc, cfg.kind);
    sink.table("transform_" + std::string(to_string(cfg.kind)) + ".csv",
               [&](std::ostream& os) { write_htransform_csv(os, ht, cfg.pretty); });
    sink.note("right under " + std::string(to_string(cfg.kind)) + ": " +
              std::string(to_string(transformed_boundary(ht, Side::Right).kind)));
    return kExitOk;
}

int run_simulate(const RunConfig& cfg, const Sink& sink) {
    ExperimentConfig exp;
    if (!cfg.experiment.empty()) {
        exp = load_experiment(cfg.experiment);
        if (!cfg.measure.empty()) exp.measure = cfg.measure;
    } else {
        exp = standard_experiment(require_measure(cfg), cfg.qs);
        exp.measure = cfg.measure;
    }
    if (cfg.n) exp.n = *cfg.n;
    if (cfg.seed) exp.seed = *cfg.seed;
    const auto rows = run_experiment(exp, resolve_measure(exp.measure));
    sink.table("simulate.csv", [&](std::ostream& os) { write_sim_report(os, rows, cfg.pretty); });
    const auto passed = std::count_if(rows.begin(), rows.end(), [](const SimReportRow& r) { return r.pass; });
    sink.note(std::to_string(passed) + "/" + std::to_string(rows.size()) + " simulation checks passed");
    return passed == static_cast<std::ptrdiff_t>(rows.size()) ? kExitOk : kExitChecksFailed;
}

int run_verify(const RunConfig& cfg, const Sink& sink) {
    std::vector<std::pair<std::string, SpeedMeasure>> targets;
    if (cfg.measure.empty()) {
        targets.emplace_back("reflecting-bm", measures::reflecting_bm());
        targets.emplace_back("half-line-bm", measures::half_line_bm());
        targets.emplace_back("absorbed-bm", measures::absorbed_bm());
    } else {
        targets.emplace_back(cfg.measure, resolve_measure(cfg.measure));
    }
    std::vector<IdentityResult> identities;
    for (const auto& [name, m] : targets) {
        IdentityContext ctx(discretize(m, cfg));
        for (auto r : verify_suite(ctx, cfg.tol)) {
            r.params = name + " " + r.params;
            identities.push_back(std::move(r));
        }
    }
    const auto conformance = check_family_conformance();

    sink.table("identities.csv", [&](std::ostream& os) { write_identity_report(os, identities, cfg.pretty); });
    sink.table("conformance.csv", [&](std::ostream& os) { write_conformance_report(os, conformance, cfg.pretty); });
    const auto id_pass = std::count_if(identities.begin(), identities.end(), [](const auto& r) { return r.pass; });
    const auto cf_pass = std::count_if(conformance.begin(), conformance.end(), [](const auto& c) { return c.pass; });
    sink.note("identities: " + std::to_string(id_pass) + "/" + std::to_string(identities.size()) + " passed");
    sink.note("conformance: " + std::to_string(cf_pass) + "/" + std::to_string(conformance.size()) + " passed");
    const bool ok = id_pass == static_cast<std::ptrdiff_t>(identities.size()) &&
                    cf_pass == static_cast<std::ptrdiff_t>(conformance.size());
    return ok ? kExitOk : kExitChecksFailed;
}

}  // namespace

std::string_view to_string(Command c) {
    for (const auto& [cmd, name] : kCommands)
        if (cmd == c) return name;
    return "?";
}

RunConfig parse_run_config(std::span<const std::string> args) {
    RunConfig cfg;
    CLI::App app{"Generalized one-dimensional diffusions: classification, eigenfunctions, h-transforms and "
                 "Monte Carlo checks.",
                 "hdiff"};
    std::string command, format = "csv", kind = "zero", out_dir;
    std::vector<std::string> names;
    for (const auto& [cmd, name] : kCommands) names.emplace_back(name);

    app.add_option("command", command, "Command to run")->required()->check(CLI::IsMember(names));
    app.add_option("--measure", cfg.measure, "Built-in measure (reflecting-bm, half-line-bm, absorbed-bm) or file");
    app.add_option("--out", out_dir, "Output directory (default: $" + std::string(kOutDirEnv) + ")");
    app.add_option("--grid", cfg.grid, "Grid cells")->check(CLI::PositiveNumber);
    app.add_option("--tol", cfg.tol, "Identity tolerance for verify")->check(CLI::PositiveNumber);
    app.add_option("--q", cfg.qs, "Spectral parameters")->delimiter(',')->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "Random seed")->check(CLI::PositiveNumber);
    app.add_option("--n", cfg.n, "Monte Carlo replicates")->check(CLI::PositiveNumber);
    app.add_option("--format", format, "Number format")->check(CLI::IsMember({"csv", "pretty"}));
    app.add_option("--kind", kind, "h-transform for the transform command")
        ->check(CLI::IsMember({"scale", "ground", "zero"}));
    app.add_option("--experiment", cfg.experiment, "Experiment file for simulate");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::ParseError& e) {
        throw InputError(e.what());
    }

    for (const auto& [cmd, name] : kCommands)
        if (name == command) cfg.command = cmd;
    cfg.pretty = format == "pretty";
    cfg.kind = hkind_from_string(kind);
    if (!out_dir.empty())
        cfg.out_dir = out_dir;
    else if (const char* env = std::getenv(kOutDirEnv); env && *env)
        cfg.out_dir = env;
    return cfg;
}

int run(const RunConfig& cfg, std::ostream& out) {
    const Sink sink(cfg, out);
    switch (cfg.command) {
        case Command::Classify: return run_classify(cfg, out);
        case Command::Eigen: return run_eigen(cfg, sink);
        case Command::H0: return run_h0(cfg, sink);
        case Command::GroundState: return run_groundstate(cfg, sink);
        case Command::Resolvent: return run_resolvent(cfg, sink);
        case Command::Transform: return run_transform(cfg, sink);
        case Command::Simulate: return run_simulate(cfg, sink);
        case Command::Verify: return run_verify(cfg, sink);
    }
    return kExitOk;
}

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    try {
        return run(parse_run_config(args), out);
    } catch (const HelpRequested& h) {
        out << h.text;
        return kExitOk;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace hdiff
