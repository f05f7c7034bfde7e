#include "delaybounds/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "delaybounds/bounds.hpp"
#include "delaybounds/cascade.hpp"
#include "delaybounds/config.hpp"
#include "delaybounds/domain.hpp"
#include "delaybounds/errors.hpp"
#include "delaybounds/output.hpp"

namespace dbounds {

namespace {

namespace fs = std::filesystem;

struct Overrides {
    std::string config_path;
    std::optional<std::size_t> K;
    std::optional<double> T;
    std::optional<double> varpi;
    std::optional<std::string> method;
    std::optional<std::string> phi_s;
    std::optional<std::string> output_dir;
};

void add_common(CLI::App* cmd, Overrides& o, bool config_required) {
    auto* c = cmd->add_option("--config", o.config_path, "JSON run configuration");
    if (config_required) c->required();
    cmd->add_option("--K", o.K, "cascade depth");
    cmd->add_option("--T", o.T, "horizon (s)");
    cmd->add_option("--varpi", o.varpi, "norm threshold");
    cmd->add_option("--method", o.method, "reference | scalar | y_threshold | all");
    cmd->add_option("--phi-s", o.phi_s, "constant history a,b,c,d");
    cmd->add_option("--output-dir", o.output_dir, "directory for CSV output");
}

RunConfig effective_config(const Overrides& o) {
    RunConfig cfg = load_config(o.config_path);
    if (o.K) cfg.K = *o.K;
    if (o.T) cfg.T = *o.T;
    if (o.varpi) cfg.varpi = *o.varpi;
    if (o.method) cfg.method = *o.method;
    if (o.output_dir) cfg.output_dir = *o.output_dir;
    if (o.phi_s) {
        const auto v = parse_phi_list(*o.phi_s);
        if (v.size() != 4) throw ConfigError("--phi-s needs exactly 4 values");
        std::copy(v.begin(), v.end(), cfg.phi_s.begin());
    }
    validate_config(cfg);
    return cfg;
}

Metadata base_meta(const RunConfig& cfg, const std::string& kind) {
    return {{"kind", kind},
            {"config_hash", config_hash(cfg)},
            {"model", to_string(cfg.model)},
            {"K", std::to_string(cfg.K)},
            {"T", format_number(cfg.T)},
            {"dt", format_number(cfg.dt)},
            {"varpi", format_number(cfg.varpi)}};
}

std::ofstream open_output(const RunConfig& cfg, const std::string& name, std::ostream& log) {
    fs::create_directories(cfg.output_dir);
    const fs::path path = fs::path(cfg.output_dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    log << path.string() << '\n';
    return f;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    const DelaySystem sys = build_model(cfg.model, cfg.params);
    const Trajectory x = simulate(sys, cfg.phi_s, cfg.span(), cfg.stepper());
    Metadata meta = base_meta(cfg, "simulate");
    meta.emplace_back("termination", x.escaped() ? "escaped" : "completed");
    auto f = open_output(cfg, "simulate.csv", out);
    write_trajectory_csv(f, meta, x);
    return x.escaped() ? kExitNumerical : kExitOk;
}

int cmd_cascade(const RunConfig& cfg, std::ostream& out) {
    const DelaySystem sys = build_model(cfg.model, cfg.params);
    const EigenData eig = eigen_decompose(sys.A);
    const CascadeResult res = solve_cascade(sys, cfg.phi_s, cfg.K, cfg.span(), cfg.stepper());
    Metadata meta = base_meta(cfg, "cascade");
    DecayOptions dopts;
    dopts.tail_fraction = cfg.tail_fraction;
    dopts.decay_tol = cfg.decay_tol;
    dopts.C = cfg.decay_C;
    try {
        const DecayReport rep = check_decay(res, eig, cfg.params.F0, dopts);
        meta.emplace_back("decay_tail_max", format_number(rep.tail_max));
        meta.emplace_back("decay_threshold", format_number(rep.threshold));
        meta.emplace_back("decay_C", format_number(rep.C));
        meta.emplace_back("decay_pass", rep.pass ? "true" : "false");
    } catch (const NotHurwitz&) {
        meta.emplace_back("decay_pass", "not_hurwitz");
    }
    auto f = open_output(cfg, "cascade_K" + std::to_string(cfg.K) + ".csv", out);
    write_cascade_csv(f, meta, res);
    return kExitOk;
}

int cmd_bounds(const RunConfig& cfg, std::ostream& out) {
    const DelaySystem sys = build_model(cfg.model, cfg.params);
    const EigenData eig = eigen_decompose(sys.A);
    const MajorantOptions mopts = cfg.majorant_options();
    BoundsRun run = compute_bounds(sys, eig, cfg.phi_s, cfg.K, cfg.span(), cfg.stepper(), mopts);
    const Trajectory x = simulate(sys, cfg.phi_s, cfg.span(), cfg.stepper());
    Metadata meta = base_meta(cfg, "bounds");
    meta.emplace_back("convention", to_string(mopts.convention));
    meta.emplace_back("normV", format_number(eig.normV));
    meta.emplace_back("reference", x.escaped() ? "escaped" : "completed");
    if (!x.escaped()) attach_reference(run.trace, x);
    auto f = open_output(cfg, "bounds_K" + std::to_string(cfg.K) + ".csv", out);
    write_bounds_csv(f, meta, run.trace);
    return kExitOk;
}

int cmd_boundary(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const DelaySystem sys = build_model(cfg.model, cfg.params);
    const ProbeSettings ps = cfg.probe_settings();
    std::vector<ProbeMethod> methods;
    if (cfg.method == "all") {
        methods = {ProbeMethod::reference, ProbeMethod::scalar_bound, ProbeMethod::y_threshold};
        if (sys.cubic_terms.empty()) {
            err << "note: model '" << sys.name
                << "' has no scalar-bound majorant; skipping scalar_bound\n";
            methods.erase(methods.begin() + 1);
        }
    } else {
        methods = {probe_method_from_string(cfg.method)};
    }
    const SweepGrid grid = cfg.grid();
    const RadialOptions ropts = cfg.radial();
    std::optional<BoundaryEstimate> ref_est;
    std::optional<BoundaryEstimate> scalar_est;
    for (ProbeMethod m : methods) {
        Probe probe;
        switch (m) {
            case ProbeMethod::reference: probe = make_reference_probe(sys, ps); break;
            case ProbeMethod::scalar_bound:
                probe = make_scalar_bound_probe(sys, eigen_decompose(sys.A), cfg.K, ps,
                                                cfg.majorant_options());
                break;
            case ProbeMethod::y_threshold: probe = make_y_threshold_probe(sys, cfg.K, ps); break;
        }
        const BoundaryEstimate est = sweep(probe, grid, ropts, to_string(m));
        Metadata meta = base_meta(cfg, "boundary");
        meta.emplace_back("method", est.method);
        meta.emplace_back("theta_step", cfg.sweep.theta_step);
        meta.emplace_back("projection", to_string(grid.mode));
        meta.emplace_back("tol_rho", format_number(ropts.tol_rho));
        meta.emplace_back("rho_max", format_number(ropts.rho_max));
        if (m == ProbeMethod::scalar_bound) {
            meta.emplace_back("convention", to_string(cfg.convention));
        }
        const std::string stem = "boundary_" + est.method + "_K" + std::to_string(cfg.K);
        {
            auto f = open_output(cfg, stem + ".csv", out);
            write_boundary_csv(f, meta, est);
        }
        {
            meta[0].second = "projection";
            auto f = open_output(cfg, stem + "_projection.csv", out);
            write_projection_csv(f, meta, est);
        }
        if (m == ProbeMethod::reference) ref_est = est;
        if (m == ProbeMethod::scalar_bound) scalar_est = est;
    }
    if (ref_est && scalar_est) {
        Metadata meta = base_meta(cfg, "containment");
        double min_margin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ref_est->radial.size(); ++i) {
            min_margin =
                std::min(min_margin, ref_est->radial[i].radius - scalar_est->radial[i].radius);
        }
        meta.emplace_back("min_margin", format_number(min_margin));
        meta.emplace_back("tol_rho", format_number(ropts.tol_rho));
        meta.emplace_back("pass", min_margin >= -ropts.tol_rho ? "true" : "false");
        auto f = open_output(cfg, "boundary_containment_K" + std::to_string(cfg.K) + ".csv", out);
        CsvWriter w(f, meta, {"index", "theta1", "theta2", "rho_reference", "rho_scalar", "margin"});
        for (std::size_t i = 0; i < ref_est->radial.size(); ++i) {
            const double a = ref_est->radial[i].radius;
            const double b = scalar_est->radial[i].radius;
            w.cell(i).cell(ref_est->theta[i].first).cell(ref_est->theta[i].second);
            w.cell(a).cell(b).cell(a - b);
            w.end_row();
        }
    }
    return kExitOk;
}

struct BoundsSummary {
    double max_gap = 0.0;
    std::size_t violations = 0;
    double max_excess = 0.0;
    bool has_reference = false;
};

BoundsSummary summarize_bounds(const CsvTable& t, double tol) {
    BoundsSummary s;
    s.has_reference = std::find(t.columns.begin(), t.columns.end(), "reference") != t.columns.end();
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double lo = t.number(i, "lower");
        const double hi = t.number(i, "upper");
        s.max_gap = std::max(s.max_gap, hi - lo);
        if (s.has_reference) {
            const double x = t.number(i, "reference");
            const double excess = std::max(lo - x, x - hi);
            s.max_excess = std::max(s.max_excess, excess);
            if (excess > tol) ++s.violations;
        }
    }
    return s;
}

int cmd_compare(const std::vector<std::string>& files, const std::string& out_path, double tol,
                const std::string& hash, std::ostream& out) {
    if (files.empty()) throw ConfigError("compare needs at least one input file");
    std::vector<CsvTable> tables;
    for (const auto& f : files) tables.push_back(read_csv(f));
    const std::string kind = tables.front().meta["kind"];
    for (std::size_t i = 1; i < tables.size(); ++i) {
        if (tables[i].meta["kind"] != kind) {
            throw ConfigError("compare: '" + files[i] + "' is a " + tables[i].meta["kind"] +
                              " file, expected " + kind);
        }
    }
    if (kind != "bounds" && kind != "boundary") {
        throw ConfigError("compare handles bounds and boundary files, got kind=" + kind);
    }
    if (!out_path.empty() && fs::path(out_path).has_parent_path()) {
        fs::create_directories(fs::path(out_path).parent_path());
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + out_path + "'");
    CsvWriter w(f,
                {{"kind", "compare"},
                 {"config_hash", hash},
                 {"inputs", std::to_string(files.size())},
                 {"tol", format_number(tol)}},
                {"metric", "file_a", "file_b", "index", "value"});
    auto name = [&](std::size_t i) { return fs::path(files[i]).filename().string(); };

    if (kind == "bounds") {
        std::vector<BoundsSummary> sums;
        for (std::size_t i = 0; i < tables.size(); ++i) {
            sums.push_back(summarize_bounds(tables[i], tol));
            w.cell("max_gap").cell(name(i)).cell("").cell("").cell(sums[i].max_gap);
            w.end_row();
            if (sums[i].has_reference) {
                w.cell("enclosure_violations").cell(name(i)).cell("").cell("");
                w.cell(sums[i].violations);
                w.end_row();
                w.cell("max_enclosure_excess").cell(name(i)).cell("").cell("");
                w.cell(sums[i].max_excess);
                w.end_row();
            }
        }
        for (std::size_t i = 0; i < tables.size(); ++i) {
            for (std::size_t j = i + 1; j < tables.size(); ++j) {
                const double ratio = sums[i].max_gap > 0.0 ? sums[j].max_gap / sums[i].max_gap
                                                           : (sums[j].max_gap > 0.0 ? INFINITY : 1.0);
                w.cell("gap_ratio").cell(name(i)).cell(name(j)).cell("").cell(ratio);
                w.end_row();
            }
        }
    } else {
        for (std::size_t i = 0; i < tables.size(); ++i) {
            for (std::size_t j = i + 1; j < tables.size(); ++j) {
                const CsvTable& a = tables[i];
                const CsvTable& b = tables[j];
                bool same = a.rows.size() == b.rows.size();
                for (std::size_t r = 0; same && r < a.rows.size(); ++r) {
                    same = a.number(r, "theta1") == b.number(r, "theta1") &&
                           a.number(r, "theta2") == b.number(r, "theta2");
                }
                if (!same) {
                    throw ConfigError("compare: angular grids of '" + files[i] + "' and '" +
                                      files[j] + "' differ");
                }
                double max_dev = 0.0;
                double min_margin = std::numeric_limits<double>::infinity();
                for (std::size_t r = 0; r < a.rows.size(); ++r) {
                    const double m = a.number(r, "rho") - b.number(r, "rho");
                    max_dev = std::max(max_dev, std::abs(m));
                    min_margin = std::min(min_margin, m);
                    w.cell("radial_margin").cell(name(i)).cell(name(j)).cell(r).cell(m);
                    w.end_row();
                }
                w.cell("max_radial_deviation").cell(name(i)).cell(name(j)).cell("").cell(max_dev);
                w.end_row();
                w.cell("min_radial_margin").cell(name(i)).cell(name(j)).cell("").cell(min_margin);
                w.end_row();
            }
        }
    }
    out << out_path << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bilateral norm bounds and stability-domain estimates for delay oscillators",
                 "delaybounds"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    Overrides sim, cas, bnd, bdy;
    auto* c_sim = app.add_subcommand("simulate", "direct simulation of the configured model");
    add_common(c_sim, sim, true);
    auto* c_cas = app.add_subcommand("cascade", "successive approximations y_1..y_K and Y_K");
    add_common(c_cas, cas, true);
    auto* c_bnd = app.add_subcommand("bounds", "bilateral bounds |Y_K| -/+ |V| Z with reference");
    add_common(c_bnd, bnd, true);
    auto* c_bdy = app.add_subcommand("boundary", "angular sweep of domain boundaries");
    add_common(c_bdy, bdy, true);

    Overrides cmp;
    std::vector<std::string> files;
    std::string cmp_out;
    double cmp_tol = 1e-3;
    auto* c_cmp = app.add_subcommand("compare", "metrics over bounds or boundary CSV files");
    add_common(c_cmp, cmp, false);
    c_cmp->add_option("files", files, "CSV files written by bounds or boundary")->required();
    c_cmp->add_option("--out", cmp_out, "metrics file (default <output_dir>/compare.csv)");
    c_cmp->add_option("--tol", cmp_tol, "enclosure tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (c_sim->parsed()) return cmd_simulate(effective_config(sim), out);
        if (c_cas->parsed()) return cmd_cascade(effective_config(cas), out);
        if (c_bnd->parsed()) return cmd_bounds(effective_config(bnd), out);
        if (c_bdy->parsed()) return cmd_boundary(effective_config(bdy), out, err);
        if (c_cmp->parsed()) {
            std::string hash = "none";
            std::string dir = cmp.output_dir.value_or("out");
            if (!cmp.config_path.empty()) {
                const RunConfig cfg = effective_config(cmp);
                hash = config_hash(cfg);
                dir = cfg.output_dir;
            }
            if (cmp_out.empty()) cmp_out = (fs::path(dir) / "compare.csv").string();
            return cmd_compare(files, cmp_out, cmp_tol, hash, out);
        }
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::out_of_range& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const fs::filesystem_error& e) {
        err << "io error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitConfig;
}

}  // namespace dbounds
