#include "delaybounds/domain.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "delaybounds/bounds.hpp"
#include "delaybounds/cascade.hpp"
#include "delaybounds/errors.hpp"

namespace dbounds {

std::array<double, 4> polar_to_state(double r1, double theta1, double r2, double theta2) {
    return {r1 * std::cos(theta1), r1 * std::sin(theta1), r2 * std::cos(theta2),
            r2 * std::sin(theta2)};
}

namespace {

double norm_of(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

// Scans a node-wise norm series; the first node at or above varpi decides.
template <class NormAt>
ProbeResult classify(std::size_t nodes, const NormAt& norm_at, const Trajectory& mesh,
                     const ProbeSettings& s, double phi_norm) {
    ProbeResult r;
    for (std::size_t i = 0; i < nodes; ++i) {
        const double v = norm_at(i);
        r.peak = std::max(r.peak, v);
        if (!(v < s.varpi)) {
            r.verdict = Verdict::exceeded;
            r.escape_time = mesh.node_time(i);
            return r;
        }
    }
    if (s.tail_check && phi_norm > 0.0 && nodes > 0) {
        const double t_end = mesh.node_time(nodes - 1);
        const double start = t_end - s.tail_fraction * (t_end - mesh.t0());
        for (std::size_t i = 0; i < nodes; ++i) {
            const double t = mesh.node_time(i);
            if (t + 1e-12 < start) continue;
            if (norm_at(i) >= s.tail_ratio * phi_norm) {
                r.verdict = Verdict::exceeded;
                r.escape_time = t;
                return r;
            }
        }
    }
    return r;
}

ProbeResult escaped_at(double t, double peak) {
    ProbeResult r;
    r.verdict = Verdict::exceeded;
    r.escape_time = t;
    r.peak = peak;
    return r;
}

CascadeOptions cascade_guard(const ProbeSettings& s) {
    // Iterates this large only overflow later; stop them early.
    CascadeOptions c;
    c.escape_norm = 1e6 * std::max(1.0, s.varpi);
    return c;
}

}  // namespace

ProbeResult probe_reference(const DelaySystem& sys, std::span<const double> phi_s,
                            const ProbeSettings& s) {
    const double varpi = s.varpi;
    const Trajectory x = simulate(sys, phi_s, s.span, s.cfg,
                                  [varpi](double, std::span<const double> v) {
                                      return !(norm_of(v) < varpi);
                                  });
    ProbeResult r = classify(
        x.size(), [&x](std::size_t i) { return x.node_norm(i); }, x, s, norm_of(phi_s));
    if (x.escaped() && r.inside()) {
        return escaped_at(x.stop_time().value_or(s.span.t1), r.peak);
    }
    return r;
}

ProbeResult probe_scalar_bound(const DelaySystem& sys, const EigenData& eig,
                               std::span<const double> phi_s, std::size_t K,
                               const ProbeSettings& s, const MajorantOptions& opts,
                               const MajorantTables* tables) {
    if (sys.cubic_terms.empty()) {
        throw UnsupportedNonlinearity("scalar-bound probe needs a cubic oscillator model, got '" +
                                      sys.name + "'");
    }
    CascadeResult cascade;
    try {
        cascade = solve_cascade(sys, phi_s, K, s.span, s.cfg, cascade_guard(s));
    } catch (const NonFiniteState& e) {
        return escaped_at(e.time(), std::numeric_limits<double>::infinity());
    }
    const MajorantSpec maj = cubic_residual_majorant(eig, sys, cascade, K, opts, tables);
    // |V| Z >= varpi already decides the verdict.
    const Trajectory Z = integrate_majorant(maj, {sys.delays[0], sys.delays[1]}, s.span, s.cfg,
                                            s.varpi / eig.normV);
    const Trajectory& YK = cascade.Y(K);
    const std::size_t nodes = std::min(Z.size(), YK.size());
    const double normV = eig.normV;
    ProbeResult r = classify(
        nodes,
        [&](std::size_t i) {
            const double z = Z.state(i)[0];
            return std::isfinite(z) ? YK.node_norm(i) + normV * z
                                    : std::numeric_limits<double>::infinity();
        },
        YK, s, norm_of(phi_s));
    if (r.inside() && Z.termination() != Termination::completed) {
        return escaped_at(Z.stop_time().value_or(s.span.t1), r.peak);
    }
    return r;
}

ProbeResult probe_y_threshold(const DelaySystem& sys, std::span<const double> phi_s,
                              std::size_t K, const ProbeSettings& s) {
    CascadeResult cascade;
    try {
        cascade = solve_cascade(sys, phi_s, K, s.span, s.cfg, cascade_guard(s));
    } catch (const NonFiniteState& e) {
        return escaped_at(e.time(), std::numeric_limits<double>::infinity());
    }
    const Trajectory& YK = cascade.Y(K);
    return classify(
        YK.size(), [&YK](std::size_t i) { return YK.node_norm(i); }, YK, s, norm_of(phi_s));
}

std::string to_string(ProbeMethod m) {
    switch (m) {
        case ProbeMethod::reference: return "reference";
        case ProbeMethod::scalar_bound: return "scalar_bound";
        case ProbeMethod::y_threshold: return "y_threshold";
    }
    return "unknown";
}

ProbeMethod probe_method_from_string(const std::string& name) {
    if (name == "reference") return ProbeMethod::reference;
    if (name == "scalar" || name == "scalar_bound") return ProbeMethod::scalar_bound;
    if (name == "y_threshold") return ProbeMethod::y_threshold;
    throw ConfigError("unknown boundary method '" + name + "'");
}

Probe make_reference_probe(DelaySystem sys, ProbeSettings s) {
    auto shared = std::make_shared<const DelaySystem>(std::move(sys));
    return [shared, s](std::span<const double> phi) { return probe_reference(*shared, phi, s); };
}

Probe make_scalar_bound_probe(DelaySystem sys, EigenData eig, std::size_t K, ProbeSettings s,
                              MajorantOptions opts) {
    if (sys.cubic_terms.empty()) {
        throw UnsupportedNonlinearity("scalar-bound probe needs a cubic oscillator model, got '" +
                                      sys.name + "'");
    }
    struct State {
        DelaySystem sys;
        EigenData eig;
        MajorantTables tables;
    };
    auto st = std::make_shared<State>();
    st->sys = std::move(sys);
    st->eig = std::move(eig);
    st->tables = make_majorant_tables(st->sys, st->eig, s.span, s.cfg.step, opts);
    std::shared_ptr<const State> shared = st;
    return [shared, K, s, opts](std::span<const double> phi) {
        return probe_scalar_bound(shared->sys, shared->eig, phi, K, s, opts, &shared->tables);
    };
}

Probe make_y_threshold_probe(DelaySystem sys, std::size_t K, ProbeSettings s) {
    auto shared = std::make_shared<const DelaySystem>(std::move(sys));
    return [shared, K, s](std::span<const double> phi) {
        return probe_y_threshold(*shared, phi, K, s);
    };
}

std::string to_string(RadialStatus s) {
    switch (s) {
        case RadialStatus::resolved: return "resolved";
        case RadialStatus::no_exceedance: return "no_exceedance";
        case RadialStatus::seed_exceeded: return "seed_exceeded";
    }
    return "unknown";
}

RadialResult radial_search(const std::function<bool(double rho)>& inside,
                           const RadialOptions& opts) {
    if (!(opts.tol_rho > 0.0) || !(opts.seed > 0.0) || !(opts.rho_max >= opts.seed)) {
        throw ConfigError("radial search needs 0 < seed <= rho_max and tol_rho > 0");
    }
    RadialResult res;
    auto test = [&](double rho) {
        ++res.evaluations;
        return inside(rho);
    };
    if (!test(opts.seed)) {
        res.status = RadialStatus::seed_exceeded;
        res.radius = 0.0;
        return res;
    }
    double lo = opts.seed;
    double hi = lo;
    for (;;) {
        if (lo >= opts.rho_max) {
            res.status = RadialStatus::no_exceedance;
            res.radius = opts.rho_max;
            return res;
        }
        hi = std::min(2.0 * lo, opts.rho_max);
        if (!test(hi)) break;
        lo = hi;
    }
    while (hi - lo > opts.tol_rho) {
        const double mid = 0.5 * (lo + hi);
        if (test(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    res.radius = lo;
    return res;
}

RadialResult radial_search(const Probe& probe, const Ray& ray, const RadialOptions& opts) {
    return radial_search(
        [&](double rho) {
            const auto phi = ray.at(rho);
            return probe(phi).inside();
        },
        opts);
}

std::string to_string(ProjectionMode m) {
    return m == ProjectionMode::slice ? "slice" : "envelope";
}

ProjectionMode projection_mode_from_string(const std::string& name) {
    if (name == "slice") return ProjectionMode::slice;
    if (name == "envelope") return ProjectionMode::envelope;
    throw ConfigError("unknown projection mode '" + name + "'");
}

std::vector<double> angle_grid(double step) {
    if (!(step > 0.0) || step > 2.0 * std::numbers::pi) {
        throw ConfigError("theta_step must lie in (0, 2 pi]");
    }
    const auto count = static_cast<std::size_t>(std::llround(2.0 * std::numbers::pi / step));
    std::vector<double> out(std::max<std::size_t>(count, 1));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(i) * step;
    return out;
}

namespace {

struct SweepPlan {
    std::vector<double> theta1;
    std::vector<double> theta2;
    double w2 = 0.0;
};

SweepPlan plan(const SweepGrid& grid) {
    SweepPlan p;
    p.theta1 = angle_grid(grid.theta_step);
    if (grid.mode == ProjectionMode::slice) {
        p.theta2 = {grid.theta2};
        p.w2 = 0.0;
    } else {
        p.theta2 = p.theta1;
        p.w2 = grid.w2;
    }
    return p;
}

BoundaryEstimate assemble(const SweepPlan& p, std::vector<RadialResult> radial,
                          const SweepGrid& grid, const RadialOptions& opts, std::string method) {
    BoundaryEstimate est;
    est.method = std::move(method);
    est.grid = grid;
    est.radial_opts = opts;
    est.radial = std::move(radial);
    const std::size_t n2 = p.theta2.size();
    est.theta.reserve(p.theta1.size() * n2);
    for (double t1 : p.theta1) {
        for (double t2 : p.theta2) est.theta.emplace_back(t1, t2);
    }
    // Conservative envelope: smallest radius over theta2; any flagged pair
    // flags the projected point.
    for (std::size_t i = 0; i < p.theta1.size(); ++i) {
        ProjectedPoint pt;
        pt.theta1 = p.theta1[i];
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n2; ++j) {
            const RadialResult& r = est.radial[i * n2 + j];
            if (r.radius < best) best = r.radius;
            if (r.status != RadialStatus::resolved && pt.status == RadialStatus::resolved) {
                pt.status = r.status;
            }
        }
        pt.radius = best * grid.w1;
        pt.x = pt.radius * std::cos(pt.theta1);
        pt.y = pt.radius * std::sin(pt.theta1);
        est.projection.push_back(pt);
    }
    return est;
}

Ray ray_for(const SweepPlan& p, const SweepGrid& grid, std::size_t index) {
    const std::size_t n2 = p.theta2.size();
    return Ray{p.theta1[index / n2], p.theta2[index % n2], grid.w1, p.w2};
}

}  // namespace

BoundaryEstimate sweep_serial(const Probe& probe, const SweepGrid& grid,
                              const RadialOptions& opts, std::string method) {
    const SweepPlan p = plan(grid);
    const std::size_t total = p.theta1.size() * p.theta2.size();
    std::vector<RadialResult> radial(total);
    for (std::size_t k = 0; k < total; ++k) {
        radial[k] = radial_search(probe, ray_for(p, grid, k), opts);
    }
    return assemble(p, std::move(radial), grid, opts, std::move(method));
}

BoundaryEstimate sweep(const Probe& probe, const SweepGrid& grid, const RadialOptions& opts,
                       std::string method) {
    const SweepPlan p = plan(grid);
    const auto total = static_cast<long long>(p.theta1.size() * p.theta2.size());
    std::vector<RadialResult> radial(static_cast<std::size_t>(total));
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (long long k = 0; k < total; ++k) {
        try {
            radial[static_cast<std::size_t>(k)] =
                radial_search(probe, ray_for(p, grid, static_cast<std::size_t>(k)), opts);
        } catch (...) {
#pragma omp critical(dbounds_sweep_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return assemble(p, std::move(radial), grid, opts, std::move(method));
}

}  // namespace dbounds
