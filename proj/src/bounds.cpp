#include "delaybounds/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "delaybounds/errors.hpp"

namespace dbounds {

Trajectory integrate_majorant(const MajorantSpec& maj, const MajorantDelays& delays, TimeSpan span,
                              const StepperConfig& cfg, double stop_at) {
    if (!maj.at) throw ConfigError("majorant has no coefficients");
    Rhs rhs = [&maj, &delays](double t, std::span<const double> z, const Trajectory& past,
                              std::span<double> dz) {
        const MajorantCoefficients k = maj.at(t);
        double lag0 = 0.0;
        double lag1 = 0.0;
        past.evaluate(t - delays.h0.h(t), std::span<double>(&lag0, 1));
        past.evaluate(t - delays.h1.h(t), std::span<double>(&lag1, 1));
        dz[0] = k.drift * z[0] + k.lin_delay * lag0 +
                ((maj.c3 * lag1 + k.c2) * lag1 + k.c1) * lag1 + k.offset;
    };
    IntegrateOptions opts;
    opts.min_self_delay = std::min(delays.h0.lower, delays.h1.lower);
    opts.history_span = std::max(delays.h0.upper, delays.h1.upper);
    if (std::isfinite(stop_at)) {
        opts.stop_when = [stop_at](double, std::span<const double> z) { return z[0] >= stop_at; };
    }
    return integrate(rhs, 1, zero_history(1), span, cfg, opts);
}

BoundTrace bilateral_bounds(const CascadeResult& cascade, const Trajectory& Z,
                            const EigenData& eig) {
    const Trajectory& YK = cascade.Y(cascade.K);
    const double tol = 1e-9 * YK.step();
    if (Z.escaped() || std::abs(Z.t0() - YK.t0()) > tol || Z.end_time() < YK.end_time() - tol) {
        std::ostringstream msg;
        msg << "majorant covers [" << Z.t0() << ", " << Z.end_time() << "] but the cascade covers ["
            << YK.t0() << ", " << YK.end_time() << "]";
        throw MeshMismatch(msg.str());
    }
    BoundTrace trace;
    trace.K = cascade.K;
    const std::size_t nodes = YK.size();
    trace.t.resize(nodes);
    trace.lower.resize(nodes);
    trace.upper.resize(nodes);
    trace.Z.resize(nodes);
    trace.absY.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double t = YK.node_time(i);
        double z = 0.0;
        Z.evaluate(t, std::span<double>(&z, 1));
        const double y = YK.node_norm(i);
        const double r = eig.normV * z;
        trace.t[i] = t;
        trace.Z[i] = z;
        trace.absY[i] = y;
        trace.upper[i] = y + r;
        trace.lower[i] = std::max(0.0, y - r);
    }
    return trace;
}

void attach_reference(BoundTrace& trace, const Trajectory& x) {
    std::vector<double> ref(trace.size());
    std::vector<double> buf(x.dim());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        x.evaluate(trace.t[i], buf);
        double acc = 0.0;
        for (double v : buf) acc += v * v;
        ref[i] = std::sqrt(acc);
    }
    trace.reference = std::move(ref);
}

BoundsRun compute_bounds(const DelaySystem& sys, const EigenData& eig,
                         std::span<const double> phi_s, std::size_t K, TimeSpan span,
                         const StepperConfig& cfg, const MajorantOptions& opts,
                         const MajorantTables* tables) {
    BoundsRun run{solve_cascade(sys, phi_s, K, span, cfg), {}, {}};
    const MajorantSpec maj = cubic_residual_majorant(eig, sys, run.cascade, K, opts, tables);
    const MajorantDelays delays{sys.delays[0], sys.delays[1]};
    run.Z = integrate_majorant(maj, delays, span, cfg);
    if (run.Z.termination() != Termination::completed) {
        throw NonFiniteState("majorant escaped", run.Z.stop_time().value_or(span.t1));
    }
    run.trace = bilateral_bounds(run.cascade, run.Z, eig);
    return run;
}

BoundTrace baseline_bounds(const DelaySystem& sys, const EigenData& eig,
                           std::span<const double> phi_s, TimeSpan span, const StepperConfig& cfg) {
    if (phi_s.size() != sys.n) throw ConfigError("phi_s must have one entry per state component");
    std::vector<double> scale(eig.kappa.data(), eig.kappa.data() + eig.kappa.size());
    const PolynomialMajorant L = polynomial_majorant(sys.f, scale);
    const double vinv = eig.normVinv;
    const MatrixFn G = sys.G.as_function();
    const MatrixFn E = sys.E.as_function();
    const std::size_t n = sys.n;

    Eigen::VectorXd phi(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) phi(static_cast<Eigen::Index>(i)) = phi_s[i];
    const double start = (eig.Vinv * phi.cast<std::complex<double>>()).norm();

    const double dt = effective_step(span, cfg.step);
    const SampledFunction gx([G, &eig](double t) { return g_norm(G, eig, t); }, span.t0, span.t1,
                             dt / 2.0);
    const SampledFunction ex([E, &eig](double t) { return transformed_norm(E, eig, t); }, span.t0,
                             span.t1, dt / 2.0);
    auto forcing_norm = [&sys, &eig, n](double t) {
        Eigen::VectorXd F(static_cast<Eigen::Index>(n));
        sys.forcing(t, std::span<double>(F.data(), n));
        return (eig.Vinv * F.cast<std::complex<double>>()).norm();
    };

    const std::size_t m1 = std::max(L.arg_count(), sys.f.arg_count);
    auto make_rhs = [&](double rate, double sign) {
        return Rhs([&, rate, sign, xi = std::vector<double>(m1)](
                       double t, std::span<const double> z, const Trajectory& past,
                       std::span<double> dz) mutable {
            xi[0] = z[0];
            for (std::size_t i = 1; i < m1; ++i) {
                past.evaluate(t - sys.delays[i].h(t), std::span<double>(&xi[i], 1));
            }
            double lag0 = 0.0;
            past.evaluate(t - sys.delays[0].h(t), std::span<double>(&lag0, 1));
            const double g = gx(t);
            dz[0] = (rate + sign * g) * z[0] +
                    sign * (ex(t) * lag0 + vinv * L(t, xi) + forcing_norm(t));
        });
    };

    IntegrateOptions opts;
    opts.min_self_delay = sys.min_delay();
    opts.history_span = sys.max_delay();
    const Trajectory upper = integrate(make_rhs(eig.alpha1, 1.0), 1, constant_history({start}), span,
                                       cfg, opts);
    if (upper.termination() != Termination::completed) {
        throw NonFiniteState("baseline upper majorant escaped", upper.stop_time().value_or(span.t1));
    }
    opts.stop_when = [](double, std::span<const double> z) { return z[0] <= 0.0; };
    const Trajectory lower = integrate(make_rhs(eig.alphan, -1.0), 1, constant_history({start}),
                                       span, cfg, opts);

    BoundTrace trace;
    trace.K = 0;
    const std::size_t nodes = upper.size();
    trace.t.resize(nodes);
    trace.upper.resize(nodes);
    trace.lower.assign(nodes, 0.0);
    trace.Z.resize(nodes);
    trace.absY.assign(nodes, 0.0);
    for (std::size_t i = 0; i < nodes; ++i) {
        trace.t[i] = upper.node_time(i);
        trace.Z[i] = upper.state(i)[0];
        trace.upper[i] = eig.normV * trace.Z[i];
    }
    // The lower run stops at its first node with z <= 0; later nodes stay 0.
    const std::size_t valid = lower.termination() == Termination::completed ? lower.size()
                                                                            : lower.size() - 1;
    for (std::size_t i = 0; i < std::min(valid, nodes); ++i) {
        trace.lower[i] = std::max(0.0, lower.state(i)[0] / vinv);
    }
    return trace;
}

}  // namespace dbounds
