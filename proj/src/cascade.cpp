#include "delaybounds/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "delaybounds/errors.hpp"

namespace dbounds {

namespace {

void matvec(const RMatrix& A, std::span<const double> x, std::span<double> y) {
    const auto n = static_cast<std::size_t>(A.rows());
    for (std::size_t r = 0; r < n; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            acc += A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * x[c];
        }
        y[r] = acc;
    }
}

// Evaluates f at the delayed arguments of a known trajectory Y.
void nonlinearity_along(const DelaySystem& sys, const Trajectory& Y, double t,
                        std::span<const double> Y_now, std::span<double> args,
                        std::span<double> out) {
    const std::size_t n = sys.n;
    std::copy(Y_now.begin(), Y_now.end(), args.begin());
    for (std::size_t i = 1; i < sys.f.arg_count; ++i) {
        Y.evaluate(t - sys.delays[i].h(t), args.subspan(i * n, n));
    }
    sys.f.eval(t, args, out);
}

Trajectory checked(Trajectory traj, std::size_t k) {
    if (traj.termination() != Termination::completed) {
        std::ostringstream msg;
        msg << "cascade iterate y_" << k << " escaped at t=" << traj.stop_time().value_or(0.0);
        throw NonFiniteState(msg.str(), traj.stop_time().value_or(traj.end_time()),
                             static_cast<int>(k));
    }
    return traj;
}

Trajectory add(const Trajectory& a, const Trajectory& b, History history, double span) {
    std::vector<double> states = a.states();
    std::vector<double> derivs = a.derivatives();
    const auto& bs = b.states();
    const auto& bd = b.derivatives();
    for (std::size_t i = 0; i < states.size(); ++i) {
        states[i] += bs[i];
        derivs[i] += bd[i];
    }
    return Trajectory(a.dim(), a.t0(), a.step(), std::move(states), std::move(derivs),
                      std::move(history), span);
}

}  // namespace

CascadeResult solve_cascade(const DelaySystem& sys, std::span<const double> phi_s, std::size_t K,
                            TimeSpan span, const StepperConfig& cfg,
                            const CascadeOptions& opts) {
    if (K == 0) throw ConfigError("cascade depth K must be >= 1");
    if (phi_s.size() != sys.n) throw ConfigError("phi_s must have one entry per state component");
    const std::size_t n = sys.n;
    const double hbar = sys.max_delay();

    CascadeResult res;
    res.K = K;
    res.phi_s.assign(phi_s.begin(), phi_s.end());
    res.iterates.reserve(K);
    res.partial_sums.reserve(K);
    const History phi_history = constant_history(res.phi_s);
    const History zero = zero_history(n);

    IntegrateOptions iopts;
    iopts.history_span = hbar;
    if (std::isfinite(opts.escape_norm)) {
        iopts.stop_when = [limit = opts.escape_norm](double, std::span<const double> x) {
            double acc = 0.0;
            for (double v : x) acc += v * v;
            return std::sqrt(acc) >= limit;
        };
    }

    // y_1: constant-coefficient ODE with the external forcing.
    {
        std::vector<double> force(n);
        Rhs rhs = [&sys, force](double t, std::span<const double> x, const Trajectory&,
                                std::span<double> dx) mutable {
            matvec(sys.A, x, dx);
            sys.forcing(t, force);
            for (std::size_t r = 0; r < dx.size(); ++r) dx[r] += force[r];
        };
        res.iterates.push_back(checked(integrate(rhs, n, phi_history, span, cfg, iopts), 1));
        res.partial_sums.push_back(res.iterates.back());
    }

    for (std::size_t k = 2; k <= K; ++k) {
        const Trajectory& prev = res.iterates[k - 2];
        const Trajectory& Yprev = res.partial_sums[k - 2];
        const Trajectory* Yprev2 = k >= 3 ? &res.partial_sums[k - 3] : nullptr;
        std::vector<double> lagged(n), now(n), args(n * sys.f.arg_count), f1(n), f2(n);

        Rhs rhs = [&sys, &prev, &Yprev, Yprev2, lagged, now, args, f1,
                   f2](double t, std::span<const double> x, const Trajectory&,
                       std::span<double> dx) mutable {
            matvec(sys.A, x, dx);
            if (!sys.G.is_zero()) {
                prev.evaluate(t, now);
                sys.G.apply_add(t, now, dx);
            }
            if (!sys.E.is_zero()) {
                prev.evaluate(t - sys.delays[0].h(t), lagged);
                sys.E.apply_add(t, lagged, dx);
            }
            Yprev.evaluate(t, now);
            nonlinearity_along(sys, Yprev, t, now, args, f1);
            if (Yprev2 != nullptr) {
                Yprev2->evaluate(t, now);
                nonlinearity_along(sys, *Yprev2, t, now, args, f2);
                for (std::size_t r = 0; r < dx.size(); ++r) dx[r] += f1[r] - f2[r];
            } else {
                for (std::size_t r = 0; r < dx.size(); ++r) dx[r] += f1[r];
            }
        };
        res.iterates.push_back(checked(integrate(rhs, n, zero, span, cfg, iopts), k));
        res.partial_sums.push_back(
            add(res.partial_sums.back(), res.iterates.back(), phi_history, hbar));
    }
    return res;
}

double default_decay_constant(const EigenData& eig) {
    const double eta = -eig.alpha1;
    return 10.0 * (1.0 + eig.normV * eig.normVinv) / eta;
}

DecayReport check_decay(const CascadeResult& res, const EigenData& eig, double F0,
                        const DecayOptions& opts) {
    if (eig.alpha1 >= 0.0) {
        std::ostringstream msg;
        msg << "A is not Hurwitz (alpha1 = " << eig.alpha1 << ")";
        throw NotHurwitz(msg.str());
    }
    if (!(opts.tail_fraction > 0.0 && opts.tail_fraction <= 1.0)) {
        throw ConfigError("tail_fraction must lie in (0, 1]");
    }
    DecayReport report;
    report.eta = -eig.alpha1;
    report.C = opts.C.value_or(default_decay_constant(eig));
    const Trajectory& YK = res.Y(res.K);
    const double t0 = YK.t0();
    const double t1 = YK.end_time();
    report.tail_start = t1 - opts.tail_fraction * (t1 - t0);
    for (std::size_t i = 0; i < YK.size(); ++i) {
        if (YK.node_time(i) + 1e-12 >= report.tail_start) {
            report.tail_max = std::max(report.tail_max, YK.node_norm(i));
        }
    }
    report.threshold = F0 == 0.0 ? opts.decay_tol : report.C * F0;
    report.pass = report.tail_max <= report.threshold;
    return report;
}

}  // namespace dbounds
