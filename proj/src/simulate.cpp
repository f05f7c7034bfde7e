#include <algorithm>
#include <vector>

#include "delaybounds/models.hpp"

namespace dbounds {

Trajectory simulate(const DelaySystem& sys, const History& history, TimeSpan span,
                    const StepperConfig& cfg, StopPredicate stop_when) {
    sys.validate(span.t0, span.t1);
    const std::size_t n = sys.n;
    const std::size_t m1 = sys.f.arg_count;
    std::vector<double> args(n * m1), lagged(n), fout(n), force(n);
    const Eigen::Map<const RMatrix> A(sys.A.data(), sys.A.rows(), sys.A.cols());

    Rhs rhs = [&, args, lagged, fout, force](double t, std::span<const double> x,
                                             const Trajectory& past,
                                             std::span<double> dx) mutable {
        for (std::size_t r = 0; r < n; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < n; ++c) acc += A(r, c) * x[c];
            dx[r] = acc;
        }
        sys.G.apply_add(t, x, dx);
        if (!sys.E.is_zero()) {
            past.evaluate(t - sys.delays[0].h(t), lagged);
            sys.E.apply_add(t, lagged, dx);
        }
        std::copy(x.begin(), x.end(), args.begin());
        for (std::size_t i = 1; i < m1; ++i) {
            past.evaluate(t - sys.delays[i].h(t),
                          std::span<double>(args.data() + i * n, n));
        }
        sys.f.eval(t, args, fout);
        sys.forcing(t, force);
        for (std::size_t r = 0; r < n; ++r) dx[r] += fout[r] + force[r];
    };

    IntegrateOptions opts;
    opts.min_self_delay = sys.min_delay();
    opts.history_span = sys.max_delay();
    opts.stop_when = std::move(stop_when);
    return integrate(rhs, n, history, span, cfg, opts);
}

Trajectory simulate(const DelaySystem& sys, std::span<const double> phi_s, TimeSpan span,
                    const StepperConfig& cfg, StopPredicate stop_when) {
    return simulate(sys, constant_history({phi_s.begin(), phi_s.end()}), span, cfg,
                    std::move(stop_when));
}

}  // namespace dbounds
