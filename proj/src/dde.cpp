#include "delaybounds/dde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "delaybounds/errors.hpp"

namespace dbounds {

namespace {

// Relative slack used to snap query times onto mesh nodes and domain ends.
constexpr double kSnap = 1e-9;

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

History constant_history(std::vector<double> value) {
    return [value = std::move(value)](double, std::span<double> out) {
        std::copy(value.begin(), value.end(), out.begin());
    };
}

History zero_history(std::size_t dim) {
    return constant_history(std::vector<double>(dim, 0.0));
}

Trajectory::Trajectory(std::size_t dim, double t0, double dt, std::vector<double> states,
                       std::vector<double> derivatives, History history, double history_span)
    : dim_(dim),
      t0_(t0),
      dt_(dt),
      states_(std::move(states)),
      derivs_(std::move(derivatives)),
      history_(std::move(history)),
      history_span_(history_span) {
    if (dim_ == 0 || states_.empty() || states_.size() % dim_ != 0 ||
        derivs_.size() != states_.size()) {
        throw std::invalid_argument("Trajectory: inconsistent node data");
    }
    if (!(dt_ > 0.0)) throw std::invalid_argument("Trajectory: step must be positive");
    complete_nodes_ = size();
}

void Trajectory::locate(double t, std::size_t& index, double& s) const {
    const double u = (t - t0_) / dt_;
    const std::size_t last = complete_nodes_ - 1;
    double fl = std::floor(u);
    double frac = u - fl;
    // Snap to the nearest node when within rounding distance.
    if (frac < kSnap) {
        frac = 0.0;
    } else if (frac > 1.0 - kSnap) {
        fl += 1.0;
        frac = 0.0;
    }
    auto i = static_cast<std::size_t>(std::max(0.0, fl));
    if (i >= last) {
        index = last;
        s = 0.0;
        return;
    }
    index = i;
    s = frac;
}

void Trajectory::evaluate(double t, std::span<double> out) const {
    const double tol = kSnap * dt_;
    if (t < t0_ - tol) {
        if (t < t0_ - history_span_ - tol || !history_) {
            std::ostringstream msg;
            msg << "evaluate: t=" << t << " precedes the history interval starting at "
                << t0_ - history_span_;
            throw OutOfDomain(msg.str());
        }
        history_(t, out);
        return;
    }
    if (complete_nodes_ == 0) {
        throw OutOfDomain("evaluate: trajectory has no completed nodes yet");
    }
    const double t_end = node_time(complete_nodes_ - 1);
    if (t > t_end + tol) {
        std::ostringstream msg;
        msg << "evaluate: t=" << t << " is beyond the last node " << t_end;
        throw OutOfDomain(msg.str());
    }
    std::size_t i = 0;
    double s = 0.0;
    locate(t, i, s);
    const double* x0 = states_.data() + i * dim_;
    if (s == 0.0) {
        std::copy(x0, x0 + dim_, out.begin());
        return;
    }
    const double* x1 = x0 + dim_;
    const double* f0 = derivs_.data() + i * dim_;
    const double* f1 = f0 + dim_;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = (s3 - 2.0 * s2 + s) * dt_;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = (s3 - s2) * dt_;
    for (std::size_t c = 0; c < dim_; ++c) {
        out[c] = h00 * x0[c] + h10 * f0[c] + h01 * x1[c] + h11 * f1[c];
    }
}

std::vector<double> Trajectory::evaluate(double t) const {
    std::vector<double> out(dim_);
    evaluate(t, out);
    return out;
}

double Trajectory::evaluate_component(double t, std::size_t c) const {
    constexpr std::size_t kInline = 16;
    if (dim_ <= kInline) {
        double buf[kInline];
        evaluate(t, std::span<double>(buf, dim_));
        return buf[c];
    }
    return evaluate(t)[c];
}

double Trajectory::node_norm(std::size_t i) const {
    double acc = 0.0;
    for (double v : state(i)) acc += v * v;
    return std::sqrt(acc);
}

double effective_step(TimeSpan span, double requested) {
    if (!(requested > 0.0)) throw ConfigError("integration step must be positive");
    const double length = span.t1 - span.t0;
    if (!(length > 0.0)) throw ConfigError("integration span must have positive length");
    const double ratio = length / requested;
    auto steps = static_cast<std::size_t>(std::ceil(ratio - kSnap * ratio));
    steps = std::max<std::size_t>(steps, 1);
    return length / static_cast<double>(steps);
}

class Integrator {
public:
    static Trajectory run(const Rhs& rhs, std::size_t dim, const History& history, TimeSpan span,
                          const StepperConfig& cfg, const IntegrateOptions& opts) {
        if (dim == 0) throw ConfigError("integrate: dimension must be positive");
        const double dt = effective_step(span, cfg.step);
        if (dt > opts.min_self_delay * (1.0 + kSnap)) {
            std::ostringstream msg;
            msg << "step " << dt << " exceeds the minimal delay " << opts.min_self_delay;
            throw StepExceedsMinDelay(msg.str());
        }
        const auto steps =
            static_cast<std::size_t>(std::llround((span.t1 - span.t0) / dt));

        Trajectory traj;
        traj.dim_ = dim;
        traj.t0_ = span.t0;
        traj.dt_ = dt;
        traj.history_ = history;
        traj.history_span_ = opts.history_span;
        traj.states_.reserve((steps + 1) * dim);
        traj.derivs_.reserve((steps + 1) * dim);

        std::vector<double> x(dim), k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
        history(span.t0, x);
        traj.states_.insert(traj.states_.end(), x.begin(), x.end());
        traj.complete_nodes_ = 0;

        auto finish = [&](Termination how, std::optional<double> when) {
            traj.termination_ = how;
            traj.stop_time_ = when;
            return std::move(traj);
        };

        if (!all_finite(x)) return finish(Termination::escaped, span.t0);

        for (std::size_t i = 0;; ++i) {
            const double t = traj.node_time(i);
            rhs(t, x, traj, k1);
            if (!all_finite(k1)) {
                // Keep the dense output usable up to the last node.
                std::fill(k1.begin(), k1.end(), 0.0);
                traj.derivs_.insert(traj.derivs_.end(), k1.begin(), k1.end());
                traj.complete_nodes_ = i + 1;
                return finish(Termination::escaped, t);
            }
            traj.derivs_.insert(traj.derivs_.end(), k1.begin(), k1.end());
            traj.complete_nodes_ = i + 1;

            if (i == steps) break;
            if (opts.stop_when && opts.stop_when(t, x)) return finish(Termination::stopped, t);

            for (std::size_t c = 0; c < dim; ++c) tmp[c] = x[c] + 0.5 * dt * k1[c];
            rhs(t + 0.5 * dt, tmp, traj, k2);
            for (std::size_t c = 0; c < dim; ++c) tmp[c] = x[c] + 0.5 * dt * k2[c];
            rhs(t + 0.5 * dt, tmp, traj, k3);
            for (std::size_t c = 0; c < dim; ++c) tmp[c] = x[c] + dt * k3[c];
            rhs(t + dt, tmp, traj, k4);
            for (std::size_t c = 0; c < dim; ++c) {
                x[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
            if (!all_finite(x)) return finish(Termination::escaped, traj.node_time(i + 1));
            traj.states_.insert(traj.states_.end(), x.begin(), x.end());
        }
        if (opts.stop_when && opts.stop_when(traj.end_time(), x)) {
            return finish(Termination::stopped, traj.end_time());
        }
        return finish(Termination::completed, std::nullopt);
    }
};

Trajectory integrate(const Rhs& rhs, std::size_t dim, const History& history, TimeSpan span,
                     const StepperConfig& cfg, const IntegrateOptions& opts) {
    return Integrator::run(rhs, dim, history, span, cfg, opts);
}

StepCheck check_step_adequacy(const Rhs& rhs, std::size_t dim, const History& history,
                              TimeSpan span, const StepperConfig& cfg,
                              const IntegrateOptions& opts) {
    StepperConfig fine = cfg;
    fine.step = effective_step(span, cfg.step) / 2.0;
    const Trajectory coarse_run = integrate(rhs, dim, history, span, cfg, opts);
    const Trajectory fine_run = integrate(rhs, dim, history, span, fine, opts);
    StepCheck check;
    check.adequate = !coarse_run.escaped() && !fine_run.escaped();
    const std::size_t nodes = std::min(coarse_run.size(), (fine_run.size() + 1) / 2);
    for (std::size_t i = 0; i < nodes; ++i) {
        const auto a = coarse_run.state(i);
        const auto b = fine_run.state(2 * i);
        for (std::size_t c = 0; c < dim; ++c) {
            const double diff = std::abs(a[c] - b[c]);
            check.max_abs_diff = std::max(check.max_abs_diff, diff);
            if (diff > cfg.atol + cfg.rtol * std::abs(b[c])) check.adequate = false;
        }
    }
    return check;
}

}  // namespace dbounds
