#pragma once

// Fixed-step RK4 integration of ODEs and retarded DDEs by the method of steps.
//
// Solutions are stored on a uniform mesh t_i = t0 + i*dt together with the
// right-hand side at every node, so the dense output on [t_i, t_{i+1}] is the
// cubic Hermite interpolant of (x_i, x'_i, x_{i+1}, x'_{i+1}). Delayed reads
// x(t - h) resolve against that interpolant, or against the history function
// for t <= t0. With dt <= min delay every delayed read lands on an interval
// whose end data are already known, so no extrapolation is ever needed.

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace dbounds {

using History = std::function<void(double t, std::span<double> out)>;

History constant_history(std::vector<double> value);
History zero_history(std::size_t dim);

struct TimeSpan {
    double t0 = 0.0;
    double t1 = 0.0;
};

struct StepperConfig {
    double step = 1e-3;
    // Used only by check_step_adequacy.
    double rtol = 1e-6;
    double atol = 1e-5;
};

enum class Termination { completed, escaped, stopped };

class Trajectory {
public:
    Trajectory() = default;

    // Assemble from raw node data (row-major, one n-vector per node).
    Trajectory(std::size_t dim, double t0, double dt, std::vector<double> states,
               std::vector<double> derivatives, History history, double history_span);

    std::size_t dim() const noexcept { return dim_; }
    double t0() const noexcept { return t0_; }
    double step() const noexcept { return dt_; }
    std::size_t size() const noexcept { return dim_ == 0 ? 0 : states_.size() / dim_; }
    double node_time(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * dt_; }
    double end_time() const noexcept { return node_time(size() - 1); }
    double history_span() const noexcept { return history_span_; }

    std::span<const double> state(std::size_t i) const {
        return {states_.data() + i * dim_, dim_};
    }
    std::span<const double> derivative(std::size_t i) const {
        return {derivs_.data() + i * dim_, dim_};
    }
    const std::vector<double>& states() const noexcept { return states_; }
    const std::vector<double>& derivatives() const noexcept { return derivs_; }
    const History& history() const noexcept { return history_; }

    Termination termination() const noexcept { return termination_; }
    bool escaped() const noexcept { return termination_ == Termination::escaped; }
    // First time at which the integration produced a non-finite value or met
    // the stop predicate.
    std::optional<double> stop_time() const noexcept { return stop_time_; }

    // Dense output. Nodes are returned bitwise; t <= t0 defers to the history.
    void evaluate(double t, std::span<double> out) const;
    std::vector<double> evaluate(double t) const;
    double evaluate_component(double t, std::size_t c) const;

    // Euclidean norm of the state at node i.
    double node_norm(std::size_t i) const;

private:
    friend class Integrator;

    void locate(double t, std::size_t& index, double& s) const;

    std::size_t dim_ = 0;
    double t0_ = 0.0;
    double dt_ = 0.0;
    std::vector<double> states_;
    std::vector<double> derivs_;
    // Nodes whose derivative is stored; the dense output is valid up to the
    // last of these while the trajectory is still being built.
    std::size_t complete_nodes_ = 0;
    History history_;
    double history_span_ = 0.0;
    Termination termination_ = Termination::completed;
    std::optional<double> stop_time_;
};

// rhs(t, x, past, dxdt): `past` is the trajectory under construction; reading
// past.evaluate(t - h) with h >= dt is always valid.
using Rhs = std::function<void(double t, std::span<const double> x, const Trajectory& past,
                               std::span<double> dxdt)>;

using StopPredicate = std::function<bool(double t, std::span<const double> x)>;

struct IntegrateOptions {
    // Smallest lag at which rhs reads its own trajectory; infinity for ODEs.
    double min_self_delay = std::numeric_limits<double>::infinity();
    // Length of the interval [t0 - span, t0] on which the history is defined.
    double history_span = 0.0;
    // Integration halts (Termination::stopped) once this returns true at a node.
    StopPredicate stop_when;
};

// Runs RK4 from span.t0 to span.t1. The effective step is the largest value
// <= cfg.step that divides the span into whole steps. A non-finite state ends
// the run early and the returned trajectory is flagged escaped.
// Throws StepExceedsMinDelay if the step exceeds opts.min_self_delay.
Trajectory integrate(const Rhs& rhs, std::size_t dim, const History& history, TimeSpan span,
                     const StepperConfig& cfg, const IntegrateOptions& opts = {});

// Effective mesh step used by integrate for the given span and requested step.
double effective_step(TimeSpan span, double requested);

struct StepCheck {
    double max_abs_diff = 0.0;
    bool adequate = false;
};

// Compares a run at cfg.step with one at cfg.step/2 on their common nodes and
// reports whether the difference stays within atol + rtol*|x|.
StepCheck check_step_adequacy(const Rhs& rhs, std::size_t dim, const History& history,
                              TimeSpan span, const StepperConfig& cfg,
                              const IntegrateOptions& opts = {});

}  // namespace dbounds
