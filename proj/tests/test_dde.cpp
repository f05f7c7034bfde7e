#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "delaybounds/dde.hpp"
#include "delaybounds/errors.hpp"

using namespace dbounds;

namespace {

Rhs decay() {
    return [](double, std::span<const double> x, const Trajectory&, std::span<double> dx) {
        dx[0] = -x[0];
    };
}

Rhs unit_lag() {
    return [](double t, std::span<const double>, const Trajectory& past, std::span<double> dx) {
        dx[0] = past.evaluate_component(t - 1.0, 0);
    };
}

// x' = -x(t-1), x = 1 on [-1, 0]
double lag_exact(double t) {
    if (t <= 1.0) return 1.0 - t;
    return 0.5 * t * t - 2.0 * t + 1.5;
}

Trajectory run_lag(double dt) {
    IntegrateOptions o;
    o.min_self_delay = 1.0;
    o.history_span = 1.0;
    auto rhs = [](double t, std::span<const double>, const Trajectory& past,
                  std::span<double> dx) { dx[0] = -past.evaluate_component(t - 1.0, 0); };
    return integrate(rhs, 1, constant_history({1.0}), {0.0, 2.0}, {dt}, o);
}

}  // namespace

TEST_CASE("exponential decay matches e^-t at nodes and between them") {
    const Trajectory x = integrate(decay(), 1, constant_history({1.0}), {0.0, 1.0}, {1e-3});
    CHECK(std::abs(x.evaluate_component(1.0, 0) - 0.3678794) < 1e-6);
    CHECK(std::abs(x.evaluate_component(0.5, 0) - 0.6065307) < 1e-6);
    CHECK(x.termination() == Termination::completed);
}

TEST_CASE("unit lag against the method-of-steps closed form") {
    const Trajectory x = run_lag(1e-3);
    CHECK(std::abs(x.evaluate_component(1.0, 0) - 0.0) < 1e-8);
    CHECK(std::abs(x.evaluate_component(2.0, 0) + 0.5) < 1e-8);
    double worst = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        const double t = 2.0 * i / 4000.0;
        worst = std::max(worst, std::abs(x.evaluate_component(t, 0) - lag_exact(t)));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("zero stays zero") {
    auto rhs = [](double t, std::span<const double> x, const Trajectory& past,
                  std::span<double> dx) {
        dx[0] = -x[0] + x[1] * x[1] + past.evaluate_component(t - 0.5, 1);
        dx[1] = -2.0 * x[1];
    };
    IntegrateOptions o;
    o.min_self_delay = 0.5;
    o.history_span = 0.5;
    const Trajectory x = integrate(rhs, 2, zero_history(2), {0.0, 5.0}, {0.01}, o);
    for (double v : x.states()) CHECK(v == 0.0);
}

TEST_CASE("nodes are reproduced bitwise and history is delegated") {
    const Trajectory x = run_lag(0.01);
    for (std::size_t i = 0; i < x.size(); i += 17) {
        const double got = x.evaluate_component(x.node_time(i), 0);
        CHECK(std::memcmp(&got, &x.state(i)[0], sizeof got) == 0);
    }
    CHECK(x.evaluate_component(-0.3, 0) == 1.0);
    CHECK(x.evaluate_component(-1.0, 0) == 1.0);
    // continuity across a node
    const double tn = x.node_time(50);
    const double left = x.evaluate_component(tn - 1e-12, 0);
    const double right = x.evaluate_component(tn + 1e-12, 0);
    CHECK(std::abs(left - right) < 1e-10);
}

TEST_CASE("evaluation outside the covered interval throws") {
    const Trajectory x = run_lag(0.01);
    CHECK_THROWS_AS(x.evaluate_component(-1.5, 0), OutOfDomain);
    CHECK_THROWS_AS(x.evaluate_component(2.5, 0), OutOfDomain);
}

TEST_CASE("constant solutions interpolate to the constant") {
    auto rhs = [](double, std::span<const double>, const Trajectory&, std::span<double> dx) {
        dx[0] = 0.0;
    };
    const Trajectory x = integrate(rhs, 1, constant_history({2.5}), {0.0, 1.0}, {0.1});
    for (double t : {0.03, 0.47, 0.999}) CHECK(x.evaluate_component(t, 0) == doctest::Approx(2.5));
}

TEST_CASE("fourth-order convergence") {
    auto max_err = [](double dt) {
        const Trajectory x = integrate(decay(), 1, constant_history({1.0}), {0.0, 5.0}, {dt});
        double e = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            e = std::max(e, std::abs(x.state(i)[0] - std::exp(-x.node_time(i))));
        }
        return e;
    };
    const double ratio = max_err(0.1) / max_err(0.05);
    CHECK(ratio >= 14.0);
}

TEST_CASE("dense output is O(dt^4) against a finer run") {
    const Trajectory coarse = integrate(decay(), 1, constant_history({1.0}), {0.0, 2.0}, {0.1});
    const Trajectory fine = integrate(decay(), 1, constant_history({1.0}), {0.0, 2.0}, {0.01});
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double t = 0.005 + 0.01 * i;
        worst = std::max(worst,
                         std::abs(coarse.evaluate_component(t, 0) - fine.evaluate_component(t, 0)));
    }
    CHECK(worst < 10.0 * std::pow(0.1, 4));
}

TEST_CASE("identical inputs give bitwise identical trajectories") {
    const Trajectory a = run_lag(0.003);
    const Trajectory b = run_lag(0.003);
    REQUIRE(a.states().size() == b.states().size());
    CHECK(std::memcmp(a.states().data(), b.states().data(),
                      a.states().size() * sizeof(double)) == 0);
    CHECK(std::memcmp(a.derivatives().data(), b.derivatives().data(),
                      a.derivatives().size() * sizeof(double)) == 0);
}

TEST_CASE("step longer than the smallest delay is rejected") {
    IntegrateOptions o;
    o.min_self_delay = 0.05;
    o.history_span = 0.05;
    CHECK_THROWS_AS(integrate(unit_lag(), 1, constant_history({1.0}), {0.0, 1.0}, {0.1}, o),
                    StepExceedsMinDelay);
}

TEST_CASE("blow-up truncates the run and flags it escaped") {
    auto rhs = [](double, std::span<const double> x, const Trajectory&, std::span<double> dx) {
        dx[0] = x[0] * x[0];
    };
    const Trajectory x = integrate(rhs, 1, constant_history({1.0}), {0.0, 2.0}, {1e-3});
    CHECK(x.escaped());
    REQUIRE(x.stop_time().has_value());
    CHECK(*x.stop_time() > 0.9);
    CHECK(*x.stop_time() < 1.1);
    CHECK(x.end_time() < 1.1);
}

TEST_CASE("stop predicate ends the run at a node") {
    StopPredicate stop = [](double, std::span<const double> x) { return x[0] < 0.5; };
    IntegrateOptions o;
    o.stop_when = stop;
    const Trajectory x = integrate(decay(), 1, constant_history({1.0}), {0.0, 5.0}, {0.01}, o);
    CHECK(x.termination() == Termination::stopped);
    CHECK(x.end_time() == doctest::Approx(std::log(2.0)).epsilon(0.02));
}

TEST_CASE("effective step divides the span") {
    CHECK(effective_step({0.0, 1.0}, 0.3) == doctest::Approx(0.25));
    CHECK(effective_step({0.0, 2.0}, 1e-3) == doctest::Approx(1e-3));
}

TEST_CASE("step adequacy check") {
    const StepCheck ok = check_step_adequacy(decay(), 1, constant_history({1.0}), {0.0, 5.0},
                                             {1e-2, 1e-6, 1e-5});
    CHECK(ok.adequate);
    CHECK(ok.max_abs_diff < 1e-8);
}
