#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "delaybounds/domain.hpp"
#include "delaybounds/errors.hpp"
#include "support.hpp"

using namespace dbounds;

namespace {

constexpr double pi = std::numbers::pi;

Probe disc_probe(double radius) {
    return [radius](std::span<const double> phi) {
        ProbeResult r;
        r.peak = dbtest::norm(phi);
        r.verdict = r.peak < radius ? Verdict::inside : Verdict::exceeded;
        return r;
    };
}

ProbeSettings settings() {
    ProbeSettings s;
    s.span = {0.0, 40.0};
    s.varpi = 50.0;
    s.cfg.step = 0.01;
    return s;
}

}  // namespace

TEST_CASE("double polar coordinates") {
    const auto a = polar_to_state(2.0, 0.0, 3.0, pi / 2);
    CHECK(a[0] == 2.0);
    CHECK(a[1] == 0.0);
    CHECK(a[2] == doctest::Approx(0.0));
    CHECK(a[3] == 3.0);
    const auto b = polar_to_state(1.0, pi / 4, 0.0, 1.0);
    CHECK(b[0] == doctest::Approx(std::sqrt(0.5)));
    CHECK(b[1] == doctest::Approx(std::sqrt(0.5)));
    CHECK(b[2] == 0.0);
    CHECK(b[3] == 0.0);
    const Ray ray{pi, 0.0, 1.0, 0.0};
    CHECK(ray.at(2.0)[0] == doctest::Approx(-2.0));
}

TEST_CASE("probes") {
    const DelaySystem sys = build_vdp_system(dbtest::oscillator_params());
    const EigenData eig = eigen_decompose(sys.A);
    const ProbeSettings s = settings();
    const std::array<double, 4> small{0.3, 0, 0, 0};
    const std::array<double, 4> large{4.0, 0, 0, 0};

    CHECK(probe_reference(sys, small, s).inside());
    const ProbeResult far = probe_reference(sys, large, s);
    CHECK_FALSE(far.inside());
    CHECK(far.escape_time.has_value());

    CHECK(probe_scalar_bound(sys, eig, small, 6, s).inside());
    CHECK_FALSE(probe_scalar_bound(sys, eig, large, 6, s).inside());
    CHECK(probe_y_threshold(sys, small, 6, s).inside());
    CHECK_FALSE(probe_y_threshold(sys, large, 6, s).inside());

    // the reference peak is at least the initial norm
    CHECK(probe_reference(sys, small, s).peak >= 0.3);

    auto p = dbtest::oscillator_params();
    p.mu3 = p.mu4 = -1.0;
    const DelaySystem tanh_sys = build_tanh_variant(p, ModelBase::vdp);
    CHECK_THROWS_AS(probe_scalar_bound(tanh_sys, eig, small, 6, s), UnsupportedNonlinearity);
    CHECK(probe_y_threshold(tanh_sys, small, 6, s).inside());
}

TEST_CASE("tail check flags slow decay") {
    const DelaySystem sys = build_vdp_system(dbtest::oscillator_params());
    ProbeSettings s = settings();
    s.span = {0.0, 5.0};
    s.tail_check = true;
    const std::array<double, 4> phi{0.3, 0, 0, 0};
    CHECK_FALSE(probe_reference(sys, phi, s).inside());
    s.span = {0.0, 80.0};
    CHECK(probe_reference(sys, phi, s).inside());
}

TEST_CASE("method names") {
    CHECK(probe_method_from_string("scalar") == ProbeMethod::scalar_bound);
    CHECK(probe_method_from_string("scalar_bound") == ProbeMethod::scalar_bound);
    CHECK(to_string(ProbeMethod::y_threshold) == "y_threshold");
    CHECK_THROWS_AS(probe_method_from_string("nope"), ConfigError);
    CHECK(projection_mode_from_string("envelope") == ProjectionMode::envelope);
    CHECK(to_string(RadialStatus::no_exceedance) == "no_exceedance");
}

TEST_CASE("radial search on a synthetic threshold") {
    RadialOptions opts;
    opts.seed = 0.05;
    opts.rho_max = 100.0;
    opts.tol_rho = 1e-3;
    const RadialResult r = radial_search([](double rho) { return rho < 3.0; }, opts);
    CHECK(r.status == RadialStatus::resolved);
    CHECK(r.radius <= 3.0);
    CHECK(r.radius > 3.0 - 1e-3);
    CHECK(r.evaluations < 30);

    const RadialResult never = radial_search([](double) { return true; }, opts);
    CHECK(never.status == RadialStatus::no_exceedance);
    CHECK(never.radius == 100.0);

    const RadialResult always = radial_search([](double) { return false; }, opts);
    CHECK(always.status == RadialStatus::seed_exceeded);
    CHECK(always.radius == 0.0);
    CHECK(always.evaluations == 1);

    opts.tol_rho = 0.0;
    CHECK_THROWS_AS(radial_search([](double) { return true; }, opts), ConfigError);
}

TEST_CASE("angle grid") {
    const auto g = angle_grid(pi / 48);
    REQUIRE(g.size() == 96);
    CHECK(g[0] == 0.0);
    CHECK(g[95] == doctest::Approx(95 * pi / 48));
    CHECK(angle_grid(2 * pi).size() == 1);
    CHECK_THROWS_AS(angle_grid(0.0), ConfigError);
}

TEST_CASE("sweep of an isotropic disc") {
    RadialOptions opts;
    opts.tol_rho = 1e-3;
    SweepGrid grid;
    const BoundaryEstimate est = sweep(disc_probe(2.0), grid, opts, "disc");
    REQUIRE(est.projection.size() == 96);
    REQUIRE(est.radial.size() == 96);
    for (const auto& p : est.projection) {
        CHECK(p.radius == doctest::Approx(2.0).epsilon(1e-3));
        CHECK(std::hypot(p.x, p.y) == doctest::Approx(p.radius));
        CHECK(p.status == RadialStatus::resolved);
    }
    CHECK(est.method == "disc");

    SweepGrid env;
    env.theta_step = pi / 4;
    env.mode = ProjectionMode::envelope;
    const BoundaryEstimate e2 = sweep(disc_probe(2.0), env, opts);
    CHECK(e2.radial.size() == 64);
    CHECK(e2.projection.size() == 8);
    for (const auto& p : e2.projection) {
        CHECK(p.radius == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
    }
}

TEST_CASE("envelope takes the smallest radius over theta2") {
    // exceed when phi_s3 > 0.5: theta2 = 0 governs
    Probe probe = [](std::span<const double> phi) {
        ProbeResult r;
        r.verdict = (dbtest::norm(phi) < 4.0 && phi[2] < 0.5) ? Verdict::inside : Verdict::exceeded;
        return r;
    };
    SweepGrid grid;
    grid.theta_step = pi / 2;
    grid.mode = ProjectionMode::envelope;
    RadialOptions opts;
    opts.tol_rho = 1e-4;
    const BoundaryEstimate est = sweep_serial(probe, grid, opts);
    for (const auto& p : est.projection) CHECK(p.radius == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("parallel sweep matches the serial one") {
    const DelaySystem sys = build_vdp_system(dbtest::oscillator_params());
    const Probe probe = make_reference_probe(sys, settings());
    SweepGrid grid;
    grid.theta_step = pi / 8;
    RadialOptions opts;
    const BoundaryEstimate a = sweep_serial(probe, grid, opts);
    const BoundaryEstimate b = sweep(probe, grid, opts);
    REQUIRE(a.radial.size() == b.radial.size());
    for (std::size_t i = 0; i < a.radial.size(); ++i) {
        CHECK(a.radial[i].radius == b.radial[i].radius);
        CHECK(a.radial[i].evaluations == b.radial[i].evaluations);
        CHECK(a.projection[i].x == b.projection[i].x);
    }
}

TEST_CASE("parallel sweep propagates probe failures") {
    Probe probe = [](std::span<const double> phi) -> ProbeResult {
        if (phi[1] > 0.5) throw NumericalError("synthetic failure");
        return {};
    };
    SweepGrid grid;
    grid.theta_step = pi / 4;
    CHECK_THROWS_AS(sweep(probe, grid, {}), NumericalError);
}

TEST_CASE("conservative methods stay inside the reference domain") {
    const DelaySystem sys = build_vdp_system(dbtest::oscillator_params());
    const EigenData eig = eigen_decompose(sys.A);
    const ProbeSettings s = settings();
    const RadialOptions opts;
    for (double theta : {0.0, pi / 2}) {
        const Ray ray{theta, 0.0, 1.0, 0.0};
        const double ref = radial_search(make_reference_probe(sys, s), ray, opts).radius;
        const double sc = radial_search(make_scalar_bound_probe(sys, eig, 6, s), ray, opts).radius;
        CHECK(sc <= ref + opts.tol_rho);
        CHECK(sc > 0.5 * ref);
    }
}

TEST_CASE("duffing reference radius regression") {
    const DelaySystem sys = build_duffing_system(dbtest::oscillator_params());
    const Ray ray{0.0, 0.0, 1.0, 0.0};
    const RadialResult r = radial_search(make_reference_probe(sys, settings()), ray, {});
    CHECK(r.status == RadialStatus::resolved);
    CHECK(r.radius == doctest::Approx(0.78125).epsilon(1e-12));
}
