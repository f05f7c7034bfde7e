#pragma once

// Boundary estimation for the constant-history stability / boundedness domains.
// A probe classifies one history vector phi_s; radial_search walks a ray in
// double polar coordinates and sweep repeats it over an angular grid.

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "delaybounds/dde.hpp"
#include "delaybounds/majorant.hpp"
#include "delaybounds/models.hpp"
#include "delaybounds/spectral.hpp"

namespace dbounds {

std::array<double, 4> polar_to_state(double r1, double theta1, double r2, double theta2);

enum class Verdict { inside, exceeded };

struct ProbeResult {
    Verdict verdict = Verdict::inside;
    std::optional<double> escape_time;
    double peak = 0.0;

    bool inside() const noexcept { return verdict == Verdict::inside; }
};

struct ProbeSettings {
    TimeSpan span{0.0, 40.0};
    double varpi = 50.0;
    StepperConfig cfg{};
    // Extra decay test for unforced runs: the monitored norm over the last
    // tail_fraction of the horizon must stay below tail_ratio * |phi_s|.
    bool tail_check = false;
    double tail_fraction = 0.1;
    double tail_ratio = 0.1;
};

// Direct simulation: exceeded iff sup |x| >= varpi or the run escapes.
ProbeResult probe_reference(const DelaySystem& sys, std::span<const double> phi_s,
                            const ProbeSettings& s);

// Cascade + majorant: exceeded iff sup (|Y_K| + |V| Z) >= varpi, or the cascade
// or the majorant escapes. Throws UnsupportedNonlinearity for non-cubic models.
ProbeResult probe_scalar_bound(const DelaySystem& sys, const EigenData& eig,
                               std::span<const double> phi_s, std::size_t K,
                               const ProbeSettings& s, const MajorantOptions& opts = {},
                               const MajorantTables* tables = nullptr);

// Exceeded iff sup |Y_K| >= varpi or an iterate escapes. Works for every model.
ProbeResult probe_y_threshold(const DelaySystem& sys, std::span<const double> phi_s,
                              std::size_t K, const ProbeSettings& s);

enum class ProbeMethod { reference, scalar_bound, y_threshold };

std::string to_string(ProbeMethod m);
ProbeMethod probe_method_from_string(const std::string& name);

using Probe = std::function<ProbeResult(std::span<const double> phi_s)>;

// Probes owning copies of everything they read; safe to call concurrently.
Probe make_reference_probe(DelaySystem sys, ProbeSettings s);
Probe make_scalar_bound_probe(DelaySystem sys, EigenData eig, std::size_t K, ProbeSettings s,
                              MajorantOptions opts = {});
Probe make_y_threshold_probe(DelaySystem sys, std::size_t K, ProbeSettings s);

struct Ray {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double w1 = 1.0;
    double w2 = 1.0;

    std::array<double, 4> at(double rho) const {
        return polar_to_state(rho * w1, theta1, rho * w2, theta2);
    }
};

struct RadialOptions {
    double seed = 0.05;
    double rho_max = 100.0;
    double tol_rho = 1e-2;
};

enum class RadialStatus { resolved, no_exceedance, seed_exceeded };

std::string to_string(RadialStatus s);

struct RadialResult {
    // Largest radius seen inside; 0 when the seed already exceeds and
    // rho_max when nothing exceeded.
    double radius = 0.0;
    RadialStatus status = RadialStatus::resolved;
    std::size_t evaluations = 0;
};

// Doubles from the seed until the first exceeded radius (capped at rho_max),
// then bisects the last bracket down to tol_rho. Verdicts along the ray are
// not assumed monotone: the result is the inside/exceeded transition found by
// this bracketing, which need not be the first one along the ray.
RadialResult radial_search(const std::function<bool(double rho)>& inside,
                           const RadialOptions& opts);
RadialResult radial_search(const Probe& probe, const Ray& ray, const RadialOptions& opts);

enum class ProjectionMode { slice, envelope };

std::string to_string(ProjectionMode m);
ProjectionMode projection_mode_from_string(const std::string& name);

struct SweepGrid {
    double theta_step = std::numbers::pi / 48.0;
    ProjectionMode mode = ProjectionMode::slice;
    // Slice mode: the fixed theta2 (w2 is forced to 0). Envelope mode sweeps
    // theta2 over the same grid as theta1.
    double theta2 = 0.0;
    double w1 = 1.0;
    double w2 = 1.0;
};

// Angles i * step for i = 0 .. round(2 pi / step) - 1.
std::vector<double> angle_grid(double step);

struct ProjectedPoint {
    double theta1 = 0.0;
    double radius = 0.0;  // rho * w1 of the governing angle pair
    double x = 0.0;       // phi_s1
    double y = 0.0;       // phi_s2
    RadialStatus status = RadialStatus::resolved;
};

struct BoundaryEstimate {
    std::string method;
    std::vector<std::pair<double, double>> theta;  // (theta1, theta2) per pair
    std::vector<RadialResult> radial;               // per pair
    std::vector<ProjectedPoint> projection;         // per theta1
    SweepGrid grid;
    RadialOptions radial_opts;
};

// Serial reference implementation.
BoundaryEstimate sweep_serial(const Probe& probe, const SweepGrid& grid,
                              const RadialOptions& opts, std::string method = {});
// OpenMP version; results are stored by angle index and match sweep_serial bitwise.
BoundaryEstimate sweep(const Probe& probe, const SweepGrid& grid, const RadialOptions& opts,
                       std::string method = {});

}  // namespace dbounds
