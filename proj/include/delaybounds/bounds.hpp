#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "delaybounds/cascade.hpp"
#include "delaybounds/dde.hpp"
#include "delaybounds/majorant.hpp"
#include "delaybounds/models.hpp"
#include "delaybounds/spectral.hpp"

namespace dbounds {

struct BoundTrace {
    std::vector<double> t;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<double> Z;
    std::vector<double> absY;
    std::optional<std::vector<double>> reference;
    std::size_t K = 0;

    std::size_t size() const noexcept { return t.size(); }
};

struct MajorantDelays {
    Delay h0;
    Delay h1;
};

// Integrates the scalar majorant DDE with zero history. `stop_at` ends the run
// (Termination::stopped) once Z reaches it; non-finite values flag the result escaped.
Trajectory integrate_majorant(const MajorantSpec& maj, const MajorantDelays& delays, TimeSpan span,
                              const StepperConfig& cfg,
                              double stop_at = std::numeric_limits<double>::infinity());

// lower = max(0, |Y_K| - |V| Z), upper = |Y_K| + |V| Z on the cascade mesh.
// Throws MeshMismatch when Z does not cover the cascade horizon.
BoundTrace bilateral_bounds(const CascadeResult& cascade, const Trajectory& Z,
                            const EigenData& eig);

// Fills trace.reference with |x(t)| sampled on the trace mesh.
void attach_reference(BoundTrace& trace, const Trajectory& x);

struct BoundsRun {
    CascadeResult cascade;
    Trajectory Z;
    BoundTrace trace;
};

// Cascade of depth K, its residual majorant and the bilateral bounds.
BoundsRun compute_bounds(const DelaySystem& sys, const EigenData& eig,
                         std::span<const double> phi_s, std::size_t K, TimeSpan span,
                         const StepperConfig& cfg, const MajorantOptions& opts = {},
                         const MajorantTables* tables = nullptr);

// Baseline bounds without successive approximations:
//   Z' = (alpha1 + |g|) Z + |E_x| Z(t - h0) + L_x(t, Z, Z(t - h1), ...) + |V^-1 F|
//   z' = (alphan - |g|) z - |E_x| z(t - h0) - L_x(t, z, z(t - h1), ...) - |V^-1 F|
// both starting from |V^-1 phi_s| on the history, with
// L_x(t, xi) = |V^-1| L(t, kappa * xi). upper = |V| Z and lower = z / |V^-1|,
// clamped to zero from the first crossing of z through zero onward.
// Throws UnsupportedNonlinearity for non-polynomial f.
BoundTrace baseline_bounds(const DelaySystem& sys, const EigenData& eig,
                           std::span<const double> phi_s, TimeSpan span, const StepperConfig& cfg);

}  // namespace dbounds
