#pragma once

// JSON run configuration. Physical parameters have no defaults; numerical
// sweep settings do.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "delaybounds/domain.hpp"
#include "delaybounds/majorant.hpp"
#include "delaybounds/models.hpp"

namespace dbounds {

inline constexpr const char* kVersion = "0.1.0";

struct SweepConfig {
    // Stored as given ("pi/48" or a number) so emit() reproduces it.
    std::string theta_step = "pi/48";
    std::array<double, 2> ray_weights{1.0, 1.0};
    double rho_seed = 0.05;
    double rho_max = 100.0;
    double tol_rho = 1e-2;
    ProjectionMode projection_mode = ProjectionMode::slice;
    double theta2 = 0.0;

    double theta_step_value() const;
    bool operator==(const SweepConfig&) const = default;
};

struct RunConfig {
    ModelKind model = ModelKind::vdp;
    OscillatorParams params;
    std::array<double, 4> phi_s{0.0, 0.0, 0.0, 0.0};
    std::size_t K = 1;
    double t0 = 0.0;
    double T = 0.0;
    double dt = 0.0;
    double varpi = 0.0;
    MajorantConvention convention = MajorantConvention::oscillator;
    std::string method = "all";
    SweepConfig sweep;
    // Decay test settings for `cascade`.
    double tail_fraction = 0.2;
    double decay_tol = 1e-4;
    std::optional<double> decay_C;
    std::string output_dir = "out";

    bool operator==(const RunConfig&) const = default;

    TimeSpan span() const { return {t0, T}; }
    StepperConfig stepper() const;
    SweepGrid grid() const;
    RadialOptions radial() const;
    ProbeSettings probe_settings() const;
    MajorantOptions majorant_options() const;
};

// Parses JSON text. Errors carry "line L, column C" of the offending token or key.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);
std::string emit_config(const RunConfig& cfg);

// Checks cross-field invariants (dt <= min delay, K >= 1, varpi > 0, ...).
void validate_config(const RunConfig& cfg);

// FNV-1a 64 of the canonical emitted form (output_dir excluded), as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

std::vector<double> parse_phi_list(const std::string& text);

}  // namespace dbounds
