#pragma once

// Successive approximations Y_K = y_1 + ... + y_K of a delay system.
//
//   y_1' = A y_1 + F(t),                                    y_1 = phi_s on the history
//   y_k' = A y_k + G(t) y_{k-1}(t) + E(t) y_{k-1}(t - h0)
//          + f(t, Y_{k-1}, ...) - f(t, Y_{k-2}, ...),        y_k = 0 on the history
//
// with f(t, Y_0, ...) := 0. Every delayed argument refers to an iterate that
// is already known, so each y_k is an ODE with a known forcing.

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "delaybounds/dde.hpp"
#include "delaybounds/models.hpp"
#include "delaybounds/spectral.hpp"

namespace dbounds {

struct CascadeResult {
    std::vector<Trajectory> iterates;      // y_1 .. y_K
    std::vector<Trajectory> partial_sums;  // Y_1 .. Y_K
    std::size_t K = 0;
    std::vector<double> phi_s;

    // 1-based accessors matching the y_k / Y_k numbering.
    const Trajectory& y(std::size_t k) const { return iterates.at(k - 1); }
    const Trajectory& Y(std::size_t k) const { return partial_sums.at(k - 1); }
};

struct CascadeOptions {
    // An iterate whose node norm reaches this value is treated as escaped.
    double escape_norm = std::numeric_limits<double>::infinity();
};

// Throws NonFiniteState (with the 1-based iterate index) when an iterate
// escapes, and ConfigError for K == 0 or a phi_s of the wrong size.
CascadeResult solve_cascade(const DelaySystem& sys, std::span<const double> phi_s, std::size_t K,
                            TimeSpan span, const StepperConfig& cfg,
                            const CascadeOptions& opts = {});

struct DecayOptions {
    double tail_fraction = 0.2;
    // Pass threshold when F0 == 0.
    double decay_tol = 1e-4;
    // O(F0) constant; defaults to 10 (1 + |V||V^-1|) / eta.
    std::optional<double> C;
};

struct DecayReport {
    double tail_max = 0.0;
    double tail_start = 0.0;
    double eta = 0.0;
    double C = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

double default_decay_constant(const EigenData& eig);

// Tail check of |Y_K| for the exponential-decay envelope. Throws NotHurwitz
// when alpha1 >= 0.
DecayReport check_decay(const CascadeResult& res, const EigenData& eig, double F0,
                        const DecayOptions& opts = {});

}  // namespace dbounds
