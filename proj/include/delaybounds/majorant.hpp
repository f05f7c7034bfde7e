#pragma once

// Scalar majorant equation for the residual z_K = x - Y_K:
//
//   Z' = drift(t) Z + lin_delay(t) Z(t - h0)
//        + c3 Z^3(t - h1) + c2(t) Z^2(t - h1) + c1(t) Z(t - h1) + offset(t),
//   Z = 0 on the history.
//
// For the oscillator models (E = G) the linear part is alpha1 Z + |V^-1 G V| (Z + Z(t - h0));
// the general form uses (alpha1 + |g(t)|) Z + |V^-1 E V| Z(t - h0).

#include <cstddef>
#include <functional>
#include <string>

#include "delaybounds/cascade.hpp"
#include "delaybounds/models.hpp"
#include "delaybounds/spectral.hpp"

namespace dbounds {

enum class MajorantConvention { oscillator, general };

std::string to_string(MajorantConvention c);
MajorantConvention majorant_convention_from_string(const std::string& name);

struct MajorantOptions {
    MajorantConvention convention = MajorantConvention::oscillator;
    // Multiply the nonlinear terms by |V^-1|, as required by
    // |Gamma_K| <= |V^-1| |f(V z + Y_K) - f(Y_{K-1})|.
    bool nonlinear_vinv_factor = true;
};

struct MajorantCoefficients {
    double drift = 0.0;
    double lin_delay = 0.0;
    double c2 = 0.0;
    double c1 = 0.0;
    double offset = 0.0;
};

struct MajorantSpec {
    double c3 = 0.0;
    std::function<MajorantCoefficients(double t)> at;
    MajorantConvention convention = MajorantConvention::oscillator;

    double drift(double t) const { return at(t).drift; }
    double lin_delay_coeff(double t) const { return at(t).lin_delay; }
    double c2(double t) const { return at(t).c2; }
    double c1(double t) const { return at(t).c1; }
    double offset(double t) const { return at(t).offset; }
};

// The phi-independent coefficients (drift and lin_delay), tabulated on the
// RK4 stage grid of [t0, t1] with the given step. Shared by all probes of a sweep.
struct MajorantTables {
    SampledFunction drift;
    SampledFunction lin_delay;
};

MajorantTables make_majorant_tables(const DelaySystem& sys, const EigenData& eig, TimeSpan span,
                                    double step, const MajorantOptions& opts = {});

// Builds the majorant for the cubic oscillator nonlinearities (sys.cubic_terms):
//
//   c3     = s * sum |mu_i| kappa_i^3
//   c2(t)  = 3 s * sum |mu_i| kappa_i^2 |Y_{iK}(t - h1)|
//   c1(t)  = 3 s * sum |mu_i| kappa_i Y_{iK}(t - h1)^2
//   offset = s * sum |mu_i| |Y_{iK}^3(t - h1) - Y_{i,K-1}^3(t - h1)|
//            + |V^-1 (G(t) y_K(t) + E(t) y_K(t - h0))|
//
// where i runs over the cubed components and s = |V^-1| (or 1 when
// opts.nonlinear_vinv_factor is off). The returned spec refers to `cascade`
// and `sys`; both must outlive it. Throws UnsupportedNonlinearity when the
// system has no cubic structure and MissingIterate when cascade.K < K.
MajorantSpec cubic_residual_majorant(const EigenData& eig, const DelaySystem& sys,
                                     const CascadeResult& cascade, std::size_t K,
                                     const MajorantOptions& opts = {},
                                     const MajorantTables* tables = nullptr);

}  // namespace dbounds
