#pragma once

// Delay systems of the form
//
//   x' = (A + G(t)) x + E(t) x(t - h0(t)) + f(t, x(t), x(t - h1(t)), ..., x(t - hm(t))) + F(t)
//
// and the coupled oscillator catalog built on it.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "delaybounds/dde.hpp"
#include "delaybounds/spectral.hpp"

namespace dbounds {

using ScalarFn = std::function<double(double t)>;

// Sparse matrix-valued function of time: a list of time-varying entries.
struct TimeVaryingEntry {
    std::size_t row = 0;
    std::size_t col = 0;
    ScalarFn value;
};

class TimeMatrix {
public:
    TimeMatrix() = default;
    TimeMatrix(std::size_t n, std::vector<TimeVaryingEntry> entries);

    std::size_t dim() const noexcept { return n_; }
    bool is_zero() const noexcept { return entries_.empty(); }
    const std::vector<TimeVaryingEntry>& entries() const noexcept { return entries_; }

    RMatrix at(double t) const;
    // y += M(t) x
    void apply_add(double t, std::span<const double> x, std::span<double> y) const;
    MatrixFn as_function() const;

private:
    std::size_t n_ = 0;
    std::vector<TimeVaryingEntry> entries_;
};

struct Delay {
    ScalarFn h;
    double lower = 0.0;
    double upper = 0.0;

    static Delay constant(double value);
};

// One term coeff(t) * prod x_component(t - h_arg)^power, placed in output row.
struct MonomialFactor {
    std::size_t component = 0;
    // 0 = x(t), i >= 1 = x(t - h_i(t))
    std::size_t arg = 0;
    int power = 1;
};

struct Monomial {
    std::size_t row = 0;
    ScalarFn coeff;
    std::vector<MonomialFactor> factors;
};

// f(t, chi_0, ..., chi_m); args holds the m+1 argument vectors back to back.
using NonlinearEval =
    std::function<void(double t, std::span<const double> args, std::span<double> out)>;

struct Nonlinearity {
    // m + 1
    std::size_t arg_count = 1;
    NonlinearEval eval;
    // Present only for polynomial nonlinearities.
    std::optional<std::vector<Monomial>> monomials;
    bool vanishes_at_origin = true;
};

// Cubic structure f_row = -mu * x_source(t - h1)^3 used by the closed-form
// residual majorant of the oscillator models.
struct CubicTerm {
    std::size_t row = 0;
    std::size_t source = 0;
    double mu = 0.0;
};

enum class ModelKind { vdp, duffing, vdp_gauss, duffing_gauss, vdp_tanh, duffing_tanh };
enum class ModelBase { vdp, duffing };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);
ModelBase base_of(ModelKind kind);
bool is_polynomial(ModelKind kind);

struct DelaySystem {
    std::size_t n = 0;
    RMatrix A;
    TimeMatrix G;
    TimeMatrix E;
    Nonlinearity f;
    // Forcing F(t) = F0 * e(t) with sup |e(t)| = 1.
    double F0 = 0.0;
    std::function<void(double t, std::span<double> out)> e;
    // delays[0] = h0 (the E term), delays[i] = h_i for f's argument i.
    std::vector<Delay> delays;
    // Closed-form cubic structure, when the nonlinearity is pure cubic.
    std::vector<CubicTerm> cubic_terms;
    bool E_equals_G = false;
    std::string name;

    double min_delay() const;
    double max_delay() const;
    void forcing(double t, std::span<double> out) const;
    // Samples delays and forcing on [t0, t1] and throws ConfigError on
    // violations of 0 < h_lower <= h(t) <= h_upper or sup|e| > 1.
    void validate(double t0, double t1) const;
};

struct OscillatorParams {
    // Damping of the two oscillators.
    double c1 = 0.0, c2 = 0.0;
    double omega1_sq = 0.0, omega2_sq = 0.0;
    double d = 0.0;
    double a1 = 0.0, a2 = 0.0, b1 = 0.0, b2 = 0.0;
    double r1 = 0.0, r2 = 0.0, s1 = 0.0, s2 = 0.0;
    // mu1, mu2 scale the cubic terms on rows 2 and 4; mu3, mu4 scale the
    // Gaussian or tanh terms on the same rows.
    double mu1 = 0.0, mu2 = 0.0, mu3 = 0.0, mu4 = 0.0;
    double F0 = 0.0, omega0 = 0.0;
    double h0 = 0.0, h1 = 0.0;
    double q = 1.0;
    std::array<double, 4> x0{7.0, 7.0, 7.0, 7.0};
    double k1 = 1.0, k2 = 1.0;

    bool operator==(const OscillatorParams&) const = default;
};

void validate_params(const OscillatorParams& p, ModelKind kind);

RMatrix oscillator_matrix(const OscillatorParams& p);
double gaussian_density(double delta, double q);

DelaySystem build_vdp_system(const OscillatorParams& p);
DelaySystem build_duffing_system(const OscillatorParams& p);
DelaySystem build_gaussian_variant(const OscillatorParams& p, ModelBase base);
DelaySystem build_tanh_variant(const OscillatorParams& p, ModelBase base);
DelaySystem build_model(ModelKind kind, const OscillatorParams& p);

// Converts the state components into the argument layout of f and evaluates
// f at (t, x(t), x(t-h1), ...).
void eval_nonlinearity(const DelaySystem& sys, double t, std::span<const double> args,
                       std::span<double> out);

// Direct simulation of the full system with history phi (reference runs).
// Non-finite states end the run and flag the trajectory escaped.
Trajectory simulate(const DelaySystem& sys, const History& history, TimeSpan span,
                    const StepperConfig& cfg, StopPredicate stop_when = {});
Trajectory simulate(const DelaySystem& sys, std::span<const double> phi_s, TimeSpan span,
                    const StepperConfig& cfg, StopPredicate stop_when = {});

// Scalar majorant L(t, xi_0, ..., xi_m) with |f(t, chi)| <= L(t, |chi_0|, ...).
class PolynomialMajorant {
public:
    PolynomialMajorant() = default;
    PolynomialMajorant(std::vector<Monomial> monomials, std::vector<double> component_scale);

    double operator()(double t, std::span<const double> xi) const;
    std::size_t arg_count() const noexcept { return arg_count_; }

private:
    std::vector<Monomial> monomials_;
    std::vector<double> scale_;
    std::size_t arg_count_ = 1;
};

// Replaces |x_c(t - h_arg)| by scale_c * xi_arg and each coefficient by its
// absolute value. An empty scale means all ones. Non-positive powers are
// rejected with UnsupportedNonlinearity.
PolynomialMajorant polynomial_majorant(const std::vector<Monomial>& monomials,
                                       std::vector<double> component_scale = {});
// Throws UnsupportedNonlinearity when f has no polynomial description.
PolynomialMajorant polynomial_majorant(const Nonlinearity& f,
                                       std::vector<double> component_scale = {});

}  // namespace dbounds
