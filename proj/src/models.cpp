#include "delaybounds/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "delaybounds/errors.hpp"

namespace dbounds {

TimeMatrix::TimeMatrix(std::size_t n, std::vector<TimeVaryingEntry> entries)
    : n_(n), entries_(std::move(entries)) {
    for (const auto& e : entries_) {
        if (e.row >= n_ || e.col >= n_ || !e.value) {
            throw ConfigError("TimeMatrix: entry outside the matrix or without a value");
        }
    }
}

RMatrix TimeMatrix::at(double t) const {
    RMatrix M = RMatrix::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    for (const auto& e : entries_) {
        M(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) += e.value(t);
    }
    return M;
}

void TimeMatrix::apply_add(double t, std::span<const double> x, std::span<double> y) const {
    for (const auto& e : entries_) y[e.row] += e.value(t) * x[e.col];
}

MatrixFn TimeMatrix::as_function() const {
    return [m = *this](double t) { return m.at(t); };
}

Delay Delay::constant(double value) {
    return Delay{[value](double) { return value; }, value, value};
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::vdp: return "vdp";
        case ModelKind::duffing: return "duffing";
        case ModelKind::vdp_gauss: return "vdp_gauss";
        case ModelKind::duffing_gauss: return "duffing_gauss";
        case ModelKind::vdp_tanh: return "vdp_tanh";
        case ModelKind::duffing_tanh: return "duffing_tanh";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
    for (auto kind : {ModelKind::vdp, ModelKind::duffing, ModelKind::vdp_gauss,
                      ModelKind::duffing_gauss, ModelKind::vdp_tanh, ModelKind::duffing_tanh}) {
        if (to_string(kind) == name) return kind;
    }
    throw ConfigError("unknown model '" + name + "'");
}

ModelBase base_of(ModelKind kind) {
    switch (kind) {
        case ModelKind::vdp:
        case ModelKind::vdp_gauss:
        case ModelKind::vdp_tanh: return ModelBase::vdp;
        default: return ModelBase::duffing;
    }
}

bool is_polynomial(ModelKind kind) {
    return kind == ModelKind::vdp || kind == ModelKind::duffing;
}

double DelaySystem::min_delay() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& d : delays) m = std::min(m, d.lower);
    return m;
}

double DelaySystem::max_delay() const {
    double m = 0.0;
    for (const auto& d : delays) m = std::max(m, d.upper);
    return m;
}

void DelaySystem::forcing(double t, std::span<double> out) const {
    if (F0 == 0.0 || !e) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    e(t, out);
    for (double& v : out) v *= F0;
}

void DelaySystem::validate(double t0, double t1) const {
    if (n == 0 || A.rows() != static_cast<Eigen::Index>(n) || A.cols() != A.rows()) {
        throw ConfigError("DelaySystem: A must be n x n");
    }
    if (delays.empty()) throw ConfigError("DelaySystem: the h0 delay is required");
    if (delays.size() != f.arg_count) {
        throw ConfigError("DelaySystem: f must take one argument per delay (x(t) plus h1..hm)");
    }
    if (F0 < 0.0) throw ConfigError("DelaySystem: F0 must be nonnegative");
    constexpr int kSamples = 2000;
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < delays.size(); ++i) {
        const auto& d = delays[i];
        if (!(d.lower > 0.0) || !(d.upper >= d.lower) || !std::isfinite(d.upper)) {
            std::ostringstream msg;
            msg << "delay h" << i << " must satisfy 0 < lower <= upper < inf";
            throw ConfigError(msg.str());
        }
        for (int k = 0; k <= kSamples; ++k) {
            const double t = t0 + (t1 - t0) * k / kSamples;
            const double h = d.h(t);
            if (h < d.lower || h > d.upper) {
                std::ostringstream msg;
                msg << "delay h" << i << "(" << t << ") = " << h << " leaves [" << d.lower
                    << ", " << d.upper << "]";
                throw ConfigError(msg.str());
            }
        }
    }
    if (F0 > 0.0 && e) {
        for (int k = 0; k <= kSamples; ++k) {
            const double t = t0 + (t1 - t0) * k / kSamples;
            e(t, ev);
            double norm = 0.0;
            for (double v : ev) norm += v * v;
            if (std::sqrt(norm) > 1.0 + 1e-12) {
                throw ConfigError("forcing direction e(t) exceeds unit norm");
            }
        }
    }
}

void validate_params(const OscillatorParams& p, ModelKind kind) {
    auto fail = [](const std::string& what) { throw ConfigError("params: " + what); };
    if (!(p.omega1_sq > 0.0) || !(p.omega2_sq > 0.0)) fail("omega1_sq and omega2_sq must be > 0");
    if (!(p.h0 > 0.0) || !(p.h1 > 0.0)) fail("delays h0 and h1 must be > 0");
    if (p.F0 < 0.0) fail("F0 must be >= 0");
    if ((kind == ModelKind::vdp_gauss || kind == ModelKind::duffing_gauss) && !(p.q > 0.0)) {
        fail("q must be > 0");
    }
}

RMatrix oscillator_matrix(const OscillatorParams& p) {
    RMatrix A = RMatrix::Zero(4, 4);
    A(0, 1) = 1.0;
    A(1, 0) = -(p.omega1_sq + p.d);
    A(1, 1) = -p.c1;
    A(1, 2) = p.d;
    A(2, 3) = 1.0;
    A(3, 0) = p.d;
    A(3, 2) = -(p.omega2_sq + p.d);
    A(3, 3) = -p.c2;
    return A;
}

double gaussian_density(double delta, double q) {
    const double z = delta / q;
    return std::exp(-0.5 * z * z) / (q * std::sqrt(2.0 * std::numbers::pi));
}

namespace {

std::array<std::size_t, 2> source_components(ModelBase base) {
    return base == ModelBase::vdp ? std::array<std::size_t, 2>{1, 3}
                                  : std::array<std::size_t, 2>{0, 2};
}

DelaySystem linear_part(const OscillatorParams& p) {
    DelaySystem sys;
    sys.n = 4;
    sys.A = oscillator_matrix(p);
    std::vector<TimeVaryingEntry> g;
    if (p.a1 != 0.0 || p.a2 != 0.0) {
        g.push_back({1, 0, [a1 = p.a1, a2 = p.a2, r1 = p.r1, r2 = p.r2](double t) {
                         return -(a1 * std::sin(r1 * t) + a2 * std::sin(r2 * t));
                     }});
    }
    if (p.b1 != 0.0 || p.b2 != 0.0) {
        g.push_back({3, 2, [b1 = p.b1, b2 = p.b2, s1 = p.s1, s2 = p.s2](double t) {
                         return -(b1 * std::sin(s1 * t) + b2 * std::sin(s2 * t));
                     }});
    }
    sys.G = TimeMatrix(4, g);
    sys.E = sys.G;
    sys.E_equals_G = true;
    sys.F0 = p.F0;
    sys.e = [w = p.omega0](double t, std::span<double> out) {
        out[0] = 0.0;
        out[1] = std::sin(w * t);
        out[2] = 0.0;
        out[3] = 0.0;
    };
    sys.delays = {Delay::constant(p.h0), Delay::constant(p.h1)};
    return sys;
}

DelaySystem cubic_system(const OscillatorParams& p, ModelBase base) {
    DelaySystem sys = linear_part(p);
    const auto src = source_components(base);
    sys.cubic_terms = {CubicTerm{1, src[0], p.mu1}, CubicTerm{3, src[1], p.mu2}};
    sys.f.arg_count = 2;
    sys.f.eval = [terms = sys.cubic_terms](double, std::span<const double> args,
                                           std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        const auto delayed = args.subspan(4, 4);
        for (const auto& term : terms) {
            const double x = delayed[term.source];
            out[term.row] -= term.mu * x * x * x;
        }
    };
    std::vector<Monomial> monomials;
    for (const auto& term : sys.cubic_terms) {
        monomials.push_back(Monomial{term.row, [c = -term.mu](double) { return c; },
                                     {MonomialFactor{term.source, 1, 3}}});
    }
    sys.f.monomials = std::move(monomials);
    sys.f.vanishes_at_origin = true;
    return sys;
}

}  // namespace

DelaySystem build_vdp_system(const OscillatorParams& p) {
    validate_params(p, ModelKind::vdp);
    DelaySystem sys = cubic_system(p, ModelBase::vdp);
    sys.name = "vdp";
    return sys;
}

DelaySystem build_duffing_system(const OscillatorParams& p) {
    validate_params(p, ModelKind::duffing);
    DelaySystem sys = cubic_system(p, ModelBase::duffing);
    sys.name = "duffing";
    return sys;
}

DelaySystem build_gaussian_variant(const OscillatorParams& p, ModelBase base) {
    const ModelKind kind = base == ModelBase::vdp ? ModelKind::vdp_gauss : ModelKind::duffing_gauss;
    validate_params(p, kind);
    DelaySystem sys = linear_part(p);
    const auto src = source_components(base);
    sys.f.arg_count = 2;
    sys.f.eval = [src, mu1 = p.mu1, mu2 = p.mu2, mu3 = p.mu3, mu4 = p.mu4, q = p.q,
                  x0 = p.x0](double, std::span<const double> args, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        const auto delayed = args.subspan(4, 4);
        const double u = delayed[src[0]];
        const double v = delayed[src[1]];
        out[1] = -(mu1 * u * u * u + mu3 * gaussian_density(u - x0[src[0]], q));
        out[3] = -(mu2 * v * v * v + mu4 * gaussian_density(v - x0[src[1]], q));
    };
    sys.f.vanishes_at_origin = false;
    sys.name = to_string(kind);
    return sys;
}

DelaySystem build_tanh_variant(const OscillatorParams& p, ModelBase base) {
    const ModelKind kind = base == ModelBase::vdp ? ModelKind::vdp_tanh : ModelKind::duffing_tanh;
    validate_params(p, kind);
    DelaySystem sys = linear_part(p);
    const auto src = source_components(base);
    sys.f.arg_count = 2;
    sys.f.eval = [src, mu1 = p.mu1, mu2 = p.mu2, mu3 = p.mu3, mu4 = p.mu4, k1 = p.k1,
                  k2 = p.k2](double, std::span<const double> args, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        const auto delayed = args.subspan(4, 4);
        const double u = delayed[src[0]];
        const double v = delayed[src[1]];
        out[1] = -(mu1 * u * u * u + mu3 * std::tanh(k1 * u));
        out[3] = -(mu2 * v * v * v + mu4 * std::tanh(k2 * v));
    };
    sys.f.vanishes_at_origin = true;
    sys.name = to_string(kind);
    return sys;
}

DelaySystem build_model(ModelKind kind, const OscillatorParams& p) {
    switch (kind) {
        case ModelKind::vdp: return build_vdp_system(p);
        case ModelKind::duffing: return build_duffing_system(p);
        case ModelKind::vdp_gauss: return build_gaussian_variant(p, ModelBase::vdp);
        case ModelKind::duffing_gauss: return build_gaussian_variant(p, ModelBase::duffing);
        case ModelKind::vdp_tanh: return build_tanh_variant(p, ModelBase::vdp);
        case ModelKind::duffing_tanh: return build_tanh_variant(p, ModelBase::duffing);
    }
    throw ConfigError("unknown model kind");
}

void eval_nonlinearity(const DelaySystem& sys, double t, std::span<const double> args,
                       std::span<double> out) {
    sys.f.eval(t, args, out);
}

PolynomialMajorant::PolynomialMajorant(std::vector<Monomial> monomials,
                                       std::vector<double> component_scale)
    : monomials_(std::move(monomials)), scale_(std::move(component_scale)) {
    for (const auto& m : monomials_) {
        if (!m.coeff) throw UnsupportedNonlinearity("monomial without coefficient");
        for (const auto& factor : m.factors) {
            if (factor.power < 1) {
                throw UnsupportedNonlinearity("monomial factors must have positive integer powers");
            }
            arg_count_ = std::max(arg_count_, factor.arg + 1);
        }
    }
}

double PolynomialMajorant::operator()(double t, std::span<const double> xi) const {
    double total = 0.0;
    for (const auto& m : monomials_) {
        double term = std::abs(m.coeff(t));
        for (const auto& factor : m.factors) {
            const double s = factor.component < scale_.size() ? scale_[factor.component] : 1.0;
            const double base = s * xi[factor.arg];
            double p = 1.0;
            for (int k = 0; k < factor.power; ++k) p *= base;
            term *= p;
        }
        total += term;
    }
    return total;
}

PolynomialMajorant polynomial_majorant(const std::vector<Monomial>& monomials,
                                       std::vector<double> component_scale) {
    return PolynomialMajorant(monomials, std::move(component_scale));
}

PolynomialMajorant polynomial_majorant(const Nonlinearity& f, std::vector<double> component_scale) {
    if (!f.monomials) {
        throw UnsupportedNonlinearity(
            "nonlinearity has no polynomial description; use the |Y_K| threshold method");
    }
    return PolynomialMajorant(*f.monomials, std::move(component_scale));
}

}  // namespace dbounds
