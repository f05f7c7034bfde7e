#include "delaybounds/majorant.hpp"

#include <cmath>
#include <memory>
#include <vector>

#include "delaybounds/errors.hpp"

namespace dbounds {

std::string to_string(MajorantConvention c) {
    return c == MajorantConvention::oscillator ? "oscillator" : "general";
}

MajorantConvention majorant_convention_from_string(const std::string& name) {
    if (name == "oscillator") return MajorantConvention::oscillator;
    if (name == "general") return MajorantConvention::general;
    throw ConfigError("unknown majorant convention '" + name + "'");
}

namespace {

bool use_oscillator_form(const DelaySystem& sys, const MajorantOptions& opts) {
    return opts.convention == MajorantConvention::oscillator && sys.E_equals_G;
}

}  // namespace

MajorantTables make_majorant_tables(const DelaySystem& sys, const EigenData& eig, TimeSpan span,
                                    double step, const MajorantOptions& opts) {
    const double spacing = effective_step(span, step) / 2.0;
    const MatrixFn G = sys.G.as_function();
    const MatrixFn E = sys.E.as_function();
    const double alpha1 = eig.alpha1;
    MajorantTables tables;
    if (use_oscillator_form(sys, opts)) {
        auto gx = std::make_shared<SampledFunction>(
            [G, &eig](double t) { return transformed_norm(G, eig, t); }, span.t0, span.t1,
            spacing);
        tables.lin_delay = *gx;
        tables.drift = SampledFunction([gx, alpha1](double t) { return alpha1 + (*gx)(t); },
                                       span.t0, span.t1, spacing);
    } else {
        tables.drift = SampledFunction(
            [G, &eig, alpha1](double t) { return alpha1 + g_norm(G, eig, t); }, span.t0, span.t1,
            spacing);
        tables.lin_delay = SampledFunction(
            [E, &eig](double t) { return transformed_norm(E, eig, t); }, span.t0, span.t1,
            spacing);
    }
    return tables;
}

MajorantSpec cubic_residual_majorant(const EigenData& eig, const DelaySystem& sys,
                                     const CascadeResult& cascade, std::size_t K,
                                     const MajorantOptions& opts, const MajorantTables* tables) {
    if (sys.cubic_terms.empty()) {
        throw UnsupportedNonlinearity(
            "no closed-form residual majorant for model '" + sys.name +
            "'; only cubic oscillator nonlinearities are supported");
    }
    if (K == 0 || cascade.K < K) {
        throw MissingIterate("cascade holds fewer than K iterates");
    }
    if (sys.delays.size() < 2) throw ConfigError("cubic majorant needs the h1 delay");
    if (sys.n > 16) throw ConfigError("cubic majorant supports at most 16 state components");

    const double gain = opts.nonlinear_vinv_factor ? eig.normVinv : 1.0;
    struct Term {
        std::size_t source;
        double mu;
        double kappa;
    };
    std::vector<Term> terms;
    double c3 = 0.0;
    for (const auto& ct : sys.cubic_terms) {
        const double mu = std::abs(ct.mu);
        const double kappa = eig.kappa(static_cast<Eigen::Index>(ct.source));
        terms.push_back({ct.source, mu, kappa});
        c3 += gain * mu * kappa * kappa * kappa;
    }

    const Trajectory* YK = &cascade.Y(K);
    const Trajectory* YK1 = K >= 2 ? &cascade.Y(K - 1) : nullptr;
    const Trajectory* yK = &cascade.y(K);
    const bool oscillator = use_oscillator_form(sys, opts);

    std::function<double(double)> drift_fn;
    std::function<double(double)> lin_fn;
    if (tables != nullptr) {
        drift_fn = tables->drift;
        lin_fn = tables->lin_delay;
    } else {
        const MatrixFn G = sys.G.as_function();
        const MatrixFn E = sys.E.as_function();
        const double alpha1 = eig.alpha1;
        if (oscillator) {
            drift_fn = [G, &eig, alpha1](double t) { return alpha1 + transformed_norm(G, eig, t); };
            lin_fn = [G, &eig](double t) { return transformed_norm(G, eig, t); };
        } else {
            drift_fn = [G, &eig, alpha1](double t) { return alpha1 + g_norm(G, eig, t); };
            lin_fn = [E, &eig](double t) { return transformed_norm(E, eig, t); };
        }
    }

    const std::size_t n = sys.n;
    const CMatrix Vinv = eig.Vinv;
    MajorantSpec spec;
    spec.c3 = c3;
    spec.convention = oscillator ? MajorantConvention::oscillator : MajorantConvention::general;
    spec.at = [=, &sys](double t) {
        MajorantCoefficients out;
        out.drift = drift_fn(t);
        out.lin_delay = lin_fn(t);

        double buf[16];
        double prev_buf[16];
        const double t1 = t - sys.delays[1].h(t);
        std::span<double> y_now(buf, n);
        YK->evaluate(t1, y_now);
        std::span<double> y_prev(prev_buf, n);
        if (YK1 != nullptr) {
            YK1->evaluate(t1, y_prev);
        } else {
            std::fill(y_prev.begin(), y_prev.end(), 0.0);
        }
        double nonlinear_offset = 0.0;
        for (const auto& term : terms) {
            const double y = y_now[term.source];
            const double yp = y_prev[term.source];
            const double ay = std::abs(y);
            out.c2 += 3.0 * gain * term.mu * term.kappa * term.kappa * ay;
            out.c1 += 3.0 * gain * term.mu * term.kappa * y * y;
            nonlinear_offset += term.mu * std::abs(y * y * y - yp * yp * yp);
        }

        // |V^-1 (G(t) y_K(t) + E(t) y_K(t - h0))|
        double w_buf[16];
        double lag_buf[16];
        std::span<double> w(w_buf, n);
        std::fill(w.begin(), w.end(), 0.0);
        if (!sys.G.is_zero() || !sys.E.is_zero()) {
            std::span<double> y_lag(lag_buf, n);
            yK->evaluate(t, y_now);
            sys.G.apply_add(t, y_now, w);
            yK->evaluate(t - sys.delays[0].h(t), y_lag);
            sys.E.apply_add(t, y_lag, w);
        }
        double forcing = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            std::complex<double> acc = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
                acc += Vinv(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * w[c];
            }
            forcing += std::norm(acc);
        }
        out.offset = gain * nonlinear_offset + std::sqrt(forcing);
        return out;
    };
    return spec;
}

}  // namespace dbounds
