#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "delaybounds/models.hpp"
#include "delaybounds/spectral.hpp"

namespace dbtest {

// Linear part as listed for the coupled oscillators, d = 0.1, unit cubic scales.
inline dbounds::OscillatorParams oscillator_params() {
    dbounds::OscillatorParams p;
    p.c1 = 0.4;
    p.c2 = 0.2;
    p.omega1_sq = 1.0;
    p.omega2_sq = 4.0;
    p.d = 0.1;
    p.a1 = p.a2 = p.b1 = p.b2 = 0.1;
    p.r1 = 3.14;
    p.r2 = 6.15;
    p.s1 = 3.1;
    p.s2 = 6.28;
    p.omega0 = 5.43;
    p.F0 = 0.0;
    p.mu1 = p.mu2 = 1.0;
    p.h0 = 0.5;
    p.h1 = 1.0;
    return p;
}

inline dbounds::OscillatorParams linear_params() {
    auto p = oscillator_params();
    p.mu1 = p.mu2 = 0.0;
    p.a1 = p.a2 = p.b1 = p.b2 = 0.0;
    return p;
}

// |exp(A t) phi| by the matrix exponential.
inline double linear_norm(const dbounds::RMatrix& A, std::span<const double> phi, double t) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(phi.size()));
    for (std::size_t i = 0; i < phi.size(); ++i) v(static_cast<Eigen::Index>(i)) = phi[i];
    const dbounds::RMatrix M = (A * t).exp();
    return (M * v).norm();
}

inline double norm(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

}  // namespace dbtest
