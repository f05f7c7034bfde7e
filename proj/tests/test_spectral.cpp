#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "delaybounds/errors.hpp"
#include "delaybounds/models.hpp"
#include "delaybounds/spectral.hpp"
#include "support.hpp"

using namespace dbounds;
using cd = std::complex<double>;

namespace {

// roots of l^2 + c l + w2 = 0
std::pair<cd, cd> companion_roots(double c, double w2) {
    const cd disc = std::sqrt(cd(c * c - 4.0 * w2, 0.0));
    return {(-c + disc) / 2.0, (-c - disc) / 2.0};
}

double sigma_max(const CMatrix& M) {
    Eigen::JacobiSVD<CMatrix> svd(M);
    return svd.singularValues()(0);
}

}  // namespace

TEST_CASE("uncoupled oscillator eigenvalues from the quadratic formula") {
    auto p = dbtest::oscillator_params();
    p.d = 0.0;
    const EigenData eig = eigen_decompose(oscillator_matrix(p));
    const auto [a, b] = companion_roots(0.2, 4.0);
    const auto [c, d] = companion_roots(0.4, 1.0);
    const std::vector<cd> expected{a, b, c, d};  // -0.1 +- 1.9975i, -0.2 +- 0.9798i
    REQUIRE(eig.lambdas.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(eig.lambdas(i) - expected[static_cast<std::size_t>(i)]) < 1e-9);
    }
    CHECK(std::abs(eig.lambdas(0).imag() - 1.99750) < 1e-5);
    CHECK(std::abs(eig.lambdas(2).imag() - 0.97980) < 1e-5);
    CHECK(eig.alpha1 == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(eig.alphan == doctest::Approx(-0.2).epsilon(1e-12));
}

TEST_CASE("residual invariants hold for the coupled matrix") {
    const RMatrix A = oscillator_matrix(dbtest::oscillator_params());
    const EigenData eig = eigen_decompose(A);
    const CMatrix Ac = A.cast<cd>();
    CHECK(sigma_max(Ac * eig.V - eig.V * eig.lambdas.asDiagonal().toDenseMatrix()) <=
          1e-10 * sigma_max(Ac));
    CHECK(sigma_max(eig.V * eig.Vinv - CMatrix::Identity(4, 4)) <= 1e-10);
    for (int i = 0; i + 1 < 4; ++i) CHECK(eig.lambdas(i).real() >= eig.lambdas(i + 1).real());
    for (int i = 0; i < 4; ++i) CHECK(eig.kappa(i) >= eig.V.row(i).norm() - 1e-15);
    CHECK(eig.normV == doctest::Approx(sigma_max(eig.V)).epsilon(1e-10));
    CHECK(eig.normVinv == doctest::Approx(sigma_max(eig.Vinv)).epsilon(1e-10));
}

TEST_CASE("eigenvector normalization convention") {
    const EigenData eig = eigen_decompose(oscillator_matrix(dbtest::oscillator_params()));
    for (int c = 0; c < 4; ++c) {
        CHECK(eig.V.col(c).norm() == doctest::Approx(1.0).epsilon(1e-12));
        int first = 0;
        while (std::abs(eig.V(first, c)) < 1e-14) ++first;
        CHECK(eig.V(first, c).imag() == 0.0);
        CHECK(eig.V(first, c).real() > 0.0);
    }
    // conjugate eigenvalue pairs carry conjugate columns
    for (int c = 0; c + 1 < 4; c += 2) {
        CHECK(std::abs(eig.lambdas(c) - std::conj(eig.lambdas(c + 1))) < 1e-12);
        CHECK((eig.V.col(c) - eig.V.col(c + 1).conjugate()).norm() < 1e-12);
    }
}

TEST_CASE("repeated eigenvalues: strict rejects, permissive flags") {
    const RMatrix I = RMatrix::Identity(4, 4);
    CHECK_THROWS_AS(eigen_decompose(I), DefectiveMatrix);
    const EigenData eig = eigen_decompose(I, 1e-10, EigenPolicy::permissive);
    CHECK(eig.repeated_eigenvalues);
    CHECK(sigma_max(eig.V - CMatrix::Identity(4, 4)) < 1e-12);
    CHECK(eig.alpha1 == 1.0);
}

TEST_CASE("diagonal matrix") {
    RMatrix A = RMatrix::Zero(2, 2);
    A(0, 0) = -1.0;
    A(1, 1) = -2.0;
    const EigenData eig = eigen_decompose(A);
    CHECK(sigma_max(eig.V - CMatrix::Identity(2, 2)) < 1e-14);
    CHECK(eig.kappa(0) == doctest::Approx(1.0));
    CHECK(eig.kappa(1) == doctest::Approx(1.0));
    CHECK(eig.alpha1 == -1.0);
}

TEST_CASE("reconstruction on random well-conditioned matrices") {
    std::mt19937 gen(7);
    std::normal_distribution<double> dist;
    int tested = 0;
    for (int trial = 0; trial < 40 && tested < 20; ++trial) {
        RMatrix A(4, 4);
        for (int i = 0; i < 16; ++i) A(i / 4, i % 4) = dist(gen);
        EigenData eig;
        try {
            eig = eigen_decompose(A, 1e-8);
        } catch (const DefectiveMatrix&) {
            continue;
        }
        if (eig.normV * eig.normVinv > 1e3) continue;
        ++tested;
        const CMatrix R = eig.V * eig.lambdas.asDiagonal().toDenseMatrix() * eig.Vinv;
        CHECK(sigma_max(R - A.cast<cd>()) <= 1e-8 * sigma_max(A.cast<cd>()));
    }
    CHECK(tested >= 10);
}

TEST_CASE("g_norm and transformed_norm") {
    const EigenData eig = eigen_decompose(oscillator_matrix(dbtest::oscillator_params()));
    CHECK(g_norm(RMatrix::Zero(4, 4), eig) == 0.0);
    CHECK(transformed_norm(RMatrix::Zero(4, 4), eig) == 0.0);
    CHECK(transformed_norm(RMatrix::Identity(4, 4), eig) == doctest::Approx(1.0).epsilon(1e-10));

    // real diagonal G in a real eigenbasis: D vanishes, g_norm = |G|
    RMatrix A = RMatrix::Zero(3, 3);
    A.diagonal() << -1.0, -2.0, -3.0;
    const EigenData real_eig = eigen_decompose(A);
    RMatrix G = RMatrix::Zero(3, 3);
    G.diagonal() << 0.3, -0.7, 0.2;
    CHECK(g_norm(G, real_eig) == doctest::Approx(0.7).epsilon(1e-12));

    const auto p = dbtest::oscillator_params();
    const DelaySystem sys = build_vdp_system(p);
    const MatrixFn Gt = sys.G.as_function();
    CHECK(g_norm(Gt, eig, 0.0) == 0.0);

    // dense oracle at t = 0.25 for the d = 0 eigenbasis
    auto p0 = p;
    p0.d = 0.0;
    const EigenData eig0 = eigen_decompose(oscillator_matrix(p0));
    const RMatrix G25 = build_vdp_system(p0).G.at(0.25);
    const CMatrix Gx = eig0.V.inverse() * G25.cast<cd>() * eig0.V;
    CHECK(transformed_norm(G25, eig0) == doctest::Approx(sigma_max(Gx)).epsilon(1e-10));
    CHECK(transformed_norm(G25, eig0) > 0.0);
}

TEST_CASE("submultiplicative sanity bound on g_norm") {
    const EigenData eig = eigen_decompose(oscillator_matrix(dbtest::oscillator_params()));
    const DelaySystem sys = build_vdp_system(dbtest::oscillator_params());
    for (int i = 0; i < 200; ++i) {
        const double t = 0.37 * i;
        const RMatrix G = sys.G.at(t);
        CHECK(g_norm(G, eig) <= eig.normVinv * induced_norm(G) * eig.normV + 1e-12);
    }
}

TEST_CASE("kappa follows column scaling") {
    // kappa_i = sum_k |v_ik| scales with positive column factors
    const EigenData eig = eigen_decompose(oscillator_matrix(dbtest::oscillator_params()));
    Eigen::Vector4d s(2.0, 0.5, 3.0, 1.5);
    const CMatrix Vs = eig.V * s.cast<cd>().asDiagonal();
    for (int i = 0; i < 4; ++i) {
        double k = 0.0;
        for (int c = 0; c < 4; ++c) k += std::abs(Vs(i, c));
        double expect = 0.0;
        for (int c = 0; c < 4; ++c) expect += s(c) * std::abs(eig.V(i, c));
        CHECK(k == doctest::Approx(expect));
    }
}

TEST_CASE("sampled function matches its source") {
    SampledFunction f([](double t) { return std::sin(t); }, 0.0, 10.0, 0.005);
    CHECK(f(0.005 * 37) == std::sin(0.005 * 37));
    CHECK(f(1.23456) == doctest::Approx(std::sin(1.23456)));
    CHECK(f(11.0) == doctest::Approx(std::sin(11.0)));
}
