#include "delaybounds/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "delaybounds/errors.hpp"

namespace dbounds {

namespace {

void normalize_column(CMatrix& V, Eigen::Index j) {
    auto col = V.col(j);
    const double norm = col.norm();
    if (norm > 0.0) col /= norm;
    const double threshold = 1e-12;
    for (Eigen::Index i = 0; i < col.size(); ++i) {
        const double mag = std::abs(col(i));
        if (mag > threshold) {
            col *= std::conj(col(i)) / mag;
            col(i) = std::complex<double>(mag, 0.0);
            break;
        }
    }
}

}  // namespace

EigenData eigen_decompose(const RMatrix& A, double tol, EigenPolicy policy) {
    if (A.rows() != A.cols() || A.rows() == 0) {
        throw ConfigError("eigen_decompose: matrix must be square and non-empty");
    }
    const Eigen::Index n = A.rows();
    Eigen::EigenSolver<RMatrix> solver(A, true);
    if (solver.info() != Eigen::Success) {
        throw DefectiveMatrix("eigen_decompose: eigenvalue iteration did not converge");
    }
    const CVector raw_lambdas = solver.eigenvalues();
    const CMatrix raw_vectors = solver.eigenvectors();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const auto la = raw_lambdas(a);
        const auto lb = raw_lambdas(b);
        if (la.real() != lb.real()) return la.real() > lb.real();
        return la.imag() > lb.imag();
    });

    EigenData eig;
    eig.lambdas.resize(n);
    eig.V.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        eig.lambdas(j) = raw_lambdas(order[static_cast<std::size_t>(j)]);
        eig.V.col(j) = raw_vectors.col(order[static_cast<std::size_t>(j)]);
        normalize_column(eig.V, j);
    }
    // Conjugate pairs must carry conjugate columns; enforce it exactly so
    // kappa and the norms do not depend on solver rounding.
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        if (eig.lambdas(j).imag() > 0.0 &&
            std::abs(eig.lambdas(j + 1) - std::conj(eig.lambdas(j))) <=
                1e-12 * std::max(1.0, std::abs(eig.lambdas(j)))) {
            eig.lambdas(j + 1) = std::conj(eig.lambdas(j));
            eig.V.col(j + 1) = eig.V.col(j).conjugate();
        }
    }

    const double normA = std::max(induced_norm(A), std::numeric_limits<double>::min());
    double min_gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            min_gap = std::min(min_gap, std::abs(eig.lambdas(i) - eig.lambdas(j)));
        }
    }
    const bool repeated = min_gap <= std::sqrt(tol) * normA;
    if (repeated) {
        if (policy == EigenPolicy::strict) {
            std::ostringstream msg;
            msg << "eigen_decompose: eigenvalues are not simple (minimal gap " << min_gap << ")";
            throw DefectiveMatrix(msg.str());
        }
        eig.repeated_eigenvalues = true;
    }

    Eigen::FullPivLU<CMatrix> lu(eig.V);
    if (!lu.isInvertible()) throw DefectiveMatrix("eigen_decompose: eigenvector matrix is singular");
    eig.Vinv = lu.inverse();

    const CMatrix Ac = A.cast<std::complex<double>>();
    const double residual = (Ac * eig.V - eig.V * eig.lambdas.asDiagonal()).norm();
    const double inverse_residual =
        (eig.V * eig.Vinv - CMatrix::Identity(n, n)).norm();
    if (residual > tol * normA || inverse_residual > tol) {
        std::ostringstream msg;
        msg << "eigen_decompose: residuals " << residual << " / " << inverse_residual
            << " exceed tolerance " << tol;
        throw DefectiveMatrix(msg.str());
    }

    eig.alpha1 = eig.lambdas(0).real();
    eig.alphan = eig.lambdas(n - 1).real();
    eig.kappa = eig.V.cwiseAbs().rowwise().sum();
    eig.normV = induced_norm(eig.V);
    eig.normVinv = induced_norm(eig.Vinv);
    return eig;
}

double induced_norm(const CMatrix& M) {
    if (M.size() == 0) return 0.0;
    // sqrt of the largest eigenvalue of the Hermitian M^H M.
    const CMatrix gram = M.adjoint() * M;
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

double induced_norm(const RMatrix& M) {
    if (M.size() == 0) return 0.0;
    const RMatrix gram = M.transpose() * M;
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

double transformed_norm(const RMatrix& M, const EigenData& eig) {
    return induced_norm(CMatrix(eig.Vinv * M.cast<std::complex<double>>() * eig.V));
}

double transformed_norm(const MatrixFn& M, const EigenData& eig, double t) {
    return transformed_norm(M(t), eig);
}

double g_norm(const RMatrix& G, const EigenData& eig) {
    CMatrix g = eig.Vinv * G.cast<std::complex<double>>() * eig.V;
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, i) = std::complex<double>(g(i, i).real(), 0.0);
    return induced_norm(g);
}

double g_norm(const MatrixFn& G, const EigenData& eig, double t) {
    return g_norm(G(t), eig);
}

SampledFunction::SampledFunction(std::function<double(double)> fn, double t0, double t1,
                                 double spacing)
    : fn_(std::move(fn)), t0_(t0), spacing_(spacing) {
    if (!(spacing > 0.0) || !(t1 >= t0)) {
        throw ConfigError("SampledFunction: invalid grid");
    }
    const auto count = static_cast<std::size_t>(std::llround((t1 - t0) / spacing)) + 1;
    auto samples = std::make_shared<std::vector<double>>(count);
    for (std::size_t i = 0; i < count; ++i) {
        (*samples)[i] = fn_(t0 + static_cast<double>(i) * spacing);
    }
    samples_ = std::move(samples);
}

double SampledFunction::operator()(double t) const {
    if (samples_) {
        const double u = (t - t0_) / spacing_;
        const double r = std::nearbyint(u);
        if (std::abs(u - r) < 1e-7 && r >= 0.0 &&
            r < static_cast<double>(samples_->size())) {
            return (*samples_)[static_cast<std::size_t>(r)];
        }
    }
    return fn_(t);
}

}  // namespace dbounds
