#pragma once

// Eigenbasis of the constant part A and the norms that the scalar bounds use.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <vector>

namespace dbounds {

using RMatrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

using MatrixFn = std::function<RMatrix(double t)>;

enum class EigenPolicy { strict, permissive };

struct EigenData {
    // Columns are unit 2-norm eigenvectors whose first nonzero entry is real
    // and positive.
    CMatrix V;
    CMatrix Vinv;
    // Sorted by descending real part, ties by descending imaginary part.
    CVector lambdas;
    double alpha1 = 0.0;
    double alphan = 0.0;
    // kappa_i = sum_k |v_ik|
    Eigen::VectorXd kappa;
    double normV = 0.0;
    double normVinv = 0.0;
    // Set under the permissive policy when eigenvalues coincide.
    bool repeated_eigenvalues = false;
};

// Throws DefectiveMatrix when eigenvalues repeat (strict policy) or when the
// residuals ||AV - V diag(l)|| <= tol*||A|| and ||V Vinv - I|| <= tol fail.
EigenData eigen_decompose(const RMatrix& A, double tol = 1e-10,
                          EigenPolicy policy = EigenPolicy::strict);

// Largest singular value.
double induced_norm(const CMatrix& M);
double induced_norm(const RMatrix& M);

// |V^{-1} M V|
double transformed_norm(const RMatrix& M, const EigenData& eig);
double transformed_norm(const MatrixFn& M, const EigenData& eig, double t);

// |g(t)| with g = G_x - i Im(diag G_x), G_x = V^{-1} G(t) V.
double g_norm(const RMatrix& G, const EigenData& eig);
double g_norm(const MatrixFn& G, const EigenData& eig, double t);

// Samples a scalar function of time on a uniform grid so that repeated
// evaluation at RK4 stage times is a lookup. Off-grid queries fall back to
// the function itself.
class SampledFunction {
public:
    SampledFunction() = default;
    SampledFunction(std::function<double(double)> fn, double t0, double t1, double spacing);

    double operator()(double t) const;
    double spacing() const noexcept { return spacing_; }

private:
    std::function<double(double)> fn_;
    std::shared_ptr<const std::vector<double>> samples_;
    double t0_ = 0.0;
    double spacing_ = 0.0;
};

}  // namespace dbounds
