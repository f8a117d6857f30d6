#include "illposed/core.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ip::core {

double lp_norm(const Vector& v, double p) {
    if (std::isnan(p) || p < 0.0) throw std::domain_error("lp_norm: p must be >= 0");
    if (std::isinf(p)) return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
    if (p == 0.0) {
        Index count = 0;
        for (Index i = 0; i < v.size(); ++i)
            if (std::abs(v[i]) > 1e-12) ++count;
        return static_cast<double>(count);
    }
    double acc = 0.0;
    for (Index i = 0; i < v.size(); ++i) acc += std::pow(std::abs(v[i]), p);
    return std::pow(acc, 1.0 / p);
}

SvdFactors svd(const Matrix& A) {
    if (!A.allFinite()) throw std::invalid_argument("svd: non-finite input");
    Eigen::BDCSVD<Matrix> dec(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SvdFactors f;
    f.U = dec.matrixU();
    f.Vt = dec.matrixV().transpose();
    f.sigmas = dec.singularValues();

    // Sign convention: largest-magnitude entry of each U column positive.
    const Index m = f.U.rows(), n = f.Vt.rows();
    const Index r = std::min(m, n);
    for (Index j = 0; j < f.U.cols(); ++j) {
        Index imax = 0;
        f.U.col(j).cwiseAbs().maxCoeff(&imax);
        if (f.U(imax, j) < 0.0) {
            f.U.col(j) = -f.U.col(j);
            if (j < r && j < f.Vt.rows()) f.Vt.row(j) = -f.Vt.row(j);
        }
    }
    return f;
}

double condition_number(const SvdFactors& f, double rank_tol) {
    if (f.sigmas.size() == 0 || f.sigmas[0] <= 0.0)
        throw std::domain_error("condition_number: zero matrix");
    const double s1 = f.sigmas[0];
    double sr = -1.0;
    for (Index i = 0; i < f.sigmas.size(); ++i)
        if (f.sigmas[i] > rank_tol * s1) sr = f.sigmas[i];
    if (sr <= 0.0) return std::numeric_limits<double>::infinity();
    return s1 / sr;
}

double condition_number(const Matrix& A, double rank_tol) {
    return condition_number(svd(A), rank_tol);
}

Matrix pinv_left(const Matrix& A, double rank_tol) {
    SvdFactors f = svd(A);
    const double s1 = f.sigmas.size() ? f.sigmas[0] : 0.0;
    if (s1 <= 0.0 || f.sigmas[f.sigmas.size() - 1] <= rank_tol * s1 ||
        A.rows() < A.cols())
        throw std::domain_error("pinv_left: A^T A singular (rank deficient)");
    Matrix N = A.transpose() * A;
    return N.ldlt().solve(A.transpose());
}

Matrix pinv_right(const Matrix& A, double rank_tol) {
    SvdFactors f = svd(A);
    const double s1 = f.sigmas.size() ? f.sigmas[0] : 0.0;
    if (s1 <= 0.0 || f.sigmas[f.sigmas.size() - 1] <= rank_tol * s1 ||
        A.cols() < A.rows())
        throw std::domain_error("pinv_right: A A^T singular (rank deficient)");
    Matrix N = A * A.transpose();
    return Matrix(N.ldlt().solve(A).transpose());
}

}  // namespace ip::core
