#include "illposed/regression.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "illposed/core.hpp"
#include "illposed/csv.hpp"
#include "illposed/direct.hpp"

namespace ip::regress {

Matrix design_poly(const Vector& t, Index degree) {
    if (degree < 0) throw std::invalid_argument("design_poly: negative degree");
    if (t.size() < 1) throw std::invalid_argument("design_poly: empty node set");
    Matrix X(t.size(), degree + 1);
    X.col(0).setOnes();
    for (Index d = 1; d <= degree; ++d) X.col(d) = X.col(d - 1).cwiseProduct(t);
    return X;
}

Matrix design_trig(const Vector& t, const std::vector<Index>& freqs) {
    if (freqs.empty()) throw std::invalid_argument("design_trig: no frequencies");
    if (t.size() < 1) throw std::invalid_argument("design_trig: empty node set");
    Matrix X(t.size(), 2 * (Index)freqs.size());
    for (std::size_t q = 0; q < freqs.size(); ++q) {
        Index k = freqs[q];
        if (k < 1) throw std::invalid_argument("design_trig: frequencies must be positive");
        for (Index i = 0; i < t.size(); ++i) {
            X(i, 2 * (Index)q) = std::cos((double)k * t(i));
            X(i, 2 * (Index)q + 1) = std::sin((double)k * t(i));
        }
    }
    return X;
}

Vector ols(const Matrix& X, const Vector& y) {
    if (y.size() != X.rows()) throw std::invalid_argument("ols: y length mismatch");
    return core::pinv_left(X) * y;
}

Vector ridge(const Matrix& X, const Vector& y, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("ridge: negative lambda");
    return direct::tikhonov_general(
        X, y, reg::RegularizerSpec(Matrix::Identity(X.cols(), X.cols()), lambda));
}

Vector lasso(const Matrix& X, const Vector& y, double lambda, const iter::StopRule& stop) {
    return iter::fista(LinearOperator::from_matrix(X), y, lambda, stop).x;
}

Vector elastic_net(const Matrix& X, const Vector& y, double l1, double l2,
                   const iter::StopRule& stop) {
    if (l1 < 0.0 || l2 < 0.0) throw std::invalid_argument("elastic_net: negative weight");
    const Index n = X.cols();
    Matrix Xa(X.rows() + n, n);
    Xa.topRows(X.rows()) = X;
    Xa.bottomRows(n) = l2 * Matrix::Identity(n, n);
    Vector ya = Vector::Zero(X.rows() + n);
    ya.head(X.rows()) = y;
    return iter::fista(LinearOperator::from_matrix(Xa), ya, l1, stop).x;
}

Vector gen_lasso(const Matrix& X, const Vector& y, const Matrix& L, double lambda,
                 double rho, const iter::StopRule& stop) {
    return iter::admm(LinearOperator::from_matrix(X), y, lambda, rho,
                      iter::L1Penalty{L}, stop)
        .x;
}

std::vector<BiasVarianceRow> ridge_bias_variance(const Matrix& X, const Vector& beta_true,
                                                 double noise_var, const Vector& lambda_grid) {
    if (beta_true.size() != X.cols())
        throw std::invalid_argument("ridge_bias_variance: beta length mismatch");
    if (noise_var < 0.0) throw std::invalid_argument("ridge_bias_variance: negative variance");
    core::SvdFactors f = core::svd(X);
    const Matrix XtX = X.transpose() * X;
    std::vector<BiasVarianceRow> rows;
    rows.reserve((std::size_t)lambda_grid.size());
    for (Index q = 0; q < lambda_grid.size(); ++q) {
        const double lam = lambda_grid(q);
        if (lam < 0.0) throw std::invalid_argument("ridge_bias_variance: negative lambda");
        BiasVarianceRow row;
        row.lambda = lam;
        for (Index i = 0; i < f.sigmas.size(); ++i) {
            const double s2 = f.sigmas(i) * f.sigmas(i);
            const double d = s2 + lam;
            if (d > 0.0) row.variance += noise_var * s2 / (d * d);
        }
        Matrix N = XtX;
        N.diagonal().array() += lam;
        Vector v = N.ldlt().solve(beta_true);
        row.bias2 = lam * lam * v.squaredNorm();
        row.mse = row.variance + row.bias2;
        rows.push_back(row);
    }
    return rows;
}

void write_bias_variance_csv(const std::string& path,
                             const std::vector<BiasVarianceRow>& rows) {
    CsvWriter csv(path, "lambda,variance,bias2,mse");
    for (const auto& r : rows) csv.row({r.lambda, r.variance, r.bias2, r.mse});
    if (!csv.good()) throw std::runtime_error("write_bias_variance_csv: failed writing " + path);
}

}  // namespace ip::regress
