#pragma once

#include <string>
#include <vector>

#include "illposed/iterative.hpp"
#include "illposed/types.hpp"

namespace ip::regress {

// Vandermonde design: columns t^0 .. t^degree.
Matrix design_poly(const Vector& t, Index degree);

// Trigonometric design: for each frequency k the pair cos(k t), sin(k t),
// interleaved in the given order. On a uniform grid covering a full period
// the columns are mutually orthogonal.
Matrix design_trig(const Vector& t, const std::vector<Index>& freqs);

// Ordinary least squares through the left pseudoinverse. Requires full
// column rank.
Vector ols(const Matrix& X, const Vector& y);

// min ||X b - y||^2 + lambda^2 ||b||^2.
Vector ridge(const Matrix& X, const Vector& y, double lambda);

// min ||X b - y||^2 + lambda^2 ||b||_1.
Vector lasso(const Matrix& X, const Vector& y, double lambda, const iter::StopRule& stop);

// min ||X b - y||^2 + l2^2 ||b||^2 + l1^2 ||b||_1, solved by augmenting the
// design with l2 I and reusing the l1 path.
Vector elastic_net(const Matrix& X, const Vector& y, double l1, double l2,
                   const iter::StopRule& stop);

// min ||X b - y||^2 + lambda^2 ||L b||_1 by operator splitting.
Vector gen_lasso(const Matrix& X, const Vector& y, const Matrix& L, double lambda,
                 double rho, const iter::StopRule& stop);

// Closed-form risk decomposition of ridge at the given penalty values. Here
// the penalty enters linearly (b = (X^T X + lambda I)^-1 X^T y), so lambda
// corresponds to the square of the solver weight above.
struct BiasVarianceRow {
    double lambda = 0.0;
    double variance = 0.0;
    double bias2 = 0.0;
    double mse = 0.0;
};

std::vector<BiasVarianceRow> ridge_bias_variance(const Matrix& X, const Vector& beta_true,
                                                 double noise_var, const Vector& lambda_grid);

// Writes "lambda,variance,bias2,mse" rows.
void write_bias_variance_csv(const std::string& path,
                             const std::vector<BiasVarianceRow>& rows);

}  // namespace ip::regress
