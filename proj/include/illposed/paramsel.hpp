#pragma once

#include <string>

#include "illposed/core.hpp"
#include "illposed/types.hpp"

namespace ip::psel {

// n logarithmically spaced points from lo to hi inclusive.
Vector log_grid(double lo, double hi, Index n);

// Classical Tikhonov residual ||A x_lambda - y|| as a function of lambda,
// evaluated through a precomputed SVD. Monotone non-decreasing in lambda.
double residual_at(const core::SvdFactors& f, const Vector& y, double lambda);

struct LCurve {
    Vector lambdas;
    Vector residual_norms;  // ||A x_lambda - y||
    Vector seminorms;       // ||L x_lambda||
    Index corner_index = 0;
    double corner_lambda = 0.0;
};

// Traces the residual/seminorm trade-off over the grid and marks the corner:
// the interior point of maximal discrete three-point curvature in the log-log
// plane. Needs at least 5 grid points, all positive.
LCurve lcurve(const Matrix& A, const Vector& y, const Matrix& L, const Vector& lambdas);

void write_lcurve_csv(const std::string& path, const LCurve& lc);

struct GcvCurve {
    Vector lambdas;
    Vector values;
    Index argmin = 0;
    double lambda_star = 0.0;
};

// Generalized cross-validation for the classical penalty:
// G(lambda) = m ||A x_lambda - y||^2 / Tr(I - A A_lambda^+)^2 where the trace
// is m - sum of filter factors. Throws when the trace degenerates to zero
// (exactly determined system at lambda = 0).
GcvCurve gcv(const Matrix& A, const Vector& y, const Vector& lambdas);

// Single evaluation, reusing a factorization.
double gcv_value(const core::SvdFactors& f, const Vector& y, double lambda);

void write_gcv_csv(const std::string& path, const GcvCurve& gc);

// Morozov principle: bisect for the lambda whose residual matches delta to
// |.| <= 1e-6 * delta. Requires residual(lo) <= delta <= residual(hi); the
// bracket is checked up front. L = identity version runs off one SVD.
double discrepancy_lambda(const Matrix& A, const Vector& y, double delta, double lo,
                          double hi);

// General-penalty version, one regularized solve per bisection step.
double discrepancy_lambda(const Matrix& A, const Vector& y, const Matrix& L, double delta,
                          double lo, double hi);

}  // namespace ip::psel
