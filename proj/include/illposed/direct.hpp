#pragma once

#include <vector>

#include "illposed/regmat.hpp"
#include "illposed/types.hpp"

namespace ip::direct {

// Plain dense solve of a square system, no stabilization. Throws
// std::domain_error when the factorization is singular within tolerance.
Vector naive_solve(const Matrix& A, const Vector& y);

// (A^T A + lambda^2 L^T L)^-1 (A^T y + lambda^2 L^T L x_ref).
// Normal equations through LDLT; falls back to column-pivoted QR on the
// stacked form [A; lambda L] when the estimated condition exceeds 1e12.
Vector tikhonov_general(const Matrix& A, const Vector& y, const reg::RegularizerSpec& r);

// Classical Tikhonov through the data-space identity A^T (A A^T + lambda^2 I)^-1 y.
Vector tikhonov_data_form(const Matrix& A, const Vector& y, double lambda);

// Multi-term generalization: (A^T A + sum lambda_i^2 L_i^T L_i)^-1 (A^T y + sum ...).
Vector tikhonov_multi(const Matrix& A, const Vector& y,
                      const std::vector<reg::RegularizerSpec>& regs);

// Least squares on the vertically stacked system [A; lambda_1 L_1; ...] by
// column-pivoted QR. Agrees with tikhonov_multi; survives conditioning the
// normal equations cannot.
Vector stacked_solve(const Matrix& A, const Vector& y,
                     const std::vector<reg::RegularizerSpec>& regs);

// One Newton step on the quadratic functional ||Ax-y||^2 + sum lambda_i^2
// ||L_i(x - x_i*)||^2 from the given start. From x0 = 0 this lands exactly on
// the Tikhonov solution (the functional is quadratic).
Vector newton_step_quadratic(const Matrix& A, const Vector& y,
                             const std::vector<reg::RegularizerSpec>& regs,
                             const Vector& x0);

// Gaussian MAP data: minimize ||L_e(Ax - y - mu_e)||^2 + lambda^2 ||L_pr(x - mu_x)||^2.
struct GaussianModel {
    Matrix L_e;
    Vector mu_e;
    Matrix L_pr;
    Vector mu_x;
    double lambda = 1.0;
};

Vector map_gaussian(const Matrix& A, const Vector& y, const GaussianModel& model);

}  // namespace ip::direct
