#pragma once

#include "illposed/types.hpp"

namespace ip::core {

struct SvdFactors {
    Matrix U;       // m x m orthonormal
    Vector sigmas;  // min(m,n), non-increasing, >= 0
    Matrix Vt;      // n x n orthonormal
};

// lp norm. p >= 1 is the usual norm, p = inf the max norm, p = 0 counts
// entries with |x_i| > 1e-12, and 0 < p < 1 evaluates the same power formula
// (a quasi-norm, no triangle inequality).
double lp_norm(const Vector& v, double p);

// Full SVD with a fixed sign convention: the largest-magnitude entry of each
// column of U is made positive (ties broken by the first such entry), with
// the matching row of Vt flipped so U*S*Vt is unchanged.
SvdFactors svd(const Matrix& A);

// sigma_1 / sigma_r with sigma_r the smallest singular value above
// rank_tol*sigma_1. Returns +inf when everything below tolerance.
double condition_number(const Matrix& A, double rank_tol = 1e-12);
double condition_number(const SvdFactors& f, double rank_tol = 1e-12);

// (A^T A)^-1 A^T for full column rank; A^T (A A^T)^-1 for full row rank.
// Throws std::domain_error on rank deficiency past rank_tol.
Matrix pinv_left(const Matrix& A, double rank_tol = 1e-12);
Matrix pinv_right(const Matrix& A, double rank_tol = 1e-12);

}  // namespace ip::core
