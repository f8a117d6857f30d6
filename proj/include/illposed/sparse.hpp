#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "illposed/iterative.hpp"
#include "illposed/types.hpp"

namespace ip::sparse {

// Synthesis basis x = D s. Kept in functional form so separable transforms
// never materialize a kron product; to_dense() exists for small instances.
struct Dictionary {
    Index n = 0;  // signal length
    Index k = 0;  // number of atoms
    bool orthonormal = false;
    std::function<Vector(const Vector&)> apply_fn;    // atoms -> signal
    std::function<Vector(const Vector&)> apply_t_fn;  // signal -> atoms
    std::shared_ptr<const Matrix> dense;              // present when built dense

    Vector apply(const Vector& s) const;
    Vector apply_t(const Vector& x) const;
    Matrix to_dense() const;
};

Dictionary identity_dictionary(Index n);
Dictionary dense_dictionary(Matrix D, bool orthonormal);

// Orthonormal DCT-II basis: column k of the dense matrix is the k-th cosine
// atom c_k cos(pi (2i+1) k / (2n)), c_0 = sqrt(1/n), c_k = sqrt(2/n).
Dictionary dct_dictionary(Index n);

// Separable 2D version for h x w images stacked by columns.
Dictionary dct2_dictionary(Index h, Index w);

struct SynthesisResult {
    Vector s;  // coefficients
    Vector x;  // D s
    iter::SolveReport report;
};

// min ||A D s - y||^2 + lambda^2 ||s||_1 by the accelerated proximal method.
SynthesisResult synthesis_solve(const LinearOperator& A, const Vector& y,
                                const Dictionary& D, double lambda,
                                const iter::StopRule& stop);

// Tikhonov restricted to range(D): min over s of ||A D s - y||^2 + lambda^2 ||s||^2.
SynthesisResult projected_tikhonov(const Matrix& A, const Vector& y, const Dictionary& D,
                                   double lambda);

// General-form Tikhonov by substitution xbar = M x:
// min ||A M^-1 xbar - y||^2 + lambda^2 ||xbar||^2, returned in original
// coordinates. M must be square, invertible, condition below 1e10.
Vector standard_form_transform(const Matrix& A, const Vector& y, const Matrix& M,
                               double lambda);

// Seeded Gaussian measurement matrix, entries N(0, 1/m).
Matrix gaussian_measurement(Index m, Index n, std::uint64_t seed);

struct CsMetrics {
    Index m = 0;
    double recovery_error = 0.0;  // relative l2 error against the truth
    double support_f1 = 0.0;
};

struct CsResult {
    Vector x;  // recovered signal
    Vector s;  // recovered coefficients
    CsMetrics metrics;
    iter::SolveReport report;
};

// Basis-pursuit style recovery from y = Phi x_true: a descending sequence of
// l1 weights warm-starts the proximal solver down to lambda_final, which
// approximates the minimum-l1 interpolator among sparse candidates.
CsResult cs_recover_given(const Matrix& Phi, const Vector& x_true, const Dictionary& D,
                          double lambda_final, Index iters_per_stage = 60,
                          Index final_iters = 400);

// Convenience wrapper that draws Phi from the seeded Gaussian ensemble.
CsResult cs_recover(const Vector& x_true, const Dictionary& D, Index m, std::uint64_t seed,
                    double lambda_final = 1e-3, Index iters_per_stage = 60,
                    Index final_iters = 400);

// Writes "m,recovery_error,support_f1" rows.
void write_cs_csv(const std::string& path, const std::vector<CsMetrics>& rows);

}  // namespace ip::sparse
