#pragma once

#include <string>

#include "illposed/core.hpp"
#include "illposed/types.hpp"

namespace ip::spectral {

struct PicardTable {
    Vector sigmas;  // non-increasing
    Vector coeffs;  // |u_i^T y|
    Vector ratios;  // coeffs / sigmas
};

struct FilterFactors {
    Vector phi;  // aligned with sigmas, each in [0,1]
};

enum class Illposedness { mild, moderate, severe };

struct Classification {
    Illposedness kind;
    double alpha_hat;  // exponent of the power-law fit sigma_i ~ i^-alpha
};

PicardTable picard_table(const core::SvdFactors& f, const Vector& y);

// Writes "index,sigma,coeff,ratio" rows.
void write_picard_csv(const std::string& path, const PicardTable& t);

// Fits log(sigma_i) against log(i) (power law, slope -alpha_hat) and against
// i (exponential). Smaller exponential residual -> severe; otherwise mild
// when alpha_hat <= 1, moderate above. Needs >= 8 positive sigmas.
Classification classify_illposedness(const Vector& sigmas);

// Truncated SVD solution sum_{i<k} (u_i^T y / sigma_i) v_i.
Vector tsvd_solve(const core::SvdFactors& f, const Vector& y, Index k,
                  double rank_tol = 1e-12);

struct TsvdKind { Index k; };
struct TikhonovKind {};
struct DampedKind {};

FilterFactors filter_factors(const Vector& sigmas, double lambda, TikhonovKind);
FilterFactors filter_factors(const Vector& sigmas, double lambda, DampedKind);
FilterFactors filter_factors(const Vector& sigmas, double lambda, TsvdKind kind);

// sum_i phi_i (u_i^T y / sigma_i) v_i with Tikhonov factors.
Vector tikhonov_svd_solve(const core::SvdFactors& f, const Vector& y, double lambda);

}  // namespace ip::spectral
