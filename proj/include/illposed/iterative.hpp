#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "illposed/regmat.hpp"
#include "illposed/types.hpp"

namespace ip::iter {

// Shared stopping policy. A solver halts at max_iters, when the relative
// objective decrease falls below obj_tol, or (if set) when the residual norm
// reaches the discrepancy target.
struct StopRule {
    Index max_iters = 200;
    double obj_tol = 1e-8;
    std::optional<double> discrepancy_target;
};

struct HistoryRow {
    double objective = 0.0;
    double residual_norm = 0.0;
    double solution_norm = 0.0;
};

struct SolveReport {
    Vector x;
    std::vector<HistoryRow> history;  // one row per completed iteration
    std::string stop_reason;          // "max_iters", "objective_tol", "discrepancy", "breakdown"
    std::string warning;              // empty unless something was flagged but not fatal
    Index iterations = 0;
    // Filled by the ADMM-family solvers only.
    std::vector<double> primal_residuals;
    std::vector<double> dual_residuals;
};

// Writes "iteration,objective,residual,solution_norm" rows.
void write_history_csv(const std::string& path, const SolveReport& rep);

// Image-to-image map used by the plug-and-play and denoiser-driven solvers.
struct Denoiser {
    std::function<ImageGrid(const ImageGrid&)> fn;
    std::string name;
};

// Sliding median filter with an odd window, replicating borders.
Denoiser median_denoiser(Index win_h, Index win_w);

double soft_threshold(double v, double t);

// Largest singular value by power iteration on A^T A; deterministic start.
double estimate_sigma_max(const LinearOperator& A, Index iters = 100);

// Conjugate gradients on the normal equations in factored form. Residual
// norms are non-increasing; the solution norm grows monotonically.
SolveReport cgls(const LinearOperator& A, const Vector& y, const StopRule& stop);

// Richardson iteration x += step * A^T (y - A x). Requires 0 < step <
// 2 / sigma_max^2 for convergence; a violating step is flagged in
// report.warning and the run proceeds so the divergence is observable.
SolveReport landweber(const LinearOperator& A, const Vector& y, double step,
                      const StopRule& stop);

// Iterated Tikhonov with a receding reference: x_k solves the classical
// problem with x_ref = x_{k-1}, starting from x_0 = 0. The penalty term
// lambda^2 ||x_k - x_{k-1}||^2 decays toward zero as the iterates settle.
SolveReport disappearing_tikhonov(const Matrix& A, const Vector& y, double lambda,
                                  const StopRule& stop);

enum class IrlsInner { normal, stacked };

struct IrlsConfig {
    double epsilon = 1e-6;   // weight floor, keeps |r|^(p-2) finite at small residuals
    Index outer_iters = 30;
    IrlsInner inner = IrlsInner::normal;
};

// Iteratively reweighted least squares for sum |Ax-y|_i^p_fid +
// lambda^2 sum |L(x-x_ref)|_i^p_reg, both exponents in (0, 2].
SolveReport irls(const Matrix& A, const Vector& y, const IrlsConfig& cfg,
                 double fidelity_p, const reg::RegularizerSpec& r, double reg_p);

// Proximal gradient for ||Ax-y||^2 + lambda^2 ||x||_1. With momentum enabled
// this is the accelerated variant (restarting on objective increase); without
// it the plain iteration, whose objective is monotone. sigma_max_hint = 0
// means estimate it internally.
SolveReport fista(const LinearOperator& A, const Vector& y, double lambda,
                  const StopRule& stop, bool momentum = true,
                  double sigma_max_hint = 0.0, const Vector& x0 = Vector());

// Penalty choices for the operator-splitting solver below. l1 applies
// ||Lx||_1. The TV pair act on an h x w image stacked by columns:
// anisotropic sums |gradient| componentwise, isotropic sums the per-pixel
// Euclidean norm of (vertical, horizontal) differences.
struct L1Penalty {
    Matrix L;
};
struct TvAniso2d {
    Index h = 0, w = 0;
};
struct TvIso2d {
    Index h = 0, w = 0;
};
using SplitPenalty = std::variant<L1Penalty, TvAniso2d, TvIso2d>;

// Scaled ADMM on the split z = Dx for ||Ax-y||^2 + lambda^2 penalty(Dx).
// The x update solves (2 A^T A + rho D^T D) x = 2 A^T y + rho D^T (z - u)
// by warm-started conjugate gradients, so A and D never need to be dense.
SolveReport admm(const LinearOperator& A, const Vector& y, double lambda, double rho,
                 const SplitPenalty& penalty, const StopRule& stop);

// Maximum entropy: ||Ax-y||^2 + lambda^2 sum x_i log(omega_i x_i) over x > 0,
// by projected gradient descent with backtracking. Iterates are clipped to a
// small positive floor, never zero.
SolveReport maxent(const Matrix& A, const Vector& y, double lambda, const Vector& omega,
                   const StopRule& stop);

enum class RedScheme { fixed_point, steepest, admm };

// Regularization by denoising: E(x) = 1/2 ||Ax-y||^2 + lambda^2/2 x^T (x - f(x))
// where f is the denoiser. All three update schemes drive the same gradient
// A^T (Ax - y) + lambda^2 (x - f(x)) to zero. x is an h x w image stacked by
// columns so the denoiser can act on it.
SolveReport red(const Matrix& A, const Vector& y, double lambda, const Denoiser& d,
                RedScheme scheme, const StopRule& stop, Index img_h, Index img_w,
                double rho = 1.0);

// Plug-and-play ADMM: the z update is an off-the-shelf denoiser instead of a
// proximal map, coupled with weight rho * lambda^2. No objective is being
// minimized; the history records data fidelity for inspection.
SolveReport pnp_admm(const Matrix& A, const Vector& y, double lambda, const Denoiser& d,
                     double rho, const StopRule& stop, Index img_h, Index img_w);

}  // namespace ip::iter
