#include "illposed/iterative.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "illposed/csv.hpp"
#include "illposed/operators.hpp"

namespace ip::iter {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative-decrease stopping shared by every solver with a real objective.
bool objective_settled(double prev, double cur, double tol) {
    if (tol <= 0.0) return false;
    if (!std::isfinite(prev) || !std::isfinite(cur)) return false;
    return std::abs(prev - cur) <= tol * std::max(1.0, std::abs(prev));
}

bool hit_discrepancy(const StopRule& stop, double residual_norm) {
    return stop.discrepancy_target && residual_norm <= *stop.discrepancy_target;
}

Vector deterministic_unit(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = ops::counter_normal(0x9e3779b9ULL, (uint64_t)i);
    double nrm = v.norm();
    if (nrm == 0.0) v.setConstant(1.0 / std::sqrt((double)n));
    else v /= nrm;
    return v;
}

}  // namespace

void write_history_csv(const std::string& path, const SolveReport& rep) {
    CsvWriter csv(path, "iteration,objective,residual,solution_norm");
    for (std::size_t k = 0; k < rep.history.size(); ++k) {
        const auto& h = rep.history[k];
        csv.row({(double)(k + 1), h.objective, h.residual_norm, h.solution_norm});
    }
    if (!csv.good()) throw std::runtime_error("write_history_csv: failed writing " + path);
}

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

double estimate_sigma_max(const LinearOperator& A, Index iters) {
    Vector v = deterministic_unit(A.cols());
    double s2 = 0.0;
    for (Index k = 0; k < iters; ++k) {
        Vector w = A.apply_transpose(A.apply(v));
        double nrm = w.norm();
        if (nrm == 0.0) return 0.0;
        s2 = nrm;  // Rayleigh quotient of A^T A at the current unit vector
        v = w / nrm;
    }
    return std::sqrt(s2);
}

Denoiser median_denoiser(Index win_h, Index win_w) {
    if (win_h < 1 || win_w < 1 || win_h % 2 == 0 || win_w % 2 == 0)
        throw std::invalid_argument("median_denoiser: window sides must be odd and positive");
    auto fn = [win_h, win_w](const ImageGrid& in) {
        ImageGrid out(in.height, in.width);
        const Index rh = win_h / 2, rw = win_w / 2;
        std::vector<double> buf((std::size_t)(win_h * win_w));
        for (Index i = 0; i < in.height; ++i) {
            for (Index j = 0; j < in.width; ++j) {
                std::size_t c = 0;
                for (Index di = -rh; di <= rh; ++di) {
                    Index si = std::clamp<Index>(i + di, 0, in.height - 1);
                    for (Index dj = -rw; dj <= rw; ++dj) {
                        Index sj = std::clamp<Index>(j + dj, 0, in.width - 1);
                        buf[c++] = in(si, sj);
                    }
                }
                auto mid = buf.begin() + (long)(buf.size() / 2);
                std::nth_element(buf.begin(), mid, buf.end());
                out(i, j) = *mid;
            }
        }
        return out;
    };
    return Denoiser{fn, "median" + std::to_string(win_h) + "x" + std::to_string(win_w)};
}

SolveReport cgls(const LinearOperator& A, const Vector& y, const StopRule& stop) {
    if (y.size() != A.rows()) throw std::invalid_argument("cgls: y length mismatch");
    SolveReport rep;
    Vector x = Vector::Zero(A.cols());
    Vector r = y;
    Vector s = A.apply_transpose(r);
    Vector p = s;
    double gamma = s.squaredNorm();
    const double gamma0 = gamma;
    double prev_obj = kInf;
    rep.stop_reason = "max_iters";
    for (Index k = 0; k < stop.max_iters; ++k) {
        if (gamma <= 1e-28 * std::max(1.0, gamma0)) {
            rep.stop_reason = "breakdown";
            break;
        }
        Vector q = A.apply(p);
        double qq = q.squaredNorm();
        if (qq == 0.0) {
            rep.stop_reason = "breakdown";
            break;
        }
        double alpha = gamma / qq;
        x += alpha * p;
        r -= alpha * q;
        s = A.apply_transpose(r);
        double gamma_new = s.squaredNorm();
        p = s + (gamma_new / gamma) * p;
        gamma = gamma_new;

        double obj = r.squaredNorm();
        rep.history.push_back({obj, r.norm(), x.norm()});
        ++rep.iterations;
        if (hit_discrepancy(stop, r.norm())) {
            rep.stop_reason = "discrepancy";
            break;
        }
        if (objective_settled(prev_obj, obj, stop.obj_tol)) {
            rep.stop_reason = "objective_tol";
            break;
        }
        prev_obj = obj;
    }
    rep.x = x;
    return rep;
}

SolveReport landweber(const LinearOperator& A, const Vector& y, double step,
                      const StopRule& stop) {
    if (y.size() != A.rows()) throw std::invalid_argument("landweber: y length mismatch");
    if (step <= 0.0) throw std::invalid_argument("landweber: step must be positive");
    SolveReport rep;
    const double smax = estimate_sigma_max(A);
    if (smax > 0.0 && step >= 2.0 / (smax * smax))
        rep.warning = "step exceeds 2/sigma_max^2, iteration may diverge";

    Vector x = Vector::Zero(A.cols());
    double prev_obj = kInf;
    rep.stop_reason = "max_iters";
    for (Index k = 0; k < stop.max_iters; ++k) {
        Vector r = y - A.apply(x);
        x += step * A.apply_transpose(r);
        Vector rn = y - A.apply(x);
        double obj = rn.squaredNorm();
        rep.history.push_back({obj, rn.norm(), x.norm()});
        ++rep.iterations;
        if (!std::isfinite(obj)) {
            rep.stop_reason = "breakdown";
            break;
        }
        if (hit_discrepancy(stop, rn.norm())) {
            rep.stop_reason = "discrepancy";
            break;
        }
        if (objective_settled(prev_obj, obj, stop.obj_tol)) {
            rep.stop_reason = "objective_tol";
            break;
        }
        prev_obj = obj;
    }
    rep.x = x;
    return rep;
}

SolveReport disappearing_tikhonov(const Matrix& A, const Vector& y, double lambda,
                                  const StopRule& stop) {
    if (lambda <= 0.0)
        throw std::invalid_argument("disappearing_tikhonov: lambda must be positive");
    if (y.size() != A.rows())
        throw std::invalid_argument("disappearing_tikhonov: y length mismatch");
    const Index n = A.cols();
    Matrix N = A.transpose() * A;
    N.diagonal().array() += lambda * lambda;
    Eigen::LDLT<Matrix> ldlt(N);
    if (ldlt.info() != Eigen::Success)
        throw std::domain_error("disappearing_tikhonov: factorization failed");
    const Vector aty = A.transpose() * y;

    SolveReport rep;
    Vector x = Vector::Zero(n);
    double prev_obj = kInf;
    rep.stop_reason = "max_iters";
    for (Index k = 0; k < stop.max_iters; ++k) {
        Vector x_new = ldlt.solve(aty + lambda * lambda * x);
        double penalty = lambda * lambda * (x_new - x).squaredNorm();
        x = x_new;
        double rnorm = (A * x - y).norm();
        double obj = rnorm * rnorm + penalty;
        rep.history.push_back({obj, rnorm, x.norm()});
        ++rep.iterations;
        if (hit_discrepancy(stop, rnorm)) {
            rep.stop_reason = "discrepancy";
            break;
        }
        if (objective_settled(prev_obj, obj, stop.obj_tol)) {
            rep.stop_reason = "objective_tol";
            break;
        }
        prev_obj = obj;
    }
    rep.x = x;
    return rep;
}

SolveReport irls(const Matrix& A, const Vector& y, const IrlsConfig& cfg,
                 double fidelity_p, const reg::RegularizerSpec& r, double reg_p) {
    if (fidelity_p <= 0.0 || fidelity_p > 2.0 || reg_p <= 0.0 || reg_p > 2.0)
        throw std::invalid_argument("irls: exponents must lie in (0, 2]");
    if (cfg.epsilon <= 0.0) throw std::invalid_argument("irls: epsilon must be positive");
    if (y.size() != A.rows()) throw std::invalid_argument("irls: y length mismatch");
    const Index n = A.cols();
    if (r.L.cols() != n) throw std::invalid_argument("irls: L column mismatch");

    const Vector xref = r.ref_or_zero();
    const double lam2 = r.lambda * r.lambda;
    // Quadratic majorizer of |t|^p at t0 has curvature (p/2) |t0|^(p-2).
    // Without the p/2 the fixed point solves a rescaled penalty whenever the
    // two exponents differ.
    auto weights = [&](const Vector& v, double p) {
        Vector w(v.size());
        for (Index i = 0; i < v.size(); ++i)
            w(i) = 0.5 * p * std::pow(std::max(std::abs(v(i)), cfg.epsilon), p - 2.0);
        return w;
    };
    auto lp_obj = [&](const Vector& x) {
        double o = 0.0;
        Vector rr = A * x - y;
        for (Index i = 0; i < rr.size(); ++i) o += std::pow(std::abs(rr(i)), fidelity_p);
        if (lam2 > 0.0) {
            Vector lx = r.L * (x - xref);
            for (Index i = 0; i < lx.size(); ++i)
                o += lam2 * std::pow(std::abs(lx(i)), reg_p);
        }
        return o;
    };

    SolveReport rep;
    Vector x = Vector::Zero(n);
    rep.stop_reason = "max_iters";
    for (Index k = 0; k < cfg.outer_iters; ++k) {
        Vector w1 = weights(A * x - y, fidelity_p);
        Vector w2 = lam2 > 0.0 ? weights(r.L * (x - xref), reg_p) : Vector();

        Vector x_new;
        if (cfg.inner == IrlsInner::normal) {
            Matrix N = A.transpose() * w1.asDiagonal() * A;
            Vector rhs = A.transpose() * w1.cwiseProduct(y);
            if (lam2 > 0.0) {
                N.noalias() += lam2 * r.L.transpose() * w2.asDiagonal() * r.L;
                rhs.noalias() += lam2 * r.L.transpose() * w2.cwiseProduct(r.L * xref);
            }
            Eigen::LDLT<Matrix> ldlt(N);
            if (ldlt.info() != Eigen::Success)
                throw std::domain_error("irls: weighted normal equations failed");
            x_new = ldlt.solve(rhs);
        } else {
            const Index pl = lam2 > 0.0 ? r.L.rows() : 0;
            Matrix S(A.rows() + pl, n);
            Vector b(A.rows() + pl);
            Vector sq1 = w1.cwiseSqrt();
            S.topRows(A.rows()) = sq1.asDiagonal() * A;
            b.head(A.rows()) = sq1.cwiseProduct(y);
            if (pl > 0) {
                Vector sq2 = w2.cwiseSqrt();
                S.bottomRows(pl) = r.lambda * (sq2.asDiagonal() * r.L);
                b.tail(pl) = r.lambda * sq2.cwiseProduct(r.L * xref);
            }
            x_new = S.colPivHouseholderQr().solve(b);
        }

        double shift = (x_new - x).norm();
        x = x_new;
        double rnorm = (A * x - y).norm();
        rep.history.push_back({lp_obj(x), rnorm, x.norm()});
        ++rep.iterations;
        if (shift <= 1e-12 * (1.0 + x.norm())) {
            rep.stop_reason = "converged";
            break;
        }
    }
    rep.x = x;
    return rep;
}

SolveReport fista(const LinearOperator& A, const Vector& y, double lambda,
                  const StopRule& stop, bool momentum, double sigma_max_hint,
                  const Vector& x0) {
    if (y.size() != A.rows()) throw std::invalid_argument("fista: y length mismatch");
    if (lambda < 0.0) throw std::invalid_argument("fista: negative lambda");
    if (x0.size() != 0 && x0.size() != A.cols())
        throw std::invalid_argument("fista: x0 length mismatch");
    double smax = sigma_max_hint > 0.0 ? sigma_max_hint
                                       : estimate_sigma_max(A) * (1.0 + 1e-3);
    if (smax <= 0.0) throw std::invalid_argument("fista: operator is zero");
    const double step = 1.0 / (2.0 * smax * smax + 1e-12);
    const double thresh = lambda * lambda * step;
    const double lam2 = lambda * lambda;

    auto objective = [&](const Vector& x, const Vector& r) {
        return r.squaredNorm() + lam2 * x.lpNorm<1>();
    };

    SolveReport rep;
    const Index n = A.cols();
    Vector x = x0.size() == n ? x0 : Vector::Zero(n);
    Vector v = x;  // extrapolation point
    double t = 1.0;
    double prev_obj = kInf;
    rep.stop_reason = "max_iters";
    for (Index k = 0; k < stop.max_iters; ++k) {
        Vector rv = A.apply(v) - y;
        Vector g = 2.0 * A.apply_transpose(rv);
        Vector x_new = v - step * g;
        for (Index i = 0; i < n; ++i) x_new(i) = soft_threshold(x_new(i), thresh);

        Vector r = A.apply(x_new) - y;
        double obj = objective(x_new, r);

        if (momentum) {
            if (obj > prev_obj) {
                // Restart the momentum sequence; acceleration overshot.
                t = 1.0;
                v = x_new;
            } else {
                double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
                v = x_new + ((t - 1.0) / t_new) * (x_new - x);
                t = t_new;
            }
        } else {
            v = x_new;
        }
        x = x_new;

        rep.history.push_back({obj, r.norm(), x.norm()});
        ++rep.iterations;
        if (hit_discrepancy(stop, r.norm())) {
            rep.stop_reason = "discrepancy";
            break;
        }
        if (objective_settled(prev_obj, obj, stop.obj_tol)) {
            rep.stop_reason = "objective_tol";
            break;
        }
        prev_obj = std::min(prev_obj, obj);
    }
    rep.x = x;
    return rep;
}

namespace {

// Split operator z = Dx for the ADMM penalties. For the TV penalties D stacks
// the vertical differences over the horizontal ones; rows touching the last
// image row or column are zero so D keeps a fixed 2n x n shape.
struct SplitOp {
    Index n = 0;      // domain
    Index p = 0;      // range
    Index h = 0, w = 0;
    const Matrix* L = nullptr;  // dense penalty matrix, l1 case only
    bool tv = false;

    Vector apply(const Vector& x) const {
        if (!tv) return (*L) * x;
        Vector z = Vector::Zero(2 * n);
        for (Index j = 0; j < w; ++j)
            for (Index i = 0; i + 1 < h; ++i) {
                Index q = j * h + i;
                z(q) = x(q + 1) - x(q);
            }
        for (Index j = 0; j + 1 < w; ++j)
            for (Index i = 0; i < h; ++i) {
                Index q = j * h + i;
                z(n + q) = x(q + h) - x(q);
            }
        return z;
    }
    Vector apply_t(const Vector& z) const {
        if (!tv) return L->transpose() * z;
        Vector x = Vector::Zero(n);
        for (Index j = 0; j < w; ++j)
            for (Index i = 0; i + 1 < h; ++i) {
                Index q = j * h + i;
                x(q) -= z(q);
                x(q + 1) += z(q);
            }
        for (Index j = 0; j + 1 < w; ++j)
            for (Index i = 0; i < h; ++i) {
                Index q = j * h + i;
                x(q) -= z(n + q);
                x(q + h) += z(n + q);
            }
        return x;
    }
};

SplitOp make_split(const SplitPenalty& penalty, Index n) {
    SplitOp d;
    d.n = n;
    if (const auto* l1 = std::get_if<L1Penalty>(&penalty)) {
        if (l1->L.cols() != n) throw std::invalid_argument("admm: L column mismatch");
        d.L = &l1->L;
        d.p = l1->L.rows();
        return d;
    }
    Index h = 0, w = 0;
    if (const auto* a = std::get_if<TvAniso2d>(&penalty)) h = a->h, w = a->w;
    if (const auto* s = std::get_if<TvIso2d>(&penalty)) h = s->h, w = s->w;
    if (h * w != n) throw std::invalid_argument("admm: image dims do not match problem size");
    d.tv = true;
    d.h = h;
    d.w = w;
    d.p = 2 * n;
    return d;
}

}  // namespace

SolveReport admm(const LinearOperator& A, const Vector& y, double lambda, double rho,
                 const SplitPenalty& penalty, const StopRule& stop) {
    if (y.size() != A.rows()) throw std::invalid_argument("admm: y length mismatch");
    if (rho <= 0.0) throw std::invalid_argument("admm: rho must be positive");
    if (lambda < 0.0) throw std::invalid_argument("admm: negative lambda");
    const Index n = A.cols();
    SplitOp D = make_split(penalty, n);
    const bool iso = std::holds_alternative<TvIso2d>(penalty);
    const double lam2 = lambda * lambda;

    auto penalty_value = [&](const Vector& z) {
        if (!iso) return z.lpNorm<1>();
        double s = 0.0;
        for (Index q = 0; q < n; ++q) s += std::hypot(z(q), z(n + q));
        return s;
    };
    auto normal_apply = [&](const Vector& v) -> Vector {
        return 2.0 * A.apply_transpose(A.apply(v)) + rho * D.apply_t(D.apply(v));
    };
    // Warm-started CG on the x update's SPD system.
    auto cg_solve = [&](const Vector& b, Vector x0) {
        Vector xk = std::move(x0);
        Vector rk = b - normal_apply(xk);
        Vector pk = rk;
        double rr = rk.squaredNorm();
        const double btol = 1e-20 * std::max(1.0, b.squaredNorm());
        for (Index it = 0; it < 400 && rr > btol; ++it) {
            Vector Ap = normal_apply(pk);
            double pAp = pk.dot(Ap);
            if (pAp <= 0.0) break;
            double alpha = rr / pAp;
            xk += alpha * pk;
            rk -= alpha * Ap;
            double rr_new = rk.squaredNorm();
            pk = rk + (rr_new / rr) * pk;
            rr = rr_new;
        }
        return xk;
    };

    SolveReport rep;
    Vector x = Vector::Zero(n);
    Vector z = Vector::Zero(D.p);
    Vector u = Vector::Zero(D.p);
    const Vector aty2 = 2.0 * A.apply_transpose(y);
    double prev_obj = kInf;
    rep.stop_reason = "max_iters";
    for (Index k = 0; k < stop.max_iters; ++k) {
        x = cg_solve(aty2 + rho * D.apply_t(z - u), x);
        Vector dx = D.apply(x);
        Vector z_old = z;
        Vector v = dx + u;
        if (!iso) {
            const double t = lam2 / rho;
            for (Index i = 0; i < D.p; ++i) z(i) = soft_threshold(v(i), t);
        } else {
            const double t = lam2 / rho;
            for (Index q = 0; q < n; ++q) {
                double mag = std::hypot(v(q), v(n + q));
                double scale = mag > t ? 1.0 - t / mag : 0.0;
                z(q) = scale * v(q);
                z(n + q) = scale * v(n + q);
            }
        }
        u += dx - z;

        Vector r = A.apply(x) - y;
        double obj = r.squaredNorm() + lam2 * penalty_value(dx);
        rep.history.push_back({obj, r.norm(), x.norm()});
        rep.primal_residuals.push_back((dx - z).norm());
        rep.dual_residuals.push_back(rho * D.apply_t(z - z_old).norm());
        ++rep.iterations;
        if (hit_discrepancy(stop, r.norm())) {
            rep.stop_reason = "discrepancy";
            break;
        }
        if (k >= 2 && objective_settled(prev_obj, obj, stop.obj_tol)) {
            rep.stop_reason = "objective_tol";
            break;
        }
        prev_obj = obj;
    }
    rep.x = x;
    return rep;
}

SolveReport maxent(const Matrix& A, const Vector& y, double lambda, const Vector& omega,
                   const StopRule& stop) {
    if (y.size() != A.rows()) throw std::invalid_argument("maxent: y length mismatch");
    const Index n = A.cols();
    if (omega.size() != n) throw std::invalid_argument("maxent: omega length mismatch");
    if (omega.minCoeff() <= 0.0) throw std::invalid_argument("maxent: omega must be positive");
    if (lambda < 0.0) throw std::invalid_argument("maxent: negative lambda");
    const double lam2 = lambda * lambda;
    constexpr double kFloor = 1e-10;

    auto objective = [&](const Vector& x) {
        double o = (A * x - y).squaredNorm();
        for (Index i = 0; i < n; ++i) o += lam2 * x(i) * std::log(omega(i) * x(i));
        return o;
    };

    SolveReport rep;
    // Start at the unconstrained entropy minimizer 1/(e*omega), strictly inside
    // the feasible set.
    Vector x(n);
    for (Index i = 0; i < n; ++i) x(i) = 1.0 / (std::exp(1.0) * omega(i));
    double obj = objective(x);
    double alpha = 1.0;
    double prev_obj = kInf;
    rep.stop_reason = "max_iters";
    for (Index k = 0; k < stop.max_iters; ++k) {
        Vector g = 2.0 * A.transpose() * (A * x - y);
        for (Index i = 0; i < n; ++i) g(i) += lam2 * (std::log(omega(i) * x(i)) + 1.0);

        bool moved = false;
        for (int bt = 0; bt < 60; ++bt) {
            Vector xt = (x - alpha * g).cwiseMax(kFloor);
            double ot = objective(xt);
            if (ot < obj) {
                x = xt;
                obj = ot;
                alpha = std::min(alpha * 2.0, 1e6);
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        double rnorm = (A * x - y).norm();
        rep.history.push_back({obj, rnorm, x.norm()});
        ++rep.iterations;
        if (!moved) {
            // No descent direction at any step length: numerically stationary.
            rep.stop_reason = "objective_tol";
            break;
        }
        if (hit_discrepancy(stop, rnorm)) {
            rep.stop_reason = "discrepancy";
            break;
        }
        if (objective_settled(prev_obj, obj, stop.obj_tol)) {
            rep.stop_reason = "objective_tol";
            break;
        }
        prev_obj = obj;
    }
    rep.x = x;
    return rep;
}

namespace {

Vector apply_denoiser(const Denoiser& d, const Vector& x, Index h, Index w) {
    return vectorize(d.fn(devectorize(x, h, w)));
}

}  // namespace

SolveReport red(const Matrix& A, const Vector& y, double lambda, const Denoiser& d,
                RedScheme scheme, const StopRule& stop, Index img_h, Index img_w,
                double rho) {
    const Index n = A.cols();
    if (img_h * img_w != n) throw std::invalid_argument("red: image dims do not match A");
    if (y.size() != A.rows()) throw std::invalid_argument("red: y length mismatch");
    if (lambda < 0.0) throw std::invalid_argument("red: negative lambda");
    if (rho <= 0.0) throw std::invalid_argument("red: rho must be positive");
    const double lam2 = lambda * lambda;

    auto denoise = [&](const Vector& v) { return apply_denoiser(d, v, img_h, img_w); };
    auto energy = [&](const Vector& x, const Vector& fx) {
        return 0.5 * (A * x - y).squaredNorm() + 0.5 * lam2 * x.dot(x - fx);
    };

    SolveReport rep;
    Vector x = Vector::Zero(n);
    const Vector aty = A.transpose() * y;
    double prev_obj = kInf;
    rep.stop_reason = "max_iters";

    if (scheme == RedScheme::fixed_point) {
        Matrix N = A.transpose() * A;
        N.diagonal().array() += lam2;
        Eigen::LDLT<Matrix> ldlt(N);
        if (ldlt.info() != Eigen::Success)
            throw std::domain_error("red: factorization failed");
        for (Index k = 0; k < stop.max_iters; ++k) {
            Vector fx = denoise(x);
            x = ldlt.solve(aty + lam2 * fx);
            Vector fx2 = denoise(x);
            double obj = energy(x, fx2);
            double rnorm = (A * x - y).norm();
            rep.history.push_back({obj, rnorm, x.norm()});
            ++rep.iterations;
            if (hit_discrepancy(stop, rnorm)) {
                rep.stop_reason = "discrepancy";
                break;
            }
            if (objective_settled(prev_obj, obj, stop.obj_tol)) {
                rep.stop_reason = "objective_tol";
                break;
            }
            prev_obj = obj;
        }
    } else if (scheme == RedScheme::steepest) {
        // Fixed-step descent on the update direction itself. Backtracking on
        // the energy would be wrong here: for denoisers without a symmetric
        // Jacobian the direction is not the energy gradient, and a line
        // search stalls where the direction stops descending instead of
        // where the direction vanishes.
        double smax = estimate_sigma_max(LinearOperator::from_matrix(A));
        const double alpha = 1.0 / (smax * smax + 2.0 * lam2 + 1e-12);
        for (Index k = 0; k < stop.max_iters; ++k) {
            Vector fx = denoise(x);
            Vector g = A.transpose() * (A * x - y) + lam2 * (x - fx);
            x -= alpha * g;
            Vector fx2 = denoise(x);
            double obj = energy(x, fx2);
            double rnorm = (A * x - y).norm();
            rep.history.push_back({obj, rnorm, x.norm()});
            ++rep.iterations;
            if (hit_discrepancy(stop, rnorm)) {
                rep.stop_reason = "discrepancy";
                break;
            }
            if (objective_settled(prev_obj, obj, stop.obj_tol)) {
                rep.stop_reason = "objective_tol";
                break;
            }
            prev_obj = obj;
        }
    } else {
        Matrix N = A.transpose() * A;
        N.diagonal().array() += rho;
        Eigen::LDLT<Matrix> ldlt(N);
        if (ldlt.info() != Eigen::Success)
            throw std::domain_error("red: factorization failed");
        Vector z = Vector::Zero(n);
        Vector u = Vector::Zero(n);
        for (Index k = 0; k < stop.max_iters; ++k) {
            x = ldlt.solve(aty + rho * (z - u));
            Vector z_old = z;
            // Inner fixed point for the z objective lambda^2/2 z^T(z - f(z)) +
            // rho/2 ||z - x - u||^2; a few sweeps suffice.
            for (int inner = 0; inner < 3; ++inner)
                z = (lam2 * denoise(z) + rho * (x + u)) / (lam2 + rho);
            u += x - z;
            Vector fx = denoise(x);
            double obj = energy(x, fx);
            double rnorm = (A * x - y).norm();
            rep.history.push_back({obj, rnorm, x.norm()});
            rep.primal_residuals.push_back((x - z).norm());
            rep.dual_residuals.push_back(rho * (z - z_old).norm());
            ++rep.iterations;
            if (hit_discrepancy(stop, rnorm)) {
                rep.stop_reason = "discrepancy";
                break;
            }
            if (k >= 2 && objective_settled(prev_obj, obj, stop.obj_tol)) {
                rep.stop_reason = "objective_tol";
                break;
            }
            prev_obj = obj;
        }
    }
    rep.x = x;
    return rep;
}

SolveReport pnp_admm(const Matrix& A, const Vector& y, double lambda, const Denoiser& d,
                     double rho, const StopRule& stop, Index img_h, Index img_w) {
    const Index n = A.cols();
    if (img_h * img_w != n) throw std::invalid_argument("pnp_admm: image dims do not match A");
    if (y.size() != A.rows()) throw std::invalid_argument("pnp_admm: y length mismatch");
    if (rho <= 0.0) throw std::invalid_argument("pnp_admm: rho must be positive");
    if (lambda <= 0.0) throw std::invalid_argument("pnp_admm: lambda must be positive");
    const double w = rho * lambda * lambda;  // coupling weight on the split

    Matrix N = 2.0 * A.transpose() * A;
    N.diagonal().array() += w;
    Eigen::LDLT<Matrix> ldlt(N);
    if (ldlt.info() != Eigen::Success)
        throw std::domain_error("pnp_admm: factorization failed");
    const Vector aty2 = 2.0 * A.transpose() * y;

    SolveReport rep;
    Vector x = Vector::Zero(n);
    Vector z = Vector::Zero(n);
    Vector u = Vector::Zero(n);
    double prev_obj = kInf;
    rep.stop_reason = "max_iters";
    for (Index k = 0; k < stop.max_iters; ++k) {
        x = ldlt.solve(aty2 + w * (z - u));
        Vector z_old = z;
        z = apply_denoiser(d, x + u, img_h, img_w);
        u += x - z;

        Vector r = A * x - y;
        // No closed-form objective exists for a black-box denoiser; track the
        // data fidelity so stagnation is still visible.
        double obj = r.squaredNorm();
        rep.history.push_back({obj, r.norm(), x.norm()});
        rep.primal_residuals.push_back((x - z).norm());
        rep.dual_residuals.push_back(w * (z - z_old).norm());
        ++rep.iterations;
        if (hit_discrepancy(stop, r.norm())) {
            rep.stop_reason = "discrepancy";
            break;
        }
        if (k >= 2 && objective_settled(prev_obj, obj, stop.obj_tol)) {
            rep.stop_reason = "objective_tol";
            break;
        }
        prev_obj = obj;
    }
    rep.x = x;
    return rep;
}

}  // namespace ip::iter
