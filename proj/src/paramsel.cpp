#include "illposed/paramsel.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "illposed/csv.hpp"
#include "illposed/direct.hpp"
#include "illposed/spectral.hpp"

namespace ip::psel {

namespace {

// Squared residual of the classical solution from the SVD: the range part is
// filtered by (1 - phi_i), anything outside the column space passes through.
double residual_sq(const core::SvdFactors& f, const Vector& y, double lambda) {
    const Index m = f.U.rows();
    const Index r = f.sigmas.size();
    Vector beta = f.U.transpose() * y;
    double sq = 0.0;
    for (Index i = 0; i < r; ++i) {
        double s = f.sigmas(i);
        double phi = s > 0.0 ? (s * s) / (s * s + lambda * lambda) : 0.0;
        sq += (1.0 - phi) * (1.0 - phi) * beta(i) * beta(i);
    }
    for (Index i = r; i < m; ++i) sq += beta(i) * beta(i);
    return sq;
}

double filter_trace(const core::SvdFactors& f, double lambda) {
    double t = 0.0;
    for (Index i = 0; i < f.sigmas.size(); ++i) {
        double s = f.sigmas(i);
        if (s > 0.0) t += (s * s) / (s * s + lambda * lambda);
    }
    return t;
}

double menger_curvature(double x0, double y0, double x1, double y1, double x2, double y2) {
    double ax = x1 - x0, ay = y1 - y0;
    double bx = x2 - x1, by = y2 - y1;
    double cx = x2 - x0, cy = y2 - y0;
    double cross = ax * by - ay * bx;
    double la = std::hypot(ax, ay), lb = std::hypot(bx, by), lc = std::hypot(cx, cy);
    double denom = la * lb * lc;
    if (denom == 0.0) return 0.0;
    return 2.0 * std::abs(cross) / denom;
}

}  // namespace

Vector log_grid(double lo, double hi, Index n) {
    if (lo <= 0.0 || hi <= 0.0) throw std::invalid_argument("log_grid: endpoints must be positive");
    if (hi <= lo) throw std::invalid_argument("log_grid: hi must exceed lo");
    if (n < 2) throw std::invalid_argument("log_grid: need at least 2 points");
    Vector g(n);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (Index i = 0; i < n; ++i)
        g(i) = std::exp(llo + (lhi - llo) * (double)i / (double)(n - 1));
    return g;
}

double residual_at(const core::SvdFactors& f, const Vector& y, double lambda) {
    return std::sqrt(residual_sq(f, y, lambda));
}

LCurve lcurve(const Matrix& A, const Vector& y, const Matrix& L, const Vector& lambdas) {
    if (lambdas.size() < 5) throw std::invalid_argument("lcurve: need at least 5 grid points");
    if (lambdas.minCoeff() <= 0.0) throw std::invalid_argument("lcurve: lambdas must be positive");
    LCurve lc;
    lc.lambdas = lambdas;
    lc.residual_norms.resize(lambdas.size());
    lc.seminorms.resize(lambdas.size());
    for (Index i = 0; i < lambdas.size(); ++i) {
        Vector x = direct::tikhonov_general(A, y, reg::RegularizerSpec(L, lambdas(i)));
        lc.residual_norms(i) = (A * x - y).norm();
        lc.seminorms(i) = (L * x).norm();
    }
    double best = -1.0;
    Index best_i = 1;
    for (Index i = 1; i + 1 < lambdas.size(); ++i) {
        double pts[6];
        bool ok = true;
        const Index idx[3] = {i - 1, i, i + 1};
        for (int k = 0; k < 3; ++k) {
            double r = lc.residual_norms(idx[k]), s = lc.seminorms(idx[k]);
            if (r <= 0.0 || s <= 0.0) {
                ok = false;
                break;
            }
            pts[2 * k] = std::log(r);
            pts[2 * k + 1] = std::log(s);
        }
        if (!ok) continue;
        double c = menger_curvature(pts[0], pts[1], pts[2], pts[3], pts[4], pts[5]);
        if (c > best) {
            best = c;
            best_i = i;
        }
    }
    if (best < 0.0) throw std::domain_error("lcurve: no usable interior point");
    lc.corner_index = best_i;
    lc.corner_lambda = lambdas(best_i);
    return lc;
}

void write_lcurve_csv(const std::string& path, const LCurve& lc) {
    CsvWriter csv(path, "lambda,residual_norm,seminorm");
    for (Index i = 0; i < lc.lambdas.size(); ++i)
        csv.row({lc.lambdas(i), lc.residual_norms(i), lc.seminorms(i)});
    if (!csv.good()) throw std::runtime_error("write_lcurve_csv: failed writing " + path);
}

double gcv_value(const core::SvdFactors& f, const Vector& y, double lambda) {
    const double m = (double)f.U.rows();
    double tr = m - filter_trace(f, lambda);
    if (std::abs(tr) < 1e-12)
        throw std::domain_error("gcv: influence trace is zero, estimator undefined");
    return m * residual_sq(f, y, lambda) / (tr * tr);
}

GcvCurve gcv(const Matrix& A, const Vector& y, const Vector& lambdas) {
    if (lambdas.size() < 1) throw std::invalid_argument("gcv: empty grid");
    core::SvdFactors f = core::svd(A);
    GcvCurve gc;
    gc.lambdas = lambdas;
    gc.values.resize(lambdas.size());
    for (Index i = 0; i < lambdas.size(); ++i) gc.values(i) = gcv_value(f, y, lambdas(i));
    gc.values.minCoeff(&gc.argmin);
    gc.lambda_star = lambdas(gc.argmin);
    return gc;
}

void write_gcv_csv(const std::string& path, const GcvCurve& gc) {
    CsvWriter csv(path, "lambda,gcv");
    for (Index i = 0; i < gc.lambdas.size(); ++i) csv.row({gc.lambdas(i), gc.values(i)});
    if (!csv.good()) throw std::runtime_error("write_gcv_csv: failed writing " + path);
}

namespace {

double bisect_monotone(const std::function<double(double)>& resid, double delta, double lo,
                       double hi) {
    if (!(delta > 0.0)) throw std::invalid_argument("discrepancy: delta must be positive");
    if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("discrepancy: bad bracket endpoints");
    double rlo = resid(lo), rhi = resid(hi);
    if (rlo > delta || rhi < delta)
        throw std::invalid_argument("discrepancy: target residual not bracketed by [lo, hi]");
    const double tol = 1e-6 * delta;
    double a = lo, b = hi;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (a + b);
        double r = resid(mid);
        if (std::abs(r - delta) <= tol) return mid;
        if (r < delta) a = mid;
        else b = mid;
    }
    return 0.5 * (a + b);
}

}  // namespace

double discrepancy_lambda(const Matrix& A, const Vector& y, double delta, double lo,
                          double hi) {
    core::SvdFactors f = core::svd(A);
    return bisect_monotone([&](double lam) { return residual_at(f, y, lam); }, delta, lo, hi);
}

double discrepancy_lambda(const Matrix& A, const Vector& y, const Matrix& L, double delta,
                          double lo, double hi) {
    auto resid = [&](double lam) {
        Vector x = direct::tikhonov_general(A, y, reg::RegularizerSpec(L, lam));
        return (A * x - y).norm();
    };
    return bisect_monotone(resid, delta, lo, hi);
}

}  // namespace ip::psel
