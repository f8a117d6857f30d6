#include "illposed/sparse.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "illposed/core.hpp"
#include "illposed/csv.hpp"
#include "illposed/direct.hpp"
#include "illposed/operators.hpp"

namespace ip::sparse {

Vector Dictionary::apply(const Vector& s) const {
    if (s.size() != k) throw std::invalid_argument("Dictionary::apply: coefficient length mismatch");
    return apply_fn(s);
}

Vector Dictionary::apply_t(const Vector& x) const {
    if (x.size() != n) throw std::invalid_argument("Dictionary::apply_t: signal length mismatch");
    return apply_t_fn(x);
}

Matrix Dictionary::to_dense() const {
    if (dense) return *dense;
    if (n * k > Index(1) << 24)
        throw std::invalid_argument("Dictionary::to_dense: too large to materialize");
    Matrix D(n, k);
    Vector e = Vector::Zero(k);
    for (Index j = 0; j < k; ++j) {
        e(j) = 1.0;
        D.col(j) = apply_fn(e);
        e(j) = 0.0;
    }
    return D;
}

Dictionary identity_dictionary(Index n) {
    Dictionary d;
    d.n = d.k = n;
    d.orthonormal = true;
    d.apply_fn = [](const Vector& s) { return s; };
    d.apply_t_fn = [](const Vector& x) { return x; };
    return d;
}

Dictionary dense_dictionary(Matrix D, bool orthonormal) {
    Dictionary d;
    d.n = D.rows();
    d.k = D.cols();
    d.orthonormal = orthonormal;
    auto held = std::make_shared<const Matrix>(std::move(D));
    d.dense = held;
    d.apply_fn = [held](const Vector& s) { return Vector((*held) * s); };
    d.apply_t_fn = [held](const Vector& x) { return Vector(held->transpose() * x); };
    return d;
}

namespace {

Matrix dct_matrix(Index n) {
    if (n < 1) throw std::invalid_argument("dct_dictionary: n must be positive");
    Matrix D(n, n);
    const double c0 = std::sqrt(1.0 / (double)n);
    const double ck = std::sqrt(2.0 / (double)n);
    for (Index kk = 0; kk < n; ++kk)
        for (Index i = 0; i < n; ++i)
            D(i, kk) = (kk == 0 ? c0 : ck) *
                       std::cos(M_PI * (2.0 * (double)i + 1.0) * (double)kk / (2.0 * (double)n));
    return D;
}

}  // namespace

Dictionary dct_dictionary(Index n) { return dense_dictionary(dct_matrix(n), true); }

Dictionary dct2_dictionary(Index h, Index w) {
    if (h < 1 || w < 1) throw std::invalid_argument("dct2_dictionary: dims must be positive");
    auto Dh = std::make_shared<const Matrix>(dct_matrix(h));
    auto Dw = std::make_shared<const Matrix>(dct_matrix(w));
    Dictionary d;
    d.n = d.k = h * w;
    d.orthonormal = true;
    // Columns-stacked identity vec(Dh S Dw^T) = kron(Dw, Dh) vec(S).
    d.apply_fn = [Dh, Dw, h, w](const Vector& s) {
        Eigen::Map<const Matrix> S(s.data(), h, w);
        Matrix X = (*Dh) * S * Dw->transpose();
        return Vector(Eigen::Map<Vector>(X.data(), h * w));
    };
    d.apply_t_fn = [Dh, Dw, h, w](const Vector& x) {
        Eigen::Map<const Matrix> X(x.data(), h, w);
        Matrix S = Dh->transpose() * X * (*Dw);
        return Vector(Eigen::Map<Vector>(S.data(), h * w));
    };
    return d;
}

SynthesisResult synthesis_solve(const LinearOperator& A, const Vector& y,
                                const Dictionary& D, double lambda,
                                const iter::StopRule& stop) {
    if (A.cols() != D.n) throw std::invalid_argument("synthesis_solve: A and D disagree on n");
    LinearOperator B(
        A.rows(), D.k, [&A, &D](const Vector& s) { return A.apply(D.apply(s)); },
        [&A, &D](const Vector& r) { return D.apply_t(A.apply_transpose(r)); });
    SynthesisResult res;
    res.report = iter::fista(B, y, lambda, stop);
    res.s = res.report.x;
    res.x = D.apply(res.s);
    return res;
}

SynthesisResult projected_tikhonov(const Matrix& A, const Vector& y, const Dictionary& D,
                                   double lambda) {
    if (A.cols() != D.n) throw std::invalid_argument("projected_tikhonov: A and D disagree on n");
    Matrix B = A * D.to_dense();
    SynthesisResult res;
    res.s = direct::tikhonov_general(B, y, reg::RegularizerSpec(Matrix::Identity(D.k, D.k), lambda));
    res.x = D.apply(res.s);
    return res;
}

Vector standard_form_transform(const Matrix& A, const Vector& y, const Matrix& M,
                               double lambda) {
    if (M.rows() != M.cols() || M.cols() != A.cols())
        throw std::invalid_argument("standard_form_transform: M must be square matching A");
    // The full sigma ratio, not the rank-truncated condition number: a
    // practically-zero direction in M makes the substitution meaningless.
    auto fm = core::svd(M);
    const double smax = fm.sigmas(0);
    const double smin = fm.sigmas(fm.sigmas.size() - 1);
    if (smin <= 1e-10 * smax)
        throw std::domain_error("standard_form_transform: M too ill-conditioned to invert");
    Eigen::PartialPivLU<Matrix> lu(M);
    Matrix B = A * lu.inverse();
    Vector xbar = direct::tikhonov_general(
        B, y, reg::RegularizerSpec(Matrix::Identity(A.cols(), A.cols()), lambda));
    return lu.solve(xbar);
}

Matrix gaussian_measurement(Index m, Index n, std::uint64_t seed) {
    if (m < 1 || n < 1) throw std::invalid_argument("gaussian_measurement: bad dimensions");
    Matrix Phi(m, n);
    const double scale = 1.0 / std::sqrt((double)m);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j)
            Phi(i, j) = scale * ops::counter_normal(seed, (std::uint64_t)(i * n + j));
    return Phi;
}

namespace {

double support_f1(const Vector& s_true, const Vector& s_hat) {
    const double tt = 1e-8 * std::max(1e-300, s_true.cwiseAbs().maxCoeff());
    const double th = 1e-6 * std::max(1e-300, s_hat.cwiseAbs().maxCoeff());
    Index tp = 0, fp = 0, fn = 0;
    for (Index i = 0; i < s_true.size(); ++i) {
        bool t = std::abs(s_true(i)) > tt;
        bool h = std::abs(s_hat(i)) > th;
        tp += t && h;
        fp += !t && h;
        fn += t && !h;
    }
    if (2 * tp + fp + fn == 0) return 1.0;
    return 2.0 * (double)tp / (double)(2 * tp + fp + fn);
}

}  // namespace

CsResult cs_recover_given(const Matrix& Phi, const Vector& x_true, const Dictionary& D,
                          double lambda_final, Index iters_per_stage, Index final_iters) {
    if (Phi.cols() != D.n) throw std::invalid_argument("cs_recover: Phi and D disagree on n");
    if (x_true.size() != D.n) throw std::invalid_argument("cs_recover: x_true length mismatch");
    if (lambda_final <= 0.0) throw std::invalid_argument("cs_recover: lambda_final must be positive");

    const Vector y = Phi * x_true;
    LinearOperator B(
        Phi.rows(), D.k, [&Phi, &D](const Vector& s) { return Vector(Phi * D.apply(s)); },
        [&Phi, &D](const Vector& r) { return D.apply_t(Phi.transpose() * r); });
    const double smax = iter::estimate_sigma_max(B) * (1.0 + 1e-3);

    // Continuation on the l1 weight: the first threshold keeps only the
    // strongest correlations, each stage reuses the previous support estimate.
    const Vector bty = B.apply_transpose(y);
    double tau = std::max(bty.cwiseAbs().maxCoeff(), lambda_final * lambda_final);
    Vector s = Vector::Zero(D.k);
    iter::StopRule stage{iters_per_stage, 0.0, std::nullopt};
    CsResult res;
    while (tau > lambda_final * lambda_final) {
        res.report = iter::fista(B, y, std::sqrt(tau), stage, true, smax, s);
        s = res.report.x;
        tau *= 0.25;
    }
    iter::StopRule last{final_iters, 1e-14, std::nullopt};
    res.report = iter::fista(B, y, lambda_final, last, true, smax, s);
    res.s = res.report.x;
    res.x = D.apply(res.s);

    res.metrics.m = Phi.rows();
    const double xn = x_true.norm();
    res.metrics.recovery_error = xn > 0.0 ? (res.x - x_true).norm() / xn : res.x.norm();
    res.metrics.support_f1 = support_f1(D.apply_t(x_true), res.s);
    return res;
}

CsResult cs_recover(const Vector& x_true, const Dictionary& D, Index m, std::uint64_t seed,
                    double lambda_final, Index iters_per_stage, Index final_iters) {
    return cs_recover_given(gaussian_measurement(m, D.n, seed), x_true, D, lambda_final,
                            iters_per_stage, final_iters);
}

void write_cs_csv(const std::string& path, const std::vector<CsMetrics>& rows) {
    CsvWriter csv(path, "m,recovery_error,support_f1");
    for (const auto& r : rows) csv.row({(double)r.m, r.recovery_error, r.support_f1});
    if (!csv.good()) throw std::runtime_error("write_cs_csv: failed writing " + path);
}

}  // namespace ip::sparse
