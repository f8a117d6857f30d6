#include "illposed/direct.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace ip::direct {

namespace {

// Shared driver for every quadratic solver here. Builds the normal equations
// N x = rhs, factors by LDLT, and estimates conditioning from the diagonal of
// D. Past 1e12 the normal equations have lost too many digits, so we redo the
// solve as column-pivoted QR on the stacked tall system, which squares nothing.
Vector solve_regularized(const Matrix& A, const Vector& y,
                         const std::vector<reg::RegularizerSpec>& regs) {
    const Index n = A.cols();
    if (y.size() != A.rows()) throw std::invalid_argument("solve: y length mismatch");

    Matrix N = A.transpose() * A;
    Vector rhs = A.transpose() * y;
    for (const auto& r : regs) {
        if (r.L.cols() != n) throw std::invalid_argument("solve: L column mismatch");
        if (r.lambda < 0.0) throw std::invalid_argument("solve: negative lambda");
        const double w = r.lambda * r.lambda;
        if (w == 0.0) continue;
        N.noalias() += w * r.L.transpose() * r.L;
        rhs.noalias() += w * r.L.transpose() * (r.L * r.ref_or_zero());
    }

    Eigen::LDLT<Matrix> ldlt(N);
    bool ok = ldlt.info() == Eigen::Success;
    double dmax = 0.0, dmin = 0.0;
    if (ok) {
        Vector d = ldlt.vectorD().cwiseAbs();
        dmax = d.maxCoeff();
        dmin = d.minCoeff();
        ok = dmin > 0.0 && dmax / dmin < 1e12;
    }
    if (ok) return ldlt.solve(rhs);

    // Stacked fallback: rows [A; lambda_i L_i], right side [y; lambda_i L_i x_i*].
    Index rows = A.rows();
    for (const auto& r : regs)
        if (r.lambda > 0.0) rows += r.L.rows();
    Matrix S(rows, n);
    Vector b(rows);
    S.topRows(A.rows()) = A;
    b.head(A.rows()) = y;
    Index at = A.rows();
    for (const auto& r : regs) {
        if (r.lambda <= 0.0) continue;
        S.middleRows(at, r.L.rows()) = r.lambda * r.L;
        b.segment(at, r.L.rows()) = r.lambda * (r.L * r.ref_or_zero());
        at += r.L.rows();
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(S);
    if (qr.rank() < n)
        throw std::domain_error("solve: stacked system is rank deficient, solution not unique");
    return qr.solve(b);
}

}  // namespace

Vector naive_solve(const Matrix& A, const Vector& y) {
    if (A.rows() != A.cols()) throw std::invalid_argument("naive_solve: A must be square");
    if (y.size() != A.rows()) throw std::invalid_argument("naive_solve: y length mismatch");
    Eigen::PartialPivLU<Matrix> lu(A);
    if (lu.rcond() < 1e-14)
        throw std::domain_error("naive_solve: A is singular within tolerance");
    Vector x = lu.solve(y);
    if (!x.allFinite())
        throw std::domain_error("naive_solve: A is singular within tolerance");
    // Partial pivoting does not flag near-singularity; a huge relative residual does.
    const double resid = (A * x - y).norm();
    const double scale = A.norm() * x.norm() + y.norm();
    if (scale > 0.0 && resid > 1e-6 * scale)
        throw std::domain_error("naive_solve: A is singular within tolerance");
    return x;
}

Vector tikhonov_general(const Matrix& A, const Vector& y, const reg::RegularizerSpec& r) {
    return solve_regularized(A, y, {r});
}

Vector tikhonov_data_form(const Matrix& A, const Vector& y, double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("tikhonov_data_form: lambda must be positive");
    if (y.size() != A.rows()) throw std::invalid_argument("tikhonov_data_form: y length mismatch");
    Matrix G = A * A.transpose();
    G.diagonal().array() += lambda * lambda;
    Eigen::LDLT<Matrix> ldlt(G);
    if (ldlt.info() != Eigen::Success)
        throw std::domain_error("tikhonov_data_form: factorization failed");
    return A.transpose() * ldlt.solve(y);
}

Vector tikhonov_multi(const Matrix& A, const Vector& y,
                      const std::vector<reg::RegularizerSpec>& regs) {
    if (regs.empty()) throw std::invalid_argument("tikhonov_multi: no regularizers");
    bool any = false;
    for (const auto& r : regs) any = any || r.lambda > 0.0;
    if (!any) throw std::invalid_argument("tikhonov_multi: all lambdas are zero");
    return solve_regularized(A, y, regs);
}

Vector stacked_solve(const Matrix& A, const Vector& y,
                     const std::vector<reg::RegularizerSpec>& regs) {
    const Index n = A.cols();
    if (y.size() != A.rows()) throw std::invalid_argument("stacked_solve: y length mismatch");
    Index rows = A.rows();
    for (const auto& r : regs) {
        if (r.L.cols() != n) throw std::invalid_argument("stacked_solve: L column mismatch");
        if (r.lambda < 0.0) throw std::invalid_argument("stacked_solve: negative lambda");
        if (r.lambda > 0.0) rows += r.L.rows();
    }
    Matrix S(rows, n);
    Vector b(rows);
    S.topRows(A.rows()) = A;
    b.head(A.rows()) = y;
    Index at = A.rows();
    for (const auto& r : regs) {
        if (r.lambda <= 0.0) continue;
        S.middleRows(at, r.L.rows()) = r.lambda * r.L;
        b.segment(at, r.L.rows()) = r.lambda * (r.L * r.ref_or_zero());
        at += r.L.rows();
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(S);
    if (qr.rank() < n)
        throw std::domain_error("stacked_solve: system is rank deficient, solution not unique");
    return qr.solve(b);
}

Vector newton_step_quadratic(const Matrix& A, const Vector& y,
                             const std::vector<reg::RegularizerSpec>& regs,
                             const Vector& x0) {
    const Index n = A.cols();
    if (x0.size() != n) throw std::invalid_argument("newton_step_quadratic: x0 length mismatch");
    // Half-gradient and half-Hessian; the common factor 2 cancels in the step.
    Vector g = A.transpose() * (A * x0 - y);
    Matrix H = A.transpose() * A;
    for (const auto& r : regs) {
        const double w = r.lambda * r.lambda;
        if (w == 0.0) continue;
        g.noalias() += w * r.L.transpose() * (r.L * (x0 - r.ref_or_zero()));
        H.noalias() += w * r.L.transpose() * r.L;
    }
    Eigen::LDLT<Matrix> ldlt(H);
    if (ldlt.info() != Eigen::Success)
        throw std::domain_error("newton_step_quadratic: Hessian factorization failed");
    return x0 - ldlt.solve(g);
}

Vector map_gaussian(const Matrix& A, const Vector& y, const GaussianModel& model) {
    const Index m = A.rows();
    const Index n = A.cols();
    if (y.size() != m) throw std::invalid_argument("map_gaussian: y length mismatch");
    if (model.L_e.cols() != m) throw std::invalid_argument("map_gaussian: L_e column mismatch");
    if (model.L_pr.cols() != n) throw std::invalid_argument("map_gaussian: L_pr column mismatch");
    if (model.mu_e.size() != m) throw std::invalid_argument("map_gaussian: mu_e length mismatch");
    if (model.mu_x.size() != n) throw std::invalid_argument("map_gaussian: mu_x length mismatch");
    if (model.lambda < 0.0) throw std::invalid_argument("map_gaussian: negative lambda");

    // Minimize ||L_e (A x - y - mu_e)||^2 + lambda^2 ||L_pr (x - mu_x)||^2 as
    // one stacked least-squares problem. With strong low-noise weights the
    // normal equations square an already steep spread, so QR throughout.
    const Index pe = model.L_e.rows();
    const Index pp = model.lambda > 0.0 ? model.L_pr.rows() : 0;
    Matrix S(pe + pp, n);
    Vector b(pe + pp);
    S.topRows(pe) = model.L_e * A;
    b.head(pe) = model.L_e * (y + model.mu_e);
    if (pp > 0) {
        S.bottomRows(pp) = model.lambda * model.L_pr;
        b.tail(pp) = model.lambda * (model.L_pr * model.mu_x);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(S);
    if (qr.rank() < n)
        throw std::domain_error("map_gaussian: posterior is degenerate, solution not unique");
    return qr.solve(b);
}

}  // namespace ip::direct
