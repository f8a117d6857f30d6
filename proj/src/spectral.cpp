#include "illposed/spectral.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "illposed/csv.hpp"

namespace ip::spectral {

PicardTable picard_table(const core::SvdFactors& f, const Vector& y) {
    if (y.size() != f.U.rows()) throw std::invalid_argument("picard_table: dim mismatch");
    const Index r = f.sigmas.size();
    PicardTable t;
    t.sigmas = f.sigmas;
    t.coeffs.resize(r);
    t.ratios.resize(r);
    for (Index i = 0; i < r; ++i) {
        t.coeffs[i] = std::abs(f.U.col(i).dot(y));
        t.ratios[i] = (t.sigmas[i] > 0.0) ? t.coeffs[i] / t.sigmas[i]
                                          : std::numeric_limits<double>::infinity();
    }
    return t;
}

void write_picard_csv(const std::string& path, const PicardTable& t) {
    CsvWriter csv(path, {"index", "sigma", "coeff", "ratio"});
    for (Index i = 0; i < t.sigmas.size(); ++i)
        csv.row({static_cast<double>(i + 1), t.sigmas[i], t.coeffs[i], t.ratios[i]});
}

Classification classify_illposedness(const Vector& sigmas) {
    std::vector<double> s;
    for (Index i = 0; i < sigmas.size(); ++i)
        if (sigmas[i] > 0.0) s.push_back(sigmas[i]);
    if (s.size() < 8) throw std::invalid_argument("classify_illposedness: need >= 8 positive sigmas");

    // Least-squares lines through (log i, log s_i) and (i, log s_i).
    const Index n = static_cast<Index>(s.size());
    double sx = 0, sxx = 0, tx = 0, txx = 0, sz = 0, sxz = 0, txz = 0;
    for (Index i = 0; i < n; ++i) {
        double li = std::log(static_cast<double>(i + 1));
        double ti = static_cast<double>(i + 1);
        double z = std::log(s[static_cast<size_t>(i)]);
        sx += li; sxx += li * li; sxz += li * z;
        tx += ti; txx += ti * ti; txz += ti * z;
        sz += z;
    }
    const double dn = static_cast<double>(n);
    double slope_pow = (dn * sxz - sx * sz) / (dn * sxx - sx * sx);
    double icpt_pow = (sz - slope_pow * sx) / dn;
    double slope_exp = (dn * txz - tx * sz) / (dn * txx - tx * tx);
    double icpt_exp = (sz - slope_exp * tx) / dn;

    double sse_pow = 0, sse_exp = 0;
    for (Index i = 0; i < n; ++i) {
        double li = std::log(static_cast<double>(i + 1));
        double ti = static_cast<double>(i + 1);
        double z = std::log(s[static_cast<size_t>(i)]);
        double rp = z - (icpt_pow + slope_pow * li);
        double re = z - (icpt_exp + slope_exp * ti);
        sse_pow += rp * rp;
        sse_exp += re * re;
    }

    Classification c;
    c.alpha_hat = -slope_pow;
    if (sse_exp < sse_pow)
        c.kind = Illposedness::severe;
    else
        c.kind = (c.alpha_hat <= 1.0) ? Illposedness::mild : Illposedness::moderate;
    return c;
}

Vector tsvd_solve(const core::SvdFactors& f, const Vector& y, Index k, double rank_tol) {
    const Index r = f.sigmas.size();
    Index numeric_rank = 0;
    const double s1 = r ? f.sigmas[0] : 0.0;
    for (Index i = 0; i < r; ++i)
        if (f.sigmas[i] > rank_tol * s1) ++numeric_rank;
    if (k < 1 || k > numeric_rank) throw std::invalid_argument("tsvd_solve: k out of range");
    Vector x = Vector::Zero(f.Vt.cols());
    for (Index i = 0; i < k; ++i)
        x += (f.U.col(i).dot(y) / f.sigmas[i]) * f.Vt.row(i).transpose();
    return x;
}

FilterFactors filter_factors(const Vector& sigmas, double lambda, TikhonovKind) {
    if (lambda < 0.0) throw std::invalid_argument("filter_factors: lambda must be >= 0");
    Vector phi(sigmas.size());
    for (Index i = 0; i < sigmas.size(); ++i) {
        double s2 = sigmas[i] * sigmas[i];
        phi[i] = (s2 + lambda * lambda > 0.0) ? s2 / (s2 + lambda * lambda) : 0.0;
    }
    return {phi};
}

FilterFactors filter_factors(const Vector& sigmas, double lambda, DampedKind) {
    if (lambda < 0.0) throw std::invalid_argument("filter_factors: lambda must be >= 0");
    Vector phi(sigmas.size());
    for (Index i = 0; i < sigmas.size(); ++i)
        phi[i] = (sigmas[i] + lambda > 0.0) ? sigmas[i] / (sigmas[i] + lambda) : 0.0;
    return {phi};
}

FilterFactors filter_factors(const Vector& sigmas, double, TsvdKind kind) {
    Vector phi = Vector::Zero(sigmas.size());
    for (Index i = 0; i < std::min(kind.k, sigmas.size()); ++i) phi[i] = 1.0;
    return {phi};
}

Vector tikhonov_svd_solve(const core::SvdFactors& f, const Vector& y, double lambda) {
    FilterFactors ff = filter_factors(f.sigmas, lambda, TikhonovKind{});
    Vector x = Vector::Zero(f.Vt.cols());
    for (Index i = 0; i < f.sigmas.size(); ++i) {
        if (f.sigmas[i] <= 0.0) continue;
        x += ff.phi[i] * (f.U.col(i).dot(y) / f.sigmas[i]) * f.Vt.row(i).transpose();
    }
    return x;
}

}  // namespace ip::spectral
