// illposed: experiments on discrete ill-posed problems from the command line.
// Subcommands cover operator diagnostics, image deblurring, missing-data
// recovery, interpolation, compressed sensing, and penalized regression.
// Every run is deterministic for a fixed --seed and rewrites its outputs
// byte-for-byte.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "illposed/core.hpp"
#include "illposed/csv.hpp"
#include "illposed/direct.hpp"
#include "illposed/freq.hpp"
#include "illposed/iterative.hpp"
#include "illposed/operators.hpp"
#include "illposed/paramsel.hpp"
#include "illposed/regmat.hpp"
#include "illposed/regression.hpp"
#include "illposed/sparse.hpp"
#include "illposed/spectral.hpp"
#include "illposed/types.hpp"

namespace fs = std::filesystem;
using namespace ip;

namespace {

// Outputs are written to <name>.tmp and renamed in one commit pass, so a
// failing command leaves no half-written final files and the destructor
// sweeps up the temporaries.
class OutputStager {
  public:
    std::string stage(const fs::path& final_path) {
        fs::path tmp = final_path;
        tmp += ".tmp";
        staged_.emplace_back(tmp, final_path);
        return tmp.string();
    }
    void commit() {
        for (auto& [tmp, final_path] : staged_) {
            std::error_code ec;
            fs::rename(tmp, final_path, ec);
            if (ec)
                throw std::runtime_error("cannot move " + tmp.string() + " to " +
                                         final_path.string() + ": " + ec.message());
        }
        staged_.clear();
    }
    ~OutputStager() {
        for (auto& [tmp, final_path] : staged_) {
            std::error_code ec;
            fs::remove(tmp, ec);
        }
    }

  private:
    std::vector<std::pair<fs::path, fs::path>> staged_;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

double to_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw CLI::ValidationError(what, "cannot parse number '" + s + "'");
    }
}

long to_long(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw CLI::ValidationError(what, "cannot parse integer '" + s + "'");
    }
}

// --psf gaussian:5:1.0 | gaussian:5:1.0:2.0 | disk:5:2.0 | motion:7:5.0:45
ops::Psf parse_psf(const std::string& spec) {
    auto parts = split(spec, ':');
    if (parts.empty()) throw CLI::ValidationError("--psf", "empty spec");
    ops::PsfParams p;
    const std::string& kind = parts[0];
    if (kind == "gaussian") {
        if (parts.size() != 3 && parts.size() != 4)
            throw CLI::ValidationError("--psf", "gaussian takes size:sigma or size:sx:sy");
        p.size = to_long(parts[1], "--psf");
        p.sigma_x = to_double(parts[2], "--psf");
        if (parts.size() == 4) {
            p.sigma_y = to_double(parts[3], "--psf");
            return ops::psf_build(ops::PsfKind::gaussian_aniso, p);
        }
        p.sigma_y = p.sigma_x;
        return ops::psf_build(ops::PsfKind::gaussian_iso, p);
    }
    if (kind == "disk") {
        if (parts.size() != 3) throw CLI::ValidationError("--psf", "disk takes size:radius");
        p.size = to_long(parts[1], "--psf");
        p.radius = to_double(parts[2], "--psf");
        return ops::psf_build(ops::PsfKind::disk, p);
    }
    if (kind == "motion") {
        if (parts.size() != 4)
            throw CLI::ValidationError("--psf", "motion takes size:length:angle_deg");
        p.size = to_long(parts[1], "--psf");
        p.length = to_double(parts[2], "--psf");
        p.angle_deg = to_double(parts[3], "--psf");
        return ops::psf_build(ops::PsfKind::motion, p);
    }
    throw CLI::ValidationError("--psf", "unknown kind '" + kind + "'");
}

ops::BoundaryCondition parse_bc(const std::string& s) {
    if (s == "zero") return ops::BoundaryCondition::zero;
    if (s == "replicate") return ops::BoundaryCondition::replicate;
    if (s == "periodic") return ops::BoundaryCondition::periodic;
    if (s == "reflexive") return ops::BoundaryCondition::reflexive;
    throw CLI::ValidationError("--bc", "unknown boundary condition '" + s + "'");
}

// --noise none | gaussian:0.01 | poisson:255
struct NoiseSpec {
    enum class Kind { none, gaussian, poisson } kind = Kind::none;
    double param = 0.0;
};

NoiseSpec parse_noise(const std::string& s) {
    NoiseSpec n;
    if (s == "none" || s.empty()) return n;
    auto parts = split(s, ':');
    if (parts[0] == "gaussian" && parts.size() == 2) {
        n.kind = NoiseSpec::Kind::gaussian;
        n.param = to_double(parts[1], "--noise");
        return n;
    }
    if (parts[0] == "poisson" && parts.size() == 2) {
        n.kind = NoiseSpec::Kind::poisson;
        n.param = to_double(parts[1], "--noise");
        return n;
    }
    throw CLI::ValidationError("--noise", "unknown spec '" + s + "'");
}

Vector apply_noise(const Vector& y, const NoiseSpec& n, uint64_t seed) {
    switch (n.kind) {
        case NoiseSpec::Kind::none:
            return y;
        case NoiseSpec::Kind::gaussian:
            return ops::add_noise(y, ops::GaussianNoise{0.0, n.param}, seed);
        case NoiseSpec::Kind::poisson:
            return ops::add_noise(y, ops::PoissonNoise{n.param}, seed);
    }
    return y;
}

// --lambda-grid lo:hi:n, log spaced.
Vector parse_lambda_grid(const std::string& s) {
    auto parts = split(s, ':');
    if (parts.size() != 3) throw CLI::ValidationError("--lambda-grid", "expected lo:hi:n");
    double lo = to_double(parts[0], "--lambda-grid");
    double hi = to_double(parts[1], "--lambda-grid");
    long n = to_long(parts[2], "--lambda-grid");
    if (n < 2 || lo <= 0.0 || hi <= lo)
        throw CLI::ValidationError("--lambda-grid", "need 0 < lo < hi and n >= 2");
    return psel::log_grid(lo, hi, n);
}

ImageGrid load_or_phantom(const std::string& input, Index size) {
    if (!input.empty()) return ops::read_pgm(input);
    return ops::make_phantom(size, size);
}

double mse_of(const Vector& a, const Vector& b) {
    return (a - b).squaredNorm() / (double)a.size();
}

double psnr_of(double mse) { return 10.0 * std::log10(1.0 / std::max(mse, 1e-300)); }

reg::LKind parse_lkind(const std::string& s) {
    if (s == "identity") return reg::LKind::identity;
    if (s == "d1") return reg::LKind::d1;
    if (s == "d1-invertible") return reg::LKind::d1_invertible;
    if (s == "d2") return reg::LKind::d2;
    if (s == "d2-reflexive") return reg::LKind::d2_reflexive;
    throw CLI::ValidationError("--L", "unknown matrix kind '" + s + "'");
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOpts {
    std::string input, output_dir = "out", psf = "gaussian:5:1.0", bc = "zero",
                noise = "none";
    uint64_t seed = 0;
    Index size = 16;
    Index top_k = 200;
};

void run_analyze(const AnalyzeOpts& o) {
    ImageGrid x = load_or_phantom(o.input, o.size);
    if (x.size() > 2500)
        throw std::invalid_argument("analyze: image larger than 50x50, dense SVD impractical");
    ops::Psf psf = parse_psf(o.psf);
    Matrix A = ops::conv_matrix(psf, x.height, x.width, parse_bc(o.bc));
    Vector y = apply_noise(A * vectorize(x), parse_noise(o.noise), o.seed);

    core::SvdFactors f = core::svd(A);
    fs::create_directories(o.output_dir);
    OutputStager stage;

    {
        CsvWriter csv(stage.stage(fs::path(o.output_dir) / "singular_values.csv"),
                      "index,sigma");
        Index k = std::min<Index>(o.top_k, f.sigmas.size());
        for (Index i = 0; i < k; ++i) csv.row({(double)(i + 1), f.sigmas(i)});
        if (!csv.good()) throw std::runtime_error("analyze: cannot write singular value table");
    }
    spectral::write_picard_csv(stage.stage(fs::path(o.output_dir) / "picard.csv"),
                               spectral::picard_table(f, y));
    {
        spectral::Classification cl = spectral::classify_illposedness(f.sigmas);
        const char* kind = cl.kind == spectral::Illposedness::mild ? "mild"
                           : cl.kind == spectral::Illposedness::moderate ? "moderate"
                                                                          : "severe";
        std::ofstream rep(stage.stage(fs::path(o.output_dir) / "analysis.txt"),
                          std::ios::binary);
        rep << "condition_number=" << format_number(core::condition_number(f)) << "\n"
            << "classification=" << kind << "\n"
            << "alpha_hat=" << format_number(cl.alpha_hat) << "\n";
        if (!rep) throw std::runtime_error("analyze: cannot write analysis report");
    }
    stage.commit();
}

// ---------------------------------------------------------------- deblur

struct DeblurOpts {
    std::string input, output_dir = "out", psf = "gaussian:5:1.0", bc = "zero",
                noise = "none", method = "tikhonov", lambda_grid;
    uint64_t seed = 0;
    Index size = 24;
    double lambda = 0.05;
    double rho = 1.0;
    double nsr = 0.01;
    Index iters = 200;
    Index tsvd_k = 0;  // 0: numeric rank
    double p = 1.0;
    double epsilon = 1e-6;
};

bool method_uses_lambda(const std::string& m) {
    return m != "naive" && m != "tsvd" && m != "cgls" && m != "landweber" && m != "wiener";
}

bool method_is_spectral_division(const std::string& m) {
    return m == "fft-tikhonov" || m == "wiener";
}

void run_deblur(const DeblurOpts& o) {
    static const std::vector<std::string> kMethods = {
        "naive",     "tikhonov", "tikhonov-L", "tsvd",     "fista-l1", "irls",
        "admm-l1",   "tv-aniso", "tv-iso",     "maxent",   "pnp-median",
        "red-fp",    "red-sd",   "red-admm",   "cgls",     "landweber",
        "fft-tikhonov", "wiener"};
    if (std::find(kMethods.begin(), kMethods.end(), o.method) == kMethods.end())
        throw std::invalid_argument("deblur: unknown method '" + o.method + "'");

    ImageGrid x_true = load_or_phantom(o.input, o.size);
    const Index h = x_true.height, w = x_true.width, n = h * w;
    if (!method_is_spectral_division(o.method) && n > 4096)
        throw std::invalid_argument("deblur: image larger than 64x64 needs fft-tikhonov or wiener");
    ops::Psf psf = parse_psf(o.psf);
    ops::BoundaryCondition bc = parse_bc(o.bc);

    ImageGrid y_img = ops::conv2d(x_true, psf, bc);
    Vector y = apply_noise(vectorize(y_img), parse_noise(o.noise), o.seed);
    ImageGrid y_noisy = devectorize(y, h, w);
    const Vector xt = vectorize(x_true);

    std::vector<double> lambdas;
    if (!o.lambda_grid.empty() && method_uses_lambda(o.method)) {
        Vector g = parse_lambda_grid(o.lambda_grid);
        lambdas.assign(g.data(), g.data() + g.size());
    } else {
        lambdas.push_back(method_uses_lambda(o.method) ? o.lambda : 0.0);
    }

    // Dense operator for everything except the pure FFT methods.
    Matrix A;
    std::optional<core::SvdFactors> f;
    if (!method_is_spectral_division(o.method)) {
        A = ops::conv_matrix(psf, h, w, bc);
        if (o.method == "tsvd") f = core::svd(A);
    }
    iter::StopRule stop{o.iters, 1e-8, std::nullopt};

    fs::create_directories(o.output_dir);
    OutputStager stage;
    CsvWriter report(stage.stage(fs::path(o.output_dir) / "report.csv"),
                     "method,lambda,mse,psnr");

    for (double lam : lambdas) {
        Vector xr;
        iter::SolveReport rep;
        bool have_history = false;

        if (o.method == "naive") {
            xr = direct::naive_solve(A, y);
        } else if (o.method == "tikhonov") {
            xr = direct::tikhonov_general(
                A, y, reg::RegularizerSpec(Matrix::Identity(n, n), lam));
        } else if (o.method == "tikhonov-L") {
            Matrix L = reg::laplacian2d_operator(h, w, bc).to_dense();
            xr = direct::tikhonov_general(A, y, reg::RegularizerSpec(std::move(L), lam));
        } else if (o.method == "tsvd") {
            Index k = o.tsvd_k;
            if (k <= 0) {
                k = 0;
                for (Index i = 0; i < f->sigmas.size(); ++i)
                    if (f->sigmas(i) > 1e-12 * f->sigmas(0)) ++k;
            }
            xr = spectral::tsvd_solve(*f, y, k);
        } else if (o.method == "fista-l1") {
            rep = iter::fista(LinearOperator::from_matrix(A), y, lam, stop);
            xr = rep.x;
            have_history = true;
        } else if (o.method == "irls") {
            iter::IrlsConfig cfg;
            cfg.epsilon = o.epsilon;
            cfg.outer_iters = o.iters;
            rep = iter::irls(A, y, cfg, 2.0,
                             reg::RegularizerSpec(Matrix::Identity(n, n), lam), o.p);
            xr = rep.x;
            have_history = true;
        } else if (o.method == "admm-l1") {
            rep = iter::admm(LinearOperator::from_matrix(A), y, lam, o.rho,
                             iter::L1Penalty{Matrix::Identity(n, n)}, stop);
            xr = rep.x;
            have_history = true;
        } else if (o.method == "tv-aniso") {
            rep = iter::admm(LinearOperator::from_matrix(A), y, lam, o.rho,
                             iter::TvAniso2d{h, w}, stop);
            xr = rep.x;
            have_history = true;
        } else if (o.method == "tv-iso") {
            rep = iter::admm(LinearOperator::from_matrix(A), y, lam, o.rho,
                             iter::TvIso2d{h, w}, stop);
            xr = rep.x;
            have_history = true;
        } else if (o.method == "maxent") {
            rep = iter::maxent(A, y, lam, Vector::Ones(n), stop);
            xr = rep.x;
            have_history = true;
        } else if (o.method == "pnp-median") {
            rep = iter::pnp_admm(A, y, lam, iter::median_denoiser(3, 3), o.rho, stop, h, w);
            xr = rep.x;
            have_history = true;
        } else if (o.method == "red-fp" || o.method == "red-sd" || o.method == "red-admm") {
            iter::RedScheme scheme = o.method == "red-fp"   ? iter::RedScheme::fixed_point
                                     : o.method == "red-sd" ? iter::RedScheme::steepest
                                                            : iter::RedScheme::admm;
            rep = iter::red(A, y, lam, iter::median_denoiser(3, 3), scheme, stop, h, w, o.rho);
            xr = rep.x;
            have_history = true;
        } else if (o.method == "cgls") {
            rep = iter::cgls(LinearOperator::from_matrix(A), y, stop);
            xr = rep.x;
            have_history = true;
        } else if (o.method == "landweber") {
            auto op = LinearOperator::from_matrix(A);
            double smax = iter::estimate_sigma_max(op);
            rep = iter::landweber(op, y, 1.0 / (smax * smax), stop);
            xr = rep.x;
            have_history = true;
        } else if (o.method == "fft-tikhonov") {
            xr = vectorize(freq::fft_tikhonov(y_noisy, psf, lam));
        } else {  // wiener
            xr = vectorize(freq::wiener_nsr(y_noisy, psf, o.nsr));
        }

        double mse = mse_of(xr, xt);
        report.row_mixed({o.method, format_number(lam), format_number(mse),
                          format_number(psnr_of(mse))});

        std::string suffix =
            lambdas.size() == 1 ? "" : "_lambda_" + std::string(format_number(lam));
        ops::write_pgm(stage.stage(fs::path(o.output_dir) / ("restored" + suffix + ".pgm")),
                       devectorize(xr, h, w));
        if (have_history && !rep.history.empty()) {
            std::string hist = suffix.empty() ? "history.csv" : "history" + suffix + ".csv";
            iter::write_history_csv(stage.stage(fs::path(o.output_dir) / hist), rep);
        }
        if (!rep.warning.empty()) std::cerr << "warning: " << rep.warning << "\n";
    }
    if (!report.good()) throw std::runtime_error("deblur: cannot write report");
    stage.commit();
}

// ---------------------------------------------------------------- missing

struct MissingOpts {
    std::string output_dir = "out", L = "d2", noise = "none";
    std::vector<std::string> gaps = {"90:20"};
    uint64_t seed = 0;
    Index n = 200;
    double lambda = 0.05;
};

void run_missing(const MissingOpts& o) {
    if (o.n < 8) throw std::invalid_argument("missing: signal too short");
    Vector x_true(o.n);
    for (Index i = 0; i < o.n; ++i) {
        double t = 4.0 * M_PI * (double)i / (double)(o.n - 1);
        x_true(i) = std::sin(t) + 0.5 * std::cos(2.0 * t);
    }

    std::vector<char> missing((std::size_t)o.n, 0);
    for (const auto& g : o.gaps) {
        auto parts = split(g, ':');
        if (parts.size() != 2) throw CLI::ValidationError("--gap", "expected start:len");
        long start = to_long(parts[0], "--gap");
        long len = to_long(parts[1], "--gap");
        if (start <= 0 || len <= 0 || start + len >= o.n)
            throw std::invalid_argument("missing: gap must lie strictly inside the domain");
        for (long i = start; i < start + len; ++i) missing[(std::size_t)i] = 1;
    }

    std::vector<Index> keep;
    for (Index i = 0; i < o.n; ++i)
        if (!missing[(std::size_t)i]) keep.push_back(i);
    Matrix S = Matrix::Zero((Index)keep.size(), o.n);
    for (Index r = 0; r < (Index)keep.size(); ++r) S(r, keep[(std::size_t)r]) = 1.0;

    Vector y = apply_noise(S * x_true, parse_noise(o.noise), o.seed);
    Matrix L = reg::build_L(parse_lkind(o.L), o.n);
    Vector xr = direct::tikhonov_general(S, y, reg::RegularizerSpec(std::move(L), o.lambda));

    fs::create_directories(o.output_dir);
    OutputStager stage;
    {
        CsvWriter csv(stage.stage(fs::path(o.output_dir) / "missing.csv"),
                      "index,original,corrupted,reconstructed");
        Index at = 0;
        for (Index i = 0; i < o.n; ++i) {
            double corrupted = 0.0;
            if (!missing[(std::size_t)i]) corrupted = y(at++);
            csv.row({(double)i, x_true(i), corrupted, xr(i)});
        }
        if (!csv.good()) throw std::runtime_error("missing: cannot write table");
    }
    stage.commit();
}

// ---------------------------------------------------------------- interp

struct InterpOpts {
    std::string output_dir = "out", noise = "gaussian:0.05", freqs = "1,3";
    uint64_t seed = 0;
    Index nodes = 40;
    Index degree = 9;
};

void run_interp(const InterpOpts& o) {
    if (o.nodes < 4) throw std::invalid_argument("interp: too few nodes");
    Vector t(o.nodes);
    for (Index i = 0; i < o.nodes; ++i) t(i) = 2.0 * M_PI * (double)i / (double)o.nodes;
    Vector clean(o.nodes);
    for (Index i = 0; i < o.nodes; ++i) clean(i) = std::cos(t(i)) + std::cos(3.0 * t(i));
    Vector y = apply_noise(clean, parse_noise(o.noise), o.seed);

    std::vector<Index> freqs;
    for (const auto& s : split(o.freqs, ','))
        freqs.push_back(to_long(s, "--freqs"));

    Matrix Xp = regress::design_poly(t, o.degree);
    Matrix Xt = regress::design_trig(t, freqs);
    Vector bp = regress::ols(Xp, y);
    Vector bt = regress::ols(Xt, y);
    Vector fit_p = Xp * bp;
    Vector fit_t = Xt * bt;

    fs::create_directories(o.output_dir);
    OutputStager stage;
    {
        CsvWriter csv(stage.stage(fs::path(o.output_dir) / "interp.csv"),
                      "t,clean,observed,poly_fit,trig_fit");
        for (Index i = 0; i < o.nodes; ++i)
            csv.row({t(i), clean(i), y(i), fit_p(i), fit_t(i)});
        if (!csv.good()) throw std::runtime_error("interp: cannot write table");
    }
    {
        CsvWriter csv(stage.stage(fs::path(o.output_dir) / "interp_summary.csv"),
                      "model,mse");
        csv.row_mixed({"poly", format_number(mse_of(fit_p, clean))});
        csv.row_mixed({"trig", format_number(mse_of(fit_t, clean))});
        if (!csv.good()) throw std::runtime_error("interp: cannot write summary");
    }
    stage.commit();
}

// ---------------------------------------------------------------- cs

struct CsOpts {
    std::string output_dir = "out", basis = "identity";
    std::vector<Index> m_list = {8};
    uint64_t seed = 0;
    Index n = 64;
    Index sparsity = 1;
    double lambda = 1e-3;
};

void run_cs(const CsOpts& o) {
    if (o.sparsity < 1 || o.sparsity > o.n)
        throw std::invalid_argument("cs: sparsity out of range");
    sparse::Dictionary D = o.basis == "dct" ? sparse::dct_dictionary(o.n)
                         : o.basis == "identity"
                             ? sparse::identity_dictionary(o.n)
                             : throw std::invalid_argument("cs: unknown basis '" + o.basis + "'");

    // Deterministic sparse coefficients: distinct positions, alternating signs.
    Vector s_true = Vector::Zero(o.n);
    Index placed = 0;
    uint64_t probe = 0;
    while (placed < o.sparsity) {
        Index pos = (Index)(ops::counter_value(o.seed ^ 0xc5a11u, probe++) % (uint64_t)o.n);
        if (s_true(pos) != 0.0) continue;
        s_true(pos) = (placed % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.1 * (double)placed);
        ++placed;
    }
    Vector x_true = D.apply(s_true);

    std::vector<sparse::CsMetrics> rows;
    std::vector<std::pair<Index, std::pair<double, double>>> baseline;
    std::vector<Index> ms = o.m_list;
    std::sort(ms.begin(), ms.end());
    for (Index m : ms) {
        if (m < 1 || m > o.n) throw std::invalid_argument("cs: m out of range");
        Matrix Phi = sparse::gaussian_measurement(m, o.n, o.seed + (uint64_t)m);
        sparse::CsResult res = sparse::cs_recover_given(Phi, x_true, D, o.lambda);
        rows.push_back(res.metrics);

        // Minimum-l2 baseline through the right pseudoinverse.
        Vector x_l2 = core::pinv_right(Phi) * (Phi * x_true);
        double xn = x_true.norm();
        baseline.push_back({m, {res.metrics.recovery_error, (x_l2 - x_true).norm() / xn}});
    }

    fs::create_directories(o.output_dir);
    OutputStager stage;
    sparse::write_cs_csv(stage.stage(fs::path(o.output_dir) / "cs_metrics.csv"), rows);
    {
        CsvWriter csv(stage.stage(fs::path(o.output_dir) / "cs_baseline.csv"),
                      "m,l1_error,l2_error");
        for (const auto& [m, errs] : baseline)
            csv.row({(double)m, errs.first, errs.second});
        if (!csv.good()) throw std::runtime_error("cs: cannot write baseline");
    }
    stage.commit();
}

// ---------------------------------------------------------------- regress

struct RegressOpts {
    std::string output_dir = "out", lambda_grid = "0.001:10:25";
    uint64_t seed = 0;
    Index samples = 30;
    Index predictors = 8;
    double noise_var = 0.04;
    double lambda = 0.1;
};

void run_regress(const RegressOpts& o) {
    if (o.samples < o.predictors)
        throw std::invalid_argument("regress: need at least as many samples as predictors");
    Matrix X(o.samples, o.predictors);
    for (Index i = 0; i < o.samples; ++i)
        for (Index j = 0; j < o.predictors; ++j)
            X(i, j) = ops::counter_normal(o.seed, (uint64_t)(i * o.predictors + j));
    Vector beta_true(o.predictors);
    for (Index j = 0; j < o.predictors; ++j) beta_true(j) = 1.0 / (1.0 + (double)j);

    Vector eps(o.samples);
    double noise_std = std::sqrt(o.noise_var);
    for (Index i = 0; i < o.samples; ++i)
        eps(i) = noise_std * ops::counter_normal(o.seed ^ 0xdeadu, (uint64_t)i);
    Vector y = X * beta_true + eps;

    auto bv = regress::ridge_bias_variance(X, beta_true, o.noise_var,
                                           parse_lambda_grid(o.lambda_grid));

    iter::StopRule stop{2000, 1e-12, std::nullopt};
    Vector b_ols = regress::ols(X, y);
    Vector b_ridge = regress::ridge(X, y, o.lambda);
    Vector b_lasso = regress::lasso(X, y, o.lambda, stop);

    fs::create_directories(o.output_dir);
    OutputStager stage;
    regress::write_bias_variance_csv(
        stage.stage(fs::path(o.output_dir) / "bias_variance.csv"), bv);
    {
        CsvWriter csv(stage.stage(fs::path(o.output_dir) / "coefficients.csv"),
                      "model,index,value");
        auto emit = [&](const char* name, const Vector& b) {
            for (Index j = 0; j < b.size(); ++j)
                csv.row_mixed({name, format_number((double)j), format_number(b(j))});
        };
        emit("ols", b_ols);
        emit("ridge", b_ridge);
        emit("lasso", b_lasso);
        if (!csv.good()) throw std::runtime_error("regress: cannot write coefficients");
    }
    stage.commit();
}

// Turn a key=value config file into the equivalent command-line flags.
// Lines may carry # or ; comments; blank lines and the config key itself
// are skipped.
std::vector<std::string> config_file_flags(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::vector<std::string> flags;
    std::string line;
    auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || key == "config") continue;
        flags.push_back("--" + key);
        flags.push_back(val);
    }
    return flags;
}

// CLI11 only applies --config files attached to the command it parses at the
// top level, never to a subcommand, so expand the file into flags before the
// real parse. The injected flags go right after the subcommand name and every
// single-value option keeps its last occurrence, which gives the precedence
// flags > config file > defaults.
std::vector<std::string> with_config_expanded(std::vector<std::string> args) {
    std::vector<std::string> injected;
    for (std::size_t k = 0; k < args.size(); ++k) {
        if (args[k] == "--config" && k + 1 < args.size()) {
            auto f = config_file_flags(args[k + 1]);
            injected.insert(injected.end(), f.begin(), f.end());
        } else if (args[k].rfind("--config=", 0) == 0) {
            auto f = config_file_flags(args[k].substr(9));
            injected.insert(injected.end(), f.begin(), f.end());
        }
    }
    if (injected.empty() || args.empty() || args[0].empty() || args[0][0] == '-')
        return args;
    std::vector<std::string> out;
    out.push_back(args[0]);
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), args.begin() + 1, args.end());
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regularization methods for discrete ill-posed inverse problems"};
    app.require_subcommand(1);
    std::string config_path;

    AnalyzeOpts an;
    auto* a = app.add_subcommand("analyze", "SVD diagnostics of a blur operator");
    a->add_option("--input", an.input, "input PGM (default: built-in phantom)");
    a->add_option("--size", an.size, "phantom side length when no input is given");
    a->add_option("--output-dir", an.output_dir, "output directory");
    a->add_option("--psf", an.psf, "blur kernel, e.g. gaussian:5:1.0, disk:5:2.0, motion:7:5:45");
    a->add_option("--bc", an.bc, "boundary condition: zero|replicate|periodic|reflexive");
    a->add_option("--noise", an.noise, "noise on the blurred data: gaussian:std|poisson:scale|none");
    a->add_option("--seed", an.seed, "random seed");
    a->add_option("--top-k", an.top_k, "number of singular values to export");
    a->add_option("--config", config_path, "key=value defaults, explicit flags override");
    a->callback([&an] { run_analyze(an); });

    DeblurOpts de;
    auto* d = app.add_subcommand("deblur", "blur the input, then reconstruct it");
    d->add_option("--input", de.input, "ground-truth PGM (default: built-in phantom)");
    d->add_option("--size", de.size, "phantom side length when no input is given");
    d->add_option("--output-dir", de.output_dir, "output directory");
    d->add_option("--psf", de.psf, "blur kernel spec");
    d->add_option("--bc", de.bc, "boundary condition");
    d->add_option("--noise", de.noise, "noise spec");
    d->add_option("--seed", de.seed, "random seed");
    d->add_option("--method", de.method,
                  "naive|tikhonov|tikhonov-L|tsvd|fista-l1|irls|admm-l1|tv-aniso|tv-iso|"
                  "maxent|pnp-median|red-fp|red-sd|red-admm|cgls|landweber|fft-tikhonov|wiener");
    d->add_option("--lambda", de.lambda, "regularization weight (enters squared)");
    d->add_option("--lambda-grid", de.lambda_grid, "lo:hi:n log-spaced sweep");
    d->add_option("--rho", de.rho, "ADMM coupling weight");
    d->add_option("--nsr", de.nsr, "noise-to-signal ratio for wiener");
    d->add_option("--iters", de.iters, "iteration cap");
    d->add_option("--tsvd-k", de.tsvd_k, "TSVD truncation (0 = numeric rank)");
    d->add_option("--p", de.p, "penalty exponent for irls");
    d->add_option("--epsilon", de.epsilon, "IRLS weight floor");
    d->add_option("--config", config_path, "key=value defaults, explicit flags override");
    d->callback([&de] { run_deblur(de); });

    MissingOpts mi;
    auto* m = app.add_subcommand("missing", "recover a 1D signal with missing samples");
    m->add_option("--n", mi.n, "signal length");
    m->add_option("--gap", mi.gaps, "missing stretch start:len (repeatable)");
    m->add_option("--L", mi.L, "penalty matrix: identity|d1|d1-invertible|d2|d2-reflexive");
    m->add_option("--lambda", mi.lambda, "regularization weight");
    m->add_option("--noise", mi.noise, "noise on observed samples");
    m->add_option("--seed", mi.seed, "random seed");
    m->add_option("--output-dir", mi.output_dir, "output directory");
    m->add_option("--config", config_path, "key=value defaults, explicit flags override");
    m->callback([&mi] { run_missing(mi); });

    InterpOpts in;
    auto* i = app.add_subcommand("interp", "polynomial versus trigonometric fit");
    i->add_option("--nodes", in.nodes, "number of sample points");
    i->add_option("--degree", in.degree, "polynomial degree");
    i->add_option("--freqs", in.freqs, "comma-separated trig frequencies");
    i->add_option("--noise", in.noise, "noise spec");
    i->add_option("--seed", in.seed, "random seed");
    i->add_option("--output-dir", in.output_dir, "output directory");
    i->add_option("--config", config_path, "key=value defaults, explicit flags override");
    i->callback([&in] { run_interp(in); });

    CsOpts cs;
    auto* c = app.add_subcommand("cs", "compressed sensing recovery sweep");
    c->add_option("--n", cs.n, "signal length");
    c->add_option("--sparsity", cs.sparsity, "number of active coefficients");
    c->add_option("--m", cs.m_list, "measurement counts (repeatable)");
    c->add_option("--basis", cs.basis, "identity|dct");
    c->add_option("--lambda", cs.lambda, "final l1 weight");
    c->add_option("--seed", cs.seed, "random seed");
    c->add_option("--output-dir", cs.output_dir, "output directory");
    c->add_option("--config", config_path, "key=value defaults, explicit flags override");
    c->callback([&cs] { run_cs(cs); });

    RegressOpts re;
    auto* r = app.add_subcommand("regress", "ridge bias-variance sweep and penalized fits");
    r->add_option("--samples", re.samples, "rows of the design");
    r->add_option("--predictors", re.predictors, "columns of the design");
    r->add_option("--noise-var", re.noise_var, "noise variance of the simulated response");
    r->add_option("--lambda-grid", re.lambda_grid, "lo:hi:n sweep of the linear-form penalty");
    r->add_option("--lambda", re.lambda, "solver weight for the single ridge/lasso fits");
    r->add_option("--seed", re.seed, "random seed");
    r->add_option("--output-dir", re.output_dir, "output directory");
    r->add_option("--config", config_path, "key=value defaults, explicit flags override");
    r->callback([&re] { run_regress(re); });

    for (CLI::App* sub : {a, d, m, i, c, r})
        for (CLI::Option* opt : sub->get_options())
            if (opt->get_expected_max() == 1)
                opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    try {
        std::vector<std::string> args =
            with_config_expanded({argv + 1, argv + argc});
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
