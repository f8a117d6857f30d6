#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "illposed/core.hpp"
#include "illposed/regression.hpp"
#include "oracles.hpp"

using ip::Index;
using ip::Matrix;
using ip::Vector;
namespace rg = ip::regress;

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

Vector uniform_grid(Index n) {
    Vector t(n);
    for (Index i = 0; i < n; ++i) t(i) = kTau * static_cast<double>(i) / static_cast<double>(n);
    return t;
}

}  // namespace

TEST_CASE("polynomial design holds plain powers") {
    Vector t(3);
    t << 0.0, 1.0, 2.0;
    Matrix X = rg::design_poly(t, 3);
    REQUIRE(X.rows() == 3);
    REQUIRE(X.cols() == 4);
    CHECK(X(0, 0) == 1.0);
    CHECK(X(0, 3) == 0.0);
    CHECK(X(1, 2) == 1.0);
    CHECK(X(2, 1) == 2.0);
    CHECK(X(2, 2) == 4.0);
    CHECK(X(2, 3) == 8.0);
}

TEST_CASE("trigonometric design interleaves cosine and sine pairs") {
    Vector t(4);
    t << 0.0, 0.5, 1.0, 1.5;
    Matrix X = rg::design_trig(t, {1, 3});
    REQUIRE(X.cols() == 4);
    for (Index i = 0; i < 4; ++i) {
        CHECK(X(i, 0) == doctest::Approx(std::cos(t(i))));
        CHECK(X(i, 1) == doctest::Approx(std::sin(t(i))));
        CHECK(X(i, 2) == doctest::Approx(std::cos(3.0 * t(i))));
        CHECK(X(i, 3) == doctest::Approx(std::sin(3.0 * t(i))));
    }
}

TEST_CASE("trig columns are orthogonal on a full-period uniform grid") {
    Vector t = uniform_grid(40);
    Matrix X = rg::design_trig(t, {1, 3});
    Matrix G = X.transpose() * X;
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j)
            if (i != j) CHECK(std::abs(G(i, j)) <= 1e-8);
}

TEST_CASE("high degree polynomial designs are badly conditioned") {
    Vector t = uniform_grid(40);
    Matrix X = rg::design_poly(t, 9);
    CHECK(ip::core::condition_number(X) > 1e4);
}

TEST_CASE("ols equals the least squares oracle") {
    Matrix X = oracle::fixture_matrix(20, 5, 251);
    Vector y = oracle::fixture_vector(20, 252);
    Vector b = rg::ols(X, y);
    CHECK((b - oracle::lstsq(X, y)).norm() <= 1e-9);
}

TEST_CASE("ridge interpolates between ols and zero") {
    Matrix X = oracle::fixture_matrix(15, 6, 253);
    Vector y = oracle::fixture_vector(15, 254);

    Vector b0 = rg::ridge(X, y, 0.0);
    CHECK((b0 - rg::ols(X, y)).norm() <= 1e-8 * (1.0 + b0.norm()));

    double prev = b0.norm();
    for (double lam : {0.1, 0.5, 2.0, 10.0}) {
        double norm = rg::ridge(X, y, lam).norm();
        CHECK(norm <= prev + 1e-12);
        prev = norm;
    }

    // shrinkage statement with the penalty entering linearly: weight 2
    // in the linear form corresponds to sqrt(2) for the solver
    Vector bridge = rg::ridge(X, y, std::sqrt(2.0));
    CHECK(bridge.norm() < rg::ols(X, y).norm());
}

TEST_CASE("lasso zeroes out under a strong enough penalty") {
    Matrix X = oracle::fixture_matrix(12, 5, 255);
    Vector y = oracle::fixture_vector(12, 256);

    // with lambda^2 >= 2 ||X^T y||_inf the zero vector is stationary
    double lam = std::sqrt(2.0 * (X.transpose() * y).lpNorm<Eigen::Infinity>()) + 0.1;
    Vector b = rg::lasso(X, y, lam, {500, 1e-14, std::nullopt});
    CHECK(b.norm() <= 1e-10);

    // just below the critical weight only the strongest coordinates survive
    double lam2 = std::sqrt(1.2 * (X.transpose() * y).lpNorm<Eigen::Infinity>());
    Vector b2 = rg::lasso(X, y, lam2, {2000, 1e-14, std::nullopt});
    CHECK(b2.norm() > 0.0);
    Index zeros = 0;
    for (Index i = 0; i < 5; ++i)
        if (b2(i) == 0.0) ++zeros;
    CHECK(zeros >= 1);
}

TEST_CASE("elastic net recovers its two limits") {
    Matrix X = oracle::fixture_matrix(18, 6, 257);
    Vector y = oracle::fixture_vector(18, 258);
    ip::iter::StopRule stop{4000, 1e-15, std::nullopt};

    Vector en_ridge = rg::elastic_net(X, y, 0.0, 0.7, stop);
    Vector br = rg::ridge(X, y, 0.7);
    CHECK((en_ridge - br).norm() <= 1e-6 * (1.0 + br.norm()));

    Vector en_lasso = rg::elastic_net(X, y, 0.6, 0.0, stop);
    Vector bl = rg::lasso(X, y, 0.6, stop);
    double o1 = (X * en_lasso - y).squaredNorm() + 0.36 * en_lasso.lpNorm<1>();
    double o2 = (X * bl - y).squaredNorm() + 0.36 * bl.lpNorm<1>();
    CHECK(std::abs(o1 - o2) <= 1e-6 * std::max(1.0, o2));
}

TEST_CASE("generalized lasso with the identity penalty is the lasso") {
    Matrix X = oracle::fixture_matrix(14, 6, 259);
    Vector y = oracle::fixture_vector(14, 260);
    double lam = 0.5;

    Vector bg = rg::gen_lasso(X, y, Matrix::Identity(6, 6), lam, 1.0,
                              {600, 0.0, std::nullopt});
    Vector bl = rg::lasso(X, y, lam, {4000, 1e-15, std::nullopt});
    double og = (X * bg - y).squaredNorm() + lam * lam * bg.lpNorm<1>();
    double ol = (X * bl - y).squaredNorm() + lam * lam * bl.lpNorm<1>();
    CHECK(std::abs(og - ol) <= 1e-6 * std::max(1.0, ol));
}

TEST_CASE("bias variance decomposition follows the closed form") {
    Matrix X = oracle::fixture_matrix(6, 4, 261);
    Vector beta(4);
    beta << 1.0, 0.5, 1.0 / 3.0, 0.25;
    double noise_var = 0.04;
    Vector grid(5);
    grid << 0.0, 0.1, 1.0, 5.0, 25.0;

    auto rows = rg::ridge_bias_variance(X, beta, noise_var, grid);
    REQUIRE(rows.size() == 5);

    // lambda 0: unbiased, variance is noise_var * sum sigma^-2
    auto f = ip::core::svd(X);
    double var0 = 0.0;
    for (Index i = 0; i < 4; ++i) var0 += noise_var / (f.sigmas(i) * f.sigmas(i));
    CHECK(rows[0].bias2 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rows[0].variance == doctest::Approx(var0).epsilon(1e-8));

    for (size_t k = 0; k < rows.size(); ++k) {
        CHECK(rows[k].mse == doctest::Approx(rows[k].variance + rows[k].bias2).epsilon(1e-12));
        if (k > 0) {
            CHECK(rows[k].variance <= rows[k - 1].variance + 1e-14);
            CHECK(rows[k].bias2 >= rows[k - 1].bias2 - 1e-14);
        }
    }

    // closed-form bias at one interior lambda
    double lam = 1.0;
    Matrix N = X.transpose() * X + lam * Matrix::Identity(4, 4);
    Vector v = N.ldlt().solve(beta);
    double bias2 = lam * lam * v.squaredNorm();
    CHECK(rows[2].bias2 == doctest::Approx(bias2).epsilon(1e-8));
}

TEST_CASE("monte carlo variance agrees with the formula") {
    Matrix X = oracle::fixture_matrix(6, 4, 262);
    Vector beta = oracle::fixture_vector(4, 263);
    double noise_std = 0.2;
    double lam = 1.0;

    Vector grid(1);
    grid << lam;
    auto rows = rg::ridge_bias_variance(X, beta, noise_std * noise_std, grid);
    double mc = oracle::ridge_mc_variance(X, beta, noise_std, lam, 2000, 17);
    CHECK(std::abs(mc - rows[0].variance) <= 0.05 * rows[0].variance);
}

TEST_CASE("bias variance csv layout") {
    std::vector<rg::BiasVarianceRow> rows = {{0.5, 0.25, 0.125, 0.375}};
    const std::string path = "bv_test.csv";
    rg::write_bias_variance_csv(path, rows);
    std::ifstream in(path);
    std::string header, r1;
    std::getline(in, header);
    std::getline(in, r1);
    CHECK(header == "lambda,variance,bias2,mse");
    CHECK(r1 == "0.5,0.25,0.125,0.375");
    std::remove(path.c_str());
}

TEST_CASE("ridge solver weight and linear form weight correspond quadratically") {
    Matrix X = oracle::fixture_matrix(10, 4, 264);
    Vector y = oracle::fixture_vector(10, 265);
    double lam_linear = 3.0;

    // (X^T X + lam I)^-1 X^T y computed directly
    Matrix N = X.transpose() * X + lam_linear * Matrix::Identity(4, 4);
    Vector direct = N.ldlt().solve(X.transpose() * y);
    Vector solver = rg::ridge(X, y, std::sqrt(lam_linear));
    CHECK((direct - solver).norm() <= 1e-9 * (1.0 + direct.norm()));
}
