#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "illposed/direct.hpp"
#include "illposed/operators.hpp"
#include "illposed/paramsel.hpp"
#include "illposed/regmat.hpp"
#include "oracles.hpp"

using ip::Index;
using ip::Matrix;
using ip::Vector;
namespace psel = ip::psel;

namespace {

// Shared mildly ill-posed instance: 1d gaussian blur with noise.
struct Instance {
    Matrix A;
    Vector y;
    Vector xt;
};

Instance blur_instance(double noise_std, uint64_t seed) {
    const Index n = 32;
    Matrix A(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            double d = static_cast<double>(i - j);
            A(i, j) = std::exp(-d * d / 8.0);
        }
    A /= A.row(n / 2).sum();
    Vector xt(n);
    for (Index i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / (n - 1);
        xt(i) = std::sin(6.28318530717958648 * t) + 0.5 * (t > 0.5 ? 1.0 : 0.0);
    }
    Vector y = ip::ops::add_noise(A * xt, ip::ops::GaussianNoise{0.0, noise_std}, seed);
    return {A, y, xt};
}

}  // namespace

TEST_CASE("log grid spacing is geometric") {
    Vector g = psel::log_grid(1e-4, 1.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g(0) == doctest::Approx(1e-4));
    CHECK(g(4) == doctest::Approx(1.0));
    for (int i = 0; i + 1 < 4; ++i)
        CHECK(g(i + 1) / g(i) == doctest::Approx(g(i + 2) / g(i + 1)).epsilon(1e-12));

    CHECK_THROWS_AS(psel::log_grid(0.0, 1.0, 5), std::invalid_argument);
    CHECK_THROWS_AS(psel::log_grid(1.0, 0.5, 5), std::invalid_argument);
}

TEST_CASE("fast residual evaluation matches a direct solve") {
    auto inst = blur_instance(1e-2, 3);
    auto f = ip::core::svd(inst.A);
    for (double lam : {1e-4, 1e-2, 0.3, 5.0}) {
        Vector x = ip::direct::tikhonov_general(inst.A, inst.y,
                                                {Matrix::Identity(32, 32), lam});
        double direct = (inst.A * x - inst.y).norm();
        CHECK(psel::residual_at(f, inst.y, lam) == doctest::Approx(direct).epsilon(1e-8));
    }
}

TEST_CASE("residual accounts for data outside the column space") {
    // tall rank-deficient-in-range system: even lambda -> 0 leaves a residual
    Matrix A = oracle::fixture_matrix(8, 3, 201);
    Vector y = oracle::fixture_vector(8, 202);
    auto f = ip::core::svd(A);
    Vector xls = oracle::lstsq(A, y);
    double floor = (A * xls - y).norm();
    CHECK(psel::residual_at(f, y, 1e-12) == doctest::Approx(floor).epsilon(1e-8));
}

TEST_CASE("lcurve finds an interior corner on the standard grid") {
    auto inst = blur_instance(1e-2, 5);
    Vector grid = psel::log_grid(1e-6, 0.8, 20);
    auto lc = psel::lcurve(inst.A, inst.y, Matrix::Identity(32, 32), grid);

    REQUIRE(lc.lambdas.size() == 20);
    CHECK(lc.corner_index > 0);
    CHECK(lc.corner_index < 19);
    CHECK(lc.corner_lambda == lc.lambdas(lc.corner_index));

    // residuals grow along the grid, seminorms shrink
    for (Index i = 0; i + 1 < 20; ++i) {
        CHECK(lc.residual_norms(i) <= lc.residual_norms(i + 1) + 1e-10);
        CHECK(lc.seminorms(i) >= lc.seminorms(i + 1) - 1e-10);
    }

    // the corner really is the curvature argmax per the three point oracle
    double best = -1e300;
    Index best_i = 0;
    for (Index i = 1; i + 1 < 20; ++i) {
        double c = oracle::three_point_curvature(
            std::log(lc.residual_norms(i - 1)), std::log(lc.seminorms(i - 1)),
            std::log(lc.residual_norms(i)), std::log(lc.seminorms(i)),
            std::log(lc.residual_norms(i + 1)), std::log(lc.seminorms(i + 1)));
        if (std::isfinite(c) && c > best) {
            best = c;
            best_i = i;
        }
    }
    CHECK(lc.corner_index == best_i);
}

TEST_CASE("lcurve input validation") {
    auto inst = blur_instance(1e-2, 5);
    Matrix I = Matrix::Identity(32, 32);
    Vector small = psel::log_grid(1e-3, 1.0, 4);
    CHECK_THROWS_AS(psel::lcurve(inst.A, inst.y, I, small), std::invalid_argument);
    Vector bad(5);
    bad << -1.0, 0.1, 0.2, 0.3, 0.4;
    CHECK_THROWS_AS(psel::lcurve(inst.A, inst.y, I, bad), std::invalid_argument);
}

TEST_CASE("lcurve csv layout") {
    auto inst = blur_instance(1e-2, 5);
    auto lc = psel::lcurve(inst.A, inst.y, Matrix::Identity(32, 32),
                           psel::log_grid(1e-4, 1.0, 6));
    const std::string path = "lcurve_test.csv";
    psel::write_lcurve_csv(path, lc);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "lambda,residual_norm,seminorm");
    std::remove(path.c_str());
}

TEST_CASE("gcv value matches the dense influence trace formula") {
    auto inst = blur_instance(1e-2, 7);
    auto f = ip::core::svd(inst.A);
    const Index m = inst.A.rows();
    for (double lam : {1e-3, 0.05, 0.4}) {
        Vector x = ip::direct::tikhonov_general(inst.A, inst.y,
                                                {Matrix::Identity(32, 32), lam});
        double r2 = (inst.A * x - inst.y).squaredNorm();
        double tr = oracle::influence_trace_dense(inst.A, lam);
        double want = static_cast<double>(m) * r2 / (tr * tr);
        CHECK(psel::gcv_value(f, inst.y, lam) == doctest::Approx(want).epsilon(1e-8));
    }
}

TEST_CASE("gcv flattens to the data energy for huge lambda") {
    auto inst = blur_instance(1e-2, 7);
    auto f = ip::core::svd(inst.A);
    const double m = static_cast<double>(inst.A.rows());
    // x_lambda -> 0, filter factors -> 0: G -> m ||y||^2 / m^2
    double limit = inst.y.squaredNorm() / m;
    CHECK(psel::gcv_value(f, inst.y, 1e10) == doctest::Approx(limit).epsilon(1e-6));
}

TEST_CASE("gcv rejects a degenerate trace") {
    // square invertible system at lambda = 0: every filter factor is 1
    Matrix A = oracle::fixture_matrix(5, 5, 203) + 3.0 * Matrix::Identity(5, 5);
    Vector y = oracle::fixture_vector(5, 204);
    auto f = ip::core::svd(A);
    CHECK_THROWS_AS(psel::gcv_value(f, y, 0.0), std::domain_error);
}

TEST_CASE("gcv curve marks its minimum") {
    auto inst = blur_instance(1e-2, 9);
    Vector grid = psel::log_grid(1e-5, 1.0, 25);
    auto gc = psel::gcv(inst.A, inst.y, grid);
    REQUIRE(gc.values.size() == 25);
    for (Index i = 0; i < 25; ++i) CHECK(gc.values(gc.argmin) <= gc.values(i));
    CHECK(gc.lambda_star == gc.lambdas(gc.argmin));

    const std::string path = "gcv_test.csv";
    psel::write_gcv_csv(path, gc);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "lambda,gcv");
    std::remove(path.c_str());
}

TEST_CASE("gcv minimum sits within one grid step of the mse optimum") {
    auto inst = blur_instance(1e-2, 9);
    Vector grid = psel::log_grid(1e-5, 1.0, 13);
    auto gc = psel::gcv(inst.A, inst.y, grid);

    Index mse_best = 0;
    double best = 1e300;
    for (Index i = 0; i < grid.size(); ++i) {
        Vector x = ip::direct::tikhonov_general(inst.A, inst.y,
                                                {Matrix::Identity(32, 32), grid(i)});
        double err = (x - inst.xt).squaredNorm();
        if (err < best) {
            best = err;
            mse_best = i;
        }
    }
    CHECK(std::abs(static_cast<long>(gc.argmin) - static_cast<long>(mse_best)) <= 1);
}

TEST_CASE("discrepancy bisection meets its target and inverts the forward map") {
    auto inst = blur_instance(1e-2, 11);
    auto f = ip::core::svd(inst.A);

    // forward construct: pick lambda0, use its residual as the target
    double lambda0 = 0.05;
    double delta = psel::residual_at(f, inst.y, lambda0);
    double lam = psel::discrepancy_lambda(inst.A, inst.y, delta, 1e-8, 10.0);
    CHECK(std::abs(psel::residual_at(f, inst.y, lam) - delta) <= 1e-6 * delta);
    CHECK(std::abs(lam - lambda0) <= 1e-4 * lambda0);
}

TEST_CASE("discrepancy general-penalty overload agrees with the identity fast path") {
    auto inst = blur_instance(1e-2, 13);
    auto f = ip::core::svd(inst.A);
    double delta = 1.05 * psel::residual_at(f, inst.y, 1e-8);
    double fast = psel::discrepancy_lambda(inst.A, inst.y, delta, 1e-8, 10.0);
    double general = psel::discrepancy_lambda(inst.A, inst.y, Matrix::Identity(32, 32),
                                              delta, 1e-8, 10.0);
    CHECK(fast == doctest::Approx(general).epsilon(1e-4));
}

TEST_CASE("discrepancy rejects an invalid bracket") {
    auto inst = blur_instance(1e-2, 11);
    // delta below the attainable residual floor
    CHECK_THROWS_AS(psel::discrepancy_lambda(inst.A, inst.y, 1e-12, 1e-8, 10.0),
                    std::invalid_argument);
    // delta above the residual at the top of the bracket
    CHECK_THROWS_AS(psel::discrepancy_lambda(inst.A, inst.y, 1e6, 1e-8, 10.0),
                    std::invalid_argument);
}

TEST_CASE("discrepancy lambda exceeds the lcurve corner lambda") {
    auto inst = blur_instance(1e-2, 15);
    const Index n = 32;
    auto f = ip::core::svd(inst.A);

    double delta = std::sqrt(static_cast<double>(n)) * 1e-2;  // true noise level
    double lam_d = psel::discrepancy_lambda(inst.A, inst.y, delta, 1e-8, 50.0);

    auto lc = psel::lcurve(inst.A, inst.y, Matrix::Identity(n, n),
                           psel::log_grid(1e-6, 0.8, 20));
    CHECK(lam_d > lc.corner_lambda);
}
