#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "doctest.h"
#include "spinavg/errors.hpp"
#include "spinavg/numerics.hpp"

using namespace spinavg;

namespace {

double norm1_of(const Eigen::MatrixXd& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace

TEST_CASE("gauss-legendre rules are exact for low-degree polynomials") {
    // n nodes integrate degree 2n-1 exactly
    for (int n = 1; n <= 6; ++n) {
        const QuadratureRule rule = gauss_legendre_rule(n);
        REQUIRE(rule.nodes.size() == n);
        CHECK(rule.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
        for (int d = 0; d <= 2 * n - 1; ++d) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += rule.weights[i] * std::pow(rule.nodes[i], d);
            const double exact = d % 2 == 0 ? 2.0 / (d + 1) : 0.0;
            CHECK(std::abs(acc - exact) < 1e-13);
        }
    }

    CHECK(gauss_legendre([](double x) { return x * x; }, 0.0, 1.0, 2) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(gauss_legendre([](double x) { return std::sin(x); }, 0.0, M_PI, 16) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(gauss_legendre([](double x) { return std::exp(x); }, 0.7, 0.7, 4) == 0.0);
    CHECK_THROWS_AS(gauss_legendre_rule(0), std::invalid_argument);
}

TEST_CASE("gauss-hermite rules match gaussian moments") {
    const QuadratureRule one = gauss_hermite_rule(1);
    CHECK(std::abs(one.nodes[0]) < 1e-14);
    CHECK(one.weights[0] == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-14));

    // int x^k exp(-x^2) dx = sqrt(pi) (k-1)!! / 2^(k/2) for even k
    const QuadratureRule rule = gauss_hermite_rule(5);
    const double rpi = std::sqrt(M_PI);
    const std::vector<double> exact = {rpi, 0.0, rpi / 2, 0.0, 3 * rpi / 4, 0.0, 15 * rpi / 8,
                                       0.0, 105 * rpi / 16};
    for (size_t d = 0; d < exact.size(); ++d) {
        double acc = 0.0;
        for (int i = 0; i < 5; ++i) acc += rule.weights[i] * std::pow(rule.nodes[i], double(d));
        CHECK(std::abs(acc - exact[d]) < 1e-12 * std::max(1.0, std::abs(exact[d])));
    }

    // expectation of f under Normal(mu, sigma^2) via lambda = mu + sqrt(2) sigma x
    const double mu = 0.3, sigma = 0.7;
    double mean2 = 0.0;
    for (int i = 0; i < 5; ++i) {
        const double lam = mu + std::sqrt(2.0) * sigma * rule.nodes[i];
        mean2 += rule.weights[i] / rpi * lam * lam;
    }
    CHECK(mean2 == doctest::Approx(mu * mu + sigma * sigma).epsilon(1e-13));
}

TEST_CASE("matrix exponential action matches the dense exponential") {
    const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(2, 1.0, 2.0);
    CHECK((expm_action(Eigen::MatrixXd::Zero(2, 2), v) - v).norm() == 0.0);

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = std::log(2.0);
    d(1, 1) = std::log(3.0);
    const Eigen::VectorXd dv = expm_action(d, v);
    CHECK(dv[0] == doctest::Approx(2.0 * v[0]).epsilon(1e-13));
    CHECK(dv[1] == doctest::Approx(3.0 * v[1]).epsilon(1e-13));

    srand(12345);
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(40, 40);
    Eigen::VectorXd w = Eigen::VectorXd::Random(40);
    const Eigen::VectorXd ref = a.exp() * w;

    SUBCASE("single segment") {
        const Eigen::MatrixXd small = a * (3.0 / norm1_of(a));
        const Eigen::VectorXd ref_small = small.exp() * w;
        const Eigen::VectorXd got = expm_action(small, w);
        CHECK((got - ref_small).norm() < 1e-11 * ref_small.norm());
    }
    SUBCASE("segmented at large norm") {
        const Eigen::MatrixXd big = a * (40.0 / norm1_of(a));
        const Eigen::VectorXd ref_big = big.exp() * w;
        const Eigen::VectorXd got = expm_action(big, w);
        CHECK((got - ref_big).norm() < 1e-9 * ref_big.norm());
    }
    SUBCASE("sparse path agrees with dense") {
        Eigen::SparseMatrix<double, Eigen::RowMajor> sp = a.sparseView();
        const Eigen::VectorXd dense_out = expm_action(a, w);
        const Eigen::VectorXd sparse_out = expm_action(sp, w);
        CHECK((dense_out - sparse_out).norm() < 1e-12 * dense_out.norm());
        CHECK((dense_out - ref).norm() < 1e-9 * ref.norm());
    }

    CHECK_THROWS_AS(expm_action(Eigen::MatrixXd::Zero(3, 2), v), std::invalid_argument);
}

TEST_CASE("adaptive integration tracks analytic solutions") {
    SUBCASE("scalar decay") {
        OdeProblem p;
        p.rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = -y; };
        p.y0 = Eigen::VectorXd::Ones(1);
        p.t_end = 2.0;
        const std::vector<double> times = {0.0, 0.5, 1.0, 2.0};
        const auto snaps = integrate(p, times);
        REQUIRE(snaps.size() == 4);
        CHECK(snaps[0][0] == 1.0);
        for (size_t i = 1; i < times.size(); ++i)
            CHECK(snaps[i][0] == doctest::Approx(std::exp(-times[i])).epsilon(1e-7));
    }

    SUBCASE("zero right-hand side is preserved exactly") {
        OdeProblem p;
        p.rhs = [](double, const Eigen::VectorXd&, Eigen::VectorXd& dy) { dy.setZero(); };
        p.y0 = Eigen::VectorXd::LinSpaced(3, -1.0, 1.0);
        p.t_end = 5.0;
        const auto snaps = integrate(p, {2.5, 5.0});
        CHECK((snaps[0] - p.y0).norm() == 0.0);
        CHECK((snaps[1] - p.y0).norm() == 0.0);
    }

    SUBCASE("linear system matches the exponential action") {
        srand(777);
        const Eigen::MatrixXd a = Eigen::MatrixXd::Random(6, 6);
        OdeProblem p;
        p.rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = a * y; };
        p.y0 = Eigen::VectorXd::Random(6);
        p.t_end = 1.0;
        p.rtol = 1e-10;
        p.atol = 1e-12;
        const std::vector<double> times = {0.3, 0.7, 1.0};
        const auto snaps = integrate(p, times);
        for (size_t i = 0; i < times.size(); ++i) {
            const Eigen::VectorXd ref = expm_action(Eigen::MatrixXd(times[i] * a), p.y0);
            CHECK((snaps[i] - ref).norm() < 1e-8 * std::max(1.0, ref.norm()));
        }
    }

    SUBCASE("harmonic oscillator closes its period") {
        const double omega = 3.0;
        OdeProblem p;
        p.rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
            dy[0] = y[1];
            dy[1] = -omega * omega * y[0];
        };
        p.y0 = Eigen::VectorXd::Zero(2);
        p.y0[0] = 1.0;
        p.t_end = 2.0 * M_PI / omega;
        p.rtol = 1e-10;
        p.atol = 1e-12;
        const auto snaps = integrate(p, {p.t_end});
        CHECK((snaps[0] - p.y0).norm() < 1e-6);
    }

    SUBCASE("tighter tolerances give smaller errors") {
        auto run = [](double rtol, double atol) {
            OdeProblem p;
            p.rhs = [](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
                dy = std::cos(10.0 * t) * y;
            };
            p.y0 = Eigen::VectorXd::Ones(1);
            p.t_end = 2.0;
            p.rtol = rtol;
            p.atol = atol;
            const auto snaps = integrate(p, {2.0});
            return std::abs(snaps[0][0] - std::exp(std::sin(20.0) / 10.0));
        };
        const double loose = run(1e-4, 1e-6);
        const double tight = run(1e-12, 1e-14);
        CHECK(tight < 1e-10);
        CHECK(tight < loose);
    }

    SUBCASE("invalid requests are rejected") {
        OdeProblem p;
        p.rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = y; };
        p.y0 = Eigen::VectorXd::Ones(1);
        p.t_end = 1.0;
        CHECK_THROWS_AS(integrate(p, {0.5, 0.2}), std::invalid_argument);
        CHECK_THROWS_AS(integrate(p, {1.5}), std::invalid_argument);
        p.rtol = 0.0;
        CHECK_THROWS_AS(integrate(p, {0.5}), std::invalid_argument);
    }

    SUBCASE("finite-time blow-up reports the failure time") {
        OdeProblem p;
        p.rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
            dy = y.cwiseProduct(y);
        };
        p.y0 = Eigen::VectorXd::Ones(1);  // solution 1/(1-t) diverges at t = 1
        p.t_end = 2.0;
        try {
            integrate(p, {2.0});
            FAIL("expected numeric_error");
        } catch (const numeric_error& e) {
            CHECK(std::string(e.what()).find("t = ") != std::string::npos);
        }
    }
}

TEST_CASE("linear solves report residuals and reject singular systems") {
    SUBCASE("identity") {
        const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(4, 1.0, 4.0);
        const LinearSolveResult res = solve_linear(Eigen::MatrixXd::Identity(4, 4), b);
        CHECK((res.x - b).norm() == 0.0);
        CHECK(res.residual == 0.0);
        CHECK(!res.conditioning_warning);
    }

    SUBCASE("well-conditioned dense system") {
        srand(31);
        const int n = 100;
        const Eigen::MatrixXd r = Eigen::MatrixXd::Random(n, n);
        const Eigen::MatrixXd a =
            r * r.transpose() + double(n) * Eigen::MatrixXd::Identity(n, n);
        const Eigen::VectorXd b = Eigen::VectorXd::Random(n);
        const LinearSolveResult res = solve_linear(a, b);
        CHECK(res.residual < 1e-10);
        CHECK(!res.conditioning_warning);
        CHECK(res.rcond > 1e-8);
        const Eigen::VectorXd ref = a.ldlt().solve(b);
        CHECK((res.x - ref).norm() < 1e-10 * ref.norm());
    }

    SUBCASE("singular matrix") {
        const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(4, 4);
        CHECK_THROWS_AS(solve_linear(ones, Eigen::VectorXd::Ones(4)), numeric_error);
    }

    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(solve_linear(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Ones(2)),
                        std::invalid_argument);
    }
}
