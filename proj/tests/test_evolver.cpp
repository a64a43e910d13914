#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <vector>

#include "doctest.h"
#include "oracle_helpers.hpp"
#include "spinavg/baseline.hpp"
#include "spinavg/effective_maps.hpp"
#include "spinavg/errors.hpp"
#include "spinavg/evolver.hpp"
#include "spinavg/observables.hpp"
#include "spinavg/sym_basis.hpp"

using namespace spinavg;
using Cplx = std::complex<double>;

namespace {

double max_diff(const SymState& a, const SymState& b) {
    return (a.coeffs - b.coeffs).cwiseAbs().maxCoeff();
}

Eigen::MatrixXcd mean_hamiltonian(const DisorderModel& model) {
    const long dim = 1L << model.N;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    for (int i = 1; i <= model.N; ++i) {
        if (model.h != 0.0)
            h += model.h *
                 Eigen::MatrixXcd(oracle::sparse_pauli(model.N, {{i, PauliAxis::X}}));
        for (int j = i + 1; j <= model.N; ++j)
            h += model.pair_mean() * Eigen::MatrixXcd(oracle::sparse_pauli(
                                         model.N, {{i, PauliAxis::Z}, {j, PauliAxis::Z}}));
    }
    return h;
}

// e^{-iHt} rho e^{+iHt} by eigendecomposition
Eigen::MatrixXcd rotate_dense(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& rho,
                              double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd phases(es.eigenvalues().size());
    for (long k = 0; k < phases.size(); ++k)
        phases(k) = std::exp(Cplx(0.0, -es.eigenvalues()(k) * t));
    const Eigen::MatrixXcd u =
        es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return u * rho * u.adjoint();
}

double fit_slope(const std::vector<double>& ts, const std::vector<double>& errs) {
    const int n = int(ts.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = std::log(ts[i]);
        const double y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("validity horizon follows the inverse-cube-root law") {
    CHECK(t_bound({12, 1.0, 0.0, 0.1, true}) == doctest::Approx(1.8962).epsilon(1e-3));
    CHECK(std::isinf(t_bound({6, 1.0, 0.3, 0.0, true})));
    // horizon scales as (N-1)^{-1/3} and sigma^{-2/3}
    const double r_n = t_bound({2, 0.0, 0.0, 0.2, true}) / t_bound({101, 0.0, 0.0, 0.2, true});
    CHECK(r_n == doctest::Approx(std::cbrt(100.0)).epsilon(1e-12));
    const double r_s = t_bound({6, 0.0, 0.0, 0.01, true}) / t_bound({6, 0.0, 0.0, 1.0, true});
    CHECK(r_s == doctest::Approx(std::pow(100.0, 2.0 / 3.0)).epsilon(1e-12));
    CHECK_THROWS_AS(t_bound({1, 0.0, 0.0, 0.1, true}), std::invalid_argument);
}

TEST_CASE("methods and evolve entry points validate their arguments") {
    const DisorderModel model{3, 1.0, 0.0, 0.2, true};
    const SymState rho0 = polarized_state(3, PauliAxis::Z);
    const std::vector<double> times{0.1, 0.2};

    CHECK_THROWS_AS(Method::short_time(4), std::invalid_argument);
    CHECK_THROWS_AS(Method::short_time(-1), std::invalid_argument);
    CHECK_THROWS_AS(evolve_short_time(model, rho0, 5, times), std::invalid_argument);

    DisorderModel biased = model;
    biased.mean_J = 0.4;
    CHECK_THROWS_AS(
        evolve_weak_disorder(biased, rho0, Method::Regularization::exponential, times),
        std::invalid_argument);
    CHECK_THROWS_AS(evolve_sk_exact(model, rho0, times), std::invalid_argument);  // h != 0

    CHECK_THROWS_AS(evolve_short_time(model, rho0, 1, {0.2, 0.2}), std::invalid_argument);
    CHECK_THROWS_AS(evolve_short_time(model, rho0, 1, {0.5, 0.2}), std::invalid_argument);
    CHECK_THROWS_AS(evolve_short_time(model, rho0, 1, {-0.1, 0.2}), std::invalid_argument);

    const SymState mismatched = polarized_state(4, PauliAxis::Z);
    CHECK_THROWS_AS(evolve_short_time(model, mismatched, 1, times), std::invalid_argument);
    SymState truncated = rho0;
    truncated.coeffs.conservativeResize(truncated.coeffs.size() - 1);
    CHECK_THROWS_AS(evolve_short_time(model, truncated, 1, times), std::invalid_argument);

    // the dispatcher routes to the same implementations
    const Trajectory a = evolve(Method::short_time(2), model, rho0, times);
    const Trajectory b = evolve_short_time(model, rho0, 2, times);
    CHECK(max_diff(a.states[1], b.states[1]) == 0.0);
    CHECK(a.meta.method.kind == Method::Kind::short_time);
    CHECK(a.meta.method.order == 2);
    CHECK(a.meta.model.N == 3);
    CHECK(a.meta.seed == 0);
    CHECK(!a.meta.code_version.empty());
    CHECK(a.times == times);
    const Trajectory c = evolve(Method::weak_disorder(Method::Regularization::inverse), model,
                                rho0, times);
    const Trajectory d =
        evolve_weak_disorder(model, rho0, Method::Regularization::inverse, times);
    CHECK(max_diff(c.states[1], d.states[1]) == 0.0);
    const DisorderModel free_model{3, 0.0, 0.3, 0.2, true};
    const Trajectory e = evolve(Method::sk_exact(), free_model, rho0, times);
    const Trajectory f = evolve_sk_exact(free_model, rho0, times);
    CHECK(max_diff(e.states[1], f.states[1]) == 0.0);
}

TEST_CASE("disorder-free integration is exact mean-field rotation") {
    const DisorderModel model{3, 0.9, 0.7, 0.0, false};
    const SymState rho0 = polarized_state(3, PauliAxis::X);
    const std::vector<double> times{0.3, 0.8};

    const Eigen::MatrixXcd hbar = mean_hamiltonian(model);
    const Eigen::VectorXcd psi = dense_polarized_state(3, PauliAxis::X);
    const Eigen::MatrixXcd dense0 = psi * psi.adjoint();

    const Trajectory low = evolve_short_time(model, rho0, 0, times);
    const Trajectory high = evolve_short_time(model, rho0, 3, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const SymState oracle_state = project_full_state(
            DenseOperator{3, rotate_dense(hbar, dense0, times[k])}, rho0.basis);
        CHECK(max_diff(low.states[k], oracle_state) <= 1e-8);
        // every truncation order sees the same generator when sigma = 0
        CHECK(max_diff(low.states[k], high.states[k]) <= 1e-12);
    }
}

TEST_CASE("truncation orders coincide at small times and separate later") {
    const DisorderModel model{4, 1.0, 0.2, 0.3, true};
    const SymState rho0 = polarized_state(4, PauliAxis::Z);

    std::vector<Trajectory> runs;
    for (int order = 0; order <= 3; ++order)
        runs.push_back(evolve_short_time(model, rho0, order, {1e-3, 0.5}));
    for (int order = 0; order < 3; ++order)
        CHECK(max_diff(runs[order].states[0], runs[order + 1].states[0]) <= 1e-5);
    CHECK(max_diff(runs[0].states[1], runs[3].states[1]) >= 1e-6);
}

TEST_CASE("order-3 integration tracks the shot average at early times") {
    // window chosen so the O(t^5) truncation residual stays well below the
    // 1500-shot noise band; by t = 0.3 the two become comparable
    const DisorderModel model{4, 1.0, 0.0, 0.2, true};
    const std::vector<double> times{0.05, 0.1, 0.15, 0.2};
    const std::vector<ObservableSpec> obs{
        {ObservableSpec::Kind::magnetization, PauliAxis::Z}};

    const McEstimate mc = monte_carlo_average(model, 1500, dense_polarized_state(4, PauliAxis::Z),
                                              times, obs, 271828);
    const Trajectory run = evolve_short_time(model, polarized_state(4, PauliAxis::Z), 3, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double m = magnetization(run.states[k], PauliAxis::Z);
        CHECK(std::abs(m - mc.mean(long(k), 0)) <= 3.0 * mc.std_error(long(k), 0) + 1e-9);
    }
}

TEST_CASE("cumulant expansion closes at second order without a field") {
    // Gaussian couplings and h = 0: all cumulants beyond the second vanish,
    // so any truncation order >= 1 integrates to the closed-form map exactly
    const DisorderModel model{5, 0.0, 0.3, 0.4, true};
    const CumulantSet cumulants = build_cumulants(model, 3);
    CHECK(cumulants.kappa(3).data.cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(cumulants.kappa(4).data.cwiseAbs().maxCoeff() <= 1e-14);

    const SymState rho0 = polarized_state(5, PauliAxis::X);
    const std::vector<double> times{0.5, 1.5, 3.0};
    const Trajectory exact = evolve_sk_exact(model, rho0, times);
    for (int order : {1, 3}) {
        const Trajectory run = evolve_short_time(model, rho0, order, times);
        for (std::size_t k = 0; k < times.size(); ++k)
            CHECK(max_diff(run.states[k], exact.states[k]) <= 1e-10);
    }
}

TEST_CASE("averaged maps return the initial state at t = 0") {
    const DisorderModel model{4, 1.0, 0.0, 0.3, true};
    const SymState rho0 = polarized_state(4, PauliAxis::X);
    const std::vector<double> times{0.0, 0.7};

    for (auto reg : {Method::Regularization::none, Method::Regularization::exponential,
                     Method::Regularization::inverse}) {
        const Trajectory run = evolve_weak_disorder(model, rho0, reg, times);
        CHECK((run.states[0].coeffs - rho0.coeffs).cwiseAbs().maxCoeff() == 0.0);
    }
    const DisorderModel free_model{4, 0.0, 0.2, 0.3, true};
    const Trajectory sk = evolve_sk_exact(free_model, rho0, times);
    CHECK(max_diff(sk.states[0], rho0) <= 1e-13);
    const Trajectory st = evolve_short_time(model, rho0, 2, times);
    CHECK(max_diff(st.states[0], rho0) <= 1e-13);
}

TEST_CASE("weak-disorder map reduces to the bare field rotation at sigma = 0") {
    const DisorderModel model{3, 0.8, 0.0, 0.0, true};
    const std::vector<double> times{0.4, 0.9, 1.7};

    const Trajectory z_run = evolve_weak_disorder(model, polarized_state(3, PauliAxis::Z),
                                                  Method::Regularization::exponential, times);
    const Trajectory x_run = evolve_weak_disorder(model, polarized_state(3, PauliAxis::X),
                                                  Method::Regularization::exponential, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
        CHECK(magnetization(z_run.states[k], PauliAxis::Z) ==
              doctest::Approx(3.0 * std::cos(2.0 * 0.8 * times[k])).epsilon(1e-10));
        // the polarized field eigenstate is stationary
        CHECK(magnetization(x_run.states[k], PauliAxis::X) == doctest::Approx(3.0).epsilon(1e-10));
    }
    // the integrated generator agrees with the per-time map when both are exact
    const Trajectory st = evolve_short_time(model, polarized_state(3, PauliAxis::Z), 1, times);
    for (std::size_t k = 0; k < times.size(); ++k)
        CHECK(max_diff(st.states[k], z_run.states[k]) <= 1e-8);
}

TEST_CASE("exponential weak-disorder map is exact at zero field") {
    const DisorderModel model{5, 0.0, 0.0, 0.35, true};
    const SymState rho0 = polarized_state(5, PauliAxis::X);
    const std::vector<double> times{0.4, 1.1, 2.3};

    const Trajectory weak =
        evolve_weak_disorder(model, rho0, Method::Regularization::exponential, times);
    const Trajectory exact = evolve_sk_exact(model, rho0, times);
    for (std::size_t k = 0; k < times.size(); ++k)
        CHECK(max_diff(weak.states[k], exact.states[k]) <= 1e-9);

    // the unregularized first-order map genuinely differs by late times
    const Trajectory bare =
        evolve_weak_disorder(model, rho0, Method::Regularization::none, times);
    CHECK(max_diff(bare.states[2], exact.states[2]) >= 1e-4);
}

TEST_CASE("exponential and inverse regularizations agree to fourth order") {
    const DisorderModel model{6, 1.0, 0.0, 0.3, true};
    const SymState rho0 = polarized_state(6, PauliAxis::Z);
    const std::vector<double> times{0.25, 0.5, 1.0};  // up to 1/h

    const Trajectory expo =
        evolve_weak_disorder(model, rho0, Method::Regularization::exponential, times);
    const Trajectory inv =
        evolve_weak_disorder(model, rho0, Method::Regularization::inverse, times);
    const double bound = 5.0 * std::pow(model.sigma, 4);
    for (std::size_t k = 0; k < times.size(); ++k)
        CHECK(max_diff(expo.states[k], inv.states[k]) <= bound);

    CHECK(expo.meta.max_condition == 0.0);
    CHECK(inv.meta.max_condition >= 1.0);  // conditioning of 1 + sigma^2 O is recorded

    // all regularizations collapse together as sigma -> 0
    DisorderModel faint = model;
    faint.sigma = 0.05;
    const Trajectory f_none =
        evolve_weak_disorder(faint, rho0, Method::Regularization::none, times);
    const Trajectory f_expo =
        evolve_weak_disorder(faint, rho0, Method::Regularization::exponential, times);
    const Trajectory f_inv =
        evolve_weak_disorder(faint, rho0, Method::Regularization::inverse, times);
    const double faint_bound = 5.0 * std::pow(faint.sigma, 4);
    for (std::size_t k = 0; k < times.size(); ++k) {
        CHECK(max_diff(f_none.states[k], f_expo.states[k]) <= faint_bound);
        CHECK(max_diff(f_inv.states[k], f_expo.states[k]) <= faint_bound);
    }
}

TEST_CASE("exact trajectory matches the per-time closed map") {
    const DisorderModel model{5, 0.0, 0.3, 0.4, true};
    const SymState rho0 = polarized_state(5, PauliAxis::X);
    const std::vector<double> times{0.3, 0.9, 1.8};

    const Trajectory run = evolve_sk_exact(model, rho0, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const SymSuperOp map = sk_exact_map(times[k], model);
        const Eigen::VectorXd expected = map.data * rho0.coeffs;
        CHECK((run.states[k].coeffs - expected).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("trajectories preserve the trace and stay physical") {
    // grid inside every method's validity window: the truncated generator is
    // not completely positive and overshoots purity 1 past t ~ 1.1 here
    const std::vector<double> times{0.2, 0.5, 0.9};
    const int n = 5;
    const double trace_coeff = std::pow(2.0, -0.5 * n);

    std::vector<Trajectory> runs;
    runs.push_back(evolve_short_time({n, 1.0, 0.2, 0.25, true},
                                     polarized_state(n, PauliAxis::Z), 3, times));
    for (auto reg : {Method::Regularization::none, Method::Regularization::exponential,
                     Method::Regularization::inverse})
        runs.push_back(evolve_weak_disorder({n, 1.0, 0.0, 0.25, true},
                                            polarized_state(n, PauliAxis::Z), reg, times));
    runs.push_back(
        evolve_sk_exact({n, 0.0, 0.2, 0.4, true}, polarized_state(n, PauliAxis::X), times));

    for (const Trajectory& run : runs) {
        for (const SymState& state : run.states) {
            CHECK(state.coeffs.allFinite());
            const double trace = state.coeffs(state.basis->position({0, 0, 0}));
            CHECK(std::abs(trace - trace_coeff) <= 1e-9);
            CHECK(state.coeffs.squaredNorm() <= 1.0 + 1e-9);  // purity
        }
    }

    // the breakdown past the window is real and keeps the trace: document it
    const Trajectory late = evolve_short_time({n, 1.0, 0.2, 0.25, true},
                                              polarized_state(n, PauliAxis::Z), 3, {1.3});
    CHECK(late.states[0].coeffs.squaredNorm() >= 1.01);
    CHECK(std::abs(late.states[0].coeffs(late.states[0].basis->position({0, 0, 0})) -
                   trace_coeff) <= 1e-9);

    // the closed-form map and the regularized variants stay contractive far
    // beyond it
    const Trajectory sk_late =
        evolve_sk_exact({n, 0.0, 0.2, 0.4, true}, polarized_state(n, PauliAxis::X), {4.0});
    CHECK(sk_late.states[0].coeffs.squaredNorm() <= 1.0 + 1e-9);
    const Trajectory weak_late = evolve_weak_disorder(
        {n, 1.0, 0.0, 0.25, true}, polarized_state(n, PauliAxis::Z),
        Method::Regularization::exponential, {4.0});
    CHECK(weak_late.states[0].coeffs.squaredNorm() <= 1.0 + 1e-9);
}

TEST_CASE("magnetization envelope decays monotonically under the exponential map") {
    const DisorderModel model{6, 1.0, 0.0, 0.2, true};
    std::vector<double> times;
    for (int k = 1; k <= 200; ++k) times.push_back(0.025 * k);

    const Trajectory run = evolve_weak_disorder(model, polarized_state(6, PauliAxis::Z),
                                                Method::Regularization::exponential, times);
    std::vector<double> m(times.size());
    for (std::size_t k = 0; k < times.size(); ++k)
        m[k] = std::abs(magnetization(run.states[k], PauliAxis::Z));

    double previous_peak = std::numeric_limits<double>::infinity();
    int peaks = 0;
    for (std::size_t k = 1; k + 1 < m.size(); ++k) {
        if (m[k] >= m[k - 1] && m[k] >= m[k + 1]) {
            CHECK(m[k] <= previous_peak + 1e-9);
            previous_peak = m[k];
            ++peaks;
        }
    }
    CHECK(peaks >= 2);  // several oscillations fall inside the window
}

TEST_CASE("truncation error shrinks at the advertised order") {
    // X-polarized start: the mean field leaves it invariant, so the full
    // signal is disorder dephasing and the truncation orders separate
    // honestly (a Z start superconverges and degenerates order pairs)
    const DisorderModel model{3, 1.0, 0.0, 0.3, true};
    const SymState rho0 = polarized_state(3, PauliAxis::X);
    const std::vector<ObservableSpec> obs{
        {ObservableSpec::Kind::magnetization, PauliAxis::X},
        {ObservableSpec::Kind::magnetization_variance, PauliAxis::X}};
    EvolveOptions tight;
    tight.rtol = 1e-12;
    tight.atol = 1e-15;

    // max observable error against the dense tensor-quadrature average
    auto errors_on = [&](const std::vector<double>& grid, int order) {
        const McEstimate oracle =
            quadrature_average(model, dense_polarized_state(3, PauliAxis::X), grid, obs);
        const Trajectory run = evolve_short_time(model, rho0, order, grid, tight);
        std::vector<double> errs(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double dm = std::abs(magnetization(run.states[k], PauliAxis::X) -
                                       oracle.mean(long(k), 0));
            const double dv =
                std::abs(magnetization_variance(run.states[k], PauliAxis::X, false) -
                         oracle.mean(long(k), 1));
            errs[k] = std::max(dm, dv);
        }
        return errs;
    };

    // five points per decade, log-spaced
    std::vector<double> early(5);
    for (int k = 0; k < 5; ++k) early[k] = 0.01 * std::pow(10.0, k / 4.0);

    for (int order = 0; order <= 3; ++order) {
        const std::vector<double> errs = errors_on(early, order);
        const double slope = fit_slope(early, errs);
        CAPTURE(order);
        CAPTURE(slope);
        CHECK(slope >= order + 2 - 0.3);
    }

    // at a fixed time inside the horizon, raising the order never hurts and
    // the full expansion wins by a wide margin (orders 1 and 2 tie here)
    const std::vector<double> probe{0.3};
    std::vector<double> err_at_probe;
    for (int order = 0; order <= 3; ++order)
        err_at_probe.push_back(errors_on(probe, order)[0]);
    for (int order = 0; order < 3; ++order)
        CHECK(err_at_probe[order + 1] <= err_at_probe[order] * (1.0 + 1e-6) + 1e-12);
    CHECK(err_at_probe[3] <= err_at_probe[0] / 10.0);
}
