#include "spinavg/evolver.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spinavg/errors.hpp"
#include "spinavg/numerics.hpp"
#include "spinavg/version.hpp"

namespace spinavg {

namespace {

constexpr double kTraceTol = 1e-9;

void check_times(const std::vector<double>& times) {
    double prev = -1.0;
    for (double t : times) {
        if (!std::isfinite(t) || t < 0.0)
            throw std::invalid_argument("evolver: times must be finite and >= 0");
        if (t <= prev) throw std::invalid_argument("evolver: times must be strictly increasing");
        prev = t;
    }
}

void check_state(const DisorderModel& model, const SymState& rho0) {
    if (!rho0.basis) throw std::invalid_argument("evolver: state has no basis");
    if (rho0.basis->sites() != model.N)
        throw std::invalid_argument("evolver: state and model site counts differ");
    if (rho0.coeffs.size() != rho0.basis->dimension())
        throw std::invalid_argument("evolver: coefficient count does not match the basis");
}

// The unit-trace component must ride along unchanged; drift flags a bad
// integration or an unstable map application.
void check_trace(const SymState& state, double reference, double t) {
    const double c = state.coeffs(state.basis->position({0, 0, 0}));
    if (std::abs(c - reference) > kTraceTol * std::max(1.0, std::abs(reference)))
        throw numeric_error("evolver: trace component drifted at t = " + std::to_string(t));
}

TrajectoryMeta make_meta(const Method& method, const DisorderModel& model,
                         const EvolveOptions& options) {
    TrajectoryMeta meta;
    meta.method = method;
    meta.model = model;
    meta.tolerances = options;
    meta.code_version = kVersion;
    return meta;
}

}  // namespace

Method Method::short_time(int order) {
    if (order < 0 || order > 3)
        throw std::invalid_argument("Method::short_time: order must be in 0..3");
    Method m;
    m.kind = Kind::short_time;
    m.order = order;
    return m;
}

Method Method::weak_disorder(Regularization regularization) {
    Method m;
    m.kind = Kind::weak_disorder;
    m.regularization = regularization;
    return m;
}

Method Method::sk_exact() {
    Method m;
    m.kind = Kind::sk_exact;
    return m;
}

Trajectory evolve_short_time(const DisorderModel& model, const SymState& rho0, int order,
                             const std::vector<double>& times, const EvolveOptions& options) {
    model.validate();
    check_state(model, rho0);
    check_times(times);
    if (order < 0 || order > 3)
        throw std::invalid_argument("evolve_short_time: order must be in 0..3");

    const CumulantSet cumulants = build_cumulants(model, order);

    // dy/dt = sum_n t^n/n! kappa_{n+1} y, evaluated as successive matvecs
    OdeProblem problem;
    problem.y0 = rho0.coeffs;
    problem.t_begin = 0.0;
    problem.t_end = times.empty() ? 0.0 : times.back();
    problem.rtol = options.rtol;
    problem.atol = options.atol;
    problem.rhs = [&cumulants, order](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        dy = cumulants.kappa(1).data * y;
        double factor = 1.0;
        for (int n = 1; n <= order; ++n) {
            factor *= t / n;
            dy.noalias() += factor * (cumulants.kappa(n + 1).data * y);
        }
    };

    const std::vector<Eigen::VectorXd> solution = integrate(problem, times);

    Trajectory out;
    out.times = times;
    out.meta = make_meta(Method::short_time(order), model, options);
    const double trace0 = rho0.coeffs(rho0.basis->position({0, 0, 0}));
    out.states.reserve(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        SymState state{rho0.basis, solution[k]};
        check_trace(state, trace0, times[k]);
        out.states.push_back(std::move(state));
    }
    return out;
}

Trajectory evolve_weak_disorder(const DisorderModel& model, const SymState& rho0,
                                Method::Regularization regularization,
                                const std::vector<double>& times, const EvolveOptions& options) {
    model.validate();
    check_state(model, rho0);
    check_times(times);
    if (model.mean_J != 0.0)
        throw std::invalid_argument("evolve_weak_disorder: requires mean_J = 0");

    const SymBasisPtr& basis = rho0.basis;
    const WeakDisorderKernel kernel(basis, model.h, model.scaled);
    const SparseSymSuperOp field = field_generator_sparse(basis);
    const double s2 = model.sigma * model.sigma;
    const long dim = basis->dimension();

    Trajectory out;
    out.times = times;
    out.meta = make_meta(Method::weak_disorder(regularization), model, options);
    const double trace0 = rho0.coeffs(rho0.basis->position({0, 0, 0}));
    out.states.reserve(times.size());

    for (double t : times) {
        Eigen::VectorXd v = rho0.coeffs;
        if (t > 0.0 && s2 > 0.0) {
            const Eigen::SparseMatrix<double, Eigen::RowMajor> o = kernel.generator_sparse(t);
            switch (regularization) {
                case Method::Regularization::none:
                    v -= s2 * (o * v);
                    break;
                case Method::Regularization::exponential: {
                    const Eigen::SparseMatrix<double, Eigen::RowMajor> arg = (-s2) * o;
                    v = expm_action(arg, v);
                    break;
                }
                case Method::Regularization::inverse: {
                    if (dim <= 2000) {
                        Eigen::MatrixXd a = s2 * Eigen::MatrixXd(o);
                        a.diagonal().array() += 1.0;
                        const LinearSolveResult solve = solve_linear(a, v);
                        if (solve.rcond > 0.0)
                            out.meta.max_condition =
                                std::max(out.meta.max_condition, 1.0 / solve.rcond);
                        v = solve.x;
                    } else {
                        Eigen::SparseMatrix<double> a(s2 * o);
                        Eigen::SparseMatrix<double> id(dim, dim);
                        id.setIdentity();
                        a = a + id;
                        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(a);
                        if (lu.info() != Eigen::Success)
                            throw numeric_error(
                                "evolve_weak_disorder: inverse regularization is singular at t = " +
                                std::to_string(t));
                        const Eigen::VectorXd x = lu.solve(v);
                        const double residual = (a * x - v).norm() / std::max(v.norm(), 1e-300);
                        if (residual > 1e-8)
                            throw numeric_error(
                                "evolve_weak_disorder: inverse solve residual " +
                                std::to_string(residual) + " at t = " + std::to_string(t));
                        v = x;
                    }
                    break;
                }
            }
        }
        if (t != 0.0 && model.h != 0.0) {
            const Eigen::SparseMatrix<double, Eigen::RowMajor> rotation = (model.h * t) * field.data;
            v = expm_action(rotation, v);
        }
        SymState state{basis, std::move(v)};
        check_trace(state, trace0, t);
        out.states.push_back(std::move(state));
    }
    return out;
}

Trajectory evolve_sk_exact(const DisorderModel& model, const SymState& rho0,
                           const std::vector<double>& times, const EvolveOptions& options) {
    model.validate();
    check_state(model, rho0);
    check_times(times);
    if (model.h != 0.0) throw std::invalid_argument("evolve_sk_exact: requires h = 0");

    const SectorBlocks blocks = SectorBlocks::build(rho0.basis);
    const double jp = model.pair_mean();
    const double sp2 = model.pair_sigma() * model.pair_sigma();

    Trajectory out;
    out.times = times;
    out.meta = make_meta(Method::sk_exact(), model, options);
    const double trace0 = rho0.coeffs(rho0.basis->position({0, 0, 0}));
    out.states.reserve(times.size());
    for (double t : times) {
        const Eigen::MatrixXd arg = (t * jp) * blocks.S + (0.5 * sp2 * t * t) * blocks.T;
        SymState state{rho0.basis, expm_action(arg, rho0.coeffs)};
        check_trace(state, trace0, t);
        out.states.push_back(std::move(state));
    }
    return out;
}

Trajectory evolve(const Method& method, const DisorderModel& model, const SymState& rho0,
                  const std::vector<double>& times, const EvolveOptions& options) {
    switch (method.kind) {
        case Method::Kind::short_time:
            return evolve_short_time(model, rho0, method.order, times, options);
        case Method::Kind::weak_disorder:
            return evolve_weak_disorder(model, rho0, method.regularization, times, options);
        case Method::Kind::sk_exact:
            return evolve_sk_exact(model, rho0, times, options);
    }
    throw std::invalid_argument("evolve: unknown method");
}

double t_bound(const DisorderModel& model) {
    model.validate();
    if (model.sigma == 0.0) return std::numeric_limits<double>::infinity();
    return std::cbrt(3.0 / (4.0 * model.sigma * model.sigma * (model.N - 1)));
}

}  // namespace spinavg
