#include "spinavg/baseline.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "spinavg/errors.hpp"
#include "spinavg/numerics.hpp"

namespace spinavg {

namespace {

using Cplx = std::complex<double>;
constexpr int kMaxSites = 12;

std::uint64_t splitmix_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// One Gaussian stream per (seed, shot) key; the key mixing keeps nearby
// seeds and shot indices statistically unrelated.
struct GaussianStream {
    std::uint64_t state;
    bool has_spare = false;
    double spare = 0.0;

    GaussianStream(std::uint64_t seed, std::uint64_t shot) {
        std::uint64_t a = seed;
        std::uint64_t b = shot ^ 0x5851F42D4C957F2Dull;
        state = splitmix_next(a) ^ splitmix_next(b);
    }

    double uniform() {  // in (0, 1]
        return (static_cast<double>(splitmix_next(state) >> 11) + 1.0) * 0x1p-53;
    }

    double normal() {
        if (has_spare) {
            has_spare = false;
            return spare;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare = r * std::sin(a);
        has_spare = true;
        return r * std::cos(a);
    }
};

void check_model_size(const DisorderModel& model) {
    if (model.N < 1) throw std::invalid_argument("baseline: sites must be positive");
    if (model.N > kMaxSites)
        throw feasibility_error("baseline: dense evolution supports at most 12 sites");
    if (!(model.sigma >= 0.0)) throw std::invalid_argument("baseline: sigma must be >= 0");
    if (!std::isfinite(model.h) || !std::isfinite(model.mean_J))
        throw std::invalid_argument("baseline: model parameters must be finite");
}

void check_couplings(const Eigen::MatrixXd& couplings, int sites) {
    if (couplings.rows() != sites || couplings.cols() != sites)
        throw std::invalid_argument("baseline: couplings must be sites x sites");
}

void check_times(const std::vector<double>& times) {
    double prev = 0.0;
    for (double t : times) {
        if (!std::isfinite(t) || t < 0.0)
            throw std::invalid_argument("baseline: times must be finite and >= 0");
        if (t < prev) throw std::invalid_argument("baseline: times must be non-decreasing");
        prev = t;
    }
}

void check_state_size(const Eigen::VectorXcd& psi, int sites) {
    if (psi.size() != (1L << sites))
        throw std::invalid_argument("baseline: state length must be 2^sites");
}

// Ising part of the Hamiltonian is diagonal in the computational basis.
// Site k (1-based) occupies bit (sites - k); bit 0 means Z = +1.
Eigen::VectorXd zz_diagonal(const Eigen::MatrixXd& couplings, const DisorderModel& model) {
    const int n = model.N;
    const long dim = 1L << n;
    const double scale = model.scaled ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0;
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double jp = scale * couplings(i, j);
            if (jp == 0.0) continue;
            const long mi = 1L << (n - 1 - i);
            const long mj = 1L << (n - 1 - j);
            for (long s = 0; s < dim; ++s) {
                const double zi = (s & mi) ? -1.0 : 1.0;
                const double zj = (s & mj) ? -1.0 : 1.0;
                diag(s) += jp * zi * zj;
            }
        }
    }
    return diag;
}

// y = (H - shift) * x / denom with H = diag + h * sum_k X_k.
struct HamiltonianAction {
    const Eigen::VectorXd& diag;
    double field;
    int sites;
    double shift = 0.0;
    double inv_denom = 1.0;

    void apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
        const long dim = x.size();
        y.array() = (diag.array() - shift) * x.array();
        if (field != 0.0) {
            for (int b = 0; b < sites; ++b) {
                const long m = 1L << b;
                for (long s = 0; s < dim; ++s) y(s) += field * x(s ^ m);
            }
        }
        if (inv_denom != 1.0) y *= inv_denom;
    }
};

std::vector<Eigen::VectorXcd> evolve_diagonal(const Eigen::VectorXd& diag,
                                              const Eigen::VectorXcd& psi0,
                                              const std::vector<double>& times) {
    std::vector<Eigen::VectorXcd> out;
    out.reserve(times.size());
    for (double t : times)
        out.push_back(((Cplx(0.0, -t) * diag.cast<Cplx>().array()).exp() * psi0.array()).matrix());
    return out;
}

std::vector<Eigen::VectorXcd> evolve_eigen(const Eigen::VectorXd& diag, double field, int sites,
                                           const Eigen::VectorXcd& psi0,
                                           const std::vector<double>& times) {
    const long dim = diag.size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    h.diagonal() = diag;
    for (int b = 0; b < sites; ++b) {
        const long m = 1L << b;
        for (long s = 0; s < dim; ++s) h(s, s ^ m) += field;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success)
        throw numeric_error("baseline: Hamiltonian eigendecomposition failed");
    const Eigen::MatrixXd& v = solver.eigenvectors();
    const Eigen::VectorXd& lam = solver.eigenvalues();

    const Eigen::VectorXd pr = psi0.real();
    const Eigen::VectorXd pi = psi0.imag();
    Eigen::VectorXcd w = (v.transpose() * pr).cast<Cplx>();
    w += Cplx(0.0, 1.0) * (v.transpose() * pi).cast<Cplx>();

    std::vector<Eigen::VectorXcd> out;
    out.reserve(times.size());
    for (double t : times) {
        const Eigen::VectorXcd u =
            ((Cplx(0.0, -t) * lam.cast<Cplx>().array()).exp() * w.array()).matrix();
        const Eigen::VectorXd ur = u.real();
        const Eigen::VectorXd ui = u.imag();
        Eigen::VectorXcd psi = (v * ur).cast<Cplx>();
        psi += Cplx(0.0, 1.0) * (v * ui).cast<Cplx>();
        out.push_back(std::move(psi));
    }
    return out;
}

// One Chebyshev propagation step exp(-i H dt) with H mapped to [-1, 1]
// through Gershgorin bounds; Bessel coefficients truncate superexponentially
// once the order passes the scaled step size.
void chebyshev_step(const HamiltonianAction& base, double center, double half_width, double dt,
                    Eigen::VectorXcd& psi, Eigen::VectorXcd& t0, Eigen::VectorXcd& t1,
                    Eigen::VectorXcd& t2) {
    const Cplx phase = std::exp(Cplx(0.0, -center * dt));
    const double z = half_width * dt;
    if (z < 1e-14) {
        psi *= phase;
        return;
    }
    HamiltonianAction scaled = base;
    scaled.shift = center;
    scaled.inv_denom = 1.0 / half_width;

    t0 = psi;
    scaled.apply(t0, t1);
    Eigen::VectorXcd acc = std::cyl_bessel_j(0.0, z) * t0;
    const Cplx minus_i(0.0, -1.0);
    Cplx ik = minus_i;
    int k = 1;
    for (;; ++k) {
        if (k > 5000) throw numeric_error("baseline: Chebyshev expansion did not converge");
        const double bk = std::cyl_bessel_j(static_cast<double>(k), z);
        acc += (2.0 * bk) * ik * t1;
        ik *= minus_i;
        if (k > z + 8.0 && std::abs(bk) < 1e-16) break;
        scaled.apply(t1, t2);
        t2 = 2.0 * t2 - t0;
        t0.swap(t1);
        t1.swap(t2);
    }
    psi = phase * acc;
}

std::vector<Eigen::VectorXcd> evolve_chebyshev(const Eigen::VectorXd& diag, double field,
                                               int sites, const Eigen::VectorXcd& psi0,
                                               const std::vector<double>& times) {
    const double reach = std::abs(field) * sites;
    const double lo = diag.minCoeff() - reach;
    const double hi = diag.maxCoeff() + reach;
    const double center = 0.5 * (hi + lo);
    const double half_width = 0.5 * (hi - lo) * 1.01 + 1e-300;
    const HamiltonianAction base{diag, field, sites};

    Eigen::VectorXcd psi = psi0;
    Eigen::VectorXcd t0(psi0.size()), t1(psi0.size()), t2(psi0.size());
    std::vector<Eigen::VectorXcd> out;
    out.reserve(times.size());
    double now = 0.0;
    for (double t : times) {
        const double dt = t - now;
        if (dt > 0.0) {
            chebyshev_step(base, center, half_width, dt, psi, t0, t1, t2);
            now = t;
        }
        out.push_back(psi);
    }
    return out;
}

// phi = M_axis psi for the collective magnetization along one axis; the
// first and second moments then come from <psi, phi> and |phi|^2.
void apply_magnetization(const Eigen::VectorXcd& psi, int sites, PauliAxis axis,
                         Eigen::VectorXcd& phi) {
    const long dim = psi.size();
    switch (axis) {
        case PauliAxis::Z:
            for (long s = 0; s < dim; ++s)
                phi(s) = static_cast<double>(sites - 2 * std::popcount(static_cast<std::uint64_t>(s))) * psi(s);
            return;
        case PauliAxis::X:
            phi.setZero();
            for (int b = 0; b < sites; ++b) {
                const long m = 1L << b;
                for (long s = 0; s < dim; ++s) phi(s) += psi(s ^ m);
            }
            return;
        case PauliAxis::Y:
            phi.setZero();
            for (int b = 0; b < sites; ++b) {
                const long m = 1L << b;
                for (long s = 0; s < dim; ++s)
                    phi(s) += ((s & m) ? Cplx(0.0, 1.0) : Cplx(0.0, -1.0)) * psi(s ^ m);
            }
            return;
    }
    throw std::invalid_argument("baseline: unknown axis");
}

void state_moments(const Eigen::VectorXcd& psi, int sites, PauliAxis axis,
                   Eigen::VectorXcd& scratch, double& m, double& m2) {
    apply_magnetization(psi, sites, axis, scratch);
    m = psi.dot(scratch).real();
    m2 = scratch.squaredNorm();
}

int axis_index(PauliAxis axis) { return static_cast<int>(axis); }

struct MomentRequest {
    bool need[3] = {false, false, false};

    explicit MomentRequest(const std::vector<ObservableSpec>& observables) {
        for (const auto& spec : observables) need[axis_index(spec.axis)] = true;
    }
};

// First/second magnetization moments per (time, axis) for one realization.
struct ShotMoments {
    Eigen::MatrixXd m;   // times x 3 axes
    Eigen::MatrixXd m2;  // times x 3 axes
};

ShotMoments shot_moments(const Eigen::MatrixXd& couplings, const DisorderModel& model,
                         const Eigen::VectorXcd& psi0, const std::vector<double>& times,
                         const MomentRequest& request, ShotMethod method) {
    const auto states = evolve_shot_states(couplings, model, psi0, times, method);
    ShotMoments out;
    out.m = Eigen::MatrixXd::Zero(times.size(), 3);
    out.m2 = Eigen::MatrixXd::Zero(times.size(), 3);
    Eigen::VectorXcd scratch(psi0.size());
    for (std::size_t ti = 0; ti < states.size(); ++ti) {
        for (int a = 0; a < 3; ++a) {
            if (!request.need[a]) continue;
            state_moments(states[ti], model.N, static_cast<PauliAxis>(a), scratch,
                          out.m(ti, a), out.m2(ti, a));
        }
    }
    return out;
}

Eigen::MatrixXd observables_from_moments(const ShotMoments& moments,
                                         const std::vector<ObservableSpec>& observables) {
    Eigen::MatrixXd out(moments.m.rows(), observables.size());
    for (std::size_t k = 0; k < observables.size(); ++k) {
        const int a = axis_index(observables[k].axis);
        if (observables[k].kind == ObservableSpec::Kind::magnetization)
            out.col(k) = moments.m.col(a);
        else
            out.col(k) = moments.m2.col(a).array() - moments.m.col(a).array().square();
    }
    return out;
}

}  // namespace

Eigen::MatrixXd shot_couplings(const DisorderModel& model, std::uint64_t seed,
                               std::uint64_t shot) {
    check_model_size(model);
    GaussianStream stream(seed, shot);
    Eigen::MatrixXd couplings = Eigen::MatrixXd::Zero(model.N, model.N);
    for (int i = 0; i < model.N; ++i)
        for (int j = i + 1; j < model.N; ++j)
            couplings(i, j) = model.mean_J + model.sigma * stream.normal();
    return couplings;
}

Eigen::MatrixXd sample_couplings(ShotSampler& sampler) {
    return shot_couplings(sampler.model, sampler.seed, sampler.counter++);
}

Eigen::VectorXcd dense_polarized_state(int sites, PauliAxis axis) {
    if (sites < 1) throw std::invalid_argument("dense_polarized_state: sites must be positive");
    if (sites > kMaxSites)
        throw feasibility_error("dense_polarized_state: at most 12 sites");
    Cplx up[2];
    switch (axis) {
        case PauliAxis::X: up[0] = 1.0 / std::sqrt(2.0); up[1] = up[0]; break;
        case PauliAxis::Y: up[0] = 1.0 / std::sqrt(2.0); up[1] = Cplx(0.0, 1.0) * up[0]; break;
        case PauliAxis::Z: up[0] = 1.0; up[1] = 0.0; break;
        default: throw std::invalid_argument("dense_polarized_state: unknown axis");
    }
    Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(1);
    for (int k = 0; k < sites; ++k) {
        Eigen::VectorXcd next(psi.size() * 2);
        for (long s = 0; s < psi.size(); ++s) {
            next(2 * s) = psi(s) * up[0];
            next(2 * s + 1) = psi(s) * up[1];
        }
        psi.swap(next);
    }
    return psi;
}

std::vector<Eigen::VectorXcd> evolve_shot_states(const Eigen::MatrixXd& couplings,
                                                 const DisorderModel& model,
                                                 const Eigen::VectorXcd& psi0,
                                                 const std::vector<double>& times,
                                                 ShotMethod method) {
    check_model_size(model);
    check_couplings(couplings, model.N);
    check_state_size(psi0, model.N);
    check_times(times);

    if (method == ShotMethod::automatic)
        method = model.h == 0.0 ? ShotMethod::diagonal
                                    : (model.N <= 10 ? ShotMethod::eigen : ShotMethod::chebyshev);
    if (method == ShotMethod::diagonal && model.h != 0.0)
        throw std::invalid_argument("evolve_shot_states: diagonal method requires h == 0");

    const Eigen::VectorXd diag = zz_diagonal(couplings, model);
    switch (method) {
        case ShotMethod::diagonal:
            return evolve_diagonal(diag, psi0, times);
        case ShotMethod::eigen:
            return evolve_eigen(diag, model.h, model.N, psi0, times);
        case ShotMethod::chebyshev:
            return evolve_chebyshev(diag, model.h, model.N, psi0, times);
        default:
            throw std::invalid_argument("evolve_shot_states: unknown method");
    }
}

Eigen::MatrixXd evolve_shot(const Eigen::MatrixXd& couplings, const DisorderModel& model,
                            const Eigen::VectorXcd& psi0, const std::vector<double>& times,
                            const std::vector<ObservableSpec>& observables, ShotMethod method) {
    const MomentRequest request(observables);
    return observables_from_moments(shot_moments(couplings, model, psi0, times, request, method),
                                    observables);
}

Eigen::MatrixXd evolve_shot(const Eigen::MatrixXd& couplings, const DisorderModel& model,
                            const DenseOperator& rho0, const std::vector<double>& times,
                            const std::vector<ObservableSpec>& observables, ShotMethod method) {
    if (rho0.sites != model.N)
        throw std::invalid_argument("evolve_shot: state and model site counts differ");
    if (model.N > 8)
        throw feasibility_error("evolve_shot: density-matrix start supports at most 8 sites");
    const long dim = 1L << model.N;
    if (rho0.data.rows() != dim || rho0.data.cols() != dim)
        throw std::invalid_argument("evolve_shot: density matrix has wrong shape");

    // Evolve the spectral components of rho0 and combine moments linearly.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho0.data);
    if (solver.info() != Eigen::Success)
        throw numeric_error("evolve_shot: density matrix eigendecomposition failed");
    const double weight_floor = 1e-13 * std::max(1.0, solver.eigenvalues().cwiseAbs().maxCoeff());

    const MomentRequest request(observables);
    ShotMoments total;
    total.m = Eigen::MatrixXd::Zero(times.size(), 3);
    total.m2 = Eigen::MatrixXd::Zero(times.size(), 3);
    for (long k = 0; k < dim; ++k) {
        const double w = solver.eigenvalues()(k);
        if (std::abs(w) <= weight_floor) continue;
        const Eigen::VectorXcd psi = solver.eigenvectors().col(k);
        const ShotMoments part = shot_moments(couplings, model, psi, times, request, method);
        total.m += w * part.m;
        total.m2 += w * part.m2;
    }
    return observables_from_moments(total, observables);
}

McEstimate monte_carlo_average(const DisorderModel& model, long shots,
                               const Eigen::VectorXcd& psi0, const std::vector<double>& times,
                               const std::vector<ObservableSpec>& observables, std::uint64_t seed,
                               ExecutionPolicy policy) {
    check_model_size(model);
    check_state_size(psi0, model.N);
    check_times(times);
    if (shots < 2) throw std::invalid_argument("monte_carlo_average: need at least 2 shots");
    if (observables.empty())
        throw std::invalid_argument("monte_carlo_average: no observables requested");

    const MomentRequest request(observables);
    const long nt = static_cast<long>(times.size());

    // Results land in per-shot slots; the later reduction runs in a fixed
    // order, so the estimate is independent of the parallel schedule.
    Eigen::MatrixXd mslab[3], m2slab[3];
    for (int a = 0; a < 3; ++a)
        if (request.need[a]) {
            mslab[a].resize(shots, nt);
            m2slab[a].resize(shots, nt);
        }

    const bool parallel = policy == ExecutionPolicy::Parallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long s = 0; s < shots; ++s) {
        const Eigen::MatrixXd couplings = shot_couplings(model, seed, static_cast<std::uint64_t>(s));
        const ShotMoments moments =
            shot_moments(couplings, model, psi0, times, request, ShotMethod::automatic);
        for (int a = 0; a < 3; ++a) {
            if (!request.need[a]) continue;
            mslab[a].row(s) = moments.m.col(a).transpose();
            m2slab[a].row(s) = moments.m2.col(a).transpose();
        }
    }

    McEstimate out;
    out.times = times;
    out.shots = shots;
    out.mean.resize(nt, observables.size());
    out.std_error.resize(nt, observables.size());
    const double ns = static_cast<double>(shots);

    for (std::size_t k = 0; k < observables.size(); ++k) {
        const int a = axis_index(observables[k].axis);
        const bool variance = observables[k].kind == ObservableSpec::Kind::magnetization_variance;
        for (long t = 0; t < nt; ++t) {
            double msum = 0.0;
            for (long s = 0; s < shots; ++s) msum += mslab[a](s, t);
            const double mbar = msum / ns;
            if (!variance) {
                double dev = 0.0;
                for (long s = 0; s < shots; ++s) {
                    const double d = mslab[a](s, t) - mbar;
                    dev += d * d;
                }
                out.mean(t, k) = mbar;
                out.std_error(t, k) = std::sqrt(std::max(0.0, dev / (ns - 1.0)) / ns);
            } else {
                double m2sum = 0.0;
                for (long s = 0; s < shots; ++s) m2sum += m2slab[a](s, t);
                const double m2bar = m2sum / ns;
                // Linearize var = E[m2] - E[m]^2 around the means: the
                // per-shot influence value is m2_s - 2 mbar m_s.
                const double wbar = m2bar - 2.0 * mbar * mbar;
                double dev = 0.0;
                for (long s = 0; s < shots; ++s) {
                    const double w = m2slab[a](s, t) - 2.0 * mbar * mslab[a](s, t);
                    dev += (w - wbar) * (w - wbar);
                }
                out.mean(t, k) = m2bar - mbar * mbar;
                out.std_error(t, k) = std::sqrt(std::max(0.0, dev / (ns - 1.0)) / ns);
            }
        }
    }
    // a point ensemble has no sampling error; the sums above would leave
    // rounding residue from repeated addition of identical values
    if (model.sigma == 0.0) out.std_error.setZero();
    return out;
}

McEstimate quadrature_average(const DisorderModel& model, const Eigen::VectorXcd& psi0,
                              const std::vector<double>& times,
                              const std::vector<ObservableSpec>& observables) {
    check_model_size(model);
    check_state_size(psi0, model.N);
    check_times(times);
    if (model.N > 3)
        throw feasibility_error("quadrature_average: tensor quadrature supports at most 3 sites");
    if (observables.empty())
        throw std::invalid_argument("quadrature_average: no observables requested");

    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < model.N; ++i)
        for (int j = i + 1; j < model.N; ++j) pairs.emplace_back(i, j);
    const int np = static_cast<int>(pairs.size());

    QuadratureRule rule;
    if (model.sigma == 0.0 || np == 0) {
        rule.nodes = Eigen::VectorXd::Zero(1);
        rule.weights = Eigen::VectorXd::Ones(1);
    } else {
        rule = gauss_hermite_rule(32);
        rule.weights /= std::sqrt(M_PI);  // normalize the Gaussian measure
    }
    const int nodes = static_cast<int>(rule.nodes.size());

    const MomentRequest request(observables);
    const long nt = static_cast<long>(times.size());
    Eigen::MatrixXd msum = Eigen::MatrixXd::Zero(nt, 3);
    Eigen::MatrixXd m2sum = Eigen::MatrixXd::Zero(nt, 3);

    Eigen::MatrixXd couplings = Eigen::MatrixXd::Zero(model.N, model.N);
    std::vector<int> digit(pairs.size(), 0);
    long total = 1;
    for (int p = 0; p < np; ++p) total *= nodes;

    for (long node = 0; node < total; ++node) {
        double weight = 1.0;
        for (int p = 0; p < np; ++p) {
            const double x = rule.nodes(digit[p]);
            weight *= rule.weights(digit[p]);
            couplings(pairs[p].first, pairs[p].second) =
                model.mean_J + std::sqrt(2.0) * model.sigma * x;
        }
        const ShotMoments moments =
            shot_moments(couplings, model, psi0, times, request, ShotMethod::automatic);
        msum += weight * moments.m;
        m2sum += weight * moments.m2;

        for (int p = 0; p < np; ++p) {
            if (++digit[p] < nodes) break;
            digit[p] = 0;
        }
    }

    McEstimate out;
    out.times = times;
    out.shots = total;
    out.mean.resize(nt, observables.size());
    out.std_error = Eigen::MatrixXd::Zero(nt, observables.size());
    for (std::size_t k = 0; k < observables.size(); ++k) {
        const int a = axis_index(observables[k].axis);
        if (observables[k].kind == ObservableSpec::Kind::magnetization)
            out.mean.col(k) = msum.col(a);
        else
            out.mean.col(k) = m2sum.col(a).array() - msum.col(a).array().square();
    }
    return out;
}

}  // namespace spinavg
