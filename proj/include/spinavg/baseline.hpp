#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "spinavg/effective_maps.hpp"
#include "spinavg/kernels.hpp"
#include "spinavg/observables.hpp"
#include "spinavg/spin_ops.hpp"

namespace spinavg {

// Reproducible disorder sampling: coupling draws are keyed by (seed, shot),
// so the sequence is identical however shots are scheduled.
struct ShotSampler {
    DisorderModel model;
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;  // shots drawn so far
};

struct McEstimate {
    std::vector<double> times;
    Eigen::MatrixXd mean;       // rows: times, cols: observables
    Eigen::MatrixXd std_error;  // sample std / sqrt(shots); zero for quadrature
    long shots = 0;
};

// Upper-triangular (i < j) i.i.d. Normal(mean_J, sigma^2) draws in the raw
// model convention; the 1/sqrt(N) of the scaled convention is applied when
// the Hamiltonian is built.
Eigen::MatrixXd shot_couplings(const DisorderModel& model, std::uint64_t seed,
                               std::uint64_t shot);
Eigen::MatrixXd sample_couplings(ShotSampler& sampler);

// |axis up>^N as a full-space amplitude vector.
Eigen::VectorXcd dense_polarized_state(int sites, PauliAxis axis);

enum class ShotMethod {
    automatic,  // h == 0: diagonal; N <= 10: eigendecomposition; else Chebyshev
    diagonal,   // requires h == 0
    eigen,
    chebyshev,
};

// Exact evolution of one disorder realization on the full 2^N space.
// times must be non-decreasing and non-negative; N <= 12.
std::vector<Eigen::VectorXcd> evolve_shot_states(const Eigen::MatrixXd& couplings,
                                                 const DisorderModel& model,
                                                 const Eigen::VectorXcd& psi0,
                                                 const std::vector<double>& times,
                                                 ShotMethod method = ShotMethod::automatic);

// Per-time observable readout (rows: times, cols: observables). The variance
// columns are the variance within this realization's state.
Eigen::MatrixXd evolve_shot(const Eigen::MatrixXd& couplings, const DisorderModel& model,
                            const Eigen::VectorXcd& psi0, const std::vector<double>& times,
                            const std::vector<ObservableSpec>& observables,
                            ShotMethod method = ShotMethod::automatic);
// Density-matrix start via its spectral decomposition; N <= 8.
Eigen::MatrixXd evolve_shot(const Eigen::MatrixXd& couplings, const DisorderModel& model,
                            const DenseOperator& rho0, const std::vector<double>& times,
                            const std::vector<ObservableSpec>& observables,
                            ShotMethod method = ShotMethod::automatic);

// Disorder average over sampled realizations. Variance observables are the
// variance of the averaged state: mean<M^2> - (mean<M>)^2, with the standard
// error propagated through that combination. Shot results are accumulated
// per shot index and reduced deterministically, so the estimate does not
// depend on the parallel schedule.
McEstimate monte_carlo_average(const DisorderModel& model, long shots,
                               const Eigen::VectorXcd& psi0, const std::vector<double>& times,
                               const std::vector<ObservableSpec>& observables,
                               std::uint64_t seed,
                               ExecutionPolicy policy = ExecutionPolicy::Parallel);

// Deterministic disorder average by tensor Gauss-Hermite quadrature,
// 32 nodes per coupling; N <= 3 keeps the grid affordable. std_error is
// zero and shots reports the node count.
McEstimate quadrature_average(const DisorderModel& model, const Eigen::VectorXcd& psi0,
                              const std::vector<double>& times,
                              const std::vector<ObservableSpec>& observables);

}  // namespace spinavg
