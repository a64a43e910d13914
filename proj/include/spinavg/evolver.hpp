#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spinavg/effective_maps.hpp"
#include "spinavg/sym_basis.hpp"

namespace spinavg {

struct Method {
    enum class Kind { short_time, weak_disorder, sk_exact };
    enum class Regularization { none, exponential, inverse };

    Kind kind = Kind::short_time;
    int order = 3;                                                 // short_time only
    Regularization regularization = Regularization::exponential;  // weak_disorder only

    static Method short_time(int order);
    static Method weak_disorder(Regularization regularization);
    static Method sk_exact();
};

struct EvolveOptions {
    double rtol = 1e-10;  // short-time integrator tolerances
    double atol = 1e-13;
};

struct TrajectoryMeta {
    Method method;
    DisorderModel model;
    std::uint64_t seed = 0;  // deterministic methods leave this at 0
    EvolveOptions tolerances;
    double max_condition = 0.0;  // worst 1/rcond seen by the inverse regularization
    std::string code_version;
};

struct Trajectory {
    std::vector<double> times;  // strictly increasing
    std::vector<SymState> states;
    TrajectoryMeta meta;
};

// Integrates the time-local generator truncated at the given order; the
// trace component is monitored and drift beyond 1e-9 raises numeric_error.
Trajectory evolve_short_time(const DisorderModel& model, const SymState& rho0, int order,
                             const std::vector<double>& times,
                             const EvolveOptions& options = {});

// Applies the averaged map U_t * f(-sigma^2 O(t)) at each output time, with
// f chosen by the regularization mode. Requires mean_J = 0.
Trajectory evolve_weak_disorder(const DisorderModel& model, const SymState& rho0,
                                Method::Regularization regularization,
                                const std::vector<double>& times,
                                const EvolveOptions& options = {});

// Exact averaged evolution at zero transverse field.
Trajectory evolve_sk_exact(const DisorderModel& model, const SymState& rho0,
                           const std::vector<double>& times, const EvolveOptions& options = {});

Trajectory evolve(const Method& method, const DisorderModel& model, const SymState& rho0,
                  const std::vector<double>& times, const EvolveOptions& options = {});

// Rough validity horizon of the short-time truncation, cbrt(3/(4 sigma^2 (N-1)));
// +infinity when sigma = 0.
double t_bound(const DisorderModel& model);

}  // namespace spinavg
