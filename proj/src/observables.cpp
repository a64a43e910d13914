#include "spinavg/observables.hpp"

#include <cmath>
#include <stdexcept>

#include "spinavg/errors.hpp"

namespace spinavg {

namespace {

SymIndex axis_string(PauliAxis axis, int count) {
    switch (axis) {
        case PauliAxis::X: return {count, 0, 0};
        case PauliAxis::Y: return {0, count, 0};
        case PauliAxis::Z: return {0, 0, count};
    }
    throw std::invalid_argument("axis_string: bad axis");
}

void check_state(const SymState& state) {
    if (!state.basis || state.coeffs.size() != state.basis->dimension())
        throw std::invalid_argument("observables: coefficient vector does not match basis");
}

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

}  // namespace

SymState polarized_state(int sites, PauliAxis axis) {
    if (sites < 1) throw std::invalid_argument("polarized_state: need at least one site");
    const SymBasisPtr basis = make_basis(sites);
    SymState state{basis, Eigen::VectorXd::Zero(basis->dimension())};
    const double scale = std::pow(2.0, -0.5 * sites);
    for (int k = 0; k <= sites; ++k)
        state.coeffs(basis->position(axis_string(axis, k))) =
            std::sqrt(binom(sites, k)) * scale;
    return state;
}

double magnetization(const SymState& state, PauliAxis axis) {
    check_state(state);
    const int n = state.basis->sites();
    const SymIndex unit = axis_string(axis, 1);
    return std::sqrt(normalization(n, unit)) * state.coeffs(state.basis->position(unit));
}

double string_normalized_magnetization(const SymState& state, PauliAxis axis) {
    check_state(state);
    return state.coeffs(state.basis->position(axis_string(axis, 1)));
}

double magnetization_variance(const SymState& state, PauliAxis axis, bool validate) {
    check_state(state);
    const int n = state.basis->sites();
    double msq = double(n);
    if (n >= 2) {
        const SymIndex two = axis_string(axis, 2);
        msq += 2.0 * std::sqrt(normalization(n, two)) *
               state.coeffs(state.basis->position(two));
    }
    const double m = magnetization(state, axis);
    const double var = msq - m * m;
    if (validate && var < -1e-9)
        throw numeric_error("magnetization_variance: variance below -1e-9");
    return var;
}

double per_site_magnetization_variance(const SymState& state, PauliAxis axis, bool validate) {
    check_state(state);
    return magnetization_variance(state, axis, validate) / state.basis->sites();
}

}  // namespace spinavg
