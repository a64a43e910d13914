#pragma once

#include "spinavg/spin_ops.hpp"
#include "spinavg/sym_basis.hpp"

namespace spinavg {

struct ObservableSpec {
    enum class Kind { magnetization, magnetization_variance };
    Kind kind = Kind::magnetization;
    PauliAxis axis = PauliAxis::Z;
};

// Product state fully polarized along the axis, as sector coefficients:
// sqrt(binom(N, k) / 2^N) on the k-fold string classes of that axis.
SymState polarized_state(int sites, PauliAxis axis);

// <M> with M = sum_k P_k (raw total; N at full polarization).
double magnetization(const SymState& state, PauliAxis axis);
// <M> divided by the unit-string normalization: the plotted sector
// coefficient itself.
double string_normalized_magnetization(const SymState& state, PauliAxis axis);

// <M^2> - <M>^2. With validate, values below -1e-9 signal numeric trouble
// and throw; pass validate = false for deliberately divergent runs.
double magnetization_variance(const SymState& state, PauliAxis axis, bool validate = true);
double per_site_magnetization_variance(const SymState& state, PauliAxis axis,
                                       bool validate = true);

}  // namespace spinavg
