#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <array>
#include <vector>

#include "spinavg/spin_ops.hpp"
#include "spinavg/sym_basis.hpp"
#include "spinavg/trig_poly.hpp"

namespace spinavg {

// Gaussian all-to-all ZZ couplings in a transverse field. With `scaled`,
// couplings carry 1/sqrt(N) so relevant time scales are N-independent; the
// per-pair moments below fold that factor in.
struct DisorderModel {
    int N = 0;
    double h = 0.0;
    double mean_J = 0.0;
    double sigma = 0.0;
    bool scaled = true;

    void validate() const;  // N >= 2, sigma >= 0, else std::invalid_argument
    double pair_mean() const;
    double pair_sigma() const;
};

// Projected building blocks of the moment assembly. All are real sector
// matrices of products of -i[.,.] generators:
//   S  = sum over pairs of the coupling generator
//   T  = sum over pairs of its square
//   F  = field generator sum
//   Y1/Y2/Y3/V1/V4 = pair/field products sharing one pair, which are not
//   products of the sums above and need their own embeddings.
struct SectorBlocks {
    SymBasisPtr basis;
    Eigen::MatrixXd S, T, F;
    Eigen::MatrixXd Y1;  // pair-field-pair (identically zero; kept for the assembly)
    Eigen::MatrixXd Y2;  // pair-field-pair-field
    Eigen::MatrixXd Y3;  // pair-pair-field
    Eigen::MatrixXd V1;  // pair-field-field-pair
    Eigen::MatrixXd V4;  // pair-pair-field-field

    static SectorBlocks build(const SymBasisPtr& basis);
};

// Disorder average of the n-fold commutator power, stored as the real matrix
// of i^{-n} [H,.]^n averaged (i.e. powers of -i[H,.]). n in {1,2,3}.
SymSuperOp moment_superop(int n, const DisorderModel& model);

struct CumulantSet {
    DisorderModel model;
    std::vector<SymSuperOp> kappas;  // kappas[k] holds order k+1

    int max_order() const { return static_cast<int>(kappas.size()) - 1; }
    const SymSuperOp& kappa(int n) const;  // 1-based order
};

// Cumulants kappa_1 .. kappa_{max_order+1} (stored real, same convention as
// moment_superop). max_order in 0..3; the fourth cumulant is internal to the
// order-3 truncation and not exposed through moment_superop.
CumulantSet build_cumulants(const DisorderModel& model, int max_order);
SymSuperOp cumulant(int n, const DisorderModel& model);

// Truncated time-local generator sum_{n=0}^{order} t^n/n! kappa_{n+1}; the
// alternating i-factors of the defining expansion cancel against the storage
// convention, so the result is exactly real.
SymSuperOp lindbladian(double t, int order, const CumulantSet& cumulants);

namespace closed_form {
// Direct table fills used to cross-check the recursion.
SymSuperOp kappa1(const DisorderModel& model, const SymBasisPtr& basis);
SymSuperOp kappa2(const DisorderModel& model, const SymBasisPtr& basis);
SymSuperOp kappa3(const DisorderModel& model, const SymBasisPtr& basis);
}  // namespace closed_form

// Exact disorder-averaged map at zero transverse field: decoherence
// exponential times the mean-coupling rotation. Uniform ensemble, symmetric
// sector. model.h != 0 -> std::invalid_argument.
SymSuperOp sk_exact_map(double t, const DisorderModel& model);
// Per-pair ensemble on the full space (diagonal in the string basis);
// strict upper triangles of the matrices are read. sites <= 6.
DenseSuperOp sk_exact_map(double t, const Eigen::MatrixXd& per_pair_means,
                          const Eigen::MatrixXd& per_pair_stds, int sites);

// Generator with linearly growing decoherence rates; solves to sk_exact_map.
SymSuperOp sk_lindbladian(double t, const DisorderModel& model);
DenseSuperOp sk_lindbladian(double t, const Eigen::MatrixXd& per_pair_means,
                            const Eigen::MatrixXd& per_pair_stds, int sites);

// Coefficients of the Heisenberg-rotated coupling commutator at mean zero:
// [Z_iZ_j(t),.] = c_zz [Z_iZ_j,.] + c_cross ([Y_iZ_j,.] + [Z_iY_j,.])
//               + c_yy [Y_iY_j,.]
struct HeisenbergZZ {
    double c_zz;
    double c_cross;
    double c_yy;
};
HeisenbergZZ heisenberg_zz_commutator(double t, double h);

// First-order weak-disorder generator O(t): the doubly time-integrated
// double commutator of rotated couplings, summed over pairs, projected, and
// carrying the 1/N of the scaled convention. The caller multiplies by the
// model's sigma^2: the map is U_t (1 - sigma^2 O(t)) before regularization.
class WeakDisorderKernel {
  public:
    WeakDisorderKernel(const SymBasisPtr& basis, double h, bool scaled);

    const SymBasisPtr& basis() const { return basis_; }
    Eigen::MatrixXd generator(double t) const;
    Eigen::SparseMatrix<double, Eigen::RowMajor> generator_sparse(double t) const;
    // nested envelope integral for channel pair (alpha, beta), test hook
    double integral(int alpha, int beta, double t) const;

  private:
    SymBasisPtr basis_;
    double scale_;
    std::array<Eigen::SparseMatrix<double, Eigen::RowMajor>, 9> blocks_;
    std::array<TrigPoly, 9> integrals_;
};

// One-shot convenience wrapper; model.mean_J != 0 or t < 0 rejected.
SymSuperOp weak_disorder_generator(double t, const DisorderModel& model);

// Projected transverse-field commutator sum as a sparse two-band matrix
// (the per-unit-field part of kappa1); scales to bases far beyond what the
// dense sector blocks can hold.
SparseSymSuperOp field_generator_sparse(const SymBasisPtr& basis);

}  // namespace spinavg
