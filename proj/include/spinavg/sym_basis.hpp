#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <array>
#include <memory>
#include <vector>

#include "spinavg/spin_ops.hpp"

namespace spinavg {

// Label (x, y, z) of the normalized symmetric Pauli string with x X's, y Y's,
// z Z's and identity on the remaining sites.
struct SymIndex {
    int x = 0;
    int y = 0;
    int z = 0;

    friend bool operator==(const SymIndex& a, const SymIndex& b) {
        return a.x == b.x && a.y == b.y && a.z == b.z;
    }
    friend bool operator<(const SymIndex& a, const SymIndex& b) {
        if (a.x != b.x) return a.x < b.x;
        if (a.y != b.y) return a.y < b.y;
        return a.z < b.z;
    }
    int weight() const { return x + y + z; }
};

int dimension(int sites);  // binom(sites+3, 3)

// Frobenius normalization N_xyz = 2^N N!/(x! y! z! (N-x-y-z)!).
double normalization(int sites, const SymIndex& idx);

// ln of the plain multinomial n!/(x! y! z! (n-x-y-z)!); -inf outside the simplex.
double log_multinomial(int n, const SymIndex& idx);

class SymBasis {
  public:
    explicit SymBasis(int sites);
    int sites() const { return sites_; }
    int dimension() const { return static_cast<int>(entries_.size()); }
    const std::vector<SymIndex>& entries() const { return entries_; }
    bool contains(const SymIndex& idx) const;
    // Lexicographic position; throws std::invalid_argument off the simplex.
    int position(const SymIndex& idx) const;

  private:
    int sites_;
    std::vector<SymIndex> entries_;
};

using SymBasisPtr = std::shared_ptr<const SymBasis>;
SymBasisPtr make_basis(int sites);

// Coefficients of a density operator in the orthonormal symmetric-string
// basis: coeffs[pos(x,y,z)] = Tr(Sigma_{(x,y,z)} rho). Real by Hermiticity.
struct SymState {
    SymBasisPtr basis;
    Eigen::VectorXd coeffs;
};

// Real D x D matrix of a Hermiticity-preserving, permutation-commuting
// superoperator restricted to the symmetric sector. Rows index destinations.
struct SymSuperOp {
    SymBasisPtr basis;
    Eigen::MatrixXd data;
};

struct SparseSymSuperOp {
    SymBasisPtr basis;
    Eigen::SparseMatrix<double, Eigen::RowMajor> data;
};

// Dense Sigma_{(x,y,z)} on k sites, Frobenius-normalized. k <= 8.
DenseOperator build_symmetric_string(int k, const SymIndex& idx);

// Set of class-count changes (dx, dy, dz) a superoperator can induce.
// Declared from the Pauli algebra of its constituents and checked against the
// observed transitions during projection.
struct TransitionSupport {
    std::vector<std::array<int, 3>> deltas;

    static TransitionSupport identity();
    // Moves of a single-site commutator [P,.]: letter toggled at one site.
    static TransitionSupport axis_moves(PauliAxis axis);
    // Superoperator product / multi-site string: Minkowski sum of the deltas.
    TransitionSupport compose(const TransitionSupport& other) const;
    // Sum of superoperators: union of the deltas.
    TransitionSupport merge(const TransitionSupport& other) const;
    bool allows(int dx, int dy, int dz) const;
};

// Class-projection of a k-site superoperator: entry (b', b) is
// vec(Sigma_{b'})^dag K vec(Sigma_b) on the k-site class basis.
// Imaginary residue above 1e-12 of the scale signals a convention bug.
Eigen::MatrixXd project_to_classes(const DenseSuperOp& k_site_op);

// Projection of the symmetrized placement sum of one representative term into
// the symmetric sector of `basis`: multiplicity counts the site tuples (e.g.
// binom(N,2) for a two-site term summed over pairs). Transitions observed
// outside `support` raise std::logic_error.
SymSuperOp project_representative(const DenseSuperOp& representative, double multiplicity,
                                  const SymBasisPtr& basis, const TransitionSupport& support);
SparseSymSuperOp project_representative_sparse(const DenseSuperOp& representative,
                                               double multiplicity, const SymBasisPtr& basis,
                                               const TransitionSupport& support);

// Symmetric-sector coefficients of a dense N-site operator (N <= 12).
SymState project_full_state(const DenseOperator& rho, const SymBasisPtr& basis);

// Dense reconstruction sum coeffs * Sigma_{(x,y,z)}; N <= 8.
DenseOperator reconstruct_state(const SymState& state);

}  // namespace spinavg
