#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>

namespace spinavg {

enum class PauliAxis { X, Y, Z };

// Dense operator on `sites` spins-1/2 (2^sites x 2^sites). Site 1 is the
// leftmost tensor factor, i.e. the most significant bit of the basis index;
// bit value 0 is the Z = +1 state.
struct DenseOperator {
    int sites = 0;
    Eigen::MatrixXcd data;
};

// Dense superoperator acting on vectorized operators (4^sites x 4^sites).
struct DenseSuperOp {
    int sites = 0;
    Eigen::MatrixXcd data;
};

DenseOperator identity_operator(int sites);

// Pauli string: product of single-site Paulis at the given 1-based sites,
// identity elsewhere. Throws std::invalid_argument on out-of-range sites.
DenseOperator pauli_string(int sites, const std::map<int, PauliAxis>& assignment);

// Row-major vectorization: vec(rho)[i*dim + j] = rho(i, j), so that
// vec(A rho B) = (A (x) B^T) vec(rho).
Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& rho);
Eigen::MatrixXcd devectorize(const Eigen::VectorXcd& v);

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

DenseSuperOp identity_superop(int sites);

// [A, .] as a superoperator: A (x) 1 - 1 (x) A^T.
DenseSuperOp commutator_superop(const DenseOperator& a);

// -i [A, .]: real in any Hermitian operator basis; the building block for
// every sector generator in this codebase.
DenseSuperOp adjoint_generator(const DenseOperator& a);

// exp(-i t [H, .]) = U (x) U* with U = exp(-i t H). H must be Hermitian
// (checked to 1e-12 * ||H||, else std::invalid_argument).
DenseSuperOp unitary_superop(const DenseOperator& h, double t);

DenseSuperOp operator*(const DenseSuperOp& a, const DenseSuperOp& b);
DenseSuperOp operator+(const DenseSuperOp& a, const DenseSuperOp& b);
DenseSuperOp operator*(std::complex<double> s, const DenseSuperOp& a);

}  // namespace spinavg
