#include "spinavg/spin_ops.hpp"

#include <stdexcept>

namespace spinavg {

namespace {

using Cplx = std::complex<double>;

Eigen::Matrix2cd single_pauli(PauliAxis axis) {
    Eigen::Matrix2cd m;
    switch (axis) {
        case PauliAxis::X:
            m << 0, 1, 1, 0;
            break;
        case PauliAxis::Y:
            m << 0, Cplx(0, -1), Cplx(0, 1), 0;
            break;
        case PauliAxis::Z:
            m << 1, 0, 0, -1;
            break;
    }
    return m;
}

}  // namespace

DenseOperator identity_operator(int sites) {
    if (sites < 0) throw std::invalid_argument("identity_operator: sites < 0");
    const long dim = 1L << sites;
    return {sites, Eigen::MatrixXcd::Identity(dim, dim)};
}

DenseOperator pauli_string(int sites, const std::map<int, PauliAxis>& assignment) {
    if (sites < 1) throw std::invalid_argument("pauli_string: sites < 1");
    for (const auto& [site, axis] : assignment) {
        (void)axis;
        if (site < 1 || site > sites)
            throw std::invalid_argument("pauli_string: site index out of range");
    }
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(1, 1);
    for (int site = 1; site <= sites; ++site) {
        auto it = assignment.find(site);
        if (it == assignment.end()) {
            acc = kron(acc, Eigen::MatrixXcd::Identity(2, 2));
        } else {
            acc = kron(acc, single_pauli(it->second));
        }
    }
    return {sites, std::move(acc)};
}

Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& rho) {
    const long dim = rho.rows();
    if (rho.cols() != dim) throw std::invalid_argument("vectorize: non-square input");
    Eigen::VectorXcd v(dim * dim);
    for (long i = 0; i < dim; ++i)
        for (long j = 0; j < dim; ++j) v[i * dim + j] = rho(i, j);
    return v;
}

Eigen::MatrixXcd devectorize(const Eigen::VectorXcd& v) {
    const long dim = static_cast<long>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (dim * dim != v.size()) throw std::invalid_argument("devectorize: size not a square");
    Eigen::MatrixXcd rho(dim, dim);
    for (long i = 0; i < dim; ++i)
        for (long j = 0; j < dim; ++j) rho(i, j) = v[i * dim + j];
    return rho;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (long i = 0; i < a.rows(); ++i)
        for (long j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

DenseSuperOp identity_superop(int sites) {
    const long dim = 1L << sites;
    return {sites, Eigen::MatrixXcd::Identity(dim * dim, dim * dim)};
}

DenseSuperOp commutator_superop(const DenseOperator& a) {
    const long dim = a.data.rows();
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(dim, dim);
    return {a.sites, kron(a.data, eye) - kron(eye, a.data.transpose())};
}

DenseSuperOp adjoint_generator(const DenseOperator& a) {
    DenseSuperOp c = commutator_superop(a);
    c.data *= Cplx(0, -1);
    return c;
}

DenseSuperOp unitary_superop(const DenseOperator& h, double t) {
    const double scale = h.data.cwiseAbs().maxCoeff();
    if ((h.data - h.data.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, scale))
        throw std::invalid_argument("unitary_superop: generator not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.data);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("unitary_superop: eigensolver failed");
    const Eigen::VectorXcd phases =
        (Cplx(0, -t) * es.eigenvalues().cast<Cplx>().array()).exp();
    const Eigen::MatrixXcd u =
        es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return {h.sites, kron(u, u.conjugate())};
}

DenseSuperOp operator*(const DenseSuperOp& a, const DenseSuperOp& b) {
    if (a.sites != b.sites) throw std::invalid_argument("superop product: site mismatch");
    return {a.sites, a.data * b.data};
}

DenseSuperOp operator+(const DenseSuperOp& a, const DenseSuperOp& b) {
    if (a.sites != b.sites) throw std::invalid_argument("superop sum: site mismatch");
    return {a.sites, a.data + b.data};
}

DenseSuperOp operator*(std::complex<double> s, const DenseSuperOp& a) {
    return {a.sites, s * a.data};
}

}  // namespace spinavg
