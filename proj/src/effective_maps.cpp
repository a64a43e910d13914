#include "spinavg/effective_maps.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>

#include "spinavg/errors.hpp"

namespace spinavg {

namespace {

using Eigen::MatrixXd;

double pair_count(int n) { return 0.5 * double(n) * double(n - 1); }

// dense exponential by scaling-and-squaring Taylor; inputs here are small
// well-scaled sector matrices
MatrixXd expm_dense(const MatrixXd& a) {
    const double na = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    double scale = 1.0;
    while (na * scale > 0.5) {
        scale *= 0.5;
        ++squarings;
    }
    const MatrixXd b = scale * a;
    MatrixXd result = MatrixXd::Identity(a.rows(), a.cols());
    MatrixXd term = result;
    for (int k = 1; k <= 60; ++k) {
        term = (term * b) / double(k);
        result += term;
        if (term.cwiseAbs().maxCoeff() <= 1e-16 * result.cwiseAbs().maxCoeff()) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

int bit_of_site(int state, int sites, int site) { return (state >> (sites - site)) & 1; }

void check_pair_matrices(const Eigen::MatrixXd& means, const Eigen::MatrixXd& stds, int sites) {
    if (sites < 2) throw std::invalid_argument("per-pair map: need at least two sites");
    if (sites > 6)
        throw feasibility_error("per-pair map: dense superoperator too large beyond 6 sites");
    if (means.rows() != sites || means.cols() != sites || stds.rows() != sites ||
        stds.cols() != sites)
        throw std::invalid_argument("per-pair map: coupling matrices must be N x N");
    for (int i = 0; i < sites; ++i)
        for (int j = i + 1; j < sites; ++j)
            if (stds(i, j) < 0.0)
                throw std::invalid_argument("per-pair map: negative coupling std");
}

// diagonal of the pair-ensemble map / generator in the doubled string basis
DenseSuperOp diagonal_pair_superop(const Eigen::MatrixXd& means, const Eigen::MatrixXd& stds,
                                   int sites,
                                   const std::function<std::complex<double>(
                                       double mean, double var, double delta)>& entry_exponent) {
    const int dim = 1 << sites;
    DenseSuperOp out;
    out.sites = sites;
    out.data = Eigen::MatrixXcd::Zero(dim * dim, dim * dim);
    for (int s = 0; s < dim; ++s) {
        for (int sp = 0; sp < dim; ++sp) {
            std::complex<double> acc = 0.0;
            for (int i = 1; i <= sites; ++i) {
                const int zi = 1 - 2 * bit_of_site(s, sites, i);
                const int zpi = 1 - 2 * bit_of_site(sp, sites, i);
                for (int j = i + 1; j <= sites; ++j) {
                    const int zj = 1 - 2 * bit_of_site(s, sites, j);
                    const int zpj = 1 - 2 * bit_of_site(sp, sites, j);
                    const double delta = double(zi * zj - zpi * zpj);
                    if (delta != 0.0)
                        acc += entry_exponent(means(i - 1, j - 1),
                                              stds(i - 1, j - 1) * stds(i - 1, j - 1), delta);
                }
            }
            out.data(s * dim + sp, s * dim + sp) = acc;
        }
    }
    return out;
}

struct PairReps {
    DenseSuperOp c;     // coupling generator -i[Z1 Z2, .]
    DenseSuperOp phi;   // pair field -i[X1 + X2, .]
    DenseSuperOp f1;    // single-site field -i[X, .]
    TransitionSupport zz, x;
};

PairReps make_pair_reps() {
    using A = PauliAxis;
    PairReps r;
    r.c = adjoint_generator(pauli_string(2, {{1, A::Z}, {2, A::Z}}));
    r.phi = adjoint_generator(pauli_string(2, {{1, A::X}})) +
            adjoint_generator(pauli_string(2, {{2, A::X}}));
    r.f1 = adjoint_generator(pauli_string(1, {{1, A::X}}));
    r.zz = TransitionSupport::axis_moves(A::Z).compose(TransitionSupport::axis_moves(A::Z));
    r.x = TransitionSupport::axis_moves(A::X);
    return r;
}

}  // namespace

void DisorderModel::validate() const {
    if (N < 2) throw std::invalid_argument("DisorderModel: need at least two spins");
    if (sigma < 0) throw std::invalid_argument("DisorderModel: negative sigma");
    if (!std::isfinite(h) || !std::isfinite(mean_J) || !std::isfinite(sigma))
        throw std::invalid_argument("DisorderModel: non-finite parameter");
}

double DisorderModel::pair_mean() const { return scaled ? mean_J / std::sqrt(double(N)) : mean_J; }

double DisorderModel::pair_sigma() const { return scaled ? sigma / std::sqrt(double(N)) : sigma; }

SectorBlocks SectorBlocks::build(const SymBasisPtr& basis) {
    const PairReps r = make_pair_reps();
    const double pairs = pair_count(basis->sites());
    const double n = basis->sites();

    SectorBlocks b;
    b.basis = basis;
    b.S = project_representative(r.c, pairs, basis, r.zz).data;
    b.T = project_representative(r.c * r.c, pairs, basis, r.zz.compose(r.zz)).data;
    b.F = project_representative(r.f1, n, basis, r.x).data;
    b.Y1 = project_representative(r.c * r.phi * r.c, pairs, basis,
                                  r.zz.compose(r.x).compose(r.zz))
               .data;
    b.Y2 = project_representative(r.c * r.phi * r.c * r.phi, pairs, basis,
                                  r.zz.compose(r.x).compose(r.zz).compose(r.x))
               .data;
    b.Y3 = project_representative(r.c * r.c * r.phi, pairs, basis,
                                  r.zz.compose(r.zz).compose(r.x))
               .data;
    b.V1 = project_representative(r.c * r.phi * r.phi * r.c, pairs, basis,
                                  r.zz.compose(r.x).compose(r.x).compose(r.zz))
               .data;
    b.V4 = project_representative(r.c * r.c * r.phi * r.phi, pairs, basis,
                                  r.zz.compose(r.zz).compose(r.x).compose(r.x))
               .data;
    return b;
}

namespace {

// Moments and cumulants of the averaged commutator powers, assembled from the
// sector blocks. The mean-field part of every moment is a power of m1, so the
// recursion cancels it symbolically and each higher cumulant carries an
// overall sigma'^2: the disorder-free limit collapses to exact zeros.
struct MomentEngine {
    const SectorBlocks& b;
    double jp, s2, h;

    MatrixXd m1, P2, P3, P4;         // m1 powers
    MatrixXd W, W2, R3, R4;          // sigma'^2-linear correction blocks
    MatrixXd TT;                     // T^2 for the sigma'^4 term

    MomentEngine(const SectorBlocks& blocks, const DisorderModel& model, int highest)
        : b(blocks),
          jp(model.pair_mean()),
          s2(model.pair_sigma() * model.pair_sigma()),
          h(model.h) {
        m1 = jp * b.S + h * b.F;
        if (highest >= 2) P2 = m1 * m1;
        if (highest >= 3) {
            P3 = m1 * P2;
            W = b.Y1 + b.T * b.F - b.Y3;
            R3 = 3.0 * jp * (b.T * b.S) + h * (b.T * b.F + W + b.F * b.T);
        }
        if (highest >= 4) {
            P4 = m1 * P3;
            W2 = b.V1 + 2.0 * (b.Y1 * b.F) - 2.0 * b.Y2 + b.T * b.F * b.F -
                 2.0 * (b.Y3 * b.F) + b.V4;
            const MatrixXd& S = b.S;
            const MatrixXd& T = b.T;
            const MatrixXd& F = b.F;
            R4 = 6.0 * jp * jp * (T * S * S) +
                 h * jp *
                     (3.0 * (T * S * F) + T * F * S + 2.0 * (S * W) + 2.0 * (W * S) +
                      S * F * T + 3.0 * (F * T * S)) +
                 h * h *
                     (T * F * F + W * F + W2 + F * T * F + F * W + F * F * T);
            TT = T * T;
        }
    }

    MatrixXd moment(int n) const {
        switch (n) {
            case 1: return m1;
            case 2: return P2 + s2 * b.T;
            case 3: return P3 + s2 * R3;
            case 4: return P4 + s2 * R4 + 3.0 * s2 * s2 * TT;
        }
        throw std::invalid_argument("moment: order out of range");
    }

    MatrixXd kappa(int n) const {
        switch (n) {
            case 1: return m1;
            case 2: return s2 * b.T;
            case 3: return s2 * (R3 - m1 * b.T - 2.0 * (b.T * m1));
            case 4: {
                const MatrixXd k3 = R3 - m1 * b.T - 2.0 * (b.T * m1);
                return s2 * (R4 - m1 * R3 - 3.0 * (b.T * P2) - 3.0 * (k3 * m1));
            }
        }
        throw std::invalid_argument("kappa: order out of range");
    }
};

}  // namespace

SymSuperOp moment_superop(int n, const DisorderModel& model) {
    model.validate();
    if (n < 1 || n > 3)
        throw std::invalid_argument(
            "moment_superop: only orders 1 to 3 are implemented; higher orders are an "
            "extension seam");
    const SymBasisPtr basis = make_basis(model.N);
    const SectorBlocks blocks = SectorBlocks::build(basis);
    const MomentEngine eng(blocks, model, n);
    return SymSuperOp{basis, eng.moment(n)};
}

const SymSuperOp& CumulantSet::kappa(int n) const {
    if (n < 1 || n > static_cast<int>(kappas.size()))
        throw std::invalid_argument("CumulantSet: cumulant order not built");
    return kappas[n - 1];
}

CumulantSet build_cumulants(const DisorderModel& model, int max_order) {
    model.validate();
    if (max_order < 0 || max_order > 3)
        throw std::invalid_argument("build_cumulants: truncation order must be in 0..3");
    const SymBasisPtr basis = make_basis(model.N);
    const SectorBlocks blocks = SectorBlocks::build(basis);
    const MomentEngine eng(blocks, model, max_order + 1);
    CumulantSet set;
    set.model = model;
    for (int n = 1; n <= max_order + 1; ++n) set.kappas.push_back(SymSuperOp{basis, eng.kappa(n)});
    return set;
}

SymSuperOp cumulant(int n, const DisorderModel& model) {
    if (n < 1 || n > 3)
        throw std::invalid_argument(
            "cumulant: only orders 1 to 3 are exposed; order 4 is internal to the order-3 "
            "truncation");
    return build_cumulants(model, n - 1).kappas.back();
}

SymSuperOp lindbladian(double t, int order, const CumulantSet& cumulants) {
    if (order < 0 || order > cumulants.max_order())
        throw std::invalid_argument("lindbladian: order exceeds the built cumulants");
    // storage already folds the i-powers of the defining expansion into real
    // matrices; any imaginary residue was rejected at projection time
    MatrixXd acc = cumulants.kappa(1).data;
    double weight = 1.0;
    for (int n = 1; n <= order; ++n) {
        weight *= t / double(n);
        acc += weight * cumulants.kappa(n + 1).data;
    }
    return SymSuperOp{cumulants.kappas.front().basis, std::move(acc)};
}

namespace closed_form {

SymSuperOp kappa1(const DisorderModel& model, const SymBasisPtr& basis) {
    model.validate();
    const int n = basis->sites();
    const double jp = model.pair_mean();
    const double h = model.h;
    MatrixXd out = MatrixXd::Zero(basis->dimension(), basis->dimension());
    auto add = [&](const SymIndex& dest, int col, double value) {
        if (value != 0.0 && basis->contains(dest)) out(basis->position(dest), col) += value;
    };
    for (int col = 0; col < basis->dimension(); ++col) {
        const SymIndex a = basis->entries()[col];
        const double x = a.x, y = a.y, z = a.z, w = n - a.x - a.y - a.z;
        // field: toggles one site between Y and Z
        add({a.x, a.y + 1, a.z - 1}, col, -2.0 * h * std::sqrt((y + 1) * z));
        add({a.x, a.y - 1, a.z + 1}, col, 2.0 * h * std::sqrt(y * (z + 1)));
        // mean coupling: X<->Y toggle at one site, 1<->Z at the partner
        add({a.x - 1, a.y + 1, a.z + 1}, col, 2.0 * jp * std::sqrt(x * (y + 1) * (z + 1) * w));
        add({a.x + 1, a.y - 1, a.z + 1}, col, -2.0 * jp * std::sqrt((x + 1) * y * (z + 1) * w));
        add({a.x - 1, a.y + 1, a.z - 1}, col, 2.0 * jp * std::sqrt(x * (y + 1) * z * (w + 1)));
        add({a.x + 1, a.y - 1, a.z - 1}, col,
            -2.0 * jp * std::sqrt((x + 1) * y * z * (w + 1)));
    }
    return SymSuperOp{basis, std::move(out)};
}

SymSuperOp kappa2(const DisorderModel& model, const SymBasisPtr& basis) {
    model.validate();
    const int n = basis->sites();
    const double s2 = model.pair_sigma() * model.pair_sigma();
    MatrixXd out = MatrixXd::Zero(basis->dimension(), basis->dimension());
    for (int col = 0; col < basis->dimension(); ++col) {
        const SymIndex a = basis->entries()[col];
        out(col, col) = -4.0 * s2 * double(a.x + a.y) * double(n - a.x - a.y);
    }
    return SymSuperOp{basis, std::move(out)};
}

SymSuperOp kappa3(const DisorderModel& model, const SymBasisPtr& basis) {
    model.validate();
    const int n = basis->sites();
    const double s2h = model.pair_sigma() * model.pair_sigma() * model.h;
    MatrixXd out = MatrixXd::Zero(basis->dimension(), basis->dimension());
    auto add = [&](const SymIndex& dest, int col, double value) {
        if (value != 0.0 && basis->contains(dest)) out(basis->position(dest), col) += value;
    };
    for (int col = 0; col < basis->dimension(); ++col) {
        const SymIndex a = basis->entries()[col];
        const double x = a.x, y = a.y, z = a.z;
        // field toggle at one site, then the squared coupling counts partners
        // carrying X or Y (or neither, for the reverse toggle)
        add({a.x, a.y - 1, a.z + 1}, col,
            8.0 * s2h * (x + y - 1) * std::sqrt(y * (z + 1)));
        add({a.x, a.y + 1, a.z - 1}, col,
            -8.0 * s2h * (n - a.x - a.y - 1) * std::sqrt((y + 1) * z));
    }
    return SymSuperOp{basis, std::move(out)};
}

}  // namespace closed_form

SymSuperOp sk_exact_map(double t, const DisorderModel& model) {
    model.validate();
    if (model.h != 0.0)
        throw std::invalid_argument("sk_exact_map: closed form requires zero transverse field");
    const SymBasisPtr basis = make_basis(model.N);
    const PairReps r = make_pair_reps();
    const double pairs = pair_count(model.N);
    const MatrixXd s = project_representative(r.c, pairs, basis, r.zz).data;
    const MatrixXd tt = project_representative(r.c * r.c, pairs, basis, r.zz.compose(r.zz)).data;
    const double jp = model.pair_mean();
    const double sp2 = model.pair_sigma() * model.pair_sigma();
    return SymSuperOp{basis, expm_dense(t * jp * s + 0.5 * sp2 * t * t * tt)};
}

DenseSuperOp sk_exact_map(double t, const Eigen::MatrixXd& per_pair_means,
                          const Eigen::MatrixXd& per_pair_stds, int sites) {
    check_pair_matrices(per_pair_means, per_pair_stds, sites);
    DenseSuperOp out = diagonal_pair_superop(
        per_pair_means, per_pair_stds, sites,
        [t](double mean, double var, double delta) {
            return std::complex<double>(-0.5 * var * t * t * delta * delta, -t * mean * delta);
        });
    out.data.diagonal() = out.data.diagonal().array().exp();
    return out;
}

SymSuperOp sk_lindbladian(double t, const DisorderModel& model) {
    model.validate();
    if (model.h != 0.0)
        throw std::invalid_argument("sk_lindbladian: closed form requires zero transverse field");
    const SymBasisPtr basis = make_basis(model.N);
    const PairReps r = make_pair_reps();
    const double pairs = pair_count(model.N);
    const MatrixXd s = project_representative(r.c, pairs, basis, r.zz).data;
    const MatrixXd tt = project_representative(r.c * r.c, pairs, basis, r.zz.compose(r.zz)).data;
    const double jp = model.pair_mean();
    const double sp2 = model.pair_sigma() * model.pair_sigma();
    return SymSuperOp{basis, jp * s + sp2 * t * tt};
}

DenseSuperOp sk_lindbladian(double t, const Eigen::MatrixXd& per_pair_means,
                            const Eigen::MatrixXd& per_pair_stds, int sites) {
    check_pair_matrices(per_pair_means, per_pair_stds, sites);
    return diagonal_pair_superop(per_pair_means, per_pair_stds, sites,
                                 [t](double mean, double var, double delta) {
                                     return std::complex<double>(-var * t * delta * delta,
                                                                 -mean * delta);
                                 });
}

HeisenbergZZ heisenberg_zz_commutator(double t, double h) {
    const double c = std::cos(2.0 * h * t);
    const double s = std::sin(2.0 * h * t);
    return HeisenbergZZ{c * c, s * c, s * s};
}

WeakDisorderKernel::WeakDisorderKernel(const SymBasisPtr& basis, double h, bool scaled)
    : basis_(basis) {
    using A = PauliAxis;
    const int n = basis->sites();
    if (n < 2) throw std::invalid_argument("WeakDisorderKernel: need at least two spins");
    scale_ = scaled ? 1.0 / double(n) : 1.0;

    const DenseSuperOp b1 = adjoint_generator(pauli_string(2, {{1, A::Z}, {2, A::Z}}));
    const DenseSuperOp b2 = adjoint_generator(pauli_string(2, {{1, A::Y}, {2, A::Z}})) +
                            adjoint_generator(pauli_string(2, {{1, A::Z}, {2, A::Y}}));
    const DenseSuperOp b3 = adjoint_generator(pauli_string(2, {{1, A::Y}, {2, A::Y}}));
    const std::array<const DenseSuperOp*, 3> b = {&b1, &b2, &b3};

    const TransitionSupport sz =
        TransitionSupport::axis_moves(A::Z).compose(TransitionSupport::axis_moves(A::Z));
    const TransitionSupport syz =
        TransitionSupport::axis_moves(A::Y).compose(TransitionSupport::axis_moves(A::Z));
    const TransitionSupport syy =
        TransitionSupport::axis_moves(A::Y).compose(TransitionSupport::axis_moves(A::Y));
    const std::array<const TransitionSupport*, 3> supp = {&sz, &syz, &syy};

    const double pairs = pair_count(n);
    for (int alpha = 0; alpha < 3; ++alpha)
        for (int beta = 0; beta < 3; ++beta)
            blocks_[3 * alpha + beta] =
                project_representative_sparse(*b[alpha] * *b[beta], pairs, basis_,
                                              supp[alpha]->compose(*supp[beta]))
                    .data;

    // rotated-coupling envelopes: cos^2, sin*cos, sin^2 of 2ht
    std::array<TrigPoly, 3> g;
    if (h == 0.0) {
        g[0] = TrigPoly::constant(1.0, 0.0);
    } else {
        const double omega = 4.0 * h;
        g[0] = TrigPoly::constant(0.5, omega) + TrigPoly::harmonic_cos(1, 0.5, omega);
        g[1] = TrigPoly::harmonic_sin(1, 0.5, omega);
        g[2] = TrigPoly::constant(0.5, omega) + TrigPoly::harmonic_cos(1, -0.5, omega);
    }
    for (int alpha = 0; alpha < 3; ++alpha)
        for (int beta = 0; beta < 3; ++beta)
            integrals_[3 * alpha + beta] =
                (g[alpha] * g[beta].antiderivative_from_zero()).antiderivative_from_zero();
}

double WeakDisorderKernel::integral(int alpha, int beta, double t) const {
    if (alpha < 0 || alpha > 2 || beta < 0 || beta > 2)
        throw std::invalid_argument("WeakDisorderKernel::integral: channel out of range");
    return integrals_[3 * alpha + beta](t);
}

Eigen::SparseMatrix<double, Eigen::RowMajor> WeakDisorderKernel::generator_sparse(
    double t) const {
    const int d = basis_->dimension();
    Eigen::SparseMatrix<double, Eigen::RowMajor> acc(d, d);
    for (int k = 0; k < 9; ++k) {
        const double coeff = -scale_ * integrals_[k](t);
        if (coeff != 0.0) acc = acc + coeff * blocks_[k];
    }
    return acc;
}

Eigen::MatrixXd WeakDisorderKernel::generator(double t) const {
    return Eigen::MatrixXd(generator_sparse(t));
}

SymSuperOp weak_disorder_generator(double t, const DisorderModel& model) {
    model.validate();
    if (model.mean_J != 0.0)
        throw std::invalid_argument(
            "weak_disorder_generator: nonzero mean coupling is not supported");
    if (t < 0.0) throw std::invalid_argument("weak_disorder_generator: negative time");
    const SymBasisPtr basis = make_basis(model.N);
    const WeakDisorderKernel kernel(basis, model.h, model.scaled);
    return SymSuperOp{basis, kernel.generator(t)};
}

SparseSymSuperOp field_generator_sparse(const SymBasisPtr& basis) {
    if (!basis) throw std::invalid_argument("field_generator_sparse: null basis");
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * basis->dimension());
    for (int col = 0; col < basis->dimension(); ++col) {
        const SymIndex a = basis->entries()[col];
        const double y = a.y, z = a.z;
        // each transverse-field commutator toggles one site between Y and Z
        if (z > 0)
            triplets.emplace_back(basis->position({a.x, a.y + 1, a.z - 1}), col,
                                  -2.0 * std::sqrt((y + 1) * z));
        if (y > 0)
            triplets.emplace_back(basis->position({a.x, a.y - 1, a.z + 1}), col,
                                  2.0 * std::sqrt(y * (z + 1)));
    }
    Eigen::SparseMatrix<double, Eigen::RowMajor> data(basis->dimension(), basis->dimension());
    data.setFromTriplets(triplets.begin(), triplets.end());
    return SparseSymSuperOp{basis, std::move(data)};
}

}  // namespace spinavg
