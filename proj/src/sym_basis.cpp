#include "spinavg/sym_basis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>

#include "spinavg/errors.hpp"

namespace spinavg {

namespace {

using Cplx = std::complex<double>;

void check_index(int sites, const SymIndex& idx) {
    if (idx.x < 0 || idx.y < 0 || idx.z < 0 || idx.weight() > sites)
        throw std::invalid_argument("SymIndex outside the simplex for this N");
}

// All axis assignments with the given letter counts on sites 1..k.
void enumerate_strings(int k, const SymIndex& idx,
                       const std::function<void(const std::map<int, PauliAxis>&)>& emit) {
    std::map<int, PauliAxis> assignment;
    std::function<void(int, int, int, int)> rec = [&](int site, int x, int y, int z) {
        if (site > k) {
            if (x == 0 && y == 0 && z == 0) emit(assignment);
            return;
        }
        int rest = k - site + 1;
        if (x + y + z > rest) return;
        rec(site + 1, x, y, z);
        if (x > 0) {
            assignment[site] = PauliAxis::X;
            rec(site + 1, x - 1, y, z);
            assignment.erase(site);
        }
        if (y > 0) {
            assignment[site] = PauliAxis::Y;
            rec(site + 1, x, y - 1, z);
            assignment.erase(site);
        }
        if (z > 0) {
            assignment[site] = PauliAxis::Z;
            rec(site + 1, x, y, z - 1);
            assignment.erase(site);
        }
    };
    rec(1, idx.x, idx.y, idx.z);
}

std::vector<Eigen::Triplet<double>> embed_triplets(const Eigen::MatrixXd& class_proj, int k,
                                                   double multiplicity, const SymBasis& basis,
                                                   const TransitionSupport& support) {
    const SymBasis small(k);
    const int n = basis.sites();
    if (k > n) throw std::invalid_argument("representative larger than target system");
    const double scale = std::max(1.0, class_proj.cwiseAbs().maxCoeff());

    // Validate the declared support against the observed k-site transitions.
    for (int src = 0; src < small.dimension(); ++src) {
        for (int dst = 0; dst < small.dimension(); ++dst) {
            if (std::abs(class_proj(dst, src)) <= 1e-12 * scale) continue;
            const SymIndex& b = small.entries()[src];
            const SymIndex& bp = small.entries()[dst];
            if (!support.allows(bp.x - b.x, bp.y - b.y, bp.z - b.z))
                throw std::logic_error("projected representative has a transition outside its declared support");
        }
    }

    // Matrix element between N-site classes a' and a: sum over splittings
    // a = b + rest, a' = b' + rest of
    //   sqrt(mult_k(b') mult_k(b) / (mult_N(a') mult_N(a))) * mult_{N-k}(rest) * m(b', b)
    // times the placement multiplicity. The 2^j normalization factors cancel.
    std::vector<Eigen::Triplet<double>> trips;
    for (int col = 0; col < basis.dimension(); ++col) {
        const SymIndex a = basis.entries()[col];
        const double lm_a = log_multinomial(n, a);
        for (int src = 0; src < small.dimension(); ++src) {
            const SymIndex b = small.entries()[src];
            const SymIndex rest{a.x - b.x, a.y - b.y, a.z - b.z};
            if (rest.x < 0 || rest.y < 0 || rest.z < 0) continue;
            if (rest.weight() > n - k) continue;
            const double lm_rest = log_multinomial(n - k, rest);
            const double lm_b = log_multinomial(k, b);
            for (int dst = 0; dst < small.dimension(); ++dst) {
                const double m = class_proj(dst, src);
                if (std::abs(m) <= 1e-14 * scale) continue;
                const SymIndex bp = small.entries()[dst];
                const SymIndex ap{rest.x + bp.x, rest.y + bp.y, rest.z + bp.z};
                const double lm_ap = log_multinomial(n, ap);
                const double lm_bp = log_multinomial(k, bp);
                const double w =
                    std::exp(0.5 * (lm_b + lm_bp - lm_a - lm_ap) + lm_rest) * multiplicity;
                trips.emplace_back(basis.position(ap), col, w * m);
            }
        }
    }
    return trips;
}

}  // namespace

int dimension(int sites) {
    if (sites < 1) throw std::invalid_argument("dimension: sites < 1");
    return (sites + 1) * (sites + 2) * (sites + 3) / 6;
}

double log_multinomial(int n, const SymIndex& idx) {
    const int w = n - idx.weight();
    if (idx.x < 0 || idx.y < 0 || idx.z < 0 || w < 0)
        return -std::numeric_limits<double>::infinity();
    return std::lgamma(n + 1.0) - std::lgamma(idx.x + 1.0) - std::lgamma(idx.y + 1.0) -
           std::lgamma(idx.z + 1.0) - std::lgamma(w + 1.0);
}

double normalization(int sites, const SymIndex& idx) {
    check_index(sites, idx);
    return std::ldexp(std::exp(log_multinomial(sites, idx)), sites);
}

SymBasis::SymBasis(int sites) : sites_(sites) {
    if (sites < 1) throw std::invalid_argument("SymBasis: sites < 1");
    entries_.reserve(spinavg::dimension(sites));
    for (int x = 0; x <= sites; ++x)
        for (int y = 0; x + y <= sites; ++y)
            for (int z = 0; x + y + z <= sites; ++z) entries_.push_back({x, y, z});
}

bool SymBasis::contains(const SymIndex& idx) const {
    return idx.x >= 0 && idx.y >= 0 && idx.z >= 0 && idx.weight() <= sites_;
}

int SymBasis::position(const SymIndex& idx) const {
    if (!contains(idx)) throw std::invalid_argument("SymBasis::position: index off the simplex");
    int pos = 0;
    for (int xp = 0; xp < idx.x; ++xp) {
        const int m = sites_ - xp;
        pos += (m + 1) * (m + 2) / 2;
    }
    pos += idx.y * (sites_ - idx.x + 1) - idx.y * (idx.y - 1) / 2 + idx.z;
    return pos;
}

SymBasisPtr make_basis(int sites) { return std::make_shared<const SymBasis>(sites); }

DenseOperator build_symmetric_string(int k, const SymIndex& idx) {
    if (k > 8) throw feasibility_error("build_symmetric_string: k > 8 is not dense-feasible");
    check_index(k, idx);
    const long dim = 1L << k;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
    enumerate_strings(k, idx, [&](const std::map<int, PauliAxis>& assignment) {
        acc += pauli_string(k, assignment).data;
    });
    acc /= std::sqrt(normalization(k, idx));
    return {k, std::move(acc)};
}

TransitionSupport TransitionSupport::identity() { return {{{0, 0, 0}}}; }

TransitionSupport TransitionSupport::axis_moves(PauliAxis axis) {
    // Multiplying one site by P toggles that site's letter: identity <-> P,
    // and the two other letters swap into each other.
    switch (axis) {
        case PauliAxis::X:
            return {{{1, 0, 0}, {-1, 0, 0}, {0, -1, 1}, {0, 1, -1}}};
        case PauliAxis::Y:
            return {{{0, 1, 0}, {0, -1, 0}, {-1, 0, 1}, {1, 0, -1}}};
        case PauliAxis::Z:
            return {{{0, 0, 1}, {0, 0, -1}, {-1, 1, 0}, {1, -1, 0}}};
    }
    throw std::invalid_argument("axis_moves: bad axis");
}

TransitionSupport TransitionSupport::compose(const TransitionSupport& other) const {
    TransitionSupport out;
    for (const auto& a : deltas)
        for (const auto& b : other.deltas)
            out.deltas.push_back({a[0] + b[0], a[1] + b[1], a[2] + b[2]});
    std::sort(out.deltas.begin(), out.deltas.end());
    out.deltas.erase(std::unique(out.deltas.begin(), out.deltas.end()), out.deltas.end());
    return out;
}

TransitionSupport TransitionSupport::merge(const TransitionSupport& other) const {
    TransitionSupport out = *this;
    out.deltas.insert(out.deltas.end(), other.deltas.begin(), other.deltas.end());
    std::sort(out.deltas.begin(), out.deltas.end());
    out.deltas.erase(std::unique(out.deltas.begin(), out.deltas.end()), out.deltas.end());
    return out;
}

bool TransitionSupport::allows(int dx, int dy, int dz) const {
    return std::binary_search(deltas.begin(), deltas.end(), std::array<int, 3>{dx, dy, dz});
}

Eigen::MatrixXd project_to_classes(const DenseSuperOp& k_site_op) {
    const int k = k_site_op.sites;
    const SymBasis small(k);
    const int d = small.dimension();
    std::vector<Eigen::VectorXcd> vecs(d);
    for (int i = 0; i < d; ++i)
        vecs[i] = vectorize(build_symmetric_string(k, small.entries()[i]).data);
    Eigen::MatrixXcd m(d, d);
    for (int src = 0; src < d; ++src) {
        const Eigen::VectorXcd image = k_site_op.data * vecs[src];
        for (int dst = 0; dst < d; ++dst) m(dst, src) = vecs[dst].dot(image);
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (m.imag().cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw numeric_error("project_to_classes: imaginary residue; operator is not real in the Hermitian basis");
    return m.real();
}

SymSuperOp project_representative(const DenseSuperOp& representative, double multiplicity,
                                  const SymBasisPtr& basis, const TransitionSupport& support) {
    const Eigen::MatrixXd m = project_to_classes(representative);
    const auto trips = embed_triplets(m, representative.sites, multiplicity, *basis, support);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(basis->dimension(), basis->dimension());
    for (const auto& t : trips) out(t.row(), t.col()) += t.value();
    return {basis, std::move(out)};
}

SparseSymSuperOp project_representative_sparse(const DenseSuperOp& representative,
                                               double multiplicity, const SymBasisPtr& basis,
                                               const TransitionSupport& support) {
    const Eigen::MatrixXd m = project_to_classes(representative);
    const auto trips = embed_triplets(m, representative.sites, multiplicity, *basis, support);
    Eigen::SparseMatrix<double, Eigen::RowMajor> out(basis->dimension(), basis->dimension());
    out.setFromTriplets(trips.begin(), trips.end());
    return {basis, std::move(out)};
}

SymState project_full_state(const DenseOperator& rho, const SymBasisPtr& basis) {
    const int n = basis->sites();
    if (rho.sites != n) throw std::invalid_argument("project_full_state: size mismatch");
    if (n > 12) throw feasibility_error("project_full_state: N > 12 is not dense-feasible");

    // Fold one site at a time: partial traces against I, X, Y, Z of the
    // leading site reduce the block and bump the matching letter count.
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(basis->dimension());
    std::function<void(const Eigen::MatrixXcd&, int, int, int)> rec =
        [&](const Eigen::MatrixXcd& block, int x, int y, int z) {
            const long dim = block.rows();
            if (dim == 1) {
                acc[basis->position({x, y, z})] += block(0, 0);
                return;
            }
            const long h = dim / 2;
            const auto a = block.topLeftCorner(h, h);
            const auto b = block.topRightCorner(h, h);
            const auto c = block.bottomLeftCorner(h, h);
            const auto d = block.bottomRightCorner(h, h);
            rec(a + d, x, y, z);
            rec(b + c, x + 1, y, z);
            rec(Cplx(0, 1) * (b - c), x, y + 1, z);
            rec(a - d, x, y, z + 1);
        };
    rec(rho.data, 0, 0, 0);

    const double scale = std::max(1.0, acc.cwiseAbs().maxCoeff());
    if (acc.imag().cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw numeric_error("project_full_state: non-Hermitian input");

    Eigen::VectorXd coeffs(basis->dimension());
    for (int i = 0; i < basis->dimension(); ++i)
        coeffs[i] = acc[i].real() / std::sqrt(normalization(n, basis->entries()[i]));
    return {basis, std::move(coeffs)};
}

DenseOperator reconstruct_state(const SymState& state) {
    const int n = state.basis->sites();
    const long dim = 1L << n;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    for (int i = 0; i < state.basis->dimension(); ++i) {
        const double c = state.coeffs[i];
        if (c == 0.0) continue;
        out += c * build_symmetric_string(n, state.basis->entries()[i]).data;
    }
    return {n, std::move(out)};
}

}  // namespace spinavg
