#include "spinavg/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spinavg/errors.hpp"

namespace spinavg {

namespace {

double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0,
                  const Eigen::VectorXd& y1, double rtol, double atol) {
    double acc = 0.0;
    for (long i = 0; i < err.size(); ++i) {
        const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double q = err[i] / scale;
        acc += q * q;
    }
    return std::sqrt(acc / double(err.size()));
}

double norm1(const Eigen::MatrixXd& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

double norm1(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a) {
    Eigen::VectorXd col = Eigen::VectorXd::Zero(a.cols());
    for (int r = 0; r < a.outerSize(); ++r)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a, r); it; ++it)
            col[it.col()] += std::abs(it.value());
    return col.size() ? col.maxCoeff() : 0.0;
}

template <class Mat>
Eigen::VectorXd expm_action_impl(const Mat& a, const Eigen::VectorXd& v, double tol,
                                 ExecutionPolicy policy) {
    if (a.rows() != a.cols() || a.cols() != v.size())
        throw std::invalid_argument("expm_action: dimension mismatch");
    const double na = norm1(a);
    if (!std::isfinite(na)) throw std::invalid_argument("expm_action: non-finite matrix");
    // Segment so each Taylor series runs at norm <= 4.
    const int segments = std::max(1, static_cast<int>(std::ceil(na / 4.0)));
    const double inv_s = 1.0 / double(segments);
    constexpr int kMaxTerms = 300;

    Eigen::VectorXd w = v;
    Eigen::VectorXd term(v.size()), scratch(v.size());
    for (int s = 0; s < segments; ++s) {
        term = w;
        bool converged = false;
        for (int k = 1; k <= kMaxTerms; ++k) {
            kernels::matvec(a, term, scratch, policy);
            term = scratch * (inv_s / double(k));
            w += term;
            if (term.norm() <= tol * std::max(1e-300, w.norm())) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw numeric_error("expm_action: Taylor series failed to converge at the term cap");
    }
    return w;
}

}  // namespace

std::vector<Eigen::VectorXd> integrate(const OdeProblem& problem,
                                       const std::vector<double>& output_times) {
    if (problem.rtol <= 0 || problem.atol <= 0)
        throw std::invalid_argument("integrate: tolerances must be positive");
    if (!std::is_sorted(output_times.begin(), output_times.end()))
        throw std::invalid_argument("integrate: output times must be sorted");
    if (!output_times.empty() &&
        (output_times.front() < problem.t_begin - 1e-12 ||
         output_times.back() > problem.t_end + 1e-12))
        throw std::invalid_argument("integrate: output times outside the span");

    // Dormand-Prince 5(4) tableau.
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695,
                        e4 = b4 - 393.0 / 640, e5 = b5 + 92097.0 / 339200,
                        e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

    const long dim = problem.y0.size();
    Eigen::VectorXd y = problem.y0;
    double t = problem.t_begin;
    Eigen::VectorXd k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
    Eigen::VectorXd ytmp(dim), ynew(dim), err(dim);

    std::vector<Eigen::VectorXd> out;
    out.reserve(output_times.size());
    size_t next_out = 0;
    while (next_out < output_times.size() && output_times[next_out] <= t + 1e-14 * std::max(1.0, std::abs(t))) {
        out.push_back(y);
        ++next_out;
    }
    if (next_out >= output_times.size()) return out;

    problem.rhs(t, y, k1);
    // initial step heuristic
    const double span = output_times.back() - t;
    double h = span;
    {
        const double d0 = y.norm(), d1 = k1.norm();
        if (d1 > 1e-12) h = std::min(h, 0.01 * std::max(d0, 1.0) / d1);
        h = std::max(h, 1e-10 * std::max(1.0, span));
    }

    while (next_out < output_times.size()) {
        const double t_target = output_times[next_out];
        bool clamped = false;
        if (t + h >= t_target) {
            h = t_target - t;
            clamped = true;
        }
        if (h <= 1e-14 * std::max(1.0, std::abs(t)))
            throw numeric_error("integrate: step size underflow near t = " + std::to_string(t) +
                                " (stiffness suspected)");

        ytmp = y + h * (a21 * k1);
        problem.rhs(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        problem.rhs(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        problem.rhs(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        problem.rhs(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        problem.rhs(t + h, ytmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        problem.rhs(t + h, ynew, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double en = error_norm(err, y, ynew, problem.rtol, problem.atol);
        if (en <= 1.0) {
            t = clamped ? t_target : t + h;
            y = ynew;
            k1 = k7;  // first-same-as-last; on rejection k1 is still rhs(t, y)
            while (next_out < output_times.size() &&
                   output_times[next_out] <= t + 1e-14 * std::max(1.0, std::abs(t))) {
                out.push_back(y);
                ++next_out;
            }
        }
        const double factor =
            std::clamp(0.9 * std::pow(std::max(en, 1e-10), -0.2), 0.2, 5.0);
        h = std::max(h * factor, 1e-14);
    }
    return out;
}

Eigen::VectorXd expm_action(const Eigen::MatrixXd& a, const Eigen::VectorXd& v, double tol,
                            ExecutionPolicy policy) {
    return expm_action_impl(a, v, tol, policy);
}

Eigen::VectorXd expm_action(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a,
                            const Eigen::VectorXd& v, double tol, ExecutionPolicy policy) {
    return expm_action_impl(a, v, tol, policy);
}

LinearSolveResult solve_linear(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    if (a.rows() != a.cols() || a.cols() != b.size())
        throw std::invalid_argument("solve_linear: dimension mismatch");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
    const double pivot_max = pivots.maxCoeff();
    if (pivot_max == 0.0 || pivots.minCoeff() <= 1e-14 * pivot_max)
        throw numeric_error("solve_linear: matrix is singular to working precision");
    LinearSolveResult res;
    res.x = lu.solve(b);
    res.rcond = lu.rcond();
    if (!res.x.allFinite() || res.rcond == 0.0)
        throw numeric_error("solve_linear: matrix is singular to working precision");
    const double bnorm = std::max(b.norm(), 1e-300);
    res.residual = (a * res.x - b).norm() / bnorm;
    res.conditioning_warning = res.residual > 1e-10;
    return res;
}

namespace {

// Golub-Welsch: nodes are eigenvalues of the symmetric Jacobi matrix, weights
// are mu0 times the squared first eigenvector components.
QuadratureRule golub_welsch(const Eigen::VectorXd& off_diagonal, double mu0) {
    const int n = static_cast<int>(off_diagonal.size()) + 1;
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) {
        jacobi(i, i + 1) = off_diagonal[i];
        jacobi(i + 1, i) = off_diagonal[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    if (es.info() != Eigen::Success) throw numeric_error("quadrature: eigensolver failed");
    QuadratureRule rule;
    rule.nodes = es.eigenvalues();
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

}  // namespace

QuadratureRule gauss_legendre_rule(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre_rule: n < 1");
    Eigen::VectorXd off(n - 1);
    for (int k = 1; k < n; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    return golub_welsch(off, 2.0);
}

QuadratureRule gauss_hermite_rule(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite_rule: n < 1");
    Eigen::VectorXd off(n - 1);
    for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(k / 2.0);
    return golub_welsch(off, std::sqrt(M_PI));
}

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int n) {
    const QuadratureRule rule = gauss_legendre_rule(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return acc * half;
}

}  // namespace spinavg
