#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <functional>
#include <vector>

#include "spinavg/kernels.hpp"

namespace spinavg {

struct OdeProblem {
    std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)> rhs;
    Eigen::VectorXd y0;
    double t_begin = 0.0;
    double t_end = 0.0;
    double rtol = 1e-8;
    double atol = 1e-10;
};

// Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) with steps clamped to
// the requested output times; deterministic for identical inputs.
// Step-size underflow raises numeric_error carrying the diagnostic time.
std::vector<Eigen::VectorXd> integrate(const OdeProblem& problem,
                                       const std::vector<double>& output_times);

// exp(A) v by segmented truncated Taylor series on the action.
Eigen::VectorXd expm_action(const Eigen::MatrixXd& a, const Eigen::VectorXd& v,
                            double tol = 1e-13,
                            ExecutionPolicy policy = ExecutionPolicy::Serial);
Eigen::VectorXd expm_action(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a,
                            const Eigen::VectorXd& v, double tol = 1e-13,
                            ExecutionPolicy policy = ExecutionPolicy::Serial);

struct LinearSolveResult {
    Eigen::VectorXd x;
    double residual = 0.0;  // |Ax-b| / max(|b|, tiny)
    double rcond = 0.0;     // reciprocal condition estimate from the LU factors
    bool conditioning_warning = false;
};

// Dense partial-pivot LU solve with residual check; singular to working
// precision raises numeric_error.
LinearSolveResult solve_linear(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

struct QuadratureRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

QuadratureRule gauss_legendre_rule(int n);  // weight 1 on [-1, 1]
QuadratureRule gauss_hermite_rule(int n);   // weight exp(-x^2) on the line

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int n);

}  // namespace spinavg
