#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace spinavg {

// Hot loops come in a serial reference flavor and an OpenMP flavor.  Both
// produce bit-identical results: parallel loops only ever write disjoint
// slots, and every floating-point reduction runs serially in a fixed order.
enum class ExecutionPolicy { Serial, Parallel };

namespace kernels {

int thread_count();

// y = A*x. Row-parallel; each row's dot product is evaluated serially by one
// thread, so the result does not depend on the schedule.
void matvec(const Eigen::MatrixXd& a, const Eigen::VectorXd& x, Eigen::VectorXd& y,
            ExecutionPolicy policy);
void matvec(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a, const Eigen::VectorXd& x,
            Eigen::VectorXd& y, ExecutionPolicy policy);

}  // namespace kernels
}  // namespace spinavg
