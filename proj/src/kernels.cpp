#include "spinavg/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spinavg::kernels {

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void matvec(const Eigen::MatrixXd& a, const Eigen::VectorXd& x, Eigen::VectorXd& y,
            ExecutionPolicy policy) {
    const Eigen::Index rows = a.rows();
    y.resize(rows);
    if (policy == ExecutionPolicy::Serial) {
        for (Eigen::Index i = 0; i < rows; ++i) y[i] = a.row(i).dot(x);
        return;
    }
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < rows; ++i) y[i] = a.row(i).dot(x);
}

void matvec(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a, const Eigen::VectorXd& x,
            Eigen::VectorXd& y, ExecutionPolicy policy) {
    const Eigen::Index rows = a.rows();
    y.resize(rows);
    auto row_dot = [&](Eigen::Index i) {
        double acc = 0.0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a, i); it; ++it)
            acc += it.value() * x[it.col()];
        y[i] = acc;
    };
    if (policy == ExecutionPolicy::Serial) {
        for (Eigen::Index i = 0; i < rows; ++i) row_dot(i);
        return;
    }
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < rows; ++i) row_dot(i);
}

}  // namespace spinavg::kernels
