#include <chrono>
#include <iomanip>
#include <iostream>
#include <limits>

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "spinavg/baseline.hpp"
#include "spinavg/effective_maps.hpp"
#include "spinavg/kernels.hpp"
#include "spinavg/numerics.hpp"
#include "spinavg/observables.hpp"
#include "spinavg/sym_basis.hpp"

namespace {

template <class Work>
double best_ms(int reps, Work&& work) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < reps; ++r) {
        const auto begin = std::chrono::steady_clock::now();
        work();
        const auto end = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(end - begin).count());
    }
    return best;
}

void report(const std::string& name, double serial_ms, double parallel_ms, double max_delta) {
    std::cout << std::left << std::setw(26) << name << std::right << std::fixed
              << std::setprecision(2) << std::setw(10) << serial_ms << " ms" << std::setw(10)
              << parallel_ms << " ms" << std::setw(8) << std::setprecision(2)
              << serial_ms / parallel_ms << "x   max |delta| = " << std::scientific
              << std::setprecision(2) << max_delta << "\n"
              << std::defaultfloat;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Serial versus OpenMP kernel timings; both flavors must agree bit for bit. "
                 "Thread count follows OMP_NUM_THREADS."};
    int dense_sites = 25;
    int sparse_sites = 40;
    int mc_sites = 10;
    long shots = 48;
    int reps = 5;
    bool smoke = false;
    app.add_option("--dense-sites", dense_sites, "system size for the dense matvec");
    app.add_option("--sparse-sites", sparse_sites, "system size for the sparse kernels");
    app.add_option("--mc-sites", mc_sites, "system size for the shot average");
    app.add_option("--shots", shots, "disorder realizations for the shot average");
    app.add_option("--reps", reps, "repetitions, best time wins");
    app.add_flag("--smoke", smoke, "tiny workloads, one repetition");
    CLI11_PARSE(app, argc, argv);

    if (smoke) {
        dense_sites = 10;
        sparse_sites = 14;
        mc_sites = 6;
        shots = 8;
        reps = 1;
    }

    using spinavg::ExecutionPolicy;
    std::cout << "threads: " << spinavg::kernels::thread_count() << "\n";

    {
        const auto basis = spinavg::make_basis(dense_sites);
        const spinavg::WeakDisorderKernel kernel(basis, 1.0, true);
        const Eigen::MatrixXd a = kernel.generator(0.7);
        const Eigen::VectorXd x = spinavg::polarized_state(dense_sites, spinavg::PauliAxis::Z).coeffs;
        Eigen::VectorXd ys(x.size());
        Eigen::VectorXd yp(x.size());
        const int inner = 50;
        const double serial = best_ms(reps, [&] {
            for (int i = 0; i < inner; ++i) spinavg::kernels::matvec(a, x, ys, ExecutionPolicy::Serial);
        });
        const double parallel = best_ms(reps, [&] {
            for (int i = 0; i < inner; ++i) spinavg::kernels::matvec(a, x, yp, ExecutionPolicy::Parallel);
        });
        report("dense matvec (D=" + std::to_string(basis->dimension()) + ")", serial, parallel,
               (ys - yp).cwiseAbs().maxCoeff());
    }

    {
        const auto basis = spinavg::make_basis(sparse_sites);
        const spinavg::WeakDisorderKernel kernel(basis, 1.0, true);
        const Eigen::SparseMatrix<double, Eigen::RowMajor> a = kernel.generator_sparse(0.7);
        const Eigen::VectorXd x = spinavg::polarized_state(sparse_sites, spinavg::PauliAxis::Z).coeffs;
        Eigen::VectorXd ys(x.size());
        Eigen::VectorXd yp(x.size());
        const int inner = 200;
        const double serial = best_ms(reps, [&] {
            for (int i = 0; i < inner; ++i) spinavg::kernels::matvec(a, x, ys, ExecutionPolicy::Serial);
        });
        const double parallel = best_ms(reps, [&] {
            for (int i = 0; i < inner; ++i) spinavg::kernels::matvec(a, x, yp, ExecutionPolicy::Parallel);
        });
        report("sparse matvec (D=" + std::to_string(basis->dimension()) + ")", serial, parallel,
               (ys - yp).cwiseAbs().maxCoeff());
    }

    {
        const auto basis = spinavg::make_basis(sparse_sites);
        const spinavg::WeakDisorderKernel kernel(basis, 1.0, true);
        Eigen::SparseMatrix<double, Eigen::RowMajor> a = kernel.generator_sparse(1.0);
        a *= -0.09;  // a weak-disorder step at sigma = 0.3
        const Eigen::VectorXd v = spinavg::polarized_state(sparse_sites, spinavg::PauliAxis::Z).coeffs;
        Eigen::VectorXd ys;
        Eigen::VectorXd yp;
        const double serial =
            best_ms(reps, [&] { ys = spinavg::expm_action(a, v, 1e-13, ExecutionPolicy::Serial); });
        const double parallel =
            best_ms(reps, [&] { yp = spinavg::expm_action(a, v, 1e-13, ExecutionPolicy::Parallel); });
        report("sparse expm action", serial, parallel, (ys - yp).cwiseAbs().maxCoeff());
    }

    {
        const spinavg::DisorderModel model{mc_sites, 1.0, 0.0, 0.2, true};
        const Eigen::VectorXcd psi0 = spinavg::dense_polarized_state(mc_sites, spinavg::PauliAxis::Z);
        const std::vector<double> times{0.1, 0.2, 0.3, 0.4, 0.5};
        const std::vector<spinavg::ObservableSpec> observables{
            {spinavg::ObservableSpec::Kind::magnetization, spinavg::PauliAxis::Z}};
        spinavg::McEstimate serial_est;
        spinavg::McEstimate parallel_est;
        const double serial = best_ms(reps, [&] {
            serial_est = spinavg::monte_carlo_average(model, shots, psi0, times, observables, 7,
                                                      ExecutionPolicy::Serial);
        });
        const double parallel = best_ms(reps, [&] {
            parallel_est = spinavg::monte_carlo_average(model, shots, psi0, times, observables, 7,
                                                        ExecutionPolicy::Parallel);
        });
        report("shot average (" + std::to_string(shots) + " shots)", serial, parallel,
               (serial_est.mean - parallel_est.mean).cwiseAbs().maxCoeff());
    }

    return 0;
}
