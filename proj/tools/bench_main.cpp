#include <chrono>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pmc/graph.hpp"
#include "pmc/operator.hpp"
#include "pmc/stencil.hpp"

using namespace pmc;

namespace {

double time_it(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / reps;
}

void bench_grid(int nlat) {
    GridPtr grid = BundleGrid::build(3, 0, nlat);
    Eigen::VectorXd u(grid->num_nodes());
    for (int node = 0; node < grid->num_nodes(); ++node)
        u[node] = 0.2 * std::sin(grid->theta(node)) * std::cos(grid->phi(node)) +
                  0.1 * std::cos(2.0 * grid->theta(node));

    RadialProfile profile;
    profile.kind = RadialProfile::Kind::power;
    profile.coefficient = 2.0;
    profile.exponent = -1.0;
    const CurvatureSpec spec(profile, {}, 0.05, 20.0);

    const int reps = nlat >= 128 ? 5 : 20;
    const double t_der_par = time_it([&] { covariant_derivatives(*grid, u, Scheme::standard, true); }, reps);
    const double t_der_ser = time_it([&] { covariant_derivatives(*grid, u, Scheme::standard, false); }, reps);
    const double t_der_ref = time_it([&] { ref::covariant_derivatives(*grid, u); }, reps);
    const double t_res_par = time_it([&] { residual(*grid, spec, u, Scheme::standard, true); }, reps);
    const double t_res_ser = time_it([&] { residual(*grid, spec, u, Scheme::standard, false); }, reps);
    const double t_res_ref = time_it([&] { ref::residual(*grid, spec, u); }, reps);
    const double t_jac = time_it([&] { newton_jacobian(*grid, spec, u); }, reps);

    std::printf("grid m=3 %dx%d (%d nodes)\n", nlat, 2 * nlat, grid->num_nodes());
    std::printf("  %-28s %10.3f us  (serial %10.3f us, speedup %.2fx)\n", "covariant derivatives",
                1e6 * t_der_par, 1e6 * t_der_ser, t_der_ser / t_der_par);
    std::printf("  %-28s %10.3f us\n", "reference derivatives", 1e6 * t_der_ref);
    std::printf("  %-28s %10.3f us  (serial %10.3f us, speedup %.2fx)\n", "residual", 1e6 * t_res_par,
                1e6 * t_res_ser, t_res_ser / t_res_par);
    std::printf("  %-28s %10.3f us\n", "reference residual", 1e6 * t_res_ref);
    std::printf("  %-28s %10.3f us\n", "jacobian assembly", 1e6 * t_jac);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP\n");
#endif
    bench_grid(32);
    bench_grid(64);
    bench_grid(128);
    return 0;
}
