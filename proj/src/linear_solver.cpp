#include "pmc/linear_solver.hpp"

#include <cmath>
#include <vector>

#include <Eigen/SparseLU>

#include "pmc/stencil.hpp"

namespace pmc {

struct FiberwiseOperator::Impl {
    GridPtr grid;
    Eigen::SparseMatrix<double> mat;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

namespace {

void assemble(const BundleGrid& grid, const Eigen::VectorXd& w,
              std::vector<Eigen::Triplet<double>>& trips) {
    const int nodes = grid.num_nodes();
    const DerivativeBundle grad = covariant_gradient(grid, w);
    const double ht = grid.h_theta();

    for (int node = 0; node < nodes; ++node) {
        const int f = grid.fiber_index(node);
        const int b = grid.base_index(node);
        auto add = [&](int dt, int dp, int dx, double val) {
            const int fb = grid.fiber_neighbor(f, dt, dp);
            const int bb = grid.n() == 1 ? grid.base_neighbor(b, dx) : 0;
            trips.emplace_back(node, grid.node_index(fb, bb), val);
        };

        trips.emplace_back(node, node, -1.0);  // zeroth-order term

        if (grid.m() == 2) {
            // B is identically 1 on a one-dimensional fiber
            add(-1, 0, 0, 1.0 / (ht * ht));
            add(0, 0, 0, -2.0 / (ht * ht));
            add(1, 0, 0, 1.0 / (ht * ht));
        } else {
            const double hp = grid.h_phi();
            const double st = std::sin(grid.theta(node));
            const double ct = std::cos(grid.theta(node));
            const double g1 = grad.first(node, 0);
            const double g2 = grad.first(node, 1);
            const double b11 = 1.0 + g2 * g2;
            const double b22 = 1.0 + g1 * g1;
            const double b12 = -g1 * g2;

            // coordinate coefficients of B^{ab} D_{ab}
            const double c_tt = b11;
            const double c_pp = b22 / (st * st);
            const double c_t = b22 * ct / st;
            const double c_p = -2.0 * b12 * ct / (st * st);
            const double q = 2.0 * b12 / st;  // u_theta_phi coefficient

            add(-1, 0, 0, c_tt / (ht * ht) - c_t / (2.0 * ht));
            add(1, 0, 0, c_tt / (ht * ht) + c_t / (2.0 * ht));
            add(0, 0, 0, -2.0 * c_tt / (ht * ht));
            add(0, -1, 0, c_pp / (hp * hp) - c_p / (2.0 * hp));
            add(0, 1, 0, c_pp / (hp * hp) + c_p / (2.0 * hp));
            add(0, 0, 0, -2.0 * c_pp / (hp * hp));

            // tilted 7-point mixed stencil, corners aligned with sign(q)
            const double aq = std::abs(q) / (2.0 * ht * hp);
            const int s = q >= 0.0 ? 1 : -1;
            add(1, s, 0, aq);
            add(-1, -s, 0, aq);
            add(0, 0, 0, 2.0 * aq);
            add(1, 0, 0, -aq);
            add(-1, 0, 0, -aq);
            add(0, 1, 0, -aq);
            add(0, -1, 0, -aq);
        }

        if (grid.n() == 1) {
            const double hx = grid.h_base();
            add(0, 0, -1, 1.0 / (hx * hx));
            add(0, 0, 0, -2.0 / (hx * hx));
            add(0, 0, 1, 1.0 / (hx * hx));
        }
    }
}

}  // namespace

FiberwiseOperator::FiberwiseOperator(GridPtr grid, const Eigen::VectorXd& w)
    : impl_(std::make_unique<Impl>()) {
    impl_->grid = std::move(grid);
    const int nodes = impl_->grid->num_nodes();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(nodes) * 14);
    assemble(*impl_->grid, w, trips);
    impl_->mat.resize(nodes, nodes);
    impl_->mat.setFromTriplets(trips.begin(), trips.end());
    impl_->lu.compute(impl_->mat);
    if (impl_->lu.info() != Eigen::Success)
        throw LinearSolveError("factorization of the frozen-coefficient operator failed");
}

FiberwiseOperator::~FiberwiseOperator() = default;
FiberwiseOperator::FiberwiseOperator(FiberwiseOperator&&) noexcept = default;
FiberwiseOperator& FiberwiseOperator::operator=(FiberwiseOperator&&) noexcept = default;

Eigen::VectorXd FiberwiseOperator::apply(const Eigen::VectorXd& u) const { return impl_->mat * u; }

Eigen::VectorXd FiberwiseOperator::solve(const Eigen::VectorXd& rhs, double tol_linear) const {
    Eigen::VectorXd x = impl_->lu.solve(rhs);
    if (impl_->lu.info() != Eigen::Success)
        throw LinearSolveError("sparse solve failed (singular discrete operator?)");
    const double scale = std::max(rhs.lpNorm<Eigen::Infinity>(), 1e-300);
    Eigen::VectorXd res = rhs - impl_->mat * x;
    if (res.lpNorm<Eigen::Infinity>() > tol_linear * scale) {
        x += impl_->lu.solve(res);
        res = rhs - impl_->mat * x;
        if (res.lpNorm<Eigen::Infinity>() > tol_linear * scale)
            throw LinearSolveError("linear solve did not reach the requested tolerance");
    }
    return x;
}

const Eigen::SparseMatrix<double>& FiberwiseOperator::matrix() const { return impl_->mat; }

double FiberwiseOperator::inf_norm() const {
    const auto& m = impl_->mat;
    Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(m.rows());
    for (int k = 0; k < m.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
            rowsum[it.row()] += std::abs(it.value());
    return rowsum.maxCoeff();
}

Eigen::VectorXd solve_linear(GridPtr grid, const Eigen::VectorXd& w, const Eigen::VectorXd& rhs,
                             double tol_linear) {
    return FiberwiseOperator(std::move(grid), w).solve(rhs, tol_linear);
}

Eigen::VectorXd linearized_apply(GridPtr grid, const Eigen::VectorXd& w, const Eigen::VectorXd& u) {
    return FiberwiseOperator(std::move(grid), w).apply(u);
}

}  // namespace pmc
