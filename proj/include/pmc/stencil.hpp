#pragma once

#include <vector>

#include <Eigen/Core>

#include "pmc/grid.hpp"

namespace pmc {

// One linear node-local operator in CSR form (one row per node).
struct StencilOp {
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> weight;

    void apply(const Eigen::VectorXd& u, Eigen::VectorXd& out, bool parallel = true) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& u, bool parallel = true) const;
};

// Covariant derivative operators in the orthonormal frame, assembled once per
// grid and scheme.  `first[a]` produces D_a u; `second[pack(a,b)]` produces
// D_{ab} u with the round-metric Christoffel corrections folded into the
// weights.  The Hessian is symmetric (flat bundle, zero torsion), so only the
// upper triangle is stored.
struct DerivativeTables {
    Scheme scheme;
    int dim = 0;
    std::vector<StencilOp> first;
    std::vector<StencilOp> second;

    static int pack(int a, int b, int dim) {
        if (a > b) std::swap(a, b);
        return a * dim - a * (a - 1) / 2 + (b - a);
    }
    const StencilOp& second_op(int a, int b) const { return second[pack(a, b, dim)]; }
};

DerivativeTables build_derivative_tables(const BundleGrid& grid, Scheme scheme);

// Per-node covariant derivatives of a scalar field.
struct DerivativeBundle {
    int dim = 0;
    Eigen::MatrixXd d1;  // num_nodes x dim
    Eigen::MatrixXd d2;  // num_nodes x dim*(dim+1)/2, packed upper triangle

    double first(int node, int a) const { return d1(node, a); }
    double second(int node, int a, int b) const { return d2(node, DerivativeTables::pack(a, b, dim)); }
};

DerivativeBundle covariant_gradient(const BundleGrid& grid, const Eigen::VectorXd& u,
                                    Scheme scheme = Scheme::standard, bool parallel = true);
DerivativeBundle covariant_hessian(const BundleGrid& grid, const Eigen::VectorXd& u,
                                   Scheme scheme = Scheme::standard, bool parallel = true);
// Gradient and Hessian in one pass.
DerivativeBundle covariant_derivatives(const BundleGrid& grid, const Eigen::VectorXd& u,
                                       Scheme scheme = Scheme::standard, bool parallel = true);

namespace ref {
// Straightforward serial implementations kept as a cross-check for the
// table-driven kernels (same scheme semantics, independent code path).
DerivativeBundle covariant_derivatives(const BundleGrid& grid, const Eigen::VectorXd& u);
}  // namespace ref

}  // namespace pmc
