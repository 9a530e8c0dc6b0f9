#pragma once

#include <memory>

#include <Eigen/SparseCore>

#include "pmc/grid.hpp"

namespace pmc {

struct LinearSolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The frozen-coefficient operator of the homotopy,
//   L[w] u  = B^{ab}(w) D_{ab} u - u                    (n = 0)
//   L~[w] u = G^{ij} D_{ij} u + B^{ab}(w) D_{ab} u - u  (n = 1)
// with B^{ab}(w) = (1 + v1(w)) G^{ab} - D^a w D^b w over the fiber
// directions.  Assembled with positive-type stencils (mixed derivatives take
// the 7-point stencil tilted along the sign of the off-diagonal coefficient)
// so the discrete operator keeps the comparison principle; solved by sparse
// LU with one step of iterative refinement.
class FiberwiseOperator {
public:
    FiberwiseOperator(GridPtr grid, const Eigen::VectorXd& w);
    ~FiberwiseOperator();
    FiberwiseOperator(FiberwiseOperator&&) noexcept;
    FiberwiseOperator& operator=(FiberwiseOperator&&) noexcept;

    Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs, double tol_linear = 1e-12) const;
    const Eigen::SparseMatrix<double>& matrix() const;
    double inf_norm() const;  // max absolute row sum

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Solve L[w] u = rhs.
Eigen::VectorXd solve_linear(GridPtr grid, const Eigen::VectorXd& w, const Eigen::VectorXd& rhs,
                             double tol_linear = 1e-12);

// L[w] u without solving (same assembled operator).
Eigen::VectorXd linearized_apply(GridPtr grid, const Eigen::VectorXd& w, const Eigen::VectorXd& u);

}  // namespace pmc
