#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "pmc/curvature_spec.hpp"
#include "pmc/grid.hpp"
#include "pmc/stencil.hpp"

namespace pmc {

// Homogenized gradient data: dtilde_a u = e^{mu_a u} D_a u, split into the
// squared vertical part v1, horizontal part v2 and v = v1 + v2.
struct GradientSplit {
    Eigen::MatrixXd dtilde;  // num_nodes x dim
    Eigen::VectorXd v1, v2, v;
};

GradientSplit gradient_split(const BundleGrid& grid, const Eigen::VectorXd& u,
                             const DerivativeBundle& bundle);
GradientSplit gradient_split(const BundleGrid& grid, const Eigen::VectorXd& u);

// A^{ab}(u) = (1+v) G^{ab} - dtilde^a u dtilde^b u in the orthonormal frame.
struct EllipticCoefficients {
    int dim = 0;
    Eigen::MatrixXd a;  // num_nodes x dim*dim, row-major per node
    double min_eigenvalue = 0.0;
    int argmin_node = 0;

    double entry(int node, int i, int j) const { return a(node, i * dim + j); }
};

EllipticCoefficients elliptic_coefficients(const BundleGrid& grid, const Eigen::VectorXd& u,
                                           const DerivativeBundle& bundle);
EllipticCoefficients elliptic_coefficients(const BundleGrid& grid, const Eigen::VectorXd& u);

// Residual of the prescribed mean curvature equation,
//   R(u) = A^{ab} dtilde_{ab} u + v2 - (m-1)(1+v) + (1+v)^{3/2} e^u K(e^u xi),
// zero exactly at a solution.  Throws AnnulusError when e^u leaves the
// validated annulus of the spec.
Eigen::VectorXd residual(const BundleGrid& grid, const CurvatureSpec& spec, const Eigen::VectorXd& u,
                         const DerivativeBundle& bundle, Scheme scheme = Scheme::standard,
                         bool parallel = true);
Eigen::VectorXd residual(const BundleGrid& grid, const CurvatureSpec& spec, const Eigen::VectorXd& u,
                         Scheme scheme = Scheme::standard, bool parallel = true);

// Analytic linearization of the residual in (u, D_a u, D_{ab} u), scattered
// through the same stencil tables the residual uses.
Eigen::SparseMatrix<double> newton_jacobian(const BundleGrid& grid, const CurvatureSpec& spec,
                                            const Eigen::VectorXd& u);

namespace ref {
// Serial reference residual built on the reference derivative kernels.
Eigen::VectorXd residual(const BundleGrid& grid, const CurvatureSpec& spec, const Eigen::VectorXd& u);
}  // namespace ref

}  // namespace pmc
