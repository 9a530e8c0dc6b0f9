#pragma once

#include <iosfwd>

#include <Eigen/Core>

#include "pmc/curvature_spec.hpp"
#include "pmc/grid.hpp"
#include "pmc/stencil.hpp"

namespace pmc {

// The embedded radial graph Y(xi) = e^{u(xi)} xi with its induced metric
// data.  All tensors are stored in Sigma-frame (homogenized) components:
// h_lower = G_ab + dtilde_a u dtilde_b u, h_upper its inverse, f = (1+v)^{-1/2}.
struct RadialGraph {
    GridPtr grid;
    Eigen::VectorXd u;
    DerivativeBundle bundle;
    Eigen::MatrixXd dtilde;        // homogenized first derivatives
    Eigen::MatrixXd positions;     // num_nodes x 3, fiber ambient coordinates
    Eigen::MatrixXd h_lower;       // num_nodes x dim*dim
    Eigen::MatrixXd h_upper;       // num_nodes x dim*dim
    Eigen::VectorXd f;             // normal factor, in (0, 1]
    Eigen::VectorXd mean_curvature;  // direct formula
    Eigen::VectorXd k_composed;      // K o Y

    int dim() const { return grid->dim(); }
    double h_entry(int node, int i, int j, bool upper) const {
        return (upper ? h_upper : h_lower)(node, i * dim() + j);
    }
};

RadialGraph embed(GridPtr grid, const CurvatureSpec& spec, const Eigen::VectorXd& u);

// Mean curvature from the graph's own derivative data,
//   M = f e^{-u} H^{ab} [ (1-mu_a) H_ab - mu_b dtilde_a u dtilde_b u - dtilde_ab u ].
Eigen::VectorXd mean_curvature_direct(const RadialGraph& graph);

// Same formula evaluated on the high-order derivative path; independent of
// the solver's stencils, used for convergence measurement.
Eigen::VectorXd mean_curvature_direct_independent(const BundleGrid& grid, const Eigen::VectorXd& u);

// Extrinsic estimate from the embedded object (n = 0 only): polygonal polar
// curvature for m = 2, cotangent-weight mean curvature on the triangulated
// graph for m = 3.
Eigen::VectorXd mean_curvature_discrete(const RadialGraph& graph);

struct DeviationStats {
    double max_abs = 0.0;
    double mean_abs = 0.0;
    double max_rel = 0.0;
    int argmax = 0;
};

DeviationStats deviation_stats(const Eigen::VectorXd& estimate, const Eigen::VectorXd& reference);

struct VerificationReport {
    DeviationStats direct;       // solver-path direct estimator vs K o Y
    DeviationStats independent;  // high-order-path direct estimator vs K o Y
    DeviationStats discrete;     // extrinsic estimator vs K o Y (n = 0)
    bool discrete_available = false;
    double grid_spacing = 0.0;
};

VerificationReport verify(const RadialGraph& graph, const CurvatureSpec& spec);

// m = 3: vertex/face plain-text mesh of the embedded graph.
void export_mesh(const RadialGraph& graph, std::ostream& os);
// m = 2: closed polyline as CSV (theta, x, y).
void export_polyline(const RadialGraph& graph, std::ostream& os);

}  // namespace pmc
