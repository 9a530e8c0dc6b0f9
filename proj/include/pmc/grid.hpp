#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace pmc {

struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Finite-difference scheme used by the covariant derivative tables.
//
// `standard` is second-order centered, except that every term carrying a
// pole-singular metric coefficient on the m = 3 fiber (1/sin, cot, 1/sin^2)
// uses a fourth-order stencil so the max-norm truncation stays O(h^2) on the
// rings next to the poles.  `high_order` uses fourth-order stencils for every
// term and serves as the independent derivative path of the verification
// module.
enum class Scheme { standard, high_order };

struct StencilOp;
struct DerivativeTables;

// Discretization of the unit sphere bundle Sigma.  The fiber is S^{m-1}
// (m = 2: periodic grid on the circle, m = 3: latitude-longitude grid with
// colatitudes staggered off the poles); the optional base (n = 1) is a flat
// circle carrying the trivial bundle, so fiber and base directions commute.
class BundleGrid {
public:
    static constexpr int min_resolution = 8;

    // m in {2,3}, n in {0,1}.  fiber_resolution counts nodes on S^1 (m = 2)
    // or latitude rings (m = 3, with 2x as many longitudes).
    static std::shared_ptr<const BundleGrid> build(int m, int n, int fiber_resolution,
                                                   int base_resolution = 0);

    ~BundleGrid();

    int m() const { return m_; }
    int n() const { return n_; }
    int dim() const { return dim_; }
    int num_nodes() const { return num_nodes_; }
    int fiber_nodes() const { return fiber_nodes_; }
    int base_points() const { return base_points_; }
    int fiber_resolution() const { return fiber_res_; }
    int base_resolution() const { return base_res_; }
    int n_lat() const { return n_lat_; }
    int n_lon() const { return n_lon_; }

    // Direction classes: vertical (fiber) directions first, then horizontal.
    int mu(int dir) const { return dir < m_ - 1 ? 0 : 1; }
    int vertical_dirs() const { return m_ - 1; }
    int horizontal_dirs() const { return n_; }

    double h_theta() const { return h_theta_; }
    double h_phi() const { return h_phi_; }
    double h_base() const { return h_base_; }
    // Largest grid spacing; refinement studies report errors against this.
    double h_max() const;

    int node_index(int fiber, int base) const { return base * fiber_nodes_ + fiber; }
    int fiber_index(int node) const { return node % fiber_nodes_; }
    int base_index(int node) const { return node / fiber_nodes_; }

    int lat_index(int fiber) const { return fiber / n_lon_; }
    int lon_index(int fiber) const { return fiber % n_lon_; }

    // Fiber angle on S^1 (m = 2) or colatitude (m = 3).
    double theta(int node) const { return theta_[fiber_index(node)]; }
    double phi(int node) const { return phi_[fiber_index(node)]; }
    double base_coord(int node) const { return n_ == 0 ? 0.0 : base_x_[base_index(node)]; }

    // Unit vector of the fiber sphere in its ambient space (z = 0 for m = 2).
    Eigen::Vector3d fiber_direction(int node) const;

    // Neighbor lookup within one fiber.  For m = 3 latitude offsets crossing a
    // pole are closed by the antipodal-longitude identification
    // (theta -> -theta, phi -> phi + pi).
    int fiber_neighbor(int fiber, int d_theta, int d_phi) const;
    int circle_neighbor(int fiber, int d) const;  // m = 2
    int base_neighbor(int base, int d) const;

    const DerivativeTables& tables(Scheme scheme) const;

private:
    BundleGrid() = default;

    int m_ = 0, n_ = 0;
    int fiber_res_ = 0, base_res_ = 0;
    int n_lat_ = 0, n_lon_ = 0;
    int fiber_nodes_ = 0, base_points_ = 1, num_nodes_ = 0, dim_ = 0;
    double h_theta_ = 0, h_phi_ = 0, h_base_ = 0;
    std::vector<double> theta_, phi_, base_x_;
    std::unique_ptr<DerivativeTables> tables_std_, tables_hi_;
};

using GridPtr = std::shared_ptr<const BundleGrid>;

// Node-indexed real values over a grid.
struct ScalarField {
    GridPtr grid;
    Eigen::VectorXd values;

    ScalarField() = default;
    explicit ScalarField(GridPtr g) : grid(std::move(g)), values(Eigen::VectorXd::Zero(grid->num_nodes())) {}
    ScalarField(GridPtr g, Eigen::VectorXd v);

    double operator[](int node) const { return values[node]; }
    double& operator[](int node) { return values[node]; }
    int size() const { return static_cast<int>(values.size()); }
    bool all_finite() const { return values.allFinite(); }
};

}  // namespace pmc
