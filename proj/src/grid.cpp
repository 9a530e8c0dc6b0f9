#include "pmc/grid.hpp"

#include <cmath>
#include <numbers>

#include "pmc/stencil.hpp"

namespace pmc {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

BundleGrid::~BundleGrid() = default;

std::shared_ptr<const BundleGrid> BundleGrid::build(int m, int n, int fiber_resolution,
                                                    int base_resolution) {
    if (m != 2 && m != 3) throw GridError("unsupported fiber rank m (supported: 2, 3)");
    if (n != 0 && n != 1) throw GridError("unsupported base dimension n (supported: 0, 1)");
    if (fiber_resolution < min_resolution) throw GridError("fiber resolution too small (min 8)");
    if (n == 1 && base_resolution < min_resolution) throw GridError("base resolution too small (min 8)");

    auto grid = std::shared_ptr<BundleGrid>(new BundleGrid());
    grid->m_ = m;
    grid->n_ = n;
    grid->fiber_res_ = fiber_resolution;
    grid->base_res_ = n == 1 ? base_resolution : 0;
    grid->dim_ = (m - 1) + n;

    if (m == 2) {
        grid->fiber_nodes_ = fiber_resolution;
        grid->h_theta_ = kTwoPi / fiber_resolution;
        grid->theta_.resize(grid->fiber_nodes_);
        for (int i = 0; i < grid->fiber_nodes_; ++i) grid->theta_[i] = i * grid->h_theta_;
    } else {
        // Latitude rings staggered off the poles at colatitude (j+1/2)*pi/N;
        // twice as many longitudes so h_phi == h_theta.
        grid->n_lat_ = fiber_resolution;
        grid->n_lon_ = 2 * fiber_resolution;
        grid->fiber_nodes_ = grid->n_lat_ * grid->n_lon_;
        grid->h_theta_ = std::numbers::pi / grid->n_lat_;
        grid->h_phi_ = kTwoPi / grid->n_lon_;
        grid->theta_.resize(grid->fiber_nodes_);
        grid->phi_.resize(grid->fiber_nodes_);
        for (int j = 0; j < grid->n_lat_; ++j) {
            const double th = (j + 0.5) * grid->h_theta_;
            for (int i = 0; i < grid->n_lon_; ++i) {
                const int f = j * grid->n_lon_ + i;
                grid->theta_[f] = th;
                grid->phi_[f] = i * grid->h_phi_;
            }
        }
    }

    grid->base_points_ = n == 1 ? base_resolution : 1;
    if (n == 1) {
        grid->h_base_ = kTwoPi / base_resolution;
        grid->base_x_.resize(base_resolution);
        for (int b = 0; b < base_resolution; ++b) grid->base_x_[b] = b * grid->h_base_;
    }
    grid->num_nodes_ = grid->fiber_nodes_ * grid->base_points_;

    grid->tables_std_ = std::make_unique<DerivativeTables>(build_derivative_tables(*grid, Scheme::standard));
    grid->tables_hi_ = std::make_unique<DerivativeTables>(build_derivative_tables(*grid, Scheme::high_order));
    return grid;
}

double BundleGrid::h_max() const {
    double h = h_theta_;
    if (m_ == 3) h = std::max(h, h_phi_);
    if (n_ == 1) h = std::max(h, h_base_);
    return h;
}

Eigen::Vector3d BundleGrid::fiber_direction(int node) const {
    const int f = fiber_index(node);
    if (m_ == 2) return {std::cos(theta_[f]), std::sin(theta_[f]), 0.0};
    const double st = std::sin(theta_[f]);
    return {st * std::cos(phi_[f]), st * std::sin(phi_[f]), std::cos(theta_[f])};
}

int BundleGrid::circle_neighbor(int fiber, int d) const {
    int i = (fiber + d) % fiber_res_;
    if (i < 0) i += fiber_res_;
    return i;
}

int BundleGrid::base_neighbor(int base, int d) const {
    int b = (base + d) % base_res_;
    if (b < 0) b += base_res_;
    return b;
}

int BundleGrid::fiber_neighbor(int fiber, int d_theta, int d_phi) const {
    if (m_ == 2) return circle_neighbor(fiber, d_theta);
    int j = lat_index(fiber) + d_theta;
    int i = lon_index(fiber) + d_phi;
    // Crossing a pole lands on the antipodal meridian.
    while (j < 0 || j >= n_lat_) {
        if (j < 0)
            j = -1 - j;
        else
            j = 2 * n_lat_ - 1 - j;
        i += n_lon_ / 2;
    }
    i %= n_lon_;
    if (i < 0) i += n_lon_;
    return j * n_lon_ + i;
}

const DerivativeTables& BundleGrid::tables(Scheme scheme) const {
    return scheme == Scheme::standard ? *tables_std_ : *tables_hi_;
}

ScalarField::ScalarField(GridPtr g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid->num_nodes()) throw GridError("field shape does not match its grid");
}

}  // namespace pmc
