#include <cmath>
#include <functional>
#include <numbers>

#include <doctest.h>

#include "pmc/grid.hpp"
#include "pmc/stencil.hpp"
#include "test_util.hpp"

using namespace pmc;

namespace {

Eigen::VectorXd sample(const BundleGrid& grid, const std::function<double(double, double, double)>& f) {
    Eigen::VectorXd u(grid.num_nodes());
    for (int node = 0; node < grid.num_nodes(); ++node)
        u[node] = f(grid.theta(node), grid.m() == 3 ? grid.phi(node) : 0.0, grid.base_coord(node));
    return u;
}

}  // namespace

TEST_CASE("grid construction and direction classes") {
    auto circle = BundleGrid::build(2, 0, 64);
    CHECK(circle->num_nodes() == 64);
    CHECK(circle->dim() == 1);
    CHECK(circle->mu(0) == 0);

    auto sphere = BundleGrid::build(3, 0, 16);
    CHECK(sphere->num_nodes() == 16 * 32);
    CHECK(sphere->dim() == 2);
    CHECK(sphere->mu(0) == 0);
    CHECK(sphere->mu(1) == 0);
    // staggered off the poles
    CHECK(sphere->theta(0) == doctest::Approx(0.5 * sphere->h_theta()));
    for (int node = 0; node < sphere->num_nodes(); ++node)
        CHECK(sphere->fiber_direction(node).norm() == doctest::Approx(1.0).epsilon(1e-14));

    auto bundle = BundleGrid::build(2, 1, 64, 32);
    CHECK(bundle->num_nodes() == 64 * 32);
    CHECK(bundle->dim() == 2);
    CHECK(bundle->mu(0) == 0);
    CHECK(bundle->mu(1) == 1);

    CHECK_THROWS_AS(BundleGrid::build(4, 0, 32), GridError);
    CHECK_THROWS_AS(BundleGrid::build(2, 2, 32, 32), GridError);
    CHECK_THROWS_AS(BundleGrid::build(2, 0, 4), GridError);
    CHECK_THROWS_AS(BundleGrid::build(2, 1, 64, 4), GridError);
}

TEST_CASE("pole reflection closes the sphere grid") {
    auto grid = BundleGrid::build(3, 0, 16);
    const int nlon = grid->n_lon();
    // one step north from the first ring lands on the same ring, antipodal
    CHECK(grid->fiber_neighbor(3, -1, 0) == 3 + nlon / 2);
    CHECK(grid->fiber_neighbor(3, -2, 0) == nlon + 3 + nlon / 2);
    // and crossing the south pole likewise
    const int f_south = (grid->n_lat() - 1) * nlon + 5;
    CHECK(grid->fiber_neighbor(f_south, 1, 0) == f_south + nlon / 2 - nlon * 0);
}

TEST_CASE("constant fields have zero derivatives") {
    for (auto grid : {BundleGrid::build(2, 0, 32), BundleGrid::build(3, 0, 12),
                      BundleGrid::build(2, 1, 16, 16)}) {
        const Eigen::VectorXd u = Eigen::VectorXd::Constant(grid->num_nodes(), 1.7);
        const auto bundle = covariant_derivatives(*grid, u);
        CHECK(bundle.d1.cwiseAbs().maxCoeff() < 1e-13);
        CHECK(bundle.d2.cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("circle derivatives match analytic values") {
    auto grid = BundleGrid::build(2, 0, 64);
    const double h = grid->h_theta();
    const Eigen::VectorXd u = sample(*grid, [](double th, double, double) { return std::sin(th); });
    const auto bundle = covariant_derivatives(*grid, u);
    for (int node = 0; node < grid->num_nodes(); ++node) {
        CHECK(bundle.first(node, 0) ==
              doctest::Approx(std::cos(grid->theta(node))).epsilon(h * h / 4.0));
        CHECK(bundle.second(node, 0, 0) ==
              doctest::Approx(-std::sin(grid->theta(node))).scale(1).epsilon(h * h / 4.0));
    }
}

TEST_CASE("sphere gradient magnitude of cos(colatitude) is sin(colatitude)") {
    auto grid = BundleGrid::build(3, 0, 24);
    const double h = grid->h_theta();
    const Eigen::VectorXd u = sample(*grid, [](double th, double, double) { return std::cos(th); });
    const auto bundle = covariant_gradient(*grid, u);
    for (int node = 0; node < grid->num_nodes(); ++node) {
        const double mag = std::hypot(bundle.first(node, 0), bundle.first(node, 1));
        CHECK(mag == doctest::Approx(std::sin(grid->theta(node))).scale(1).epsilon(h * h));
    }
}

TEST_CASE("vertical trace reproduces spherical harmonic eigenvalues") {
    for (const int nlat : {16, 32}) {
        auto grid = BundleGrid::build(3, 0, nlat);
        const double h2 = grid->h_theta() * grid->h_theta();

        // degree 1 (zonal and tesseral) and degree 2
        const Eigen::VectorXd y1 = sample(*grid, [](double th, double ph, double) {
            return std::cos(th) + 0.5 * std::sin(th) * std::cos(ph);
        });
        const Eigen::VectorXd y2 = sample(*grid, [](double th, double ph, double) {
            return 0.5 * (3.0 * std::cos(th) * std::cos(th) - 1.0) +
                   0.3 * std::sin(th) * std::sin(th) * std::cos(2.0 * ph);
        });
        const auto b1 = covariant_hessian(*grid, y1);
        const auto b2 = covariant_hessian(*grid, y2);
        for (int node = 0; node < grid->num_nodes(); ++node) {
            const double tr1 = b1.second(node, 0, 0) + b1.second(node, 1, 1);
            const double tr2 = b2.second(node, 0, 0) + b2.second(node, 1, 1);
            CHECK(tr1 == doctest::Approx(-2.0 * y1[node]).scale(1).epsilon(4.0 * h2));
            CHECK(tr2 == doctest::Approx(-6.0 * y2[node]).scale(1).epsilon(12.0 * h2));
        }
    }
}

TEST_CASE("derivative operators are linear to machine precision") {
    testutil::Rng rng(11);
    auto grid = BundleGrid::build(3, 0, 12);
    const Eigen::VectorXd a = testutil::random_field(*grid, rng, 3, 0.8);
    const Eigen::VectorXd b = testutil::random_field(*grid, rng, 3, 0.5);
    const auto da = covariant_derivatives(*grid, a);
    const auto db = covariant_derivatives(*grid, b);
    const auto dsum = covariant_derivatives(*grid, 2.0 * a - 3.0 * b);
    CHECK((dsum.d1 - (2.0 * da.d1 - 3.0 * db.d1)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((dsum.d2 - (2.0 * da.d2 - 3.0 * db.d2)).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("horizontal derivatives of base-independent fields vanish") {
    auto grid = BundleGrid::build(2, 1, 32, 16);
    const Eigen::VectorXd u = sample(*grid, [](double th, double, double) { return std::sin(2 * th); });
    const auto bundle = covariant_derivatives(*grid, u);
    const int bd = grid->dim() - 1;
    for (int node = 0; node < grid->num_nodes(); ++node) {
        CHECK(std::abs(bundle.first(node, bd)) < 1e-13);
        CHECK(std::abs(bundle.second(node, bd, bd)) < 1e-12);
        CHECK(std::abs(bundle.second(node, 0, bd)) < 1e-12);
    }
    // and a base-only field has plain periodic derivatives
    const Eigen::VectorXd w = sample(*grid, [](double, double, double x) { return std::cos(x); });
    const auto wb = covariant_derivatives(*grid, w);
    const double h = grid->h_base();
    for (int node = 0; node < grid->num_nodes(); ++node) {
        CHECK(wb.first(node, bd) ==
              doctest::Approx(-std::sin(grid->base_coord(node))).scale(1).epsilon(h * h));
        CHECK(std::abs(wb.first(node, 0)) < 1e-13);
    }
}

TEST_CASE("gradient and Hessian converge at second order in the max norm") {
    auto field = [](double th, double ph, double) {
        const double z = std::cos(th), s = std::sin(th);
        return std::exp(0.3 * z) + 0.4 * s * std::cos(ph) + 0.2 * s * s * std::sin(2.0 * ph) * z;
    };
    auto exact_on = [&](GridPtr grid) { return sample(*grid, field); };

    // reference: high-order path on a much finer grid is unnecessary; compare
    // against the same analytic field differentiated on the doubled grid by
    // Richardson ratio of operator errors, using the high-order scheme as a
    // proxy for the exact derivative
    double err1_grad = 0, err2_grad = 0, err1_hess = 0, err2_hess = 0;
    for (const int nlat : {16, 32}) {
        auto grid = BundleGrid::build(3, 0, nlat);
        const Eigen::VectorXd u = exact_on(grid);
        const auto std_b = covariant_derivatives(*grid, u, Scheme::standard);
        const auto hi_b = covariant_derivatives(*grid, u, Scheme::high_order);
        const double grad_err = (std_b.d1 - hi_b.d1).cwiseAbs().maxCoeff();
        const double hess_err = (std_b.d2 - hi_b.d2).cwiseAbs().maxCoeff();
        if (nlat == 16) {
            err1_grad = grad_err;
            err1_hess = hess_err;
        } else {
            err2_grad = grad_err;
            err2_hess = hess_err;
        }
    }
    CHECK(err1_grad / err2_grad >= 3.5);
    CHECK(err1_hess / err2_hess >= 3.5);
}

TEST_CASE("table-driven kernels match the serial reference implementation") {
    testutil::Rng rng(5);
    for (auto grid : {BundleGrid::build(2, 0, 48), BundleGrid::build(3, 0, 12),
                      BundleGrid::build(2, 1, 16, 16)}) {
        const Eigen::VectorXd u = testutil::random_field(*grid, rng, 3, 0.6);
        const auto fast = covariant_derivatives(*grid, u);
        const auto slow = ref::covariant_derivatives(*grid, u);
        CHECK((fast.d1 - slow.d1).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((fast.d2 - slow.d2).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("parallel and serial stencil application agree exactly") {
    testutil::Rng rng(7);
    auto grid = BundleGrid::build(3, 0, 16);
    const Eigen::VectorXd u = testutil::random_field(*grid, rng, 4, 1.0);
    const auto par = covariant_derivatives(*grid, u, Scheme::standard, true);
    const auto ser = covariant_derivatives(*grid, u, Scheme::standard, false);
    CHECK((par.d1 - ser.d1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((par.d2 - ser.d2).cwiseAbs().maxCoeff() == 0.0);
}
