#include "pmc/operator.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

namespace pmc {

namespace {

// Residual and its partial derivatives with respect to the node value, the
// frame gradient components and the packed Hessian components.
struct NodePartials {
    double r = 0.0;
    double d_u = 0.0;
    Eigen::Matrix<double, 3, 1> d_g = Eigen::Matrix<double, 3, 1>::Zero();
    Eigen::Matrix<double, 6, 1> d_h = Eigen::Matrix<double, 6, 1>::Zero();
};

template <bool WithPartials>
NodePartials eval_node(const BundleGrid& grid, const CurvatureSpec& spec, double u_val,
                       const DerivativeBundle& bundle, int node) {
    const int dim = grid.dim();
    NodePartials out;

    double w[3], omega[3];  // homogenized gradient and weights e^{mu u}
    double v1 = 0.0, v2 = 0.0;
    for (int a = 0; a < dim; ++a) {
        omega[a] = grid.mu(a) == 0 ? 1.0 : std::exp(u_val);
        w[a] = omega[a] * bundle.first(node, a);
        (grid.mu(a) == 0 ? v1 : v2) += w[a] * w[a];
    }
    const double v = v1 + v2;

    // homogenized Hessian
    double ht[3][3];
    for (int a = 0; a < dim; ++a)
        for (int b = a; b < dim; ++b) ht[a][b] = ht[b][a] = omega[a] * omega[b] * bundle.second(node, a, b);

    double trace = 0.0, quad = 0.0;
    for (int a = 0; a < dim; ++a) {
        trace += ht[a][a];
        for (int b = 0; b < dim; ++b) quad += w[a] * w[b] * ht[a][b];
    }
    const double s_term = (1.0 + v) * trace - quad;

    const Eigen::Vector3d xi = grid.fiber_direction(node);
    const double bx = grid.base_coord(node);
    const double radius = std::exp(u_val);
    const double k_val = spec.eval(radius, xi, bx);
    const double one_v = 1.0 + v;
    const double p_term = std::pow(one_v, 1.5) * radius * k_val;

    out.r = s_term + v2 - (grid.m() - 1) * one_v + p_term;
    if constexpr (!WithPartials) return out;

    const double dv_du = 2.0 * v2;
    const double dv2_du = 2.0 * v2;
    double trace_h = 0.0, quad_h = 0.0;
    for (int a = 0; a < dim; ++a) {
        trace_h += grid.mu(a) * ht[a][a];
        for (int b = 0; b < dim; ++b) quad_h += (grid.mu(a) + grid.mu(b)) * w[a] * w[b] * ht[a][b];
    }
    const double ds_du = dv_du * trace + one_v * 2.0 * trace_h - 2.0 * quad_h;
    // d/du of e^u K(e^u xi) is e^u * d/drho[rho K] at rho = e^u
    const double dp_du = 1.5 * std::sqrt(one_v) * dv_du * radius * k_val +
                         std::pow(one_v, 1.5) * radius * spec.radial_derivative(radius, xi, bx);
    out.d_u = ds_du + dv2_du - (grid.m() - 1) * dv_du + dp_du;

    for (int c = 0; c < dim; ++c) {
        const double dv_dg = 2.0 * w[c] * omega[c];
        const double dv2_dg = 2.0 * grid.mu(c) * w[c] * omega[c];
        double dq_dg = 0.0;
        for (int b = 0; b < dim; ++b) dq_dg += w[b] * ht[c][b];
        dq_dg *= 2.0 * omega[c];
        const double ds_dg = dv_dg * trace - dq_dg;
        const double dp_dg = 1.5 * std::sqrt(one_v) * dv_dg * radius * k_val;
        out.d_g[c] = ds_dg + dv2_dg - (grid.m() - 1) * dv_dg + dp_dg;
    }

    for (int a = 0; a < dim; ++a)
        for (int b = a; b < dim; ++b) {
            const double sym = a == b ? 1.0 : 2.0;
            out.d_h[DerivativeTables::pack(a, b, dim)] =
                sym * omega[a] * omega[b] * (a == b ? one_v - w[a] * w[a] : -w[a] * w[b]);
        }
    return out;
}

}  // namespace

GradientSplit gradient_split(const BundleGrid& grid, const Eigen::VectorXd& u,
                             const DerivativeBundle& bundle) {
    const int dim = grid.dim();
    const int nodes = grid.num_nodes();
    GradientSplit out;
    out.dtilde.resize(nodes, dim);
    out.v1.setZero(nodes);
    out.v2.setZero(nodes);
#pragma omp parallel for schedule(static)
    for (int node = 0; node < nodes; ++node) {
        for (int a = 0; a < dim; ++a) {
            const double wa = (grid.mu(a) == 0 ? 1.0 : std::exp(u[node])) * bundle.first(node, a);
            out.dtilde(node, a) = wa;
            (grid.mu(a) == 0 ? out.v1[node] : out.v2[node]) += wa * wa;
        }
    }
    out.v = out.v1 + out.v2;
    return out;
}

GradientSplit gradient_split(const BundleGrid& grid, const Eigen::VectorXd& u) {
    return gradient_split(grid, u, covariant_gradient(grid, u));
}

EllipticCoefficients elliptic_coefficients(const BundleGrid& grid, const Eigen::VectorXd& u,
                                           const DerivativeBundle& bundle) {
    const GradientSplit split = gradient_split(grid, u, bundle);
    const int dim = grid.dim();
    const int nodes = grid.num_nodes();
    EllipticCoefficients out;
    out.dim = dim;
    out.a.resize(nodes, dim * dim);
    out.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (int node = 0; node < nodes; ++node) {
        Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                a(i, j) = (i == j ? 1.0 + split.v[node] : 0.0) -
                          split.dtilde(node, i) * split.dtilde(node, j);
                out.a(node, i * dim + j) = a(i, j);
            }
        double lmin;
        if (dim == 1) {
            lmin = a(0, 0);
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.topLeftCorner(dim, dim));
            lmin = es.eigenvalues().minCoeff();
        }
        if (lmin < out.min_eigenvalue) {
            out.min_eigenvalue = lmin;
            out.argmin_node = node;
        }
    }
    return out;
}

EllipticCoefficients elliptic_coefficients(const BundleGrid& grid, const Eigen::VectorXd& u) {
    return elliptic_coefficients(grid, u, covariant_gradient(grid, u));
}

Eigen::VectorXd residual(const BundleGrid& grid, const CurvatureSpec& spec, const Eigen::VectorXd& u,
                         const DerivativeBundle& bundle, Scheme scheme, bool parallel) {
    (void)scheme;
    const int nodes = grid.num_nodes();
    Eigen::VectorXd r(nodes);
    // annulus membership checked up front so the parallel loop stays exception-free
    for (int node = 0; node < nodes; ++node) {
        const double radius = std::exp(u[node]);
        if (!(radius >= spec.r_low() && radius <= spec.r_high()))
            throw AnnulusError("graph escaped the validated annulus during residual evaluation");
    }
#pragma omp parallel for schedule(static) if (parallel)
    for (int node = 0; node < nodes; ++node)
        r[node] = eval_node<false>(grid, spec, u[node], bundle, node).r;
    return r;
}

Eigen::VectorXd residual(const BundleGrid& grid, const CurvatureSpec& spec, const Eigen::VectorXd& u,
                         Scheme scheme, bool parallel) {
    return residual(grid, spec, u, covariant_derivatives(grid, u, scheme, parallel), scheme, parallel);
}

Eigen::SparseMatrix<double> newton_jacobian(const BundleGrid& grid, const CurvatureSpec& spec,
                                            const Eigen::VectorXd& u) {
    const int nodes = grid.num_nodes();
    const int dim = grid.dim();
    const DerivativeBundle bundle = covariant_derivatives(grid, u);
    const auto& tables = grid.tables(Scheme::standard);

    std::vector<NodePartials> partials(nodes);
#pragma omp parallel for schedule(static)
    for (int node = 0; node < nodes; ++node)
        partials[node] = eval_node<true>(grid, spec, u[node], bundle, node);

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(nodes) * 30);
    for (int node = 0; node < nodes; ++node) {
        trips.emplace_back(node, node, partials[node].d_u);
        for (int a = 0; a < dim; ++a) {
            const auto& op = tables.first[a];
            for (int k = op.row_ptr[node]; k < op.row_ptr[node + 1]; ++k)
                trips.emplace_back(node, op.col[k], partials[node].d_g[a] * op.weight[k]);
        }
        for (int p = 0; p < dim * (dim + 1) / 2; ++p) {
            const auto& op = tables.second[p];
            for (int k = op.row_ptr[node]; k < op.row_ptr[node + 1]; ++k)
                trips.emplace_back(node, op.col[k], partials[node].d_h[p] * op.weight[k]);
        }
    }
    Eigen::SparseMatrix<double> jac(nodes, nodes);
    jac.setFromTriplets(trips.begin(), trips.end());
    return jac;
}

namespace ref {

Eigen::VectorXd residual(const BundleGrid& grid, const CurvatureSpec& spec, const Eigen::VectorXd& u) {
    const DerivativeBundle bundle = ref::covariant_derivatives(grid, u);
    const int dim = grid.dim();
    Eigen::VectorXd out(grid.num_nodes());
    for (int node = 0; node < grid.num_nodes(); ++node) {
        const double eu = std::exp(u[node]);
        double w[3];
        double v = 0.0, v2 = 0.0;
        for (int a = 0; a < dim; ++a) {
            w[a] = (grid.mu(a) == 0 ? 1.0 : eu) * bundle.first(node, a);
            v += w[a] * w[a];
            if (grid.mu(a) == 1) v2 += w[a] * w[a];
        }
        double s = 0.0;
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) {
                const double aab = (a == b ? 1.0 + v : 0.0) - w[a] * w[b];
                const double hw = (grid.mu(a) == 0 ? 1.0 : eu) * (grid.mu(b) == 0 ? 1.0 : eu);
                s += aab * hw * bundle.second(node, a, b);
            }
        const double k = spec.eval(eu, grid.fiber_direction(node), grid.base_coord(node));
        out[node] = s + v2 - (grid.m() - 1) * (1.0 + v) + std::pow(1.0 + v, 1.5) * eu * k;
    }
    return out;
}

}  // namespace ref

}  // namespace pmc
