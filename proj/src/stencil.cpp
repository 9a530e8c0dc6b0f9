#include "pmc/stencil.hpp"

#include <cmath>
#include <map>

namespace pmc {

void StencilOp::apply(const Eigen::VectorXd& u, Eigen::VectorXd& out, bool parallel) const {
    const int rows = static_cast<int>(row_ptr.size()) - 1;
#pragma omp parallel for schedule(static) if (parallel)
    for (int r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) acc += weight[k] * u[col[k]];
        out[r] = acc;
    }
}

Eigen::VectorXd StencilOp::apply(const Eigen::VectorXd& u, bool parallel) const {
    Eigen::VectorXd out(static_cast<int>(row_ptr.size()) - 1);
    apply(u, out, parallel);
    return out;
}

namespace {

struct Stencil1D {
    std::vector<int> off;
    std::vector<double> w;
};

Stencil1D d1(double h, bool fourth) {
    if (!fourth) return {{-1, 1}, {-0.5 / h, 0.5 / h}};
    return {{-2, -1, 1, 2}, {1.0 / (12 * h), -8.0 / (12 * h), 8.0 / (12 * h), -1.0 / (12 * h)}};
}

Stencil1D d2(double h, bool fourth) {
    const double h2 = h * h;
    if (!fourth) return {{-1, 0, 1}, {1.0 / h2, -2.0 / h2, 1.0 / h2}};
    return {{-2, -1, 0, 1, 2},
            {-1.0 / (12 * h2), 16.0 / (12 * h2), -30.0 / (12 * h2), 16.0 / (12 * h2), -1.0 / (12 * h2)}};
}

using Row = std::map<int, double>;

void finalize(const std::vector<Row>& rows, StencilOp& op) {
    op.row_ptr.assign(1, 0);
    op.row_ptr.reserve(rows.size() + 1);
    std::size_t nnz = 0;
    for (const auto& r : rows) nnz += r.size();
    op.col.reserve(nnz);
    op.weight.reserve(nnz);
    for (const auto& r : rows) {
        for (const auto& [c, w] : r) {
            op.col.push_back(c);
            op.weight.push_back(w);
        }
        op.row_ptr.push_back(static_cast<int>(op.col.size()));
    }
}

}  // namespace

DerivativeTables build_derivative_tables(const BundleGrid& grid, Scheme scheme) {
    const bool hi = scheme == Scheme::high_order;
    const int dim = grid.dim();
    const int nodes = grid.num_nodes();

    DerivativeTables tables;
    tables.scheme = scheme;
    tables.dim = dim;
    tables.first.resize(dim);
    tables.second.resize(dim * (dim + 1) / 2);

    std::vector<std::vector<Row>> first(dim, std::vector<Row>(nodes));
    std::vector<std::vector<Row>> second(tables.second.size(), std::vector<Row>(nodes));
    const int base_dir = dim - 1;  // only meaningful when n == 1

    const Stencil1D dth1 = d1(grid.h_theta(), hi);
    const Stencil1D dth2 = d2(grid.h_theta(), hi);
    const Stencil1D dth1_4 = d1(grid.h_theta(), true);

    for (int node = 0; node < nodes; ++node) {
        const int f = grid.fiber_index(node);
        const int b = grid.base_index(node);
        auto fiber_at = [&](int dt, int dp) { return grid.node_index(grid.fiber_neighbor(f, dt, dp), b); };

        if (grid.m() == 2) {
            for (std::size_t k = 0; k < dth1.off.size(); ++k)
                first[0][node][fiber_at(dth1.off[k], 0)] += dth1.w[k];
            auto& htt = second[DerivativeTables::pack(0, 0, dim)][node];
            for (std::size_t k = 0; k < dth2.off.size(); ++k) htt[fiber_at(dth2.off[k], 0)] += dth2.w[k];
        } else {
            const double st = std::sin(grid.theta(node));
            const double ct = std::cos(grid.theta(node));
            const Stencil1D dph1 = d1(grid.h_phi(), hi);
            const Stencil1D dph1_4 = d1(grid.h_phi(), true);
            const Stencil1D dph2_4 = d2(grid.h_phi(), true);
            const Stencil1D dph2 = d2(grid.h_phi(), hi);

            // D_theta, D_phihat = (1/sin) d/dphi
            for (std::size_t k = 0; k < dth1.off.size(); ++k)
                first[0][node][fiber_at(dth1.off[k], 0)] += dth1.w[k];
            for (std::size_t k = 0; k < dph1.off.size(); ++k)
                first[1][node][fiber_at(0, dph1.off[k])] += dph1.w[k] / st;

            // D_{theta theta} = u_tt
            auto& h00 = second[DerivativeTables::pack(0, 0, dim)][node];
            for (std::size_t k = 0; k < dth2.off.size(); ++k) h00[fiber_at(dth2.off[k], 0)] += dth2.w[k];

            // D_{theta phihat} = u_tp/sin - (cos/sin^2) u_p; singular
            // coefficients get fourth-order stencils in either scheme.
            auto& h01 = second[DerivativeTables::pack(0, 1, dim)][node];
            for (std::size_t kt = 0; kt < dth1_4.off.size(); ++kt)
                for (std::size_t kp = 0; kp < dph1_4.off.size(); ++kp)
                    h01[fiber_at(dth1_4.off[kt], dph1_4.off[kp])] += dth1_4.w[kt] * dph1_4.w[kp] / st;
            for (std::size_t k = 0; k < dph1_4.off.size(); ++k)
                h01[fiber_at(0, dph1_4.off[k])] -= ct / (st * st) * dph1_4.w[k];

            // D_{phihat phihat} = u_pp/sin^2 + cot * u_t
            auto& h11 = second[DerivativeTables::pack(1, 1, dim)][node];
            for (std::size_t k = 0; k < dph2_4.off.size(); ++k)
                h11[fiber_at(0, dph2_4.off[k])] += dph2_4.w[k] / (st * st);
            for (std::size_t k = 0; k < dth1_4.off.size(); ++k)
                h11[fiber_at(dth1_4.off[k], 0)] += ct / st * dth1_4.w[k];
            (void)dph2;
        }

        if (grid.n() == 1) {
            const Stencil1D dx1 = d1(grid.h_base(), hi);
            const Stencil1D dx2 = d2(grid.h_base(), hi);
            auto node_at = [&](int dt, int dp, int dx) {
                return grid.node_index(grid.fiber_neighbor(f, dt, dp), grid.base_neighbor(b, dx));
            };
            for (std::size_t k = 0; k < dx1.off.size(); ++k)
                first[base_dir][node][node_at(0, 0, dx1.off[k])] += dx1.w[k];

            auto& hxx = second[DerivativeTables::pack(base_dir, base_dir, dim)][node];
            for (std::size_t k = 0; k < dx2.off.size(); ++k) hxx[node_at(0, 0, dx2.off[k])] += dx2.w[k];

            // fiber-base cross derivatives: plain products, no connection terms
            auto& htx = second[DerivativeTables::pack(0, base_dir, dim)][node];
            for (std::size_t kt = 0; kt < dth1.off.size(); ++kt)
                for (std::size_t kx = 0; kx < dx1.off.size(); ++kx)
                    htx[node_at(dth1.off[kt], 0, dx1.off[kx])] += dth1.w[kt] * dx1.w[kx];
            if (grid.m() == 3) {
                const double st = std::sin(grid.theta(node));
                const Stencil1D dph1 = d1(grid.h_phi(), hi);
                auto& hpx = second[DerivativeTables::pack(1, base_dir, dim)][node];
                for (std::size_t kp = 0; kp < dph1.off.size(); ++kp)
                    for (std::size_t kx = 0; kx < dx1.off.size(); ++kx)
                        hpx[node_at(0, dph1.off[kp], dx1.off[kx])] += dph1.w[kp] * dx1.w[kx] / st;
            }
        }
    }

    for (int a = 0; a < dim; ++a) finalize(first[a], tables.first[a]);
    for (std::size_t p = 0; p < second.size(); ++p) finalize(second[p], tables.second[p]);
    return tables;
}

DerivativeBundle covariant_gradient(const BundleGrid& grid, const Eigen::VectorXd& u, Scheme scheme,
                                    bool parallel) {
    const auto& t = grid.tables(scheme);
    DerivativeBundle out;
    out.dim = t.dim;
    out.d1.resize(grid.num_nodes(), t.dim);
    for (int a = 0; a < t.dim; ++a) {
        Eigen::VectorXd tmp(grid.num_nodes());
        t.first[a].apply(u, tmp, parallel);
        out.d1.col(a) = tmp;
    }
    return out;
}

DerivativeBundle covariant_hessian(const BundleGrid& grid, const Eigen::VectorXd& u, Scheme scheme,
                                   bool parallel) {
    const auto& t = grid.tables(scheme);
    DerivativeBundle out;
    out.dim = t.dim;
    out.d2.resize(grid.num_nodes(), static_cast<int>(t.second.size()));
    for (std::size_t p = 0; p < t.second.size(); ++p) {
        Eigen::VectorXd tmp(grid.num_nodes());
        t.second[p].apply(u, tmp, parallel);
        out.d2.col(static_cast<int>(p)) = tmp;
    }
    return out;
}

DerivativeBundle covariant_derivatives(const BundleGrid& grid, const Eigen::VectorXd& u, Scheme scheme,
                                       bool parallel) {
    DerivativeBundle g = covariant_gradient(grid, u, scheme, parallel);
    DerivativeBundle h = covariant_hessian(grid, u, scheme, parallel);
    g.d2 = std::move(h.d2);
    return g;
}

namespace ref {

DerivativeBundle covariant_derivatives(const BundleGrid& grid, const Eigen::VectorXd& u) {
    const int dim = grid.dim();
    const int nodes = grid.num_nodes();
    DerivativeBundle out;
    out.dim = dim;
    out.d1.setZero(nodes, dim);
    out.d2.setZero(nodes, dim * (dim + 1) / 2);
    const int bd = dim - 1;

    for (int node = 0; node < nodes; ++node) {
        const int f = grid.fiber_index(node);
        const int b = grid.base_index(node);
        auto at = [&](int dt, int dp, int dx) {
            const int fb = grid.fiber_neighbor(f, dt, dp);
            const int bb = grid.n() == 1 ? grid.base_neighbor(b, dx) : 0;
            return u[grid.node_index(fb, bb)];
        };
        auto c2_1 = [](double lo, double hi, double h) { return (hi - lo) / (2 * h); };
        auto c4_1 = [](double m2, double m1, double p1, double p2, double h) {
            return (m2 - 8 * m1 + 8 * p1 - p2) / (12 * h);
        };
        auto c2_2 = [](double lo, double mid, double hi, double h) { return (lo - 2 * mid + hi) / (h * h); };
        auto c4_2 = [](double m2, double m1, double mid, double p1, double p2, double h) {
            return (-m2 + 16 * m1 - 30 * mid + 16 * p1 - p2) / (12 * h * h);
        };

        const double ht = grid.h_theta();
        if (grid.m() == 2) {
            out.d1(node, 0) = c2_1(at(-1, 0, 0), at(1, 0, 0), ht);
            out.d2(node, DerivativeTables::pack(0, 0, dim)) = c2_2(at(-1, 0, 0), at(0, 0, 0), at(1, 0, 0), ht);
        } else {
            const double hp = grid.h_phi();
            const double st = std::sin(grid.theta(node));
            const double ct = std::cos(grid.theta(node));
            out.d1(node, 0) = c2_1(at(-1, 0, 0), at(1, 0, 0), ht);
            out.d1(node, 1) = c2_1(at(0, -1, 0), at(0, 1, 0), hp) / st;
            out.d2(node, DerivativeTables::pack(0, 0, dim)) =
                c2_2(at(-1, 0, 0), at(0, 0, 0), at(1, 0, 0), ht);
            // mixed term via fourth-order cross stencil
            double utp = 0.0;
            const int off[4] = {-2, -1, 1, 2};
            const double w1[4] = {1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12};
            for (int kt = 0; kt < 4; ++kt)
                for (int kp = 0; kp < 4; ++kp) utp += w1[kt] * w1[kp] * at(off[kt], off[kp], 0);
            utp /= ht * hp;
            const double up4 = c4_1(at(0, -2, 0), at(0, -1, 0), at(0, 1, 0), at(0, 2, 0), hp);
            out.d2(node, DerivativeTables::pack(0, 1, dim)) = utp / st - ct / (st * st) * up4;
            const double upp4 = c4_2(at(0, -2, 0), at(0, -1, 0), at(0, 0, 0), at(0, 1, 0), at(0, 2, 0), hp);
            const double ut4 = c4_1(at(-2, 0, 0), at(-1, 0, 0), at(1, 0, 0), at(2, 0, 0), ht);
            out.d2(node, DerivativeTables::pack(1, 1, dim)) = upp4 / (st * st) + ct / st * ut4;
        }
        if (grid.n() == 1) {
            const double hx = grid.h_base();
            out.d1(node, bd) = c2_1(at(0, 0, -1), at(0, 0, 1), hx);
            out.d2(node, DerivativeTables::pack(bd, bd, dim)) =
                c2_2(at(0, 0, -1), at(0, 0, 0), at(0, 0, 1), hx);
            out.d2(node, DerivativeTables::pack(0, bd, dim)) =
                (at(1, 0, 1) - at(1, 0, -1) - at(-1, 0, 1) + at(-1, 0, -1)) / (4 * ht * hx);
            if (grid.m() == 3) {
                const double hp = grid.h_phi();
                const double st = std::sin(grid.theta(node));
                out.d2(node, DerivativeTables::pack(1, bd, dim)) =
                    (at(0, 1, 1) - at(0, 1, -1) - at(0, -1, 1) + at(0, -1, -1)) / (4 * hp * hx * st);
            }
        }
    }
    return out;
}

}  // namespace ref

}  // namespace pmc
