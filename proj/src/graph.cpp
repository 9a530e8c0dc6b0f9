#include "pmc/graph.hpp"

#include <array>
#include <cmath>
#include <ostream>
#include <vector>

#include <Eigen/Geometry>

#include "pmc/operator.hpp"

namespace pmc {

namespace {

// Direct mean curvature from homogenized derivative data.
Eigen::VectorXd direct_formula(const BundleGrid& grid, const Eigen::VectorXd& u,
                               const DerivativeBundle& bundle) {
    const int dim = grid.dim();
    Eigen::VectorXd out(grid.num_nodes());
#pragma omp parallel for schedule(static)
    for (int node = 0; node < grid.num_nodes(); ++node) {
        double w[3], omega[3];
        double v = 0.0;
        for (int a = 0; a < dim; ++a) {
            omega[a] = grid.mu(a) == 0 ? 1.0 : std::exp(u[node]);
            w[a] = omega[a] * bundle.first(node, a);
            v += w[a] * w[a];
        }
        const double f2 = 1.0 / (1.0 + v);
        const double f = std::sqrt(f2);
        double acc = 0.0;
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) {
                const double h_up = (a == b ? 1.0 : 0.0) - f2 * w[a] * w[b];
                const double h_lo = (a == b ? 1.0 : 0.0) + w[a] * w[b];
                const double ht = omega[a] * omega[b] * bundle.second(node, a, b);
                acc += h_up * ((1 - grid.mu(a)) * h_lo - grid.mu(b) * w[a] * w[b] - ht);
            }
        out[node] = f * std::exp(-u[node]) * acc;
    }
    return out;
}

}  // namespace

RadialGraph embed(GridPtr grid, const CurvatureSpec& spec, const Eigen::VectorXd& u) {
    RadialGraph graph;
    graph.grid = grid;
    graph.u = u;
    graph.bundle = covariant_derivatives(*grid, u);
    const GradientSplit split = gradient_split(*grid, u, graph.bundle);
    graph.dtilde = split.dtilde;

    const int nodes = grid->num_nodes();
    const int dim = grid->dim();
    graph.positions.resize(nodes, 3);
    graph.h_lower.resize(nodes, dim * dim);
    graph.h_upper.resize(nodes, dim * dim);
    graph.f.resize(nodes);
    graph.k_composed.resize(nodes);
    for (int node = 0; node < nodes; ++node) {
        const double radius = std::exp(u[node]);
        graph.positions.row(node) = radius * grid->fiber_direction(node).transpose();
        const double v = split.v[node];
        const double f2 = 1.0 / (1.0 + v);
        graph.f[node] = std::sqrt(f2);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                const double wij = split.dtilde(node, i) * split.dtilde(node, j);
                graph.h_lower(node, i * dim + j) = (i == j ? 1.0 : 0.0) + wij;
                graph.h_upper(node, i * dim + j) = (i == j ? 1.0 : 0.0) - f2 * wij;
            }
        graph.k_composed[node] =
            spec.eval(radius, grid->fiber_direction(node), grid->base_coord(node));
    }
    graph.mean_curvature = direct_formula(*grid, u, graph.bundle);
    return graph;
}

Eigen::VectorXd mean_curvature_direct(const RadialGraph& graph) { return graph.mean_curvature; }

Eigen::VectorXd mean_curvature_direct_independent(const BundleGrid& grid, const Eigen::VectorXd& u) {
    const DerivativeBundle bundle = covariant_derivatives(grid, u, Scheme::high_order);
    return direct_formula(grid, u, bundle);
}

namespace {

Eigen::VectorXd discrete_curve_curvature(const RadialGraph& graph) {
    const BundleGrid& grid = *graph.grid;
    const int n = grid.num_nodes();
    const double h = grid.h_theta();
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
        const double rho = std::exp(graph.u[i]);
        const double rho_p = std::exp(graph.u[grid.circle_neighbor(i, 1)]);
        const double rho_m = std::exp(graph.u[grid.circle_neighbor(i, -1)]);
        const double d1 = (rho_p - rho_m) / (2.0 * h);
        const double d2 = (rho_p - 2.0 * rho + rho_m) / (h * h);
        out[i] = (rho * rho + 2.0 * d1 * d1 - rho * d2) /
                 std::pow(rho * rho + d1 * d1, 1.5);
    }
    return out;
}

struct TriMesh {
    std::vector<Eigen::Vector3d> pos;           // grid vertices then two pole points
    std::vector<std::array<int, 3>> tris;       // outward-oriented
};

TriMesh triangulate(const RadialGraph& graph) {
    const BundleGrid& grid = *graph.grid;
    const int nlat = grid.n_lat(), nlon = grid.n_lon();
    TriMesh mesh;
    mesh.pos.resize(grid.num_nodes() + 2);
    for (int node = 0; node < grid.num_nodes(); ++node) mesh.pos[node] = graph.positions.row(node);

    Eigen::Vector3d north = Eigen::Vector3d::Zero(), south = Eigen::Vector3d::Zero();
    for (int i = 0; i < nlon; ++i) {
        north += mesh.pos[i];
        south += mesh.pos[(nlat - 1) * nlon + i];
    }
    const int pn = grid.num_nodes(), ps = grid.num_nodes() + 1;
    mesh.pos[pn] = north / nlon;
    mesh.pos[ps] = south / nlon;

    auto at = [&](int j, int i) { return j * nlon + ((i % nlon + nlon) % nlon); };
    for (int j = 0; j + 1 < nlat; ++j)
        for (int i = 0; i < nlon; ++i) {
            const int a = at(j, i), b = at(j + 1, i), c = at(j + 1, i + 1), d = at(j, i + 1);
            const double diag_ac = (mesh.pos[a] - mesh.pos[c]).norm();
            const double diag_bd = (mesh.pos[b] - mesh.pos[d]).norm();
            if (diag_ac <= diag_bd) {
                mesh.tris.push_back({a, b, c});
                mesh.tris.push_back({a, c, d});
            } else {
                mesh.tris.push_back({a, b, d});
                mesh.tris.push_back({b, c, d});
            }
        }
    for (int i = 0; i < nlon; ++i) {
        mesh.tris.push_back({pn, at(0, i), at(0, i + 1)});
        mesh.tris.push_back({ps, at(nlat - 1, i + 1), at(nlat - 1, i)});
    }
    return mesh;
}

Eigen::VectorXd discrete_mesh_curvature(const RadialGraph& graph) {
    const TriMesh mesh = triangulate(graph);
    const int nv = static_cast<int>(mesh.pos.size());
    std::vector<Eigen::Vector3d> lap(nv, Eigen::Vector3d::Zero());
    std::vector<Eigen::Vector3d> normal(nv, Eigen::Vector3d::Zero());
    std::vector<double> area(nv, 0.0);

    for (const auto& tri : mesh.tris) {
        const Eigen::Vector3d& p0 = mesh.pos[tri[0]];
        const Eigen::Vector3d& p1 = mesh.pos[tri[1]];
        const Eigen::Vector3d& p2 = mesh.pos[tri[2]];
        const Eigen::Vector3d face = (p1 - p0).cross(p2 - p0);
        const double double_area = face.norm();
        if (double_area < 1e-300) continue;  // degenerate triangle
        for (int c = 0; c < 3; ++c) {
            area[tri[c]] += double_area / 6.0;  // barycentric third
            normal[tri[c]] += 0.5 * face;
        }
        // cotangent weights: corner k is opposite edge (i, j)
        for (int k = 0; k < 3; ++k) {
            const int i = tri[(k + 1) % 3], j = tri[(k + 2) % 3];
            const Eigen::Vector3d e1 = mesh.pos[i] - mesh.pos[tri[k]];
            const Eigen::Vector3d e2 = mesh.pos[j] - mesh.pos[tri[k]];
            const double cot = e1.dot(e2) / e1.cross(e2).norm();
            lap[i] += 0.5 * cot * (mesh.pos[j] - mesh.pos[i]);
            lap[j] += 0.5 * cot * (mesh.pos[i] - mesh.pos[j]);
        }
    }

    const int nodes = graph.grid->num_nodes();
    Eigen::VectorXd out(nodes);
    for (int node = 0; node < nodes; ++node) {
        const Eigen::Vector3d hvec = lap[node] / area[node];
        out[node] = -hvec.dot(normal[node].normalized());
    }
    return out;
}

}  // namespace

Eigen::VectorXd mean_curvature_discrete(const RadialGraph& graph) {
    if (graph.grid->n() != 0)
        throw GridError("extrinsic curvature estimate is only defined on n = 0 grids");
    return graph.grid->m() == 2 ? discrete_curve_curvature(graph) : discrete_mesh_curvature(graph);
}

DeviationStats deviation_stats(const Eigen::VectorXd& estimate, const Eigen::VectorXd& reference) {
    DeviationStats stats;
    double sum = 0.0;
    for (int i = 0; i < estimate.size(); ++i) {
        const double abs_dev = std::abs(estimate[i] - reference[i]);
        sum += abs_dev;
        if (abs_dev > stats.max_abs) {
            stats.max_abs = abs_dev;
            stats.argmax = i;
        }
        stats.max_rel = std::max(stats.max_rel, abs_dev / std::max(std::abs(reference[i]), 1e-300));
    }
    stats.mean_abs = sum / static_cast<double>(estimate.size());
    return stats;
}

VerificationReport verify(const RadialGraph& graph, const CurvatureSpec& spec) {
    VerificationReport report;
    report.grid_spacing = graph.grid->h_max();
    report.direct = deviation_stats(graph.mean_curvature, graph.k_composed);
    report.independent = deviation_stats(
        mean_curvature_direct_independent(*graph.grid, graph.u), graph.k_composed);
    if (graph.grid->n() == 0) {
        report.discrete_available = true;
        report.discrete = deviation_stats(mean_curvature_discrete(graph), graph.k_composed);
    }
    (void)spec;
    return report;
}

void export_mesh(const RadialGraph& graph, std::ostream& os) {
    if (graph.grid->m() != 3 || graph.grid->n() != 0)
        throw GridError("mesh export is defined for m = 3, n = 0 graphs");
    const TriMesh mesh = triangulate(graph);
    os.precision(17);
    for (const auto& p : mesh.pos) os << "v " << p.x() << " " << p.y() << " " << p.z() << "\n";
    for (const auto& t : mesh.tris) os << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

void export_polyline(const RadialGraph& graph, std::ostream& os) {
    if (graph.grid->m() != 2 || graph.grid->n() != 0)
        throw GridError("polyline export is defined for m = 2, n = 0 graphs");
    os << "theta,x,y\n";
    os.precision(17);
    const int n = graph.grid->num_nodes();
    for (int i = 0; i <= n; ++i) {
        const int node = i % n;
        os << graph.grid->theta(node) << "," << graph.positions(node, 0) << ","
           << graph.positions(node, 1) << "\n";
    }
    os << std::flush;
}

}  // namespace pmc
