#include "pmc/monitors.hpp"

#include <cmath>

#include "pmc/operator.hpp"
#include "pmc/stencil.hpp"

namespace pmc {

BarrierResult barrier_check(const BundleGrid& grid, const Eigen::VectorXd& u, double r1, double r2,
                            double slack) {
    BarrierResult out;
    out.r1 = r1;
    out.r2 = r2;
    out.slack = slack;
    out.min_radius = {std::exp(u[0]), 0};
    out.max_radius = out.min_radius;
    for (int node = 1; node < static_cast<int>(u.size()); ++node) {
        const double r = std::exp(u[node]);
        if (r < out.min_radius.value) out.min_radius = {r, node};
        if (r > out.max_radius.value) out.max_radius = {r, node};
    }
    out.pass = out.min_radius.value >= r1 - slack && out.max_radius.value <= r2 + slack;
    return out;
}

std::pair<Extremum, Extremum> gamma_functionals(const BundleGrid& grid, const Eigen::VectorXd& u,
                                                double l) {
    const GradientSplit split = gradient_split(grid, u);
    Extremum g1{-std::numeric_limits<double>::infinity(), 0};
    Extremum g2 = g1;
    for (int node = 0; node < grid.num_nodes(); ++node) {
        const double a = (1.0 + split.v[node]) * std::exp(-l * u[node]);
        const double b = (1.0 + split.v1[node]) * std::exp(l * u[node]);
        if (a > g1.value) g1 = {a, node};
        if (b > g2.value) g2 = {b, node};
    }
    return {g1, g2};
}

double default_gamma_exponent(const GrowthReport& growth) { return 4.0 + growth.r2 * growth.max_k; }

Extremum horizontal_nullity(const BundleGrid& grid, const Eigen::VectorXd& u) {
    if (grid.n() == 0) return {0.0, 0};
    const GradientSplit split = gradient_split(grid, u);
    Extremum out{split.v2[0], 0};
    for (int node = 1; node < grid.num_nodes(); ++node)
        if (split.v2[node] > out.value) out = {split.v2[node], node};
    return out;
}

std::optional<NonexistenceVerdict> nonexistence_check(
    const CurvatureSpec& spec, int m, const std::vector<std::pair<Eigen::Vector3d, double>>& dirs) {
    constexpr int kRad = 96;
    double sup = -std::numeric_limits<double>::infinity();
    double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kRad; ++i) {
        const double rho = spec.r_low() * std::pow(spec.r_high() / spec.r_low(), double(i) / kRad);
        for (const auto& [xi, bx] : dirs) {
            const double ratio = rho * spec.eval(rho, xi, bx) / (m - 1);
            sup = std::max(sup, ratio);
            inf = std::min(inf, ratio);
        }
    }
    if (sup < 1.0) return NonexistenceVerdict{NonexistenceVerdict::Regime::below, sup};
    if (inf > 1.0) return NonexistenceVerdict{NonexistenceVerdict::Regime::above, inf};
    return std::nullopt;
}

std::optional<NonexistenceVerdict> nonexistence_check(const CurvatureSpec& spec, int m, int n) {
    return nonexistence_check(spec, m, growth_directions(m, n));
}

MonitorReport evaluate_monitors(const BundleGrid& grid, const Eigen::VectorXd& u,
                                const GrowthReport& growth, double barrier_slack, double l,
                                double alpha) {
    MonitorReport report;
    const BarrierResult barrier = barrier_check(grid, u, growth.r1, growth.r2, barrier_slack);
    report.min_radius = barrier.min_radius;
    report.max_radius = barrier.max_radius;
    report.barrier_pass = growth.satisfied ? barrier.pass : true;
    report.gamma_exponent = l;
    std::tie(report.gamma1, report.gamma2) = gamma_functionals(grid, u, l);
    report.max_v2 = horizontal_nullity(grid, u);

    const DerivativeBundle bundle = covariant_derivatives(grid, u);
    const EllipticCoefficients coeff = elliptic_coefficients(grid, u, bundle);
    report.min_ellipticity = coeff.min_eigenvalue;
    report.ellipticity_node = coeff.argmin_node;

    if (grid.n() >= 1) {
        report.vertical_hypothesis_checked = true;
        const GradientSplit split = gradient_split(grid, u, bundle);
        for (int node = 0; node < grid.num_nodes(); ++node) {
            if (split.v[node] < 1.0) continue;
            double horiz = 0.0;
            for (int a = 0; a < grid.dim(); ++a)
                if (grid.mu(a) == 1)
                    horiz += 2.0 * std::exp(2.0 * u[node]) * bundle.second(node, a, a);
            if (horiz > -alpha * std::sqrt(split.v[node])) {
                report.vertical_hypothesis_holds = false;
                break;
            }
        }
    }
    return report;
}

}  // namespace pmc
