#pragma once

#include <optional>

#include <Eigen/Core>

#include "pmc/curvature_spec.hpp"
#include "pmc/grid.hpp"

namespace pmc {

struct Extremum {
    double value = 0.0;
    int node = 0;
};

struct BarrierResult {
    bool pass = false;
    double r1 = 0.0, r2 = 0.0, slack = 0.0;
    Extremum min_radius, max_radius;  // extrema of e^u with attaining nodes
};

// pass iff r1 - slack <= e^u <= r2 + slack everywhere.
BarrierResult barrier_check(const BundleGrid& grid, const Eigen::VectorXd& u, double r1, double r2,
                            double slack);

// Maxima of Gamma1 = (1+v) e^{-l u} and Gamma2 = (1+v1) e^{l u}.
std::pair<Extremum, Extremum> gamma_functionals(const BundleGrid& grid, const Eigen::VectorXd& u,
                                                double l);

// Default exponent l0 = 4 + r2 * max K over the crossing annulus.
double default_gamma_exponent(const GrowthReport& growth);

// Max over nodes of the squared horizontal gradient v2 (0 on n = 0 grids).
Extremum horizontal_nullity(const BundleGrid& grid, const Eigen::VectorXd& u);

struct NonexistenceVerdict {
    enum class Regime { below, above };
    Regime regime = Regime::below;
    double constant = 0.0;
};

// Remark-1 regimes: rho K(rho xi)/(m-1) uniformly below 1 (constant a = sup)
// or uniformly above 1 (constant b = inf) over the sampled annulus.
std::optional<NonexistenceVerdict> nonexistence_check(
    const CurvatureSpec& spec, int m, const std::vector<std::pair<Eigen::Vector3d, double>>& dirs);
std::optional<NonexistenceVerdict> nonexistence_check(const CurvatureSpec& spec, int m, int n);

struct MonitorReport {
    Extremum min_radius, max_radius;
    bool barrier_pass = true;
    double gamma_exponent = 0.0;
    Extremum gamma1, gamma2;
    Extremum max_v2;
    double min_ellipticity = 1.0;
    int ellipticity_node = 0;
    // Gradient-estimate hypothesis (horizontal second derivatives vs
    // -alpha sqrt(v)); evaluated where v >= 1 on n >= 1 grids, never enforced.
    bool vertical_hypothesis_checked = false;
    bool vertical_hypothesis_holds = true;
};

MonitorReport evaluate_monitors(const BundleGrid& grid, const Eigen::VectorXd& u,
                                const GrowthReport& growth, double barrier_slack, double l,
                                double alpha);

}  // namespace pmc
