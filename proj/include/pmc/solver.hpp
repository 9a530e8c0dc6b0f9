#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pmc/curvature_spec.hpp"
#include "pmc/grid.hpp"
#include "pmc/monitors.hpp"

namespace pmc {

struct SolveOptions {
    int schedule_steps = 20;
    double min_step = 1.0 / 320.0;
    double tol_picard = 1e-9;
    double tol_residual = 1e-10;
    double tol_linear = 1e-12;
    int max_picard_iterations = 300;
    int max_newton_iterations = 50;
    double barrier_slack = 1e-6;
    bool force = false;                  // proceed despite a Remark-1 verdict
    int max_schedule_refinements = 3;    // stalled-continuation retries
    double nonexistence_residual_floor = 1e-2;
    bool record_history = true;
};

enum class SolveStatus { converged, nonexistence_suspected, budget_exhausted, annulus_escape };

const char* to_string(SolveStatus status);

struct SolveState {
    double t = 0.0;
    double residual_norm = 0.0;  // max-norm of R(u) at t = 1, fixed-point defect before
    double picard_defect = 0.0;
    int picard_iterations = 0;
    MonitorReport monitor;
};

struct SolveResult {
    SolveStatus status = SolveStatus::budget_exhausted;
    ScalarField u;
    double residual_norm = std::numeric_limits<double>::infinity();
    std::vector<SolveState> history;
    GrowthReport growth;
    std::optional<NonexistenceVerdict> nonexistence;
    bool growth_warning = false;  // proceeded although the growth check failed

    int total_picard_iterations = 0;
    int newton_iterations = 0;
    double min_ellipticity = 1.0;
    double final_picard_defect = 0.0;
    double fiberwise_residual = 0.0;          // defect of the frozen-coefficient equation
    double picard_consistency_constant = 0.0; // measured ||L[u]||_inf bounding the two
    std::vector<double> refinement_residuals; // final |R| per schedule attempt
    std::string message;
};

// One application of the homotopy map: u_t = T_t w, the solution of
//   L[w] u = t [ -w + (m-1)(1+v1(w)) - (1+v1(w))^{3/2} e^w K(e^w xi) ].
Eigen::VectorXd picard_step(GridPtr grid, const Eigen::VectorXd& w, double t,
                            const CurvatureSpec& spec, double tol_linear = 1e-12);

// Damped Newton on the full residual with barrier/ellipticity gating.
SolveResult newton_refine(GridPtr grid, const CurvatureSpec& spec, const Eigen::VectorXd& u0,
                          const SolveOptions& options);

// Continuation along the homotopy schedule followed by the Newton endgame.
SolveResult continuation_solve(GridPtr grid, const CurvatureSpec& spec, const SolveOptions& options);

}  // namespace pmc
