#include "pmc/solver.hpp"

#include <cmath>
#include <optional>

#include <Eigen/SparseLU>

#include "pmc/linear_solver.hpp"
#include "pmc/operator.hpp"

namespace pmc {

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::nonexistence_suspected: return "nonexistence_suspected";
        case SolveStatus::budget_exhausted: return "budget_exhausted";
        case SolveStatus::annulus_escape: return "annulus_escape";
    }
    return "unknown";
}

namespace {

Eigen::VectorXd picard_rhs(const BundleGrid& grid, const CurvatureSpec& spec,
                           const Eigen::VectorXd& w, double t) {
    const GradientSplit split = gradient_split(grid, w);
    Eigen::VectorXd rhs(grid.num_nodes());
    for (int node = 0; node < grid.num_nodes(); ++node) {
        const double radius = std::exp(w[node]);
        const double k = spec.eval(radius, grid.fiber_direction(node), grid.base_coord(node));
        const double one_v1 = 1.0 + split.v1[node];
        rhs[node] =
            t * (-w[node] + (grid.m() - 1) * one_v1 - std::pow(one_v1, 1.5) * radius * k);
    }
    return rhs;
}

// Applies T_t, caching the factorization when the operator does not depend on
// the frozen field (one-dimensional fibers have B identically 1).
struct PicardContext {
    GridPtr grid;
    const CurvatureSpec& spec;
    double tol_linear;
    std::optional<FiberwiseOperator> fixed_op;

    Eigen::VectorXd apply(const Eigen::VectorXd& w, double t) {
        const Eigen::VectorXd rhs = picard_rhs(*grid, spec, w, t);
        if (grid->m() == 2) {
            if (!fixed_op) fixed_op.emplace(grid, w);
            return fixed_op->solve(rhs, tol_linear);
        }
        return FiberwiseOperator(grid, w).solve(rhs, tol_linear);
    }
};

struct PicardOutcome {
    bool converged = false;
    bool escaped = false;
    Eigen::VectorXd u;
    int iterations = 0;
    double defect = std::numeric_limits<double>::infinity();
};

PicardOutcome iterate_to_fixed_point(PicardContext& ctx, const Eigen::VectorXd& w0, double t,
                                     const SolveOptions& options) {
    PicardOutcome out;
    out.u = w0;
    try {
        for (int it = 0; it < options.max_picard_iterations; ++it) {
            Eigen::VectorXd next = ctx.apply(out.u, t);
            out.defect = (next - out.u).lpNorm<Eigen::Infinity>();
            out.u = std::move(next);
            ++out.iterations;
            if (out.defect <= options.tol_picard) {
                out.converged = true;
                return out;
            }
        }
    } catch (const AnnulusError&) {
        out.escaped = true;
    }
    return out;
}

struct RunAccumulator {
    std::vector<SolveState>* history = nullptr;
    int total_picard = 0;
    int newton_iterations = 0;
    double min_ellipticity = 1.0;

    void record(const SolveState& state, bool keep_history) {
        min_ellipticity = std::min(min_ellipticity, state.monitor.min_ellipticity);
        if (keep_history && history) history->push_back(state);
    }
};

double guarded_residual_norm(const BundleGrid& grid, const CurvatureSpec& spec,
                             const Eigen::VectorXd& u) {
    try {
        return residual(grid, spec, u).lpNorm<Eigen::Infinity>();
    } catch (const AnnulusError&) {
        return std::numeric_limits<double>::infinity();
    }
}

enum class NewtonOutcome { converged, stalled, escaped };

NewtonOutcome newton_loop(const BundleGrid& grid, const CurvatureSpec& spec, Eigen::VectorXd& u,
                          const SolveOptions& options, const GrowthReport& growth, double l,
                          RunAccumulator& acc, double& res_norm, bool keep_history) {
    Eigen::VectorXd r;
    try {
        r = residual(grid, spec, u);
    } catch (const AnnulusError&) {
        return NewtonOutcome::escaped;
    }
    res_norm = r.lpNorm<Eigen::Infinity>();

    for (int it = 0; it < options.max_newton_iterations && res_norm > options.tol_residual; ++it) {
        const Eigen::SparseMatrix<double> jac = newton_jacobian(grid, spec, u);
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac);
        if (lu.info() != Eigen::Success) return NewtonOutcome::stalled;
        const Eigen::VectorXd step = lu.solve(-r);

        bool accepted = false;
        bool any_inside = false;
        for (double lambda = 1.0; lambda >= 1.0 / (1 << 16); lambda *= 0.5) {
            const Eigen::VectorXd trial = u + lambda * step;
            Eigen::VectorXd r_trial;
            try {
                r_trial = residual(grid, spec, trial);
            } catch (const AnnulusError&) {
                continue;
            }
            any_inside = true;
            const double trial_norm = r_trial.lpNorm<Eigen::Infinity>();
            if (trial_norm > (1.0 - 1e-4 * lambda) * res_norm) continue;
            if (growth.satisfied &&
                !barrier_check(grid, trial, growth.r1, growth.r2, options.barrier_slack).pass)
                continue;
            u = trial;
            r = std::move(r_trial);
            res_norm = trial_norm;
            accepted = true;
            break;
        }
        if (!accepted) return any_inside ? NewtonOutcome::stalled : NewtonOutcome::escaped;

        ++acc.newton_iterations;
        SolveState state;
        state.t = 1.0;
        state.residual_norm = res_norm;
        state.monitor = evaluate_monitors(grid, u, growth, options.barrier_slack, l, growth.alpha);
        acc.record(state, keep_history);
    }
    return res_norm <= options.tol_residual ? NewtonOutcome::converged : NewtonOutcome::stalled;
}

struct Attempt {
    bool converged = false;
    bool escaped = false;
    Eigen::VectorXd u;
    double residual_norm = std::numeric_limits<double>::infinity();
    double final_picard_defect = 0.0;
    double fiberwise_residual = 0.0;
    double consistency_constant = 0.0;
};

Attempt run_schedule(GridPtr grid, const CurvatureSpec& spec, const SolveOptions& options,
                     const GrowthReport& growth, double l, int steps, RunAccumulator& acc) {
    Attempt attempt;
    attempt.u = Eigen::VectorXd::Zero(grid->num_nodes());
    PicardContext ctx{grid, spec, options.tol_linear, std::nullopt};

    double t = 0.0;
    double dt = 1.0 / steps;
    while (t < 1.0 - 1e-15) {
        const double t_next = std::min(1.0, t + dt);
        PicardOutcome pic = iterate_to_fixed_point(ctx, attempt.u, t_next, options);
        acc.total_picard += pic.iterations;

        bool ok = pic.converged;
        if (ok && growth.satisfied &&
            !barrier_check(*grid, pic.u, growth.r1, growth.r2, options.barrier_slack).pass)
            ok = false;
        if (ok) {
            attempt.u = std::move(pic.u);
            t = t_next;
            SolveState state;
            state.t = t;
            state.residual_norm = pic.defect;
            state.picard_defect = pic.defect;
            state.picard_iterations = pic.iterations;
            state.monitor =
                evaluate_monitors(*grid, attempt.u, growth, options.barrier_slack, l, growth.alpha);
            acc.record(state, options.record_history);
        } else {
            if (pic.escaped) attempt.escaped = true;
            dt *= 0.5;
            if (dt < options.min_step) {
                attempt.residual_norm = guarded_residual_norm(*grid, spec, attempt.u);
                return attempt;
            }
        }
    }

    // fixed-point defect at t = 1, and the frozen-coefficient equation defect
    // it bounds through ||L[u]||
    try {
        FiberwiseOperator op(grid, attempt.u);
        const Eigen::VectorXd rhs = picard_rhs(*grid, spec, attempt.u, 1.0);
        const Eigen::VectorXd t1u = op.solve(rhs, options.tol_linear);
        attempt.final_picard_defect = (attempt.u - t1u).lpNorm<Eigen::Infinity>();
        attempt.fiberwise_residual = (op.apply(attempt.u) - rhs).lpNorm<Eigen::Infinity>();
        attempt.consistency_constant = op.inf_norm();
    } catch (const AnnulusError&) {
        attempt.escaped = true;
        attempt.residual_norm = guarded_residual_norm(*grid, spec, attempt.u);
        return attempt;
    }

    const NewtonOutcome outcome = newton_loop(*grid, spec, attempt.u, options, growth, l, acc,
                                              attempt.residual_norm, options.record_history);
    attempt.converged = outcome == NewtonOutcome::converged;
    if (outcome == NewtonOutcome::escaped) attempt.escaped = true;
    if (!std::isfinite(attempt.residual_norm))
        attempt.residual_norm = guarded_residual_norm(*grid, spec, attempt.u);
    return attempt;
}

}  // namespace

Eigen::VectorXd picard_step(GridPtr grid, const Eigen::VectorXd& w, double t,
                            const CurvatureSpec& spec, double tol_linear) {
    const Eigen::VectorXd rhs = picard_rhs(*grid, spec, w, t);
    return FiberwiseOperator(std::move(grid), w).solve(rhs, tol_linear);
}

SolveResult newton_refine(GridPtr grid, const CurvatureSpec& spec, const Eigen::VectorXd& u0,
                          const SolveOptions& options) {
    SolveResult result;
    result.growth = check_growth(spec, grid->m(), grid->n());
    const double l = default_gamma_exponent(result.growth);

    RunAccumulator acc;
    acc.history = &result.history;
    Eigen::VectorXd u = u0;
    double res_norm = std::numeric_limits<double>::infinity();
    const NewtonOutcome outcome = newton_loop(*grid, spec, u, options, result.growth, l, acc,
                                              res_norm, options.record_history);
    result.u = ScalarField(grid, u);
    result.residual_norm = res_norm;
    result.newton_iterations = acc.newton_iterations;
    result.min_ellipticity = acc.min_ellipticity;
    switch (outcome) {
        case NewtonOutcome::converged: result.status = SolveStatus::converged; break;
        case NewtonOutcome::stalled: result.status = SolveStatus::budget_exhausted; break;
        case NewtonOutcome::escaped: result.status = SolveStatus::annulus_escape; break;
    }
    return result;
}

SolveResult continuation_solve(GridPtr grid, const CurvatureSpec& spec, const SolveOptions& options) {
    SolveResult result;
    result.growth = check_growth(spec, grid->m(), grid->n());
    result.nonexistence = nonexistence_check(spec, grid->m(), grid->n());
    result.growth_warning = !result.growth.satisfied;
    const double l = default_gamma_exponent(result.growth);

    if (result.nonexistence && !options.force) {
        result.status = SolveStatus::nonexistence_suspected;
        result.u = ScalarField(grid);
        result.residual_norm = guarded_residual_norm(*grid, spec, result.u.values);
        result.message = "prescribed function lies in a Remark-1 nonexistence regime; "
                         "no solve attempted (use force to override)";
        return result;
    }

    RunAccumulator acc;
    acc.history = &result.history;

    Attempt last;
    bool any_newton_stall_below_floor = false;
    const int attempts = std::max(1, options.max_schedule_refinements);
    for (int k = 0; k < attempts; ++k) {
        last = run_schedule(grid, spec, options, result.growth, l, options.schedule_steps << k, acc);
        result.refinement_residuals.push_back(last.residual_norm);
        if (last.converged) break;
        if (last.residual_norm < options.nonexistence_residual_floor)
            any_newton_stall_below_floor = true;
    }

    result.u = ScalarField(grid, last.u);
    result.residual_norm = last.residual_norm;
    result.total_picard_iterations = acc.total_picard;
    result.newton_iterations = acc.newton_iterations;
    result.min_ellipticity = acc.min_ellipticity;
    result.final_picard_defect = last.final_picard_defect;
    result.fiberwise_residual = last.fiberwise_residual;
    result.picard_consistency_constant = last.consistency_constant;

    if (last.converged) {
        result.status = SolveStatus::converged;
    } else if (result.nonexistence) {
        result.status = SolveStatus::nonexistence_suspected;
        result.message = "continuation stalled in a Remark-1 regime";
    } else if (last.escaped) {
        result.status = SolveStatus::annulus_escape;
    } else if (!any_newton_stall_below_floor) {
        result.status = SolveStatus::nonexistence_suspected;
        result.message =
            "continuation stalled with residual bounded below across schedule refinements";
    } else {
        result.status = SolveStatus::budget_exhausted;
    }
    return result;
}

}  // namespace pmc
