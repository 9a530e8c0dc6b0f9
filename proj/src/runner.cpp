#include "pmc/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "pmc/graph.hpp"
#include "pmc/monitors.hpp"
#include "pmc/operator.hpp"
#include "pmc/solver.hpp"

namespace pmc {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

std::string fmt17(double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

struct Timings {
    std::vector<std::pair<std::string, double>> entries;
    void add(const std::string& label, Clock::time_point start) {
        entries.emplace_back(label, std::chrono::duration<double>(Clock::now() - start).count());
    }
    void write(const fs::path& path) const {
        std::ofstream os(path);
        for (const auto& [label, seconds] : entries) os << label << " " << fmt(seconds) << " s\n";
    }
};

void write_growth_section(std::ostream& os, const GrowthReport& growth,
                          const std::optional<NonexistenceVerdict>& verdict) {
    os << "[growth]\n";
    os << "satisfied " << (growth.satisfied ? "true" : "false") << "\n";
    os << "r1 " << fmt(growth.r1) << "\n";
    os << "r2 " << fmt(growth.r2) << "\n";
    os << "monotone " << (growth.monotone_on_annulus ? "true" : "false") << "\n";
    os << "alpha " << fmt(growth.alpha) << "\n";
    os << "max_k " << fmt(growth.max_k) << "\n";
    if (verdict) {
        os << "nonexistence "
           << (verdict->regime == NonexistenceVerdict::Regime::below ? "below a=" : "above b=")
           << fmt(verdict->constant) << "\n";
    } else {
        os << "nonexistence none\n";
    }
    if (!growth.satisfied && !growth.diagnostic.empty()) os << "diagnostic " << growth.diagnostic << "\n";
    os << "\n";
}

void write_monitor_section(std::ostream& os, const MonitorReport& monitor) {
    os << "[monitors]\n";
    os << "min_radius " << fmt(monitor.min_radius.value) << " at_node " << monitor.min_radius.node << "\n";
    os << "max_radius " << fmt(monitor.max_radius.value) << " at_node " << monitor.max_radius.node << "\n";
    os << "barrier " << (monitor.barrier_pass ? "pass" : "fail") << "\n";
    os << "gamma_exponent " << fmt(monitor.gamma_exponent) << "\n";
    os << "gamma1_max " << fmt(monitor.gamma1.value) << " at_node " << monitor.gamma1.node << "\n";
    os << "gamma2_max " << fmt(monitor.gamma2.value) << " at_node " << monitor.gamma2.node << "\n";
    os << "max_v2 " << fmt(monitor.max_v2.value) << " at_node " << monitor.max_v2.node << "\n";
    os << "min_ellipticity " << fmt(monitor.min_ellipticity) << " at_node " << monitor.ellipticity_node
       << "\n";
    if (monitor.vertical_hypothesis_checked)
        os << "vertical_hypothesis " << (monitor.vertical_hypothesis_holds ? "holds" : "violated")
           << "\n";
    os << "\n";
}

void write_deviation(std::ostream& os, const std::string& label, const DeviationStats& stats) {
    os << label << "_max_abs " << fmt(stats.max_abs) << "\n";
    os << label << "_mean_abs " << fmt(stats.mean_abs) << "\n";
    os << label << "_max_rel " << fmt(stats.max_rel) << "\n";
}

std::vector<std::string> coordinate_names(const BundleGrid& grid) {
    std::vector<std::string> names;
    names.push_back("theta");
    if (grid.m() == 3) names.push_back("phi");
    if (grid.n() == 1) names.push_back("x");
    return names;
}

std::vector<double> coordinates(const BundleGrid& grid, int node) {
    std::vector<double> c;
    c.push_back(grid.theta(node));
    if (grid.m() == 3) c.push_back(grid.phi(node));
    if (grid.n() == 1) c.push_back(grid.base_coord(node));
    return c;
}

void write_solution_csv(const fs::path& path, GridPtr grid, const CurvatureSpec& spec,
                        const Eigen::VectorXd& u) {
    std::ofstream os(path);
    os << "# pmc solution v1 m=" << grid->m() << " n=" << grid->n() << " fiber="
       << grid->fiber_resolution() << " base=" << grid->base_resolution() << "\n";
    for (const auto& name : coordinate_names(*grid)) os << name << ",";
    os << "u,v1,v2,M,K\n";
    const RadialGraph graph = embed(grid, spec, u);
    const GradientSplit split = gradient_split(*grid, u, graph.bundle);
    for (int node = 0; node < grid->num_nodes(); ++node) {
        for (const double c : coordinates(*grid, node)) os << fmt17(c) << ",";
        os << fmt17(u[node]) << "," << fmt17(split.v1[node]) << "," << fmt17(split.v2[node]) << ","
           << fmt17(graph.mean_curvature[node]) << "," << fmt17(graph.k_composed[node]) << "\n";
    }
}

int status_exit_code(SolveStatus status) {
    switch (status) {
        case SolveStatus::converged: return exit_code::ok;
        case SolveStatus::nonexistence_suspected: return exit_code::solver_nonexistence;
        case SolveStatus::budget_exhausted: return exit_code::solver_budget;
        case SolveStatus::annulus_escape: return exit_code::solver_annulus;
    }
    return exit_code::failed;
}

std::optional<double> profile_crossing(const RadialProfile& profile, int m, double lo, double hi) {
    auto g = [&](double rho) { return rho * profile.value(rho) - (m - 1); };
    double prev_rho = lo, prev = g(lo);
    if (!(prev > 0.0)) return std::nullopt;
    constexpr int kScan = 512;
    for (int i = 1; i <= kScan; ++i) {
        const double rho = lo * std::pow(hi / lo, double(i) / kScan);
        const double gi = g(rho);
        if ((prev > 0.0) != (gi > 0.0)) {
            double a = prev_rho, b = rho;
            while (b - a > 1e-13) {
                const double mid = 0.5 * (a + b);
                ((g(mid) > 0.0) == (prev > 0.0) ? a : b) = mid;
            }
            return 0.5 * (a + b);
        }
        prev_rho = rho;
        prev = gi;
    }
    return std::nullopt;
}

}  // namespace

int run_check_k(const RunConfig& config) {
    const CurvatureSpec spec = make_spec(config.curvature);
    const int m = config.grid.m;
    const auto dirs = growth_directions(m, config.grid.n);
    const GrowthReport growth = check_growth(spec, m, dirs);
    const auto verdict = nonexistence_check(spec, m, dirs);

    fs::create_directories(config.output.directory);
    std::ofstream report(fs::path(config.output.directory) / "report.txt");
    report << "pmc report v1\nmode check-k\n\n";
    write_growth_section(report, growth, verdict);

    std::ostringstream human;
    if (growth.satisfied) {
        human << "growth condition satisfied: crossing radii r1 = " << fmt(growth.r1)
              << ", r2 = " << fmt(growth.r2)
              << (growth.monotone_on_annulus ? " (monotone on the crossing annulus)" : "")
              << ", alpha = " << fmt(growth.alpha);
    } else if (verdict) {
        human << "nonexistence regime ("
              << (verdict->regime == NonexistenceVerdict::Regime::below ? "below, a = " : "above, b = ")
              << fmt(verdict->constant) << "): no radial graph solution exists";
    } else {
        human << "growth condition not satisfied: " << growth.diagnostic;
    }
    std::cout << human.str() << "\n";
    report << "[summary]\n" << human.str() << "\n";

    if (verdict) return exit_code::nonexistence;
    return growth.satisfied ? exit_code::ok : exit_code::failed;
}

int run_solve(const RunConfig& config) {
    Timings timings;
    const auto t_total = Clock::now();

    GridPtr grid = make_grid(config.grid);
    const CurvatureSpec spec = make_spec(config.curvature);

    const auto t_solve = Clock::now();
    const SolveResult result = continuation_solve(grid, spec, config.solver);
    timings.add("solve", t_solve);

    fs::create_directories(config.output.directory);
    const fs::path outdir(config.output.directory);

    std::ofstream report(outdir / "report.txt");
    report << "pmc report v1\nmode solve\n";
    report << "grid m=" << grid->m() << " n=" << grid->n() << " fiber=" << grid->fiber_resolution()
           << " base=" << grid->base_resolution() << "\n\n";
    write_growth_section(report, result.growth, result.nonexistence);

    report << "[solve]\n";
    report << "status " << to_string(result.status) << "\n";
    report << "residual_max " << fmt(result.residual_norm) << "\n";
    report << "picard_iterations " << result.total_picard_iterations << "\n";
    report << "newton_iterations " << result.newton_iterations << "\n";
    report << "final_picard_defect " << fmt(result.final_picard_defect) << "\n";
    report << "fiberwise_residual " << fmt(result.fiberwise_residual) << "\n";
    report << "picard_consistency_constant " << fmt(result.picard_consistency_constant) << "\n";
    report << "min_ellipticity_over_run " << fmt(result.min_ellipticity) << "\n";
    report << "growth_warning " << (result.growth_warning ? "true" : "false") << "\n";
    if (result.refinement_residuals.size() > 1) {
        report << "refinement_residuals";
        for (const double r : result.refinement_residuals) report << " " << fmt(r);
        report << "\n";
    }
    if (!result.message.empty()) report << "message " << result.message << "\n";
    report << "\n";

    const bool have_field = result.u.values.size() == grid->num_nodes();
    if (have_field) {
        const MonitorReport monitor =
            evaluate_monitors(*grid, result.u.values, result.growth, config.solver.barrier_slack,
                              default_gamma_exponent(result.growth), result.growth.alpha);
        write_monitor_section(report, monitor);

        bool in_annulus = true;
        for (int node = 0; node < grid->num_nodes() && in_annulus; ++node) {
            const double r = std::exp(result.u.values[node]);
            in_annulus = r >= spec.r_low() && r <= spec.r_high();
        }
        if (in_annulus) {
            const auto t_verify = Clock::now();
            const RadialGraph graph = embed(grid, spec, result.u.values);
            const VerificationReport ver = verify(graph, spec);
            timings.add("verify", t_verify);

            report << "[verification]\n";
            write_deviation(report, "direct", ver.direct);
            write_deviation(report, "independent", ver.independent);
            if (ver.discrete_available) write_deviation(report, "discrete", ver.discrete);
            report << "grid_spacing " << fmt(ver.grid_spacing) << "\n\n";

            const auto t_io = Clock::now();
            if (config.output.write_dump)
                write_solution_csv(outdir / "solution.csv", grid, spec, result.u.values);
            if (config.output.write_mesh && grid->n() == 0) {
                if (grid->m() == 3) {
                    std::ofstream mesh(outdir / "graph_mesh.txt");
                    export_mesh(graph, mesh);
                } else {
                    std::ofstream poly(outdir / "graph_polyline.csv");
                    export_polyline(graph, poly);
                }
            }
            timings.add("artifacts", t_io);

            // refinement study: re-solve on doubled grids, watch the
            // independent-path deviation fall at second order
            if (config.output.refine > 0 && result.status == SolveStatus::converged) {
                report << "[refinement]\n";
                double prev = ver.independent.max_abs;
                report << "level 0 fiber_resolution " << grid->fiber_resolution()
                       << " independent_max_abs " << fmt(prev) << "\n";
                for (int level = 1; level <= config.output.refine; ++level) {
                    GridConfig gcfg = config.grid;
                    gcfg.fiber_resolution <<= level;
                    if (gcfg.n == 1) gcfg.base_resolution <<= level;
                    GridPtr fine = make_grid(gcfg);
                    const SolveResult fine_result = continuation_solve(fine, spec, config.solver);
                    if (fine_result.status != SolveStatus::converged) {
                        report << "level " << level << " status " << to_string(fine_result.status)
                               << "\n";
                        break;
                    }
                    const VerificationReport fine_ver =
                        verify(embed(fine, spec, fine_result.u.values), spec);
                    report << "level " << level << " fiber_resolution " << gcfg.fiber_resolution
                           << " independent_max_abs " << fmt(fine_ver.independent.max_abs)
                           << " ratio " << fmt(prev / fine_ver.independent.max_abs) << "\n";
                    prev = fine_ver.independent.max_abs;
                }
                report << "\n";
            }
        }
    }

    timings.add("total", t_total);
    timings.write(outdir / "timings.txt");
    return status_exit_code(result.status);
}

int run_verify(const RunConfig& config) {
    GridPtr grid = make_grid(config.grid);
    const CurvatureSpec spec = make_spec(config.curvature);

    std::ifstream in(config.verify.dump);
    if (!in) {
        std::cerr << "cannot open dump '" << config.verify.dump << "'\n";
        return exit_code::data_error;
    }
    std::string line;
    if (!std::getline(in, line)) return exit_code::data_error;
    {
        int m = 0, n = 0, fiber = 0, base = 0;
        if (std::sscanf(line.c_str(), "# pmc solution v1 m=%d n=%d fiber=%d base=%d", &m, &n, &fiber,
                        &base) != 4 ||
            m != grid->m() || n != grid->n() || fiber != grid->fiber_resolution() ||
            base != grid->base_resolution()) {
            std::cerr << "dump header does not match the configured grid\n";
            return exit_code::data_error;
        }
    }
    if (!std::getline(in, line)) return exit_code::data_error;  // column header

    const int coord_cols = 1 + (grid->m() == 3 ? 1 : 0) + grid->n();
    Eigen::VectorXd u(grid->num_nodes());
    for (int node = 0; node < grid->num_nodes(); ++node) {
        if (!std::getline(in, line)) {
            std::cerr << "dump truncated at row " << node << "\n";
            return exit_code::data_error;
        }
        std::istringstream row(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(row, cell, ',')) cells.push_back(std::strtod(cell.c_str(), nullptr));
        if (static_cast<int>(cells.size()) < coord_cols + 1) {
            std::cerr << "dump row " << node << " malformed\n";
            return exit_code::data_error;
        }
        if (std::abs(cells[0] - grid->theta(node)) > 1e-9) {
            std::cerr << "dump coordinates do not match the configured grid\n";
            return exit_code::data_error;
        }
        u[node] = cells[coord_cols];
    }

    const RadialGraph graph = embed(grid, spec, u);
    const VerificationReport ver = verify(graph, spec);

    fs::create_directories(config.output.directory);
    std::ofstream report(fs::path(config.output.directory) / "report.txt");
    report << "pmc report v1\nmode verify\n\n[verification]\n";
    write_deviation(report, "direct", ver.direct);
    write_deviation(report, "independent", ver.independent);
    if (ver.discrete_available) write_deviation(report, "discrete", ver.discrete);
    report << "grid_spacing " << fmt(ver.grid_spacing) << "\n";
    report << "tolerance " << fmt(config.verify.tolerance) << "\n";

    const bool pass = ver.direct.max_rel <= config.verify.tolerance;
    report << "result " << (pass ? "pass" : "fail") << "\n";
    std::cout << "direct max rel deviation " << fmt(ver.direct.max_rel) << " (tolerance "
              << fmt(config.verify.tolerance) << "): " << (pass ? "pass" : "fail") << "\n";
    return pass ? exit_code::ok : exit_code::failed;
}

namespace {

struct SweepRow {
    double value = 0.0;
    std::string status = "error";
    double residual = std::numeric_limits<double>::quiet_NaN();
    double u_dev_from_radial = std::numeric_limits<double>::quiet_NaN();
    double deviation = std::numeric_limits<double>::quiet_NaN();
    std::string error;
};

RunConfig sweep_point_config(const RunConfig& base, const std::string& parameter, double value) {
    RunConfig cfg = base;
    if (parameter == "amplitude") {
        for (auto& mode : cfg.curvature.modes) mode.amplitude = value;
    } else if (parameter == "crossing_radius") {
        if (cfg.curvature.profile.kind != RadialProfile::Kind::power)
            throw ConfigError("crossing_radius sweep requires a power-law profile");
        const double p = cfg.curvature.profile.exponent;
        cfg.curvature.profile.coefficient = (cfg.grid.m - 1) * std::pow(value, -(p + 1.0));
    } else if (parameter == "resolution") {
        cfg.grid.fiber_resolution = static_cast<int>(value);
    } else {
        throw ConfigError("sweep.parameter must be one of amplitude|crossing_radius|resolution");
    }
    return cfg;
}

}  // namespace

int run_sweep(const RunConfig& config) {
    if (config.sweep.values.empty()) throw ConfigError("sweep.values is empty");
    const int npoints = static_cast<int>(config.sweep.values.size());
    std::vector<SweepRow> rows(npoints);

    // validated up front so a bad parameter name fails the whole sweep
    for (const double v : config.sweep.values) (void)sweep_point_config(config, config.sweep.parameter, v);

    fs::create_directories(config.output.directory);
    const fs::path outdir(config.output.directory);

    auto run_point = [&](int idx) {
        SweepRow row;
        row.value = config.sweep.values[idx];
        try {
            RunConfig cfg = sweep_point_config(config, config.sweep.parameter, row.value);
            GridPtr grid = make_grid(cfg.grid);
            const CurvatureSpec spec = make_spec(cfg.curvature);
            SolveOptions opts = cfg.solver;
            opts.record_history = false;
            const SolveResult result = continuation_solve(grid, spec, opts);
            row.status = to_string(result.status);
            row.residual = result.residual_norm;
            if (result.status == SolveStatus::converged) {
                const auto r_pred =
                    profile_crossing(cfg.curvature.profile, cfg.grid.m, spec.r_low(), spec.r_high());
                if (r_pred)
                    row.u_dev_from_radial =
                        (result.u.values.array() - std::log(*r_pred)).abs().maxCoeff();
                const VerificationReport ver = verify(embed(grid, spec, result.u.values), spec);
                row.deviation = ver.independent.max_abs;
            }
        } catch (const std::exception& e) {
            row.status = "error";
            row.error = e.what();
        }
        rows[idx] = row;
    };

    const int jobs = std::max(1, config.sweep.jobs);
    if (jobs == 1) {
        for (int i = 0; i < npoints; ++i) run_point(i);
    } else {
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int i = next.fetch_add(1); i < npoints; i = next.fetch_add(1)) run_point(i);
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < std::min(jobs, npoints); ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::ofstream csv(outdir / "sweep_summary.csv");
    csv << "parameter,value,status,residual,u_dev_from_radial,deviation\n";
    for (const auto& row : rows) {
        csv << config.sweep.parameter << "," << fmt17(row.value) << "," << row.status << ","
            << fmt(row.residual) << "," << fmt(row.u_dev_from_radial) << "," << fmt(row.deviation)
            << "\n";
    }

    std::ofstream report(outdir / "report.txt");
    report << "pmc report v1\nmode sweep\nparameter " << config.sweep.parameter << "\npoints "
           << npoints << "\n";
    for (const auto& row : rows) {
        report << "value " << fmt(row.value) << " status " << row.status << " residual "
               << fmt(row.residual);
        if (!row.error.empty()) report << " error " << row.error;
        report << "\n";
    }
    return exit_code::ok;
}

}  // namespace pmc
