#include "pmc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace pmc {

namespace {

using nlohmann::json;

// Marks consumed keys and rejects leftovers.
class StrictObject {
public:
    StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
    }
    ~StrictObject() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key)) throw ConfigError("unknown key '" + path_ + "." + key + "'");
    }

    bool has(const std::string& key) { return j_.contains(key); }
    const json& child(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }
    template <typename T>
    T get(const std::string& key, T fallback) {
        if (!j_.contains(key)) return fallback;
        seen_.insert(key);
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError("bad value for '" + path_ + "." + key + "': " + e.what());
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

RadialProfile parse_profile(const json& j, const std::string& path) {
    StrictObject obj(j, path);
    RadialProfile profile;
    const std::string kind = obj.get<std::string>("kind", "power");
    if (kind == "power") {
        profile.kind = RadialProfile::Kind::power;
        profile.coefficient = obj.get<double>("coefficient", 1.0);
        profile.exponent = obj.get<double>("exponent", 0.0);
    } else if (kind == "rational") {
        profile.kind = RadialProfile::Kind::rational;
        profile.numerator = obj.get<std::vector<double>>("numerator", {});
        profile.denominator = obj.get<std::vector<double>>("denominator", {});
    } else if (kind == "table") {
        profile.kind = RadialProfile::Kind::table;
        profile.radii = obj.get<std::vector<double>>("radii", {});
        profile.table_values = obj.get<std::vector<double>>("values", {});
    } else {
        throw ConfigError(path + ".kind must be one of power|rational|table");
    }
    return profile;
}

AngularMode parse_mode(const json& j, const std::string& path) {
    StrictObject obj(j, path);
    AngularMode mode;
    const std::string type = obj.get<std::string>("type", "");
    if (type == "fiber_cos")
        mode.kind = AngularMode::Kind::fiber_cos;
    else if (type == "fiber_sin")
        mode.kind = AngularMode::Kind::fiber_sin;
    else if (type == "harmonic")
        mode.kind = AngularMode::Kind::harmonic;
    else if (type == "base_cos")
        mode.kind = AngularMode::Kind::base_cos;
    else if (type == "base_sin")
        mode.kind = AngularMode::Kind::base_sin;
    else
        throw ConfigError(path + ".type must be one of fiber_cos|fiber_sin|harmonic|base_cos|base_sin");
    mode.amplitude = obj.get<double>("amplitude", 0.0);
    mode.k = obj.get<int>("k", type == "harmonic" ? 0 : 1);
    mode.l = obj.get<int>("l", 1);
    return mode;
}

}  // namespace

RunConfig parse_config(const json& j) {
    RunConfig cfg;
    StrictObject root(j, "config");

    if (root.has("grid")) {
        StrictObject grid(root.child("grid"), "grid");
        cfg.grid.m = grid.get<int>("m", cfg.grid.m);
        cfg.grid.n = grid.get<int>("n", cfg.grid.n);
        cfg.grid.fiber_resolution = grid.get<int>("fiber_resolution", cfg.grid.fiber_resolution);
        cfg.grid.base_resolution = grid.get<int>("base_resolution", cfg.grid.base_resolution);
    }

    if (root.has("curvature")) {
        StrictObject curv(root.child("curvature"), "curvature");
        if (curv.has("profile")) cfg.curvature.profile = parse_profile(curv.child("profile"), "curvature.profile");
        if (curv.has("modes")) {
            const json& modes = curv.child("modes");
            if (!modes.is_array()) throw ConfigError("curvature.modes must be an array");
            for (std::size_t i = 0; i < modes.size(); ++i)
                cfg.curvature.modes.push_back(
                    parse_mode(modes[i], "curvature.modes[" + std::to_string(i) + "]"));
        }
        if (curv.has("annulus")) {
            const auto annulus = curv.child("annulus").get<std::vector<double>>();
            if (annulus.size() != 2) throw ConfigError("curvature.annulus must be [r_low, r_high]");
            cfg.curvature.r_low = annulus[0];
            cfg.curvature.r_high = annulus[1];
        }
    }

    if (root.has("solver")) {
        StrictObject solver(root.child("solver"), "solver");
        auto& s = cfg.solver;
        s.schedule_steps = solver.get<int>("schedule_steps", s.schedule_steps);
        s.min_step = solver.get<double>("min_step", s.min_step);
        s.tol_picard = solver.get<double>("tol_picard", s.tol_picard);
        s.tol_residual = solver.get<double>("tol_residual", s.tol_residual);
        s.tol_linear = solver.get<double>("tol_linear", s.tol_linear);
        s.max_picard_iterations = solver.get<int>("max_picard_iterations", s.max_picard_iterations);
        s.max_newton_iterations = solver.get<int>("max_newton_iterations", s.max_newton_iterations);
        s.barrier_slack = solver.get<double>("barrier_slack", s.barrier_slack);
        s.force = solver.get<bool>("force", s.force);
        s.max_schedule_refinements =
            solver.get<int>("max_schedule_refinements", s.max_schedule_refinements);
        s.nonexistence_residual_floor =
            solver.get<double>("nonexistence_residual_floor", s.nonexistence_residual_floor);
    }

    if (root.has("output")) {
        StrictObject output(root.child("output"), "output");
        cfg.output.directory = output.get<std::string>("directory", cfg.output.directory);
        cfg.output.write_dump = output.get<bool>("write_dump", cfg.output.write_dump);
        cfg.output.write_mesh = output.get<bool>("write_mesh", cfg.output.write_mesh);
        cfg.output.refine = output.get<int>("refine", cfg.output.refine);
    }

    if (root.has("verify")) {
        StrictObject verify(root.child("verify"), "verify");
        cfg.verify.dump = verify.get<std::string>("dump", cfg.verify.dump);
        cfg.verify.tolerance = verify.get<double>("tolerance", cfg.verify.tolerance);
    }

    if (root.has("sweep")) {
        StrictObject sweep(root.child("sweep"), "sweep");
        cfg.sweep.parameter = sweep.get<std::string>("parameter", cfg.sweep.parameter);
        cfg.sweep.values = sweep.get<std::vector<double>>("values", cfg.sweep.values);
        cfg.sweep.jobs = sweep.get<int>("jobs", cfg.sweep.jobs);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

GridPtr make_grid(const GridConfig& cfg) {
    try {
        return BundleGrid::build(cfg.m, cfg.n, cfg.fiber_resolution, cfg.base_resolution);
    } catch (const GridError& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }
}

CurvatureSpec make_spec(const CurvatureConfig& cfg) {
    return CurvatureSpec(cfg.profile, cfg.modes, cfg.r_low, cfg.r_high);
}

}  // namespace pmc
