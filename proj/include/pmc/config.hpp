#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pmc/curvature_spec.hpp"
#include "pmc/grid.hpp"
#include "pmc/solver.hpp"

namespace pmc {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridConfig {
    int m = 2;
    int n = 0;
    int fiber_resolution = 64;
    int base_resolution = 0;
};

struct CurvatureConfig {
    RadialProfile profile;
    std::vector<AngularMode> modes;
    double r_low = 0.05;
    double r_high = 20.0;
};

struct OutputConfig {
    std::string directory = "out";
    bool write_dump = true;
    bool write_mesh = true;
    int refine = 0;  // extra resolution-doubling verification levels
};

struct VerifyConfig {
    std::string dump;
    double tolerance = 1e-6;
};

struct SweepConfig {
    std::string parameter;  // amplitude | crossing_radius | resolution
    std::vector<double> values;
    int jobs = 1;
};

struct RunConfig {
    GridConfig grid;
    CurvatureConfig curvature;
    SolveOptions solver;
    OutputConfig output;
    VerifyConfig verify;
    SweepConfig sweep;
};

// Strict parsing: any unknown key anywhere is an error.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

GridPtr make_grid(const GridConfig& cfg);
CurvatureSpec make_spec(const CurvatureConfig& cfg);

}  // namespace pmc
