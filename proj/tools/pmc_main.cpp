#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pmc/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"prescribed mean curvature radial graphs on sphere bundles"};

    std::string config_path;
    std::string mode;
    std::string out_dir;
    std::string dump_path;
    bool force = false;
    int refine = -1;
    int jobs = 0;

    app.add_option("--config", config_path, "run configuration file (JSON)")->required();
    app.add_option("--mode", mode, "workflow")
        ->required()
        ->check(CLI::IsMember({"solve", "verify", "sweep", "check-k"}));
    app.add_option("--out", out_dir, "output directory (overrides output.directory)");
    app.add_option("--dump", dump_path, "solution dump to verify (overrides verify.dump)");
    app.add_flag("--force", force, "proceed despite a failed growth check");
    app.add_option("--refine", refine, "verification refinement levels (overrides output.refine)");
    app.add_option("--jobs", jobs, "concurrent sweep points (overrides sweep.jobs)");

    CLI11_PARSE(app, argc, argv);

    try {
        pmc::RunConfig config = pmc::load_config(config_path);
        if (!out_dir.empty()) config.output.directory = out_dir;
        if (!dump_path.empty()) config.verify.dump = dump_path;
        if (force) config.solver.force = true;
        if (refine >= 0) config.output.refine = refine;
        if (jobs > 0) config.sweep.jobs = jobs;

        if (mode == "check-k") return pmc::run_check_k(config);
        if (mode == "solve") return pmc::run_solve(config);
        if (mode == "verify") return pmc::run_verify(config);
        return pmc::run_sweep(config);
    } catch (const pmc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return pmc::exit_code::config_error;
    } catch (const pmc::SpecError& e) {
        std::cerr << "curvature spec error: " << e.what() << "\n";
        return pmc::exit_code::config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 70;
    }
}
