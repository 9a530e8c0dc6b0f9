#pragma once

#include <string>

#include "pmc/config.hpp"

namespace pmc {

// Exit codes of the command-line workflows.
namespace exit_code {
constexpr int ok = 0;
constexpr int failed = 1;              // check failed / deviation above tolerance
constexpr int nonexistence = 2;        // check-k: Remark-1 regime
constexpr int solver_nonexistence = 3;
constexpr int solver_budget = 4;
constexpr int solver_annulus = 5;
constexpr int config_error = 64;
constexpr int data_error = 65;         // dump/grid shape mismatch
}  // namespace exit_code

int run_check_k(const RunConfig& config);
int run_solve(const RunConfig& config);
int run_verify(const RunConfig& config);
int run_sweep(const RunConfig& config);

}  // namespace pmc
