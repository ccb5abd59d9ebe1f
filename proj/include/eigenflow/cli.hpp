#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "eigenflow/csv.hpp"
#include "eigenflow/dynamics.hpp"
#include "eigenflow/harness.hpp"

namespace eigenflow {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kExhausted = 2;
inline constexpr int kDefective = 3;
inline constexpr int kCycling = 4;
inline constexpr int kUsage = 64;
inline constexpr int kMalformed = 65;
}  // namespace exit_code

int exit_code_for(Status status);

/// "2..8" or "2,3,5" or "7". Throws InvalidConfig.
std::vector<int> parse_dims(const std::string& spec);

/// Human-readable per-dimension outcome and rate table.
std::string format_sweep_summary(const SweepResult& result, const RateTable& rates);

/// Entry point of the `eigenflow` tool; `args` excludes the program name.
/// Subcommands: run, sweep, fit, oracle.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eigenflow
