#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "incodim/io.hpp"

namespace incodim {

enum class Command { CheckCompat, Chi, Threshold, Witness, Sweep };

struct RunConfig {
  Command command = Command::CheckCompat;
  std::optional<std::string> input_path;
  std::optional<double> t;  // MUB pair (t x, t y) without an input file
  SolverOptions solver;
  int grid_n = 64;
  int threads = 1;
  std::uint64_t seed = 0;
  std::optional<std::string> output_path;
  std::string format = "json";
  double tol = 1e-3;
  int starts = 64;
  int steps = 2000;

  void validate() const;
};

// Exit codes.
constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitParse = 2;
constexpr int kExitPrecondition = 3;
constexpr int kExitNotFound = 4;
constexpr int kExitAmbiguous = 5;

int exit_code_for(ErrorCode c);

json cmd_check_compat(const ProblemInput& in, const RunConfig& cfg);
json cmd_chi(const ProblemInput& in, const RunConfig& cfg);
// Writes the sweep at t0 next to the report and records its path.
json cmd_threshold(const RunConfig& cfg);
json cmd_witness(const ProblemInput& in, const RunConfig& cfg);
std::vector<SweepRow> cmd_sweep(const RunConfig& cfg);

// Runs the configured command, writing the report to cfg.output_path or `out`, errors to `err`.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace incodim
