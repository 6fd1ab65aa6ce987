#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "incodim/commands.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("incodim");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("INCODIM_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

void add_common(CLI::App* sub, incodim::RunConfig& cfg) {
  sub->add_option("--tol-marginal", cfg.solver.tol_marginal, "marginal residual tolerance")->capture_default_str();
  sub->add_option("--tol-psd", cfg.solver.tol_psd, "PSD tolerance")->capture_default_str();
  sub->add_option("--tol-gap", cfg.solver.tol_gap, "alternating-projection gap tolerance")->capture_default_str();
  sub->add_option("--max-iter", cfg.solver.max_iter, "oracle iteration cap")->capture_default_str();
  sub->add_option("--grid", cfg.grid_n, "grid resolution (>= 16)")->capture_default_str();
  sub->add_option("--threads", cfg.threads, "worker threads")->capture_default_str();
  sub->add_option("--seed", cfg.seed, "PRNG seed")->capture_default_str();
  sub->add_option("--out", cfg.output_path, "write the report here instead of stdout");
  sub->add_option("--format", cfg.format, "json or csv")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  incodim::RunConfig cfg;
  CLI::App app{"Incompatibility dimension toolkit"};
  app.require_subcommand(1);

  auto* check = app.add_subcommand("check-compat", "decide compatibility of the input observables");
  auto* chi = app.add_subcommand("chi", "incompatibility and compatibility dimensions");
  auto* thr = app.add_subcommand("threshold", "locate the MUB-pair threshold t0");
  auto* wit = app.add_subcommand("witness", "search an incompatibility witness on a state subset");
  auto* sweep = app.add_subcommand("sweep", "segment sweep of the MUB pair at fixed t");
  for (auto* s : {check, chi, wit}) {
    s->add_option("--input", cfg.input_path, "JSON problem file");
    s->add_option("--t", cfg.t, "noisy MUB pair (t x, t y) instead of --input");
  }
  for (auto* s : {check, chi, thr, wit, sweep}) add_common(s, cfg);
  thr->add_option("--tol", cfg.tol, "bisection tolerance (>= 1e-5)")->capture_default_str();
  wit->add_option("--starts", cfg.starts, "verifier starts")->capture_default_str();
  wit->add_option("--steps", cfg.steps, "verifier steps per start")->capture_default_str();
  sweep->add_option("--t", cfg.t, "noise level")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : incodim::kExitParse;
  }

  if (check->parsed()) cfg.command = incodim::Command::CheckCompat;
  if (chi->parsed()) cfg.command = incodim::Command::Chi;
  if (thr->parsed()) cfg.command = incodim::Command::Threshold;
  if (wit->parsed()) cfg.command = incodim::Command::Witness;
  if (sweep->parsed()) cfg.command = incodim::Command::Sweep;
  return incodim::run(cfg, std::cout, std::cerr);
}
