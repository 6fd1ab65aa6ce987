#include "incodim/commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <spdlog/spdlog.h>

namespace incodim {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

json header(const char* command, const RunConfig& cfg) {
  return {{"command", command}, {"tolerances", tolerances_to_json(cfg.solver)}, {"seed", cfg.seed}};
}

ProblemInput resolve_input(const RunConfig& cfg) {
  if (cfg.input_path && cfg.t) throw Error(ErrorCode::ParseError, "--input and --t are exclusive");
  if (cfg.input_path) return load_problem(*cfg.input_path);
  if (cfg.t) return parse_problem({{"bloch", {{"t", *cfg.t}}}});
  throw Error(ErrorCode::ParseError, "an --input file or --t is required");
}

double mub_t(const RunConfig& cfg) {
  if (!cfg.t) throw Error(ErrorCode::ParseError, "--t is required");
  return *cfg.t;
}

MubSearchOptions mub_options(const RunConfig& cfg) {
  MubSearchOptions o;
  o.grid_n = cfg.grid_n;
  o.threads = cfg.threads;
  return o;
}

json bounds_json(const DimensionBounds& b) {
  json j{{"lower", b.lower}, {"upper", b.upper}};
  j["exact"] = b.exact ? json(*b.exact) : json(nullptr);
  return j;
}

std::vector<State> subset_states(const ProblemInput& in) {
  if (in.pq_subset) {
    if (in.observables.size() != 2) throw Error(ErrorCode::PreconditionViolated, "pq_detector needs two observables");
    for (std::size_t x = 0; x < in.observables[0].size(); ++x)
      for (std::size_t y = 0; y < in.observables[1].size(); ++y) {
        const Effect& p = in.observables[0].effect(x);
        const Effect& q = in.observables[1].effect(y);
        if (is_rank_one_projection(p.op()) && is_rank_one_projection(q.op())) return pq_detector(p, q).states();
      }
    throw Error(ErrorCode::PreconditionViolated, "pq_detector needs a rank-1 projection in each observable");
  }
  if (in.states) return *in.states;
  return {};
}

}  // namespace

void RunConfig::validate() const {
  if (grid_n < 16) throw Error(ErrorCode::ParseError, "--grid must be at least 16");
  if (threads < 1) throw Error(ErrorCode::ParseError, "--threads must be at least 1");
  if (format != "json" && format != "csv") throw Error(ErrorCode::ParseError, "--format must be json or csv");
  if (starts < 1 || steps < 1) throw Error(ErrorCode::ParseError, "--starts and --steps must be positive");
  if (!(solver.tol_marginal > 0 && solver.tol_psd > 0 && solver.tol_gap > 0 && solver.max_iter > 0))
    throw Error(ErrorCode::ParseError, "tolerances and --max-iter must be positive");
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::ParseError:
      return kExitParse;
    case ErrorCode::PreconditionViolated:
    case ErrorCode::ParamOutOfRange:
    case ErrorCode::CompatiblePair:
    case ErrorCode::NotIncompatible:
    case ErrorCode::CommutingProjections:
    case ErrorCode::TooLarge:
      return kExitPrecondition;
    case ErrorCode::NotFound:
      return kExitNotFound;
    case ErrorCode::Ambiguous:
    case ErrorCode::NonConvergent:
    case ErrorCode::NonMonotoneWitness:
      return kExitAmbiguous;
    default:
      return kExitError;
  }
}

json cmd_check_compat(const ProblemInput& in, const RunConfig& cfg) {
  json r = header("check-compat", cfg);
  if (in.bloch && !in.states && !in.pq_subset) {
    const BinaryQubitObservable a = in.bloch->first(), b = in.bloch->second();
    if (a.w == 0.0 && b.w == 0.0) {
      const Vec3 s{a.m[0] + b.m[0], a.m[1] + b.m[1], a.m[2] + b.m[2]};
      const Vec3 d{a.m[0] - b.m[0], a.m[1] - b.m[1], a.m[2] - b.m[2]};
      r["compatible"] = busch_compatible(a.m, b.m);
      r["method"] = "busch";
      r["residual"] = norm(s) + norm(d) - 2.0;
    } else {
      const double slack = binary_pair_slack(a, b);
      r["compatible"] = slack >= -1e-12;
      r["method"] = "pair-criterion";
      r["residual"] = slack;
    }
    return r;
  }
  const FeasibilityResult f = joint_feasible(FeasibilityProblem(in.observables, subset_states(in)), cfg.solver);
  spdlog::debug("oracle: {} after {} iterations, gap {}", to_string(f.status), f.iterations, f.gap);
  if (f.status == FeasibilityStatus::Ambiguous) throw Error(ErrorCode::Ambiguous, "oracle gap below tol_gap without feasibility");
  r["compatible"] = f.status == FeasibilityStatus::Feasible;
  r["method"] = "oracle";
  r["residual"] = f.residual;
  r["iterations"] = f.iterations;
  return r;
}

json cmd_chi(const ProblemInput& in, const RunConfig& cfg) {
  json r = header("chi", cfg);
  if (in.is_mub_pair()) {
    const double t = in.bloch->t;
    r["t"] = t;
    if (t <= kInvSqrt2) {
      r["chi_incomp"] = "undefined";
      r["chi_comp"] = "undefined";
      return r;
    }
    const ChiBounds b = chi_bounds(in.observables, cfg.solver);
    const ChiMubResult m = chi_incomp_mub_search(t, mub_options(cfg));
    r["chi_incomp"] = m.chi;
    r["chi_comp"] = b.comp.exact ? json(*b.comp.exact) : bounds_json(b.comp);
    r["grid_n"] = m.grid_n;
    r["margin"] = m.margin;
    r["best_segment"] = {{"phi0", m.best.phi0}, {"psi0", m.best.psi0}};
    r["certificates"] = b.certificates;
    return r;
  }
  try {
    const ChiBounds b = chi_bounds(in.observables, cfg.solver);
    r["chi_incomp"] = bounds_json(b.incomp);
    r["chi_comp"] = bounds_json(b.comp);
    r["certificates"] = b.certificates;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotIncompatible) throw;
    r["chi_incomp"] = "undefined";
    r["chi_comp"] = "undefined";
  }
  return r;
}

json cmd_threshold(const RunConfig& cfg) {
  const ThresholdResult th = find_threshold(cfg.tol, mub_options(cfg));
  const std::string csv = (cfg.output_path ? *cfg.output_path : std::string("threshold")) + ".sweep.csv";
  {
    std::ofstream os(csv);
    if (!os) throw Error(ErrorCode::ParseError, csv + ": cannot write");
    write_sweep_csv(os, sweep_rows(th.t0, cfg.grid_n, cfg.threads));
  }
  json r = header("threshold", cfg);
  r["t0"] = th.t0;
  r["tol"] = th.tol;
  r["grid_n"] = th.grid_n;
  r["sweep_artifact_path"] = csv;
  json ev = json::array();
  for (const auto& [t, c] : th.evaluations) ev.push_back({{"t", t}, {"chi", c}});
  r["evaluations"] = std::move(ev);
  return r;
}

json cmd_witness(const ProblemInput& in, const RunConfig& cfg) {
  std::vector<State> states = subset_states(in);
  if (states.empty()) states = spanning_states(in.observables[0].dim());
  WitnessSearchOptions o;
  o.starts = cfg.starts;
  o.steps = cfg.steps;
  o.seed = cfg.seed;
  o.solver = cfg.solver;
  const WitnessSearchResult w = search_witness(in.observables, StateSubset(states), o);
  json r = header("witness", cfg);
  r["witness"] = witness_to_json(w.witness);
  r["verification"] = {{"input_value", w.verification.input_value},
                       {"max_functional", w.verification.max_functional},
                       {"min_compatible_value", w.verification.min_compatible_value},
                       {"starts", w.verification.starts},
                       {"steps", cfg.steps}};
  r["detected_subset_affine_dim"] = detected_subset(w.witness).affine_dim();
  return r;
}

std::vector<SweepRow> cmd_sweep(const RunConfig& cfg) { return sweep_rows(mub_t(cfg), cfg.grid_n, cfg.threads); }

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    std::string text;
    if (cfg.command == Command::Sweep) {
      const auto rows = cmd_sweep(cfg);
      std::ostringstream os;
      if (cfg.format == "csv") {
        write_sweep_csv(os, rows);
      } else {
        json r = header("sweep", cfg);
        r["grid_n"] = cfg.grid_n;
        r["rows"] = sweep_to_json(rows);
        os << r.dump(2) << "\n";
      }
      text = os.str();
    } else {
      if (cfg.format == "csv") throw Error(ErrorCode::ParseError, "--format csv applies to sweep only");
      json r;
      switch (cfg.command) {
        case Command::CheckCompat:
          r = cmd_check_compat(resolve_input(cfg), cfg);
          break;
        case Command::Chi:
          r = cmd_chi(resolve_input(cfg), cfg);
          break;
        case Command::Threshold:
          r = cmd_threshold(cfg);
          break;
        case Command::Witness:
          r = cmd_witness(resolve_input(cfg), cfg);
          break;
        case Command::Sweep:
          break;
      }
      text = r.dump(2) + "\n";
    }
    if (cfg.output_path) {
      std::ofstream os(*cfg.output_path);
      if (!os) throw Error(ErrorCode::ParseError, *cfg.output_path + ": cannot write");
      os << text;
    } else {
      out << text;
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "incodim: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
}

}  // namespace incodim
