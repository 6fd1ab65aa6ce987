#include "incodim/witness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "incodim/random.hpp"

namespace incodim {

namespace {

void check_shape(std::size_t n, const std::vector<std::size_t>& m, const std::vector<Observable>& obs) {
  if (obs.size() != n) throw Error(ErrorCode::ShapeMismatch, "observable count differs from witness");
  for (std::size_t j = 0; j < n; ++j)
    if (obs[j].size() != m[j]) {
      std::ostringstream os;
      os << "observable " << j << " has " << obs[j].size() << " outcomes, witness expects " << m[j];
      throw Error(ErrorCode::ShapeMismatch, os.str());
    }
}

std::vector<std::size_t> shape_of(const StateFormWitness& w) {
  std::vector<std::size_t> m;
  for (const auto& c : w.coeffs) m.push_back(c.size());
  return m;
}

std::size_t witness_dim(const StateFormWitness& w) {
  for (const auto& row : w.states)
    if (!row.empty()) return row.front().dim();
  return 0;
}

}  // namespace

double evaluate(const StateFormWitness& w, const std::vector<Observable>& observables) {
  if (w.states.size() != w.coeffs.size()) throw Error(ErrorCode::ShapeMismatch, "coeffs and states differ in shape");
  for (std::size_t j = 0; j < w.coeffs.size(); ++j)
    if (w.states[j].size() != w.coeffs[j].size()) throw Error(ErrorCode::ShapeMismatch, "coeffs and states differ in shape");
  check_shape(w.coeffs.size(), shape_of(w), observables);
  double v = w.delta;
  for (std::size_t j = 0; j < w.coeffs.size(); ++j)
    for (std::size_t x = 0; x < w.coeffs[j].size(); ++x) {
      if (w.states[j][x].dim() != observables[j].dim()) throw Error(ErrorCode::ShapeMismatch, "dimension differs");
      v -= w.coeffs[j][x] * hs_inner(w.states[j][x].op(), observables[j].effect(x).op());
    }
  return v;
}

double evaluate(const RawWitness& w, const std::vector<Observable>& observables) {
  std::vector<std::size_t> m;
  for (const auto& row : w.operators) m.push_back(row.size());
  check_shape(w.operators.size(), m, observables);
  double v = w.delta;
  for (std::size_t j = 0; j < w.operators.size(); ++j)
    for (std::size_t x = 0; x < w.operators[j].size(); ++x) {
      if (w.operators[j][x].dim() != observables[j].dim()) throw Error(ErrorCode::ShapeMismatch, "dimension differs");
      v -= hs_inner(w.operators[j][x], observables[j].effect(x).op());
    }
  return v;
}

StateSubset detected_subset(const StateFormWitness& w) {
  std::vector<State> out;
  for (const auto& row : w.states)
    for (const auto& s : row) {
      const bool seen = std::any_of(out.begin(), out.end(), [&](const State& o) { return max_abs_diff(o.op(), s.op()) <= 1e-10; });
      if (!seen) out.push_back(s);
    }
  return StateSubset(std::move(out));
}

StateFormWitness normalize(const RawWitness& raw, const std::vector<std::size_t>& shape) {
  if (raw.operators.size() != shape.size()) throw Error(ErrorCode::ShapeMismatch, "witness shape");
  std::size_t d = 0;
  for (std::size_t j = 0; j < shape.size(); ++j) {
    if (raw.operators[j].size() != shape[j] || shape[j] == 0) throw Error(ErrorCode::ShapeMismatch, "witness shape");
    for (const auto& f : raw.operators[j]) {
      if (d == 0) d = f.dim();
      if (f.dim() != d) throw Error(ErrorCode::ShapeMismatch, "operators of different dimension");
    }
  }
  const double dd = static_cast<double>(d);
  const HermitianOp id = HermitianOp::identity(d);

  StateFormWitness out;
  out.delta = raw.delta;
  for (std::size_t j = 0; j < shape.size(); ++j) {
    const double m = static_cast<double>(shape[j]);
    // eps: traceless in total; T: centred (sum over x vanishes); alpha: PSD lift.
    double tr_sum = 0.0;
    for (const auto& f : raw.operators[j]) tr_sum += f.trace();
    const double eps = -tr_sum / (dd * m);
    std::vector<HermitianOp> f2;
    HermitianOp sum(d);
    for (const auto& f : raw.operators[j]) {
      f2.push_back(f + eps * id);
      sum += f2.back();
    }
    const HermitianOp t = (-1.0 / m) * sum;
    double lo = 0.0;
    for (auto& f : f2) {
      f += t;
      lo = std::min(lo, min_eigenvalue(f));
    }
    double alpha = -lo + 1e-12;

    std::vector<double> c;
    std::vector<State> rho;
    for (int attempt = 0;; ++attempt) {
      c.clear();
      rho.clear();
      bool degenerate = false;
      for (const auto& f : f2) {
        const HermitianOp g = f + alpha * id;
        const double tr = g.trace();
        if (tr < 1e-12) {
          degenerate = true;
          break;
        }
        c.push_back(tr);
        rho.emplace_back((1.0 / tr) * g, 1e-9);
      }
      if (!degenerate) break;
      if (attempt == 1) throw Error(ErrorCode::DegenerateBlock, "tr G_j(x) < 1e-12 after perturbing alpha");
      alpha += 1e-9;
    }
    out.delta += dd * (eps + alpha);
    out.coeffs.push_back(std::move(c));
    out.states.push_back(std::move(rho));
  }
  return out;
}

double witness_constraint_residual(const StateFormWitness& w) {
  const std::size_t d = witness_dim(w);
  double worst = 0.0;
  for (std::size_t j = 0; j < w.coeffs.size(); ++j) {
    HermitianOp s(d);
    for (std::size_t x = 0; x < w.coeffs[j].size(); ++x) s += w.coeffs[j][x] * w.states[j][x].op();
    const HermitianOp scalar = (s.trace() / static_cast<double>(d)) * HermitianOp::identity(d);
    worst = std::max(worst, max_abs_diff(s, scalar));
  }
  return worst;
}

RawWitness to_raw(const StateFormWitness& w) {
  RawWitness r;
  r.delta = w.delta;
  for (std::size_t j = 0; j < w.coeffs.size(); ++j) {
    r.operators.emplace_back();
    for (std::size_t x = 0; x < w.coeffs[j].size(); ++x) r.operators.back().push_back(w.coeffs[j][x] * w.states[j][x].op());
  }
  return r;
}

// ---- verification ---------------------------------------------------------------

WitnessVerification verify_witness(const StateFormWitness& w, const std::vector<Observable>& observables, int starts,
                                   int steps, std::uint64_t seed) {
  if (starts < 1 || steps < 1) throw Error(ErrorCode::ParamOutOfRange, "starts and steps must be positive");
  WitnessVerification v;
  v.input_value = evaluate(w, observables);
  v.starts = starts;

  const std::size_t d = witness_dim(w);
  const std::size_t n = w.coeffs.size();
  std::size_t kk = 1;
  for (const auto& c : w.coeffs) kk *= c.size();
  if (kk > FeasibilityProblem::kMaxOutcomes) throw Error(ErrorCode::TooLarge, "product outcome count exceeds 4096");

  // W_k = sum_j c_{j,x_j(k)} rho_{j,x_j(k)}, last observable fastest
  std::vector<HermitianOp> wk(kk, HermitianOp(d));
  double wnorm = 0.0;
  for (std::size_t k = 0; k < kk; ++k) {
    std::size_t rest = k;
    for (std::size_t j = n; j-- > 0;) {
      const std::size_t x = rest % w.coeffs[j].size();
      rest /= w.coeffs[j].size();
      wk[k] += w.coeffs[j][x] * w.states[j][x].op();
    }
    wnorm = std::max(wnorm, frobenius_norm(wk[k]));
  }
  auto functional = [&](const std::vector<HermitianOp>& g) {
    double s = 0.0;
    for (std::size_t k = 0; k < kk; ++k) s += hs_inner(wk[k], g[k]);
    return s;
  };

  const Rng base(seed);
  double best = -INFINITY;
  for (int s = 0; s < starts; ++s) {
    Rng rng = base.split(static_cast<std::uint64_t>(s));
    std::vector<HermitianOp> g;
    const Observable start = random_observable(d, kk, rng);
    for (const auto& e : start.effects()) g.push_back(e.op());
    double f = functional(g);
    double eta = wnorm > 0.0 ? 1.0 / wnorm : 1.0;
    int flat = 0;
    for (int it = 0; it < steps && flat < 20; ++it) {
      std::vector<HermitianOp> y = g;
      for (std::size_t k = 0; k < kk; ++k) y[k] += eta * wk[k];
      std::vector<HermitianOp> next = project_onto_povms(y);
      const double fn = functional(next);
      if (fn < f - 1e-13) {
        eta *= 0.5;
        ++flat;
        continue;
      }
      flat = (fn - f <= 1e-13) ? flat + 1 : 0;
      g = std::move(next);
      f = fn;
    }
    best = std::max(best, f);
  }
  v.max_functional = best;
  v.min_compatible_value = w.delta - best;
  return v;
}

// ---- search ---------------------------------------------------------------------------

namespace {

// Witness read off a Farkas certificate of the oracle. For every joint observable G,
//   sum_j sum_x tr[F_j(x) B_j(x)] = sum_k tr[(N_k - M) G_k] <= d eps - tr M,
// with F_j(x) = sum_l lambda[j][x][l] rho_l and B_j the marginals of G, so
// delta = d eps - tr M makes the witness nonnegative on compatible tuples.
StateFormWitness witness_from_certificate(const InfeasibilityCertificate& cert, const std::vector<State>& states,
                                          std::size_t d) {
  StateFormWitness w;
  w.delta = static_cast<double>(d) * cert.max_positive_eig - cert.normalization.trace();
  const std::size_t ns = states.size();
  for (const auto& per_x : cert.lambda) {
    // adding kappa to lambda[.][l] for every x adds kappa to the functional, so shift to nonnegative
    std::vector<double> kappa(ns, 0.0);
    for (std::size_t l = 0; l < ns; ++l) {
      double lo = INFINITY;
      for (const auto& lam : per_x) lo = std::min(lo, lam[l]);
      kappa[l] = -lo;
      w.delta += kappa[l];
    }
    std::vector<double> c;
    std::vector<State> rho;
    for (const auto& lam : per_x) {
      double total = 0.0;
      HermitianOp mix(d);
      for (std::size_t l = 0; l < ns; ++l) {
        const double a = lam[l] + kappa[l];
        total += a;
        mix += a * states[l].op();
      }
      if (total <= 0.0) {
        c.push_back(0.0);
        rho.push_back(states.front());
      } else {
        c.push_back(total);
        rho.emplace_back((1.0 / total) * mix, 1e-9);
      }
    }
    w.coeffs.push_back(std::move(c));
    w.states.push_back(std::move(rho));
  }

  double scale = 0.0;
  for (const auto& row : w.coeffs)
    for (double c : row) scale = std::max(scale, std::abs(c));
  if (scale > 0.0) {
    w.delta /= scale;
    for (auto& row : w.coeffs)
      for (double& c : row) c /= scale;
  }
  return w;
}

constexpr double kDetect = -1e-6;

}  // namespace

WitnessSearchResult search_witness(const std::vector<Observable>& observables, const StateSubset& subset,
                                   const WitnessSearchOptions& opts) {
  if (opts.starts < 1 || opts.steps < 1) throw Error(ErrorCode::ParamOutOfRange, "starts and steps must be positive");
  if (subset.size() == 0) throw Error(ErrorCode::EmptySet, "empty subset");
  const FeasibilityProblem problem(observables, subset.states());
  const FeasibilityResult r = joint_feasible(problem, opts.solver);
  if (r.status == FeasibilityStatus::Feasible)
    throw Error(ErrorCode::PreconditionViolated, "observables are compatible on the subset");
  if (r.status == FeasibilityStatus::Ambiguous) throw Error(ErrorCode::NotFound, "oracle is ambiguous on the subset");
  if (!r.certificate) throw Error(ErrorCode::NotFound, "oracle stalled without a certificate");

  WitnessSearchResult out;
  out.oracle_iterations = r.iterations;
  out.witness = witness_from_certificate(*r.certificate, subset.states(), problem.dim());
  out.verification = verify_witness(out.witness, observables, opts.starts, opts.steps, opts.seed);

  // one cutting-plane step on delta if the verifier found a compatible tuple below zero
  if (out.verification.min_compatible_value < kDetect) {
    out.witness.delta = out.verification.max_functional;
    out.verification = verify_witness(out.witness, observables, opts.starts, opts.steps, opts.seed);
  }
  if (out.verification.min_compatible_value < kDetect)
    throw Error(ErrorCode::NotFound, "verifier found compatible tuples below zero");
  if (!(out.verification.input_value < kDetect)) throw Error(ErrorCode::NotFound, "witness does not detect the input tuple");
  return out;
}

}  // namespace incodim
