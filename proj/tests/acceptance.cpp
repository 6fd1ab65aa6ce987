// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <set>
#include <string>

#include "incodim/qubit_mub.hpp"
#include "incodim/witness.hpp"
#include "test_util.hpp"

using namespace incodim;
using namespace incodim::testing;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool ok = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int failures = 0;
std::set<int> selected;  // empty: all

constexpr double kNoLimit = 0.0;

void criterion(int n, const char* title, double limit_s, const std::function<Verdict()>& body) {
  if (!selected.empty() && !selected.count(n)) return;
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = limit_s == kNoLimit || secs < limit_s;
  const bool ok = v.ok && in_time;
  failures += ok ? 0 : 1;
  std::string timing = fmt("%.2fs", secs);
  if (limit_s != kNoLimit) timing += fmt(in_time ? " (limit %.0fs)" : " (limit %.0fs exceeded)", limit_s);
  std::printf("%s %2d %s: %s; %s\n", ok ? "PASS" : "FAIL", n, title, v.detail.c_str(), timing.c_str());
  std::fflush(stdout);
}

bool mub_busch(double t) { return busch_compatible({t, 0, 0}, {0, t, 0}); }

// Near-identity channel: unitary after partial depolarization.
KrausChannel noisy_unitary(std::size_t d, double p, Rng& rng) {
  const Matrix u = random_unitary(d, rng);
  std::vector<Matrix> ks;
  const KrausChannel dep = KrausChannel::depolarizing(d, p);
  for (const auto& k : dep.kraus()) ks.push_back(u * k);
  return KrausChannel(std::move(ks));
}

FeasibilityStatus oracle(const std::vector<Observable>& obs, const std::vector<State>& s0) {
  return joint_feasible(FeasibilityProblem(obs, s0)).status;
}

}  // namespace

// Optional arguments pick criteria by number.
int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  criterion(1, "Busch boundary on the MUB family", 1.0, [] {
    Verdict v;
    v.ok = mub_busch(kInvSqrt2 - 1e-6) && !mub_busch(kInvSqrt2 + 1e-6);
    int mismatches = 0;
    for (int k = 0; k < 10000; ++k) {
      const double t = k / 9999.0;
      const bool exact = 2.0 * std::sqrt(2.0) * t <= 2.0;
      mismatches += mub_busch(t) != exact;
      mismatches += binary_pair_compatible(BinaryQubitObservable(0, {t, 0, 0}), BinaryQubitObservable(0, {0, t, 0})) != exact;
    }
    v.ok = v.ok && mismatches == 0;
    v.detail = "flip between 1/sqrt2 -+ 1e-6, " + std::to_string(mismatches) + " mismatches on 10^4 points";
    return v;
  });

  criterion(2, "oracle agrees with the closed form on 1000 random unbiased pairs", 120.0, [] {
    Rng rng(2024);
    int done = 0, disagree = 0, feasible = 0;
    long iters = 0;
    while (done < 1000) {
      const Vec3 a = random_in_ball(rng), b = random_in_ball(rng);
      const Vec3 s{a[0] + b[0], a[1] + b[1], a[2] + b[2]}, d{a[0] - b[0], a[1] - b[1], a[2] - b[2]};
      if (std::abs(norm(s) + norm(d) - 2.0) <= 1e-3) continue;
      ++done;
      const auto r = joint_feasible(FeasibilityProblem({unbiased_qubit_observable(a), unbiased_qubit_observable(b)}));
      iters += r.iterations;
      const bool f = r.status == FeasibilityStatus::Feasible;
      feasible += f;
      disagree += (r.status == FeasibilityStatus::Ambiguous) || f != busch_compatible(a, b);
    }
    return Verdict{disagree == 0, std::to_string(disagree) + " disagreements (" + std::to_string(feasible) +
                                      " compatible, mean " + std::to_string(iters / 1000) + " iterations)"};
  });

  criterion(3, "pq detector infeasible at d = 2, 3 and chi_incomp = 2 at t = 1", 10.0, [] {
    bool ok = true;
    const Effect p2(HermitianOp::qubit(1, {0, 0, 1})), q2(HermitianOp::qubit(1, {1, 0, 0}));
    ok = ok && oracle({binary_from(p2), binary_from(q2)}, pq_detector(p2, q2).states()) == FeasibilityStatus::Infeasible;
    Rng rng(3);
    for (int i = 0; i < 5; ++i) {
      const Effect p3(random_pure_state(3, rng).op()), q3(random_pure_state(3, rng).op());
      ok = ok && oracle({binary_from(p3), binary_from(q3)}, pq_detector(p3, q3).states()) == FeasibilityStatus::Infeasible;
    }
    const ChiBounds b = chi_bounds({mub_x(1), mub_y(1)});
    ok = ok && b.incomp.exact == 2 && chi_incomp_mub(1.0) == 2;
    return Verdict{ok, "d=2 sharp x/z pair and 5 random d=3 pairs infeasible; chi_incomp = 2 at t = 1"};
  });

  criterion(4, "fixed-marginal construction and chi_comp = 3", 1.0, [] {
    bool ok = true;
    double worst = 0.0;
    for (double t : {0.72, 0.85, 1.0}) {
      const Observable a = mub_x(t), b = mub_y(t);
      const Observable g = fixed_marginal_construction(a, b, state_from_bloch({0, 0, 0}));
      std::vector<HermitianOp> ops;
      for (const auto& e : g.effects()) ops.push_back(e.op());
      worst = std::max(worst, max_abs_diff(ops[0] + ops[2], b.effect(0).op()));
      worst = std::max(worst, max_abs_diff(ops[1] + ops[3], b.effect(1).op()));
      const FeasibilityProblem plane({a, b}, {state_from_bloch({0, 0.4, 0.3}), state_from_bloch({0, -0.6, 0.1}),
                                              state_from_bloch({0, 0.1, -0.9})});
      worst = std::max(worst, marginal_residual(plane, ops));
      ok = ok && affine_dimension(plane.states()) == 2;
      ok = ok && chi_bounds({a, b}).comp.exact == 3;
    }
    ok = ok && worst <= 1e-10;
    return Verdict{ok, fmt("marginal identity error %.1e; chi_comp = 3 at t = 0.72, 0.85, 1", worst)};
  });

  criterion(5, "analytic anchors of the xi-range limits", kNoLimit, [] {
    const double e1 = std::abs(Xi1_limit(kPi / 4) + kPi / 4);
    const double e2 = std::abs(Xi1_limit(kPi / 2 - 1e-9) + std::acos(2.0 * std::sqrt(2.0) / 3.0));
    double worst_sum = -INFINITY;
    for (double p = 1e-3; p < kPi / 2 - 1e-4; p += 1e-3) worst_sum = std::max(worst_sum, Xi1_limit(p) + Xi1_limit(kPi / 2 - p));
    int violations = 0;
    for (int i = 0; i < 200; ++i) {
      const double p = (i + 0.5) * (kPi / 2) / 200;
      double prev = INFINITY;
      for (int j = 0; j < 200; ++j) {
        const double q = (j + 0.5) * (kPi / 2) / 200;
        const double cur = xi_range_first(kInvSqrt2, p, q).xi_min;
        violations += !(cur < prev);
        prev = cur;
      }
    }
    const bool ok = e1 < 1e-9 && e2 < 1e-6 && worst_sum <= -kPi / 2 + 1e-9 && violations == 0;
    char buf[256];
    std::snprintf(buf, sizeof buf, "|Xi(pi/4)+pi/4| = %.1e, endpoint error %.1e, max sum + pi/2 = %.1e, %d monotonicity violations",
                  e1, e2, worst_sum + kPi / 2, violations);
    return Verdict{ok, buf};
  });

  criterion(6, "xi-root residuals on 10^4 random parameters", 5.0, [] {
    Rng rng(6);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double t = rng.uniform(1e-3, 1.0), p = rng.uniform(1e-3, kPi / 2 - 1e-3), q = rng.uniform(1e-3, kPi / 2 - 1e-3);
      const XiRange r = xi_range_first(t, p, q);
      const CW lo = c_and_w(t, p, q, r.xi_min), hi = c_and_w(t, p, q, r.xi_max);
      worst = std::max({worst, std::abs(1 - lo.w - lo.c), std::abs(1 + hi.w - hi.c)});
    }
    return Verdict{worst < 1e-10, fmt("max residual %.2e", worst)};
  });

  criterion(7, "threshold t0 and its grid stability", 600.0, [] {
    MubSearchOptions o64;
    const ThresholdResult a = find_threshold(1e-3, o64);
    const int below = chi_incomp_mub(a.t0 - 1e-2, o64), above = chi_incomp_mub(a.t0 + 1e-2, o64);
    MubSearchOptions o128;
    o128.grid_n = 128;
    const ThresholdResult b = find_threshold(1e-3, o128, std::make_pair(a.t0 - 0.02, a.t0 + 0.02));
    const bool ok = a.t0 > kInvSqrt2 && a.t0 < 1.0 && below == 3 && above == 2 && std::abs(a.t0 - b.t0) <= 2e-3;
    char buf[256];
    std::snprintf(buf, sizeof buf, "t0 = %.5f (grid 64), %.5f (grid 128); chi(t0-0.01) = %d, chi(t0+0.01) = %d", a.t0, b.t0,
                  below, above);
    return Verdict{ok, buf};
  });

  criterion(8, "xi and lambda parameterizations coincide on 500 segments", kNoLimit, [] {
    Rng rng(8);
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
      const double t = rng.uniform(0.72, 0.999), p = rng.uniform(0.01, kPi / 2 - 0.01), q = rng.uniform(0.01, kPi / 2 - 0.01);
      const Segment s(t, p, q);
      for (int axis = 0; axis < 2; ++axis) {
        const LambdaFamily f = lambda_family(t, s.r1(), s.r2(), axis);
        const XiRange r = axis == 0 ? xi_range_first(t, p, q) : xi_range_second(t, p, q);
        const double pe = axis == 0 ? p : kPi / 2 - p;
        auto wm = [&](double xi) {
          const CW cw = c_and_w(t, pe, q, xi);
          return axis == 0 ? Vec3{cw.w, cw.c * std::cos(xi), cw.c * std::sin(xi)} : Vec3{cw.w, cw.c * std::sin(xi), cw.c * std::cos(xi)};
        };
        auto gap = [&](const Vec3& x, double lam) {
          const Vec3 c = f.coefficients(lam);
          return std::max({std::abs(x[0] - (c[0] - 1.0)), std::abs(x[1] - c[1]), std::abs(x[2] - c[2])});
        };
        // endpoints: xi_min <-> lambda_hi, xi_max <-> lambda_lo
        worst = std::max(worst, gap(wm(r.xi_min), f.lambda_hi));
        worst = std::max(worst, gap(wm(r.xi_max), f.lambda_lo));
        for (int k = 1; k < 8; ++k) {
          const Vec3 x = wm(r.xi_min + k / 8.0 * (r.xi_max - r.xi_min));
          worst = std::max(worst, gap(x, x[0]));
        }
      }
    }
    return Verdict{worst < 1e-9, fmt("max (w, m) mismatch %.2e", worst)};
  });

  criterion(9, "witness normalization", kNoLimit, [] {
    Rng rng(9);
    double value_err = 0.0, constraint = 0.0;
    std::size_t max_dim = 0;
    for (int i = 0; i < 10; ++i) {
      RawWitness raw;
      raw.delta = rng.uniform(-1, 1);
      raw.operators.assign(2, {});
      for (auto& row : raw.operators)
        for (int x = 0; x < 2; ++x) row.emplace_back(random_hermitian(2, rng));
      const StateFormWitness w = normalize(raw, {2, 2});
      constraint = std::max(constraint, witness_constraint_residual(w));
      max_dim = std::max(max_dim, detected_subset(w).affine_dim());
      for (int k = 0; k < 100; ++k) {
        const std::vector<Observable> tuple{random_observable(2, 2, rng), random_observable(2, 2, rng)};
        value_err = std::max(value_err, std::abs(evaluate(w, tuple) - evaluate(raw, tuple)));
      }
    }
    const bool ok = value_err < 1e-9 && constraint < 1e-9 && max_dim <= 2;
    char buf[256];
    std::snprintf(buf, sizeof buf, "value drift %.1e, constraint residual %.1e, induced affine dim <= %zu (bound 2)", value_err,
                  constraint, max_dim);
    return Verdict{ok, buf};
  });

  criterion(10, "soundness of searched witnesses", kNoLimit, [] {
    Rng rng(10);
    int returned = 0, sound = 0;
    for (int i = 0; i < 20; ++i) {
      std::vector<Observable> obs;
      StateSubset subset;
      if (i % 2 == 0) {
        const std::size_t d = 2 + (i / 2) % 2;
        const Effect p(random_pure_state(d, rng).op()), q(random_pure_state(d, rng).op());
        obs = {binary_from(p), binary_from(q)};
        subset = pq_detector(p, q);
      } else {
        const double t = rng.uniform(0.9, 1.0);
        const Segment s = chi_incomp_mub_search(t).best;
        obs = {mub_x(t), mub_y(t)};
        subset = StateSubset({state_from_bloch({s.r1()[0], s.r1()[1], 0}), state_from_bloch({s.r2()[0], s.r2()[1], 0})});
      }
      WitnessSearchOptions o;
      o.seed = static_cast<std::uint64_t>(i);
      const WitnessSearchResult r = search_witness(obs, subset, o);
      if (r.verification.input_value < -1e-6) {
        ++returned;
        sound += oracle(obs, detected_subset(r.witness).states()) == FeasibilityStatus::Infeasible;
      }
    }
    return Verdict{returned == 20 && sound == 20, std::to_string(sound) + "/" + std::to_string(returned) +
                                                      " detected subsets infeasible (20 searched)"};
  });

  criterion(11, "post- and pre-processing monotonicity", kNoLimit, [] {
    Rng rng(11);
    int premises = 0, violations = 0;
    for (int i = 0; i < 200; ++i) {
      const double t = rng.uniform(0.8, 1.0);
      const Vec3 u = random_unit_vector(rng), v = random_unit_vector(rng);
      const Observable a = unbiased_qubit_observable({t * u[0], t * u[1], t * u[2]});
      const Observable b = unbiased_qubit_observable({t * v[0], t * v[1], t * v[2]});
      std::vector<State> s0{random_pure_state(2, rng), random_pure_state(2, rng)};
      if (i % 4 < 2) s0.insert(s0.end(), {random_pure_state(2, rng), random_pure_state(2, rng)});
      if (i % 2 == 0) {
        const double e1 = rng.uniform(0, 0.1), e2 = rng.uniform(0, 0.1);
        const Observable pa = post_process(a, StochasticMatrix(2, 2, {1 - e1, e1, e1, 1 - e1}));
        const Observable pb = post_process(b, random_stochastic(2, 2, rng) * StochasticMatrix(2, 2, {1 - e2, e2, e2, 1 - e2}));
        if (oracle({pa, pb}, s0) == FeasibilityStatus::Infeasible) {
          ++premises;
          violations += oracle({a, b}, s0) != FeasibilityStatus::Infeasible;
        }
      } else {
        const KrausChannel lam = noisy_unitary(2, rng.uniform(0.85, 1.0), rng);
        if (oracle({pre_process(a, lam), pre_process(b, lam)}, s0) == FeasibilityStatus::Infeasible) {
          ++premises;
          std::vector<State> image;
          for (const auto& s : s0) image.emplace_back(lam.apply(s.op()), 1e-10);
          violations += oracle({a, b}, image) != FeasibilityStatus::Infeasible;
        }
      }
    }
    return Verdict{violations == 0 && premises > 0,
                   std::to_string(violations) + " violations over " + std::to_string(premises) + " infeasible premises"};
  });

  return failures == 0 ? 0 : 1;
}
