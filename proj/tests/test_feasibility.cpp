#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "test_util.hpp"

using namespace incodim;
using namespace incodim::testing;

namespace {

void check_joint_valid(const FeasibilityProblem& p, const FeasibilityResult& r) {
  REQUIRE(r.joint);
  const std::size_t d = p.dim();
  HermitianOp s(d);
  for (const auto& e : r.joint->effects()) {
    s += e.op();
    CHECK(min_eigenvalue(e.op()) >= -1e-10);
  }
  CHECK(max_abs_diff(s, HermitianOp::identity(d)) <= 1e-10);
  CHECK(marginal_residual(p, [&] {
          std::vector<HermitianOp> ops;
          for (const auto& e : r.joint->effects()) ops.push_back(e.op());
          return ops;
        }()) <= 1e-9);
}

FeasibilityStatus status_on(const std::vector<Observable>& obs, const std::vector<State>& states) {
  return joint_feasible(FeasibilityProblem(obs, states)).status;
}

}  // namespace

TEST_CASE("busch_compatible") {
  for (int k = 0; k <= 1000; ++k) {
    const double t = k * 1e-3;
    CHECK(busch_compatible({t, 0, 0}, {0, t, 0}) == (t <= kInvSqrt2));
  }
  CHECK(busch_compatible({0, 0, 0}, {0, 0.3, 0.95}));
  for (double r : {-1.0, -0.4, 0.0, 0.7, 1.0}) CHECK(busch_compatible({1, 0, 0}, {r, 0, 0}));
  CHECK_FALSE(busch_compatible({1, 0, 0}, {0, 0.1, 0}));
  CHECK_THROWS_AS(busch_compatible({1.1, 0, 0}, {0, 0, 0}), Error);
}

TEST_CASE("binary_pair_compatible reduces to the unbiased criterion") {
  for (int k = 0; k <= 1000; ++k) {
    const double t = k * 1e-3;
    const BinaryQubitObservable a(0.0, {t, 0, 0}), b(0.0, {0, t, 0});
    CHECK(binary_pair_compatible(a, b) == busch_compatible(a.m, b.m));
  }
}

TEST_CASE("binary_pair_compatible examples and symmetry") {
  Rng rng(12);
  for (int i = 0; i < 300; ++i) {
    const double w1 = rng.uniform(-0.9, 0.9), w2 = rng.uniform(-0.9, 0.9);
    const Vec3 u = random_unit_vector(rng);
    const double c1 = rng.uniform() * (1.0 - std::abs(w1)), c2 = rng.uniform() * (1.0 - std::abs(w2));
    const BinaryQubitObservable a(w1, {c1 * u[0], c1 * u[1], c1 * u[2]});
    const BinaryQubitObservable anti(w2, {-c2 * u[0], -c2 * u[1], -c2 * u[2]});
    CHECK(binary_pair_compatible(a, anti));
    CHECK(binary_pair_compatible(a, BinaryQubitObservable(w2, {0, 0, 0})));
    const Vec3 v = random_unit_vector(rng);
    const BinaryQubitObservable b(w2, {c2 * v[0], c2 * v[1], c2 * v[2]});
    CHECK(binary_pair_slack(a, b) == doctest::Approx(binary_pair_slack(b, a)).epsilon(1e-12));
  }
}

TEST_CASE("binary_pair_compatible agrees with the oracle on biased pairs") {
  Rng rng(13);
  int checked = 0;
  for (int i = 0; i < 400 && checked < 60; ++i) {
    const double w1 = rng.uniform(-0.5, 0.5), w2 = rng.uniform(-0.5, 0.5);
    const Vec3 u = random_unit_vector(rng), v = random_unit_vector(rng);
    const double c1 = rng.uniform(0.3, 1.0) * (1.0 - std::abs(w1)), c2 = rng.uniform(0.3, 1.0) * (1.0 - std::abs(w2));
    const BinaryQubitObservable a(w1, {c1 * u[0], c1 * u[1], c1 * u[2]}), b(w2, {c2 * v[0], c2 * v[1], c2 * v[2]});
    const double slack = binary_pair_slack(a, b);
    if (std::abs(slack) < 1e-3) continue;
    ++checked;
    const auto r = joint_feasible(FeasibilityProblem({a.to_observable(), b.to_observable()}));
    const auto st = r.status;
    INFO("slack " << slack << " w " << w1 << "," << w2 << " c " << c1 << "," << c2 << " iters " << r.iterations << " residual "
                  << r.residual << " gap " << r.gap);
    CHECK(st == (slack >= 0 ? FeasibilityStatus::Feasible : FeasibilityStatus::Infeasible));
  }
  CHECK(checked == 60);
}

TEST_CASE("channel_obs_threshold") {
  CHECK(channel_obs_threshold(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(channel_obs_threshold(1.0) == doctest::Approx(0.0));
  CHECK(channel_obs_threshold(0.5) == doctest::Approx(0.8090169943749475).epsilon(1e-14));
  CHECK_THROWS_AS(channel_obs_threshold(1.5), Error);
}

TEST_CASE("project_psd") {
  Rng rng(1);
  const State s = random_state(3, rng);
  CHECK(max_abs_diff(project_psd(s.op()), s.op()) < 1e-12);
  const HermitianOp h = project_psd(HermitianOp::pauli(1));
  CHECK(max_abs_diff(h, HermitianOp::qubit(1.0, {1, 0, 0})) < 1e-14);
  CHECK(max_abs_diff(project_psd(-1.0 * HermitianOp::identity(2)), HermitianOp(2)) == 0.0);
  const HermitianOp g = random_hermitian(4, rng);
  const HermitianOp p = project_psd(g);
  CHECK(max_abs_diff(project_psd(p), p) < 1e-12);
  CHECK(min_eigenvalue(p) >= -1e-12);
}

TEST_CASE("project_marginal_affine") {
  const std::vector<Observable> trivial{mub_x(0), mub_y(0)};
  const FeasibilityProblem p(trivial);
  const auto g = project_marginal_affine(std::vector<HermitianOp>(4, HermitianOp(2)), p);
  for (const auto& h : g) CHECK(max_abs_diff(h, 0.25 * HermitianOp::identity(2)) < 1e-12);

  Rng rng(6);
  const std::vector<Observable> obs{random_observable(2, 2, rng), random_observable(2, 2, rng)};
  const FeasibilityProblem single(obs, {state_from_bloch({0, 0, 0})});
  std::vector<HermitianOp> start;
  for (int k = 0; k < 4; ++k) start.emplace_back(random_hermitian(2, rng));
  const auto proj = project_marginal_affine(start, single);
  CHECK(marginal_residual(single, proj) < 1e-12);
  const auto again = project_marginal_affine(proj, single);
  for (std::size_t k = 0; k < 4; ++k) CHECK(max_abs_diff(again[k], proj[k]) < 1e-11);
  // the mixed state sees 1/2 tr[A(x)] on the first marginal
  const double m0 = 0.5 * (proj[0].trace() + proj[1].trace());
  CHECK(m0 == doctest::Approx(0.5 * obs[0].effect(0).op().trace()).epsilon(1e-12));
}

TEST_CASE("project_onto_povms returns a POVM") {
  Rng rng(9);
  std::vector<HermitianOp> g;
  for (int k = 0; k < 5; ++k) g.emplace_back(random_hermitian(3, rng));
  const auto p = project_onto_povms(g);
  HermitianOp s(3);
  for (const auto& h : p) {
    s += h;
    CHECK(min_eigenvalue(h) >= -1e-10);
  }
  CHECK(max_abs_diff(s, HermitianOp::identity(3)) < 1e-10);
}

TEST_CASE("joint_feasible examples") {
  SUBCASE("trivial pair on any subset") {
    Rng rng(2);
    const FeasibilityProblem p({mub_x(0), mub_y(0)}, {random_state(2, rng), random_state(2, rng)});
    const auto r = joint_feasible(p);
    REQUIRE(r.status == FeasibilityStatus::Feasible);
    check_joint_valid(p, r);
  }
  SUBCASE("sharp pair on the full space") {
    const auto r = joint_feasible(FeasibilityProblem({mub_x(1), mub_y(1)}));
    CHECK(r.status == FeasibilityStatus::Infeasible);
    CHECK(r.certificate.has_value());
  }
  SUBCASE("sharp pair on two commuting states") {
    const FeasibilityProblem p({mub_x(1), mub_y(1)}, {state_from_bloch({0, 0, 0}), state_from_bloch({0, 0, 1})});
    const auto r = joint_feasible(p);
    REQUIRE(r.status == FeasibilityStatus::Feasible);
    check_joint_valid(p, r);
    CHECK(r.joint->labels()[0] == "+,+");
  }
  SUBCASE("too many outcomes") {
    std::vector<Observable> many(13, mub_x(0.5));
    CHECK_THROWS_AS(FeasibilityProblem{many}, Error);
  }
}

TEST_CASE("oracle agrees with the unbiased criterion on random pairs") {
  Rng rng(10);
  int checked = 0;
  while (checked < 100) {
    const Vec3 a = random_in_ball(rng), b = random_in_ball(rng);
    const Vec3 s{a[0] + b[0], a[1] + b[1], a[2] + b[2]}, d{a[0] - b[0], a[1] - b[1], a[2] - b[2]};
    if (std::abs(norm(s) + norm(d) - 2.0) <= 1e-3) continue;
    ++checked;
    const auto r = joint_feasible(FeasibilityProblem({unbiased_qubit_observable(a), unbiased_qubit_observable(b)}));
    CHECK(r.status == (busch_compatible(a, b) ? FeasibilityStatus::Feasible : FeasibilityStatus::Infeasible));
  }
}

TEST_CASE("restriction monotonicity and affine-hull invariance") {
  Rng rng(14);
  for (int i = 0; i < 30; ++i) {
    const double t = rng.uniform(0.72, 1.0);
    const std::vector<Observable> obs{mub_x(t), mub_y(t)};
    std::vector<State> s0;
    const std::size_t n = 2 + rng.index(3);
    for (std::size_t k = 0; k < n; ++k) s0.push_back(random_state(2, rng));
    const auto full = status_on(obs, s0);
    if (full == FeasibilityStatus::Feasible) {
      std::vector<State> sub(s0.begin(), s0.begin() + 1 + static_cast<long>(rng.index(n - 1)));
      CHECK(status_on(obs, sub) == FeasibilityStatus::Feasible);
    }
    const double lam = rng.uniform();
    std::vector<State> hull = s0;
    hull.emplace_back(lam * s0[0].op() + (1.0 - lam) * s0[1].op(), 1e-12);
    CHECK(status_on(obs, hull) == full);
  }
}
