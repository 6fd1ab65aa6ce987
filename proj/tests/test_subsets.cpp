#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "test_util.hpp"

using namespace incodim;
using namespace incodim::testing;

TEST_CASE("affine_dimension") {
  CHECK(affine_dimension({state_from_bloch({0.1, 0.2, 0.3})}) == 0);
  CHECK(affine_dimension({state_from_bloch({0, 0, 0}), state_from_bloch({0, 0, 1})}) == 1);
  CHECK(affine_dimension({state_from_bloch({0, 0.3, 0.1}), state_from_bloch({0, -0.5, 0.6}), state_from_bloch({0, 0.2, -0.7})}) == 2);
  CHECK_THROWS_AS(affine_dimension({}), Error);
  Rng rng(1);
  std::vector<State> s;
  for (int k = 0; k < 12; ++k) s.push_back(random_state(3, rng));
  CHECK(affine_dimension(s) == 8);
}

TEST_CASE("affine_dimension: permutations and affine combinations") {
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    std::vector<State> s;
    const std::size_t n = 1 + rng.index(4);
    for (std::size_t k = 0; k < n; ++k) s.push_back(random_state(3, rng));
    const std::size_t dim = affine_dimension(s);
    std::vector<State> perm = s;
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    CHECK(affine_dimension(perm) == dim);
    const double lam = rng.uniform();
    perm.emplace_back(lam * s.front().op() + (1.0 - lam) * s.back().op(), 1e-12);
    CHECK(affine_dimension(perm) == dim);
  }
}

TEST_CASE("distinguishable_extension") {
  const std::vector<std::vector<cplx>> z{{1.0, 0.0}, {0.0, 1.0}};
  const std::vector<Observable> obs{mub_x(1), mub_y(1)};
  const Observable g = distinguishable_extension(obs, z);
  const FeasibilityProblem p(obs, {state_from_bloch({0, 0, 0}), state_from_bloch({0, 0, 1}), state_from_bloch({0, 0, -1})});
  std::vector<HermitianOp> ops;
  for (const auto& e : g.effects()) ops.push_back(e.op());
  CHECK(marginal_residual(p, ops) < 1e-10);

  // n = 1: the dephased observable
  const Observable one = distinguishable_extension({mub_x(1)}, z);
  CHECK(max_abs_diff(one.effect(0).op(), 0.5 * HermitianOp::identity(2)) < 1e-15);
  // a sigma_x eigenstate sees 1/2, not 1
  CHECK(outcome_probability(state_from_bloch({1, 0, 0}), g.effect(0)) + outcome_probability(state_from_bloch({1, 0, 0}), g.effect(1)) ==
        doctest::Approx(0.5));

  CHECK_THROWS_AS(distinguishable_extension(obs, {{1.0, 0.0}, {1.0, 1.0}}), Error);
}

TEST_CASE("distinguishable_extension reproduces random observables on diagonal states") {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const std::size_t d = 2 + rng.index(2);
    const std::vector<Observable> obs{random_observable(d, 2, rng), random_observable(d, 3, rng)};
    const Matrix u = random_unitary(d, rng);
    std::vector<std::vector<cplx>> basis(d, std::vector<cplx>(d));
    for (std::size_t c = 0; c < d; ++c)
      for (std::size_t r = 0; r < d; ++r) basis[c][r] = u(r, c);
    std::vector<State> diag;
    for (const auto& v : basis) diag.push_back(pure_from(v));
    const Observable g = distinguishable_extension(obs, basis);
    const FeasibilityProblem p(obs, diag);
    std::vector<HermitianOp> ops;
    for (const auto& e : g.effects()) ops.push_back(e.op());
    CHECK(marginal_residual(p, ops) < 1e-10);
  }
}

TEST_CASE("fixed_marginal_construction") {
  for (double t : {0.72, 0.85, 1.0}) {
    const Observable a = mub_x(t), b = mub_y(t);
    const State rho0 = state_from_bloch({0, 0, 0});
    const Observable g = fixed_marginal_construction(a, b, rho0);
    const FeasibilityProblem on_plane({a, b}, {state_from_bloch({0, 0.4, 0.3}), state_from_bloch({0, -0.6, 0.1}),
                                                state_from_bloch({0, 0.1, -0.9})});
    std::vector<HermitianOp> ops;
    for (const auto& e : g.effects()) ops.push_back(e.op());
    CHECK(marginal_residual(on_plane, ops) < 1e-10);
    // B-marginal is B as an operator
    CHECK(max_abs_diff(ops[0] + ops[2], b.effect(0).op()) < 1e-12);
    CHECK(max_abs_diff(ops[1] + ops[3], b.effect(1).op()) < 1e-12);
    // off the plane: r.x = 0.3 misses by 0.15 t
    const State off = state_from_bloch({0.3, 0.2, 0});
    const double pa = outcome_probability(off, Effect(ops[0] + ops[1]));
    CHECK(std::abs(pa - outcome_probability(off, a.effect(0))) == doctest::Approx(0.15 * t).epsilon(1e-12));
  }
  Rng rng(1);
  const Observable g = fixed_marginal_construction(mub_x(0), mub_y(0), state_from_bloch({0, 0, 1}));
  for (const auto& e : g.effects()) CHECK(max_abs_diff(e.op(), 0.25 * HermitianOp::identity(2)) < 1e-15);
  CHECK_THROWS_AS(fixed_marginal_construction(mub_x(1), random_observable(3, 2, rng), state_from_bloch({0, 0, 0})), Error);
}

TEST_CASE("pq_detector") {
  SUBCASE("qubit") {
    const Effect p(HermitianOp::qubit(1.0, {0, 0, 1})), q(HermitianOp::qubit(1.0, {1, 0, 0}));
    const StateSubset s = pq_detector(p, q);
    CHECK(max_abs_diff(s.states()[0].op(), state_from_bloch({0, 0, -1}).op()) < 1e-15);
    CHECK(max_abs_diff(s.states()[1].op(), state_from_bloch({-1, 0, 0}).op()) < 1e-15);
    const auto r = joint_feasible(FeasibilityProblem({binary_from(p), binary_from(q)}, s.states()));
    CHECK(r.status == FeasibilityStatus::Infeasible);
  }
  SUBCASE("qutrit") {
    const Effect p = projector_from({1.0, cplx(0.2, 0.5), 0.3}), q = projector_from({0.4, 1.0, cplx(0.0, -0.7)});
    const StateSubset s = pq_detector(p, q);
    CHECK(joint_feasible(FeasibilityProblem({binary_from(p), binary_from(q)}, s.states())).status == FeasibilityStatus::Infeasible);
  }
  SUBCASE("commuting") {
    const Effect p = projector_from({1.0, 0.0, 0.0}), q = projector_from({0.0, 1.0, 0.0});
    try {
      pq_detector(p, q);
      FAIL("expected CommutingProjections");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::CommutingProjections);
    }
  }
  SUBCASE("not a projection") { CHECK_THROWS_AS(pq_detector(mub_x(0.9).effect(0), mub_y(1).effect(0)), Error); }
}

TEST_CASE("pq_detector infeasibility survives unitary conjugation") {
  Rng rng(4);
  const Effect p = projector_from({1.0, cplx(0.2, 0.5), 0.3}), q = projector_from({0.4, 1.0, cplx(0.0, -0.7)});
  for (int i = 0; i < 10; ++i) {
    const Matrix u = random_unitary(3, rng);
    const Effect pu(congruence(u.adjoint(), p.op())), qu(congruence(u.adjoint(), q.op()));
    const StateSubset s = pq_detector(pu, qu);
    CHECK(joint_feasible(FeasibilityProblem({binary_from(pu), binary_from(qu)}, s.states())).status ==
          FeasibilityStatus::Infeasible);
  }
}

TEST_CASE("chi_bounds") {
  const ChiBounds b = chi_bounds({mub_x(0.8), mub_y(0.8)});
  CHECK(b.incomp.lower == 2);
  CHECK(b.incomp.upper == 3);
  CHECK(!b.incomp.exact);
  CHECK(b.comp.lower == 3);
  CHECK(b.comp.upper == 3);
  CHECK(b.comp.exact == 3);

  const ChiBounds sharp = chi_bounds({mub_x(1), mub_y(1)});
  CHECK(sharp.incomp.exact == 2);
  CHECK(sharp.comp.exact == 3);

  try {
    chi_bounds({mub_x(0.5), mub_y(0.5)});
    FAIL("expected NotIncompatible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotIncompatible);
  }
}

TEST_CASE("post-processing monotonicity") {
  Rng rng(5);
  int infeasible = 0;
  for (int i = 0; i < 40; ++i) {
    const double t = rng.uniform(0.75, 1.0);
    // four generic states span the operator space; two rarely detect anything
    std::vector<State> s0{random_pure_state(2, rng), random_pure_state(2, rng)};
    if (i % 2 == 0) s0.insert(s0.end(), {random_pure_state(2, rng), random_pure_state(2, rng)});
    const double e1 = rng.uniform(0.0, 0.1), e2 = rng.uniform(0.0, 0.1);
    const Observable pa = post_process(mub_x(t), StochasticMatrix(2, 2, {1 - e1, e1, e1, 1 - e1}));
    const Observable pb = post_process(mub_y(t), StochasticMatrix(2, 2, {1 - e2, e2, e2, 1 - e2}));
    if (joint_feasible(FeasibilityProblem({pa, pb}, s0)).status == FeasibilityStatus::Infeasible) {
      ++infeasible;
      CHECK(joint_feasible(FeasibilityProblem({mub_x(t), mub_y(t)}, s0)).status == FeasibilityStatus::Infeasible);
    }
  }
  CHECK(infeasible > 0);
}
