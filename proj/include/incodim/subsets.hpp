#pragma once

#include <optional>
#include <string>
#include <vector>

#include "incodim/feasibility.hpp"

namespace incodim {

std::size_t affine_dimension(const std::vector<State>& states);

class StateSubset {
 public:
  StateSubset() = default;
  explicit StateSubset(std::vector<State> states);
  const std::vector<State>& states() const noexcept { return states_; }
  std::size_t size() const noexcept { return states_.size(); }
  std::size_t affine_dim() const noexcept { return affine_dim_; }

 private:
  std::vector<State> states_;
  std::size_t affine_dim_ = 0;
};

struct DimensionBounds {
  int lower = 0;
  int upper = 0;
  std::optional<int> exact;
};

struct ChiBounds {
  DimensionBounds incomp;
  DimensionBounds comp;
  std::vector<std::string> certificates;
};

// Joint observable sum_i |i><i| prod_j <i|A_j(x_j)|i>; basis vectors given as columns.
Observable distinguishable_extension(const std::vector<Observable>& observables, const std::vector<std::vector<cplx>>& basis);

// G(x, y) = tr[rho0 A(x)] B(y).
Observable fixed_marginal_construction(const Observable& a, const Observable& b, const State& rho0);

bool is_rank_one_projection(const HermitianOp& p, double tol = 1e-10);

// {(1 - P)/(d - 1), (1 - Q)/(d - 1)} for noncommuting rank-1 projections P, Q.
StateSubset pq_detector(const Effect& p, const Effect& q);

ChiBounds chi_bounds(const std::vector<Observable>& observables, const SolverOptions& opts = {});

}  // namespace incodim
