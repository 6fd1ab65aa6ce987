#pragma once

#include <cstdint>
#include <vector>

#include "incodim/subsets.hpp"

namespace incodim {

// xi(A) = delta - sum_j sum_x tr[F_j(x) A_j(x)]
struct RawWitness {
  double delta = 0.0;
  std::vector<std::vector<HermitianOp>> operators;  // [j][x]
};

// xi(A) = delta - sum_j sum_x c_{j,x} tr[rho_{j,x} A_j(x)]
struct StateFormWitness {
  double delta = 0.0;
  std::vector<std::vector<double>> coeffs;  // [j][x]
  std::vector<std::vector<State>> states;   // [j][x]
};

double evaluate(const StateFormWitness& w, const std::vector<Observable>& observables);
double evaluate(const RawWitness& w, const std::vector<Observable>& observables);

// Distinct witness states (1e-10).
StateSubset detected_subset(const StateFormWitness& w);

// Shift, centre and lift each F_j into state form; `shape` lists the outcome counts.
StateFormWitness normalize(const RawWitness& raw, const std::vector<std::size_t>& shape);

// sum_x c_{j,x} rho_{j,x} - m_j alpha_j 1, worst entry over j. alpha_j is read off as the trace / (m_j d).
double witness_constraint_residual(const StateFormWitness& w);

RawWitness to_raw(const StateFormWitness& w);

struct WitnessSearchOptions {
  int starts = 64;
  int steps = 2000;
  std::uint64_t seed = 0;
  SolverOptions solver;
};

struct WitnessVerification {
  double input_value = 0.0;           // witness on the input tuple
  double max_functional = 0.0;        // largest sum c tr[rho B] found over compatible tuples
  double min_compatible_value = 0.0;  // delta - max_functional
  int starts = 0;
};

struct WitnessSearchResult {
  StateFormWitness witness;
  WitnessVerification verification;
  long oracle_iterations = 0;
};

// Largest value of sum_j sum_x c_{j,x} tr[rho_{j,x} B_j(x)] over compatible tuples B, by projected
// gradient ascent over joint observables from `starts` random starting points.
WitnessVerification verify_witness(const StateFormWitness& w, const std::vector<Observable>& observables,
                                   int starts, int steps, std::uint64_t seed);

// Throws PreconditionViolated when the subset is oracle-feasible, NotFound when no verified witness results.
WitnessSearchResult search_witness(const std::vector<Observable>& observables, const StateSubset& subset,
                                   const WitnessSearchOptions& opts = {});

}  // namespace incodim
