#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "incodim/qubit_mub.hpp"
#include "incodim/witness.hpp"

namespace incodim {

using json = nlohmann::ordered_json;

// {"bloch": {"t": .., "a": [..], "b": [..], "wa": .., "wb": ..}}: the pair (w_a, t a), (w_b, t b).
// Missing a, b default to x and y, so {"bloch": {"t": 0.8}} is the noisy MUB pair.
struct BlochPair {
  Vec3 a{1.0, 0.0, 0.0};
  Vec3 b{0.0, 1.0, 0.0};
  double t = 1.0;
  double wa = 0.0;
  double wb = 0.0;

  bool is_mub() const;
  BinaryQubitObservable first() const;
  BinaryQubitObservable second() const;
};

struct ProblemInput {
  std::optional<BlochPair> bloch;
  std::vector<Observable> observables;
  std::optional<std::vector<State>> states;  // qubit states may be given as Bloch vectors
  bool pq_subset = false;                    // "subset": "pq_detector"

  bool is_mub_pair() const { return bloch && bloch->is_mub(); }
};

ProblemInput parse_problem(const json& j);
ProblemInput parse_problem_text(const std::string& text);
ProblemInput load_problem(const std::string& path);
json problem_to_json(const ProblemInput& p);

// d x d matrix as rows of [re, im] pairs
json matrix_to_json(const HermitianOp& h);
HermitianOp matrix_from_json(const json& j, const std::string& where);

json witness_to_json(const StateFormWitness& w);
StateFormWitness witness_from_json(const json& j);

json tolerances_to_json(const SolverOptions& o);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
json sweep_to_json(const std::vector<SweepRow>& rows);

}  // namespace incodim
