#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "incodim/operator_core.hpp"

namespace incodim {

bool busch_compatible(const Vec3& a, const Vec3& b);

// Slack of the biased binary qubit criterion: (m1.m2 - w1 w2)^2 - (1-F1^2-F2^2)(1 - w1^2/F1^2 - w2^2/F2^2).
// Nonnegative means compatible. Sharp arguments (F = 0) use the commutation rule instead
// and report -|m1 x m2| / (|m1||m2|) as the slack.
double binary_pair_slack(const BinaryQubitObservable& a, const BinaryQubitObservable& b);
// Same criterion from scalars: biases, Bloch lengths, m1.m2 and |m1 x m2|. No validation.
double binary_pair_slack_raw(double w1, double c1, double w2, double c2, double dot, double cross);
bool binary_pair_compatible(const BinaryQubitObservable& a, const BinaryQubitObservable& b);

// Largest |a| for which A^a is compatible with the depolarizing channel of parameter p.
double channel_obs_threshold(double p);

struct SolverOptions {
  double tol_marginal = 1e-9;
  double tol_psd = 1e-9;
  double tol_gap = 1e-6;
  long max_iter = 200000;
  long stall_window = 500;
  double stall_rel = 1e-12;
};

enum class FeasibilityStatus { Feasible, Infeasible, Ambiguous };
const char* to_string(FeasibilityStatus s) noexcept;

// Dual certificate of infeasibility. With N(x1..xn) = M + sum_j sum_l lambda[j][xj][l] rho_l,
// every block N is NSD up to max_positive_eig, and
//   dual_value = tr M + sum lambda[j][x][l] tr[rho_l A_j(x)] > d * max_positive_eig.
struct InfeasibilityCertificate {
  HermitianOp normalization;
  std::vector<std::vector<std::vector<double>>> lambda;  // [j][x][l]
  double dual_value = 0.0;
  double max_positive_eig = 0.0;
};

struct FeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::Ambiguous;
  std::optional<Observable> joint;
  double residual = 0.0;
  long iterations = 0;
  double gap = 0.0;
  std::optional<InfeasibilityCertificate> certificate;
};

class AffineConstraints;

class FeasibilityProblem {
 public:
  static constexpr std::size_t kMaxOutcomes = 4096;

  // Empty `states` means the full state space (encoded by spanning_states(d)).
  FeasibilityProblem(std::vector<Observable> observables, std::vector<State> states = {});

  std::size_t dim() const noexcept { return d_; }
  std::size_t joint_outcomes() const noexcept { return k_; }
  bool full_space() const noexcept { return full_space_; }
  const std::vector<Observable>& observables() const noexcept { return obs_; }
  const std::vector<State>& states() const noexcept { return states_; }
  // Outcome index of observable j in joint outcome k.
  std::size_t outcome_of(std::size_t k, std::size_t j) const;
  std::vector<std::string> joint_labels() const;
  const AffineConstraints& constraints() const { return *constraints_; }

 private:
  std::vector<Observable> obs_;
  std::vector<State> states_;
  bool full_space_ = false;
  std::size_t d_ = 0, k_ = 1;
  std::vector<std::size_t> strides_;
  std::shared_ptr<const AffineConstraints> constraints_;
};

// {1/d} together with |i><i| (i < d-1) and the real/imaginary superpositions of basis pairs: d^2 states
// whose span is the whole operator space.
std::vector<State> spanning_states(std::size_t d);

FeasibilityResult joint_feasible(const FeasibilityProblem& problem, const SolverOptions& opts = {});

HermitianOp project_psd(const HermitianOp& h);
std::vector<HermitianOp> project_marginal_affine(const std::vector<HermitianOp>& g, const FeasibilityProblem& problem);

// Frobenius projection onto POVMs with the given outcome count ({G_k >= 0, sum G_k = 1}), by Dykstra.
std::vector<HermitianOp> project_onto_povms(const std::vector<HermitianOp>& g, long max_iter = 2000, double tol = 1e-12);

// Max deviation between the S0 statistics of `joint` marginals and those of the problem's observables.
double marginal_residual(const FeasibilityProblem& problem, const std::vector<HermitianOp>& joint);

// Marginal of a joint observable on observable j.
Observable joint_marginal(const FeasibilityProblem& problem, const Observable& joint, std::size_t j);

}  // namespace incodim
