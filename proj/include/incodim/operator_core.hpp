#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "incodim/error.hpp"
#include "incodim/linalg.hpp"

namespace incodim {

using Vec3 = std::array<double, 3>;

// Hermitian operator on C^d, d <= 8. Construction symmetrizes (H + H^dagger)/2 and
// rejects inputs whose anti-Hermitian part exceeds 1e-8.
class HermitianOp {
 public:
  static constexpr std::size_t kMaxDim = 8;
  static constexpr double kAntiHermitianTol = 1e-8;

  HermitianOp() = default;
  explicit HermitianOp(const Matrix& m);
  explicit HermitianOp(std::size_t d);  // zero operator

  static HermitianOp identity(std::size_t d);
  // sigma_1, sigma_2, sigma_3 for k = 1, 2, 3.
  static HermitianOp pauli(int k);
  // (c0 * 1 + c . sigma) / 2 on a qubit.
  static HermitianOp qubit(double c0, const Vec3& c);

  std::size_t dim() const noexcept { return m_.dim(); }
  const Matrix& matrix() const noexcept { return m_; }
  cplx operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

  double trace() const { return m_.trace().real(); }
  // Bloch coordinates tr[H sigma_k] for a qubit operator.
  Vec3 bloch() const;

  HermitianOp& operator+=(const HermitianOp& o);
  HermitianOp& operator-=(const HermitianOp& o);
  HermitianOp& operator*=(double s);

 private:
  Matrix m_;
};

HermitianOp operator+(HermitianOp a, const HermitianOp& b);
HermitianOp operator-(HermitianOp a, const HermitianOp& b);
HermitianOp operator*(double s, HermitianOp a);

// Frobenius pairing tr[A B] (real for Hermitian A, B).
double hs_inner(const HermitianOp& a, const HermitianOp& b);
double max_abs_diff(const HermitianOp& a, const HermitianOp& b);
double frobenius_norm(const HermitianOp& a);

// K^dagger H K.
HermitianOp congruence(const Matrix& k, const HermitianOp& h);

// Ascending eigenvalues: closed form for d = 2, Jacobi otherwise.
std::vector<double> eigenvalues(const HermitianOp& h);
double min_eigenvalue(const HermitianOp& h);
double max_eigenvalue(const HermitianOp& h);
// f(H) via the spectral decomposition.
HermitianOp apply_spectral(const HermitianOp& h, const std::function<double(double)>& f);

bool eig_interval_check(const HermitianOp& h, double lo, double hi);

class State {
 public:
  static constexpr double kTol = 1e-12;
  State() = default;
  explicit State(HermitianOp op, double tol = kTol);
  const HermitianOp& op() const noexcept { return op_; }
  std::size_t dim() const noexcept { return op_.dim(); }

 private:
  HermitianOp op_;
};

class Effect {
 public:
  static constexpr double kTol = 1e-12;
  Effect() = default;
  // Eigenvalues must lie in [-tol, 1 + tol].
  explicit Effect(HermitianOp op, double tol = kTol);
  const HermitianOp& op() const noexcept { return op_; }
  std::size_t dim() const noexcept { return op_.dim(); }

 private:
  HermitianOp op_;
};

class Observable {
 public:
  static constexpr double kSumTol = 1e-10;
  Observable() = default;
  Observable(std::vector<std::string> labels, std::vector<Effect> effects);
  // Convenience: builds effects with the given eigenvalue tolerance.
  static Observable from_ops(std::vector<std::string> labels, const std::vector<HermitianOp>& ops,
                             double effect_tol = Effect::kTol);
  // Labels "0", "1", ...
  static Observable from_ops(const std::vector<HermitianOp>& ops, double effect_tol = Effect::kTol);

  std::size_t size() const noexcept { return effects_.size(); }
  std::size_t dim() const noexcept { return effects_.empty() ? 0 : effects_[0].dim(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<Effect>& effects() const noexcept { return effects_; }
  const Effect& effect(std::size_t x) const { return effects_.at(x); }

 private:
  std::vector<std::string> labels_;
  std::vector<Effect> effects_;
};

// Binary qubit observable: "+" effect (1+w)/2 * 1 + m.sigma / 2, "-" effect its complement.
struct BinaryQubitObservable {
  double w = 0.0;
  Vec3 m{0.0, 0.0, 0.0};

  BinaryQubitObservable() = default;
  BinaryQubitObservable(double w, const Vec3& m);
  Observable to_observable() const;
};

class StochasticMatrix {
 public:
  StochasticMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  static StochasticMatrix identity(std::size_t n);
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

 private:
  std::size_t rows_, cols_;
  std::vector<double> a_;
};

StochasticMatrix operator*(const StochasticMatrix& a, const StochasticMatrix& b);

// Channel in Kraus form; the Heisenberg adjoint maps E to sum_i K_i^dagger E K_i.
class KrausChannel {
 public:
  explicit KrausChannel(std::vector<Matrix> kraus);
  static KrausChannel identity(std::size_t d);
  static KrausChannel unitary(const Matrix& u);
  // rho -> p rho + (1 - p) tr[rho] 1/d
  static KrausChannel depolarizing(std::size_t d, double p);

  std::size_t dim() const noexcept { return kraus_.front().dim(); }
  const std::vector<Matrix>& kraus() const noexcept { return kraus_; }
  HermitianOp adjoint_apply(const HermitianOp& e) const;
  HermitianOp apply(const HermitianOp& rho) const;

 private:
  std::vector<Matrix> kraus_;
};

double norm(const Vec3& v);

State state_from_bloch(const Vec3& r);
Observable unbiased_qubit_observable(const Vec3& a);
double outcome_probability(const State& rho, const Effect& e);
Observable post_process(const Observable& a, const StochasticMatrix& nu);
Observable pre_process(const Observable& a, const KrausChannel& channel);

}  // namespace incodim
