#include "incodim/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace incodim {

const char* to_string(ErrorCode c) noexcept {
  switch (c) {
    case ErrorCode::BlochOutOfBall: return "BlochOutOfBall";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::InvalidEffect: return "InvalidEffect";
    case ErrorCode::InvalidObservable: return "InvalidObservable";
    case ErrorCode::InvalidStochastic: return "InvalidStochastic";
    case ErrorCode::NotTracePreserving: return "NotTracePreserving";
    case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::NotOrthonormal: return "NotOrthonormal";
    case ErrorCode::CommutingProjections: return "CommutingProjections";
    case ErrorCode::NotIncompatible: return "NotIncompatible";
    case ErrorCode::SingularDirection: return "SingularDirection";
    case ErrorCode::NoSolution: return "NoSolution";
    case ErrorCode::CompatiblePair: return "CompatiblePair";
    case ErrorCode::NonMonotoneWitness: return "NonMonotoneWitness";
    case ErrorCode::DegenerateChord: return "DegenerateChord";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DegenerateBlock: return "DegenerateBlock";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Ambiguous: return "Ambiguous";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

// ---- HermitianOp ----------------------------------------------------------

HermitianOp::HermitianOp(const Matrix& m) : m_(m.dim()) {
  const std::size_t d = m.dim();
  if (d == 0 || d > kMaxDim) throw Error(ErrorCode::DimensionMismatch, "operator dimension must be in [1, 8]");
  double anti = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      anti = std::max(anti, 0.5 * std::abs(m(i, j) - std::conj(m(j, i))));
      m_(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    }
  if (anti > kAntiHermitianTol) {
    std::ostringstream os;
    os << "anti-Hermitian part " << anti << " exceeds " << kAntiHermitianTol;
    throw Error(ErrorCode::NotHermitian, os.str());
  }
}

HermitianOp::HermitianOp(std::size_t d) : m_(d) {
  if (d == 0 || d > kMaxDim) throw Error(ErrorCode::DimensionMismatch, "operator dimension must be in [1, 8]");
}

HermitianOp HermitianOp::identity(std::size_t d) { return HermitianOp(Matrix::identity(d)); }

HermitianOp HermitianOp::pauli(int k) {
  Matrix m(2);
  switch (k) {
    case 1: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case 2: m(0, 1) = cplx(0.0, -1.0); m(1, 0) = cplx(0.0, 1.0); break;
    case 3: m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    default: throw Error(ErrorCode::ParamOutOfRange, "Pauli index must be 1, 2 or 3");
  }
  return HermitianOp(m);
}

HermitianOp HermitianOp::qubit(double c0, const Vec3& c) {
  Matrix m(2);
  m(0, 0) = 0.5 * (c0 + c[2]);
  m(1, 1) = 0.5 * (c0 - c[2]);
  m(0, 1) = cplx(0.5 * c[0], -0.5 * c[1]);
  m(1, 0) = cplx(0.5 * c[0], 0.5 * c[1]);
  return HermitianOp(m);
}

Vec3 HermitianOp::bloch() const {
  if (dim() != 2) throw Error(ErrorCode::DimensionMismatch, "Bloch coordinates need a qubit operator");
  return {2.0 * m_(0, 1).real(), -2.0 * m_(0, 1).imag(), (m_(0, 0) - m_(1, 1)).real()};
}

HermitianOp& HermitianOp::operator+=(const HermitianOp& o) {
  if (o.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "operator sum");
  m_ += o.m_;
  return *this;
}

HermitianOp& HermitianOp::operator-=(const HermitianOp& o) {
  if (o.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "operator difference");
  m_ -= o.m_;
  return *this;
}

HermitianOp& HermitianOp::operator*=(double s) {
  m_ *= s;
  return *this;
}

HermitianOp operator+(HermitianOp a, const HermitianOp& b) { return a += b; }
HermitianOp operator-(HermitianOp a, const HermitianOp& b) { return a -= b; }
HermitianOp operator*(double s, HermitianOp a) { return a *= s; }

double hs_inner(const HermitianOp& a, const HermitianOp& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "trace pairing");
  double s = 0.0;
  const auto& x = a.matrix().data();
  const auto& y = b.matrix().data();
  for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] * std::conj(y[k])).real();
  return s;
}

double max_abs_diff(const HermitianOp& a, const HermitianOp& b) { return max_abs_diff(a.matrix(), b.matrix()); }

double frobenius_norm(const HermitianOp& a) { return std::sqrt(hs_inner(a, a)); }

HermitianOp congruence(const Matrix& k, const HermitianOp& h) {
  if (k.dim() != h.dim()) throw Error(ErrorCode::DimensionMismatch, "congruence");
  return HermitianOp(k.adjoint() * h.matrix() * k);
}

std::vector<double> eigenvalues(const HermitianOp& h) {
  if (h.dim() == 2) {
    const double a = 0.5 * (h(0, 0).real() + h(1, 1).real());
    const double b = 0.5 * (h(0, 0).real() - h(1, 1).real());
    const double r = std::hypot(b, std::abs(h(0, 1)));
    return {a - r, a + r};
  }
  if (h.dim() == 1) return {h(0, 0).real()};
  return jacobi_eigh(h.matrix(), false).values;
}

double min_eigenvalue(const HermitianOp& h) { return eigenvalues(h).front(); }
double max_eigenvalue(const HermitianOp& h) { return eigenvalues(h).back(); }

HermitianOp apply_spectral(const HermitianOp& h, const std::function<double(double)>& f) {
  const std::size_t d = h.dim();
  if (d == 2) {
    const auto ev = eigenvalues(h);
    const double flo = f(ev[0]), fhi = f(ev[1]);
    if (ev[1] - ev[0] <= 0.0) return flo * HermitianOp::identity(2);
    // f(H) = f(lo) 1 + (f(hi) - f(lo)) / (hi - lo) * (H - lo 1)
    const double slope = (fhi - flo) / (ev[1] - ev[0]);
    return flo * HermitianOp::identity(2) + slope * (h - ev[0] * HermitianOp::identity(2));
  }
  const HermitianEigen e = jacobi_eigh(h.matrix(), true);
  Matrix r(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double fk = f(e.values[k]);
    if (fk == 0.0) continue;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) r(i, j) += fk * e.vectors(i, k) * std::conj(e.vectors(j, k));
  }
  return HermitianOp(r);
}

bool eig_interval_check(const HermitianOp& h, double lo, double hi) {
  const auto ev = eigenvalues(h);
  return ev.front() >= lo - 1e-10 && ev.back() <= hi + 1e-10;
}

// ---- State / Effect / Observable ------------------------------------------

State::State(HermitianOp op, double tol) : op_(std::move(op)) {
  const double tr = op_.trace();
  if (std::abs(tr - 1.0) > tol) {
    std::ostringstream os;
    os << "trace " << tr << " differs from 1";
    throw Error(ErrorCode::InvalidState, os.str());
  }
  const double lo = min_eigenvalue(op_);
  if (lo < -tol) {
    std::ostringstream os;
    os << "negative eigenvalue " << lo;
    throw Error(ErrorCode::InvalidState, os.str());
  }
}

Effect::Effect(HermitianOp op, double tol) : op_(std::move(op)) {
  const auto ev = eigenvalues(op_);
  if (ev.front() < -tol || ev.back() > 1.0 + tol) {
    std::ostringstream os;
    os << "eigenvalues [" << ev.front() << ", " << ev.back() << "] outside [0, 1]";
    throw Error(ErrorCode::InvalidEffect, os.str());
  }
}

Observable::Observable(std::vector<std::string> labels, std::vector<Effect> effects)
    : labels_(std::move(labels)), effects_(std::move(effects)) {
  if (effects_.empty()) throw Error(ErrorCode::InvalidObservable, "no outcomes");
  if (labels_.size() != effects_.size()) throw Error(ErrorCode::InvalidObservable, "label count differs from effect count");
  if (std::set<std::string>(labels_.begin(), labels_.end()).size() != labels_.size())
    throw Error(ErrorCode::InvalidObservable, "duplicate outcome labels");
  const std::size_t d = effects_[0].dim();
  HermitianOp sum(d);
  for (const auto& e : effects_) {
    if (e.dim() != d) throw Error(ErrorCode::DimensionMismatch, "effects of different dimension");
    sum += e.op();
  }
  const double dev = max_abs_diff(sum, HermitianOp::identity(d));
  if (dev > kSumTol) {
    std::ostringstream os;
    os << "effects sum to identity only within " << dev;
    throw Error(ErrorCode::InvalidObservable, os.str());
  }
}

Observable Observable::from_ops(std::vector<std::string> labels, const std::vector<HermitianOp>& ops, double effect_tol) {
  std::vector<Effect> effects;
  effects.reserve(ops.size());
  for (const auto& op : ops) effects.emplace_back(op, effect_tol);
  return Observable(std::move(labels), std::move(effects));
}

Observable Observable::from_ops(const std::vector<HermitianOp>& ops, double effect_tol) {
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < ops.size(); ++k) labels.push_back(std::to_string(k));
  return from_ops(std::move(labels), ops, effect_tol);
}

// ---- Bloch helpers --------------------------------------------------------

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

BinaryQubitObservable::BinaryQubitObservable(double w_, const Vec3& m_) : w(w_), m(m_) {
  const double c = norm(m);
  if (!(c <= std::min(1.0 + w, 1.0 - w) + 1e-12)) {
    std::ostringstream os;
    os << "|m| = " << c << " exceeds min(1+w, 1-w) for w = " << w;
    throw Error(ErrorCode::InvalidEffect, os.str());
  }
}

Observable BinaryQubitObservable::to_observable() const {
  const HermitianOp plus = HermitianOp::qubit(1.0 + w, m);
  const HermitianOp minus = HermitianOp::identity(2) - plus;
  return Observable::from_ops({"+", "-"}, {plus, minus});
}

State state_from_bloch(const Vec3& r) {
  if (norm(r) > 1.0 + 1e-12) throw Error(ErrorCode::BlochOutOfBall, "|r| > 1");
  return State(HermitianOp::qubit(1.0, r));
}

Observable unbiased_qubit_observable(const Vec3& a) {
  if (norm(a) > 1.0 + 1e-12) throw Error(ErrorCode::BlochOutOfBall, "|a| > 1");
  const Vec3 neg{-a[0], -a[1], -a[2]};
  return Observable::from_ops({"+", "-"}, {HermitianOp::qubit(1.0, a), HermitianOp::qubit(1.0, neg)});
}

double outcome_probability(const State& rho, const Effect& e) {
  if (rho.dim() != e.dim()) throw Error(ErrorCode::DimensionMismatch, "state and effect dimensions differ");
  return std::clamp(hs_inner(rho.op(), e.op()), 0.0, 1.0);
}

// ---- processing -----------------------------------------------------------

StochasticMatrix::StochasticMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), a_(std::move(entries)) {
  if (rows == 0 || cols == 0 || a_.size() != rows * cols) throw Error(ErrorCode::InvalidStochastic, "shape");
  for (double x : a_)
    if (!(x >= 0.0)) throw Error(ErrorCode::InvalidStochastic, "negative entry");
  for (std::size_t c = 0; c < cols; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < rows; ++r) s += a_[r * cols + c];
    if (std::abs(s - 1.0) > 1e-12) throw Error(ErrorCode::InvalidStochastic, "column does not sum to 1");
  }
}

StochasticMatrix StochasticMatrix::identity(std::size_t n) {
  std::vector<double> e(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
  return StochasticMatrix(n, n, std::move(e));
}

StochasticMatrix operator*(const StochasticMatrix& a, const StochasticMatrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::DimensionMismatch, "stochastic product");
  std::vector<double> e(a.rows() * b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k)
      for (std::size_t j = 0; j < b.cols(); ++j) e[i * b.cols() + j] += a(i, k) * b(k, j);
  // renormalize columns against rounding so the product passes the 1e-12 check
  for (std::size_t j = 0; j < b.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += e[i * b.cols() + j];
    for (std::size_t i = 0; i < a.rows(); ++i) e[i * b.cols() + j] /= s;
  }
  return StochasticMatrix(a.rows(), b.cols(), std::move(e));
}

Observable post_process(const Observable& a, const StochasticMatrix& nu) {
  if (nu.cols() != a.size()) throw Error(ErrorCode::DimensionMismatch, "stochastic matrix columns differ from outcome count");
  std::vector<HermitianOp> ops;
  for (std::size_t r = 0; r < nu.rows(); ++r) {
    HermitianOp e(a.dim());
    for (std::size_t x = 0; x < a.size(); ++x) e += nu(r, x) * a.effect(x).op();
    ops.push_back(std::move(e));
  }
  if (nu.rows() == a.size()) return Observable::from_ops(a.labels(), ops);
  return Observable::from_ops(ops);
}

KrausChannel::KrausChannel(std::vector<Matrix> kraus) : kraus_(std::move(kraus)) {
  if (kraus_.empty()) throw Error(ErrorCode::NotTracePreserving, "no Kraus operators");
  const std::size_t d = kraus_[0].dim();
  Matrix s(d);
  for (const auto& k : kraus_) {
    if (k.dim() != d) throw Error(ErrorCode::DimensionMismatch, "Kraus operators of different dimension");
    s += k.adjoint() * k;
  }
  if (max_abs_diff(s, Matrix::identity(d)) > 1e-10) throw Error(ErrorCode::NotTracePreserving, "sum K^dagger K != 1");
}

KrausChannel KrausChannel::identity(std::size_t d) { return KrausChannel({Matrix::identity(d)}); }

KrausChannel KrausChannel::unitary(const Matrix& u) { return KrausChannel({u}); }

KrausChannel KrausChannel::depolarizing(std::size_t d, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::ParamOutOfRange, "depolarizing parameter outside [0, 1]");
  std::vector<Matrix> ks;
  if (p > 0.0) ks.push_back(std::sqrt(p) * Matrix::identity(d));
  if (p < 1.0) {
    const double c = std::sqrt((1.0 - p) / static_cast<double>(d));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        Matrix k(d);
        k(i, j) = c;
        ks.push_back(std::move(k));
      }
  }
  return KrausChannel(std::move(ks));
}

HermitianOp KrausChannel::adjoint_apply(const HermitianOp& e) const {
  HermitianOp r(e.dim());
  for (const auto& k : kraus_) r += congruence(k, e);
  return r;
}

HermitianOp KrausChannel::apply(const HermitianOp& rho) const {
  HermitianOp r(rho.dim());
  for (const auto& k : kraus_) r += congruence(k.adjoint(), rho);
  return r;
}

Observable pre_process(const Observable& a, const KrausChannel& channel) {
  if (channel.dim() != a.dim()) throw Error(ErrorCode::DimensionMismatch, "channel and observable dimensions differ");
  std::vector<HermitianOp> ops;
  for (const auto& e : a.effects()) ops.push_back(channel.adjoint_apply(e.op()));
  return Observable::from_ops(a.labels(), ops);
}

}  // namespace incodim
