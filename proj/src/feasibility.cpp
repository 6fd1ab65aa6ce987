#include "incodim/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace incodim {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Real coordinates of a Hermitian d x d matrix that preserve the trace pairing:
// diagonal entries, then sqrt(2) Re h_ij and sqrt(2) Im h_ij for i < j.
void to_vec(const HermitianOp& h, double* out) {
  const std::size_t d = h.dim();
  std::size_t t = 0;
  for (std::size_t i = 0; i < d; ++i) out[t++] = h(i, i).real();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      out[t++] = kSqrt2 * h(i, j).real();
      out[t++] = kSqrt2 * h(i, j).imag();
    }
}

Matrix matrix_from_vec(const double* v, std::size_t d) {
  Matrix m(d);
  std::size_t t = 0;
  for (std::size_t i = 0; i < d; ++i) m(i, i) = v[t++];
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      const cplx z(v[t] / kSqrt2, v[t + 1] / kSqrt2);
      t += 2;
      m(i, j) = z;
      m(j, i) = std::conj(z);
    }
  return m;
}

HermitianOp from_vec(const double* v, std::size_t d) { return HermitianOp(matrix_from_vec(v, d)); }

// Eigenvalue range of a qubit block in vec coordinates (h00, h11, sqrt2 Re h01, sqrt2 Im h01).
inline void qubit_block_eigs(const double* v, double& lo, double& hi) {
  const double a = 0.5 * (v[0] + v[1]);
  const double bz = 0.5 * (v[0] - v[1]);
  const double r = std::sqrt(bz * bz + 0.5 * (v[2] * v[2] + v[3] * v[3]));
  lo = a - r;
  hi = a + r;
}

void project_psd_block(double* v, std::size_t d) {
  if (d == 2) {
    double lo, hi;
    qubit_block_eigs(v, lo, hi);
    if (lo >= 0.0) return;
    if (hi <= 0.0) {
      std::fill(v, v + 4, 0.0);
      return;
    }
    // keep hi * P_+ with P_+ = (H - lo 1) / (hi - lo)
    const double s = hi / (hi - lo);
    v[0] = s * (v[0] - lo);
    v[1] = s * (v[1] - lo);
    v[2] *= s;
    v[3] *= s;
    return;
  }
  const HermitianEigen e = jacobi_eigh(matrix_from_vec(v, d), true);
  if (e.values.front() >= 0.0) return;
  Matrix r(d);
  for (std::size_t k = 0; k < d; ++k) {
    if (e.values[k] <= 0.0) continue;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) r(i, j) += e.values[k] * e.vectors(i, k) * std::conj(e.vectors(j, k));
  }
  to_vec(HermitianOp(r), v);
}

// Projection onto {H >= floor * 1}; the diagonal leads the vector layout.
void project_psd_floor_block(double* v, std::size_t d, double floor) {
  for (std::size_t i = 0; i < d; ++i) v[i] -= floor;
  project_psd_block(v, d);
  for (std::size_t i = 0; i < d; ++i) v[i] += floor;
}

void block_eig_range(const double* v, std::size_t d, double& lo, double& hi) {
  if (d == 2) {
    qubit_block_eigs(v, lo, hi);
    return;
  }
  if (d == 1) {
    lo = hi = v[0];
    return;
  }
  const auto ev = jacobi_eigh(matrix_from_vec(v, d), false).values;
  lo = ev.front();
  hi = ev.back();
}

double norm2(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

// Linear constraints A g = b on the stacked block vector g (K blocks of d^2 coordinates):
// sum_k g_k = vec(1), and for each (j, x, l): sum_{k : x_j(k) = x} <rho_l, g_k> = tr[rho_l A_j(x)].
// A^T is factored by SVD, A^T = U S V^T, which gives the projector and the multipliers.
class AffineConstraints {
 public:
  explicit AffineConstraints(const FeasibilityProblem& p) : d_(p.dim()), k_(p.joint_outcomes()) {
    const std::size_t dd = d_ * d_;
    n_ = k_ * dd;
    std::vector<double> idv(dd);
    to_vec(HermitianOp::identity(d_), idv.data());
    for (std::size_t t = 0; t < dd; ++t) {
      std::vector<double> row(n_, 0.0);
      for (std::size_t k = 0; k < k_; ++k) row[k * dd + t] = 1.0;
      rows_.push_back(std::move(row));
      b_.push_back(idv[t]);
    }
    std::vector<std::vector<double>> svec;
    for (const auto& s : p.states()) {
      std::vector<double> v(dd);
      to_vec(s.op(), v.data());
      svec.push_back(std::move(v));
    }
    for (std::size_t j = 0; j < p.observables().size(); ++j) {
      const Observable& obs = p.observables()[j];
      for (std::size_t x = 0; x < obs.size(); ++x)
        for (std::size_t l = 0; l < svec.size(); ++l) {
          std::vector<double> row(n_, 0.0);
          for (std::size_t k = 0; k < k_; ++k)
            if (p.outcome_of(k, j) == x) std::copy(svec[l].begin(), svec[l].end(), row.begin() + k * dd);
          rows_.push_back(std::move(row));
          b_.push_back(hs_inner(p.states()[l].op(), obs.effect(x).op()));
        }
    }

    ColumnSvd svd = svd_columns(rows_);
    const double top = svd.sigma.empty() ? 0.0 : svd.sigma.front();
    for (std::size_t k = 0; k < svd.sigma.size(); ++k) {
      if (svd.sigma[k] <= 1e-10 * top) break;
      sigma_.push_back(svd.sigma[k]);
      u_.push_back(std::move(svd.u[k]));
      const double vb = std::inner_product(svd.v[k].begin(), svd.v[k].end(), b_.begin(), 0.0);
      beta_.push_back(vb / svd.sigma[k]);
      v_.push_back(std::move(svd.v[k]));
    }
  }

  std::size_t n() const { return n_; }
  std::size_t rows() const { return rows_.size(); }

  void project(std::vector<double>& x) const {
    for (std::size_t k = 0; k < u_.size(); ++k) {
      const double y = std::inner_product(u_[k].begin(), u_[k].end(), x.begin(), 0.0) - beta_[k];
      if (y == 0.0) continue;
      for (std::size_t i = 0; i < n_; ++i) x[i] -= y * u_[k][i];
    }
  }

  // lambda = (A A^T)^+ (b - A p)
  std::vector<double> multipliers(const std::vector<double>& p) const {
    std::vector<double> e(rows_.size());
    for (std::size_t r = 0; r < rows_.size(); ++r)
      e[r] = b_[r] - std::inner_product(rows_[r].begin(), rows_[r].end(), p.begin(), 0.0);
    std::vector<double> lam(rows_.size(), 0.0);
    for (std::size_t k = 0; k < v_.size(); ++k) {
      const double c = std::inner_product(v_[k].begin(), v_[k].end(), e.begin(), 0.0) / (sigma_[k] * sigma_[k]);
      for (std::size_t r = 0; r < lam.size(); ++r) lam[r] += c * v_[k][r];
    }
    return lam;
  }

  std::vector<double> apply_transpose(const std::vector<double>& lam) const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (lam[r] == 0.0) continue;
      for (std::size_t i = 0; i < n_; ++i) out[i] += lam[r] * rows_[r][i];
    }
    return out;
  }

  double dot_b(const std::vector<double>& lam) const { return std::inner_product(b_.begin(), b_.end(), lam.begin(), 0.0); }

  double max_violation(const std::vector<double>& x) const {
    double m = 0.0;
    for (std::size_t r = 0; r < rows_.size(); ++r)
      m = std::max(m, std::abs(std::inner_product(rows_[r].begin(), rows_[r].end(), x.begin(), 0.0) - b_[r]));
    return m;
  }

 private:
  std::size_t d_, k_, n_ = 0;
  std::vector<std::vector<double>> rows_;
  std::vector<double> b_;
  std::vector<double> sigma_, beta_;
  std::vector<std::vector<double>> u_, v_;
};

// ---- closed forms -----------------------------------------------------------

bool busch_compatible(const Vec3& a, const Vec3& b) {
  if (norm(a) > 1.0 + 1e-12 || norm(b) > 1.0 + 1e-12) throw Error(ErrorCode::BlochOutOfBall, "|a| or |b| > 1");
  const Vec3 s{a[0] + b[0], a[1] + b[1], a[2] + b[2]};
  const Vec3 t{a[0] - b[0], a[1] - b[1], a[2] - b[2]};
  return norm(s) + norm(t) <= 2.0 + 1e-12;
}

namespace {
double f_value(double w, double c) {
  const double p = std::max(0.0, (1.0 + w) * (1.0 + w) - c * c);
  const double m = std::max(0.0, (1.0 - w) * (1.0 - w) - c * c);
  return 0.5 * (std::sqrt(p) + std::sqrt(m));
}
}  // namespace

double binary_pair_slack_raw(double w1, double c1, double w2, double c2, double dot, double cross) {
  const double f1 = f_value(w1, c1), f2 = f_value(w2, c2);
  if (f1 < 1e-12 || f2 < 1e-12) {
    // a sharp observable is compatible exactly with those commuting with it
    if (c1 == 0.0 || c2 == 0.0) return 0.0;
    const double s = cross / (c1 * c2);
    return s <= 1e-12 ? 0.0 : -s;
  }
  const double lhs = (1.0 - f1 * f1 - f2 * f2) * (1.0 - w1 * w1 / (f1 * f1) - w2 * w2 / (f2 * f2));
  const double r = dot - w1 * w2;
  return r * r - lhs;
}

double binary_pair_slack(const BinaryQubitObservable& a, const BinaryQubitObservable& b) {
  const Vec3 x{a.m[1] * b.m[2] - a.m[2] * b.m[1], a.m[2] * b.m[0] - a.m[0] * b.m[2], a.m[0] * b.m[1] - a.m[1] * b.m[0]};
  const double dot = a.m[0] * b.m[0] + a.m[1] * b.m[1] + a.m[2] * b.m[2];
  return binary_pair_slack_raw(a.w, norm(a.m), b.w, norm(b.m), dot, norm(x));
}

bool binary_pair_compatible(const BinaryQubitObservable& a, const BinaryQubitObservable& b) {
  return binary_pair_slack(a, b) >= -1e-12;
}

double channel_obs_threshold(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::ParamOutOfRange, "p outside [0, 1]");
  return 0.5 * (1.0 - p + std::sqrt((1.0 - p) * (1.0 + 3.0 * p)));
}

const char* to_string(FeasibilityStatus s) noexcept {
  switch (s) {
    case FeasibilityStatus::Feasible: return "feasible";
    case FeasibilityStatus::Infeasible: return "infeasible";
    case FeasibilityStatus::Ambiguous: return "ambiguous";
  }
  return "unknown";
}

// ---- problem ------------------------------------------------------------------

std::vector<State> spanning_states(std::size_t d) {
  std::vector<State> out;
  out.emplace_back((1.0 / static_cast<double>(d)) * HermitianOp::identity(d));
  for (std::size_t i = 0; i + 1 < d; ++i) {
    Matrix m(d);
    m(i, i) = 1.0;
    out.emplace_back(HermitianOp(m));
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      Matrix re(d), im(d);
      re(i, i) = re(j, j) = im(i, i) = im(j, j) = 0.5;
      re(i, j) = re(j, i) = 0.5;
      im(i, j) = cplx(0.0, -0.5);
      im(j, i) = cplx(0.0, 0.5);
      out.emplace_back(HermitianOp(re));
      out.emplace_back(HermitianOp(im));
    }
  return out;
}

FeasibilityProblem::FeasibilityProblem(std::vector<Observable> observables, std::vector<State> states)
    : obs_(std::move(observables)), states_(std::move(states)) {
  if (obs_.empty()) throw Error(ErrorCode::ShapeMismatch, "no observables");
  d_ = obs_[0].dim();
  for (const auto& o : obs_)
    if (o.dim() != d_) throw Error(ErrorCode::DimensionMismatch, "observables of different dimension");
  for (const auto& s : states_)
    if (s.dim() != d_) throw Error(ErrorCode::DimensionMismatch, "state dimension differs from observables");
  k_ = 1;
  strides_.assign(obs_.size(), 1);
  for (std::size_t j = obs_.size(); j-- > 0;) {
    strides_[j] = k_;
    k_ *= obs_[j].size();
    if (k_ > kMaxOutcomes) throw Error(ErrorCode::TooLarge, "product outcome count exceeds 4096");
  }
  if (states_.empty()) {
    full_space_ = true;
    states_ = spanning_states(d_);
  }
  constraints_ = std::make_shared<AffineConstraints>(*this);
}

std::size_t FeasibilityProblem::outcome_of(std::size_t k, std::size_t j) const {
  return (k / strides_[j]) % obs_[j].size();
}

std::vector<std::string> FeasibilityProblem::joint_labels() const {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < k_; ++k) {
    std::string s;
    for (std::size_t j = 0; j < obs_.size(); ++j) {
      if (j) s += ",";
      s += obs_[j].labels()[outcome_of(k, j)];
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ---- projections ----------------------------------------------------------------

HermitianOp project_psd(const HermitianOp& h) {
  return apply_spectral(h, [](double x) { return x > 0.0 ? x : 0.0; });
}

std::vector<HermitianOp> project_marginal_affine(const std::vector<HermitianOp>& g, const FeasibilityProblem& problem) {
  const std::size_t d = problem.dim(), dd = d * d;
  if (g.size() != problem.joint_outcomes()) throw Error(ErrorCode::ShapeMismatch, "tuple size differs from joint outcome count");
  std::vector<double> x(problem.joint_outcomes() * dd);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g[k].dim() != d) throw Error(ErrorCode::DimensionMismatch, "block dimension");
    to_vec(g[k], x.data() + k * dd);
  }
  problem.constraints().project(x);
  std::vector<HermitianOp> out;
  for (std::size_t k = 0; k < g.size(); ++k) out.push_back(from_vec(x.data() + k * dd, d));
  return out;
}

std::vector<HermitianOp> project_onto_povms(const std::vector<HermitianOp>& g, long max_iter, double tol) {
  if (g.empty()) throw Error(ErrorCode::ShapeMismatch, "empty tuple");
  const std::size_t d = g[0].dim(), dd = d * d, k = g.size();
  std::vector<double> x(k * dd), c(k * dd, 0.0), y(k * dd), idv(dd);
  to_vec(HermitianOp::identity(d), idv.data());
  for (std::size_t i = 0; i < k; ++i) to_vec(g[i], x.data() + i * dd);
  auto project_sum = [&](std::vector<double>& v) {
    for (std::size_t t = 0; t < dd; ++t) {
      double s = -idv[t];
      for (std::size_t i = 0; i < k; ++i) s += v[i * dd + t];
      s /= static_cast<double>(k);
      for (std::size_t i = 0; i < k; ++i) v[i * dd + t] -= s;
    }
  };
  project_sum(x);
  std::vector<double> prev = x;
  for (long it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + c[i];
    std::vector<double> p = y;
    for (std::size_t i = 0; i < k; ++i) project_psd_block(p.data() + i * dd, d);
    for (std::size_t i = 0; i < y.size(); ++i) c[i] = y[i] - p[i];
    x = p;
    project_sum(x);
    double change = 0.0, lo_min = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) change = std::max(change, std::abs(x[i] - prev[i]));
    for (std::size_t i = 0; i < k; ++i) {
      double lo, hi;
      block_eig_range(x.data() + i * dd, d, lo, hi);
      lo_min = std::min(lo_min, lo);
    }
    prev = x;
    if (change < tol && lo_min >= -tol) break;
  }
  std::vector<HermitianOp> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(from_vec(x.data() + i * dd, d));
  return out;
}

double marginal_residual(const FeasibilityProblem& problem, const std::vector<HermitianOp>& joint) {
  double worst = 0.0;
  for (std::size_t j = 0; j < problem.observables().size(); ++j) {
    const Observable& obs = problem.observables()[j];
    for (std::size_t x = 0; x < obs.size(); ++x) {
      HermitianOp marg(problem.dim());
      for (std::size_t k = 0; k < joint.size(); ++k)
        if (problem.outcome_of(k, j) == x) marg += joint[k];
      for (const auto& s : problem.states())
        worst = std::max(worst, std::abs(hs_inner(s.op(), marg) - hs_inner(s.op(), obs.effect(x).op())));
    }
  }
  return worst;
}

Observable joint_marginal(const FeasibilityProblem& problem, const Observable& joint, std::size_t j) {
  const Observable& obs = problem.observables().at(j);
  std::vector<HermitianOp> ops(obs.size(), HermitianOp(problem.dim()));
  for (std::size_t k = 0; k < joint.size(); ++k) ops[problem.outcome_of(k, j)] += joint.effect(k).op();
  double lo = 0.0;
  for (const auto& op : ops) lo = std::min(lo, min_eigenvalue(op));
  return Observable::from_ops(obs.labels(), ops, std::max(Effect::kTol, -2.0 * lo));
}

// ---- oracle -----------------------------------------------------------------------

FeasibilityResult joint_feasible(const FeasibilityProblem& problem, const SolverOptions& opts) {
  const AffineConstraints& aff = problem.constraints();
  const std::size_t d = problem.dim(), dd = d * d, kk = problem.joint_outcomes(), n = aff.n();
  // Declared-feasible iterates are required to be PSD to a tenth of tol_psd.
  const double psd_accept = 0.1 * opts.tol_psd;

  std::vector<double> x(n, 0.0), c(n, 0.0), y(n), p(n);
  aff.project(x);
  std::vector<double> gap_hist(static_cast<std::size_t>(std::max<long>(opts.stall_window, 1)), 0.0);

  FeasibilityResult res;
  double gap = 0.0;
  long it = 0;

  // Affine-exact vector v: accept when PSD within psd_accept and marginals within tol_marginal.
  auto try_accept = [&](const std::vector<double>& v) {
    for (std::size_t k = 0; k < kk; ++k) {
      double lo, hi;
      block_eig_range(v.data() + k * dd, d, lo, hi);
      if (lo < -psd_accept) return false;
    }
    std::vector<HermitianOp> blocks;
    for (std::size_t k = 0; k < kk; ++k) blocks.push_back(from_vec(v.data() + k * dd, d));
    const double resid = marginal_residual(problem, blocks);
    if (resid > opts.tol_marginal) return false;
    res.status = FeasibilityStatus::Feasible;
    res.joint = Observable::from_ops(problem.joint_labels(), blocks,
                                     std::max(Effect::kTol, static_cast<double>(kk) * opts.tol_psd));
    res.residual = resid;
    res.iterations = it;
    res.gap = gap;
    return true;
  };

  // Dykstra heads for the minimum-norm solution, which sits on the cone boundary; there the affine
  // iterate approaches from outside, sometimes very slowly. Plain alternating projections onto a
  // shifted cone {G >= floor} converge linearly to an interior point whenever the margin exceeds floor.
  auto polish = [&](double floor, long steps) {
    std::vector<double> v = x;
    for (long s = 0; s < steps; ++s) {
      for (std::size_t k = 0; k < kk; ++k) project_psd_floor_block(v.data() + k * dd, d, floor);
      aff.project(v);
      if (s % 10 == 9 && try_accept(v)) return true;
    }
    return false;
  };
  long next_polish = 0;

  for (it = 1; it <= opts.max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + c[i];
    p = y;
    for (std::size_t k = 0; k < kk; ++k) project_psd_block(p.data() + k * dd, d);
    for (std::size_t i = 0; i < n; ++i) c[i] = y[i] - p[i];
    x = p;
    aff.project(x);

    double g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) g2 += (x[i] - p[i]) * (x[i] - p[i]);
    gap = std::sqrt(g2);

    if (try_accept(x)) return res;
    if (gap <= 1e3 * opts.tol_gap && it >= next_polish) {
      for (double floor : {1e-4, 1e-6, 1e-9})
        if (polish(floor, 1000)) return res;
      next_polish = it + 10000;
    }

    if (gap > opts.tol_gap && (it % 10 == 0)) {
      const std::vector<double> lam = aff.multipliers(p);
      const std::vector<double> nvec = aff.apply_transpose(lam);
      double eps_plus = 0.0;
      for (std::size_t k = 0; k < kk; ++k) {
        double lo, hi;
        block_eig_range(nvec.data() + k * dd, d, lo, hi);
        eps_plus = std::max(eps_plus, hi);
      }
      const double dual = aff.dot_b(lam);
      const double nn = norm2(nvec);
      if (dual - static_cast<double>(d) * eps_plus > 0.01 * nn * nn) {
        InfeasibilityCertificate cert;
        cert.normalization = from_vec(lam.data(), d);
        std::size_t r = dd;
        for (const auto& obs : problem.observables()) {
          cert.lambda.emplace_back();
          for (std::size_t xo = 0; xo < obs.size(); ++xo) {
            cert.lambda.back().emplace_back();
            for (std::size_t l = 0; l < problem.states().size(); ++l) cert.lambda.back().back().push_back(lam[r++]);
          }
        }
        cert.dual_value = dual;
        cert.max_positive_eig = eps_plus;
        res.status = FeasibilityStatus::Infeasible;
        res.certificate = std::move(cert);
        res.residual = gap;
        res.iterations = it;
        res.gap = gap;
        return res;
      }
    }

    const std::size_t slot = static_cast<std::size_t>(it) % gap_hist.size();
    if (it > static_cast<long>(gap_hist.size()) && gap > opts.tol_gap) {
      const double old = gap_hist[slot];
      if (std::abs(old - gap) <= opts.stall_rel * old) {
        res.status = FeasibilityStatus::Infeasible;
        res.residual = gap;
        res.iterations = it;
        res.gap = gap;
        return res;
      }
    }
    gap_hist[slot] = gap;
  }

  if (gap > opts.tol_gap) {
    std::ostringstream os;
    os << "iteration cap " << opts.max_iter << " reached with gap " << gap;
    throw Error(ErrorCode::NonConvergent, os.str());
  }
  res.status = FeasibilityStatus::Ambiguous;
  res.residual = gap;
  res.iterations = opts.max_iter;
  res.gap = gap;
  return res;
}

}  // namespace incodim
