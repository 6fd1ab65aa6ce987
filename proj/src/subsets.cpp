#include "incodim/subsets.hpp"

#include <algorithm>
#include <cmath>

namespace incodim {

namespace {

std::vector<double> real_coords(const HermitianOp& h) {
  std::vector<double> v;
  const std::size_t d = h.dim();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      v.push_back(h(i, j).real());
      v.push_back(h(i, j).imag());
    }
  return v;
}

}  // namespace

std::size_t affine_dimension(const std::vector<State>& states) {
  if (states.empty()) throw Error(ErrorCode::EmptySet, "no states");
  const std::size_t d = states[0].dim();
  std::vector<std::vector<double>> cols;
  for (std::size_t i = 1; i < states.size(); ++i) {
    if (states[i].dim() != d) throw Error(ErrorCode::DimensionMismatch, "states of different dimension");
    cols.push_back(real_coords(states[i].op() - states[0].op()));
  }
  if (cols.empty()) return 0;
  return numerical_rank(svd_columns(std::move(cols)), 1e-10);
}

StateSubset::StateSubset(std::vector<State> states) : states_(std::move(states)) {
  affine_dim_ = affine_dimension(states_);
}

Observable distinguishable_extension(const std::vector<Observable>& observables, const std::vector<std::vector<cplx>>& basis) {
  if (observables.empty()) throw Error(ErrorCode::ShapeMismatch, "no observables");
  const std::size_t d = observables[0].dim();
  if (basis.size() != d) throw Error(ErrorCode::NotOrthonormal, "basis size differs from dimension");
  for (const auto& v : basis)
    if (v.size() != d) throw Error(ErrorCode::NotOrthonormal, "basis vector length differs from dimension");
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      cplx ip = 0.0;
      for (std::size_t i = 0; i < d; ++i) ip += std::conj(basis[a][i]) * basis[b][i];
      if (std::abs(ip - (a == b ? 1.0 : 0.0)) > 1e-10) throw Error(ErrorCode::NotOrthonormal, "basis is not orthonormal");
    }

  std::vector<HermitianOp> proj;
  for (const auto& v : basis) {
    Matrix m(d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) m(i, j) = v[i] * std::conj(v[j]);
    proj.emplace_back(m);
  }

  std::size_t total = 1;
  for (const auto& o : observables) {
    if (o.dim() != d) throw Error(ErrorCode::DimensionMismatch, "observables of different dimension");
    total *= o.size();
    if (total > FeasibilityProblem::kMaxOutcomes) throw Error(ErrorCode::TooLarge, "product outcome count exceeds 4096");
  }

  std::vector<std::string> labels;
  std::vector<HermitianOp> ops;
  std::vector<std::size_t> idx(observables.size(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    std::string label;
    HermitianOp g(d);
    for (std::size_t i = 0; i < d; ++i) {
      double w = 1.0;
      for (std::size_t j = 0; j < observables.size(); ++j) w *= hs_inner(proj[i], observables[j].effect(idx[j]).op());
      g += w * proj[i];
    }
    for (std::size_t j = 0; j < observables.size(); ++j) {
      if (j) label += ",";
      label += observables[j].labels()[idx[j]];
    }
    labels.push_back(std::move(label));
    ops.push_back(std::move(g));
    for (std::size_t j = observables.size(); j-- > 0;) {
      if (++idx[j] < observables[j].size()) break;
      idx[j] = 0;
    }
  }
  return Observable::from_ops(std::move(labels), ops);
}

Observable fixed_marginal_construction(const Observable& a, const Observable& b, const State& rho0) {
  if (a.dim() != b.dim() || a.dim() != rho0.dim()) throw Error(ErrorCode::DimensionMismatch, "fixed-marginal construction");
  std::vector<std::string> labels;
  std::vector<HermitianOp> ops;
  for (std::size_t x = 0; x < a.size(); ++x) {
    const double px = hs_inner(rho0.op(), a.effect(x).op());
    for (std::size_t y = 0; y < b.size(); ++y) {
      labels.push_back(a.labels()[x] + "," + b.labels()[y]);
      ops.push_back(px * b.effect(y).op());
    }
  }
  return Observable::from_ops(std::move(labels), ops);
}

bool is_rank_one_projection(const HermitianOp& p, double tol) {
  const HermitianOp sq(p.matrix() * p.matrix());
  return max_abs_diff(sq, p) <= tol && std::abs(p.trace() - 1.0) <= tol;
}

StateSubset pq_detector(const Effect& p, const Effect& q) {
  const std::size_t d = p.dim();
  if (q.dim() != d) throw Error(ErrorCode::DimensionMismatch, "projections of different dimension");
  if (d < 2) throw Error(ErrorCode::PreconditionViolated, "dimension must be at least 2");
  if (!is_rank_one_projection(p.op()) || !is_rank_one_projection(q.op()))
    throw Error(ErrorCode::PreconditionViolated, "P and Q must be rank-1 projections");
  const Matrix comm = p.op().matrix() * q.op().matrix() - q.op().matrix() * p.op().matrix();
  if (comm.max_abs() <= 1e-8) throw Error(ErrorCode::CommutingProjections, "PQ = QP");
  const double s = 1.0 / static_cast<double>(d - 1);
  const HermitianOp id = HermitianOp::identity(d);
  return StateSubset({State(s * (id - p.op())), State(s * (id - q.op()))});
}

namespace {

// Dimension of the span of the traceless parts of an observable's effects.
std::size_t traceless_rank(const Observable& o) {
  const std::size_t d = o.dim();
  std::vector<std::vector<double>> cols;
  for (const auto& e : o.effects()) {
    const HermitianOp t = e.op() - (e.op().trace() / static_cast<double>(d)) * HermitianOp::identity(d);
    cols.push_back(real_coords(t));
  }
  return numerical_rank(svd_columns(std::move(cols)), 1e-10);
}

std::optional<std::size_t> rank_one_effect(const Observable& o) {
  for (std::size_t x = 0; x < o.size(); ++x)
    if (is_rank_one_projection(o.effect(x).op())) return x;
  return std::nullopt;
}

}  // namespace

ChiBounds chi_bounds(const std::vector<Observable>& observables, const SolverOptions& opts) {
  const FeasibilityResult full = joint_feasible(FeasibilityProblem(observables), opts);
  if (full.status == FeasibilityStatus::Feasible) throw Error(ErrorCode::NotIncompatible, "observables are compatible");
  if (full.status == FeasibilityStatus::Ambiguous) throw Error(ErrorCode::Ambiguous, "full-space oracle is ambiguous");

  const int d = static_cast<int>(observables[0].dim());
  const int n = static_cast<int>(observables.size());
  int msum = 0;
  for (const auto& o : observables) msum += static_cast<int>(o.size());

  ChiBounds out;
  out.incomp.lower = 2;
  out.incomp.upper = std::min(d * d, msum - n + 1);
  out.comp.lower = d;
  out.comp.upper = d * d - 1;

  if (n == 2) {
    const auto pa = rank_one_effect(observables[0]);
    const auto pb = rank_one_effect(observables[1]);
    if (pa && pb) {
      try {
        const StateSubset s = pq_detector(observables[0].effect(*pa), observables[1].effect(*pb));
        if (observables[0].size() == 2 && observables[1].size() == 2) {
          const FeasibilityResult r = joint_feasible(FeasibilityProblem(observables, s.states()), opts);
          if (r.status == FeasibilityStatus::Infeasible) {
            out.incomp.exact = 2;
            out.certificates.push_back("pq_detector");
          }
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::CommutingProjections) throw;
      }
    }

    // G(x, y) = tr[rho0 A(x)] B(y) reproduces A on {rho : tr[rho A(x)] = tr[A(x)]/d}, a set of
    // affine dimension d^2 - 1 - r with r the traceless rank of A's effects.
    const std::size_t r = std::min(traceless_rank(observables[0]), traceless_rank(observables[1]));
    const int lower = d * d - static_cast<int>(r);
    if (lower > out.comp.lower) {
      out.comp.lower = std::min(lower, out.comp.upper);
      out.certificates.push_back("fixed_marginal_construction");
    }
  }

  if (!out.incomp.exact && out.incomp.lower == out.incomp.upper) out.incomp.exact = out.incomp.lower;
  if (out.comp.lower == out.comp.upper) out.comp.exact = out.comp.lower;
  return out;
}

}  // namespace incodim
