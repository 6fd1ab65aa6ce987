#include "incodim/qubit_mub.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <thread>

namespace incodim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

void check_domain(double t, double phi0, double psi0) {
  if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorCode::NoSolution, "t outside (0, 1]");
  if (!(phi0 > 0.0 && phi0 < kHalfPi)) throw Error(ErrorCode::NoSolution, "phi0 outside (0, pi/2)");
  if (!(psi0 > 0.0 && psi0 < kHalfPi)) throw Error(ErrorCode::NoSolution, "psi0 outside (0, pi/2)");
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) f(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

Segment::Segment(double t_, double phi0_, double psi0_) : t(t_), phi0(phi0_), psi0(psi0_) {
  if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorCode::ParamOutOfRange, "t outside (0, 1]");
  if (!(phi0 >= 0.0 && phi0 <= kHalfPi)) throw Error(ErrorCode::ParamOutOfRange, "phi0 outside [0, pi/2]");
  if (!(psi0 > 0.0 && psi0 <= kHalfPi)) throw Error(ErrorCode::ParamOutOfRange, "psi0 outside (0, pi/2]");
}

Vec2 Segment::r1() const { return {std::cos(phi1()), std::sin(phi1())}; }
Vec2 Segment::r2() const { return {std::cos(phi2()), std::sin(phi2())}; }

CW c_and_w(double t, double phi0, double psi0, double xi) {
  const double den = std::sin(phi0 - xi);
  if (!(den > 1e-12)) throw Error(ErrorCode::SingularDirection, "sin(phi0 - xi) <= 1e-12");
  return {t * std::sin(phi0) / den, -t * std::cos(psi0) * std::sin(xi) / den};
}

XiRange xi_range_first(double t, double phi0, double psi0) {
  check_domain(t, phi0, psi0);
  const double sp = std::sin(phi0), cp = std::cos(phi0), cq = std::cos(psi0);

  // xi_min: 1 - w = C  <=>  cos(xi)/t + h sin(xi) = 1; sin(xi) is the nonpositive root of
  // (t^2 cq^2 - 2 t cp cq + 1) s^2 - 2 t sp (t cq - cp) s + (t^2 - 1) sp^2 = 0.
  const double h = (t * cq - cp) / (t * sp);
  const double qa = t * t * cq * cq - 2.0 * t * cp * cq + 1.0;
  const double qb = -2.0 * t * sp * (t * cq - cp);
  const double qc = (t * t - 1.0) * sp * sp;
  const double disc = std::max(0.0, qb * qb - 4.0 * qa * qc);
  const double q = -0.5 * (qb + (qb >= 0.0 ? 1.0 : -1.0) * std::sqrt(disc));
  double s = 0.0;
  if (q != 0.0) s = std::min({q / qa, qc / q, 0.0});
  double xi_min = std::atan2(s, t * (1.0 - h * s));
  for (int k = 0; k < 2 && xi_min != 0.0; ++k) {
    const double f = std::cos(xi_min) / t + h * std::sin(xi_min) - 1.0;
    const double fp = -std::sin(xi_min) / t + h * std::cos(xi_min);
    if (fp != 0.0) xi_min = std::min(0.0, xi_min - f / fp);
  }

  // xi_max: 1 + w = C. The numerator sin(phi0 - xi) - t cq sin(xi) - t sp is strictly
  // decreasing on [0, phi0), nonnegative at 0 and negative at phi0.
  auto num = [&](double xi) { return std::sin(phi0 - xi) - t * cq * std::sin(xi) - t * sp; };
  double lo = 0.0, hi = phi0;
  for (int k = 0; k < 80; ++k) {
    const double mid = 0.5 * (lo + hi);
    (num(mid) >= 0.0 ? lo : hi) = mid;
  }
  return {xi_min, lo};
}

XiRange xi_range_second(double t, double phi0, double psi0) { return xi_range_first(t, kHalfPi - phi0, psi0); }

double Xi1_limit(double phi0) {
  if (!(phi0 > 0.0 && phi0 < kHalfPi)) throw Error(ErrorCode::ParamOutOfRange, "phi0 outside (0, pi/2)");
  const double r2 = std::sqrt(2.0);
  const double c = std::cos(phi0);
  const double arg = kInvSqrt2 * (4.0 - 3.0 * r2 * c) / (3.0 - 2.0 * r2 * c);
  return -std::acos(std::clamp(arg, -1.0, 1.0));
}

double z_value(double t, double phi0, double psi0) {
  const XiRange a = xi_range_first(t, phi0, psi0);
  const XiRange b = xi_range_second(t, phi0, psi0);
  const double w1 = c_and_w(t, phi0, psi0, a.xi_min).w;
  const double w2 = c_and_w(t, kHalfPi - phi0, psi0, b.xi_min).w;
  const double s = std::sin(a.xi_min + b.xi_min);
  return (1.0 + s) * (1.0 + w1 + w2) - (1.0 - s) * w1 * w2;
}

BinaryQubitObservable first_member(const Segment& s, double xi) {
  const CW cw = c_and_w(s.t, s.phi0, s.psi0, xi);
  return BinaryQubitObservable(cw.w, {cw.c * std::cos(xi), cw.c * std::sin(xi), 0.0});
}

BinaryQubitObservable second_member(const Segment& s, double xi) {
  const CW cw = c_and_w(s.t, kHalfPi - s.phi0, s.psi0, xi);
  return BinaryQubitObservable(cw.w, {cw.c * std::sin(xi), cw.c * std::cos(xi), 0.0});
}

// ---- segment decision ---------------------------------------------------------

namespace {

struct Node {
  double xi, c, w, cs, sn;
};

Node make_node(double t, double phi0, double psi0, double xi) {
  const CW cw = c_and_w(t, phi0, psi0, xi);
  return {xi, cw.c, cw.w, std::cos(xi), std::sin(xi)};
}

// m1 = C1 (cos xi1, sin xi1), m2 = C2 (sin xi2, cos xi2): m1.m2 = C1 C2 sin(xi1 + xi2),
// |m1 x m2| = C1 C2 |cos(xi1 + xi2)|.
inline double node_slack(const Node& a, const Node& b) {
  const double cc = a.c * b.c;
  const double sum_sin = a.sn * b.cs + a.cs * b.sn;
  const double sum_cos = a.cs * b.cs - a.sn * b.sn;
  return binary_pair_slack_raw(a.w, a.c, b.w, b.c, cc * sum_sin, cc * std::abs(sum_cos));
}

std::vector<Node> nodes_on(double lo, double hi, int n, double t, double phi0, double psi0) {
  std::vector<Node> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double xi = (n == 1 || hi <= lo) ? lo : lo + (hi - lo) * i / (n - 1);
    out.push_back(make_node(t, phi0, psi0, xi));
  }
  return out;
}

constexpr double kCompatTol = -1e-12;
// a chord detects incompatibility when the best slack is below kCompatTol
constexpr double kMarginTol = -kCompatTol;

}  // namespace

SegmentVerdict segment_search(const Segment& s, int grid_n, bool stop_early) {
  if (grid_n < 16) throw Error(ErrorCode::ParamOutOfRange, "grid_n must be at least 16");
  SegmentVerdict v;
  if (s.psi0 >= kHalfPi - 1e-9 || s.phi0 <= 1e-9 || s.phi0 >= kHalfPi - 1e-9) {
    v.compatible = true;
    v.boundary = true;
    return v;
  }
  const double phi0b = kHalfPi - s.phi0;
  const XiRange r1 = xi_range_first(s.t, s.phi0, s.psi0);
  const XiRange r2 = xi_range_first(s.t, phi0b, s.psi0);
  const double sum = r1.xi_min + r2.xi_min;
  if (sum <= -kHalfPi) {
    v.compatible = true;
    v.shortcut = true;
    v.slack = -kHalfPi - sum;
    v.xi1 = std::max(r1.xi_min, -kHalfPi);
    v.xi2 = -kHalfPi - v.xi1;
    return v;
  }

  const auto a = nodes_on(r1.xi_min, r1.xi_max, grid_n, s.t, s.phi0, s.psi0);
  const auto b = nodes_on(r2.xi_min, r2.xi_max, grid_n, s.t, phi0b, s.psi0);
  int bi = 0, bj = 0;
  double best = -INFINITY;
  for (int i = 0; i < grid_n; ++i)
    for (int j = 0; j < grid_n; ++j) {
      const double g = node_slack(a[i], b[j]);
      if (g > best) {
        best = g;
        bi = i;
        bj = j;
        if (stop_early && best >= kCompatTol) {
          v.compatible = true;
          v.slack = best;
          v.xi1 = a[i].xi;
          v.xi2 = b[j].xi;
          return v;
        }
      }
    }
  v.slack = best;
  v.xi1 = a[bi].xi;
  v.xi2 = b[bj].xi;
  if (best >= kCompatTol) {
    v.compatible = true;
    return v;
  }

  // zoom refinement around the best node
  double h1 = (r1.xi_max - r1.xi_min) / (grid_n - 1);
  double h2 = (r2.xi_max - r2.xi_min) / (grid_n - 1);
  constexpr int m = 9;
  for (int level = 0; level < 40 && (h1 > 1e-14 || h2 > 1e-14); ++level) {
    const double lo1 = std::max(r1.xi_min, v.xi1 - h1), hi1 = std::min(r1.xi_max, v.xi1 + h1);
    const double lo2 = std::max(r2.xi_min, v.xi2 - h2), hi2 = std::min(r2.xi_max, v.xi2 + h2);
    const auto za = nodes_on(lo1, hi1, m, s.t, s.phi0, s.psi0);
    const auto zb = nodes_on(lo2, hi2, m, s.t, phi0b, s.psi0);
    for (const auto& na : za)
      for (const auto& nb : zb) {
        const double g = node_slack(na, nb);
        if (g > v.slack) {
          v.slack = g;
          v.xi1 = na.xi;
          v.xi2 = nb.xi;
        }
      }
    if (v.slack >= kCompatTol) {
      v.compatible = true;
      return v;
    }
    h1 = 2.0 * h1 / (m - 1);
    h2 = 2.0 * h2 / (m - 1);
  }
  return v;
}

bool segment_compatible(const Segment& s, int grid_n) { return segment_search(s, grid_n, true).compatible; }

// ---- chi and threshold ----------------------------------------------------------

namespace {

// Positive when the chord detects incompatibility.
double incompat_margin(double t, double phi0, double psi0, int grid_n) {
  const SegmentVerdict v = segment_search(Segment(t, phi0, psi0), grid_n, false);
  if (v.boundary) return -1.0;
  return -v.slack;
}

template <class F>
double golden_max(F f, double lo, double hi, double& arg, int iters = 40) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int k = 0; k < iters; ++k) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
  }
  arg = f1 >= f2 ? x1 : x2;
  return std::max(f1, f2);
}

}  // namespace

ChiMubResult chi_incomp_mub_search(double t, const MubSearchOptions& opts) {
  if (!(t > kInvSqrt2 + 1e-9)) throw Error(ErrorCode::CompatiblePair, "t <= 1/sqrt2: the pair is compatible");
  if (t > 1.0) throw Error(ErrorCode::ParamOutOfRange, "t > 1");
  if (opts.grid_n < 16) throw Error(ErrorCode::ParamOutOfRange, "grid_n must be at least 16");
  const int n = opts.grid_n;
  const double h = kHalfPi / n;
  // chords (phi0, psi0) and (pi/2 - phi0, psi0) are mirror images with the observables exchanged
  const int rows = (n + 1) / 2;
  std::vector<double> margin(static_cast<std::size_t>(rows) * n);
  parallel_for(static_cast<std::size_t>(rows), opts.threads, [&](std::size_t i) {
    for (int j = 0; j < n; ++j)
      margin[i * n + j] = incompat_margin(t, (i + 0.5) * h, (j + 0.5) * h, n);
  });

  ChiMubResult res;
  res.grid_n = n;
  std::vector<std::size_t> order(margin.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return margin[x] > margin[y]; });
  const std::size_t top = order.front();
  res.margin = margin[top];
  res.best = Segment(t, (top / n + 0.5) * h, (top % n + 0.5) * h);
  if (res.margin > kMarginTol) {
    res.chi = 2;
    return res;
  }

  const std::size_t cells = std::min<std::size_t>(static_cast<std::size_t>(std::max(opts.refine_top, 0)), order.size());
  std::vector<std::pair<double, Segment>> refined(cells);
  parallel_for(cells, opts.threads, [&](std::size_t c) {
    const std::size_t k = order[c];
    double phi = (k / n + 0.5) * h, psi = (k % n + 0.5) * h;
    const double philo = std::max(phi - h, 1e-6), phihi = std::min(phi + h, kHalfPi - 1e-6);
    const double psilo = std::max(psi - h, 1e-6), psihi = std::min(psi + h, kHalfPi - 1e-6);
    double val = margin[k];
    for (int round = 0; round < 2 && val <= kMarginTol; ++round) {
      double arg = psi;
      double v1 = golden_max([&](double p) { return incompat_margin(t, phi, p, n); }, psilo, psihi, arg);
      if (v1 > val) {
        val = v1;
        psi = arg;
      }
      if (val > kMarginTol) break;
      arg = phi;
      double v2 = golden_max([&](double p) { return incompat_margin(t, p, psi, n); }, philo, phihi, arg);
      if (v2 > val) {
        val = v2;
        phi = arg;
      }
    }
    refined[c] = {val, Segment(t, phi, psi)};
  });
  for (const auto& [val, seg] : refined)
    if (val > res.margin) {
      res.margin = val;
      res.best = seg;
    }
  res.chi = res.margin > kMarginTol ? 2 : 3;
  return res;
}

int chi_incomp_mub(double t, const MubSearchOptions& opts) { return chi_incomp_mub_search(t, opts).chi; }

ThresholdResult find_threshold(double tol, const MubSearchOptions& opts, std::optional<std::pair<double, double>> bracket) {
  if (!(tol >= 1e-5)) throw Error(ErrorCode::ParamOutOfRange, "tol must be at least 1e-5");
  ThresholdResult res;
  res.tol = tol;
  res.grid_n = opts.grid_n;
  auto chi = [&](double t) {
    const int c = chi_incomp_mub(t, opts);
    res.evaluations.emplace_back(t, c);
    return c;
  };

  double lo = 0.0, hi = 0.0;
  bool have = false;
  if (bracket) {
    lo = bracket->first;
    hi = bracket->second;
    have = lo < hi && chi(lo) == 3 && chi(hi) == 2;
  }
  if (!have) {
    std::vector<double> ts{kInvSqrt2 + 1e-3};
    for (int k = 1; k <= 29; ++k) ts.push_back(0.70 + 0.01 * k);
    ts.push_back(1.0);
    int prev = 3;
    bool seen_two = false;
    lo = kInvSqrt2;
    for (double t : ts) {
      const int c = chi(t);
      if (c > prev) {
        std::ostringstream os;
        os << "chi rises from " << prev << " to " << c << " at t = " << t;
        throw Error(ErrorCode::NonMonotoneWitness, os.str());
      }
      if (c == 3) lo = t;
      if (c == 2 && !seen_two) {
        hi = t;
        seen_two = true;
      }
      prev = c;
    }
    if (!seen_two) throw Error(ErrorCode::NonMonotoneWitness, "no detecting chord found even at t = 1");
    if (lo == kInvSqrt2) throw Error(ErrorCode::NonMonotoneWitness, "chi = 2 already next to 1/sqrt2");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (chi(mid) == 2 ? hi : lo) = mid;
  }
  res.t0 = lo;
  return res;
}

// ---- lambda family ------------------------------------------------------------------

Vec3 LambdaFamily::coefficients(double lambda) const {
  return {base[0] + lambda * direction[0], base[1] + lambda * direction[1], base[2] + lambda * direction[2]};
}

BinaryQubitObservable LambdaFamily::member(double lambda) const {
  const Vec3 c = coefficients(lambda);
  return BinaryQubitObservable(c[0] - 1.0, {c[1], c[2], 0.0});
}

LambdaFamily lambda_family(double t, const Vec2& r1, const Vec2& r2, int axis) {
  if (axis != 0 && axis != 1) throw Error(ErrorCode::ParamOutOfRange, "axis must be 0 or 1");
  const double det = r1[0] * r2[1] - r1[1] * r2[0];
  if (std::abs(det) < 1e-12) throw Error(ErrorCode::DegenerateChord, "chord passes through the origin");
  if (std::abs(r1[axis] - r2[axis]) < 1e-12) throw Error(ErrorCode::DegenerateChord, "endpoints share the axis component");
  // n . r1 = n . r2 = -1
  const Vec2 n{(-r2[1] + r1[1]) / det, (-r1[0] + r2[0]) / det};
  const double nn = n[0] * n[0] + n[1] * n[1];
  const double na = n[axis];
  const double k = nn - 1.0;
  LambdaFamily f;
  f.base = {1.0, axis == 0 ? t : 0.0, axis == 1 ? t : 0.0};
  f.direction = {1.0, n[0], n[1]};
  f.lambda_lo = (1.0 - na * t - std::sqrt((1.0 - na * t) * (1.0 - na * t) + k * (1.0 - t * t))) / k;
  f.lambda_hi = std::min(1.0, (-1.0 - na * t + std::sqrt((1.0 + na * t) * (1.0 + na * t) + k * (1.0 - t * t))) / k);
  return f;
}

// ---- sweep ----------------------------------------------------------------------------

std::vector<SweepRow> sweep_rows(double t, int grid_n, int threads) {
  if (grid_n < 16) throw Error(ErrorCode::ParamOutOfRange, "grid_n must be at least 16");
  const double h = kHalfPi / grid_n;
  std::vector<SweepRow> rows(static_cast<std::size_t>(grid_n) * grid_n);
  parallel_for(static_cast<std::size_t>(grid_n), threads, [&](std::size_t i) {
    for (int j = 0; j < grid_n; ++j) {
      const double phi0 = (i + 0.5) * h, psi0 = (j + 0.5) * h;
      const XiRange a = xi_range_first(t, phi0, psi0);
      const XiRange b = xi_range_second(t, phi0, psi0);
      rows[i * grid_n + j] = {t, phi0, psi0, a.xi_min, a.xi_max, b.xi_min, b.xi_max, z_value(t, phi0, psi0),
                              segment_compatible(Segment(t, phi0, psi0), grid_n)};
    }
  });
  return rows;
}

}  // namespace incodim
