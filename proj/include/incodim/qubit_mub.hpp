#pragma once

#include <array>
#include <optional>
#include <vector>

#include "incodim/feasibility.hpp"

namespace incodim {

using Vec2 = std::array<double, 2>;

// Chord of the Bloch disk with endpoint angles phi0 -/+ psi0, noise level t.
struct Segment {
  double t = 1.0;
  double phi0 = 0.0;
  double psi0 = 0.0;

  Segment() = default;
  Segment(double t, double phi0, double psi0);
  double phi1() const { return phi0 - psi0; }
  double phi2() const { return phi0 + psi0; }
  Vec2 r1() const;
  Vec2 r2() const;
};

struct XiRange {
  double xi_min = 0.0;
  double xi_max = 0.0;
};

struct CW {
  double c = 0.0;
  double w = 0.0;
};

// Length C and bias w of the "+" effect with direction (cos xi, sin xi) that agrees with
// A^{t x} on both chord endpoints.
CW c_and_w(double t, double phi0, double psi0, double xi);

XiRange xi_range_first(double t, double phi0, double psi0);
XiRange xi_range_second(double t, double phi0, double psi0);

// psi0 -> 0 limit of xi_min at t = 1/sqrt2.
double Xi1_limit(double phi0);

double z_value(double t, double phi0, double psi0);

// Members of the two effect families, directions (cos xi, sin xi) and (sin xi, cos xi).
BinaryQubitObservable first_member(const Segment& s, double xi);
BinaryQubitObservable second_member(const Segment& s, double xi);

struct SegmentVerdict {
  bool compatible = false;
  bool boundary = false;   // decided by the boundary rule
  bool shortcut = false;   // decided by xi1_min + xi2_min <= -pi/2
  double slack = 0.0;      // best pair-criterion slack found, or the shortcut angle slack
  double xi1 = 0.0, xi2 = 0.0;
};

// Maximizes the pair-criterion slack over the admissible rectangle: grid_n x grid_n scan then a
// zoom refinement around the best node. With stop_early the scan returns at the first compatible node.
SegmentVerdict segment_search(const Segment& s, int grid_n, bool stop_early = true);
bool segment_compatible(const Segment& s, int grid_n = 64);

struct MubSearchOptions {
  int grid_n = 64;
  int refine_top = 8;
  int threads = 1;
};

struct ChiMubResult {
  int chi = 3;
  double margin = 0.0;  // largest incompatibility margin found (> 0 means a detecting chord)
  Segment best;         // segment attaining it
  int grid_n = 0;
};

ChiMubResult chi_incomp_mub_search(double t, const MubSearchOptions& opts = {});
int chi_incomp_mub(double t, const MubSearchOptions& opts = {});

struct ThresholdResult {
  double t0 = 0.0;
  double tol = 0.0;
  int grid_n = 0;
  std::vector<std::pair<double, int>> evaluations;  // (t, chi) in evaluation order
};

// Bisection for the jump of chi from 3 to 2. A bracket (lo, hi) with chi(lo) = 3 and chi(hi) = 2
// may be supplied; otherwise a 1e-2 sweep over (1/sqrt2, 1] establishes it and checks monotonicity.
ThresholdResult find_threshold(double tol, const MubSearchOptions& opts = {},
                               std::optional<std::pair<double, double>> bracket = std::nullopt);

struct LambdaFamily {
  Vec3 base;       // (c0, c1, c2) at lambda = 0
  Vec3 direction;  // (1, n)
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;

  BinaryQubitObservable member(double lambda) const;  // validated
  Vec3 coefficients(double lambda) const;
};

// axis 0: family around A^{t x}; axis 1: around A^{t y}.
LambdaFamily lambda_family(double t, const Vec2& r1, const Vec2& r2, int axis = 0);

struct SweepRow {
  double t, phi0, psi0, xi1_min, xi1_max, xi2_min, xi2_max, z;
  bool compatible;
};

// Cell-centred grid_n x grid_n (phi0, psi0) sweep at noise t.
std::vector<SweepRow> sweep_rows(double t, int grid_n, int threads = 1);

}  // namespace incodim
