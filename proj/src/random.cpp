#include "incodim/random.hpp"

#include <cmath>
#include <numbers>

namespace incodim {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed) {
  std::uint64_t s = seed;
  std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s)),
                    static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s))};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), eng_(seeded_engine(seed)) {}

Rng Rng::split(std::uint64_t stream) const {
  std::uint64_t s = seed_ ^ (0xD1B54A32D192ED03ULL * (stream + 1));
  return Rng(splitmix64(s));
}

// The <random> distributions are implementation-defined; these are spelled out so streams
// are reproducible across standard libraries.
double Rng::uniform(double lo, double hi) {
  const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

Vec3 random_unit_vector(Rng& rng) {
  for (;;) {
    Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = norm(v);
    if (n > 1e-8) return {v[0] / n, v[1] / n, v[2] / n};
  }
}

Vec3 random_in_ball(Rng& rng, double radius) {
  const Vec3 u = random_unit_vector(rng);
  const double r = radius * std::cbrt(rng.uniform());
  return {r * u[0], r * u[1], r * u[2]};
}

Matrix random_ginibre(std::size_t d, Rng& rng) {
  Matrix g(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) g(i, j) = cplx(rng.normal(), rng.normal());
  return g;
}

Matrix random_unitary(std::size_t d, Rng& rng) {
  // Gram-Schmidt on the columns of a Ginibre matrix
  Matrix g = random_ginibre(d, rng);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t p = 0; p < c; ++p) {
      cplx ip = 0.0;
      for (std::size_t i = 0; i < d; ++i) ip += std::conj(g(i, p)) * g(i, c);
      for (std::size_t i = 0; i < d; ++i) g(i, c) -= ip * g(i, p);
    }
    double n = 0.0;
    for (std::size_t i = 0; i < d; ++i) n += std::norm(g(i, c));
    n = std::sqrt(n);
    for (std::size_t i = 0; i < d; ++i) g(i, c) /= n;
  }
  return g;
}

State random_state(std::size_t d, Rng& rng) {
  const Matrix g = random_ginibre(d, rng);
  HermitianOp h(g * g.adjoint());
  h *= 1.0 / h.trace();
  return State(h);
}

State random_pure_state(std::size_t d, Rng& rng) {
  std::vector<cplx> v(d);
  double n = 0.0;
  for (auto& z : v) {
    z = cplx(rng.normal(), rng.normal());
    n += std::norm(z);
  }
  Matrix m(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = v[i] * std::conj(v[j]) / n;
  return State(HermitianOp(m));
}

Observable random_observable(std::size_t d, std::size_t outcomes, Rng& rng) {
  std::vector<HermitianOp> xs;
  HermitianOp s(d);
  for (std::size_t k = 0; k < outcomes; ++k) {
    const Matrix g = random_ginibre(d, rng);
    xs.emplace_back(g * g.adjoint());
    s += xs.back();
  }
  const Matrix isq = apply_spectral(s, [](double x) { return 1.0 / std::sqrt(x); }).matrix();
  std::vector<HermitianOp> ops;
  for (const auto& x : xs) ops.push_back(congruence(isq, x));
  return Observable::from_ops(ops, 1e-10);
}

KrausChannel random_channel(std::size_t d, std::size_t kraus_count, Rng& rng) {
  std::vector<Matrix> vs;
  HermitianOp s(d);
  for (std::size_t k = 0; k < kraus_count; ++k) {
    vs.push_back(random_ginibre(d, rng));
    s += HermitianOp(vs.back().adjoint() * vs.back());
  }
  const Matrix isq = apply_spectral(s, [](double x) { return 1.0 / std::sqrt(x); }).matrix();
  for (auto& v : vs) v = v * isq;
  return KrausChannel(std::move(vs));
}

StochasticMatrix random_stochastic(std::size_t rows, std::size_t cols, Rng& rng) {
  std::vector<double> a(rows * cols);
  for (std::size_t c = 0; c < cols; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < rows; ++r) s += (a[r * cols + c] = -std::log(1.0 - rng.uniform()));
    for (std::size_t r = 0; r < rows; ++r) a[r * cols + c] /= s;
  }
  return StochasticMatrix(rows, cols, std::move(a));
}

}  // namespace incodim
