#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "incodim/operator_core.hpp"

namespace incodim {

// mt19937_64 seeded through splitmix64; split(k) derives an independent stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  Rng split(std::uint64_t stream) const;
  std::uint64_t seed() const noexcept { return seed_; }

  double uniform(double lo = 0.0, double hi = 1.0);
  double normal();
  std::size_t index(std::size_t n);
  std::mt19937_64& engine() noexcept { return eng_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

std::uint64_t splitmix64(std::uint64_t& state);

Vec3 random_unit_vector(Rng& rng);
Vec3 random_in_ball(Rng& rng, double radius = 1.0);

Matrix random_ginibre(std::size_t d, Rng& rng);
Matrix random_unitary(std::size_t d, Rng& rng);
State random_state(std::size_t d, Rng& rng);
State random_pure_state(std::size_t d, Rng& rng);
// Effects S^{-1/2} X_k S^{-1/2} with X_k random positive and S = sum X_k.
Observable random_observable(std::size_t d, std::size_t outcomes, Rng& rng);
KrausChannel random_channel(std::size_t d, std::size_t kraus_count, Rng& rng);
StochasticMatrix random_stochastic(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace incodim
