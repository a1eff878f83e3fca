#pragma once

#include <array>
#include <cstdint>

namespace collapse {

/// Philox4x32-10 counter-based generator.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key);
};

/// Gaussian increments for one trajectory. The value for a given
/// (master_seed, trajectory_index, step_index) is a pure function of those
/// three numbers, so ensembles are independent of scheduling.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t master_seed, std::uint64_t trajectory_index)
      : seed_(master_seed), trajectory_(trajectory_index) {}

  /// Standard normal variate for step `step_index`.
  double normal(std::uint64_t step_index) const;

  /// N(0, dt) increment for the next step; advances the internal counter.
  double next_increment(double dt);

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t trajectory_index() const { return trajectory_; }
  std::uint64_t step() const { return step_; }

 private:
  std::uint64_t seed_;
  std::uint64_t trajectory_;
  std::uint64_t step_ = 0;
};

}  // namespace collapse
