#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace glt {

// xoshiro256** stream. Streams are never shared between tasks: each task
// derives its own stream from (root seed, key...) so results do not depend
// on scheduling or worker count.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  // Stream keyed by a root seed and an ordered list of integer counters,
  // e.g. derive(root, {step, replicate}).
  static Rng derive(std::uint64_t root, std::initializer_list<std::uint64_t> keys);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Uniform on the open interval (0, 1).
  double uniform01();
  // Uniform integer on {0, ..., n-1}; n > 0.
  std::uint64_t below(std::uint64_t n);
  // Standard exponential.
  double exponential();

 private:
  std::array<std::uint64_t, 4> state_{};
};

std::uint64_t splitmix64(std::uint64_t x);

// Named-purpose sub-seed: hash of (root, label). Adding a new label never
// perturbs the streams of existing labels.
std::uint64_t subseed(std::uint64_t root, std::string_view label);

}  // namespace glt
