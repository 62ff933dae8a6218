#ifndef LATTICEME_RNG_HPP
#define LATTICEME_RNG_HPP

#include <array>
#include <cstdint>
#include <string_view>

// Self-contained xoshiro256++ generator with deterministic named sub-streams.
// Child streams are derived from the construction key, never from consumption
// state, so re-ordering work across threads cannot change any stream. All
// samplers draw through this type; nothing uses <random> distributions, which
// keeps output byte-stable across standard library versions.

namespace latticeme {

std::uint64_t hash_name(std::string_view name);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Derived, statistically independent stream; same (key, tag) -> same stream.
  Rng child(std::uint64_t tag) const;
  Rng child(std::string_view name) const { return child(hash_name(name)); }

  std::uint64_t key() const { return key_; }
  std::uint64_t next_u64();

  double uniform();      // [0, 1)
  double uniform_pos();  // (0, 1]
  double normal();       // standard normal, Box-Muller with cached spare
  double gamma(double shape);                    // unit scale, shape > 0
  double inv_gamma(double shape, double rate);   // density ∝ x^{-a-1} e^{-b/x}
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t key_ = 0;
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace latticeme

#endif
