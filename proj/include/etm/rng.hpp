#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "etm/rational.hpp"

namespace etm {

// Deterministic random source. Only the raw mt19937_64 stream is used (the
// standard pins down its exact output), so identical seeds give identical
// draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform-ish in [lo, hi]; modulo bias is irrelevant for sampling purposes
  // and keeps the draw sequence reproducible.
  std::int64_t int_in(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  // Random rational with numerator in [-h, h] and denominator in [1, h].
  Rational rational(std::int64_t h) {
    return make_rational(int_in(-h, h), int_in(1, h));
  }

  Rational nonneg_rational(std::int64_t h) {
    return make_rational(int_in(0, h), int_in(1, h));
  }

  Rational nonzero_rational(std::int64_t h) {
    for (;;) {
      Rational r = rational(h);
      if (r != 0) return r;
    }
  }

  // Stable sub-seed derivation so per-edge draws do not depend on how many
  // draws earlier edges consumed.
  static std::uint64_t derive(std::uint64_t seed, const std::string& tag) {
    std::uint64_t h = 14695981039346656037ull ^ seed;
    for (unsigned char c : tag) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace etm
