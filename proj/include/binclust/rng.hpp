#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace binclust {

// SplitMix64 (Steele, Lea & Flood 2014). Counter-based: the state advances
// by a fixed odd increment and each output is a bijective mix of the counter,
// so the stream is fully determined by the seed alone. Streams for parallel
// work are derived with child(key): replicate r of a benchmark always sees
// the stream child(master, r) no matter how many workers run or in which
// order they pick up tasks.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t seed() const { return state_ - counter_ * kGamma; }

  std::uint64_t next_u64() {
    ++counter_;
    std::uint64_t z = (state_ += kGamma);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // uniform on [0, 1), 53-bit resolution
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1); safe to pass to log()
  double next_double_open() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  int next_index(int k) {
    int v = static_cast<int>(next_double() * k);
    return v >= k ? k - 1 : v;
  }

  // Independent stream addressed by (seed, key); does not disturb this stream.
  Rng child(std::uint64_t key) const {
    return Rng(mix(seed() + kGamma * (key + 1)));
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_double_open();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // raw Student t with 3 df (variance 3, not standardized)
  double student_t3() {
    double z = normal();
    double w = 0.0;
    for (int i = 0; i < 3; ++i) {
      double g = normal();
      w += g * g;
    }
    return z * std::sqrt(3.0 / w);
  }

  // Laplace with unit scale (variance 2)
  double laplace() {
    double u = next_double_open();
    return u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
  }

  double exponential() { return -std::log(next_double_open()); }

  // one draw from a symmetric Dirichlet(1) over k categories
  void dirichlet1(int k, double* out) {
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      out[i] = exponential();
      sum += out[i];
    }
    for (int i = 0; i < k; ++i) out[i] /= sum;
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  std::uint64_t state_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace binclust
