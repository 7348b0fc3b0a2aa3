#pragma once

#include <cmath>
#include <cstdint>

namespace resdelta {

inline std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Deterministic generator with explicitly coded distributions.  Standard
// library distributions are implementation-defined sequences; everything here
// must be byte-reproducible for a fixed seed, so we roll our own.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Independent substream keyed by (seed, stream).  Used to make parallel or
  // chunked work deterministic regardless of scheduling: chunk k always draws
  // from substream(seed, k).
  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0xA24BAED4963EE407ull * (stream + 1));
    std::uint64_t mixed = splitmix64(s);
    s = mixed;
    return Rng(splitmix64(s));
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // [0,1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  // Marsaglia polar method; one spare cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double x, y, r2;
    do {
      x = 2.0 * uniform01() - 1.0;
      y = 2.0 * uniform01() - 1.0;
      r2 = x * x + y * y;
    } while (r2 >= 1.0 || r2 == 0.0);
    double f = std::sqrt(-2.0 * std::log(r2) / r2);
    spare_ = y * f;
    have_spare_ = true;
    return x * f;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Compensated accumulator; summation order is fixed by the call sequence.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

}  // namespace resdelta
