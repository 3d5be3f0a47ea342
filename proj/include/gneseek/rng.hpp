#pragma once

#include "gneseek/common.hpp"

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace gneseek {

// Counter-based random streams.
//
// Every consumer derives its own stream from (master seed, path of integer
// labels) — e.g. (seed, run, round, player, purpose).  Draws therefore do not
// depend on the order in which other streams are consumed, which is what makes
// whole runs bitwise reproducible under any player-update order or thread
// schedule.

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t state) : state_(state) {}

  static RngStream derive(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix64(master);
    for (std::uint64_t p : path) s = mix64(s ^ mix64(p + 0xD1B54A32D192ED03ULL));
    return RngStream(s);
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box–Muller; the second value of each pair is cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Vec gaussian_vector(int dim) {
    Vec v(dim);
    for (int k = 0; k < dim; ++k) v[k] = gaussian();
    return v;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Labels used when deriving per-purpose substreams.
enum class StreamTag : std::uint64_t {
  Init = 1,      // initial point inside the shrunk set
  Sphere = 2,    // per-round unit perturbation direction
  Probe = 3,     // feasibility probes in the equilibrium solver
  Generic = 4,
};

inline RngStream substream(std::uint64_t master, std::uint64_t run, std::uint64_t round,
                           std::uint64_t player, StreamTag tag) {
  return RngStream::derive(master, {run, round, player, static_cast<std::uint64_t>(tag)});
}

}  // namespace gneseek
