#pragma once

#include <cstdint>
#include <random>

namespace modsim {

/// Named random sub-streams split from one master seed.
///
/// A run draws environment randomness from three engines in a fixed
/// per-period order (arrival, then cost, then service), so two policies
/// handed the same seed face byte-identical arrival/cost/service
/// realizations. Randomized policies draw from the separate `policy`
/// stream and cannot perturb the environment streams.
class RunStreams {
 public:
  explicit RunStreams(std::uint64_t seed)
      : arrival_(make_engine(seed, 0x61727276)),   // "arrv"
        cost_(make_engine(seed, 0x636f7374)),      // "cost"
        service_(make_engine(seed, 0x73657276)),   // "serv"
        policy_(make_engine(seed, 0x706f6c69)) {}  // "poli"

  std::mt19937_64& arrival() { return arrival_; }
  std::mt19937_64& cost() { return cost_; }
  std::mt19937_64& service() { return service_; }
  std::mt19937_64& policy() { return policy_; }

 private:
  static std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag)};
    return std::mt19937_64(seq);
  }

  std::mt19937_64 arrival_;
  std::mt19937_64 cost_;
  std::mt19937_64 service_;
  std::mt19937_64 policy_;
};

inline double uniform01(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// FNV-1a accumulator used to fingerprint the environment draws of a run.
struct StreamHash {
  std::uint64_t state = 0xcbf29ce484222325ull;

  void mix(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      state ^= (v >> (8 * i)) & 0xffu;
      state *= 0x100000001b3ull;
    }
  }
  void mix_double(double x);
};

}  // namespace modsim
