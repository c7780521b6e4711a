#pragma once

#include <cstdint>

namespace probitar {

// xoshiro256** seeded through splitmix64. Streams are derived by hashing
// (seed, stream, substream), so panel paths, bootstrap replicates and
// covariate columns each get an independent generator from one user seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) { reseed(seed, 0, 0); }
  Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0) {
    reseed(seed, stream, substream);
  }

  static Rng derive(std::uint64_t seed, std::uint64_t stream,
                    std::uint64_t substream = 0) {
    return Rng(seed, stream, substream);
  }

  std::uint64_t next_u64();

  // uniform on the open interval (0,1); never returns an endpoint
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // standard normal via the inverse CDF (deterministic across platforms)
  double normal();

  // Hash (seed, a, b) into a fresh seed for an independent stream family.
  static std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b = 0);

 private:
  void reseed(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream);
  std::uint64_t s_[4];
};

}  // namespace probitar
