#include "rng.hpp"

#include "gauss.hpp"

namespace probitar {

namespace {

inline std::uint64_t splitmix_step(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

void Rng::reseed(std::uint64_t seed, std::uint64_t stream,
                 std::uint64_t substream) {
  std::uint64_t x = seed;
  splitmix_step(x);
  x ^= 0xA0761D6478BD642FULL * (stream + 1);
  splitmix_step(x);
  x ^= 0xE7037ED1A0B428DBULL * (substream + 1);
  for (auto& w : s_) w = splitmix_step(x);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::normal() { return std_normal_quantile(uniform()); }

std::uint64_t Rng::mix_seed(std::uint64_t seed, std::uint64_t a,
                            std::uint64_t b) {
  std::uint64_t x = seed;
  splitmix_step(x);
  x ^= 0x8EBC6AF09C88C6E3ULL * (a + 1);
  splitmix_step(x);
  x ^= 0x589965CC75374CC3ULL * (b + 1);
  return splitmix_step(x);
}

}  // namespace probitar
