#include "herit/random.hpp"

#include <bit>
#include <cmath>

namespace herit {

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream)
    : key_(counter_hash(seed, stream, 0x5eed)) {
  std::uint64_t s = key_;
  for (auto& word : state_) {
    s += 0x9e3779b97f4a7c15ULL;
    word = mix64(s);
  }
}

RandomSource RandomSource::substream(std::uint64_t index) const { return RandomSource(key_, index); }

std::uint64_t RandomSource::next_u64() {
  const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = std::rotl(state_[3], 45);
  return result;
}

double RandomSource::uniform() { return bits_to_unit(next_u64()); }

double RandomSource::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

}  // namespace herit
