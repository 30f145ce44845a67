#include "nlmimo/rng.hpp"

namespace nlmimo {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline std::uint64_t join(std::uint32_t hi, std::uint32_t lo) {
  return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::array<std::uint32_t, 4> CounterRng::block(std::uint64_t index) const {
  return philox4x32({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                     static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                    {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
}

double CounterRng::next_uniform() {
  const auto b = next_block();
  return uniform_open_closed(join(b[0], b[1]));
}

Complex complex_normal_from_bits(std::uint64_t w0, std::uint64_t w1) {
  const double u1 = uniform_open_closed(w0);
  const double u2 = uniform_open_closed(w1);
  // |z|^2 ~ Exp(1)
  const double r = std::sqrt(-std::log(u1));
  const double phase = 2.0 * kPi * u2;
  return {r * std::cos(phase), r * std::sin(phase)};
}

Complex CounterRng::complex_normal_at(std::uint64_t index) const {
  const auto b = block(index);
  return complex_normal_from_bits(join(b[0], b[1]), join(b[2], b[3]));
}

Complex CounterRng::next_complex_normal() { return complex_normal_at(counter_++); }

double CounterRng::next_normal() { return std::sqrt(2.0) * next_complex_normal().real(); }

}  // namespace nlmimo
