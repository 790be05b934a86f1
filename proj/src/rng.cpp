#include "svrpo/rng.hpp"

#include <cmath>

#include "svrpo/errors.hpp"

namespace svrpo {

namespace {
constexpr std::uint64_t kPcgMultiplier = 6364136223846793005ULL;
constexpr double kTwoPi = 6.283185307179586476925286766559;
}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream_id)
    : state_(0), inc_((stream_id << 1u) | 1u), seed_(seed), stream_(stream_id) {
  next_u32();
  state_ += seed;
  next_u32();
}

std::uint32_t Rng::next_u32() {
  const std::uint64_t old = state_;
  state_ = old * kPcgMultiplier + inc_;
  const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
  const auto rot = static_cast<std::uint32_t>(old >> 59u);
  return (xorshifted >> rot) | (xorshifted << ((~rot + 1u) & 31u));
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t hi = next_u32();
  const std::uint64_t lo = next_u32();
  return (hi << 32) | lo;
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_gaussian() {
  // u1 in (0, 1] so the log is finite.
  const double u1 = 1.0 - next_double();
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::size_t Rng::next_below(std::size_t n) {
  if (n == 0) throw ArgumentError("next_below: n must be positive");
  return static_cast<std::size_t>(
      (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

Rng Rng::substream(std::uint64_t offset) const {
  return Rng(seed_, stream_ + offset);
}

std::vector<double> gaussian_sample(Rng& rng, const std::vector<double>& mean,
                                    const std::vector<double>& std) {
  if (mean.size() != std.size())
    throw ArgumentError("gaussian_sample: mean/std dimension mismatch");
  for (double s : std)
    if (!(s > 0.0)) throw ArgumentError("gaussian_sample: std must be elementwise positive");
  std::vector<double> out(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i)
    out[i] = mean[i] + std[i] * rng.next_gaussian();
  return out;
}

}  // namespace svrpo
