#pragma once

#include <cstdint>
#include <vector>

namespace svrpo {

/// Deterministic PCG32 generator with explicit stream selection.
///
/// Same (seed, stream) always reproduces the same sequence, independent of
/// platform and scheduling. Distinct streams are statistically independent,
/// which is what lets rollout episodes run on their own substreams and still
/// concatenate into a schedule-independent result.
class Rng {
 public:
  Rng() : Rng(0, 0) {}
  Rng(std::uint64_t seed, std::uint64_t stream_id);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random mantissa bits.
  double next_double();

  /// Standard normal via Box-Muller (two uniforms per draw, no cached state).
  double next_gaussian();

  /// Uniform integer in [0, n). n must be positive.
  std::size_t next_below(std::size_t n);

  /// Independent generator on stream_id() + offset, same seed.
  /// Callers space their stream ids so substreams never collide.
  Rng substream(std::uint64_t offset) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

 private:
  std::uint64_t state_;
  std::uint64_t inc_;
  std::uint64_t seed_;
  std::uint64_t stream_;
};

/// mean + std (elementwise) * z, z i.i.d. standard normal from rng.
/// std must be elementwise positive and the same length as mean.
std::vector<double> gaussian_sample(Rng& rng, const std::vector<double>& mean,
                                    const std::vector<double>& std);

}  // namespace svrpo
