#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

namespace mfswitch {

/// Philox4x32-10 counter-based block function (Salmon et al., Random123).
/// Stateless: the output is a pure function of (counter, key).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  [[nodiscard]] static Counter apply(Counter ctr, Key key) noexcept;
};

/// SplitMix64 finalizer; a bijection on 64-bit words.
[[nodiscard]] std::uint64_t mix64(std::uint64_t z) noexcept;

/// 64-bit hash of a label, used to fold role strings into seeds.
[[nodiscard]] std::uint64_t hash_label(std::string_view label) noexcept;

/// Seed for (master, replica, role). Distinct roles give unrelated seeds, so
/// the chain and the particle noise of one replica are drawn independently.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replica, std::string_view role) noexcept;

/// Maps 64 random bits to a double in [0, 1).
[[nodiscard]] inline double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Maps 64 random bits to a double in (0, 1].
[[nodiscard]] inline double to_unit_open(std::uint64_t bits) noexcept {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Sequential random stream over Philox. Each seed owns a disjoint counter
/// space, so streams built from distinct seeds never overlap.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept { return next_u64(); }

  std::uint64_t next_u64() noexcept;
  double uniform() noexcept { return to_unit(next_u64()); }
  double uniform_open() noexcept { return to_unit_open(next_u64()); }
  double exponential(double rate) noexcept;
  double normal() noexcept;

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  Philox4x32::Key key_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Counter-addressed Gaussian noise: the draw for (stream id, step, component)
/// does not depend on the order in which draws are requested, so per-particle
/// updates can run on any number of workers with identical results.
class ParticleNoise {
 public:
  explicit ParticleNoise(std::uint64_t seed) noexcept : seed_(seed) {}

  /// Fills `out` with iid standard normals addressed by (stream, step).
  void normals(std::uint64_t stream, std::uint64_t step, std::span<double> out) const noexcept;

  /// Uniforms in [0, 1) from a domain disjoint from `normals`.
  void uniforms(std::uint64_t stream, std::uint64_t index, std::span<double> out) const noexcept;

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace mfswitch
