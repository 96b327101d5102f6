#include "mfswitch/random.hpp"

#include <cmath>
#include <numbers>

namespace mfswitch {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// Counter word 3 separates the sub-streams drawn under one key.
constexpr std::uint32_t kDomainSequential = 0x5EC0u;
constexpr std::uint32_t kDomainNormal = 0x40A1u;
constexpr std::uint32_t kDomainUniform = 0x0F11u;

Philox4x32::Key split_key(std::uint64_t k) noexcept {
  return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

std::array<std::uint64_t, 2> draw(std::uint64_t key, std::uint64_t word01, std::uint32_t word2,
                                  std::uint32_t domain) noexcept {
  const auto out = Philox4x32::apply(
      {static_cast<std::uint32_t>(word01), static_cast<std::uint32_t>(word01 >> 32), word2, domain},
      split_key(key));
  return {(static_cast<std::uint64_t>(out[1]) << 32) | out[0],
          (static_cast<std::uint64_t>(out[3]) << 32) | out[2]};
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(seed ^ mix64(stream + 0x632BE59BD9B4E019ull));
}

}  // namespace

Philox4x32::Counter Philox4x32::apply(Counter ctr, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t hash_label(std::string_view label) noexcept {
  // FNV-1a over the bytes, then a finalizer to spread low-entropy labels.
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (const char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return mix64(h ^ label.size());
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replica, std::string_view role) noexcept {
  std::uint64_t h = mix64(master ^ 0x6A09E667F3BCC908ull);
  h = mix64(h ^ mix64(replica + 0xBB67AE8584CAA73Bull));
  return mix64(h ^ hash_label(role));
}

RandomStream::RandomStream(std::uint64_t seed) noexcept
    : seed_(seed), key_(split_key(mix64(seed))) {}

std::uint64_t RandomStream::next_u64() noexcept {
  if (buffered_ == 0) {
    const auto out = Philox4x32::apply(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32), 0u,
         kDomainSequential},
        key_);
    ++block_;
    buffer_ = {(static_cast<std::uint64_t>(out[1]) << 32) | out[0],
               (static_cast<std::uint64_t>(out[3]) << 32) | out[2]};
    buffered_ = 2;
  }
  return buffer_[2 - buffered_--];
}

double RandomStream::exponential(double rate) noexcept {
  return -std::log(uniform_open()) / rate;
}

double RandomStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform_open()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

void ParticleNoise::normals(std::uint64_t stream, std::uint64_t step,
                            std::span<double> out) const noexcept {
  const std::uint64_t key = stream_key(seed_, stream);
  std::uint32_t block = 0;
  for (std::size_t k = 0; k < out.size(); k += 2, ++block) {
    const auto bits = draw(key, step, block, kDomainNormal);
    const double r = std::sqrt(-2.0 * std::log(to_unit_open(bits[0])));
    const double theta = 2.0 * std::numbers::pi * to_unit(bits[1]);
    out[k] = r * std::cos(theta);
    if (k + 1 < out.size()) out[k + 1] = r * std::sin(theta);
  }
}

void ParticleNoise::uniforms(std::uint64_t stream, std::uint64_t index,
                             std::span<double> out) const noexcept {
  const std::uint64_t key = stream_key(seed_, stream);
  std::uint32_t block = 0;
  for (std::size_t k = 0; k < out.size(); k += 2, ++block) {
    const auto bits = draw(key, index, block, kDomainUniform);
    out[k] = to_unit(bits[0]);
    if (k + 1 < out.size()) out[k + 1] = to_unit(bits[1]);
  }
}

}  // namespace mfswitch
