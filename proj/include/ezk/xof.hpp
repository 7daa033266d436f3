#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "ezk/bits.hpp"

namespace ezk {

// One-byte domain separation tags prefixed to every SHAKE256 input.
enum class Domain : std::uint8_t {
  Prg = 0x01,
  CommitHash = 0x02,
  TranscriptHash = 0x03,
  RngStream = 0x04,
};

// Incremental SHAKE256 with a domain tag absorbed first.
class Xof {
 public:
  explicit Xof(Domain tag) : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_shake256(), nullptr) != 1)
      throw std::runtime_error("SHAKE256 unavailable");
    auto t = static_cast<std::uint8_t>(tag);
    absorb(std::span(&t, 1));
  }

  Xof& absorb(std::span<const std::uint8_t> data) {
    if (!data.empty()) EVP_DigestUpdate(ctx_.get(), data.data(), data.size());
    return *this;
  }
  Xof& absorb(std::string_view s) {
    return absorb(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  }
  Xof& absorb_u32(std::uint32_t v) {
    std::uint8_t b[4] = {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
                         static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
    return absorb(b);
  }

  // Single-shot: the context cannot absorb or squeeze after this.
  Bytes finish(std::size_t out_bytes) {
    Bytes out(out_bytes);
    if (out_bytes > 0 && EVP_DigestFinalXOF(ctx_.get(), out.data(), out_bytes) != 1)
      throw std::runtime_error("SHAKE256 finalize failed");
    return out;
  }
  BitVector finish_bits(std::size_t out_bits) {
    return BitVector::from_bytes(finish((out_bits + 7) / 8), out_bits);
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

inline Bytes shake256(Domain tag, std::span<const std::uint8_t> data, std::size_t out_bytes) {
  return Xof(tag).absorb(data).finish(out_bytes);
}

using RngSeed = std::array<std::uint8_t, 32>;

inline RngSeed seed_from_u64(std::uint64_t v) {
  RngSeed s{};
  for (int i = 0; i < 8; ++i) s[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * i));
  return s;
}

// Counter-mode stream: block k = SHAKE256(0x04 || seed || u64le(k)), 64 bytes.
// Every derived quantity below consumes whole bytes from this stream in order,
// so the sequence of draws is identical on every platform.
class Rng {
 public:
  static constexpr std::size_t kBlock = 64;

  explicit Rng(const RngSeed& seed) : seed_(seed) {}
  explicit Rng(std::uint64_t seed) : seed_(seed_from_u64(seed)) {}

  const RngSeed& seed() const { return seed_; }

  std::uint8_t next_byte() {
    if (pos_ == kBlock) refill();
    return buf_[pos_++];
  }
  void fill(std::span<std::uint8_t> out) {
    for (auto& b : out) b = next_byte();
  }
  Bytes bytes(std::size_t n) {
    Bytes b(n);
    fill(b);
    return b;
  }
  std::uint64_t next_u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(next_byte()) << (8 * i);
    return v;
  }
  // Uniform in [0, n) by rejection of the biased low range.
  std::uint64_t uniform(std::uint64_t n) {
    require(n > 0, "Rng::uniform: n == 0");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }
  bool bit() { return next_byte() & 1U; }
  BitVector bits(std::size_t n) {
    Bytes b((n + 7) / 8);
    fill(b);
    return BitVector::from_bytes(b, n);
  }
  // Uniform in [0,1) with 53 bits of precision.
  double real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return real() < p; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform(i));
      std::swap(v[i - 1], v[j]);
    }
  }
  std::vector<int> permutation(int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    shuffle(p);
    return p;
  }

  // Independent child stream seeded from the next 32 bytes of this one.
  Rng split() {
    RngSeed s{};
    fill(s);
    return Rng(s);
  }

 private:
  void refill() {
    std::uint8_t ctr[8];
    for (int i = 0; i < 8; ++i) ctr[i] = static_cast<std::uint8_t>(counter_ >> (8 * i));
    Bytes blk = Xof(Domain::RngStream).absorb(seed_).absorb(ctr).finish(kBlock);
    std::copy(blk.begin(), blk.end(), buf_.begin());
    ++counter_;
    pos_ = 0;
  }

  RngSeed seed_;
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, kBlock> buf_{};
  std::size_t pos_ = kBlock;
};

}  // namespace ezk
