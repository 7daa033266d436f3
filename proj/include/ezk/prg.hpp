#pragma once

#include <cstdint>

#include "ezk/bits.hpp"
#include "ezk/xof.hpp"

namespace ezk {

enum class PrgMode : std::uint8_t { LinearToy = 0, Xof = 1 };

// Length-expanding generator G: {0,1}^seed_len -> {0,1}^out_len.
// LinearToy is G(s) = M·s over GF(2). It is not pseudorandom and only serves
// toy-scale binding experiments and small relation circuits.
struct PrgSpec {
  PrgMode mode = PrgMode::Xof;
  std::uint32_t seed_len = 0;
  std::uint32_t out_len = 0;
  GF2Matrix matrix;  // out_len x seed_len, linear mode only

  static PrgSpec xof(std::uint32_t seed_len, std::uint32_t out_len) {
    return PrgSpec{PrgMode::Xof, seed_len, out_len, {}};
  }
  static PrgSpec linear(GF2Matrix m) {
    auto out = static_cast<std::uint32_t>(m.rows());
    auto in = static_cast<std::uint32_t>(m.cols());
    return PrgSpec{PrgMode::LinearToy, in, out, std::move(m)};
  }
  static PrgSpec random_linear(std::uint32_t seed_len, std::uint32_t out_len, Rng& rng) {
    GF2Matrix m(out_len, seed_len);
    for (std::uint32_t r = 0; r < out_len; ++r) m.set_row(r, rng.bits(seed_len));
    return linear(std::move(m));
  }

  void encode(ByteWriter& w) const {
    w.u8(static_cast<std::uint8_t>(mode));
    w.u32(seed_len);
    w.u32(out_len);
    if (mode == PrgMode::LinearToy) w.raw(matrix.data());
  }
  static PrgSpec decode(ByteReader& r) {
    PrgSpec s;
    auto m = r.u8();
    if (m > 1) throw DecodeError("bad prg mode");
    s.mode = static_cast<PrgMode>(m);
    s.seed_len = r.u32();
    s.out_len = r.u32();
    if (s.seed_len == 0 || s.seed_len > 4096 || s.out_len > 3 * 4096) throw DecodeError("bad prg lengths");
    if (s.mode == PrgMode::LinearToy) {
      s.matrix = GF2Matrix(s.out_len, s.seed_len);
      Bytes d = r.raw(s.matrix.data().size());
      for (std::size_t i = 0; i < s.out_len; ++i) {
        BitVector row = BitVector::from_bytes(std::span(d).subspan(i * s.matrix.stride(), s.matrix.stride()), s.seed_len);
        if (!std::equal(row.bytes().begin(), row.bytes().end(), d.begin() + static_cast<std::ptrdiff_t>(i * s.matrix.stride())))
          throw DecodeError("nonzero matrix padding");
        s.matrix.set_row(i, row);
      }
    }
    return s;
  }
  friend bool operator==(const PrgSpec&, const PrgSpec&) = default;
};

inline BitVector prg_expand(const PrgSpec& spec, const BitVector& seed) {
  require(seed.size() == spec.seed_len, "prg_expand: seed length mismatch");
  if (spec.mode == PrgMode::LinearToy) return spec.matrix * seed;
  return Xof(Domain::Prg).absorb_u32(spec.seed_len).absorb_u32(spec.out_len).absorb(seed.bytes()).finish_bits(spec.out_len);
}

// f(r) = T·r ⊕ offset with T[i][j] = diag[i - j + in_len - 1].
struct ToeplitzHash {
  std::uint32_t in_len = 0;
  std::uint32_t out_len = 0;
  BitVector diag;    // in_len + out_len - 1 bits
  BitVector offset;  // out_len bits

  static ToeplitzHash random(std::uint32_t in_len, std::uint32_t out_len, Rng& rng) {
    require(in_len >= 1 && out_len >= 1, "ToeplitzHash: empty dimensions");
    ToeplitzHash f{in_len, out_len, rng.bits(in_len + out_len - 1), {}};
    f.offset = rng.bits(out_len);
    return f;
  }

  // Diagonal index in_len-1 holds the main diagonal, so setting only that bit
  // gives f(r) = first out_len bits of r.
  static ToeplitzHash projection(std::uint32_t in_len, std::uint32_t out_len) {
    require(out_len <= in_len, "ToeplitzHash::projection needs out_len <= in_len");
    ToeplitzHash f{in_len, out_len, BitVector(in_len + out_len - 1), BitVector(out_len)};
    f.diag.set(in_len - 1, true);
    return f;
  }

  bool entry(std::size_t i, std::size_t j) const { return diag.get(i + in_len - 1 - j); }

  GF2Matrix matrix() const {
    GF2Matrix m(out_len, in_len);
    for (std::size_t i = 0; i < out_len; ++i)
      for (std::size_t j = 0; j < in_len; ++j) m.set(i, j, entry(i, j));
    return m;
  }

  void validate() const {
    require(in_len >= 1 && out_len >= 1 && diag.size() == in_len + out_len - 1 && offset.size() == out_len,
            "ToeplitzHash: inconsistent lengths");
  }

  friend bool operator==(const ToeplitzHash&, const ToeplitzHash&) = default;
};

inline BitVector universal_hash_eval(const ToeplitzHash& f, const BitVector& r) {
  f.validate();
  require(r.size() == f.in_len, "universal_hash_eval: input length mismatch");
  BitVector out = f.offset;
  for (std::size_t i = 0; i < f.out_len; ++i) {
    bool acc = false;
    for (std::size_t j = 0; j < f.in_len; ++j) acc ^= f.entry(i, j) && r.get(j);
    if (acc) out.flip(i);
  }
  return out;
}

// Uniform r with f(r) = m. Throws RetryableError when T is rank deficient;
// the caller resamples f.
inline BitVector universal_hash_sample_preimage(const ToeplitzHash& f, const BitVector& m, Rng& rng) {
  f.validate();
  require(m.size() == f.out_len, "sample_preimage: message length mismatch");
  auto sol = gf2_solve(f.matrix(), m ^ f.offset);
  if (!sol || sol->rank < f.out_len) throw RetryableError("Toeplitz matrix is rank deficient");
  BitVector r = sol->particular;
  BitVector coeffs = rng.bits(sol->kernel_basis.size());
  for (std::size_t i = 0; i < sol->kernel_basis.size(); ++i)
    if (coeffs.get(i)) r ^= sol->kernel_basis[i];
  return r;
}

}  // namespace ezk
