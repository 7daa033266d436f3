#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "ezk/bits.hpp"
#include "ezk/prg.hpp"
#include "ezk/xof.hpp"

namespace ezk {

enum class SchemeId : std::uint8_t { NaorSB = 1, HaleviMicaliSH = 2, ToyTable = 3 };

inline const char* scheme_name(SchemeId s) {
  switch (s) {
    case SchemeId::NaorSB: return "naor";
    case SchemeId::HaleviMicaliSH: return "halevi-micali";
    case SchemeId::ToyTable: return "toy-table";
  }
  return "?";
}

// Naor: block_i = G(s_i) ⊕ m_i·R, one fresh λ-bit seed per message bit.
struct NaorParams {
  PrgSpec prg;
  BitVector R;
  std::uint32_t lambda() const { return prg.seed_len; }
  friend bool operator==(const NaorParams&, const NaorParams&) = default;
};

// Halevi–Micali: com = (H_k(r), f) with f(r) = m, f a Toeplitz hash on L bits.
struct HmParams {
  std::uint32_t msg_bits = 0;
  std::uint32_t hash_bits = 0;
  std::array<std::uint8_t, 32> key{};
  std::uint32_t in_len() const { return 4 * hash_bits + 2 * msg_bits + 4; }
  friend bool operator==(const HmParams&, const HmParams&) = default;
};

// Explicit table: com = table[m * 2^r_bits + r].
struct ToyTableParams {
  std::uint32_t m_bits = 0;
  std::uint32_t r_bits = 0;
  std::uint32_t c_bits = 0;
  std::vector<std::uint32_t> table;

  std::uint32_t num_m() const { return 1U << m_bits; }
  std::uint32_t num_r() const { return 1U << r_bits; }
  std::uint32_t at(std::uint32_t m, std::uint32_t r) const { return table[(static_cast<std::size_t>(m) << r_bits) + r]; }
  void validate() const {
    require(m_bits >= 1 && m_bits <= 8 && r_bits <= 8 && c_bits >= 1 && c_bits <= 24,
            "ToyTable: sizes out of range");
    require(table.size() == (std::size_t{1} << (m_bits + r_bits)), "ToyTable: wrong entry count");
    for (auto v : table) require(v < (1U << c_bits), "ToyTable: entry exceeds c_bits");
  }
  friend bool operator==(const ToyTableParams&, const ToyTableParams&) = default;
};

struct PublicParam {
  std::variant<NaorParams, HmParams, ToyTableParams> body;

  SchemeId scheme() const {
    switch (body.index()) {
      case 0: return SchemeId::NaorSB;
      case 1: return SchemeId::HaleviMicaliSH;
      default: return SchemeId::ToyTable;
    }
  }
  const NaorParams& naor() const { return std::get<NaorParams>(body); }
  const HmParams& hm() const { return std::get<HmParams>(body); }
  const ToyTableParams& toy() const { return std::get<ToyTableParams>(body); }

  void encode(ByteWriter& w) const {
    w.u8(static_cast<std::uint8_t>(scheme()));
    if (auto* n = std::get_if<NaorParams>(&body)) {
      n->prg.encode(w);
      w.bits(n->R);
    } else if (auto* h = std::get_if<HmParams>(&body)) {
      w.u32(h->msg_bits);
      w.u32(h->hash_bits);
      w.raw(h->key);
    } else {
      const auto& t = toy();
      w.u32(t.m_bits);
      w.u32(t.r_bits);
      w.u32(t.c_bits);
      for (auto v : t.table) w.u32(v);
    }
  }
  Bytes encode() const {
    ByteWriter w;
    encode(w);
    return w.take();
  }
  static PublicParam decode(ByteReader& r) {
    auto s = r.u8();
    if (s == static_cast<std::uint8_t>(SchemeId::NaorSB)) {
      NaorParams n{PrgSpec::decode(r), r.bits()};
      if (n.R.size() != n.prg.out_len || n.prg.out_len != 3 * n.prg.seed_len) throw DecodeError("naor pp shape");
      return {n};
    }
    if (s == static_cast<std::uint8_t>(SchemeId::HaleviMicaliSH)) {
      HmParams h;
      h.msg_bits = r.u32();
      h.hash_bits = r.u32();
      if (h.msg_bits == 0 || h.msg_bits > 4096 || h.hash_bits == 0 || h.hash_bits > 4096) throw DecodeError("hm pp shape");
      Bytes k = r.raw(32);
      std::copy(k.begin(), k.end(), h.key.begin());
      return {h};
    }
    if (s == static_cast<std::uint8_t>(SchemeId::ToyTable)) {
      ToyTableParams t;
      t.m_bits = r.u32();
      t.r_bits = r.u32();
      t.c_bits = r.u32();
      if (t.m_bits < 1 || t.m_bits > 8 || t.r_bits > 8) throw DecodeError("toy pp shape");
      t.table.resize(std::size_t{1} << (t.m_bits + t.r_bits));
      for (auto& v : t.table) v = r.u32();
      try {
        t.validate();
      } catch (const InvalidArgument& e) {
        throw DecodeError(e.what());
      }
      return {t};
    }
    throw DecodeError("unknown scheme id");
  }
  static PublicParam decode(std::span<const std::uint8_t> b) {
    ByteReader r(b);
    auto pp = decode(r);
    r.expect_done();
    return pp;
  }
  friend bool operator==(const PublicParam&, const PublicParam&) = default;
};

struct Commitment {
  SchemeId scheme = SchemeId::NaorSB;
  BitVector body;

  void encode(ByteWriter& w) const {
    w.u8(static_cast<std::uint8_t>(scheme));
    w.bits(body);
  }
  static Commitment decode(ByteReader& r) {
    auto s = r.u8();
    if (s < 1 || s > 3) throw DecodeError("unknown scheme id");
    return {static_cast<SchemeId>(s), r.bits()};
  }
  friend bool operator==(const Commitment&, const Commitment&) = default;
};

struct Opening {
  BitVector rand;
  void encode(ByteWriter& w) const { w.bits(rand); }
  static Opening decode(ByteReader& r) { return {r.bits()}; }
  friend bool operator==(const Opening&, const Opening&) = default;
};

// Binding classes for generated toy tables.
enum class ToyClass {
  Random,         // unconstrained uniform entries
  BindingInM,     // no value reachable from two messages
  StrictBinding,  // injective in (m, r)
  NonBinding,     // some value reachable from two messages
  OneTimePad,     // com = m ⊕ r (requires m_bits == r_bits)
  Identity,       // com = m
};

struct SetupConfig {
  SchemeId scheme = SchemeId::NaorSB;
  std::uint32_t lambda = 16;
  std::uint32_t msg_bits = 1;  // HM only; Naor commits strings bitwise
  PrgMode prg = PrgMode::Xof;
  std::uint32_t toy_m_bits = 1;
  std::uint32_t toy_r_bits = 1;
  ToyClass toy_class = ToyClass::BindingInM;
};

namespace detail {

inline BitVector hm_hash(const HmParams& h, const BitVector& r) {
  return Xof(Domain::CommitHash).absorb(h.key).absorb_u32(h.in_len()).absorb(r.bytes()).finish_bits(h.hash_bits);
}

inline bool toy_binding_in_m(const ToyTableParams& t) {
  std::unordered_map<std::uint32_t, std::uint32_t> owner;
  for (std::uint32_t m = 0; m < t.num_m(); ++m)
    for (std::uint32_t r = 0; r < t.num_r(); ++r) {
      auto [it, fresh] = owner.emplace(t.at(m, r), m);
      if (!fresh && it->second != m) return false;
    }
  return true;
}

inline bool toy_injective(const ToyTableParams& t) {
  std::unordered_set<std::uint32_t> seen(t.table.begin(), t.table.end());
  return seen.size() == t.table.size();
}

}  // namespace detail

inline NaorParams naor_setup(std::uint32_t lambda, PrgMode mode, Rng& rng) {
  require(lambda >= 2 && lambda <= 256, "naor setup: lambda out of range");
  PrgSpec g = mode == PrgMode::LinearToy ? PrgSpec::random_linear(lambda, 3 * lambda, rng)
                                         : PrgSpec::xof(lambda, 3 * lambda);
  return NaorParams{std::move(g), rng.bits(3 * lambda)};
}

inline HmParams hm_setup(std::uint32_t msg_bits, std::uint32_t hash_bits, Rng& rng) {
  require(hash_bits >= 2 && hash_bits <= 256, "hm setup: lambda out of range");
  require(msg_bits >= 1 && msg_bits <= 4096, "hm setup: message length out of range");
  HmParams h{msg_bits, hash_bits, {}};
  rng.fill(h.key);
  return h;
}

inline ToyTableParams toy_setup(std::uint32_t m_bits, std::uint32_t r_bits, ToyClass cls, Rng& rng) {
  require(m_bits >= 1 && m_bits <= 8 && r_bits <= 8, "toy setup: sizes out of range");
  ToyTableParams t{m_bits, r_bits, m_bits + r_bits, {}};
  const std::uint32_t n = 1U << (m_bits + r_bits);
  t.table.resize(n);
  switch (cls) {
    case ToyClass::Random:
      for (auto& v : t.table) v = static_cast<std::uint32_t>(rng.uniform(n));
      break;
    case ToyClass::StrictBinding: {
      std::vector<std::uint32_t> perm(n);
      for (std::uint32_t i = 0; i < n; ++i) perm[i] = i;
      rng.shuffle(perm);
      t.table = perm;
      break;
    }
    case ToyClass::BindingInM: {
      // Each message owns a disjoint block of a random relabeling; randomness
      // may collide inside the block.
      std::vector<std::uint32_t> perm(n);
      for (std::uint32_t i = 0; i < n; ++i) perm[i] = i;
      rng.shuffle(perm);
      for (std::uint32_t m = 0; m < t.num_m(); ++m)
        for (std::uint32_t r = 0; r < t.num_r(); ++r)
          t.table[(m << r_bits) + r] = perm[(m << r_bits) + static_cast<std::uint32_t>(rng.uniform(t.num_r()))];
      break;
    }
    case ToyClass::NonBinding:
      for (int attempt = 0; attempt < 64; ++attempt) {
        for (auto& v : t.table) v = static_cast<std::uint32_t>(rng.uniform(n));
        if (!detail::toy_binding_in_m(t)) return t;
      }
      t.table[t.num_r()] = t.table[0];  // force m=0 and m=1 to share a value
      break;
    case ToyClass::OneTimePad:
      require(m_bits == r_bits, "one-time-pad table needs m_bits == r_bits");
      t.c_bits = m_bits;
      for (std::uint32_t m = 0; m < t.num_m(); ++m)
        for (std::uint32_t r = 0; r < t.num_r(); ++r) t.table[(m << r_bits) + r] = m ^ r;
      break;
    case ToyClass::Identity:
      t.c_bits = m_bits;
      for (std::uint32_t m = 0; m < t.num_m(); ++m)
        for (std::uint32_t r = 0; r < t.num_r(); ++r) t.table[(m << r_bits) + r] = m;
      break;
  }
  return t;
}

inline PublicParam setup(const SetupConfig& cfg, Rng& rng) {
  switch (cfg.scheme) {
    case SchemeId::NaorSB: return {naor_setup(cfg.lambda, cfg.prg, rng)};
    case SchemeId::HaleviMicaliSH: return {hm_setup(cfg.msg_bits, cfg.lambda, rng)};
    case SchemeId::ToyTable: return {toy_setup(cfg.toy_m_bits, cfg.toy_r_bits, cfg.toy_class, rng)};
  }
  throw InvalidArgument("setup: unknown scheme");
}

// Deterministic recomputation for schemes whose commitment is a function of
// (m, opening). Returns nullopt for HM (the hash f is part of the commitment)
// and for malformed lengths.
inline std::optional<Commitment> recommit(const PublicParam& pp, const BitVector& m, const Opening& op) {
  if (auto* n = std::get_if<NaorParams>(&pp.body)) {
    const std::uint32_t lam = n->lambda();
    if (op.rand.size() != m.size() * lam) return std::nullopt;
    if (m.size() == 1) {
      BitVector blk = prg_expand(n->prg, op.rand);
      if (m.get(0)) blk ^= n->R;
      return Commitment{SchemeId::NaorSB, std::move(blk)};
    }
    BitVector body;
    for (std::size_t i = 0; i < m.size(); ++i) {
      BitVector blk = prg_expand(n->prg, op.rand.slice(i * lam, lam));
      if (m.get(i)) blk ^= n->R;
      body.append(blk);
    }
    return Commitment{SchemeId::NaorSB, std::move(body)};
  }
  if (auto* t = std::get_if<ToyTableParams>(&pp.body)) {
    if (m.size() != t->m_bits || op.rand.size() != t->r_bits) return std::nullopt;
    auto v = t->at(static_cast<std::uint32_t>(m.to_uint()), static_cast<std::uint32_t>(op.rand.to_uint()));
    return Commitment{SchemeId::ToyTable, BitVector::from_uint(v, t->c_bits)};
  }
  return std::nullopt;
}

inline std::pair<Commitment, Opening> commit(const PublicParam& pp, const BitVector& m, Rng& rng) {
  if (auto* n = std::get_if<NaorParams>(&pp.body)) {
    require(!m.empty(), "commit: empty message");
    Opening op{rng.bits(m.size() * n->lambda())};
    return {*recommit(pp, m, op), op};
  }
  if (auto* t = std::get_if<ToyTableParams>(&pp.body)) {
    require(m.size() == t->m_bits, "commit: message length mismatch");
    Opening op{BitVector::from_uint(rng.uniform(t->num_r()), t->r_bits)};
    return {*recommit(pp, m, op), op};
  }
  const auto& h = pp.hm();
  require(m.size() == h.msg_bits, "commit: message length mismatch");
  for (;;) {
    ToeplitzHash f = ToeplitzHash::random(h.in_len(), h.msg_bits, rng);
    try {
      BitVector r = universal_hash_sample_preimage(f, m, rng);
      BitVector body = detail::hm_hash(h, r);
      body.append(f.diag);
      body.append(f.offset);
      return {Commitment{SchemeId::HaleviMicaliSH, std::move(body)}, Opening{std::move(r)}};
    } catch (const RetryableError&) {
      continue;
    }
  }
}

inline bool verify_open(const PublicParam& pp, const Commitment& com, const BitVector& m, const Opening& op) {
  try {
    if (com.scheme != pp.scheme()) return false;
    if (pp.scheme() != SchemeId::HaleviMicaliSH) {
      auto c = recommit(pp, m, op);
      return c && *c == com;
    }
    const auto& h = pp.hm();
    const std::uint32_t L = h.in_len(), n = h.msg_bits;
    if (m.size() != n || op.rand.size() != L) return false;
    if (com.body.size() != h.hash_bits + (L + n - 1) + n) return false;
    ToeplitzHash f{L, n, com.body.slice(h.hash_bits, L + n - 1), com.body.slice(h.hash_bits + L + n - 1, n)};
    if (!(universal_hash_eval(f, op.rand) == m)) return false;
    return detail::hm_hash(h, op.rand) == com.body.slice(0, h.hash_bits);
  } catch (const std::exception&) {
    return false;
  }
}

// True iff no commitment value opens to two distinct messages.
inline bool is_binding_pp(const PublicParam& pp) {
  if (auto* t = std::get_if<ToyTableParams>(&pp.body)) return detail::toy_binding_in_m(*t);
  if (auto* n = std::get_if<NaorParams>(&pp.body)) {
    // Bitwise with a shared R, so binding per bit is binding overall:
    // a collision exists iff R = G(s) ⊕ G(s') for some seeds.
    const std::uint32_t lam = n->lambda();
    if (lam + 1 > 20) throw Unsupported("is_binding_pp: more than 2^20 (m, r) pairs");
    std::unordered_set<std::string> image;
    const std::uint64_t seeds = std::uint64_t{1} << lam;
    for (std::uint64_t s = 0; s < seeds; ++s)
      image.insert(prg_expand(n->prg, BitVector::from_uint(s, lam)).to_string());
    for (std::uint64_t s = 0; s < seeds; ++s)
      if (image.count((prg_expand(n->prg, BitVector::from_uint(s, lam)) ^ n->R).to_string())) return false;
    return true;
  }
  throw Unsupported("is_binding_pp: randomness space of HM is not enumerable");
}

namespace detail {
inline double tv_distance(const std::map<std::string, double>& p, const std::map<std::string, double>& q) {
  double d = 0;
  for (const auto& [k, v] : p) {
    auto it = q.find(k);
    d += std::abs(v - (it == q.end() ? 0.0 : it->second));
  }
  for (const auto& [k, v] : q)
    if (!p.count(k)) d += v;
  return d / 2;
}
}  // namespace detail

// Exact total-variation distance between Commit(pp, m0; ·) and Commit(pp, m1; ·).
inline double statistical_hiding_distance(const PublicParam& pp, const BitVector& m0, const BitVector& m1) {
  require(m0.size() == m1.size(), "hiding distance: message lengths differ");
  if (auto* t = std::get_if<ToyTableParams>(&pp.body)) {
    require(m0.size() == t->m_bits, "hiding distance: message length mismatch");
    std::map<std::string, double> p, q;
    const double w = 1.0 / t->num_r();
    for (std::uint32_t r = 0; r < t->num_r(); ++r) {
      p[std::to_string(t->at(static_cast<std::uint32_t>(m0.to_uint()), r))] += w;
      q[std::to_string(t->at(static_cast<std::uint32_t>(m1.to_uint()), r))] += w;
    }
    return detail::tv_distance(p, q);
  }
  if (auto* n = std::get_if<NaorParams>(&pp.body)) {
    // Positions where m0 and m1 agree contribute identical independent blocks
    // and do not change the distance.
    std::vector<std::size_t> diff;
    for (std::size_t i = 0; i < m0.size(); ++i)
      if (m0.get(i) != m1.get(i)) diff.push_back(i);
    if (diff.empty()) return 0.0;
    const std::uint32_t lam = n->lambda();
    if (diff.size() * lam > 20) throw Unsupported("hiding distance: more than 2^20 seed tuples");
    std::map<std::string, double> p, q;
    const std::uint64_t total = std::uint64_t{1} << (diff.size() * lam);
    const double w = 1.0 / static_cast<double>(total);
    for (std::uint64_t s = 0; s < total; ++s) {
      std::string a, b;
      for (std::size_t k = 0; k < diff.size(); ++k) {
        BitVector g = prg_expand(n->prg, BitVector::from_uint((s >> (k * lam)) & ((std::uint64_t{1} << lam) - 1), lam));
        BitVector gr = g ^ n->R;
        a += (m0.get(diff[k]) ? gr : g).to_string();
        b += (m1.get(diff[k]) ? gr : g).to_string();
      }
      p[a] += w;
      q[b] += w;
    }
    return detail::tv_distance(p, q);
  }
  throw Unsupported("hiding distance: HM randomness includes the hash function; use hm_hiding_distance_given_diag");
}

// HM distance conditioned on a fixed Toeplitz diagonal, exact over the offset
// and r. Each r ∈ {0,1}^L contributes mass 2^-L to the key (H(r), T·r ⊕ m).
inline double hm_hiding_distance_given_diag(const PublicParam& pp, const BitVector& m0, const BitVector& m1,
                                            const BitVector& diag) {
  const auto& h = pp.hm();
  const std::uint32_t L = h.in_len(), n = h.msg_bits;
  require(m0.size() == n && m1.size() == n, "hm hiding: message length mismatch");
  require(diag.size() == L + n - 1, "hm hiding: diag length mismatch");
  if (L > 20 || h.hash_bits + n > 24) throw Unsupported("hm hiding: more than 2^20 preimages");
  ToeplitzHash f{L, n, diag, BitVector(n)};
  if (gf2_solve(f.matrix(), BitVector(n))->rank < n) throw RetryableError("rank deficient diag");
  const std::uint64_t total = std::uint64_t{1} << L;
  std::vector<std::int64_t> diffcount(std::size_t{1} << (h.hash_bits + n), 0);
  const std::uint64_t a = m0.to_uint(), b = m1.to_uint();
  for (std::uint64_t r = 0; r < total; ++r) {
    BitVector rv = BitVector::from_uint(r, L);
    std::uint64_t y = detail::hm_hash(h, rv).to_uint();
    std::uint64_t tr = universal_hash_eval(f, rv).to_uint();
    diffcount[(y << n) | (tr ^ a)] += 1;
    diffcount[(y << n) | (tr ^ b)] -= 1;
  }
  double s = 0;
  for (auto c : diffcount) s += static_cast<double>(std::llabs(c));
  return s / (2.0 * static_cast<double>(total));
}

// Success probability of the optimal guesser for a uniform committed message,
// given only the commitment.
inline double best_guess_probability(const ToyTableParams& t) {
  std::map<std::uint32_t, std::vector<std::uint32_t>> counts;
  for (std::uint32_t m = 0; m < t.num_m(); ++m)
    for (std::uint32_t r = 0; r < t.num_r(); ++r) {
      auto& c = counts[t.at(m, r)];
      if (c.empty()) c.assign(t.num_m(), 0);
      ++c[m];
    }
  double total = 0;
  for (auto& [v, c] : counts) total += *std::max_element(c.begin(), c.end());
  return total / static_cast<double>(t.table.size());
}

}  // namespace ezk
