#pragma once

// Blum's Hamiltonicity protocol, run in parallel over `reps` repetitions.
//
// Plain flavor: repetition i commits bitwise to the n*n matrix H_i = π_i(x).
// Modified flavor: repetition i commits bitwise to m_i = H_i ‖ enc(π_i), where
// enc writes π_i(0..n-1) with ceil(log2 n) bits each, LSB-first.
//
// Challenge bit 0 opens everything (plus π_i in the plain flavor); bit 1 opens
// the n entries of H_i on a Hamiltonian cycle, listed as positions u*n+v.

#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "ezk/commit.hpp"
#include "ezk/graph.hpp"

namespace ezk {

enum class SigmaFlavor : std::uint8_t { Plain = 0, Modified = 1 };

inline int perm_width(int n) {
  int w = 0;
  while ((1 << w) < n) ++w;
  return w;
}

inline std::size_t sigma_message_bits(SigmaFlavor f, int n) {
  const auto nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  return f == SigmaFlavor::Plain ? nn : nn + static_cast<std::size_t>(n) * static_cast<std::size_t>(perm_width(n));
}

// Commitment parameters used for the per-bit commitments of a Σ first message.
struct CommitCtx {
  PublicParam pp;
  bool receiver_supplied = false;

  void validate() const {
    if (pp.scheme() == SchemeId::HaleviMicaliSH) require(pp.hm().msg_bits == 1, "commit ctx: HM must commit single bits");
    if (pp.scheme() == SchemeId::ToyTable) require(pp.toy().m_bits == 1, "commit ctx: toy table must have m_bits = 1");
  }
};

struct SigmaFirstMsg {
  SigmaFlavor flavor = SigmaFlavor::Plain;
  int n = 0;
  std::vector<std::vector<Commitment>> reps;

  void encode(ByteWriter& w) const {
    w.u8(static_cast<std::uint8_t>(flavor));
    w.u16(static_cast<std::uint16_t>(n));
    w.u32(static_cast<std::uint32_t>(reps.size()));
    for (const auto& rep : reps) {
      w.u32(static_cast<std::uint32_t>(rep.size()));
      for (const auto& c : rep) c.encode(w);
    }
  }
  static SigmaFirstMsg decode(ByteReader& r) {
    SigmaFirstMsg a;
    auto f = r.u8();
    if (f > 1) throw DecodeError("bad sigma flavor");
    a.flavor = static_cast<SigmaFlavor>(f);
    a.n = r.u16();
    if (a.n < 3 || a.n > 64) throw DecodeError("bad vertex count");
    const std::uint32_t reps = r.u32();
    for (std::uint32_t i = 0; i < reps; ++i) {
      const std::uint32_t cnt = r.u32();
      if (cnt != sigma_message_bits(a.flavor, a.n)) throw DecodeError("bad commitment count");
      std::vector<Commitment> rep;
      for (std::uint32_t j = 0; j < cnt; ++j) rep.push_back(Commitment::decode(r));
      a.reps.push_back(std::move(rep));
    }
    return a;
  }
  friend bool operator==(const SigmaFirstMsg&, const SigmaFirstMsg&) = default;
};

struct RepState {
  std::vector<int> perm;
  BitVector msg;
  std::vector<Opening> openings;
};

struct SigmaState {
  GraphInstance x;
  PublicParam pp;
  SigmaFlavor flavor = SigmaFlavor::Plain;
  std::vector<RepState> reps;
};

struct RepResponse {
  bool bit = false;
  std::vector<int> perm;                 // plain flavor, bit 0
  BitVector values;                      // modified flavor, bit 0
  std::vector<std::uint32_t> positions;  // bit 1
  std::vector<Opening> openings;

  void encode(ByteWriter& w) const {
    w.u8(bit ? 1 : 0);
    if (!bit) {
      w.u32(static_cast<std::uint32_t>(perm.size()));
      for (int p : perm) w.u16(static_cast<std::uint16_t>(p));
      w.bits(values);
    } else {
      w.u32(static_cast<std::uint32_t>(positions.size()));
      for (auto p : positions) w.u32(p);
    }
    w.u32(static_cast<std::uint32_t>(openings.size()));
    for (const auto& o : openings) o.encode(w);
  }
  static RepResponse decode(ByteReader& r) {
    RepResponse z;
    auto b = r.u8();
    if (b > 1) throw DecodeError("bad response bit");
    z.bit = b == 1;
    if (!z.bit) {
      const std::uint32_t k = r.u32();
      for (std::uint32_t i = 0; i < k; ++i) z.perm.push_back(r.u16());
      z.values = r.bits();
    } else {
      const std::uint32_t k = r.u32();
      for (std::uint32_t i = 0; i < k; ++i) z.positions.push_back(r.u32());
    }
    const std::uint32_t k = r.u32();
    for (std::uint32_t i = 0; i < k; ++i) z.openings.push_back(Opening::decode(r));
    return z;
  }
  friend bool operator==(const RepResponse&, const RepResponse&) = default;
};

struct SigmaResponse {
  std::vector<RepResponse> reps;

  void encode(ByteWriter& w) const {
    w.u32(static_cast<std::uint32_t>(reps.size()));
    for (const auto& z : reps) z.encode(w);
  }
  static SigmaResponse decode(ByteReader& r) {
    SigmaResponse z;
    const std::uint32_t k = r.u32();
    for (std::uint32_t i = 0; i < k; ++i) z.reps.push_back(RepResponse::decode(r));
    return z;
  }
  friend bool operator==(const SigmaResponse&, const SigmaResponse&) = default;
};

// ---- encodings of the modified-flavor message -------------------------------

inline BitVector mh_encode(const BitVector& h, const std::vector<int>& pi) {
  const int n = static_cast<int>(pi.size());
  const int w = perm_width(n);
  BitVector m = h;
  for (int v : pi) m.append(BitVector::from_uint(static_cast<std::uint64_t>(v), static_cast<std::size_t>(w)));
  return m;
}

inline std::optional<std::pair<BitVector, std::vector<int>>> mh_decode(const BitVector& m, int n) {
  if (m.size() != sigma_message_bits(SigmaFlavor::Modified, n)) return std::nullopt;
  const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  const auto w = static_cast<std::size_t>(perm_width(n));
  std::vector<int> pi;
  for (int v = 0; v < n; ++v) pi.push_back(static_cast<int>(m.slice(nn + static_cast<std::size_t>(v) * w, w).to_uint()));
  if (!is_permutation(pi, n)) return std::nullopt;
  return std::make_pair(m.slice(0, nn), std::move(pi));
}

// ---- shared machinery --------------------------------------------------------

namespace detail {

inline RepState commit_rep(const PublicParam& pp, BitVector msg, std::vector<int> perm, std::vector<Commitment>& coms,
                           Rng& rng) {
  RepState st{std::move(perm), std::move(msg), {}};
  coms.clear();
  for (std::size_t i = 0; i < st.msg.size(); ++i) {
    BitVector bit(1);
    bit.set(0, st.msg.get(i));
    auto [c, o] = commit(pp, bit, rng);
    coms.push_back(std::move(c));
    st.openings.push_back(std::move(o));
  }
  return st;
}

inline std::vector<std::uint32_t> cycle_positions(const std::vector<int>& pi, const CycleWitness& w) {
  const int n = static_cast<int>(pi.size());
  std::vector<std::uint32_t> pos;
  for (int k = 0; k < n; ++k) {
    int a = pi[static_cast<std::size_t>(w.order[static_cast<std::size_t>(k)])];
    int b = pi[static_cast<std::size_t>(w.order[static_cast<std::size_t>((k + 1) % n)])];
    pos.push_back(static_cast<std::uint32_t>(a * n + b));
  }
  return pos;
}

inline BitVector cycle_graph_matrix(const std::vector<int>& order) {
  const int n = static_cast<int>(order.size());
  BitVector h(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    int a = order[static_cast<std::size_t>(k)], b = order[static_cast<std::size_t>((k + 1) % n)];
    h.set(static_cast<std::size_t>(a * n + b), true);
    h.set(static_cast<std::size_t>(b * n + a), true);
  }
  return h;
}

// Walks a 2-regular symmetric matrix; returns the cycle's positions or nullopt.
inline std::optional<std::vector<std::uint32_t>> walk_cycle(const BitVector& h, int n) {
  std::vector<int> order{0};
  int prev = -1, cur = 0;
  for (int step = 0; step < n; ++step) {
    int next = -1;
    for (int v = 0; v < n; ++v)
      if (v != prev && v != cur && h.get(static_cast<std::size_t>(cur * n + v))) {
        next = v;
        break;
      }
    if (next < 0) return std::nullopt;
    if (next == 0) break;
    order.push_back(next);
    prev = cur;
    cur = next;
  }
  if (static_cast<int>(order.size()) != n || !is_permutation(order, n)) return std::nullopt;
  std::vector<int> id(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) id[static_cast<std::size_t>(i)] = i;
  auto pos = cycle_positions(id, CycleWitness{order});
  for (auto p : pos)
    if (!h.get(p)) return std::nullopt;
  return pos;
}

inline RepResponse respond_rep(const RepState& st, SigmaFlavor flavor, bool bit,
                               const std::vector<std::uint32_t>& positions) {
  RepResponse z;
  z.bit = bit;
  if (!bit) {
    if (flavor == SigmaFlavor::Plain)
      z.perm = st.perm;
    else
      z.values = st.msg;
    z.openings = st.openings;
  } else {
    z.positions = positions;
    for (auto p : positions) z.openings.push_back(st.openings[p]);
  }
  return z;
}

}  // namespace detail

// True iff the n positions (u*n+v) form a single undirected n-cycle.
inline bool positions_form_hamiltonian_cycle(int n, const std::vector<std::uint32_t>& positions) {
  if (static_cast<int>(positions.size()) != n) return false;
  std::set<std::pair<int, int>> edges;
  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<int>> nbr(static_cast<std::size_t>(n));
  for (auto p : positions) {
    if (p >= static_cast<std::uint32_t>(n * n)) return false;
    int u = static_cast<int>(p) / n, v = static_cast<int>(p) % n;
    if (u == v) return false;
    if (!edges.emplace(std::min(u, v), std::max(u, v)).second) return false;
    ++deg[static_cast<std::size_t>(u)];
    ++deg[static_cast<std::size_t>(v)];
    nbr[static_cast<std::size_t>(u)].push_back(v);
    nbr[static_cast<std::size_t>(v)].push_back(u);
  }
  for (int d : deg)
    if (d != 2) return false;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<int> stack{0};
  seen[0] = true;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : nbr[static_cast<std::size_t>(u)])
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        ++count;
        stack.push_back(v);
      }
  }
  return count == n;
}

// Single-repetition verifier check, shared by both flavors.
inline bool verify_rep(const GraphInstance& x, const PublicParam& pp, SigmaFlavor flavor,
                       const std::vector<Commitment>& coms, bool bit, const RepResponse& z) {
  const int n = x.n;
  const std::size_t total = sigma_message_bits(flavor, n);
  if (coms.size() != total || z.bit != bit) return false;
  auto opens_to = [&](std::size_t pos, bool v) {
    BitVector m(1);
    m.set(0, v);
    return verify_open(pp, coms[pos], m, z.openings[pos]);
  };
  if (!bit) {
    if (z.openings.size() != total || !z.positions.empty()) return false;
    BitVector h;
    if (flavor == SigmaFlavor::Plain) {
      if (!is_permutation(z.perm, n) || !z.values.empty()) return false;
      h = permuted_matrix(x, z.perm);
    } else {
      if (!z.perm.empty() || z.values.size() != total) return false;
      auto dec = mh_decode(z.values, n);
      if (!dec || !(dec->first == permuted_matrix(x, dec->second))) return false;
      h = z.values;
    }
    for (std::size_t i = 0; i < total; ++i)
      if (!opens_to(i, h.get(i))) return false;
    return true;
  }
  if (!z.perm.empty() || !z.values.empty() || z.openings.size() != static_cast<std::size_t>(n)) return false;
  if (!positions_form_hamiltonian_cycle(n, z.positions)) return false;
  for (int k = 0; k < n; ++k) {
    BitVector one(1);
    one.set(0, true);
    if (!verify_open(pp, coms[z.positions[static_cast<std::size_t>(k)]], one, z.openings[static_cast<std::size_t>(k)]))
      return false;
  }
  return true;
}

inline bool verify_all(const GraphInstance& x, const PublicParam& pp, SigmaFlavor flavor, const SigmaFirstMsg& a,
                       const BitVector& e, const SigmaResponse& z) {
  if (a.flavor != flavor || a.n != x.n || a.reps.size() != e.size() || z.reps.size() != e.size() || e.empty())
    return false;
  for (std::size_t i = 0; i < e.size(); ++i)
    if (!verify_rep(x, pp, flavor, a.reps[i], e.get(i), z.reps[i])) return false;
  return true;
}

// ---- plain flavor -------------------------------------------------------------

// Witness-free first message.
inline std::pair<SigmaFirstMsg, SigmaState> sigma_p1(const GraphInstance& x, std::size_t reps, const CommitCtx& ctx,
                                                      Rng& rng) {
  x.validate();
  ctx.validate();
  require(reps >= 1, "sigma_p1: need at least one repetition");
  SigmaFirstMsg a{SigmaFlavor::Plain, x.n, {}};
  SigmaState st{x, ctx.pp, SigmaFlavor::Plain, {}};
  for (std::size_t i = 0; i < reps; ++i) {
    std::vector<int> pi = rng.permutation(x.n);
    a.reps.emplace_back();
    st.reps.push_back(detail::commit_rep(ctx.pp, permuted_matrix(x, pi), pi, a.reps.back(), rng));
  }
  return {std::move(a), std::move(st)};
}

inline SigmaResponse sigma_p3(const SigmaState& st, const CycleWitness& w, const BitVector& e) {
  require(is_valid_witness(st.x, w), "sigma_p3: invalid witness");
  require(e.size() == st.reps.size(), "sigma_p3: challenge length mismatch");
  SigmaResponse z;
  for (std::size_t i = 0; i < st.reps.size(); ++i) {
    const auto& rs = st.reps[i];
    z.reps.push_back(detail::respond_rep(rs, st.flavor, e.get(i), e.get(i) ? detail::cycle_positions(rs.perm, w)
                                                                             : std::vector<std::uint32_t>{}));
  }
  return z;
}

inline bool sigma_verify(const GraphInstance& x, const CommitCtx& ctx, const SigmaFirstMsg& a, const BitVector& e,
                         const SigmaResponse& z) {
  return verify_all(x, ctx.pp, SigmaFlavor::Plain, a, e, z);
}

// Repetitions with e_i = 1 commit to a random n-cycle graph instead of π(x).
inline std::pair<SigmaFirstMsg, SigmaResponse> sigma_sim(const GraphInstance& x, const BitVector& e,
                                                         const CommitCtx& ctx, Rng& rng) {
  x.validate();
  ctx.validate();
  SigmaFirstMsg a{SigmaFlavor::Plain, x.n, {}};
  SigmaResponse z;
  for (std::size_t i = 0; i < e.size(); ++i) {
    a.reps.emplace_back();
    if (!e.get(i)) {
      std::vector<int> pi = rng.permutation(x.n);
      RepState rs = detail::commit_rep(ctx.pp, permuted_matrix(x, pi), pi, a.reps.back(), rng);
      z.reps.push_back(detail::respond_rep(rs, SigmaFlavor::Plain, false, {}));
    } else {
      std::vector<int> order = rng.permutation(x.n);
      BitVector h = detail::cycle_graph_matrix(order);
      RepState rs = detail::commit_rep(ctx.pp, h, {}, a.reps.back(), rng);
      std::vector<int> id(static_cast<std::size_t>(x.n));
      for (int v = 0; v < x.n; ++v) id[static_cast<std::size_t>(v)] = v;
      z.reps.push_back(detail::respond_rep(rs, SigmaFlavor::Plain, true, detail::cycle_positions(id, CycleWitness{order})));
    }
  }
  return {std::move(a), std::move(z)};
}

// ---- modified flavor ------------------------------------------------------------

inline std::vector<BitVector> mh_samp(const GraphInstance& x, std::size_t reps, Rng& rng) {
  x.validate();
  std::vector<BitVector> msgs;
  for (std::size_t i = 0; i < reps; ++i) {
    std::vector<int> pi = rng.permutation(x.n);
    msgs.push_back(mh_encode(permuted_matrix(x, pi), pi));
  }
  return msgs;
}

inline std::pair<SigmaFirstMsg, SigmaState> mh_commit(const GraphInstance& x, const std::vector<BitVector>& msgs,
                                                       const CommitCtx& ctx, Rng& rng) {
  x.validate();
  ctx.validate();
  SigmaFirstMsg a{SigmaFlavor::Modified, x.n, {}};
  SigmaState st{x, ctx.pp, SigmaFlavor::Modified, {}};
  for (const auto& m : msgs) {
    require(m.size() == sigma_message_bits(SigmaFlavor::Modified, x.n), "mh_commit: message length");
    auto dec = mh_decode(m, x.n);
    a.reps.emplace_back();
    st.reps.push_back(detail::commit_rep(ctx.pp, m, dec ? dec->second : std::vector<int>{}, a.reps.back(), rng));
  }
  return {std::move(a), std::move(st)};
}

inline SigmaResponse mh_resp(const SigmaState& st, const CycleWitness& w, const BitVector& e) {
  require(st.flavor == SigmaFlavor::Modified, "mh_resp: state is not modified flavor");
  return sigma_p3(st, w, e);
}

inline bool mh_verify(const GraphInstance& x, const CommitCtx& ctx, const SigmaFirstMsg& a, const BitVector& e,
                      const SigmaResponse& z) {
  return verify_all(x, ctx.pp, SigmaFlavor::Modified, a, e, z);
}

inline std::vector<BitVector> mh_simsamp(const GraphInstance& x, const BitVector& e, Rng& rng) {
  x.validate();
  std::vector<BitVector> msgs;
  for (std::size_t i = 0; i < e.size(); ++i) {
    std::vector<int> pi = rng.permutation(x.n);
    if (!e.get(i)) {
      msgs.push_back(mh_encode(permuted_matrix(x, pi), pi));
    } else {
      msgs.push_back(mh_encode(detail::cycle_graph_matrix(rng.permutation(x.n)), pi));
    }
  }
  return msgs;
}

// Responds from committed messages and openings alone (no witness): bit 1
// opens the cycle found by walking the committed matrix.
inline SigmaResponse mh_simresp(const SigmaState& st, const BitVector& e) {
  require(e.size() == st.reps.size(), "mh_simresp: challenge length mismatch");
  const int n = st.x.n;
  const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  SigmaResponse z;
  for (std::size_t i = 0; i < e.size(); ++i) {
    std::vector<std::uint32_t> pos;
    if (e.get(i)) {
      auto walked = detail::walk_cycle(st.reps[i].msg.slice(0, nn), n);
      require(walked.has_value(), "mh_simresp: committed matrix is not a Hamiltonian cycle");
      pos = *walked;
    }
    z.reps.push_back(detail::respond_rep(st.reps[i], SigmaFlavor::Modified, e.get(i), pos));
  }
  return z;
}

// Bit i is 0 iff m_i decodes to (H, π) with H = π(x): only then can a bit-0
// response exist, and then no bit-1 response exists when x has no cycle.
inline BitVector f_bad(const std::vector<BitVector>& msgs, const GraphInstance& x) {
  BitVector e(msgs.size());
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    auto dec = mh_decode(msgs[i], x.n);
    e.set(i, !(dec && dec->first == permuted_matrix(x, dec->second)));
  }
  return e;
}

// Special soundness: a bit-0 and a bit-1 response for the same repetition give
// a cycle in x (valid when the commitments are binding).
inline std::optional<CycleWitness> extract_witness(const GraphInstance& x, SigmaFlavor flavor, const RepResponse& z0,
                                                   const RepResponse& z1) {
  if (z0.bit || !z1.bit) return std::nullopt;
  std::vector<int> pi;
  if (flavor == SigmaFlavor::Plain) {
    pi = z0.perm;
  } else {
    auto dec = mh_decode(z0.values, x.n);
    if (!dec) return std::nullopt;
    pi = dec->second;
  }
  if (!is_permutation(pi, x.n) || !positions_form_hamiltonian_cycle(x.n, z1.positions)) return std::nullopt;
  std::vector<int> inv(static_cast<std::size_t>(x.n));
  for (int v = 0; v < x.n; ++v) inv[static_cast<std::size_t>(pi[static_cast<std::size_t>(v)])] = v;
  GraphInstance c(x.n);
  for (auto p : z1.positions)
    c.set_edge(inv[p / static_cast<std::uint32_t>(x.n)], inv[p % static_cast<std::uint32_t>(x.n)], true);
  auto walked = detail::walk_cycle(c.matrix_bits(), x.n);
  if (!walked) return std::nullopt;
  CycleWitness w;
  for (auto p : *walked) w.order.push_back(static_cast<int>(p) / x.n);
  if (!is_valid_witness(x, w)) return std::nullopt;
  return w;
}

}  // namespace ezk
