#pragma once

// Witness-indistinguishable proof of knowledge for the OR statement
//   (pp_Σ, x, a = {com_i}) : x is Hamiltonian, or every com_i opens under pp_Σ.
//
// Branch A is the plain Blum protocol. Branch B is a masked-wire circuit proof
// for "relation circuit(m, r) = com bodies": per repetition the prover commits
// to the masked inputs, the output masks and a shuffled 4-row table per AND
// gate. Bit 0 reveals the masks and opens every table; bit 1 opens the masked
// inputs plus the one row per AND gate that the evaluation uses.

#include <concepts>
#include <functional>
#include <map>
#include <string>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "ezk/circuit.hpp"
#include "ezk/sigma.hpp"

namespace ezk {

template <class P>
concept BranchProtocol = requires(const P& p, const typename P::Witness& w, const typename P::State& st,
                                  const typename P::First& a, const typename P::Response& z, const BitVector& e,
                                  Rng& rng, ByteWriter& bw, ByteReader& br) {
  { p.reps() } -> std::convertible_to<std::size_t>;
  { p.first(w, rng) } -> std::same_as<std::pair<typename P::First, typename P::State>>;
  { p.respond(st, w, e) } -> std::same_as<typename P::Response>;
  { p.verify(a, e, z) } -> std::same_as<bool>;
  { p.simulate(e, rng) } -> std::same_as<std::pair<typename P::First, typename P::Response>>;
  { p.extract(a, e, z, e, z) } -> std::same_as<std::optional<typename P::Witness>>;
  { p.valid_witness(w) } -> std::same_as<bool>;
  a.encode(bw);
  z.encode(bw);
  { P::First::decode(br) } -> std::same_as<typename P::First>;
  { P::Response::decode(br) } -> std::same_as<typename P::Response>;
};

namespace detail {
inline std::optional<std::size_t> first_difference(const BitVector& e1, const BitVector& e2) {
  if (e1.size() != e2.size()) return std::nullopt;
  for (std::size_t j = 0; j < e1.size(); ++j)
    if (e1.get(j) != e2.get(j)) return j;
  return std::nullopt;
}
}  // namespace detail

// ---- branch A ------------------------------------------------------------------

class BlumBranch {
 public:
  using Witness = CycleWitness;
  using First = SigmaFirstMsg;
  using State = SigmaState;
  using Response = SigmaResponse;

  BlumBranch(GraphInstance x, CommitCtx ctx, std::size_t reps) : x_(std::move(x)), ctx_(std::move(ctx)), reps_(reps) {}

  std::size_t reps() const { return reps_; }
  // The first message never reads the witness.
  std::pair<First, State> first(const Witness&, Rng& rng) const { return sigma_p1(x_, reps_, ctx_, rng); }
  Response respond(const State& st, const Witness& w, const BitVector& e) const { return sigma_p3(st, w, e); }
  bool verify(const First& a, const BitVector& e, const Response& z) const {
    return e.size() == reps_ && sigma_verify(x_, ctx_, a, e, z);
  }
  std::pair<First, Response> simulate(const BitVector& e, Rng& rng) const { return sigma_sim(x_, e, ctx_, rng); }
  std::optional<Witness> extract(const First& a, const BitVector& e1, const Response& z1, const BitVector& e2,
                                 const Response& z2) const {
    if (!verify(a, e1, z1) || !verify(a, e2, z2)) return std::nullopt;
    auto j = detail::first_difference(e1, e2);
    if (!j) return std::nullopt;
    const auto& r0 = e1.get(*j) ? z2.reps[*j] : z1.reps[*j];
    const auto& r1 = e1.get(*j) ? z1.reps[*j] : z2.reps[*j];
    return extract_witness(x_, SigmaFlavor::Plain, r0, r1);
  }
  bool valid_witness(const Witness& w) const { return is_valid_witness(x_, w); }
  const GraphInstance& instance() const { return x_; }

 private:
  GraphInstance x_;
  CommitCtx ctx_;
  std::size_t reps_;
};

// ---- branch B ------------------------------------------------------------------

struct CircuitRepFirst {
  std::vector<Commitment> inputs;  // masked input values
  std::vector<Commitment> outs;    // output-wire masks
  std::vector<Commitment> tables;  // per AND gate: 4 rows of (α, β, γ)
  friend bool operator==(const CircuitRepFirst&, const CircuitRepFirst&) = default;
};

struct CircuitFirst {
  std::vector<CircuitRepFirst> reps;

  void encode(ByteWriter& w) const {
    w.u32(static_cast<std::uint32_t>(reps.size()));
    for (const auto& r : reps)
      for (const auto* v : {&r.inputs, &r.outs, &r.tables}) {
        w.u32(static_cast<std::uint32_t>(v->size()));
        for (const auto& c : *v) c.encode(w);
      }
  }
  static CircuitFirst decode(ByteReader& r) {
    CircuitFirst a;
    const std::uint32_t k = r.u32();
    for (std::uint32_t i = 0; i < k; ++i) {
      CircuitRepFirst rep;
      for (auto* v : {&rep.inputs, &rep.outs, &rep.tables}) {
        const std::uint32_t cnt = r.u32();
        for (std::uint32_t j = 0; j < cnt; ++j) v->push_back(Commitment::decode(r));
      }
      a.reps.push_back(std::move(rep));
    }
    return a;
  }
  friend bool operator==(const CircuitFirst&, const CircuitFirst&) = default;
};

struct CircuitRepResponse {
  bool bit = false;
  BitVector masks;                     // bit 0: masks of input wires, then AND outputs
  BitVector table_bits;                // bit 0: all rows; bit 1: the chosen row per AND gate
  std::vector<std::uint8_t> row_index; // bit 1: chosen row per AND gate
  BitVector in_bits;                   // bit 1: masked inputs
  BitVector out_masks;                 // both
  std::vector<Opening> openings;       // bit 0: tables, outs; bit 1: inputs, chosen rows, outs

  void encode(ByteWriter& w) const {
    w.u8(bit ? 1 : 0);
    w.bits(masks);
    w.bits(table_bits);
    w.bytes(row_index);
    w.bits(in_bits);
    w.bits(out_masks);
    w.u32(static_cast<std::uint32_t>(openings.size()));
    for (const auto& o : openings) o.encode(w);
  }
  static CircuitRepResponse decode(ByteReader& r) {
    CircuitRepResponse z;
    auto b = r.u8();
    if (b > 1) throw DecodeError("bad response bit");
    z.bit = b == 1;
    z.masks = r.bits();
    z.table_bits = r.bits();
    z.row_index = r.bytes();
    z.in_bits = r.bits();
    z.out_masks = r.bits();
    const std::uint32_t k = r.u32();
    for (std::uint32_t i = 0; i < k; ++i) z.openings.push_back(Opening::decode(r));
    return z;
  }
  friend bool operator==(const CircuitRepResponse&, const CircuitRepResponse&) = default;
};

struct CircuitResponse {
  std::vector<CircuitRepResponse> reps;
  void encode(ByteWriter& w) const {
    w.u32(static_cast<std::uint32_t>(reps.size()));
    for (const auto& z : reps) z.encode(w);
  }
  static CircuitResponse decode(ByteReader& r) {
    CircuitResponse z;
    const std::uint32_t k = r.u32();
    for (std::uint32_t i = 0; i < k; ++i) z.reps.push_back(CircuitRepResponse::decode(r));
    return z;
  }
  friend bool operator==(const CircuitResponse&, const CircuitResponse&) = default;
};

class CircuitBranch {
 public:
  using Witness = BitVector;  // circuit input
  using First = CircuitFirst;
  using Response = CircuitResponse;

  struct RepSecret {
    BitVector masks;       // per wire
    BitVector masked;      // per wire
    BitVector table_bits;  // and_count * 12
    std::vector<std::uint8_t> row_of;  // per AND gate, 4 entries: row slot holding (α, β) = index
    std::vector<Opening> in_ops, out_ops, table_ops;
  };
  struct State {
    std::vector<RepSecret> reps;
  };

  CircuitBranch(Circuit c, BitVector target, PublicParam pp, std::size_t reps)
      : c_(std::move(c)), target_(std::move(target)), pp_(std::move(pp)), reps_(reps) {
    require(target_.size() == c_.outputs().size(), "circuit branch: target width != output count");
    c_.validate();
    for (std::uint32_t k = 0; k < c_.gate_count(); ++k)
      if (c_.gates()[k].op == GateOp::And) and_wires_.push_back(c_.n_inputs() + k);
  }

  std::size_t reps() const { return reps_; }
  const Circuit& circuit() const { return c_; }

  const BitVector& target() const { return target_; }
  bool valid_witness(const Witness& w) const { return w.size() == c_.n_inputs() && eval_circuit(c_, w) == target_; }

  std::pair<First, State> first(const Witness& w, Rng& rng) const {
    require(valid_witness(w), "circuit branch: invalid witness");
    First a;
    State st;
    for (std::size_t i = 0; i < reps_; ++i) {
      auto [ra, rs] = commit_rep(w, rng);
      a.reps.push_back(std::move(ra));
      st.reps.push_back(std::move(rs));
    }
    return {std::move(a), std::move(st)};
  }

  Response respond(const State& st, const Witness&, const BitVector& e) const {
    require(e.size() == reps_ && st.reps.size() == reps_, "circuit branch: challenge length mismatch");
    Response z;
    for (std::size_t i = 0; i < reps_; ++i) z.reps.push_back(respond_rep(st.reps[i], e.get(i)));
    return z;
  }

  bool verify(const First& a, const BitVector& e, const Response& z) const {
    if (e.size() != reps_ || a.reps.size() != reps_ || z.reps.size() != reps_) return false;
    for (std::size_t i = 0; i < reps_; ++i)
      if (!verify_rep(a.reps[i], e.get(i), z.reps[i])) return false;
    return true;
  }

  // Bit-0 repetitions are honest commitments to an arbitrary input (they never
  // reveal it). Bit-1 repetitions commit to random masked values and fix the
  // output masks so that the outputs decode to the target.
  std::pair<First, Response> simulate(const BitVector& e, Rng& rng) const {
    require(e.size() == reps_, "circuit branch: challenge length mismatch");
    First a;
    Response z;
    for (std::size_t i = 0; i < reps_; ++i) {
      if (!e.get(i)) {
        auto [ra, rs] = commit_rep(BitVector(c_.n_inputs()), rng);
        a.reps.push_back(std::move(ra));
        z.reps.push_back(respond_rep(rs, false));
        continue;
      }
      RepSecret rs;
      rs.masked = BitVector(c_.wire_count());
      BitVector in = rng.bits(c_.n_inputs());
      for (std::uint32_t w = 0; w < c_.n_inputs(); ++w) rs.masked.set(w, in.get(w));
      rs.table_bits = BitVector(and_wires_.size() * 12);
      rs.row_of.assign(and_wires_.size() * 4, 0);
      std::size_t and_k = 0;
      for (std::uint32_t k = 0; k < c_.gate_count(); ++k) {
        const Gate& g = c_.gates()[k];
        const std::uint32_t wire = c_.n_inputs() + k;
        if (g.op == GateOp::And) {
          const bool a0 = rs.masked.get(g.a), b0 = rs.masked.get(g.b), out = rng.bit();
          rs.masked.set(wire, out);
          const auto idx = static_cast<std::uint8_t>(a0 | (b0 << 1));
          const auto slot = static_cast<std::uint8_t>(rng.uniform(4));
          rs.row_of[and_k * 4 + idx] = slot;
          BitVector junk = rng.bits(12);
          for (std::size_t t = 0; t < 12; ++t) rs.table_bits.set(and_k * 12 + t, junk.get(t));
          rs.table_bits.set(and_k * 12 + slot * 3u + 0, a0);
          rs.table_bits.set(and_k * 12 + slot * 3u + 1, b0);
          rs.table_bits.set(and_k * 12 + slot * 3u + 2, out);
          ++and_k;
        } else {
          rs.masked.set(wire, masked_gate(g, rs.masked));
        }
      }
      rs.masks = BitVector(c_.wire_count());
      for (std::size_t o = 0; o < c_.outputs().size(); ++o)
        rs.masks.set(c_.outputs()[o], rs.masked.get(c_.outputs()[o]) != target_.get(o));
      CircuitRepFirst ra = commit_secret(rs, rng);
      a.reps.push_back(std::move(ra));
      z.reps.push_back(respond_rep(rs, true));
    }
    return {std::move(a), std::move(z)};
  }

  std::optional<Witness> extract(const First& a, const BitVector& e1, const Response& z1, const BitVector& e2,
                                 const Response& z2) const {
    if (!verify(a, e1, z1) || !verify(a, e2, z2)) return std::nullopt;
    auto j = detail::first_difference(e1, e2);
    if (!j) return std::nullopt;
    const auto& r0 = e1.get(*j) ? z2.reps[*j] : z1.reps[*j];
    const auto& r1 = e1.get(*j) ? z1.reps[*j] : z2.reps[*j];
    BitVector w = r1.in_bits ^ r0.masks.slice(0, c_.n_inputs());
    if (!valid_witness(w)) return std::nullopt;
    return w;
  }

 private:
  bool masked_gate(const Gate& g, const BitVector& masked) const {
    switch (g.op) {
      case GateOp::Xor: return masked.get(g.a) != masked.get(g.b);
      case GateOp::Not: return !masked.get(g.a);
      case GateOp::Const0: return false;
      case GateOp::Const1: return true;
      case GateOp::And: break;
    }
    throw InvalidArgument("masked_gate: AND has no free evaluation");
  }

  // Masks of non-AND wires follow from their inputs: XOR adds masks, NOT
  // keeps the mask, constants are unmasked.
  BitVector propagate_masks(const BitVector& free_masks) const {
    BitVector m(c_.wire_count());
    std::size_t next = c_.n_inputs();
    for (std::uint32_t w = 0; w < c_.n_inputs(); ++w) m.set(w, free_masks.get(w));
    for (std::uint32_t k = 0; k < c_.gate_count(); ++k) {
      const Gate& g = c_.gates()[k];
      const std::uint32_t wire = c_.n_inputs() + k;
      switch (g.op) {
        case GateOp::Xor: m.set(wire, m.get(g.a) != m.get(g.b)); break;
        case GateOp::Not: m.set(wire, m.get(g.a)); break;
        case GateOp::Const0:
        case GateOp::Const1: m.set(wire, false); break;
        case GateOp::And: m.set(wire, free_masks.get(next++)); break;
      }
    }
    return m;
  }

  BitVector free_masks_of(const BitVector& masks) const {
    BitVector f(c_.n_inputs() + and_wires_.size());
    for (std::uint32_t w = 0; w < c_.n_inputs(); ++w) f.set(w, masks.get(w));
    for (std::size_t k = 0; k < and_wires_.size(); ++k) f.set(c_.n_inputs() + k, masks.get(and_wires_[k]));
    return f;
  }

  std::pair<CircuitRepFirst, RepSecret> commit_rep(const BitVector& input, Rng& rng) const {
    RepSecret rs;
    BitVector values = eval_wires(c_, input);
    rs.masks = propagate_masks(rng.bits(c_.n_inputs() + and_wires_.size()));
    rs.masked = values ^ rs.masks;
    rs.table_bits = BitVector(and_wires_.size() * 12);
    rs.row_of.assign(and_wires_.size() * 4, 0);
    for (std::size_t k = 0; k < and_wires_.size(); ++k) {
      const Gate& g = c_.gates()[and_wires_[k] - c_.n_inputs()];
      const bool la = rs.masks.get(g.a), lb = rs.masks.get(g.b), lc = rs.masks.get(and_wires_[k]);
      std::vector<std::uint8_t> slots = {0, 1, 2, 3};
      rng.shuffle(slots);
      for (std::uint8_t idx = 0; idx < 4; ++idx) {
        const bool al = idx & 1, be = (idx >> 1) & 1;
        const bool ga = ((al != la) && (be != lb)) != lc;
        const std::size_t base = k * 12 + slots[idx] * 3u;
        rs.table_bits.set(base, al);
        rs.table_bits.set(base + 1, be);
        rs.table_bits.set(base + 2, ga);
        rs.row_of[k * 4 + idx] = slots[idx];
      }
    }
    CircuitRepFirst ra = commit_secret(rs, rng);
    return {std::move(ra), std::move(rs)};
  }

  CircuitRepFirst commit_secret(RepSecret& rs, Rng& rng) const {
    CircuitRepFirst ra;
    auto put = [&](bool v, std::vector<Commitment>& coms, std::vector<Opening>& ops) {
      BitVector b(1);
      b.set(0, v);
      auto [c, o] = commit(pp_, b, rng);
      coms.push_back(std::move(c));
      ops.push_back(std::move(o));
    };
    for (std::uint32_t w = 0; w < c_.n_inputs(); ++w) put(rs.masked.get(w), ra.inputs, rs.in_ops);
    for (auto o : c_.outputs()) put(rs.masks.get(o), ra.outs, rs.out_ops);
    for (std::size_t t = 0; t < rs.table_bits.size(); ++t) put(rs.table_bits.get(t), ra.tables, rs.table_ops);
    return ra;
  }

  CircuitRepResponse respond_rep(const RepSecret& rs, bool bit) const {
    CircuitRepResponse z;
    z.bit = bit;
    z.out_masks = BitVector(c_.outputs().size());
    for (std::size_t o = 0; o < c_.outputs().size(); ++o) z.out_masks.set(o, rs.masks.get(c_.outputs()[o]));
    if (!bit) {
      z.masks = free_masks_of(rs.masks);
      z.table_bits = rs.table_bits;
      z.openings = rs.table_ops;
      z.openings.insert(z.openings.end(), rs.out_ops.begin(), rs.out_ops.end());
      return z;
    }
    z.in_bits = rs.masked.slice(0, c_.n_inputs());
    z.openings = rs.in_ops;
    z.table_bits = BitVector(and_wires_.size() * 3);
    for (std::size_t k = 0; k < and_wires_.size(); ++k) {
      const Gate& g = c_.gates()[and_wires_[k] - c_.n_inputs()];
      const auto idx = static_cast<std::uint8_t>(rs.masked.get(g.a) | (rs.masked.get(g.b) << 1));
      const std::uint8_t slot = rs.row_of[k * 4 + idx];
      z.row_index.push_back(slot);
      for (std::size_t t = 0; t < 3; ++t) {
        z.table_bits.set(k * 3 + t, rs.table_bits.get(k * 12 + slot * 3u + t));
        z.openings.push_back(rs.table_ops[k * 12 + slot * 3u + t]);
      }
    }
    z.openings.insert(z.openings.end(), rs.out_ops.begin(), rs.out_ops.end());
    return z;
  }

  bool opens(const Commitment& c, bool v, const Opening& o) const {
    BitVector b(1);
    b.set(0, v);
    return verify_open(pp_, c, b, o);
  }

  bool verify_rep(const CircuitRepFirst& a, bool bit, const CircuitRepResponse& z) const {
    const std::size_t n_in = c_.n_inputs(), n_out = c_.outputs().size(), n_and = and_wires_.size();
    if (z.bit != bit || a.inputs.size() != n_in || a.outs.size() != n_out || a.tables.size() != n_and * 12) return false;
    if (z.out_masks.size() != n_out) return false;
    if (!bit) {
      if (z.masks.size() != n_in + n_and || z.table_bits.size() != n_and * 12 || z.openings.size() != n_and * 12 + n_out)
        return false;
      BitVector m = propagate_masks(z.masks);
      for (std::size_t t = 0; t < n_and * 12; ++t)
        if (!opens(a.tables[t], z.table_bits.get(t), z.openings[t])) return false;
      for (std::size_t o = 0; o < n_out; ++o) {
        if (z.out_masks.get(o) != m.get(c_.outputs()[o])) return false;
        if (!opens(a.outs[o], z.out_masks.get(o), z.openings[n_and * 12 + o])) return false;
      }
      for (std::size_t k = 0; k < n_and; ++k) {
        const Gate& g = c_.gates()[and_wires_[k] - c_.n_inputs()];
        const bool la = m.get(g.a), lb = m.get(g.b), lc = m.get(and_wires_[k]);
        unsigned seen = 0;
        for (std::size_t s = 0; s < 4; ++s) {
          const bool al = z.table_bits.get(k * 12 + s * 3), be = z.table_bits.get(k * 12 + s * 3 + 1),
                     ga = z.table_bits.get(k * 12 + s * 3 + 2);
          if (ga != (((al != la) && (be != lb)) != lc)) return false;
          seen |= 1U << (al | (be << 1));
        }
        if (seen != 0xF) return false;
      }
      return true;
    }
    if (z.in_bits.size() != n_in || z.row_index.size() != n_and || z.table_bits.size() != n_and * 3 ||
        z.openings.size() != n_in + 3 * n_and + n_out)
      return false;
    for (std::size_t w = 0; w < n_in; ++w)
      if (!opens(a.inputs[w], z.in_bits.get(w), z.openings[w])) return false;
    BitVector masked(c_.wire_count());
    for (std::uint32_t w = 0; w < n_in; ++w) masked.set(w, z.in_bits.get(w));
    std::size_t k = 0;
    for (std::uint32_t gi = 0; gi < c_.gate_count(); ++gi) {
      const Gate& g = c_.gates()[gi];
      const std::uint32_t wire = c_.n_inputs() + gi;
      if (g.op != GateOp::And) {
        masked.set(wire, masked_gate(g, masked));
        continue;
      }
      const std::uint8_t slot = z.row_index[k];
      if (slot > 3) return false;
      const bool al = z.table_bits.get(k * 3), be = z.table_bits.get(k * 3 + 1), ga = z.table_bits.get(k * 3 + 2);
      if (al != masked.get(g.a) || be != masked.get(g.b)) return false;
      for (std::size_t t = 0; t < 3; ++t)
        if (!opens(a.tables[k * 12 + slot * 3u + t], z.table_bits.get(k * 3 + t), z.openings[n_in + k * 3 + t]))
          return false;
      masked.set(wire, ga);
      ++k;
    }
    for (std::size_t o = 0; o < n_out; ++o) {
      if (!opens(a.outs[o], z.out_masks.get(o), z.openings[n_in + 3 * n_and + o])) return false;
      if ((masked.get(c_.outputs()[o]) != z.out_masks.get(o)) != target_.get(o)) return false;
    }
    return true;
  }

  Circuit c_;
  BitVector target_;
  PublicParam pp_;
  std::size_t reps_;
  std::vector<std::uint32_t> and_wires_;
};

// ---- OR composition ---------------------------------------------------------------

template <BranchProtocol A, BranchProtocol B>
class OrProof {
 public:
  using Witness = std::variant<typename A::Witness, typename B::Witness>;

  struct First {
    typename A::First a;
    typename B::First b;
    void encode(ByteWriter& w) const {
      a.encode(w);
      b.encode(w);
    }
    static First decode(ByteReader& r) {
      auto fa = A::First::decode(r);
      auto fb = B::First::decode(r);
      return {std::move(fa), std::move(fb)};
    }
    friend bool operator==(const First&, const First&) = default;
  };

  // The verifier recomputes e_B = e ⊕ e_A.
  struct Response {
    BitVector e_a;
    typename A::Response za;
    typename B::Response zb;
    void encode(ByteWriter& w) const {
      w.bits(e_a);
      za.encode(w);
      zb.encode(w);
    }
    static Response decode(ByteReader& r) {
      BitVector ea = r.bits();
      auto za = A::Response::decode(r);
      auto zb = B::Response::decode(r);
      return {std::move(ea), std::move(za), std::move(zb)};
    }
    friend bool operator==(const Response&, const Response&) = default;
  };

  struct State {
    bool real_is_a = true;
    BitVector e_sim;  // pre-chosen sub-challenge of the simulated branch
    std::optional<typename A::State> sa;
    std::optional<typename B::State> sb;
    std::optional<typename A::Response> sim_za;
    std::optional<typename B::Response> sim_zb;
  };

  OrProof(A a, B b) : a_(std::move(a)), b_(std::move(b)) {
    require(a_.reps() == b_.reps(), "or_compose: branch challenge lengths differ");
  }

  std::size_t reps() const { return a_.reps(); }
  const A& branch_a() const { return a_; }
  const B& branch_b() const { return b_; }

  bool valid_witness(const Witness& w) const {
    if (auto* wa = std::get_if<0>(&w)) return a_.valid_witness(*wa);
    return b_.valid_witness(std::get<1>(w));
  }

  // `e_sim` pins the simulated branch's sub-challenge; otherwise it is drawn
  // from `rng`. Pinning lets two provers with different witnesses be coupled
  // to the same (e_A, e_B) split.
  std::pair<First, State> first(const Witness& w, Rng& rng,
                                const std::optional<BitVector>& e_sim = std::nullopt) const {
    require(valid_witness(w), "or proof: invalid witness");
    require(!e_sim || e_sim->size() == reps(), "or proof: simulated sub-challenge length mismatch");
    State st;
    st.e_sim = e_sim ? *e_sim : rng.bits(reps());
    if (auto* wa = std::get_if<0>(&w)) {
      auto [fb, zb] = b_.simulate(st.e_sim, rng);
      auto [fa, sa] = a_.first(*wa, rng);
      st.sa = std::move(sa);
      st.sim_zb = std::move(zb);
      return {First{std::move(fa), std::move(fb)}, std::move(st)};
    }
    st.real_is_a = false;
    auto [fa, za] = a_.simulate(st.e_sim, rng);
    auto [fb, sb] = b_.first(std::get<1>(w), rng);
    st.sb = std::move(sb);
    st.sim_za = std::move(za);
    return {First{std::move(fa), std::move(fb)}, std::move(st)};
  }

  Response respond(const State& st, const Witness& w, const BitVector& e) const {
    require(e.size() == reps(), "or proof: challenge length mismatch");
    const BitVector e_real = e ^ st.e_sim;
    if (st.real_is_a) return {e_real, a_.respond(*st.sa, std::get<0>(w), e_real), *st.sim_zb};
    return {st.e_sim, *st.sim_za, b_.respond(*st.sb, std::get<1>(w), e_real)};
  }

  bool verify(const First& f, const BitVector& e, const Response& z) const {
    if (e.size() != reps() || z.e_a.size() != reps()) return false;
    return a_.verify(f.a, z.e_a, z.za) && b_.verify(f.b, e ^ z.e_a, z.zb);
  }

  std::pair<First, Response> simulate(const BitVector& e, Rng& rng) const {
    BitVector ea = rng.bits(reps());
    auto [fa, za] = a_.simulate(ea, rng);
    auto [fb, zb] = b_.simulate(e ^ ea, rng);
    return {First{std::move(fa), std::move(fb)}, Response{std::move(ea), std::move(za), std::move(zb)}};
  }

  // With e ≠ e', the sub-challenges differ in branch A or (if e_A = e'_A)
  // necessarily in branch B.
  std::optional<Witness> extract(const First& f, const BitVector& e1, const Response& z1, const BitVector& e2,
                                 const Response& z2) const {
    if (!verify(f, e1, z1) || !verify(f, e2, z2) || e1 == e2) return std::nullopt;
    if (!(z1.e_a == z2.e_a)) {
      if (auto w = a_.extract(f.a, z1.e_a, z1.za, z2.e_a, z2.za)) return Witness{std::in_place_index<0>, *w};
      return std::nullopt;
    }
    if (auto w = b_.extract(f.b, e1 ^ z1.e_a, z1.zb, e2 ^ z2.e_a, z2.zb)) return Witness{std::in_place_index<1>, *w};
    return std::nullopt;
  }

 private:
  A a_;
  B b_;
};

template <BranchProtocol A, BranchProtocol B>
OrProof<A, B> or_compose(A a, B b) {
  return OrProof<A, B>(std::move(a), std::move(b));
}

// ---- the WIPoK used inside the argument -----------------------------------------

// Relation circuits whose proof would not fit comfortably in one transport
// frame (1 MiB) leave the WIPoK in witness-only mode.
inline constexpr std::size_t kWipokCircuitFirstMaxBytes = std::size_t{1} << 19;

// Encoded size of the circuit branch's first message (its largest message)
// for a relation over `coms` commitments. Inputs, outputs and AND gates add
// up across commitments, so a one-commitment circuit sizes the whole, and
// every committed bit encodes to the same length.
inline std::size_t relation_proof_first_bytes(const PublicParam& pp_sigma, std::size_t coms, const PublicParam& pp_wi,
                                              std::size_t reps) {
  const Circuit one = build_commit_relation_circuit(pp_sigma, 1);
  std::size_t ands = 0;
  for (const auto& g : one.gates()) ands += g.op == GateOp::And;
  Rng rng(0);
  ByteWriter w;
  commit(pp_wi, BitVector(1), rng).first.encode(w);
  const std::size_t per_rep = coms * (one.n_inputs() + one.outputs().size() + ands * 12);
  return 4 + reps * (12 + per_rep * w.take().size());
}


struct OrStatement {
  PublicParam pp_sigma;
  GraphInstance x;
  std::vector<Commitment> coms;
};

// Branch-B witness: every committed message bit with its opening.
struct Decommitments {
  std::vector<BitVector> messages;
  std::vector<Opening> openings;
};

using OrWitness = std::variant<CycleWitness, Decommitments>;

// Flattens the Σ first message into the commitment list of the statement.
inline std::vector<Commitment> commitments_of(const SigmaFirstMsg& a) {
  std::vector<Commitment> out;
  for (const auto& rep : a.reps) out.insert(out.end(), rep.begin(), rep.end());
  return out;
}

// Bitwise decommitments matching commitments_of (one message bit each).
inline Decommitments decommitments_of(const SigmaState& st) {
  Decommitments d;
  for (const auto& rep : st.reps)
    for (std::size_t j = 0; j < rep.openings.size(); ++j) {
      BitVector b(1);
      b.set(0, rep.msg.get(j));
      d.messages.push_back(std::move(b));
      d.openings.push_back(rep.openings[j]);
    }
  return d;
}

inline BitVector relation_target(const std::vector<Commitment>& coms) {
  BitVector t;
  for (const auto& c : coms) t.append(c.body);
  return t;
}

inline BitVector relation_witness(const Decommitments& d) {
  BitVector w;
  for (std::size_t i = 0; i < d.messages.size(); ++i) w.append(relation_input(d.messages[i], d.openings[i]));
  return w;
}

// Splits a relation-circuit input back into per-commitment (m_i, r_i).
inline Decommitments split_relation_witness(const PublicParam& pp, const BitVector& w, std::size_t k) {
  const std::size_t mlen = pp.scheme() == SchemeId::ToyTable ? pp.toy().m_bits : 1;
  const std::size_t per = w.size() / k;
  Decommitments d;
  for (std::size_t i = 0; i < k; ++i) {
    d.messages.push_back(w.slice(i * per, mlen));
    d.openings.push_back(Opening{w.slice(i * per + mlen, per - mlen)});
  }
  return d;
}

enum class WipokMode : std::uint8_t {
  Or = 0,           // both branches available
  WitnessOnly = 1,  // pp_Σ has no feasible relation circuit: branch A alone
};

// One WIPoK instance bound to the statement and the verifier-chosen pp.
class Wipok {
 public:
  using Or = OrProof<BlumBranch, CircuitBranch>;

  Wipok(OrStatement st, PublicParam pp_wi, std::size_t reps) : st_(std::move(st)), reps_(reps) {
    CommitCtx ctx{std::move(pp_wi), true};
    ctx.validate();
    BlumBranch a(st_.x, ctx, reps);
    if (circuit_friendly(st_.pp_sigma) && !st_.coms.empty() &&
        relation_proof_first_bytes(st_.pp_sigma, st_.coms.size(), ctx.pp, reps) <= kWipokCircuitFirstMaxBytes) {
      CircuitBranch b(build_commit_relation_circuit(st_.pp_sigma, st_.coms.size()), relation_target(st_.coms), ctx.pp,
                      reps);
      or_.emplace(std::move(a), std::move(b));
    } else {
      blum_.emplace(std::move(a));
    }
  }

  WipokMode mode() const { return or_ ? WipokMode::Or : WipokMode::WitnessOnly; }
  std::size_t reps() const { return reps_; }
  const OrStatement& statement() const { return st_; }

  struct ProverState {
    std::optional<Or::State> or_state;
    std::optional<SigmaState> blum_state;
    Or::Witness witness;
  };

  Or::Witness to_branch_witness(const OrWitness& w) const {
    if (auto* c = std::get_if<CycleWitness>(&w)) return Or::Witness{std::in_place_index<0>, *c};
    return Or::Witness{std::in_place_index<1>, relation_witness(std::get<Decommitments>(w))};
  }

  bool valid_witness(const OrWitness& w) const {
    if (or_) return or_->valid_witness(to_branch_witness(w));
    auto* c = std::get_if<CycleWitness>(&w);
    return c && blum_->valid_witness(*c);
  }

  // `e_sim` is forwarded to the OR composition (ignored in witness-only mode).
  std::pair<Bytes, ProverState> prove_first(const OrWitness& w, Rng& rng,
                                            const std::optional<BitVector>& e_sim = std::nullopt) const {
    require(valid_witness(w), "wipok: witness does not satisfy its branch");
    ByteWriter bw;
    bw.u8(static_cast<std::uint8_t>(mode()));
    ProverState ps{std::nullopt, std::nullopt, to_branch_witness(w)};
    if (or_) {
      auto [f, s] = or_->first(ps.witness, rng, e_sim);
      f.encode(bw);
      ps.or_state = std::move(s);
    } else {
      auto [f, s] = blum_->first(std::get<CycleWitness>(w), rng);
      f.encode(bw);
      ps.blum_state = std::move(s);
    }
    return {bw.take(), std::move(ps)};
  }

  Bytes prove_respond(const ProverState& ps, const BitVector& e) const {
    ByteWriter bw;
    if (or_)
      or_->respond(*ps.or_state, ps.witness, e).encode(bw);
    else
      blum_->respond(*ps.blum_state, std::get<0>(ps.witness), e).encode(bw);
    return bw.take();
  }

  bool verify(std::span<const std::uint8_t> first, const BitVector& e, std::span<const std::uint8_t> resp) const {
    try {
      ByteReader fr(first), zr(resp);
      if (fr.u8() != static_cast<std::uint8_t>(mode())) return false;
      bool ok;
      if (or_) {
        auto f = Or::First::decode(fr);
        auto z = Or::Response::decode(zr);
        ok = fr.done() && zr.done() && or_->verify(f, e, z);
      } else {
        auto f = SigmaFirstMsg::decode(fr);
        auto z = SigmaResponse::decode(zr);
        ok = fr.done() && zr.done() && blum_->verify(f, e, z);
      }
      return ok;
    } catch (const std::exception&) {
      return false;
    }
  }

  // Composed special-soundness extractor on two accepting transcripts.
  std::optional<OrWitness> extract(std::span<const std::uint8_t> first, const BitVector& e1,
                                   std::span<const std::uint8_t> z1, const BitVector& e2,
                                   std::span<const std::uint8_t> z2) const {
    try {
      ByteReader fr(first), r1(z1), r2(z2);
      if (fr.u8() != static_cast<std::uint8_t>(mode())) return std::nullopt;
      if (or_) {
        auto f = Or::First::decode(fr);
        auto w = or_->extract(f, e1, Or::Response::decode(r1), e2, Or::Response::decode(r2));
        if (!w) return std::nullopt;
        if (auto* c = std::get_if<0>(&*w)) return OrWitness{*c};
        return OrWitness{split_relation_witness(st_.pp_sigma, std::get<1>(*w), st_.coms.size())};
      }
      auto f = SigmaFirstMsg::decode(fr);
      auto w = blum_->extract(f, e1, SigmaResponse::decode(r1), e2, SigmaResponse::decode(r2));
      if (!w) return std::nullopt;
      return OrWitness{*w};
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

 private:
  OrStatement st_;
  std::size_t reps_;
  std::optional<Or> or_;
  std::optional<BlumBranch> blum_;
};

// Verifier-chosen commitment parameters for the WIPoK's internal bit
// commitments. The linear generator keeps toy runs fast.
inline PublicParam wipok_setup(std::uint32_t lambda, PrgMode mode, Rng& rng) {
  return PublicParam{naor_setup(lambda, mode, rng)};
}

// Byte pipe between the two WIPoK parties.
struct WipokChannel {
  virtual ~WipokChannel() = default;
  virtual void send(Bytes msg) = 0;
  virtual Bytes recv() = 0;
};

// In-process channel; counts messages and can corrupt one of them.
class LocalWipokChannel : public WipokChannel {
 public:
  void send(Bytes msg) override {
    ++count_;
    if (corrupt_index_ && *corrupt_index_ == count_ && !msg.empty()) msg[msg.size() / 2] ^= 0x01;
    queue_.push_back(std::move(msg));
  }
  Bytes recv() override {
    if (queue_.empty()) throw SessionError("wipok channel: no message");
    Bytes b = std::move(queue_.front());
    queue_.erase(queue_.begin());
    return b;
  }
  std::size_t count() const { return count_; }
  void corrupt_message(std::size_t index) { corrupt_index_ = index; }

 private:
  std::vector<Bytes> queue_;
  std::size_t count_ = 0;
  std::optional<std::size_t> corrupt_index_;
};

struct WipokRunResult {
  bool accepted = false;
  std::size_t messages = 0;
};

// Runs verifier and prover over `ch`: pp_wi, first, e, response.
inline WipokRunResult wipok_run(const OrWitness& w, const OrStatement& st, std::size_t reps, WipokChannel& ch,
                                Rng& prover_rng, Rng& verifier_rng, std::uint32_t lambda_wi = 8,
                                PrgMode mode = PrgMode::LinearToy) {
  WipokRunResult res;
  PublicParam pp_wi = wipok_setup(lambda_wi, mode, verifier_rng);
  ch.send(pp_wi.encode());
  ++res.messages;

  const Bytes pp_bytes = ch.recv();
  const PublicParam pp_recv = PublicParam::decode(pp_bytes);
  Wipok prover_side(st, pp_recv, reps);
  auto [first, ps] = prover_side.prove_first(w, prover_rng);
  ch.send(first);
  ++res.messages;

  const Bytes first_recv = ch.recv();
  BitVector e = verifier_rng.bits(reps);
  ByteWriter ew;
  ew.bits(e);
  ch.send(ew.take());
  ++res.messages;

  const Bytes e_bytes = ch.recv();
  ByteReader er(e_bytes);
  BitVector e_recv = er.bits();
  ch.send(prover_side.prove_respond(ps, e_recv));
  ++res.messages;

  Wipok verifier_side(st, pp_wi, reps);
  const Bytes z_bytes = ch.recv();
  res.accepted = verifier_side.verify(first_recv, e, z_bytes);
  return res;
}

// ---- knowledge extraction against resettable classical provers ----------------

struct ResettableProver {
  virtual ~ResettableProver() = default;
  virtual void reset() = 0;
  virtual Bytes first() = 0;
  // nullopt means the prover aborts on this challenge.
  virtual std::optional<Bytes> respond(const BitVector& e) = 0;
};

struct ExtractionOutcome {
  std::optional<OrWitness> witness;
  std::size_t trials_used = 0;
};

// Rewinds the prover with fresh challenges until two accepting transcripts
// with distinct challenges appear or `trials` responses have been requested.
inline ExtractionOutcome extract_knowledge(ResettableProver& prover, const Wipok& wipok, std::size_t trials,
                                           Rng& rng) {
  ExtractionOutcome out;
  std::optional<std::pair<BitVector, Bytes>> accepted;
  for (std::size_t t = 0; t < trials; ++t) {
    prover.reset();
    Bytes a = prover.first();
    BitVector e = rng.bits(wipok.reps());
    auto z = prover.respond(e);
    out.trials_used = t + 1;
    if (!z || !wipok.verify(a, e, *z)) continue;
    if (accepted && !(accepted->first == e)) {
      out.witness = wipok.extract(a, accepted->first, accepted->second, e, *z);
      if (out.witness) return out;
    }
    if (!accepted) accepted.emplace(e, *z);
  }
  return out;
}

// Deterministic honest prover (fixed randomness) that only answers challenges
// accepted by `filter`. Rewinding replays the same first message, so it is
// computed once.
class FilteredProver : public ResettableProver {
 public:
  FilteredProver(const Wipok& wipok, OrWitness w, RngSeed seed, std::function<bool(const BitVector&)> filter)
      : wipok_(wipok), w_(std::move(w)), seed_(seed), filter_(std::move(filter)) {}

  void reset() override { started_ = false; }
  Bytes first() override {
    if (!state_) {
      Rng rng(seed_);
      auto [a, ps] = wipok_.prove_first(w_, rng);
      first_ = std::move(a);
      state_.emplace(std::move(ps));
    }
    started_ = true;
    return first_;
  }
  std::optional<Bytes> respond(const BitVector& e) override {
    if (!started_ || !filter_(e)) return std::nullopt;
    const std::string key = e.to_string();
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    Bytes z = wipok_.prove_respond(*state_, e);
    cache_.emplace(key, z);
    return z;
  }

 private:
  const Wipok& wipok_;
  OrWitness w_;
  RngSeed seed_;
  std::function<bool(const BitVector&)> filter_;
  bool started_ = false;
  Bytes first_;
  std::optional<Wipok::ProverState> state_;
  std::map<std::string, Bytes> cache_;
};

}  // namespace ezk
