#pragma once

// Boolean circuits over {XOR, AND, NOT, CONST0, CONST1}.
// Wires 0..n_inputs-1 are inputs; gate k defines wire n_inputs + k.

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ezk/commit.hpp"

namespace ezk {

enum class GateOp : std::uint8_t { Xor, And, Not, Const0, Const1 };

inline const char* gate_name(GateOp op) {
  switch (op) {
    case GateOp::Xor: return "XOR";
    case GateOp::And: return "AND";
    case GateOp::Not: return "NOT";
    case GateOp::Const0: return "CONST0";
    case GateOp::Const1: return "CONST1";
  }
  return "?";
}

inline int gate_arity(GateOp op) {
  switch (op) {
    case GateOp::Xor:
    case GateOp::And: return 2;
    case GateOp::Not: return 1;
    default: return 0;
  }
}

struct Gate {
  GateOp op = GateOp::Const0;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  friend bool operator==(const Gate&, const Gate&) = default;
};

class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(std::uint32_t n_inputs) : n_inputs_(n_inputs) {}

  std::uint32_t n_inputs() const { return n_inputs_; }
  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<std::uint32_t>& outputs() const { return outputs_; }
  std::uint32_t wire_count() const { return n_inputs_ + static_cast<std::uint32_t>(gates_.size()); }
  std::size_t gate_count() const { return gates_.size(); }
  std::size_t and_count() const {
    std::size_t c = 0;
    for (const auto& g : gates_) c += g.op == GateOp::And;
    return c;
  }

  std::uint32_t add(GateOp op, std::uint32_t a = 0, std::uint32_t b = 0) {
    const std::uint32_t w = wire_count();
    const int ar = gate_arity(op);
    require((ar < 1 || a < w) && (ar < 2 || b < w), "circuit: gate reads an undefined wire");
    gates_.push_back(Gate{op, ar >= 1 ? a : 0, ar >= 2 ? b : 0});
    return w;
  }
  std::uint32_t add_xor(std::uint32_t a, std::uint32_t b) { return add(GateOp::Xor, a, b); }
  std::uint32_t add_and(std::uint32_t a, std::uint32_t b) { return add(GateOp::And, a, b); }
  std::uint32_t add_not(std::uint32_t a) { return add(GateOp::Not, a); }
  std::uint32_t add_const(bool v) { return add(v ? GateOp::Const1 : GateOp::Const0); }
  void add_output(std::uint32_t w) {
    require(w < wire_count(), "circuit: output names an undefined wire");
    outputs_.push_back(w);
  }

  void validate() const {
    for (std::size_t k = 0; k < gates_.size(); ++k) {
      const auto self = n_inputs_ + static_cast<std::uint32_t>(k);
      const int ar = gate_arity(gates_[k].op);
      require((ar < 1 || gates_[k].a < self) && (ar < 2 || gates_[k].b < self), "circuit: not topologically ordered");
    }
    for (auto o : outputs_) require(o < wire_count(), "circuit: dangling output");
  }

  std::string to_text() const {
    std::ostringstream os;
    os << "circuit v1\ninputs " << n_inputs_ << "\ngates " << gates_.size() << "\noutputs";
    for (auto o : outputs_) os << ' ' << o;
    os << '\n';
    for (std::size_t k = 0; k < gates_.size(); ++k) {
      const auto& g = gates_[k];
      os << n_inputs_ + k << ' ' << gate_name(g.op);
      if (gate_arity(g.op) >= 1) os << ' ' << g.a;
      if (gate_arity(g.op) >= 2) os << ' ' << g.b;
      os << '\n';
    }
    return os.str();
  }

  static Circuit from_text(const std::string& text) {
    std::istringstream is(text);
    std::string tok, line;
    std::size_t n_gates = 0;
    Circuit c;
    auto fail = [](const char* why) { throw DecodeError(std::string("circuit text: ") + why); };
    if (!std::getline(is, line) || line != "circuit v1") fail("missing header");
    if (!(is >> tok) || tok != "inputs" || !(is >> c.n_inputs_)) fail("missing inputs");
    if (!(is >> tok) || tok != "gates" || !(is >> n_gates)) fail("missing gates");
    if (!(is >> tok) || tok != "outputs") fail("missing outputs");
    std::getline(is, line);
    std::vector<std::uint32_t> outs;
    {
      std::istringstream ls(line);
      std::uint32_t o;
      while (ls >> o) outs.push_back(o);
    }
    static const std::map<std::string, GateOp> ops = {{"XOR", GateOp::Xor},
                                                      {"AND", GateOp::And},
                                                      {"NOT", GateOp::Not},
                                                      {"CONST0", GateOp::Const0},
                                                      {"CONST1", GateOp::Const1}};
    for (std::size_t k = 0; k < n_gates; ++k) {
      std::uint32_t id = 0, a = 0, b = 0;
      if (!(is >> id >> tok)) fail("truncated gate list");
      auto it = ops.find(tok);
      if (it == ops.end()) fail("unknown gate");
      if (id != c.wire_count()) fail("gate ids must be sequential");
      const int ar = gate_arity(it->second);
      if (ar >= 1 && !(is >> a)) fail("missing operand");
      if (ar >= 2 && !(is >> b)) fail("missing operand");
      try {
        c.add(it->second, a, b);
      } catch (const InvalidArgument& e) {
        throw DecodeError(e.what());
      }
    }
    for (auto o : outs) {
      if (o >= c.wire_count()) fail("dangling output");
      c.outputs_.push_back(o);
    }
    return c;
  }

  friend bool operator==(const Circuit&, const Circuit&) = default;

 private:
  std::uint32_t n_inputs_ = 0;
  std::vector<Gate> gates_;
  std::vector<std::uint32_t> outputs_;
};

inline bool apply_gate(GateOp op, bool a, bool b) {
  switch (op) {
    case GateOp::Xor: return a != b;
    case GateOp::And: return a && b;
    case GateOp::Not: return !a;
    case GateOp::Const0: return false;
    case GateOp::Const1: return true;
  }
  return false;
}

// Values of every wire (the wire assignment).
inline BitVector eval_wires(const Circuit& c, const BitVector& inputs) {
  require(inputs.size() == c.n_inputs(), "eval_circuit: input width mismatch");
  BitVector w(c.wire_count());
  for (std::uint32_t i = 0; i < c.n_inputs(); ++i) w.set(i, inputs.get(i));
  std::uint32_t id = c.n_inputs();
  for (const auto& g : c.gates()) {
    w.set(id, apply_gate(g.op, gate_arity(g.op) >= 1 && w.get(g.a), gate_arity(g.op) >= 2 && w.get(g.b)));
    ++id;
  }
  return w;
}

inline BitVector eval_circuit(const Circuit& c, const BitVector& inputs) {
  BitVector w = eval_wires(c, inputs);
  BitVector out(c.outputs().size());
  for (std::size_t i = 0; i < c.outputs().size(); ++i) out.set(i, w.get(c.outputs()[i]));
  return out;
}

namespace detail {

// f = f0 ⊕ x·(f0 ⊕ f1), splitting on the highest remaining variable.
// `tt` is a truth table indexed by the assignment of vars 0..v-1.
inline std::uint32_t shannon(Circuit& c, const std::vector<std::uint32_t>& vars, const std::vector<bool>& tt,
                             std::map<std::vector<bool>, std::uint32_t>& memo) {
  if (auto it = memo.find(tt); it != memo.end()) return it->second;
  bool all0 = true, all1 = true;
  for (bool b : tt) (b ? all0 : all1) = false;
  std::uint32_t w;
  if (all0) {
    w = c.add_const(false);
  } else if (all1) {
    w = c.add_const(true);
  } else {
    const std::size_t half = tt.size() / 2;
    const std::size_t v = [&] {
      std::size_t k = 0;
      while ((std::size_t{1} << (k + 1)) < tt.size()) ++k;
      return k;
    }();
    std::vector<bool> f0(tt.begin(), tt.begin() + static_cast<std::ptrdiff_t>(half));
    std::vector<bool> f1(tt.begin() + static_cast<std::ptrdiff_t>(half), tt.end());
    const std::uint32_t w0 = shannon(c, vars, f0, memo);
    if (f0 == f1) {
      w = w0;
    } else {
      std::vector<bool> d(half);
      for (std::size_t i = 0; i < half; ++i) d[i] = f0[i] != f1[i];
      const std::uint32_t wd = shannon(c, vars, d, memo);
      w = c.add_xor(w0, c.add_and(vars[v], wd));
    }
  }
  memo.emplace(tt, w);
  return w;
}

}  // namespace detail

// Inputs: (m_i bits, r_i bits) for i = 0..k-1, each LSB-first.
// Outputs: the k commitment bodies concatenated.
// Naor must use the linear-toy generator and commits one bit per commitment;
// ToyTable is compiled from its truth table.
inline Circuit build_commit_relation_circuit(const PublicParam& pp, std::size_t k) {
  require(k >= 1, "relation circuit: k must be positive");
  if (pp.scheme() == SchemeId::NaorSB) {
    const auto& n = pp.naor();
    if (n.prg.mode != PrgMode::LinearToy) throw Unsupported("relation circuit: XOF-based Naor is not circuit-friendly");
    const std::uint32_t lam = n.lambda(), out = n.prg.out_len;
    Circuit c(static_cast<std::uint32_t>(k * (1 + lam)));
    std::optional<std::uint32_t> zero;
    for (std::size_t i = 0; i < k; ++i) {
      const auto base = static_cast<std::uint32_t>(i * (1 + lam));
      const std::uint32_t m = base;
      for (std::uint32_t j = 0; j < out; ++j) {
        std::optional<std::uint32_t> acc;
        auto fold = [&](std::uint32_t wire) { acc = acc ? c.add_xor(*acc, wire) : wire; };
        for (std::uint32_t t = 0; t < lam; ++t)
          if (n.prg.matrix.get(j, t)) fold(base + 1 + t);
        if (n.R.get(j)) fold(m);
        if (!acc) {
          if (!zero) zero = c.add_const(false);
          acc = zero;
        }
        c.add_output(*acc);
      }
    }
    return c;
  }
  if (pp.scheme() == SchemeId::ToyTable) {
    const auto& t = pp.toy();
    const std::uint32_t vars_per = t.m_bits + t.r_bits;
    if (vars_per > 10) throw Unsupported("relation circuit: toy table larger than 2^10 entries");
    Circuit c(static_cast<std::uint32_t>(k * vars_per));
    for (std::size_t i = 0; i < k; ++i) {
      const auto base = static_cast<std::uint32_t>(i * vars_per);
      // Table index bit j is r bit j for j < r_bits, else m bit j - r_bits.
      std::vector<std::uint32_t> vars(vars_per);
      for (std::uint32_t j = 0; j < t.r_bits; ++j) vars[j] = base + t.m_bits + j;
      for (std::uint32_t j = 0; j < t.m_bits; ++j) vars[t.r_bits + j] = base + j;
      std::map<std::vector<bool>, std::uint32_t> memo;
      for (std::uint32_t bit = 0; bit < t.c_bits; ++bit) {
        std::vector<bool> tt(t.table.size());
        for (std::size_t idx = 0; idx < t.table.size(); ++idx) tt[idx] = (t.table[idx] >> bit) & 1U;
        c.add_output(detail::shannon(c, vars, tt, memo));
      }
    }
    return c;
  }
  throw Unsupported("relation circuit: scheme is not circuit-friendly");
}

inline bool circuit_friendly(const PublicParam& pp) {
  if (pp.scheme() == SchemeId::NaorSB) return pp.naor().prg.mode == PrgMode::LinearToy;
  if (pp.scheme() == SchemeId::ToyTable) return pp.toy().m_bits + pp.toy().r_bits <= 10;
  return false;
}

// Circuit input for one commitment: m ‖ r.
inline BitVector relation_input(const BitVector& m, const Opening& op) {
  BitVector in = m;
  in.append(op.rand);
  return in;
}

}  // namespace ezk
