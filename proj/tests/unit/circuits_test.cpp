#include <functional>

#include "ezk/circuit.hpp"
#include "gtest/gtest.h"

using namespace ezk;

namespace {

// Independent oracle: evaluates a wire by recursion on its definition.
bool eval_recursive(const Circuit& c, const BitVector& in, std::uint32_t wire) {
  if (wire < c.n_inputs()) return in.get(wire);
  const Gate& g = c.gates()[wire - c.n_inputs()];
  switch (g.op) {
    case GateOp::Xor: return eval_recursive(c, in, g.a) ^ eval_recursive(c, in, g.b);
    case GateOp::And: return eval_recursive(c, in, g.a) && eval_recursive(c, in, g.b);
    case GateOp::Not: return !eval_recursive(c, in, g.a);
    case GateOp::Const0: return false;
    case GateOp::Const1: return true;
  }
  return false;
}

Circuit random_circuit(std::uint32_t inputs, int gates, Rng& rng) {
  Circuit c(inputs);
  for (int k = 0; k < gates; ++k) {
    auto w = c.wire_count();
    auto op = static_cast<GateOp>(rng.uniform(5));
    c.add(op, static_cast<std::uint32_t>(rng.uniform(w)), static_cast<std::uint32_t>(rng.uniform(w)));
  }
  for (int o = 0; o < 10; ++o) c.add_output(static_cast<std::uint32_t>(rng.uniform(c.wire_count())));
  return c;
}

}  // namespace

TEST(Circuit, XorAndTruthTables) {
  Circuit x(2), a(2);
  x.add_output(x.add_xor(0, 1));
  a.add_output(a.add_and(0, 1));
  const char* xs[] = {"0", "1", "1", "0"};
  const char* as[] = {"0", "0", "0", "1"};
  for (std::uint64_t v = 0; v < 4; ++v) {
    BitVector in = BitVector::from_uint(v, 2);
    EXPECT_EQ(eval_circuit(x, in).to_string(), xs[v]);
    EXPECT_EQ(eval_circuit(a, in).to_string(), as[v]);
  }
}

TEST(Circuit, RandomCircuitsMatchRecursiveOracle) {
  Rng rng(1);
  Circuit c = random_circuit(12, 200, rng);
  for (int t = 0; t < 100; ++t) {
    BitVector in = rng.bits(12);
    BitVector out = eval_circuit(c, in);
    for (std::size_t i = 0; i < c.outputs().size(); ++i) EXPECT_EQ(out.get(i), eval_recursive(c, in, c.outputs()[i]));
  }
}

TEST(Circuit, RejectsUndefinedWiresAndWidth) {
  Circuit c(2);
  EXPECT_THROW(c.add_xor(0, 2), InvalidArgument);
  EXPECT_THROW(c.add_output(5), InvalidArgument);
  EXPECT_THROW(eval_circuit(c, BitVector(3)), InvalidArgument);
}

TEST(Circuit, TextRoundTrip) {
  Rng rng(2);
  Circuit c = random_circuit(5, 40, rng);
  EXPECT_EQ(Circuit::from_text(c.to_text()), c);
  EXPECT_THROW(Circuit::from_text("circuit v1\ninputs 1\ngates 1\noutputs 1\n1 AND 0 3\n"), DecodeError);
  EXPECT_THROW(Circuit::from_text("nope"), DecodeError);
}

TEST(RelationCircuit, LinearNaorIsXorOnly) {
  Rng rng(3);
  PublicParam pp{naor_setup(4, PrgMode::LinearToy, rng)};
  Circuit c = build_commit_relation_circuit(pp, 1);
  EXPECT_EQ(c.and_count(), 0u);
  EXPECT_EQ(c.n_inputs(), 5u);
  EXPECT_EQ(c.outputs().size(), 12u);
}

TEST(RelationCircuit, InputWidthForThreeCommitments) {
  Rng rng(4);
  PublicParam naor{naor_setup(6, PrgMode::LinearToy, rng)};
  EXPECT_EQ(build_commit_relation_circuit(naor, 3).n_inputs(), 3u * (1 + 6));
  PublicParam toy{toy_setup(2, 3, ToyClass::StrictBinding, rng)};
  EXPECT_EQ(build_commit_relation_circuit(toy, 3).n_inputs(), 3u * (2 + 3));
}

TEST(RelationCircuit, MatchesCommitOnRandomWitnesses) {
  Rng rng(5);
  for (int t = 0; t < 1000; ++t) {
    PublicParam pp = t % 2 ? PublicParam{naor_setup(2 + static_cast<std::uint32_t>(rng.uniform(10)), PrgMode::LinearToy, rng)}
                           : PublicParam{toy_setup(1 + static_cast<std::uint32_t>(rng.uniform(3)),
                                                   static_cast<std::uint32_t>(rng.uniform(5)), ToyClass::Random, rng)};
    const std::size_t k = 1 + rng.uniform(3);
    const std::size_t mlen = pp.scheme() == SchemeId::NaorSB ? 1 : pp.toy().m_bits;
    Circuit c = build_commit_relation_circuit(pp, k);
    BitVector in, expect;
    for (std::size_t i = 0; i < k; ++i) {
      BitVector m = rng.bits(mlen);
      auto [com, op] = commit(pp, m, rng);
      in.append(relation_input(m, op));
      expect.append(com.body);
    }
    ASSERT_EQ(eval_circuit(c, in), expect);
  }
}

TEST(RelationCircuit, UnsupportedSchemes) {
  Rng rng(6);
  EXPECT_THROW(build_commit_relation_circuit({naor_setup(8, PrgMode::Xof, rng)}, 1), Unsupported);
  EXPECT_THROW(build_commit_relation_circuit({hm_setup(1, 8, rng)}, 1), Unsupported);
  EXPECT_THROW(build_commit_relation_circuit({toy_setup(4, 7, ToyClass::Random, rng)}, 1), Unsupported);
}
