#include <cmath>

#include "ezk/wipok.hpp"
#include "gtest/gtest.h"

using namespace ezk;

namespace {

GraphInstance square_cycle() { return GraphInstance::from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}}); }

struct Fixture {
  OrStatement st;
  CycleWitness cycle;
  Decommitments openings;
};

// Statement produced exactly as the argument prover produces it: the
// modified-flavor Σ first message under pp_Σ.
Fixture make_fixture(const PublicParam& pp_sigma, std::size_t sigma_reps, Rng& rng) {
  GraphInstance x = square_cycle();
  CommitCtx ctx{pp_sigma, false};
  auto msgs = mh_samp(x, sigma_reps, rng);
  auto [a, sst] = mh_commit(x, msgs, ctx, rng);
  return {OrStatement{pp_sigma, x, commitments_of(a)}, *find_hamiltonian_cycle(x), decommitments_of(sst)};
}

PublicParam linear_naor(std::uint32_t lambda, Rng& rng) { return PublicParam{naor_setup(lambda, PrgMode::LinearToy, rng)}; }

}  // namespace

TEST(Wipok, CompletenessWithEitherBranch) {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    auto f = make_fixture(linear_naor(3, rng), 1, rng);
    for (int which = 0; which < 2; ++which) {
      OrWitness w = which == 0 ? OrWitness{f.cycle} : OrWitness{f.openings};
      LocalWipokChannel ch;
      Rng prng = rng.split(), vrng = rng.split();
      auto res = wipok_run(w, f.st, 4, ch, prng, vrng);
      EXPECT_TRUE(res.accepted) << "branch " << which;
      EXPECT_EQ(res.messages, 4u);
      EXPECT_EQ(ch.count(), 4u);
    }
  }
}

TEST(Wipok, CompletenessOverToyTableCommitments) {
  Rng rng(12);
  for (int t = 0; t < 10; ++t) {
    auto f = make_fixture(PublicParam{toy_setup(1, 2, ToyClass::StrictBinding, rng)}, 1, rng);
    Wipok wi(f.st, wipok_setup(4, PrgMode::LinearToy, rng), 3);
    ASSERT_EQ(wi.mode(), WipokMode::Or);
    for (const OrWitness& w : {OrWitness{f.cycle}, OrWitness{f.openings}}) {
      auto [a, ps] = wi.prove_first(w, rng);
      BitVector e = rng.bits(3);
      EXPECT_TRUE(wi.verify(a, e, wi.prove_respond(ps, e)));
    }
  }
}

TEST(Wipok, XofSigmaParamsFallBackToBlumOnly) {
  Rng rng(13);
  auto f = make_fixture(PublicParam{naor_setup(8, PrgMode::Xof, rng)}, 1, rng);
  Wipok wi(f.st, wipok_setup(4, PrgMode::LinearToy, rng), 3);
  EXPECT_EQ(wi.mode(), WipokMode::WitnessOnly);
  EXPECT_FALSE(wi.valid_witness(f.openings));
  EXPECT_THROW(wi.prove_first(f.openings, rng), InvalidArgument);
  auto [a, ps] = wi.prove_first(f.cycle, rng);
  BitVector e = rng.bits(3);
  EXPECT_TRUE(wi.verify(a, e, wi.prove_respond(ps, e)));
}

TEST(Wipok, InvalidWitnessRejectedUpFront) {
  Rng rng(14);
  auto f = make_fixture(linear_naor(3, rng), 1, rng);
  Wipok wi(f.st, wipok_setup(4, PrgMode::LinearToy, rng), 2);
  Decommitments bad = f.openings;
  bad.messages[0].flip(0);
  EXPECT_FALSE(wi.valid_witness(bad));
  EXPECT_THROW(wi.prove_first(bad, rng), InvalidArgument);
  EXPECT_THROW(wi.prove_first(CycleWitness{{0, 2, 1, 3}}, rng), InvalidArgument);
}

TEST(Wipok, CollidingTranscriptsAlwaysExtract) {
  Rng rng(15);
  for (int t = 0; t < 30; ++t) {
    auto f = make_fixture(t % 2 ? linear_naor(3, rng) : PublicParam{toy_setup(1, 2, ToyClass::StrictBinding, rng)}, 1,
                          rng);
    Wipok wi(f.st, wipok_setup(4, PrgMode::LinearToy, rng), 3);
    OrWitness w = t % 3 == 0 ? OrWitness{f.cycle} : OrWitness{f.openings};
    auto [a, ps] = wi.prove_first(w, rng);
    BitVector e1 = rng.bits(3), e2 = rng.bits(3);
    if (e1 == e2) e2.flip(rng.uniform(3));
    auto z1 = wi.prove_respond(ps, e1), z2 = wi.prove_respond(ps, e2);
    auto ext = wi.extract(a, e1, z1, e2, z2);
    ASSERT_TRUE(ext.has_value());
    EXPECT_TRUE(wi.valid_witness(*ext));
    EXPECT_FALSE(wi.extract(a, e1, z1, e1, z1).has_value());
  }
}

TEST(Wipok, CorruptedMessagesReject) {
  Rng rng(16);
  auto f = make_fixture(linear_naor(3, rng), 1, rng);
  int rejected = 0;
  for (int t = 0; t < 20; ++t) {
    LocalWipokChannel ch;
    ch.corrupt_message(4);
    Rng prng = rng.split(), vrng = rng.split();
    rejected += !wipok_run(OrWitness{f.openings}, f.st, 3, ch, prng, vrng).accepted;
  }
  EXPECT_EQ(rejected, 20);
}

TEST(OrProof, SimulationVerifiesForAnyChallenge) {
  Rng rng(17);
  auto f = make_fixture(linear_naor(3, rng), 1, rng);
  CommitCtx ctx{wipok_setup(4, PrgMode::LinearToy, rng), true};
  auto orp = or_compose(BlumBranch(f.st.x, ctx, 4),
                        CircuitBranch(build_commit_relation_circuit(f.st.pp_sigma, f.st.coms.size()),
                                      relation_target(f.st.coms), ctx.pp, 4));
  for (int t = 0; t < 16; ++t) {
    BitVector e = BitVector::from_uint(static_cast<std::uint64_t>(t), 4);
    auto [a, z] = orp.simulate(e, rng);
    EXPECT_TRUE(orp.verify(a, e, z));
    ByteWriter w;
    a.encode(w);
    z.encode(w);
    Bytes b = w.take();
    ByteReader r(b);
    auto a2 = decltype(orp)::First::decode(r);
    auto z2 = decltype(orp)::Response::decode(r);
    EXPECT_TRUE(r.done());
    EXPECT_EQ(a2, a);
    EXPECT_EQ(z2, z);
  }
}

TEST(CircuitBranch, AndGatesSupportedAndSound) {
  // Toy table circuits contain AND gates; a false target cannot be proven
  // and a tampered bit-1 row is caught.
  Rng rng(18);
  PublicParam pp_wi = wipok_setup(4, PrgMode::LinearToy, rng);
  Circuit c(3);
  c.add_output(c.add_xor(c.add_and(0, 1), c.add_not(2)));
  CircuitBranch br(c, BitVector::from_string("1"), pp_wi, 6);
  BitVector w = BitVector::from_string("100");
  ASSERT_TRUE(br.valid_witness(w));
  EXPECT_FALSE(br.valid_witness(BitVector::from_string("101")));
  auto [a, st] = br.first(w, rng);
  BitVector e = BitVector::from_string("010101");
  auto z = br.respond(st, w, e);
  EXPECT_TRUE(br.verify(a, e, z));
  auto bad = z;
  bad.reps[1].table_bits.flip(2);
  EXPECT_FALSE(br.verify(a, e, bad));
  auto bad0 = z;
  bad0.reps[0].masks.flip(0);
  EXPECT_FALSE(br.verify(a, e, bad0));
}

TEST(CircuitBranch, SimulatedBitOneHidesInputs) {
  // Bit-1 openings of masked inputs are uniform in both real and simulated runs.
  Rng rng(19);
  PublicParam pp_wi = wipok_setup(4, PrgMode::LinearToy, rng);
  Circuit c(2);
  c.add_output(c.add_and(0, 1));
  CircuitBranch br(c, BitVector::from_string("1"), pp_wi, 1);
  BitVector e = BitVector::from_string("1");
  std::array<int, 4> real{}, sim{};
  const int N = 4000;
  for (int t = 0; t < N; ++t) {
    auto [a, st] = br.first(BitVector::from_string("11"), rng);
    real[br.respond(st, BitVector::from_string("11"), e).reps[0].in_bits.to_uint()]++;
    sim[br.simulate(e, rng).second.reps[0].in_bits.to_uint()]++;
  }
  for (int v = 0; v < 4; ++v) {
    EXPECT_NEAR(real[v] / double(N), 0.25, 0.04);
    EXPECT_NEAR(sim[v] / double(N), 0.25, 0.04);
  }
}

TEST(Extractor, SingleChallengeProverGivesNothingAndTwoChallengeProverExtracts) {
  Rng rng(20);
  auto f = make_fixture(linear_naor(3, rng), 1, rng);
  Wipok wi(f.st, wipok_setup(4, PrgMode::LinearToy, rng), 2);
  const BitVector only = BitVector::from_string("01");
  FilteredProver single(wi, OrWitness{f.openings}, seed_from_u64(1), [&](const BitVector& e) { return e == only; });
  FilteredProver pair(wi, OrWitness{f.openings}, seed_from_u64(1),
                      [](const BitVector& e) { return e.get(0) == false; });
  EXPECT_FALSE(extract_knowledge(single, wi, 200, rng).witness.has_value());
  auto out = extract_knowledge(pair, wi, 200, rng);
  ASSERT_TRUE(out.witness.has_value());
  EXPECT_TRUE(wi.valid_witness(*out.witness));
}

// Witness indistinguishability, structural part: with matched prover and
// verifier randomness both witness branches produce messages of identical
// lengths and the same verdict.
TEST(Wipok, BranchesAreStructurallyIdentical) {
  Rng rng(21);
  for (int t = 0; t < 10; ++t) {
    auto f = make_fixture(t % 2 ? linear_naor(3, rng) : PublicParam{toy_setup(1, 2, ToyClass::StrictBinding, rng)}, 1,
                          rng);
    Wipok wi(f.st, wipok_setup(4, PrgMode::LinearToy, rng), 3);
    ASSERT_EQ(wi.mode(), WipokMode::Or);
    const auto seed = seed_from_u64(100 + t);
    const BitVector e = rng.bits(3), rho = rng.bits(3);
    // Couple both provers to the split (e_A, e_B) = (e ^ rho, rho): the cycle
    // prover simulates B on rho, the openings prover simulates A on e ^ rho.
    Rng r1(seed), r2(seed);
    auto [a1, s1] = wi.prove_first(OrWitness{f.cycle}, r1, rho);
    auto [a2, s2] = wi.prove_first(OrWitness{f.openings}, r2, e ^ rho);
    auto z1 = wi.prove_respond(s1, e), z2 = wi.prove_respond(s2, e);
    EXPECT_EQ(a1.size(), a2.size());
    EXPECT_EQ(z1.size(), z2.size());
    EXPECT_EQ(wi.verify(a1, e, z1), wi.verify(a2, e, z2));
    EXPECT_TRUE(wi.verify(a1, e, z1));
  }
}
