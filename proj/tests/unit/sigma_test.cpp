#include <map>

#include "ezk/sigma.hpp"
#include "gtest/gtest.h"

using namespace ezk;

namespace {

CommitCtx make_ctx(int which, Rng& rng) {
  switch (which % 4) {
    case 0: return {PublicParam{naor_setup(16, PrgMode::Xof, rng)}, true};
    case 1: return {PublicParam{naor_setup(8, PrgMode::LinearToy, rng)}, true};
    case 2: return {PublicParam{hm_setup(1, 16, rng)}};
    default: return {PublicParam{toy_setup(1, 3, ToyClass::StrictBinding, rng)}};
  }
}

// Random graph with a planted Hamiltonian cycle.
std::pair<GraphInstance, CycleWitness> planted(int n, Rng& rng) {
  CycleWitness w{rng.permutation(n)};
  GraphInstance g(n);
  for (int k = 0; k < n; ++k) g.set_edge(w.order[static_cast<std::size_t>(k)], w.order[static_cast<std::size_t>((k + 1) % n)], true);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.bernoulli(0.3)) g.set_edge(u, v, true);
  return {g, w};
}

}  // namespace

TEST(Graph, HamiltonianSearch) {
  EXPECT_FALSE(find_hamiltonian_cycle(GraphInstance::star(4)));
  auto w = find_hamiltonian_cycle(GraphInstance::complete(5));
  ASSERT_TRUE(w);
  EXPECT_TRUE(is_valid_witness(GraphInstance::complete(5), *w));
  // Two disjoint triangles have no Hamiltonian cycle.
  auto two = GraphInstance::from_edges(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}});
  EXPECT_FALSE(find_hamiltonian_cycle(two));
}

TEST(Graph, EncodingRoundTrip) {
  Rng rng(1);
  auto [g, w] = planted(9, rng);
  ByteWriter bw;
  g.encode(bw);
  ByteReader br(bw.data());
  EXPECT_EQ(GraphInstance::decode(br), g);
}

TEST(SigmaPlain, ShapeOnTriangle) {
  Rng rng(2);
  auto x = GraphInstance::complete(3);
  CommitCtx ctx = make_ctx(3, rng);
  auto [a, st] = sigma_p1(x, 2, ctx, rng);
  ASSERT_EQ(a.reps.size(), 2u);
  EXPECT_EQ(a.reps[0].size(), 9u);
  EXPECT_EQ(a.reps[1].size(), 9u);
  // Any relabeling of K3 is K3.
  for (const auto& rs : st.reps) EXPECT_EQ(rs.msg, x.matrix_bits());
}

TEST(SigmaPlain, StateRecommitsToFirstMessage) {
  Rng rng(3);
  auto [x, w] = planted(6, rng);
  for (int s = 0; s < 2; ++s) {
    CommitCtx ctx = make_ctx(s == 0 ? 0 : 3, rng);
    auto [a, st] = sigma_p1(x, 3, ctx, rng);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < a.reps[i].size(); ++j) {
        BitVector b(1);
        b.set(0, st.reps[i].msg.get(j));
        EXPECT_EQ(*recommit(ctx.pp, b, st.reps[i].openings[j]), a.reps[i][j]);
      }
  }
}

TEST(SigmaPlain, FirstMessageIgnoresWitness) {
  // sigma_p1 takes no witness; the same seed gives identical bytes for any
  // witness the caller might hold.
  Rng setup(4);
  auto x = GraphInstance::complete(5);
  CommitCtx ctx = make_ctx(0, setup);
  Rng r1(99), r2(99);
  ByteWriter w1, w2;
  sigma_p1(x, 4, ctx, r1).first.encode(w1);
  sigma_p1(x, 4, ctx, r2).first.encode(w2);
  EXPECT_EQ(w1.data(), w2.data());
}

TEST(SigmaPlain, ChallengeBranches) {
  Rng rng(5);
  auto x = GraphInstance::complete(4);
  CycleWitness w{{0, 1, 2, 3}};
  CommitCtx ctx = make_ctx(0, rng);
  auto [a, st] = sigma_p1(x, 3, ctx, rng);
  auto z0 = sigma_p3(st, w, BitVector(3));
  for (const auto& r : z0.reps) {
    EXPECT_EQ(r.openings.size(), 16u);
    EXPECT_TRUE(is_permutation(r.perm, 4));
  }
  EXPECT_TRUE(sigma_verify(x, ctx, a, BitVector(3), z0));
  BitVector ones = BitVector::from_string("111");
  auto z1 = sigma_p3(st, w, ones);
  for (const auto& r : z1.reps) EXPECT_EQ(r.openings.size(), 4u);
  EXPECT_TRUE(sigma_verify(x, ctx, a, ones, z1));
  BitVector mixed = BitVector::from_string("101");
  EXPECT_TRUE(sigma_verify(x, ctx, a, mixed, sigma_p3(st, w, mixed)));
  EXPECT_FALSE(sigma_verify(x, ctx, a, mixed, z1));
}

TEST(SigmaPlain, InvalidWitnessIsRefused) {
  Rng rng(6);
  auto x = GraphInstance::complete(4);
  CommitCtx ctx = make_ctx(3, rng);
  auto [a, st] = sigma_p1(x, 1, ctx, rng);
  EXPECT_THROW(sigma_p3(st, CycleWitness{{0, 1, 1, 2}}, BitVector(1)), InvalidArgument);
}

TEST(SigmaPlain, TwoDisjointCyclesRejected) {
  EXPECT_TRUE(positions_form_hamiltonian_cycle(6, {1, 8, 15, 22, 29, 30}));
  // Triangles 0-1-2 and 3-4-5.
  std::vector<std::uint32_t> two = {0 * 6 + 1, 1 * 6 + 2, 2 * 6 + 0, 3 * 6 + 4, 4 * 6 + 5, 5 * 6 + 3};
  EXPECT_FALSE(positions_form_hamiltonian_cycle(6, two));
  // Same edge listed twice in both orientations.
  EXPECT_FALSE(positions_form_hamiltonian_cycle(3, {0 * 3 + 1, 1 * 3 + 0, 1 * 3 + 2}));

  // End to end: a prover committing to the two-triangle graph cannot pass.
  Rng rng(7);
  auto x = GraphInstance::complete(6);
  CommitCtx ctx = make_ctx(3, rng);
  SigmaFirstMsg a{SigmaFlavor::Plain, 6, {{}}};
  auto h = GraphInstance::from_edges(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}}).matrix_bits();
  RepState rs = detail::commit_rep(ctx.pp, h, {}, a.reps[0], rng);
  SigmaResponse z{{detail::respond_rep(rs, SigmaFlavor::Plain, true, two)}};
  EXPECT_FALSE(sigma_verify(x, ctx, a, BitVector::from_string("1"), z));
}

TEST(SigmaPlain, CompletenessAllSchemesAndFlavors) {
  Rng rng(8);
  for (int t = 0; t < 1000; ++t) {
    int n = 3 + static_cast<int>(rng.uniform(6));
    auto [x, w] = planted(n, rng);
    CommitCtx ctx = make_ctx(t, rng);
    BitVector e = rng.bits(4);
    auto [a, st] = sigma_p1(x, 4, ctx, rng);
    ASSERT_TRUE(sigma_verify(x, ctx, a, e, sigma_p3(st, w, e)));
    auto [am, stm] = mh_commit(x, mh_samp(x, 4, rng), ctx, rng);
    ASSERT_TRUE(mh_verify(x, ctx, am, e, mh_resp(stm, w, e)));
  }
}

TEST(SigmaPlain, SpecialSoundnessExtractsCycle) {
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    auto [x, w] = planted(3 + static_cast<int>(rng.uniform(8)), rng);
    CommitCtx ctx = make_ctx(t % 2 ? 0 : 3, rng);
    for (auto flavor : {SigmaFlavor::Plain, SigmaFlavor::Modified}) {
      auto [a, st] = flavor == SigmaFlavor::Plain ? sigma_p1(x, 1, ctx, rng) : mh_commit(x, mh_samp(x, 1, rng), ctx, rng);
      auto z0 = sigma_p3(st, w, BitVector::from_string("0"));
      auto z1 = sigma_p3(st, w, BitVector::from_string("1"));
      ASSERT_TRUE(verify_rep(x, ctx.pp, flavor, a.reps[0], false, z0.reps[0]));
      ASSERT_TRUE(verify_rep(x, ctx.pp, flavor, a.reps[0], true, z1.reps[0]));
      auto ext = extract_witness(x, flavor, z0.reps[0], z1.reps[0]);
      ASSERT_TRUE(ext);
      EXPECT_TRUE(is_valid_witness(x, *ext));
    }
  }
}

TEST(SigmaSim, AlwaysVerifies) {
  Rng rng(10);
  for (int t = 0; t < 100; ++t) {
    auto x = GraphInstance::star(3 + static_cast<int>(rng.uniform(5)));  // no witness needed
    CommitCtx ctx = make_ctx(t, rng);
    BitVector e = rng.bits(1 + rng.uniform(4));
    auto [a, z] = sigma_sim(x, e, ctx, rng);
    ASSERT_TRUE(sigma_verify(x, ctx, a, e, z));
  }
}

TEST(SigmaSim, BitZeroDistributionMatchesReal) {
  // Transparent commitments (com = m): the first message is H itself, so its
  // distribution is exactly the distribution of π(x).
  Rng rng(11);
  CommitCtx ctx{PublicParam{toy_setup(1, 0, ToyClass::Identity, rng)}};
  auto x = GraphInstance::from_edges(3, {{0, 1}, {1, 2}});
  std::map<Bytes, double> real;
  std::vector<int> pi = {0, 1, 2};
  do {
    SigmaFirstMsg a{SigmaFlavor::Plain, 3, {{}}};
    detail::commit_rep(ctx.pp, permuted_matrix(x, pi), pi, a.reps[0], rng);
    ByteWriter w;
    a.encode(w);
    real[w.data()] += 1.0 / 6;
  } while (std::next_permutation(pi.begin(), pi.end()));
  std::map<Bytes, double> sim;
  const int samples = 30000;
  for (int s = 0; s < samples; ++s) {
    ByteWriter w;
    sigma_sim(x, BitVector(1), ctx, rng).first.encode(w);
    sim[w.data()] += 1.0 / samples;
  }
  ASSERT_EQ(real.size(), sim.size());
  for (auto& [k, p] : real) {
    ASSERT_TRUE(sim.count(k));
    EXPECT_NEAR(sim[k], p, 0.015);
  }
}

TEST(SigmaSim, BitOneOpensOnlyOnes) {
  Rng rng(12);
  CommitCtx ctx{PublicParam{toy_setup(1, 0, ToyClass::Identity, rng)}};
  auto x = GraphInstance::star(5);
  auto [a, z] = sigma_sim(x, BitVector::from_string("11"), ctx, rng);
  for (std::size_t i = 0; i < 2; ++i)
    for (auto p : z.reps[i].positions) EXPECT_EQ(a.reps[i][p].body.to_string(), "1");
}

TEST(SigmaModified, HonestTriangleAndInconsistentRep) {
  Rng rng(13);
  auto x = GraphInstance::complete(3);
  CycleWitness w{{0, 1, 2}};
  CommitCtx ctx = make_ctx(0, rng);
  auto msgs = mh_samp(x, 2, rng);
  auto [a, st] = mh_commit(x, msgs, ctx, rng);
  BitVector e = BitVector::from_string("01");
  EXPECT_TRUE(mh_verify(x, ctx, a, e, mh_resp(st, w, e)));

  // Commit H ≠ π(x) (empty graph) with a valid π encoding.
  auto y = GraphInstance::from_edges(3, {{0, 1}, {1, 2}});
  std::vector<int> pi = {2, 0, 1};
  std::vector<BitVector> bad = {mh_encode(BitVector(9), pi)};
  auto [ab, stb] = mh_commit(y, bad, ctx, rng);
  EXPECT_FALSE(mh_verify(y, ctx, ab, BitVector(1), mh_simresp(stb, BitVector(1))));
}

TEST(SigmaModified, SimulatorVerifiesForEveryChallenge) {
  Rng rng(14);
  auto x = GraphInstance::from_edges(3, {{0, 1}, {1, 2}});
  for (int ctxi = 0; ctxi < 4; ++ctxi) {
    CommitCtx ctx = make_ctx(ctxi, rng);
    for (std::uint64_t ev = 0; ev < 8; ++ev) {
      BitVector e = BitVector::from_uint(ev, 3);
      auto [a, st] = mh_commit(x, mh_simsamp(x, e, rng), ctx, rng);
      EXPECT_TRUE(mh_verify(x, ctx, a, e, mh_simresp(st, e)));
    }
  }
}

TEST(FBad, ExtremesAndEncoding) {
  Rng rng(15);
  auto x = GraphInstance::star(4);
  EXPECT_EQ(f_bad(mh_samp(x, 3, rng), x), BitVector(3));
  std::vector<BitVector> garbage = {rng.bits(24), BitVector(5), rng.bits(24)};
  garbage[0].set(16, true);
  garbage[0].set(17, true);
  garbage[0].set(18, true);
  garbage[0].set(19, true);  // π(0) = π(1) = 3: not a permutation
  garbage[2] = mh_encode(GraphInstance::complete(4).matrix_bits(), {0, 1, 2, 3});
  EXPECT_EQ(f_bad(garbage, x), BitVector::from_string("111"));
}

TEST(SigmaEncoding, FirstMessageAndResponseRoundTrip) {
  Rng rng(16);
  auto [x, w] = planted(5, rng);
  CommitCtx ctx = make_ctx(0, rng);
  auto [a, st] = mh_commit(x, mh_samp(x, 3, rng), ctx, rng);
  BitVector e = BitVector::from_string("110");
  auto z = mh_resp(st, w, e);
  ByteWriter bw;
  a.encode(bw);
  z.encode(bw);
  ByteReader br(bw.data());
  EXPECT_EQ(SigmaFirstMsg::decode(br), a);
  EXPECT_EQ(SigmaResponse::decode(br), z);
  EXPECT_TRUE(br.done());
}
