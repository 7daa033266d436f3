#include <thread>

#include "ezk/net.hpp"
#include "ezk/soundness.hpp"
#include "gtest/gtest.h"

using namespace ezk;

namespace {

GraphInstance k3() { return GraphInstance::complete(3); }
GraphInstance star4() { return GraphInstance::star(4); }
GraphInstance path3() { return GraphInstance::from_edges(3, {{0, 1}, {1, 2}}); }

ProtocolConfig toy_proof(std::uint32_t reps = 2) {
  auto c = ProtocolConfig::for_mode(Mode::Proof);
  c.reps = reps;
  c.lambda = 8;
  c.prg = PrgMode::LinearToy;
  return c;
}

ProtocolConfig toy_argument(std::uint32_t reps = 2) {
  auto c = ProtocolConfig::for_mode(Mode::Argument);
  c.reps = reps;
  c.lambda = 4;
  c.prg = PrgMode::LinearToy;
  c.wipok_lambda = 4;
  return c;
}

std::size_t count_type(const Transcript& t, MsgType type) {
  std::size_t n = 0;
  for (const auto& m : t.frames) n += m.type == type;
  return n;
}

}  // namespace

TEST(Framing, RoundTripAndRejects) {
  ProtocolMessage m{2, MsgType::WiFirst, Bytes{1, 2, 3}};
  Bytes f = m.frame();
  EXPECT_EQ(to_hex(f), "000000050207010203");
  EXPECT_EQ(ProtocolMessage::parse(f), m);
  Bytes bad = f;
  bad[5] = 0x42;
  EXPECT_THROW(ProtocolMessage::parse(bad), DecodeError);
  bad = f;
  bad[4] = 3;
  EXPECT_THROW(ProtocolMessage::parse(bad), DecodeError);
  EXPECT_THROW(ProtocolMessage::parse(Bytes{0, 0, 0, 1, 1}), DecodeError);
  ProtocolMessage big{1, MsgType::Pp, Bytes(kMaxMessageBytes)};
  EXPECT_THROW(big.frame(), SessionError);
}

TEST(Protocol1, K3AcceptsInFiveMessages) {
  Rng rng(1);
  auto res = run_protocol1(toy_proof(2), k3(), CycleWitness{{0, 1, 2}}, rng);
  EXPECT_EQ(res.verdict, Verdict::Accept);
  EXPECT_EQ(res.messages, 5u);
  EXPECT_EQ(res.frames, 5u);
}

TEST(Protocol1, SecureParametersAccept) {
  Rng rng(2);
  auto cfg = ProtocolConfig::for_mode(Mode::Proof);
  cfg.lambda = 128;
  cfg.reps = 8;
  auto res = run_protocol1(cfg, GraphInstance::complete(5), std::nullopt, rng);
  EXPECT_EQ(res.verdict, Verdict::Accept);
  EXPECT_EQ(res.messages, 5u);
}

TEST(Protocol2, ToyInstanceAcceptsInNineMessagesEitherWitness) {
  for (auto wc : {WitnessChoice::Openings, WitnessChoice::Cycle}) {
    Rng rng(3);
    auto cfg = toy_argument(3);
    cfg.wipok_witness = wc;
    auto res = run_protocol2(cfg, GraphInstance::complete(4), std::nullopt, rng);
    EXPECT_EQ(res.verdict, Verdict::Accept);
    EXPECT_EQ(res.messages, 9u);
  }
}

TEST(Protocol2, OversizedRelationCircuitFallsBackToWitnessOnly) {
  Rng rng(31);
  auto cfg = ProtocolConfig::for_mode(Mode::Argument);
  cfg.sigma_scheme = SchemeId::ToyTable;
  auto res = run_protocol2(cfg, GraphInstance::complete(6), std::nullopt, rng);
  ASSERT_EQ(res.verdict, Verdict::Accept);
  for (const auto& m : res.transcript.frames) EXPECT_LE(m.frame().size(), kMaxMessageBytes);

  PublicParam pp_sigma{toy_setup(1, 3, ToyClass::StrictBinding, rng)};
  auto msgs = mh_samp(GraphInstance::complete(6), 8, rng);
  auto [a, st] = mh_commit(GraphInstance::complete(6), msgs, CommitCtx{pp_sigma, false}, rng);
  Wipok big(OrStatement{pp_sigma, GraphInstance::complete(6), commitments_of(a)},
            wipok_setup(cfg.wipok_lambda, PrgMode::Xof, rng), 8);
  EXPECT_EQ(big.mode(), WipokMode::WitnessOnly);
}

TEST(Protocol2, SecureModeUsesCycleBranch) {
  Rng rng(4);
  auto cfg = ProtocolConfig::for_mode(Mode::Argument);
  cfg.lambda = 128;
  cfg.reps = 4;
  auto res = run_protocol2(cfg, k3(), std::nullopt, rng);
  EXPECT_EQ(res.verdict, Verdict::Accept);
  EXPECT_EQ(res.messages, 9u);
}

TEST(Protocol2, SplitFramesGiveIdenticalVerdicts) {
  for (int seed = 0; seed < 5; ++seed) {
    auto cfg = toy_argument(2);
    Rng r1(static_cast<std::uint64_t>(seed)), r2(static_cast<std::uint64_t>(seed));
    auto one = run_protocol2(cfg, k3(), std::nullopt, r1);
    cfg.split_frames = true;
    auto two = run_protocol2(cfg, k3(), std::nullopt, r2);
    EXPECT_EQ(one.verdict, two.verdict);
    EXPECT_EQ(two.messages, 9u);
    EXPECT_EQ(two.frames, 10u);
    EXPECT_EQ(replay(two.transcript), two.verdict);
  }
}

TEST(Protocol, WrongOpeningMakesProverAbort) {
  for (auto kind : {VerifierScript::BadOpen::FlipChallenge, VerifierScript::BadOpen::FlipRandomness}) {
    for (auto cfg : {toy_proof(2), toy_argument(2)}) {
      Rng rng(5);
      RunOptions opt;
      opt.script = VerifierScript::always_abort(kind);
      auto res = run_protocol(cfg, k3(), std::nullopt, rng, opt);
      EXPECT_EQ(res.verdict, Verdict::ProverAbort);
      EXPECT_TRUE(res.prover_aborted);
      EXPECT_EQ(count_type(res.transcript, MsgType::Response), 0u);
      EXPECT_EQ(replay(res.transcript), Verdict::ProverAbort);
    }
  }
}

TEST(Protocol, TranscriptRoundTripAndReplay) {
  for (auto cfg : {toy_proof(3), toy_argument(3)}) {
    Rng rng(6);
    auto res = run_protocol(cfg, GraphInstance::complete(4), std::nullopt, rng);
    Bytes enc = res.transcript.encode();
    Transcript back = Transcript::decode(enc);
    EXPECT_EQ(back.encode(), enc);
    EXPECT_EQ(replay(back), Verdict::Accept);
    // Flip one bit inside the final response payload.
    Transcript tampered = back;
    tampered.frames.back().payload[tampered.frames.back().payload.size() / 2] ^= 0x10;
    EXPECT_NE(replay(tampered), Verdict::Accept);
    // Any byte flip in the header hash breaks decoding.
    Bytes broken = enc;
    broken.back() ^= 1;
    EXPECT_THROW(Transcript::decode(broken), DecodeError);
  }
}

TEST(Protocol2, CorruptedWipokResponseRejectsBeforeOpening) {
  Rng rng(7);
  RunOptions opt;
  opt.tamper = [](ProtocolMessage& m) {
    if (m.type == MsgType::WiResponse) m.payload[m.payload.size() - 1] ^= 0x01;
  };
  auto res = run_protocol2(toy_argument(2), k3(), std::nullopt, rng, opt);
  EXPECT_EQ(res.verdict, Verdict::Reject);
  EXPECT_EQ(count_type(res.transcript, MsgType::Open), 0u);
  EXPECT_EQ(res.messages, 7u);
  EXPECT_EQ(replay(res.transcript), Verdict::Reject);
}

TEST(Protocol, TamperedResponseRejects) {
  Rng rng(8);
  RunOptions opt;
  opt.tamper = [](ProtocolMessage& m) {
    if (m.type == MsgType::Response) m.payload[m.payload.size() - 1] ^= 0x01;
  };
  EXPECT_EQ(run_protocol1(toy_proof(2), k3(), std::nullopt, rng, opt).verdict, Verdict::Reject);
}

TEST(Protocol, LintEnforcesPairings) {
  auto c = toy_proof();
  c.challenge_scheme = SchemeId::NaorSB;
  EXPECT_THROW(c.lint(), InvalidArgument);
  c = toy_argument();
  c.challenge_scheme = SchemeId::HaleviMicaliSH;
  EXPECT_THROW(c.lint(), InvalidArgument);
  c = toy_argument();
  c.sigma_scheme = SchemeId::HaleviMicaliSH;
  EXPECT_THROW(c.lint(), InvalidArgument);
  c = toy_proof();
  c.reps = 0;
  EXPECT_THROW(c.lint(), InvalidArgument);
  Rng rng(9);
  EXPECT_THROW(run_protocol2(toy_proof(), k3(), std::nullopt, rng), InvalidArgument);
  EXPECT_THROW(run_protocol1(toy_proof(), star4(), std::nullopt, rng), InvalidArgument);
}

TEST(Protocol, ConfigEncodingRoundTrip) {
  auto c = toy_argument(5);
  c.split_frames = true;
  c.sigma_scheme = SchemeId::ToyTable;
  ByteWriter w;
  c.encode(w);
  Bytes b = w.take();
  ByteReader r(b);
  EXPECT_EQ(ProtocolConfig::decode(r), c);
}

TEST(Protocol, OutOfOrderMessageAbortsSession) {
  VerifierSession v(toy_proof(), k3(), Rng(10));
  EXPECT_THROW(v.handle(ProtocolMessage{1, MsgType::Response, {}}), SessionError);
  ProverSession p(toy_proof(), k3(), CycleWitness{{0, 1, 2}}, Rng(11));
  p.start();
  EXPECT_THROW(p.handle(ProtocolMessage{1, MsgType::Open, {}}), SessionError);
  ProverSession q(toy_proof(), k3(), CycleWitness{{0, 1, 2}}, Rng(11));
  q.start();
  EXPECT_THROW(q.handle(ProtocolMessage{2, MsgType::ComSigmaPp, {}}), SessionError);
}

TEST(Protocol, MalformedPayloadRejects) {
  VerifierSession v(toy_proof(), k3(), Rng(12));
  EXPECT_TRUE(v.handle(ProtocolMessage{1, MsgType::Pp, Bytes{9, 9}}).empty());
  EXPECT_EQ(v.verdict(), Verdict::Reject);
}

TEST(Protocol, CompletenessAcrossPairings) {
  Rng rng(13);
  std::vector<ProtocolConfig> cfgs;
  for (auto base : {toy_proof(2), toy_argument(2)})
    for (auto scheme : {SchemeId::NaorSB, SchemeId::ToyTable}) {
      base.sigma_scheme = scheme;
      cfgs.push_back(base);
    }
  for (const auto& cfg : cfgs)
    for (int t = 0; t < 40; ++t) {
      const int n = 3 + static_cast<int>(rng.uniform(3));
      auto order = rng.permutation(n);
      GraphInstance x(n);
      for (int k = 0; k < n; ++k) x.set_edge(order[k], order[(k + 1) % n], true);
      for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
          if (rng.bernoulli(0.3)) x.set_edge(u, v, true);
      ASSERT_EQ(run_protocol(cfg, x, CycleWitness{order}, rng).verdict, Verdict::Accept);
    }
}

TEST(ScriptedVerifier, HonestAndAlwaysAbort) {
  Rng rng(14);
  for (int t = 0; t < 20; ++t) {
    EXPECT_EQ(run_protocol1(toy_proof(1), k3(), std::nullopt, rng).verdict, Verdict::Accept);
    RunOptions opt;
    opt.script = VerifierScript::always_abort();
    EXPECT_TRUE(run_protocol1(toy_proof(1), k3(), std::nullopt, rng, opt).prover_aborted);
  }
}

TEST(ScriptedVerifier, AbortRateMatchesFirstBitBias) {
  // Position 0 commits H[0][0] = 0, so the first body bit is row 0 of the
  // linear generator applied to a uniform seed: 1 with probability
  // (1 - 2^-λ)/2 over a uniformly random matrix.
  Rng rng(15);
  RunOptions opt;
  opt.script = VerifierScript::abort_iff_first_bit();
  const int N = 10000;
  int aborts = 0;
  auto cfg = toy_proof(1);
  for (int t = 0; t < N; ++t) aborts += run_protocol1(cfg, k3(), std::nullopt, rng, opt).prover_aborted;
  const double expect = (1.0 - std::pow(2.0, -static_cast<double>(cfg.lambda))) / 2.0;
  EXPECT_NEAR(aborts / double(N), expect, 4.0 * std::sqrt(0.25 / N));
}

TEST(Tcp, SessionsOverLoopback) {
  TcpServer server(Endpoint{"127.0.0.1", 0}, seed_from_u64(16));
  const auto port = server.port();
  std::vector<ServedSession> served;
  std::thread srv([&] { served = server.run(2); });
  Verdict v1, v2;
  std::size_t msgs = 0;
  {
    FrameChannel ch(tcp_connect(Endpoint{"127.0.0.1", port}));
    Transcript t;
    v1 = prove_over(ch, toy_proof(2), k3(), CycleWitness{{0, 1, 2}}, Rng(1), &t);
    msgs = logical_message_count(t.frames);
  }
  {
    FrameChannel ch(tcp_connect(Endpoint{"127.0.0.1", port}));
    auto cfg = toy_argument(2);
    cfg.split_frames = true;
    v2 = prove_over(ch, cfg, k3(), CycleWitness{{0, 1, 2}}, Rng(2));
  }
  srv.join();
  EXPECT_EQ(v1, Verdict::Accept);
  EXPECT_EQ(v2, Verdict::Accept);
  EXPECT_EQ(msgs, 5u);
  ASSERT_EQ(served.size(), 2u);
  for (const auto& s : served) {
    EXPECT_TRUE(s.error.empty()) << s.error;
    EXPECT_EQ(s.verdict, Verdict::Accept);
    EXPECT_EQ(replay(s.transcript), Verdict::Accept);
  }
}

TEST(Tcp, EndpointParsing) {
  EXPECT_EQ(Endpoint::parse("localhost:8080").port, 8080);
  EXPECT_EQ(Endpoint::parse(":9").host, "127.0.0.1");
  EXPECT_THROW(Endpoint::parse("nope"), InvalidArgument);
  EXPECT_THROW(Endpoint::parse("h:99999"), InvalidArgument);
}

TEST(Soundness, StarGraphPlainBounds) {
  Rng rng(17);
  PublicParam pp{toy_setup(1, 2, ToyClass::StrictBinding, rng)};
  auto k1 = exhaustive_soundness_bound(star4(), pp, SigmaFlavor::Plain, 1);
  auto k2 = exhaustive_soundness_bound(star4(), pp, SigmaFlavor::Plain, 2);
  EXPECT_FALSE(k1.member);
  EXPECT_LE(k1.bound, 0.5);
  EXPECT_LE(k2.bound, 0.25);
  EXPECT_EQ(k1.vectors, 1u << 16);
}

TEST(Soundness, ModifiedFlavorSmallNonMember) {
  Rng rng(18);
  PublicParam pp{toy_setup(1, 2, ToyClass::StrictBinding, rng)};
  auto r = exhaustive_soundness_bound(path3(), pp, SigmaFlavor::Modified, 2);
  EXPECT_LE(r.bound, 0.25);
  EXPECT_DOUBLE_EQ(r.per_rep_max, 0.5);
}

TEST(Soundness, HamiltonianAndNonBindingReachOne) {
  Rng rng(19);
  PublicParam pp{toy_setup(1, 2, ToyClass::StrictBinding, rng)};
  EXPECT_DOUBLE_EQ(exhaustive_soundness_bound(k3(), pp, SigmaFlavor::Plain, 2).bound, 1.0);
  PublicParam loose{toy_setup(1, 2, ToyClass::NonBinding, rng)};
  if (!is_binding_pp(loose)) {
    auto r = exhaustive_soundness_bound(star4(), loose, SigmaFlavor::Plain, 2);
    EXPECT_DOUBLE_EQ(r.bound, 1.0);
  }
  EXPECT_THROW(exhaustive_soundness_bound(star4(), pp, SigmaFlavor::Plain, 5), Unsupported);
  EXPECT_THROW(exhaustive_soundness_bound(GraphInstance::star(6), pp, SigmaFlavor::Plain, 1), Unsupported);
}

TEST(BadChallenge, NoAcceptingResponseOffFBad) {
  Rng rng(20);
  PublicParam pp{toy_setup(1, 2, ToyClass::StrictBinding, rng)};
  const GraphInstance x = star4();
  for (int t = 0; t < 10; ++t) {
    std::vector<BitVector> msgs;
    for (int i = 0; i < 2; ++i)
      msgs.push_back(rng.bernoulli(0.5) ? mh_samp(x, 1, rng)[0] : rng.bits(sigma_message_bits(SigmaFlavor::Modified, 4)));
    auto rep = bad_challenge_check(x, pp, msgs, rng);
    EXPECT_EQ(rep.accepting_off_fbad, 0u);
    EXPECT_EQ(rep.challenges, 4u);
  }
}
