#pragma once

// Protocol 1 (5-message ε-ZK proof) and Protocol 2 (9-message ε-ZK argument)
// as explicit prover/verifier state machines.
//
// Frame: u32be(2 + |payload|) ‖ protocol_id ‖ msg_type ‖ payload.
//
//   Protocol 1                         Protocol 2
//   1 P→V Pp        (HM pp)            1 P→V Pp          (Naor pp)
//   2 V→P ComSigmaPp(com, pp_Σ)        2 V→P ComSigmaPp  (or Com + SigmaPp)
//   3 P→V SigmaFirst(a)                3 P→V SigmaFirst  (a)
//   4 V→P Open      ((e, r))           4 V→P WiPp
//   5 P→V Response  (z) or Abort       5 P→V WiFirst
//                                      6 V→P WiChallenge
//                                      7 P→V WiResponse
//                                      8 V→P Open        ((e, r))
//                                      9 P→V Response    (z) or Abort

#include <chrono>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ezk/wipok.hpp"

namespace ezk {

enum class MsgType : std::uint8_t {
  Pp = 0x01,
  ComSigmaPp = 0x02,
  Com = 0x03,
  SigmaPp = 0x04,
  SigmaFirst = 0x05,
  WiPp = 0x06,
  WiFirst = 0x07,
  WiChallenge = 0x08,
  WiResponse = 0x09,
  Open = 0x0A,
  Response = 0x0B,
  Hello = 0xF0,    // TCP session opener: config and instance
  Verdict = 0xFE,  // TCP session closer: the verifier's output
  Abort = 0xFF,
};

inline const char* msg_type_name(MsgType t) {
  switch (t) {
    case MsgType::Pp: return "pp";
    case MsgType::ComSigmaPp: return "com+pp_sigma";
    case MsgType::Com: return "com";
    case MsgType::SigmaPp: return "pp_sigma";
    case MsgType::SigmaFirst: return "a";
    case MsgType::WiPp: return "wi_pp";
    case MsgType::WiFirst: return "wi_first";
    case MsgType::WiChallenge: return "wi_e";
    case MsgType::WiResponse: return "wi_z";
    case MsgType::Open: return "open";
    case MsgType::Response: return "z";
    case MsgType::Hello: return "hello";
    case MsgType::Verdict: return "verdict";
    case MsgType::Abort: return "abort";
  }
  return "?";
}

inline bool known_msg_type(std::uint8_t t) {
  return (t >= 0x01 && t <= 0x0B) || t == 0xF0 || t == 0xFE || t == 0xFF;
}

constexpr std::size_t kMaxMessageBytes = std::size_t{1} << 20;

struct ProtocolMessage {
  std::uint8_t protocol_id = 1;
  MsgType type = MsgType::Pp;
  Bytes payload;

  Bytes frame() const {
    if (payload.size() + 2 > kMaxMessageBytes) throw SessionError("message exceeds 1 MiB cap");
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(payload.size() + 2));
    w.u8(protocol_id);
    w.u8(static_cast<std::uint8_t>(type));
    w.raw(payload);
    return w.take();
  }

  static ProtocolMessage read(ByteReader& r) {
    const std::uint32_t len = r.u32();
    if (len < 2 || len > kMaxMessageBytes) throw DecodeError("frame length out of range");
    ProtocolMessage m;
    m.protocol_id = r.u8();
    const std::uint8_t t = r.u8();
    if (m.protocol_id < 1 || m.protocol_id > 2) throw DecodeError("unknown protocol id");
    if (!known_msg_type(t)) throw DecodeError("unknown message type");
    m.type = static_cast<MsgType>(t);
    m.payload = r.raw(len - 2);
    return m;
  }
  static ProtocolMessage parse(std::span<const std::uint8_t> frame) {
    ByteReader r(frame);
    auto m = read(r);
    r.expect_done();
    return m;
  }
  friend bool operator==(const ProtocolMessage&, const ProtocolMessage&) = default;
};

// Protocol messages as counted by the round structure: transport-only frames
// are skipped and a split (com, pp_Σ) delivery counts once.
inline std::size_t logical_message_count(const std::vector<ProtocolMessage>& frames) {
  std::size_t n = 0;
  for (const auto& m : frames)
    n += m.type != MsgType::Hello && m.type != MsgType::Verdict && m.type != MsgType::SigmaPp;
  return n;
}

enum class Verdict : std::uint8_t { Accept = 0, Reject = 1, ProverAbort = 2 };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Accept: return "accept";
    case Verdict::Reject: return "reject";
    case Verdict::ProverAbort: return "prover-abort";
  }
  return "?";
}

// ---- configuration ---------------------------------------------------------------

enum class Mode : std::uint8_t { Proof = 1, Argument = 2 };
enum class WitnessChoice : std::uint8_t { Openings = 0, Cycle = 1 };

struct ProtocolConfig {
  Mode mode = Mode::Proof;
  std::uint32_t lambda = 16;  // commitment security parameter (Naor λ, HM ℓ)
  std::uint32_t reps = 8;     // λ_reps: parallel repetitions = challenge bits
  SchemeId challenge_scheme = SchemeId::HaleviMicaliSH;
  SchemeId sigma_scheme = SchemeId::NaorSB;
  PrgMode prg = PrgMode::Xof;
  std::uint32_t toy_r_bits = 3;  // ToyTable pp_Σ randomness width
  bool split_frames = false;     // deliver com and pp_Σ as two frames
  WitnessChoice wipok_witness = WitnessChoice::Openings;
  std::uint32_t wipok_lambda = 8;

  static ProtocolConfig for_mode(Mode m) {
    ProtocolConfig c;
    c.mode = m;
    c.challenge_scheme = m == Mode::Proof ? SchemeId::HaleviMicaliSH : SchemeId::NaorSB;
    return c;
  }

  std::uint8_t protocol_id() const { return mode == Mode::Proof ? 1 : 2; }
  SigmaFlavor flavor() const { return mode == Mode::Proof ? SigmaFlavor::Plain : SigmaFlavor::Modified; }

  // Proof mode pairs a statistically hiding challenge commitment with
  // receiver-parameter Σ commitments; argument mode pairs a statistically
  // binding challenge commitment with Modified Hamiltonicity.
  void lint() const {
    if (mode != Mode::Proof && mode != Mode::Argument) throw InvalidArgument("lint: unknown mode");
    if (mode == Mode::Proof && challenge_scheme != SchemeId::HaleviMicaliSH)
      throw InvalidArgument("lint: proof mode requires the statistically hiding (HM) challenge commitment");
    if (mode == Mode::Argument && challenge_scheme != SchemeId::NaorSB)
      throw InvalidArgument("lint: argument mode requires the statistically binding (Naor) challenge commitment");
    if (sigma_scheme != SchemeId::NaorSB && sigma_scheme != SchemeId::ToyTable)
      throw InvalidArgument("lint: Σ commitments must be Naor or ToyTable");
    require(reps >= 1 && reps <= 256, "lint: reps must be in [1, 256]");
    require(lambda >= 2 && lambda <= 256, "lint: lambda must be in [2, 256]");
    require(toy_r_bits <= 12, "lint: toy_r_bits must be at most 12");
    require(wipok_lambda >= 2 && wipok_lambda <= 256, "lint: wipok_lambda must be in [2, 256]");
  }

  void encode(ByteWriter& w) const {
    w.u8(static_cast<std::uint8_t>(mode));
    w.u32(lambda);
    w.u32(reps);
    w.u8(static_cast<std::uint8_t>(challenge_scheme));
    w.u8(static_cast<std::uint8_t>(sigma_scheme));
    w.u8(static_cast<std::uint8_t>(prg));
    w.u32(toy_r_bits);
    w.u8(split_frames ? 1 : 0);
    w.u8(static_cast<std::uint8_t>(wipok_witness));
    w.u32(wipok_lambda);
  }
  static ProtocolConfig decode(ByteReader& r) {
    ProtocolConfig c;
    c.mode = static_cast<Mode>(r.u8());
    c.lambda = r.u32();
    c.reps = r.u32();
    c.challenge_scheme = static_cast<SchemeId>(r.u8());
    c.sigma_scheme = static_cast<SchemeId>(r.u8());
    const auto prg = r.u8();
    if (prg > 1) throw DecodeError("config: bad prg mode");
    c.prg = static_cast<PrgMode>(prg);
    c.toy_r_bits = r.u32();
    const auto split = r.u8();
    if (split > 1) throw DecodeError("config: bad split flag");
    c.split_frames = split == 1;
    const auto wc = r.u8();
    if (wc > 1) throw DecodeError("config: bad witness choice");
    c.wipok_witness = static_cast<WitnessChoice>(wc);
    c.wipok_lambda = r.u32();
    return c;
  }
  friend bool operator==(const ProtocolConfig&, const ProtocolConfig&) = default;
};

inline Bytes config_hash(const ProtocolConfig& cfg, const GraphInstance& x) {
  ByteWriter w;
  cfg.encode(w);
  x.encode(w);
  Bytes b = w.take();
  return shake256(Domain::TranscriptHash, b, 32);
}

inline PublicParam challenge_setup(const ProtocolConfig& cfg, Rng& rng) {
  if (cfg.mode == Mode::Proof) return PublicParam{hm_setup(cfg.reps, cfg.lambda, rng)};
  return PublicParam{naor_setup(cfg.lambda, cfg.prg, rng)};
}

inline PublicParam sigma_setup(const ProtocolConfig& cfg, Rng& rng) {
  if (cfg.sigma_scheme == SchemeId::ToyTable) return PublicParam{toy_setup(1, cfg.toy_r_bits, ToyClass::StrictBinding, rng)};
  return PublicParam{naor_setup(cfg.lambda, cfg.prg, rng)};
}

// ---- payload codecs ---------------------------------------------------------------

namespace detail {

template <class F>
Bytes encode_with(F&& f) {
  ByteWriter w;
  f(w);
  return w.take();
}

template <class T>
T decode_exact(const Bytes& b) {
  ByteReader r(b);
  T v = T::decode(r);
  r.expect_done();
  return v;
}

inline std::pair<Commitment, PublicParam> decode_com_pp(const Bytes& b) {
  ByteReader r(b);
  Commitment c = Commitment::decode(r);
  PublicParam pp = PublicParam::decode(r);
  r.expect_done();
  return {std::move(c), std::move(pp)};
}

}  // namespace detail

// (e, r): bits(e) ‖ bits(r), each with its u32 bit-length prefix.
inline Bytes encode_open(const BitVector& e, const Opening& r) {
  return detail::encode_with([&](ByteWriter& w) {
    w.bits(e);
    r.encode(w);
  });
}

inline std::pair<BitVector, Opening> decode_open(const Bytes& b) {
  ByteReader r(b);
  BitVector e = r.bits();
  Opening o = Opening::decode(r);
  r.expect_done();
  return {std::move(e), std::move(o)};
}

// ---- verifier scripts ------------------------------------------------------------

// Per-round behavior of a (possibly malicious) classical verifier. The only
// deviation modelled is a bad opening of the challenge commitment, sent with
// a probability that may depend on the prover's first Σ message.
struct VerifierScript {
  enum class BadOpen : std::uint8_t { FlipChallenge, FlipRandomness };
  std::function<double(const SigmaFirstMsg&)> bad_open_prob;
  BadOpen kind = BadOpen::FlipChallenge;

  static VerifierScript honest() { return {}; }
  static VerifierScript always_abort(BadOpen k = BadOpen::FlipChallenge) {
    return {[](const SigmaFirstMsg&) { return 1.0; }, k};
  }
  // Bad opening iff the first bit of the first commitment in a is set.
  static VerifierScript abort_iff_first_bit() {
    return {[](const SigmaFirstMsg& a) {
              return !a.reps.empty() && !a.reps[0].empty() && !a.reps[0][0].body.empty() && a.reps[0][0].body.get(0)
                         ? 1.0
                         : 0.0;
            },
            BadOpen::FlipChallenge};
  }
};

// ---- sessions -------------------------------------------------------------------

class ProverSession {
 public:
  ProverSession(ProtocolConfig cfg, GraphInstance x, CycleWitness w, Rng rng)
      : cfg_(std::move(cfg)), x_(std::move(x)), w_(std::move(w)), rng_(std::move(rng)) {
    cfg_.lint();
    x_.validate();
    require(is_valid_witness(x_, w_), "prover: witness is not a Hamiltonian cycle of x");
  }

  std::vector<ProtocolMessage> start() {
    expect_step(Step::Start);
    pp_ = challenge_setup(cfg_, rng_);
    step_ = Step::AwaitCom;
    return {msg(MsgType::Pp, pp_->encode())};
  }

  std::vector<ProtocolMessage> handle(const ProtocolMessage& m) {
    if (m.protocol_id != cfg_.protocol_id()) throw SessionError("prover: protocol id mismatch");
    switch (step_) {
      case Step::AwaitCom:
        if (m.type == MsgType::ComSigmaPp) {
          auto [c, pp] = detail::decode_com_pp(m.payload);
          com_ = std::move(c);
          pp_sigma_ = std::move(pp);
          return send_first();
        }
        if (m.type == MsgType::Com) {
          com_ = detail::decode_exact<Commitment>(m.payload);
          step_ = Step::AwaitSigmaPp;
          return {};
        }
        break;
      case Step::AwaitSigmaPp:
        if (m.type == MsgType::SigmaPp) {
          pp_sigma_ = PublicParam::decode(m.payload);
          return send_first();
        }
        break;
      case Step::AwaitWiPp:
        if (m.type == MsgType::WiPp) {
          wipok_.emplace(OrStatement{*pp_sigma_, x_, commitments_of(a_)}, PublicParam::decode(m.payload), cfg_.reps);
          OrWitness ow = CycleWitness(w_);
          if (cfg_.wipok_witness == WitnessChoice::Openings && wipok_->mode() == WipokMode::Or)
            ow = decommitments_of(*st_);
          auto [first, ps] = wipok_->prove_first(ow, rng_);
          wi_state_.emplace(std::move(ps));
          step_ = Step::AwaitWiChallenge;
          return {msg(MsgType::WiFirst, std::move(first))};
        }
        break;
      case Step::AwaitWiChallenge:
        if (m.type == MsgType::WiChallenge) {
          ByteReader r(m.payload);
          BitVector e = r.bits();
          r.expect_done();
          if (e.size() != cfg_.reps) throw SessionError("prover: WIPoK challenge length");
          step_ = Step::AwaitOpen;
          return {msg(MsgType::WiResponse, wipok_->prove_respond(*wi_state_, e))};
        }
        break;
      case Step::AwaitOpen:
        if (m.type == MsgType::Open) {
          step_ = Step::Done;
          std::optional<std::pair<BitVector, Opening>> er;
          try {
            er = decode_open(m.payload);
          } catch (const DecodeError&) {
          }
          // Abort exactly when the opening of com fails.
          if (!er || er->first.size() != cfg_.reps || !verify_open(*pp_, *com_, er->first, er->second)) {
            aborted_ = true;
            return {msg(MsgType::Abort, {})};
          }
          SigmaResponse z = cfg_.mode == Mode::Proof ? sigma_p3(*st_, w_, er->first) : mh_resp(*st_, w_, er->first);
          return {msg(MsgType::Response, detail::encode_with([&](ByteWriter& w) { z.encode(w); }))};
        }
        break;
      case Step::Start:
      case Step::Done: break;
    }
    throw SessionError(std::string("prover: unexpected message ") + msg_type_name(m.type));
  }

  bool finished() const { return step_ == Step::Done; }
  bool aborted() const { return aborted_; }

 private:
  enum class Step { Start, AwaitCom, AwaitSigmaPp, AwaitWiPp, AwaitWiChallenge, AwaitOpen, Done };

  ProtocolMessage msg(MsgType t, Bytes payload) const { return {cfg_.protocol_id(), t, std::move(payload)}; }
  void expect_step(Step s) const {
    if (step_ != s) throw SessionError("prover: out-of-order call");
  }

  std::vector<ProtocolMessage> send_first() {
    if (pp_sigma_->scheme() != cfg_.sigma_scheme) throw SessionError("prover: pp_Σ scheme differs from config");
    CommitCtx ctx{*pp_sigma_, true};
    ctx.validate();
    if (cfg_.mode == Mode::Proof) {
      auto [a, st] = sigma_p1(x_, cfg_.reps, ctx, rng_);
      a_ = std::move(a);
      st_ = std::move(st);
      step_ = Step::AwaitOpen;
    } else {
      auto [a, st] = mh_commit(x_, mh_samp(x_, cfg_.reps, rng_), ctx, rng_);
      a_ = std::move(a);
      st_ = std::move(st);
      step_ = Step::AwaitWiPp;
    }
    return {msg(MsgType::SigmaFirst, detail::encode_with([&](ByteWriter& w) { a_.encode(w); }))};
  }

  ProtocolConfig cfg_;
  GraphInstance x_;
  CycleWitness w_;
  Rng rng_;
  Step step_ = Step::Start;
  bool aborted_ = false;
  std::optional<PublicParam> pp_, pp_sigma_;
  std::optional<Commitment> com_;
  SigmaFirstMsg a_;
  std::optional<SigmaState> st_;
  std::optional<Wipok> wipok_;
  std::optional<Wipok::ProverState> wi_state_;
};

class VerifierSession {
 public:
  VerifierSession(ProtocolConfig cfg, GraphInstance x, Rng rng, VerifierScript script = {})
      : cfg_(std::move(cfg)), x_(std::move(x)), rng_(std::move(rng)), script_(std::move(script)) {
    cfg_.lint();
    x_.validate();
  }

  std::vector<ProtocolMessage> handle(const ProtocolMessage& m) {
    if (m.protocol_id != cfg_.protocol_id()) throw SessionError("verifier: protocol id mismatch");
    try {
      return dispatch(m);
    } catch (const DecodeError&) {
      // A malformed prover payload ends the session with a reject.
      finish(Verdict::Reject);
      return {};
    } catch (const InvalidArgument&) {
      finish(Verdict::Reject);
      return {};
    }
  }

  std::optional<Verdict> verdict() const { return verdict_; }
  // Challenge actually committed to (for tests and simulators).
  const BitVector& challenge() const { return e_; }

 private:
  enum class Step { AwaitPp, AwaitA, AwaitWiFirst, AwaitWiResponse, AwaitResponse, Done };

  ProtocolMessage msg(MsgType t, Bytes payload) const { return {cfg_.protocol_id(), t, std::move(payload)}; }
  void finish(Verdict v) {
    verdict_ = v;
    step_ = Step::Done;
  }

  std::vector<ProtocolMessage> dispatch(const ProtocolMessage& m) {
    switch (step_) {
      case Step::AwaitPp:
        if (m.type == MsgType::Pp) {
          pp_ = PublicParam::decode(m.payload);
          if (pp_->scheme() != cfg_.challenge_scheme) throw DecodeError("challenge pp has the wrong scheme");
          if (cfg_.mode == Mode::Proof &&
              (pp_->hm().msg_bits != cfg_.reps || pp_->hm().in_len() != 4 * pp_->hm().hash_bits + 2 * cfg_.reps + 4))
            throw DecodeError("HM pp does not match the challenge length");
          e_ = rng_.bits(cfg_.reps);
          auto [c, r] = commit(*pp_, e_, rng_);
          com_ = std::move(c);
          r_ = std::move(r);
          pp_sigma_ = sigma_setup(cfg_, rng_);
          step_ = Step::AwaitA;
          Bytes cb = detail::encode_with([&](ByteWriter& w) { com_->encode(w); });
          if (cfg_.split_frames) return {msg(MsgType::Com, std::move(cb)), msg(MsgType::SigmaPp, pp_sigma_->encode())};
          Bytes both = cb;
          Bytes ppb = pp_sigma_->encode();
          both.insert(both.end(), ppb.begin(), ppb.end());
          return {msg(MsgType::ComSigmaPp, std::move(both))};
        }
        break;
      case Step::AwaitA:
        if (m.type == MsgType::SigmaFirst) {
          a_ = detail::decode_exact<SigmaFirstMsg>(m.payload);
          if (a_.flavor != cfg_.flavor() || a_.n != x_.n || a_.reps.size() != cfg_.reps)
            throw DecodeError("first message shape");
          if (cfg_.mode == Mode::Proof) return {open_message()};
          pp_wi_ = wipok_setup(cfg_.wipok_lambda, cfg_.prg, rng_);
          step_ = Step::AwaitWiFirst;
          return {msg(MsgType::WiPp, pp_wi_->encode())};
        }
        break;
      case Step::AwaitWiFirst:
        if (m.type == MsgType::WiFirst) {
          wi_first_ = m.payload;
          wi_e_ = rng_.bits(cfg_.reps);
          step_ = Step::AwaitWiResponse;
          return {msg(MsgType::WiChallenge, detail::encode_with([&](ByteWriter& w) { w.bits(wi_e_); }))};
        }
        break;
      case Step::AwaitWiResponse:
        if (m.type == MsgType::WiResponse) {
          Wipok wi(OrStatement{*pp_sigma_, x_, commitments_of(a_)}, *pp_wi_, cfg_.reps);
          if (!wi.verify(wi_first_, wi_e_, m.payload)) {
            finish(Verdict::Reject);
            return {};
          }
          return {open_message()};
        }
        break;
      case Step::AwaitResponse:
        if (m.type == MsgType::Abort) {
          finish(Verdict::ProverAbort);
          return {};
        }
        if (m.type == MsgType::Response) {
          SigmaResponse z = detail::decode_exact<SigmaResponse>(m.payload);
          const bool ok = verify_all(x_, *pp_sigma_, cfg_.flavor(), a_, e_, z);
          finish(ok ? Verdict::Accept : Verdict::Reject);
          return {};
        }
        break;
      case Step::Done: break;
    }
    throw SessionError(std::string("verifier: unexpected message ") + msg_type_name(m.type));
  }

  ProtocolMessage open_message() {
    step_ = Step::AwaitResponse;
    const double p = script_.bad_open_prob ? script_.bad_open_prob(a_) : 0.0;
    const double coin = rng_.real();
    if (coin >= p) return msg(MsgType::Open, encode_open(e_, *r_));
    BitVector e = e_;
    Opening r = *r_;
    if (script_.kind == VerifierScript::BadOpen::FlipChallenge || r.rand.empty())
      e.flip(0);
    else
      r.rand.flip(0);
    // Guarantee the opening is actually invalid.
    for (std::size_t i = 0; verify_open(*pp_, *com_, e, r) && i < r.rand.size(); ++i) r.rand.flip(i);
    return msg(MsgType::Open, encode_open(e, r));
  }

  ProtocolConfig cfg_;
  GraphInstance x_;
  Rng rng_;
  VerifierScript script_;
  Step step_ = Step::AwaitPp;
  std::optional<Verdict> verdict_;
  std::optional<PublicParam> pp_, pp_sigma_, pp_wi_;
  std::optional<Commitment> com_;
  std::optional<Opening> r_;
  BitVector e_, wi_e_;
  SigmaFirstMsg a_;
  Bytes wi_first_;
};

// ---- transcripts ----------------------------------------------------------------

// File: "EZKT" ‖ u8 version ‖ bytes(config) ‖ bytes(instance) ‖ u32 count ‖
// frames ‖ u8 verdict ‖ 32-byte config hash.
struct Transcript {
  ProtocolConfig cfg;
  GraphInstance x;
  std::vector<ProtocolMessage> frames;
  Verdict verdict = Verdict::Reject;

  Bytes encode() const {
    ByteWriter w;
    w.raw(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("EZKT"), 4));
    w.u8(1);
    w.bytes(detail::encode_with([&](ByteWriter& b) { cfg.encode(b); }));
    w.bytes(detail::encode_with([&](ByteWriter& b) { x.encode(b); }));
    w.u32(static_cast<std::uint32_t>(frames.size()));
    for (const auto& m : frames) w.raw(m.frame());
    w.u8(static_cast<std::uint8_t>(verdict));
    w.raw(config_hash(cfg, x));
    return w.take();
  }

  static Transcript decode(std::span<const std::uint8_t> b) {
    ByteReader r(b);
    Bytes magic = r.raw(4);
    if (std::string(magic.begin(), magic.end()) != "EZKT") throw DecodeError("transcript: bad magic");
    if (r.u8() != 1) throw DecodeError("transcript: unsupported version");
    Transcript t;
    Bytes cb = r.bytes(), xb = r.bytes();
    t.cfg = detail::decode_exact<ProtocolConfig>(cb);
    t.x = detail::decode_exact<GraphInstance>(xb);
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) t.frames.push_back(ProtocolMessage::read(r));
    const auto v = r.u8();
    if (v > 2) throw DecodeError("transcript: bad verdict");
    t.verdict = static_cast<Verdict>(v);
    if (r.raw(32) != config_hash(t.cfg, t.x)) throw DecodeError("transcript: config hash mismatch");
    r.expect_done();
    return t;
  }
};

// Re-runs every verifier check that the frames make public. The committed
// challenge is read from the opening, so stored transcripts need no secrets.
inline Verdict replay(const Transcript& t) {
  try {
    t.cfg.lint();
    std::vector<ProtocolMessage> fs;
    for (const auto& m : t.frames)
      if (m.type != MsgType::Hello && m.type != MsgType::Verdict) fs.push_back(m);
    std::size_t i = 0;
    auto next = [&](MsgType type) -> const Bytes& {
      if (i >= fs.size() || fs[i].type != type || fs[i].protocol_id != t.cfg.protocol_id())
        throw SessionError("replay: unexpected frame");
      return fs[i++].payload;
    };
    PublicParam pp = PublicParam::decode(next(MsgType::Pp));
    if (pp.scheme() != t.cfg.challenge_scheme) return Verdict::Reject;
    Commitment com;
    PublicParam pp_sigma;
    if (i < fs.size() && fs[i].type == MsgType::Com) {
      com = detail::decode_exact<Commitment>(next(MsgType::Com));
      pp_sigma = PublicParam::decode(next(MsgType::SigmaPp));
    } else {
      std::tie(com, pp_sigma) = detail::decode_com_pp(next(MsgType::ComSigmaPp));
    }
    auto a = detail::decode_exact<SigmaFirstMsg>(next(MsgType::SigmaFirst));
    if (t.cfg.mode == Mode::Argument) {
      PublicParam pp_wi = PublicParam::decode(next(MsgType::WiPp));
      const Bytes& first = next(MsgType::WiFirst);
      ByteReader er(next(MsgType::WiChallenge));
      BitVector wi_e = er.bits();
      er.expect_done();
      const Bytes& wi_z = next(MsgType::WiResponse);
      Wipok wi(OrStatement{pp_sigma, t.x, commitments_of(a)}, pp_wi, t.cfg.reps);
      if (!wi.verify(first, wi_e, wi_z)) return Verdict::Reject;
    }
    auto [e, r] = decode_open(next(MsgType::Open));
    if (i < fs.size() && fs[i].type == MsgType::Abort) {
      next(MsgType::Abort);
      return i == fs.size() ? Verdict::ProverAbort : Verdict::Reject;
    }
    auto z = detail::decode_exact<SigmaResponse>(next(MsgType::Response));
    if (i != fs.size()) return Verdict::Reject;
    // The honest verifier only ever sees z after a valid opening.
    if (!verify_open(pp, com, e, r)) return Verdict::Reject;
    return verify_all(t.x, pp_sigma, t.cfg.flavor(), a, e, z) ? Verdict::Accept : Verdict::Reject;
  } catch (const std::exception&) {
    return Verdict::Reject;
  }
}

// ---- in-process execution --------------------------------------------------------

struct RunOptions {
  VerifierScript script;
  // Man-in-the-middle hook applied to each frame in transit.
  std::function<void(ProtocolMessage&)> tamper;
  // Called with the received message type and the handler's wall time.
  std::function<void(MsgType, double)> on_timing;
};

struct RunResult {
  Verdict verdict = Verdict::Reject;
  Transcript transcript;
  std::size_t messages = 0;
  std::size_t frames = 0;
  std::size_t bytes = 0;
  bool prover_aborted = false;
  BitVector challenge;
};

// The prover without a supplied witness searches for one (n ≤ 20).
inline CycleWitness resolve_witness(const GraphInstance& x, const std::optional<CycleWitness>& w) {
  if (w) return *w;
  auto found = find_hamiltonian_cycle(x);
  if (!found) throw InvalidArgument("prover: instance has no Hamiltonian cycle");
  return *found;
}

inline RunResult run_protocol(const ProtocolConfig& cfg, const GraphInstance& x, const std::optional<CycleWitness>& w,
                              Rng& rng, const RunOptions& opt = {}) {
  cfg.lint();
  Rng prover_rng = rng.split();
  Rng verifier_rng = rng.split();
  ProverSession prover(cfg, x, resolve_witness(x, w), std::move(prover_rng));
  VerifierSession verifier(cfg, x, std::move(verifier_rng), opt.script);

  RunResult res;
  res.transcript.cfg = cfg;
  res.transcript.x = x;
  using Clock = std::chrono::steady_clock;
  auto timed = [&](MsgType t, auto&& fn) {
    const auto t0 = Clock::now();
    auto out = fn();
    if (opt.on_timing) opt.on_timing(t, std::chrono::duration<double>(Clock::now() - t0).count());
    return out;
  };

  std::deque<std::pair<bool, ProtocolMessage>> queue;  // (to_verifier, message)
  for (auto& m : timed(MsgType::Hello, [&] { return prover.start(); })) queue.emplace_back(true, std::move(m));
  while (!queue.empty()) {
    auto [to_verifier, m] = std::move(queue.front());
    queue.pop_front();
    if (opt.tamper) opt.tamper(m);
    res.bytes += m.frame().size();
    res.transcript.frames.push_back(m);
    if (to_verifier) {
      for (auto& o : timed(m.type, [&] { return verifier.handle(m); })) queue.emplace_back(false, std::move(o));
      if (verifier.verdict()) break;
    } else {
      for (auto& o : timed(m.type, [&] { return prover.handle(m); })) queue.emplace_back(true, std::move(o));
    }
  }
  if (!verifier.verdict()) throw SessionError("run: session ended without a verdict");
  res.verdict = *verifier.verdict();
  res.transcript.verdict = res.verdict;
  res.frames = res.transcript.frames.size();
  res.messages = logical_message_count(res.transcript.frames);
  res.prover_aborted = prover.aborted();
  res.challenge = verifier.challenge();
  return res;
}

inline RunResult run_protocol1(ProtocolConfig cfg, const GraphInstance& x, const std::optional<CycleWitness>& w,
                               Rng& rng, const RunOptions& opt = {}) {
  require(cfg.mode == Mode::Proof, "run_protocol1: config is not proof mode");
  return run_protocol(cfg, x, w, rng, opt);
}

inline RunResult run_protocol2(ProtocolConfig cfg, const GraphInstance& x, const std::optional<CycleWitness>& w,
                               Rng& rng, const RunOptions& opt = {}) {
  require(cfg.mode == Mode::Argument, "run_protocol2: config is not argument mode");
  return run_protocol(cfg, x, w, rng, opt);
}

}  // namespace ezk
