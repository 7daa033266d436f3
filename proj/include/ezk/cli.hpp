#pragma once

// Subcommand bodies shared by the ezk tool and the acceptance harness. Flag
// parsing lives in tools/ezk.cpp; everything here takes typed arguments.

#include <chrono>
#include <fstream>
#include <map>

#include "ezk/instance.hpp"
#include "ezk/net.hpp"
#include "ezk/protocol.hpp"
#include "ezk/qsim.hpp"

namespace ezk::cli {

using nlohmann::json;
using qsim::Mat;
using qsim::Vec;

inline constexpr int kExitAccept = 0;
inline constexpr int kExitReject = 1;
inline constexpr int kExitUsage = 2;

// EZK_SEED supplies the seed unless --seed is given; the default is 0.
inline std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const char* env) {
  if (flag) return *flag;
  if (!env || !*env) return 0;
  const std::string s(env);
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used, 0);
  } catch (const std::logic_error&) {
    throw InvalidArgument("EZK_SEED is not an unsigned integer");
  }
  if (used != s.size()) throw InvalidArgument("EZK_SEED is not an unsigned integer");
  return v;
}

inline Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, std::span<const std::uint8_t> b) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

// ---------------------------------------------------------------------------
// Protocol runs

struct ProveInput {
  ProtocolConfig cfg;
  GeneratedInstance inst;
};

// Streams: the first split generates the instance when none is supplied,
// the second drives the protocol.
inline ProveInput prepare_run(const ProtocolConfig& cfg, std::optional<GeneratedInstance> file, int n, double edge_prob,
                              Rng& root) {
  Rng inst_rng = root.split();
  cfg.lint();
  if (file) return {cfg, std::move(*file)};
  return {cfg, instance_gen(n, edge_prob, true, inst_rng)};
}

inline RunResult prove_local(const ProveInput& in, Rng& root, const RunOptions& opt = {}) {
  Rng proto = root.split();
  return run_protocol(in.cfg, in.inst.x, in.inst.witness, proto, opt);
}

inline json run_summary(Verdict v, const Transcript& t, std::size_t messages, std::size_t bytes) {
  return {{"verdict", verdict_name(v)},
          {"mode", t.cfg.mode == Mode::Proof ? "proof" : "argument"},
          {"n", t.x.n},
          {"lambda", t.cfg.lambda},
          {"reps", t.cfg.reps},
          {"messages", messages},
          {"frames", t.frames.size()},
          {"bytes", bytes}};
}

// Transcript with seed 0 used for the committed goldens.
inline Transcript golden_transcript(Mode mode, std::uint64_t seed = 0) {
  Rng root(seed);
  auto in = prepare_run(ProtocolConfig::for_mode(mode), std::nullopt, 5, 0.3, root);
  return prove_local(in, root).transcript;
}

struct VerifyOutcome {
  Verdict verdict = Verdict::Reject;
  std::string error;
  std::optional<Transcript> transcript;
};

// A transcript verifies when it decodes, its stored verdict is Accept and
// replaying the public checks reproduces it.
inline VerifyOutcome verify_transcript_bytes(std::span<const std::uint8_t> b) {
  VerifyOutcome out;
  try {
    out.transcript = Transcript::decode(b);
  } catch (const std::exception& e) {
    out.error = e.what();
    return out;
  }
  const Verdict replayed = replay(*out.transcript);
  if (replayed != out.transcript->verdict) {
    out.error = std::string("stored verdict ") + verdict_name(out.transcript->verdict) + " but replay gives " +
                verdict_name(replayed);
    return out;
  }
  out.verdict = replayed;
  return out;
}

inline std::size_t wire_bytes(const Transcript& t) {
  std::size_t b = 0;
  for (const auto& m : t.frames) b += m.frame().size();
  return b;
}

// ---------------------------------------------------------------------------
// Benchmark

struct BenchReport {
  std::size_t runs = 0;
  std::size_t messages = 0;
  double bytes_mean = 0;
  std::size_t bytes_min = 0, bytes_max = 0;
  std::map<std::string, double> phase_seconds;  // mean per run, keyed by received message type
  double total_seconds = 0;                     // mean per run
  bool all_accepted = true;

  json to_json(const ProtocolConfig& cfg, int n) const {
    json phases = json::object();
    for (const auto& [k, v] : phase_seconds) phases[k] = v;
    return {{"mode", cfg.mode == Mode::Proof ? "proof" : "argument"},
            {"n", n},
            {"lambda", cfg.lambda},
            {"reps", cfg.reps},
            {"runs", runs},
            {"messages", messages},
            {"bytes_mean", bytes_mean},
            {"bytes_min", bytes_min},
            {"bytes_max", bytes_max},
            {"phase_seconds", phases},
            {"total_seconds", total_seconds},
            {"all_accepted", all_accepted}};
  }
};

inline BenchReport bench_run(const ProtocolConfig& cfg, int n, double edge_prob, std::size_t runs, Rng& root) {
  require(runs >= 1, "bench: runs must be positive");
  auto in = prepare_run(cfg, std::nullopt, n, edge_prob, root);
  BenchReport rep;
  rep.runs = runs;
  rep.bytes_min = SIZE_MAX;
  std::size_t bytes_total = 0;
  for (std::size_t i = 0; i < runs; ++i) {
    RunOptions opt;
    opt.on_timing = [&](MsgType t, double s) { rep.phase_seconds[msg_type_name(t)] += s / static_cast<double>(runs); };
    const auto t0 = std::chrono::steady_clock::now();
    auto res = prove_local(in, root, opt);
    rep.total_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() /
                         static_cast<double>(runs);
    rep.all_accepted = rep.all_accepted && res.verdict == Verdict::Accept;
    rep.messages = res.messages;
    bytes_total += res.bytes;
    rep.bytes_min = std::min(rep.bytes_min, res.bytes);
    rep.bytes_max = std::max(rep.bytes_max, res.bytes);
  }
  rep.bytes_mean = static_cast<double>(bytes_total) / static_cast<double>(runs);
  return rep;
}

// ---------------------------------------------------------------------------
// Quantum experiments

namespace detail {

inline Mat random_projector_mat(std::size_t n, Rng& rng) { return qsim::random_projector(n, 1 + rng.uniform(n - 1), rng); }

inline ToyTableParams qsim_toy(Rng& rng) { return toy_setup(1, 1, ToyClass::StrictBinding, rng); }

}  // namespace detail

// Worst exact success over the S_{≥t} part of a random projector pair,
// compared with the closed-form bound at t.
inline qsim::QsimReport qsim_amp(double t, std::size_t T, std::size_t dim, Rng& rng) {
  require(t > 0 && t <= 1, "qsim amp: --t must be in (0, 1]");
  require(T >= 1 && T <= 4096, "qsim amp: --T must be in [1, 4096]");
  require(dim >= 2 && dim <= 64, "qsim amp: --dim must be in [2, 64]");
  using namespace qsim;
  Projector pi0 = Projector::checked(detail::random_projector_mat(dim, rng));
  Projector pi1 = Projector::checked(detail::random_projector_mat(dim, rng));
  auto d = jordan_decompose(pi0, pi1);
  std::optional<double> worst;
  double worst_p = 0;
  std::size_t checked = 0;
  for (const auto& j : d.two) {
    if (j.p < t) continue;
    const double s = amp_success_probability(pi0, pi1, T, outer(j.alpha, j.alpha));
    ++checked;
    if (!worst || s < *worst) {
      worst = s;
      worst_p = j.p;
    }
  }
  for (const auto& j : d.one) {
    if (!(j.b && j.c)) continue;
    ++checked;
    if (!worst || 1.0 < *worst) {
      worst = 1.0;
      worst_p = 1.0;
    }
  }
  QsimReport r;
  r.fixture_id = "random-pair";
  r.dims = {{"space", dim}, {"rank_pi0", pi0.rank()}, {"rank_pi1", pi1.rank()}};
  r.t = t;
  r.T = static_cast<double>(T);
  r.bound = amp_success_lower_bound(t, static_cast<double>(T));
  r.success_prob = worst;
  r.pass = !worst || *worst >= *r.bound - 1e-9;
  r.details = {{"states_checked", checked},
               {"worst_overlap", quantize(worst_p)},
               {"uniform_bound", quantize(amp_success_uniform_bound(t, static_cast<double>(T)))},
               {"uniform_bound_holds", !worst || *worst >= amp_success_uniform_bound(t, static_cast<double>(T)) - 1e-9}};
  return r;
}

inline const std::vector<std::string>& extract_fixtures() {
  static const std::vector<std::string> v = {"random", "st-oblivious", "honest", "invalid", "superposition-abort"};
  return v;
}

inline qsim::QsimReport qsim_extract_adversary(const qsim::ToyAdversary& adv, const ToyTableParams& toy, double delta,
                                               const Vec* psi_na) {
  using namespace qsim;
  PublicParam pp{toy};
  auto rep = run_extraction_experiments(pp, adv, delta, ExtVariant::StatBinding);
  QsimReport r;
  r.fixture_id = adv.id;
  for (const auto& reg : adv.layout.registers()) r.dims.emplace_back(reg.name, reg.dim);
  r.t = rep.schedule.t;
  r.T = rep.schedule.T;
  r.delta = delta;
  r.td = rep.td;
  r.success_prob = rep.ext_success;
  r.bound = delta + 0.05;
  r.pass = rep.td <= *r.bound;
  r.details = {{"variant", variant_name(ExtVariant::StatBinding)}};
  if (psi_na) {
    const auto& b = adv.com.front();
    auto res = ext_apply(ext_kraus(toy, b.com, adv.open, adv.layout, ExtVariant::StatBinding, rep.schedule), b.rho_st);
    Mat post = Mat::Zero(b.rho_st.rows(), b.rho_st.cols());
    for (const auto& [_, part] : res.by_message) post += part;
    const double fid = res.success() > 0 ? fidelity_pure(*psi_na, post / res.success()) : 0.0;
    r.details["fidelity_psi_na"] = quantize(fid);
    r.pass = r.pass && fid >= 0.99;
  }
  return r;
}

inline qsim::QsimReport qsim_extract(const std::string& fixture, double delta, std::size_t st_dim, Rng& rng) {
  using namespace qsim;
  require(delta >= kExtMinDelta && delta <= 1, "qsim extract: --delta must be in [2^-10, 1]");
  require(st_dim >= 2 && st_dim <= 8, "qsim extract: --dim (ST dimension) must be in [2, 8]");
  auto toy = detail::qsim_toy(rng);
  const std::uint32_t com = toy.at(0, 0);
  if (fixture == "random") return qsim_extract_adversary(random_adversary(fixture, toy, rng), toy, delta, nullptr);
  if (fixture == "st-oblivious")
    return qsim_extract_adversary(st_oblivious_adversary(fixture, toy, rng), toy, delta, nullptr);
  if (fixture == "honest")
    return qsim_extract_adversary(honest_adversary(fixture, toy, 0, com, random_density(st_dim, 2, rng)), toy, delta,
                                  nullptr);
  if (fixture == "invalid")
    return qsim_extract_adversary(invalid_adversary(fixture, toy, com, random_density(st_dim, 2, rng)), toy, delta,
                                  nullptr);
  if (fixture == "superposition-abort") {
    Vec psi_na;
    auto adv = superposition_abort_adversary(fixture, toy, 0, com, st_dim, rng, &psi_na);
    return qsim_extract_adversary(adv, toy, delta, &psi_na);
  }
  auto [adv, file_toy] = adversary_from_json(read_json_file(fixture));
  return qsim_extract_adversary(adv, file_toy, delta, nullptr);
}

inline qsim::QsimReport qsim_rewind(const std::string& fixture, std::size_t T, std::size_t d_in, double spread,
                                    Rng& rng) {
  using namespace qsim;
  require(T >= 1 && T <= 4096, "qsim rewind: --T must be in [1, 4096]");
  require(d_in >= 1 && d_in <= 16, "qsim rewind: --dim must be in [1, 16]");
  require(fixture == "half" || fixture == "controlled", "qsim rewind: --fixture must be half or controlled");
  const std::size_t d_w = 2;
  RewindFixture f = fixture == "half" ? rewind_fixture_half(d_in, d_w, rng)
                                      : rewind_fixture_controlled(fixture, d_in, d_w, 0.5, spread, rng);
  auto good = f.circuit.good_kraus();
  auto [lo, hi] = success_range(good);
  auto prem = rewind_premises(lo, hi, T);
  auto out = watrous_rewind_kraus(good, T, random_density(d_in, d_in, rng));
  QsimReport r;
  r.fixture_id = f.id;
  r.dims = {{"inp", d_in}, {"w", d_w}};
  r.T = static_cast<double>(T);
  r.td = out.td;
  r.success_prob = out.p_rho;
  r.details = {{"p_min", quantize(lo)}, {"p_max", quantize(hi)}, {"premises_satisfied", prem.satisfied}};
  if (prem.satisfied) {
    r.bound = prem.bound;
    r.details["gamma"] = quantize(prem.gamma);
    r.details["p0"] = quantize(prem.p0);
    r.pass = out.td <= prem.bound;
  } else {
    r.details["violation"] = prem.violation;
    r.pass = false;
  }
  return r;
}

inline qsim::QsimReport qsim_simulate(const std::string& fixture, double epsilon, double lambda, std::size_t k,
                                      Rng& rng) {
  using namespace qsim;
  std::optional<GkFixture> kind = parse_gk_fixture(fixture);
  GkFixtureExtra extra;
  MiniVerifier v = kind ? make_gk_fixture(*kind, k, rng, &extra) : verifier_from_json(read_json_file(fixture));
  auto rep = mini_gk_sim(v, epsilon, lambda);
  QsimReport r;
  r.fixture_id = rep.fixture_id;
  r.dims = {{"v", rep.dim_v}, {"ext", rep.ext_dim}};
  r.t = rep.params.t;
  r.T = rep.params.T_amp;
  r.delta = rep.params.delta;
  r.epsilon = epsilon;
  r.td = rep.td;
  r.success_prob = rep.p_comb;
  r.bound = epsilon;
  r.pass = rep.pass;
  r.details = {{"lambda", lambda},
               {"T_rewind", rep.params.T_rewind},
               {"budget", quantize(rep.params.budget)},
               {"td_sim_comb", quantize(rep.td_comb)},
               {"fail_prob_gap", quantize(std::abs(rep.p_comb - 0.5))},
               {"fail_prob_tolerance", quantize(rep.params.delta / 2 + 0.02)},
               {"rewind_bound_fitted", rep.premises.satisfied ? json(quantize(rep.premises.bound)) : json(nullptr)},
               {"rewind_bound_gamma_delta", quantize(rep.nominal_bound)}};
  if (kind == GkFixture::SuperpositionAbort) {
    const double fid = sim_na_post_extraction_fidelity(v, extra.psi_na, {rep.params.t, rep.params.T_amp});
    r.details["fidelity_psi_na"] = quantize(fid);
    r.pass = r.pass && fid >= 0.99;
  }
  return r;
}

}  // namespace ezk::cli
