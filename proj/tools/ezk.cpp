// ezk: instance generation, proving/verifying over local or TCP transports,
// quantum experiments and benchmarks.
//
// Exit codes: 0 accept/pass, 1 reject/fail, 2 bad flags or inputs.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "ezk/cli.hpp"

namespace {

using namespace ezk;
using ezk::cli::json;

struct Flags {
  std::optional<std::uint64_t> seed;
  bool json = false;
  std::string mode = "proof";
  std::uint32_t lambda = 16;
  std::optional<std::uint32_t> reps, challenge_bits;
  std::string transport = "local";
  std::string listen = "127.0.0.1:7878", connect = "127.0.0.1:7878";
  double epsilon = 0.2;
  std::optional<double> delta, t, spread;
  std::optional<std::size_t> T, dim;
  std::optional<std::string> fixture;
  std::optional<std::string> transcript, instance, out;
  std::string prg = "xof";
  int n = 5;
  double edge_prob = 0.3;
  bool non_member = false;
  std::size_t sessions = 0, runs = 10;
};

void emit(const Flags& f, const json& j, const std::string& text) {
  if (f.json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << text << "\n";
}

ProtocolConfig protocol_config(const Flags& f) {
  ProtocolConfig cfg = ProtocolConfig::for_mode(f.mode == "proof" ? Mode::Proof : Mode::Argument);
  cfg.lambda = f.lambda;
  if (f.reps && f.challenge_bits && *f.reps != *f.challenge_bits)
    throw InvalidArgument("--reps and --challenge-bits disagree");
  if (f.reps) cfg.reps = *f.reps;
  if (f.challenge_bits) cfg.reps = *f.challenge_bits;
  cfg.prg = f.prg == "linear" ? PrgMode::LinearToy : PrgMode::Xof;
  cfg.lint();
  return cfg;
}

std::optional<GeneratedInstance> instance_file(const Flags& f) {
  if (!f.instance) return std::nullopt;
  return graph_from_json(qsim::read_json_file(*f.instance));
}

int report_run(const Flags& f, Verdict v, const Transcript& t, std::size_t messages, std::size_t bytes) {
  if (f.transcript) cli::write_file(*f.transcript, t.encode());
  emit(f, cli::run_summary(v, t, messages, bytes),
       std::string(verdict_name(v)) + " (" + std::to_string(messages) + " messages, " + std::to_string(bytes) +
           " bytes)");
  return v == Verdict::Accept ? cli::kExitAccept : cli::kExitReject;
}

int cmd_instance_gen(const Flags& f) {
  Rng rng(cli::resolve_seed(f.seed, std::getenv("EZK_SEED")));
  auto g = instance_gen(f.n, f.edge_prob, !f.non_member, rng);
  const std::string text = graph_to_json(g.x, g.witness).dump() + "\n";
  if (f.out) {
    cli::write_file(*f.out, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    emit(f, {{"written", *f.out}, {"member", g.witness.has_value()}}, "wrote " + *f.out);
  } else {
    std::cout << text;
  }
  return cli::kExitAccept;
}

int cmd_prove(const Flags& f) {
  Rng root(cli::resolve_seed(f.seed, std::getenv("EZK_SEED")));
  auto in = cli::prepare_run(protocol_config(f), instance_file(f), f.n, f.edge_prob, root);
  if (!in.inst.witness && in.inst.x.n <= 20 && !find_hamiltonian_cycle(in.inst.x)) {
    emit(f, {{"verdict", "Reject"}, {"error", "prover has no witness"}}, "Reject (prover has no witness)");
    return cli::kExitReject;
  }
  if (f.transport == "local") {
    auto res = cli::prove_local(in, root);
    return report_run(f, res.verdict, res.transcript, res.messages, res.bytes);
  }
  Rng proto = root.split();
  FrameChannel ch(tcp_connect(Endpoint::parse(f.connect)));
  Transcript t;
  const Verdict v = prove_over(ch, in.cfg, in.inst.x, resolve_witness(in.inst.x, in.inst.witness), proto, &t);
  return report_run(f, v, t, logical_message_count(t.frames), cli::wire_bytes(t));
}

int cmd_verify(const Flags& f) {
  if (!f.transcript) throw InvalidArgument("verify needs --transcript");
  auto out = cli::verify_transcript_bytes(cli::read_file(*f.transcript));
  json j = {{"verdict", verdict_name(out.verdict)}};
  if (!out.error.empty()) j["error"] = out.error;
  if (out.transcript) j["messages"] = logical_message_count(out.transcript->frames);
  emit(f, j, std::string(verdict_name(out.verdict)) + (out.error.empty() ? "" : " (" + out.error + ")"));
  return out.verdict == Verdict::Accept ? cli::kExitAccept : cli::kExitReject;
}

int cmd_serve(const Flags& f) {
  const auto ep = Endpoint::parse(f.listen);
  TcpServer server(ep, seed_from_u64(cli::resolve_seed(f.seed, std::getenv("EZK_SEED"))));
  std::cerr << "listening on " << ep.host << ":" << server.port() << "\n";
  bool ok = true;
  for (const auto& s : server.run(f.sessions)) {
    ok = ok && s.error.empty() && s.verdict == Verdict::Accept;
    json j = {{"verdict", verdict_name(s.verdict)}, {"messages", logical_message_count(s.transcript.frames)}};
    if (!s.error.empty()) j["error"] = s.error;
    if (f.json)
      std::cout << j.dump() << "\n";
    else
      std::cout << verdict_name(s.verdict) << (s.error.empty() ? "" : " (" + s.error + ")") << "\n";
  }
  return ok ? cli::kExitAccept : cli::kExitReject;
}

int cmd_bench(const Flags& f) {
  Rng root(cli::resolve_seed(f.seed, std::getenv("EZK_SEED")));
  const auto cfg = protocol_config(f);
  auto rep = cli::bench_run(cfg, f.n, f.edge_prob, f.runs, root);
  std::string text = std::to_string(rep.messages) + " messages, " + std::to_string(rep.bytes_mean) + " bytes mean, " +
                     std::to_string(rep.total_seconds) + " s mean over " + std::to_string(rep.runs) + " runs";
  emit(f, rep.to_json(cfg, f.n), text);
  return rep.all_accepted ? cli::kExitAccept : cli::kExitReject;
}

int emit_report(const Flags& f, const qsim::QsimReport& r) {
  const json j = r.to_json();
  std::string text = r.fixture_id + ": pass=" + (r.pass ? "true" : "false");
  for (const char* k : {"success_prob", "td", "bound"})
    if (!j["measured"][k].is_null()) text += std::string(" ") + k + "=" + j["measured"][k].dump();
  emit(f, j, text);
  return r.pass ? cli::kExitAccept : cli::kExitReject;
}

Rng qsim_rng(const Flags& f) { return Rng(cli::resolve_seed(f.seed, std::getenv("EZK_SEED"))); }

int cmd_qsim_amp(const Flags& f) {
  Rng rng = qsim_rng(f);
  return emit_report(f, cli::qsim_amp(f.t.value_or(0.25), f.T.value_or(3), f.dim.value_or(8), rng));
}

int cmd_qsim_extract(const Flags& f) {
  Rng rng = qsim_rng(f);
  return emit_report(f, cli::qsim_extract(f.fixture.value_or("random"), f.delta.value_or(0.3), f.dim.value_or(2), rng));
}

int cmd_qsim_rewind(const Flags& f) {
  Rng rng = qsim_rng(f);
  return emit_report(f, cli::qsim_rewind(f.fixture.value_or("half"), f.T.value_or(40), f.dim.value_or(4),
                                         f.spread.value_or(1e-5), rng));
}

int cmd_qsim_simulate(const Flags& f) {
  Rng rng = qsim_rng(f);
  const std::size_t k = f.challenge_bits.value_or(1);
  if (k < 1 || k > 2) throw InvalidArgument("qsim simulate: --challenge-bits must be 1 or 2");
  return emit_report(f, cli::qsim_simulate(f.fixture.value_or("honest"), f.epsilon, f.lambda, k, rng));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ezk: epsilon zero-knowledge protocols and quantum simulation experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;

  app.add_option("--seed", f.seed, "RNG seed (overrides EZK_SEED; default 0)");
  app.add_flag("--json", f.json, "machine-readable JSON on stdout");
  app.add_option("--mode", f.mode, "proof (Protocol 1) or argument (Protocol 2)")
      ->check(CLI::IsMember({"proof", "argument"}));
  app.add_option("--lambda", f.lambda, "commitment security parameter (qsim simulate: λ of the δ schedule)");
  app.add_option("--reps", f.reps, "parallel repetitions λ_reps");
  app.add_option("--challenge-bits", f.challenge_bits,
                 "challenge length (protocols: same as --reps; qsim simulate: toy k)");
  app.add_option("--transport", f.transport, "local or tcp")->check(CLI::IsMember({"local", "tcp"}));
  app.add_option("--listen", f.listen, "serve address host:port");
  app.add_option("--connect", f.connect, "verifier address host:port");
  app.add_option("--epsilon", f.epsilon, "simulation error target ε")->check(CLI::Range(1e-6, 1.0));
  app.add_option("--delta", f.delta, "extraction parameter δ");
  app.add_option("--t", f.t, "amplification threshold t");
  app.add_option("--T", f.T, "iteration count");
  app.add_option("--dim", f.dim, "experiment dimension");
  app.add_option("--fixture", f.fixture, "built-in fixture name or JSON fixture file");
  app.add_option("--transcript", f.transcript, "transcript file (written by prove, read by verify)");
  app.add_option("--prg", f.prg, "PRG for Naor commitments: linear or xof")->check(CLI::IsMember({"linear", "xof"}));
  app.add_option("--instance", f.instance, "graph JSON file");
  app.add_option("--n", f.n, "vertex count for generated instances")->check(CLI::Range(3, 64));
  app.add_option("--edge-prob", f.edge_prob, "extra edge probability for generated instances")
      ->check(CLI::Range(0.0, 1.0));
  app.add_flag("--non-member", f.non_member, "generate a certified non-Hamiltonian instance");
  app.add_option("--out", f.out, "output file");
  app.add_option("--sessions", f.sessions, "serve: sessions to handle before exiting (0 = forever)");
  app.add_option("--runs", f.runs, "bench: runs to average")->check(CLI::Range(1, 100000));
  app.add_option("--spread", f.spread, "qsim rewind: success-probability spread of the controlled fixture");

  std::function<int()> action;
  auto* instance = app.add_subcommand("instance", "instance tools");
  instance->require_subcommand(1);
  instance->add_subcommand("gen", "generate a graph instance")->callback([&] { action = [&] { return cmd_instance_gen(f); }; });
  app.add_subcommand("prove", "run the prover")->callback([&] { action = [&] { return cmd_prove(f); }; });
  app.add_subcommand("verify", "re-verify a stored transcript")->callback([&] { action = [&] { return cmd_verify(f); }; });
  app.add_subcommand("serve", "run a TCP verifier")->callback([&] { action = [&] { return cmd_serve(f); }; });
  app.add_subcommand("bench", "message, byte and timing report")->callback([&] { action = [&] { return cmd_bench(f); }; });
  auto* qsim = app.add_subcommand("qsim", "quantum experiments");
  qsim->require_subcommand(1);
  qsim->add_subcommand("amp", "amplification bound")->callback([&] { action = [&] { return cmd_qsim_amp(f); }; });
  qsim->add_subcommand("extract", "extraction experiments")->callback([&] { action = [&] { return cmd_qsim_extract(f); }; });
  qsim->add_subcommand("rewind", "rewinding lemma")->callback([&] { action = [&] { return cmd_qsim_rewind(f); }; });
  qsim->add_subcommand("simulate", "mini simulator vs real execution")
      ->callback([&] { action = [&] { return cmd_qsim_simulate(f); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return cli::kExitUsage;
  }

  try {
    return action();
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const Unsupported& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return cli::kExitReject;
  }
}
