#pragma once

// Committed-message extraction from a toy quantum adversary, and the exact
// real/extracted experiment ensembles.
//
// The adversary opens through a unitary U_open on ST ⊗ W ⊗ M ⊗ R ⊗ Out
// (Y = W ⊗ M ⊗ R ⊗ Out starts in |0⟩). Ext only ever applies U_open and
// U_open† through a UnitaryOracle.
//
// Ext with outcome ℓ acts on ST as the Kraus operator
//   A_ℓ = V₀† Π₀ [Σ_branches K† Q_ℓ K] Π₀ V₀,   Q_ℓ = U_open† P_ℓ U_open,
// where K runs over the successful amplification branches and P_ℓ projects M
// (stat-binding) or (M, R) (strong-cb) onto ℓ. amp_sandwich evaluates the
// bracket for astronomically large T.

#include <cstdio>
#include <optional>

#include "ezk/commit.hpp"
#include "ezk/qsim/amp.hpp"

namespace ezk::qsim {

inline const std::vector<std::string> kAdversaryRegisters = {"ST", "W", "M", "R", "Out"};

inline void require_adversary_layout(const RegisterLayout& L, const ToyTableParams& pp) {
  require(L.registers().size() == kAdversaryRegisters.size(), "adversary layout: expected ST, W, M, R, Out");
  for (std::size_t i = 0; i < kAdversaryRegisters.size(); ++i)
    require(L.registers()[i].name == kAdversaryRegisters[i], "adversary layout: expected ST, W, M, R, Out");
  require(L.dim("M") == pp.num_m() && L.dim("R") == pp.num_r(), "adversary layout: M/R do not match the toy table");
}

// Π^{pp,com} = U_open† Π_test U_open with Π_test the valid-opening projector.
inline Projector build_open_projector(const ToyTableParams& pp, std::uint32_t com, const UnitaryOracle& U,
                                      const RegisterLayout& L) {
  require_adversary_layout(L, pp);
  require(U.dim() == L.total(), "build_open_projector: oracle dimension mismatch");
  Mat test = Mat::Zero(static_cast<Eigen::Index>(L.total()), static_cast<Eigen::Index>(L.total()));
  for (std::uint32_t m = 0; m < pp.num_m(); ++m)
    for (std::uint32_t r = 0; r < pp.num_r(); ++r)
      if (pp.at(m, r) == com) test += L.basis_projector({{"M", m}, {"R", r}});
  Mat u = U.apply(identity(L.total()));
  return Projector::checked(hermitian_part(U.apply_adjoint(Mat(test * u))), 1e-9);
}

// ---------------------------------------------------------------------------
// Adversaries

struct ComBranch {
  double prob = 1;
  std::uint32_t com = 0;
  Mat rho_st;  // normalized state on ST
};

struct ToyAdversary {
  std::string id;
  RegisterLayout layout;
  std::vector<ComBranch> com;  // A_com: classical commitment and ST state
  UnitaryOracle open;          // A_open

  void validate(const ToyTableParams& pp) const {
    require_adversary_layout(layout, pp);
    require(open.dim() == layout.total(), "ToyAdversary: oracle dimension mismatch");
    double total = 0;
    for (const auto& b : com) {
      require(b.prob >= 0, "ToyAdversary: negative branch probability");
      require(static_cast<std::size_t>(b.rho_st.rows()) == layout.dim("ST"), "ToyAdversary: ST state has wrong dim");
      DensityMatrix::checked(b.rho_st);
      total += b.prob;
    }
    require(std::abs(total - 1) <= 1e-9, "ToyAdversary: branch probabilities do not sum to 1");
  }
};

enum class ExtVariant { StrongCb, StatBinding };

inline const char* variant_name(ExtVariant v) { return v == ExtVariant::StrongCb ? "strong-cb" : "stat-binding"; }

struct ExtSchedule {
  double t = 0;
  double T = 1;
};

inline constexpr double kExtAmpError = 0x1p-20;
inline constexpr double kExtMinDelta = 0x1p-10;

inline ExtSchedule ext_schedule(double delta, double eps_amp = kExtAmpError) {
  require(delta > 0 && delta <= 1, "ext_schedule: delta outside (0, 1]");
  const double t = delta * delta * delta / 64;
  return {t, amp_iterations(t, eps_amp)};
}

struct ExtOutcome {
  std::uint32_t m = 0;
  std::optional<std::uint32_t> r;  // set for strong-cb
  Mat A;                           // Kraus operator on ST
};

namespace detail {

struct ExtSetup {
  Projector pi0, pi;
  Mat v0;  // ST → full space, Y = 0
  Mat u;   // dense U_open, reconstructed through the oracle
};

inline ExtSetup ext_setup(const ToyTableParams& pp, std::uint32_t com, const UnitaryOracle& U, const RegisterLayout& L) {
  require_adversary_layout(L, pp);
  if (L.total() > kJordanMaxDim) throw Unsupported("Ext: layout exceeds 2^12 dimensions");
  Projector pi = build_open_projector(pp, com, U, L);
  return {Projector{L.zero_projector({"W", "M", "R", "Out"})}, std::move(pi), L.zero_isometry({"ST"}),
          U.apply(identity(L.total()))};
}

// Outcome labels and their projectors P_ℓ in the opened frame.
inline std::vector<std::pair<std::pair<std::uint32_t, std::optional<std::uint32_t>>, Mat>> ext_measurements(
    const ToyTableParams& pp, const RegisterLayout& L, ExtVariant variant) {
  std::vector<std::pair<std::pair<std::uint32_t, std::optional<std::uint32_t>>, Mat>> out;
  for (std::uint32_t m = 0; m < pp.num_m(); ++m) {
    if (variant == ExtVariant::StatBinding) {
      out.push_back({{m, std::nullopt}, L.basis_projector({{"M", m}})});
      continue;
    }
    for (std::uint32_t r = 0; r < pp.num_r(); ++r) out.push_back({{m, r}, L.basis_projector({{"M", m}, {"R", r}})});
  }
  return out;
}

}  // namespace detail

// Kraus operators of Ext for one commitment under an explicit schedule. This
// entry point has no lower limit on δ; ext_run enforces it.
inline std::vector<ExtOutcome> ext_kraus(const ToyTableParams& pp, std::uint32_t com, const UnitaryOracle& U,
                                         const RegisterLayout& L, ExtVariant variant, const ExtSchedule& s) {
  auto setup = detail::ext_setup(pp, com, U, L);
  auto d = jordan_decompose(setup.pi0, setup.pi);
  std::vector<ExtOutcome> out;
  for (const auto& [label, P] : detail::ext_measurements(pp, L, variant)) {
    Mat Q = setup.u.adjoint() * P * setup.u;
    Mat A = setup.v0.adjoint() * amp_sandwich(d, Q, s.T) * setup.v0;
    out.push_back({label.first, label.second, std::move(A)});
  }
  return out;
}

// The same operators computed step by step on the purified register
// (U_amp, measure B, U_open, measure, U_open†, U_amp†, check zeros). Only
// feasible for T small enough for AmpUnitary.
inline std::vector<ExtOutcome> ext_kraus_literal(const ToyTableParams& pp, std::uint32_t com, const UnitaryOracle& U,
                                                 const RegisterLayout& L, ExtVariant variant, std::size_t T) {
  auto setup = detail::ext_setup(pp, com, U, L);
  AmpUnitary amp(setup.pi0, setup.pi, T);
  const auto st = static_cast<Eigen::Index>(L.dim("ST"));
  std::vector<ExtOutcome> out;
  for (const auto& [label, P] : detail::ext_measurements(pp, L, variant)) {
    Mat A(st, st);
    for (Eigen::Index c = 0; c < st; ++c) {
      Vec v = amp.apply(amp.embed(setup.v0.col(c)));
      Vec w = Vec::Zero(v.size());
      for (std::uint64_t anc = 0; anc < amp.anc_count(); ++anc) {
        Vec s = amp.slice(v, 1, anc);
        amp.set_slice(w, 1, anc, U.apply_adjoint(Vec(P * U.apply(s))));
      }
      A.col(c) = setup.v0.adjoint() * amp.slice(amp.apply_adjoint(w), 0, 0);
    }
    out.push_back({label.first, label.second, std::move(A)});
  }
  return out;
}

// Unnormalized post-extraction states per extracted message, plus ⊥ mass.
struct ExtDistribution {
  std::map<std::uint32_t, Mat> by_message;
  double bottom = 0;

  double success() const {
    double s = 0;
    for (const auto& [_, r] : by_message) s += real_trace(r);
    return s;
  }
};

inline ExtDistribution ext_apply(const std::vector<ExtOutcome>& ops, const Mat& rho) {
  ExtDistribution d;
  for (const auto& o : ops) {
    Mat part = o.A * rho * o.A.adjoint();
    auto [it, fresh] = d.by_message.emplace(o.m, part);
    if (!fresh) it->second += part;
  }
  d.bottom = std::max(0.0, real_trace(rho) - d.success());
  return d;
}

struct ExtRunResult {
  std::optional<std::uint32_t> m;  // nullopt means ⊥
  Mat rho_ext;                     // normalized; empty on ⊥
  ExtDistribution exact;
};

// Samples one Ext execution from its exact outcome distribution.
inline ExtRunResult ext_run(const PublicParam& pp, std::uint32_t com, const ToyAdversary& adv, const Mat& rho_st,
                            double delta, ExtVariant variant, Rng& rng) {
  require(pp.scheme() == SchemeId::ToyTable, "ext_run: needs a toy-table commitment");
  require(delta >= kExtMinDelta && delta <= 1, "ext_run: delta must lie in [2^-10, 1]");
  adv.validate(pp.toy());
  DensityMatrix::checked(rho_st);
  ExtRunResult res;
  res.exact = ext_apply(ext_kraus(pp.toy(), com, adv.open, adv.layout, variant, ext_schedule(delta)), rho_st);
  double u = rng.real() * real_trace(rho_st);
  for (const auto& [m, part] : res.exact.by_message) {
    const double p = real_trace(part);
    if (u < p && p > 0) {
      res.m = m;
      res.rho_ext = part / p;
      return res;
    }
    u -= p;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Extraction experiments as exact classical-quantum ensembles.

struct CqEnsemble {
  std::map<std::string, Mat> parts;  // key "com=..|m=..|r=..|out=.." → unnormalized ST state
  double bottom = 0;

  void add(const std::string& key, const Mat& m) {
    auto [it, fresh] = parts.emplace(key, m);
    if (!fresh) it->second += m;
  }
  double mass() const {
    double s = bottom;
    for (const auto& [_, m] : parts) s += real_trace(m);
    return s;
  }
};

inline double trace_distance(const CqEnsemble& a, const CqEnsemble& b) {
  double td = std::abs(a.bottom - b.bottom) / 2;
  for (const auto& [k, m] : a.parts) {
    auto it = b.parts.find(k);
    td += it == b.parts.end() ? trace_norm(m) / 2 : trace_distance(m, it->second);
  }
  for (const auto& [k, m] : b.parts)
    if (!a.parts.count(k)) td += trace_norm(m) / 2;
  return td;
}

inline std::string cq_key(std::uint32_t com, std::uint32_t m, std::uint32_t r, std::size_t out) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "com=%u|m=%u|r=%u|out=%zu", com, m, r, out);
  return buf;
}

namespace detail {

// Runs A_open on ρ_st ⊗ |0⟩⟨0|_Y and records valid openings; with
// `only_m` set, openings to other messages count as ⊥.
inline void open_into(const ToyTableParams& pp, const ToyAdversary& adv, std::uint32_t com, const Mat& rho_st,
                      std::optional<std::uint32_t> only_m, CqEnsemble& out) {
  const auto& L = adv.layout;
  Mat v0 = L.zero_isometry({"ST"});
  Mat u = adv.open.apply(v0);  // U V₀
  Mat sigma = u * rho_st * u.adjoint();
  double valid = 0;
  for (std::uint32_t m = 0; m < pp.num_m(); ++m) {
    if (only_m && *only_m != m) continue;
    for (std::uint32_t r = 0; r < pp.num_r(); ++r) {
      if (pp.at(m, r) != com) continue;
      for (std::size_t o = 0; o < L.dim("Out"); ++o) {
        Mat part = L.reduce(sigma, {{"M", m}, {"R", r}, {"Out", o}}, {"ST"});
        valid += real_trace(part);
        out.add(cq_key(com, m, r, o), part);
      }
    }
  }
  out.bottom += std::max(0.0, real_trace(rho_st) - valid);
}

}  // namespace detail

struct ExtractionReport {
  CqEnsemble real, ext;
  double td = 0;
  double ext_success = 0;  // Pr[Ext ≠ ⊥]
  ExtSchedule schedule;
};

inline ExtractionReport run_extraction_experiments(const PublicParam& pp, const ToyAdversary& adv, double delta,
                                                   ExtVariant variant = ExtVariant::StatBinding) {
  require(pp.scheme() == SchemeId::ToyTable, "extraction experiments: need a toy-table commitment");
  require(is_binding_pp(pp), "extraction experiments: pp is not binding");
  const auto& toy = pp.toy();
  adv.validate(toy);
  ExtractionReport rep;
  rep.schedule = ext_schedule(delta);
  for (const auto& b : adv.com) {
    if (b.prob == 0) continue;
    Mat rho = b.prob * b.rho_st;
    detail::open_into(toy, adv, b.com, rho, std::nullopt, rep.real);
    auto ext = ext_apply(ext_kraus(toy, b.com, adv.open, adv.layout, variant, rep.schedule), rho);
    rep.ext.bottom += ext.bottom;
    rep.ext_success += ext.success();
    for (const auto& [m, part] : ext.by_message) detail::open_into(toy, adv, b.com, part, m, rep.ext);
  }
  rep.td = trace_distance(rep.real, rep.ext);
  return rep;
}

// ---------------------------------------------------------------------------
// Adversary fixtures (ST ⊗ W2 ⊗ M ⊗ R ⊗ Out2).

inline RegisterLayout adversary_layout(const ToyTableParams& pp, std::size_t st = 2) {
  return RegisterLayout({{"ST", st}, {"W", 2}, {"M", pp.num_m()}, {"R", pp.num_r()}, {"Out", 2}});
}

namespace detail {

// Householder reflection sending |0⟩ to ψ (up to the phase of ψ₀).
inline Mat unitary_from_zero(const Vec& psi) {
  Vec target = psi / psi.norm();
  const Complex p0 = target(0);
  if (std::abs(p0) > 0) target *= std::conj(p0) / std::abs(p0);
  Vec u = basis_vector(static_cast<std::size_t>(target.size()), 0) - target;
  if (u.norm() < 1e-14) return identity(static_cast<std::size_t>(target.size()));
  return identity(static_cast<std::size_t>(target.size())) - 2.0 * outer(u, u) / u.squaredNorm();
}

inline std::vector<ComBranch> random_com_branches(const ToyTableParams& pp, std::size_t st, Rng& rng) {
  std::vector<ComBranch> out;
  const double q = 0.2 + 0.6 * rng.real();
  for (double p : {q, 1 - q}) {
    const auto com = pp.table[rng.uniform(pp.table.size())];
    out.push_back({p, com, random_density(st, st, rng)});
  }
  return out;
}

}  // namespace detail

inline ToyAdversary random_adversary(const std::string& id, const ToyTableParams& pp, Rng& rng) {
  RegisterLayout L = adversary_layout(pp);
  auto branches = detail::random_com_branches(pp, 2, rng);
  return {id, L, std::move(branches), UnitaryOracle::dense(haar_unitary(L.total(), rng))};
}

// A_open = I_ST ⊗ U_Y with U_Y Haar on Y.
inline ToyAdversary st_oblivious_adversary(const std::string& id, const ToyTableParams& pp, Rng& rng) {
  RegisterLayout L = adversary_layout(pp);
  auto branches = detail::random_com_branches(pp, 2, rng);
  Mat uy = haar_unitary(L.total() / 2, rng);
  return {id, L, std::move(branches), UnitaryOracle::dense(kron(identity(2), uy))};
}

// A_open ignores ST and writes a uniform superposition of the valid openings
// of `m` for `com` into (M, R), with W and Out left at |0⟩.
inline ToyAdversary honest_adversary(const std::string& id, const ToyTableParams& pp, std::uint32_t m,
                                     std::uint32_t com, const Mat& rho_st) {
  RegisterLayout L = adversary_layout(pp, static_cast<std::size_t>(rho_st.rows()));
  RegisterLayout Y({{"W", 2}, {"M", pp.num_m()}, {"R", pp.num_r()}, {"Out", 2}});
  Vec psi = Vec::Zero(static_cast<Eigen::Index>(Y.total()));
  for (std::uint32_t r = 0; r < pp.num_r(); ++r)
    if (pp.at(m, r) == com) psi(static_cast<Eigen::Index>(Y.compose({0, m, r, 0}))) = 1.0;
  require(psi.norm() > 0, "honest_adversary: message has no opening to com");
  Mat u = kron(identity(static_cast<std::size_t>(rho_st.rows())), detail::unitary_from_zero(psi));
  return {id, L, {{1.0, com, rho_st}}, UnitaryOracle::dense(std::move(u))};
}

// A_open writes an opening that never matches `com`.
inline ToyAdversary invalid_adversary(const std::string& id, const ToyTableParams& pp, std::uint32_t com,
                                      const Mat& rho_st) {
  RegisterLayout L = adversary_layout(pp, static_cast<std::size_t>(rho_st.rows()));
  RegisterLayout Y({{"W", 2}, {"M", pp.num_m()}, {"R", pp.num_r()}, {"Out", 2}});
  std::optional<std::size_t> bad;
  for (std::uint32_t m = 0; m < pp.num_m() && !bad; ++m)
    for (std::uint32_t r = 0; r < pp.num_r() && !bad; ++r)
      if (pp.at(m, r) != com) bad = Y.compose({0, m, r, 0});
  require(bad.has_value(), "invalid_adversary: every opening matches com");
  Mat u = kron(identity(static_cast<std::size_t>(rho_st.rows())),
               detail::unitary_from_zero(basis_vector(Y.total(), *bad)));
  return {id, L, {{1.0, com, rho_st}}, UnitaryOracle::dense(std::move(u))};
}

// ST = span{ψ_a, ψ_na} ⊕ rest. A_open opens `m` validly exactly on the ψ_na
// component and invalidly on its complement, then scrambles ST ⊗ W ⊗ Out.
// Conditioned on extraction succeeding, ST must collapse to ψ_na.
inline ToyAdversary superposition_abort_adversary(const std::string& id, const ToyTableParams& pp, std::uint32_t m,
                                                  std::uint32_t com, std::size_t st, Rng& rng, Vec* psi_na_out) {
  require(st >= 2, "superposition_abort_adversary: ST needs two dimensions");
  RegisterLayout L = adversary_layout(pp, st);
  Mat basis = haar_unitary(st, rng);
  Vec psi_a = basis.col(0), psi_na = basis.col(1);
  if (psi_na_out) *psi_na_out = psi_na;

  RegisterLayout Y({{"W", 2}, {"M", pp.num_m()}, {"R", pp.num_r()}, {"Out", 2}});
  std::optional<std::size_t> good, bad;
  for (std::uint32_t r = 0; r < pp.num_r() && !good; ++r)
    if (pp.at(m, r) == com) good = Y.compose({0, m, r, 0});
  for (std::uint32_t mm = 0; mm < pp.num_m() && !bad; ++mm)
    for (std::uint32_t r = 0; r < pp.num_r() && !bad; ++r)
      if (pp.at(mm, r) != com) bad = Y.compose({0, mm, r, 0});
  require(good && bad, "superposition_abort_adversary: table lacks a valid or an invalid opening");

  Mat p_na = outer(psi_na, psi_na);
  Mat write = kron(p_na, detail::unitary_from_zero(basis_vector(Y.total(), *good))) +
              kron(identity(st) - p_na, detail::unitary_from_zero(basis_vector(Y.total(), *bad)));
  // Scramble ST ⊗ W ⊗ Out without touching M, R.
  RegisterLayout S({{"ST", st}, {"W", 2}, {"Out", 2}});
  Mat h = haar_unitary(S.total(), rng);
  const auto n = static_cast<Eigen::Index>(L.total());
  Mat scramble = Mat::Zero(n, n);
  for (std::size_t i = 0; i < L.total(); ++i) {
    const auto d = L.digits(i);
    for (std::size_t a = 0; a < S.total(); ++a) {
      const auto e = S.digits(a);
      const std::size_t j = L.compose({e[0], e[1], d[2], d[3], e[2]});
      const std::size_t col = S.compose({d[0], d[1], d[4]});
      scramble(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(col));
    }
  }
  Vec start = (psi_a + psi_na) / std::sqrt(2.0);
  return {id, L, {{1.0, com, outer(start, start)}}, UnitaryOracle::dense(scramble * write)};
}

}  // namespace ezk::qsim
