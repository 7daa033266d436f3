#pragma once

// Miniature Protocol 1 against a quantum verifier, and its black-box
// simulator (Sim_a / Sim_na combined, then rewound).
//
// Σ is the pad protocol: a uniform in {0,1}^k, z = a ⊕ e. The verifier is
// given only as unitary oracles:
//   com      on V ⊗ C      (C holds the commitment value, measured)
//   open[a]  on V ⊗ E ⊗ R  (the opening (e, r), measured)
//   final[z] on V          (z = 2^k is the abort notice)
// Its output is the final state of V.

#include "ezk/qsim/extract.hpp"
#include "ezk/qsim/rewind.hpp"

namespace ezk::qsim {

struct MiniVerifier {
  std::string id;
  ToyTableParams pp;  // m_bits = k, r_bits = 1
  std::size_t dim_v = 1;
  Mat rho0;
  UnitaryOracle com;
  std::vector<UnitaryOracle> open;   // 2^k entries
  std::vector<UnitaryOracle> final;  // 2^k + 1 entries

  std::size_t num_a() const { return pp.num_m(); }
  std::size_t abort_notice() const { return pp.num_m(); }

  void validate() const {
    pp.validate();
    require(pp.m_bits <= 2 && pp.r_bits == 1, "MiniVerifier: needs k <= 2 and one randomness bit");
    require(static_cast<std::size_t>(rho0.rows()) == dim_v, "MiniVerifier: initial state has wrong dim");
    DensityMatrix::checked(rho0);
    require(std::abs(real_trace(rho0) - 1) <= 1e-9, "MiniVerifier: initial state not normalized");
    require(com.dim() == dim_v * (std::size_t{1} << pp.c_bits), "MiniVerifier: com oracle has wrong dim");
    require(open.size() == num_a() && final.size() == num_a() + 1, "MiniVerifier: wrong number of oracles");
    for (const auto& o : open) require(o.dim() == dim_v * pp.num_m() * 2, "MiniVerifier: open oracle has wrong dim");
    for (const auto& f : final) require(f.dim() == dim_v, "MiniVerifier: final oracle has wrong dim");
  }
};

// ---------------------------------------------------------------------------
// Kraus operators recovered through the oracles

namespace detail {

inline std::map<std::uint32_t, Mat> com_kraus(const MiniVerifier& v) {
  const std::size_t nc = std::size_t{1} << v.pp.c_bits;
  Mat u(static_cast<Eigen::Index>(v.dim_v * nc), static_cast<Eigen::Index>(v.dim_v));
  for (std::size_t x = 0; x < v.dim_v; ++x)
    u.col(static_cast<Eigen::Index>(x)) = v.com.apply(basis_vector(v.dim_v * nc, x * nc));
  std::map<std::uint32_t, Mat> out;
  for (std::size_t c = 0; c < nc; ++c) {
    Mat k(static_cast<Eigen::Index>(v.dim_v), static_cast<Eigen::Index>(v.dim_v));
    for (std::size_t y = 0; y < v.dim_v; ++y) k.row(static_cast<Eigen::Index>(y)) = u.row(static_cast<Eigen::Index>(y * nc + c));
    if (k.norm() > 1e-14) out.emplace(static_cast<std::uint32_t>(c), std::move(k));
  }
  return out;
}

// O_{a,e,r} = ⟨e, r| open[a] |·, 0, 0⟩.
inline std::map<std::pair<std::uint32_t, std::uint32_t>, Mat> open_kraus(const MiniVerifier& v, std::size_t a) {
  const std::size_t ne = v.pp.num_m(), blk = ne * 2;
  Mat u(static_cast<Eigen::Index>(v.dim_v * blk), static_cast<Eigen::Index>(v.dim_v));
  for (std::size_t x = 0; x < v.dim_v; ++x)
    u.col(static_cast<Eigen::Index>(x)) = v.open[a].apply(basis_vector(v.dim_v * blk, x * blk));
  std::map<std::pair<std::uint32_t, std::uint32_t>, Mat> out;
  for (std::uint32_t e = 0; e < ne; ++e)
    for (std::uint32_t r = 0; r < 2; ++r) {
      Mat k(static_cast<Eigen::Index>(v.dim_v), static_cast<Eigen::Index>(v.dim_v));
      for (std::size_t y = 0; y < v.dim_v; ++y)
        k.row(static_cast<Eigen::Index>(y)) = u.row(static_cast<Eigen::Index>(y * blk + e * 2 + r));
      out.emplace(std::make_pair(e, r), std::move(k));
    }
  return out;
}

inline Mat final_op(const MiniVerifier& v, std::size_t z) { return v.final[z].apply(identity(v.dim_v)); }

}  // namespace detail

// Exact output of the honest prover against the verifier.
inline Mat mini_gk_real(const MiniVerifier& v) {
  v.validate();
  const double pa = 1.0 / static_cast<double>(v.num_a());
  Mat out = Mat::Zero(static_cast<Eigen::Index>(v.dim_v), static_cast<Eigen::Index>(v.dim_v));
  auto coms = detail::com_kraus(v);
  for (std::size_t a = 0; a < v.num_a(); ++a) {
    auto opens = detail::open_kraus(v, a);
    for (const auto& [c, kc] : coms) {
      Mat st = kc * v.rho0 * kc.adjoint();
      for (const auto& [er, o] : opens) {
        const bool valid = v.pp.at(er.first, er.second) == c;
        Mat f = detail::final_op(v, valid ? (a ^ er.first) : v.abort_notice());
        Mat g = f * o;
        out += pa * g * st * g.adjoint();
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulator

// A_open for Ext: prepares a uniform a in Out, then applies open[a] to
// ST ⊗ M ⊗ R. Built from the verifier's oracles only.
inline UnitaryOracle sim_open_oracle(const MiniVerifier& v, const RegisterLayout& L) {
  const std::size_t na = v.num_a(), blk = L.total() / na;
  Mat prep = detail::unitary_from_zero(Vec::Ones(static_cast<Eigen::Index>(na)));
  auto apply = [opens = v.open, na, blk, prep](const Vec& x, bool adjoint) {
    Vec y = x;
    auto mix = [&](const Mat& m) {
      for (std::size_t b = 0; b < blk; ++b) y.segment(static_cast<Eigen::Index>(b * na), static_cast<Eigen::Index>(na)) =
          m * y.segment(static_cast<Eigen::Index>(b * na), static_cast<Eigen::Index>(na));
    };
    auto controlled = [&] {
      for (std::size_t a = 0; a < na; ++a) {
        Vec s(static_cast<Eigen::Index>(blk));
        for (std::size_t b = 0; b < blk; ++b) s(static_cast<Eigen::Index>(b)) = y(static_cast<Eigen::Index>(b * na + a));
        s = adjoint ? opens[a].apply_adjoint(s) : opens[a].apply(s);
        for (std::size_t b = 0; b < blk; ++b) y(static_cast<Eigen::Index>(b * na + a)) = s(static_cast<Eigen::Index>(b));
      }
    };
    if (adjoint) {
      controlled();
      mix(prep.adjoint());
    } else {
      mix(prep);
      controlled();
    }
    return y;
  };
  return UnitaryOracle(
      L.total(), [apply](const Vec& x) { return apply(x, false); }, [apply](const Vec& x) { return apply(x, true); });
}

inline RegisterLayout sim_ext_layout(const MiniVerifier& v) {
  return RegisterLayout({{"ST", v.dim_v}, {"W", 1}, {"M", v.pp.num_m()}, {"R", 2}, {"Out", v.num_a()}});
}

struct SimBudget {
  double epsilon = 0, delta = 0, t = 0, T_amp = 0;
  std::size_t T_rewind = 0;
  double budget = 0;  // ε/2 + 4δ
};

inline SimBudget sim_error_budget(double epsilon, double lambda) {
  require(epsilon > 0 && epsilon <= 1, "sim_error_budget: epsilon outside (0, 1]");
  require(lambda >= 3, "sim_error_budget: lambda must be at least 3");
  SimBudget b;
  b.epsilon = epsilon;
  b.delta = epsilon * epsilon / (3600 * std::pow(std::log2(lambda), 4));
  b.t = b.delta * b.delta * b.delta / 64;
  b.T_amp = amp_iterations(b.t, kExtAmpError);
  b.T_rewind = static_cast<std::size_t>(std::ceil(2 * std::log2(1 / b.delta)));
  b.budget = epsilon / 2 + 4 * b.delta;
  require(b.delta < epsilon / 8, "sim_error_budget: delta >= epsilon/8");
  require(b.budget < epsilon, "sim_error_budget: budget exceeds epsilon");
  return b;
}

struct SimCombKraus {
  std::vector<Mat> good_a, good_na;
  std::map<std::uint32_t, std::vector<ExtOutcome>> ext;  // Ext operators per commitment

  std::vector<Mat> all() const {
    std::vector<Mat> out = good_a;
    out.insert(out.end(), good_na.begin(), good_na.end());
    return out;
  }
};

inline SimCombKraus sim_comb_kraus(const MiniVerifier& v, const ExtSchedule& schedule) {
  v.validate();
  const double w = std::sqrt(0.5 / static_cast<double>(v.num_a()));
  auto coms = detail::com_kraus(v);
  auto L = sim_ext_layout(v);
  UnitaryOracle ext_open = sim_open_oracle(v, L);
  SimCombKraus s;
  for (const auto& [c, _] : coms) s.ext[c] = ext_kraus(v.pp, c, ext_open, L, ExtVariant::StatBinding, schedule);
  for (std::size_t a = 0; a < v.num_a(); ++a) {
    auto opens = detail::open_kraus(v, a);
    Mat f_abort = detail::final_op(v, v.abort_notice());
    for (const auto& [c, kc] : coms) {
      for (const auto& [er, o] : opens) {
        const auto [e, r] = er;
        if (v.pp.at(e, r) != c) {
          s.good_a.push_back(w * f_abort * o * kc);
          continue;
        }
        for (const auto& x : s.ext.at(c)) {
          if (x.m != e) continue;
          s.good_na.push_back(w * detail::final_op(v, a ^ e) * o * x.A * kc);
        }
      }
    }
  }
  return s;
}

struct MiniGkReport {
  std::string fixture_id;
  std::size_t dim_v = 0, ext_dim = 0;
  SimBudget params;
  Mat real;
  RewindOutput rewound;
  double p_comb = 0;          // Pr[Sim_comb ≠ Fail]
  double td = 0;              // TD(real, rewound simulator)
  double td_comb = 0;         // TD(real, Sim_comb conditioned on success)
  RewindPremises premises;    // fitted to the exact success range
  double nominal_bound = 0;   // rewind bound at γ = δ, p₀ = 1/4
  bool pass = false;
};

inline MiniGkReport mini_gk_sim(const MiniVerifier& v, double epsilon, double lambda = 16) {
  MiniGkReport rep;
  rep.fixture_id = v.id;
  rep.dim_v = v.dim_v;
  rep.ext_dim = sim_ext_layout(v).total();
  rep.params = sim_error_budget(epsilon, lambda);
  rep.real = mini_gk_real(v);
  auto kraus = sim_comb_kraus(v, {rep.params.t, rep.params.T_amp});
  auto good = kraus.all();
  rep.rewound = watrous_rewind_kraus(good, rep.params.T_rewind, v.rho0);
  rep.p_comb = rep.rewound.p_rho;
  rep.td = trace_distance(rep.real, rep.rewound.success) + rep.rewound.fail / 2;
  rep.td_comb = trace_distance(rep.real, rep.rewound.conditional);
  auto [lo, hi] = success_range(good);
  rep.premises = rewind_premises(lo, hi, rep.params.T_rewind);
  rep.nominal_bound = rewind_td_bound(rep.params.delta, 0.25);
  rep.pass = rep.td <= epsilon && std::abs(rep.p_comb - 0.5) <= rep.params.delta / 2 + 0.02;
  return rep;
}

// ---------------------------------------------------------------------------
// Fixtures. V = Mem ⊗ Estore ⊗ Rstore; the commitment step picks (e, r)
// uniformly into (Estore, Rstore) and commits honestly.

namespace detail {

inline RegisterLayout gk_v_layout(std::size_t mem, std::size_t k) {
  return RegisterLayout({{"Mem", mem}, {"Es", std::size_t{1} << k}, {"Rs", 2}});
}

// com on V ⊗ C: (Es, Rs) ← uniform superposition, C ^= table(Es, Rs), with
// an optional unitary on Mem applied first.
inline Mat gk_com_unitary(const ToyTableParams& pp, std::size_t mem, const Mat& mem_u) {
  const std::size_t ne = pp.num_m(), nc = std::size_t{1} << pp.c_bits;
  Mat prep = unitary_from_zero(Vec::Ones(static_cast<Eigen::Index>(ne * 2)));
  Mat v_u = kron(mem_u, prep);  // on Mem ⊗ (Es, Rs)
  const std::size_t dv = mem * ne * 2;
  const auto n = static_cast<Eigen::Index>(dv * nc);
  Mat xor_c = Mat::Zero(n, n);
  for (std::size_t x = 0; x < dv; ++x) {
    const std::size_t er = x % (ne * 2);
    const std::uint32_t val = pp.at(static_cast<std::uint32_t>(er / 2), static_cast<std::uint32_t>(er % 2));
    for (std::size_t c = 0; c < nc; ++c)
      xor_c(static_cast<Eigen::Index>(x * nc + (c ^ val)), static_cast<Eigen::Index>(x * nc + c)) = 1;
  }
  return xor_c * kron(v_u, identity(nc));
}

// open on V ⊗ E ⊗ R: copies (Es, Rs ⊕ flip) into (E, R) where flip is 1 on
// the range of `abort_proj` (a projector on Mem), after `mem_u` on Mem.
inline Mat gk_open_unitary(std::size_t mem, std::size_t k, const Mat& mem_u, const Mat& abort_proj) {
  const std::size_t ne = std::size_t{1} << k, blk = ne * 2;
  const std::size_t dv = mem * blk;
  const auto n = static_cast<Eigen::Index>(dv * blk);
  auto copy = [&](bool flip) {
    Mat p = Mat::Zero(n, n);
    for (std::size_t x = 0; x < dv; ++x) {
      const std::size_t es = (x / 2) % ne, rs = x % 2;
      for (std::size_t e = 0; e < ne; ++e)
        for (std::size_t r = 0; r < 2; ++r) {
          const std::size_t to = x * blk + (e ^ es) * 2 + (r ^ rs ^ (flip ? 1 : 0));
          p(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(x * blk + e * 2 + r)) = 1;
        }
    }
    return p;
  };
  Mat pa = kron(kron(abort_proj, identity(blk)), identity(blk));
  Mat pn = identity(static_cast<std::size_t>(n)) - pa;
  Mat mu = kron(kron(mem_u, identity(blk)), identity(blk));
  return (copy(true) * pa + copy(false) * pn) * mu;
}

inline Mat gk_initial(std::size_t k, const Mat& rho_mem) {
  const std::size_t store = (std::size_t{1} << k) * 2;
  return kron(rho_mem, outer(basis_vector(store, 0), basis_vector(store, 0)));
}

inline MiniVerifier gk_assemble(std::string id, const ToyTableParams& pp, std::size_t mem, const Mat& rho_mem,
                                const Mat& com_mem_u, const std::vector<Mat>& opens, const std::vector<Mat>& finals) {
  MiniVerifier v{std::move(id),
                 pp,
                 mem * pp.num_m() * 2,
                 gk_initial(pp.m_bits, rho_mem),
                 UnitaryOracle::dense(gk_com_unitary(pp, mem, com_mem_u)),
                 {},
                 {}};
  for (const auto& o : opens) v.open.push_back(UnitaryOracle::dense(o));
  for (const auto& f : finals) v.final.push_back(UnitaryOracle::dense(f));
  return v;
}

inline std::vector<Mat> haar_finals(std::size_t count, std::size_t dv, Rng& rng) {
  std::vector<Mat> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(haar_unitary(dv, rng));
  return out;
}

}  // namespace detail

enum class GkFixture { AlwaysAbort, Honest, SuperpositionAbort, ADependent, Random };

inline const char* gk_fixture_name(GkFixture f) {
  switch (f) {
    case GkFixture::AlwaysAbort: return "always-abort";
    case GkFixture::Honest: return "honest";
    case GkFixture::SuperpositionAbort: return "superposition-abort";
    case GkFixture::ADependent: return "a-dependent";
    case GkFixture::Random: return "random";
  }
  return "?";
}

inline std::optional<GkFixture> parse_gk_fixture(const std::string& s) {
  for (auto f : {GkFixture::AlwaysAbort, GkFixture::Honest, GkFixture::SuperpositionAbort, GkFixture::ADependent,
                 GkFixture::Random})
    if (s == gk_fixture_name(f)) return f;
  return std::nullopt;
}

struct GkFixtureExtra {
  Vec psi_na;  // superposition-abort only: the non-aborting Mem state
};

inline MiniVerifier make_gk_fixture(GkFixture kind, std::size_t k, Rng& rng, GkFixtureExtra* extra = nullptr) {
  require(k >= 1 && k <= 2, "gk fixture: k must be 1 or 2");
  auto pp = toy_setup(static_cast<std::uint32_t>(k), 1, ToyClass::StrictBinding, rng);
  const std::size_t mem = 2, na = pp.num_m(), dv = mem * na * 2;
  const Mat I = identity(mem), none = Mat::Zero(2, 2);
  std::vector<Mat> opens;
  switch (kind) {
    case GkFixture::AlwaysAbort: {
      for (std::size_t a = 0; a < na; ++a) opens.push_back(detail::gk_open_unitary(mem, k, haar_unitary(mem, rng), I));
      return detail::gk_assemble(gk_fixture_name(kind), pp, mem, random_density(mem, 2, rng), haar_unitary(mem, rng),
                                 opens, detail::haar_finals(na + 1, dv, rng));
    }
    case GkFixture::Honest: {
      for (std::size_t a = 0; a < na; ++a) opens.push_back(detail::gk_open_unitary(mem, k, haar_unitary(mem, rng), none));
      return detail::gk_assemble(gk_fixture_name(kind), pp, mem, random_density(mem, 2, rng), haar_unitary(mem, rng),
                                 opens, detail::haar_finals(na + 1, dv, rng));
    }
    case GkFixture::SuperpositionAbort: {
      Mat basis = haar_unitary(mem, rng);
      Vec psi_a = basis.col(0), psi_na = basis.col(1);
      if (extra) extra->psi_na = psi_na;
      for (std::size_t a = 0; a < na; ++a) opens.push_back(detail::gk_open_unitary(mem, k, I, outer(psi_a, psi_a)));
      Vec start = (psi_a + psi_na) / std::sqrt(2.0);
      std::vector<Mat> finals(na + 1, identity(dv));
      return detail::gk_assemble(gk_fixture_name(kind), pp, mem, outer(start, start), I, opens, finals);
    }
    case GkFixture::ADependent: {
      // Whether the verifier aborts depends on a through a rotation of Mem
      // before the abort measurement.
      Mat p0 = outer(basis_vector(mem, 0), basis_vector(mem, 0));
      for (std::size_t a = 0; a < na; ++a) opens.push_back(detail::gk_open_unitary(mem, k, haar_unitary(mem, rng), p0));
      return detail::gk_assemble(gk_fixture_name(kind), pp, mem, random_density(mem, 1, rng), haar_unitary(mem, rng),
                                 opens, detail::haar_finals(na + 1, dv, rng));
    }
    case GkFixture::Random: {
      for (std::size_t a = 0; a < na; ++a) opens.push_back(haar_unitary(dv * na * 2, rng));
      return detail::gk_assemble(gk_fixture_name(kind), pp, mem, random_density(mem, 2, rng), haar_unitary(mem, rng),
                                 opens, detail::haar_finals(na + 1, dv, rng));
    }
  }
  throw InvalidArgument("gk fixture: unknown kind");
}

// Post-extraction Mem state in Sim_na for the superposition-abort fixture,
// conditioned on Ext succeeding: fidelity with ψ_na, minimized over
// commitments that occur.
inline double sim_na_post_extraction_fidelity(const MiniVerifier& v, const Vec& psi_na, const ExtSchedule& schedule) {
  auto coms = detail::com_kraus(v);
  auto L = sim_ext_layout(v);
  UnitaryOracle open = sim_open_oracle(v, L);
  auto vl = detail::gk_v_layout(psi_na.size() == 0 ? 1 : static_cast<std::size_t>(psi_na.size()), v.pp.m_bits);
  double worst = 1;
  for (const auto& [c, kc] : coms) {
    Mat st = kc * v.rho0 * kc.adjoint();
    auto dist = ext_apply(ext_kraus(v.pp, c, open, L, ExtVariant::StatBinding, schedule), st);
    Mat post = Mat::Zero(st.rows(), st.cols());
    for (const auto& [_, part] : dist.by_message) post += part;
    const double p = real_trace(post);
    if (p <= 1e-12) continue;
    Mat mem = vl.partial_trace(post / p, {"Mem"});
    worst = std::min(worst, fidelity_pure(psi_na, mem));
  }
  return worst;
}

}  // namespace ezk::qsim
