#include <cmath>

#include "ezk/qsim.hpp"
#include "gtest/gtest.h"

using namespace ezk;
using namespace ezk::qsim;

namespace {

Mat ket_bra(std::initializer_list<Complex> a) {
  Vec v(static_cast<Eigen::Index>(a.size()));
  Eigen::Index i = 0;
  for (auto x : a) v(i++) = x;
  return outer(v, v);
}

Projector proj(const Mat& m) { return Projector::checked(m); }

// Random projector pair on ST ⊗ Y with Π₀ = I ⊗ |0⟩⟨0|_Y.
struct PairFixture {
  Projector pi0, pi1;
};
PairFixture random_pair(std::size_t st, std::size_t y, std::size_t rank1, Rng& rng) {
  RegisterLayout L({{"ST", st}, {"Y", y}});
  return {proj(L.zero_projector({"Y"})), proj(hermitian_part(random_projector(st * y, rank1, rng)))};
}

}  // namespace

TEST(TraceDistance, BasicValues) {
  Mat zero = ket_bra({1, 0}), one = ket_bra({0, 1});
  EXPECT_NEAR(trace_distance(zero, zero), 0.0, 1e-12);
  EXPECT_NEAR(trace_distance(zero, one), 1.0, 1e-12);
  EXPECT_NEAR(trace_distance(identity(2) / 2.0, zero), 0.5, 1e-12);
  EXPECT_THROW(trace_distance(zero, identity(3)), InvalidArgument);
}

TEST(Jordan, CommutingProjectorsGiveOnlyLines) {
  Mat p = ket_bra({1, 0});
  auto d = jordan_decompose(proj(p), proj(p));
  EXPECT_TRUE(d.two.empty());
  ASSERT_EQ(d.one.size(), 2u);
  int found11 = 0, found00 = 0;
  for (const auto& b : d.one) {
    if (b.b && b.c) found11 += std::abs(b.v(0)) > 0.99;
    if (!b.b && !b.c) found00 += std::abs(b.v(1)) > 0.99;
  }
  EXPECT_EQ(found11, 1);
  EXPECT_EQ(found00, 1);
}

TEST(Jordan, ZeroAndPlusFormOneBlock) {
  const double s = 1 / std::sqrt(2.0);
  auto d = jordan_decompose(proj(ket_bra({1, 0})), proj(ket_bra({s, s})));
  ASSERT_EQ(d.two.size(), 1u);
  EXPECT_TRUE(d.one.empty());
  EXPECT_NEAR(d.two[0].p, 0.5, 1e-12);
}

TEST(Jordan, RandomPairsReconstructExactly) {
  Rng rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    auto f = random_pair(4, 4, 1 + rng.uniform(15), rng);
    auto d = jordan_decompose(f.pi0, f.pi1);
    EXPECT_LE(op_norm_diff(d.reconstruct_pi0(), f.pi0.m), 1e-9);
    EXPECT_LE(op_norm_diff(d.reconstruct_pi1(), f.pi1.m), 1e-9);
    EXPECT_LE(op_norm_diff(d.block_sum(), identity(16)), 1e-9);
    for (const auto& j : d.two) {
      EXPECT_GT(j.p, 0.0);
      EXPECT_LT(j.p, 1.0);
      EXPECT_LE((f.pi0.m * j.alpha - j.alpha).norm(), 1e-9);
      EXPECT_LE((f.pi0.m * j.alpha_perp).norm(), 1e-9);
      EXPECT_LE((f.pi1.m * j.beta - j.beta).norm(), 1e-9);
      EXPECT_LE((f.pi1.m * j.beta_perp).norm(), 1e-9);
      EXPECT_LE((j.alpha - std::sqrt(j.p) * j.beta - std::sqrt(1 - j.p) * j.beta_perp).norm(), 1e-8);
    }
  }
}

TEST(Jordan, RejectsNonProjector) {
  Mat bad = identity(2) * 0.5;
  EXPECT_THROW(jordan_decompose(Projector{bad}, Projector{identity(2)}), InvalidArgument);
}

TEST(Amp, LowerBoundClosedForm) {
  EXPECT_DOUBLE_EQ(amp_success_lower_bound(1.0, 7), 1.0);
  EXPECT_DOUBLE_EQ(amp_success_lower_bound(0.5, 1), 0.5);
  EXPECT_NEAR(amp_success_lower_bound(0.25, 3), 0.70703125, 1e-15);
  EXPECT_THROW(amp_success_lower_bound(0.0, 3), InvalidArgument);
  EXPECT_THROW(amp_success_lower_bound(1.5, 3), InvalidArgument);
  EXPECT_THROW(amp_success_lower_bound(0.5, 0), InvalidArgument);
}

TEST(Amp, IterationCountIsLeast) {
  for (double t : {0.3, 0.05, 4.21875e-4}) {
    const double T = amp_iterations(t, std::ldexp(1.0, -20));
    EXPECT_LE(amp_failure_term(t, T), std::ldexp(1.0, -20));
    if (T > 1) {
      EXPECT_GT(amp_failure_term(t, T - 1), std::ldexp(1.0, -20));
    }
  }
  EXPECT_GT(amp_iterations(1e-24, std::ldexp(1.0, -20)), 1e24);
}

TEST(Amp, StateInsidePi1SucceedsImmediately) {
  Rng rng(102);
  const double s = 1 / std::sqrt(2.0);
  Projector pi0 = proj(ket_bra({1, 0})), pi1 = proj(ket_bra({s, s}));
  Vec plus(2);
  plus << s, s;
  auto r = amp_run(pi0, pi1, 5, StateVector::checked(plus), rng);
  EXPECT_TRUE(r.b);
  EXPECT_EQ(r.rounds, 1u);
  EXPECT_LE((r.post - plus).norm(), 1e-12);
}

TEST(Amp, InvariantLineNeverSucceeds) {
  // |0⟩ is fixed by Π₀ and annihilated by Π₁.
  Rng rng(103);
  Projector pi0 = proj(ket_bra({1, 0})), pi1 = proj(ket_bra({0, 1}));
  for (int i = 0; i < 20; ++i) EXPECT_FALSE(amp_run(pi0, pi1, 4, StateVector::checked(basis_vector(2, 0)), rng).b);
  EXPECT_NEAR(amp_success_probability(pi0, pi1, 4, ket_bra({1, 0})), 0.0, 1e-15);
}

TEST(Amp, HalfOverlapThreeRoundsExact) {
  const double s = 1 / std::sqrt(2.0);
  Projector pi0 = proj(ket_bra({1, 0})), pi1 = proj(ket_bra({s, s}));
  double total = 0;
  for (const auto& br : amp_branches(pi0, pi1, 3, basis_vector(2, 0)))
    if (br.b) total += br.prob();
  EXPECT_NEAR(total, 0.875, 1e-12);
  EXPECT_NEAR(amp_success_probability(pi0, pi1, 3, ket_bra({1, 0})), 0.875, 1e-12);
}

TEST(Amp, BranchesSumToOneAndSuccessesLieInPi1) {
  Rng rng(104);
  auto f = random_pair(2, 4, 3, rng);
  Vec psi = random_state(8, rng);
  double total = 0;
  for (const auto& br : amp_branches(f.pi0, f.pi1, 4, psi)) {
    total += br.prob();
    if (br.b) {
      EXPECT_LE((f.pi1.m * br.post - br.post).norm(), 1e-10);
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-10);
}

TEST(Amp, SampledRunMatchesExactProbability) {
  Rng rng(105);
  auto f = random_pair(2, 2, 1, rng);
  Vec psi = random_state(4, rng);
  const double exact = amp_success_probability(f.pi0, f.pi1, 3, outer(psi, psi));
  int hits = 0;
  const int N = 4000;
  for (int i = 0; i < N; ++i) hits += amp_run(f.pi0, f.pi1, 3, StateVector::checked(psi), rng).b;
  EXPECT_NEAR(hits / double(N), exact, 0.03);
}

TEST(AmpUnitary, IdentityPi1FlipsBForEveryInput) {
  Projector pi0 = proj(ket_bra({1, 0})), pi1 = proj(identity(2));
  AmpUnitary U(pi0, pi1, 1);
  for (std::size_t x = 0; x < 2; ++x) {
    Vec out = U.apply(U.embed(basis_vector(2, x)));
    EXPECT_NEAR(std::abs(out(static_cast<Eigen::Index>(U.index(x, 1, 1)))), 1.0, 1e-12);
  }
}

TEST(AmpUnitary, IsUnitaryAndReproducesBranchDistribution) {
  Rng rng(106);
  auto f = random_pair(2, 2, 2, rng);
  for (std::size_t T : {1u, 2u, 4u}) {
    AmpUnitary U(f.pi0, f.pi1, T);
    Mat u = U.dense();
    EXPECT_TRUE(is_unitary(u, 1e-10));
    Vec psi = random_state(4, rng);
    Vec out = U.apply(U.embed(psi));
    EXPECT_LE((U.apply_adjoint(out) - U.embed(psi)).norm(), 1e-10);
    double success = 0;
    for (const auto& br : amp_branches(f.pi0, f.pi1, T, psi)) {
      Vec s = U.slice(out, br.b ? 1 : 0, br.record());
      EXPECT_LE((s - br.post).norm(), 1e-10);
      if (br.b) success += br.prob();
    }
    double measured = 0;
    for (std::uint64_t a = 0; a < U.anc_count(); ++a) measured += U.slice(out, 1, a).squaredNorm();
    EXPECT_NEAR(measured, success, 1e-9);
    EXPECT_NEAR(measured, amp_success_probability(f.pi0, f.pi1, T, outer(psi, psi)), 1e-9);
  }
}

TEST(AmpUnitary, SizeGuard) {
  Rng rng(107);
  auto f = random_pair(4, 4, 3, rng);
  EXPECT_NO_THROW(AmpUnitary(f.pi0, f.pi1, 9));
  EXPECT_THROW(AmpUnitary(f.pi0, f.pi1, 10), Unsupported);
}

TEST(AmpUnitary, ThresholdSubspacesDoNotInterfere) {
  Rng rng(108);
  auto f = random_pair(2, 4, 3, rng);
  auto d = jordan_decompose(f.pi0, f.pi1);
  const double t = 0.4;
  AmpUnitary U(f.pi0, f.pi1, 3);
  Mat lt = threshold_projector(d, t, false), geq = threshold_projector(d, t, true);
  for (int trial = 0; trial < 5; ++trial) {
    Vec psi = lt * random_state(8, rng);
    Vec out = U.apply(U.embed(psi));
    double leak = 0;
    for (int b = 0; b < 2; ++b)
      for (std::uint64_t a = 0; a < U.anc_count(); ++a) leak += (geq * U.slice(out, b, a)).squaredNorm();
    EXPECT_LE(leak, 1e-18);
  }
}

TEST(Threshold, SplitExamples) {
  Rng rng(109);
  auto f = random_pair(2, 4, 3, rng);
  auto d = jordan_decompose(f.pi0, f.pi1);
  ASSERT_FALSE(d.two.empty());
  const auto& j = d.two.front();
  auto s1 = threshold_split(d, j.p + 1e-6, StateVector::checked(j.alpha));
  EXPECT_LE((s1.lt - j.alpha).norm(), 1e-9);
  EXPECT_LE(s1.geq.norm(), 1e-9);
  auto line = jordan_decompose(proj(ket_bra({1, 0})), proj(ket_bra({1, 0})));
  for (const auto& b : line.one)
    if (b.b && b.c) {
      auto s = threshold_split(line, 0.5, StateVector::checked(b.v));
      EXPECT_LE(s.lt.norm(), 1e-12);
      EXPECT_LE((s.geq - b.v).norm(), 1e-12);
    }
  for (int i = 0; i < 10; ++i) {
    Vec psi = random_state(8, rng);
    auto s = threshold_split(d, rng.real(), StateVector::checked(psi));
    EXPECT_NEAR(s.lt.squaredNorm() + s.geq.squaredNorm(), 1.0, 1e-10);
    EXPECT_LE(std::abs(s.lt.dot(s.geq)), 1e-10);
    EXPECT_LE((s.lt + s.geq - psi).norm(), 1e-10);
  }
}

TEST(Threshold, SuccessProbabilitySeparatesSubspaces) {
  // Π₀-range vectors of S_{<t} succeed with probability < t and those of S_{≥t} with ≥ t.
  Rng rng(110);
  for (int trial = 0; trial < 10; ++trial) {
    auto f = random_pair(3, 4, 1 + rng.uniform(10), rng);
    auto d = jordan_decompose(f.pi0, f.pi1);
    const double t = 0.05 + 0.9 * rng.real();
    for (const auto& j : d.two) {
      const double p = (j.alpha.adjoint() * f.pi1.m * j.alpha)(0, 0).real();
      if (j.p < t) {
        EXPECT_LT(p, t);
      } else {
        EXPECT_GE(p, t - 1e-12);
      }
    }
  }
}

TEST(AmpSandwich, BlockEvaluatorMatchesDirectIteration) {
  Rng rng(111);
  for (int trial = 0; trial < 6; ++trial) {
    auto f = random_pair(2, 4, 1 + rng.uniform(6), rng);
    auto d = jordan_decompose(f.pi0, f.pi1);
    Mat X = hermitian_part(ginibre(8, 8, rng));
    for (std::size_t T : {1u, 2u, 5u, 17u}) {
      EXPECT_LE(op_norm_diff(amp_sandwich(d, X, double(T)), amp_sandwich_dense(f.pi0, f.pi1, X, T)), 1e-10);
    }
  }
}

TEST(AmpSandwich, IdentityGivesClosedFormSuccess) {
  Rng rng(112);
  auto f = random_pair(2, 4, 3, rng);
  auto d = jordan_decompose(f.pi0, f.pi1);
  Mat S = amp_sandwich(d, identity(8), 7);
  for (const auto& j : d.two) {
    const double P = (j.alpha.adjoint() * S * j.alpha)(0, 0).real();
    EXPECT_NEAR(P, 1 - std::pow(1 - 2 * j.p + 2 * j.p * j.p, 6) * (1 - j.p), 1e-10);
  }
  // A huge T saturates at certain success on every active block.
  Mat Sinf = amp_sandwich(d, identity(8), 1e30);
  for (const auto& j : d.two) EXPECT_NEAR((j.alpha.adjoint() * Sinf * j.alpha)(0, 0).real(), 1.0, 1e-9);
}

TEST(Amp, BoundHoldsForOverlapsBetweenTAndOneMinusT) {
  Rng rng(113);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = random_pair(2 + rng.uniform(3), 4, 1 + rng.uniform(6), rng);
    auto d = jordan_decompose(f.pi0, f.pi1);
    const double t = 0.01 + 0.49 * rng.real();
    const std::size_t T = 1 + rng.uniform(12);
    for (const auto& j : d.two) {
      if (j.p < t) continue;
      const double exact = amp_success_probability(f.pi0, f.pi1, T, outer(j.alpha, j.alpha));
      EXPECT_GE(exact, amp_success_uniform_bound(t, double(T)) - 1e-9);
      if (j.p <= 1 - t) {
        EXPECT_GE(exact, amp_success_lower_bound(t, double(T)) - 1e-9);
      }
    }
  }
}

TEST(Amp, BoundFailsForOverlapsAboveOneMinusT) {
  // p = 0.7 ≥ t = 0.5 yet the exact success after 5 rounds falls below the
  // closed-form bound evaluated at t.
  const double p = 0.7;
  Projector pi0 = proj(ket_bra({1, 0}));
  Projector pi1 = proj(ket_bra({std::sqrt(p), std::sqrt(1 - p)}));
  const double exact = amp_success_probability(pi0, pi1, 5, ket_bra({1, 0}));
  EXPECT_NEAR(exact, amp_success_lower_bound(p, 5), 1e-12);
  EXPECT_LT(exact, amp_success_lower_bound(0.5, 5));
  EXPECT_GE(exact, amp_success_uniform_bound(0.5, 5) - 1e-12);
}

TEST(Amp, UniformBoundIsTheMinimumOverOverlaps) {
  for (double t : {0.05, 0.3, 0.45, 0.7}) {
    for (double T : {1.0, 2.0, 6.0, 40.0}) {
      double grid_min = 1;
      for (int i = 0; i <= 20000; ++i) {
        const double p = t + (1 - t) * i / 20000.0;
        grid_min = std::min(grid_min, amp_success_lower_bound(p, T));
      }
      EXPECT_LE(amp_success_uniform_bound(t, T), grid_min + 1e-12);
      EXPECT_NEAR(amp_success_uniform_bound(t, T), grid_min, 1e-6);
      EXPECT_LE(amp_success_uniform_bound(t, T), amp_success_lower_bound(t, T) + 1e-15);
    }
  }
}

// ---------------------------------------------------------------------------
// Extraction

namespace {

ToyTableParams strict_table(Rng& rng) { return toy_setup(1, 1, ToyClass::StrictBinding, rng); }

}  // namespace

TEST(OpenProjector, IdentityOpenerWithSingleValidOpening) {
  Rng rng(201);
  auto pp = strict_table(rng);
  auto L = adversary_layout(pp);
  const std::uint32_t com = pp.at(1, 0);
  auto pi = build_open_projector(pp, com, UnitaryOracle::dense(identity(L.total())), L);
  EXPECT_LE(op_norm_diff(pi.m, L.basis_projector({{"M", 1}, {"R", 0}})), 1e-12);
  EXPECT_NEAR(pi.rank(), double(L.total()) / 4, 1e-9);
}

TEST(OpenProjector, RandomOpenerMatchesBornRule) {
  Rng rng(202);
  auto pp = toy_setup(1, 1, ToyClass::BindingInM, rng);
  auto adv = random_adversary("r", pp, rng);
  const auto com = adv.com[0].com;
  auto pi = build_open_projector(pp, com, adv.open, adv.layout);
  EXPECT_LE(op_norm_diff(pi.m * pi.m, pi.m), 1e-10);
  Vec phi = random_state(2, rng);
  Vec full = adv.layout.zero_isometry({"ST"}) * phi;
  Vec opened = adv.open.apply(full);
  double direct = 0;
  for (std::size_t i = 0; i < adv.layout.total(); ++i) {
    const auto m = static_cast<std::uint32_t>(adv.layout.digit(i, "M"));
    const auto r = static_cast<std::uint32_t>(adv.layout.digit(i, "R"));
    if (pp.at(m, r) == com) direct += std::norm(opened(static_cast<Eigen::Index>(i)));
  }
  EXPECT_NEAR((full.adjoint() * pi.m * full)(0, 0).real(), direct, 1e-12);
  Mat bad = identity(adv.layout.total()) * 2.0;
  EXPECT_THROW(UnitaryOracle::dense(bad), InvalidArgument);
}

TEST(Ext, KrausMatchesLiteralCircuit) {
  Rng rng(203);
  auto pp = toy_setup(1, 1, ToyClass::BindingInM, rng);
  for (int trial = 0; trial < 3; ++trial) {
    auto adv = random_adversary("r", pp, rng);
    for (auto variant : {ExtVariant::StatBinding, ExtVariant::StrongCb}) {
      for (std::size_t T : {1u, 3u, 6u}) {
        auto fast = ext_kraus(pp, adv.com[0].com, adv.open, adv.layout, variant, {0.1, double(T)});
        auto lit = ext_kraus_literal(pp, adv.com[0].com, adv.open, adv.layout, variant, T);
        ASSERT_EQ(fast.size(), lit.size());
        for (std::size_t i = 0; i < fast.size(); ++i) EXPECT_LE(op_norm_diff(fast[i].A, lit[i].A), 1e-10);
      }
    }
  }
}

TEST(Ext, SuccessBranchLiesInOpenProjector) {
  Rng rng(204);
  auto pp = toy_setup(1, 1, ToyClass::BindingInM, rng);
  auto adv = random_adversary("r", pp, rng);
  auto pi = build_open_projector(pp, adv.com[0].com, adv.open, adv.layout);
  Projector pi0{adv.layout.zero_projector({"W", "M", "R", "Out"})};
  AmpUnitary amp(pi0, pi, 4);
  Vec v = amp.apply(amp.embed(adv.layout.zero_isometry({"ST"}) * random_state(2, rng)));
  double residual = 0;
  for (std::uint64_t a = 0; a < amp.anc_count(); ++a) {
    Vec s = amp.slice(v, 1, a);
    residual += (pi.m * s - s).squaredNorm();
  }
  EXPECT_LE(std::sqrt(residual), 1e-9);
}

TEST(Ext, HonestOpenerExtractsCommittedMessageAndKeepsState) {
  Rng rng(205);
  auto pp = strict_table(rng);
  const std::uint32_t com = pp.at(1, 1);
  Mat rho = random_density(2, 2, rng);
  auto adv = honest_adversary("h", pp, 1, com, rho);
  auto res = ext_run(PublicParam{pp}, com, adv, rho, 0.3, ExtVariant::StatBinding, rng);
  ASSERT_TRUE(res.m.has_value());
  EXPECT_EQ(*res.m, 1u);
  EXPECT_GE(res.exact.success(), 1 - kExtAmpError);
  EXPECT_LE(trace_distance(res.rho_ext, rho), 1e-6);
}

TEST(Ext, InvalidOpenerAlwaysYieldsBottom) {
  Rng rng(206);
  auto pp = strict_table(rng);
  const std::uint32_t com = pp.at(0, 0);
  Mat rho = random_density(2, 1, rng);
  auto adv = invalid_adversary("bad", pp, com, rho);
  auto res = ext_run(PublicParam{pp}, com, adv, rho, 0.3, ExtVariant::StrongCb, rng);
  EXPECT_FALSE(res.m.has_value());
  EXPECT_GE(res.exact.bottom, 1 - kExtAmpError);
}

TEST(Ext, RejectsTinyDelta) {
  Rng rng(207);
  auto pp = strict_table(rng);
  Mat rho = random_density(2, 1, rng);
  auto adv = honest_adversary("h", pp, 0, pp.at(0, 0), rho);
  EXPECT_THROW(ext_run(PublicParam{pp}, pp.at(0, 0), adv, rho, 1e-4, ExtVariant::StatBinding, rng), InvalidArgument);
}

TEST(Ext, SuperpositionAbortCollapsesToNonAbortingBranch) {
  Rng rng(208);
  auto pp = strict_table(rng);
  const std::uint32_t com = pp.at(0, 1);
  Vec psi_na;
  auto adv = superposition_abort_adversary("sa", pp, 0, com, 4, rng, &psi_na);
  auto res = ext_run(PublicParam{pp}, com, adv, adv.com[0].rho_st, 0.3, ExtVariant::StatBinding, rng);
  ASSERT_TRUE(res.m.has_value());
  EXPECT_NEAR(res.exact.success(), 0.5, 1e-5);
  EXPECT_GE(fidelity_pure(psi_na, res.rho_ext), 0.99);
}

TEST(ExtractionExperiments, StObliviousAdversariesAreExact) {
  Rng rng(209);
  auto pp = toy_setup(1, 1, ToyClass::BindingInM, rng);
  for (int i = 0; i < 3; ++i) {
    auto rep = run_extraction_experiments(PublicParam{pp}, st_oblivious_adversary("o", pp, rng), 0.3);
    EXPECT_LE(rep.td, 1e-6);
    EXPECT_NEAR(rep.real.mass(), 1.0, 1e-9);
    EXPECT_NEAR(rep.ext.mass(), 1.0, 1e-9);
  }
  auto strict = strict_table(rng);
  Mat rho = random_density(2, 2, rng);
  auto rep = run_extraction_experiments(PublicParam{strict}, honest_adversary("h", strict, 1, strict.at(1, 0), rho), 0.3);
  EXPECT_LE(rep.td, 1e-6);
}

TEST(ExtractionExperiments, RandomAdversariesWithinSlack) {
  Rng rng(210);
  auto pp = toy_setup(1, 1, ToyClass::BindingInM, rng);
  for (int i = 0; i < 3; ++i) {
    auto rep = run_extraction_experiments(PublicParam{pp}, random_adversary("r", pp, rng), 0.3);
    EXPECT_LE(rep.td, 0.35);
    EXPECT_NEAR(rep.ext.mass(), 1.0, 1e-9);
  }
}

TEST(ExtractionExperiments, RefuseNonBindingParameters) {
  Rng rng(211);
  auto pp = toy_setup(1, 1, ToyClass::NonBinding, rng);
  auto adv = random_adversary("r", pp, rng);
  EXPECT_THROW(run_extraction_experiments(PublicParam{pp}, adv, 0.3), InvalidArgument);
}

TEST(ExtractionExperiments, TraceDistanceOfEnsembles) {
  CqEnsemble a, b;
  a.add("x", ket_bra({1, 0}) * 0.5);
  a.bottom = 0.5;
  b.add("y", ket_bra({1, 0}) * 0.5);
  b.bottom = 0.5;
  EXPECT_NEAR(trace_distance(a, b), 0.5, 1e-12);
  EXPECT_NEAR(trace_distance(a, a), 0.0, 1e-12);
}

// ---------------------------------------------------------------------------
// Trace-distance lemma and rewinding

TEST(MixtureBound, ClosedFormExamples) {
  EXPECT_NEAR(lemma2_bound(0.3, 0.3, 0.3, 1.0, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(lemma2_bound(1, 1, 1, 0.0, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(lemma2_bound(0.6, 0.4, 0.5, 1.0, 1.0), 0.2, 1e-15);
  EXPECT_THROW(lemma2_bound(1.2, 0, 0, 1.0, 1.0), InvalidArgument);
  EXPECT_THROW(lemma2_bound(0.5, 0.5, 0.5, 2.0, 1.0), InvalidArgument);
}

TEST(MixtureBound, BoundHoldsOnRandomMixtures) {
  Rng rng(301);
  for (int i = 0; i < 100; ++i) {
    const std::size_t d = 2 + rng.uniform(5);
    Vec a = random_state(d, rng), b = random_state(d, rng), a2 = random_state(d, rng), b2 = random_state(d, rng);
    const double p0 = rng.real(), p1 = rng.real(), pt = rng.real();
    const double td = trace_distance(two_component_mixture(p0, a, a2), two_component_mixture(p1, b, b2));
    EXPECT_LE(td, lemma2_bound(p0, p1, pt, a.dot(b), a2.dot(b2)) + 1e-9);
  }
}

TEST(Rewind, BoundArithmetic) {
  EXPECT_NEAR(rewind_td_bound(0.25, 0.25), 64.0 / 3, 1e-12);
  const double g = 1e-6;
  EXPECT_NEAR(rewind_td_bound(g, 0.25), 4 * std::sqrt(g) * std::log2(1 / g) * 16 / 3, 1e-12);
  EXPECT_THROW(rewind_td_bound(0.5, 0.25), InvalidArgument);
  EXPECT_THROW(rewind_td_bound(0.1, 1.0), InvalidArgument);
}

TEST(Rewind, AmplitudesAtOneHalfSucceedWithinTwoRounds) {
  auto g = rewind_amplitudes(0.5, 4);
  EXPECT_NEAR(0.5 * (g[0] * g[0] + g[1] * g[1]), 1.0, 1e-12);
  EXPECT_NEAR(g[2], 0.0, 1e-12);
}

TEST(Rewind, ClosedFormMatchesLiteralCircuit) {
  Rng rng(302);
  for (int trial = 0; trial < 4; ++trial) {
    auto f = rewind_fixture_controlled("c", 3, 2, 0.3 + 0.4 * rng.real(), 0.2, rng);
    auto good = f.circuit.good_kraus();
    for (std::size_t T : {1u, 2u, 5u}) {
      Vec psi = random_state(3, rng);
      Mat lit = Mat::Zero(6, 6);
      for (const auto& v : watrous_rewind_literal(f.circuit, T, psi)) lit += outer(v, v);
      auto fast = watrous_rewind_kraus(good, T, outer(psi, psi));
      EXPECT_LE(op_norm_diff(fast.success, lit), 1e-10);
    }
  }
}

TEST(Rewind, HalfFixtureIsExact) {
  Rng rng(303);
  auto f = rewind_fixture_half(3, 2, rng);
  auto good = f.circuit.good_kraus();
  auto [lo, hi] = success_range(good);
  EXPECT_NEAR(lo, 0.5, 1e-12);
  EXPECT_NEAR(hi, 0.5, 1e-12);
  auto prem = rewind_premises(lo, hi, 40);
  EXPECT_TRUE(prem.satisfied) << prem.violation;
  auto out = watrous_rewind_kraus(good, 40, random_density(3, 2, rng));
  EXPECT_LE(out.td, 1e-3);
  EXPECT_LE(out.td, prem.bound);
}

TEST(Rewind, BoundHoldsOnInputDependentFixtures) {
  Rng rng(304);
  for (double spread : {1e-7, 1e-5, 1e-3}) {
    auto f = rewind_fixture_controlled("c", 4, 2, 0.5, spread, rng);
    auto good = f.circuit.good_kraus();
    auto [lo, hi] = success_range(good);
    auto prem = rewind_premises(lo, hi, 60);
    ASSERT_TRUE(prem.satisfied) << prem.violation;
    for (int i = 0; i < 5; ++i) {
      auto out = watrous_rewind_kraus(good, 60, random_density(4, 1 + rng.uniform(4), rng));
      EXPECT_LE(out.td, prem.bound);
    }
  }
}

TEST(Rewind, DeterministicSuccessViolatesPremises) {
  auto prem = rewind_premises(1.0, 1.0, 10);
  EXPECT_FALSE(prem.satisfied);
  EXPECT_FALSE(prem.violation.empty());
}

TEST(MiniGk, BudgetAtLambda16) {
  auto b = sim_error_budget(0.2, 16);
  EXPECT_NEAR(b.delta, 0.04 / (3600.0 * 256), 1e-20);
  EXPECT_EQ(b.T_rewind, 49u);
  EXPECT_LT(b.delta, 0.2 / 8);
  EXPECT_LT(b.budget, 0.2);
  EXPECT_THROW(sim_error_budget(0.2, 2), InvalidArgument);
}

TEST(MiniGk, SimCombKrausAreSubUnital) {
  Rng rng(401);
  auto v = make_gk_fixture(GkFixture::Random, 1, rng);
  auto b = sim_error_budget(0.2, 16);
  auto k = sim_comb_kraus(v, {b.t, b.T_amp});
  auto [lo, hi] = success_range(k.all());
  EXPECT_GE(lo, 0.0);
  EXPECT_LE(hi, 1.0 + 1e-9);
}

TEST(MiniGk, AlwaysAbortIsSimulatedExactly) {
  Rng rng(402);
  auto rep = mini_gk_sim(make_gk_fixture(GkFixture::AlwaysAbort, 1, rng), 0.2);
  EXPECT_NEAR(rep.p_comb, 0.5, 1e-12);
  EXPECT_LE(rep.td, 1e-6);
}

TEST(MiniGk, FixturesMeetTheErrorBudget) {
  Rng rng(403);
  for (auto f : {GkFixture::Honest, GkFixture::SuperpositionAbort, GkFixture::ADependent, GkFixture::Random}) {
    auto rep = mini_gk_sim(make_gk_fixture(f, 1, rng), 0.2);
    EXPECT_LE(rep.td, 0.2) << rep.fixture_id;
    EXPECT_LE(std::abs(rep.p_comb - 0.5), rep.params.delta / 2 + 0.02) << rep.fixture_id;
    EXPECT_TRUE(rep.pass) << rep.fixture_id;
  }
}

TEST(MiniGk, SuperpositionAbortCollapsesToNonAbortingState) {
  Rng rng(404);
  GkFixtureExtra extra;
  auto v = make_gk_fixture(GkFixture::SuperpositionAbort, 1, rng, &extra);
  auto b = sim_error_budget(0.2, 16);
  EXPECT_GE(sim_na_post_extraction_fidelity(v, extra.psi_na, {b.t, b.T_amp}), 0.99);
}

TEST(MiniGk, RealOutputIsNormalized) {
  Rng rng(405);
  auto v = make_gk_fixture(GkFixture::ADependent, 2, rng);
  EXPECT_NEAR(real_trace(mini_gk_real(v)), 1.0, 1e-10);
}

TEST(Rewind, PremisesHoldAtExactHalf) {
  for (std::size_t T : {33u, 49u, 60u}) {
    auto prem = rewind_premises(0.5, 0.5, T);
    EXPECT_TRUE(prem.satisfied) << T << ": " << prem.violation;
  }
}
