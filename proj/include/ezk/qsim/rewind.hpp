#pragma once

// Quantum rewinding (apply Q, keep the output on b = 0, otherwise undo Q,
// reflect about the all-zero auxiliary state and retry) and the trace-distance
// lemma for two-component mixtures.
//
// Q's success branch is described by Kraus operators O_i : Inp → Out with
// M₀ = Σ O_i†O_i. On an eigenvector of M₀ with eigenvalue p the retry loop
// stays in a 2D plane, so round k outputs O_i g_k(M₀)|ψ⟩ for a scalar
// function g_k. This holds for every unitary dilation of the O_i, which is
// what lets the evaluator stay exact at any T.

#include "ezk/qsim/linalg.hpp"

namespace ezk::qsim {

inline double lemma2_bound(double p0, double p1, double pt, Complex ip, Complex ip_prime) {
  for (double p : {p0, p1, pt}) require(p >= 0 && p <= 1, "lemma2_bound: probability outside [0, 1]");
  require(std::abs(ip) <= 1 + 1e-12 && std::abs(ip_prime) <= 1 + 1e-12, "lemma2_bound: inner product exceeds 1");
  auto gap = [](Complex z) { return std::sqrt(std::max(0.0, 1 - std::norm(z))); };
  return std::abs(p0 - pt) + std::abs(p1 - pt) + pt * gap(ip) + (1 - pt) * gap(ip_prime);
}

// σ = p|ψ⟩⟨ψ| + (1−p)|ψ′⟩⟨ψ′|.
inline Mat two_component_mixture(double p, const Vec& psi, const Vec& psi_prime) {
  return p * outer(psi, psi) + (1 - p) * outer(psi_prime, psi_prime);
}

inline double rewind_td_bound(double gamma, double p0) {
  require(gamma > 0 && gamma < 0.5, "rewind_td_bound: gamma outside (0, 1/2)");
  require(p0 > 0 && p0 < 1, "rewind_td_bound: p0 outside (0, 1)");
  return 4 * std::sqrt(gamma) * std::log2(1 / gamma) / (p0 * (1 - p0));
}

// ---------------------------------------------------------------------------
// Premises

struct RewindPremises {
  double p_min = 0, p_max = 0;  // range of p(ρ) over all inputs
  double p0 = 0, q = 0, gamma = 0;
  std::size_t T = 0;
  bool satisfied = false;
  std::string violation;  // first failed premise when !satisfied
  double bound = 0;       // TD bound when satisfied
};

// Chooses p₀ = min p(ρ), q at the midpoint of the range and the smallest γ
// that both exceeds the half-range and satisfies the iteration premise.
inline RewindPremises rewind_premises(double p_min, double p_max, std::size_t T) {
  RewindPremises r{p_min, p_max, p_min, (p_min + p_max) / 2, 0, T, false, {}, 0};
  if (!(r.p0 > 0 && r.p0 < 1)) {
    r.violation = "minimal success probability p0 is not in (0, 1)";
    return r;
  }
  const double half = (p_max - p_min) / 2;
  const double from_range = std::nextafter(half, 1.0) + 1e-15;
  const double from_T = std::exp2(-4 * r.p0 * (1 - r.p0) * static_cast<double>(T)) * (1 + 1e-9);
  r.gamma = std::max(from_range, from_T);
  if (!(r.gamma < 0.5)) {
    r.violation = "no gamma < 1/2 covers the success-probability range";
    return r;
  }
  if (!(r.p0 * (1 - r.p0) <= r.q * (1 - r.q))) {
    r.violation = "q is farther from 1/2 than p0";
    return r;
  }
  if (!(static_cast<double>(T) >= std::log2(1 / r.gamma) / (4 * r.p0 * (1 - r.p0)))) {
    r.violation = "T below log(1/gamma)/(4 p0 (1-p0))";
    return r;
  }
  r.satisfied = true;
  r.bound = rewind_td_bound(r.gamma, r.p0);
  return r;
}

// ---------------------------------------------------------------------------
// Closed-form evaluator

// Success amplitudes g_k(p), k < T, of the retry loop on a single eigenvector.
inline std::vector<double> rewind_amplitudes(double p, std::size_t T) {
  std::vector<double> g(T, 0.0);
  if (p <= 0) return g;
  if (p >= 1) {
    if (T > 0) g[0] = 1;
    return g;
  }
  const double bp = std::sqrt(p), bq = std::sqrt(1 - p);
  double v0 = 1, v1 = 0;  // coordinates in (α, α⊥)
  for (std::size_t k = 0; k < T; ++k) {
    const double s = bp * v0 + bq * v1;
    g[k] = s / bp;
    v0 -= s * bp;
    v1 -= s * bq;
    v1 = -v1;  // reflection about the zero-auxiliary subspace
  }
  return g;
}

struct RewindOutput {
  Mat success;        // unnormalized output state on success
  double fail = 0;    // mass of the Fail outcome after T rounds
  Mat conditional;    // Q_ρ: Q's output conditioned on success
  double p_rho = 0;   // Q's success probability on ρ
  double td = 0;      // TD(Q_ρ, D_ρ) with Fail as an orthogonal outcome
};

inline RewindOutput watrous_rewind_kraus(const std::vector<Mat>& good, std::size_t T, const Mat& rho) {
  require(!good.empty() && T >= 1, "watrous_rewind: need Kraus operators and T >= 1");
  const auto n = good.front().cols();
  require(rho.rows() == n && rho.cols() == n, "watrous_rewind: input dimension mismatch");
  Mat m0 = Mat::Zero(n, n);
  for (const auto& o : good) {
    require(o.cols() == n && o.rows() == good.front().rows(), "watrous_rewind: Kraus shapes differ");
    m0 += o.adjoint() * o;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(m0));
  require(es.eigenvalues().maxCoeff() <= 1 + 1e-9, "watrous_rewind: success operator exceeds identity");

  const auto out_dim = good.front().rows();
  RewindOutput r;
  r.success = Mat::Zero(out_dim, out_dim);
  std::vector<std::vector<double>> g;
  for (Eigen::Index i = 0; i < n; ++i) g.push_back(rewind_amplitudes(std::clamp(es.eigenvalues()(i), 0.0, 1.0), T));
  const Mat& X = es.eigenvectors();
  for (std::size_t k = 0; k < T; ++k) {
    Vec d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = g[static_cast<std::size_t>(i)][k];
    Mat gk = X * d.asDiagonal() * X.adjoint();
    Mat inner = gk * rho * gk.adjoint();
    for (const auto& o : good) r.success += o * inner * o.adjoint();
  }
  r.fail = std::max(0.0, real_trace(rho) - real_trace(r.success));

  r.conditional = Mat::Zero(out_dim, out_dim);
  for (const auto& o : good) r.conditional += o * rho * o.adjoint();
  r.p_rho = real_trace(r.conditional);
  if (r.p_rho > 0) r.conditional /= r.p_rho;
  r.td = trace_distance(r.conditional * real_trace(rho), r.success) + r.fail / 2;
  return r;
}

// ---------------------------------------------------------------------------
// Literal circuit

// Q as a unitary on Inp ⊗ Aux with Aux = B ⊗ W (B is the most significant
// qubit of Aux). Success is b = 0 and the output register is Inp ⊗ W.
struct RewindCircuit {
  std::size_t d_in = 1, d_w = 1;
  UnitaryOracle q;

  std::size_t d_aux() const { return 2 * d_w; }
  std::size_t index(std::size_t inp, std::size_t b, std::size_t w) const { return (inp * 2 + b) * d_w + w; }

  // Kraus operators of the success branch, recovered through the oracle.
  std::vector<Mat> good_kraus() const {
    Mat out(static_cast<Eigen::Index>(d_in * d_w), static_cast<Eigen::Index>(d_in));
    for (std::size_t x = 0; x < d_in; ++x) {
      Vec v = q.apply(basis_vector(d_in * d_aux(), index(x, 0, 0)));
      out.col(static_cast<Eigen::Index>(x)) = branch(v, 0);
    }
    return {out};
  }

  Vec branch(const Vec& v, std::size_t b) const {
    Vec s(static_cast<Eigen::Index>(d_in * d_w));
    for (std::size_t x = 0; x < d_in; ++x)
      for (std::size_t w = 0; w < d_w; ++w)
        s(static_cast<Eigen::Index>(x * d_w + w)) = v(static_cast<Eigen::Index>(index(x, b, w)));
    return s;
  }
};

// Runs the retry loop step by step on a pure input. Returns the unnormalized
// output of each round's success branch.
inline std::vector<Vec> watrous_rewind_literal(const RewindCircuit& c, std::size_t T, const Vec& psi) {
  require(static_cast<std::size_t>(psi.size()) == c.d_in, "watrous_rewind_literal: input dimension mismatch");
  require(c.q.dim() == c.d_in * c.d_aux(), "watrous_rewind_literal: oracle dimension mismatch");
  Vec v = Vec::Zero(static_cast<Eigen::Index>(c.q.dim()));
  for (std::size_t x = 0; x < c.d_in; ++x) v(static_cast<Eigen::Index>(c.index(x, 0, 0))) = psi(static_cast<Eigen::Index>(x));
  v = c.q.apply(v);
  std::vector<Vec> outs;
  for (std::size_t k = 0; k < T; ++k) {
    outs.push_back(c.branch(v, 0));
    if (k + 1 == T) break;
    Vec bad = v;
    for (std::size_t x = 0; x < c.d_in; ++x)
      for (std::size_t w = 0; w < c.d_w; ++w) bad(static_cast<Eigen::Index>(c.index(x, 0, w))) = 0;
    Vec u = c.q.apply_adjoint(bad);
    for (std::size_t i = 0; i < c.q.dim(); ++i)  // 2Π_{aux=0} − I
      if (i % c.d_aux() != 0) u(static_cast<Eigen::Index>(i)) = -u(static_cast<Eigen::Index>(i));
    v = c.q.apply(u);
  }
  return outs;
}

// ---------------------------------------------------------------------------
// Fixtures

struct RewindFixture {
  std::string id;
  RewindCircuit circuit;
};

// Hadamard on B, then a unitary on Inp ⊗ W: success probability exactly 1/2
// for every input.
inline RewindFixture rewind_fixture_half(std::size_t d_in, std::size_t d_w, Rng& rng) {
  RegisterLayout L({{"Inp", d_in}, {"B", 2}, {"W", d_w}});
  const double s = 1 / std::sqrt(2.0);
  Mat h(2, 2);
  h << s, s, s, -s;
  Mat u = haar_unitary(d_in * d_w, rng);
  // Embed u on (Inp, W) controlled on nothing: permute into Inp ⊗ B ⊗ W.
  const auto n = static_cast<Eigen::Index>(L.total());
  Mat big = Mat::Zero(n, n);
  for (std::size_t i = 0; i < L.total(); ++i)
    for (std::size_t j = 0; j < L.total(); ++j) {
      const auto a = L.digits(i), b = L.digits(j);
      big(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          h(static_cast<Eigen::Index>(a[1]), static_cast<Eigen::Index>(b[1])) *
          u(static_cast<Eigen::Index>(a[0] * d_w + a[2]), static_cast<Eigen::Index>(b[0] * d_w + b[2]));
    }
  return {"half", {d_in, d_w, UnitaryOracle::dense(std::move(big))}};
}

// Input-dependent success: B is rotated by angle θ_x controlled on the input
// basis state x, with cos²(θ_x/2) within `spread` of `center`, then a unitary
// scrambles Inp ⊗ W.
inline RewindFixture rewind_fixture_controlled(const std::string& id, std::size_t d_in, std::size_t d_w, double center,
                                               double spread, Rng& rng) {
  require(center - spread > 0 && center + spread < 1, "rewind fixture: success probabilities leave (0, 1)");
  RegisterLayout L({{"Inp", d_in}, {"B", 2}, {"W", d_w}});
  const auto n = static_cast<Eigen::Index>(L.total());
  Mat basis = haar_unitary(d_in, rng);
  Mat ctrl = Mat::Zero(n, n);
  for (std::size_t x = 0; x < d_in; ++x) {
    const double p = center + spread * (2 * rng.real() - 1);
    const double c = std::sqrt(p), s = std::sqrt(1 - p);
    Mat ry(2, 2);
    ry << c, -s, s, c;
    Mat px = outer(basis.col(static_cast<Eigen::Index>(x)), basis.col(static_cast<Eigen::Index>(x)));
    ctrl += kron(kron(px, ry), identity(d_w));
  }
  Mat u = haar_unitary(d_in * d_w, rng);
  Mat scramble = Mat::Zero(n, n);
  for (std::size_t i = 0; i < L.total(); ++i)
    for (std::size_t j = 0; j < L.total(); ++j) {
      const auto a = L.digits(i), b = L.digits(j);
      if (a[1] != b[1]) continue;
      scramble(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          u(static_cast<Eigen::Index>(a[0] * d_w + a[2]), static_cast<Eigen::Index>(b[0] * d_w + b[2]));
    }
  return {id, {d_in, d_w, UnitaryOracle::dense(scramble * ctrl)}};
}

// Range of p(ρ) = tr(M₀ρ) over all inputs.
inline std::pair<double, double> success_range(const std::vector<Mat>& good) {
  Mat m0 = Mat::Zero(good.front().cols(), good.front().cols());
  for (const auto& o : good) m0 += o.adjoint() * o;
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(m0), Eigen::EigenvaluesOnly);
  return {std::clamp(es.eigenvalues().minCoeff(), 0.0, 1.0), std::clamp(es.eigenvalues().maxCoeff(), 0.0, 1.0)};
}

}  // namespace ezk::qsim
