#pragma once

// Amplification by alternating measurements {Π₁, I−Π₁} and {Π₀, I−Π₀}.
//
// Four views of the same procedure:
//   amp_run               sampled run on a pure state
//   amp_branches          exact enumeration of every outcome history
//   AmpUnitary            purified version on space ⊗ B ⊗ Anc
//   amp_sandwich          Σ over successful histories of Π₀K†XKΠ₀, evaluated
//                         per Jordan block pair in O(log T)

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>

#include "ezk/qsim/jordan.hpp"

namespace ezk::qsim {

// (1−2t+2t²)^{T−1}(1−t), computed in log space so tiny t keeps precision.
inline double amp_failure_term(double t, double T) {
  require(t > 0 && t <= 1, "amp bound: t outside (0, 1]");
  require(T >= 1, "amp bound: T < 1");
  if (t == 1) return 0.0;
  return std::exp((T - 1) * std::log1p(-2 * t + 2 * t * t) + std::log1p(-t));
}

inline double amp_success_lower_bound(double t, double T) { return 1.0 - amp_failure_term(t, T); }

// Worst-case success over every overlap p ∈ [t, 1]. The failure term is not
// monotone above p = 1/2, so the maximum is taken over t, 1 and the interior
// stationary points, which solve
// (4(T−1)+2)p² − (6(T−1)+2)p + (2(T−1)+1) = 0.
inline double amp_success_uniform_bound(double t, double T) {
  double worst = amp_failure_term(t, T);
  const double a = 4 * (T - 1) + 2, b = -(6 * (T - 1) + 2), c = 2 * (T - 1) + 1;
  const double disc = b * b - 4 * a * c;
  if (disc >= 0) {
    for (double sign : {-1.0, 1.0}) {
      const double p = (-b + sign * std::sqrt(disc)) / (2 * a);
      if (p > t && p < 1) worst = std::max(worst, amp_failure_term(p, T));
    }
  }
  return 1.0 - worst;
}

// Least T with amp_failure_term(t, T) ≤ eps. Returned as a double because
// for the simulator's thresholds it exceeds 2^64.
inline double amp_iterations(double t, double eps) {
  require(eps > 0 && eps < 1, "amp_iterations: eps outside (0, 1)");
  if (amp_failure_term(t, 1) <= eps) return 1;
  const double step = std::log1p(-2 * t + 2 * t * t);
  double T = 1 + std::ceil((std::log(eps) - std::log1p(-t)) / step);
  // Integer refinement is only meaningful while T is exactly representable.
  if (T >= 0x1p53) return T;
  while (T > 1 && amp_failure_term(t, T - 1) <= eps) T -= 1;
  while (amp_failure_term(t, T) > eps) T += 1;
  return T;
}

// Exact success probability of T rounds on a (possibly mixed) input, by
// dephasing after each measurement.
inline double amp_success_probability(const Projector& pi0, const Projector& pi1, std::size_t T, const Mat& rho) {
  require(pi0.dim() == pi1.dim() && static_cast<std::size_t>(rho.rows()) == pi0.dim(), "amp: dimension mismatch");
  require(T >= 1, "amp: T < 1");
  const Mat q1 = identity(pi1.dim()) - pi1.m, q0 = identity(pi0.dim()) - pi0.m;
  Mat cur = rho;
  double success = 0;
  for (std::size_t k = 0; k < T; ++k) {
    success += real_trace(pi1.m * cur);
    Mat failed = q1 * cur * q1;
    cur = pi0.m * failed * pi0.m + q0 * failed * q0;
  }
  return success;
}

struct AmpBranch {
  bool b = false;
  std::vector<int> c;  // per failed round: 1 if the Π₀ measurement rejected
  Vec post;            // unnormalized; squared norm = branch probability
  double prob() const { return post.squaredNorm(); }

  // Anc value in AmpUnitary's encoding: bit i holds round i's record, and a
  // success at round j sets bit j as a marker.
  std::uint64_t record() const {
    std::uint64_t r = 0;
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c[i]) r |= std::uint64_t{1} << i;
    if (b) r |= std::uint64_t{1} << c.size();
    return r;
  }
};

inline constexpr std::size_t kAmpBranchMaxT = 16;

inline std::vector<AmpBranch> amp_branches(const Projector& pi0, const Projector& pi1, std::size_t T, const Vec& psi) {
  require(T >= 1 && T <= kAmpBranchMaxT, "amp_branches: T out of range");
  require(static_cast<std::size_t>(psi.size()) == pi0.dim(), "amp_branches: dimension mismatch");
  const Mat q1 = identity(pi1.dim()) - pi1.m, q0 = identity(pi0.dim()) - pi0.m;
  std::vector<AmpBranch> out;
  std::vector<AmpBranch> live{AmpBranch{false, {}, psi}};
  for (std::size_t k = 0; k < T; ++k) {
    std::vector<AmpBranch> next;
    for (auto& br : live) {
      out.push_back(AmpBranch{true, br.c, pi1.m * br.post});
      const Vec failed = q1 * br.post;
      for (int c = 0; c < 2; ++c) {
        AmpBranch nb{false, br.c, (c ? q0 : pi0.m) * failed};
        nb.c.push_back(c);
        next.push_back(std::move(nb));
      }
    }
    live = std::move(next);
  }
  for (auto& br : live) out.push_back(std::move(br));
  return out;
}

struct AmpRunResult {
  bool b = false;
  Vec post;             // normalized post-measurement state
  std::vector<int> c;   // Π₀ records of the failed rounds
  std::size_t rounds = 0;
};

inline AmpRunResult amp_run(const Projector& pi0, const Projector& pi1, std::size_t T, const StateVector& state,
                            Rng& rng) {
  require(T >= 1, "amp_run: T < 1");
  require(state.dim() == pi0.dim() && pi0.dim() == pi1.dim(), "amp_run: dimension mismatch");
  Vec psi = state.amp / state.amp.norm();
  AmpRunResult res;
  for (std::size_t k = 0; k < T; ++k) {
    res.rounds = k + 1;
    Vec hit = pi1.m * psi;
    const double p1 = hit.squaredNorm();
    if (rng.real() < p1) {
      res.b = true;
      res.post = hit / hit.norm();
      return res;
    }
    psi = (psi - hit) / std::sqrt(std::max(1 - p1, 1e-300));
    Vec in0 = pi0.m * psi;
    const double p0 = in0.squaredNorm();
    if (rng.real() < p0) {
      psi = in0 / in0.norm();
      res.c.push_back(0);
    } else {
      psi = (psi - in0) / std::sqrt(std::max(1 - p0, 1e-300));
      res.c.push_back(1);
    }
  }
  res.post = psi;
  return res;
}

// ---------------------------------------------------------------------------
// Purified amplification on (space ⊗ B ⊗ Anc) with T one-qubit slots.
// Round i applies three self-inverse gates:
//   1. if B = 0: slot_i ^= [Π₁ accepts]
//   2. B ^= slot_i
//   3. if B = 0: slot_i ^= [Π₀ rejects]

inline constexpr std::size_t kAmpUnitaryMaxDim = std::size_t{1} << 14;

class AmpUnitary {
 public:
  AmpUnitary(const Projector& pi0, const Projector& pi1, std::size_t T) : pi0_(pi0.m), pi1_(pi1.m), T_(T) {
    require(pi0.dim() == pi1.dim(), "amp_unitary: dimension mismatch");
    require(T >= 1 && T <= 13, "amp_unitary: T out of range");
    if ((std::size_t{1} << (T + 1)) * pi0.dim() > kAmpUnitaryMaxDim)
      throw Unsupported("amp_unitary: 2^(T+1)·dim exceeds 2^14");
    n_ = pi0.dim();
  }

  std::size_t T() const { return T_; }
  std::size_t space_dim() const { return n_; }
  std::size_t dim() const { return n_ * 2 * anc_count(); }
  std::size_t anc_count() const { return std::size_t{1} << T_; }
  std::size_t index(std::size_t x, int b, std::uint64_t anc) const {
    return (x * 2 + static_cast<std::size_t>(b)) * anc_count() + anc;
  }

  Vec apply(const Vec& v) const {
    Vec w = v;
    for (std::size_t i = 0; i < T_; ++i) round(w, i);
    return w;
  }
  Vec apply_adjoint(const Vec& v) const {
    Vec w = v;
    for (std::size_t i = T_; i-- > 0;) round_inverse(w, i);
    return w;
  }
  Mat dense() const {
    require(dim() <= 1024, "AmpUnitary::dense: too large");
    Mat u(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
    for (std::size_t c = 0; c < dim(); ++c) u.col(static_cast<Eigen::Index>(c)) = apply(basis_vector(dim(), c));
    return u;
  }
  // Embeds a space vector with B = Anc = 0.
  Vec embed(const Vec& x) const {
    Vec v = Vec::Zero(static_cast<Eigen::Index>(dim()));
    for (std::size_t i = 0; i < n_; ++i) v(static_cast<Eigen::Index>(index(i, 0, 0))) = x(static_cast<Eigen::Index>(i));
    return v;
  }
  Vec slice(const Vec& v, int b, std::uint64_t anc) const {
    Vec s(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) s(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(index(i, b, anc)));
    return s;
  }
  void set_slice(Vec& v, int b, std::uint64_t anc, const Vec& s) const {
    for (std::size_t i = 0; i < n_; ++i) v(static_cast<Eigen::Index>(index(i, b, anc))) = s(static_cast<Eigen::Index>(i));
  }

 private:
  // Controlled reflection pair: (s0, s1) ← (Q s0 + P s1, P s0 + Q s1), Q = I − P.
  void mix(Vec& v, int b, std::uint64_t a0, std::uint64_t a1, const Mat& p) const {
    Vec s0 = slice(v, b, a0), s1 = slice(v, b, a1);
    Vec p0 = p * s0, p1 = p * s1;
    set_slice(v, b, a0, s0 - p0 + p1);
    set_slice(v, b, a1, p0 + s1 - p1);
  }
  void gate1(Vec& v, std::size_t i) const {
    const std::uint64_t bit = std::uint64_t{1} << i;
    for (std::uint64_t a = 0; a < anc_count(); ++a)
      if (!(a & bit)) mix(v, 0, a, a | bit, pi1_);
  }
  void gate2(Vec& v, std::size_t i) const {
    const std::uint64_t bit = std::uint64_t{1} << i;
    for (std::uint64_t a = 0; a < anc_count(); ++a)
      if (a & bit) {
        Vec s0 = slice(v, 0, a), s1 = slice(v, 1, a);
        set_slice(v, 0, a, s1);
        set_slice(v, 1, a, s0);
      }
  }
  void gate3(Vec& v, std::size_t i) const {
    const std::uint64_t bit = std::uint64_t{1} << i;
    const Mat reject = identity(n_) - pi0_;
    for (std::uint64_t a = 0; a < anc_count(); ++a)
      if (!(a & bit)) mix(v, 0, a, a | bit, reject);
  }
  void round(Vec& v, std::size_t i) const {
    gate1(v, i);
    gate2(v, i);
    gate3(v, i);
  }
  void round_inverse(Vec& v, std::size_t i) const {
    gate3(v, i);
    gate2(v, i);
    gate1(v, i);
  }

  Mat pi0_, pi1_;
  std::size_t T_;
  std::size_t n_ = 0;
};

inline AmpUnitary amp_unitary(const Projector& pi0, const Projector& pi1, std::size_t T) { return {pi0, pi1, T}; }

// ---------------------------------------------------------------------------
// Heisenberg-picture sum over successful histories.
//
// For histories h that end in a Π₁ success, K_h = Π₁ M_{c_k} ⋯ M_{c_1} with
// M_c = P_c(I−Π₁). The returned operator is Π₀ (Σ_h K_h† X K_h) Π₀. Every
// operator involved is block diagonal in the Jordan basis, so each block pair
// evolves under its own small linear map L and the T-term geometric series
// is summed by doubling.

namespace detail {

struct JordanFrame {
  struct Block {
    Mat vecs;  // columns: (α, α⊥) or (v)
    Mat p0, p1;
  };
  std::vector<Block> blocks;
};

// Keeps only blocks with a Π₀ component and a Π₁ component; the rest
// cannot contribute to a sandwiched successful history.
inline JordanFrame active_frame(const JordanDecomposition& d) {
  JordanFrame f;
  for (const auto& j : d.two) {
    JordanFrame::Block b;
    b.vecs.resize(static_cast<Eigen::Index>(d.dim), 2);
    b.vecs.col(0) = j.alpha;
    b.vecs.col(1) = j.alpha_perp;
    b.p0 = Mat::Zero(2, 2);
    b.p0(0, 0) = 1.0;
    Vec beta(2);
    beta << std::sqrt(j.p), std::sqrt(1 - j.p);
    b.p1 = beta * beta.adjoint();
    f.blocks.push_back(std::move(b));
  }
  for (const auto& j : d.one)
    if (j.b && j.c) {
      JordanFrame::Block b;
      b.vecs = j.v;
      b.p0 = Mat::Identity(1, 1);
      b.p1 = Mat::Identity(1, 1);
      f.blocks.push_back(std::move(b));
    }
  return f;
}

// Returns Σ_{k<N} L^k.
inline Mat geometric_sum(const Mat& L, std::uint64_t N) {
  const auto n = L.rows();
  if (N == 0) return Mat::Zero(n, n);
  // Binary expansion from the top bit: maintain (L^m, Σ_{k<m} L^k).
  Mat pw = Mat::Identity(n, n), sum = Mat::Zero(n, n);
  for (int bit = 63; bit >= 0; --bit) {
    sum = sum + pw * sum;  // m → 2m
    pw = pw * pw;
    if ((N >> bit) & 1U) {  // m → m + 1
      sum = sum + pw;
      pw = pw * L;
    }
  }
  return sum;
}

inline std::uint64_t clamp_iterations(double T) {
  require(T >= 1, "amp: T < 1");
  // Beyond 2^62 rounds every active block has decayed to zero in double
  // precision: its per-round survival is at most 1 − 2·kJordanSnap.
  constexpr double cap = 4611686018427387904.0;  // 2^62
  return T >= cap ? std::uint64_t{1} << 62 : static_cast<std::uint64_t>(std::floor(T));
}

}  // namespace detail

inline Mat amp_sandwich(const JordanDecomposition& d, const Mat& X, double T) {
  require(static_cast<std::size_t>(X.rows()) == d.dim, "amp_sandwich: dimension mismatch");
  const std::uint64_t N = detail::clamp_iterations(T);
  const auto frame = detail::active_frame(d);
  const auto n = static_cast<Eigen::Index>(d.dim);
  Mat out = Mat::Zero(n, n);
  std::vector<std::array<Mat, 2>> m(frame.blocks.size());
  for (std::size_t i = 0; i < frame.blocks.size(); ++i) {
    const auto& b = frame.blocks[i];
    const Mat q1 = Mat::Identity(b.p1.rows(), b.p1.cols()) - b.p1;
    m[i][1] = b.p0 * q1;
    m[i][0] = (Mat::Identity(b.p0.rows(), b.p0.cols()) - b.p0) * q1;
  }
  for (std::size_t I = 0; I < frame.blocks.size(); ++I)
    for (std::size_t J = 0; J < frame.blocks.size(); ++J) {
      const auto& bi = frame.blocks[I];
      const auto& bj = frame.blocks[J];
      Mat y = bi.p1 * (bi.vecs.adjoint() * X * bj.vecs) * bj.p1;
      if (y.cwiseAbs().maxCoeff() == 0) continue;
      Mat L = kron(m[J][0].transpose(), m[I][0].adjoint()) + kron(m[J][1].transpose(), m[I][1].adjoint());
      Mat G = detail::geometric_sum(L, N);
      Vec z = G * Eigen::Map<const Vec>(y.data(), y.size());
      Mat zm = Eigen::Map<const Mat>(z.data(), y.rows(), y.cols());
      out += bi.vecs * (bi.p0 * zm * bj.p0) * bj.vecs.adjoint();
    }
  return out;
}

// Direct iteration of the same sum; used to cross-check the block evaluator.
inline Mat amp_sandwich_dense(const Projector& pi0, const Projector& pi1, const Mat& X, std::size_t T) {
  const Mat q1 = identity(pi1.dim()) - pi1.m, q0 = identity(pi0.dim()) - pi0.m;
  Mat term = pi1.m * X * pi1.m, sum = term;
  for (std::size_t k = 1; k < T; ++k) {
    term = q1 * (pi0.m * term * pi0.m + q0 * term * q0) * q1;
    sum += term;
  }
  return pi0.m * sum * pi0.m;
}

}  // namespace ezk::qsim
