#pragma once

// Joint decomposition of two projectors into invariant 1D and 2D blocks.

#include <algorithm>

#include "ezk/qsim/linalg.hpp"

namespace ezk::qsim {

// Overlaps closer than this to 0 or 1 are treated as exact, which moves the
// vector into a 1D block.
inline constexpr double kJordanSnap = 1e-11;
inline constexpr std::size_t kJordanMaxDim = std::size_t{1} << 12;

struct JordanBlock2 {
  Vec alpha, alpha_perp;  // Π₀α = α, Π₀α⊥ = 0
  Vec beta, beta_perp;    // Π₁β = β, Π₁β⊥ = 0
  double p = 0;           // ⟨α|Π₁|α⟩
};

struct JordanBlock1 {
  Vec v;
  bool b = false;  // Π₀v = b·v
  bool c = false;  // Π₁v = c·v
};

struct JordanDecomposition {
  std::size_t dim = 0;
  std::vector<JordanBlock2> two;
  std::vector<JordanBlock1> one;

  Mat reconstruct_pi0() const {
    Mat p = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (const auto& j : two) p += outer(j.alpha, j.alpha);
    for (const auto& j : one)
      if (j.b) p += outer(j.v, j.v);
    return p;
  }
  Mat reconstruct_pi1() const {
    Mat p = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (const auto& j : two) p += outer(j.beta, j.beta);
    for (const auto& j : one)
      if (j.c) p += outer(j.v, j.v);
    return p;
  }
  // Sum of all block projectors; equals the identity for a complete split.
  Mat block_sum() const {
    Mat p = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (const auto& j : two) p += outer(j.alpha, j.alpha) + outer(j.alpha_perp, j.alpha_perp);
    for (const auto& j : one) p += outer(j.v, j.v);
    return p;
  }
};

inline JordanDecomposition jordan_decompose(const Projector& pi0, const Projector& pi1) {
  require(pi0.dim() == pi1.dim(), "jordan_decompose: projectors act on different spaces");
  require(pi0.dim() >= 1 && pi0.dim() <= kJordanMaxDim, "jordan_decompose: dimension out of range");
  Projector::checked(pi0.m, 1e-8);
  Projector::checked(pi1.m, 1e-8);
  const auto n = static_cast<Eigen::Index>(pi0.dim());

  JordanDecomposition d;
  d.dim = pi0.dim();
  Mat b0 = range_basis(pi0.m);
  Mat found(n, 0);
  auto push_found = [&](const Vec& v) {
    found.conservativeResize(n, found.cols() + 1);
    found.col(found.cols() - 1) = v;
  };

  if (b0.cols() > 0) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(b0.adjoint() * pi1.m * b0));
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const double p = std::clamp(es.eigenvalues()(i), 0.0, 1.0);
      Vec alpha = b0 * es.eigenvectors().col(i);
      alpha /= alpha.norm();
      if (p <= kJordanSnap || p >= 1 - kJordanSnap) {
        d.one.push_back({alpha, true, p >= 1 - kJordanSnap});
        push_found(alpha);
        continue;
      }
      JordanBlock2 blk;
      blk.p = p;
      blk.alpha = alpha;
      blk.beta = pi1.m * alpha;
      blk.beta /= blk.beta.norm();
      blk.alpha_perp = blk.beta - std::sqrt(p) * blk.alpha;
      blk.alpha_perp /= blk.alpha_perp.norm();
      blk.beta_perp = blk.alpha - std::sqrt(p) * blk.beta;
      blk.beta_perp /= blk.beta_perp.norm();
      push_found(blk.alpha);
      push_found(blk.alpha_perp);
      d.two.push_back(std::move(blk));
    }
  }

  // The orthogonal complement of everything found so far lies in ker Π₀ and
  // is Π₁-invariant, so Π₁ is diagonal there with eigenvalues 0 or 1.
  Mat rest = identity(pi0.dim()) - found * found.adjoint();
  Mat cb = range_basis(rest);
  if (cb.cols() > 0) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(cb.adjoint() * pi1.m * cb));
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const double c = es.eigenvalues()(i);
      require(c < 1e-6 || c > 1 - 1e-6, "jordan_decompose: complement is not Π₁-invariant");
      Vec v = cb * es.eigenvectors().col(i);
      d.one.push_back({v / v.norm(), false, c > 0.5});
    }
  }
  return d;
}

// Orthogonal split of a state into its S_{<t} and S_{≥t} components.
// S_{<t} holds the 2D blocks with p < t and the 1D blocks with c = 0.
struct ThresholdSplit {
  Vec lt, geq;
};

inline Mat threshold_projector(const JordanDecomposition& d, double t, bool geq) {
  Mat p = Mat::Zero(static_cast<Eigen::Index>(d.dim), static_cast<Eigen::Index>(d.dim));
  for (const auto& j : d.two)
    if ((j.p >= t) == geq) p += outer(j.alpha, j.alpha) + outer(j.alpha_perp, j.alpha_perp);
  for (const auto& j : d.one)
    if (j.c == geq) p += outer(j.v, j.v);
  return p;
}

inline ThresholdSplit threshold_split(const JordanDecomposition& d, double t, const StateVector& state) {
  require(state.dim() == d.dim, "threshold_split: dimension mismatch");
  return {threshold_projector(d, t, false) * state.amp, threshold_projector(d, t, true) * state.amp};
}

}  // namespace ezk::qsim
