#pragma once

// Dense complex linear algebra for small exact simulations: state types,
// register layouts, unitary oracles and trace distance.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "ezk/error.hpp"
#include "ezk/xof.hpp"

namespace ezk::qsim {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat identity(std::size_t n) { return Mat::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)); }

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Mat outer(const Vec& a, const Vec& b) { return a * b.adjoint(); }

inline Vec basis_vector(std::size_t n, std::size_t i) {
  Vec v = Vec::Zero(static_cast<Eigen::Index>(n));
  v(static_cast<Eigen::Index>(i)) = 1.0;
  return v;
}

inline double op_norm_diff(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline bool is_unitary(const Mat& u, double tol = 1e-10) {
  if (u.rows() != u.cols()) return false;
  return (u.adjoint() * u - identity(static_cast<std::size_t>(u.rows()))).cwiseAbs().maxCoeff() <= tol;
}

inline Mat hermitian_part(const Mat& m) { return (m + m.adjoint()) / 2.0; }

// Sum of absolute eigenvalues of a Hermitian matrix.
inline double trace_norm(const Mat& h) {
  if (h.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

inline double real_trace(const Mat& m) { return m.trace().real(); }

// ---------------------------------------------------------------------------
// Checked value types

struct StateVector {
  Vec amp;

  std::size_t dim() const { return static_cast<std::size_t>(amp.size()); }
  double norm() const { return amp.norm(); }

  static StateVector checked(Vec v) {
    const double n = v.norm();
    require(n > 0 && n <= 1 + 1e-10, "StateVector: norm outside (0, 1]");
    return StateVector{std::move(v)};
  }
};

struct DensityMatrix {
  Mat m;

  std::size_t dim() const { return static_cast<std::size_t>(m.rows()); }

  static DensityMatrix checked(Mat rho, double tol = 1e-8) {
    require(rho.rows() == rho.cols(), "DensityMatrix: not square");
    require((rho - rho.adjoint()).cwiseAbs().maxCoeff() <= tol, "DensityMatrix: not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(rho), Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() >= -tol, "DensityMatrix: not positive semidefinite");
    require(real_trace(rho) <= 1 + 1e-10, "DensityMatrix: trace exceeds 1");
    return DensityMatrix{std::move(rho)};
  }
  static DensityMatrix pure(const Vec& v) { return DensityMatrix{outer(v, v)}; }
};

struct Projector {
  Mat m;

  std::size_t dim() const { return static_cast<std::size_t>(m.rows()); }
  double rank() const { return real_trace(m); }

  static Projector checked(Mat p, double tol = 1e-10) {
    require(p.rows() == p.cols(), "Projector: not square");
    require((p - p.adjoint()).cwiseAbs().maxCoeff() <= tol, "Projector: not Hermitian");
    require((p * p - p).cwiseAbs().maxCoeff() <= tol, "Projector: not idempotent");
    return Projector{std::move(p)};
  }
};

inline double trace_distance(const Mat& rho, const Mat& sigma) {
  require(rho.rows() == sigma.rows() && rho.cols() == sigma.cols(), "trace_distance: dimension mismatch");
  return trace_norm(rho - sigma) / 2.0;
}
inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return trace_distance(rho.m, sigma.m);
}

// ⟨ψ|ρ|ψ⟩ for a unit vector ψ and a normalized ρ.
inline double fidelity_pure(const Vec& psi, const Mat& rho) { return (psi.adjoint() * rho * psi)(0, 0).real(); }

// ---------------------------------------------------------------------------
// Register layouts. The first register is the most significant digit.

struct Register {
  std::string name;
  std::size_t dim = 1;
};

class RegisterLayout {
 public:
  RegisterLayout() = default;
  RegisterLayout(std::vector<Register> regs) : regs_(std::move(regs)) {
    for (const auto& r : regs_) require(r.dim >= 1, "RegisterLayout: register of dimension 0");
    for (std::size_t i = 0; i < regs_.size(); ++i)
      for (std::size_t j = i + 1; j < regs_.size(); ++j)
        require(regs_[i].name != regs_[j].name, "RegisterLayout: duplicate register " + regs_[i].name);
  }

  const std::vector<Register>& registers() const { return regs_; }
  std::size_t total() const {
    std::size_t t = 1;
    for (const auto& r : regs_) t *= r.dim;
    return t;
  }
  std::size_t position(const std::string& name) const {
    for (std::size_t i = 0; i < regs_.size(); ++i)
      if (regs_[i].name == name) return i;
    throw InvalidArgument("RegisterLayout: no register named " + name);
  }
  bool has(const std::string& name) const {
    for (const auto& r : regs_)
      if (r.name == name) return true;
    return false;
  }
  std::size_t dim(const std::string& name) const { return regs_[position(name)].dim; }
  std::size_t stride(const std::string& name) const {
    std::size_t s = 1;
    for (std::size_t i = regs_.size(); i-- > position(name) + 1;) s *= regs_[i].dim;
    return s;
  }
  std::size_t digit(std::size_t index, const std::string& name) const { return (index / stride(name)) % dim(name); }
  std::vector<std::size_t> digits(std::size_t index) const {
    std::vector<std::size_t> d(regs_.size());
    for (std::size_t i = regs_.size(); i-- > 0;) {
      d[i] = index % regs_[i].dim;
      index /= regs_[i].dim;
    }
    return d;
  }
  std::size_t compose(const std::vector<std::size_t>& d) const {
    require(d.size() == regs_.size(), "RegisterLayout: digit count mismatch");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < regs_.size(); ++i) {
      require(d[i] < regs_[i].dim, "RegisterLayout: digit out of range");
      idx = idx * regs_[i].dim + d[i];
    }
    return idx;
  }
  std::size_t dim_of(const std::vector<std::string>& names) const {
    std::size_t t = 1;
    for (const auto& n : names) t *= dim(n);
    return t;
  }

  // Diagonal projector onto basis states whose `values` registers hold the
  // given digits.
  Mat basis_projector(const std::map<std::string, std::size_t>& values) const {
    const std::size_t n = total();
    Mat p = Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      if (matches(i, values)) p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    return p;
  }
  Mat zero_projector(const std::vector<std::string>& names) const {
    std::map<std::string, std::size_t> v;
    for (const auto& n : names) v[n] = 0;
    return basis_projector(v);
  }

  // Isometry |k⟩ ↦ |k⟩_keep ⊗ |0⟩_rest, with `keep` listed in layout order.
  Mat zero_isometry(const std::vector<std::string>& keep) const {
    const std::size_t n = total(), k = dim_of(keep);
    Mat iso = Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < n; ++i) {
      bool rest_zero = true;
      const auto d = digits(i);
      for (std::size_t r = 0; r < regs_.size(); ++r)
        if (!contains(keep, regs_[r].name) && d[r] != 0) rest_zero = false;
      if (rest_zero) iso(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(sub_index(d, keep))) = 1.0;
    }
    return iso;
  }

  // Restricts `rho` to basis states matching `fixed`, keeps `keep` and traces
  // out every other register.
  Mat reduce(const Mat& rho, const std::map<std::string, std::size_t>& fixed, const std::vector<std::string>& keep) const {
    const std::size_t n = total();
    require(static_cast<std::size_t>(rho.rows()) == n, "RegisterLayout::reduce: dimension mismatch");
    std::vector<std::string> traced;
    for (const auto& r : regs_)
      if (!fixed.count(r.name) && !contains(keep, r.name)) traced.push_back(r.name);
    std::map<std::size_t, std::vector<std::pair<std::size_t, std::size_t>>> groups;
    for (std::size_t i = 0; i < n; ++i) {
      if (!matches(i, fixed)) continue;
      const auto d = digits(i);
      groups[sub_index(d, traced)].push_back({i, sub_index(d, keep)});
    }
    const auto k = static_cast<Eigen::Index>(dim_of(keep));
    Mat out = Mat::Zero(k, k);
    for (const auto& [_, members] : groups)
      for (const auto& [i, ki] : members)
        for (const auto& [j, kj] : members)
          out(static_cast<Eigen::Index>(ki), static_cast<Eigen::Index>(kj)) +=
              rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return out;
  }
  Mat partial_trace(const Mat& rho, const std::vector<std::string>& keep) const { return reduce(rho, {}, keep); }

 private:
  static bool contains(const std::vector<std::string>& v, const std::string& s) {
    for (const auto& x : v)
      if (x == s) return true;
    return false;
  }
  bool matches(std::size_t index, const std::map<std::string, std::size_t>& values) const {
    for (const auto& [name, v] : values)
      if (digit(index, name) != v) return false;
    return true;
  }
  std::size_t sub_index(const std::vector<std::size_t>& d, const std::vector<std::string>& names) const {
    std::size_t idx = 0;
    for (std::size_t r = 0; r < regs_.size(); ++r)
      if (contains(names, regs_[r].name)) idx = idx * regs_[r].dim + d[r];
    return idx;
  }

  std::vector<Register> regs_;
};

// ---------------------------------------------------------------------------
// Oracle access to a unitary. Procedures that must stay black-box receive
// only this handle: they can apply U or U† to vectors and nothing else.

class UnitaryOracle {
 public:
  using Apply = std::function<Vec(const Vec&)>;

  UnitaryOracle(std::size_t dim, Apply apply, Apply apply_adjoint)
      : dim_(dim), apply_(std::move(apply)), apply_adjoint_(std::move(apply_adjoint)) {}

  static UnitaryOracle dense(Mat u) {
    require(is_unitary(u), "UnitaryOracle: matrix is not unitary");
    const auto dim = static_cast<std::size_t>(u.rows());
    auto shared = std::make_shared<const Mat>(std::move(u));
    return UnitaryOracle(
        dim, [shared](const Vec& v) -> Vec { return *shared * v; },
        [shared](const Vec& v) -> Vec { return shared->adjoint() * v; });
  }

  std::size_t dim() const { return dim_; }
  Vec apply(const Vec& v) const {
    require(static_cast<std::size_t>(v.size()) == dim_, "UnitaryOracle: dimension mismatch");
    return apply_(v);
  }
  Vec apply_adjoint(const Vec& v) const {
    require(static_cast<std::size_t>(v.size()) == dim_, "UnitaryOracle: dimension mismatch");
    return apply_adjoint_(v);
  }
  // Column-wise application, e.g. to recover U·X for an operator X.
  Mat apply(const Mat& m) const {
    Mat out(m.rows(), m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.col(c) = apply(Vec(m.col(c)));
    return out;
  }
  Mat apply_adjoint(const Mat& m) const {
    Mat out(m.rows(), m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.col(c) = apply_adjoint(Vec(m.col(c)));
    return out;
  }

 private:
  std::size_t dim_;
  Apply apply_;
  Apply apply_adjoint_;
};

// ---------------------------------------------------------------------------
// Random objects from the deterministic stream.

inline double gaussian(Rng& rng) {
  const double u1 = 1.0 - rng.real();
  const double u2 = rng.real();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline Mat ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  Mat g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      const double re = gaussian(rng);
      g(i, j) = Complex(re, gaussian(rng)) / std::sqrt(2.0);
    }
  return g;
}

// Haar-distributed unitary (QR of a Ginibre matrix with the phase fix).
inline Mat haar_unitary(std::size_t n, Rng& rng) {
  Mat g = ginibre(n, n, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < q.cols(); ++i) {
    const Complex d = r(i, i);
    q.col(i) *= std::abs(d) > 0 ? d / std::abs(d) : Complex(1.0);
  }
  return q;
}

inline Vec random_state(std::size_t n, Rng& rng) {
  Vec v = ginibre(n, 1, rng).col(0);
  return v / v.norm();
}

inline Mat random_density(std::size_t n, std::size_t rank, Rng& rng) {
  Mat g = ginibre(n, rank, rng);
  Mat rho = g * g.adjoint();
  return rho / real_trace(rho);
}

inline Mat random_projector(std::size_t n, std::size_t rank, Rng& rng) {
  require(rank <= n, "random_projector: rank exceeds dimension");
  Mat q = haar_unitary(n, rng).leftCols(static_cast<Eigen::Index>(rank));
  return q * q.adjoint();
}

// Orthonormal basis of the range of a Hermitian matrix with eigenvalues
// near 0 or 1 (a projector up to rounding).
inline Mat range_basis(const Mat& p) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(p));
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 0.5) cols.push_back(i);
  Mat b(p.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) b.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(cols[c]);
  return b;
}

}  // namespace ezk::qsim
