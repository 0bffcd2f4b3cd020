#pragma once
// Desk-scale linear algebra: preconditioned conjugate gradients for symmetric
// positive (semi)definite systems, deflated inverse iteration for the lowest
// generalized eigenvalue, and kernel extraction with an explicit rank-gap
// diagnostic.  Everything is deterministic: start vectors come from a fixed
// counter-hashed stream and no routine consults global state.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "rng.hpp"

namespace derham {

using SparseMat = Eigen::SparseMatrix<double>;

struct SolveConfig {
  double tol = 1e-10;
  int maxit = 20000;
};

struct SolveReport {
  Eigen::VectorXd x;
  double residual = 0.0;  // recomputed ||b - A x|| / ||b|| at exit
  int iterations = 0;
};

struct EigConfig {
  double tol = 1e-10;
  int maxit = 400;
  SolveConfig inner;
};

struct EigResult {
  double value = 0.0;
  Eigen::VectorXd vector;  // M-normalized
  double residual = 0.0;      // ||A v - lambda M v|| / ||v||, recomputed
  double residual_rel = 0.0;  // same, over (||A v|| + lambda ||M v||)
  int iterations = 0;
};

struct NullspaceConfig {
  double tol_rank = 1e-8;  // relative to the largest eigenvalue estimate
  int dense_limit = 1200;  // above this, shifted factorized inverse iteration
  bool force_iterative = false;
  EigConfig eig;
};

struct NullspaceResult {
  std::vector<Eigen::VectorXd> vectors;  // M-orthonormal
  int dimension = 0;
  bool rank_gap_warning = false;
  double threshold = 0.0;
  double max_eigenvalue = 0.0;
};

namespace detail {

inline double max_abs_entry(const SparseMat& m) {
  double best = 0.0;
  for (int j = 0; j < m.outerSize(); ++j)
    for (SparseMat::InnerIterator it(m, j); it; ++it)
      best = std::max(best, std::abs(it.value()));
  return best;
}

inline void require_symmetric(const SparseMat& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("matrix not symmetric: non-square");
  SparseMat diff = SparseMat(a.transpose()) - a;
  const double scale = max_abs_entry(a);
  if (max_abs_entry(diff) > 1e-14 * std::max(scale, 1.0))
    throw std::invalid_argument("matrix not symmetric");
}

inline double mdot(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                   const Eigen::VectorXd& mdiag) {
  return (a.array() * b.array() * mdiag.array()).sum();
}

/// Modified Gram-Schmidt in the M inner product.  Returns false when a vector
/// collapses (numerically dependent input).
inline bool m_orthonormalize(std::vector<Eigen::VectorXd>& basis,
                             const Eigen::VectorXd& mdiag) {
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double before = std::sqrt(mdot(basis[i], basis[i], mdiag));
    for (std::size_t j = 0; j < i; ++j)
      basis[i] -= mdot(basis[j], basis[i], mdiag) * basis[j];
    const double after = std::sqrt(mdot(basis[i], basis[i], mdiag));
    if (!(after > 1e-12 * std::max(before, 1e-300))) return false;
    basis[i] /= after;
  }
  return true;
}

inline void m_project_out(Eigen::VectorXd& v,
                          const std::vector<Eigen::VectorXd>& basis,
                          const Eigen::VectorXd& mdiag) {
  for (const auto& b : basis) v -= mdot(b, v, mdiag) * b;
}

/// Deterministic start vector; the tag keeps distinct callers decorrelated.
inline Eigen::VectorXd seeded_vector(Eigen::Index n, std::uint64_t tag) {
  SplitMix64 rng(substream(0x00D15C7E7Eull, tag));
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.next_symmetric();
  return v;
}

}  // namespace detail

/// Conjugate gradients with Jacobi preconditioning.  `kernel` spans the known
/// null space of A: the right-hand side must be Euclidean-orthogonal to it
/// (the solvability condition for a symmetric singular system) and iterates
/// are re-projected to keep rounding drift out of the kernel.  `precond`
/// supplies the preconditioner diagonal; empty means diag(A).
inline SolveReport solve_spd(const SparseMat& a, const Eigen::VectorXd& precond,
                             const Eigen::VectorXd& b,
                             const std::vector<Eigen::VectorXd>& kernel = {},
                             const SolveConfig& cfg = {}) {
  detail::require_symmetric(a);
  const Eigen::Index n = a.rows();
  if (b.size() != n)
    throw std::invalid_argument("inconsistent inputs: right-hand side length");

  std::vector<Eigen::VectorXd> null = kernel;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  if (!null.empty() && !detail::m_orthonormalize(null, ones))
    throw std::runtime_error("degenerate deflation: kernel basis is dependent");
  const double bnorm = b.norm();
  for (const auto& k : null)
    if (std::abs(k.dot(b)) > 1e-10 * std::max(bnorm, 1e-300))
      throw std::runtime_error(
          "inconsistent right-hand side: component along the kernel");

  Eigen::VectorXd diag(n);
  if (precond.size() == n) {
    diag = precond;
  } else {
    diag = a.diagonal();
  }
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(diag[i] > 0.0)) diag[i] = 1.0;

  SolveReport rep;
  rep.x = Eigen::VectorXd::Zero(n);
  if (bnorm == 0.0) return rep;

  Eigen::VectorXd r = b;
  for (const auto& k : null) r -= k.dot(r) * k;
  Eigen::VectorXd z = r.cwiseQuotient(diag);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= cfg.maxit; ++it) {
    Eigen::VectorXd ap = a * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0))
      throw std::runtime_error(
          "no convergence: search direction annihilated (singular system?)");
    const double alpha = rz / pap;
    rep.x += alpha * p;
    r -= alpha * ap;
    for (const auto& k : null) {
      r -= k.dot(r) * k;
      rep.x -= k.dot(rep.x) * k;
    }
    rep.iterations = it;
    if (r.norm() <= cfg.tol * bnorm) break;
    Eigen::VectorXd z2 = r.cwiseQuotient(diag);
    const double rz2 = r.dot(z2);
    p = z2 + (rz2 / rz) * p;
    rz = rz2;
  }
  rep.residual = (b - a * rep.x).norm() / bnorm;
  if (rep.residual > 10.0 * cfg.tol)
    throw std::runtime_error("no convergence: relative residual " +
                             std::to_string(rep.residual) + " after " +
                             std::to_string(rep.iterations) + " iterations");
  return rep;
}

/// Smallest eigenvalue of A v = lambda M v on the M-orthogonal complement of
/// `deflation`, by inverse iteration with CG inner solves.  The deflation
/// basis must span the kernel of A on the admissible subspace, so the inner
/// right-hand sides stay consistent.
inline EigResult smallest_nonzero_eigen(const SparseMat& a,
                                        const Eigen::VectorXd& mdiag,
                                        std::vector<Eigen::VectorXd> deflation,
                                        const EigConfig& cfg = {}) {
  detail::require_symmetric(a);
  const Eigen::Index n = a.rows();
  if (mdiag.size() != n || (mdiag.array() <= 0.0).any())
    throw std::invalid_argument("inconsistent inputs: mass diagonal");

  if (!detail::m_orthonormalize(deflation, mdiag))
    throw std::runtime_error("degenerate deflation: basis is dependent");

  Eigen::VectorXd v = detail::seeded_vector(n, static_cast<std::uint64_t>(n));
  const double before = std::sqrt(detail::mdot(v, v, mdiag));
  detail::m_project_out(v, deflation, mdiag);
  double vnorm = std::sqrt(detail::mdot(v, v, mdiag));
  if (!(vnorm > 1e-12 * before))
    throw std::runtime_error(
        "degenerate deflation: start vector annihilated by the basis");
  v /= vnorm;

  EigResult out;
  double lambda = detail::mdot(v, (a * v).cwiseQuotient(mdiag), mdiag);
  for (int it = 1; it <= cfg.maxit; ++it) {
    const Eigen::VectorXd rhs = mdiag.asDiagonal() * v;
    SolveReport inner = solve_spd(a, Eigen::VectorXd(), rhs, deflation, cfg.inner);
    Eigen::VectorXd w = inner.x;
    detail::m_project_out(w, deflation, mdiag);
    const double wnorm = std::sqrt(detail::mdot(w, w, mdiag));
    if (!(wnorm > 0.0))
      throw std::runtime_error("degenerate deflation: iterate collapsed");
    v = w / wnorm;
    const double prev = lambda;
    lambda = detail::mdot(v, (a * v).cwiseQuotient(mdiag), mdiag);
    out.iterations = it;
    const Eigen::VectorXd resid = a * v - lambda * (mdiag.asDiagonal() * v);
    const double scale = (a * v).norm() + std::abs(lambda) * (mdiag.asDiagonal() * v).norm();
    out.residual_rel = scale > 0.0 ? resid.norm() / scale : 0.0;
    if (std::abs(lambda - prev) <= cfg.tol * std::max(std::abs(lambda), 1e-300) &&
        out.residual_rel <= 10.0 * cfg.tol)
      break;
    if (it == cfg.maxit)
      throw std::runtime_error("no convergence: eigenvalue drift " +
                               std::to_string(std::abs(lambda - prev)) +
                               " after " + std::to_string(it) + " iterations");
  }
  out.value = lambda;
  out.vector = v;
  const Eigen::VectorXd resid = a * v - lambda * (mdiag.asDiagonal() * v);
  out.residual = resid.norm() / v.norm();
  const double scale = (a * v).norm() + std::abs(lambda) * (mdiag.asDiagonal() * v).norm();
  out.residual_rel = scale > 0.0 ? resid.norm() / scale : 0.0;
  return out;
}

/// M-orthonormal basis of the numerical kernel of A (generalized, against
/// diag(M)).  Eigenvalues below tol_rank times the largest one count as zero;
/// an eigenvalue within a factor 10 of that threshold on either side sets the
/// rank-gap warning instead of silently deciding.
inline NullspaceResult nullspace(const SparseMat& a,
                                 const Eigen::VectorXd& mdiag,
                                 const NullspaceConfig& cfg = {}) {
  detail::require_symmetric(a);
  const Eigen::Index n = a.rows();
  if (mdiag.size() != n || (mdiag.array() <= 0.0).any())
    throw std::invalid_argument("inconsistent inputs: mass diagonal");

  NullspaceResult out;
  const Eigen::VectorXd isqrt = mdiag.array().rsqrt();
  const auto whole_space = [&] {
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e[i] = isqrt[i];
      out.vectors.push_back(std::move(e));
    }
    out.dimension = static_cast<int>(n);
    return out;
  };
  if (n <= cfg.dense_limit && !cfg.force_iterative) {
    // Symmetrized dense path: B = M^{-1/2} A M^{-1/2}.
    Eigen::MatrixXd b = Eigen::MatrixXd(a);
    b = isqrt.asDiagonal() * b * isqrt.asDiagonal();
    b = 0.5 * (b + b.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("no convergence: dense eigendecomposition failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    out.max_eigenvalue = std::max(ev[n - 1], 0.0);
    if (out.max_eigenvalue == 0.0) return whole_space();
    out.threshold = cfg.tol_rank * out.max_eigenvalue;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lam = std::max(ev[i], 0.0);
      if (lam < out.threshold)
        out.vectors.push_back(isqrt.asDiagonal() * es.eigenvectors().col(i));
      if (lam > out.threshold / 10.0 && lam < out.threshold * 10.0)
        out.rank_gap_warning = true;
    }
  } else {
    // Estimate the top of the spectrum by power iteration on B.
    Eigen::VectorXd p = detail::seeded_vector(n, 0x70B0ull + static_cast<std::uint64_t>(n));
    double top = 0.0;
    for (int it = 0; it < 50; ++it) {
      p = isqrt.asDiagonal() * (a * (isqrt.asDiagonal() * p));
      const double nrm = p.norm();
      if (nrm == 0.0) break;
      top = nrm;
      p /= nrm;
    }
    out.max_eigenvalue = top;
    if (out.max_eigenvalue == 0.0) return whole_space();
    out.threshold = cfg.tol_rank * out.max_eigenvalue;
    // Shift by sigma M, factor once, then peel the bottom of the spectrum by
    // deflated inverse iteration through backsolves.  Near-kernel directions
    // dominate after one or two applications because sigma sits at the rank
    // threshold, far below the first genuine eigenvalue.
    const double sigma = out.threshold;
    SparseMat msp(n, n);
    msp.reserve(Eigen::VectorXi::Constant(static_cast<int>(n), 1));
    for (Eigen::Index i = 0; i < n; ++i)
      msp.insert(i, i) = mdiag[i];
    msp.makeCompressed();
    const SparseMat ashift = a + sigma * msp;
    Eigen::SimplicialLDLT<SparseMat> ldlt(ashift);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("no convergence: shifted factorization failed");
    const auto rayleigh = [&](const Eigen::VectorXd& v) {
      return std::max(detail::mdot(v, (a * v).cwiseQuotient(mdiag), mdiag), 0.0);
    };
    while (static_cast<Eigen::Index>(out.vectors.size()) < n) {
      Eigen::VectorXd v = detail::seeded_vector(
          n, 0x17E2ull + static_cast<std::uint64_t>(out.vectors.size()));
      detail::m_project_out(v, out.vectors, mdiag);
      double vn = std::sqrt(detail::mdot(v, v, mdiag));
      if (!(vn > 0.0))
        throw std::runtime_error("degenerate deflation: start vector lost");
      v /= vn;
      double lam = rayleigh(v);
      for (int it = 0; it < cfg.eig.maxit; ++it) {
        Eigen::VectorXd w = ldlt.solve(mdiag.asDiagonal() * v);
        detail::m_project_out(w, out.vectors, mdiag);
        const double wn = std::sqrt(detail::mdot(w, w, mdiag));
        if (!(wn > 0.0)) break;
        v = w / wn;
        const double prev = lam;
        lam = rayleigh(v);
        if (std::abs(lam - prev) <= cfg.eig.tol * std::max(lam, sigma)) break;
        // Far above the threshold the peel/stop decision is already settled.
        if (it >= 2 && lam >= 10.0 * out.threshold) break;
      }
      if (lam > out.threshold / 10.0 && lam < out.threshold * 10.0)
        out.rank_gap_warning = true;
      if (lam >= out.threshold) break;
      out.vectors.push_back(v);
    }
  }
  out.dimension = static_cast<int>(out.vectors.size());
  return out;
}

}  // namespace derham
