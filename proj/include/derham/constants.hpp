#pragma once
// Discrete Friedrichs/Poincare and Maxwell constants.
//
// Both constants are 1/sqrt(lambda) for the smallest (nonzero) generalized
// eigenvalue of an operator quadratic form on the masked coefficient space:
//   c_fp: grad^T M grad on untagged nodes, constants deflated when no node
//         is tagged (otherwise the form would vanish on them);
//   c_m:  curl^T M curl + dual_div^T M dual_div on untagged edges, with the
//         harmonic basis deflated.
// The Maxwell constant certifies the quadratic-form inequality
//   |E|^2 <= c_m^2 (|curl E|^2 + |div E|^2),
// which implies the sum-form bound |E| <= c_m (|curl E| + |div E|) with the
// same constant because a + b >= sqrt(a^2 + b^2).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "decompose.hpp"
#include "field.hpp"
#include "operators.hpp"
#include "rng.hpp"
#include "solver.hpp"

namespace derham {

struct SpectrumReport {
  std::string label;        // which estimate the constant certifies
  double constant = 0.0;    // 1 / sqrt(eigenvalue)
  double eigenvalue = 0.0;  // smallest deflated generalized eigenvalue
  Field eigenfield;         // node field (gradient estimate) or edge field
  double residual = 0.0;    // recomputed |A v - lambda M v| / |v| on the
                            // restricted space, relative
  int iterations = 0;
  std::uint64_t grid_fingerprint = 0;
  double spacing = 0.0;
};

/// Smallest eigenvalue of grad^T M grad u = lambda M u on untagged nodes;
/// with no tagged nodes the constant vector spans the kernel and is deflated,
/// so the estimate holds on mean-zero functions.  c_fp = 1/sqrt(lambda).
inline SpectrumReport friedrichs_poincare_constant(const OperatorFamily& fam,
                                                   const MassWeights& masses,
                                                   const EigConfig& cfg = {}) {
  if (masses.grid_fingerprint != fam.grid_fingerprint)
    throw std::invalid_argument(
        "inconsistent inputs: operators and masses built on different grids");
  const Eigen::VectorXd& mn = masses.of(EntityKind::node);
  const SparseMat a_full =
      SparseMat(fam.grad.matrix.transpose()) *
      detail::diag_sparse(masses.of(EntityKind::edge)) * fam.grad.matrix;
  const detail::Subspace sub =
      detail::free_subspace(mn.size(), fam.grad.bc_mask);
  const SparseMat a = detail::restrict_matrix(a_full, sub);
  const Eigen::VectorXd m = detail::restrict_vector(mn, sub);

  std::vector<Eigen::VectorXd> deflation;
  if (fam.grad.bc_mask.empty())
    deflation.push_back(Eigen::VectorXd::Ones(sub.size()));
  EigResult eig = smallest_nonzero_eigen(a, m, deflation, cfg);

  SpectrumReport report;
  report.label = "friedrichs_poincare";
  report.eigenvalue = eig.value;
  report.constant = 1.0 / std::sqrt(eig.value);
  report.residual = eig.residual_rel;
  report.iterations = eig.iterations;
  report.grid_fingerprint = fam.grid_fingerprint;
  report.spacing = fam.spacing;
  report.eigenfield.kind = EntityKind::node;
  report.eigenfield.grid_fingerprint = fam.grid_fingerprint;
  report.eigenfield.coeffs = detail::embed_vector(eig.vector, sub, mn.size());
  const double nrm = norm(report.eigenfield, masses);
  if (nrm > 0.0) report.eigenfield.coeffs /= nrm;
  return report;
}

/// Smallest eigenvalue of
///   (curl^T M curl + dual_div^T M dual_div) E = lambda M E
/// on untagged edges with the harmonic fields deflated; c_m = 1/sqrt(lambda).
inline SpectrumReport maxwell_constant(const OperatorFamily& fam,
                                       const MassWeights& masses,
                                       const HarmonicBasis& basis,
                                       const EigConfig& cfg = {}) {
  if (masses.grid_fingerprint != fam.grid_fingerprint ||
      basis.grid_fingerprint != fam.grid_fingerprint)
    throw std::invalid_argument(
        "inconsistent inputs: operators, masses, and harmonic basis built on "
        "different grids");
  const Eigen::VectorXd& me = masses.of(EntityKind::edge);
  const SparseMat a_full =
      SparseMat(fam.curl.matrix.transpose()) *
          detail::diag_sparse(masses.of(EntityKind::face)) * fam.curl.matrix +
      SparseMat(fam.dual_div.matrix.transpose()) *
          detail::diag_sparse(masses.of(EntityKind::node)) *
          fam.dual_div.matrix;
  const detail::Subspace sub =
      detail::free_subspace(me.size(), fam.curl.bc_mask);
  const SparseMat a = detail::restrict_matrix(a_full, sub);
  const Eigen::VectorXd m = detail::restrict_vector(me, sub);

  std::vector<Eigen::VectorXd> deflation;
  for (const Field& b : basis.fields)
    deflation.push_back(detail::restrict_vector(b.coeffs, sub));
  EigResult eig = smallest_nonzero_eigen(a, m, deflation, cfg);

  SpectrumReport report;
  report.label = "maxwell";
  report.eigenvalue = eig.value;
  report.constant = 1.0 / std::sqrt(eig.value);
  report.residual = eig.residual_rel;
  report.iterations = eig.iterations;
  report.grid_fingerprint = fam.grid_fingerprint;
  report.spacing = fam.spacing;
  report.eigenfield.kind = EntityKind::edge;
  report.eigenfield.grid_fingerprint = fam.grid_fingerprint;
  report.eigenfield.coeffs = detail::embed_vector(eig.vector, sub, me.size());
  const double nrm = norm(report.eigenfield, masses);
  if (nrm > 0.0) report.eigenfield.coeffs /= nrm;
  return report;
}

/// |u| / (c_fp |grad u|) after projecting u onto the admissible space
/// (tagged nodes zeroed; mean removed when nothing is tagged).  Returns -1
/// for fields that project to zero (degenerate probes).
inline double friedrichs_ratio(const Field& u, const OperatorFamily& fam,
                               const MassWeights& masses,
                               const SpectrumReport& fp) {
  if (u.kind != EntityKind::node)
    throw std::invalid_argument("incompatible fields: expected a node field");
  Field probe = u;
  for (int id : fam.grad.bc_mask) probe.coeffs[id] = 0.0;
  if (fam.grad.bc_mask.empty()) {
    const Eigen::VectorXd& mn = masses.of(EntityKind::node);
    probe.coeffs.array() -=
        probe.coeffs.dot(mn) / mn.sum();
  }
  const double unorm = norm(probe, masses);
  if (!(unorm > 0.0)) return -1.0;
  const double gnorm = norm(fam.grad.apply(probe), masses);
  return unorm / (fp.constant * gnorm);
}

/// |E| / (c_m sqrt(|curl E|^2 + |dual_div E|^2)) after projecting E onto the
/// admissible space (tagged edges zeroed, harmonic component removed).
/// Returns -1 for fields that project to zero.
inline double maxwell_ratio(const Field& e, const OperatorFamily& fam,
                            const MassWeights& masses,
                            const HarmonicBasis& basis,
                            const SpectrumReport& cm) {
  if (e.kind != EntityKind::edge)
    throw std::invalid_argument("incompatible fields: expected an edge field");
  Field probe = e;
  for (int id : fam.curl.bc_mask) probe.coeffs[id] = 0.0;
  probe = project_harmonic(probe, basis, masses);
  const double enorm = norm(probe, masses);
  if (!(enorm > 0.0)) return -1.0;
  const double cn = norm(fam.curl.apply(probe), masses);
  const double dn = norm(fam.dual_div.apply(probe), masses);
  return enorm / (cm.constant * std::sqrt(cn * cn + dn * dn));
}

struct EstimateCheck {
  int trials = 0;
  int degenerate = 0;            // probes that projected to zero, skipped
  double worst_grad_ratio = 0.0;     // max over trials, must stay <= 1
  double worst_maxwell_ratio = 0.0;  // likewise
  double grad_sharpness = 0.0;       // ratio on the eigenfield, ~1
  double maxwell_sharpness = 0.0;    // likewise
};

/// Random-probe check that both estimates hold with the computed constants.
/// Every admissible probe must satisfy ratio <= 1 + 1e-8; a violation means
/// the assembly or the deflation is wrong and raises an error.
inline EstimateCheck verify_estimates(const OperatorFamily& fam,
                                      const MassWeights& masses,
                                      const SpectrumReport& fp,
                                      const SpectrumReport& cm,
                                      const HarmonicBasis& basis, int trials,
                                      std::uint64_t seed) {
  if (fp.grid_fingerprint != fam.grid_fingerprint ||
      cm.grid_fingerprint != fam.grid_fingerprint)
    throw std::invalid_argument(
        "inconsistent inputs: constants computed on a different grid");
  EstimateCheck check;
  check.trials = trials;
  const Eigen::Index nn = masses.of(EntityKind::node).size();
  const Eigen::Index ne = masses.of(EntityKind::edge).size();
  for (int t = 0; t < trials; ++t) {
    SplitMix64 rng(substream(seed, static_cast<std::uint64_t>(t)));
    Field u;
    u.kind = EntityKind::node;
    u.grid_fingerprint = fam.grid_fingerprint;
    u.coeffs.resize(nn);
    for (Eigen::Index i = 0; i < nn; ++i) u.coeffs[i] = rng.next_symmetric();
    Field e;
    e.kind = EntityKind::edge;
    e.grid_fingerprint = fam.grid_fingerprint;
    e.coeffs.resize(ne);
    for (Eigen::Index i = 0; i < ne; ++i) e.coeffs[i] = rng.next_symmetric();

    const double fr = friedrichs_ratio(u, fam, masses, fp);
    if (fr < 0.0)
      ++check.degenerate;
    else if (fr > check.worst_grad_ratio)
      check.worst_grad_ratio = fr;
    const double mr = maxwell_ratio(e, fam, masses, basis, cm);
    if (mr < 0.0)
      ++check.degenerate;
    else if (mr > check.worst_maxwell_ratio)
      check.worst_maxwell_ratio = mr;
  }
  check.grad_sharpness = friedrichs_ratio(fp.eigenfield, fam, masses, fp);
  check.maxwell_sharpness =
      maxwell_ratio(cm.eigenfield, fam, masses, basis, cm);

  const double limit = 1.0 + 1e-8;
  const double worst =
      std::max({check.worst_grad_ratio, check.worst_maxwell_ratio,
                check.grad_sharpness, check.maxwell_sharpness});
  if (worst > limit)
    throw std::runtime_error("estimate violated: ratio " +
                             std::to_string(worst) +
                             " exceeds 1 (assembly or deflation bug)");
  return check;
}

}  // namespace derham
