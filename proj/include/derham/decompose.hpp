#pragma once
// Helmholtz decompositions on edge fields and the harmonic (cohomology)
// basis of the mixed-boundary complex.
//
// The simple split works on the full edge-coefficient space, which equals
// range(grad) plus its M-orthogonal complement kernel(dual_div).  The refined
// split lives on the untagged-edge subspace: essential-class edge
// coefficients model tangential boundary trace data, which the three-way
// decomposition (gradients + harmonic fields + dual-curl range) does not
// contain, so the input is projected there first and the projected field is
// recorded in the result for reconstruction checks.

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "operators.hpp"
#include "solver.hpp"

namespace derham {

struct HelmholtzSplit {
  Field potential;      // node scalar behind the gradient part
  Field grad_part;      // edge
  Field residual_part;  // edge, annihilated by dual_div
  bool refined = false;
  Field admissible_input;  // the field actually decomposed (refined mode)
  Field harmonic_part;     // edge (refined mode)
  Field curl_part;         // edge (refined mode)
  Field curl_potential;    // face witness: dual_curl(curl_potential) = curl_part
  double certification_residual = 0.0;
};

struct HarmonicBasis {
  std::vector<Field> fields;  // M-orthonormal edge fields, zero on tagged edges
  int dimension = 0;
  bool rank_gap_warning = false;
  double threshold = 0.0;
  double max_eigenvalue = 0.0;
  std::uint64_t grid_fingerprint = 0;
};

namespace detail {

inline SparseMat diag_sparse(const Eigen::VectorXd& d) {
  SparseMat m(d.size(), d.size());
  m.reserve(Eigen::VectorXi::Constant(static_cast<int>(d.size()), 1));
  for (Eigen::Index i = 0; i < d.size(); ++i) m.insert(i, i) = d[i];
  m.makeCompressed();
  return m;
}

// Index maps between a full coefficient space and the complement of a masked
// id set.  Restriction drops masked rows and columns entirely instead of
// leaving zero rows, which would pollute eigenvalue and nullspace solves.
struct Subspace {
  std::vector<int> to_sub;  // full id -> sub id, -1 when masked
  std::vector<int> ids;     // sub id -> full id
  int size() const { return static_cast<int>(ids.size()); }
};

inline Subspace free_subspace(Eigen::Index n, const std::vector<int>& masked) {
  Subspace s;
  s.to_sub.assign(static_cast<std::size_t>(n), -1);
  std::vector<char> flag(static_cast<std::size_t>(n), 0);
  for (int id : masked) flag[static_cast<std::size_t>(id)] = 1;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!flag[static_cast<std::size_t>(i)]) {
      s.to_sub[static_cast<std::size_t>(i)] = static_cast<int>(s.ids.size());
      s.ids.push_back(static_cast<int>(i));
    }
  return s;
}

inline SparseMat restrict_matrix(const SparseMat& a, const Subspace& s) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int j = 0; j < a.outerSize(); ++j) {
    const int jf = s.to_sub[static_cast<std::size_t>(j)];
    if (jf < 0) continue;
    for (SparseMat::InnerIterator it(a, j); it; ++it) {
      const int rf = s.to_sub[static_cast<std::size_t>(it.row())];
      if (rf >= 0) trips.emplace_back(rf, jf, it.value());
    }
  }
  SparseMat out(s.size(), s.size());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

inline Eigen::VectorXd restrict_vector(const Eigen::VectorXd& v,
                                       const Subspace& s) {
  Eigen::VectorXd out(s.size());
  for (int i = 0; i < s.size(); ++i)
    out[i] = v[s.ids[static_cast<std::size_t>(i)]];
  return out;
}

inline Eigen::VectorXd embed_vector(const Eigen::VectorXd& v, const Subspace& s,
                                    Eigen::Index n) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < s.size(); ++i)
    out[s.ids[static_cast<std::size_t>(i)]] = v[i];
  return out;
}

inline void require_edge_input(const Field& x, const OperatorFamily& fam,
                               const MassWeights& masses) {
  if (x.kind != EntityKind::edge)
    throw std::invalid_argument(std::string("incompatible fields: expected an "
                                            "edge field, got ") +
                                to_string(x.kind));
  if (x.grid_fingerprint != fam.grid_fingerprint ||
      masses.grid_fingerprint != fam.grid_fingerprint)
    throw std::invalid_argument(
        "inconsistent inputs: field, operators, and masses built on "
        "different grids");
}

}  // namespace detail

/// Least-squares gradient part: u solves <grad u, grad v> = <X, grad v> for
/// every untagged node v; with no essential class the potential is pinned by
/// the M-weighted mean-zero condition.  residual_part = X - grad u lies in
/// kernel(dual_div) up to solver tolerance.
inline HelmholtzSplit simple_split(const Field& x, const OperatorFamily& fam,
                                   const MassWeights& masses,
                                   const SolveConfig& cfg = {}) {
  detail::require_edge_input(x, fam, masses);
  const Eigen::VectorXd& me = masses.of(EntityKind::edge);
  const Eigen::VectorXd& mn = masses.of(EntityKind::node);
  const SparseMat mesp = detail::diag_sparse(me);
  const SparseMat lap =
      SparseMat(fam.grad.matrix.transpose()) * mesp * fam.grad.matrix;
  const Eigen::VectorXd rhs =
      fam.grad.matrix.transpose() * (me.asDiagonal() * x.coeffs);

  std::vector<Eigen::VectorXd> kernel;
  if (fam.grad.bc_mask.empty())
    kernel.push_back(Eigen::VectorXd::Ones(lap.rows()));
  // A right-hand side at rounding level means X has no gradient component;
  // solving would only amplify noise (and trip consistency checks on it).
  const double rhs_scale =
      (2.0 / fam.spacing) * (me.asDiagonal() * x.coeffs).norm();
  Eigen::VectorXd u;
  if (rhs.norm() <= 1e-13 * rhs_scale) {
    u = Eigen::VectorXd::Zero(lap.rows());
  } else {
    SolveReport sol = solve_spd(lap, Eigen::VectorXd(), rhs, kernel, cfg);
    u = sol.x;
  }
  if (!kernel.empty()) {
    const Eigen::VectorXd ones = kernel.front();
    u -= (detail::mdot(u, ones, mn) / detail::mdot(ones, ones, mn)) * ones;
  }

  HelmholtzSplit split;
  split.potential.kind = EntityKind::node;
  split.potential.grid_fingerprint = fam.grid_fingerprint;
  split.potential.coeffs = std::move(u);
  split.grad_part = fam.grad.apply(split.potential);
  split.residual_part = x;
  split.residual_part.coeffs -= split.grad_part.coeffs;
  return split;
}

/// M-orthonormal basis of the discrete Dirichlet-Neumann fields: the kernel
/// of curl^T M curl + dual_div^T M dual_div restricted to untagged edges.
/// Its dimension is the topological invariant of the (domain, partition)
/// pair and is independent of resolution.
inline HarmonicBasis harmonic_basis(const OperatorFamily& fam,
                                    const MassWeights& masses,
                                    const NullspaceConfig& cfg = {}) {
  if (masses.grid_fingerprint != fam.grid_fingerprint)
    throw std::invalid_argument(
        "inconsistent inputs: operators and masses built on different grids");
  const Eigen::VectorXd& me = masses.of(EntityKind::edge);
  const SparseMat a_full =
      SparseMat(fam.curl.matrix.transpose()) *
          detail::diag_sparse(masses.of(EntityKind::face)) * fam.curl.matrix +
      SparseMat(fam.dual_div.matrix.transpose()) *
          detail::diag_sparse(masses.of(EntityKind::node)) * fam.dual_div.matrix;

  // Restrict to untagged edges; tagged coefficients are essential zeros, not
  // candidate harmonic directions.
  const Eigen::Index ne = me.size();
  const detail::Subspace sub = detail::free_subspace(ne, fam.curl.bc_mask);
  const SparseMat a_free = detail::restrict_matrix(a_full, sub);
  const Eigen::VectorXd m_free = detail::restrict_vector(me, sub);

  NullspaceResult ns = nullspace(a_free, m_free, cfg);
  HarmonicBasis basis;
  basis.dimension = ns.dimension;
  basis.rank_gap_warning = ns.rank_gap_warning;
  basis.threshold = ns.threshold;
  basis.max_eigenvalue = ns.max_eigenvalue;
  basis.grid_fingerprint = fam.grid_fingerprint;
  for (const auto& v : ns.vectors) {
    Field f;
    f.kind = EntityKind::edge;
    f.grid_fingerprint = fam.grid_fingerprint;
    f.coeffs = detail::embed_vector(v, sub, ne);
    basis.fields.push_back(std::move(f));
  }
  return basis;
}

/// X minus its component in span(basis); idempotent for an M-orthonormal
/// basis.
inline Field project_harmonic(const Field& x, const HarmonicBasis& basis,
                              const MassWeights& masses) {
  if (x.kind != EntityKind::edge)
    throw std::invalid_argument("incompatible fields: expected an edge field");
  if (x.grid_fingerprint != basis.grid_fingerprint ||
      masses.grid_fingerprint != x.grid_fingerprint)
    throw std::invalid_argument(
        "inconsistent inputs: field and basis built on different grids");
  Field out = x;
  for (const Field& b : basis.fields)
    out.coeffs -= inner_product(b, out, masses) * b.coeffs;
  return out;
}

/// Three-way split of the untagged-edge projection of X: gradient part,
/// harmonic projection, and a dual-curl part certified by solving for an
/// explicit face potential.
inline HelmholtzSplit refined_split(const Field& x, const OperatorFamily& fam,
                                    const MassWeights& masses,
                                    const HarmonicBasis& basis,
                                    const SolveConfig& cfg = {}) {
  detail::require_edge_input(x, fam, masses);
  if (basis.grid_fingerprint != fam.grid_fingerprint)
    throw std::invalid_argument(
        "inconsistent inputs: harmonic basis built on a different grid");

  Field projected = x;
  for (int id : fam.curl.bc_mask) projected.coeffs[id] = 0.0;

  HelmholtzSplit split = simple_split(projected, fam, masses, cfg);
  split.refined = true;
  split.admissible_input = projected;

  split.harmonic_part = zero_field_like(projected);
  for (const Field& b : basis.fields)
    split.harmonic_part.coeffs +=
        inner_product(b, split.residual_part, masses) * b.coeffs;
  split.curl_part = split.residual_part;
  split.curl_part.coeffs -= split.harmonic_part.coeffs;

  // Certification: find a face potential reproducing the curl part through
  // the descending curl; failure means the field has a component outside
  // range(dual_curl), i.e. the harmonic basis was incomplete.
  const Eigen::VectorXd& me = masses.of(EntityKind::edge);
  const double cnorm = norm(split.curl_part, masses);
  split.curl_potential.kind = EntityKind::face;
  split.curl_potential.grid_fingerprint = fam.grid_fingerprint;
  split.curl_potential.coeffs =
      Eigen::VectorXd::Zero(fam.dual_curl.matrix.cols());
  if (cnorm > 1e-13 * std::max(1.0, norm(projected, masses))) {
    const SparseMat k = fam.dual_curl.matrix;
    const SparseMat normal_eq =
        SparseMat(k.transpose()) * detail::diag_sparse(me) * k;
    const Eigen::VectorXd rhs =
        k.transpose() * (me.asDiagonal() * split.curl_part.coeffs);
    SolveConfig cert_cfg = cfg;
    cert_cfg.tol = std::min(cfg.tol, 1e-11);
    cert_cfg.maxit = std::max(cfg.maxit, 40000);
    // rhs at rounding level: the candidate is M-orthogonal to the range and
    // the zero potential is already the least-squares answer.
    const double rhs_scale = (16.0 / fam.spacing) *
                             (me.asDiagonal() * split.curl_part.coeffs).norm();
    if (rhs.norm() > 1e-13 * rhs_scale) {
      SolveReport sol =
          solve_spd(normal_eq, Eigen::VectorXd(), rhs, {}, cert_cfg);
      split.curl_potential.coeffs = sol.x;
    }
    Field reached = fam.dual_curl.apply(split.curl_potential);
    reached.coeffs -= split.curl_part.coeffs;
    split.certification_residual = norm(reached, masses) / cnorm;
    if (split.certification_residual > 1e-8)
      throw std::runtime_error(
          "range certification failed: relative residual " +
          std::to_string(split.certification_residual));
  }
  return split;
}

/// CSV export of one field: entity index and coefficient per line.
inline void write_field_csv(const Field& f, std::ostream& out) {
  out << "entity,value\n";
  out.precision(17);
  for (int i = 0; i < f.size(); ++i) out << i << ',' << f.coeffs[i] << '\n';
}

}  // namespace derham
