#pragma once
// Staggered difference operators on the voxel complex.
//
// Primal (ascending) operators carry the essential class tag: grad_T maps
// node values to edge differences with columns of tagged nodes zeroed, and
// likewise curl_T (edge->face) and div_T (face->cell).  Each has a dual
// (descending) partner assembled directly from the same incidences and the
// clipped dual-cell masses: dual_div (edge->node), dual_curl (face->edge),
// dual_grad (cell->face), with rows of tagged codomain entities zeroed.  The
// duals realize the complementary-class operators, and the construction makes
//   adjoint(grad_T) = -dual_div,  adjoint(curl_T) = +dual_curl,
//   adjoint(div_T)  = -dual_grad
// hold entrywise: expression trees match term by term, and the tag closure
// property (every edge/face of a tagged entity is tagged) keeps masked and
// zeroed index sets aligned.

#include <cstdint>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "field.hpp"

namespace derham {

struct DiscreteOperator {
  Eigen::SparseMatrix<double> matrix;  // codomain rows, domain columns
  EntityKind domain_kind = EntityKind::node;
  EntityKind codomain_kind = EntityKind::edge;
  BoundaryTag mask_tag = BoundaryTag::T;
  std::vector<int> bc_mask;  // domain indices whose columns are identically zero
  std::string label;
  std::uint64_t grid_fingerprint = 0;

  Field apply(const Field& u) const {
    if (u.kind != domain_kind)
      throw std::invalid_argument(
          std::string("incompatible fields: operator domain is ") +
          to_string(domain_kind) + ", field is " + to_string(u.kind));
    if (u.grid_fingerprint != grid_fingerprint)
      throw std::invalid_argument(
          "inconsistent inputs: field built on a different grid");
    if (u.coeffs.size() != matrix.cols())
      throw std::invalid_argument(
          "inconsistent inputs: coefficient length does not match operator");
    Field out;
    out.kind = codomain_kind;
    out.grid_fingerprint = grid_fingerprint;
    out.coeffs = matrix * u.coeffs;
    return out;
  }
};

namespace detail {

inline void require_provenance(const EntityIndex& index,
                               const BoundaryPartition& part,
                               const MassWeights& masses) {
  if (part.fingerprint != index.fingerprint() ||
      masses.grid_fingerprint != index.fingerprint())
    throw std::invalid_argument(
        "inconsistent inputs: index, partition, and masses built on "
        "different grids");
}

inline void require_class_tag(BoundaryTag tag) {
  if (tag == BoundaryTag::interior)
    throw std::invalid_argument("mask tag must be T or N");
}

inline char tag_letter(BoundaryTag tag) {
  return tag == BoundaryTag::T ? 'T' : 'N';
}

inline BoundaryTag other_tag(BoundaryTag tag) {
  return tag == BoundaryTag::T ? BoundaryTag::N : BoundaryTag::T;
}

inline bool has_tag(const BoundaryPartition& part, EntityKind kind, int id,
                    BoundaryTag tag) {
  switch (kind) {
    case EntityKind::node: return part.node_tag[static_cast<std::size_t>(id)] == tag;
    case EntityKind::edge: return part.edge_tag[static_cast<std::size_t>(id)] == tag;
    case EntityKind::face: return part.face_tag[static_cast<std::size_t>(id)] == tag;
    default: return false;  // cells carry no boundary class
  }
}

/// Domain indices with no stored nonzero entry.  For primal operators this
/// recovers exactly the tagged set; for duals it also picks up columns zeroed
/// by the closure property.
inline std::vector<int> zero_columns(const Eigen::SparseMatrix<double>& m) {
  std::vector<int> out;
  for (int j = 0; j < m.outerSize(); ++j) {
    bool any = false;
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, j); it; ++it)
      if (it.value() != 0.0) { any = true; break; }
    if (!any) out.push_back(j);
  }
  return out;
}

inline DiscreteOperator finish_op(Eigen::SparseMatrix<double> matrix,
                                  EntityKind dom, EntityKind cod,
                                  BoundaryTag tag, std::string label,
                                  std::uint64_t fingerprint) {
  DiscreteOperator op;
  op.matrix = std::move(matrix);
  op.matrix.makeCompressed();
  op.domain_kind = dom;
  op.codomain_kind = cod;
  op.mask_tag = tag;
  op.bc_mask = zero_columns(op.matrix);
  op.label = std::move(label);
  op.grid_fingerprint = fingerprint;
  return op;
}

}  // namespace detail

/// Node -> edge signed difference over h; columns of tag-class nodes zeroed.
inline DiscreteOperator gradient_op(const EntityIndex& index,
                                    const BoundaryPartition& part,
                                    const MassWeights& masses,
                                    BoundaryTag tag = BoundaryTag::T) {
  detail::require_provenance(index, part, masses);
  detail::require_class_tag(tag);
  const double inv_h = 1.0 / index.spacing();
  const int ne = index.count(EntityKind::edge);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * static_cast<std::size_t>(ne));
  for (int e = 0; e < ne; ++e) {
    const auto ends = index.edge_nodes(e);
    if (!detail::has_tag(part, EntityKind::node, ends.tail, tag))
      trips.emplace_back(e, ends.tail, -inv_h);
    if (!detail::has_tag(part, EntityKind::node, ends.head, tag))
      trips.emplace_back(e, ends.head, inv_h);
  }
  Eigen::SparseMatrix<double> m(ne, index.count(EntityKind::node));
  m.setFromTriplets(trips.begin(), trips.end());
  return detail::finish_op(std::move(m), EntityKind::node, EntityKind::edge,
                           tag, std::string("grad_") + detail::tag_letter(tag),
                           index.fingerprint());
}

/// Edge -> face circulation over h; columns of tag-class edges zeroed.
inline DiscreteOperator curl_op(const EntityIndex& index,
                                const BoundaryPartition& part,
                                const MassWeights& masses,
                                BoundaryTag tag = BoundaryTag::T) {
  detail::require_provenance(index, part, masses);
  detail::require_class_tag(tag);
  const double inv_h = 1.0 / index.spacing();
  const int nf = index.count(EntityKind::face);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(4 * static_cast<std::size_t>(nf));
  for (int f = 0; f < nf; ++f)
    for (const auto& inc : index.face_edges(f))
      if (!detail::has_tag(part, EntityKind::edge, inc.id, tag))
        trips.emplace_back(f, inc.id, inc.sign * inv_h);
  Eigen::SparseMatrix<double> m(nf, index.count(EntityKind::edge));
  m.setFromTriplets(trips.begin(), trips.end());
  return detail::finish_op(std::move(m), EntityKind::edge, EntityKind::face,
                           tag, std::string("curl_") + detail::tag_letter(tag),
                           index.fingerprint());
}

/// Face -> cell net flux over h; columns of tag-class faces zeroed.
inline DiscreteOperator divergence_op(const EntityIndex& index,
                                      const BoundaryPartition& part,
                                      const MassWeights& masses,
                                      BoundaryTag tag = BoundaryTag::T) {
  detail::require_provenance(index, part, masses);
  detail::require_class_tag(tag);
  const double inv_h = 1.0 / index.spacing();
  const int nc = index.count(EntityKind::cell);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(6 * static_cast<std::size_t>(nc));
  for (int c = 0; c < nc; ++c)
    for (const auto& inc : index.cell_faces(c))
      if (!detail::has_tag(part, EntityKind::face, inc.id, tag))
        trips.emplace_back(c, inc.id, inc.sign * inv_h);
  Eigen::SparseMatrix<double> m(nc, index.count(EntityKind::face));
  m.setFromTriplets(trips.begin(), trips.end());
  return detail::finish_op(std::move(m), EntityKind::face, EntityKind::cell,
                           tag, std::string("div_") + detail::tag_letter(tag),
                           index.fingerprint());
}

/// Edge -> node divergence of the complementary class: at each untagged node
/// the mass-weighted net flux of incident edges; rows of tag-class nodes
/// zeroed; edges absent outside the domain impose the weak zero-flux
/// condition on the complementary boundary part.  Equals -adjoint(grad_tag).
inline DiscreteOperator dual_divergence_op(const EntityIndex& index,
                                           const BoundaryPartition& part,
                                           const MassWeights& masses,
                                           BoundaryTag tag = BoundaryTag::T) {
  detail::require_provenance(index, part, masses);
  detail::require_class_tag(tag);
  const double inv_h = 1.0 / index.spacing();
  const Eigen::VectorXd& wn = masses.of(EntityKind::node);
  const Eigen::VectorXd& we = masses.of(EntityKind::edge);
  const int ne = index.count(EntityKind::edge);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * static_cast<std::size_t>(ne));
  for (int e = 0; e < ne; ++e) {
    const auto ends = index.edge_nodes(e);
    if (!detail::has_tag(part, EntityKind::node, ends.tail, tag))
      trips.emplace_back(ends.tail, e, inv_h * we[e] / wn[ends.tail]);
    if (!detail::has_tag(part, EntityKind::node, ends.head, tag))
      trips.emplace_back(ends.head, e, (-inv_h) * we[e] / wn[ends.head]);
  }
  Eigen::SparseMatrix<double> m(index.count(EntityKind::node), ne);
  m.setFromTriplets(trips.begin(), trips.end());
  return detail::finish_op(
      std::move(m), EntityKind::edge, EntityKind::node, tag,
      std::string("dual_div_") + detail::tag_letter(detail::other_tag(tag)),
      index.fingerprint());
}

/// Face -> edge curl of the complementary class; rows of tag-class edges
/// zeroed; faces absent outside the domain impose the weak tangential
/// condition.  Equals +adjoint(curl_tag).
inline DiscreteOperator dual_curl_op(const EntityIndex& index,
                                     const BoundaryPartition& part,
                                     const MassWeights& masses,
                                     BoundaryTag tag = BoundaryTag::T) {
  detail::require_provenance(index, part, masses);
  detail::require_class_tag(tag);
  const double inv_h = 1.0 / index.spacing();
  const Eigen::VectorXd& we = masses.of(EntityKind::edge);
  const Eigen::VectorXd& wf = masses.of(EntityKind::face);
  const int nf = index.count(EntityKind::face);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(4 * static_cast<std::size_t>(nf));
  for (int f = 0; f < nf; ++f)
    for (const auto& inc : index.face_edges(f))
      if (!detail::has_tag(part, EntityKind::edge, inc.id, tag))
        trips.emplace_back(inc.id, f, (inc.sign * inv_h) * wf[f] / we[inc.id]);
  Eigen::SparseMatrix<double> m(index.count(EntityKind::edge), nf);
  m.setFromTriplets(trips.begin(), trips.end());
  return detail::finish_op(
      std::move(m), EntityKind::face, EntityKind::edge, tag,
      std::string("dual_curl_") + detail::tag_letter(detail::other_tag(tag)),
      index.fingerprint());
}

/// Cell -> face gradient of the complementary class: mass-weighted one-sided
/// differences with ghost zero outside the domain; rows of tag-class faces
/// zeroed.  Equals -adjoint(div_tag).
inline DiscreteOperator dual_gradient_op(const EntityIndex& index,
                                         const BoundaryPartition& part,
                                         const MassWeights& masses,
                                         BoundaryTag tag = BoundaryTag::T) {
  detail::require_provenance(index, part, masses);
  detail::require_class_tag(tag);
  const double inv_h = 1.0 / index.spacing();
  const Eigen::VectorXd& wf = masses.of(EntityKind::face);
  const Eigen::VectorXd& wc = masses.of(EntityKind::cell);
  const int nc = index.count(EntityKind::cell);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(6 * static_cast<std::size_t>(nc));
  for (int c = 0; c < nc; ++c)
    for (const auto& inc : index.cell_faces(c))
      if (!detail::has_tag(part, EntityKind::face, inc.id, tag))
        trips.emplace_back(inc.id, c, (-inc.sign * inv_h) * wc[c] / wf[inc.id]);
  Eigen::SparseMatrix<double> m(index.count(EntityKind::face), nc);
  m.setFromTriplets(trips.begin(), trips.end());
  return detail::finish_op(
      std::move(m), EntityKind::cell, EntityKind::face, tag,
      std::string("dual_grad_") + detail::tag_letter(detail::other_tag(tag)),
      index.fingerprint());
}

namespace detail {

inline std::string adjoint_label(const std::string& label, BoundaryTag tag) {
  const char comp = tag_letter(other_tag(tag));
  const char same = tag_letter(tag);
  std::string suffix;
  if (label.rfind("grad_", 0) == 0) suffix = std::string(" = -dual_div_") + comp;
  else if (label.rfind("curl_", 0) == 0) suffix = std::string(" = +dual_curl_") + comp;
  else if (label.rfind("div_", 0) == 0) suffix = std::string(" = -dual_grad_") + comp;
  else if (label.rfind("dual_div_", 0) == 0) suffix = std::string(" = -grad_") + same;
  else if (label.rfind("dual_curl_", 0) == 0) suffix = std::string(" = +curl_") + same;
  else if (label.rfind("dual_grad_", 0) == 0) suffix = std::string(" = -div_") + same;
  return "adjoint(" + label + ")" + suffix;
}

}  // namespace detail

/// Mass-weighted adjoint: M_domain^{-1} matrix^T M_codomain.  The label
/// records the sign convention linking it to the complementary-class dual.
inline DiscreteOperator adjoint_op(const DiscreteOperator& op,
                                   const MassWeights& masses) {
  if (masses.grid_fingerprint != op.grid_fingerprint)
    throw std::invalid_argument(
        "inconsistent inputs: masses built on a different grid");
  const Eigen::VectorXd& wd = masses.of(op.domain_kind);
  const Eigen::VectorXd& wc = masses.of(op.codomain_kind);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(op.matrix.nonZeros()));
  for (int j = 0; j < op.matrix.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.matrix, j); it; ++it)
      trips.emplace_back(j, static_cast<int>(it.row()),
                         it.value() * wc[it.row()] / wd[j]);
  Eigen::SparseMatrix<double> m(op.matrix.cols(), op.matrix.rows());
  m.setFromTriplets(trips.begin(), trips.end());
  return detail::finish_op(std::move(m), op.codomain_kind, op.domain_kind,
                           op.mask_tag,
                           detail::adjoint_label(op.label, op.mask_tag),
                           op.grid_fingerprint);
}

/// The six operators of one complex: primal ascending chain with essential
/// tag masks plus the matching descending duals.
struct OperatorFamily {
  DiscreteOperator grad, curl, div;
  DiscreteOperator dual_div, dual_curl, dual_grad;
  BoundaryTag tag = BoundaryTag::T;
  std::uint64_t grid_fingerprint = 0;
  double spacing = 0.0;
};

inline OperatorFamily build_family(const EntityIndex& index,
                                   const BoundaryPartition& part,
                                   const MassWeights& masses,
                                   BoundaryTag tag = BoundaryTag::T) {
  OperatorFamily fam;
  fam.grad = gradient_op(index, part, masses, tag);
  fam.curl = curl_op(index, part, masses, tag);
  fam.div = divergence_op(index, part, masses, tag);
  fam.dual_div = dual_divergence_op(index, part, masses, tag);
  fam.dual_curl = dual_curl_op(index, part, masses, tag);
  fam.dual_grad = dual_gradient_op(index, part, masses, tag);
  fam.tag = tag;
  fam.grid_fingerprint = index.fingerprint();
  fam.spacing = index.spacing();
  return fam;
}

struct ComplexReport {
  double curl_grad_max = 0.0;
  double div_curl_max = 0.0;
  bool exact() const { return curl_grad_max == 0.0 && div_curl_max == 0.0; }
};

/// Max |entry| of curl*grad and div*curl.  Both vanish exactly: every product
/// term is +/- 1/h^2 and the incidence signs cancel pairwise, so even the
/// floating-point sums are zero.
inline ComplexReport check_complex_property(const DiscreteOperator& grad,
                                            const DiscreteOperator& curl,
                                            const DiscreteOperator& div) {
  if (grad.grid_fingerprint != curl.grid_fingerprint ||
      curl.grid_fingerprint != div.grid_fingerprint)
    throw std::invalid_argument(
        "inconsistent inputs: operators built on different grids");
  if (grad.codomain_kind != curl.domain_kind ||
      curl.codomain_kind != div.domain_kind)
    throw std::invalid_argument(
        "inconsistent inputs: operator chain does not compose");
  const auto max_abs = [](const Eigen::SparseMatrix<double>& m) {
    double best = 0.0;
    for (int j = 0; j < m.outerSize(); ++j)
      for (Eigen::SparseMatrix<double>::InnerIterator it(m, j); it; ++it)
        best = std::max(best, std::abs(it.value()));
    return best;
  };
  ComplexReport rep;
  rep.curl_grad_max = max_abs(Eigen::SparseMatrix<double>(curl.matrix * grad.matrix));
  rep.div_curl_max = max_abs(Eigen::SparseMatrix<double>(div.matrix * curl.matrix));
  return rep;
}

struct IbpReport {
  double max_residual = 0.0;   // worst absolute defect over trials
  double max_relative = 0.0;   // defect over the product-of-norms scale
  double negative_control = 0.0;
  int trials = 0;
};

/// Randomized check of the two summation-by-parts identities
///   <grad u, H> + <u, dual_div H> = 0,   <curl E, F> - <E, dual_curl F> = 0,
/// with u and E projected onto the untagged subspace.  The negative control
/// replays the first identity with the raw unmasked difference operator and
/// an unprojected u, which lets the essential-boundary term reappear.
inline IbpReport check_integration_by_parts(const EntityIndex& index,
                                            const BoundaryPartition& part,
                                            const MassWeights& masses,
                                            BoundaryTag tag, int trials,
                                            std::uint64_t seed) {
  detail::require_provenance(index, part, masses);
  const OperatorFamily fam = build_family(index, part, masses, tag);

  // Raw node->edge difference matrix, no masking.
  const double inv_h = 1.0 / index.spacing();
  const int ne = index.count(EntityKind::edge);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * static_cast<std::size_t>(ne));
  for (int e = 0; e < ne; ++e) {
    const auto ends = index.edge_nodes(e);
    trips.emplace_back(e, ends.tail, -inv_h);
    trips.emplace_back(e, ends.head, inv_h);
  }
  Eigen::SparseMatrix<double> raw_grad(ne, index.count(EntityKind::node));
  raw_grad.setFromTriplets(trips.begin(), trips.end());

  const auto dot = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                       EntityKind kind) {
    return (a.array() * b.array() * masses.of(kind).array()).sum();
  };
  const auto wnorm = [&](const Eigen::VectorXd& a, EntityKind kind) {
    return std::sqrt((a.array() * a.array() * masses.of(kind).array()).sum());
  };
  const auto draw = [&](SplitMix64& rng, EntityKind kind) {
    Eigen::VectorXd v(index.count(kind));
    for (int i = 0; i < v.size(); ++i) v[i] = rng.next_symmetric();
    return v;
  };

  IbpReport rep;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    SplitMix64 rng(substream(seed, static_cast<std::uint64_t>(t)));
    Eigen::VectorXd u_raw = draw(rng, EntityKind::node);
    Eigen::VectorXd u = u_raw;
    for (int id : fam.grad.bc_mask) u[id] = 0.0;
    Eigen::VectorXd H = draw(rng, EntityKind::edge);
    const Eigen::VectorXd Gu = fam.grad.matrix * u;
    const Eigen::VectorXd DH = fam.dual_div.matrix * H;
    const double r1 = dot(Gu, H, EntityKind::edge) + dot(u, DH, EntityKind::node);
    const double s1 = wnorm(Gu, EntityKind::edge) * wnorm(H, EntityKind::edge) +
                      wnorm(u, EntityKind::node) * wnorm(DH, EntityKind::node);

    Eigen::VectorXd E = draw(rng, EntityKind::edge);
    for (int id : fam.curl.bc_mask) E[id] = 0.0;
    Eigen::VectorXd F = draw(rng, EntityKind::face);
    const Eigen::VectorXd CE = fam.curl.matrix * E;
    const Eigen::VectorXd KF = fam.dual_curl.matrix * F;
    const double r2 = dot(CE, F, EntityKind::face) - dot(E, KF, EntityKind::edge);
    const double s2 = wnorm(CE, EntityKind::face) * wnorm(F, EntityKind::face) +
                      wnorm(E, EntityKind::edge) * wnorm(KF, EntityKind::edge);

    rep.max_residual = std::max({rep.max_residual, std::abs(r1), std::abs(r2)});
    if (s1 > 0.0) rep.max_relative = std::max(rep.max_relative, std::abs(r1) / s1);
    if (s2 > 0.0) rep.max_relative = std::max(rep.max_relative, std::abs(r2) / s2);

    const Eigen::VectorXd Gu_raw = raw_grad * u_raw;
    const double ctrl = dot(Gu_raw, H, EntityKind::edge) +
                        dot(u_raw, fam.dual_div.matrix * H, EntityKind::node);
    rep.negative_control = std::max(rep.negative_control, std::abs(ctrl));
  }
  return rep;
}

/// Debug export: one "row col value" line per stored nonzero.
inline void write_coordinate_text(const DiscreteOperator& op,
                                  std::ostream& out) {
  out << std::setprecision(17);
  for (int j = 0; j < op.matrix.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.matrix, j); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace derham
