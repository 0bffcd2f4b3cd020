#pragma once
// Coefficient fields on the staggered complex and the diagonal L2 masses.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

#include <Eigen/Dense>

#include "grid.hpp"
#include "rng.hpp"

namespace derham {

/// One coefficient per entity of a single kind: point values on nodes and
/// cell centers, tangential midpoint samples on edges, normal center samples
/// on faces.  The fingerprint ties the vector to the grid it was built on.
struct Field {
  EntityKind kind = EntityKind::node;
  std::uint64_t grid_fingerprint = 0;
  Eigen::VectorXd coeffs;

  int size() const { return static_cast<int>(coeffs.size()); }
};

inline Field zero_field(const EntityIndex& index, EntityKind kind) {
  Field f;
  f.kind = kind;
  f.grid_fingerprint = index.fingerprint();
  f.coeffs = Eigen::VectorXd::Zero(index.count(kind));
  return f;
}

inline Field zero_field_like(const Field& other) {
  Field f;
  f.kind = other.kind;
  f.grid_fingerprint = other.grid_fingerprint;
  f.coeffs = Eigen::VectorXd::Zero(other.coeffs.size());
  return f;
}

/// Diagonal weights giving each entity the volume of its clipped dual cell:
/// h^3 times (occupied incident cells)/8 for nodes, /4 for edges, /2 for
/// faces, and the full h^3 per cell.  All ratios between weights are powers
/// of two, so adjoint round trips that divide and re-multiply by them are
/// exact in floating point.  Total cell weight equals the domain volume
/// exactly; so does the total node weight, since every cell contributes
/// 8 * h^3/8 across its corners.
struct MassWeights {
  std::uint64_t grid_fingerprint = 0;
  double spacing = 0.0;
  std::array<Eigen::VectorXd, 4> weights;

  const Eigen::VectorXd& of(EntityKind kind) const {
    return weights[static_cast<int>(kind)];
  }
  Eigen::VectorXd& of(EntityKind kind) {
    return weights[static_cast<int>(kind)];
  }
};

inline MassWeights build_masses(const EntityIndex& index) {
  MassWeights m;
  m.grid_fingerprint = index.fingerprint();
  m.spacing = index.spacing();
  const double h3 = m.spacing * m.spacing * m.spacing;
  const double denom[4] = {8.0, 4.0, 2.0, 1.0};
  for (int k = 0; k < 4; ++k) {
    const auto kind = static_cast<EntityKind>(k);
    const int n = index.count(kind);
    Eigen::VectorXd w(n);
    for (int id = 0; id < n; ++id)
      w[id] = h3 * static_cast<double>(index.incident_cells(kind, id)) / denom[k];
    m.weights[k] = std::move(w);
  }
  return m;
}

inline double inner_product(const Field& u, const Field& v,
                            const MassWeights& masses) {
  if (u.kind != v.kind)
    throw std::invalid_argument(std::string("incompatible fields: ") +
                                to_string(u.kind) + " paired with " +
                                to_string(v.kind));
  if (u.grid_fingerprint != v.grid_fingerprint ||
      u.grid_fingerprint != masses.grid_fingerprint)
    throw std::invalid_argument(
        "inconsistent inputs: fields and masses built on different grids");
  const Eigen::VectorXd& w = masses.of(u.kind);
  if (u.coeffs.size() != w.size() || v.coeffs.size() != w.size())
    throw std::invalid_argument(
        "inconsistent inputs: coefficient length does not match entity count");
  return (u.coeffs.array() * v.coeffs.array() * w.array()).sum();
}

inline double norm(const Field& u, const MassWeights& masses) {
  return std::sqrt(inner_product(u, u, masses));
}

/// Sample an analytic expression into a Field.  Scalar expressions
/// (point -> double) feed node and cell kinds; vector expressions
/// (point -> array<double,3>) feed edge and face kinds, where the component
/// along the entity axis is taken at the midpoint/center.
template <class Expr>
Field sample_field(Expr&& expr, const EntityIndex& index, EntityKind kind,
                   const MassWeights& masses) {
  if (masses.grid_fingerprint != index.fingerprint())
    throw std::invalid_argument(
        "inconsistent inputs: masses built on a different grid");
  using Result = std::invoke_result_t<Expr&, Eigen::Vector3d>;
  constexpr bool scalar_expr = std::is_convertible_v<Result, double>;
  const bool scalar_kind =
      (kind == EntityKind::node || kind == EntityKind::cell);
  Field out = zero_field(index, kind);
  const int n = index.count(kind);
  for (int id = 0; id < n; ++id) {
    const Eigen::Vector3d p = index.position(kind, id);
    double value = 0.0;
    if constexpr (scalar_expr) {
      if (!scalar_kind)
        throw std::invalid_argument(
            std::string("incompatible fields: scalar expression sampled on ") +
            to_string(kind) + " entities");
      value = static_cast<double>(expr(p));
    } else {
      if (scalar_kind)
        throw std::invalid_argument(
            std::string("incompatible fields: vector expression sampled on ") +
            to_string(kind) + " entities");
      const std::array<double, 3> v = expr(p);
      value = v[static_cast<std::size_t>(index.component_axis(kind, id))];
    }
    if (!std::isfinite(value))
      throw std::runtime_error(std::string("invalid sample: non-finite value on ") +
                               to_string(kind) + " " + std::to_string(id));
    out.coeffs[id] = value;
  }
  return out;
}

/// Deterministic field with entries uniform in [-1, 1); used for randomized
/// structural checks.
inline Field random_field(const EntityIndex& index, EntityKind kind,
                          SplitMix64& rng) {
  Field out = zero_field(index, kind);
  for (int id = 0; id < out.size(); ++id) out.coeffs[id] = rng.next_symmetric();
  return out;
}

}  // namespace derham
