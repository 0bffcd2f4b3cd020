#pragma once
// Three independent routes to the scalar pairing <E, H> = integral of E . H
// over the unit cube:
//   closed form     exact symbolic integration of the product,
//   quadrature      pointwise tensor Gauss-Legendre (order 5 per panel),
//   discrete mass   weighted coefficient inner product of grid samples.
// The quadrature route never touches the symbolic integral recursion, so
// agreement between the routes cross-validates both.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "analytic.hpp"
#include "field.hpp"

namespace derham {

inline double pairing_closed_form(const analytic::VectorPoly& e,
                                  const analytic::VectorPoly& h) {
  return analytic::dot(e, h).integral();
}

namespace detail_pairing {

// 5-point Gauss-Legendre rule on [-1, 1]
inline const std::array<double, 5>& gl_nodes() {
  static const std::array<double, 5> nodes = {
      -0.90617984593866399280, -0.53846931010568309104, 0.0,
      0.53846931010568309104, 0.90617984593866399280};
  return nodes;
}

inline const std::array<double, 5>& gl_weights() {
  static const std::array<double, 5> weights = {
      0.23692688505618908751, 0.47862867049936646804, 0.56888888888888888889,
      0.47862867049936646804, 0.23692688505618908751};
  return weights;
}

// per-term per-axis value tables at the quadrature points; entries outside a
// factor's support window stay zero, matching the true integrand
struct TermTables {
  std::vector<std::complex<double>> coeff;
  std::array<std::vector<std::complex<double>>, 3> ax;  // term-major rows
};

inline TermTables tabulate(const analytic::TrigPoly& p,
                           const std::vector<double>& pts) {
  TermTables t;
  const std::size_t np = pts.size();
  const std::size_t nt = p.terms.size();
  t.coeff.resize(nt);
  for (auto& table : t.ax) table.assign(nt * np, {0.0, 0.0});
  for (std::size_t ti = 0; ti < nt; ++ti) {
    const analytic::Term& term = p.terms[ti];
    t.coeff[ti] = term.coeff;
    for (std::size_t a = 0; a < 3; ++a) {
      const analytic::AxisFactor& f = term.axes[a];
      auto* row = t.ax[a].data() + ti * np;
      for (std::size_t q = 0; q < np; ++q) {
        const double x = pts[q];
        if (x < f.lo || x > f.hi) continue;
        double mono = 1.0;
        for (int k = 0; k < f.power; ++k) mono *= x;
        row[q] = mono * std::polar(1.0, f.omega * x);
      }
    }
  }
  return t;
}

}  // namespace detail_pairing

/// Tensor-product composite Gauss-Legendre evaluation of the pairing.  Both
/// the terms and the rule are tensor products, so each term pair reduces to
/// three 1D weighted sums over sampled values.  panels = 0 picks
/// max(8, 4 * ceil(max frequency)) rounded up to a multiple of 8 so panel
/// edges include the cutoff window cuts at multiples of 1/8; explicit panel
/// counts below twice the maximum frequency are refused rather than silently
/// aliased.
inline double pairing_quadrature(const analytic::VectorPoly& e,
                                 const analytic::VectorPoly& h,
                                 int panels = 0) {
  const double fmax =
      std::max(analytic::max_frequency(e), analytic::max_frequency(h));
  const int need = static_cast<int>(std::ceil(fmax));
  if (panels == 0) panels = ((std::max(8, 4 * need) + 7) / 8) * 8;
  if (panels < 2 * need)
    throw std::invalid_argument(
        "aliasing risk: " + std::to_string(panels) +
        " quadrature panels per axis cannot resolve frequency " +
        std::to_string(need) + " (need at least " + std::to_string(2 * need) +
        ")");

  const auto& nodes = detail_pairing::gl_nodes();
  const auto& weights = detail_pairing::gl_weights();
  const std::size_t np = static_cast<std::size_t>(panels) * nodes.size();
  std::vector<double> pts(np);
  std::vector<double> wts(np);
  const double pw = 1.0 / panels;
  for (int p = 0; p < panels; ++p)
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      pts[static_cast<std::size_t>(p) * nodes.size() + q] =
          (p + 0.5 * (1.0 + nodes[q])) * pw;
      wts[static_cast<std::size_t>(p) * nodes.size() + q] =
          0.5 * weights[q] * pw;
    }

  double total = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    const analytic::TrigPoly& pe = e[c];
    const analytic::TrigPoly& ph = h[c];
    if (pe.terms.empty() || ph.terms.empty()) continue;
    const detail_pairing::TermTables te = detail_pairing::tabulate(pe, pts);
    const detail_pairing::TermTables th = detail_pairing::tabulate(ph, pts);
    std::complex<double> comp{0.0, 0.0};
    for (std::size_t ti = 0; ti < te.coeff.size(); ++ti)
      for (std::size_t tj = 0; tj < th.coeff.size(); ++tj) {
        std::complex<double> pair = te.coeff[ti] * th.coeff[tj];
        for (std::size_t a = 0; a < 3; ++a) {
          const auto* re = te.ax[a].data() + ti * np;
          const auto* rh = th.ax[a].data() + tj * np;
          std::complex<double> s{0.0, 0.0};
          for (std::size_t q = 0; q < np; ++q) s += wts[q] * re[q] * rh[q];
          pair *= s;
        }
        comp += pair;
      }
    total += comp.real();
  }
  return total;
}

/// Discrete-mass route: both fields already sampled on the same grid and
/// entity kind; the pairing is the weighted coefficient inner product.
inline double pairing_discrete(const Field& e, const Field& h,
                               const MassWeights& masses) {
  return inner_product(e, h, masses);
}

/// Sample a symbolic vector field into entity coefficients (edges or faces).
inline Field sample_vector(const analytic::VectorPoly& v,
                           const EntityIndex& index, EntityKind kind,
                           const MassWeights& masses) {
  return sample_field(
      [&v](const Eigen::Vector3d& p) {
        return std::array<double, 3>{v[0].evaluate(p), v[1].evaluate(p),
                                     v[2].evaluate(p)};
      },
      index, kind, masses);
}

/// Sample a symbolic scalar field into entity coefficients (nodes or cells).
inline Field sample_scalar(const analytic::TrigPoly& s,
                           const EntityIndex& index, EntityKind kind,
                           const MassWeights& masses) {
  return sample_field([&s](const Eigen::Vector3d& p) { return s.evaluate(p); },
                      index, kind, masses);
}

}  // namespace derham
