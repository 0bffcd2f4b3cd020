#pragma once
// Streamed full-box lattice path for resolution-matched diagnostics.
//
// Sampling an oscillation of frequency n needs a grid proportional to n, and
// at n = 32 the assembled-operator machinery would be prohibitively large.
// Everything needed at matched resolution factorizes instead:
//
//   * The half-shift difference (f(x + h/2) - f(x - h/2))/h maps the
//     polynomial-times-exponential term algebra to itself exactly, so the
//     discrete curl/divergence of staggered samples are themselves symbolic
//     fields.
//   * Lattice sums with the clipped dual-cell weights are tensor products of
//     1D midpoint/trapezoid rules, so inner products and norms reduce to
//     per-axis 1D sums, O(m) per term pair.
//
// The resulting numbers are bit-for-bit the quantities the assembled
// operators would produce on the full box (tested against them on small
// grids), at any resolution.  Dual-norm solves use the tensor separability
// of the node operator for a direct fast-diagonalization solve.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "analytic.hpp"

namespace derham::lattice {

using analytic::Complex;
using analytic::TrigPoly;
using analytic::VectorPoly;

// ---------------------------------------------------------------------------
// symbolic discrete calculus

/// f(x + delta e_axis), exact: exponentials pick up a phase, powers expand
/// binomially, support windows slide by -delta.  Shifted windows may leave
/// [0, 1]; lattice evaluation handles that, symbolic integral() does not, so
/// shifted fields must only feed lattice sums.
inline TrigPoly shift(const TrigPoly& f, int axis, double delta) {
  TrigPoly out;
  for (const analytic::Term& t : f.terms) {
    const analytic::AxisFactor& fac = t.axes[static_cast<std::size_t>(axis)];
    const Complex phase = std::polar(1.0, fac.omega * delta);
    if (fac.power == 0) {
      analytic::Term s = t;
      s.coeff *= phase;
      auto& sf = s.axes[static_cast<std::size_t>(axis)];
      sf.lo -= delta;
      sf.hi -= delta;
      out.terms.push_back(s);
      continue;
    }
    // (x + delta)^p = sum_j C(p,j) delta^(p-j) x^j
    double binom = 1.0;
    double dpow = 1.0;
    std::vector<double> coeffs(static_cast<std::size_t>(fac.power) + 1);
    for (int j = fac.power; j >= 0; --j) {
      coeffs[static_cast<std::size_t>(j)] = binom * dpow;
      binom *= static_cast<double>(j) / static_cast<double>(fac.power - j + 1);
      dpow *= delta;
    }
    for (int j = 0; j <= fac.power; ++j) {
      analytic::Term s = t;
      s.coeff *= phase * coeffs[static_cast<std::size_t>(j)];
      auto& sf = s.axes[static_cast<std::size_t>(axis)];
      sf.power = j;
      sf.lo -= delta;
      sf.hi -= delta;
      out.terms.push_back(s);
    }
  }
  out.merge();
  return out;
}

/// staggered difference (f(x + h/2) - f(x - h/2))/h along one axis
inline TrigPoly central_difference(const TrigPoly& f, int axis, double h) {
  return (shift(f, axis, 0.5 * h) - shift(f, axis, -0.5 * h)).scaled(1.0 / h);
}

/// discrete divergence of face-normal samples, valid at cell centers
inline TrigPoly discrete_divergence(const VectorPoly& v, double h) {
  return central_difference(v[0], 0, h) + central_difference(v[1], 1, h) +
         central_difference(v[2], 2, h);
}

/// discrete curl of tangential edge samples, valid at face centers
inline VectorPoly discrete_curl(const VectorPoly& v, double h) {
  VectorPoly out;
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    out[static_cast<std::size_t>(a)] =
        central_difference(v[static_cast<std::size_t>(c)], b, h) -
        central_difference(v[static_cast<std::size_t>(b)], c, h);
  }
  return out;
}

// ---------------------------------------------------------------------------
// exact lattice sums

enum class Rule1D { midpoint, trapezoid };

namespace detail_lattice {

struct Samples1D {
  std::vector<double> x, w;
};

inline Samples1D samples(Rule1D rule, int m) {
  Samples1D s;
  const double h = 1.0 / m;
  if (rule == Rule1D::midpoint) {
    s.x.resize(static_cast<std::size_t>(m));
    s.w.assign(static_cast<std::size_t>(m), h);
    for (int q = 0; q < m; ++q)
      s.x[static_cast<std::size_t>(q)] = (q + 0.5) * h;
  } else {
    s.x.resize(static_cast<std::size_t>(m) + 1);
    s.w.assign(static_cast<std::size_t>(m) + 1, h);
    for (int q = 0; q <= m; ++q) s.x[static_cast<std::size_t>(q)] = q * h;
    s.w.front() = 0.5 * h;
    s.w.back() = 0.5 * h;
  }
  return s;
}

// weighted 1D sum of one axis factor over a sample set; window membership
// uses a slack far below the lattice spacing to absorb roundoff in shifted
// window endpoints
inline Complex axis_sum(const analytic::AxisFactor& f, const Samples1D& s) {
  Complex acc{0.0, 0.0};
  for (std::size_t q = 0; q < s.x.size(); ++q) {
    const double x = s.x[q];
    if (x < f.lo - 1e-12 || x > f.hi + 1e-12) continue;
    double mono = 1.0;
    for (int k = 0; k < f.power; ++k) mono *= x;
    acc += s.w[q] * mono * std::polar(1.0, f.omega * x);
  }
  return acc;
}

}  // namespace detail_lattice

/// Sum of w(x) f(x) over the tensor lattice with the given per-axis rules;
/// with the trapezoid/midpoint weights this equals the mass-weighted sum the
/// assembled operators use on the full box.
inline double tensor_sum(const TrigPoly& f, int m,
                         const std::array<Rule1D, 3>& rules) {
  std::array<detail_lattice::Samples1D, 3> sets = {
      detail_lattice::samples(rules[0], m), detail_lattice::samples(rules[1], m),
      detail_lattice::samples(rules[2], m)};
  Complex total{0.0, 0.0};
  for (const analytic::Term& t : f.terms) {
    Complex prod = t.coeff;
    for (std::size_t a = 0; a < 3; ++a)
      prod *= detail_lattice::axis_sum(t.axes[a], sets[a]);
    total += prod;
  }
  return total.real();
}

inline std::array<Rule1D, 3> cell_rules() {
  return {Rule1D::midpoint, Rule1D::midpoint, Rule1D::midpoint};
}
inline std::array<Rule1D, 3> node_rules() {
  return {Rule1D::trapezoid, Rule1D::trapezoid, Rule1D::trapezoid};
}
inline std::array<Rule1D, 3> edge_rules(int axis) {
  auto r = node_rules();
  r[static_cast<std::size_t>(axis)] = Rule1D::midpoint;
  return r;
}
inline std::array<Rule1D, 3> face_rules(int axis) {
  auto r = cell_rules();
  r[static_cast<std::size_t>(axis)] = Rule1D::trapezoid;
  return r;
}

/// mass inner product of two fields sampled on the edges of the full box
inline double edge_inner(const VectorPoly& a, const VectorPoly& b, int m) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c)
    s += tensor_sum(a[static_cast<std::size_t>(c)] *
                        b[static_cast<std::size_t>(c)],
                    m, edge_rules(c));
  return s;
}

/// mass inner product of two fields sampled on the faces of the full box
inline double face_inner(const VectorPoly& a, const VectorPoly& b, int m) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c)
    s += tensor_sum(a[static_cast<std::size_t>(c)] *
                        b[static_cast<std::size_t>(c)],
                    m, face_rules(c));
  return s;
}

inline double edge_norm(const VectorPoly& a, int m) {
  return std::sqrt(edge_inner(a, a, m));
}

/// squared mass norm of the discrete curl of edge samples; clamped at zero
/// because exact symbolic cancellations leave signed roundoff dust
inline double curl_norm_sq(const VectorPoly& e, int m) {
  const VectorPoly q = discrete_curl(e, 1.0 / m);
  double s = 0.0;
  for (int c = 0; c < 3; ++c)
    s += tensor_sum(q[static_cast<std::size_t>(c)] *
                        q[static_cast<std::size_t>(c)],
                    m, face_rules(c));
  return std::max(0.0, s);
}

/// squared mass norm of the discrete divergence of face samples
inline double div_norm_sq(const VectorPoly& v, int m) {
  const TrigPoly q = discrete_divergence(v, 1.0 / m);
  return std::max(0.0, tensor_sum(q * q, m, cell_rules()));
}

/// max over the dictionary of |<diff, T>_h| / ||T||_h on edge samples
inline double weak_gap(const VectorPoly& diff,
                       const std::vector<VectorPoly>& dictionary, int m) {
  if (dictionary.empty())
    throw std::invalid_argument("empty dictionary: weak gap needs test fields");
  double best = 0.0;
  for (const VectorPoly& t : dictionary) {
    const double nrm = edge_norm(t, m);
    if (nrm <= 1e-14)
      throw std::invalid_argument("degenerate dictionary: zero test field");
    best = std::max(best, std::abs(edge_inner(diff, t, m)) / nrm);
  }
  return best;
}

/// Resolution at which frequency-n content is faithfully represented: at
/// least four samples per period, and dense enough that the cubic-order
/// stencil artifact of oblique oscillations (size h^2 n^3 per unit
/// amplitude) stays at the percent level, which needs m proportional to
/// n^(3/2).
inline int matched_resolution(int base, double fmax, int n) {
  const double need =
      std::max({static_cast<double>(base), 4.0 * std::ceil(fmax),
                9.0 * std::pow(static_cast<double>(n), 1.5)});
  return static_cast<int>(std::ceil(need / 4.0)) * 4;
}

// ---------------------------------------------------------------------------
// matrix-free node-space dual norms
//
// The dual norm of a functional r over the H1-type node test space is
// sqrt(r^T z) with (grad^T M_e grad + M_n) z = r, boundary rows eliminated
// for the zero-trace space.  The functional arrives either as an L2 field
// (r = M_n samples) or as the unmasked adjoint image of a vector field
// (r = -grad^T M_e samples for divergence data, the componentwise curl
// pattern for rotation data).

struct DualConfig {
  double tolerance = 1e-9;  // acceptance bound on the recomputed residual
  bool zero_trace = true;
};

struct DualReport {
  double value = 0.0;
  double residual = 0.0;
};

namespace detail_lattice {

struct NodeGrid {
  int m;
  double h;
  int stride_j, stride_i;  // node id = i*stride_i + j*stride_j + k

  explicit NodeGrid(int cells)
      : m(cells), h(1.0 / cells), stride_j(cells + 1),
        stride_i((cells + 1) * (cells + 1)) {}
  std::size_t count() const {
    return static_cast<std::size_t>(stride_i) * (m + 1);
  }
  int id(int i, int j, int k) const { return i * stride_i + j * stride_j + k; }
  // 1D trapezoid weight of a node coordinate
  double t(int q) const { return (q == 0 || q == m) ? 0.5 * h : h; }
  bool boundary(int i, int j, int k) const {
    return i == 0 || i == m || j == 0 || j == m || k == 0 || k == m;
  }
};

inline void zero_boundary(const NodeGrid& g, std::vector<double>& u) {
  for (int i = 0; i <= g.m; ++i)
    for (int j = 0; j <= g.m; ++j)
      for (int k = 0; k <= g.m; ++k)
        if (g.boundary(i, j, k)) u[static_cast<std::size_t>(g.id(i, j, k))] = 0.0;
}

// out = (grad^T M_e grad + M_n) u on the full box
inline void apply_operator(const NodeGrid& g, const std::vector<double>& u,
                           std::vector<double>& out) {
  const int m = g.m;
  const double inv_h = 1.0 / g.h;  // edge weight h * t * t / h^2 = t * t / h
  std::vector<double> t(static_cast<std::size_t>(m) + 1, g.h);
  t.front() = t.back() = 0.5 * g.h;
  // mass term and differences along k handled row by row (contiguous)
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j) {
      const std::size_t base = static_cast<std::size_t>(g.id(i, j, 0));
      const double* ur = u.data() + base;
      double* orow = out.data() + base;
      const double tij = t[static_cast<std::size_t>(i)] *
                         t[static_cast<std::size_t>(j)];
      for (int k = 0; k <= m; ++k)
        orow[k] = tij * t[static_cast<std::size_t>(k)] * ur[k];
      const double w = tij * inv_h;
      for (int k = 0; k < m; ++k) {
        const double f = w * (ur[k + 1] - ur[k]);
        orow[k] -= f;
        orow[k + 1] += f;
      }
    }
  // differences along j between adjacent rows
  for (int i = 0; i <= m; ++i) {
    const double wi = t[static_cast<std::size_t>(i)] * inv_h;
    for (int j = 0; j < m; ++j) {
      const std::size_t a = static_cast<std::size_t>(g.id(i, j, 0));
      const double* ua = u.data() + a;
      const double* ub = ua + g.stride_j;
      double* oa = out.data() + a;
      double* ob = oa + g.stride_j;
      for (int k = 0; k <= m; ++k) {
        const double f = wi * t[static_cast<std::size_t>(k)] * (ub[k] - ua[k]);
        oa[k] -= f;
        ob[k] += f;
      }
    }
  }
  // differences along i between adjacent planes
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= m; ++j) {
      const std::size_t a = static_cast<std::size_t>(g.id(i, j, 0));
      const double* ua = u.data() + a;
      const double* ub = ua + g.stride_i;
      double* oa = out.data() + a;
      double* ob = oa + g.stride_i;
      const double wj = t[static_cast<std::size_t>(j)] * inv_h;
      for (int k = 0; k <= m; ++k) {
        const double f = wj * t[static_cast<std::size_t>(k)] * (ub[k] - ua[k]);
        oa[k] -= f;
        ob[k] += f;
      }
    }
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) s += a[q] * b[q];
  return s;
}

// The node operator is exactly tensor-separable,
//   A = S (x) T (x) T + T (x) S (x) T + T (x) T (x) S + T (x) T (x) T,
// with S the 1D stiffness (1/h)[-1, 2, -1] (ends [1, -1]) and T the diagonal
// trapezoid mass, both restricted to interior points for the zero-trace
// space.  One 1D generalized eigensolve S V = T V diag(lambda) with
// V^T T V = I diagonalizes all of A, so the solve is direct:
//   z = (V (x) V (x) V) [(V^T (x) V^T (x) V^T) rhs] / (sum lambda + 1).
struct TensorSolver {
  int p;             // points per axis in the solve space
  int offset;        // 0 for free space, 1 for zero-trace interior
  Eigen::MatrixXd v;
  Eigen::VectorXd lambda;

  TensorSolver(int m, bool zero_trace)
      : p(zero_trace ? m - 1 : m + 1), offset(zero_trace ? 1 : 0) {
    const double h = 1.0 / m;
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(p, p);
    for (int q = 0; q < p; ++q) {
      const int node = q + offset;
      t(q, q) = (node == 0 || node == m) ? 0.5 * h : h;
      s(q, q) = ((node > 0) + (node < m)) / h;
      if (q + 1 < p) s(q, q + 1) = s(q + 1, q) = -1.0 / h;
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, t);
    v = eig.eigenvectors();
    lambda = eig.eigenvalues();
  }

  // contracts axis matrices against a p^3 tensor stored i-major
  void kron_apply(const Eigen::MatrixXd& a, std::vector<double>& u) const {
    using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                              Eigen::RowMajor>;
    Eigen::Map<Mat> block(u.data(), p, p * p);
    block = a.transpose() * block;  // axis i
    for (int i = 0; i < p; ++i) {   // axis j within each i-slab
      Eigen::Map<Mat> slab(u.data() + static_cast<std::size_t>(i) * p * p, p,
                           p);
      slab = a.transpose() * slab;
    }
    Eigen::Map<Mat> rows(u.data(), p * p, p);  // axis k
    rows = rows * a;
  }

  void solve(std::vector<double>& u) const {
    kron_apply(v, u);  // V^T contraction: columns of v against each axis
    std::size_t q = 0;
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j)
        for (int k = 0; k < p; ++k, ++q)
          u[q] /= lambda(i) + lambda(j) + lambda(k) + 1.0;
    Eigen::MatrixXd vt = v.transpose();
    kron_apply(vt, u);  // back-transform with V
  }
};

// Direct tensor-diagonalization solve; the reported residual is recomputed
// from scratch with the assembled stencil as an independent check.
inline DualReport solve_dual(const NodeGrid& g, std::vector<double> rhs,
                             const DualConfig& cfg) {
  DualReport rep;
  if (cfg.zero_trace && g.m < 2)
    throw std::invalid_argument(
        "inconsistent inputs: zero-trace dual norm needs interior nodes");
  if (cfg.zero_trace) zero_boundary(g, rhs);
  const double rhs_norm = std::sqrt(dot(rhs, rhs));
  if (rhs_norm == 0.0) return rep;

  const TensorSolver solver(g.m, cfg.zero_trace);
  const int p = solver.p;
  std::vector<double> packed(static_cast<std::size_t>(p) * p * p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      for (int k = 0; k < p; ++k)
        packed[(static_cast<std::size_t>(i) * p + j) * p + k] =
            rhs[static_cast<std::size_t>(g.id(i + solver.offset,
                                              j + solver.offset,
                                              k + solver.offset))];
  solver.solve(packed);
  std::vector<double> z(g.count(), 0.0);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      for (int k = 0; k < p; ++k)
        z[static_cast<std::size_t>(g.id(i + solver.offset, j + solver.offset,
                                        k + solver.offset))] =
            packed[(static_cast<std::size_t>(i) * p + j) * p + k];

  std::vector<double> az(g.count());
  apply_operator(g, z, az);
  if (cfg.zero_trace) zero_boundary(g, az);
  for (std::size_t q = 0; q < az.size(); ++q) az[q] -= rhs[q];
  rep.residual = std::sqrt(dot(az, az)) / rhs_norm;
  if (rep.residual > cfg.tolerance)
    throw std::runtime_error(
        "no convergence: dual-norm solve stalled at relative residual " +
        std::to_string(rep.residual));
  rep.value = std::sqrt(std::max(0.0, dot(rhs, z)));
  return rep;
}

// per-axis value tables for fast tensor evaluation of a symbolic field at
// lattice sample points
struct ValueTable {
  std::vector<Complex> coeff;
  std::array<std::vector<Complex>, 3> ax;
  std::array<std::size_t, 3> np;

  ValueTable(const TrigPoly& p, const std::array<Samples1D, 3>& sets) {
    const std::size_t nt = p.terms.size();
    coeff.resize(nt);
    for (std::size_t a = 0; a < 3; ++a) {
      np[a] = sets[a].x.size();
      ax[a].assign(nt * np[a], Complex{0.0, 0.0});
    }
    for (std::size_t ti = 0; ti < nt; ++ti) {
      const analytic::Term& t = p.terms[ti];
      coeff[ti] = t.coeff;
      for (std::size_t a = 0; a < 3; ++a) {
        const analytic::AxisFactor& f = t.axes[a];
        Complex* row = ax[a].data() + ti * np[a];
        for (std::size_t q = 0; q < np[a]; ++q) {
          const double x = sets[a].x[q];
          if (x < f.lo - 1e-12 || x > f.hi + 1e-12) continue;
          double mono = 1.0;
          for (int k = 0; k < f.power; ++k) mono *= x;
          row[q] = mono * std::polar(1.0, f.omega * x);
        }
      }
    }
  }

  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    Complex acc{0.0, 0.0};
    for (std::size_t ti = 0; ti < coeff.size(); ++ti)
      acc += coeff[ti] * ax[0][ti * np[0] + i] * ax[1][ti * np[1] + j] *
             ax[2][ti * np[2] + k];
    return acc.real();
  }
};

inline std::array<Samples1D, 3> edge_points(const NodeGrid& g, int axis) {
  std::array<Samples1D, 3> sets = {samples(Rule1D::trapezoid, g.m),
                                   samples(Rule1D::trapezoid, g.m),
                                   samples(Rule1D::trapezoid, g.m)};
  sets[static_cast<std::size_t>(axis)] = samples(Rule1D::midpoint, g.m);
  return sets;
}

// accumulate sign * grad_axis^T M_axis (samples of comp) into rhs
inline void accumulate_gradient_adjoint(const NodeGrid& g, const TrigPoly& comp,
                                        int axis, double sign,
                                        std::vector<double>& rhs) {
  const std::array<Samples1D, 3> sets = edge_points(g, axis);
  const ValueTable table(comp, sets);
  const std::array<int, 3> ext = {axis == 0 ? g.m : g.m + 1,
                                  axis == 1 ? g.m : g.m + 1,
                                  axis == 2 ? g.m : g.m + 1};
  const int da = axis == 0 ? g.stride_i : (axis == 1 ? g.stride_j : 1);
  for (int i = 0; i < ext[0]; ++i)
    for (int j = 0; j < ext[1]; ++j)
      for (int k = 0; k < ext[2]; ++k) {
        // transverse trapezoid factors; own axis contributes h, cancelling
        // one 1/h of the difference quotient pair
        double w = 1.0;
        if (axis != 0) w *= g.t(i);
        if (axis != 1) w *= g.t(j);
        if (axis != 2) w *= g.t(k);
        const double v = sign * w *
                         table(static_cast<std::size_t>(i),
                               static_cast<std::size_t>(j),
                               static_cast<std::size_t>(k));
        const std::size_t tail = static_cast<std::size_t>(g.id(i, j, k));
        rhs[tail] -= v;
        rhs[tail + static_cast<std::size_t>(da)] += v;
      }
}

}  // namespace detail_lattice

/// Dual norm of the mass-pairing functional of a scalar sampled on nodes.
inline DualReport dual_norm_scalar(const TrigPoly& f, int m,
                                   const DualConfig& cfg = {}) {
  detail_lattice::NodeGrid g(m);
  const std::array<detail_lattice::Samples1D, 3> sets = {
      detail_lattice::samples(Rule1D::trapezoid, m),
      detail_lattice::samples(Rule1D::trapezoid, m),
      detail_lattice::samples(Rule1D::trapezoid, m)};
  const detail_lattice::ValueTable table(f, sets);
  std::vector<double> rhs(g.count());
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j)
      for (int k = 0; k <= m; ++k)
        rhs[static_cast<std::size_t>(g.id(i, j, k))] =
            g.t(i) * g.t(j) * g.t(k) *
            table(static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                  static_cast<std::size_t>(k));
  return detail_lattice::solve_dual(g, std::move(rhs), cfg);
}

/// Dual norm of the distributional divergence of a vector field: the
/// functional phi -> -<samples of v, grad phi>, the adjoint application with
/// no mask on the data side.
inline DualReport dual_norm_divergence(const VectorPoly& v, int m,
                                       const DualConfig& cfg = {}) {
  detail_lattice::NodeGrid g(m);
  std::vector<double> rhs(g.count(), 0.0);
  for (int a = 0; a < 3; ++a)
    detail_lattice::accumulate_gradient_adjoint(
        g, v[static_cast<std::size_t>(a)], a, -1.0, rhs);
  return detail_lattice::solve_dual(g, std::move(rhs), cfg);
}

/// Componentwise dual norms of the distributional curl of a vector field:
/// component c is the functional phi -> <samples of v, curl(phi e_c)>.
/// Returns the three per-component reports.
inline std::array<DualReport, 3> dual_norm_curl(const VectorPoly& v, int m,
                                                const DualConfig& cfg = {}) {
  std::array<DualReport, 3> out;
  for (int c = 0; c < 3; ++c) {
    detail_lattice::NodeGrid g(m);
    std::vector<double> rhs(g.count(), 0.0);
    // curl(phi e_c) = grad phi x e_c; <v, grad phi x e_c> picks the two
    // cyclic partners of c with opposite signs
    const int a1 = (c + 1) % 3;
    const int a2 = (c + 2) % 3;
    detail_lattice::accumulate_gradient_adjoint(
        g, v[static_cast<std::size_t>(a2)], a1, 1.0, rhs);
    detail_lattice::accumulate_gradient_adjoint(
        g, v[static_cast<std::size_t>(a1)], a2, -1.0, rhs);
    out[static_cast<std::size_t>(c)] =
        detail_lattice::solve_dual(g, std::move(rhs), cfg);
  }
  return out;
}

}  // namespace derham::lattice
