#pragma once
// Runners for the oscillatory sequence families: pairing trajectories with
// three-way cross-validation, hypothesis-norm growth screening, weak-gap and
// Helmholtz proof-trace diagnostics, localized cutoff pairings, and
// negative-norm demonstrations.
//
// Division of labor: closed-form pairings are the reported values (optionally
// cross-checked against factorized quadrature); hypothesis norms and weak
// gaps stream on a frequency-matched lattice; Helmholtz splits run on the
// small base grids where the assembled operators live.  Verdicts are
// recomputable from the recorded rows.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "decompose.hpp"
#include "families.hpp"
#include "lattice.hpp"
#include "pairing.hpp"
#include "rng.hpp"

namespace derham {

struct ExperimentConfig {
  std::uint64_t seed = 2023;      // dictionary seed
  bool quadrature_check = true;   // cross-validate closed-form pairings
  double growth_threshold = 1.8;  // per-doubling factor flagging unbounded
                                  // hypothesis norms
  double slope_threshold = -0.5;  // fitted log-log decay counted as "-> 0"
  double terminal_threshold = 1e-3;  // last defect counted as converged
  double gap_terminal = 1e-6;        // last weak gap counted as converged
  double stagnation_floor = 0.5;     // ||E_n - E|| must stay above this
  double defect_floor = 1e-12;       // below this a defect is exactly "at
                                     // the limit" for slope fitting
  int matched_floor = 12;            // streamed-lattice lower bound
  int dual_cap = 128;                // dual-norm lattice upper bound
  SolveConfig solve;                 // Helmholtz splits on base grids
  lattice::DualConfig dual;          // dual solves; zero_trace set per variant
};

// One record per (family, n, grid).  Runners that have no base grid or no
// dual solves leave the corresponding columns at zero; every recorded number
// is finite.
struct ExperimentRow {
  std::string family;
  int n = 0;
  int grid = 0;     // base grid of the split quantities (0: not applicable)
  int matched = 0;  // streamed lattice resolution behind gaps and norms
  double pairing = 0.0;
  double defect = 0.0;  // |pairing - expected limit| (or expected defect law)
  double gap_e = 0.0;   // weak-gap of E_n against the dictionary
  double gap_h = 0.0;
  double potential_distance = 0.0;  // ||u_n - u|| in the node mass norm
  double residual_distance = 0.0;   // ||E~_n - E~|| in the edge mass norm
  double stagnation = 0.0;          // ||E_n - E|| in the edge mass norm
  double curl_norm = 0.0;           // streamed ||curl_h E_n||
  double div_norm = 0.0;            // streamed ||div_h H_n||
  double curl_dual = 0.0;           // dual norms (alternative runner only)
  double div_dual = 0.0;
  double curl_dual_centered = 0.0;  // dual norms of the images of X_n - X
  double div_dual_centered = 0.0;
};

struct ExperimentReport {
  std::string family;
  std::string label;
  std::vector<ExperimentRow> rows;  // deterministic n-then-grid order
  double defect_slope = 0.0;        // fitted log-log slopes (0 when the
  double gap_e_slope = 0.0;         // trajectory sits at the floor; see
  double gap_h_slope = 0.0;         // notes)
  double terminal_defect = 0.0;
  double min_stagnation = 0.0;
  bool pass = false;
  std::string verdict;
  std::vector<std::string> notes;
};

enum class DualSpace { zero_trace, free };

namespace detail_experiment {

// Least-squares slope of log(value) against log(n), ignoring entries at or
// below the floor.  Empty when fewer than two usable points remain.
inline std::optional<double> fitted_slope(const std::vector<int>& ns,
                                          const std::vector<double>& vals,
                                          double floor) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < ns.size() && i < vals.size(); ++i)
    if (vals[i] > floor) {
      xs.push_back(std::log(static_cast<double>(ns[i])));
      ys.push_back(std::log(vals[i]));
    }
  if (xs.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double cov = 0.0, var = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cov += (xs[i] - mx) * (ys[i] - my);
    var += (xs[i] - mx) * (xs[i] - mx);
  }
  if (var == 0.0) return std::nullopt;
  return cov / var;
}

// Per-doubling growth factors of a norm trajectory.  Entries below the
// relative floor are roundoff dust from symbolic cancellations and yield no
// factor; factors are normalized to one frequency doubling.
inline std::vector<double> doubling_factors(const std::vector<int>& ns,
                                            const std::vector<double>& vals) {
  double peak = 0.0;
  for (double v : vals) peak = std::max(peak, v);
  const double floor = 1e-4 * (1.0 + peak);
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
    if (vals[i] <= floor || vals[i + 1] <= floor) continue;
    if (ns[i + 1] <= ns[i]) continue;
    const double octaves = std::log2(static_cast<double>(ns[i + 1]) /
                                     static_cast<double>(ns[i]));
    out.push_back(std::pow(vals[i + 1] / vals[i], 1.0 / octaves));
  }
  return out;
}

inline void check_frequencies(const std::vector<int>& n_list) {
  if (n_list.size() < 2)
    throw std::invalid_argument(
        "invalid inputs: need at least two frequencies");
  for (int n : n_list)
    if (n < 1)
      throw std::invalid_argument("invalid frequency: n must be positive");
}

inline double combined(const std::array<lattice::DualReport, 3>& reps) {
  double s = 0.0;
  for (const auto& r : reps) s += r.value * r.value;
  return std::sqrt(s);
}

inline Field field_difference(const Field& a, const Field& b) {
  if (a.kind != b.kind || a.grid_fingerprint != b.grid_fingerprint)
    throw std::invalid_argument("incompatible fields: difference arguments");
  Field out = a;
  out.coeffs -= b.coeffs;
  return out;
}

inline std::string format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail_experiment

/// Fixed test-field dictionary behind the weak-convergence proxy: twenty
/// deterministic low-frequency trigonometric fields plus five seeded smooth
/// fields.  The random fields carry joint monomial-times-wave factors so
/// that pairings against pure oscillations decay instead of vanishing
/// identically (pure full-period probes are exactly orthogonal to them).
inline std::vector<analytic::VectorPoly> default_dictionary(
    std::uint64_t seed) {
  using analytic::TrigPoly;
  const double w = 2.0 * M_PI;
  std::vector<analytic::VectorPoly> dict;
  auto unit = [](int c, const TrigPoly& p) {
    analytic::VectorPoly v;
    v[static_cast<std::size_t>(c)] = p;
    return v;
  };
  for (int c = 0; c < 3; ++c) dict.push_back(unit(c, TrigPoly::constant(1.0)));
  const int pairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {1, 0}, {2, 1}, {0, 2}};
  for (const auto& p : pairs)
    dict.push_back(unit(p[1], TrigPoly::sine(p[0], w)));
  for (const auto& p : pairs)
    dict.push_back(unit(p[1], TrigPoly::cosine(p[0], w)));
  for (int c = 0; c < 3; ++c) dict.push_back(unit(c, TrigPoly::sine(c, M_PI)));
  dict.push_back(unit(0, TrigPoly::cosine(0, M_PI)));
  dict.push_back(unit(1, TrigPoly::cosine(1, M_PI)));

  for (int r = 0; r < 5; ++r) {
    SplitMix64 rng(substream(seed, 900 + static_cast<std::uint64_t>(r)));
    analytic::VectorPoly v;
    for (int c = 0; c < 3; ++c) {
      const int a = static_cast<int>(rng.next_u64() % 3);
      int b = static_cast<int>(rng.next_u64() % 3);
      if (b == a) b = (b + 1) % 3;
      TrigPoly comp =
          (TrigPoly::monomial(a, 2) * TrigPoly::sine(b, w))
              .scaled(rng.next_symmetric());
      comp = comp + TrigPoly::monomial(static_cast<int>(rng.next_u64() % 3), 1)
                        .scaled(rng.next_symmetric());
      comp = comp + TrigPoly::cosine(static_cast<int>(rng.next_u64() % 3), w)
                        .scaled(rng.next_symmetric());
      v[static_cast<std::size_t>(c)] = comp;
    }
    dict.push_back(v);
  }
  return dict;
}

/// The dictionary as discrete edge or face fields on an assembled grid.
inline std::vector<Field> sample_dictionary(
    const std::vector<analytic::VectorPoly>& dictionary,
    const EntityIndex& index, EntityKind kind, const MassWeights& masses) {
  std::vector<Field> out;
  out.reserve(dictionary.size());
  for (const auto& t : dictionary)
    out.push_back(sample_vector(t, index, kind, masses));
  return out;
}

/// max over the dictionary of |<X_n - X, T>| / ||T|| in the mass inner
/// product: the distance-to-weak-limit proxy on assembled grids.
inline double weak_gap(const Field& xn, const Field& x,
                       const std::vector<Field>& dictionary,
                       const MassWeights& masses) {
  if (dictionary.empty())
    throw std::invalid_argument(
        "empty dictionary: weak gap needs test fields");
  const Field diff = detail_experiment::field_difference(xn, x);
  double best = 0.0;
  for (const Field& t : dictionary) {
    const double nrm = norm(t, masses);
    if (nrm <= 1e-14)
      throw std::invalid_argument("degenerate dictionary: zero test field");
    best = std::max(best, std::abs(inner_product(diff, t, masses)) / nrm);
  }
  return best;
}

/// Global pairing experiment: screens the discrete hypothesis norms for
/// growth, verifies the declared partition compatibility, then records per
/// (n, grid) the pairing against the expected limit, weak gaps, and the
/// Helmholtz proof trace (distance of the split parts to the split of the
/// limit field, and the stagnation of ||E_n - E||).
///
/// Verdict PASS iff the pairing defect converges (fitted slope or terminal
/// value), both weak gaps converge, and the stagnation norm stays above the
/// floor (weak-but-not-strong convergence).
inline ExperimentReport run_theorem1(const SequenceFamily& family,
                                     const std::vector<int>& n_list,
                                     const std::vector<int>& grid_list,
                                     const std::string& partition_rule,
                                     const ExperimentConfig& cfg = {}) {
  namespace de = detail_experiment;
  de::check_frequencies(n_list);
  if (grid_list.empty())
    throw std::invalid_argument("invalid inputs: need at least one base grid");
  for (int g : grid_list)
    if (g < 4)
      throw std::invalid_argument(
          "invalid inputs: base grids need at least four cells per axis");

  // measured hypothesis screening at matched resolution, before any use of
  // the declaration: the counterexample is caught by its own samples
  const std::size_t nn = n_list.size();
  std::vector<int> matched(nn);
  std::vector<double> curl_norms(nn), div_norms(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    const int n = n_list[i];
    const analytic::VectorPoly en = family.E(n), hn = family.H(n);
    const double fmax =
        std::max(analytic::max_frequency(en), analytic::max_frequency(hn));
    matched[i] = lattice::matched_resolution(cfg.matched_floor, fmax, n);
    curl_norms[i] = std::sqrt(lattice::curl_norm_sq(en, matched[i]));
    div_norms[i] = std::sqrt(lattice::div_norm_sq(hn, matched[i]));
  }
  const auto screen = [&](const char* label, const std::vector<double>& traj) {
    const auto factors = de::doubling_factors(n_list, traj);
    if (factors.empty()) return;
    const double worst = *std::min_element(factors.begin(), factors.end());
    if (worst >= cfg.growth_threshold)
      throw std::runtime_error(
          std::string("hypothesis violation: discrete ") + label +
          " norms grow by factor " + de::format(worst) +
          " per doubling of n");
  };
  screen("curl", curl_norms);
  screen("divergence", div_norms);
  if (std::find(family.compatible.begin(), family.compatible.end(),
                partition_rule) == family.compatible.end())
    throw std::runtime_error("hypothesis violation: family " + family.name +
                             " is not declared compatible with partition " +
                             partition_rule);

  const double limit = family.expected_limit();
  std::vector<double> pairings(nn), defects(nn), gaps_e(nn), gaps_h(nn);
  const auto dictionary = default_dictionary(cfg.seed);
  for (std::size_t i = 0; i < nn; ++i) {
    const int n = n_list[i];
    const analytic::VectorPoly en = family.E(n), hn = family.H(n);
    pairings[i] = pairing_closed_form(en, hn);
    if (cfg.quadrature_check) {
      const double quad = pairing_quadrature(en, hn);
      if (std::abs(quad - pairings[i]) > 1e-6 * (1.0 + std::abs(pairings[i])))
        throw std::runtime_error(
            "pairing cross-check failed: closed form " +
            de::format(pairings[i]) + " vs quadrature " + de::format(quad));
    }
    defects[i] = std::abs(pairings[i] - limit);
    gaps_e[i] =
        lattice::weak_gap(en - family.E_limit, dictionary, matched[i]);
    gaps_h[i] =
        lattice::weak_gap(hn - family.H_limit, dictionary, matched[i]);
  }

  // split quantities per base grid; the potential is pinned (mean-zero when
  // no essential class is present), so distances to the limit split are
  // well defined
  struct SplitCell {
    double potential_distance, residual_distance, stagnation;
  };
  std::vector<std::vector<SplitCell>> cells(grid_list.size());
  for (std::size_t gi = 0; gi < grid_list.size(); ++gi) {
    const int m = grid_list[gi];
    const VoxelDomain dom = build_full_box({m, m, m}, 1.0 / m);
    const EntityIndex index(dom);
    const BoundaryPartition part =
        tag_boundary(index, PartitionSpec::parse(partition_rule));
    const MassWeights masses = build_masses(index);
    const OperatorFamily fam = build_family(index, part, masses);
    const Field e_lim =
        sample_vector(family.E_limit, index, EntityKind::edge, masses);
    const HelmholtzSplit s_lim = simple_split(e_lim, fam, masses, cfg.solve);
    for (std::size_t i = 0; i < nn; ++i) {
      const Field e_n =
          sample_vector(family.E(n_list[i]), index, EntityKind::edge, masses);
      const HelmholtzSplit s_n = simple_split(e_n, fam, masses, cfg.solve);
      SplitCell cell;
      cell.potential_distance =
          norm(de::field_difference(s_n.potential, s_lim.potential), masses);
      cell.residual_distance = norm(
          de::field_difference(s_n.residual_part, s_lim.residual_part),
          masses);
      cell.stagnation = norm(de::field_difference(e_n, e_lim), masses);
      cells[gi].push_back(cell);
    }
  }

  ExperimentReport rep;
  rep.family = family.name;
  rep.label = "global pairing run under partition " + partition_rule;
  // A base grid can only witness ||E_n - E|| staying away from zero when it
  // resolves the oscillation (grid > 2n); at or below the Nyquist rate the
  // sampled difference aliases and may vanish identically.  Unresolved pairs
  // stay in the rows as data but are excluded from the floor check; when no
  // base grid resolves a frequency, the exact oscillation norm stands in.
  rep.min_stagnation = std::numeric_limits<double>::infinity();
  std::string unresolved;
  for (std::size_t i = 0; i < nn; ++i) {
    bool assessed = false;
    for (std::size_t gi = 0; gi < grid_list.size(); ++gi) {
      ExperimentRow row;
      row.family = family.name;
      row.n = n_list[i];
      row.grid = grid_list[gi];
      row.matched = matched[i];
      row.pairing = pairings[i];
      row.defect = defects[i];
      row.gap_e = gaps_e[i];
      row.gap_h = gaps_h[i];
      row.potential_distance = cells[gi][i].potential_distance;
      row.residual_distance = cells[gi][i].residual_distance;
      row.stagnation = cells[gi][i].stagnation;
      row.curl_norm = curl_norms[i];
      row.div_norm = div_norms[i];
      rep.rows.push_back(row);
      if (grid_list[gi] > 2 * n_list[i]) {
        assessed = true;
        rep.min_stagnation = std::min(rep.min_stagnation, row.stagnation);
      }
    }
    if (!assessed) {
      const analytic::VectorPoly osc = family.E(n_list[i]) - family.E_limit;
      const double exact =
          std::sqrt(std::max(0.0, analytic::dot(osc, osc).integral()));
      rep.min_stagnation = std::min(rep.min_stagnation, exact);
      unresolved += (unresolved.empty() ? "" : ", ") +
                    std::to_string(n_list[i]);
    }
  }
  if (!unresolved.empty())
    rep.notes.push_back(
        "stagnation for n = " + unresolved +
        " taken from the exact oscillation norm; every base grid is at or "
        "below the Nyquist rate 2n");

  rep.terminal_defect = defects.back();
  const auto dslope = de::fitted_slope(n_list, defects, cfg.defect_floor);
  const auto eslope = de::fitted_slope(n_list, gaps_e, cfg.defect_floor);
  const auto hslope = de::fitted_slope(n_list, gaps_h, cfg.defect_floor);
  rep.defect_slope = dslope.value_or(0.0);
  rep.gap_e_slope = eslope.value_or(0.0);
  rep.gap_h_slope = hslope.value_or(0.0);
  if (!dslope) rep.notes.push_back("defect trajectory at floor; no slope fit");
  if (!eslope) rep.notes.push_back("gap_e trajectory at floor; no slope fit");
  if (!hslope) rep.notes.push_back("gap_h trajectory at floor; no slope fit");

  auto converged = [&cfg](const std::optional<double>& slope, double terminal,
                          double terminal_bound) {
    if (terminal <= terminal_bound) return true;
    return slope.has_value() && *slope <= cfg.slope_threshold;
  };
  const bool defect_ok =
      converged(dslope, rep.terminal_defect, cfg.terminal_threshold);
  const bool gaps_ok =
      converged(eslope, gaps_e.back(), cfg.gap_terminal) &&
      converged(hslope, gaps_h.back(), cfg.gap_terminal);
  const bool stagnation_ok = rep.min_stagnation >= cfg.stagnation_floor;
  rep.pass = defect_ok && gaps_ok && stagnation_ok;
  if (rep.pass) {
    rep.verdict = "PASS";
  } else {
    rep.verdict = "FAIL:";
    if (!defect_ok) rep.verdict += " pairing defect does not converge;";
    if (!gaps_ok) rep.verdict += " weak gaps do not converge;";
    if (!stagnation_ok)
      rep.verdict += " ||E_n - E|| collapses (convergence is strong);";
  }
  return rep;
}

/// Localized pairing experiment: <cutoff * E_n, H_n> along the frequency
/// list, against the limit <cutoff * E, H> plus, for the violation family,
/// the predicted defect share * integral(cutoff).  The cutoff must vanish
/// on the boundary (checked on a sample grid of every face).
inline ExperimentReport run_local(const SequenceFamily& family,
                                  const analytic::TrigPoly& cutoff,
                                  const std::vector<int>& n_list,
                                  const ExperimentConfig& cfg = {}) {
  namespace de = detail_experiment;
  de::check_frequencies(n_list);

  const int bs = 32;  // admissibility sampling per face: (bs+1)^2 points
  for (int face = 0; face < 6; ++face) {
    const int axis = face / 2;
    const double wall = (face % 2 == 0) ? 0.0 : 1.0;
    for (int i = 0; i <= bs; ++i)
      for (int j = 0; j <= bs; ++j) {
        Eigen::Vector3d p;
        p[axis] = wall;
        p[(axis + 1) % 3] = static_cast<double>(i) / bs;
        p[(axis + 2) % 3] = static_cast<double>(j) / bs;
        const double v = cutoff.evaluate(p);
        if (std::abs(v) > 1e-12)
          throw std::runtime_error(
              "cutoff not admissible: boundary value " + de::format(v) +
              " at face sample");
      }
  }

  const double cutoff_mass = cutoff.integral();
  const analytic::VectorPoly phi_e_lim = multiply(cutoff, family.E_limit);
  const double local_limit = pairing_closed_form(phi_e_lim, family.H_limit);
  const double expected =
      local_limit +
      (family.hypothesis_violation ? family.defect_share * cutoff_mass : 0.0);

  ExperimentReport rep;
  rep.family = family.name;
  rep.label = "localized cutoff pairing run";
  rep.notes.push_back("cutoff mass " + de::format(cutoff_mass) +
                      ", expected limit " + de::format(expected));
  if (family.hypothesis_violation)
    rep.notes.push_back("expected persistent defect " +
                        de::format(family.defect_share * cutoff_mass) +
                        " demonstrates necessity of the hypotheses");

  std::vector<double> defects(n_list.size());
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const int n = n_list[i];
    const analytic::VectorPoly phi_en = multiply(cutoff, family.E(n));
    const analytic::VectorPoly hn = family.H(n);
    const double closed = pairing_closed_form(phi_en, hn);
    if (cfg.quadrature_check) {
      const double quad = pairing_quadrature(phi_en, hn);
      if (std::abs(quad - closed) > 1e-6 * (1.0 + std::abs(closed)))
        throw std::runtime_error("pairing cross-check failed: closed form " +
                                 de::format(closed) + " vs quadrature " +
                                 de::format(quad));
    }
    defects[i] = std::abs(closed - expected);
    ExperimentRow row;
    row.family = family.name;
    row.n = n;
    row.pairing = closed;
    row.defect = defects[i];
    rep.rows.push_back(row);
  }

  rep.terminal_defect = defects.back();
  const auto dslope = de::fitted_slope(n_list, defects, cfg.defect_floor);
  rep.defect_slope = dslope.value_or(0.0);
  if (!dslope) rep.notes.push_back("defect trajectory at floor; no slope fit");
  rep.pass = rep.terminal_defect <= cfg.terminal_threshold ||
             (dslope.has_value() && *dslope <= cfg.slope_threshold);
  rep.verdict = rep.pass ? "PASS" : "FAIL: localized defect does not converge";
  return rep;
}

/// Discrete negative-order dual norm of a functional on the node test space:
/// sqrt(<f, z>) with (grad^T M_e grad + M_n) z = f on the assembled grid.
/// Node data acts by the mass pairing; edge data acts componentwise through
/// midpoint interpolation of the test function onto each edge family
/// (the discrete distributional pairing).  The operator family fixes the
/// essential boundary class, which must agree with the requested dual space.
inline double neg_sobolev_norm(const Field& f, DualSpace bc,
                               const EntityIndex& index,
                               const OperatorFamily& fam,
                               const MassWeights& masses,
                               const SolveConfig& cfg = {}) {
  if (f.grid_fingerprint != fam.grid_fingerprint ||
      masses.grid_fingerprint != fam.grid_fingerprint)
    throw std::invalid_argument(
        "inconsistent inputs: field, operators, and masses built on "
        "different grids");
  const bool masked = !fam.grad.bc_mask.empty();
  if (bc == DualSpace::zero_trace && !masked)
    throw std::invalid_argument(
        "inconsistent inputs: zero-trace dual space needs an essential "
        "boundary class on the potentials");
  if (bc == DualSpace::free && masked)
    throw std::invalid_argument(
        "inconsistent inputs: free dual space needs an unconstrained "
        "potential space");

  const SparseMat& g = fam.grad.matrix;
  const Eigen::VectorXd& we = masses.of(EntityKind::edge);
  const Eigen::VectorXd& wn = masses.of(EntityKind::node);
  SparseMat a = SparseMat(g.transpose()) * detail::diag_sparse(we) * g;
  a = a + detail::diag_sparse(wn);

  auto dual_sq = [&](const Eigen::VectorXd& rhs) {
    if (rhs.norm() == 0.0) return 0.0;
    const SolveReport sol = solve_spd(a, Eigen::VectorXd(), rhs, {}, cfg);
    return rhs.dot(sol.x);
  };

  double total = 0.0;
  if (f.kind == EntityKind::node) {
    Eigen::VectorXd rhs = wn.cwiseProduct(f.coeffs);
    for (int id : fam.grad.bc_mask) rhs[id] = 0.0;
    total = dual_sq(rhs);
  } else if (f.kind == EntityKind::edge) {
    // |G|^T recovers "sum of both endpoints / h"; scaling by h/2 turns it
    // into the endpoint-average (midpoint interpolation) transpose
    SparseMat absg = g;
    for (int k = 0; k < absg.outerSize(); ++k)
      for (SparseMat::InnerIterator it(absg, k); it; ++it)
        it.valueRef() = std::abs(it.value());
    for (int c = 0; c < 3; ++c) {
      Eigen::VectorXd fc = Eigen::VectorXd::Zero(f.coeffs.size());
      for (Eigen::Index id = 0; id < f.coeffs.size(); ++id)
        if (index.component_axis(EntityKind::edge, static_cast<int>(id)) == c)
          fc[id] = f.coeffs[id];
      const Eigen::VectorXd rhs =
          0.5 * fam.spacing *
          (SparseMat(absg.transpose()) * we.cwiseProduct(fc).eval());
      total += dual_sq(rhs);
    }
  } else {
    throw std::invalid_argument(
        "unsupported kind: dual norms take node or edge functionals");
  }
  return std::sqrt(std::max(0.0, total));
}

/// Negative-norm trajectory of the scalar oscillation cos(2 pi n x1) on the
/// streamed lattice, resolution-matched per frequency.  The demonstration
/// behind the dual-norm decay claims.
struct DualTrajectory {
  std::vector<int> ns;
  std::vector<int> grids;
  std::vector<double> values;
  double slope = 0.0;
  bool slope_valid = false;
};

inline DualTrajectory scalar_dual_trajectory(const std::vector<int>& n_list,
                                             bool zero_trace,
                                             const ExperimentConfig& cfg = {}) {
  detail_experiment::check_frequencies(n_list);
  DualTrajectory out;
  lattice::DualConfig dcfg = cfg.dual;
  dcfg.zero_trace = zero_trace;
  for (int n : n_list) {
    const int m = std::min(cfg.dual_cap, std::max(16, 4 * n));
    const auto rep = lattice::dual_norm_scalar(
        analytic::TrigPoly::cosine(0, 2.0 * M_PI * n), m, dcfg);
    out.ns.push_back(n);
    out.grids.push_back(m);
    out.values.push_back(rep.value);
  }
  const auto slope =
      detail_experiment::fitted_slope(out.ns, out.values, 1e-14);
  out.slope_valid = slope.has_value();
  out.slope = slope.value_or(0.0);
  return out;
}

/// Dual-norm compactness proxies: per frequency, the dual norms of the
/// distributional curl image of E_n over the free test space and of the
/// divergence image of H_n over the zero-trace test space, both raw and
/// centered at the limit field, next to the pairing trajectory.  Bounded
/// centered trajectories are evidence for, never proof of, the compactness
/// hypotheses: the report is a demonstration, not a certification.
inline ExperimentReport run_alternative(const SequenceFamily& family,
                                        const std::vector<int>& n_list,
                                        const ExperimentConfig& cfg = {}) {
  namespace de = detail_experiment;
  de::check_frequencies(n_list);

  ExperimentReport rep;
  rep.family = family.name;
  rep.label = "dual-norm compactness proxies (demonstration, not "
              "certification)";
  const double limit = family.expected_limit();

  lattice::DualConfig hat = cfg.dual;
  hat.zero_trace = false;
  lattice::DualConfig tilde = cfg.dual;
  tilde.zero_trace = true;

  std::vector<double> defects, div_centered;
  for (int n : n_list) {
    const analytic::VectorPoly en = family.E(n), hn = family.H(n);
    const double fmax =
        std::max(analytic::max_frequency(en), analytic::max_frequency(hn));
    const int want =
        std::max(16, 4 * static_cast<int>(std::ceil(fmax)));
    const int m = std::min(cfg.dual_cap, want);
    if (want > m)
      rep.notes.push_back("n=" + std::to_string(n) +
                          ": dual lattice capped at " + std::to_string(m) +
                          ", matched resolution would be " +
                          std::to_string(want));
    ExperimentRow row;
    row.family = family.name;
    row.n = n;
    row.matched = m;
    row.pairing = pairing_closed_form(en, hn);
    if (cfg.quadrature_check) {
      const double quad = pairing_quadrature(en, hn);
      if (std::abs(quad - row.pairing) > 1e-6 * (1.0 + std::abs(row.pairing)))
        throw std::runtime_error("pairing cross-check failed: closed form " +
                                 de::format(row.pairing) + " vs quadrature " +
                                 de::format(quad));
    }
    row.defect = std::abs(row.pairing - limit);
    row.curl_dual = de::combined(lattice::dual_norm_curl(en, m, hat));
    row.div_dual = lattice::dual_norm_divergence(hn, m, tilde).value;
    row.curl_dual_centered =
        de::combined(lattice::dual_norm_curl(en - family.E_limit, m, hat));
    row.div_dual_centered =
        lattice::dual_norm_divergence(hn - family.H_limit, m, tilde).value;
    defects.push_back(row.defect);
    div_centered.push_back(row.div_dual_centered);
    rep.rows.push_back(row);
  }

  rep.terminal_defect = defects.back();
  rep.defect_slope =
      de::fitted_slope(n_list, defects, cfg.defect_floor).value_or(0.0);
  if (div_centered.back() >= 0.9 * div_centered.front() &&
      div_centered.back() > cfg.gap_terminal)
    rep.notes.push_back("divergence dual norms non-decaying: " +
                        de::format(div_centered.front()) + " -> " +
                        de::format(div_centered.back()));
  if (family.hypothesis_violation)
    rep.notes.push_back("violation family: pairing defect persists at " +
                        de::format(rep.terminal_defect));
  rep.pass = true;
  rep.verdict = "demonstration, not certification";
  return rep;
}

}  // namespace derham
