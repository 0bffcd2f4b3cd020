#include <derham/families.hpp>
#include <derham/lattice.hpp>
#include <derham/operators.hpp>
#include <derham/pairing.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace derham;
using namespace derham::analytic;
namespace lat = derham::lattice;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::Vector3d pt(double x, double y, double z) {
  return Eigen::Vector3d(x, y, z);
}

}  // namespace

TEST_CASE("shift slides exponentials and expands powers exactly") {
  const TrigPoly f = TrigPoly::monomial(0, 2) * TrigPoly::cosine(1, 2.0 * kPi);
  const TrigPoly g = lat::shift(f, 0, 0.3);
  const TrigPoly h = lat::shift(f, 1, -0.125);
  for (double x : {0.1, 0.45, 0.8})
    for (double y : {0.2, 0.6}) {
      CHECK_THAT(g.evaluate(pt(x, y, 0.5)),
                 WithinAbs(f.evaluate(pt(x + 0.3, y, 0.5)), 1e-13));
      CHECK_THAT(h.evaluate(pt(x, y, 0.5)),
                 WithinAbs(f.evaluate(pt(x, y - 0.125, 0.5)), 1e-13));
    }
}

TEST_CASE("central difference matches the discrete symbol") {
  const double h = 1.0 / 16;
  // polynomial branch: the half-shift quotient of x^2 is exactly 2x
  // evaluate away from the window edges: the half-shift calculus is only
  // meaningful at staggered interior points
  const TrigPoly quad = lat::central_difference(TrigPoly::monomial(0, 2), 0, h);
  for (double x : {0.25, 0.5, 0.7})
    CHECK_THAT(quad.evaluate(pt(x, 0.0, 0.0)), WithinAbs(2.0 * x, 1e-13));
  // exponential branch: cos(w x) -> -(2/h) sin(w h / 2) sin(w x)
  const double w = 2.0 * kPi * 3;
  const TrigPoly cd = lat::central_difference(TrigPoly::cosine(0, w), 0, h);
  const double symbol = -(2.0 / h) * std::sin(0.5 * w * h);
  for (double x : {0.11, 0.37, 0.62})
    CHECK_THAT(cd.evaluate(pt(x, 0.0, 0.0)),
               WithinAbs(symbol * std::sin(w * x), 1e-10));
}

TEST_CASE("streamed sums equal assembled mass pairings on a small box") {
  const int m = 6;
  EntityIndex index(preset_domain("cube", m));
  MassWeights masses = build_masses(index);
  OperatorFamily fam = build_family(
      index, tag_boundary(index, PartitionSpec::parse("all-N")), masses);
  REQUIRE(fam.curl.bc_mask.empty());
  REQUIRE(fam.div.bc_mask.empty());

  SequenceFamily f1 = family_by_name("F1");
  const VectorPoly e = f1.E(2);
  const VectorPoly h = f1.H(2);

  const Field ef = sample_vector(e, index, EntityKind::edge, masses);
  const Field hf = sample_vector(h, index, EntityKind::edge, masses);
  CHECK_THAT(lat::edge_inner(e, h, m),
             WithinAbs(inner_product(ef, hf, masses), 1e-12));
  CHECK_THAT(lat::edge_norm(e, m) * lat::edge_norm(e, m),
             WithinRel(inner_product(ef, ef, masses), 1e-12));

  const Eigen::VectorXd ce = fam.curl.matrix * ef.coeffs;
  const double asm_curl =
      (ce.array() * ce.array() * masses.of(EntityKind::face).array()).sum();
  CHECK_THAT(lat::curl_norm_sq(e, m), WithinAbs(asm_curl, 1e-12));

  const Field hface = sample_vector(h, index, EntityKind::face, masses);
  const Eigen::VectorXd dv = fam.div.matrix * hface.coeffs;
  const double asm_div =
      (dv.array() * dv.array() * masses.of(EntityKind::cell).array()).sum();
  CHECK_THAT(lat::div_norm_sq(h, m), WithinRel(asm_div, 1e-12));

  // a field with nonzero discrete curl exercises the face-rule sums
  SequenceFamily f3 = family_by_name("F3");
  const VectorPoly e3 = f3.E(1);
  const Field e3f = sample_vector(e3, index, EntityKind::edge, masses);
  const Eigen::VectorXd c3 = fam.curl.matrix * e3f.coeffs;
  const double asm_curl3 =
      (c3.array() * c3.array() * masses.of(EntityKind::face).array()).sum();
  REQUIRE(asm_curl3 > 100.0);
  CHECK_THAT(lat::curl_norm_sq(e3, m), WithinRel(asm_curl3, 1e-10));
}

TEST_CASE("matched resolution rule") {
  const std::vector<int> ns{1, 2, 4, 8, 16, 32};
  const std::vector<int> expect{12, 28, 72, 204, 576, 1632};
  for (std::size_t q = 0; q < ns.size(); ++q)
    CHECK(lat::matched_resolution(12, ns[q], ns[q]) == expect[q]);
  // base floor wins for slow content, frequency floor for fast content
  CHECK(lat::matched_resolution(24, 1, 1) == 24);
  CHECK(lat::matched_resolution(12, 10, 1) == 40);
}

TEST_CASE("counterexample divergence follows the exact stencil symbol") {
  SequenceFamily f2 = family_by_name("F2");
  const std::vector<int> ns{1, 2, 4, 8, 16, 32};
  std::vector<double> values;
  for (int n : ns) {
    const int m = lat::matched_resolution(12, n, n);
    const double h = 1.0 / m;
    // discrete divergence of cos(2 pi n x) e_0: symbol (2/h) sin(pi n h),
    // squared against the exact half sample mass of the sine image
    const double symbol = (2.0 / h) * std::sin(kPi * n * h);
    const double oracle = 0.5 * symbol * symbol;
    const double got = lat::div_norm_sq(f2.H(n), m);
    CHECK_THAT(got, WithinRel(oracle, 1e-12));
    values.push_back(std::sqrt(got));
  }
  // the norms double per doubling of n: the unbounded-hypothesis signature
  for (std::size_t q = 1; q < values.size(); ++q) {
    const double ratio = values[q] / values[q - 1];
    CHECK(ratio > 1.9);
    CHECK(ratio < 2.1);
  }
}

TEST_CASE("compliant families keep bounded hypothesis norms at matched "
          "resolution") {
  const std::vector<int> ns{1, 2, 4, 8, 16, 32};

  SequenceFamily f1 = family_by_name("F1");
  const double f1_div_limit = 1.5 * kPi * kPi;  // grad part pi^2/2 + curl part
  for (int n : ns) {
    const int m = lat::matched_resolution(12, n, n);
    CHECK(lat::curl_norm_sq(f1.E(n), m) == 0.0);  // curl-free oscillation
    CHECK_THAT(lat::div_norm_sq(f1.H(n), m), WithinRel(f1_div_limit, 0.05));
  }

  SequenceFamily f3 = family_by_name("F3");
  const double f3_curl_limit = 32.0 * std::pow(kPi, 4.0);
  for (int n : ns) {
    const int m = lat::matched_resolution(12, n, n);
    CHECK_THAT(lat::curl_norm_sq(f3.E(n), m), WithinRel(f3_curl_limit, 0.03));
    CHECK(lat::div_norm_sq(f3.H(n), m) <= 1e-8);  // solenoidal to roundoff
  }

  SequenceFamily f4 = family_by_name("F4");
  const double f4_div_limit = kPi * kPi / 6.0 + kPi * kPi / 2.0;
  std::vector<double> f4_div;
  for (int n : ns) {
    const double fmax = std::max(analytic::max_frequency(f4.E(n)),
                                 analytic::max_frequency(f4.H(n)));
    const int m = lat::matched_resolution(12, fmax, n);
    // the oblique oscillation is curl-free in the limit; the cubic stencil
    // artifact stays capped by the n^(3/2) resolution rule
    CHECK(lat::curl_norm_sq(f4.E(n), m) <= 0.07);
    f4_div.push_back(lat::div_norm_sq(f4.H(n), m));
  }
  CHECK_THAT(f4_div.back(), WithinRel(f4_div_limit, 0.01));
  for (double v : f4_div) {
    CHECK(v >= 6.0);
    CHECK(v <= 6.8);
  }
}

TEST_CASE("lattice weak gap against a tiny dictionary") {
  VectorPoly unit_x;
  unit_x[0] = TrigPoly::constant(1.0);
  std::vector<VectorPoly> dict{unit_x};

  VectorPoly osc;
  osc[0] = TrigPoly::cosine(0, 2.0 * kPi);
  // the full-period wave is exactly orthogonal to constants on the lattice
  CHECK_THAT(lat::weak_gap(osc, dict, 12), WithinAbs(0.0, 1e-13));

  VectorPoly half;
  half[0] = TrigPoly::constant(0.5);
  CHECK_THAT(lat::weak_gap(half, dict, 12), WithinAbs(0.5, 1e-13));

  CHECK_THROWS_WITH(lat::weak_gap(osc, {}, 12),
                    ContainsSubstring("empty dictionary"));
  std::vector<VectorPoly> degenerate{VectorPoly{}};
  CHECK_THROWS_WITH(lat::weak_gap(osc, degenerate, 12),
                    ContainsSubstring("degenerate dictionary"));
}

TEST_CASE("free-space scalar dual norm matches the separable eigen oracle") {
  lat::DualConfig cfg;
  cfg.zero_trace = false;
  for (int n : {1, 2, 4}) {
    const int m = std::max(16, 4 * n);
    const double h = 1.0 / m;
    const auto rep =
        lat::dual_norm_scalar(TrigPoly::cosine(0, 2.0 * kPi * n), m, cfg);
    // cos(2 pi n x) is an exact eigenvector of the free 1D pencil with
    // lambda = (4/h^2) sin^2(pi n h) and squared mass 1/2
    const double s = std::sin(kPi * n * h);
    const double lambda = 4.0 / (h * h) * s * s;
    CHECK_THAT(rep.value, WithinAbs(std::sqrt(0.5 / (lambda + 1.0)), 1e-10));
    CHECK(rep.residual <= 1e-12);
  }
}

TEST_CASE("zero-trace scalar dual norms, frozen spot values") {
  lat::DualConfig cfg;  // zero_trace defaults to true
  const auto r1 = lat::dual_norm_scalar(TrigPoly::cosine(0, 2.0 * kPi), 16, cfg);
  CHECK_THAT(r1.value, WithinAbs(0.065210103, 1e-8));
  CHECK(r1.residual <= 1e-12);
  const auto r8 =
      lat::dual_norm_scalar(TrigPoly::cosine(0, 16.0 * kPi), 32, cfg);
  CHECK_THAT(r8.value, WithinAbs(0.014678958, 1e-8));
}

TEST_CASE("dual norm edge cases") {
  lat::DualConfig cfg;
  const auto zero = lat::dual_norm_scalar(TrigPoly::zero(), 8, cfg);
  CHECK(zero.value == 0.0);
  CHECK(zero.residual == 0.0);
  CHECK_THROWS_WITH(lat::dual_norm_scalar(TrigPoly::constant(1.0), 1, cfg),
                    ContainsSubstring("inconsistent inputs"));
  // the divergence functional of a constant field vanishes identically:
  // summation by parts against gradients leaves no interior contribution
  VectorPoly constant;
  constant[0] = TrigPoly::constant(1.0);
  const auto dv = lat::dual_norm_divergence(constant, 8, cfg);
  CHECK_THAT(dv.value, WithinAbs(0.0, 1e-12));
}

TEST_CASE("curl dual of a gradient oscillation vanishes on the zero-trace "
          "space") {
  // cos(2 pi n x0) e_0 is a discrete gradient; against zero-trace tests its
  // distributional curl functional telescopes to pure boundary terms, which
  // the trace condition kills.  (The free space keeps the boundary flux and
  // reports a genuine nonzero value; the global runners rely on that.)
  lat::DualConfig cfg;
  VectorPoly v;
  v[0] = TrigPoly::cosine(0, 4.0 * kPi);
  const auto reps = lat::dual_norm_curl(v, 16, cfg);
  for (const auto& r : reps) CHECK_THAT(r.value, WithinAbs(0.0, 1e-12));

  lat::DualConfig free_cfg;
  free_cfg.zero_trace = false;
  const auto free_reps = lat::dual_norm_curl(v, 16, free_cfg);
  double total = 0.0;
  for (const auto& r : free_reps) total += r.value * r.value;
  // the boundary flux survives on the free space; frozen combined value
  CHECK_THAT(std::sqrt(total), WithinAbs(0.389820799, 1e-8));
}
