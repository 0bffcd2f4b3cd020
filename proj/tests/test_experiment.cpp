#include <derham/experiment.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace derham;
using namespace derham::analytic;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = 3.14159265358979323846;
const std::vector<int> kNs{1, 2, 4, 8, 16, 32};
const std::vector<int> kGrids{12, 24};

bool has_note(const ExperimentReport& rep, const std::string& needle) {
  for (const auto& note : rep.notes)
    if (note.find(needle) != std::string::npos) return true;
  return false;
}

const ExperimentRow& row_at(const ExperimentReport& rep, int n, int grid) {
  for (const auto& r : rep.rows)
    if (r.n == n && r.grid == grid) return r;
  FAIL("missing row");
  return rep.rows.front();
}

}  // namespace

TEST_CASE("dictionary has twenty deterministic and five seeded fields") {
  const auto dict = default_dictionary(2023);
  REQUIRE(dict.size() == 25);
  for (const auto& t : dict) CHECK(lattice::edge_norm(t, 8) > 1e-3);
  // determinism: same seed, same fields
  const auto again = default_dictionary(2023);
  for (std::size_t q = 0; q < dict.size(); ++q)
    CHECK(lattice::edge_inner(dict[q] - again[q], dict[q] - again[q], 8) ==
          0.0);
}

TEST_CASE("orthogonal-oscillation family passes the global run") {
  SequenceFamily f1 = family_by_name("F1");
  const ExperimentReport rep = run_theorem1(f1, kNs, kGrids, "all-N", {});
  REQUIRE(rep.pass);
  CHECK(rep.verdict == "PASS");
  REQUIRE(rep.rows.size() == 12);
  CHECK_THAT(rep.defect_slope, WithinAbs(-2.068, 2e-3));
  CHECK_THAT(rep.gap_e_slope, WithinAbs(-2.243, 2e-3));
  CHECK_THAT(rep.gap_h_slope, WithinAbs(-2.006, 2e-3));
  CHECK_THAT(rep.terminal_defect, WithinRel(1.555e-4, 1e-2));
  CHECK_THAT(rep.min_stagnation, WithinAbs(1.0 / std::sqrt(2.0), 1e-6));

  // closed-form pairing at n=1: (2/pi)(1 - 1/3)
  const ExperimentRow& r0 = rep.rows.front();
  CHECK(r0.n == 1);
  CHECK(r0.grid == 12);
  CHECK(r0.matched == 12);
  CHECK_THAT(r0.pairing, WithinAbs((2.0 / kPi) * (2.0 / 3.0), 1e-9));

  // weak gaps at matched resolution, frozen values
  CHECK_THAT(row_at(rep, 1, 12).gap_e, WithinAbs(0.7071067812, 1e-6));
  CHECK_THAT(row_at(rep, 2, 12).gap_e, WithinAbs(5.954026252e-2, 1e-8));
  CHECK_THAT(row_at(rep, 1, 12).gap_h, WithinAbs(3.357139527e-3, 1e-8));
  CHECK_THAT(row_at(rep, 32, 12).gap_e, WithinAbs(2.197182704e-4, 1e-9));

  for (const auto& r : rep.rows) {
    // the oscillation is an exact discrete gradient: the split residual
    // part never moves, independent of n
    CHECK(r.residual_distance <= 1e-10);
    // weak-but-not-strong convergence: ||E_n - E|| stays put
    CHECK_THAT(r.stagnation, WithinAbs(1.0 / std::sqrt(2.0), 1e-6));
    CHECK(r.curl_norm == 0.0);
    CHECK_THAT(r.div_norm, WithinRel(std::sqrt(1.5 * kPi * kPi), 0.03));
  }
  // potential distances decay until the base-grid Nyquist plateau
  CHECK_THAT(row_at(rep, 1, 12).potential_distance, WithinAbs(0.1138, 2e-4));
  CHECK_THAT(row_at(rep, 2, 12).potential_distance, WithinAbs(0.0589, 2e-4));
  for (int n : {4, 8, 16, 32}) {
    const double pd = row_at(rep, n, 12).potential_distance;
    CHECK(pd >= 0.033);
    CHECK(pd <= 0.035);
  }
}

TEST_CASE("orthogonal-oscillation family also passes under a mixed "
          "partition") {
  SequenceFamily f1 = family_by_name("F1");
  const ExperimentReport rep = run_theorem1(f1, kNs, kGrids, "T:x-", {});
  REQUIRE(rep.pass);
  CHECK(rep.verdict == "PASS");
  CHECK(rep.terminal_defect <= 1e-3);
  CHECK(rep.min_stagnation >= 0.5);
  // the pairing itself does not depend on the partition
  CHECK_THAT(rep.rows.front().pairing,
             WithinAbs((2.0 / kPi) * (2.0 / 3.0), 1e-9));
}

TEST_CASE("gradient-oscillation family reproduces the proof trace") {
  SequenceFamily f3 = family_by_name("F3");
  const ExperimentReport rep = run_theorem1(f3, kNs, kGrids, "all-N", {});
  REQUIRE(rep.pass);
  CHECK(has_note(rep, "defect trajectory at floor"));
  CHECK(has_note(rep, "gap_h trajectory at floor"));
  for (const auto& r : rep.rows) {
    // the pairing sits at its limit 6 pi^2 for every n
    CHECK_THAT(r.pairing, WithinAbs(6.0 * kPi * kPi, 1e-7));
    CHECK(r.defect <= 1e-7);
    CHECK(r.gap_h <= 1e-12);
    // split residual part frozen in n, distances at solver tolerance
    CHECK(r.residual_distance <= 1e-9);
    CHECK_THAT(r.stagnation, WithinAbs(1.0 / std::sqrt(2.0), 1e-6));
  }
}

TEST_CASE("oblique-oscillation family passes the global run") {
  SequenceFamily f4 = family_by_name("F4");
  const ExperimentReport rep = run_theorem1(f4, kNs, kGrids, "all-N", {});
  REQUIRE(rep.pass);
  CHECK_THAT(rep.defect_slope, WithinAbs(-3.015, 2e-3));
  CHECK_THAT(rep.gap_h_slope, WithinAbs(-7.260, 2e-3));
  CHECK_THAT(rep.terminal_defect, WithinRel(1.729e-7, 1e-2));
  CHECK(has_note(rep, "gap_e trajectory at floor"));
  // closed-form pairing at n=1: 1/pi + 2/(sqrt5 pi^2 n (16 n^2 - 1))
  CHECK_THAT(rep.rows.front().pairing,
             WithinAbs(1.0 / kPi + 2.0 / (std::sqrt(5.0) * kPi * kPi * 15.0),
                       1e-9));
  // the oblique oscillation is not a discrete gradient: the residual part
  // genuinely moves at n=1
  CHECK(rep.rows.front().residual_distance > 5e-3);
}

TEST_CASE("counterexample family is rejected for measured growth") {
  SequenceFamily f2 = family_by_name("F2");
  CHECK_THROWS_WITH(
      run_theorem1(f2, kNs, kGrids, "all-N", {}),
      ContainsSubstring(
          "hypothesis violation: discrete divergence norms grow by factor"));
  CHECK_THROWS_WITH(run_theorem1(f2, kNs, kGrids, "all-N", {}),
                    ContainsSubstring("factor 2.001"));
}

TEST_CASE("undeclared partitions are rejected") {
  SequenceFamily f1 = family_by_name("F1");
  CHECK_THROWS_WITH(
      run_theorem1(f1, kNs, kGrids, "T:z+", {}),
      ContainsSubstring(
          "family F1 is not declared compatible with partition T:z+"));
}

TEST_CASE("global runner validates its inputs") {
  SequenceFamily f1 = family_by_name("F1");
  CHECK_THROWS_WITH(run_theorem1(f1, {1}, kGrids, "all-N", {}),
                    ContainsSubstring("need at least two frequencies"));
  CHECK_THROWS_WITH(run_theorem1(f1, {1, -2}, kGrids, "all-N", {}),
                    ContainsSubstring("invalid frequency"));
  CHECK_THROWS_WITH(run_theorem1(f1, kNs, {}, "all-N", {}),
                    ContainsSubstring("need at least one base grid"));
  CHECK_THROWS_WITH(run_theorem1(f1, kNs, {2}, "all-N", {}),
                    ContainsSubstring("at least four cells per axis"));
}

TEST_CASE("localized runs converge to the cutoff-weighted limit") {
  const TrigPoly phi = bump_cutoff();
  REQUIRE_THAT(phi.integral(), WithinAbs(0.125, 1e-10));

  SequenceFamily f1 = family_by_name("F1");
  const ExperimentReport r1 = run_local(f1, phi, kNs, {});
  REQUIRE(r1.pass);
  CHECK_THAT(r1.defect_slope, WithinAbs(-4.024, 2e-3));
  CHECK_THAT(r1.rows.back().pairing, WithinAbs(0.113075881, 1e-8));

  SequenceFamily f4 = family_by_name("F4");
  const ExperimentReport r4 = run_local(f4, phi, kNs, {});
  REQUIRE(r4.pass);
  CHECK_THAT(r4.rows.back().pairing, WithinAbs(0.056537879, 1e-8));
  CHECK(r4.terminal_defect <= 1e-9);
}

TEST_CASE("localized run exposes the persistent counterexample defect") {
  const TrigPoly phi = bump_cutoff();
  SequenceFamily f2 = family_by_name("F2");
  const ExperimentReport rep = run_local(f2, phi, kNs, {});
  REQUIRE(rep.pass);
  // the pairing limit picks up defect_share * cutoff mass = 0.5 * 0.125
  CHECK_THAT(rep.rows.back().pairing, WithinAbs(0.0625, 1e-3));
  CHECK_THAT(rep.rows.back().pairing, WithinAbs(0.062499995, 1e-8));
  CHECK(rep.terminal_defect <= 1e-6);
  CHECK(has_note(rep, "cutoff mass 0.125"));
  CHECK(has_note(rep, "demonstrates necessity of the hypotheses"));
}

TEST_CASE("localized run with a zero cutoff degenerates gracefully") {
  SequenceFamily f2 = family_by_name("F2");
  const ExperimentReport rep = run_local(f2, TrigPoly::zero(), kNs, {});
  REQUIRE(rep.pass);
  for (const auto& r : rep.rows) CHECK(r.pairing == 0.0);
}

TEST_CASE("localized run rejects cutoffs with boundary support") {
  SequenceFamily f2 = family_by_name("F2");
  CHECK_THROWS_WITH(run_local(f2, TrigPoly::constant(1.0), kNs, {}),
                    ContainsSubstring("cutoff not admissible: boundary value"));
}

TEST_CASE("assembled dual norms match the streamed lattice solver") {
  const int m = 16;
  const VoxelDomain dom = build_full_box({m, m, m}, 1.0 / m);
  const EntityIndex index(dom);
  const MassWeights masses = build_masses(index);
  const OperatorFamily famT = build_family(
      index, tag_boundary(index, PartitionSpec::parse("all-T")), masses);
  const OperatorFamily famN = build_family(
      index, tag_boundary(index, PartitionSpec::parse("all-N")), masses);

  const std::vector<double> frozen_zero{0.065210103024, 0.044878658443,
                                        0.027258040272};
  const std::vector<double> frozen_free{0.111840201259, 0.057550903795,
                                        0.031219527053};
  const std::vector<int> ns{1, 2, 4};
  for (std::size_t q = 0; q < ns.size(); ++q) {
    const TrigPoly osc = TrigPoly::cosine(0, 2.0 * kPi * ns[q]);
    const Field f = sample_scalar(osc, index, EntityKind::node, masses);
    const double viaT =
        neg_sobolev_norm(f, DualSpace::zero_trace, index, famT, masses, {});
    const double viaN =
        neg_sobolev_norm(f, DualSpace::free, index, famN, masses, {});
    CHECK_THAT(viaT, WithinAbs(frozen_zero[q], 1e-10));
    CHECK_THAT(viaN, WithinAbs(frozen_free[q], 1e-10));

    lattice::DualConfig dc;
    dc.zero_trace = true;
    CHECK_THAT(viaT,
               WithinAbs(lattice::dual_norm_scalar(osc, m, dc).value, 1e-10));
    dc.zero_trace = false;
    CHECK_THAT(viaN,
               WithinAbs(lattice::dual_norm_scalar(osc, m, dc).value, 1e-10));
  }

  // edge functionals: zero data gives zero, a constant field on the free
  // space reproduces the continuum value 1 exactly
  Field zedge;
  zedge.kind = EntityKind::edge;
  zedge.grid_fingerprint = index.fingerprint();
  zedge.coeffs = Eigen::VectorXd::Zero(masses.of(EntityKind::edge).size());
  CHECK(neg_sobolev_norm(zedge, DualSpace::zero_trace, index, famT, masses,
                         {}) == 0.0);
  const Field e1 = sample_vector(
      VectorPoly{TrigPoly::constant(1.0), TrigPoly::zero(), TrigPoly::zero()},
      index, EntityKind::edge, masses);
  CHECK_THAT(neg_sobolev_norm(e1, DualSpace::free, index, famN, masses, {}),
             WithinAbs(1.0, 1e-9));
}

TEST_CASE("dual norm of a constant functional is grid-stable") {
  auto value_at = [](int m) {
    const VoxelDomain dom = build_full_box({m, m, m}, 1.0 / m);
    const EntityIndex index(dom);
    const MassWeights masses = build_masses(index);
    const OperatorFamily famT = build_family(
        index, tag_boundary(index, PartitionSpec::parse("all-T")), masses);
    const Field one =
        sample_scalar(TrigPoly::constant(1.0), index, EntityKind::node, masses);
    return neg_sobolev_norm(one, DualSpace::zero_trace, index, famT, masses,
                            {});
  };
  const double c16 = value_at(16);
  const double c32 = value_at(32);
  CHECK_THAT(c16, WithinAbs(0.138239842, 1e-8));
  CHECK_THAT(c32, WithinAbs(0.139458408, 1e-8));
  CHECK(std::abs(c32 - c16) / c32 <= 0.02);
}

TEST_CASE("assembled dual norm validates its inputs") {
  const int m = 8;
  const VoxelDomain dom = build_full_box({m, m, m}, 1.0 / m);
  const EntityIndex index(dom);
  const MassWeights masses = build_masses(index);
  const OperatorFamily famT = build_family(
      index, tag_boundary(index, PartitionSpec::parse("all-T")), masses);
  const OperatorFamily famN = build_family(
      index, tag_boundary(index, PartitionSpec::parse("all-N")), masses);
  const Field f =
      sample_scalar(TrigPoly::constant(1.0), index, EntityKind::node, masses);

  CHECK_THROWS_WITH(
      neg_sobolev_norm(f, DualSpace::zero_trace, index, famN, masses, {}),
      ContainsSubstring("needs an essential boundary class"));
  CHECK_THROWS_WITH(
      neg_sobolev_norm(f, DualSpace::free, index, famT, masses, {}),
      ContainsSubstring("needs an unconstrained potential space"));

  Field wrong = f;
  wrong.grid_fingerprint ^= 1;
  CHECK_THROWS_WITH(
      neg_sobolev_norm(wrong, DualSpace::zero_trace, index, famT, masses, {}),
      ContainsSubstring("built on different grids"));

  Field cell;
  cell.kind = EntityKind::cell;
  cell.grid_fingerprint = index.fingerprint();
  cell.coeffs = Eigen::VectorXd::Ones(masses.of(EntityKind::cell).size());
  CHECK_THROWS_WITH(
      neg_sobolev_norm(cell, DualSpace::zero_trace, index, famT, masses, {}),
      ContainsSubstring("unsupported kind"));
}

TEST_CASE("assembled weak gap validates its inputs") {
  const int m = 4;
  const VoxelDomain dom = build_full_box({m, m, m}, 1.0 / m);
  const EntityIndex index(dom);
  const MassWeights masses = build_masses(index);
  VectorPoly unit_x;
  unit_x[0] = TrigPoly::constant(1.0);
  const Field a = sample_vector(unit_x, index, EntityKind::edge, masses);
  const auto dict =
      sample_dictionary(default_dictionary(2023), index, EntityKind::edge,
                        masses);
  REQUIRE(dict.size() == 25);

  CHECK_THAT(weak_gap(a, a, dict, masses), WithinAbs(0.0, 1e-14));
  CHECK_THROWS_WITH(weak_gap(a, a, {}, masses),
                    ContainsSubstring("empty dictionary"));

  Field zero = a;
  zero.coeffs.setZero();
  CHECK_THROWS_WITH(weak_gap(a, a, {zero}, masses),
                    ContainsSubstring("degenerate dictionary"));

  Field face = sample_vector(unit_x, index, EntityKind::face, masses);
  CHECK_THROWS_WITH(weak_gap(a, face, dict, masses),
                    ContainsSubstring("incompatible fields"));
}

TEST_CASE("scalar dual trajectory decays at the expected order") {
  const DualTrajectory tz = scalar_dual_trajectory(kNs, true, {});
  REQUIRE(tz.values.size() == 6);
  REQUIRE(tz.slope_valid);
  const std::vector<double> frozen{0.065210103, 0.044878658, 0.027258040,
                                   0.014678958, 0.007585408, 0.003851034};
  const std::vector<int> grids{16, 16, 16, 32, 64, 128};
  for (std::size_t q = 0; q < frozen.size(); ++q) {
    CHECK_THAT(tz.values[q], WithinAbs(frozen[q], 1e-8));
    CHECK(tz.grids[q] == grids[q]);
  }
  CHECK_THAT(tz.slope, WithinAbs(-0.8285, 5e-4));
  CHECK(tz.slope >= -1.3);
  CHECK(tz.slope <= -0.7);

  const DualTrajectory tf = scalar_dual_trajectory(kNs, false, {});
  CHECK_THAT(tf.slope, WithinAbs(-0.9669, 5e-4));
  CHECK(tf.slope >= -1.3);
  CHECK(tf.slope <= -0.7);
}

TEST_CASE("alternative runner: orthogonal oscillation") {
  SequenceFamily f1 = family_by_name("F1");
  const ExperimentReport rep = run_alternative(f1, kNs, {});
  REQUIRE(rep.rows.size() == 6);
  CHECK(rep.pass);
  CHECK(rep.verdict == "demonstration, not certification");
  const std::vector<double> curl{1.468497659, 1.413955867, 1.385419031,
                                 1.372680476, 1.366176032, 1.362890840};
  const std::vector<double> divv{0.300518183, 0.268236653, 0.238783505,
                                 0.224822048, 0.219343282, 0.217711400};
  const std::vector<double> curl_c{0.556034564, 0.389820799, 0.268467784,
                                   0.189928012, 0.134315776, 0.094978495};
  const std::vector<double> div_c{0.212402195, 0.163567773, 0.108724775,
                                  0.062479528, 0.033105594, 0.016975020};
  for (std::size_t q = 0; q < 6; ++q) {
    const auto& r = rep.rows[q];
    CHECK_THAT(r.curl_dual, WithinAbs(curl[q], 1e-8));
    CHECK_THAT(r.div_dual, WithinAbs(divv[q], 1e-8));
    CHECK_THAT(r.curl_dual_centered, WithinAbs(curl_c[q], 1e-8));
    CHECK_THAT(r.div_dual_centered, WithinAbs(div_c[q], 1e-8));
  }
  // raw duals stay bounded, centered duals decay toward zero
  CHECK(rep.rows.back().curl_dual_centered <
        0.2 * rep.rows.front().curl_dual_centered);
  CHECK(rep.rows.back().div_dual_centered <
        0.1 * rep.rows.front().div_dual_centered);
  CHECK_FALSE(has_note(rep, "non-decaying"));
}

TEST_CASE("alternative runner: counterexample divergence duals do not "
          "decay") {
  SequenceFamily f2 = family_by_name("F2");
  const ExperimentReport rep = run_alternative(f2, kNs, {});
  const std::vector<double> divv{0.486622926, 0.584484704, 0.630525392,
                                 0.668801888, 0.687959433, 0.697535437};
  for (std::size_t q = 0; q < 6; ++q) {
    const auto& r = rep.rows[q];
    CHECK_THAT(r.div_dual, WithinAbs(divv[q], 1e-8));
    // the limit is zero, so centered and raw trajectories coincide
    CHECK(r.div_dual_centered == r.div_dual);
    CHECK(r.curl_dual_centered == r.curl_dual);
  }
  CHECK(has_note(rep, "divergence dual norms non-decaying: 0.486623 -> "
                      "0.697535"));
  CHECK(has_note(rep, "violation family: pairing defect persists at 0.5"));
  CHECK_THAT(rep.terminal_defect, WithinAbs(0.5, 1e-12));
}

TEST_CASE("alternative runner: gradient oscillation has no divergence "
          "content") {
  SequenceFamily f3 = family_by_name("F3");
  const ExperimentReport rep = run_alternative(f3, kNs, {});
  const std::vector<double> curl{8.999842127, 8.991103611, 8.986660049,
                                 9.006363714, 9.011033272, 9.011968900};
  for (std::size_t q = 0; q < 6; ++q) {
    CHECK_THAT(rep.rows[q].curl_dual, WithinAbs(curl[q], 1e-8));
    // solenoidal to roundoff: the dual solve sees only cancellation dust
    CHECK(rep.rows[q].div_dual <= 1e-12);
    CHECK(rep.rows[q].div_dual_centered <= 1e-12);
  }
  // the centered curl trajectory equals the pure-oscillation one
  CHECK_THAT(rep.rows[1].curl_dual_centered, WithinAbs(0.389820799, 1e-8));
}

TEST_CASE("alternative runner: oblique family resolves by frequency and "
          "reports caps") {
  SequenceFamily f4 = family_by_name("F4");
  const ExperimentReport rep = run_alternative(f4, kNs, {});
  const std::vector<int> matched{16, 20, 36, 68, 128, 128};
  const std::vector<double> curl_c{0.389078756, 0.261550063, 0.182243176,
                                   0.128421480, 0.091464650, 0.116007115};
  const std::vector<double> div_c{0.117224554, 0.067539461, 0.036819166,
                                  0.020908246, 0.014683923, 0.053316225};
  for (std::size_t q = 0; q < 6; ++q) {
    CHECK(rep.rows[q].matched == matched[q]);
    CHECK_THAT(rep.rows[q].curl_dual_centered, WithinAbs(curl_c[q], 1e-8));
    CHECK_THAT(rep.rows[q].div_dual_centered, WithinAbs(div_c[q], 1e-8));
  }
  CHECK(has_note(rep, "n=16: dual lattice capped at 128"));
  CHECK(has_note(rep, "n=32: dual lattice capped at 128"));
  CHECK(has_note(rep, "matched resolution would be 260"));
}
