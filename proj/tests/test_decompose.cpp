#include <derham/decompose.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

using namespace derham;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

struct Setup {
  VoxelDomain dom;
  EntityIndex index;
  BoundaryPartition part;
  MassWeights masses;
  OperatorFamily fam;

  Setup(VoxelDomain d, const std::string& rule)
      : dom(std::move(d)),
        index(dom),
        part(tag_boundary(index, PartitionSpec::parse(rule))),
        masses(build_masses(index)),
        fam(build_family(index, part, masses)) {}
};

double angle(const Field& a, const Field& b, const MassWeights& m) {
  const double na = norm(a, m);
  const double nb = norm(b, m);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::abs(inner_product(a, b, m)) / (na * nb);
}

}  // namespace

TEST_CASE("pure gradients split cleanly") {
  Setup s(build_full_box({4, 4, 4}, 0.25), "all-T");
  SplitMix64 rng(11);
  Field w = random_field(s.index, EntityKind::node, rng);
  Field x = s.fam.grad.apply(w);
  HelmholtzSplit split = simple_split(x, s.fam, s.masses);
  CHECK(norm(split.residual_part, s.masses) <= 1e-10 * norm(x, s.masses));
  // The potential agrees with w up to the masked kernel: gradients match.
  Field gw = s.fam.grad.apply(split.potential);
  Field diff = gw;
  diff.coeffs -= x.coeffs;
  CHECK(norm(diff, s.masses) <= 1e-9 * norm(x, s.masses));
}

TEST_CASE("constant fields are gradients when no essential class is present") {
  Setup s(build_full_box({4, 4, 4}, 0.25), "all-N");
  Field x = sample_field(
      [](const Eigen::Vector3d&) {
        return std::array<double, 3>{1.0, 0.0, 0.0};
      },
      s.index, EntityKind::edge, s.masses);
  HelmholtzSplit split = simple_split(x, s.fam, s.masses);
  CHECK(norm(split.residual_part, s.masses) <= 1e-10 * norm(x, s.masses));
  // Mean-zero affine potential x1 - 1/2, reproduced exactly at the nodes.
  for (int i = 0; i < split.potential.size(); ++i) {
    const double want = s.index.position(EntityKind::node, i)[0] - 0.5;
    CHECK_THAT(split.potential.coeffs[i], WithinAbs(want, 1e-9));
  }
}

TEST_CASE("essential boundary makes the constant field split nontrivially") {
  Setup s(build_full_box({4, 4, 4}, 0.25), "all-T");
  Field x = sample_field(
      [](const Eigen::Vector3d&) {
        return std::array<double, 3>{1.0, 0.0, 0.0};
      },
      s.index, EntityKind::edge, s.masses);
  HelmholtzSplit split = simple_split(x, s.fam, s.masses);
  const double nx = norm(x, s.masses);
  CHECK(norm(split.residual_part, s.masses) > 0.01 * nx);
  CHECK(angle(split.grad_part, split.residual_part, s.masses) <= 1e-10);
  // Reconstruction is exact by construction; the substance is annihilation.
  Field div_r = s.fam.dual_div.apply(split.residual_part);
  const double scale = norm(split.residual_part, s.masses) / s.fam.spacing;
  CHECK(norm(div_r, s.masses) <= 1e-8 * scale);
  // Complex property: the split leaves the curl untouched.
  Field cx = s.fam.curl.apply(x);
  Field cr = s.fam.curl.apply(split.residual_part);
  Field dc = cx;
  dc.coeffs -= cr.coeffs;
  CHECK(norm(dc, s.masses) <= 1e-11 * std::max(1.0, norm(cx, s.masses)));
}

TEST_CASE("harmonic dimensions match the topology of the fixtures") {
  const auto dim_of = [](VoxelDomain d, const std::string& rule) {
    Setup s(std::move(d), rule);
    HarmonicBasis basis = harmonic_basis(s.fam, s.masses);
    CHECK_FALSE(basis.rank_gap_warning);
    for (const Field& b : basis.fields) {
      CHECK_THAT(inner_product(b, b, s.masses), WithinAbs(1.0, 1e-10));
      Field cb = s.fam.curl.apply(b);
      Field db = s.fam.dual_div.apply(b);
      const double scale = 1.0 / s.fam.spacing;
      CHECK(norm(cb, s.masses) <= 1e-6 * scale);
      CHECK(norm(db, s.masses) <= 1e-6 * scale);
    }
    return basis.dimension;
  };
  CHECK(dim_of(build_full_box({4, 4, 4}, 0.25), "all-T") == 0);
  CHECK(dim_of(build_full_box({4, 4, 4}, 0.25), "all-N") == 0);
  CHECK(dim_of(preset_domain("torus", 8), "all-N") == 1);
  CHECK(dim_of(preset_domain("torus", 8), "all-T") == 0);
  CHECK(dim_of(preset_domain("cavity", 6), "all-T") == 1);
  CHECK(dim_of(preset_domain("cavity", 6), "all-N") == 0);
}

TEST_CASE("harmonic dimensions are stable under refinement") {
  const auto dim_of = [](VoxelDomain d, const std::string& rule) {
    Setup s(std::move(d), rule);
    return harmonic_basis(s.fam, s.masses).dimension;
  };
  CHECK(dim_of(build_full_box({8, 8, 8}, 0.125), "all-T") == 0);
  CHECK(dim_of(preset_domain("cavity", 12), "all-T") == 1);
  CHECK(dim_of(preset_domain("torus", 16), "all-N") == 1);
}

TEST_CASE("refined split on trivial topology reduces to the simple one") {
  Setup s(build_full_box({4, 4, 4}, 0.25), "all-T");
  HarmonicBasis basis = harmonic_basis(s.fam, s.masses);
  REQUIRE(basis.dimension == 0);
  SplitMix64 rng(5);
  Field x = random_field(s.index, EntityKind::edge, rng);
  HelmholtzSplit split = refined_split(x, s.fam, s.masses, basis);
  CHECK(split.refined);
  CHECK(norm(split.harmonic_part, s.masses) == 0.0);
  Field sum = split.grad_part;
  sum.coeffs += split.harmonic_part.coeffs + split.curl_part.coeffs;
  sum.coeffs -= split.admissible_input.coeffs;
  CHECK(norm(sum, s.masses) <= 1e-10 * norm(split.admissible_input, s.masses));
  CHECK(angle(split.grad_part, split.curl_part, s.masses) <= 1e-10);
  CHECK(split.certification_residual <= 1e-8);
}

TEST_CASE("harmonic input on the torus passes through the refined split") {
  Setup s(preset_domain("torus", 8), "all-N");
  HarmonicBasis basis = harmonic_basis(s.fam, s.masses);
  REQUIRE(basis.dimension == 1);
  const Field& x = basis.fields.front();
  HelmholtzSplit split = refined_split(x, s.fam, s.masses, basis);
  CHECK(norm(split.grad_part, s.masses) <= 1e-8);
  CHECK(norm(split.curl_part, s.masses) <= 1e-8);
  Field diff = split.harmonic_part;
  diff.coeffs -= x.coeffs;
  CHECK(norm(diff, s.masses) <= 1e-10);
}

TEST_CASE("random fields on the cavity admit the full three-way split") {
  Setup s(preset_domain("cavity", 6), "all-T");
  HarmonicBasis basis = harmonic_basis(s.fam, s.masses);
  REQUIRE(basis.dimension == 1);
  SplitMix64 rng(17);
  Field x = random_field(s.index, EntityKind::edge, rng);
  HelmholtzSplit split = refined_split(x, s.fam, s.masses, basis);
  const double nx = norm(split.admissible_input, s.masses);
  Field sum = split.grad_part;
  sum.coeffs += split.harmonic_part.coeffs + split.curl_part.coeffs;
  sum.coeffs -= split.admissible_input.coeffs;
  CHECK(norm(sum, s.masses) <= 1e-10 * nx);
  CHECK(angle(split.grad_part, split.harmonic_part, s.masses) <= 1e-10);
  CHECK(angle(split.grad_part, split.curl_part, s.masses) <= 1e-10);
  CHECK(angle(split.harmonic_part, split.curl_part, s.masses) <= 1e-10);
  // The dual-curl witness reproduces the curl part.
  Field reached = s.fam.dual_curl.apply(split.curl_potential);
  reached.coeffs -= split.curl_part.coeffs;
  CHECK(norm(reached, s.masses) <= 1e-8 * norm(split.curl_part, s.masses));
}

TEST_CASE("missing harmonic directions break the range certification") {
  Setup s(preset_domain("torus", 8), "all-N");
  HarmonicBasis full = harmonic_basis(s.fam, s.masses);
  REQUIRE(full.dimension == 1);
  HarmonicBasis empty;
  empty.grid_fingerprint = s.index.fingerprint();
  CHECK_THROWS_WITH(
      refined_split(full.fields.front(), s.fam, s.masses, empty),
      ContainsSubstring("range certification failed"));
}

TEST_CASE("harmonic projection behaves like an orthogonal projection") {
  Setup s(preset_domain("cavity", 6), "all-T");
  HarmonicBasis basis = harmonic_basis(s.fam, s.masses);
  REQUIRE(basis.dimension == 1);
  SECTION("basis members project to zero") {
    Field p = project_harmonic(basis.fields.front(), basis, s.masses);
    CHECK(norm(p, s.masses) <= 1e-12);
  }
  SECTION("empty basis is the identity") {
    HarmonicBasis empty;
    empty.grid_fingerprint = s.index.fingerprint();
    SplitMix64 rng(3);
    Field x = random_field(s.index, EntityKind::edge, rng);
    Field p = project_harmonic(x, empty, s.masses);
    CHECK((p.coeffs - x.coeffs).lpNorm<Eigen::Infinity>() == 0.0);
  }
  SECTION("idempotence") {
    SplitMix64 rng(4);
    Field x = random_field(s.index, EntityKind::edge, rng);
    Field once = project_harmonic(x, basis, s.masses);
    Field twice = project_harmonic(once, basis, s.masses);
    CHECK((twice.coeffs - once.coeffs).lpNorm<Eigen::Infinity>() <=
          1e-12 * norm(x, s.masses));
  }
}

TEST_CASE("field CSV export") {
  Setup s(build_full_box({2, 2, 2}, 0.5), "all-N");
  Field x = sample_field(
      [](const Eigen::Vector3d& p) {
        return std::array<double, 3>{p[0], p[1], 0.0};
      },
      s.index, EntityKind::edge, s.masses);
  std::ostringstream out;
  write_field_csv(x, out);
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "entity,value");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == x.size());
}
