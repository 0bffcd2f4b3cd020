#pragma once
// Report assembly: runs the selected suites for a RunConfig and serializes a
// schema-versioned JSON report, per-suite plot-ready CSVs, and a text summary.
// The summary is generated from the JSON document itself, so every number it
// shows is literally present in report.json.  With a fixed config and seed the
// JSON is byte-identical across runs except for the generated_at field.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "constants.hpp"
#include "decompose.hpp"
#include "experiment.hpp"

namespace derham {

using ordered_json = nlohmann::ordered_json;

constexpr int kReportSchemaVersion = 1;

struct RunArtifacts {
  ordered_json report;
  std::vector<std::pair<std::string, std::string>> csv_files;
  std::string summary;
  bool pass = false;
  std::vector<std::string> failing;
};

namespace detail_report {

inline std::string iso_timestamp() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double mass_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  return std::sqrt((v.array() * v.array() * w.array()).sum());
}

struct Setup {
  EntityIndex index;
  MassWeights masses;
  BoundaryPartition part;
  OperatorFamily fam;

  Setup(const RunConfig& cfg, int resolution)
      : index(build_domain(cfg, resolution)),
        masses(build_masses(index)),
        part(tag_boundary(index, PartitionSpec::parse(cfg.partition))),
        fam(build_family(index, part, masses)) {}
};

enum class RowShape { global, local, dual };

inline ordered_json rows_json(const std::vector<ExperimentRow>& rows,
                              RowShape shape) {
  ordered_json out = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json j;
    j["n"] = r.n;
    switch (shape) {
      case RowShape::global:
        j["grid"] = r.grid;
        j["matched"] = r.matched;
        j["pairing"] = r.pairing;
        j["defect"] = r.defect;
        j["gap_e"] = r.gap_e;
        j["gap_h"] = r.gap_h;
        j["potential_distance"] = r.potential_distance;
        j["residual_distance"] = r.residual_distance;
        j["stagnation"] = r.stagnation;
        j["curl_norm"] = r.curl_norm;
        j["div_norm"] = r.div_norm;
        break;
      case RowShape::local:
        j["pairing"] = r.pairing;
        j["defect"] = r.defect;
        break;
      case RowShape::dual:
        j["dual_grid"] = r.matched;
        j["pairing"] = r.pairing;
        j["defect"] = r.defect;
        j["curl_dual"] = r.curl_dual;
        j["div_dual"] = r.div_dual;
        j["curl_dual_centered"] = r.curl_dual_centered;
        j["div_dual_centered"] = r.div_dual_centered;
        break;
    }
    out.push_back(std::move(j));
  }
  return out;
}

inline ordered_json report_json(const ExperimentReport& rep, RowShape shape) {
  ordered_json j;
  j["family"] = rep.family;
  j["label"] = rep.label;
  j["pass"] = rep.pass;
  j["verdict"] = rep.verdict;
  j["defect_slope"] = rep.defect_slope;
  if (shape == RowShape::global) {
    j["gap_e_slope"] = rep.gap_e_slope;
    j["gap_h_slope"] = rep.gap_h_slope;
    j["min_stagnation"] = rep.min_stagnation;
  }
  j["terminal_defect"] = rep.terminal_defect;
  j["notes"] = rep.notes;
  j["rows"] = rows_json(rep.rows, shape);
  return j;
}

}  // namespace detail_report

// ---------------------------------------------------------------------------
// experiment suites

/// Structural suite: exact complex property, summation-by-parts residuals
/// over seeded random trials, bitwise duals-equal-adjoints, and the residuals
/// of seeded Helmholtz splits.
inline ordered_json check_experiment(const RunConfig& cfg,
                                     std::vector<std::string>& failing) {
  namespace dr = detail_report;
  ordered_json out;
  out["suite"] = "structural checks";
  ordered_json per_res = ordered_json::array();
  bool pass = true;
  for (int r : cfg.resolution) {
    const dr::Setup s(cfg, r);
    ordered_json j;
    j["resolution"] = r;
    j["cells"] = s.index.count(EntityKind::cell);

    const ComplexReport cp =
        check_complex_property(s.fam.grad, s.fam.curl, s.fam.div);
    j["curl_grad_max"] = cp.curl_grad_max;
    j["div_curl_max"] = cp.div_curl_max;
    const bool exact = cp.exact();

    const IbpReport ibp = check_integration_by_parts(
        s.index, s.part, s.masses, BoundaryTag::T, 100, cfg.seed);
    j["ibp_trials"] = ibp.trials;
    j["ibp_max_relative"] = ibp.max_relative;
    j["ibp_negative_control"] = ibp.negative_control;

    double adjoint_max = 0.0;
    const auto combo = [&adjoint_max](const DiscreteOperator& a, double sign,
                                      const DiscreteOperator& b) {
      const Eigen::SparseMatrix<double> d = a.matrix - sign * b.matrix;
      for (int c = 0; c < d.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(d, c); it; ++it)
          adjoint_max = std::max(adjoint_max, std::abs(it.value()));
    };
    combo(adjoint_op(s.fam.grad, s.masses), -1.0, s.fam.dual_div);
    combo(adjoint_op(s.fam.curl, s.masses), 1.0, s.fam.dual_curl);
    combo(adjoint_op(s.fam.div, s.masses), -1.0, s.fam.dual_grad);
    j["adjoint_entrywise_max"] = adjoint_max;

    double recon = 0.0, orth = 0.0, dual_res = 0.0;
    for (int t = 0; t < 3; ++t) {
      SplitMix64 rng(substream(cfg.seed, 500 + static_cast<std::uint64_t>(t)));
      const Field x = random_field(s.index, EntityKind::edge, rng);
      const HelmholtzSplit sp = simple_split(x, s.fam, s.masses, cfg.solve());
      Field diff = x;
      diff.coeffs =
          x.coeffs - sp.grad_part.coeffs - sp.residual_part.coeffs;
      const double nx = norm(x, s.masses);
      recon = std::max(recon, norm(diff, s.masses) / nx);
      orth = std::max(
          orth, std::abs(inner_product(sp.grad_part, sp.residual_part,
                                       s.masses)) /
                    (nx * nx));
      dual_res = std::max(
          dual_res,
          dr::mass_norm(s.fam.dual_div.matrix * sp.residual_part.coeffs,
                        s.masses.of(EntityKind::node)) /
              nx);
    }
    j["split_reconstruction"] = recon;
    j["split_orthogonality"] = orth;
    j["split_dual_residual"] = dual_res;

    const bool ok = exact && ibp.max_relative <= 1e-12 &&
                    adjoint_max <= 1e-14 && recon <= 1e-10 && orth <= 1e-10 &&
                    dual_res <= 1e-8;
    j["pass"] = ok;
    if (!exact) failing.push_back("check:exactness@" + std::to_string(r));
    else if (!ok) failing.push_back("check:residuals@" + std::to_string(r));
    pass = pass && ok;
    per_res.push_back(std::move(j));
  }
  out["resolutions"] = std::move(per_res);
  out["pass"] = pass;
  return out;
}

/// Cohomology suite: harmonic-space dimension per resolution for the
/// configured partition, with a cross-resolution stability verdict.
inline ordered_json harmonic_experiment(const RunConfig& cfg,
                                        std::vector<std::string>& failing,
                                        std::string* basis_csv) {
  namespace dr = detail_report;
  ordered_json out;
  out["suite"] = "harmonic spaces";
  ordered_json per_res = ordered_json::array();
  bool pass = true;
  int first_dim = -1;
  bool stable = true;
  if (basis_csv) *basis_csv = "vector,entity,value\n";
  for (int r : cfg.resolution) {
    const dr::Setup s(cfg, r);
    NullspaceConfig ncfg;
    ncfg.eig.inner = cfg.solve();
    const HarmonicBasis basis = harmonic_basis(s.fam, s.masses, ncfg);
    ordered_json j;
    j["resolution"] = r;
    j["dimension"] = basis.dimension;
    j["rank_gap_warning"] = basis.rank_gap_warning;
    j["threshold"] = basis.threshold;
    per_res.push_back(std::move(j));
    if (first_dim < 0) first_dim = basis.dimension;
    stable = stable && basis.dimension == first_dim;
    if (basis.rank_gap_warning) {
      pass = false;
      failing.push_back("harmonic:rank-gap@" + std::to_string(r));
    }
    if (basis_csv && r == cfg.resolution.back()) {
      std::ostringstream csv;
      for (std::size_t v = 0; v < basis.fields.size(); ++v)
        for (int e = 0; e < basis.fields[v].size(); ++e)
          csv << v << ',' << e << ','
              << dr::csv_num(basis.fields[v].coeffs[e]) << '\n';
      *basis_csv += csv.str();
    }
  }
  if (!stable) {
    pass = false;
    failing.push_back("harmonic:dimension-unstable");
  }
  out["resolutions"] = std::move(per_res);
  out["dimension_stable"] = stable;
  out["pass"] = pass;
  return out;
}

/// Embedding-constant suite: smallest deflated eigenvalues behind the
/// gradient and rotation estimates, random-probe verification, and the
/// sharpness of each constant on its own eigenfield.
inline ordered_json constants_experiment(const RunConfig& cfg,
                                         std::vector<std::string>& failing) {
  namespace dr = detail_report;
  ordered_json out;
  out["suite"] = "embedding constants";
  ordered_json per_res = ordered_json::array();
  bool pass = true;
  for (int r : cfg.resolution) {
    const dr::Setup s(cfg, r);
    EigConfig ecfg;
    ecfg.inner = cfg.solve();
    ordered_json j;
    j["resolution"] = r;
    bool ok = true;
    try {
      const SpectrumReport fp =
          friedrichs_poincare_constant(s.fam, s.masses, ecfg);
      NullspaceConfig ncfg;
      ncfg.eig.inner = cfg.solve();
      const HarmonicBasis basis = harmonic_basis(s.fam, s.masses, ncfg);
      const SpectrumReport cm = maxwell_constant(s.fam, s.masses, basis, ecfg);
      const EstimateCheck est =
          verify_estimates(s.fam, s.masses, fp, cm, basis, 200, cfg.seed);
      j["gradient_constant"] = fp.constant;
      j["gradient_eigenvalue"] = fp.eigenvalue;
      j["gradient_residual"] = fp.residual;
      j["maxwell_constant"] = cm.constant;
      j["maxwell_eigenvalue"] = cm.eigenvalue;
      j["maxwell_residual"] = cm.residual;
      j["harmonic_dimension"] = basis.dimension;
      j["estimate_trials"] = est.trials;
      j["worst_grad_ratio"] = est.worst_grad_ratio;
      j["worst_maxwell_ratio"] = est.worst_maxwell_ratio;
      j["grad_sharpness"] = est.grad_sharpness;
      j["maxwell_sharpness"] = est.maxwell_sharpness;
      ok = est.worst_grad_ratio <= 1.0 + 1e-8 &&
           est.worst_maxwell_ratio <= 1.0 + 1e-8 &&
           std::abs(est.grad_sharpness - 1.0) <= 1e-6 &&
           std::abs(est.maxwell_sharpness - 1.0) <= 1e-6;
    } catch (const std::exception& e) {
      j["error"] = e.what();
      ok = false;
    }
    j["pass"] = ok;
    if (!ok) failing.push_back("constants:estimates@" + std::to_string(r));
    pass = pass && ok;
    per_res.push_back(std::move(j));
  }
  out["resolutions"] = std::move(per_res);
  out["pass"] = pass;
  return out;
}

/// Oscillatory-family suite: the global pairing runs (with the
/// counterexample classified by its expected rejection), the localized
/// cutoff runs, and the dual-norm demonstration trajectories.
inline ordered_json divcurl_experiment(
    const RunConfig& cfg, std::vector<std::string>& failing,
    std::vector<std::pair<std::string, std::string>>* csvs) {
  namespace dr = detail_report;
  ordered_json out;
  out["suite"] = "oscillatory families";
  ExperimentConfig ecfg;
  ecfg.seed = cfg.seed;
  ecfg.solve = cfg.solve();
  const analytic::TrigPoly cutoff = analytic::bump_cutoff();

  std::ostringstream global_csv, local_csv, dual_csv;
  global_csv << "family,n,grid,matched,pairing,defect,gap_e,gap_h,"
                "potential_distance,residual_distance,stagnation,"
                "curl_norm,div_norm\n";
  local_csv << "family,n,pairing,defect\n";
  dual_csv << "family,n,dual_grid,pairing,defect,curl_dual,div_dual,"
              "curl_dual_centered,div_dual_centered\n";

  ordered_json fams = ordered_json::array();
  bool pass = true;
  for (const std::string& name : cfg.families) {
    const SequenceFamily fam =
        name == "F4" ? two_direction_family({cfg.direction[0],
                                             cfg.direction[1],
                                             cfg.direction[2]})
                     : family_by_name(name);
    ordered_json j;
    j["family"] = name;
    j["description"] = fam.description;
    bool fam_ok = true;

    if (fam.hypothesis_violation) {
      ordered_json g;
      g["partition"] = "all-N";
      try {
        run_theorem1(fam, cfg.n_list, cfg.resolution, "all-N", ecfg);
        g["classification"] = "unexpected acceptance";
        g["pass"] = false;
        fam_ok = false;
      } catch (const std::exception& e) {
        const std::string msg = e.what();
        if (msg.find("hypothesis violation") == std::string::npos) throw;
        g["classification"] = "expected rejection";
        g["message"] = msg;
        g["pass"] = true;
      }
      j["global"] = std::move(g);
    } else {
      std::string rule = fam.compatible.front();
      for (const std::string& c : fam.compatible)
        if (c == cfg.partition) rule = c;
      const ExperimentReport glob =
          run_theorem1(fam, cfg.n_list, cfg.resolution, rule, ecfg);
      fam_ok = fam_ok && glob.pass;
      for (const auto& r : glob.rows)
        global_csv << name << ',' << r.n << ',' << r.grid << ',' << r.matched
                   << ',' << dr::csv_num(r.pairing) << ','
                   << dr::csv_num(r.defect) << ',' << dr::csv_num(r.gap_e)
                   << ',' << dr::csv_num(r.gap_h) << ','
                   << dr::csv_num(r.potential_distance) << ','
                   << dr::csv_num(r.residual_distance) << ','
                   << dr::csv_num(r.stagnation) << ','
                   << dr::csv_num(r.curl_norm) << ','
                   << dr::csv_num(r.div_norm) << '\n';
      ordered_json g = dr::report_json(glob, dr::RowShape::global);
      g["partition"] = rule;
      j["global"] = std::move(g);
    }

    const ExperimentReport loc = run_local(fam, cutoff, cfg.n_list, ecfg);
    fam_ok = fam_ok && loc.pass;
    for (const auto& r : loc.rows)
      local_csv << name << ',' << r.n << ',' << dr::csv_num(r.pairing) << ','
                << dr::csv_num(r.defect) << '\n';
    j["local"] = dr::report_json(loc, dr::RowShape::local);

    const ExperimentReport alt = run_alternative(fam, cfg.n_list, ecfg);
    for (const auto& r : alt.rows)
      dual_csv << name << ',' << r.n << ',' << r.matched << ','
               << dr::csv_num(r.pairing) << ',' << dr::csv_num(r.defect)
               << ',' << dr::csv_num(r.curl_dual) << ','
               << dr::csv_num(r.div_dual) << ','
               << dr::csv_num(r.curl_dual_centered) << ','
               << dr::csv_num(r.div_dual_centered) << '\n';
    j["dual"] = dr::report_json(alt, dr::RowShape::dual);

    j["pass"] = fam_ok;
    if (!fam_ok) failing.push_back("divcurl:" + name);
    pass = pass && fam_ok;
    fams.push_back(std::move(j));
  }
  out["families"] = std::move(fams);
  out["pass"] = pass;
  if (csvs) {
    csvs->emplace_back("divcurl.csv", global_csv.str());
    csvs->emplace_back("divcurl_local.csv", local_csv.str());
    csvs->emplace_back("divcurl_dual.csv", dual_csv.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// assembly, summary, and I/O

namespace detail_report {

inline void summarize(const ordered_json& report, std::ostream& out) {
  const auto num = [](const ordered_json& j) { return j.dump(); };
  out << "run report, schema " << report["schema_version"] << ", generated "
      << report["generated_at"].get<std::string>() << "\n";
  const auto& c = report["config"];
  out << "domain " << c["domain"].get<std::string>() << ", partition "
      << c["partition"].get<std::string>() << ", seed " << num(c["seed"])
      << "\n";
  for (const auto& [name, exp] : report["experiments"].items()) {
    out << "[" << name << "] "
        << (exp["pass"].get<bool>() ? "PASS" : "FAIL") << "\n";
    if (exp.contains("resolutions")) {
      for (const auto& r : exp["resolutions"]) {
        out << "  resolution " << num(r["resolution"]) << ":";
        for (const auto& [k, v] : r.items())
          if (k != "resolution" && v.is_number())
            out << " " << k << "=" << num(v);
        if (r.contains("error"))
          out << " error=" << r["error"].get<std::string>();
        out << "\n";
      }
    }
    if (exp.contains("dimension_stable"))
      out << "  dimension_stable=" << num(exp["dimension_stable"]) << "\n";
    if (exp.contains("families")) {
      for (const auto& f : exp["families"]) {
        out << "  " << f["family"].get<std::string>() << ": ";
        const auto& g = f["global"];
        if (g.contains("classification"))
          out << g["classification"].get<std::string>();
        else
          out << g["verdict"].get<std::string>()
              << " defect_slope=" << num(g["defect_slope"])
              << " terminal_defect=" << num(g["terminal_defect"])
              << " min_stagnation=" << num(g["min_stagnation"]);
        out << "; local terminal_defect="
            << num(f["local"]["terminal_defect"]) << "\n";
        for (const auto& block : {"global", "local", "dual"})
          if (f[block].contains("notes"))
            for (const auto& note : f[block]["notes"])
              out << "    note(" << block << "): "
                  << note.get<std::string>() << "\n";
      }
    }
  }
  out << "overall: " << (report["pass"].get<bool>() ? "PASS" : "FAIL");
  if (!report["failing_checks"].empty()) {
    out << " failing:";
    for (const auto& f : report["failing_checks"])
      out << " " << f.get<std::string>();
  }
  out << "\n";
}

}  // namespace detail_report

inline RunArtifacts assemble_report(const RunConfig& cfg) {
  RunArtifacts art;
  ordered_json& rep = art.report;
  rep["schema_version"] = kReportSchemaVersion;
  rep["generated_at"] = detail_report::iso_timestamp();
  rep["units"] = {{"domain", "unit cube scale, spacing 1/resolution"},
                  {"fields", "mass-weighted l2 coefficients"}};
  ordered_json c;
  c["domain"] = cfg.domain;
  c["partition"] = cfg.partition;
  c["resolution"] = cfg.resolution;
  c["experiment"] = cfg.experiment;
  c["families"] = cfg.families;
  c["n_list"] = cfg.n_list;
  c["direction"] = cfg.direction;
  c["seed"] = cfg.seed;
  c["out"] = cfg.out;
  c["tolerance"] = cfg.tol;
  c["max_iterations"] = cfg.maxit;
  rep["config"] = std::move(c);

  ordered_json exps;
  const bool all = cfg.experiment == "all";
  if (all || cfg.experiment == "complex-check")
    exps["check"] = check_experiment(cfg, art.failing);
  if (all || cfg.experiment == "harmonic") {
    std::string basis_csv;
    exps["harmonic"] = harmonic_experiment(cfg, art.failing, &basis_csv);
    art.csv_files.emplace_back("harmonic_basis.csv", std::move(basis_csv));
  }
  if (all || cfg.experiment == "constants")
    exps["constants"] = constants_experiment(cfg, art.failing);
  if (all || cfg.experiment == "divcurl")
    exps["divcurl"] = divcurl_experiment(cfg, art.failing, &art.csv_files);
  rep["experiments"] = std::move(exps);

  art.pass = art.failing.empty();
  rep["pass"] = art.pass;
  rep["failing_checks"] = art.failing;

  std::ostringstream sum;
  detail_report::summarize(rep, sum);
  art.summary = sum.str();
  return art;
}

/// Writes report.json, the per-suite CSVs, and summary.txt under out_dir.
inline void write_artifacts(const RunArtifacts& art,
                            const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory " + out_dir +
                             ": " + ec.message());
  const auto write = [&out_dir](const std::string& name,
                                const std::string& content) {
    const fs::path p = fs::path(out_dir) / name;
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << content;
  };
  write("report.json", art.report.dump(2) + "\n");
  for (const auto& [name, content] : art.csv_files) write(name, content);
  write("summary.txt", art.summary);
}

}  // namespace derham
