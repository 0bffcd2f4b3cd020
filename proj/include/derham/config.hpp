#pragma once
// Run configuration: a flat key=value text format ('#' comments, blank lines
// ignored).  parse_config validates keys and values with line context and
// fills documented defaults; emit_config writes a canonical form that parses
// back to an identical configuration.

#include <array>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"
#include "solver.hpp"

namespace derham {

struct RunConfig {
  std::string domain = "cube";      // preset name or cell-list file path
  std::string partition = "all-T";  // boundary partition rule
  std::vector<int> resolution = {8};
  std::string experiment = "complex-check";
  std::vector<std::string> families = {"F1", "F2", "F3", "F4"};
  std::vector<int> n_list = {1, 2, 4, 8, 16, 32};
  std::array<int, 3> direction = {2, 1, 0};  // oblique-family wave direction
  std::uint64_t seed = 2023;
  std::string out = "reports";
  double tol = 1e-10;  // iterative solver tolerance
  int maxit = 20000;

  bool operator==(const RunConfig&) const = default;

  SolveConfig solve() const { return SolveConfig{tol, maxit}; }
};

namespace detail_config {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

[[noreturn]] inline void fail(int line, const std::string& what) {
  throw std::invalid_argument("parse error at line " + std::to_string(line) +
                              ": " + what);
}

inline long long to_int(const std::string& v, int line,
                        const std::string& key) {
  try {
    std::size_t used = 0;
    const long long n = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    fail(line, key + ": expected an integer, got '" + v + "'");
  }
}

inline std::vector<int> to_int_list(const std::string& v, int line,
                                    const std::string& key) {
  std::vector<int> out;
  for (const std::string& item : split(v, ',')) {
    if (item.empty()) fail(line, key + ": empty list entry");
    out.push_back(static_cast<int>(to_int(item, line, key)));
  }
  if (out.empty()) fail(line, key + ": expected a comma-separated list");
  return out;
}

}  // namespace detail_config

inline RunConfig parse_config(const std::string& text) {
  namespace dc = detail_config;
  RunConfig cfg;
  bool saw_domain = false;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto cut = raw.find('#');
    if (cut != std::string::npos) raw.resize(cut);
    const std::string s = dc::trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) dc::fail(line, "expected key = value");
    const std::string key = dc::trim(s.substr(0, eq));
    const std::string value = dc::trim(s.substr(eq + 1));
    if (value.empty()) dc::fail(line, key + ": empty value");

    if (key == "domain") {
      cfg.domain = value;
      saw_domain = true;
    } else if (key == "partition") {
      try {
        PartitionSpec::parse(value);
      } catch (const std::exception& e) {
        dc::fail(line, "partition: " + std::string(e.what()));
      }
      cfg.partition = value;
    } else if (key == "resolution") {
      cfg.resolution = dc::to_int_list(value, line, key);
      for (int r : cfg.resolution)
        if (r < 2) dc::fail(line, "resolution: entries must be at least 2");
    } else if (key == "experiment") {
      if (value != "complex-check" && value != "harmonic" &&
          value != "constants" && value != "divcurl" && value != "all")
        dc::fail(line, "experiment: unknown selection '" + value + "'");
      cfg.experiment = value;
    } else if (key == "families") {
      cfg.families = dc::split(value, ',');
      if (cfg.families.empty()) dc::fail(line, "families: empty list");
      for (const std::string& f : cfg.families)
        if (f != "F1" && f != "F2" && f != "F3" && f != "F4")
          dc::fail(line, "families: unknown family '" + f + "'");
    } else if (key == "n_list") {
      cfg.n_list = dc::to_int_list(value, line, key);
      for (int n : cfg.n_list)
        if (n < 1) dc::fail(line, "n_list: frequencies must be positive");
    } else if (key == "direction") {
      const std::vector<int> d = dc::to_int_list(value, line, key);
      if (d.size() != 3) dc::fail(line, "direction: expected three integers");
      if (d[0] == 0 && d[1] == 0 && d[2] == 0)
        dc::fail(line, "direction: must be nonzero");
      cfg.direction = {d[0], d[1], d[2]};
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(dc::to_int(value, line, key));
    } else if (key == "out") {
      cfg.out = value;
    } else if (key == "tolerance") {
      try {
        std::size_t used = 0;
        cfg.tol = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        dc::fail(line, "tolerance: expected a number, got '" + value + "'");
      }
      if (cfg.tol <= 0.0) dc::fail(line, "tolerance: must be positive");
    } else if (key == "max_iterations") {
      cfg.maxit = static_cast<int>(dc::to_int(value, line, key));
      if (cfg.maxit < 1) dc::fail(line, "max_iterations: must be positive");
    } else {
      dc::fail(line, "unknown key '" + key + "'");
    }
  }
  if (!saw_domain)
    throw std::invalid_argument("parse error: missing domain key");
  return cfg;
}

inline std::string emit_config(const RunConfig& cfg) {
  std::ostringstream out;
  auto list = [&out](const char* key, const std::vector<int>& v) {
    out << key << " = ";
    for (std::size_t q = 0; q < v.size(); ++q)
      out << (q ? "," : "") << v[q];
    out << "\n";
  };
  out << "domain = " << cfg.domain << "\n";
  out << "partition = " << cfg.partition << "\n";
  list("resolution", cfg.resolution);
  out << "experiment = " << cfg.experiment << "\n";
  out << "families = ";
  for (std::size_t q = 0; q < cfg.families.size(); ++q)
    out << (q ? "," : "") << cfg.families[q];
  out << "\n";
  list("n_list", cfg.n_list);
  out << "direction = " << cfg.direction[0] << "," << cfg.direction[1] << ","
      << cfg.direction[2] << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "out = " << cfg.out << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", cfg.tol);
  out << "tolerance = " << buf << "\n";
  out << "max_iterations = " << cfg.maxit << "\n";
  return out.str();
}

/// Builds the configured domain: a named preset at the given resolution, or
/// a cell-list file (resolution then only rescales the spacing to keep the
/// bounding box inside the unit cube).
inline VoxelDomain build_domain(const RunConfig& cfg, int resolution) {
  if (cfg.domain == "cube" || cfg.domain == "cavity" || cfg.domain == "torus")
    return preset_domain(cfg.domain, resolution);
  return domain_from_cell_list(cfg.domain, 0.0);
}

}  // namespace derham
