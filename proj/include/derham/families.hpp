#pragma once
// The builtin oscillatory sequence families.  Each family fixes E_n, H_n as
// exact symbolic fields together with their weak limits, the partitions
// under which the convergence hypotheses (bounded curl of E_n with
// tangential condition, bounded divergence of H_n with normal condition)
// hold, and a violation marker for the counterexample.
//
//   F1  orthogonal oscillation: curl-free E-oscillation along x1, the
//       H-oscillation carried on a different component.  Pairing
//       2/pi - (2/pi)/(4n^2 - 1).
//   F2  parallel oscillation, the counterexample: E_n = H_n, div H_n grows
//       linearly in n, pairing sticks at 1/2 while both factors go to 0
//       weakly.  Local defect share: 1/2 times the cutoff mass.
//   F3  proof trace: the oscillation is the gradient of sin(2 pi n x1) /
//       (2 pi n), so the solenoidal split part is exactly n-independent;
//       pairing is exactly 6 pi^2 at every n.
//   F4  two-direction structure: E oscillates along k, H along a
//       perpendicular polarization, frequencies 2 pi n k.  With k = (2,1,0)
//       the pairing is 1/pi + 2/(sqrt(5) pi^2 n (16 n^2 - 1)).

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "analytic.hpp"

namespace derham {

struct SequenceFamily {
  std::string name;
  std::string description;
  std::vector<std::string> compatible;  // partition rules satisfying the
                                        // hypotheses (canonical rule strings)
  bool hypothesis_violation = false;    // counterexample marker
  double defect_share = 0.0;  // violation defect = share * cutoff mass
  analytic::VectorPoly E_limit, H_limit;
  std::function<analytic::VectorPoly(int)> E, H;

  // pairing of the weak limits, the expected limit of <E_n, H_n>
  double expected_limit() const {
    return analytic::dot(E_limit, H_limit).integral();
  }
};

namespace detail_families {

inline analytic::VectorPoly solenoidal_limit() {
  using analytic::TrigPoly;
  const double w = 2.0 * M_PI;
  const TrigPoly one = TrigPoly::constant(1.0);
  analytic::VectorPoly v;
  v[0] = ((one - TrigPoly::cosine(0, w)) * TrigPoly::sine(1, w)).scaled(w);
  v[1] = (TrigPoly::sine(0, w) * (one - TrigPoly::cosine(1, w))).scaled(-w);
  return v;
}

}  // namespace detail_families

/// F4 with a configurable integer direction k (unit vectors keep the fields
/// bounded; integer components keep every pairing a full-period integral).
inline SequenceFamily two_direction_family(const std::array<int, 3>& k) {
  using analytic::TrigPoly;
  using analytic::VectorPoly;
  if (k[0] == 0 && k[1] == 0 && k[2] == 0)
    throw std::invalid_argument("invalid direction: k must be nonzero");
  const double norm = std::sqrt(static_cast<double>(
      k[0] * k[0] + k[1] * k[1] + k[2] * k[2]));
  const std::array<double, 3> khat{k[0] / norm, k[1] / norm, k[2] / norm};
  // perpendicular polarization: rotate the two largest-magnitude entries
  std::array<double, 3> phat{};
  if (k[0] == 0 && k[1] == 0) {
    phat = {1.0, 0.0, 0.0};
  } else {
    const double pn = std::sqrt(static_cast<double>(k[0] * k[0] + k[1] * k[1]));
    phat = {k[1] / pn, -k[0] / pn, 0.0};
  }

  SequenceFamily f;
  f.name = "F4";
  f.description = "oblique oscillation along k with perpendicular H "
                  "polarization, k = (" +
                  std::to_string(k[0]) + "," + std::to_string(k[1]) + "," +
                  std::to_string(k[2]) + ")";
  f.compatible = {"all-N"};
  f.E_limit[0] = TrigPoly::constant(1.0);
  f.H_limit[0] = TrigPoly::sine(0, M_PI) * TrigPoly::monomial(1, 1);
  f.E = [khat, k](int n) {
    const std::array<double, 3> w{2.0 * M_PI * n * k[0], 2.0 * M_PI * n * k[1],
                                  2.0 * M_PI * n * k[2]};
    const TrigPoly osc = TrigPoly::plane_sine(w);
    VectorPoly e;
    e[0] = TrigPoly::constant(1.0) + osc.scaled(khat[0]);
    e[1] = osc.scaled(khat[1]);
    e[2] = osc.scaled(khat[2]);
    return e;
  };
  f.H = [phat, k](int n) {
    const std::array<double, 3> w{2.0 * M_PI * n * k[0], 2.0 * M_PI * n * k[1],
                                  2.0 * M_PI * n * k[2]};
    const TrigPoly mod = TrigPoly::sine(0, 2.0 * M_PI) *
                         TrigPoly::sine(1, 2.0 * M_PI) *
                         TrigPoly::plane_cosine(w);
    VectorPoly h;
    h[0] = TrigPoly::sine(0, M_PI) * TrigPoly::monomial(1, 1) +
           mod.scaled(phat[0]);
    h[1] = mod.scaled(phat[1]);
    h[2] = mod.scaled(phat[2]);
    return h;
  };
  return f;
}

inline std::vector<SequenceFamily> builtin_families() {
  using analytic::TrigPoly;
  using analytic::VectorPoly;
  std::vector<SequenceFamily> out;

  {
    SequenceFamily f;
    f.name = "F1";
    f.description = "curl-free x1-oscillation of E against a "
                    "component-orthogonal H-oscillation";
    f.compatible = {"all-N", "T:x-"};
    f.E_limit[0] = TrigPoly::constant(1.0);
    f.H_limit[0] = TrigPoly::sine(0, M_PI);
    f.E = [](int n) {
      VectorPoly e;
      e[0] = TrigPoly::constant(1.0) + TrigPoly::cosine(0, 2.0 * M_PI * n);
      return e;
    };
    f.H = [](int n) {
      VectorPoly h;
      h[0] = TrigPoly::sine(0, M_PI);
      h[1] = TrigPoly::sine(1, 2.0 * M_PI) * TrigPoly::cosine(0, 2.0 * M_PI * n);
      return h;
    };
    out.push_back(std::move(f));
  }

  {
    SequenceFamily f;
    f.name = "F2";
    f.description = "parallel oscillation counterexample, E_n = H_n, "
                    "divergence unbounded";
    f.compatible = {};
    f.hypothesis_violation = true;
    f.defect_share = 0.5;
    f.E = [](int n) {
      VectorPoly e;
      e[0] = TrigPoly::cosine(0, 2.0 * M_PI * n);
      return e;
    };
    f.H = f.E;
    out.push_back(std::move(f));
  }

  {
    SequenceFamily f;
    f.name = "F3";
    f.description = "proof-trace family: oscillation is an exact gradient, "
                    "H constant in n";
    f.compatible = {"all-N", "T:x-"};
    f.E_limit = detail_families::solenoidal_limit();
    f.H_limit = f.E_limit;
    f.E = [](int n) {
      VectorPoly e = detail_families::solenoidal_limit();
      e[0] = e[0] + TrigPoly::cosine(0, 2.0 * M_PI * n);
      return e;
    };
    f.H = [](int) { return detail_families::solenoidal_limit(); };
    out.push_back(std::move(f));
  }

  out.push_back(two_direction_family({2, 1, 0}));
  return out;
}

inline SequenceFamily family_by_name(const std::string& name) {
  for (SequenceFamily& f : builtin_families())
    if (f.name == name) return std::move(f);
  throw std::invalid_argument("unknown family: " + name);
}

}  // namespace derham
