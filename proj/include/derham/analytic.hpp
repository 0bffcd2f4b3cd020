#pragma once
// Exact symbolic engine for the oscillatory test fields: sums of separable
// terms  coeff * prod_axes x^p exp(i w x)  with an optional per-axis support
// window.  Products, derivatives, and integrals over the unit cube are
// closed-form, so pairings of the builtin families have exact values that
// the quadrature and discrete-mass routes can be checked against.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace derham::analytic {

using Complex = std::complex<double>;

struct AxisFactor {
  int power = 0;     // x^power, power >= 0
  double omega = 0.0;  // exp(i omega x)
  double lo = 0.0;   // support window; the factor is zero outside [lo, hi]
  double hi = 1.0;
};

struct Term {
  Complex coeff{0.0, 0.0};
  std::array<AxisFactor, 3> axes{};
};

namespace detail {

// integral of x^p exp(i w x) over [lo, hi]
inline Complex axis_integral(int p, double w, double lo, double hi) {
  if (w == 0.0)
    return Complex((std::pow(hi, p + 1) - std::pow(lo, p + 1)) / (p + 1), 0.0);
  if (std::abs(w) < 1.0) {
    // series around w = 0; converges fast and avoids the 1/w cancellation
    Complex acc(0.0, 0.0);
    Complex pw(1.0, 0.0);
    for (int k = 0; k <= 60; ++k) {
      const Complex term =
          pw * ((std::pow(hi, p + k + 1) - std::pow(lo, p + k + 1)) /
                (p + k + 1));
      acc += term;
      if (std::abs(term) <= 1e-18 * (1.0 + std::abs(acc))) break;
      pw *= Complex(0.0, w) / static_cast<double>(k + 1);
    }
    return acc;
  }
  const Complex iw(0.0, w);
  Complex value = (std::polar(1.0, w * hi) - std::polar(1.0, w * lo)) / iw;
  // I_p = [x^p e^{iwx}/(iw)] - (p/(iw)) I_{p-1}
  for (int q = 1; q <= p; ++q) {
    const Complex boundary = (std::pow(hi, q) * std::polar(1.0, w * hi) -
                              std::pow(lo, q) * std::polar(1.0, w * lo)) /
                             iw;
    value = boundary - (static_cast<double>(q) / iw) * value;
  }
  return value;
}

inline std::int64_t bits(double x) {
  if (x == 0.0) x = 0.0;  // collapse -0.0 and +0.0
  std::int64_t out;
  std::memcpy(&out, &x, sizeof(out));
  return out;
}

}  // namespace detail

class TrigPoly {
 public:
  std::vector<Term> terms;

  static TrigPoly zero() { return TrigPoly(); }

  static TrigPoly constant(double c) {
    TrigPoly p;
    if (c != 0.0) {
      Term t;
      t.coeff = Complex(c, 0.0);
      p.terms.push_back(t);
    }
    return p;
  }

  // x_axis^power
  static TrigPoly monomial(int axis, int power) {
    check_axis(axis);
    if (power < 0) throw std::invalid_argument("invalid term: negative power");
    Term t;
    t.coeff = Complex(1.0, 0.0);
    t.axes[static_cast<std::size_t>(axis)].power = power;
    TrigPoly p;
    p.terms.push_back(t);
    return p;
  }

  static TrigPoly cosine(int axis, double omega) {
    check_axis(axis);
    TrigPoly p;
    Term a;
    a.coeff = Complex(0.5, 0.0);
    a.axes[static_cast<std::size_t>(axis)].omega = omega;
    Term b = a;
    b.axes[static_cast<std::size_t>(axis)].omega = -omega;
    p.terms.push_back(a);
    p.terms.push_back(b);
    p.merge();
    return p;
  }

  static TrigPoly sine(int axis, double omega) {
    check_axis(axis);
    TrigPoly p;
    Term a;
    a.coeff = Complex(0.0, -0.5);  // (e^{iwx} - e^{-iwx}) / (2i)
    a.axes[static_cast<std::size_t>(axis)].omega = omega;
    Term b;
    b.coeff = Complex(0.0, 0.5);
    b.axes[static_cast<std::size_t>(axis)].omega = -omega;
    p.terms.push_back(a);
    p.terms.push_back(b);
    p.merge();
    return p;
  }

  // cos(w . x) and sin(w . x) for a frequency vector w: two conjugate
  // exponential terms spread across the axes
  static TrigPoly plane_cosine(const std::array<double, 3>& w) {
    TrigPoly p;
    Term a;
    a.coeff = Complex(0.5, 0.0);
    Term b;
    b.coeff = Complex(0.5, 0.0);
    for (int ax = 0; ax < 3; ++ax) {
      a.axes[static_cast<std::size_t>(ax)].omega = w[static_cast<std::size_t>(ax)];
      b.axes[static_cast<std::size_t>(ax)].omega = -w[static_cast<std::size_t>(ax)];
    }
    p.terms.push_back(a);
    p.terms.push_back(b);
    p.merge();
    return p;
  }

  static TrigPoly plane_sine(const std::array<double, 3>& w) {
    TrigPoly p;
    Term a;
    a.coeff = Complex(0.0, -0.5);
    Term b;
    b.coeff = Complex(0.0, 0.5);
    for (int ax = 0; ax < 3; ++ax) {
      a.axes[static_cast<std::size_t>(ax)].omega = w[static_cast<std::size_t>(ax)];
      b.axes[static_cast<std::size_t>(ax)].omega = -w[static_cast<std::size_t>(ax)];
    }
    p.terms.push_back(a);
    p.terms.push_back(b);
    p.merge();
    return p;
  }

  double evaluate(const Eigen::Vector3d& x) const {
    Complex acc(0.0, 0.0);
    for (const Term& t : terms) {
      Complex v = t.coeff;
      bool inside = true;
      for (int a = 0; a < 3; ++a) {
        const AxisFactor& f = t.axes[static_cast<std::size_t>(a)];
        const double xa = x[a];
        if (xa < f.lo || xa > f.hi) {
          inside = false;
          break;
        }
        double mono = 1.0;
        for (int q = 0; q < f.power; ++q) mono *= xa;
        v *= mono * std::polar(1.0, f.omega * xa);
      }
      if (inside) acc += v;
    }
    return acc.real();
  }

  // d/dx_axis; valid because every windowed factor used here vanishes at its
  // window edges (the cutoff bump), so the piecewise derivative is the
  // distributional one.
  TrigPoly derivative(int axis) const {
    check_axis(axis);
    TrigPoly out;
    for (const Term& t : terms) {
      const AxisFactor& f = t.axes[static_cast<std::size_t>(axis)];
      if (f.power > 0) {
        Term a = t;
        a.coeff *= static_cast<double>(f.power);
        a.axes[static_cast<std::size_t>(axis)].power = f.power - 1;
        out.terms.push_back(a);
      }
      if (f.omega != 0.0) {
        Term b = t;
        b.coeff *= Complex(0.0, f.omega);
        out.terms.push_back(b);
      }
    }
    out.merge();
    return out;
  }

  // integral over the unit cube (supports trim the domain per axis)
  double integral() const {
    Complex acc(0.0, 0.0);
    for (const Term& t : terms) {
      Complex v = t.coeff;
      for (int a = 0; a < 3; ++a) {
        const AxisFactor& f = t.axes[static_cast<std::size_t>(a)];
        v *= detail::axis_integral(f.power, f.omega, f.lo, f.hi);
      }
      acc += v;
    }
    return acc.real();
  }

  // largest |omega|/(2 pi) over terms and axes: cycles across the cube,
  // what quadrature has to resolve
  double max_frequency() const {
    double w = 0.0;
    for (const Term& t : terms)
      for (const AxisFactor& f : t.axes) w = std::max(w, std::abs(f.omega));
    return w / (2.0 * M_PI);
  }

  TrigPoly scaled(double s) const {
    TrigPoly out = *this;
    for (Term& t : out.terms) t.coeff *= s;
    out.merge();
    return out;
  }

  // restrict every term to [lo, hi] on one axis (used for cutoffs whose
  // polynomial formula is only valid inside the window)
  TrigPoly windowed(int axis, double lo, double hi) const {
    check_axis(axis);
    TrigPoly out = *this;
    for (Term& t : out.terms) {
      AxisFactor& f = t.axes[static_cast<std::size_t>(axis)];
      f.lo = std::max(f.lo, lo);
      f.hi = std::min(f.hi, hi);
    }
    out.merge();
    return out;
  }

  friend TrigPoly operator+(const TrigPoly& a, const TrigPoly& b) {
    TrigPoly out = a;
    out.terms.insert(out.terms.end(), b.terms.begin(), b.terms.end());
    out.merge();
    return out;
  }

  friend TrigPoly operator-(const TrigPoly& a, const TrigPoly& b) {
    return a + b.scaled(-1.0);
  }

  friend TrigPoly operator*(const TrigPoly& a, const TrigPoly& b) {
    TrigPoly out;
    out.terms.reserve(a.terms.size() * b.terms.size());
    for (const Term& s : a.terms)
      for (const Term& t : b.terms) {
        Term r;
        r.coeff = s.coeff * t.coeff;
        bool alive = true;
        for (int ax = 0; ax < 3; ++ax) {
          const AxisFactor& fa = s.axes[static_cast<std::size_t>(ax)];
          const AxisFactor& fb = t.axes[static_cast<std::size_t>(ax)];
          AxisFactor& fr = r.axes[static_cast<std::size_t>(ax)];
          fr.power = fa.power + fb.power;
          fr.omega = fa.omega + fb.omega;
          fr.lo = std::max(fa.lo, fb.lo);
          fr.hi = std::min(fa.hi, fb.hi);
          if (fr.lo >= fr.hi) {
            alive = false;
            break;
          }
        }
        if (alive) out.terms.push_back(r);
      }
    out.merge();
    return out;
  }

  void merge() {
    using Key = std::array<std::int64_t, 12>;
    std::map<Key, Complex> acc;
    for (const Term& t : terms) {
      Key k{};
      for (int a = 0; a < 3; ++a) {
        const AxisFactor& f = t.axes[static_cast<std::size_t>(a)];
        k[static_cast<std::size_t>(4 * a + 0)] = f.power;
        k[static_cast<std::size_t>(4 * a + 1)] = detail::bits(f.omega);
        k[static_cast<std::size_t>(4 * a + 2)] = detail::bits(f.lo);
        k[static_cast<std::size_t>(4 * a + 3)] = detail::bits(f.hi);
      }
      acc[k] += t.coeff;
    }
    terms.clear();
    for (const auto& [k, c] : acc) {
      if (std::abs(c) == 0.0) continue;
      Term t;
      t.coeff = c;
      for (int a = 0; a < 3; ++a) {
        AxisFactor& f = t.axes[static_cast<std::size_t>(a)];
        f.power = static_cast<int>(k[static_cast<std::size_t>(4 * a + 0)]);
        double d;
        std::int64_t raw = k[static_cast<std::size_t>(4 * a + 1)];
        std::memcpy(&d, &raw, sizeof(d));
        f.omega = d;
        raw = k[static_cast<std::size_t>(4 * a + 2)];
        std::memcpy(&d, &raw, sizeof(d));
        f.lo = d;
        raw = k[static_cast<std::size_t>(4 * a + 3)];
        std::memcpy(&d, &raw, sizeof(d));
        f.hi = d;
      }
      terms.push_back(t);
    }
  }

 private:
  static void check_axis(int axis) {
    if (axis < 0 || axis > 2)
      throw std::invalid_argument("invalid term: axis out of range");
  }
};

using VectorPoly = std::array<TrigPoly, 3>;

inline VectorPoly zero_vector() { return VectorPoly{}; }

inline TrigPoly dot(const VectorPoly& a, const VectorPoly& b) {
  TrigPoly out;
  for (int c = 0; c < 3; ++c)
    out = out + a[static_cast<std::size_t>(c)] * b[static_cast<std::size_t>(c)];
  return out;
}

inline TrigPoly divergence(const VectorPoly& v) {
  TrigPoly out;
  for (int c = 0; c < 3; ++c)
    out = out + v[static_cast<std::size_t>(c)].derivative(c);
  return out;
}

inline VectorPoly curl(const VectorPoly& v) {
  VectorPoly out;
  out[0] = v[2].derivative(1) - v[1].derivative(2);
  out[1] = v[0].derivative(2) - v[2].derivative(0);
  out[2] = v[1].derivative(0) - v[0].derivative(1);
  return out;
}

inline VectorPoly operator+(const VectorPoly& a, const VectorPoly& b) {
  VectorPoly out;
  for (int c = 0; c < 3; ++c)
    out[static_cast<std::size_t>(c)] =
        a[static_cast<std::size_t>(c)] + b[static_cast<std::size_t>(c)];
  return out;
}

inline VectorPoly operator-(const VectorPoly& a, const VectorPoly& b) {
  VectorPoly out;
  for (int c = 0; c < 3; ++c)
    out[static_cast<std::size_t>(c)] =
        a[static_cast<std::size_t>(c)] - b[static_cast<std::size_t>(c)];
  return out;
}

inline VectorPoly scale(const VectorPoly& v, double s) {
  VectorPoly out;
  for (int c = 0; c < 3; ++c)
    out[static_cast<std::size_t>(c)] =
        v[static_cast<std::size_t>(c)].scaled(s);
  return out;
}

inline VectorPoly multiply(const TrigPoly& s, const VectorPoly& v) {
  VectorPoly out;
  for (int c = 0; c < 3; ++c)
    out[static_cast<std::size_t>(c)] = s * v[static_cast<std::size_t>(c)];
  return out;
}

inline double l2_norm_sq(const VectorPoly& v) { return dot(v, v).integral(); }

inline double l2_norm_sq(const TrigPoly& s) { return (s * s).integral(); }

inline double max_frequency(const VectorPoly& v) {
  double f = 0.0;
  for (const TrigPoly& c : v) f = std::max(f, c.max_frequency());
  return f;
}

// Polynomial bump on one axis: (5120/81) (t - 1/8)^2 (7/8 - t)^2 inside
// [1/8, 7/8], zero outside.  Unit-normalized area 1/2, C^1 across the cuts.
inline TrigPoly bump1d(int axis) {
  const double a = 1.0 / 8.0;
  const double b = 7.0 / 8.0;
  const TrigPoly x = TrigPoly::monomial(axis, 1);
  const TrigPoly left = x - TrigPoly::constant(a);
  const TrigPoly right = TrigPoly::constant(b) - x;
  TrigPoly p = left * left * right * right;
  return p.scaled(5120.0 / 81.0).windowed(axis, a, b);
}

// Tensor-product cutoff, integral (1/2)^3 = 1/8, zero within 1/8 of the
// boundary of the unit cube
inline TrigPoly bump_cutoff() { return bump1d(0) * bump1d(1) * bump1d(2); }

}  // namespace derham::analytic
