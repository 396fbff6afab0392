#pragma once

// Forward-mode dual numbers: a value and one directional derivative.

#include <cmath>
#include <ostream>

namespace divfree {

struct Dual {
  double v = 0.0;
  double d = 0.0;

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT: implicit lift of constants
  constexpr Dual(double value, double deriv) : v(value), d(deriv) {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) {
    d = (d * o.v - v * o.d) / (o.v * o.v);
    v /= o.v;
    return *this;
  }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }
inline Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
inline Dual operator+(const Dual& a) { return a; }

inline bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
inline bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
inline bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
inline bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }
inline bool operator==(const Dual& a, const Dual& b) { return a.v == b.v; }

inline Dual sqrt(const Dual& a) {
  const double r = std::sqrt(a.v);
  return {r, a.d / (2.0 * r)};
}
inline Dual exp(const Dual& a) {
  const double e = std::exp(a.v);
  return {e, e * a.d};
}
inline Dual log(const Dual& a) { return {std::log(a.v), a.d / a.v}; }
inline Dual sin(const Dual& a) { return {std::sin(a.v), std::cos(a.v) * a.d}; }
inline Dual cos(const Dual& a) { return {std::cos(a.v), -std::sin(a.v) * a.d}; }
inline Dual tan(const Dual& a) {
  const double t = std::tan(a.v);
  return {t, (1.0 + t * t) * a.d};
}
inline Dual tanh(const Dual& a) {
  const double t = std::tanh(a.v);
  return {t, (1.0 - t * t) * a.d};
}
inline Dual atan(const Dual& a) { return {std::atan(a.v), a.d / (1.0 + a.v * a.v)}; }
inline Dual abs(const Dual& a) { return a.v < 0 ? -a : a; }

inline Dual pow(const Dual& a, double k) {
  if (k == 0.0) return {1.0, 0.0};
  const double pk1 = std::pow(a.v, k - 1.0);
  return {pk1 * a.v, k * pk1 * a.d};
}
inline Dual pow(const Dual& a, const Dual& b) {
  if (b.d == 0.0) return pow(a, b.v);
  const double r = std::pow(a.v, b.v);
  return {r, r * (b.d * std::log(a.v) + b.v * a.d / a.v)};
}
inline Dual pow(double a, const Dual& b) { return pow(Dual(a), b); }

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }

inline std::ostream& operator<<(std::ostream& os, const Dual& a) {
  return os << a.v << "+" << a.d << "e";
}

}  // namespace divfree
