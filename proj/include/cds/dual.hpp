#pragma once

#include <cmath>
#include <type_traits>

namespace cds {

// Forward-mode dual number; nest Dual<Dual<T>> for second derivatives.
template <class T>
struct Dual {
  T v{};
  T d{};

  constexpr Dual() = default;
  constexpr Dual(double x) : v(x), d(0.0) {}
  constexpr Dual(T value, T deriv) : v(value), d(deriv) {}
  template <class U, class = std::enable_if_t<!std::is_same_v<U, double> && std::is_constructible_v<T, U>>>
  constexpr Dual(U x) : v(T(x)), d(0.0) {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }
};

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;

template <class T> struct is_dual : std::false_type {};
template <class T> struct is_dual<Dual<T>> : std::true_type {};

// Nesting depth: 0 for double.
template <class T> struct dual_depth : std::integral_constant<int, 0> {};
template <class T> struct dual_depth<Dual<T>> : std::integral_constant<int, 1 + dual_depth<T>::value> {};

template <class T> Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T> Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
template <class T> Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  T inv = T(1.0) / b.v;
  T q = a.v * inv;
  return {q, (a.d - q * b.d) * inv};
}
template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <class T> Dual<T> operator+(const Dual<T>& a) { return a; }

template <class T> Dual<T> operator+(const Dual<T>& a, double b) { return {a.v + b, a.d}; }
template <class T> Dual<T> operator+(double a, const Dual<T>& b) { return {a + b.v, b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a, double b) { return {a.v - b, a.d}; }
template <class T> Dual<T> operator-(double a, const Dual<T>& b) { return {a - b.v, -b.d}; }
template <class T> Dual<T> operator*(const Dual<T>& a, double b) { return {a.v * b, a.d * b}; }
template <class T> Dual<T> operator*(double a, const Dual<T>& b) { return {a * b.v, a * b.d}; }
template <class T> Dual<T> operator/(const Dual<T>& a, double b) { return {a.v / b, a.d / b}; }
template <class T> Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(a) / b; }

// Comparisons look at the value only; they drive branching, never derivatives.
template <class T> bool operator<(const Dual<T>& a, const Dual<T>& b) { return a.v < b.v; }
template <class T> bool operator>(const Dual<T>& a, const Dual<T>& b) { return a.v > b.v; }
template <class T> bool operator<(const Dual<T>& a, double b) { return a.v < b; }
template <class T> bool operator>(const Dual<T>& a, double b) { return a.v > b; }
template <class T> bool operator<=(const Dual<T>& a, double b) { return a.v <= b; }
template <class T> bool operator>=(const Dual<T>& a, double b) { return a.v >= b; }

inline double value(double x) { return x; }
template <class T> double value(const Dual<T>& x) { return value(x.v); }

using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;
using std::tan;
using std::atan;

template <class T> Dual<T> sin(const Dual<T>& a) { return {sin(a.v), a.d * cos(a.v)}; }
template <class T> Dual<T> cos(const Dual<T>& a) { return {cos(a.v), -(a.d * sin(a.v))}; }
template <class T> Dual<T> tan(const Dual<T>& a) {
  T t = tan(a.v);
  return {t, a.d * (T(1.0) + t * t)};
}
template <class T> Dual<T> exp(const Dual<T>& a) {
  T e = exp(a.v);
  return {e, a.d * e};
}
template <class T> Dual<T> log(const Dual<T>& a) { return {log(a.v), a.d / a.v}; }
template <class T> Dual<T> sqrt(const Dual<T>& a) {
  T s = sqrt(a.v);
  return {s, a.d / (2.0 * s)};
}
template <class T> Dual<T> atan(const Dual<T>& a) { return {atan(a.v), a.d / (T(1.0) + a.v * a.v)}; }

// Integer power by repeated squaring; exact for every nesting level.
template <class S>
S ipow(S base, int n) {
  if (n < 0) return S(1.0) / ipow(base, -n);
  S result(1.0);
  while (n > 0) {
    if (n & 1) result = result * base;
    base = base * base;
    n >>= 1;
  }
  return result;
}

// Real power through exp/log; the base must be positive.
inline double rpow(double b, double e) { return std::pow(b, e); }
template <class T> Dual<T> rpow(const Dual<T>& b, double e) {
  T p = rpow(b.v, e);
  return {p, b.d * (e * rpow(b.v, e - 1.0))};
}

// Seeds a scalar of the next nesting level with the given derivative.
template <class S>
Dual<S> seed(const S& x, double dx) { return Dual<S>(x, S(dx)); }

}  // namespace cds
