#pragma once

// Forward-mode dual numbers with a fixed number of directions. Nesting
// Dual<Dual<double,N>,N> gives second derivatives.

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <array>
#include <cmath>

namespace svwhf {

template <class T, int N>
struct Dual {
  T v{};
  std::array<T, N> d{};

  Dual() = default;
  Dual(double x) : v(x) {}  // NOLINT(implicit)
  Dual(const T& x, const std::array<T, N>& g) : v(x), d(g) {}

  static Dual variable(const T& x, int i) {
    Dual r;
    r.v = x;
    r.d[static_cast<std::size_t>(i)] = T(1.0);
    return r;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) { return *this = *this * o; }
  Dual& operator/=(const Dual& o) { return *this = *this / o; }

  friend Dual operator-(const Dual& a) {
    Dual r;
    r.v = -a.v;
    for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
    return r;
  }
  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(const Dual& a, const Dual& b) {
    Dual r;
    r.v = a.v * b.v;
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    Dual r;
    r.v = a.v / b.v;
    const T inv2 = T(1.0) / (b.v * b.v);
    for (int i = 0; i < N; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) * inv2;
    return r;
  }
  friend bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
  friend bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
};

template <class T>
struct is_dual : std::false_type {};
template <class T, int N>
struct is_dual<Dual<T, N>> : std::true_type {};

inline double value_of(double x) { return x; }
template <class T, int N>
double value_of(const Dual<T, N>& x) {
  return value_of(x.v);
}

namespace detail {
template <class T, int N, class F, class DF>
Dual<T, N> chain(const Dual<T, N>& x, F f, DF df) {
  Dual<T, N> r;
  r.v = f(x.v);
  const T g = df(x.v);
  for (int i = 0; i < N; ++i) r.d[i] = g * x.d[i];
  return r;
}
}  // namespace detail

using std::abs;
using std::exp;
using std::log;
using std::pow;
using std::sqrt;

template <class T, int N>
Dual<T, N> exp(const Dual<T, N>& x) {
  return detail::chain(x, [](const T& a) { return exp(a); }, [](const T& a) { return exp(a); });
}
template <class T, int N>
Dual<T, N> log(const Dual<T, N>& x) {
  return detail::chain(x, [](const T& a) { return log(a); }, [](const T& a) { return T(1.0) / a; });
}
template <class T, int N>
Dual<T, N> sqrt(const Dual<T, N>& x) {
  return detail::chain(x, [](const T& a) { return sqrt(a); }, [](const T& a) { return T(0.5) / sqrt(a); });
}
template <class T, int N>
Dual<T, N> abs(const Dual<T, N>& x) {
  return value_of(x) < 0 ? -x : x;
}
/// x^y for x > 0.
template <class T, int N>
Dual<T, N> pow(const Dual<T, N>& x, const Dual<T, N>& y) {
  return exp(y * log(x));
}

/// k = -1: log-gamma, k = 0: digamma, k >= 1: polygamma of order k.
inline double lgamma_derivative(int k, double x) {
  if (k < 0) return std::lgamma(x);
  if (k == 0) return boost::math::digamma(x);
  if (k == 1) return boost::math::trigamma(x);
  return boost::math::polygamma(k, x);
}
template <class T, int N>
Dual<T, N> lgamma_derivative(int k, const Dual<T, N>& x) {
  Dual<T, N> r;
  r.v = lgamma_derivative(k, x.v);
  const T g = lgamma_derivative(k + 1, x.v);
  for (int i = 0; i < N; ++i) r.d[i] = g * x.d[i];
  return r;
}

template <class T>
T lgamma_of(const T& x) {
  return lgamma_derivative(-1, x);
}

template <class T>
T lbeta(const T& a, const T& b) {
  return lgamma_of(a) + lgamma_of(b) - lgamma_of(a + b);
}

}  // namespace svwhf
