#pragma once

// Exact rational scalars and the glue between them and doubles.

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <string>

#include "svwhf/error.hpp"

namespace svwhf {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

/// Per-scalar helpers so the polynomial code can be written once for both
/// the exact and the floating backend.
template <class S>
struct ScalarOps;

template <>
struct ScalarOps<double> {
  static constexpr bool exact = false;
  static bool is_zero(double x) { return x == 0.0; }
  static double to_double(double x) { return x; }
  static double abs(double x) { return std::abs(x); }
};

template <>
struct ScalarOps<Rational> {
  static constexpr bool exact = true;
  static bool is_zero(const Rational& x) { return x == 0; }
  static double to_double(const Rational& x) { return x.convert_to<double>(); }
  static Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }
};

template <class S>
bool is_zero(const S& x) {
  return ScalarOps<S>::is_zero(x);
}

template <class S>
double to_double(const S& x) {
  return ScalarOps<S>::to_double(x);
}

/// Parses "a/b", an integer, or a plain decimal ("0.25", "-1e-3") exactly.
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw Error("parse_error", "empty rational literal");
  try {
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
      Integer num(text.substr(0, slash));
      Integer den(text.substr(slash + 1));
      if (den == 0) throw Error("parse_error", "zero denominator in '" + text + "'");
      return Rational(num, den);
    }
    const auto epos = text.find_first_of("eE");
    const std::string mant = text.substr(0, epos);
    long exponent = epos == std::string::npos ? 0 : std::stol(text.substr(epos + 1));
    const auto dot = mant.find('.');
    std::string digits = mant;
    if (dot != std::string::npos) {
      digits = mant.substr(0, dot) + mant.substr(dot + 1);
      exponent -= static_cast<long>(mant.size() - dot - 1);
    }
    if (digits.empty() || digits == "-" || digits == "+") {
      throw Error("parse_error", "malformed rational literal '" + text + "'");
    }
    if (digits[0] == '+') digits.erase(0, 1);
    Rational value{Integer(digits)};
    Integer ten(10);
    Integer scale = boost::multiprecision::pow(ten, static_cast<unsigned>(std::labs(exponent)));
    return exponent >= 0 ? Rational(value * scale) : Rational(value / scale);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error("parse_error", "malformed rational literal '" + text + "'");
  }
}

inline std::string to_string(const Rational& x) { return x.str(); }

/// Continued-fraction approximation: the first convergent within `tol` of `x`
/// (absolute, scaled by max(1,|x|)).
inline Rational rationalize(double x, double tol = 1e-12) {
  if (!std::isfinite(x)) throw Error("domain_error", "cannot rationalise a non-finite value");
  const double bound = tol * std::max(1.0, std::abs(x));
  Integer h_prev(1), h_prev2(0), k_prev(0), k_prev2(1);
  long double rest = x;
  for (int iter = 0; iter < 64; ++iter) {
    const long double a_ld = std::floor(rest);
    Integer a(static_cast<long long>(a_ld));
    Integer h = a * h_prev + h_prev2;
    Integer k = a * k_prev + k_prev2;
    Rational approx(h, k);
    if (std::abs(approx.convert_to<double>() - x) <= bound) return approx;
    const long double frac = rest - a_ld;
    if (frac == 0) return approx;
    rest = 1.0L / frac;
    if (std::abs(rest) > 1e18L) return approx;
    h_prev2 = h_prev;
    h_prev = h;
    k_prev2 = k_prev;
    k_prev = k;
  }
  throw Error("domain_error", "rationalisation did not converge");
}

}  // namespace svwhf
