#pragma once

// Standardised shock densities (zero mean, unit variance): Gaussian, Laplace
// and the skewed generalised t with lambda = (l, p, q).

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "svwhf/dual.hpp"
#include "svwhf/error.hpp"

namespace svwhf {

enum class Family { gaussian, laplace, sgt };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::laplace: return "laplace";
    case Family::sgt: return "sgt";
  }
  return "gaussian";
}

inline Family parse_family(const std::string& s) {
  if (s == "gaussian") return Family::gaussian;
  if (s == "laplace") return Family::laplace;
  if (s == "sgt") return Family::sgt;
  throw Error("invalid_config", "unknown density family '" + s + "'");
}

/// Smallest admissible gap pq - 2 used by the optimiser.
inline constexpr double kSgtVarianceMargin = 1e-3;

struct ShockDensity {
  Family family = Family::gaussian;
  Eigen::VectorXd lambda;  ///< empty, or (l, p, q) for sgt

  static ShockDensity gaussian() { return {Family::gaussian, Eigen::VectorXd()}; }
  static ShockDensity laplace() { return {Family::laplace, Eigen::VectorXd()}; }
  static ShockDensity sgt(double l, double p, double q) {
    Eigen::VectorXd lam(3);
    lam << l, p, q;
    return {Family::sgt, lam};
  }

  int dim() const { return family == Family::sgt ? 3 : 0; }

  bool admissible() const {
    if (family != Family::sgt) return lambda.size() == 0;
    if (lambda.size() != 3) return false;
    const double l = lambda(0), p = lambda(1), q = lambda(2);
    return std::isfinite(l) && std::isfinite(p) && std::isfinite(q) && l > -1.0 && l < 1.0 && p > 0.0 && q > 0.0 &&
           p * q > 2.0;
  }

  void check() const {
    if (!admissible()) throw Error("inadmissible_density", "density parameters outside the admissible set");
  }
};

/// SGT: order r moment exists iff pq > r.
inline bool moment_exists(const ShockDensity& d, int order) {
  if (d.family != Family::sgt) return true;
  return d.lambda(1) * d.lambda(2) > order;
}

// ---------------------------------------------------------------------------
// SGT closed form, generic in the scalar type
// ---------------------------------------------------------------------------

template <class T>
struct SgtShape {
  T logc;  ///< log normalising constant
  T m;     ///< centring shift
  T v;     ///< scale making the variance one
};

template <class T>
SgtShape<T> sgt_shape(const T& l, const T& p, const T& q) {
  const T one(1.0);
  const T b1 = lbeta(one / p, q);
  const T b2 = lbeta(T(2.0) / p, q - one / p);
  const T b3 = lbeta(T(3.0) / p, q - T(2.0) / p);
  const T r21 = exp(b2 - b1);
  const T r31 = exp(b3 - b1);
  const T qp = exp(log(q) / p);  // q^{1/p}
  const T v = one / (qp * sqrt((T(3.0) * l * l + one) * r31 - T(4.0) * l * l * r21 * r21));
  const T m = T(2.0) * v * l * qp * r21;
  const T logc = log(p) - T(std::log(2.0)) - log(v) - log(q) / p - b1;
  return {logc, m, v};
}

template <class T>
T sgt_log_density(const T& x, const T& l, const T& p, const T& q) {
  const auto sh = sgt_shape(l, p, q);
  const T xp = x + sh.m;
  if (value_of(xp) == 0.0) return sh.logc;
  const T s(value_of(xp) > 0 ? 1.0 : -1.0);
  const T loga = p * (log(abs(xp)) - log(sh.v) - log(T(1.0) + l * s)) - log(q);
  return sh.logc - (T(1.0) / p + q) * log(T(1.0) + exp(loga));
}

/// Per-lambda constants with their lambda-gradients, computed once and reused
/// across observations.
struct SgtConstants {
  double l = 0, p = 2, q = 1;
  double logc = 0, m = 0, v = 1;
  std::array<double, 3> dlogc{}, dm{}, dv{};

  explicit SgtConstants(const Eigen::VectorXd& lam) : l(lam(0)), p(lam(1)), q(lam(2)) {
    using D = Dual<double, 3>;
    const auto sh = sgt_shape(D::variable(l, 0), D::variable(p, 1), D::variable(q, 2));
    logc = sh.logc.v;
    m = sh.m.v;
    v = sh.v.v;
    dlogc = sh.logc.d;
    dm = sh.m.d;
    dv = sh.v.d;
  }
};

struct PointEval {
  double logf = 0;
  double dx = 0;                  ///< d log f / dx
  std::array<double, 3> dlam{};   ///< d log f / d lambda (sgt only)
};

inline PointEval sgt_eval(double x, const SgtConstants& c, bool with_lambda) {
  PointEval out;
  const double xp = x + c.m;
  const double s = xp >= 0 ? 1.0 : -1.0;
  const double onels = 1.0 + c.l * s;
  const double r = std::abs(xp) / (c.v * onels);
  const double A = r == 0.0 ? 0.0 : std::exp(c.p * std::log(r)) / c.q;
  const double L1 = std::log1p(A);
  const double e = 1.0 / c.p + c.q;
  out.logf = c.logc - e * L1;
  out.dx = xp == 0.0 ? 0.0 : -(1.0 + c.p * c.q) * A / ((1.0 + A) * xp);
  if (with_lambda) {
    const double dA_dxp = xp == 0.0 ? 0.0 : c.p * A / xp;
    const double dA_dv = -c.p * A / c.v;
    const double direct[3] = {-c.p * A * s / onels, A == 0.0 ? 0.0 : A * std::log(r), -A / c.q};
    const double de[3] = {0.0, -1.0 / (c.p * c.p), 1.0};
    for (int k = 0; k < 3; ++k) {
      const double dA = dA_dxp * c.dm[k] + dA_dv * c.dv[k] + direct[k];
      out.dlam[k] = c.dlogc[k] - de[k] * L1 - e * dA / (1.0 + A);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Public per-point interface
// ---------------------------------------------------------------------------

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

inline double log_density(double x, const ShockDensity& d) {
  d.check();
  switch (d.family) {
    case Family::gaussian: return -0.5 * x * x - kLogSqrt2Pi;
    case Family::laplace: return -std::numbers::sqrt2 * std::abs(x) - 0.5 * std::log(2.0);
    case Family::sgt: return sgt_eval(x, SgtConstants(d.lambda), false).logf;
  }
  return 0;
}

/// One-sided (right) derivative at the Laplace kink.
inline double d_dx(double x, const ShockDensity& d) {
  d.check();
  switch (d.family) {
    case Family::gaussian: return -x;
    case Family::laplace: return x >= 0 ? -std::numbers::sqrt2 : std::numbers::sqrt2;
    case Family::sgt: return sgt_eval(x, SgtConstants(d.lambda), false).dx;
  }
  return 0;
}

inline Eigen::VectorXd d_dlambda(double x, const ShockDensity& d) {
  d.check();
  if (d.family != Family::sgt) return Eigen::VectorXd();
  const auto e = sgt_eval(x, SgtConstants(d.lambda), true);
  return Eigen::Vector3d(e.dlam[0], e.dlam[1], e.dlam[2]);
}

/// Full Hessian of log f in (x, lambda): entry (0,0) is d2/dx2.
inline Eigen::MatrixXd hessian_x_lambda(double x, const ShockDensity& d) {
  d.check();
  if (d.family == Family::gaussian) return Eigen::MatrixXd::Constant(1, 1, -1.0);
  if (d.family == Family::laplace) return Eigen::MatrixXd::Zero(1, 1);
  using In = Dual<double, 4>;
  using Out = Dual<In, 4>;
  auto var = [](double v, int i) {
    Out o;
    o.v = In::variable(v, i);
    o.d[static_cast<std::size_t>(i)] = In(1.0);
    return o;
  };
  const Out r = sgt_log_density(var(x, 0), var(d.lambda(0), 1), var(d.lambda(1), 2), var(d.lambda(2), 3));
  Eigen::MatrixXd h(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) h(i, j) = r.d[static_cast<std::size_t>(i)].d[static_cast<std::size_t>(j)];
  return h;
}

inline double d_dxx(double x, const ShockDensity& d) { return hessian_x_lambda(x, d)(0, 0); }

inline Eigen::VectorXd d_dxlambda(double x, const ShockDensity& d) {
  if (d.family != Family::sgt) return Eigen::VectorXd();
  return hessian_x_lambda(x, d).row(0).tail(3).transpose();
}

inline Eigen::MatrixXd d_dlambdalambda(double x, const ShockDensity& d) {
  if (d.family != Family::sgt) return Eigen::MatrixXd();
  return hessian_x_lambda(x, d).bottomRightCorner(3, 3);
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

inline double draw(const ShockDensity& d, Rng& rng) {
  switch (d.family) {
    case Family::gaussian: {
      std::normal_distribution<double> nd(0.0, 1.0);
      return nd(rng);
    }
    case Family::laplace: {
      std::uniform_real_distribution<double> ud(-0.5, 0.5);
      const double u = ud(rng);
      const double s = u < 0 ? -1.0 : 1.0;
      return -s * std::log1p(-2.0 * std::abs(u)) / std::numbers::sqrt2;
    }
    case Family::sgt: {
      const SgtConstants c(d.lambda);
      std::gamma_distribution<double> g1(1.0 / c.p, 1.0), g2(c.q, 1.0);
      std::uniform_real_distribution<double> ud(0.0, 1.0);
      const double w = g1(rng) / g2(rng);
      const double mag = std::exp(std::log(c.q * w) / c.p);
      const bool pos = ud(rng) < 0.5 * (1.0 + c.l);
      const double xp = pos ? c.v * (1.0 + c.l) * mag : -c.v * (1.0 - c.l) * mag;
      return xp - c.m;
    }
  }
  return 0;
}

inline std::vector<double> sample(const ShockDensity& d, std::size_t count, Rng& rng) {
  d.check();
  if (!moment_exists(d, 2)) throw Error("inadmissible_density", "variance does not exist");
  std::vector<double> out(count);
  for (auto& x : out) x = draw(d, rng);
  return out;
}

}  // namespace svwhf
