#pragma once

// Residual diagnostics: Jarque-Bera normality and Ljung-Box serial
// correlation tests, applied to residual components, their absolute values
// and their squares.

#include <boost/math/distributions/chi_squared.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "svwhf/error.hpp"

namespace svwhf {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

namespace detail {

inline double chi2_upper(double x, double dof) {
  if (!(x > 0)) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), x));
}

inline void require_variation(const Eigen::VectorXd& x, double var) {
  if (x.size() < 2 || !(var > 0.0)) throw Error("constant_series", "series has zero variance");
}

}  // namespace detail

/// JB = T/6 (skew^2 + (kurt - 3)^2 / 4) against chi^2(2).
inline TestResult jarque_bera(const Eigen::VectorXd& x) {
  const double T = static_cast<double>(x.size());
  const double mean = x.size() ? x.mean() : 0.0;
  const Eigen::ArrayXd c = x.array() - mean;
  const double m2 = c.square().mean();
  detail::require_variation(x, m2);
  const double m3 = c.cube().mean();
  const double m4 = c.square().square().mean();
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  TestResult r;
  r.statistic = T / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
  r.p_value = detail::chi2_upper(r.statistic, 2.0);
  return r;
}

/// LB = T (T + 2) sum_{h=1..m} rho_h^2 / (T - h) against chi^2(m).
inline TestResult ljung_box(const Eigen::VectorXd& x, int lags = 8) {
  const int T = static_cast<int>(x.size());
  if (lags < 1 || lags >= T) throw Error("invalid_argument", "Ljung-Box needs 1 <= lags < T");
  const Eigen::VectorXd c = x.array() - x.mean();
  const double c0 = c.squaredNorm();
  detail::require_variation(x, c0);
  double q = 0.0;
  for (int h = 1; h <= lags; ++h) {
    const double rho = c.head(T - h).dot(c.tail(T - h)) / c0;
    q += rho * rho / (T - h);
  }
  TestResult r;
  r.statistic = static_cast<double>(T) * (T + 2.0) * q;
  r.p_value = detail::chi2_upper(r.statistic, lags);
  return r;
}

struct DiagnosticRow {
  int component = 0;
  std::string transform;  ///< "level", "abs" or "square"
  TestResult jb;
  TestResult lb;
};

/// Both tests on every column of `resid` and on its absolute values and
/// squares.
inline std::vector<DiagnosticRow> residual_diagnostics(const Eigen::MatrixXd& resid, int lags = 8) {
  std::vector<DiagnosticRow> out;
  for (Eigen::Index i = 0; i < resid.cols(); ++i) {
    const Eigen::VectorXd lv = resid.col(i);
    const Eigen::VectorXd ab = lv.cwiseAbs();
    const Eigen::VectorXd sq = lv.cwiseProduct(lv);
    const std::pair<const char*, const Eigen::VectorXd*> forms[] = {{"level", &lv}, {"abs", &ab}, {"square", &sq}};
    for (const auto& [name, v] : forms) {
      DiagnosticRow row;
      row.component = static_cast<int>(i);
      row.transform = name;
      row.jb = jarque_bera(*v);
      row.lb = ljung_box(*v, lags);
      out.push_back(row);
    }
  }
  return out;
}

}  // namespace svwhf
