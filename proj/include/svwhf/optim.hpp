#pragma once

// Maximisers used by the estimation driver: a projected quasi-Newton method
// with box constraints and a bounded Nelder-Mead simplex. Objectives return
// -infinity for inadmissible points.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace svwhf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kMinusInf = -std::numeric_limits<double>::infinity();

struct Box {
  VectorXd lower;
  VectorXd upper;

  static Box unbounded(int dim) {
    return {VectorXd::Constant(dim, -std::numeric_limits<double>::infinity()),
            VectorXd::Constant(dim, std::numeric_limits<double>::infinity())};
  }
  VectorXd project(const VectorXd& x) const { return x.cwiseMax(lower).cwiseMin(upper); }
  bool contains(const VectorXd& x) const {
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (!(x(i) >= lower(i) && x(i) <= upper(i))) return false;
    return true;
  }
};

/// Value only; -inf when inadmissible.
using ValueFn = std::function<double(const VectorXd&)>;
/// Value and ascent gradient; -inf when inadmissible (gradient then unused).
using GradFn = std::function<double(const VectorXd&, VectorXd&)>;

struct OptimResult {
  VectorXd x;
  double value = kMinusInf;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

struct BfgsOptions {
  int max_iter = 500;
  double ftol = 1e-8;   ///< on successive objective values
  double gtol = 1e-7;   ///< on the projected gradient sup-norm
  double max_step = 1.0;  ///< first-iteration step length cap
};

namespace detail {

// Zero the components that point out of the box at an active bound.
inline VectorXd projected_gradient(const VectorXd& x, const VectorXd& g, const Box& box) {
  VectorXd pg = g;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) <= box.lower(i) && g(i) < 0) pg(i) = 0;
    if (x(i) >= box.upper(i) && g(i) > 0) pg(i) = 0;
  }
  return pg;
}

}  // namespace detail

/// Maximises f over the box by BFGS on the inactive coordinates with a
/// projected Armijo backtracking line search.
inline OptimResult bfgs_maximize(const GradFn& f, const VectorXd& x0, const Box& box, const BfgsOptions& opt = {}) {
  const int dim = static_cast<int>(x0.size());
  OptimResult res;
  res.x = box.project(x0);
  VectorXd g(dim);
  res.value = f(res.x, g);
  res.evaluations = 1;
  if (!std::isfinite(res.value)) return res;
  MatrixXd H = MatrixXd::Identity(dim, dim);
  bool scaled = false;
  int small_steps = 0;
  VectorXd gn(dim);
  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it + 1;
    const VectorXd pg = detail::projected_gradient(res.x, g, box);
    if (pg.lpNorm<Eigen::Infinity>() <= opt.gtol) {
      res.converged = true;
      break;
    }
    std::vector<bool> active(static_cast<std::size_t>(dim), false);
    for (int i = 0; i < dim; ++i) active[static_cast<std::size_t>(i)] = pg(i) == 0.0 && g(i) != 0.0;
    VectorXd d = H * pg;
    for (int i = 0; i < dim; ++i)
      if (active[static_cast<std::size_t>(i)]) d(i) = 0;
    if (!(d.dot(pg) > 0)) {
      H.setIdentity();
      scaled = false;
      d = pg;
    }
    double alpha = 1.0;
    if (!scaled) alpha = std::min(1.0, opt.max_step / std::max(d.lpNorm<Eigen::Infinity>(), 1e-300));
    VectorXd xn;
    double fn = kMinusInf;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      xn = box.project(res.x + alpha * d);
      if ((xn - res.x).lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + res.x.lpNorm<Eigen::Infinity>())) break;
      fn = f(xn, gn);
      ++res.evaluations;
      if (std::isfinite(fn) && fn >= res.value + 1e-4 * g.dot(xn - res.x)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // no ascent along the quasi-Newton direction: retry once from steepest ascent
      if (scaled) {
        H.setIdentity();
        scaled = false;
        continue;
      }
      res.converged = pg.lpNorm<Eigen::Infinity>() <= std::sqrt(opt.gtol);
      break;
    }
    const VectorXd s = xn - res.x;
    const VectorXd yv = g - gn;  // gradient difference of -f
    const double sy = s.dot(yv);
    const double df = fn - res.value;
    res.x = xn;
    res.value = fn;
    g = gn;
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (!scaled) {
        H = MatrixXd::Identity(dim, dim) * (sy / yv.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const VectorXd Hy = H * yv;
      const double yHy = yv.dot(Hy);
      H += (rho * rho * yHy + rho) * (s * s.transpose()) - rho * (Hy * s.transpose() + s * Hy.transpose());
    }
    const double pgn = detail::projected_gradient(res.x, g, box).lpNorm<Eigen::Infinity>();
    // kinked objectives never reach gtol; a long run of negligible gains ends the search
    if (std::abs(df) <= opt.ftol * std::max(1.0, std::abs(res.value))) {
      if (++small_steps >= (pgn <= 10.0 * opt.gtol ? 3 : 30)) {
        res.converged = true;
        break;
      }
    } else {
      small_steps = 0;
    }
  }
  return res;
}

struct NelderMeadOptions {
  int max_iter = 500;
  double ftol = 1e-8;  ///< on the spread of vertex values
  double step = 0.1;   ///< initial simplex edge
};

/// Bounded Nelder-Mead with dimension-adaptive coefficients; vertices are
/// projected onto the box and -inf vertices are never accepted.
inline OptimResult nelder_mead_maximize(const ValueFn& f, const VectorXd& x0, const Box& box,
                                        const NelderMeadOptions& opt = {}) {
  const int dim = static_cast<int>(x0.size());
  OptimResult res;
  res.x = box.project(x0);
  res.value = f(res.x);
  res.evaluations = 1;
  if (!std::isfinite(res.value) || dim == 0) return res;
  const double nd = dim;
  const double alpha = 1.0, gamma = 1.0 + 2.0 / nd, beta = 0.75 - 1.0 / (2.0 * nd), delta = 1.0 - 1.0 / nd;
  std::vector<VectorXd> xs{res.x};
  std::vector<double> fs{res.value};
  for (int i = 0; i < dim; ++i) {
    VectorXd v = res.x;
    double h = opt.step * std::max(1.0, std::abs(res.x(i)));
    double fv = kMinusInf;
    for (int attempt = 0; attempt < 8 && !std::isfinite(fv); ++attempt) {
      v = res.x;
      v(i) += (attempt % 2 == 0 ? h : -h);
      v = box.project(v);
      if (v(i) == res.x(i)) {
        fv = kMinusInf;
      } else {
        fv = f(v);
        ++res.evaluations;
      }
      if (attempt % 2 == 1) h *= 0.25;
    }
    if (!std::isfinite(fv)) {
      v = res.x;
      fv = res.value;
    }
    xs.push_back(v);
    fs.push_back(fv);
  }
  std::vector<int> order(static_cast<std::size_t>(dim + 1));
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fs[static_cast<std::size_t>(a)] > fs[static_cast<std::size_t>(b)]; });
    std::vector<VectorXd> x2;
    std::vector<double> f2;
    for (int i : order) {
      x2.push_back(xs[static_cast<std::size_t>(i)]);
      f2.push_back(fs[static_cast<std::size_t>(i)]);
    }
    xs.swap(x2);
    fs.swap(f2);
  };
  auto eval = [&](const VectorXd& v) {
    ++res.evaluations;
    return f(v);
  };
  for (int it = 0; it < opt.max_iter; ++it) {
    sort_simplex();
    res.iterations = it + 1;
    const double spread = fs.front() - fs.back();
    if (std::isfinite(spread) && spread <= opt.ftol * std::max(1.0, std::abs(fs.front()))) {
      res.converged = true;
      break;
    }
    VectorXd c = VectorXd::Zero(dim);
    for (int i = 0; i < dim; ++i) c += xs[static_cast<std::size_t>(i)];
    c /= nd;
    const VectorXd& worst = xs.back();
    const VectorXd xr = box.project(c + alpha * (c - worst));
    const double fr = eval(xr);
    if (fr > fs.front()) {
      const VectorXd xe = box.project(c + gamma * (xr - c));
      const double fe = eval(xe);
      if (fe > fr) {
        xs.back() = xe;
        fs.back() = fe;
      } else {
        xs.back() = xr;
        fs.back() = fr;
      }
      continue;
    }
    if (fr > fs[static_cast<std::size_t>(dim - 1)]) {
      xs.back() = xr;
      fs.back() = fr;
      continue;
    }
    const bool outside = fr > fs.back();
    const VectorXd xc = outside ? box.project(c + beta * (xr - c)) : box.project(c - beta * (c - worst));
    const double fc = eval(xc);
    if (fc > std::max(outside ? fr : fs.back(), kMinusInf)) {
      xs.back() = xc;
      fs.back() = fc;
      continue;
    }
    for (int i = 1; i <= dim; ++i) {
      xs[static_cast<std::size_t>(i)] = box.project(xs[0] + delta * (xs[static_cast<std::size_t>(i)] - xs[0]));
      fs[static_cast<std::size_t>(i)] = eval(xs[static_cast<std::size_t>(i)]);
    }
  }
  sort_simplex();
  res.x = xs.front();
  res.value = fs.front();
  return res;
}

}  // namespace svwhf
