#pragma once

// Model selection over (p, q, kappa, k) by BIC with a deterministic parallel
// grid driver, and long-run rotation of the structural shocks.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "svwhf/estimate.hpp"
#include "svwhf/model.hpp"
#include "svwhf/whf.hpp"

namespace svwhf {

struct GridTask {
  int p = 0;
  int q = 0;
  PartialIndices indices;
};

/// All feasible regimes for each (p, q): kappa in 0..q-1 with k in 0..n-1,
/// plus (q, 0). Ordered by p, q, kappa, k.
inline std::vector<GridTask> grid_tasks(int n, int p_max, int q_max) {
  if (n < 1 || p_max < 0 || q_max < 0) throw Error("invalid_argument", "n >= 1 and p_max, q_max >= 0 are required");
  std::vector<GridTask> out;
  for (int p = 0; p <= p_max; ++p)
    for (int q = 0; q <= q_max; ++q)
      for (const auto& pi : feasible_indices(n, q)) out.push_back({p, q, pi});
  return out;
}

struct GridRow {
  int p = 0, q = 0, kappa = 0, k = 0;
  double loglik = std::numeric_limits<double>::quiet_NaN();
  int n_free = 0;
  double bic = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  bool ok = false;          ///< the fit produced a finite likelihood
  std::string error;        ///< failure code when !ok
  double min_jb_p = std::numeric_limits<double>::quiet_NaN();  ///< smallest JB p-value over residual levels
  double min_lb_p = std::numeric_limits<double>::quiet_NaN();  ///< smallest LB p-value over all transforms
  std::uint64_t seed = 0;
  VectorXd theta_hat;
};

struct GridResult {
  std::vector<GridRow> rows;
  int best = -1;  ///< row index with the smallest BIC among ok rows

  /// Row indices sharing (p, q).
  std::vector<int> group(int p, int q) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].p == p && rows[i].q == q) out.push_back(static_cast<int>(i));
    return out;
  }
  /// Smallest-BIC ok row within (p, q), or -1.
  int best_in_group(int p, int q) const {
    int b = -1;
    for (int i : group(p, q)) {
      const auto& r = rows[static_cast<std::size_t>(i)];
      if (r.ok && (b < 0 || r.bic < rows[static_cast<std::size_t>(b)].bic)) b = i;
    }
    return b;
  }
};

struct GridOptions {
  int p_max = 8;
  int q_max = 8;
  WhfMode normalization = WhfMode::natural;
  Family family = Family::sgt;  ///< density family of every shock
  OptimSchedule schedule;
  std::uint64_t seed = 0;
  int jobs = 0;  ///< 0: hardware concurrency
};

inline std::uint64_t task_seed(std::uint64_t seed, std::size_t task) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(task) + 1));
}

inline GridRow run_grid_task(const MatrixXd& data, const GridTask& t, const GridOptions& opt, std::uint64_t seed) {
  GridRow row;
  row.p = t.p;
  row.q = t.q;
  row.kappa = t.indices.kappa;
  row.k = t.indices.k;
  row.seed = seed;
  SvarmaSpec spec;
  spec.n = static_cast<int>(data.cols());
  spec.p = t.p;
  spec.q = t.q;
  spec.indices = t.indices;
  spec.normalization = opt.normalization;
  spec.densities.assign(static_cast<std::size_t>(spec.n), ShockDensity::gaussian());
  spec = spec.with_family(opt.family);
  row.n_free = count_free_parameters(spec);
  try {
    const EstimationResult r = fit(spec, data, opt.schedule, seed);
    row.loglik = r.loglik;
    row.bic = r.bic;
    row.converged = r.converged();
    row.ok = std::isfinite(r.loglik);
    row.theta_hat = r.theta_hat;
    double jb = std::numeric_limits<double>::infinity(), lb = jb;
    for (const auto& d : r.diagnostics) {
      if (d.transform == "level") jb = std::min(jb, d.jb.p_value);
      lb = std::min(lb, d.lb.p_value);
    }
    if (!r.diagnostics.empty()) {
      row.min_jb_p = jb;
      row.min_lb_p = lb;
    }
  } catch (const Error& e) {
    row.error = e.code();
  } catch (const std::exception&) {
    row.error = "internal_error";
  }
  return row;
}

/// Fits every task independently. Task i uses seed task_seed(opt.seed, i),
/// so results do not depend on the number of workers.
inline GridResult grid(const MatrixXd& data, const GridOptions& opt) {
  const auto tasks = grid_tasks(static_cast<int>(data.cols()), opt.p_max, opt.q_max);
  GridResult res;
  res.rows.resize(tasks.size());
  int jobs = opt.jobs > 0 ? opt.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min<int>(jobs, static_cast<int>(tasks.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++)
      res.rows[i] = run_grid_task(data, tasks[i], opt, task_seed(opt.seed, i));
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const auto& r = res.rows[i];
    if (r.ok && (res.best < 0 || r.bic < res.rows[static_cast<std::size_t>(res.best)].bic)) res.best = static_cast<int>(i);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Long-run rotation
// ---------------------------------------------------------------------------

struct Rotation {
  MatrixXd Q;         ///< orthogonal, acting on unit-variance shock coordinates
  MatrixXd impact;    ///< B Sigma Q
  MatrixXd B;         ///< impact with unit diagonal
  VectorXd sigma;     ///< |diag(impact)|
  MatrixXd long_run;  ///< a(1)^{-1} b(1) B Sigma Q
  std::vector<MatrixXd> irf;  ///< k_h Sigma Q, h = 0..horizon
};

/// a(1)^{-1} b(1) B Sigma.
inline MatrixXd long_run_matrix(const SvarmaParams& P) {
  const PolyMat<double> a = P.a_poly();
  if (!detail::min_modulus_above(a, 1.0 + kUnitCircleTol))
    throw Error("unstable_ar", "det a(z) has a zero in the closed unit disc");
  const Complex one(1.0, 0.0);
  const MatrixXd a1 = a.eval(one).real();
  const MatrixXd b1 = P.b_poly().eval(one).real();
  return a1.fullPivLu().solve(b1 * P.B * P.sigma.asDiagonal());
}

/// Orthogonal Q making entry (variable, shock) of K(1) Q zero: the rotation
/// in the plane of e_shock and the projection of e_shock onto the orthogonal
/// complement of row `variable` of K(1).
inline Rotation rotate_long_run(const SvarmaParams& P, int shock, int variable, int horizon = 0) {
  const int n = static_cast<int>(P.B.rows());
  if (shock < 0 || shock >= n || variable < 0 || variable >= n)
    throw Error("invalid_argument", "rotation target outside the model dimension");
  if (horizon < 0) throw Error("invalid_argument", "horizon must be non-negative");
  const MatrixXd K = long_run_matrix(P);
  const VectorXd r = K.row(variable).transpose();
  const double rn = r.norm();
  Rotation out;
  out.Q = MatrixXd::Identity(n, n);
  const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
  if (std::abs(r(shock)) > 1e-14 * scale) {
    if (rn <= 1e-14 * scale)
      throw Error("degenerate_target", "the targeted row of the long-run matrix vanishes");
    const VectorXd rh = r / rn;
    VectorXd e = VectorXd::Zero(n);
    e(shock) = 1.0;
    VectorXd v = e - rh(shock) * rh;
    const double vn = v.norm();
    if (vn <= 1e-12)
      throw Error("degenerate_target", "the long-run row is proportional to the targeted shock direction");
    v /= vn;
    // rotation in span{e, v} taking e to v
    const double c = e.dot(v);
    VectorXd w = v - c * e;
    const double wn = w.norm();
    if (wn > 1e-15) {
      w /= wn;
      const double s = wn;
      out.Q += (c - 1.0) * (e * e.transpose() + w * w.transpose()) + s * (w * e.transpose() - e * w.transpose());
    }
  }
  out.impact = P.B * P.sigma.asDiagonal() * out.Q;
  out.sigma = out.impact.diagonal().cwiseAbs();
  out.B = out.impact * out.impact.diagonal().cwiseInverse().asDiagonal();
  out.long_run = K * out.Q;
  for (const auto& kh : transfer_irf(P, horizon)) out.irf.push_back(kh * P.sigma.asDiagonal() * out.Q);
  return out;
}

}  // namespace svwhf
