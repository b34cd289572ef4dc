#pragma once

// Staged maximum likelihood: Gaussian, then Laplace, then SGT shocks, each
// stage warm-started from the previous one and alternating simplex and
// quasi-Newton steps, over several seeded starting points.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "svwhf/diagnostics.hpp"
#include "svwhf/error.hpp"
#include "svwhf/likelihood.hpp"
#include "svwhf/model.hpp"
#include "svwhf/optim.hpp"

namespace svwhf {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct StageSettings {
  Family family = Family::gaussian;
  int max_iter = 500;  ///< per inner optimiser call
  double tol = 1e-8;   ///< on L_T between alternation rounds
  int rounds = 3;      ///< simplex / quasi-Newton alternations
  int simplex_iter = 500;
};

struct OptimSchedule {
  std::vector<StageSettings> stages{{Family::gaussian}, {Family::laplace}, {Family::sgt}};
  int multistarts = 5;
  double perturbation = 0.1;
  int finalists = 2;  ///< starts carried into the last stage
  double gtol = 1e-7;
  double sigma_lower = 1e-6;
  double skew_bound = 0.999;
  double tail_lower = 0.2;
  double tail_upper_p = 50.0;
  double tail_upper_q = 1000.0;
  IdScheme scheme = IdScheme::cb;

  void check() const {
    if (stages.empty()) throw Error("invalid_schedule", "at least one stage is required");
    for (const auto& s : stages)
      if (!(s.tol > 0) || s.max_iter < 1 || s.rounds < 1 || s.simplex_iter < 0)
        throw Error("invalid_schedule", "stage tolerances must be positive and iteration counts valid");
    if (multistarts < 1 || finalists < 1) throw Error("invalid_schedule", "multistarts and finalists must be >= 1");
    if (!(perturbation >= 0) || !(gtol > 0) || !(sigma_lower > 0))
      throw Error("invalid_schedule", "perturbation, gtol and sigma_lower must be positive");
    if (!(skew_bound > 0 && skew_bound < 1)) throw Error("invalid_schedule", "skew_bound must lie in (0, 1)");
    if (!(tail_lower > 0 && tail_upper_p > tail_lower && tail_upper_q > tail_lower))
      throw Error("invalid_schedule", "tail bounds must be positive and ordered");
  }
};

struct StageReport {
  Family family = Family::gaussian;
  double value = kMinusInf;
  bool converged = false;
  int rounds = 0;
  int evaluations = 0;
};

struct EstimationResult {
  SvarmaSpec spec;
  VectorXd theta_hat;
  double loglik = 0.0;      ///< L_T at theta_hat
  double score_norm = 0.0;  ///< sup-norm of the mean score
  VectorXd stderr_;
  MatrixXd sandwich;
  bool stderr_available = false;
  std::vector<StageReport> stages;
  int best_start = 0;
  int T = 0;
  int n_free = 0;
  double bic = 0.0;
  std::vector<DiagnosticRow> diagnostics;
  std::vector<std::string> warnings;

  bool converged() const {
    return !stages.empty() && std::all_of(stages.begin(), stages.end(), [](const StageReport& s) { return s.converged; });
  }
};

/// -2 T L_T + n_free log T.
inline double bic(double loglik_avg, int n_free, int T) {
  if (T < 1) throw Error("invalid_argument", "T must be positive");
  return -2.0 * T * loglik_avg + n_free * std::log(static_cast<double>(T));
}

namespace detail {

inline int family_rank(Family f) { return f == Family::gaussian ? 0 : (f == Family::laplace ? 1 : 2); }

inline MatrixXd lagged_design(const MatrixXd& z, int first, int last, int lags, int offset = 1) {
  const int n = static_cast<int>(z.cols());
  MatrixXd X(last - first, n * lags);
  for (int t = first; t < last; ++t)
    for (int l = 0; l < lags; ++l) X.block(t - first, l * n, 1, n) = z.row(t - l - offset);
  return X;
}

/// AR coefficients by a long-autoregression residual regression.
inline std::vector<MatrixXd> initial_ar(const MatrixXd& y, int p, int q) {
  const int T = static_cast<int>(y.rows());
  const int n = static_cast<int>(y.cols());
  std::vector<MatrixXd> a(static_cast<std::size_t>(p), MatrixXd::Zero(n, n));
  if (p == 0) return a;
  const int h = q == 0 ? p : std::max(p + q, static_cast<int>(std::ceil(1.5 * std::log(static_cast<double>(T)))));
  if (T <= 3 * (h + q) * n + 10) throw Error("insufficient_data", "too few observations for the requested orders");
  MatrixXd e = MatrixXd::Zero(T, n);
  if (q > 0) {
    const MatrixXd X = lagged_design(y, h, T, h);
    const MatrixXd coef = X.colPivHouseholderQr().solve(y.bottomRows(T - h));
    e.bottomRows(T - h) = y.bottomRows(T - h) - X * coef;
  }
  const int start = q > 0 ? h + q : p;
  MatrixXd X(T - start, n * (p + q));
  X.leftCols(n * p) = lagged_design(y, start, T, p);
  if (q > 0) X.rightCols(n * q) = lagged_design(e, start, T, q);
  const MatrixXd coef = X.colPivHouseholderQr().solve(y.bottomRows(T - start));
  for (int i = 0; i < p; ++i) a[static_cast<std::size_t>(i)] = coef.block(i * n, 0, n, n).transpose();
  return a;
}

/// p = I and g = diag((z + c)^{kappa_i}) in natural mode, rows divided by
/// c^{kappa_i} in b0_identity mode.
inline void pattern_system(SvarmaParams& P, const SvarmaSpec& spec) {
  const int n = spec.n;
  const auto kap = spec.kappas();
  const double c = spec.normalization == WhfMode::natural ? 0.0 : 0.5;
  P.p.assign(static_cast<std::size_t>(spec.p_degree() + 1), MatrixXd::Zero(n, n));
  P.p[0].setIdentity();
  P.g.assign(static_cast<std::size_t>(spec.kappa() + 2), MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i) {
    const int ki = kap[static_cast<std::size_t>(i)];
    const double scale = spec.normalization == WhfMode::natural ? 1.0 : std::pow(c, -ki);
    for (int m = 0; m <= ki; ++m) {
      double binom = 1.0;
      for (int j = 1; j <= m; ++j) binom = binom * (ki - m + j) / j;
      P.g[static_cast<std::size_t>(m)](i, i) = binom * std::pow(c, ki - m) * scale;
    }
  }
}

}  // namespace detail

/// Starting point: AR part by long-autoregression regression (shrunk until
/// stable), WHF factors at the identity pattern, B and sigma from the
/// covariance of the implied residuals.
inline VectorXd initial_theta(const SvarmaSpec& spec, const MatrixXd& y) {
  spec.check();
  const int n = spec.n;
  SvarmaParams P;
  P.a = detail::initial_ar(y, spec.p, spec.q);
  for (int shrink = 0; shrink < 200; ++shrink) {
    if (spec.p == 0 || detail::min_modulus_above(P.a_poly(), 1.0 + 1e-3)) break;
    for (auto& m : P.a) m *= 0.9;
  }
  detail::pattern_system(P, spec);
  P.B = MatrixXd::Identity(n, n);
  P.sigma = VectorXd::Ones(n);
  for (const auto& d : spec.densities) P.lambda.push_back(d.lambda);
  const Series ys(y);
  const ResidualSet R = residuals(P, spec, ys);
  const int T = static_cast<int>(y.rows());
  const int trim = std::min(T / 4, 10 + spec.p + spec.q);
  const MatrixXd u = R.u.middleRows(trim, T - 2 * trim);
  const MatrixXd cov = (u.transpose() * u) / static_cast<double>(u.rows());
  Eigen::LLT<MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw Error("singular_matrix", "residual covariance is not positive definite");
  const MatrixXd L = llt.matrixL();
  P.sigma = L.diagonal();
  P.B = L * P.sigma.cwiseInverse().asDiagonal();
  return pack(P, spec);
}

namespace detail {

inline Box theta_box(const SvarmaSpec& spec, const OptimSchedule& sch) {
  const ThetaLayout TL = make_theta_layout(spec);
  Box box = Box::unbounded(TL.size());
  for (int i = 0; i < spec.n; ++i) box.lower(TL.sigma_off() + i) = sch.sigma_lower;
  int off = TL.lambda_off();
  for (const auto& d : spec.densities) {
    if (d.family == Family::sgt) {
      box.lower(off) = -sch.skew_bound;
      box.upper(off) = sch.skew_bound;
      box.lower(off + 1) = sch.tail_lower;
      box.upper(off + 1) = sch.tail_upper_p;
      box.lower(off + 2) = sch.tail_lower;
      box.upper(off + 2) = sch.tail_upper_q;
    }
    off += d.dim();
  }
  return box;
}

inline bool variance_margin_ok(const VectorXd& theta, const SvarmaSpec& spec) {
  const ThetaLayout TL = make_theta_layout(spec);
  int off = TL.lambda_off();
  for (const auto& d : spec.densities) {
    if (d.family == Family::sgt && !(theta(off + 1) * theta(off + 2) > 2.0 + kSgtVarianceMargin)) return false;
    off += d.dim();
  }
  return true;
}

/// Moves theta between specs that share tau, beta and sigma; lambda taken
/// from the target spec's densities.
inline VectorXd transfer_theta(const VectorXd& theta, const SvarmaSpec& from, const SvarmaSpec& to) {
  const ThetaLayout a = make_theta_layout(from);
  const ThetaLayout b = make_theta_layout(to);
  VectorXd out(b.size());
  out.head(b.lambda_off()) = theta.head(a.lambda_off());
  int off = b.lambda_off();
  for (const auto& d : to.densities) {
    out.segment(off, d.dim()) = d.lambda;
    off += d.dim();
  }
  return out;
}

struct StageObjective {
  const SvarmaSpec& spec;
  const Series& y;

  double value(const VectorXd& th) const {
    if (!th.allFinite() || !variance_margin_ok(th, spec)) return kMinusInf;
    try {
      const SvarmaParams P = unpack(th, spec);
      if (!validate(P, spec, false).filter_ok()) return kMinusInf;
      const double v = evaluate(P, spec, y, false, false).value;
      return std::isfinite(v) ? v : kMinusInf;
    } catch (const Error&) {
      return kMinusInf;
    }
  }
  double value_grad(const VectorXd& th, VectorXd& g) const {
    if (!th.allFinite() || !variance_margin_ok(th, spec)) return kMinusInf;
    try {
      const SvarmaParams P = unpack(th, spec);
      if (!validate(P, spec, false).filter_ok()) return kMinusInf;
      const ScoreEval e = evaluate(P, spec, y, true, false);
      if (!std::isfinite(e.value) || !e.grad_free.allFinite()) return kMinusInf;
      g = e.grad_free;
      return e.value;
    } catch (const Error&) {
      return kMinusInf;
    }
  }
};

inline StageReport run_stage(const SvarmaSpec& spec, const Series& y, const StageSettings& st,
                             const OptimSchedule& sch, VectorXd& theta) {
  StageReport rep;
  rep.family = st.family;
  const StageObjective obj{spec, y};
  const Box box = theta_box(spec, sch);
  theta = box.project(theta);
  double value = obj.value(theta);
  rep.evaluations = 1;
  if (!std::isfinite(value)) {
    rep.value = value;
    return rep;
  }
  const ValueFn fv = [&](const VectorXd& x) { return obj.value(x); };
  const GradFn fg = [&](const VectorXd& x, VectorXd& g) { return obj.value_grad(x, g); };
  for (int r = 0; r < st.rounds; ++r) {
    rep.rounds = r + 1;
    const double prev = value;
    if (st.simplex_iter > 0) {
      const OptimResult nm = nelder_mead_maximize(fv, theta, box, {st.simplex_iter, st.tol, 0.05});
      rep.evaluations += nm.evaluations;
      if (nm.value > value) {
        theta = nm.x;
        value = nm.value;
      }
    }
    const OptimResult bf = bfgs_maximize(fg, theta, box, {st.max_iter, st.tol, sch.gtol, 0.5});
    rep.evaluations += bf.evaluations;
    if (bf.value > value) {
      theta = bf.x;
      value = bf.value;
    }
    if (std::abs(value - prev) < st.tol && r > 0) {
      rep.converged = true;
      break;
    }
    if (bf.converged && st.simplex_iter == 0) {
      rep.converged = true;
      break;
    }
  }
  rep.value = value;
  return rep;
}

inline VectorXd perturb(const VectorXd& theta, const SvarmaSpec& spec, double scale, std::uint64_t seed) {
  const TauLayout L = make_layout(spec);
  Rng rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<int> coords;
  const int first_sys = L.p_off(0);
  for (int i = 0; i < L.n_free(); ++i)
    if (L.free_to_tau[static_cast<std::size_t>(i)] >= first_sys) coords.push_back(i);
  double s = scale;
  for (int attempt = 0; attempt < 200; ++attempt) {
    VectorXd th = theta;
    for (int i : coords) th(i) += s * nd(rng);
    if (validate(th, spec, false).filter_ok()) return th;
    if (attempt % 20 == 19) s *= 0.5;
  }
  return theta;
}

}  // namespace detail

/// Staged fit. The last stage uses `spec` itself (its densities' lambda as
/// the SGT starting value); earlier stages replace every density by the
/// stage family.
inline EstimationResult fit(const SvarmaSpec& spec, const MatrixXd& data, const OptimSchedule& schedule,
                            std::uint64_t seed) {
  spec.check();
  schedule.check();
  if (data.cols() != spec.n) throw Error("dimension_mismatch", "data dimension differs from the spec");
  if (!data.allFinite()) throw Error("invalid_data", "data contain non-finite values");
  const Series y(data);
  int target = 0;
  for (const auto& d : spec.densities) target = std::max(target, detail::family_rank(d.family));
  std::vector<std::pair<SvarmaSpec, StageSettings>> plan;
  for (const auto& st : schedule.stages) {
    const int r = detail::family_rank(st.family);
    if (r < target) plan.emplace_back(spec.with_family(st.family), st);
    else if (r == target) plan.emplace_back(spec, st);
  }
  if (plan.empty() || detail::family_rank(plan.back().second.family) != target) {
    StageSettings st = schedule.stages.back();
    st.family = spec.densities.front().family;
    plan.emplace_back(spec, st);
  }
  const VectorXd base = initial_theta(plan.front().first, data);
  struct Track {
    VectorXd theta;
    std::vector<StageReport> reports;
    double value = kMinusInf;
    int start = 0;
  };
  std::vector<Track> tracks;
  for (int s = 0; s < schedule.multistarts; ++s) {
    Track tr;
    tr.start = s;
    tr.theta = s == 0 ? base
                      : detail::perturb(base, plan.front().first, schedule.perturbation,
                                        splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(s))));
    tracks.push_back(std::move(tr));
  }
  const SvarmaSpec* prev = &plan.front().first;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const auto& [sp, st] = plan[k];
    const bool last = k + 1 == plan.size();
    if (last && static_cast<int>(tracks.size()) > schedule.finalists) {
      std::stable_sort(tracks.begin(), tracks.end(), [](const Track& a, const Track& b) { return a.value > b.value; });
      tracks.resize(static_cast<std::size_t>(schedule.finalists));
    }
    for (auto& tr : tracks) {
      if (k > 0 && !tr.reports.empty() && !std::isfinite(tr.reports.back().value)) continue;
      tr.theta = detail::transfer_theta(tr.theta, *prev, sp);
      tr.reports.push_back(detail::run_stage(sp, y, st, schedule, tr.theta));
      tr.value = tr.reports.back().value;
    }
    prev = &sp;
  }
  const auto best = std::max_element(tracks.begin(), tracks.end(), [](const Track& a, const Track& b) {
    return a.value < b.value || (a.value == b.value && a.start > b.start);
  });
  if (best == tracks.end() || !std::isfinite(best->value))
    throw Error("estimation_failed", "no starting point produced a finite likelihood");

  EstimationResult res;
  res.spec = spec;
  res.stages = best->reports;
  res.best_start = best->start;
  VectorXd theta = best->theta;
  bool same_family = true;
  for (const auto& d : spec.densities) same_family = same_family && d.family == spec.densities.front().family;
  if (same_family) {
    try {
      theta = pack(identify_params(unpack(theta, spec), schedule.scheme), spec);
    } catch (const Error& e) {
      res.warnings.push_back(std::string("identification skipped: ") + e.what());
    }
  } else {
    res.warnings.push_back("identification skipped: mixed density families");
  }
  res.theta_hat = theta;
  res.T = static_cast<int>(data.rows());
  res.n_free = count_free_parameters(spec);
  const ScoreEval ev = evaluate(unpack(theta, spec), spec, y, true);
  res.loglik = ev.value;
  res.score_norm = ev.grad_free.size() ? ev.grad_free.lpNorm<Eigen::Infinity>() : 0.0;
  res.bic = bic(res.loglik, res.n_free, res.T);
  try {
    const Information info = information_and_stderr(theta, spec, y);
    res.stderr_ = info.stderr_;
    res.sandwich = info.sandwich;
    res.stderr_available = true;
  } catch (const Error& e) {
    res.stderr_ = VectorXd::Constant(res.n_free, std::nan(""));
    res.sandwich = MatrixXd::Constant(res.n_free, res.n_free, std::nan(""));
    res.warnings.push_back(std::string("standard errors unavailable: ") + e.what());
  }
  if (res.score_norm > 1e-4) res.warnings.push_back("score norm at the reported maximiser exceeds 1e-4");
  try {
    res.diagnostics = residual_diagnostics(residuals(theta, spec, y).eps);
  } catch (const Error& e) {
    res.warnings.push_back(std::string("diagnostics unavailable: ") + e.what());
  }
  return res;
}

}  // namespace svwhf
