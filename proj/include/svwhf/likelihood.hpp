#pragma once

// Approximate log-likelihood (average over t, maximised), its gradient, the
// per-observation scores, outer-product information and sandwich covariance.
//
// The mean gradient is obtained by a reverse pass through the four filter
// stages; per-observation scores use the forward derivative streams. Both
// differentiate exactly the truncated likelihood that loglik evaluates.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "svwhf/densities.hpp"
#include "svwhf/error.hpp"
#include "svwhf/filtering.hpp"
#include "svwhf/model.hpp"

namespace svwhf {

struct LikelihoodEval {
  double value = 0.0;  ///< L_T
  VectorXd per_obs;    ///< l_t
  VectorXd score;      ///< gradient over free coordinates (when requested)
};

namespace detail {

struct ComponentEval {
  Family family;
  std::optional<SgtConstants> sgt;
};

inline std::vector<ComponentEval> component_evals(const SvarmaParams& P, const SvarmaSpec& spec) {
  std::vector<ComponentEval> out;
  for (int i = 0; i < spec.n; ++i) {
    ComponentEval c{spec.densities[static_cast<std::size_t>(i)].family, std::nullopt};
    if (c.family == Family::sgt) c.sgt.emplace(P.lambda[static_cast<std::size_t>(i)]);
    out.push_back(c);
  }
  return out;
}

inline PointEval eval_component(const ComponentEval& c, double z, bool with_lambda) {
  switch (c.family) {
    case Family::gaussian: return PointEval{-0.5 * z * z - kLogSqrt2Pi, -z, {}};
    case Family::laplace:
      return PointEval{-std::numbers::sqrt2 * std::abs(z) - 0.5 * std::log(2.0),
                       z >= 0 ? -std::numbers::sqrt2 : std::numbers::sqrt2, {}};
    case Family::sgt: return sgt_eval(z, *c.sgt, with_lambda);
  }
  return {};
}

inline void require_valid(const SvarmaParams& P, const SvarmaSpec& spec) {
  const auto rep = validate(P, spec, false);
  if (!rep.filter_ok()) {
    std::string msg = "theta is not admissible:";
    for (const auto& m : rep.messages) msg += " " + m + ";";
    throw Error("invalid_theta", msg);
  }
}

// Constant part of l_t: -log|det f0| - log|det B| - sum log sigma.
inline double constant_term(const FilterSystem& S, const SvarmaParams& P) {
  return -std::log(std::abs(S.f[0].determinant())) - std::log(std::abs(P.B.determinant())) -
         P.sigma.array().log().sum();
}

}  // namespace detail

/// Sum of gradient entries over the tau entries sharing a free coordinate.
inline VectorXd project_to_free(const VectorXd& full, const ThetaLayout& TL) {
  const TauLayout& L = TL.tau;
  VectorXd g = VectorXd::Zero(TL.size());
  for (int e = 0; e < L.size(); ++e) {
    const Slot& s = L.slots[static_cast<std::size_t>(e)];
    if (s.kind == Slot::free) g(s.index) += full(e);
    else if (s.kind == Slot::tied) g(s.index) += s.coef * full(e);
  }
  g.tail(TL.size() - L.n_free()) = full.tail(TL.size() - L.n_free());
  return g;
}

/// Full coordinates: every tau entry, then beta, sigma, lambda.
inline int full_coordinate_count(const ThetaLayout& TL) { return TL.tau.size() + TL.size() - TL.tau.n_free(); }

/// N_full x N_free map from free to full coordinates.
inline MatrixXd free_to_full_map(const ThetaLayout& TL) {
  const TauLayout& L = TL.tau;
  const int nfull = full_coordinate_count(TL);
  MatrixXd M = MatrixXd::Zero(nfull, TL.size());
  for (int e = 0; e < L.size(); ++e) {
    const Slot& s = L.slots[static_cast<std::size_t>(e)];
    if (s.kind == Slot::free) M(e, s.index) = 1.0;
    else if (s.kind == Slot::tied) M(e, s.index) = s.coef;
  }
  const int rest = TL.size() - L.n_free();
  M.bottomRightCorner(rest, rest).setIdentity();
  return M;
}

/// Value of L_T and l_t; optionally the mean gradient (free coordinates and
/// full coordinates). Throws invalid_theta outside the admissible set.
struct ScoreEval {
  double value = 0.0;
  VectorXd per_obs;
  VectorXd grad_free;
  VectorXd grad_full;
};

inline ScoreEval evaluate(const SvarmaParams& P, const SvarmaSpec& spec, const Series& y, bool with_grad,
                          bool check = true) {
  if (check) detail::require_valid(P, spec);
  const FilterSystem S(P, spec);
  const ResidualSet R = residuals(S, y);
  const int n = spec.n;
  const int T = static_cast<int>(y.rows());
  if (T == 0) throw Error("empty_data", "no observations");
  const auto comps = detail::component_evals(P, spec);
  const double cst = detail::constant_term(S, P);
  ScoreEval out;
  out.per_obs.resize(T);
  Series phi(T, n);  // e_x / sigma
  VectorXd dsig = VectorXd::Zero(n);
  std::vector<VectorXd> dlam(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) dlam[static_cast<std::size_t>(i)] = VectorXd::Zero(P.lambda[static_cast<std::size_t>(i)].size());
  double total = 0.0;
  for (int t = 0; t < T; ++t) {
    double lt = cst;
    for (int i = 0; i < n; ++i) {
      const double sg = P.sigma(i);
      const double e = R.eps(t, i);
      const PointEval pe = detail::eval_component(comps[static_cast<std::size_t>(i)], e / sg, with_grad);
      lt += pe.logf;
      if (with_grad) {
        phi(t, i) = pe.dx / sg;
        dsig(i) += -pe.dx * e / (sg * sg);
        if (comps[static_cast<std::size_t>(i)].family == Family::sgt)
          for (int k = 0; k < 3; ++k) dlam[static_cast<std::size_t>(i)](k) += pe.dlam[static_cast<std::size_t>(k)];
      }
    }
    out.per_obs(t) = lt;
    total += lt;
  }
  out.value = total / T;
  if (!std::isfinite(out.value)) throw Error("non_finite", "log-likelihood is not finite");
  if (!with_grad) return out;

  const ThetaLayout TL = make_theta_layout(spec);
  const TauLayout& L = TL.tau;
  const double invT = 1.0 / T;
  // dL/du_t = B^{-T} phi_t / T
  Series ubar(T, n);
  const MatrixXd BinvT = S.Binv.transpose();
  for (int t = 0; t < T; ++t) {
    detail::set_mv(BinvT, &phi(t, 0), &ubar(t, 0), n);
    for (int i = 0; i < n; ++i) ubar(t, i) *= invT;
  }
  // stage 4 reverse
  const int top = S.top;
  std::vector<MatrixXd> fbar(static_cast<std::size_t>(top) + 2, MatrixXd::Zero(n, n));  // index l+1 for l = -1..top
  Series xbar(T, n);
  const MatrixXd f0invT = S.f0inv.transpose();
  std::vector<MatrixXd> fT;
  for (const auto& m : S.f) fT.push_back(m.transpose());
  std::vector<double> rt(static_cast<std::size_t>(n));
  for (int t = 0; t < T; ++t) {
    detail::set_mv(f0invT, &ubar(t, 0), rt.data(), n);
    for (int i = 0; i < n; ++i) xbar(t, i) = rt[i];
    for (int l = 1; l <= top && t + l < T; ++l) detail::sub_mv(fT[l], rt.data(), &ubar(t + l, 0), n);
    for (int l = -1; l <= top; ++l) {
      const int s = t + l;
      if (s < 0 || s >= T) continue;
      MatrixXd& fb = fbar[static_cast<std::size_t>(l + 1)];
      for (int c = 0; c < n; ++c) {
        const double us = R.u(s, c);
        for (int r = 0; r < n; ++r) fb(r, c) -= rt[r] * us;
      }
    }
  }
  fbar[1] -= S.f0inv.transpose();
  // stage 3 reverse
  Series wbar = Series::Zero(T, n);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < n; ++i) {
      const int s = t + S.kap[i];
      if (s < T) wbar(s, i) += xbar(t, i);
    }
  // stage 2 reverse
  std::vector<MatrixXd> pbar(static_cast<std::size_t>(S.dp) + 1, MatrixXd::Zero(n, n));
  std::vector<MatrixXd> pT;
  for (const auto& m : S.pc) pT.push_back(m.transpose());
  const MatrixXd p0invT = S.p0inv.transpose();
  Series vbar(T, n);
  for (int t = T - 1; t >= 0; --t) {
    detail::set_mv(p0invT, &wbar(t, 0), rt.data(), n);
    for (int i = 0; i < n; ++i) vbar(t, i) = rt[i];
    for (int l = 1; l <= S.dp && t - l >= 0; ++l) detail::sub_mv(pT[l], rt.data(), &wbar(t - l, 0), n);
    for (int l = 0; l <= S.dp && t - l >= 0; ++l) {
      MatrixXd& pb = pbar[static_cast<std::size_t>(l)];
      for (int c = 0; c < n; ++c) {
        const double ws = R.w(t - l, c);
        for (int r = 0; r < n; ++r) pb(r, c) -= rt[r] * ws;
      }
    }
  }
  // stage 1 reverse
  std::vector<MatrixXd> abar(static_cast<std::size_t>(spec.p), MatrixXd::Zero(n, n));
  for (int i = 1; i <= spec.p; ++i) {
    MatrixXd& ab = abar[static_cast<std::size_t>(i - 1)];
    for (int t = i; t < T; ++t)
      for (int c = 0; c < n; ++c) {
        const double yc = y(t - i, c);
        for (int r = 0; r < n; ++r) ab(r, c) -= vbar(t, r) * yc;
      }
  }

  const int nfull = full_coordinate_count(TL);
  VectorXd full = VectorXd::Zero(nfull);
  auto put = [&](int off, const MatrixXd& m) { Eigen::Map<MatrixXd>(full.data() + off, n, n) = m; };
  for (int i = 1; i <= spec.p; ++i) put(L.a_off(i), abar[static_cast<std::size_t>(i - 1)]);
  for (int j = 0; j <= S.dp; ++j) put(L.p_off(j), pbar[static_cast<std::size_t>(j)]);
  for (int m = 0; m <= L.kappa + 1; ++m) {
    MatrixXd gb(n, n);
    for (int r = 0; r < n; ++r) {
      const int js = S.kap[r] - m;
      gb.row(r) = fbar[static_cast<std::size_t>(js + 1)].row(r);
    }
    put(L.g_off(m), gb);
  }
  // beta
  int idx = L.size();
  MatrixXd bsum = MatrixXd::Zero(n, n);  // sum_t (B^{-T} phi_t) eps_t'
  for (int t = 0; t < T; ++t) {
    const VectorXd z = BinvT * phi.row(t).transpose();
    bsum.noalias() += z * R.eps.row(t);
  }
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r)
      if (r != c) full(idx++) = -bsum(r, c) * invT - S.Binv(c, r);
  for (int i = 0; i < n; ++i) full(idx++) = dsig(i) * invT - 1.0 / P.sigma(i);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < dlam[static_cast<std::size_t>(i)].size(); ++k) full(idx++) = dlam[static_cast<std::size_t>(i)](k) * invT;
  out.grad_full = full;
  out.grad_free = project_to_free(full, TL);
  return out;
}

inline Series as_series(const MatrixXd& y) { return Series(y); }

inline LikelihoodEval loglik(const VectorXd& theta, const SvarmaSpec& spec, const Series& y) {
  const auto e = evaluate(unpack(theta, spec), spec, y, false);
  return LikelihoodEval{e.value, e.per_obs, VectorXd()};
}

inline VectorXd score(const VectorXd& theta, const SvarmaSpec& spec, const Series& y) {
  return evaluate(unpack(theta, spec), spec, y, true).grad_free;
}

/// T x N_full matrix of l_{theta,t} over full coordinates.
inline MatrixXd score_contributions(const SvarmaParams& P, const SvarmaSpec& spec, const Series& y) {
  detail::require_valid(P, spec);
  const FilterSystem S(P, spec);
  const ResidualSet R = residuals(S, y);
  const int n = spec.n;
  const int T = static_cast<int>(y.rows());
  const ThetaLayout TL = make_theta_layout(spec);
  const TauLayout& L = TL.tau;
  const auto coords = tau_coords(L);
  const int m = static_cast<int>(coords.size());
  const std::vector<double> du = sensitivities(S, y, R, coords);
  const auto comps = detail::component_evals(P, spec);
  const int nfull = full_coordinate_count(TL);
  MatrixXd out(T, nfull);
  const MatrixXd BinvT = S.Binv.transpose();
  // log|det f0| term per coordinate
  VectorXd logdet(m);
  for (int j = 0; j < m; ++j) {
    const Coord& cd = coords[static_cast<std::size_t>(j)];
    logdet(j) = (cd.block == Coord::g && S.kap[cd.r] - cd.lag == 0) ? -S.f0inv(cd.c, cd.r) : 0.0;
  }
  VectorXd phi(n);
  for (int t = 0; t < T; ++t) {
    int col = m;
    std::vector<PointEval> pes;
    for (int i = 0; i < n; ++i) {
      const double sg = P.sigma(i);
      pes.push_back(detail::eval_component(comps[static_cast<std::size_t>(i)], R.eps(t, i) / sg, true));
      phi(i) = pes.back().dx / sg;
    }
    const VectorXd z = BinvT * phi;
    for (int j = 0; j < m; ++j) {
      const double* d = du.data() + (static_cast<std::ptrdiff_t>(t) * m + j) * n;
      double s = logdet(j);
      for (int i = 0; i < n; ++i) s += z(i) * d[i];
      out(t, j) = s;
    }
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r)
        if (r != c) out(t, col++) = -z(r) * R.eps(t, c) - S.Binv(c, r);
    for (int i = 0; i < n; ++i) out(t, col++) = -phi(i) * R.eps(t, i) / P.sigma(i) - 1.0 / P.sigma(i);
    for (int i = 0; i < n; ++i)
      if (comps[static_cast<std::size_t>(i)].family == Family::sgt)
        for (int k = 0; k < 3; ++k) out(t, col++) = pes[static_cast<std::size_t>(i)].dlam[static_cast<std::size_t>(k)];
  }
  return out;
}

struct Information {
  MatrixXd opg_full;   ///< I_0 over full coordinates
  MatrixXd sandwich;   ///< S over free coordinates
  MatrixXd sandwich_full;
  VectorXd stderr_;    ///< sqrt(diag(S)/T), free coordinates
  double score_sup_norm = 0.0;
};

/// I_0 by outer products, S by the bordered inverse with R, standard errors.
inline Information information_and_stderr(const VectorXd& theta, const SvarmaSpec& spec, const Series& y) {
  const SvarmaParams P = unpack(theta, spec);
  const ThetaLayout TL = make_theta_layout(spec);
  const MatrixXd sc = score_contributions(P, spec, y);
  const int T = static_cast<int>(y.rows());
  const int N = static_cast<int>(sc.cols());
  Information info;
  info.opg_full = sc.transpose() * sc / T;
  const VectorXd mean_full = sc.colwise().mean().transpose();
  info.score_sup_norm = project_to_free(mean_full, TL).cwiseAbs().maxCoeff();
  auto [Rt, rt] = TL.tau.restrictions();
  const int nr = static_cast<int>(Rt.rows());
  MatrixXd A = MatrixXd::Zero(N + nr, N + nr);
  A.topLeftCorner(N, N) = info.opg_full;
  A.block(N, 0, nr, Rt.cols()) = Rt;
  A.block(0, N, Rt.cols(), nr) = Rt.transpose();
  // Jacobi equilibration so that badly scaled coordinates do not pass for
  // singular directions
  VectorXd D = VectorXd::Ones(N + nr);
  for (int i = 0; i < N; ++i)
    if (info.opg_full(i, i) > 0) D(i) = 1.0 / std::sqrt(info.opg_full(i, i));
  const MatrixXd As = D.asDiagonal() * A * D.asDiagonal();
  Eigen::JacobiSVD<MatrixXd> svd(As);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= 1e-12 * sv(0))
    throw Error("non_identifiable", "bordered information matrix is singular (near non-identifiability)");
  Eigen::PartialPivLU<MatrixXd> lu(As);
  const MatrixXd Ai = D.asDiagonal() * lu.inverse() * D.asDiagonal();
  MatrixXd mid = MatrixXd::Zero(N + nr, N + nr);
  mid.topLeftCorner(N, N) = info.opg_full;
  const MatrixXd Sfull = (Ai * mid * Ai).topLeftCorner(N, N);
  info.sandwich_full = 0.5 * (Sfull + Sfull.transpose());
  // free coordinate i sits at full index free_to_tau[i] (tau) or offset (rest)
  const int nf = TL.size();
  std::vector<int> pos(static_cast<std::size_t>(nf));
  for (int i = 0; i < TL.tau.n_free(); ++i) pos[static_cast<std::size_t>(i)] = TL.tau.free_to_tau[static_cast<std::size_t>(i)];
  for (int i = TL.tau.n_free(); i < nf; ++i) pos[static_cast<std::size_t>(i)] = TL.tau.size() + (i - TL.tau.n_free());
  info.sandwich.resize(nf, nf);
  for (int i = 0; i < nf; ++i)
    for (int j = 0; j < nf; ++j) info.sandwich(i, j) = info.sandwich_full(pos[static_cast<std::size_t>(i)], pos[static_cast<std::size_t>(j)]);
  info.stderr_.resize(nf);
  for (int i = 0; i < nf; ++i) info.stderr_(i) = std::sqrt(std::max(0.0, info.sandwich(i, i)) / T);
  return info;
}

}  // namespace svwhf
