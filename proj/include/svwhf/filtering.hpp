#pragma once

// Residuals eps_t(theta) = B^{-1} f(z)^{-1} s(z)^{-1} p(z)^{-1} a(z) y_t on a
// finite sample, zero padded at both ends, plus the derivative streams of
// u_t with respect to the system coefficients.

#include <Eigen/Dense>

#include <vector>

#include "svwhf/error.hpp"
#include "svwhf/model.hpp"

namespace svwhf {

/// T x n, row t contiguous.
using Series = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FilterSystem {
  int n = 1, p = 0, dp = 0, top = 0;
  std::vector<int> kap;
  std::vector<MatrixXd> a;   ///< a_1..a_p
  std::vector<MatrixXd> pc;  ///< p_0..p_dp
  std::vector<MatrixXd> f;   ///< f_0..f_top
  MatrixXd p0inv, f0inv, Binv;

  FilterSystem(const SvarmaParams& P, const SvarmaSpec& spec) {
    n = spec.n;
    p = spec.p;
    dp = spec.p_degree();
    kap = spec.kappas();
    a = P.a;
    pc = P.p;
    f = P.f(kap);
    top = static_cast<int>(f.size()) - 1;
    auto inv = [](const MatrixXd& m, const char* what) {
      Eigen::FullPivLU<MatrixXd> lu(m);
      if (!lu.isInvertible()) throw Error("singular_matrix", std::string(what) + " is singular");
      return MatrixXd(lu.inverse());
    };
    p0inv = inv(pc[0], "p0");
    f0inv = inv(f[0], "f0");
    Binv = inv(P.B, "B");
  }
};

struct ResidualSet {
  Series v;    ///< a(z) y
  Series w;    ///< p(z)^{-1} v
  Series x;    ///< s(z)^{-1} w
  Series u;    ///< f(z)^{-1} x
  Series eps;  ///< B^{-1} u
};

namespace detail {

// y -= M x for n x n column-major M
inline void sub_mv(const MatrixXd& M, const double* x, double* y, int n) {
  for (int c = 0; c < n; ++c) {
    const double xc = x[c];
    if (xc == 0.0) continue;
    const double* col = M.data() + static_cast<std::ptrdiff_t>(c) * n;
    for (int r = 0; r < n; ++r) y[r] -= col[r] * xc;
  }
}

// y = M x
inline void set_mv(const MatrixXd& M, const double* x, double* y, int n) {
  for (int r = 0; r < n; ++r) y[r] = 0.0;
  for (int c = 0; c < n; ++c) {
    const double xc = x[c];
    const double* col = M.data() + static_cast<std::ptrdiff_t>(c) * n;
    for (int r = 0; r < n; ++r) y[r] += col[r] * xc;
  }
}

}  // namespace detail

inline ResidualSet residuals(const FilterSystem& S, const Series& y) {
  const int n = S.n;
  const int T = static_cast<int>(y.rows());
  if (y.cols() != n) throw Error("dimension_mismatch", "data dimension differs from the spec");
  ResidualSet R;
  R.v = y;
  for (int t = 0; t < T; ++t)
    for (int i = 1; i <= S.p && i <= t; ++i) detail::sub_mv(S.a[i - 1], &y(t - i, 0), &R.v(t, 0), n);
  R.w.resize(T, n);
  std::vector<double> tmp(static_cast<std::size_t>(n));
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i) tmp[i] = R.v(t, i);
    for (int j = 1; j <= S.dp && j <= t; ++j) detail::sub_mv(S.pc[j], &R.w(t - j, 0), tmp.data(), n);
    detail::set_mv(S.p0inv, tmp.data(), &R.w(t, 0), n);
  }
  R.x = Series::Zero(T, n);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < n; ++i) {
      const int s = t + S.kap[i];
      if (s < T) R.x(t, i) = R.w(s, i);
    }
  R.u.resize(T, n);
  for (int t = T - 1; t >= 0; --t) {
    for (int i = 0; i < n; ++i) tmp[i] = R.x(t, i);
    for (int j = 1; j <= S.top && t + j < T; ++j) detail::sub_mv(S.f[j], &R.u(t + j, 0), tmp.data(), n);
    detail::set_mv(S.f0inv, tmp.data(), &R.u(t, 0), n);
  }
  R.eps.resize(T, n);
  for (int t = 0; t < T; ++t) detail::set_mv(S.Binv, &R.u(t, 0), &R.eps(t, 0), n);
  return R;
}

inline ResidualSet residuals(const SvarmaParams& P, const SvarmaSpec& spec, const Series& y) {
  return residuals(FilterSystem(P, spec), y);
}

inline ResidualSet residuals(const VectorXd& theta, const SvarmaSpec& spec, const Series& y) {
  return residuals(unpack(theta, spec), spec, y);
}

// ---------------------------------------------------------------------------
// Derivative streams
// ---------------------------------------------------------------------------

/// A system coefficient entry (row r, column c) of a_lag, p_lag or g_lag.
struct Coord {
  enum Block { a, p, g };
  Block block = a;
  int lag = 0;
  int r = 0;
  int c = 0;
};

/// Coordinates in full-tau order.
inline std::vector<Coord> tau_coords(const TauLayout& L) {
  std::vector<Coord> out;
  out.reserve(static_cast<std::size_t>(L.size()));
  auto add = [&](Coord::Block b, int lag) {
    for (int c = 0; c < L.n; ++c)
      for (int r = 0; r < L.n; ++r) out.push_back({b, lag, r, c});
  };
  for (int i = 1; i <= L.p; ++i) add(Coord::a, i);
  for (int j = 0; j <= L.dp; ++j) add(Coord::p, j);
  for (int m = 0; m <= L.kappa + 1; ++m) add(Coord::g, m);
  return out;
}

/// du_t / d coord for every coordinate; layout [(t * m + j) * n + i].
inline std::vector<double> sensitivities(const FilterSystem& S, const Series& y, const ResidualSet& R,
                                         const std::vector<Coord>& coords) {
  const int n = S.n;
  const int T = static_cast<int>(y.rows());
  const int m = static_cast<int>(coords.size());
  auto at = [&](std::vector<double>& v, int t, int j) { return v.data() + (static_cast<std::ptrdiff_t>(t) * m + j) * n; };
  std::vector<double> dw(static_cast<std::size_t>(T) * m * n, 0.0);
  std::vector<double> du(static_cast<std::size_t>(T) * m * n, 0.0);
  std::vector<double> tmp(static_cast<std::size_t>(n));
  // stage 2 with sources from a and p
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < m; ++j) {
      const Coord& cd = coords[static_cast<std::size_t>(j)];
      std::fill(tmp.begin(), tmp.end(), 0.0);
      if (cd.block == Coord::a) {
        if (t - cd.lag >= 0) tmp[cd.r] -= y(t - cd.lag, cd.c);
      } else if (cd.block == Coord::p) {
        if (t - cd.lag >= 0) tmp[cd.r] -= R.w(t - cd.lag, cd.c);
      } else {
        continue;
      }
      for (int l = 1; l <= S.dp && l <= t; ++l) detail::sub_mv(S.pc[l], at(dw, t - l, j), tmp.data(), n);
      detail::set_mv(S.p0inv, tmp.data(), at(dw, t, j), n);
    }
  }
  // stages 3 and 4
  for (int t = T - 1; t >= 0; --t) {
    for (int j = 0; j < m; ++j) {
      const Coord& cd = coords[static_cast<std::size_t>(j)];
      if (cd.block == Coord::g) {
        std::fill(tmp.begin(), tmp.end(), 0.0);
        const int js = S.kap[cd.r] - cd.lag;
        if (t + js >= 0 && t + js < T) tmp[cd.r] -= R.u(t + js, cd.c);
      } else {
        for (int i = 0; i < n; ++i) {
          const int s = t + S.kap[i];
          tmp[i] = s < T ? at(dw, s, j)[i] : 0.0;
        }
      }
      for (int l = 1; l <= S.top && t + l < T; ++l) detail::sub_mv(S.f[l], at(du, t + l, j), tmp.data(), n);
      detail::set_mv(S.f0inv, tmp.data(), at(du, t, j), n);
    }
  }
  return du;
}

}  // namespace svwhf
