#pragma once

// Wiener-Hopf factorisation b(z) = p(z) s(z) f(z) of square polynomial
// matrices: exact construction through the Smith form, the canonical
// representative, the two normalisations, and real Blaschke mirroring.

#include <boost/multiprecision/gmp.hpp>

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "svwhf/error.hpp"
#include "svwhf/polymat.hpp"
#include "svwhf/rational.hpp"

namespace svwhf {

/// Generic partial indices: k entries equal to kappa+1 followed by n-k equal to kappa.
struct PartialIndices {
  int kappa = 0;
  int k = 0;
  int n = 1;

  std::vector<int> vector() const {
    std::vector<int> v(static_cast<std::size_t>(n), kappa);
    for (int i = 0; i < k; ++i) v[static_cast<std::size_t>(i)] = kappa + 1;
    return v;
  }
  int zeros_inside() const { return n * kappa + k; }

  /// 0 <= kappa <= q-1 with 0 <= k < n, or (kappa,k) = (q,0).
  bool feasible(int q) const {
    if (n < 1 || k < 0 || k >= n || kappa < 0) return false;
    return kappa <= q - 1 || (kappa == q && k == 0);
  }

  static std::optional<PartialIndices> from_vector(const std::vector<int>& v) {
    if (v.empty()) return std::nullopt;
    const int n = static_cast<int>(v.size());
    const int lo = v.back();
    int k = 0;
    while (k < n && v[static_cast<std::size_t>(k)] == lo + 1) ++k;
    for (int i = k; i < n; ++i)
      if (v[static_cast<std::size_t>(i)] != lo) return std::nullopt;
    if (k == n) return std::nullopt;
    return PartialIndices{lo, k, n};
  }

  friend bool operator==(const PartialIndices&, const PartialIndices&) = default;
};

/// All feasible (kappa,k) for dimension n and MA order q, kappa-major.
inline std::vector<PartialIndices> feasible_indices(int n, int q) {
  std::vector<PartialIndices> out;
  for (int kappa = 0; kappa < q; ++kappa)
    for (int k = 0; k < n; ++k) out.push_back({kappa, k, n});
  out.push_back({q, 0, n});
  return out;
}

enum class WhfMode { raw, canonical, natural, b0_identity };

inline std::string to_string(WhfMode m) {
  switch (m) {
    case WhfMode::raw: return "raw";
    case WhfMode::canonical: return "canonical";
    case WhfMode::natural: return "natural";
    case WhfMode::b0_identity: return "b0_identity";
  }
  return "raw";
}

inline WhfMode parse_whf_mode(const std::string& s) {
  if (s == "raw") return WhfMode::raw;
  if (s == "canonical") return WhfMode::canonical;
  if (s == "natural") return WhfMode::natural;
  if (s == "b0_identity") return WhfMode::b0_identity;
  throw Error("invalid_config", "unknown normalization mode '" + s + "'");
}

template <class S>
struct WhfTriple {
  PolyMat<S> p;
  /// Row-wise powers of s(z), descending.
  std::vector<int> index_vector;
  /// Nonpositive powers only: f0 + f1 z^-1 + ...
  LaurentMat<S> f;
  WhfMode mode = WhfMode::raw;
  /// Set when canonicalisation had to reorder the rows of b: compose() then
  /// equals rows row_permutation[0], row_permutation[1], ... of the original b.
  std::vector<int> row_permutation;

  int n() const { return p.rows(); }
  std::optional<PartialIndices> indices() const { return PartialIndices::from_vector(index_vector); }

  /// f coefficient at z^{-j}.
  Matrix<S> f_coeff(int j) const { return f.coeff(-j); }
};

/// p(z) s(z) f(z); throws if negative powers survive.
template <class S>
PolyMat<S> compose(const WhfTriple<S>& t) {
  const LaurentMat<S> prod = LaurentMat<S>(t.p) * shift_matrix<S>(t.index_vector) * t.f;
  auto poly = prod.to_polymat();
  if (!poly) throw Error("invalid_triple", "p s f keeps negative powers of z");
  return *poly;
}

// ---------------------------------------------------------------------------
// Smith form over Q[z]
// ---------------------------------------------------------------------------

struct SmithForm {
  PolyMat<Rational> U;       ///< unimodular
  PolyMat<Rational> Lambda;  ///< diagonal, monic invariant factors
  PolyMat<Rational> V;       ///< unimodular
};

namespace detail {

using PolyQ = Poly<Rational>;
using Table = std::vector<std::vector<PolyQ>>;

inline PolyMat<Rational> table_to_polymat(const Table& t, int rows, int cols) {
  if (rows == 0 || cols == 0) return PolyMat<Rational>(rows, cols);
  return PolyMat<Rational>::from_entries(t);
}

}  // namespace detail

/// b = U Lambda V with U, V unimodular and Lambda = diag(l_1 | l_2 | ...).
inline SmithForm smith_form(const PolyMat<Rational>& b) {
  using detail::PolyQ;
  const int m = b.rows();
  const int n = b.cols();
  detail::Table L = b.entries();
  detail::Table U(static_cast<std::size_t>(m), std::vector<PolyQ>(static_cast<std::size_t>(m)));
  detail::Table V(static_cast<std::size_t>(n), std::vector<PolyQ>(static_cast<std::size_t>(n)));
  for (int i = 0; i < m; ++i) U[i][i] = PolyQ::constant(1);
  for (int i = 0; i < n; ++i) V[i][i] = PolyQ::constant(1);

  auto swap_rows = [&](int i, int j) {
    std::swap(L[i], L[j]);
    for (int r = 0; r < m; ++r) std::swap(U[r][i], U[r][j]);
  };
  auto swap_cols = [&](int i, int j) {
    for (int r = 0; r < m; ++r) std::swap(L[r][i], L[r][j]);
    std::swap(V[i], V[j]);
  };
  // row_i -= q * row_t
  auto row_axpy = [&](int i, int t, const PolyQ& q) {
    for (int c = 0; c < n; ++c) L[i][c] -= q * L[t][c];
    for (int r = 0; r < m; ++r) U[r][t] += q * U[r][i];
  };
  // col_j -= q * col_t
  auto col_axpy = [&](int j, int t, const PolyQ& q) {
    for (int r = 0; r < m; ++r) L[r][j] -= q * L[r][t];
    for (int c = 0; c < n; ++c) V[t][c] += q * V[j][c];
  };

  const int steps = std::min(m, n);
  for (int t = 0; t < steps; ++t) {
    while (true) {
      int bi = -1, bj = -1, bd = 0;
      for (int i = t; i < m; ++i)
        for (int j = t; j < n; ++j)
          if (!L[i][j].is_zero() && (bi < 0 || L[i][j].degree() < bd)) {
            bi = i;
            bj = j;
            bd = L[i][j].degree();
          }
      if (bi < 0) break;
      if (bi != t) swap_rows(t, bi);
      if (bj != t) swap_cols(t, bj);
      bool clean = true;
      for (int i = t + 1; i < m; ++i) {
        if (L[i][t].is_zero()) continue;
        auto [q, r] = divmod(L[i][t], L[t][t]);
        row_axpy(i, t, q);
        if (!r.is_zero()) clean = false;
      }
      for (int j = t + 1; j < n; ++j) {
        if (L[t][j].is_zero()) continue;
        auto [q, r] = divmod(L[t][j], L[t][t]);
        col_axpy(j, t, q);
        if (!r.is_zero()) clean = false;
      }
      if (!clean) continue;
      int bad = -1;
      for (int i = t + 1; i < m && bad < 0; ++i)
        for (int j = t + 1; j < n; ++j)
          if (!divmod(L[i][j], L[t][t]).second.is_zero()) {
            bad = i;
            break;
          }
      if (bad < 0) break;
      // row_t += row_bad
      row_axpy(t, bad, PolyQ::constant(-1));
    }
    if (!L[t][t].is_zero()) {
      const Rational lead = L[t][t].leading();
      for (int c = 0; c < n; ++c) L[t][c] = PolyQ::constant(Rational(1) / lead) * L[t][c];
      for (int r = 0; r < m; ++r) U[r][t] = PolyQ::constant(lead) * U[r][t];
    }
  }
  return SmithForm{detail::table_to_polymat(U, m, m), detail::table_to_polymat(L, m, n),
                   detail::table_to_polymat(V, n, n)};
}

// ---------------------------------------------------------------------------
// Root location in exact arithmetic
// ---------------------------------------------------------------------------

namespace detail {

using Mpf = boost::multiprecision::mpf_float_100;

struct MpComplex {
  Mpf re, im;
};

inline MpComplex mp_mul(const MpComplex& a, const MpComplex& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline MpComplex mp_add(const MpComplex& a, const MpComplex& b) { return {a.re + b.re, a.im + b.im}; }
inline MpComplex mp_div(const MpComplex& a, const MpComplex& b) {
  const Mpf d = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}
inline Mpf mp_abs2(const MpComplex& a) { return a.re * a.re + a.im * a.im; }

// Roots of a square-free rational polynomial to ~100 digits.
inline std::vector<MpComplex> mp_roots(const Poly<Rational>& f) {
  std::vector<double> cd;
  for (const auto& c : f.coeffs()) cd.push_back(to_double(c));
  const auto approx = companion_roots(cd);
  std::vector<Mpf> c;
  for (const auto& x : f.coeffs()) c.push_back(Mpf(x));
  std::vector<MpComplex> out;
  for (const auto& z0 : approx) {
    MpComplex z{Mpf(z0.real()), Mpf(z0.imag())};
    for (int it = 0; it < 60; ++it) {
      MpComplex pv{c.back(), Mpf(0)};
      MpComplex dp{Mpf(0), Mpf(0)};
      for (int j = static_cast<int>(c.size()) - 2; j >= 0; --j) {
        dp = mp_add(mp_mul(dp, z), pv);
        pv = mp_add(mp_mul(pv, z), MpComplex{c[static_cast<std::size_t>(j)], Mpf(0)});
      }
      if (mp_abs2(dp) == 0) break;
      const MpComplex step = mp_div(pv, dp);
      z = {z.re - step.re, z.im - step.im};
      if (mp_abs2(step) < Mpf("1e-190") * (1 + mp_abs2(z))) break;
    }
    out.push_back(z);
  }
  return out;
}

// Continued-fraction convergent of an exact rational within tol.
inline Rational rationalize_exact(const Rational& x, const Rational& tol) {
  Integer h_prev(1), h_prev2(0), k_prev(0), k_prev2(1);
  Rational rest = x;
  for (int iter = 0; iter < 400; ++iter) {
    const Integer num = numerator(rest);
    const Integer den = denominator(rest);
    Integer a = num / den;
    if (num < 0 && a * den != num) a -= 1;
    const Integer h = a * h_prev + h_prev2;
    const Integer k = a * k_prev + k_prev2;
    const Rational approx(h, k);
    const Rational diff = approx - x;
    if ((diff < 0 ? Rational(-diff) : diff) <= tol) return approx;
    const Rational frac = rest - Rational(a);
    if (frac == 0) return approx;
    rest = Rational(1) / frac;
    h_prev2 = h_prev;
    h_prev = h;
    k_prev2 = k_prev;
    k_prev = k;
  }
  return x;
}

// Monic factor of a square-free f collecting the roots with |z| < 1.
inline Poly<Rational> inside_factor(const Poly<Rational>& f) {
  if (f.degree() <= 0) return Poly<Rational>::constant(1);
  const auto rs = mp_roots(f);
  std::vector<MpComplex> inside;
  for (const auto& r : rs)
    if (mp_abs2(r) < 1) inside.push_back(r);
  if (inside.empty()) return Poly<Rational>::constant(1);
  if (inside.size() == rs.size()) return f.monic();
  std::vector<MpComplex> c{MpComplex{Mpf(1), Mpf(0)}};
  for (const auto& r : inside) {
    std::vector<MpComplex> next(c.size() + 1, MpComplex{Mpf(0), Mpf(0)});
    for (std::size_t j = 0; j < c.size(); ++j) {
      next[j + 1] = mp_add(next[j + 1], c[j]);
      next[j] = mp_add(next[j], mp_mul(c[j], MpComplex{-r.re, -r.im}));
    }
    c = std::move(next);
  }
  std::vector<Rational> coeffs;
  for (const auto& x : c) {
    const Rational exact(x.re);
    const Rational scale = 1 + (exact < 0 ? Rational(-exact) : exact);
    coeffs.push_back(rationalize_exact(exact, Rational(1, Integer("1000000000000000000000000000000000000000000000000000000000000")) * scale));
  }
  Poly<Rational> h(std::move(coeffs));
  if (!divmod(f.monic(), h).second.is_zero())
    throw Error("irrational_split",
                "the factor of det b(z) carrying the zeros inside the unit circle has irrational coefficients; "
                "the exact construction cannot represent it");
  return h;
}

// Roots of a rational polynomial with |z| = 1 exactly (up to 1e-30).
inline bool has_unit_circle_root(const Poly<Rational>& d) {
  if (d.is_zero()) return false;
  if (d.eval_exact(Rational(1)) == 0 || d.eval_exact(Rational(-1)) == 0) return true;
  std::vector<Rational> shifted(d.coeffs().begin() + d.valuation(), d.coeffs().end());
  const Poly<Rational> core(std::move(shifted));
  const Poly<Rational> g = gcd(core, core.reversed());
  if (g.degree() <= 0) return false;
  for (const auto& part : squarefree_decomposition(g)) {
    if (part.degree() <= 0) continue;
    for (const auto& r : mp_roots(part)) {
      const Mpf gap = abs(mp_abs2(r) - 1);
      if (gap < Mpf("1e-30")) return true;
    }
  }
  return false;
}

// Splits a monic polynomial into (outside part, inside part) with inside part
// holding z^m and every root strictly inside the unit circle.
inline std::pair<Poly<Rational>, Poly<Rational>> split_by_unit_circle(const Poly<Rational>& lam) {
  if (lam.degree() <= 0) return {lam, Poly<Rational>::constant(1)};
  const int m = lam.valuation();
  std::vector<Rational> shifted(lam.coeffs().begin() + m, lam.coeffs().end());
  const Poly<Rational> core(std::move(shifted));
  Poly<Rational> inside = Poly<Rational>::monomial(m, Rational(1));
  const auto parts = squarefree_decomposition(core);
  for (std::size_t j = 0; j < parts.size(); ++j) {
    const Poly<Rational> h = inside_factor(parts[j]);
    for (std::size_t e = 0; e <= j; ++e) inside *= h;
  }
  auto [outside, rem] = divmod(lam, inside);
  if (!rem.is_zero()) throw Error("numerical_error", "inside factor does not divide the invariant factor");
  return {outside, inside};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

/// Row-reduces g in place by unimodular row operations w(z) and applies the
/// inverse column operations to p so that p g is unchanged.
template <class S>
void row_reduce(std::vector<std::vector<Poly<S>>>& g, std::vector<std::vector<Poly<S>>>& p) {
  const int n = static_cast<int>(g.size());
  for (int guard = 0; guard < 10000; ++guard) {
    std::vector<int> deg(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) deg[i] = std::max(deg[i], g[i][j].degree());
    Matrix<S> lead = Matrix<S>::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) lead(i, j) = g[i][j][deg[i]];
    // left null vector c' lead = 0 by exact elimination on lead'
    Matrix<S> a = lead.transpose();
    std::vector<int> pivcol;
    int row = 0;
    for (int col = 0; col < n && row < n; ++col) {
      int piv = -1;
      for (int r = row; r < n; ++r)
        if (!is_zero(a(r, col))) {
          piv = r;
          break;
        }
      if (piv < 0) continue;
      a.row(row).swap(a.row(piv));
      const S inv = S(1) / a(row, col);
      a.row(row) *= inv;
      for (int r = 0; r < n; ++r)
        if (r != row && !is_zero(a(r, col))) a.row(r) -= a(r, col) * a.row(row);
      pivcol.push_back(col);
      ++row;
    }
    if (row == n) return;
    int freecol = 0;
    while (std::find(pivcol.begin(), pivcol.end(), freecol) != pivcol.end()) ++freecol;
    std::vector<S> c(static_cast<std::size_t>(n), S(0));
    c[static_cast<std::size_t>(freecol)] = S(1);
    for (std::size_t r = 0; r < pivcol.size(); ++r) c[static_cast<std::size_t>(pivcol[r])] = -a(static_cast<Eigen::Index>(r), freecol);
    int target = -1;
    for (int i = 0; i < n; ++i)
      if (!is_zero(c[i]) && (target < 0 || deg[i] > deg[target])) target = i;
    if (deg[target] < 0) throw Error("singular_matrix", "cannot row-reduce a matrix with a zero row");
    // h_i = c_i z^{d_t - d_i} / c_t ; new row_t = sum_i h_i row_i
    std::vector<Poly<S>> h(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      if (!is_zero(c[i]) && deg[i] >= 0) h[i] = Poly<S>::monomial(deg[target] - deg[i], c[i] / c[target]);
    std::vector<Poly<S>> newrow(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (!h[i].is_zero()) newrow[j] += h[i] * g[i][j];
    g[target] = newrow;
    // p <- p (I - e_t (h - e_t)')
    for (int r = 0; r < n; ++r) {
      const Poly<S> pt = p[r][target];
      for (int i = 0; i < n; ++i)
        if (i != target && !h[i].is_zero()) p[r][i] -= pt * h[i];
    }
  }
  throw Error("numerical_error", "row reduction did not terminate");
}

/// Exact WHF of a square rational b(z) via the Smith form. Mode raw.
inline WhfTriple<Rational> smith_whf_factorize(const PolyMat<Rational>& b) {
  if (!b.is_square()) throw Error("dimension_mismatch", "WHF needs a square matrix");
  const int n = b.rows();
  const Poly<Rational> d = det_poly(b);
  if (d.is_zero()) throw Error("singular_matrix", "det b(z) is identically zero");
  if (detail::has_unit_circle_root(d)) throw Error("unit_circle_zero", "det b(z) has a zero on the unit circle");

  const SmithForm sf = smith_form(b);
  auto U = sf.U.entries();
  auto V = sf.V.entries();
  std::vector<Poly<Rational>> lam_p(static_cast<std::size_t>(n)), lam_f(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto [outside, inside] = detail::split_by_unit_circle(sf.Lambda.entry(i, i));
    lam_p[i] = outside;
    lam_f[i] = inside;
  }
  // p = U Lambda_p (scale columns), g = Lambda_f V (scale rows)
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) U[r][c] *= lam_p[c];
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) V[r][c] = lam_f[r] * V[r][c];
  row_reduce(V, U);

  std::vector<int> deg(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) deg[i] = std::max(deg[i], V[i][j].degree());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int c) { return deg[a] > deg[c]; });
  detail::Table g(static_cast<std::size_t>(n)), p(static_cast<std::size_t>(n), std::vector<Poly<Rational>>(static_cast<std::size_t>(n)));
  std::vector<int> kap(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    g[i] = V[order[i]];
    kap[i] = deg[order[i]];
    for (int r = 0; r < n; ++r) p[r][i] = U[r][order[i]];
  }
  const int top = kap.empty() ? 0 : kap.front();
  std::vector<MatrixXq> fc(static_cast<std::size_t>(top) + 1, MatrixXq::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int e = 0; e <= g[i][j].degree(); ++e) fc[static_cast<std::size_t>(top - (kap[i] - e))](i, j) = g[i][j][e];
  WhfTriple<Rational> t;
  t.p = PolyMat<Rational>::from_entries(p);
  t.index_vector = kap;
  t.f = LaurentMat<Rational>(-top, std::move(fc));
  t.mode = WhfMode::raw;
  return t;
}

/// Generic (kappa,k) from the number of det-b zeros strictly inside the unit
/// circle. Agrees with the exact indices only for generic b.
template <class S>
PartialIndices generic_indices_from_root_count(const PolyMat<S>& b) {
  if (!b.is_square()) throw Error("dimension_mismatch", "partial indices need a square matrix");
  const auto rs = roots_det(b);
  for (const auto& r : rs)
    if (r.on_unit_circle) throw Error("unit_circle_zero", "det b(z) has a zero within 1e-8 of the unit circle");
  const int nin = count_roots_inside(rs);
  const int n = b.rows();
  return PartialIndices{nin / n, nin % n, n};
}

// ---------------------------------------------------------------------------
// Canonical representative and normalisations
// ---------------------------------------------------------------------------

struct CanonicalizeOptions {
  /// Reorder the rows of b when the leading k x k block of p0 is singular,
  /// choosing the rows with the largest |det| minor. Off by default.
  bool allow_row_permutation = false;
};

namespace detail {

template <class S>
Matrix<S> inverse(const Matrix<S>& m) {
  const int n = static_cast<int>(m.rows());
  if constexpr (ScalarOps<S>::exact) {
    Matrix<S> a = m;
    Matrix<S> inv = Matrix<S>::Identity(n, n);
    for (int col = 0; col < n; ++col) {
      int piv = -1;
      for (int r = col; r < n; ++r)
        if (!is_zero(a(r, col))) {
          piv = r;
          break;
        }
      if (piv < 0) throw Error("singular_matrix", "matrix is singular");
      a.row(col).swap(a.row(piv));
      inv.row(col).swap(inv.row(piv));
      const S s = S(1) / a(col, col);
      a.row(col) *= s;
      inv.row(col) *= s;
      for (int r = 0; r < n; ++r) {
        if (r == col || is_zero(a(r, col))) continue;
        const S fac = a(r, col);
        a.row(r) -= fac * a.row(col);
        inv.row(r) -= fac * inv.row(col);
      }
    }
    return inv;
  } else {
    Eigen::FullPivLU<Matrix<double>> lu(m);
    if (!lu.isInvertible()) throw Error("singular_matrix", "matrix is singular");
    return lu.inverse();
  }
}

template <class S>
S determinant(const Matrix<S>& m) {
  if constexpr (ScalarOps<S>::exact) {
    const auto d = det_poly(PolyMat<S>::constant(m));
    return d[0];
  } else {
    return m.determinant();
  }
}

template <class S>
bool singular(const Matrix<S>& m) {
  if (m.rows() == 0) return false;
  if constexpr (ScalarOps<S>::exact) {
    return is_zero(determinant(m));
  } else {
    Eigen::JacobiSVD<Matrix<double>> svd(m);
    const auto& sv = svd.singularValues();
    return sv(sv.size() - 1) <= 1e-12 * std::max(1.0, sv(0));
  }
}

// Stacked matrix with rows 1..k of f_{kappa+1} over rows k+1..n of f_kappa.
template <class S>
Matrix<S> stacked_top(const WhfTriple<S>& t, const PartialIndices& pi) {
  Matrix<S> m(pi.n, pi.n);
  for (int i = 0; i < pi.n; ++i) m.row(i) = t.f_coeff(i < pi.k ? pi.kappa + 1 : pi.kappa).row(i);
  return m;
}

template <class S>
LaurentMat<S> right_multiply(const LaurentMat<S>& f, const Matrix<S>& m) {
  return f * LaurentMat<S>(PolyMat<S>::constant(m));
}

}  // namespace detail

/// The unique representative with p0 = [[I,0],[p0_21,I]] and p1 block 12 = 0
/// (p0 = I when k = 0). Composition is preserved.
template <class S>
WhfTriple<S> canonicalize(const WhfTriple<S>& t, const CanonicalizeOptions& opt = {}) {
  const auto pi_opt = t.indices();
  if (!pi_opt) throw Error("non_generic_indices", "canonical form needs generic partial indices (kappa+1,...,kappa,...)");
  const PartialIndices pi = *pi_opt;
  const int n = pi.n, k = pi.k;
  WhfTriple<S> out = t;
  Matrix<S> p0 = t.p.coeff(0);
  if (detail::singular(p0)) throw Error("singular_matrix", "p0 is singular");

  if (k > 0 && detail::singular<S>(p0.topLeftCorner(k, k))) {
    if (!opt.allow_row_permutation)
      throw Error("singular_p0_block", "leading k x k block of p0 is singular; a row permutation of b is required");
    // best k-subset of rows by |det| of the k x k minor on the first k columns
    std::vector<int> best;
    double best_val = -1.0;
    std::vector<bool> sel(static_cast<std::size_t>(n), false);
    std::fill(sel.begin(), sel.begin() + k, true);
    do {
      std::vector<int> rows;
      for (int i = 0; i < n; ++i)
        if (sel[i]) rows.push_back(i);
      Matrix<S> minor(k, k);
      for (int a = 0; a < k; ++a) minor.row(a) = p0.row(rows[a]).head(k);
      const double v = std::abs(to_double(detail::determinant(minor)));
      if (v > best_val) {
        best_val = v;
        best = rows;
      }
    } while (std::prev_permutation(sel.begin(), sel.end()));
    std::vector<int> perm = best;
    for (int i = 0; i < n; ++i)
      if (std::find(best.begin(), best.end(), i) == best.end()) perm.push_back(i);
    std::vector<Matrix<S>> pc;
    for (const auto& c : out.p.coeffs()) {
      Matrix<S> m(n, n);
      for (int i = 0; i < n; ++i) m.row(i) = c.row(perm[i]);
      pc.push_back(m);
    }
    out.p = PolyMat<S>(std::move(pc));
    std::vector<int> composed(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) composed[i] = t.row_permutation.empty() ? perm[i] : t.row_permutation[perm[i]];
    out.row_permutation = composed;
    p0 = out.p.coeff(0);
  }

  const std::vector<int> kap = pi.vector();
  if (k == 0) {
    const Matrix<S> inv = detail::inverse(p0);
    out.p = out.p * inv;
    out.f = LaurentMat<S>(PolyMat<S>::constant(p0)) * out.f;
  } else {
    const int m = n - k;
    const Matrix<S> p11 = p0.topLeftCorner(k, k), p12 = p0.topRightCorner(k, m);
    const Matrix<S> p21 = p0.bottomLeftCorner(m, k), p22 = p0.bottomRightCorner(m, m);
    const Matrix<S> p11i = detail::inverse(p11);
    const Matrix<S> schur = p22 - p21 * p11i * p12;
    const Matrix<S> si = detail::inverse(schur);
    Matrix<S> u0 = Matrix<S>::Zero(n, n);
    u0.topLeftCorner(k, k) = p11i;
    u0.topRightCorner(k, m) = -p11i * p12 * si;
    u0.bottomRightCorner(m, m) = si;
    const Matrix<S> u0i = detail::inverse(u0);
    out.p = out.p * u0;
    // s^{-1} u0^{-1} s: block 12 picks up z^{-1}
    Matrix<S> c0 = u0i, cm1 = Matrix<S>::Zero(n, n);
    c0.topRightCorner(k, m).setZero();
    cm1.topRightCorner(k, m) = u0i.topRightCorner(k, m);
    out.f = LaurentMat<S>(-1, {cm1, c0}) * out.f;
    // p <- p (I + N z), f <- (I - N) f, N = [[0, X],[0, 0]], X = -p1_12
    Matrix<S> N = Matrix<S>::Zero(n, n);
    N.topRightCorner(k, m) = -out.p.coeff(1).topRightCorner(k, m);
    if (!is_zero_matrix(N)) {
      out.p = out.p * PolyMat<S>({Matrix<S>::Identity(n, n), N});
      out.f = LaurentMat<S>(PolyMat<S>::constant(Matrix<S>::Identity(n, n) - N)) * out.f;
    }
  }
  out.mode = WhfMode::canonical;
  return out;
}

template <class S>
struct Normalized {
  WhfTriple<S> triple;
  Matrix<S> folded;  ///< b(z) = compose(triple) * folded
};

/// natural: f0 = I, folds f0. b0_identity: b(0) = I, folds b0.
template <class S>
Normalized<S> normalize(const WhfTriple<S>& t, WhfMode mode) {
  if (t.mode != WhfMode::canonical) throw Error("invalid_triple", "normalize expects a canonical triple");
  const auto pi = t.indices();
  if (!pi) throw Error("non_generic_indices", "normalize needs generic partial indices");
  Normalized<S> out{t, Matrix<S>()};
  if (mode == WhfMode::natural) {
    const Matrix<S> f0 = t.f_coeff(0);
    out.triple.f = detail::right_multiply(t.f, detail::inverse(f0));
    out.folded = f0;
  } else if (mode == WhfMode::b0_identity) {
    const Matrix<S> b0 = t.p.coeff(0) * detail::stacked_top(t, *pi);
    if (detail::singular(b0))
      throw Error("singular_b0", "b0 is singular (informational delay); the b0_identity normalisation is undefined");
    out.triple.f = detail::right_multiply(t.f, detail::inverse(b0));
    out.folded = b0;
  } else {
    throw Error("invalid_config", "normalize mode must be natural or b0_identity");
  }
  out.triple.mode = mode;
  return out;
}

// ---------------------------------------------------------------------------
// Blaschke mirroring of a real zero
// ---------------------------------------------------------------------------

namespace detail {

template <class S>
Matrix<S> exact_kernel(const Matrix<S>& m) {
  const int rows = static_cast<int>(m.rows()), cols = static_cast<int>(m.cols());
  Matrix<S> a = m;
  std::vector<int> pivcol;
  int row = 0;
  for (int col = 0; col < cols && row < rows; ++col) {
    int piv = -1;
    for (int r = row; r < rows; ++r)
      if (!is_zero(a(r, col))) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    a.row(row).swap(a.row(piv));
    a.row(row) *= S(1) / a(row, col);
    for (int r = 0; r < rows; ++r)
      if (r != row && !is_zero(a(r, col))) a.row(r) -= a(r, col) * a.row(row);
    pivcol.push_back(col);
    ++row;
  }
  std::vector<int> freecols;
  for (int c = 0; c < cols; ++c)
    if (std::find(pivcol.begin(), pivcol.end(), c) == pivcol.end()) freecols.push_back(c);
  Matrix<S> ker = Matrix<S>::Zero(cols, static_cast<int>(freecols.size()));
  for (std::size_t f = 0; f < freecols.size(); ++f) {
    ker(freecols[f], static_cast<int>(f)) = S(1);
    for (std::size_t r = 0; r < pivcol.size(); ++r) ker(pivcol[r], static_cast<int>(f)) = -a(static_cast<int>(r), freecols[f]);
  }
  return ker;
}

}  // namespace detail

/// b(z) V(z) with V all-pass, moving the real zero alpha of det b to 1/alpha.
template <class S>
PolyMat<S> blaschke_mirror_real(const PolyMat<S>& b, const S& alpha) {
  if (!b.is_square()) throw Error("dimension_mismatch", "mirroring needs a square matrix");
  const double ad = to_double(alpha);
  if (std::abs(std::abs(ad) - 1.0) < kUnitCircleTol) throw Error("unit_circle_zero", "alpha lies on the unit circle");
  const int n = b.rows();
  Matrix<S> q;
  if constexpr (ScalarOps<S>::exact) {
    const Matrix<S> ba = b.eval_exact(alpha);
    const Matrix<S> ker = detail::exact_kernel(ba);
    if (ker.cols() == 0) throw Error("not_a_root", "alpha is not a zero of det b(z)");
    if (ker.cols() > 1) throw Error("kernel_dimension", "kernel of b(alpha) has dimension > 1");
    q = ker;
  } else {
    const Matrix<double> ba = b.eval(Complex(ad, 0.0)).real();
    Eigen::JacobiSVD<Matrix<double>> svd(ba, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double tol = 1e-8 * std::max(1.0, sv(0));
    int nullity = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) <= tol) ++nullity;
    if (nullity == 0) throw Error("not_a_root", "alpha is not a zero of det b(z)");
    if (nullity > 1) throw Error("kernel_dimension", "kernel of b(alpha) has dimension > 1");
    q = svd.matrixV().col(n - 1);
  }
  const S qq = (q.transpose() * q)(0, 0);
  const Matrix<S> P = q * q.transpose() / qq;
  // h(z) = b(z) q / (z - alpha), synthetic division per entry
  const PolyMat<S> bq = b * PolyMat<S>::constant(q);
  const int d = bq.degree();
  std::vector<Matrix<S>> h(static_cast<std::size_t>(std::max(d, 1)), Matrix<S>::Zero(n, 1));
  if (d >= 1) {
    Matrix<S> carry = Matrix<S>::Zero(n, 1);
    for (int j = d; j >= 1; --j) {
      carry = (bq.coeff(j) + carry * alpha).eval();
      h[static_cast<std::size_t>(j - 1)] = carry;
    }
  }
  const PolyMat<S> hpoly(h);
  const PolyMat<S> lin({Matrix<S>::Identity(1, 1), Matrix<S>::Constant(1, 1, -alpha)});
  const PolyMat<S> part = hpoly * lin * PolyMat<S>::constant(Matrix<S>(q.transpose() / qq));
  return b * PolyMat<S>::constant(Matrix<S>(Matrix<S>::Identity(n, n) - P)) + part;
}

inline PolyMat<double> blaschke_mirror_real(const PolyMat<double>& b, const Complex& alpha) {
  if (std::abs(alpha.imag()) > 1e-12)
    throw Error("complex_root",
                "mirroring a complex zero needs the real conjugate-pair construction, which is not supported");
  return blaschke_mirror_real<double>(b, alpha.real());
}

}  // namespace svwhf
