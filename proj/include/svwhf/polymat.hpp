#pragma once

// Scalar polynomials, polynomial matrices and Laurent matrices over either
// exact rationals or doubles.
//
// Conventions: coefficient j multiplies z^j. A PolyMat always holds at least
// one coefficient; the zero polynomial matrix has degree 0 and a zero
// coefficient. A LaurentMat additionally carries the lowest power, which may
// be negative.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "svwhf/error.hpp"
#include "svwhf/rational.hpp"

namespace svwhf {

template <class S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

using Complex = std::complex<double>;
using MatrixXq = Matrix<Rational>;

template <class S>
bool is_zero_matrix(const Matrix<S>& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (!is_zero(m.data()[i])) return false;
  }
  return true;
}

template <class S>
Matrix<double> to_double(const Matrix<S>& m) {
  Matrix<double> out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) out.data()[i] = to_double(m.data()[i]);
  return out;
}

inline MatrixXq to_rational(const Matrix<double>& m, double tol = 1e-12) {
  MatrixXq out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) out.data()[i] = rationalize(m.data()[i], tol);
  return out;
}

// ---------------------------------------------------------------------------
// Scalar polynomials
// ---------------------------------------------------------------------------

template <class S>
class Poly {
 public:
  Poly() : c_{S(0)} {}
  explicit Poly(std::vector<S> coeffs) : c_(std::move(coeffs)) { trim(); }
  Poly(std::initializer_list<S> coeffs) : c_(coeffs) { trim(); }

  static Poly constant(const S& value) { return Poly(std::vector<S>{value}); }
  static Poly monomial(int power, const S& coeff) {
    std::vector<S> c(static_cast<std::size_t>(power) + 1, S(0));
    c.back() = coeff;
    return Poly(std::move(c));
  }

  /// -1 for the zero polynomial.
  int degree() const { return is_zero() ? -1 : static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.size() == 1 && svwhf::is_zero(c_[0]); }
  const std::vector<S>& coeffs() const { return c_; }
  S operator[](int power) const {
    return power >= 0 && power < static_cast<int>(c_.size()) ? c_[static_cast<std::size_t>(power)] : S(0);
  }
  const S& leading() const { return c_.back(); }

  /// Lowest power carrying a nonzero coefficient (0 for the zero polynomial).
  int valuation() const {
    for (std::size_t j = 0; j < c_.size(); ++j) {
      if (!svwhf::is_zero(c_[j])) return static_cast<int>(j);
    }
    return 0;
  }

  template <class T>
  T operator()(const T& z) const {
    T acc = T(to_double(c_.back()));
    for (int j = static_cast<int>(c_.size()) - 2; j >= 0; --j) acc = acc * z + T(to_double(c_[static_cast<std::size_t>(j)]));
    return acc;
  }

  S eval_exact(const S& z) const {
    S acc = c_.back();
    for (int j = static_cast<int>(c_.size()) - 2; j >= 0; --j) acc = acc * z + c_[static_cast<std::size_t>(j)];
    return acc;
  }

  Poly derivative() const {
    if (c_.size() == 1) return Poly();
    std::vector<S> d(c_.size() - 1);
    for (std::size_t j = 1; j < c_.size(); ++j) d[j - 1] = c_[j] * S(static_cast<int>(j));
    return Poly(std::move(d));
  }

  /// z^d p(1/z) with d = degree().
  Poly reversed() const {
    std::vector<S> r(c_.rbegin(), c_.rend());
    return Poly(std::move(r));
  }

  Poly monic() const {
    if (is_zero()) return *this;
    std::vector<S> r = c_;
    const S lead = c_.back();
    for (auto& x : r) x /= lead;
    return Poly(std::move(r));
  }

  Poly operator-() const {
    std::vector<S> r = c_;
    for (auto& x : r) x = -x;
    return Poly(std::move(r));
  }
  friend Poly operator+(const Poly& a, const Poly& b) {
    std::vector<S> r(std::max(a.c_.size(), b.c_.size()), S(0));
    for (std::size_t j = 0; j < a.c_.size(); ++j) r[j] += a.c_[j];
    for (std::size_t j = 0; j < b.c_.size(); ++j) r[j] += b.c_[j];
    return Poly(std::move(r));
  }
  friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly();
    std::vector<S> r(a.c_.size() + b.c_.size() - 1, S(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      if (svwhf::is_zero(a.c_[i])) continue;
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    }
    return Poly(std::move(r));
  }
  friend Poly operator*(const S& s, const Poly& a) { return Poly::constant(s) * a; }
  Poly& operator+=(const Poly& b) { return *this = *this + b; }
  Poly& operator-=(const Poly& b) { return *this = *this - b; }
  Poly& operator*=(const Poly& b) { return *this = *this * b; }
  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

  /// Euclidean division over a field: a = q*b + r with deg r < deg b.
  friend std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
    if (b.is_zero()) throw Error("domain_error", "polynomial division by zero");
    if (a.degree() < b.degree()) return {Poly(), a};
    std::vector<S> rem = a.c_;
    const int db = b.degree();
    std::vector<S> quot(static_cast<std::size_t>(a.degree() - db + 1), S(0));
    for (int j = a.degree(); j >= db; --j) {
      const S factor = rem[static_cast<std::size_t>(j)] / b.leading();
      quot[static_cast<std::size_t>(j - db)] = factor;
      if (svwhf::is_zero(factor)) continue;
      for (int i = 0; i <= db; ++i) rem[static_cast<std::size_t>(j - db + i)] -= factor * b.c_[static_cast<std::size_t>(i)];
      rem[static_cast<std::size_t>(j)] = S(0);
    }
    rem.resize(static_cast<std::size_t>(std::max(db, 1)));
    return {Poly(std::move(quot)), Poly(std::move(rem))};
  }

 private:
  void trim() {
    if (c_.empty()) c_.push_back(S(0));
    while (c_.size() > 1 && svwhf::is_zero(c_.back())) c_.pop_back();
  }

  std::vector<S> c_;
};

/// Monic greatest common divisor (exact backend only makes sense here).
template <class S>
Poly<S> gcd(Poly<S> a, Poly<S> b) {
  while (!b.is_zero()) {
    auto r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return a.monic();
}

/// Yun's square-free decomposition: p = c * prod_i f_i^i with f_i square-free
/// and pairwise coprime. Returns {f_1, f_2, ...}; trailing entries may be 1.
template <class S>
std::vector<Poly<S>> squarefree_decomposition(const Poly<S>& p) {
  std::vector<Poly<S>> out;
  if (p.degree() <= 0) return out;
  Poly<S> a = p.monic();
  Poly<S> b = a.derivative();
  Poly<S> c = gcd(a, b);
  Poly<S> w = divmod(a, c).first;
  Poly<S> y = divmod(b, c).first;
  Poly<S> z = y - w.derivative();
  while (w.degree() > 0) {
    Poly<S> g = gcd(w, z);
    out.push_back(g);
    w = divmod(w, g).first;
    y = divmod(z, g).first;
    z = y - w.derivative();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Roots
// ---------------------------------------------------------------------------

struct Root {
  Complex value;
  int multiplicity = 1;
  bool on_unit_circle = false;
};

inline constexpr double kRootClusterTol = 1e-7;
inline constexpr double kUnitCircleTol = 1e-8;

namespace detail {

// Eigenvalues of the companion matrix of c_0 + c_1 z + ... + c_d z^d (c_d != 0),
// followed by a few Newton steps in long double.
inline std::vector<Complex> companion_roots(const std::vector<double>& c) {
  const int d = static_cast<int>(c.size()) - 1;
  std::vector<Complex> roots;
  if (d <= 0) return roots;
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(d, d);
  for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) comp(i, d - 1) = -c[static_cast<std::size_t>(i)] / c[static_cast<std::size_t>(d)];
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  if (es.info() != Eigen::Success) throw Error("numerical_error", "companion eigenvalue computation failed");
  using CL = std::complex<long double>;
  auto eval = [&](CL z, CL& dp) {
    CL pv = c[static_cast<std::size_t>(d)];
    dp = 0;
    for (int j = d - 1; j >= 0; --j) {
      dp = dp * z + pv;
      pv = pv * z + static_cast<long double>(c[static_cast<std::size_t>(j)]);
    }
    return pv;
  };
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    CL z(es.eigenvalues()[i].real(), es.eigenvalues()[i].imag());
    CL dp;
    long double best = std::abs(eval(z, dp));
    for (int it = 0; it < 8 && best > 0; ++it) {
      CL pv = eval(z, dp);
      if (std::abs(dp) == 0) break;
      CL cand = z - pv / dp;
      CL dummy;
      const long double val = std::abs(eval(cand, dummy));
      if (!(val < best)) break;
      best = val;
      z = cand;
    }
    roots.emplace_back(static_cast<double>(z.real()), static_cast<double>(z.imag()));
  }
  return roots;
}

inline std::vector<Root> cluster_roots(std::vector<Complex> raw, double tol) {
  std::sort(raw.begin(), raw.end(), [](const Complex& a, const Complex& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  std::vector<Root> out;
  std::vector<bool> used(raw.size(), false);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (used[i]) continue;
    Complex sum = raw[i];
    int count = 1;
    used[i] = true;
    for (std::size_t j = i + 1; j < raw.size(); ++j) {
      if (!used[j] && std::abs(raw[j] - raw[i]) <= tol) {
        used[j] = true;
        sum += raw[j];
        ++count;
      }
    }
    Root r;
    r.value = sum / static_cast<double>(count);
    r.multiplicity = count;
    out.push_back(r);
  }
  return out;
}

inline void flag_unit_circle(std::vector<Root>& roots) {
  for (auto& r : roots) r.on_unit_circle = std::abs(std::abs(r.value) - 1.0) < kUnitCircleTol;
}

}  // namespace detail

/// Roots with multiplicity. Exact backend: square-free decomposition gives
/// exact multiplicities; floating backend: clustering within 1e-7.
template <class S>
std::vector<Root> roots(const Poly<S>& p) {
  if (p.is_zero()) throw Error("domain_error", "roots of the zero polynomial are undefined");
  std::vector<Root> out;
  const int zeros_at_origin = p.valuation();
  if (zeros_at_origin > 0) out.push_back(Root{Complex(0.0, 0.0), zeros_at_origin, false});
  std::vector<S> shifted(p.coeffs().begin() + zeros_at_origin, p.coeffs().end());
  Poly<S> rest(std::move(shifted));
  if constexpr (ScalarOps<S>::exact) {
    const auto factors = squarefree_decomposition(rest);
    for (std::size_t m = 0; m < factors.size(); ++m) {
      if (factors[m].degree() <= 0) continue;
      std::vector<double> c;
      for (const auto& x : factors[m].coeffs()) c.push_back(to_double(x));
      for (const auto& z : detail::companion_roots(c)) out.push_back(Root{z, static_cast<int>(m) + 1, false});
    }
  } else {
    std::vector<double> c(rest.coeffs().begin(), rest.coeffs().end());
    auto clustered = detail::cluster_roots(detail::companion_roots(c), kRootClusterTol);
    out.insert(out.end(), clustered.begin(), clustered.end());
  }
  detail::flag_unit_circle(out);
  return out;
}

inline int count_roots_inside(const std::vector<Root>& rs) {
  int n = 0;
  for (const auto& r : rs) {
    if (std::abs(r.value) < 1.0) n += r.multiplicity;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Polynomial matrices
// ---------------------------------------------------------------------------

template <class S>
class LaurentMat;

template <class S>
class PolyMat {
 public:
  using Scalar = S;

  PolyMat() : PolyMat(0, 0) {}
  PolyMat(int rows, int cols) : coeffs_{Matrix<S>::Zero(rows, cols)} {}
  explicit PolyMat(std::vector<Matrix<S>> coeffs) : coeffs_(std::move(coeffs)) { normalize(); }
  PolyMat(std::initializer_list<Matrix<S>> coeffs) : coeffs_(coeffs) { normalize(); }

  static PolyMat identity(int n) { return PolyMat({Matrix<S>::Identity(n, n)}); }
  static PolyMat constant(const Matrix<S>& m) { return PolyMat({m}); }

  /// Builds a matrix from scalar polynomial entries (row-major nesting).
  static PolyMat from_entries(const std::vector<std::vector<Poly<S>>>& e) {
    const int r = static_cast<int>(e.size());
    const int c = r == 0 ? 0 : static_cast<int>(e[0].size());
    int d = 0;
    for (const auto& row : e) {
      if (static_cast<int>(row.size()) != c) throw Error("dimension_mismatch", "ragged polynomial entry table");
      for (const auto& p : row) d = std::max(d, p.degree());
    }
    std::vector<Matrix<S>> coeffs(static_cast<std::size_t>(d) + 1, Matrix<S>::Zero(r, c));
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j)
        for (int k = 0; k <= e[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].degree(); ++k)
          coeffs[static_cast<std::size_t>(k)](i, j) = e[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][k];
    return PolyMat(std::move(coeffs));
  }

  int rows() const { return static_cast<int>(coeffs_.front().rows()); }
  int cols() const { return static_cast<int>(coeffs_.front().cols()); }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_square() const { return rows() == cols(); }
  bool is_zero() const { return coeffs_.size() == 1 && is_zero_matrix(coeffs_[0]); }
  const std::vector<Matrix<S>>& coeffs() const { return coeffs_; }

  /// Coefficient at z^power; zero outside 0..degree.
  Matrix<S> coeff(int power) const {
    if (power < 0 || power > degree()) return Matrix<S>::Zero(rows(), cols());
    return coeffs_[static_cast<std::size_t>(power)];
  }

  Poly<S> entry(int i, int j) const {
    std::vector<S> c;
    c.reserve(coeffs_.size());
    for (const auto& m : coeffs_) c.push_back(m(i, j));
    return Poly<S>(std::move(c));
  }

  std::vector<std::vector<Poly<S>>> entries() const {
    std::vector<std::vector<Poly<S>>> e(static_cast<std::size_t>(rows()));
    for (int i = 0; i < rows(); ++i)
      for (int j = 0; j < cols(); ++j) e[static_cast<std::size_t>(i)].push_back(entry(i, j));
    return e;
  }

  Eigen::MatrixXcd eval(const Complex& z) const {
    Eigen::MatrixXcd acc = to_double(coeffs_.back()).template cast<Complex>();
    for (int j = degree() - 1; j >= 0; --j) acc = acc * z + to_double(coeffs_[static_cast<std::size_t>(j)]).template cast<Complex>();
    return acc;
  }

  Matrix<S> eval_exact(const S& z) const {
    Matrix<S> acc = coeffs_.back();
    for (int j = degree() - 1; j >= 0; --j) acc = (acc * z + coeffs_[static_cast<std::size_t>(j)]).eval();
    return acc;
  }

  /// Per-row largest power with a nonzero entry; -1 for an all-zero row.
  std::vector<int> row_degrees() const {
    std::vector<int> out(static_cast<std::size_t>(rows()), -1);
    for (int i = 0; i < rows(); ++i)
      for (int k = degree(); k >= 0; --k)
        if (!is_zero_matrix<S>(coeffs_[static_cast<std::size_t>(k)].row(i))) {
          out[static_cast<std::size_t>(i)] = k;
          break;
        }
    return out;
  }

  std::vector<int> column_degrees() const {
    std::vector<int> out(static_cast<std::size_t>(cols()), -1);
    for (int j = 0; j < cols(); ++j)
      for (int k = degree(); k >= 0; --k)
        if (!is_zero_matrix<S>(coeffs_[static_cast<std::size_t>(k)].col(j))) {
          out[static_cast<std::size_t>(j)] = k;
          break;
        }
    return out;
  }

  /// Row i taken from the coefficient at that row's degree.
  Matrix<S> leading_row_matrix() const {
    Matrix<S> out = Matrix<S>::Zero(rows(), cols());
    const auto rd = row_degrees();
    for (int i = 0; i < rows(); ++i)
      if (rd[static_cast<std::size_t>(i)] >= 0) out.row(i) = coeffs_[static_cast<std::size_t>(rd[static_cast<std::size_t>(i)])].row(i);
    return out;
  }

  PolyMat transpose() const {
    std::vector<Matrix<S>> c;
    for (const auto& m : coeffs_) c.push_back(m.transpose());
    return PolyMat(std::move(c));
  }

  PolyMat operator-() const {
    std::vector<Matrix<S>> c;
    for (const auto& m : coeffs_) c.push_back(-m);
    return PolyMat(std::move(c));
  }

  friend PolyMat operator+(const PolyMat& a, const PolyMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error("dimension_mismatch", "PolyMat addition: shapes differ");
    std::vector<Matrix<S>> c(static_cast<std::size_t>(std::max(a.degree(), b.degree())) + 1, Matrix<S>::Zero(a.rows(), a.cols()));
    for (int k = 0; k <= a.degree(); ++k) c[static_cast<std::size_t>(k)] += a.coeffs_[static_cast<std::size_t>(k)];
    for (int k = 0; k <= b.degree(); ++k) c[static_cast<std::size_t>(k)] += b.coeffs_[static_cast<std::size_t>(k)];
    return PolyMat(std::move(c));
  }
  friend PolyMat operator-(const PolyMat& a, const PolyMat& b) { return a + (-b); }

  friend PolyMat operator*(const PolyMat& a, const PolyMat& b) {
    if (a.cols() != b.rows()) throw Error("dimension_mismatch", "PolyMat product: inner dimensions differ");
    std::vector<Matrix<S>> c(static_cast<std::size_t>(a.degree() + b.degree()) + 1, Matrix<S>::Zero(a.rows(), b.cols()));
    for (int i = 0; i <= a.degree(); ++i) {
      if (is_zero_matrix(a.coeffs_[static_cast<std::size_t>(i)])) continue;
      for (int j = 0; j <= b.degree(); ++j) c[static_cast<std::size_t>(i + j)] += a.coeffs_[static_cast<std::size_t>(i)] * b.coeffs_[static_cast<std::size_t>(j)];
    }
    return PolyMat(std::move(c));
  }

  friend PolyMat operator*(const Matrix<S>& m, const PolyMat& a) { return PolyMat::constant(m) * a; }
  friend PolyMat operator*(const PolyMat& a, const Matrix<S>& m) { return a * PolyMat::constant(m); }

  friend bool operator==(const PolyMat& a, const PolyMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.degree() != b.degree()) return false;
    for (int k = 0; k <= a.degree(); ++k)
      if (a.coeffs_[static_cast<std::size_t>(k)] != b.coeffs_[static_cast<std::size_t>(k)]) return false;
    return true;
  }

 private:
  void normalize() {
    if (coeffs_.empty()) throw Error("dimension_mismatch", "PolyMat needs at least one coefficient");
    for (const auto& m : coeffs_)
      if (m.rows() != coeffs_[0].rows() || m.cols() != coeffs_[0].cols())
        throw Error("dimension_mismatch", "PolyMat coefficients must share dimensions");
    while (coeffs_.size() > 1 && is_zero_matrix(coeffs_.back())) coeffs_.pop_back();
  }

  std::vector<Matrix<S>> coeffs_;
};

template <class S>
PolyMat<S> mul(const PolyMat<S>& a, const PolyMat<S>& b) {
  return a * b;
}

inline PolyMat<double> to_double(const PolyMat<Rational>& m) {
  std::vector<Matrix<double>> c;
  for (const auto& x : m.coeffs()) c.push_back(to_double(x));
  return PolyMat<double>(std::move(c));
}

inline PolyMat<Rational> to_rational(const PolyMat<double>& m, double tol = 1e-12) {
  std::vector<MatrixXq> c;
  for (const auto& x : m.coeffs()) c.push_back(to_rational(x, tol));
  return PolyMat<Rational>(std::move(c));
}

// ---------------------------------------------------------------------------
// Laurent matrices
// ---------------------------------------------------------------------------

template <class S>
class LaurentMat {
 public:
  using Scalar = S;

  LaurentMat() : LaurentMat(0, 0) {}
  LaurentMat(int rows, int cols) : low_(0), coeffs_{Matrix<S>::Zero(rows, cols)} {}
  /// coeffs[j] multiplies z^(low + j).
  LaurentMat(int low, std::vector<Matrix<S>> coeffs) : low_(low), coeffs_(std::move(coeffs)) { normalize(); }
  LaurentMat(const PolyMat<S>& p) : low_(0), coeffs_(p.coeffs()) { normalize(); }  // NOLINT(implicit)

  int rows() const { return static_cast<int>(coeffs_.front().rows()); }
  int cols() const { return static_cast<int>(coeffs_.front().cols()); }
  int min_power() const { return low_; }
  int max_power() const { return low_ + static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.size() == 1 && is_zero_matrix(coeffs_[0]); }
  bool is_polynomial() const { return low_ >= 0 || is_zero(); }

  Matrix<S> coeff(int power) const {
    if (power < low_ || power > max_power()) return Matrix<S>::Zero(rows(), cols());
    return coeffs_[static_cast<std::size_t>(power - low_)];
  }

  Eigen::MatrixXcd eval(const Complex& z) const {
    if (z == Complex(0.0, 0.0) && low_ < 0 && !is_zero())
      throw Error("domain_error", "evaluating a Laurent matrix with negative powers at z = 0");
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(rows(), cols());
    Complex zp = std::pow(z, low_);
    for (const auto& m : coeffs_) {
      acc += to_double(m).template cast<Complex>() * zp;
      zp *= z;
    }
    return acc;
  }

  std::optional<PolyMat<S>> to_polymat() const {
    if (!is_polynomial()) return std::nullopt;
    if (is_zero()) return PolyMat<S>(rows(), cols());
    std::vector<Matrix<S>> c(static_cast<std::size_t>(low_), Matrix<S>::Zero(rows(), cols()));
    c.insert(c.end(), coeffs_.begin(), coeffs_.end());
    return PolyMat<S>(std::move(c));
  }

  /// Pole at infinity: some strictly positive power carries a nonzero coefficient.
  bool has_pole_at_infinity() const { return !is_zero() && max_power() > 0; }

  /// Without a pole: the limit as |z| -> inf (the power-0 coefficient) is singular.
  /// With a pole: the inverse has a pole at infinity, i.e. some entry of
  /// adj(M)/det(M) has positive degree at infinity.
  bool has_zero_at_infinity() const;

  friend LaurentMat operator*(const LaurentMat& a, const LaurentMat& b) {
    if (a.cols() != b.rows()) throw Error("dimension_mismatch", "LaurentMat product: inner dimensions differ");
    std::vector<Matrix<S>> c(a.coeffs_.size() + b.coeffs_.size() - 1, Matrix<S>::Zero(a.rows(), b.cols()));
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return LaurentMat(a.low_ + b.low_, std::move(c));
  }

  friend LaurentMat operator+(const LaurentMat& a, const LaurentMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error("dimension_mismatch", "LaurentMat addition: shapes differ");
    const int lo = std::min(a.low_, b.low_);
    const int hi = std::max(a.max_power(), b.max_power());
    std::vector<Matrix<S>> c;
    for (int k = lo; k <= hi; ++k) c.push_back(a.coeff(k) + b.coeff(k));
    return LaurentMat(lo, std::move(c));
  }

  friend bool operator==(const LaurentMat& a, const LaurentMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.low_ != b.low_ || a.coeffs_.size() != b.coeffs_.size()) return false;
    for (std::size_t k = 0; k < a.coeffs_.size(); ++k)
      if (a.coeffs_[k] != b.coeffs_[k]) return false;
    return true;
  }

 private:
  void normalize() {
    if (coeffs_.empty()) throw Error("dimension_mismatch", "LaurentMat needs at least one coefficient");
    while (coeffs_.size() > 1 && is_zero_matrix(coeffs_.back())) coeffs_.pop_back();
    while (coeffs_.size() > 1 && is_zero_matrix(coeffs_.front())) {
      coeffs_.erase(coeffs_.begin());
      ++low_;
    }
    if (is_zero()) low_ = 0;
  }

  int low_;
  std::vector<Matrix<S>> coeffs_;
};

template <class S>
LaurentMat<S> mul(const LaurentMat<S>& a, const LaurentMat<S>& b) {
  return a * b;
}

/// z^power * I_n as a Laurent matrix.
template <class S>
LaurentMat<S> shift_matrix(const std::vector<int>& powers) {
  const int n = static_cast<int>(powers.size());
  if (n == 0) return LaurentMat<S>(0, 0);
  const int lo = *std::min_element(powers.begin(), powers.end());
  const int hi = *std::max_element(powers.begin(), powers.end());
  std::vector<Matrix<S>> c(static_cast<std::size_t>(hi - lo) + 1, Matrix<S>::Zero(n, n));
  for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(powers[static_cast<std::size_t>(i)] - lo)](i, i) = S(1);
  return LaurentMat<S>(lo, std::move(c));
}

// ---------------------------------------------------------------------------
// Determinants
// ---------------------------------------------------------------------------

namespace detail {

// Bareiss fraction-free elimination over the integral domain S[z].
template <class S>
Poly<S> bareiss_det(std::vector<std::vector<Poly<S>>> a) {
  const std::size_t n = a.size();
  if (n == 0) return Poly<S>::constant(S(1));
  Poly<S> prev = Poly<S>::constant(S(1));
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k].is_zero()) {
      std::size_t swap = k + 1;
      while (swap < n && a[swap][k].is_zero()) ++swap;
      if (swap == n) return Poly<S>();
      std::swap(a[k], a[swap]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        Poly<S> num = a[k][k] * a[i][j] - a[i][k] * a[k][j];
        a[i][j] = divmod(num, prev).first;
      }
      a[i][k] = Poly<S>();
    }
    prev = a[k][k];
  }
  Poly<S> d = a[n - 1][n - 1];
  return sign > 0 ? d : -d;
}

}  // namespace detail

/// Determinant of a square polynomial matrix. Exact backend: Bareiss
/// elimination over Q[z]. Floating backend: evaluation at roots of unity and
/// an inverse discrete Fourier transform.
template <class S>
Poly<S> det_poly(const PolyMat<S>& m) {
  if (!m.is_square()) throw Error("dimension_mismatch", "determinant of a non-square polynomial matrix");
  const int n = m.rows();
  if (n == 0) return Poly<S>::constant(S(1));
  if constexpr (ScalarOps<S>::exact) {
    return detail::bareiss_det(m.entries());
  } else {
    int bound = 0;
    for (int d : m.row_degrees()) bound += std::max(d, 0);
    int cbound = 0;
    for (int d : m.column_degrees()) cbound += std::max(d, 0);
    bound = std::min(bound, cbound);
    const int npts = bound + 1;
    std::vector<Complex> vals(static_cast<std::size_t>(npts));
    for (int k = 0; k < npts; ++k) {
      const Complex z = std::polar(1.0, 2.0 * std::numbers::pi * k / npts);
      vals[static_cast<std::size_t>(k)] = m.eval(z).determinant();
    }
    std::vector<double> c(static_cast<std::size_t>(npts));
    double scale = 0.0;
    for (int j = 0; j < npts; ++j) {
      Complex acc = 0;
      for (int k = 0; k < npts; ++k) acc += vals[static_cast<std::size_t>(k)] * std::polar(1.0, -2.0 * std::numbers::pi * j * k / npts);
      c[static_cast<std::size_t>(j)] = acc.real() / npts;
      scale = std::max(scale, std::abs(c[static_cast<std::size_t>(j)]));
    }
    for (auto& x : c)
      if (std::abs(x) <= 1e-13 * scale) x = 0.0;
    return Poly<double>(std::move(c));
  }
}

template <class S>
std::vector<Root> roots_det(const PolyMat<S>& m) {
  const Poly<S> d = det_poly(m);
  if (d.is_zero()) throw Error("singular_matrix", "determinant is identically zero");
  return roots(d);
}

/// Leading-row-coefficient matrix is nonsingular.
template <class S>
bool is_row_reduced(const PolyMat<S>& m) {
  if (!m.is_square()) throw Error("dimension_mismatch", "row-reducedness needs a square matrix");
  const Matrix<S> lead = m.leading_row_matrix();
  if constexpr (ScalarOps<S>::exact) {
    return !det_poly(PolyMat<S>::constant(lead)).is_zero();
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(lead);
    const auto& sv = svd.singularValues();
    return sv.size() == 0 || sv(sv.size() - 1) > 1e-12 * std::max(1.0, sv(0));
  }
}

template <class S>
std::vector<int> row_degrees(const PolyMat<S>& m) {
  return m.row_degrees();
}

/// det is a nonzero constant.
template <class S>
bool is_unimodular(const PolyMat<S>& m) {
  if (!m.is_square()) return false;
  const Poly<S> d = det_poly(m);
  return d.degree() == 0;
}

template <class S>
bool LaurentMat<S>::has_zero_at_infinity() const {
  if (rows() != cols()) throw Error("dimension_mismatch", "zero at infinity needs a square matrix");
  if (!has_pole_at_infinity()) {
    const Matrix<S> limit = coeff(0);
    return det_poly(PolyMat<S>::constant(limit)).is_zero();
  }
  // M(z) = z^low P(z) with P polynomial; compare degrees of adj(P) and det(P).
  std::vector<Matrix<S>> c(coeffs_);
  const PolyMat<S> pm(c);
  const Poly<S> d = det_poly(pm);
  if (d.is_zero()) throw Error("singular_matrix", "determinant is identically zero");
  const int n = rows();
  int adj_deg = -1;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::vector<std::vector<Poly<S>>> minor;
      const auto e = pm.entries();
      for (int r = 0; r < n; ++r) {
        if (r == i) continue;
        std::vector<Poly<S>> row;
        for (int s = 0; s < n; ++s)
          if (s != j) row.push_back(e[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)]);
        minor.push_back(row);
      }
      adj_deg = std::max(adj_deg, detail::bareiss_det(minor).degree());
    }
  }
  // inverse = z^{-low} adj(P)/det(P); pole at infinity iff that degree > 0.
  return adj_deg - d.degree() - low_ > 0;
}

template <class S>
bool has_pole_at_infinity(const LaurentMat<S>& m) {
  return m.has_pole_at_infinity();
}

template <class S>
bool has_zero_at_infinity(const LaurentMat<S>& m) {
  return m.has_zero_at_infinity();
}

}  // namespace svwhf
