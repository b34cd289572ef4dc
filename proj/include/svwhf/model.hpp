#pragma once

// SVARMA model in WHF parametrisation: a(z) y_t = p(z) s(z) f(z) B eps_t.
// Structure (n, p, q, kappa, k, normalisation, densities), the packed
// parameter vector with its zero/one/tie restrictions, validity checks,
// impulse responses, spectral density, simulation and B identification.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "svwhf/densities.hpp"
#include "svwhf/error.hpp"
#include "svwhf/polymat.hpp"
#include "svwhf/whf.hpp"

namespace svwhf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct SvarmaSpec {
  int n = 1;
  int p = 0;
  int q = 0;
  PartialIndices indices{0, 0, 1};
  WhfMode normalization = WhfMode::natural;
  std::vector<ShockDensity> densities;

  int kappa() const { return indices.kappa; }
  int k() const { return indices.k; }
  int p_degree() const { return q - indices.kappa; }
  int lambda_dim() const {
    int d = 0;
    for (const auto& s : densities) d += s.dim();
    return d;
  }
  std::vector<int> kappas() const { return indices.vector(); }

  void check() const {
    if (n < 1 || p < 0 || q < 0) throw Error("invalid_spec", "n >= 1, p >= 0 and q >= 0 are required");
    if (indices.n != n) throw Error("invalid_spec", "partial indices dimension differs from n");
    if (!indices.feasible(q)) throw Error("invalid_spec", "partial indices infeasible for this MA order");
    if (normalization != WhfMode::natural && normalization != WhfMode::b0_identity)
      throw Error("invalid_spec", "normalization must be natural or b0_identity");
    if (static_cast<int>(densities.size()) != n) throw Error("invalid_spec", "one density per shock is required");
  }

  /// Same structure with every density replaced by `family` (default lambda).
  SvarmaSpec with_family(Family family) const {
    SvarmaSpec s = *this;
    for (auto& d : s.densities) {
      d.family = family;
      d.lambda = family == Family::sgt ? VectorXd(Eigen::Vector3d(0.0, 2.0, 4.0)) : VectorXd();
    }
    return s;
  }
};

struct Dataset {
  MatrixXd values;  ///< T x n
  std::vector<std::string> names;
  int T() const { return static_cast<int>(values.rows()); }
  int n() const { return static_cast<int>(values.cols()); }
};

// ---------------------------------------------------------------------------
// Parameter layout
// ---------------------------------------------------------------------------

struct Slot {
  enum Kind { free, fixed, tied };
  Kind kind = free;
  int index = -1;      ///< free: its free coordinate; tied: the source free coordinate
  double value = 0.0;  ///< fixed value
  double coef = 0.0;   ///< tied coefficient
};

/// Full tau = (vec a_1..a_p, vec p_0..p_{q-kappa}, vec g_0..g_{kappa+1}),
/// column-major blocks.
struct TauLayout {
  int n = 1, p = 0, q = 0, kappa = 0, k = 0, dp = 0;
  std::vector<Slot> slots;
  std::vector<int> free_to_tau;

  int nn() const { return n * n; }
  int a_off(int i) const { return (i - 1) * nn(); }
  int p_off(int j) const { return (p + j) * nn(); }
  int g_off(int m) const { return (p + dp + 1 + m) * nn(); }
  int size() const { return (p + dp + 1 + kappa + 2) * nn(); }
  int n_free() const { return static_cast<int>(free_to_tau.size()); }
  int n_restrictions() const { return size() - n_free(); }

  /// Restriction system R tau = r.
  std::pair<MatrixXd, VectorXd> restrictions() const {
    const int nr = n_restrictions();
    MatrixXd R = MatrixXd::Zero(nr, size());
    VectorXd r = VectorXd::Zero(nr);
    int row = 0;
    for (int i = 0; i < size(); ++i) {
      const Slot& s = slots[static_cast<std::size_t>(i)];
      if (s.kind == Slot::fixed) {
        R(row, i) = 1.0;
        r(row) = s.value;
        ++row;
      } else if (s.kind == Slot::tied) {
        R(row, i) = 1.0;
        R(row, free_to_tau[static_cast<std::size_t>(s.index)]) = -s.coef;
        ++row;
      }
    }
    return {R, r};
  }
};

inline TauLayout make_layout(const SvarmaSpec& spec) {
  spec.check();
  TauLayout L;
  L.n = spec.n;
  L.p = spec.p;
  L.q = spec.q;
  L.kappa = spec.kappa();
  L.k = spec.k();
  L.dp = spec.p_degree();
  const int n = L.n, k = L.k, kap = L.kappa;
  L.slots.assign(static_cast<std::size_t>(L.size()), Slot{});
  auto at = [&](int off, int r, int c) -> Slot& { return L.slots[static_cast<std::size_t>(off + r + c * n)]; };
  auto fix = [&](int off, int r, int c, double v) {
    Slot& s = at(off, r, c);
    s.kind = Slot::fixed;
    s.value = v;
  };
  const double one = 1.0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double delta = r == c ? one : 0.0;
      // p0
      if (!(r >= k && c < k)) fix(L.p_off(0), r, c, delta);
      // p1 block 12
      if (k > 0 && r < k && c >= k) fix(L.p_off(1), r, c, 0.0);
      // first k columns of the last p coefficient
      if (c < k) fix(L.p_off(L.dp), r, c, 0.0);
      // g_{kappa+1}: rows k+1..n vanish
      if (r >= k) fix(L.g_off(kap + 1), r, c, 0.0);
      if (spec.normalization == WhfMode::natural) {
        if (r < k) fix(L.g_off(kap + 1), r, c, delta);
        else fix(L.g_off(kap), r, c, delta);
      } else if (k == 0) {
        fix(L.g_off(0), r, c, delta);
      } else if (!(r >= k && c < k)) {
        fix(L.g_off(0), r, c, delta);
      }
    }
  }
  int nf = 0;
  for (int i = 0; i < L.size(); ++i) {
    if (L.slots[static_cast<std::size_t>(i)].kind == Slot::free) {
      L.slots[static_cast<std::size_t>(i)].index = nf++;
      L.free_to_tau.push_back(i);
    }
  }
  if (spec.normalization == WhfMode::b0_identity && k > 0) {
    // g0 lower-left = -p0 lower-left
    for (int r = k; r < n; ++r)
      for (int c = 0; c < k; ++c) {
        Slot& s = at(L.g_off(0), r, c);
        const int src = at(L.p_off(0), r, c).index;
        // the free index of the g0 entry is removed below
        s.kind = Slot::tied;
        s.index = src;
        s.coef = -1.0;
      }
    L.free_to_tau.clear();
    nf = 0;
    for (int i = 0; i < L.size(); ++i) {
      Slot& s = L.slots[static_cast<std::size_t>(i)];
      if (s.kind == Slot::free) {
        s.index = nf++;
        L.free_to_tau.push_back(i);
      }
    }
    // re-point the ties at the renumbered p0 coordinates
    for (int r = k; r < n; ++r)
      for (int c = 0; c < k; ++c) at(L.g_off(0), r, c).index = at(L.p_off(0), r, c).index;
  }
  return L;
}

/// Offsets of the blocks inside the free vector theta.
struct ThetaLayout {
  TauLayout tau;
  int n = 1;
  int d = 0;
  std::vector<int> lambda_dims;

  int n_tau_free() const { return tau.n_free(); }
  int beta_off() const { return n_tau_free(); }
  int n_beta() const { return n * (n - 1); }
  int sigma_off() const { return beta_off() + n_beta(); }
  int lambda_off() const { return sigma_off() + n; }
  int size() const { return lambda_off() + d; }
  int lambda_off(int i) const {
    int off = lambda_off();
    for (int j = 0; j < i; ++j) off += lambda_dims[static_cast<std::size_t>(j)];
    return off;
  }
};

inline ThetaLayout make_theta_layout(const SvarmaSpec& spec) {
  ThetaLayout t;
  t.tau = make_layout(spec);
  t.n = spec.n;
  t.d = spec.lambda_dim();
  for (const auto& d : spec.densities) t.lambda_dims.push_back(d.dim());
  return t;
}

/// n^2 (p+q) + n(n-1) + n + d.
inline int count_free_parameters(const SvarmaSpec& spec) { return make_theta_layout(spec).size(); }

// ---------------------------------------------------------------------------
// Unpacked parameters
// ---------------------------------------------------------------------------

struct SvarmaParams {
  std::vector<MatrixXd> a;  ///< a_1..a_p, a(z) = I - sum a_i z^i
  std::vector<MatrixXd> p;  ///< p_0..p_{q-kappa}
  std::vector<MatrixXd> g;  ///< g_0..g_{kappa+1}, g(z) = s(z) f(z)
  MatrixXd B;               ///< unit diagonal
  VectorXd sigma;
  std::vector<VectorXd> lambda;

  /// f_0..f_{kappa+1} from g by the row-wise index shift.
  std::vector<MatrixXd> f(const std::vector<int>& kappas) const {
    const int n = static_cast<int>(B.rows());
    const int top = static_cast<int>(g.size()) - 1;
    std::vector<MatrixXd> out(static_cast<std::size_t>(top + 1), MatrixXd::Zero(n, n));
    for (int j = 0; j <= top; ++j)
      for (int i = 0; i < n; ++i) {
        const int m = kappas[static_cast<std::size_t>(i)] - j;
        if (m >= 0 && m <= top) out[static_cast<std::size_t>(j)].row(i) = g[static_cast<std::size_t>(m)].row(i);
      }
    return out;
  }

  PolyMat<double> a_poly() const {
    const int n = static_cast<int>(a.empty() ? B.rows() : a.front().rows());
    std::vector<MatrixXd> c{MatrixXd::Identity(n, n)};
    for (const auto& ai : a) c.push_back(-ai);
    return PolyMat<double>(std::move(c));
  }
  PolyMat<double> p_poly() const { return PolyMat<double>(p); }
  PolyMat<double> g_poly() const { return PolyMat<double>(g); }
  /// b(z) = p(z) g(z)
  PolyMat<double> b_poly() const { return p_poly() * g_poly(); }
};

inline VectorXd tau_full(const VectorXd& theta, const TauLayout& L) {
  VectorXd tau(L.size());
  for (int i = 0; i < L.size(); ++i) {
    const Slot& s = L.slots[static_cast<std::size_t>(i)];
    switch (s.kind) {
      case Slot::free: tau(i) = theta(s.index); break;
      case Slot::fixed: tau(i) = s.value; break;
      case Slot::tied: tau(i) = s.coef * theta(s.index); break;
    }
  }
  return tau;
}

inline SvarmaParams unpack(const VectorXd& theta, const SvarmaSpec& spec) {
  const ThetaLayout TL = make_theta_layout(spec);
  if (theta.size() != TL.size()) throw Error("dimension_mismatch", "theta has the wrong length for this spec");
  const TauLayout& L = TL.tau;
  const int n = spec.n;
  const VectorXd tau = tau_full(theta, L);
  auto block = [&](int off) { return Eigen::Map<const MatrixXd>(tau.data() + off, n, n).eval(); };
  SvarmaParams P;
  for (int i = 1; i <= spec.p; ++i) P.a.push_back(block(L.a_off(i)));
  for (int j = 0; j <= L.dp; ++j) P.p.push_back(block(L.p_off(j)));
  for (int m = 0; m <= L.kappa + 1; ++m) P.g.push_back(block(L.g_off(m)));
  P.B = MatrixXd::Identity(n, n);
  int idx = TL.beta_off();
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r)
      if (r != c) P.B(r, c) = theta(idx++);
  P.sigma = theta.segment(TL.sigma_off(), n);
  for (int i = 0; i < n; ++i) P.lambda.push_back(theta.segment(TL.lambda_off(i), TL.lambda_dims[static_cast<std::size_t>(i)]));
  return P;
}

/// Inverse of unpack; every restriction is checked and the first violated
/// entry reported.
inline VectorXd pack(const SvarmaParams& P, const SvarmaSpec& spec) {
  const ThetaLayout TL = make_theta_layout(spec);
  const TauLayout& L = TL.tau;
  const int n = spec.n;
  if (static_cast<int>(P.a.size()) != spec.p || static_cast<int>(P.p.size()) != L.dp + 1 ||
      static_cast<int>(P.g.size()) != L.kappa + 2)
    throw Error("dimension_mismatch", "coefficient counts do not match the spec");
  VectorXd tau(L.size());
  auto put = [&](int off, const MatrixXd& m) {
    if (m.rows() != n || m.cols() != n) throw Error("dimension_mismatch", "coefficient matrix has the wrong shape");
    Eigen::Map<MatrixXd>(tau.data() + off, n, n) = m;
  };
  for (int i = 1; i <= spec.p; ++i) put(L.a_off(i), P.a[static_cast<std::size_t>(i - 1)]);
  for (int j = 0; j <= L.dp; ++j) put(L.p_off(j), P.p[static_cast<std::size_t>(j)]);
  for (int m = 0; m <= L.kappa + 1; ++m) put(L.g_off(m), P.g[static_cast<std::size_t>(m)]);
  VectorXd theta(TL.size());
  for (int i = 0; i < L.n_free(); ++i) theta(i) = tau(L.free_to_tau[static_cast<std::size_t>(i)]);
  const double tol = 1e-12;
  for (int i = 0; i < L.size(); ++i) {
    const Slot& s = L.slots[static_cast<std::size_t>(i)];
    double expect = tau(i);
    if (s.kind == Slot::fixed) expect = s.value;
    if (s.kind == Slot::tied) expect = s.coef * theta(s.index);
    if (std::abs(expect - tau(i)) > tol * (1.0 + std::abs(expect)))
      throw Error("restriction_violation", "restriction on tau entry " + std::to_string(i) + " is violated (expected " +
                                               std::to_string(expect) + ", got " + std::to_string(tau(i)) + ")");
  }
  if (P.B.rows() != n || P.B.cols() != n) throw Error("dimension_mismatch", "B has the wrong shape");
  int idx = TL.beta_off();
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) {
      if (r == c) {
        if (std::abs(P.B(r, c) - 1.0) > tol) throw Error("restriction_violation", "B must have a unit diagonal");
      } else {
        theta(idx++) = P.B(r, c);
      }
    }
  if (P.sigma.size() != n) throw Error("dimension_mismatch", "sigma has the wrong length");
  theta.segment(TL.sigma_off(), n) = P.sigma;
  if (static_cast<int>(P.lambda.size()) != n) throw Error("dimension_mismatch", "one lambda block per shock is required");
  for (int i = 0; i < n; ++i) {
    if (P.lambda[static_cast<std::size_t>(i)].size() != TL.lambda_dims[static_cast<std::size_t>(i)])
      throw Error("dimension_mismatch", "lambda block has the wrong length");
    theta.segment(TL.lambda_off(i), TL.lambda_dims[static_cast<std::size_t>(i)]) = P.lambda[static_cast<std::size_t>(i)];
  }
  return theta;
}

/// g coefficients g_0..g_{kappa+1} of a normalised triple (g = s f).
inline std::vector<MatrixXd> g_from_triple(const WhfTriple<double>& t, const PartialIndices& pi) {
  const int n = pi.n;
  const auto kap = pi.vector();
  std::vector<MatrixXd> g(static_cast<std::size_t>(pi.kappa) + 2, MatrixXd::Zero(n, n));
  for (int m = 0; m <= pi.kappa + 1; ++m)
    for (int i = 0; i < n; ++i) {
      const int j = kap[static_cast<std::size_t>(i)] - m;
      if (j >= 0) g[static_cast<std::size_t>(m)].row(i) = t.f_coeff(j).row(i);
    }
  return g;
}

/// Density objects carrying the lambda values of P.
inline std::vector<ShockDensity> densities_at(const SvarmaParams& P, const SvarmaSpec& spec) {
  std::vector<ShockDensity> out = spec.densities;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].lambda = P.lambda[i];
  return out;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationReport {
  bool stable = true;                ///< det a(z) != 0 for |z| <= 1
  bool no_unit_circle_zeros = true;  ///< det b(z) away from |z| = 1
  bool root_count = true;            ///< n kappa + k zeros inside
  bool coprime = true;               ///< [a(z0) b(z0)] full rank at zeros of det a
  bool full_rank_ap_bq = true;       ///< (a_p, b_q) full row rank
  bool B_nonsingular = true;
  bool p_zero_free = true;           ///< det p(z) != 0 for |z| <= 1
  bool f_zero_free = true;           ///< g row-reduced with all det zeros inside
  bool sigma_positive = true;
  bool densities_admissible = true;
  std::vector<std::string> messages;

  /// Conditions the likelihood needs (the identification conditions
  /// coprime and full_rank_ap_bq are reported but not required).
  bool filter_ok() const {
    return stable && no_unit_circle_zeros && root_count && B_nonsingular && p_zero_free && f_zero_free &&
           sigma_positive && densities_admissible;
  }
  bool ok() const { return filter_ok() && coprime && full_rank_ap_bq; }
};

namespace detail {

inline bool min_modulus_above(const PolyMat<double>& m, double bound) {
  const auto d = det_poly(m);
  if (d.is_zero()) return false;
  if (d.degree() == 0) return true;
  for (const auto& r : roots(d))
    if (std::abs(r.value) <= bound) return false;
  return true;
}

inline double smallest_sv_ratio(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0.0;
  return sv(sv.size() - 1) / sv(0);
}

}  // namespace detail

/// With identification = false only the conditions the likelihood needs are
/// evaluated (cheaper; used inside the optimiser).
inline ValidationReport validate(const SvarmaParams& P, const SvarmaSpec& spec, bool identification = true) {
  ValidationReport rep;
  const int n = spec.n;
  auto fail = [&](bool& flag, const std::string& msg) {
    flag = false;
    rep.messages.push_back(msg);
  };
  for (int i = 0; i < n; ++i)
    if (!(P.sigma(i) > 0.0) || !std::isfinite(P.sigma(i))) {
      fail(rep.sigma_positive, "sigma must be positive");
      break;
    }
  const auto dens = densities_at(P, spec);
  for (const auto& d : dens)
    if (!d.admissible()) {
      fail(rep.densities_admissible, "density parameters inadmissible");
      break;
    }
  if (!P.B.allFinite() || detail::singular<double>(P.B)) fail(rep.B_nonsingular, "B is singular");
  for (const auto& m : P.a)
    if (!m.allFinite()) return fail(rep.stable, "non-finite AR coefficient"), rep;
  for (const auto& m : P.p)
    if (!m.allFinite()) return fail(rep.p_zero_free, "non-finite p coefficient"), rep;
  for (const auto& m : P.g)
    if (!m.allFinite()) return fail(rep.f_zero_free, "non-finite g coefficient"), rep;

  const PolyMat<double> a = P.a_poly();
  if (!detail::min_modulus_above(a, 1.0 + kUnitCircleTol)) fail(rep.stable, "det a(z) has a zero in the closed unit disc");
  if (!detail::min_modulus_above(P.p_poly(), 1.0 + kUnitCircleTol))
    fail(rep.p_zero_free, "det p(z) has a zero in the closed unit disc");
  const auto kap = spec.kappas();
  const auto f = P.f(kap);
  if (detail::singular<double>(f[0])) {
    fail(rep.f_zero_free, "f0 is singular");
  } else {
    // det g(z) must have all zeros strictly inside
    const auto dg = det_poly(P.g_poly());
    int total = 0;
    for (int kk : kap) total += kk;
    if (dg.degree() != total) {
      fail(rep.f_zero_free, "det g(z) has the wrong degree");
    } else if (total > 0) {
      for (const auto& r : roots(dg))
        if (std::abs(r.value) >= 1.0 - kUnitCircleTol) {
          fail(rep.f_zero_free, "det f has a zero outside the unit disc");
          break;
        }
    }
  }
  const PolyMat<double> b = P.b_poly();
  const auto db = det_poly(b);
  if (db.is_zero()) {
    fail(rep.no_unit_circle_zeros, "det b(z) vanishes identically");
    rep.root_count = false;
  } else if (db.degree() > 0) {
    const auto rs = roots(db);
    for (const auto& r : rs)
      if (r.on_unit_circle) {
        fail(rep.no_unit_circle_zeros, "det b(z) has a zero on the unit circle");
        break;
      }
    if (count_roots_inside(rs) != spec.indices.zeros_inside())
      fail(rep.root_count, "number of det b(z) zeros inside the unit circle differs from n kappa + k");
  } else if (spec.indices.zeros_inside() != 0) {
    fail(rep.root_count, "number of det b(z) zeros inside the unit circle differs from n kappa + k");
  }
  if (!identification) return rep;

  const auto da = det_poly(a);
  if (da.degree() > 0 && !db.is_zero()) {
    for (const auto& r : roots(da)) {
      Eigen::MatrixXcd comp(n, 2 * n);
      comp << a.eval(r.value), b.eval(r.value);
      if (detail::smallest_sv_ratio(comp) <= 1e-8) {
        fail(rep.coprime, "a(z) and b(z) are not left coprime");
        break;
      }
    }
  }
  Eigen::MatrixXcd ab(n, 2 * n);
  ab << a.coeff(spec.p).cast<Complex>(), b.coeff(spec.q).cast<Complex>();
  if (detail::smallest_sv_ratio(ab) <= 1e-8) fail(rep.full_rank_ap_bq, "(a_p, b_q) is rank deficient");
  return rep;
}

inline ValidationReport validate(const VectorXd& theta, const SvarmaSpec& spec, bool identification = true) {
  return validate(unpack(theta, spec), spec, identification);
}

// ---------------------------------------------------------------------------
// Impulse responses and spectral density
// ---------------------------------------------------------------------------

/// Power-series coefficients k_0..k_H of a(z)^{-1} b(z) B.
inline std::vector<MatrixXd> transfer_irf(const SvarmaParams& P, int horizon) {
  if (!detail::min_modulus_above(P.a_poly(), 1.0 + kUnitCircleTol))
    throw Error("unstable_ar", "det a(z) has a zero in the closed unit disc");
  const PolyMat<double> b = P.b_poly();
  std::vector<MatrixXd> k;
  for (int j = 0; j <= horizon; ++j) {
    MatrixXd kj = j <= b.degree() ? MatrixXd(b.coeff(j) * P.B) : MatrixXd::Zero(P.B.rows(), P.B.cols());
    for (int i = 1; i <= std::min<int>(j, static_cast<int>(P.a.size())); ++i)
      kj += P.a[static_cast<std::size_t>(i - 1)] * k[static_cast<std::size_t>(j - i)];
    k.push_back(kj);
  }
  return k;
}

inline std::vector<MatrixXd> transfer_irf(const VectorXd& theta, const SvarmaSpec& spec, int horizon) {
  return transfer_irf(unpack(theta, spec), horizon);
}

/// Frequencies 2 pi j / m, j = 0..m-1.
inline std::vector<double> frequency_grid(int m) {
  std::vector<double> w(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) w[static_cast<std::size_t>(j)] = 2.0 * std::numbers::pi * j / m;
  return w;
}

/// (1/2pi) k(z) Sigma^2 k(z)^* at z = exp(-i w), k = a^{-1} b B.
inline std::vector<Eigen::MatrixXcd> spectral_density(const PolyMat<double>& a, const PolyMat<double>& b,
                                                      const MatrixXd& B, const VectorXd& sigma,
                                                      const std::vector<double>& freqs) {
  std::vector<Eigen::MatrixXcd> out;
  const Eigen::MatrixXcd S2 = sigma.array().square().matrix().asDiagonal().toDenseMatrix().cast<Complex>();
  for (double w : freqs) {
    const Complex z = std::polar(1.0, -w);
    const Eigen::MatrixXcd kz = a.eval(z).fullPivLu().solve(b.eval(z) * B.cast<Complex>());
    out.push_back(kz * S2 * kz.adjoint() / (2.0 * std::numbers::pi));
  }
  return out;
}

inline std::vector<Eigen::MatrixXcd> spectral_density(const SvarmaParams& P, const std::vector<double>& freqs) {
  return spectral_density(P.a_poly(), P.b_poly(), P.B, P.sigma, freqs);
}

inline std::vector<Eigen::MatrixXcd> spectral_density(const VectorXd& theta, const SvarmaSpec& spec,
                                                      const std::vector<double>& freqs) {
  return spectral_density(unpack(theta, spec), freqs);
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

struct Simulation {
  Dataset data;
  MatrixXd shocks;  ///< T x n, Sigma-scaled structural shocks (B^{-1} u_t)
};

inline constexpr int kDefaultBurnIn = 500;

inline Simulation simulate(const SvarmaParams& P, const SvarmaSpec& spec, int T, int burn_in, std::uint64_t seed) {
  if (T < 1 || burn_in < 0) throw Error("invalid_argument", "T >= 1 and burn_in >= 0 are required");
  const auto rep = validate(P, spec, false);
  if (!rep.stable) throw Error("unstable_ar", "det a(z) has a zero in the closed unit disc");
  const auto dens = densities_at(P, spec);
  for (const auto& d : dens) {
    d.check();
    if (!moment_exists(d, 2)) throw Error("inadmissible_density", "shock variance does not exist");
  }
  const int n = spec.n;
  const int total = T + burn_in;
  Rng rng(seed);
  MatrixXd e(total, n);
  for (int t = 0; t < total; ++t)
    for (int i = 0; i < n; ++i) e(t, i) = P.sigma(i) * draw(dens[static_cast<std::size_t>(i)], rng);
  const MatrixXd u = e * P.B.transpose();
  const PolyMat<double> b = P.b_poly();
  MatrixXd y = MatrixXd::Zero(total, n);
  for (int t = 0; t < total; ++t) {
    VectorXd yt = VectorXd::Zero(n);
    for (int j = 0; j <= b.degree() && j <= t; ++j) yt += b.coeff(j) * u.row(t - j).transpose();
    for (int i = 1; i <= spec.p && i <= t; ++i) yt += P.a[static_cast<std::size_t>(i - 1)] * y.row(t - i).transpose();
    y.row(t) = yt.transpose();
  }
  Simulation s;
  s.data.values = y.bottomRows(T);
  for (int i = 0; i < n; ++i) s.data.names.push_back("y" + std::to_string(i + 1));
  s.shocks = e.bottomRows(T);
  return s;
}

inline Simulation simulate(const VectorXd& theta, const SvarmaSpec& spec, int T, int burn_in, std::uint64_t seed) {
  return simulate(unpack(theta, spec), spec, T, burn_in, seed);
}

// ---------------------------------------------------------------------------
// Identification of B up to signed permutation
// ---------------------------------------------------------------------------

enum class IdScheme { lms, cb };

inline std::string to_string(IdScheme s) { return s == IdScheme::lms ? "lms" : "cb"; }
inline IdScheme parse_id_scheme(const std::string& s) {
  if (s == "lms") return IdScheme::lms;
  if (s == "cb") return IdScheme::cb;
  throw Error("invalid_config", "unknown identification scheme '" + s + "'");
}

struct IdentifiedB {
  MatrixXd B;               ///< canonical representative
  VectorXd sigma;           ///< lms: positive scales; cb: ones
  std::vector<int> perm;    ///< new column j is old column perm[j]
  VectorXd scale;           ///< old column perm[j] = scale[j] * new column j
};

inline IdentifiedB identify_B(const MatrixXd& Bin, IdScheme scheme) {
  const int n = static_cast<int>(Bin.rows());
  if (Bin.cols() != n || detail::singular<double>(Bin)) throw Error("singular_matrix", "B must be square and nonsingular");
  MatrixXd Bn = Bin;
  VectorXd norms(n);
  for (int j = 0; j < n; ++j) {
    norms(j) = Bin.col(j).norm();
    Bn.col(j) /= norms(j);
  }
  IdentifiedB out;
  out.perm.resize(static_cast<std::size_t>(n));
  out.scale.resize(n);
  out.B.resize(n, n);
  if (scheme == IdScheme::lms) {
    std::vector<int> remaining(static_cast<std::size_t>(n));
    std::iota(remaining.begin(), remaining.end(), 0);
    const double tie = 1e-12;
    for (int i = 0; i < n; ++i) {
      int best = -1;
      double bv = -1.0;
      bool tied = false;
      for (int c : remaining) {
        const double v = std::abs(Bn(i, c));
        if (v > bv + tie) {
          bv = v;
          best = c;
          tied = false;
        } else if (std::abs(v - bv) <= tie) {
          tied = true;
        }
      }
      if (tied || bv <= tie)
        throw Error("lms_undefined",
                    "the lms identification scheme is not defined for this B (no strictly dominant diagonal ordering)");
      out.perm[static_cast<std::size_t>(i)] = best;
      remaining.erase(std::find(remaining.begin(), remaining.end(), best));
    }
    out.sigma.resize(n);
    for (int j = 0; j < n; ++j) {
      const int c = out.perm[static_cast<std::size_t>(j)];
      const double dj = Bn(j, c);
      out.B.col(j) = Bn.col(c) / dj;
      out.scale(j) = dj * norms(c);
      out.sigma(j) = std::abs(out.scale(j));
    }
  } else {
    VectorXd sgn(n);
    for (int j = 0; j < n; ++j) {
      Eigen::Index imax = 0;
      Bn.col(j).cwiseAbs().maxCoeff(&imax);
      sgn(j) = Bn(imax, j) < 0 ? -1.0 : 1.0;
      Bn.col(j) *= sgn(j);
    }
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int c, int d) {
      for (int r = 0; r < n; ++r) {
        if (Bn(r, c) < Bn(r, d)) return true;
        if (Bn(r, c) > Bn(r, d)) return false;
      }
      return false;
    });
    for (int j = 0; j < n; ++j) {
      const int c = order[static_cast<std::size_t>(j)];
      out.perm[static_cast<std::size_t>(j)] = c;
      out.B.col(j) = Bn.col(c);
      out.scale(j) = sgn(c) * norms(c);
    }
    out.sigma = VectorXd::Ones(n);
  }
  return out;
}

/// Applies the signed permutation chosen by `scheme` on B Sigma to the
/// parameters: B back to unit diagonal, sigma rescaled, shock densities
/// permuted and the SGT skewness flipped for sign changes.
inline SvarmaParams identify_params(const SvarmaParams& P, IdScheme scheme) {
  const int n = static_cast<int>(P.B.rows());
  const MatrixXd M = P.B * P.sigma.asDiagonal();
  const IdentifiedB id = identify_B(M, scheme);
  SvarmaParams out = P;
  for (int j = 0; j < n; ++j) {
    const int c = id.perm[static_cast<std::size_t>(j)];
    // new column j of M = sign * old column c of M / |.|; flip shock sign when needed
    const double dsign = id.scale(j) < 0 ? -1.0 : 1.0;
    const VectorXd col = dsign * M.col(c);
    if (std::abs(col(j)) < 1e-14) throw Error("singular_matrix", "identified B has a zero diagonal entry");
    out.B.col(j) = col / col(j);
    out.sigma(j) = std::abs(col(j));
    const double flip = (col(j) < 0 ? -1.0 : 1.0) * dsign;
    out.lambda[static_cast<std::size_t>(j)] = P.lambda[static_cast<std::size_t>(c)];
    if (flip < 0 && out.lambda[static_cast<std::size_t>(j)].size() == 3) out.lambda[static_cast<std::size_t>(j)](0) *= -1.0;
  }
  return out;
}

}  // namespace svwhf
