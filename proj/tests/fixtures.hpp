#pragma once

// Reference systems shared by the unit tests and the acceptance runner.

#include <initializer_list>
#include <string>

#include "svwhf.hpp"

namespace fixtures {

using namespace svwhf;

inline MatrixXq q2(std::initializer_list<const char*> v) {
  MatrixXq m(2, 2);
  int i = 0;
  for (const char* s : v) {
    m(i / 2, i % 2) = parse_rational(s);
    ++i;
  }
  return m;
}

/// Bivariate degree-3 MA polynomial with index vector (2,1), given as a
/// non-canonical triple.
inline WhfTriple<Rational> worked_triple() {
  WhfTriple<Rational> t;
  t.p = PolyMat<Rational>({q2({"1", "1/4", "1/3", "1/2"}), q2({"1/2", "1/3", "1/4", "1/3"}), q2({"0", "1/3", "0", "1/2"})});
  t.index_vector = {2, 1};
  t.f = LaurentMat<Rational>(-2, {q2({"1/6", "1/7", "0", "0"}), q2({"1/2", "1/5", "1/4", "1/3"}), q2({"1", "2", "3", "4"})});
  return t;
}

inline PolyMat<Rational> worked_b() { return compose(worked_triple()); }

/// [[z^2, 0], [eps z, 1]]
inline PolyMat<Rational> b_eps(const Rational& eps) {
  using P = Poly<Rational>;
  return PolyMat<Rational>::from_entries({{P::monomial(2, Rational(1)), P()}, {P::monomial(1, eps), P::constant(Rational(1))}});
}

/// (p,q,kappa,k) = (1,1,0,1), n = 2, SGT(0.5,2,10) shocks, natural normalisation.
inline SvarmaSpec noninvertible_spec() {
  SvarmaSpec s;
  s.n = 2;
  s.p = 1;
  s.q = 1;
  s.indices = {0, 1, 2};
  s.densities = {ShockDensity::sgt(0.5, 2, 10), ShockDensity::sgt(0.5, 2, 10)};
  return s;
}

inline SvarmaParams noninvertible_params() {
  SvarmaParams P;
  P.a = {MatrixXd{{0.5, 0.1}, {-0.2, 0.3}}};
  P.p = {MatrixXd{{1, 0}, {0.2, 1}}, MatrixXd{{0, 0}, {0, 0.4}}};
  P.g = {MatrixXd{{0.4, 0.1}, {0, 1}}, MatrixXd{{1, 0}, {0, 0}}};
  P.B = MatrixXd{{1, 0.3}, {-0.4, 1}};
  P.sigma = VectorXd::Ones(2);
  P.lambda = {Eigen::Vector3d(0.5, 2, 10), Eigen::Vector3d(0.5, 2, 10)};
  return P;
}

/// Truth in canonical (column-identified) coordinates.
inline VectorXd noninvertible_theta() {
  return pack(identify_params(noninvertible_params(), IdScheme::cb), noninvertible_spec());
}

/// Same AR part, all MA zeros outside the unit disc.
inline SvarmaSpec invertible_spec() {
  SvarmaSpec s = noninvertible_spec();
  s.indices = {0, 0, 2};
  return s;
}

inline SvarmaParams invertible_params() {
  SvarmaParams P = noninvertible_params();
  P.p = {MatrixXd::Identity(2, 2), MatrixXd{{0.4, 0.2}, {-0.1, 0.3}}};
  P.g = {MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2)};
  return P;
}

inline VectorXd invertible_theta() { return pack(identify_params(invertible_params(), IdScheme::cb), invertible_spec()); }

/// One multistart and no simplex rounds.
inline OptimSchedule lean_schedule() {
  OptimSchedule s;
  s.multistarts = 1;
  for (auto& st : s.stages) st.simplex_iter = 0;
  return s;
}

/// Spec with n = 2, (p,q) and indices, every shock of `family`.
inline SvarmaSpec spec_of(int p, int q, int kappa, int k, Family family, WhfMode mode = WhfMode::natural) {
  SvarmaSpec s;
  s.n = 2;
  s.p = p;
  s.q = q;
  s.indices = {kappa, k, 2};
  s.normalization = mode;
  s.densities.assign(2, ShockDensity::gaussian());
  return s.with_family(family);
}

/// Random admissible theta near a stable, well-conditioned system.
inline VectorXd random_admissible(const SvarmaSpec& spec, Rng& rng, double scale = 0.15) {
  const ThetaLayout TL = make_theta_layout(spec);
  std::normal_distribution<double> nd(0.0, scale);
  std::uniform_real_distribution<double> ul(-0.6, 0.6), up(1.5, 3.0), uq(2.0, 8.0), us(0.6, 1.6);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    VectorXd th = VectorXd::Zero(TL.size());
    for (int i = 0; i < TL.n_tau_free(); ++i) th(i) = nd(rng);
    SvarmaParams P = unpack(th, spec);
    for (auto& a : P.a) a += MatrixXd::Identity(spec.n, spec.n) * 0.3;
    std::uniform_real_distribution<double> ub(-0.5, 0.5);
    for (int c = 0; c < spec.n; ++c)
      for (int r = 0; r < spec.n; ++r)
        if (r != c) P.B(r, c) = ub(rng);
    for (int i = 0; i < spec.n; ++i) P.sigma(i) = us(rng);
    for (auto& l : P.lambda)
      if (l.size() == 3) {
        l << ul(rng), up(rng), uq(rng);
        if (l(1) * l(2) <= 2.5) l(2) = 3.0 / l(1);
      }
    const VectorXd out = pack(P, spec);
    if (validate(out, spec).ok()) return out;
  }
  throw Error("invalid_argument", "no admissible draw found");
}

}  // namespace fixtures
