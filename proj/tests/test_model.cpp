#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"

using namespace svwhf;

namespace {

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double central_moment(const std::vector<double>& v, int r) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += std::pow(x - m, r);
  return s / static_cast<double>(v.size());
}

SvarmaSpec scalar_spec(int p, int q, int kappa) {
  SvarmaSpec s;
  s.n = 1;
  s.p = p;
  s.q = q;
  s.indices = {kappa, 0, 1};
  s.densities = {ShockDensity::gaussian()};
  return s;
}

SvarmaParams scalar_params(std::vector<double> a, std::vector<double> p, std::vector<double> g, double sigma = 1.0) {
  SvarmaParams P;
  for (double x : a) P.a.push_back(MatrixXd::Constant(1, 1, x));
  for (double x : p) P.p.push_back(MatrixXd::Constant(1, 1, x));
  for (double x : g) P.g.push_back(MatrixXd::Constant(1, 1, x));
  P.B = MatrixXd::Identity(1, 1);
  P.sigma = VectorXd::Constant(1, sigma);
  P.lambda = {VectorXd()};
  return P;
}

}  // namespace

// --- densities -------------------------------------------------------------

TEST(Densities, GaussianAtZero) {
  EXPECT_NEAR(log_density(0.0, ShockDensity::gaussian()), -0.5 * std::log(2 * std::numbers::pi), 1e-15);
}

TEST(Densities, LaplaceSlope) {
  const auto d = ShockDensity::laplace();
  EXPECT_NEAR(d_dx(0.7, d), -std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(d_dx(-1.3, d), std::sqrt(2.0), 1e-14);
}

TEST(Densities, SymmetricSgt) {
  const auto d = ShockDensity::sgt(0.0, 2.0, 5.0);
  EXPECT_NEAR(d_dx(1e-9, d) + d_dx(-1e-9, d), 0.0, 1e-12);
  for (double x : {0.3, 1.1, 4.0}) EXPECT_NEAR(log_density(x, d), log_density(-x, d), 1e-14);
}

TEST(Densities, StandardisedMoments) {
  boost::math::quadrature::tanh_sinh<double> ts;
  for (const auto& d : {ShockDensity::sgt(0.5, 2, 10), ShockDensity::sgt(-0.3, 1.5, 3), ShockDensity::sgt(0.8, 1.2, 5),
                        ShockDensity::laplace(), ShockDensity::gaussian()}) {
    auto dens = [&](double x) { return std::exp(log_density(x, d)); };
    const double inf = std::numeric_limits<double>::infinity();
    EXPECT_NEAR(ts.integrate(dens, -inf, inf), 1.0, 1e-8);
    EXPECT_NEAR(ts.integrate([&](double x) { return x * dens(x); }, -inf, inf), 0.0, 1e-8);
    EXPECT_NEAR(ts.integrate([&](double x) { return x * x * dens(x); }, -inf, inf), 1.0, 1e-7);
  }
}

TEST(Densities, AnalyticDerivativesMatchDifferences) {
  for (const auto& d : {ShockDensity::sgt(0.5, 2, 10), ShockDensity::sgt(-0.3, 1.5, 3), ShockDensity::sgt(0.2, 3, 40)}) {
    for (double x : {-1.7, -0.2, 0.4, 2.5}) {
      const double h = 1e-6;
      EXPECT_NEAR(d_dx(x, d), (log_density(x + h, d) - log_density(x - h, d)) / (2 * h), 1e-6);
      const VectorXd g = d_dlambda(x, d);
      for (int k = 0; k < 3; ++k) {
        auto dp = d, dm = d;
        dp.lambda(k) += h;
        dm.lambda(k) -= h;
        EXPECT_NEAR(g(k), (log_density(x, dp) - log_density(x, dm)) / (2 * h), 1e-6 * std::max(1.0, std::abs(g(k))));
      }
    }
  }
}

TEST(Densities, MomentExistence) {
  EXPECT_FALSE(moment_exists(ShockDensity::sgt(0, 2, 0.5), 2));
  EXPECT_TRUE(moment_exists(ShockDensity::sgt(0, 1, 3), 2));
  EXPECT_FALSE(moment_exists(ShockDensity::sgt(0, 1, 3), 3));
  EXPECT_TRUE(moment_exists(ShockDensity::gaussian(), 12));
}

TEST(Densities, SamplingMoments) {
  Rng rng(42);
  const auto g = sample(ShockDensity::gaussian(), 1000000, rng);
  EXPECT_LT(std::abs(mean(g)), 0.005);
  const auto l = sample(ShockDensity::laplace(), 1000000, rng);
  EXPECT_LT(std::abs(central_moment(l, 2) - 1.0), 0.02);
  const auto s = sample(ShockDensity::sgt(0.5, 2, 10), 200000, rng);
  EXPECT_GT(central_moment(s, 3), 0.0);
  EXPECT_LT(std::abs(mean(s)), 0.01);
}

// --- model -----------------------------------------------------------------

TEST(Model, PackRoundTrip) {
  Rng rng(3);
  for (auto [kappa, k] : std::vector<std::pair<int, int>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 0}}) {
    const auto spec = fixtures::spec_of(1, 2, kappa, k, Family::sgt);
    const VectorXd th = fixtures::random_admissible(spec, rng);
    EXPECT_EQ(pack(unpack(th, spec), spec), th);
  }
}

TEST(Model, SystemParameterCountDependsOnOrdersOnly) {
  for (const auto& pi : feasible_indices(2, 2)) {
    SvarmaSpec s = fixtures::spec_of(1, 2, pi.kappa, pi.k, Family::gaussian);
    EXPECT_EQ(make_theta_layout(s).n_tau_free(), 12);
    EXPECT_EQ(count_free_parameters(s), 12 + 2 + 2);
  }
}

TEST(Model, NaturalModeWithoutExcessRowsFixesLeadingG) {
  const auto spec = fixtures::spec_of(0, 2, 1, 0, Family::gaussian);
  const TauLayout L = make_layout(spec);
  // g_{kappa+1} is zero and g_kappa = I: only g_0..g_{kappa-1} are free
  for (int e = L.g_off(1); e < L.size(); ++e) EXPECT_NE(L.slots[static_cast<std::size_t>(e)].kind, Slot::free);
  for (int e = L.g_off(0); e < L.g_off(1); ++e) EXPECT_EQ(L.slots[static_cast<std::size_t>(e)].kind, Slot::free);
}

TEST(Model, Validation) {
  SvarmaSpec spec;
  spec.n = 2;
  spec.indices = {0, 0, 2};
  spec.densities.assign(2, ShockDensity::gaussian());
  spec.p = 1;
  SvarmaParams P;
  P.a = {MatrixXd::Identity(2, 2) * 0.5};
  P.p = {MatrixXd::Identity(2, 2)};
  P.g = {MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2)};
  P.B = MatrixXd::Identity(2, 2);
  P.sigma = VectorXd::Ones(2);
  P.lambda = {VectorXd(), VectorXd()};
  EXPECT_TRUE(validate(P, spec).ok());
  P.a = {MatrixXd::Identity(2, 2)};
  const auto rep = validate(P, spec);
  EXPECT_FALSE(rep.stable);
  EXPECT_FALSE(rep.ok());

  const auto s1 = scalar_spec(1, 1, 0);
  const auto Q = scalar_params({0.5}, {1.0, -0.5}, {1.0, 0.0});
  const auto r1 = validate(Q, s1);
  EXPECT_TRUE(r1.filter_ok());
  EXPECT_FALSE(r1.coprime);
}

TEST(Model, ImpulseResponses) {
  const auto s0 = fixtures::spec_of(0, 0, 0, 0, Family::gaussian);
  SvarmaParams P0 = unpack(VectorXd::Zero(count_free_parameters(s0)), s0);
  P0.B = MatrixXd{{1, 0.2}, {0.5, 1}};
  P0.sigma = VectorXd::Ones(2);
  const auto k0 = transfer_irf(P0, 3);
  EXPECT_TRUE(k0[0].isApprox(P0.B));
  for (int j = 1; j <= 3; ++j) EXPECT_EQ(k0[static_cast<std::size_t>(j)].cwiseAbs().maxCoeff(), 0.0);

  SvarmaParams V = P0;
  V.a = {MatrixXd{{0.5, 0.1}, {-0.2, 0.3}}};
  const auto kv = transfer_irf(V, 5);
  MatrixXd pw = MatrixXd::Identity(2, 2);
  for (int j = 0; j <= 5; ++j) {
    EXPECT_LT((kv[static_cast<std::size_t>(j)] - pw * V.B).cwiseAbs().maxCoeff(), 1e-14);
    pw = pw * V.a[0];
  }

  const auto arma = scalar_params({0.5}, {1.0, 2.0}, {1.0, 0.0});
  const auto ka = transfer_irf(arma, 6);
  EXPECT_DOUBLE_EQ(ka[0](0, 0), 1.0);
  for (int j = 1; j <= 6; ++j) EXPECT_NEAR(ka[static_cast<std::size_t>(j)](0, 0), std::pow(0.5, j - 1) * 2.5, 1e-14);
}

TEST(Model, SpectralDensity) {
  const auto freqs = frequency_grid(16);
  const auto one = PolyMat<double>::identity(2);
  for (const auto& s : spectral_density(one, one, MatrixXd::Identity(2, 2), VectorXd::Ones(2), freqs))
    EXPECT_LT((s - Eigen::MatrixXcd::Identity(2, 2) / (2 * std::numbers::pi)).cwiseAbs().maxCoeff(), 1e-15);
  const PolyMat<double> ma({MatrixXd::Constant(1, 1, 1.0), MatrixXd::Constant(1, 1, 2.0)});
  const auto sd = spectral_density(PolyMat<double>::identity(1), ma, MatrixXd::Identity(1, 1), VectorXd::Ones(1), freqs);
  for (std::size_t i = 0; i < freqs.size(); ++i)
    EXPECT_NEAR(sd[i](0, 0).real(), (5 + 4 * std::cos(freqs[i])) / (2 * std::numbers::pi), 1e-14);
}

TEST(Model, ObservationallyEquivalentScalarPair) {
  const auto freqs = frequency_grid(64);
  const auto one = PolyMat<double>::identity(1);
  const PolyMat<double> b2({MatrixXd::Constant(1, 1, 1.0), MatrixXd::Constant(1, 1, 2.0)});
  const PolyMat<double> bh({MatrixXd::Constant(1, 1, 1.0), MatrixXd::Constant(1, 1, 0.5)});
  const auto s1 = spectral_density(one, b2, MatrixXd::Identity(1, 1), VectorXd::Constant(1, 1.0), freqs);
  const auto s2 = spectral_density(one, bh, MatrixXd::Identity(1, 1), VectorXd::Constant(1, 2.0), freqs);
  for (std::size_t i = 0; i < freqs.size(); ++i) EXPECT_NEAR(std::abs(s1[i](0, 0) - s2[i](0, 0)), 0.0, 1e-12);
}

TEST(Model, SimulationReproducibleAndLinear) {
  const auto spec = fixtures::noninvertible_spec();
  const auto P = fixtures::noninvertible_params();
  const auto a = simulate(P, spec, 300, 100, 9);
  const auto b = simulate(P, spec, 300, 100, 9);
  EXPECT_EQ(a.data.values, b.data.values);
  auto P2 = P;
  P2.sigma *= 2.0;
  const auto c = simulate(P2, spec, 300, 100, 9);
  EXPECT_LT((c.data.values - 2.0 * a.data.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Model, WhiteNoiseCovariance) {
  auto spec = fixtures::spec_of(0, 0, 0, 0, Family::gaussian);
  SvarmaParams P = unpack(VectorXd::Zero(count_free_parameters(spec)), spec);
  P.B = MatrixXd{{1, 0.4}, {-0.3, 1}};
  P.sigma = Eigen::Vector2d(0.7, 1.5);
  const auto sim = simulate(P, spec, 100000, 0, 5);
  const MatrixXd y = sim.data.values;
  const MatrixXd C = y.transpose() * y / static_cast<double>(y.rows());
  const MatrixXd M = P.B * P.sigma.asDiagonal();
  const MatrixXd truth = M * M.transpose();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(C(i, j), truth(i, j), 0.05 * std::sqrt(truth(i, i) * truth(j, j)));
}

TEST(Model, IdentificationSchemes) {
  EXPECT_TRUE(identify_B(MatrixXd::Identity(3, 3), IdScheme::lms).B.isApprox(MatrixXd::Identity(3, 3)));
  // ascending order puts e3 first
  const MatrixXd J = MatrixXd::Identity(3, 3).rowwise().reverse();
  EXPECT_TRUE(identify_B(MatrixXd::Identity(3, 3), IdScheme::cb).B.isApprox(J));
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    MatrixXd B(3, 3);
    for (int i = 0; i < 9; ++i) B.data()[i] = nd(rng);
    std::vector<int> perm{0, 1, 2};
    std::shuffle(perm.begin(), perm.end(), rng);
    MatrixXd Bp(3, 3);
    for (int j = 0; j < 3; ++j) Bp.col(j) = B.col(perm[static_cast<std::size_t>(j)]) * (coin(rng) ? -1.0 : 1.0) * (0.5 + j);
    for (IdScheme sc : {IdScheme::lms, IdScheme::cb}) {
      MatrixXd x, y;
      try {
        x = identify_B(B, sc).B;
      } catch (const Error&) {
        continue;
      }
      y = identify_B(Bp, sc).B;
      EXPECT_LT((x - y).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
  const MatrixXd tied{{1, 1}, {1, -1}};
  EXPECT_THROW(identify_B(tied, IdScheme::lms), Error);
  EXPECT_NO_THROW(identify_B(tied, IdScheme::cb));
}

// --- filtering -------------------------------------------------------------

TEST(Filtering, WhiteNoiseIsIdentity) {
  const auto spec = scalar_spec(0, 0, 0);
  const auto P = scalar_params({}, {1.0}, {1.0, 0.0});
  Series y(5, 1);
  y << 0.3, -1.0, 2.0, 0.1, -0.4;
  EXPECT_EQ(residuals(P, spec, y).eps, y);
}

TEST(Filtering, PureShift) {
  const auto spec = scalar_spec(0, 1, 1);
  const auto P = scalar_params({}, {1.0}, {0.0, 1.0, 0.0});
  Series y(5, 1);
  y << 0.3, -1.0, 2.0, 0.1, -0.4;
  const auto e = residuals(P, spec, y).eps;
  for (int t = 0; t < 4; ++t) EXPECT_EQ(e(t, 0), y(t + 1, 0));
  EXPECT_EQ(e(4, 0), 0.0);
}

TEST(Filtering, RecoversSimulatedShocks) {
  const auto spec = fixtures::noninvertible_spec();
  const auto P = fixtures::noninvertible_params();
  const auto sim = simulate(P, spec, 600, 500, 11);
  const auto r = residuals(P, spec, Series(sim.data.values));
  double worst = 0;
  for (int t = 150; t < 450; ++t)
    for (int i = 0; i < 2; ++i) worst = std::max(worst, std::abs(r.eps(t, i) - sim.shocks(t, i)));
  EXPECT_LT(worst, 1e-6);
}

// --- likelihood ------------------------------------------------------------

TEST(Likelihood, SingleGaussianObservation) {
  const auto spec = scalar_spec(0, 0, 0);
  const auto P = scalar_params({}, {1.0}, {1.0, 0.0});
  Series y = Series::Zero(1, 1);
  EXPECT_NEAR(evaluate(P, spec, y, false).value, -0.5 * std::log(2 * std::numbers::pi), 1e-15);
}

TEST(Likelihood, ScalingBShiftsByLogDeterminant) {
  auto spec = fixtures::spec_of(0, 0, 0, 0, Family::gaussian);
  SvarmaParams P = unpack(VectorXd::Zero(count_free_parameters(spec)), spec);
  P.B = MatrixXd{{1, 0.3}, {0.2, 1}};
  P.sigma = VectorXd::Ones(2);
  Series y = Series::Zero(4, 2);
  const double l1 = evaluate(P, spec, y, false).value;
  P.sigma *= 1.7;
  const double l2 = evaluate(P, spec, y, false).value;
  EXPECT_NEAR(l2 - l1, -2 * std::log(1.7), 1e-12);
}

TEST(Likelihood, GaussianSigmaScore) {
  const auto spec = fixtures::spec_of(1, 1, 0, 1, Family::gaussian);
  Rng rng(8);
  const VectorXd th = fixtures::random_admissible(spec, rng);
  const auto P = unpack(th, spec);
  const Series y = simulate(P, spec, 200, 100, 2).data.values;
  const MatrixXd sc = score_contributions(P, spec, y);
  const auto eps = residuals(P, spec, y).eps;
  const ThetaLayout TL = make_theta_layout(spec);
  const int off = TL.tau.size() + TL.n_beta();
  for (int t = 0; t < 200; ++t)
    for (int i = 0; i < 2; ++i) {
      const double s = P.sigma(i), e = eps(t, i);
      EXPECT_NEAR(sc(t, off + i), (e * e - s * s) / (s * s * s), 1e-12);
    }
}

TEST(Likelihood, ScoreMatchesFiniteDifferences) {
  Rng rng(21);
  for (auto [kappa, k] : std::vector<std::pair<int, int>>{{0, 0}, {0, 1}, {1, 0}})
    for (Family fam : {Family::gaussian, Family::laplace, Family::sgt}) {
      const auto spec = fixtures::spec_of(1, 2, kappa, k, fam);
      const VectorXd th = fixtures::random_admissible(spec, rng);
      const Series y = simulate(th, spec, 300, 200, 4).data.values;
      const VectorXd g = score(th, spec, y);
      for (int i = 0; i < th.size(); ++i) {
        const double h = 1e-6 * (1 + std::abs(th(i)));
        VectorXd a = th, b = th;
        a(i) += h;
        b(i) -= h;
        const double fd = (loglik(a, spec, y).value - loglik(b, spec, y).value) / (2 * h);
        EXPECT_LT(std::abs(fd - g(i)) / std::max(1e-3, std::abs(fd)), 1e-5) << "coordinate " << i;
      }
    }
}

TEST(Likelihood, GaussianSigmaStandardError) {
  const auto spec = scalar_spec(0, 0, 0);
  const auto P = scalar_params({}, {1.0}, {1.0, 0.0}, 1.5);
  const Series y = simulate(P, spec, 10000, 0, 12).data.values;
  const auto info = information_and_stderr(pack(P, spec), spec, y);
  const double expected = 1.5 / std::sqrt(2.0 * 10000);
  EXPECT_NEAR(info.stderr_(0), expected, 0.1 * expected);
}

TEST(Likelihood, UnrestrictedSandwichIsInverseInformation) {
  const auto spec = scalar_spec(0, 0, 0);
  const auto P = scalar_params({}, {1.0}, {1.0, 0.0}, 1.0);
  const Series y = simulate(P, spec, 2000, 0, 3).data.values;
  const auto info = information_and_stderr(pack(P, spec), spec, y);
  // only sigma is free: the fixed tau slots border the matrix, sigma stays unrestricted
  const int i = static_cast<int>(info.opg_full.rows()) - 1;
  EXPECT_NEAR(info.sandwich(0, 0), 1.0 / info.opg_full(i, i), 1e-10);
}

TEST(Likelihood, NearSingularBIsRejected) {
  const auto spec = fixtures::spec_of(0, 0, 0, 0, Family::gaussian);
  SvarmaParams P = unpack(VectorXd::Zero(count_free_parameters(spec)), spec);
  P.B = MatrixXd{{1, 1}, {1, 1 + 1e-15}};
  const Series y = Series::Random(50, 2);
  try {
    evaluate(P, spec, y, false);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "invalid_theta");
  }
}
