#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <numbers>
#include <sstream>

#include "fixtures.hpp"
#include "svwhf/cli.hpp"

using namespace svwhf;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("svwhf_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

struct CliRun {
  int code = 0;
  Json status;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "svwhf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream os;
  CliRun r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), os);
  r.status = Json::parse(os.str());
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MatrixXd small_sample(std::uint64_t seed, int T = 800) {
  return simulate(fixtures::invertible_params(), fixtures::invertible_spec(), T, 300, seed).data.values;
}

}  // namespace

// --- optimisers -------------------------------------------------------------

TEST(Optim, QuadraticSurrogate) {
  Rng rng(77);
  std::normal_distribution<double> nd;
  const int d = 6;
  MatrixXd M(d, d);
  for (int i = 0; i < d * d; ++i) M.data()[i] = nd(rng);
  const MatrixXd A = M * M.transpose() + MatrixXd::Identity(d, d);
  VectorXd xstar(d);
  for (int i = 0; i < d; ++i) xstar(i) = nd(rng);
  const GradFn fg = [&](const VectorXd& x, VectorXd& g) {
    const VectorXd r = x - xstar;
    g = -A * r;
    return -0.5 * r.dot(A * r);
  };
  const ValueFn fv = [&](const VectorXd& x) {
    VectorXd g;
    return fg(x, g);
  };
  const Box box = Box::unbounded(d);
  const auto bf = bfgs_maximize(fg, VectorXd::Zero(d), box, {500, 1e-14, 1e-10, 1.0});
  EXPECT_TRUE(bf.converged);
  EXPECT_LT((bf.x - xstar).cwiseAbs().maxCoeff(), 1e-6);
  const auto nm = nelder_mead_maximize(fv, VectorXd::Zero(d), box, {20000, 1e-16, 0.5});
  const auto polished = bfgs_maximize(fg, nm.x, box, {500, 1e-14, 1e-10, 1.0});
  EXPECT_LT((polished.x - xstar).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((nm.x - xstar).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Optim, BoxIsRespected) {
  const GradFn fg = [](const VectorXd& x, VectorXd& g) {
    g = -(x - VectorXd::Constant(2, 3.0));
    return -0.5 * (x - VectorXd::Constant(2, 3.0)).squaredNorm();
  };
  Box box{VectorXd::Constant(2, -1.0), VectorXd::Constant(2, 1.0)};
  const auto r = bfgs_maximize(fg, VectorXd::Zero(2), box);
  EXPECT_TRUE(r.converged);
  EXPECT_DOUBLE_EQ(r.x(0), 1.0);
  EXPECT_DOUBLE_EQ(r.x(1), 1.0);
}

TEST(Optim, InadmissibleStartIsReported) {
  const GradFn fg = [](const VectorXd&, VectorXd&) { return kMinusInf; };
  const auto r = bfgs_maximize(fg, VectorXd::Zero(3), Box::unbounded(3));
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.value, kMinusInf);
}

// --- estimate ----------------------------------------------------------------

TEST(Estimate, SkewnessStaysInsideItsBound) {
  const auto spec = fixtures::spec_of(0, 0, 0, 0, Family::sgt);
  const OptimSchedule sch;
  const ThetaLayout TL = make_theta_layout(spec);
  Rng rng(4);
  MatrixXd y(1500, 2);
  for (int t = 0; t < 1500; ++t)
    for (int i = 0; i < 2; ++i) y(t, i) = draw(ShockDensity::sgt(-0.2, 2, 10), rng);
  const Series ys(y);
  VectorXd th = pack(unpack(VectorXd::Zero(TL.size()), spec), spec);
  th.segment(TL.sigma_off(), 2).setOnes();
  for (int i = 0; i < 2; ++i) {
    th(TL.lambda_off(i)) = 0.99 * sch.skew_bound;
    th(TL.lambda_off(i) + 1) = 2.0;
    th(TL.lambda_off(i) + 2) = 4.0;
  }
  const detail::StageObjective obj{spec, ys};
  double worst = 0.0;
  const GradFn fg = [&](const VectorXd& x, VectorXd& g) {
    for (int i = 0; i < 2; ++i) worst = std::max(worst, std::abs(x(TL.lambda_off(i))));
    return obj.value_grad(x, g);
  };
  const ValueFn fv = [&](const VectorXd& x) {
    for (int i = 0; i < 2; ++i) worst = std::max(worst, std::abs(x(TL.lambda_off(i))));
    return obj.value(x);
  };
  const Box box = detail::theta_box(spec, sch);
  const auto nm = nelder_mead_maximize(fv, th, box, {300, 1e-8, 0.05});
  const auto bf = bfgs_maximize(fg, nm.x, box);
  EXPECT_TRUE(std::isfinite(bf.value));
  EXPECT_LT(worst, 1.0);
  EXPECT_LE(worst, sch.skew_bound);
}

TEST(Estimate, BicArithmetic) {
  EXPECT_NEAR(bic(-1.0, 10, 100), 200 + 10 * std::log(100.0), 1e-12);
  EXPECT_NEAR(bic(-1.0, 10, 100), 246.0517, 1e-4);
  EXPECT_LT(bic(-1.0, 9, 100), bic(-1.0, 10, 100));
  EXPECT_THROW(bic(-1.0, 1, 0), Error);
}

TEST(Estimate, DeterministicAndConverged) {
  const MatrixXd y = small_sample(31);
  const auto spec = fixtures::invertible_spec();
  const auto sch = fixtures::lean_schedule();
  const auto a = fit(spec, y, sch, 99);
  const auto b = fit(spec, y, sch, 99);
  EXPECT_EQ(a.theta_hat, b.theta_hat);
  EXPECT_EQ(a.loglik, b.loglik);
  EXPECT_TRUE(a.converged());
  EXPECT_LT(a.score_norm, 1e-4);
  EXPECT_TRUE(a.stderr_available);
  EXPECT_EQ(a.n_free, count_free_parameters(spec));
  EXPECT_NEAR(a.bic, bic(a.loglik, a.n_free, a.T), 1e-9);
  EXPECT_EQ(a.diagnostics.size(), 6u);
}

TEST(Estimate, RejectsBadData) {
  const auto spec = fixtures::invertible_spec();
  MatrixXd y = small_sample(1, 200);
  EXPECT_THROW(fit(spec, y.leftCols(1), fixtures::lean_schedule(), 1), Error);
  y(5, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(fit(spec, y, fixtures::lean_schedule(), 1), Error);
}

// --- select ------------------------------------------------------------------

TEST(Select, TaskEnumeration) {
  EXPECT_EQ(grid_tasks(2, 8, 8).size(), 729u);
  for (const auto& t : grid_tasks(2, 3, 0)) {
    EXPECT_EQ(t.indices.kappa, 0);
    EXPECT_EQ(t.indices.k, 0);
  }
  EXPECT_EQ(grid_tasks(2, 3, 0).size(), 4u);
  EXPECT_EQ(grid_tasks(2, 1, 1).size(), 8u);
}

TEST(Select, FreeParameterCountIsRegimeInvariant) {
  for (int p = 0; p <= 2; ++p)
    for (int q = 0; q <= 3; ++q) {
      std::set<int> counts;
      for (const auto& pi : feasible_indices(2, q)) counts.insert(count_free_parameters(fixtures::spec_of(p, q, pi.kappa, pi.k, Family::sgt)));
      EXPECT_EQ(counts.size(), 1u);
    }
}

TEST(Select, GridIsIndependentOfWorkerCount) {
  const MatrixXd y = small_sample(8, 600);
  GridOptions go;
  go.p_max = 0;
  go.q_max = 1;
  go.family = Family::gaussian;
  go.schedule = fixtures::lean_schedule();
  go.seed = 5;
  go.jobs = 1;
  const auto a = grid(y, go);
  go.jobs = 3;
  const auto b = grid(y, go);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].loglik, b.rows[i].loglik);
    EXPECT_EQ(a.rows[i].seed, b.rows[i].seed);
  }
  EXPECT_EQ(a.best, b.best);
  // equal n_free within a group: BIC order is loglik order
  const auto g = a.group(0, 1);
  for (int i : g)
    for (int j : g)
      if (a.rows[static_cast<std::size_t>(i)].ok && a.rows[static_cast<std::size_t>(j)].ok)
        EXPECT_EQ(a.rows[static_cast<std::size_t>(i)].bic < a.rows[static_cast<std::size_t>(j)].bic,
                  a.rows[static_cast<std::size_t>(i)].loglik > a.rows[static_cast<std::size_t>(j)].loglik);
}

TEST(Select, LongRunRotation) {
  const auto P = fixtures::noninvertible_params();
  const auto freqs = frequency_grid(64);
  const auto before = spectral_density(P, freqs);
  for (int shock = 0; shock < 2; ++shock)
    for (int var = 0; var < 2; ++var) {
      const auto rot = rotate_long_run(P, shock, var, 10);
      EXPECT_LT(std::abs(rot.long_run(var, shock)), 1e-10);
      EXPECT_LT((rot.Q.transpose() * rot.Q - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
      const auto after = spectral_density(P.a_poly(), P.b_poly(), rot.B, rot.sigma, freqs);
      for (std::size_t i = 0; i < freqs.size(); ++i) EXPECT_LT((after[i] - before[i]).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_EQ(rot.irf.size(), 11u);
    }
}

TEST(Select, DegenerateRotationTarget) {
  auto P = fixtures::invertible_params();
  P.a.clear();
  P.p = {MatrixXd::Identity(2, 2)};
  P.g = {MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2)};
  P.B = MatrixXd::Identity(2, 2);
  P.B(0, 1) = 0.5;
  // row 0 of K(1) = (1, 0.5) is not proportional to e_0; row 1 = (0, 1) already has a zero at shock 0
  EXPECT_NO_THROW(rotate_long_run(P, 0, 0));
  EXPECT_TRUE(rotate_long_run(P, 0, 1).Q.isIdentity());
  P.B(0, 1) = 0.0;
  // row 0 = e_0: no rotation can zero it
  try {
    rotate_long_run(P, 0, 0);
    FAIL() << "expected degenerate_target";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "degenerate_target");
  }
}

// --- diagnostics -------------------------------------------------------------

TEST(Diagnostics, JarqueBeraAndLjungBox) {
  int jb_accept = 0, jb_reject = 0;
  double lb_sum = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    Rng r(1000 + s);
    const auto g = sample(ShockDensity::gaussian(), 20000, r);
    const VectorXd gv = Eigen::Map<const VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
    jb_accept += jarque_bera(gv).p_value > 0.01;
    lb_sum += ljung_box(gv.head(2000), 8).statistic;
    const auto k = sample(ShockDensity::sgt(0.8, 2, 10), 2000, r);
    jb_reject += jarque_bera(Eigen::Map<const VectorXd>(k.data(), 2000)).p_value < 0.1;
  }
  EXPECT_GE(jb_accept, 18);
  EXPECT_EQ(jb_reject, seeds);
  EXPECT_NEAR(lb_sum / seeds, 8.0, 2.0);
  EXPECT_THROW(jarque_bera(VectorXd::Ones(50)), Error);
  EXPECT_THROW(ljung_box(VectorXd::Random(50), 0), Error);
}

TEST(Diagnostics, TableCoversTransforms) {
  const MatrixXd e = MatrixXd::Random(300, 2);
  const auto rows = residual_diagnostics(e, 5);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].transform, "level");
  EXPECT_EQ(rows[1].transform, "abs");
  EXPECT_EQ(rows[2].transform, "square");
}

// --- io and cli ---------------------------------------------------------------

TEST(Io, CsvRoundTrip) {
  MatrixXd m(3, 2);
  m << 0.1, -2.5, 1e-17, 3.0, 1.0 / 3.0, 7.0;
  const Dataset d = parse_csv(csv_text({"a", "b"}, m));
  EXPECT_EQ(d.names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.values, m);
}

TEST(Io, SpecAndParamsRoundTrip) {
  const auto spec = fixtures::noninvertible_spec();
  const auto P = fixtures::noninvertible_params();
  const SvarmaSpec s2 = spec_from_json(spec_json(spec));
  EXPECT_EQ(pack(params_from_json(params_json(P), s2), s2), pack(P, spec));
  EXPECT_EQ(coordinate_names(spec).size(), static_cast<std::size_t>(count_free_parameters(spec)));
}

TEST(Io, RationalPolynomialRecord) {
  const auto b = fixtures::worked_b();
  EXPECT_EQ(polymat_from_json<Rational>(polymat_json(b)), b);
}

TEST(Cli, MissingDataset) {
  const fs::path d = scratch_dir("missing");
  const fs::path cfg = d / "cfg.json";
  std::ofstream(cfg) << R"({"spec": {"n": 2, "p": 1, "q": 0}, "data": "/nonexistent/data.csv", "seed": 1})";
  const auto r = run_cli({"estimate", "--config", cfg.string(), "--out", d.string()});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(r.status.at("error"), "dataset_not_found");
  EXPECT_TRUE(r.status.contains("message"));
}

TEST(Cli, BinaryExitCode) {
  const fs::path d = scratch_dir("exit");
  std::ofstream(d / "cfg.json") << R"({"spec": {"n": 2, "p": 1, "q": 0}})";
  const std::string cmd = std::string(SVWHF_CLI_PATH) + " estimate --config " + (d / "cfg.json").string() +
                          " --data /nonexistent.csv --seed 1 --out " + d.string() +
                          " > " + (d / "stdout.json").string();
  const int rc = std::system(cmd.c_str());
  EXPECT_NE(rc, 0);
  EXPECT_EQ(Json::parse(slurp(d / "stdout.json")).at("error"), "dataset_not_found");
}

TEST(Cli, MissingSeed) {
  const fs::path d = scratch_dir("seed");
  const auto r = run_cli({"simulate", "--config", std::string(SVWHF_SAMPLES_DIR) + "/simulate.json", "--seed", "x", "--out", d.string()});
  EXPECT_NE(r.code, 0);
}

TEST(Cli, WhfWorkedExample) {
  const fs::path d = scratch_dir("whf");
  const auto r = run_cli({"whf", "--config", std::string(SVWHF_SAMPLES_DIR) + "/whf_example.json", "--out", d.string()});
  ASSERT_EQ(r.code, 0) << r.status.dump();
  const Json j = Json::parse(slurp(d / "whf.json"));
  EXPECT_EQ(j.at("index_vector"), Json::parse("[2, 1]"));
  EXPECT_TRUE(j.at("compose_matches").get<bool>());
  const Json& p = j.at("triple").at("p").at("coeffs");
  EXPECT_EQ(p[0], Json::parse(R"(["1", "0", "1/3", "1"])"));
  EXPECT_EQ(p[1], Json::parse(R"(["1/2", "0", "1/4", "29/60"])"));
  EXPECT_EQ(p[2], Json::parse(R"(["0", "11/20", "0", "43/40"])"));
  const auto f = laurent_from_json<Rational>(j.at("triple").at("f"));
  EXPECT_EQ(f.coeff(0), fixtures::q2({"13/8", "17/6", "5/4", "5/3"}));
  EXPECT_EQ(f.coeff(-1), fixtures::q2({"125/96", "457/360", "5/48", "5/36"}));
  EXPECT_TRUE(j.contains("config"));
}

TEST(Cli, ReproducibleEndToEnd) {
  const fs::path d1 = scratch_dir("e2e1"), d2 = scratch_dir("e2e2");
  const std::string sim = std::string(SVWHF_SAMPLES_DIR) + "/simulate.json";
  for (const auto& d : {d1, d2}) {
    ASSERT_EQ(run_cli({"simulate", "--config", sim, "--out", d.string(), "--seed", "3"}).code, 0);
    std::ofstream(d / "est.json") << R"({"spec": {"n": 2, "p": 1, "q": 1, "kappa": 0, "k": 1, "densities": "sgt"},
      "schedule": {"multistarts": 1, "simplex_iter": 0}, "seed": 4, "horizon": 6})";
    const auto e = run_cli({"estimate", "--config", (d / "est.json").string(), "--data", (d / "data.csv").string(), "--out", d.string()});
    ASSERT_EQ(e.code, 0) << e.status.dump();
    std::ofstream(d / "rot.json") << R"({"shock": 1, "variable": 2})";
    const auto r = run_cli({"rotate", "--config", (d / "rot.json").string(), "--data", (d / "estimate.json").string(), "--out", d.string()});
    ASSERT_EQ(r.code, 0) << r.status.dump();
    std::ofstream(d / "diag.json") << R"({"lags": 6})";
    const auto g = run_cli({"diagnose", "--config", (d / "diag.json").string(), "--data", (d / "residuals.csv").string(), "--out", d.string()});
    ASSERT_EQ(g.code, 0) << g.status.dump();
  }
  for (const char* f : {"data.csv", "shocks.csv", "truth.json", "residuals.csv", "irf.csv", "irf_rotated.csv"})
    EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
  EXPECT_EQ(Json::parse(slurp(d1 / "diagnostics.json")).at("tests"), Json::parse(slurp(d2 / "diagnostics.json")).at("tests"));
  const Json a = Json::parse(slurp(d1 / "estimate.json")), b = Json::parse(slurp(d2 / "estimate.json"));
  EXPECT_EQ(a.at("result"), b.at("result"));
  EXPECT_TRUE(a.at("config").contains("schedule"));
  const Json rot = Json::parse(slurp(d1 / "rotate.json"));
  EXPECT_LT(std::abs(matrix_from_json(rot.at("long_run"))(1, 0)), 1e-10);
}

TEST(Cli, SelectReproducibleAcrossJobs) {
  const fs::path d = scratch_dir("select");
  const MatrixXd y = small_sample(12, 500);
  write_csv((d / "data.csv").string(), {"y1", "y2"}, y);
  std::ofstream(d / "sel.json") << R"({"p_max": 0, "q_max": 1, "family": "gaussian",
    "schedule": {"multistarts": 1, "simplex_iter": 0}, "seed": 2})";
  const fs::path o1 = d / "o1", o2 = d / "o2";
  fs::create_directories(o1);
  fs::create_directories(o2);
  ASSERT_EQ(run_cli({"select", "--config", (d / "sel.json").string(), "--data", (d / "data.csv").string(), "--out", o1.string(), "--jobs", "1"}).code, 0);
  ASSERT_EQ(run_cli({"select", "--config", (d / "sel.json").string(), "--data", (d / "data.csv").string(), "--out", o2.string(), "--jobs", "2"}).code, 0);
  EXPECT_EQ(slurp(o1 / "grid.csv"), slurp(o2 / "grid.csv"));
  const Json g = Json::parse(slurp(o1 / "grid.json"));
  EXPECT_EQ(g.at("tasks"), 4);
}
