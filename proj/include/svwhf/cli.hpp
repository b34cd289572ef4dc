#pragma once

// Command-line driver: simulate, estimate, select, whf, rotate, diagnose.
// Each command reads a JSON config, writes its outputs into --out and prints
// a JSON status line; failures print {"error": code, "message": ...} and
// return a nonzero exit code.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "svwhf/diagnostics.hpp"
#include "svwhf/error.hpp"
#include "svwhf/estimate.hpp"
#include "svwhf/io.hpp"
#include "svwhf/model.hpp"
#include "svwhf/select.hpp"
#include "svwhf/whf.hpp"

namespace svwhf::cli {

inline constexpr int kDefaultHorizon = 20;

struct Options {
  std::string command;
  std::string config;
  std::optional<std::string> data;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<int> horizon;
};

struct Outputs {
  std::vector<std::string> files;
};

namespace detail {

inline Json load_config(const Options& o) {
  if (o.config.empty()) return Json::object();
  Json j = read_json(o.config, "config_not_found");
  if (!j.is_object()) throw Error("invalid_config", "config must be a JSON object");
  return j;
}

inline std::string out_path(const Options& o, const std::string& name) {
  return (std::filesystem::path(o.out) / name).string();
}

inline std::uint64_t require_seed(const Options& o, Json& cfg) {
  if (o.seed) cfg["seed"] = *o.seed;
  if (!cfg.contains("seed")) throw Error("missing_seed", "an explicit seed is required (config 'seed' or --seed)");
  try {
    return cfg.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception&) {
    throw Error("invalid_config", "seed must be a non-negative integer");
  }
}

inline std::string require_path(const Options& o, Json& cfg, const char* key, const std::string& missing_code) {
  if (o.data) cfg[key] = *o.data;
  if (!cfg.contains(key) || !cfg.at(key).is_string())
    throw Error(missing_code, std::string("no input file given (config '") + key + "' or --data)");
  return cfg.at(key).get<std::string>();
}

inline int resolve_jobs(const Options& o, const Json& cfg) {
  if (o.jobs) return *o.jobs;
  if (const char* env = std::getenv("SVARMA_WHF_JOBS")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw Error("invalid_argument", "SVARMA_WHF_JOBS must be an integer");
    }
  }
  return cfg.value("jobs", 0);
}

inline int resolve_horizon(const Options& o, Json& cfg) {
  if (o.horizon) cfg["horizon"] = *o.horizon;
  const int h = cfg.value("horizon", kDefaultHorizon);
  if (h < 0) throw Error("invalid_argument", "horizon must be non-negative");
  cfg["horizon"] = h;
  return h;
}

inline std::vector<std::string> series_names(const std::string& prefix, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

/// Responses to one-standard-deviation structural shocks.
inline std::vector<MatrixXd> scaled_irf(const SvarmaParams& P, int horizon) {
  auto k = transfer_irf(P, horizon);
  for (auto& m : k) m = m * P.sigma.asDiagonal();
  return k;
}

}  // namespace detail

inline Outputs cmd_simulate(const Options& o) {
  Json cfg = detail::load_config(o);
  const std::uint64_t seed = detail::require_seed(o, cfg);
  if (!cfg.contains("spec") || !cfg.contains("params")) throw Error("invalid_config", "simulate needs 'spec' and 'params'");
  const SvarmaSpec spec = spec_from_json(cfg.at("spec"));
  const SvarmaParams P = params_from_json(cfg.at("params"), spec);
  const int T = cfg.value("T", 0);
  const int burn = cfg.value("burn_in", kDefaultBurnIn);
  if (T < 1) throw Error("invalid_config", "'T' must be a positive integer");
  const VectorXd theta = pack(P, spec);
  const auto rep = validate(P, spec);
  if (!rep.filter_ok()) throw Error("invalid_params", rep.messages.empty() ? "parameters fail validation" : rep.messages.front());
  cfg["spec"] = spec_json(spec);
  cfg["params"] = params_json(P);
  cfg["T"] = T;
  cfg["burn_in"] = burn;
  const Simulation sim = simulate(P, spec, T, burn, seed);
  Outputs out;
  const std::string data = detail::out_path(o, "data.csv");
  write_csv(data, sim.data.names, sim.data.values);
  out.files.push_back(data);
  const std::string shocks = detail::out_path(o, "shocks.csv");
  write_csv(shocks, detail::series_names("e", spec.n), sim.shocks);
  out.files.push_back(shocks);
  Json truth;
  truth["config"] = cfg;
  truth["spec"] = spec_json(spec);
  truth["coordinates"] = coordinate_names(spec);
  truth["theta"] = vector_json(theta);
  truth["params"] = params_json(P);
  Json v;
  v["filter_ok"] = rep.filter_ok();
  v["coprime"] = rep.coprime;
  v["full_rank_ap_bq"] = rep.full_rank_ap_bq;
  v["messages"] = rep.messages;
  truth["validation"] = v;
  const std::string tp = detail::out_path(o, "truth.json");
  write_json(tp, truth);
  out.files.push_back(tp);
  return out;
}

inline Outputs cmd_estimate(const Options& o) {
  Json cfg = detail::load_config(o);
  const std::uint64_t seed = detail::require_seed(o, cfg);
  const std::string data_path = detail::require_path(o, cfg, "data", "dataset_not_found");
  const int horizon = detail::resolve_horizon(o, cfg);
  if (!cfg.contains("spec")) throw Error("invalid_config", "estimate needs 'spec'");
  const SvarmaSpec spec = spec_from_json(cfg.at("spec"));
  const OptimSchedule sch = schedule_from_json(cfg.value("schedule", Json::object()));
  const bool demean = cfg.value("demean", true);
  cfg["spec"] = spec_json(spec);
  cfg["schedule"] = schedule_json(sch);
  cfg["demean"] = demean;
  Dataset d = read_csv(data_path);
  if (d.n() != spec.n) throw Error("dimension_mismatch", "data have " + std::to_string(d.n()) + " columns, spec has n = " + std::to_string(spec.n));
  const VectorXd mean = demean ? VectorXd(d.values.colwise().mean().transpose()) : VectorXd::Zero(spec.n);
  d.values.rowwise() -= mean.transpose();
  const EstimationResult r = fit(spec, d.values, sch, seed);
  Outputs out;
  Json doc;
  doc["config"] = cfg;
  doc["data_mean"] = vector_json(mean);
  doc["result"] = estimation_json(r);
  const std::string ep = detail::out_path(o, "estimate.json");
  write_json(ep, doc);
  out.files.push_back(ep);
  const std::string rp = detail::out_path(o, "residuals.csv");
  write_csv(rp, detail::series_names("eps", spec.n), residuals(r.theta_hat, spec, Series(d.values)).eps);
  out.files.push_back(rp);
  const std::string ip = detail::out_path(o, "irf.csv");
  write_text(ip, irf_csv(detail::scaled_irf(unpack(r.theta_hat, spec), horizon)));
  out.files.push_back(ip);
  return out;
}

inline Outputs cmd_select(const Options& o) {
  Json cfg = detail::load_config(o);
  const std::uint64_t seed = detail::require_seed(o, cfg);
  const std::string data_path = detail::require_path(o, cfg, "data", "dataset_not_found");
  GridOptions go;
  go.p_max = cfg.value("p_max", 8);
  go.q_max = cfg.value("q_max", 8);
  go.family = parse_family(cfg.value("family", std::string("sgt")));
  go.normalization = parse_whf_mode(cfg.value("normalization", std::string("natural")));
  go.schedule = schedule_from_json(cfg.value("schedule", Json::object()));
  go.seed = seed;
  go.jobs = detail::resolve_jobs(o, cfg);
  const bool demean = cfg.value("demean", true);
  cfg["p_max"] = go.p_max;
  cfg["q_max"] = go.q_max;
  cfg["family"] = to_string(go.family);
  cfg["normalization"] = to_string(go.normalization);
  cfg["schedule"] = schedule_json(go.schedule);
  cfg["demean"] = demean;
  Dataset d = read_csv(data_path);
  if (demean) d.values.rowwise() -= d.values.colwise().mean();
  const GridResult g = grid(d.values, go);
  Outputs out;
  const std::string cp = detail::out_path(o, "grid.csv");
  write_text(cp, grid_csv(g));
  out.files.push_back(cp);
  Json doc;
  doc["config"] = cfg;
  doc["tasks"] = g.rows.size();
  doc["grid"] = grid_json(g);
  const std::string jp = detail::out_path(o, "grid.json");
  write_json(jp, doc);
  out.files.push_back(jp);
  return out;
}

inline Outputs cmd_whf(const Options& o) {
  Json cfg = detail::load_config(o);
  if (!cfg.contains("b")) throw Error("invalid_config", "whf needs 'b' (a polynomial matrix record)");
  const PolyMat<Rational> b = polymat_from_json<Rational>(cfg.at("b"));
  const WhfMode mode = parse_whf_mode(cfg.value("mode", std::string("canonical")));
  CanonicalizeOptions copt;
  copt.allow_row_permutation = cfg.value("allow_row_permutation", false);
  cfg["mode"] = to_string(mode);
  cfg["allow_row_permutation"] = copt.allow_row_permutation;
  const WhfTriple<Rational> raw = smith_whf_factorize(b);
  Json doc;
  doc["config"] = cfg;
  doc["index_vector"] = raw.index_vector;
  if (const auto pi = raw.indices()) {
    doc["kappa"] = pi->kappa;
    doc["k"] = pi->k;
    doc["zeros_inside"] = pi->zeros_inside();
  }
  if (mode == WhfMode::raw) {
    doc["triple"] = triple_json(raw);
    doc["compose_matches"] = compose(raw) == b;
  } else {
    const WhfTriple<Rational> can = canonicalize(raw, copt);
    if (mode == WhfMode::canonical) {
      doc["triple"] = triple_json(can);
      PolyMat<Rational> target = b;
      if (!can.row_permutation.empty()) {
        std::vector<Matrix<Rational>> cs;
        for (const auto& c : b.coeffs()) {
          Matrix<Rational> m(c.rows(), c.cols());
          for (int i = 0; i < c.rows(); ++i) m.row(i) = c.row(can.row_permutation[static_cast<std::size_t>(i)]);
          cs.push_back(m);
        }
        target = PolyMat<Rational>(cs);
      }
      doc["compose_matches"] = compose(can) == target;
    } else {
      const Normalized<Rational> nz = normalize(can, mode);
      doc["triple"] = triple_json(nz.triple);
      doc["folded"] = matrix_json<Rational>(nz.folded);
    }
  }
  Outputs out;
  const std::string wp = detail::out_path(o, "whf.json");
  write_json(wp, doc);
  out.files.push_back(wp);
  return out;
}

inline Outputs cmd_rotate(const Options& o) {
  Json cfg = detail::load_config(o);
  const std::string rpath = detail::require_path(o, cfg, "result", "result_not_found");
  const int horizon = detail::resolve_horizon(o, cfg);
  const int shock = cfg.value("shock", 0);
  const int variable = cfg.value("variable", 0);
  if (shock < 1 || variable < 1) throw Error("invalid_config", "'shock' and 'variable' (1-based) are required");
  const Json est = read_json(rpath, "result_not_found");
  const Json& res = est.contains("result") ? est.at("result") : est;
  if (!res.contains("spec") || !res.contains("theta_hat")) throw Error("invalid_config", "result file lacks spec or theta_hat");
  const SvarmaSpec spec = spec_from_json(res.at("spec"));
  const VectorXd theta = vector_from_json(res.at("theta_hat"));
  if (theta.size() != count_free_parameters(spec)) throw Error("invalid_config", "theta_hat length does not match the spec");
  const SvarmaParams P = unpack(theta, spec);
  const Rotation rot = rotate_long_run(P, shock - 1, variable - 1, horizon);
  Json doc;
  doc["config"] = cfg;
  doc["spec"] = spec_json(spec);
  doc["shock"] = shock;
  doc["variable"] = variable;
  doc["long_run_before"] = matrix_json<double>(long_run_matrix(P));
  doc["Q"] = matrix_json<double>(rot.Q);
  doc["impact"] = matrix_json<double>(rot.impact);
  doc["B"] = matrix_json<double>(rot.B);
  doc["sigma"] = vector_json(rot.sigma);
  doc["long_run"] = matrix_json<double>(rot.long_run);
  Outputs out;
  const std::string jp = detail::out_path(o, "rotate.json");
  write_json(jp, doc);
  out.files.push_back(jp);
  const std::string ip = detail::out_path(o, "irf_rotated.csv");
  write_text(ip, irf_csv(rot.irf));
  out.files.push_back(ip);
  return out;
}

inline Outputs cmd_diagnose(const Options& o) {
  Json cfg = detail::load_config(o);
  const std::string path = detail::require_path(o, cfg, "residuals", "dataset_not_found");
  const int lags = cfg.value("lags", 8);
  cfg["lags"] = lags;
  const Dataset d = read_csv(path);
  Json doc;
  doc["config"] = cfg;
  doc["columns"] = d.names;
  doc["tests"] = diagnostics_json(residual_diagnostics(d.values, lags));
  Outputs out;
  const std::string jp = detail::out_path(o, "diagnostics.json");
  write_json(jp, doc);
  out.files.push_back(jp);
  return out;
}

inline Json error_json(const std::string& code, const std::string& message) {
  Json e;
  e["error"] = code;
  e["message"] = message;
  return e;
}

/// Parses argv and runs one command. Status and error JSON go to `out`.
inline int run(int argc, const char* const* argv, std::ostream& out) {
  CLI::App app{"Structural VARMA models in the Wiener-Hopf parametrisation", "svwhf"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sc) {
    sc->add_option("--config", o.config, "JSON config file");
    sc->add_option("--data", o.data, "input data file (overrides the config)");
    sc->add_option("--out", o.out, "output directory")->capture_default_str();
    sc->add_option("--seed", o.seed, "random seed (overrides the config)");
    sc->add_option("--jobs", o.jobs, "parallel grid tasks (fallback: SVARMA_WHF_JOBS)");
    sc->add_option("--horizon", o.horizon, "impulse-response horizon");
  };
  const std::vector<std::pair<const char*, const char*>> cmds = {
      {"simulate", "simulate data from a model"},
      {"estimate", "staged maximum likelihood fit"},
      {"select", "BIC grid over (p, q, kappa, k)"},
      {"whf", "exact Wiener-Hopf factorisation of a rational b(z)"},
      {"rotate", "long-run rotation of an estimated model"},
      {"diagnose", "Jarque-Bera and Ljung-Box tests on residuals"}};
  for (const auto& [name, help] : cmds) add_common(app.add_subcommand(name, help));
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    out << error_json("invalid_arguments", e.what()).dump() << "\n";
    return 2;
  }
  for (const auto* sc : app.get_subcommands()) o.command = sc->get_name();
  try {
    std::filesystem::create_directories(o.out);
    Outputs res;
    if (o.command == "simulate") res = cmd_simulate(o);
    else if (o.command == "estimate") res = cmd_estimate(o);
    else if (o.command == "select") res = cmd_select(o);
    else if (o.command == "whf") res = cmd_whf(o);
    else if (o.command == "rotate") res = cmd_rotate(o);
    else res = cmd_diagnose(o);
    Json s;
    s["status"] = "ok";
    s["command"] = o.command;
    s["outputs"] = res.files;
    out << s.dump() << "\n";
    return 0;
  } catch (const Error& e) {
    out << error_json(e.code(), e.what()).dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    out << error_json("internal_error", e.what()).dump() << "\n";
    return 1;
  }
}

}  // namespace svwhf::cli
