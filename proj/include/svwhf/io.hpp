#pragma once

// JSON and CSV persistence. JSON objects keep insertion order so that
// identical inputs give byte-identical files.

#include <json.hpp>

#include <Eigen/Dense>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "svwhf/error.hpp"
#include "svwhf/estimate.hpp"
#include "svwhf/model.hpp"
#include "svwhf/polymat.hpp"
#include "svwhf/rational.hpp"
#include "svwhf/select.hpp"
#include "svwhf/whf.hpp"

namespace svwhf {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Scalars and matrices
// ---------------------------------------------------------------------------

inline Json scalar_json(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }
inline Json scalar_json(const Rational& x) { return Json(to_string(x)); }

/// Accepts numbers and strings such as "11/48", "-3" or "0.25".
inline Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_number()) return rationalize(j.get<double>());
  throw Error("invalid_config", "expected a number or a rational string");
}

inline double double_from_json(const Json& j) {
  if (j.is_null()) return std::nan("");
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s.find('/') != std::string::npos) return parse_rational(s).convert_to<double>();
    try {
      return std::stod(s);
    } catch (const std::exception&) {
      throw Error("invalid_config", "cannot read '" + s + "' as a number");
    }
  }
  if (j.is_number()) return j.get<double>();
  throw Error("invalid_config", "expected a number");
}

template <class S>
Json matrix_json(const Matrix<S>& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(scalar_json(m(i, j)));
    rows.push_back(r);
  }
  return rows;
}

inline Json vector_json(const VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(scalar_json(v(i)));
  return a;
}

inline MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw Error("invalid_config", "expected a non-empty matrix (array of rows)");
  const auto r = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) throw Error("invalid_config", "matrix rows must be arrays");
  const auto c = static_cast<Eigen::Index>(j[0].size());
  MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) throw Error("invalid_config", "ragged matrix");
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = double_from_json(row[static_cast<std::size_t>(k)]);
  }
  return m;
}

inline VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw Error("invalid_config", "expected an array");
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = double_from_json(j[i]);
  return v;
}

// ---------------------------------------------------------------------------
// Polynomial matrices: {rows, cols, min_power, max_power, coeffs}, one
// row-major list per power from min_power to max_power.
// ---------------------------------------------------------------------------

template <class S>
Json flat_row_major(const Matrix<S>& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(scalar_json(m(i, j)));
  return a;
}

template <class S>
Json laurent_json(const LaurentMat<S>& m) {
  Json out;
  out["rows"] = m.rows();
  out["cols"] = m.cols();
  out["min_power"] = m.min_power();
  out["max_power"] = m.max_power();
  Json cs = Json::array();
  for (int k = m.min_power(); k <= m.max_power(); ++k) cs.push_back(flat_row_major(m.coeff(k)));
  out["coeffs"] = cs;
  return out;
}

template <class S>
Json polymat_json(const PolyMat<S>& m) {
  return laurent_json(LaurentMat<S>(m));
}

template <class S>
LaurentMat<S> laurent_from_json(const Json& j) {
  for (const char* key : {"rows", "cols", "coeffs"})
    if (!j.contains(key)) throw Error("invalid_config", std::string("polynomial matrix record lacks '") + key + "'");
  const int r = j.at("rows").get<int>();
  const int c = j.at("cols").get<int>();
  const int lo = j.value("min_power", 0);
  const Json& cs = j.at("coeffs");
  if (r < 1 || c < 1 || !cs.is_array() || cs.empty()) throw Error("invalid_config", "malformed polynomial matrix record");
  if (j.contains("max_power") && j.at("max_power").get<int>() != lo + static_cast<int>(cs.size()) - 1)
    throw Error("invalid_config", "max_power does not match the number of coefficient blocks");
  std::vector<Matrix<S>> blocks;
  for (const Json& b : cs) {
    if (!b.is_array() || static_cast<int>(b.size()) != r * c)
      throw Error("invalid_config", "each coefficient block needs rows*cols entries");
    Matrix<S> m(r, c);
    for (int i = 0; i < r; ++i)
      for (int k = 0; k < c; ++k) {
        const Json& e = b[static_cast<std::size_t>(i * c + k)];
        if constexpr (ScalarOps<S>::exact) m(i, k) = rational_from_json(e);
        else m(i, k) = double_from_json(e);
      }
    blocks.push_back(m);
  }
  return LaurentMat<S>(lo, std::move(blocks));
}

template <class S>
PolyMat<S> polymat_from_json(const Json& j) {
  if (j.value("min_power", 0) < 0) throw Error("invalid_config", "polynomial matrix with negative powers");
  auto p = laurent_from_json<S>(j).to_polymat();
  if (!p) throw Error("invalid_config", "polynomial matrix with negative powers");
  return *p;
}

template <class S>
Json triple_json(const WhfTriple<S>& t) {
  Json out;
  out["mode"] = to_string(t.mode);
  out["index_vector"] = t.index_vector;
  if (const auto pi = t.indices()) {
    out["kappa"] = pi->kappa;
    out["k"] = pi->k;
  }
  out["p"] = polymat_json(t.p);
  out["f"] = laurent_json(t.f);
  out["row_permutation"] = t.row_permutation;
  return out;
}

// ---------------------------------------------------------------------------
// Model objects
// ---------------------------------------------------------------------------

inline Json density_json(const ShockDensity& d) {
  Json out;
  out["family"] = to_string(d.family);
  if (d.family == Family::sgt) out["lambda"] = vector_json(d.lambda);
  return out;
}

inline ShockDensity density_from_json(const Json& j) {
  if (j.is_string()) {
    ShockDensity d;
    d.family = parse_family(j.get<std::string>());
    if (d.family == Family::sgt) d.lambda = Eigen::Vector3d(0.0, 2.0, 4.0);
    return d;
  }
  ShockDensity d;
  d.family = parse_family(j.at("family").get<std::string>());
  if (d.family == Family::sgt) {
    d.lambda = j.contains("lambda") ? vector_from_json(j.at("lambda")) : VectorXd(Eigen::Vector3d(0.0, 2.0, 4.0));
    if (!d.admissible()) throw Error("inadmissible_density", "sgt lambda must satisfy |l| < 1, p, q > 0 and pq > 2");
  }
  return d;
}

inline Json spec_json(const SvarmaSpec& s) {
  Json out;
  out["n"] = s.n;
  out["p"] = s.p;
  out["q"] = s.q;
  out["kappa"] = s.kappa();
  out["k"] = s.k();
  out["normalization"] = to_string(s.normalization);
  Json ds = Json::array();
  for (const auto& d : s.densities) ds.push_back(density_json(d));
  out["densities"] = ds;
  return out;
}

/// "densities" may be a list or a single family name / record applied to
/// every shock ("density" is accepted as an alias).
inline SvarmaSpec spec_from_json(const Json& j) {
  SvarmaSpec s;
  try {
    s.n = j.at("n").get<int>();
    s.p = j.value("p", 0);
    s.q = j.value("q", 0);
    s.indices = PartialIndices{j.value("kappa", 0), j.value("k", 0), s.n};
    s.normalization = parse_whf_mode(j.value("normalization", std::string("natural")));
    const Json* dj = j.contains("densities") ? &j.at("densities") : (j.contains("density") ? &j.at("density") : nullptr);
    if (dj == nullptr) {
      s.densities.assign(static_cast<std::size_t>(s.n), ShockDensity::sgt(0.0, 2.0, 4.0));
    } else if (dj->is_array()) {
      for (const Json& d : *dj) s.densities.push_back(density_from_json(d));
    } else {
      s.densities.assign(static_cast<std::size_t>(s.n), density_from_json(*dj));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid_config", std::string("malformed spec: ") + e.what());
  }
  s.check();
  return s;
}

inline Json matrices_json(const std::vector<MatrixXd>& ms) {
  Json a = Json::array();
  for (const auto& m : ms) a.push_back(matrix_json<double>(m));
  return a;
}

inline std::vector<MatrixXd> matrices_from_json(const Json& j) {
  std::vector<MatrixXd> out;
  if (!j.is_array()) throw Error("invalid_config", "expected a list of matrices");
  for (const Json& m : j) out.push_back(matrix_from_json(m));
  return out;
}

inline Json params_json(const SvarmaParams& P) {
  Json out;
  out["a"] = matrices_json(P.a);
  out["p"] = matrices_json(P.p);
  out["g"] = matrices_json(P.g);
  out["B"] = matrix_json<double>(P.B);
  out["sigma"] = vector_json(P.sigma);
  Json l = Json::array();
  for (const auto& v : P.lambda) l.push_back(vector_json(v));
  out["lambda"] = l;
  return out;
}

/// Missing lambda entries are taken from the spec's densities.
inline SvarmaParams params_from_json(const Json& j, const SvarmaSpec& spec) {
  SvarmaParams P;
  try {
    P.a = j.contains("a") ? matrices_from_json(j.at("a")) : std::vector<MatrixXd>{};
    P.p = matrices_from_json(j.at("p"));
    P.g = matrices_from_json(j.at("g"));
    P.B = matrix_from_json(j.at("B"));
    P.sigma = j.contains("sigma") ? vector_from_json(j.at("sigma")) : VectorXd::Ones(spec.n);
    if (j.contains("lambda")) {
      for (const Json& v : j.at("lambda")) P.lambda.push_back(vector_from_json(v));
    } else {
      for (const auto& d : spec.densities) P.lambda.push_back(d.lambda);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid_config", std::string("malformed params: ") + e.what());
  }
  if (static_cast<int>(P.a.size()) != spec.p || static_cast<int>(P.p.size()) != spec.p_degree() + 1 ||
      static_cast<int>(P.g.size()) != spec.kappa() + 2 || static_cast<int>(P.lambda.size()) != spec.n)
    throw Error("invalid_config", "params block sizes do not match the spec (a: p, p: q - kappa + 1, g: kappa + 2)");
  return P;
}

/// Labels of the free coordinates of theta.
inline std::vector<std::string> coordinate_names(const SvarmaSpec& spec) {
  const ThetaLayout TL = make_theta_layout(spec);
  const TauLayout& L = TL.tau;
  std::vector<std::string> names;
  auto label = [&](int tau_index) {
    const int block = tau_index / L.nn();
    const int within = tau_index % L.nn();
    const int r = within % L.n + 1, c = within / L.n + 1;
    std::string b;
    if (block < L.p) b = "a" + std::to_string(block + 1);
    else if (block < L.p + L.dp + 1) b = "p" + std::to_string(block - L.p);
    else b = "g" + std::to_string(block - L.p - L.dp - 1);
    return b + "[" + std::to_string(r) + "," + std::to_string(c) + "]";
  };
  for (int i : L.free_to_tau) names.push_back(label(i));
  for (int c = 0; c < spec.n; ++c)
    for (int r = 0; r < spec.n; ++r)
      if (r != c) names.push_back("B[" + std::to_string(r + 1) + "," + std::to_string(c + 1) + "]");
  for (int i = 0; i < spec.n; ++i) names.push_back("sigma[" + std::to_string(i + 1) + "]");
  for (int i = 0; i < spec.n; ++i)
    if (spec.densities[static_cast<std::size_t>(i)].family == Family::sgt)
      for (const char* s : {"l", "p", "q"}) names.push_back("lambda[" + std::to_string(i + 1) + "]." + s);
  return names;
}

inline Json schedule_json(const OptimSchedule& s) {
  Json out;
  Json st = Json::array();
  for (const auto& x : s.stages) {
    Json e;
    e["family"] = to_string(x.family);
    e["max_iter"] = x.max_iter;
    e["tol"] = x.tol;
    e["rounds"] = x.rounds;
    e["simplex_iter"] = x.simplex_iter;
    st.push_back(e);
  }
  out["stages"] = st;
  out["multistarts"] = s.multistarts;
  out["perturbation"] = s.perturbation;
  out["finalists"] = s.finalists;
  out["gtol"] = s.gtol;
  out["sigma_lower"] = s.sigma_lower;
  out["skew_bound"] = s.skew_bound;
  out["tail_lower"] = s.tail_lower;
  out["tail_upper_p"] = s.tail_upper_p;
  out["tail_upper_q"] = s.tail_upper_q;
  out["scheme"] = to_string(s.scheme);
  return out;
}

/// Unspecified fields keep their defaults. A stage list may hold family
/// names or records.
inline OptimSchedule schedule_from_json(const Json& j) {
  OptimSchedule s;
  try {
    if (j.contains("stages")) {
      s.stages.clear();
      for (const Json& e : j.at("stages")) {
        StageSettings st;
        if (e.is_string()) {
          st.family = parse_family(e.get<std::string>());
        } else {
          st.family = parse_family(e.at("family").get<std::string>());
          st.max_iter = e.value("max_iter", st.max_iter);
          st.tol = e.value("tol", st.tol);
          st.rounds = e.value("rounds", st.rounds);
          st.simplex_iter = e.value("simplex_iter", st.simplex_iter);
        }
        s.stages.push_back(st);
      }
    }
    // shorthands applied to every stage
    for (auto& st : s.stages) {
      st.max_iter = j.value("max_iter", st.max_iter);
      st.tol = j.value("tol", st.tol);
      st.rounds = j.value("rounds", st.rounds);
      st.simplex_iter = j.value("simplex_iter", st.simplex_iter);
    }
    s.multistarts = j.value("multistarts", s.multistarts);
    s.perturbation = j.value("perturbation", s.perturbation);
    s.finalists = j.value("finalists", s.finalists);
    s.gtol = j.value("gtol", s.gtol);
    s.sigma_lower = j.value("sigma_lower", s.sigma_lower);
    s.skew_bound = j.value("skew_bound", s.skew_bound);
    s.tail_lower = j.value("tail_lower", s.tail_lower);
    s.tail_upper_p = j.value("tail_upper_p", s.tail_upper_p);
    s.tail_upper_q = j.value("tail_upper_q", s.tail_upper_q);
    if (j.contains("scheme")) s.scheme = parse_id_scheme(j.at("scheme").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid_config", std::string("malformed schedule: ") + e.what());
  }
  s.check();
  return s;
}

inline Json diagnostics_json(const std::vector<DiagnosticRow>& rows) {
  Json a = Json::array();
  for (const auto& d : rows) {
    Json e;
    e["component"] = d.component + 1;
    e["transform"] = d.transform;
    e["jb_statistic"] = scalar_json(d.jb.statistic);
    e["jb_p_value"] = scalar_json(d.jb.p_value);
    e["lb_statistic"] = scalar_json(d.lb.statistic);
    e["lb_p_value"] = scalar_json(d.lb.p_value);
    a.push_back(e);
  }
  return a;
}

inline Json estimation_json(const EstimationResult& r) {
  Json out;
  out["spec"] = spec_json(r.spec);
  out["coordinates"] = coordinate_names(r.spec);
  out["theta_hat"] = vector_json(r.theta_hat);
  out["stderr"] = vector_json(r.stderr_);
  out["stderr_available"] = r.stderr_available;
  out["params"] = params_json(unpack(r.theta_hat, r.spec));
  out["loglik"] = scalar_json(r.loglik);
  out["score_sup_norm"] = scalar_json(r.score_norm);
  out["n_free"] = r.n_free;
  out["T"] = r.T;
  out["bic"] = scalar_json(r.bic);
  out["converged"] = r.converged();
  Json st = Json::array();
  for (const auto& s : r.stages) {
    Json e;
    e["family"] = to_string(s.family);
    e["value"] = scalar_json(s.value);
    e["converged"] = s.converged;
    e["rounds"] = s.rounds;
    e["evaluations"] = s.evaluations;
    st.push_back(e);
  }
  out["stages"] = st;
  out["best_start"] = r.best_start;
  out["sandwich"] = matrix_json<double>(r.sandwich);
  out["diagnostics"] = diagnostics_json(r.diagnostics);
  out["warnings"] = r.warnings;
  return out;
}

inline Json grid_row_json(const GridRow& r) {
  Json e;
  e["p"] = r.p;
  e["q"] = r.q;
  e["kappa"] = r.kappa;
  e["k"] = r.k;
  e["loglik"] = scalar_json(r.loglik);
  e["n_free"] = r.n_free;
  e["bic"] = scalar_json(r.bic);
  e["converged"] = r.converged;
  e["ok"] = r.ok;
  e["error"] = r.error;
  e["min_jb_p_value"] = scalar_json(r.min_jb_p);
  e["min_lb_p_value"] = scalar_json(r.min_lb_p);
  e["seed"] = r.seed;
  e["theta_hat"] = vector_json(r.theta_hat);
  return e;
}

inline Json grid_json(const GridResult& g) {
  Json out;
  Json rows = Json::array();
  for (const auto& r : g.rows) rows.push_back(grid_row_json(r));
  out["rows"] = rows;
  out["best"] = g.best;
  if (g.best >= 0) out["best_row"] = grid_row_json(g.rows[static_cast<std::size_t>(g.best)]);
  Json groups = Json::array();
  std::vector<std::pair<int, int>> seen;
  for (const auto& r : g.rows) {
    if (std::find(seen.begin(), seen.end(), std::make_pair(r.p, r.q)) != seen.end()) continue;
    seen.emplace_back(r.p, r.q);
    Json e;
    e["p"] = r.p;
    e["q"] = r.q;
    e["best"] = g.best_in_group(r.p, r.q);
    groups.push_back(e);
  }
  out["groups"] = groups;
  return out;
}

// ---------------------------------------------------------------------------
// Text files
// ---------------------------------------------------------------------------

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string read_text(const std::string& path, const std::string& missing_code = "file_not_found") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(missing_code, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_failed", "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write_failed", "cannot write '" + path + "'");
}

inline Json read_json(const std::string& path, const std::string& missing_code = "file_not_found") {
  const std::string text = read_text(path, missing_code);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid_json", "'" + path + "': " + e.what());
  }
}

inline void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

/// Header row, then one row per time index. A leading column named "t" is
/// skipped.
inline Dataset parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Dataset d;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      out.push_back(cell);
    }
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  if (!std::getline(in, line)) throw Error("invalid_csv", "empty file");
  auto header = split(line);
  const bool skip_first = !header.empty() && header.front() == "t";
  if (skip_first) header.erase(header.begin());
  if (header.empty()) throw Error("invalid_csv", "no data columns");
  d.names = header;
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split(line);
    if (skip_first && !cells.empty()) cells.erase(cells.begin());
    if (cells.size() != header.size())
      throw Error("invalid_csv", "line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                                     " fields, expected " + std::to_string(header.size()));
    std::vector<double> r;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || end != c.c_str() + c.size())
        throw Error("invalid_csv", "line " + std::to_string(lineno) + ": '" + c + "' is not a number");
      r.push_back(v);
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw Error("invalid_csv", "no observations");
  d.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < header.size(); ++j) d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return d;
}

inline Dataset read_csv(const std::string& path) { return parse_csv(read_text(path, "dataset_not_found")); }

inline std::string csv_text(const std::vector<std::string>& header, const MatrixXd& m, bool with_index = true) {
  std::string out;
  if (with_index) out += "t";
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (with_index || j > 0) out += ",";
    out += header[j];
  }
  out += "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (with_index) out += std::to_string(i);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (with_index || j > 0) out += ",";
      out += format_number(m(i, j));
    }
    out += "\n";
  }
  return out;
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header, const MatrixXd& m,
                      bool with_index = true) {
  write_text(path, csv_text(header, m, with_index));
}

/// Long format: horizon, variable, shock, response.
inline std::string irf_csv(const std::vector<MatrixXd>& irf) {
  std::string out = "horizon,variable,shock,response\n";
  for (std::size_t h = 0; h < irf.size(); ++h)
    for (Eigen::Index i = 0; i < irf[h].rows(); ++i)
      for (Eigen::Index j = 0; j < irf[h].cols(); ++j)
        out += std::to_string(h) + "," + std::to_string(i + 1) + "," + std::to_string(j + 1) + "," +
               format_number(irf[h](i, j)) + "\n";
  return out;
}

inline std::string grid_csv(const GridResult& g) {
  std::string out = "p,q,kappa,k,loglik,n_free,bic,converged,ok,error,min_jb_p_value,min_lb_p_value,best\n";
  for (std::size_t i = 0; i < g.rows.size(); ++i) {
    const auto& r = g.rows[i];
    out += std::to_string(r.p) + "," + std::to_string(r.q) + "," + std::to_string(r.kappa) + "," + std::to_string(r.k) +
           "," + format_number(r.loglik) + "," + std::to_string(r.n_free) + "," + format_number(r.bic) + "," +
           (r.converged ? "1" : "0") + "," + (r.ok ? "1" : "0") + "," + r.error + "," + format_number(r.min_jb_p) +
           "," + format_number(r.min_lb_p) + "," + (static_cast<int>(i) == g.best ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace svwhf
