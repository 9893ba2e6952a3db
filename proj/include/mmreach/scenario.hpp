#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <json.hpp>

#include "mmreach/errors.hpp"
#include "mmreach/interval.hpp"
#include "mmreach/model.hpp"
#include "mmreach/oracle.hpp"
#include "mmreach/reach.hpp"
#include "mmreach/tube.hpp"

namespace mmreach {

// ---------------------------------------------------------------------------
// Enum <-> string names used in scenario files, CLI flags, and output JSON.
// ---------------------------------------------------------------------------

inline std::string to_string(Method m) { return m == Method::ct_mm ? "ct-mm" : "sd-mm"; }
inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::single: return "single";
    case Mode::incremental: return "incremental";
    default: return "boundary";
  }
}
inline std::string to_string(TubeSource t) {
  switch (t) {
    case TubeSource::lipschitz: return "lipschitz";
    case TubeSource::monte_carlo: return "mc";
    default: return "user";
  }
}
inline std::string to_string(StepperKind k) {
  return k == StepperKind::rk4_fixed ? "rk4" : "rkf45";
}

inline Method method_from_string(const std::string& s) {
  if (s == "ct-mm") return Method::ct_mm;
  if (s == "sd-mm") return Method::sd_mm;
  throw ValidationError("unknown method '" + s + "' (expected ct-mm or sd-mm)");
}
inline Mode mode_from_string(const std::string& s) {
  if (s == "single") return Mode::single;
  if (s == "incremental") return Mode::incremental;
  if (s == "boundary") return Mode::boundary;
  throw ValidationError("unknown mode '" + s + "' (expected single, incremental, or boundary)");
}
inline TubeSource tube_source_from_string(const std::string& s) {
  if (s == "lipschitz") return TubeSource::lipschitz;
  if (s == "mc") return TubeSource::monte_carlo;
  if (s == "user") return TubeSource::user_provided;
  throw ValidationError("unknown tube source '" + s + "' (expected lipschitz, mc, or user)");
}
inline StepperKind stepper_from_string(const std::string& s) {
  if (s == "rk4") return StepperKind::rk4_fixed;
  if (s == "rkf45") return StepperKind::rkf45_adaptive;
  throw ValidationError("unknown integrator '" + s + "' (expected rk4 or rkf45)");
}

// ---------------------------------------------------------------------------
// Scenario: the user-facing run description. Everything needed to reproduce a
// run; serialized verbatim into every output document.
// ---------------------------------------------------------------------------
struct Scenario {
  std::string model_ref{"fpa"};
  std::optional<Eigen::VectorXd> x0_lo, x0_hi;  // absent -> model demo box
  double t_final{2.0};
  Method method{Method::ct_mm};
  Mode mode{Mode::single};
  double step{0.05};
  TubeSource tube{TubeSource::lipschitz};
  std::optional<Eigen::VectorXd> tube_lo, tube_hi;  // user tube
  int tube_samples{100};
  double tube_inflation{0.1};
  int sens_samples{100};
  double sens_inflation{0.05};
  int n_samples{1000};
  std::uint64_t seed{0};
  StepperKind integrator{StepperKind::rkf45_adaptive};
  double integrator_step{1e-3};
  double rel_tol{1e-6};
  double abs_tol{1e-9};
  long max_steps{1000000};
  std::vector<std::pair<int, int>> projections;  // 1-based; empty -> default rule
};

// Demo initial set for the built-in FPA model, used when a scenario omits the
// initial box. Chosen so the continuous-time method is visibly tighter than
// the sampled-data method in the default projections (see README).
inline IntervalVector fpa_default_box() {
  Eigen::VectorXd lo(5), hi(5);
  lo << 1.25, -0.5, 1.0, 1.55, -6.0;
  hi << 2.75, 1.5, 4.0, 1.65, -1.5;
  return IntervalVector(lo, hi);
}

// Default tightness projections: disjoint consecutive pairs (1,2), (3,4), ...
// plus (n-1, n) when n is odd, so every coordinate appears. For n = 5 this is
// (1,2), (3,4), (4,5).
inline std::vector<std::pair<int, int>> default_projections(int n) {
  std::vector<std::pair<int, int>> out;
  for (int i = 1; i + 1 <= n; i += 2) out.emplace_back(i, i + 1);
  if (n >= 2 && n % 2 == 1) out.emplace_back(n - 1, n);
  return out;
}

namespace detail {

inline nlohmann::json vec_json(const Eigen::VectorXd& v) {
  auto a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Eigen::VectorXd vec_from_json(const nlohmann::json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = a.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

inline nlohmann::json box_json(const IntervalVector& box) {
  return {{"lo", vec_json(box.lo())}, {"hi", vec_json(box.hi())}};
}

inline nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["model"] = s.model_ref;
  if (s.x0_lo) j["x0_lo"] = detail::vec_json(*s.x0_lo);
  if (s.x0_hi) j["x0_hi"] = detail::vec_json(*s.x0_hi);
  j["t_final"] = s.t_final;
  j["method"] = to_string(s.method);
  j["mode"] = to_string(s.mode);
  j["step"] = s.step;
  j["tube"] = to_string(s.tube);
  if (s.tube_lo) j["tube_lo"] = detail::vec_json(*s.tube_lo);
  if (s.tube_hi) j["tube_hi"] = detail::vec_json(*s.tube_hi);
  j["tube_samples"] = s.tube_samples;
  j["tube_inflation"] = s.tube_inflation;
  j["sens_samples"] = s.sens_samples;
  j["sens_inflation"] = s.sens_inflation;
  j["n_samples"] = s.n_samples;
  j["seed"] = s.seed;
  j["integrator"] = to_string(s.integrator);
  j["integrator_step"] = s.integrator_step;
  j["rel_tol"] = s.rel_tol;
  j["abs_tol"] = s.abs_tol;
  j["max_steps"] = s.max_steps;
  auto projections = nlohmann::json::array();
  for (const auto& [a, b] : s.projections) projections.push_back({a, b});
  j["projections"] = std::move(projections);
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  try {
    s.model_ref = j.value("model", std::string{"fpa"});
    if (j.contains("x0_lo")) s.x0_lo = detail::vec_from_json(j.at("x0_lo"));
    if (j.contains("x0_hi")) s.x0_hi = detail::vec_from_json(j.at("x0_hi"));
    s.t_final = j.value("t_final", 2.0);
    s.method = method_from_string(j.value("method", std::string{"ct-mm"}));
    s.mode = mode_from_string(j.value("mode", std::string{"single"}));
    s.step = j.value("step", 0.05);
    s.tube = tube_source_from_string(j.value("tube", std::string{"lipschitz"}));
    if (j.contains("tube_lo")) s.tube_lo = detail::vec_from_json(j.at("tube_lo"));
    if (j.contains("tube_hi")) s.tube_hi = detail::vec_from_json(j.at("tube_hi"));
    s.tube_samples = j.value("tube_samples", 100);
    s.tube_inflation = j.value("tube_inflation", 0.1);
    s.sens_samples = j.value("sens_samples", 100);
    s.sens_inflation = j.value("sens_inflation", 0.05);
    s.n_samples = j.value("n_samples", 1000);
    s.seed = j.value("seed", std::uint64_t{0});
    s.integrator = stepper_from_string(j.value("integrator", std::string{"rkf45"}));
    s.integrator_step = j.value("integrator_step", 1e-3);
    s.rel_tol = j.value("rel_tol", 1e-6);
    s.abs_tol = j.value("abs_tol", 1e-9);
    s.max_steps = j.value("max_steps", 1000000L);
    if (j.contains("projections"))
      for (const auto& p : j.at("projections"))
        s.projections.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scenario: malformed JSON: ") + e.what());
  }
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("scenario: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("scenario: parse error in '" + path + "': " + e.what());
  }
  return scenario_from_json(j);
}

// Resolves the initial box: explicit bounds win; the built-in FPA model falls
// back to its demo box; file models must state the box.
inline IntervalVector scenario_initial_box(const Scenario& s, const NeuralOdeModel& model) {
  if (s.x0_lo && s.x0_hi) {
    if (s.x0_lo->size() != model.state_dim || s.x0_hi->size() != model.state_dim)
      throw ValidationError("scenario: initial box dimension does not match model state_dim " +
                            std::to_string(model.state_dim));
    return IntervalVector(*s.x0_lo, *s.x0_hi);
  }
  if (s.x0_lo || s.x0_hi)
    throw ValidationError("scenario: x0_lo and x0_hi must be given together");
  if (s.model_ref == "fpa") return fpa_default_box();
  throw ValidationError("scenario: an initial box (x0_lo/x0_hi) is required for model '" +
                        s.model_ref + "'");
}

inline std::vector<std::pair<int, int>> scenario_projections(const Scenario& s,
                                                             const NeuralOdeModel& model) {
  return s.projections.empty() ? default_projections(model.state_dim) : s.projections;
}

inline ReachSpec to_reach_spec(const Scenario& s, const NeuralOdeModel& model) {
  ReachSpec spec;
  spec.model = model;
  spec.x0_box = scenario_initial_box(s, model);
  spec.t_final = s.t_final;
  spec.method = s.method;
  spec.mode = s.mode;
  spec.step = s.step;
  spec.tube_source = s.tube;
  if (s.tube == TubeSource::user_provided) {
    if (!s.tube_lo || !s.tube_hi)
      throw ValidationError("scenario: tube=user requires tube_lo and tube_hi");
    spec.user_tube = IntervalVector(*s.tube_lo, *s.tube_hi);
  }
  spec.tube_samples = s.tube_samples;
  spec.tube_inflation = s.tube_inflation;
  spec.sensitivity_samples = s.sens_samples;
  spec.sensitivity_inflation = s.sens_inflation;
  spec.integrator.method = s.integrator;
  spec.integrator.step = s.integrator_step;
  spec.integrator.rel_tol = s.rel_tol;
  spec.integrator.abs_tol = s.abs_tol;
  spec.integrator.max_steps = s.max_steps;
  spec.seed = s.seed;
  return spec;
}

// ---------------------------------------------------------------------------
// Output documents. JSON is primary; the text and CSV renderers format every
// number through the JSON serializer, so all formats show identical digits.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string num(const nlohmann::json& j) { return j.dump(); }

}  // namespace detail

inline nlohmann::json reach_doc(const Scenario& scenario, const ReachResult& r) {
  nlohmann::json j;
  j["scenario"] = scenario_to_json(scenario);
  nlohmann::json res;
  res["method"] = to_string(r.method);
  res["mode"] = to_string(r.mode);
  res["t_final"] = r.t_final;
  res["box"] = detail::box_json(r.box);
  res["tube"] = detail::box_json(r.tube_used);
  res["shift"] = {{"basis", r.shift_used.basis == Basis::jacobian ? "jacobian" : "sensitivity"},
                  {"entries", detail::matrix_json(r.shift_used.entries)}};
  res["runtime_seconds"] = r.runtime_seconds;
  res["steps_taken"] = r.steps_taken;
  if (r.per_facet) {
    auto facets = nlohmann::json::array();
    for (const auto& f : *r.per_facet) facets.push_back(detail::box_json(f));
    res["per_facet"] = std::move(facets);
  }
  j["result"] = std::move(res);
  return j;
}

inline std::string reach_text(const nlohmann::json& doc) {
  const auto& res = doc.at("result");
  std::ostringstream out;
  out << "method: " << res.at("method").get<std::string>()
      << "   mode: " << res.at("mode").get<std::string>()
      << "   t_final: " << detail::num(res.at("t_final")) << "\n";
  const auto& lo = res.at("box").at("lo");
  const auto& hi = res.at("box").at("hi");
  const auto& tlo = res.at("tube").at("lo");
  const auto& thi = res.at("tube").at("hi");
  out << "reachable box at t_final:\n";
  for (std::size_t i = 0; i < lo.size(); ++i)
    out << "  x" << (i + 1) << ": [" << detail::num(lo.at(i)) << ", " << detail::num(hi.at(i))
        << "]\n";
  out << "tube used:\n";
  for (std::size_t i = 0; i < tlo.size(); ++i)
    out << "  x" << (i + 1) << ": [" << detail::num(tlo.at(i)) << ", " << detail::num(thi.at(i))
        << "]\n";
  if (res.contains("per_facet"))
    out << "facets: " << res.at("per_facet").size() << " (boxes in JSON output)\n";
  out << "steps_taken: " << detail::num(res.at("steps_taken")) << "\n";
  out << "runtime_seconds: " << detail::num(res.at("runtime_seconds")) << "\n";
  return out.str();
}

inline std::string reach_csv(const nlohmann::json& doc) {
  const auto& res = doc.at("result");
  const auto& lo = res.at("box").at("lo");
  const auto& hi = res.at("box").at("hi");
  std::ostringstream out;
  out << "coordinate,lo,hi\n";
  for (std::size_t i = 0; i < lo.size(); ++i)
    out << (i + 1) << "," << detail::num(lo.at(i)) << "," << detail::num(hi.at(i)) << "\n";
  return out.str();
}

inline nlohmann::json tube_doc(const Scenario& scenario, const TubeEstimate& tube) {
  nlohmann::json j;
  j["scenario"] = scenario_to_json(scenario);
  j["tube"] = {{"source", to_string(tube.source)},
               {"inflation", tube.inflation},
               {"lo", detail::vec_json(tube.box.lo())},
               {"hi", detail::vec_json(tube.box.hi())}};
  return j;
}

inline std::string tube_text(const nlohmann::json& doc) {
  const auto& t = doc.at("tube");
  std::ostringstream out;
  out << "tube (" << t.at("source").get<std::string>() << "):\n";
  for (std::size_t i = 0; i < t.at("lo").size(); ++i)
    out << "  x" << (i + 1) << ": [" << detail::num(t.at("lo").at(i)) << ", "
        << detail::num(t.at("hi").at(i)) << "]\n";
  return out.str();
}

inline std::string tube_csv(const nlohmann::json& doc) {
  const auto& t = doc.at("tube");
  std::ostringstream out;
  out << "coordinate,lo,hi\n";
  for (std::size_t i = 0; i < t.at("lo").size(); ++i)
    out << (i + 1) << "," << detail::num(t.at("lo").at(i)) << "," << detail::num(t.at("hi").at(i))
        << "\n";
  return out.str();
}

// Successor cloud as CSV: header x1..xn, one successor per row.
inline std::string cloud_csv(const SampleCloud& cloud) {
  std::ostringstream out;
  if (cloud.final_points.empty()) return out.str();
  const Eigen::Index n = cloud.final_points.front().size();
  for (Eigen::Index i = 0; i < n; ++i) out << (i > 0 ? "," : "") << "x" << (i + 1);
  out << "\n";
  for (const auto& p : cloud.final_points) {
    for (Eigen::Index i = 0; i < n; ++i)
      out << (i > 0 ? "," : "") << detail::num(nlohmann::json(p[i]));
    out << "\n";
  }
  return out.str();
}

// One comparison row: a (method, mode) result plus its oracle metrics.
inline nlohmann::json compare_row_json(const ReachResult& r, const TightnessReport& report,
                                       const std::vector<std::pair<int, int>>& projections) {
  nlohmann::json row;
  row["method"] = to_string(r.method);
  row["mode"] = to_string(r.mode);
  row["box"] = detail::box_json(r.box);
  row["runtime_seconds"] = r.runtime_seconds;
  row["soundness_violations"] = report.soundness_violations;
  auto ratios = nlohmann::json::array();
  for (const auto& p : projections) {
    const double v = report.per_projection.at(p);
    if (std::isinf(v))
      ratios.push_back("inf");  // degenerate sample hull
    else
      ratios.push_back(v);
  }
  row["tightness"] = std::move(ratios);
  return row;
}

inline std::string compare_text(const nlohmann::json& doc) {
  std::ostringstream out;
  const auto& projections = doc.at("projections");
  out << "method  mode         violations";
  for (const auto& p : projections)
    out << "  ratio(" << p.at(0).get<int>() << "," << p.at(1).get<int>() << ")";
  out << "  runtime_seconds\n";
  for (const auto& row : doc.at("rows")) {
    char method[16], mode[16];
    std::snprintf(method, sizeof method, "%-6s", row.at("method").get<std::string>().c_str());
    std::snprintf(mode, sizeof mode, "%-11s", row.at("mode").get<std::string>().c_str());
    if (row.contains("error")) {  // failed combination: report and move on
      out << method << "  " << mode << "  error: " << row.at("error").get<std::string>() << "\n";
      continue;
    }
    out << method << "  " << mode << "  " << detail::num(row.at("soundness_violations"));
    for (const auto& r : row.at("tightness")) out << "  " << detail::num(r);
    out << "  " << detail::num(row.at("runtime_seconds")) << "\n";
  }
  out << "samples: " << detail::num(doc.at("n_samples")) << "\n";
  return out.str();
}

inline std::string compare_csv(const nlohmann::json& doc) {
  std::ostringstream out;
  out << "method,mode,soundness_violations";
  for (const auto& p : doc.at("projections"))
    out << ",ratio_" << p.at(0).get<int>() << "_" << p.at(1).get<int>();
  out << ",runtime_seconds\n";
  for (const auto& row : doc.at("rows")) {
    out << row.at("method").get<std::string>() << "," << row.at("mode").get<std::string>();
    if (row.contains("error")) {  // quoted message in the violations column
      std::string msg = row.at("error").get<std::string>();
      std::string quoted = "\"";
      for (const char c : msg) quoted += (c == '"') ? "\"\"" : std::string(1, c);
      quoted += "\"";
      out << "," << quoted;
      for (std::size_t i = 0; i < doc.at("projections").size() + 1; ++i) out << ",";
      out << "\n";
      continue;
    }
    out << "," << detail::num(row.at("soundness_violations"));
    for (const auto& r : row.at("tightness")) out << "," << detail::num(r);
    out << "," << detail::num(row.at("runtime_seconds")) << "\n";
  }
  return out.str();
}

// Writes atomically: content goes to a temp file first, which is renamed over
// the target only after a successful write. An empty path writes to stdout.
inline void write_document(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ec2;
    fs::remove(tmp, ec2);
    throw IoError("cannot rename '" + tmp.string() + "' to '" + target.string() +
                  "': " + ec.message());
  }
}

}  // namespace mmreach
