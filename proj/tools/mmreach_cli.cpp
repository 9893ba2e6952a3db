// mmreach: command-line front end for interval reachability of neural ODEs
// via mixed-monotone embeddings.
//
// Subcommands:
//   reach    compute one interval over-approximation
//   compare  run all method/mode combinations against the Monte-Carlo oracle
//   sample   emit the successor cloud as CSV
//   tube     compute only the reachable-tube estimate
//
// Exit codes: 0 success; 2 bad flags/scenario/model; 3 numerical failure
// (divergence, unstable tube, unordered output box, degenerate facet);
// 4 output I/O failure; 5 compare found soundness violations.

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "mmreach/mmreach.hpp"

namespace {

using namespace mmreach;

Eigen::VectorXd parse_vector(const std::string& text, const std::string& flag) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
      vals.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError(flag + ": cannot parse '" + item + "' as a number");
    }
  }
  if (vals.empty()) throw ValidationError(flag + ": empty vector");
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}

std::vector<std::pair<int, int>> parse_projections(const std::string& text) {
  // "1,2;3,4;4,5" -> {(1,2),(3,4),(4,5)}
  std::vector<std::pair<int, int>> out;
  std::stringstream ss(text);
  std::string pair_text;
  while (std::getline(ss, pair_text, ';')) {
    const auto comma = pair_text.find(',');
    if (comma == std::string::npos)
      throw ValidationError("--projections: expected 'i,j' pairs separated by ';'");
    try {
      out.emplace_back(std::stoi(pair_text.substr(0, comma)),
                       std::stoi(pair_text.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ValidationError("--projections: cannot parse pair '" + pair_text + "'");
    }
  }
  if (out.empty()) throw ValidationError("--projections: empty list");
  return out;
}

// Raw flag values; only flags the user actually passed override the scenario.
struct Flags {
  std::string scenario_path, model, x0_lo, x0_hi, method, mode, tube, tube_lo, tube_hi;
  std::string projections, out, format{"json"};
  double t_final{2.0}, step{0.05}, tube_inflation{0.1}, sens_inflation{0.05};
  double rel_tol{1e-6}, abs_tol{1e-9};
  int samples{1000}, tube_samples{100}, sens_samples{100};
  std::uint64_t seed{0};
};

void add_common_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--scenario", f.scenario_path,
                  "Scenario JSON file; explicit flags override its fields");
  cmd->add_option("--model", f.model, "Built-in model name ('fpa') or model JSON file path");
  cmd->add_option("--x0-lo", f.x0_lo, "Initial box lower corner, comma-separated");
  cmd->add_option("--x0-hi", f.x0_hi, "Initial box upper corner, comma-separated");
  cmd->add_option("--t-final", f.t_final, "Time horizon");
  cmd->add_option("--method", f.method, "Reachability method")
      ->check(CLI::IsMember({"ct-mm", "sd-mm"}));
  cmd->add_option("--mode", f.mode, "Driver mode")
      ->check(CLI::IsMember({"single", "incremental", "boundary"}));
  cmd->add_option("--step", f.step, "Incremental step size");
  cmd->add_option("--tube", f.tube, "Reachable-tube source")
      ->check(CLI::IsMember({"lipschitz", "mc", "user"}));
  cmd->add_option("--tube-lo", f.tube_lo, "User tube lower corner, comma-separated");
  cmd->add_option("--tube-hi", f.tube_hi, "User tube upper corner, comma-separated");
  cmd->add_option("--tube-samples", f.tube_samples, "Trajectories for the mc tube");
  cmd->add_option("--tube-inflation", f.tube_inflation, "Relative inflation of the mc tube");
  cmd->add_option("--samples", f.samples, "Monte-Carlo oracle cloud size");
  cmd->add_option("--sens-samples", f.sens_samples, "Sensitivity samples (sd-mm)");
  cmd->add_option("--sens-inflation", f.sens_inflation,
                  "Relative sensitivity-bound inflation per side (sd-mm)");
  cmd->add_option("--seed", f.seed, "RNG seed for all sampling");
  cmd->add_option("--rel-tol", f.rel_tol, "Integrator relative tolerance");
  cmd->add_option("--abs-tol", f.abs_tol, "Integrator absolute tolerance");
  cmd->add_option("--projections", f.projections,
                  "Tightness projections as 1-based pairs, e.g. \"1,2;3,4;4,5\"");
  cmd->add_option("--out", f.out, "Output file (default: stdout); written via temp-file rename");
  cmd->add_option("--format", f.format, "Output format")
      ->check(CLI::IsMember({"json", "text", "csv"}));
}

Scenario build_scenario(const CLI::App* cmd, const Flags& f) {
  Scenario s;
  if (cmd->count("--scenario") > 0) s = load_scenario(f.scenario_path);
  if (cmd->count("--model") > 0) s.model_ref = f.model;
  if (cmd->count("--x0-lo") > 0) s.x0_lo = parse_vector(f.x0_lo, "--x0-lo");
  if (cmd->count("--x0-hi") > 0) s.x0_hi = parse_vector(f.x0_hi, "--x0-hi");
  if (cmd->count("--t-final") > 0) s.t_final = f.t_final;
  if (cmd->count("--method") > 0) s.method = method_from_string(f.method);
  if (cmd->count("--mode") > 0) s.mode = mode_from_string(f.mode);
  if (cmd->count("--step") > 0) s.step = f.step;
  if (cmd->count("--tube") > 0) s.tube = tube_source_from_string(f.tube);
  if (cmd->count("--tube-lo") > 0) s.tube_lo = parse_vector(f.tube_lo, "--tube-lo");
  if (cmd->count("--tube-hi") > 0) s.tube_hi = parse_vector(f.tube_hi, "--tube-hi");
  if (cmd->count("--tube-samples") > 0) s.tube_samples = f.tube_samples;
  if (cmd->count("--tube-inflation") > 0) s.tube_inflation = f.tube_inflation;
  if (cmd->count("--samples") > 0) s.n_samples = f.samples;
  if (cmd->count("--sens-samples") > 0) s.sens_samples = f.sens_samples;
  if (cmd->count("--sens-inflation") > 0) s.sens_inflation = f.sens_inflation;
  if (cmd->count("--seed") > 0) s.seed = f.seed;
  if (cmd->count("--rel-tol") > 0) s.rel_tol = f.rel_tol;
  if (cmd->count("--abs-tol") > 0) s.abs_tol = f.abs_tol;
  if (cmd->count("--projections") > 0) s.projections = parse_projections(f.projections);
  return s;
}

IntegratorConfig integrator_of(const Scenario& s) {
  IntegratorConfig cfg;
  cfg.method = s.integrator;
  cfg.step = s.integrator_step;
  cfg.rel_tol = s.rel_tol;
  cfg.abs_tol = s.abs_tol;
  cfg.max_steps = s.max_steps;
  return cfg;
}

int run_reach(const Scenario& scenario, const Flags& f) {
  const NeuralOdeModel model = load_model(scenario.model_ref);
  const ReachResult result = reach(to_reach_spec(scenario, model));
  const nlohmann::json doc = reach_doc(scenario, result);
  std::string content;
  if (f.format == "json")
    content = doc.dump(2) + "\n";
  else if (f.format == "text")
    content = reach_text(doc);
  else
    content = reach_csv(doc);
  write_document(f.out, content);
  return 0;
}

int run_compare(const Scenario& scenario, const Flags& f) {
  const NeuralOdeModel model = load_model(scenario.model_ref);
  const IntervalVector x0_box = scenario_initial_box(scenario, model);
  const auto projections = scenario_projections(scenario, model);
  const SampleCloud cloud = sample_successors(model, x0_box, scenario.t_final,
                                              scenario.n_samples, scenario.seed,
                                              integrator_of(scenario));

  nlohmann::json doc;
  doc["scenario"] = scenario_to_json(scenario);
  auto jp = nlohmann::json::array();
  for (const auto& [a, b] : projections) jp.push_back({a, b});
  doc["projections"] = std::move(jp);
  doc["n_samples"] = scenario.n_samples;
  doc["rows"] = nlohmann::json::array();

  bool any_violation = false, any_error = false;
  for (const Method method : {Method::ct_mm, Method::sd_mm}) {
    for (const Mode mode : {Mode::single, Mode::incremental, Mode::boundary}) {
      Scenario row_scenario = scenario;
      row_scenario.method = method;
      row_scenario.mode = mode;
      try {
        const ReachResult result = reach(to_reach_spec(row_scenario, model));
        const TightnessReport report = tightness(result, cloud, projections);
        doc["rows"].push_back(compare_row_json(result, report, projections));
        if (report.soundness_violations > 0) any_violation = true;
      } catch (const Error& e) {
        nlohmann::json row;
        row["method"] = to_string(method);
        row["mode"] = to_string(mode);
        row["error"] = e.what();
        doc["rows"].push_back(std::move(row));
        any_error = true;
      }
    }
  }

  std::string content;
  if (f.format == "json")
    content = doc.dump(2) + "\n";
  else if (f.format == "text")
    content = compare_text(doc);
  else
    content = compare_csv(doc);
  write_document(f.out, content);
  if (any_violation) return 5;
  return any_error ? 3 : 0;
}

int run_sample(const Scenario& scenario, const Flags& f) {
  const NeuralOdeModel model = load_model(scenario.model_ref);
  const IntervalVector x0_box = scenario_initial_box(scenario, model);
  const SampleCloud cloud = sample_successors(model, x0_box, scenario.t_final,
                                              scenario.n_samples, scenario.seed,
                                              integrator_of(scenario));
  if (f.format == "json") {
    nlohmann::json doc;
    doc["scenario"] = scenario_to_json(scenario);
    auto initial = nlohmann::json::array(), final_pts = nlohmann::json::array();
    for (const auto& p : cloud.initial_points) {
      auto row = nlohmann::json::array();
      for (Eigen::Index i = 0; i < p.size(); ++i) row.push_back(p[i]);
      initial.push_back(std::move(row));
    }
    for (const auto& p : cloud.final_points) {
      auto row = nlohmann::json::array();
      for (Eigen::Index i = 0; i < p.size(); ++i) row.push_back(p[i]);
      final_pts.push_back(std::move(row));
    }
    doc["initial_points"] = std::move(initial);
    doc["final_points"] = std::move(final_pts);
    write_document(f.out, doc.dump(2) + "\n");
  } else {
    write_document(f.out, cloud_csv(cloud));
  }
  return 0;
}

int run_tube(const Scenario& scenario, const Flags& f) {
  const NeuralOdeModel model = load_model(scenario.model_ref);
  const IntervalVector x0_box = scenario_initial_box(scenario, model);
  TubeEstimate tube;
  switch (scenario.tube) {
    case TubeSource::lipschitz:
      tube = tube_lipschitz(model, x0_box, scenario.t_final);
      break;
    case TubeSource::monte_carlo:
      tube = tube_monte_carlo(model, x0_box, scenario.t_final, scenario.tube_samples,
                              scenario.tube_inflation, scenario.seed, integrator_of(scenario));
      break;
    case TubeSource::user_provided: {
      if (!scenario.tube_lo || !scenario.tube_hi)
        throw ValidationError("tube=user requires --tube-lo and --tube-hi");
      IntervalVector user(*scenario.tube_lo, *scenario.tube_hi);
      if (!user.contains(x0_box))
        throw ValidationError("user tube must contain the initial box");
      tube = TubeEstimate{std::move(user), TubeSource::user_provided, 0.0};
      break;
    }
  }
  const nlohmann::json doc = tube_doc(scenario, tube);
  std::string content;
  if (f.format == "json")
    content = doc.dump(2) + "\n";
  else if (f.format == "text")
    content = tube_text(doc);
  else
    content = tube_csv(doc);
  write_document(f.out, content);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mmreach: interval reachability for neural ODEs via mixed monotonicity.\n"
               "Exit codes: 0 ok, 2 bad input, 3 numerical failure, 4 I/O failure,\n"
               "5 compare found soundness violations. MMREACH_THREADS caps parallelism."};
  app.require_subcommand(1);

  Flags flags;
  CLI::App* c_reach = app.add_subcommand("reach", "Compute an interval over-approximation");
  CLI::App* c_compare =
      app.add_subcommand("compare", "All method/mode combinations vs the Monte-Carlo oracle");
  CLI::App* c_sample = app.add_subcommand("sample", "Emit the successor cloud as CSV");
  CLI::App* c_tube = app.add_subcommand("tube", "Compute only the reachable-tube estimate");
  for (CLI::App* cmd : {c_reach, c_compare, c_sample, c_tube}) add_common_flags(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version -> 0, every parse problem -> 2
  }

  try {
    const CLI::App* active = app.get_subcommands().front();
    const Scenario scenario = build_scenario(active, flags);
    if (active == c_reach) return run_reach(scenario, flags);
    if (active == c_compare) return run_compare(scenario, flags);
    if (active == c_sample) {
      // Sample clouds default to CSV; the other subcommands default to JSON.
      if (active->count("--format") == 0) flags.format = "csv";
      return run_sample(scenario, flags);
    }
    return run_tube(scenario, flags);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
