// Release-gate acceptance checks for mmreach.
//
// Ten end-to-end properties, each printed as one [PASS]/[FAIL] line with a
// short measurement summary.  The binary exits nonzero if any check fails, so
// it can gate CI directly.  Unlike the unit suite these checks run the whole
// pipeline at realistic sample counts (10^3-10^4) and also time it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mmreach/mmreach.hpp"
#include "oracles.hpp"

using namespace mmreach;

namespace {

struct CheckFailure {
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

IntervalVector origin_box(double half_width, int n) {
  return IntervalVector(Eigen::VectorXd::Constant(n, -half_width),
                        Eigen::VectorXd::Constant(n, half_width));
}

NeuralOdeModel scalar_decay_model() {
  NeuralOdeModel m;
  m.state_dim = 1;
  m.layers.push_back(
      Layer::make_linear(-Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1)));
  validate_model(m);
  return m;
}

ReachSpec fpa_spec(const NeuralOdeModel& m, Method method, Mode mode) {
  ReachSpec spec;
  spec.model = m;
  spec.x0_box = origin_box(0.1, 5);
  spec.t_final = 2.0;
  spec.method = method;
  spec.mode = mode;
  spec.step = 0.05;
  return spec;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// --- check 1: every method/mode combination contains the sampled successors.

std::string check_soundness_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const NeuralOdeModel m = fpa_model();
  const IntervalVector box = origin_box(0.1, 5);
  const SampleCloud cloud = sample_successors(m, box, 2.0, 10000, 0);

  int total = 0;
  for (const Method method : {Method::ct_mm, Method::sd_mm})
    for (const Mode mode : {Mode::single, Mode::incremental, Mode::boundary}) {
      const ReachResult r = reach(fpa_spec(m, method, mode));
      const int v = check_soundness(r, cloud);
      if (v != 0)
        throw CheckFailure{std::string(to_string(method)) + "/" + to_string(mode) + " missed " +
                           std::to_string(v) + " of 10000 successors"};
      total += v;
    }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= 60.0) throw CheckFailure{fmt("took %.1f s, budget is 60 s", secs)};
  return fmt("6 combos x 10000 successors, 0 violations, %.1f s", secs);
}

// --- check 2: the decomposition restricted to the diagonal reproduces its
//     base map (vector field for ct, flow map for sd).

std::string check_diagonal_identity() {
  const NeuralOdeModel m = fpa_model();
  const IntervalVector box = origin_box(0.1, 5);
  const IntervalVector dom = tube_lipschitz(m, box, 2.0).box;
  const Embedding ct = make_ct_embedding(m, bound_jacobian(m, dom).matrix);
  const Embedding sd =
      make_sd_embedding(m, estimate_sensitivity_bounds(m, box, 0.5, 100, 0.05, 0), 0.5);

  auto gen = oracles::rng(11);
  double worst_ct = 0.0, worst_sd = 0.0;
  for (int s = 0; s < 1000; ++s) {
    const Eigen::VectorXd x = oracles::uniform_vector(gen, dom.lo(), dom.hi());
    worst_ct = std::max(worst_ct,
                        (decomposition(ct, x, x) - eval_field(m, x)).lpNorm<Eigen::Infinity>());
    worst_sd = std::max(worst_sd,
                        (decomposition(sd, x, x) - flow(m, x, 0.5)).lpNorm<Eigen::Infinity>());
  }
  if (worst_ct >= 1e-12) throw CheckFailure{fmt("ct deviation %.3e >= 1e-12", worst_ct)};
  if (worst_sd >= 1e-12) throw CheckFailure{fmt("sd deviation %.3e >= 1e-12", worst_sd)};
  return fmt("1000 states, worst deviation ct %.1e, sd %.1e", worst_ct, worst_sd);
}

// --- check 3: interval Jacobian bounds contain pointwise Jacobians over the
//     tube, and shrink with the box.

std::string check_jacobian_bounds() {
  const NeuralOdeModel m = fpa_model();
  const IntervalVector tube = tube_lipschitz(m, origin_box(0.1, 5), 2.0).box;
  const JacobianBounds jb = bound_jacobian(m, tube);

  int violations = 0;
  const std::vector<Eigen::VectorXd> pts = sample_box_points(tube, 10000, 13);
  for (const Eigen::VectorXd& p : pts) {
    const Eigen::MatrixXd j = eval_jacobian(m, p);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t k = 0; k < 5; ++k) {
        const double v = j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        if (v < jb.matrix.at(i, k).lo || v > jb.matrix.at(i, k).hi) ++violations;
      }
  }
  if (violations != 0)
    throw CheckFailure{std::to_string(violations) + " entry violations over 10000 samples"};

  const Eigen::VectorXd c = Eigen::VectorXd::Constant(5, 0.2);
  const JacobianBounds tiny = bound_jacobian(
      m, IntervalVector(c.array() - 5e-8, c.array() + 5e-8));
  double max_width = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t k = 0; k < 5; ++k) max_width = std::max(max_width, tiny.matrix.at(i, k).width());
  if (max_width >= 1e-6)
    throw CheckFailure{fmt("entry width %.3e >= 1e-6 at box width 1e-7", max_width)};
  return fmt("0/250000 entry violations; width %.1e at box width 1e-7", max_width);
}

// --- check 4: shift values are minimal (vs a brute-force grid scan) and the
//     shifted interval never straddles zero.

std::string check_shift_minimality() {
  auto gen = oracles::rng(17);
  for (int s = 0; s < 1000; ++s) {
    const double a = oracles::uniform(gen, -3.0, 3.0), b = oracles::uniform(gen, -3.0, 3.0);
    const double lo = std::min(a, b), hi = std::max(a, b);
    const double sv = shift_value(lo, hi);

    const bool stable = (lo + sv >= 0.0 && hi + sv >= 0.0) || (lo + sv <= 0.0 && hi + sv <= 0.0);
    if (!stable) throw CheckFailure{fmt("[%.6f, %.6f] still straddles after shifting", lo, hi)};

    const double sbf = oracles::brute_force_shift(lo, hi);
    const double step = 2.0 * std::max({std::abs(lo), std::abs(hi), 1.0}) / 10000.0;
    if (std::abs(sv) > std::abs(sbf) + 1e-12)
      throw CheckFailure{fmt("shift %.6e larger than scanned optimum %.6e", sv, sbf)};
    if (std::abs(sbf) > std::abs(sv) + step)
      throw CheckFailure{fmt("scanned optimum %.6e disagrees with shift %.6e", sbf, sv)};
  }
  return "1000 random intervals, minimal and sign-stable";
}

// --- check 5: finite-difference partials of the embedded field have the
//     monotone sign structure (cooperative within blocks, competitive across).

std::string check_embedding_monotonicity() {
  const NeuralOdeModel m = fpa_model();
  const IntervalVector tube = tube_lipschitz(m, origin_box(0.1, 5), 2.0).box;
  const Embedding emb = make_ct_embedding(m, bound_jacobian(m, tube).matrix);
  const FieldFn h = embedded_field(emb);

  auto gen = oracles::rng(23);
  int violations = 0;
  double worst = 0.0;
  for (int s = 0; s < 1000; ++s) {
    Eigen::VectorXd z(10);
    z.head(5) = oracles::uniform_vector(gen, tube.lo(), tube.hi());
    z.tail(5) = oracles::uniform_vector(gen, tube.lo(), tube.hi());
    const Eigen::MatrixXd H = oracles::fd_jacobian(h, z);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        if (i == j) continue;  // own-coordinate partial is unconstrained
        const double v = H(i, j);
        const double tol = 1e-8 * (1.0 + std::abs(v));
        const bool same_block = (i < 5) == (j < 5);
        const bool ok = same_block ? v >= -tol : v <= tol;
        if (!ok) {
          ++violations;
          worst = std::max(worst, same_block ? -v : v);
        }
      }
  }
  if (violations != 0)
    throw CheckFailure{fmt("%g sign violations, worst magnitude %.3e",
                           static_cast<double>(violations), worst)};
  return "1000 points x 90 off-diagonal partials, all signs correct";
}

// --- check 6: 1-D linear decay is computed exactly (the system is monotone,
//     so the over-approximation degenerates to the true reachable interval).

std::string check_scalar_exactness() {
  const NeuralOdeModel m = scalar_decay_model();
  const double e1 = std::exp(-1.0);

  ReachSpec spec;
  spec.model = m;
  spec.x0_box = IntervalVector((Eigen::VectorXd(1) << 0.9).finished(),
                               (Eigen::VectorXd(1) << 1.1).finished());
  spec.t_final = 1.0;

  double worst = 0.0;
  for (const Method method : {Method::ct_mm, Method::sd_mm}) {
    spec.method = method;
    const ReachResult r = reach(spec);
    worst = std::max({worst, std::abs(r.box.lo()[0] - 0.9 * e1),
                      std::abs(r.box.hi()[0] - 1.1 * e1)});
  }
  if (worst >= 1e-6) throw CheckFailure{fmt("endpoint error %.3e >= 1e-6", worst)};

  const double sens = sensitivity(m, (Eigen::VectorXd(1) << 1.0).finished(), 1.0)(0, 0);
  if (std::abs(sens - e1) >= 1e-6)
    throw CheckFailure{fmt("sensitivity %.8f vs exp(-1) %.8f", sens, e1)};
  return fmt("both methods within %.1e of [0.9, 1.1]*exp(-1); sensitivity error %.1e", worst,
             std::abs(sens - e1));
}

// --- check 7: on the demo box the continuous-time method is strictly tighter
//     than the sampled-data method in every default projection.

std::string check_tightness_ordering() {
  const NeuralOdeModel m = fpa_model();
  const IntervalVector demo = fpa_default_box();
  const SampleCloud cloud = sample_successors(m, demo, 2.0, 500, 0);
  const std::vector<std::pair<int, int>> projections = default_projections(5);

  ReachSpec spec;
  spec.model = m;
  spec.x0_box = demo;
  spec.t_final = 2.0;

  spec.method = Method::ct_mm;
  const TightnessReport ct = tightness(reach(spec), cloud, projections);
  spec.method = Method::sd_mm;
  const TightnessReport sd = tightness(reach(spec), cloud, projections);

  if (ct.soundness_violations != 0 || sd.soundness_violations != 0)
    throw CheckFailure{std::to_string(ct.soundness_violations) + " ct / " +
                       std::to_string(sd.soundness_violations) + " sd soundness violations"};
  if (!ct.degenerate.empty() || !sd.degenerate.empty())
    throw CheckFailure{"degenerate sample hull in a default projection"};

  std::ostringstream detail;
  for (const auto& p : projections) {
    const double rc = ct.per_projection.at(p), rs = sd.per_projection.at(p);
    if (!(rc >= 1.0 && rs >= 1.0 && rc < rs))
      throw CheckFailure{fmt("projection ratios ct %.3f vs sd %.3f out of order", rc, rs)};
    detail << " (" << p.first << "," << p.second << ") " << fmt("%.2f<%.2f", rc, rs);
  }
  return "ct strictly tighter:" + detail.str();
}

// --- check 8: boundary mode costs a small multiple (the 2n facet runs) of a
//     single-step run, not orders of magnitude more.

std::string check_boundary_cost() {
  setenv("MMREACH_THREADS", "1", 1);  // stable timing on one core
  const NeuralOdeModel m = fpa_model();
  const ReachSpec single = fpa_spec(m, Method::ct_mm, Mode::single);
  const ReachSpec boundary = fpa_spec(m, Method::ct_mm, Mode::boundary);

  reach(single);  // warm-up
  reach(boundary);
  std::vector<double> ts, tb;
  for (int k = 0; k < 7; ++k) {
    ts.push_back(reach(single).runtime_seconds);
    tb.push_back(reach(boundary).runtime_seconds);
  }
  const double ratio = median(tb) / median(ts);
  if (!(ratio >= 2.0 && ratio <= 20.0))
    throw CheckFailure{fmt("boundary/single runtime ratio %.2f outside [2, 20]", ratio)};
  return fmt("median boundary/single runtime ratio %.1f (2n = 10 facets)", ratio);
}

// --- check 9: incremental mode with step == t_final is bit-identical to a
//     single step.

std::string check_incremental_degenerate() {
  const NeuralOdeModel m = fpa_model();
  for (const Method method : {Method::ct_mm, Method::sd_mm}) {
    ReachSpec spec = fpa_spec(m, method, Mode::single);
    spec.seed = 5;
    const ReachResult one = reach(spec);
    spec.mode = Mode::incremental;
    spec.step = spec.t_final;
    const ReachResult inc = reach(spec);

    const bool same = (one.box.lo().array() == inc.box.lo().array()).all() &&
                      (one.box.hi().array() == inc.box.hi().array()).all() &&
                      (one.tube_used.lo().array() == inc.tube_used.lo().array()).all() &&
                      (one.tube_used.hi().array() == inc.tube_used.hi().array()).all() &&
                      (one.shift_used.entries.array() == inc.shift_used.entries.array()).all() &&
                      inc.steps_taken == 1;
    if (!same)
      throw CheckFailure{std::string(to_string(method)) +
                         ": single and one-step incremental results differ"};
  }
  return "both methods bit-identical (box, tube, shift) with steps_taken = 1";
}

// --- check 10: repeated runs with fixed seeds serialize identically once the
//     runtime field is removed.

std::string check_determinism() {
  Scenario sc;
  sc.t_final = 1.0;
  sc.method = Method::sd_mm;
  sc.mode = Mode::boundary;
  sc.tube = TubeSource::monte_carlo;
  sc.seed = 42;

  Scenario sc2 = sc;
  sc2.method = Method::ct_mm;
  sc2.mode = Mode::incremental;
  sc2.seed = 9;

  for (const Scenario& s : {sc, sc2}) {
    const NeuralOdeModel model = load_model(s.model_ref);
    const ReachSpec spec = to_reach_spec(s, model);
    nlohmann::json d1 = reach_doc(s, reach(spec));
    nlohmann::json d2 = reach_doc(s, reach(spec));
    d1["result"].erase("runtime_seconds");
    d2["result"].erase("runtime_seconds");
    if (d1.dump() != d2.dump())
      throw CheckFailure{std::string(to_string(s.method)) + "/" + to_string(s.mode) +
                         " documents differ between runs"};
  }
  return "two configurations, repeated runs byte-identical JSON";
}

}  // namespace

int main() {
  struct Entry {
    const char* label;
    std::function<std::string()> body;
  };
  const std::vector<Entry> checks = {
      {"soundness vs Monte-Carlo oracle", check_soundness_suite},
      {"diagonal reproduces the base map", check_diagonal_identity},
      {"Jacobian bound containment/convergence", check_jacobian_bounds},
      {"shift minimality and sign-stability", check_shift_minimality},
      {"embedded-field monotone sign structure", check_embedding_monotonicity},
      {"scalar linear exactness", check_scalar_exactness},
      {"ct tighter than sd on the demo box", check_tightness_ordering},
      {"boundary-mode cost scaling", check_boundary_cost},
      {"incremental degenerate equivalence", check_incremental_degenerate},
      {"seeded determinism of output JSON", check_determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    std::string verdict, detail;
    try {
      detail = checks[i].body();
      verdict = "[PASS]";
    } catch (const CheckFailure& f) {
      detail = f.detail;
      verdict = "[FAIL]";
      ++failures;
    } catch (const std::exception& e) {
      detail = std::string("unexpected error: ") + e.what();
      verdict = "[FAIL]";
      ++failures;
    }
    std::printf("%s %2zu/10 %-42s %s\n", verdict.c_str(), i + 1, checks[i].label, detail.c_str());
    std::fflush(stdout);
  }
  if (failures == 0)
    std::printf("all 10 acceptance checks passed\n");
  else
    std::printf("%d of 10 acceptance checks FAILED\n", failures);
  return failures == 0 ? 0 : 1;
}
