#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mmreach/embedding.hpp"
#include "mmreach/errors.hpp"
#include "mmreach/integrate.hpp"
#include "mmreach/interval.hpp"
#include "mmreach/jacobian_bounds.hpp"
#include "mmreach/model.hpp"
#include "mmreach/parallel.hpp"
#include "mmreach/sampling.hpp"
#include "mmreach/tube.hpp"

namespace mmreach {

enum class Method { ct_mm, sd_mm };
enum class Mode { single, incremental, boundary };

// Everything a reachability run needs. All knobs map 1:1 to CLI flags.
struct ReachSpec {
  NeuralOdeModel model;
  IntervalVector x0_box;
  double t_final{2.0};
  Method method{Method::ct_mm};
  Mode mode{Mode::single};
  double step{0.05};  // incremental only
  TubeSource tube_source{TubeSource::lipschitz};
  std::optional<IntervalVector> user_tube;
  int tube_samples{100};          // monte_carlo tube only
  double tube_inflation{0.1};     // monte_carlo tube only
  int sensitivity_samples{100};   // sd_mm only
  double sensitivity_inflation{0.05};  // sd_mm only, relative per side
  IntegratorConfig integrator{};
  std::uint64_t seed{0};
};

struct ReachResult {
  IntervalVector box;  // over-approximation at t_final
  Method method{Method::ct_mm};
  Mode mode{Mode::single};
  double t_final{0.0};
  IntervalVector tube_used;
  ShiftMatrix shift_used;
  double runtime_seconds{0.0};
  std::optional<std::vector<IntervalVector>> per_facet;  // boundary mode
  long steps_taken{1};
};

inline void validate_spec(const ReachSpec& spec) {
  validate_model(spec.model);
  if (spec.x0_box.size() != static_cast<std::size_t>(spec.model.state_dim))
    throw ValidationError("reach: x0_box dimension " + std::to_string(spec.x0_box.size()) +
                          " does not match model state_dim " +
                          std::to_string(spec.model.state_dim));
  if (!(spec.t_final > 0.0)) throw ValidationError("reach: t_final must be > 0");
  if (spec.mode == Mode::incremental) {
    if (!(spec.step > 0.0)) throw ValidationError("reach: incremental step must be > 0");
    if (spec.step > spec.t_final)
      throw ValidationError("reach: incremental step must not exceed t_final");
  }
  if (spec.tube_source == TubeSource::user_provided) {
    if (!spec.user_tube) throw ValidationError("reach: user tube selected but none provided");
    if (spec.user_tube->size() != spec.x0_box.size())
      throw ValidationError("reach: user tube dimension mismatch");
    if (!spec.user_tube->contains(spec.x0_box))
      throw ValidationError("reach: user tube must contain the initial box");
  }
  if (spec.sensitivity_samples < 1)
    throw ValidationError("reach: sensitivity_samples must be >= 1");
  if (spec.sensitivity_inflation < 0.0)
    throw ValidationError("reach: sensitivity_inflation must be >= 0");
  validate_config(spec.integrator);
}

// Entrywise sensitivity enclosure for the sampled-data method: integrate the
// variational equation from sampled initial states (corners first, then
// uniform fill), take the entrywise min/max, and widen each entry outward by
// inflation * (entry spread) per side. This is a sampling heuristic, not a
// verified bound; sampled-data soundness is conditional on it.
inline IntervalMatrix estimate_sensitivity_bounds(const NeuralOdeModel& m,
                                                  const IntervalVector& x0_box, double t_final,
                                                  int n_samples, double inflation,
                                                  std::uint64_t seed,
                                                  const IntegratorConfig& cfg = {}) {
  const std::vector<Eigen::VectorXd> starts = sample_box_points(x0_box, n_samples, seed);
  std::vector<Eigen::MatrixXd> mats(starts.size());
  parallel_for(starts.size(),
               [&](std::size_t s) { mats[s] = sensitivity(m, starts[s], t_final, cfg); });

  Eigen::MatrixXd lo = mats.front(), hi = mats.front();
  for (std::size_t s = 1; s < mats.size(); ++s) {
    lo = lo.cwiseMin(mats[s]);
    hi = hi.cwiseMax(mats[s]);
  }
  // Entries whose sampled range is tiny but not sign-definite at the scale of
  // the matrix would otherwise get a near-zero margin; the selector could then
  // commit to the wrong corner with no compensating correction term.  Flooring
  // the margin at a small fraction of the largest entry forces such entries to
  // straddle zero, which turns selector mistakes into (tiny) widening instead
  // of unsoundness.  Entrywise exact cases (sign-definite entries, point
  // boxes) are unaffected because sign-stable entries still get a zero shift.
  const double scale = std::max(lo.cwiseAbs().maxCoeff(), hi.cwiseAbs().maxCoeff());
  const Eigen::MatrixXd margin =
      inflation * (hi - lo).cwiseMax(1e-5 * scale);
  return IntervalMatrix(lo - margin, hi + margin);
}

namespace detail {

struct StepOutcome {
  IntervalVector box;
  TubeEstimate tube;
  ShiftMatrix shift;
};

inline TubeEstimate make_tube(const ReachSpec& spec, const IntervalVector& box, double horizon,
                              std::uint64_t seed) {
  switch (spec.tube_source) {
    case TubeSource::lipschitz:
      return tube_lipschitz(spec.model, box, horizon);
    case TubeSource::monte_carlo:
      return tube_monte_carlo(spec.model, box, horizon, spec.tube_samples, spec.tube_inflation,
                              seed, spec.integrator);
    case TubeSource::user_provided:
      if (!spec.user_tube->contains(box))
        throw ReachError("reach: current box escaped the user-provided tube; "
                         "supply a larger tube");
      return TubeEstimate{*spec.user_tube, TubeSource::user_provided, 0.0};
  }
  throw ValidationError("reach: unknown tube source");
}

// An inverted output box means the embedding's preconditions were violated
// (typically a tube or sensitivity enclosure that is too small); surfaced as
// a hard error rather than silently repaired.
inline IntervalVector require_ordered(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    if (lo[i] > hi[i])
      throw ReachError("reach: unordered output box in coordinate " + std::to_string(i + 1) +
                       " (lo = " + std::to_string(lo[i]) + ", hi = " + std::to_string(hi[i]) +
                       "); the tube or sensitivity bounds are too tight");
  return IntervalVector(lo, hi);
}

// Continuous-time single step: tube -> Jacobian bounds -> shift -> one
// integration of the 2n-dimensional embedded system from (x0_lo, x0_hi).
inline StepOutcome ct_single_step(const ReachSpec& spec, const IntervalVector& box,
                                  double horizon, std::uint64_t seed) {
  TubeEstimate tube = make_tube(spec, box, horizon, seed);
  const JacobianBounds jb = bound_jacobian(spec.model, tube.box);
  const Embedding emb = make_ct_embedding(spec.model, jb.matrix);

  const auto n = static_cast<Eigen::Index>(box.size());
  Eigen::VectorXd z0(2 * n);
  z0.head(n) = box.lo();
  z0.tail(n) = box.hi();
  const Eigen::VectorXd zf = integrate_observe(embedded_field(emb), z0, horizon, spec.integrator);
  IntervalVector out = require_ordered(zf.head(n), zf.tail(n));
  return StepOutcome{std::move(out), std::move(tube), emb.shift};
}

// Sampled-data single step: sensitivity enclosure over the current box ->
// shift -> exactly two decomposition evaluations of the flow-based embedding,
// g(x0_lo, x0_hi) and g(x0_hi, x0_lo), each costing n flow integrations. The
// tube is computed for reporting/inspection; the sampled-data shift is built
// on sensitivities over the initial box, not on the tube.
inline StepOutcome sd_single_step(const ReachSpec& spec, const IntervalVector& box,
                                  double horizon, std::uint64_t seed) {
  TubeEstimate tube = make_tube(spec, box, horizon, seed);
  const IntervalMatrix s_bounds =
      estimate_sensitivity_bounds(spec.model, box, horizon, spec.sensitivity_samples,
                                  spec.sensitivity_inflation, seed, spec.integrator);
  const Embedding emb = make_sd_embedding(spec.model, s_bounds, horizon, spec.integrator);

  const Eigen::VectorXd lo = decomposition(emb, box.lo(), box.hi());
  const Eigen::VectorXd hi = decomposition(emb, box.hi(), box.lo());
  IntervalVector out = require_ordered(lo, hi);
  return StepOutcome{std::move(out), std::move(tube), emb.shift};
}

inline StepOutcome single_step(const ReachSpec& spec, const IntervalVector& box, double horizon,
                               std::uint64_t seed) {
  return spec.method == Method::ct_mm ? ct_single_step(spec, box, horizon, seed)
                                      : sd_single_step(spec, box, horizon, seed);
}

}  // namespace detail

// Dispatches on spec.mode:
//  - single: one step over the whole horizon.
//  - incremental: chains single steps of length spec.step, recomputing the
//    tube (and, for sd_mm, the sensitivity enclosure) over each intermediate
//    box; step k uses seed + k.
//  - boundary: runs the single-step driver on each of the 2n facet boxes
//    (coordinate i pinned to its lo/hi endpoint; facet f uses seed + f) and
//    returns the interval hull; flows are homeomorphisms, so the image of the
//    boundary bounds the image of the set.
inline ReachResult reach(const ReachSpec& spec) {
  validate_spec(spec);
  const auto t_start = std::chrono::steady_clock::now();

  ReachResult result;
  result.method = spec.method;
  result.mode = spec.mode;
  result.t_final = spec.t_final;

  if (spec.mode == Mode::single) {
    detail::StepOutcome out = detail::single_step(spec, spec.x0_box, spec.t_final, spec.seed);
    result.box = std::move(out.box);
    result.tube_used = std::move(out.tube.box);
    result.shift_used = std::move(out.shift);
    result.steps_taken = 1;
  } else if (spec.mode == Mode::incremental) {
    const double t_eps = 1e-12 * std::max(1.0, spec.t_final);
    IntervalVector box = spec.x0_box;
    detail::StepOutcome out;
    double t = 0.0;
    long k = 0;
    while (spec.t_final - t > t_eps) {
      const double horizon = std::min(spec.step, spec.t_final - t);
      try {
        out = detail::single_step(spec, box, horizon, spec.seed + static_cast<std::uint64_t>(k));
      } catch (const Error& e) {
        throw ReachError("reach: incremental step " + std::to_string(k) + " failed: " + e.what());
      }
      box = out.box;
      t += horizon;
      if (spec.t_final - t <= t_eps) t = spec.t_final;
      ++k;
    }
    result.box = std::move(box);
    result.tube_used = std::move(out.tube.box);
    result.shift_used = std::move(out.shift);
    result.steps_taken = k;
  } else {  // Mode::boundary
    const std::size_t n = spec.x0_box.size();
    for (std::size_t i = 0; i < n; ++i)
      if (spec.x0_box[i].is_point())
        throw ReachError("reach: boundary mode needs a non-degenerate initial box, but "
                         "coordinate " + std::to_string(i + 1) +
                         " has zero width; use single mode instead");

    std::vector<detail::StepOutcome> outcomes(2 * n);
    parallel_for(2 * n, [&](std::size_t f) {
      const std::size_t i = f / 2;
      const bool upper = (f % 2) == 1;
      IntervalVector facet = spec.x0_box;
      facet[i] = Interval::point(upper ? spec.x0_box[i].hi : spec.x0_box[i].lo);
      outcomes[f] =
          detail::single_step(spec, facet, spec.t_final, spec.seed + static_cast<std::uint64_t>(f));
    });

    std::vector<IntervalVector> facet_boxes, facet_tubes;
    facet_boxes.reserve(2 * n);
    facet_tubes.reserve(2 * n);
    for (auto& o : outcomes) {
      facet_boxes.push_back(o.box);
      facet_tubes.push_back(o.tube.box);
    }
    result.box = hull(facet_boxes);
    result.tube_used = hull(facet_tubes);
    result.shift_used = outcomes.back().shift;  // representative (last facet)
    result.per_facet = std::move(facet_boxes);
    result.steps_taken = 1;
  }

  result.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace mmreach
