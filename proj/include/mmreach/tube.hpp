#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmreach/errors.hpp"
#include "mmreach/integrate.hpp"
#include "mmreach/interval.hpp"
#include "mmreach/jacobian_bounds.hpp"
#include "mmreach/parallel.hpp"
#include "mmreach/sampling.hpp"

namespace mmreach {

enum class TubeSource { lipschitz, monte_carlo, user_provided };

// Box guaranteed (lipschitz) or estimated (monte_carlo) to contain every
// trajectory from the initial box over [0, T]; the domain for Jacobian
// bounding.
struct TubeEstimate {
  IntervalVector box;
  TubeSource source{TubeSource::lipschitz};
  double inflation{0.0};
};

// Tube from the Lipschitz fallback: [x0_lo - Lf*T*1, x0_hi + Lf*T*1], with Lf
// the infinity-norm Jacobian bound. Lf must hold over the tube itself, so the
// margin is grown by fixed-point iteration: recompute Lf over the current
// tube until it is stable to 1% (at most 5 refinements). Lf can only grow
// along the iteration (the tubes are nested), so failure to stabilize means
// the bound keeps escaping and is reported as an error.
//
// This is a Lipschitz bound on f over the tube, not a trajectory enclosure
// argument; in strongly drifting regimes far from equilibrium the true tube
// can exceed it (see README caveats).
inline TubeEstimate tube_lipschitz(const NeuralOdeModel& m, const IntervalVector& x0_box,
                                   double t_final) {
  if (!(t_final > 0.0)) throw ValidationError("tube_lipschitz: t_final must be > 0");
  const Eigen::VectorXd lo0 = x0_box.lo(), hi0 = x0_box.hi();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(lo0.size());

  double L = lipschitz_bound(m, x0_box);
  IntervalVector tube(lo0 - L * t_final * ones, hi0 + L * t_final * ones);
  bool stable = false;
  for (int iter = 0; iter < 5; ++iter) {
    const double L_next = lipschitz_bound(m, tube);
    tube = IntervalVector(lo0 - L_next * t_final * ones, hi0 + L_next * t_final * ones);
    if (std::abs(L_next - L) <= 0.01 * std::max(L, 1e-300)) {
      stable = true;
      L = L_next;
      break;
    }
    L = L_next;
  }
  if (!stable)
    throw TubeError("tube_lipschitz: Lipschitz constant did not stabilize within 5 iterations "
                    "(last L = " + std::to_string(L) + ")");
  return TubeEstimate{std::move(tube), TubeSource::lipschitz, 0.0};
}

// Sampled tube: componentwise min/max over every accepted integration point
// of every sampled trajectory (corners first, then uniform fill), inflated
// per side by inflation*(width + 1e-12) and hulled with the initial box.
// Heuristic: approximates the true tube from inside; soundness of downstream
// results is conditional on it when selected.
inline TubeEstimate tube_monte_carlo(const NeuralOdeModel& m, const IntervalVector& x0_box,
                                     double t_final, int n_samples, double inflation,
                                     std::uint64_t seed, const IntegratorConfig& cfg = {}) {
  if (!(t_final > 0.0)) throw ValidationError("tube_monte_carlo: t_final must be > 0");
  if (n_samples < 1) throw ValidationError("tube_monte_carlo: need n_samples >= 1");
  if (inflation < 0.0) throw ValidationError("tube_monte_carlo: inflation must be >= 0");

  const std::vector<Eigen::VectorXd> starts = sample_box_points(x0_box, n_samples, seed);

  // Per-trajectory min/max envelopes, reduced after the parallel region so
  // the result is independent of scheduling.
  std::vector<Eigen::VectorXd> traj_lo(starts.size()), traj_hi(starts.size());
  parallel_for(starts.size(), [&](std::size_t s) {
    Eigen::VectorXd lo = starts[s], hi = starts[s];
    integrate_observe([&m](const Eigen::VectorXd& x) { return eval_field(m, x); }, starts[s],
                      t_final, cfg, [&](double, const Eigen::VectorXd& y) {
                        lo = lo.cwiseMin(y);
                        hi = hi.cwiseMax(y);
                      });
    traj_lo[s] = std::move(lo);
    traj_hi[s] = std::move(hi);
  });

  Eigen::VectorXd lo = traj_lo.front(), hi = traj_hi.front();
  for (std::size_t s = 1; s < starts.size(); ++s) {
    lo = lo.cwiseMin(traj_lo[s]);
    hi = hi.cwiseMax(traj_hi[s]);
  }
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    const double margin = inflation * (hi[i] - lo[i] + 1e-12);
    lo[i] -= margin;
    hi[i] += margin;
  }
  IntervalVector box = hull({IntervalVector(lo, hi), x0_box});
  return TubeEstimate{std::move(box), TubeSource::monte_carlo, inflation};
}

}  // namespace mmreach
