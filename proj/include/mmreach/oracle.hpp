#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mmreach/errors.hpp"
#include "mmreach/integrate.hpp"
#include "mmreach/interval.hpp"
#include "mmreach/model.hpp"
#include "mmreach/parallel.hpp"
#include "mmreach/reach.hpp"
#include "mmreach/sampling.hpp"

namespace mmreach {

// Monte-Carlo ground truth: sampled initial states and their true successors
// at t_final. Never a proof, but a strong falsifier for the interval results.
struct SampleCloud {
  std::vector<Eigen::VectorXd> initial_points;
  std::vector<Eigen::VectorXd> final_points;
  std::uint64_t seed{0};
  double t_final{0.0};
};

// Deterministic cloud: corners first (when they fit the budget), uniform fill
// after, successors by numerical integration.
inline SampleCloud sample_successors(const NeuralOdeModel& m, const IntervalVector& x0_box,
                                     double t_final, int n, std::uint64_t seed,
                                     const IntegratorConfig& cfg = {}) {
  SampleCloud cloud;
  cloud.seed = seed;
  cloud.t_final = t_final;
  cloud.initial_points = sample_box_points(x0_box, n, seed);
  cloud.final_points.resize(cloud.initial_points.size());
  parallel_for(cloud.initial_points.size(), [&](std::size_t i) {
    cloud.final_points[i] = flow(m, cloud.initial_points[i], t_final, cfg);
  });
  return cloud;
}

// Counts sampled successors outside the result box, with an absolute slack
// (default 1e-9) absorbing integrator error on the samples themselves.
// Offending sample indices are appended to *offenders when provided.
inline int check_soundness(const ReachResult& result, const SampleCloud& cloud,
                           std::vector<std::size_t>* offenders = nullptr,
                           double slack = 1e-9) {
  if (cloud.t_final != result.t_final)
    throw ValidationError("check_soundness: cloud t_final " + std::to_string(cloud.t_final) +
                          " does not match result t_final " + std::to_string(result.t_final));
  int violations = 0;
  for (std::size_t i = 0; i < cloud.final_points.size(); ++i) {
    if (!contains(result.box, cloud.final_points[i], slack)) {
      ++violations;
      if (offenders) offenders->push_back(i);
    }
  }
  return violations;
}

// ---------------------------------------------------------------------------
// 2-D convex hull (Andrew monotone chain) and polygon area, for the
// projection-tightness metric.
// ---------------------------------------------------------------------------

using Point2 = std::pair<double, double>;

// Hull in counter-clockwise order, first point not repeated. Collinear input
// degenerates to fewer than 3 points.
inline std::vector<Point2> convex_hull_2d(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;
  const auto cross = [](const Point2& o, const Point2& a, const Point2& b) {
    return (a.first - o.first) * (b.second - o.second) -
           (a.second - o.second) * (b.first - o.first);
  };
  std::vector<Point2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower chain
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = n - 1, lower = k + 1; i-- > 0;) {  // upper chain
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Shoelace area of a simple polygon given in order.
inline double polygon_area(const std::vector<Point2>& poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& [x1, y1] = poly[i];
    const auto& [x2, y2] = poly[(i + 1) % poly.size()];
    twice += x1 * y2 - x2 * y1;
  }
  return 0.5 * std::abs(twice);
}

// Per-projection conservatism: box projection area over the area spanned by
// the sampled successors (their 2-D convex hull). >= 1 when the result is
// sound and the hull is non-degenerate; higher means more conservative.
struct TightnessReport {
  // Keys are 1-based coordinate pairs (i, j).
  std::map<std::pair<int, int>, double> per_projection;
  std::set<std::pair<int, int>> degenerate;  // projections whose sample hull had zero area
  int soundness_violations{0};
  int n_samples{0};
};

inline TightnessReport tightness(const ReachResult& result, const SampleCloud& cloud,
                                 const std::vector<std::pair<int, int>>& projections) {
  const auto n = static_cast<int>(result.box.size());
  TightnessReport report;
  report.n_samples = static_cast<int>(cloud.final_points.size());
  report.soundness_violations = check_soundness(result, cloud);

  for (const auto& [pi, pj] : projections) {
    if (pi < 1 || pj < 1 || pi > n || pj > n || pi == pj)
      throw ValidationError("tightness: invalid projection (" + std::to_string(pi) + ", " +
                            std::to_string(pj) + ") for dimension " + std::to_string(n));
    const std::size_t i = static_cast<std::size_t>(pi - 1);
    const std::size_t j = static_cast<std::size_t>(pj - 1);
    std::vector<Point2> proj;
    proj.reserve(cloud.final_points.size());
    for (const auto& p : cloud.final_points)
      proj.emplace_back(p[static_cast<Eigen::Index>(i)], p[static_cast<Eigen::Index>(j)]);
    const double hull_area = polygon_area(convex_hull_2d(std::move(proj)));
    const double box_area = result.box[i].width() * result.box[j].width();
    if (hull_area <= 0.0) {
      report.per_projection[{pi, pj}] = std::numeric_limits<double>::infinity();
      report.degenerate.insert({pi, pj});
    } else {
      report.per_projection[{pi, pj}] = box_area / hull_area;
    }
  }
  return report;
}

}  // namespace mmreach
