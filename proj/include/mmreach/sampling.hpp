#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mmreach/errors.hpp"
#include "mmreach/interval.hpp"

namespace mmreach {

// Deterministic initial-point layout shared by the Monte-Carlo tube, the
// successor oracle, and the sensitivity sampler: all 2^n box corners first
// (iff they fit within the budget), then uniform random fill up to n_points.
// Corner k sets coordinate j to hi when bit j of k is set, lo otherwise.
inline std::vector<Eigen::VectorXd> sample_box_points(const IntervalVector& box, int n_points,
                                                      std::uint64_t seed) {
  if (n_points < 1) throw ValidationError("sample_box_points: need at least one point");
  const std::size_t n = box.size();
  const Eigen::VectorXd lo = box.lo(), hi = box.hi();

  std::vector<Eigen::VectorXd> pts;
  pts.reserve(static_cast<std::size_t>(n_points));
  if (n < 63) {
    const std::uint64_t n_corners = std::uint64_t{1} << n;
    if (n_corners <= static_cast<std::uint64_t>(n_points)) {
      for (std::uint64_t mask = 0; mask < n_corners; ++mask) {
        Eigen::VectorXd p(static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j)
          p[static_cast<Eigen::Index>(j)] =
              (mask >> j) & 1u ? hi[static_cast<Eigen::Index>(j)] : lo[static_cast<Eigen::Index>(j)];
        pts.push_back(std::move(p));
      }
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (pts.size() < static_cast<std::size_t>(n_points)) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      const auto i = static_cast<Eigen::Index>(j);
      p[i] = lo[i] + unit(rng) * (hi[i] - lo[i]);
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace mmreach
