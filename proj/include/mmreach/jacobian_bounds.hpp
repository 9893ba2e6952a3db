#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <json.hpp>

#include "mmreach/errors.hpp"
#include "mmreach/interval.hpp"
#include "mmreach/model.hpp"

namespace mmreach {

// Entrywise interval enclosure [J_lo, J_hi] of the field Jacobian over a
// state box, together with the box it was computed for.
struct JacobianBounds {
  IntervalMatrix matrix;
  IntervalVector domain;
};

// Interval chain rule over the layer stack. A forward interval pass records
// the pre-activation box of every tanh layer; the Jacobian product
//   J = J_L * ... * J_1   (+ tau*I)
// is then accumulated right-to-left as P <- P * J_k, so each partial product
// multiplies an interval matrix by either a point weight matrix or an
// interval diagonal. Both kernels apply the exact sign rule per term; for the
// benchmark architectures (one tanh between point matrices) no genuine
// interval-interval product ever occurs, which keeps wrapping minimal.
inline JacobianBounds bound_jacobian(const NeuralOdeModel& m, const IntervalVector& box) {
  if (box.size() != static_cast<std::size_t>(m.state_dim))
    throw DimensionError("bound_jacobian: box dimension " + std::to_string(box.size()) +
                         ", model expects " + std::to_string(m.state_dim));

  // Forward pass: interval enclosure of every tanh layer's input.
  std::vector<IntervalVector> tanh_inputs;
  IntervalVector cur = box;
  for (const Layer& l : m.layers) {
    if (l.kind == LayerKind::linear) {
      IntervalVector next = matvec_point_interval(l.W, cur);
      for (std::size_t i = 0; i < next.size(); ++i)
        next[i] = add(next[i], l.b[static_cast<Eigen::Index>(i)]);
      cur = std::move(next);
    } else {
      tanh_inputs.push_back(cur);
      for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = tanh_range(cur[i]);
    }
  }

  // Backward accumulation of the Jacobian product.
  const auto n = static_cast<std::size_t>(m.state_dim);
  IntervalMatrix P = IntervalMatrix::identity(n);
  std::size_t tanh_idx = tanh_inputs.size();
  for (auto it = m.layers.rbegin(); it != m.layers.rend(); ++it) {
    if (it->kind == LayerKind::linear) {
      P = matmul_interval_point(P, it->W);
    } else {
      const IntervalVector& pre = tanh_inputs[--tanh_idx];
      // P <- P * diag(sech2_range(pre)): scale column j by the j-th range.
      for (std::size_t j = 0; j < P.cols(); ++j) {
        const Interval d = sech2_range(pre[j]);
        for (std::size_t i = 0; i < P.rows(); ++i) P.at(i, j) = mul(P.at(i, j), d);
      }
    }
  }
  if (m.tau)
    for (std::size_t i = 0; i < n; ++i) P.at(i, i) = add(P.at(i, i), *m.tau);

  return JacobianBounds{std::move(P), box};
}

// Upper bound on the induced infinity norm of the Jacobian over the box:
// max row sum of entrywise interval magnitudes.
inline double lipschitz_bound(const NeuralOdeModel& m, const IntervalVector& box) {
  const JacobianBounds jb = bound_jacobian(m, box);
  double best = 0.0;
  for (std::size_t i = 0; i < jb.matrix.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < jb.matrix.cols(); ++j) row += jb.matrix.at(i, j).mag();
    best = std::max(best, row);
  }
  return best;
}

// Entrywise lo/hi grids for inspection.
inline nlohmann::json jacobian_bounds_to_json(const JacobianBounds& jb) {
  nlohmann::json j;
  auto grid = [&](auto&& get) {
    auto rows = nlohmann::json::array();
    for (std::size_t i = 0; i < jb.matrix.rows(); ++i) {
      auto row = nlohmann::json::array();
      for (std::size_t k = 0; k < jb.matrix.cols(); ++k) row.push_back(get(jb.matrix.at(i, k)));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  j["lo"] = grid([](const Interval& v) { return v.lo; });
  j["hi"] = grid([](const Interval& v) { return v.hi; });
  const Eigen::VectorXd dlo = jb.domain.lo(), dhi = jb.domain.hi();
  j["domain_lo"] = std::vector<double>(dlo.data(), dlo.data() + dlo.size());
  j["domain_hi"] = std::vector<double>(dhi.data(), dhi.data() + dhi.size());
  return j;
}

}  // namespace mmreach
