#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mmreach/errors.hpp"
#include "mmreach/integrate.hpp"
#include "mmreach/interval.hpp"
#include "mmreach/model.hpp"

namespace mmreach {

// Which interval matrix the shift was built against: the field Jacobian
// (continuous-time method) or the flow sensitivity (sampled-data method).
enum class Basis { jacobian, sensitivity };

// Minimal-magnitude shift moving [lo, hi] into a sign-stable half-plane:
//   max(0, -lo) if |lo| <= |hi|, else min(0, -hi).
// Ties |lo| = |hi| take the first branch.
inline double shift_value(double lo, double hi) {
  if (lo > hi) throw ValidationError("shift_value: lo > hi");
  return std::abs(lo) <= std::abs(hi) ? std::max(0.0, -lo) : std::min(0.0, -hi);
}

// The L matrix making bounds + L sign-stable entrywise.
struct ShiftMatrix {
  Eigen::MatrixXd entries;
  Basis basis{Basis::jacobian};
};

// Applies shift_value per entry. In the jacobian basis the diagonal is left
// at zero: the decomposition never swaps a row's own coordinate, so diagonal
// sign-stability is not needed for monotonicity of the embedded system. In
// the sensitivity basis every entry is shifted, the diagonal included — a
// flow sensitivity's diagonal carries no guaranteed sign.
inline ShiftMatrix build_shift(const IntervalMatrix& bounds, Basis basis) {
  if (bounds.rows() != bounds.cols()) throw DimensionError("build_shift: matrix must be square");
  const auto n = static_cast<Eigen::Index>(bounds.rows());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (basis == Basis::jacobian && i == j) continue;
      const Interval& e = bounds.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      L(i, j) = shift_value(e.lo, e.hi);
    }
  return ShiftMatrix{std::move(L), basis};
}

// Decomposition function of the shifted-Jacobian construction:
//   g_i(x, xh) = base_i(xi_i) + sum_j |L_ij| (x_j - xh_j)
// where row i's argument xi_i takes x_j or xh_j per the selector. The base
// map is the vector field f (continuous-time) or the fixed-horizon flow
// Phi(T, .) (sampled-data).
//
// Selector rule: entry (i,j) selects x_j exactly when the shifted interval
// [lo+L, hi+L] lies in the nonnegative half-plane (lo + L >= 0). A shifted
// entry that is sign-stable *negative* must read the opposite corner, or the
// partial derivative signs required of g break down. The jacobian-basis
// diagonal always selects x_i (it is never shifted and needs no sign).
struct Embedding {
  ShiftMatrix shift;
  std::vector<std::uint8_t> take_first;  // n*n row-major booleans
  FieldFn base;
  int n{0};

  Basis basis() const { return shift.basis; }
  bool selector_first(int i, int j) const {
    return take_first[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                      static_cast<std::size_t>(j)] != 0;
  }
};

inline Embedding make_embedding(const ShiftMatrix& shift, const IntervalMatrix& bounds,
                                FieldFn base, int n) {
  if (shift.entries.rows() != n || shift.entries.cols() != n ||
      bounds.rows() != static_cast<std::size_t>(n) || bounds.cols() != static_cast<std::size_t>(n))
    throw DimensionError("make_embedding: shift/bounds must be n x n");
  Embedding emb;
  emb.shift = shift;
  emb.base = std::move(base);
  emb.n = n;
  emb.take_first.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Interval& e = bounds.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      const bool first = (shift.basis == Basis::jacobian && i == j) ||
                         e.lo + shift.entries(i, j) >= 0.0;
      emb.take_first[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                     static_cast<std::size_t>(j)] = first ? 1 : 0;
    }
  return emb;
}

// Continuous-time embedding: base map is the vector field, shift built on
// Jacobian bounds.
inline Embedding make_ct_embedding(const NeuralOdeModel& m, const IntervalMatrix& jac_bounds) {
  return make_embedding(build_shift(jac_bounds, Basis::jacobian), jac_bounds,
                        [&m](const Eigen::VectorXd& x) { return eval_field(m, x); }, m.state_dim);
}

// Sampled-data embedding: base map is the flow at horizon t_final, shift
// built on sensitivity bounds. Each decomposition evaluation integrates the
// model once per row (n flow evaluations).
inline Embedding make_sd_embedding(const NeuralOdeModel& m, const IntervalMatrix& sens_bounds,
                                   double t_final, const IntegratorConfig& cfg = {}) {
  return make_embedding(
      build_shift(sens_bounds, Basis::sensitivity), sens_bounds,
      [&m, t_final, cfg](const Eigen::VectorXd& x) { return flow(m, x, t_final, cfg); },
      m.state_dim);
}

inline Eigen::VectorXd decomposition(const Embedding& emb, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& x_hat) {
  if (x.size() != emb.n || x_hat.size() != emb.n)
    throw DimensionError("decomposition: argument dimension mismatch");
  Eigen::VectorXd g(emb.n);
  Eigen::VectorXd xi(emb.n);
  for (int i = 0; i < emb.n; ++i) {
    for (int j = 0; j < emb.n; ++j) xi[j] = emb.selector_first(i, j) ? x[j] : x_hat[j];
    double gi = emb.base(xi)[i];
    for (int j = 0; j < emb.n; ++j)
      gi += std::abs(emb.shift.entries(i, j)) * (x[j] - x_hat[j]);
    g[i] = gi;
  }
  return g;
}

// The 2n-dimensional embedded field h(x, xh) = (g(x, xh), g(xh, x)). One
// trajectory of h from (x0_lo, x0_hi) bounds every trajectory of f from the
// box. Continuous-time only: a flow-based decomposition is evaluated at two
// corner argument pairs instead of being integrated.
inline FieldFn embedded_field(const Embedding& emb) {
  if (emb.basis() != Basis::jacobian)
    throw ReachError("embedded_field: requires a jacobian-basis (continuous-time) embedding");
  const int n = emb.n;
  return [emb, n](const Eigen::VectorXd& z) {
    if (z.size() != 2 * n) throw DimensionError("embedded_field: state must have dimension 2n");
    const Eigen::VectorXd x = z.head(n), x_hat = z.tail(n);
    Eigen::VectorXd h(2 * n);
    h.head(n) = decomposition(emb, x, x_hat);
    h.tail(n) = decomposition(emb, x_hat, x);
    return h;
  };
}

}  // namespace mmreach
