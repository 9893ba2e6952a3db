#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmreach/errors.hpp"

namespace mmreach {

// Closed real interval [lo, hi]. Endpoints are plain doubles evaluated in
// round-to-nearest; an optional outward inflation (see `outward`) is the hook
// for users who want a rounding margin. Both endpoints must be finite.
struct Interval {
  double lo{0.0};
  double hi{0.0};

  Interval() = default;
  Interval(double lo_, double hi_) {
    if (!(std::isfinite(lo_) && std::isfinite(hi_)))
      throw ValidationError("Interval: endpoints must be finite, got [" +
                            std::to_string(lo_) + ", " + std::to_string(hi_) + "]");
    if (lo_ > hi_)
      throw ValidationError("Interval: inverted endpoints [" + std::to_string(lo_) +
                            ", " + std::to_string(hi_) + "]");
    // "+ 0.0" collapses -0.0 to +0.0 so serialized output never shows "-0".
    lo = lo_ + 0.0;
    hi = hi_ + 0.0;
  }

  static Interval point(double v) { return Interval(v, v); }

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  // Magnitude: max |x| over the interval.
  double mag() const { return std::max(std::abs(lo), std::abs(hi)); }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }
  bool is_point() const { return lo == hi; }
};

inline Interval add(const Interval& a, const Interval& b) {
  return Interval(a.lo + b.lo, a.hi + b.hi);
}

inline Interval add(const Interval& a, double c) { return Interval(a.lo + c, a.hi + c); }

// c * [lo, hi] with the two-branch sign rule; exact (no over-approximation).
inline Interval scale(double c, const Interval& a) {
  return c >= 0.0 ? Interval(c * a.lo, c * a.hi) : Interval(c * a.hi, c * a.lo);
}

// Product of two intervals via the four-corner min/max. When either factor is
// degenerate this reduces exactly to `scale`, so mixed point/interval matrix
// products stay exact.
inline Interval mul(const Interval& a, const Interval& b) {
  const double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  return Interval(std::min(std::min(p1, p2), std::min(p3, p4)),
                  std::max(std::max(p1, p2), std::max(p3, p4)));
}

// Outward inflation by an absolute epsilon on each side (default usage: none).
inline Interval outward(const Interval& a, double eps) {
  return Interval(a.lo - eps, a.hi + eps);
}

// Exact range of tanh over an interval (tanh is monotone increasing).
inline Interval tanh_range(const Interval& a) {
  return Interval(std::tanh(a.lo), std::tanh(a.hi));
}

// sech^2(x) = 1 - tanh^2(x), computed as 1/cosh^2 for accuracy at large |x|.
inline double sech2(double x) {
  const double s = 1.0 / std::cosh(x);
  return s * s;
}

// Exact range of sech^2 over an interval. sech^2 is even and decreasing in
// |x|: the max is 1 if the interval contains 0, otherwise sech^2 at the
// endpoint nearest 0; the min is sech^2 at the endpoint of largest magnitude.
inline Interval sech2_range(const Interval& a) {
  const double big = std::max(std::abs(a.lo), std::abs(a.hi));
  const double small = std::min(std::abs(a.lo), std::abs(a.hi));
  const double hi = (a.lo <= 0.0 && 0.0 <= a.hi) ? 1.0 : sech2(small);
  return Interval(sech2(big), hi);
}

// ---------------------------------------------------------------------------
// IntervalVector: an axis-aligned box in R^n.
// ---------------------------------------------------------------------------
class IntervalVector {
 public:
  IntervalVector() = default;
  explicit IntervalVector(std::size_t n) : comps_(n) {}
  explicit IntervalVector(std::vector<Interval> comps) : comps_(std::move(comps)) {}
  IntervalVector(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    if (lo.size() != hi.size())
      throw DimensionError("IntervalVector: lo/hi size mismatch");
    comps_.reserve(static_cast<std::size_t>(lo.size()));
    for (Eigen::Index i = 0; i < lo.size(); ++i) comps_.emplace_back(lo[i], hi[i]);
  }

  static IntervalVector point(const Eigen::VectorXd& p) { return IntervalVector(p, p); }

  std::size_t size() const { return comps_.size(); }
  Interval& operator[](std::size_t i) { return comps_[i]; }
  const Interval& operator[](std::size_t i) const { return comps_[i]; }

  Eigen::VectorXd lo() const {
    Eigen::VectorXd v(comps_.size());
    for (std::size_t i = 0; i < comps_.size(); ++i) v[static_cast<Eigen::Index>(i)] = comps_[i].lo;
    return v;
  }
  Eigen::VectorXd hi() const {
    Eigen::VectorXd v(comps_.size());
    for (std::size_t i = 0; i < comps_.size(); ++i) v[static_cast<Eigen::Index>(i)] = comps_[i].hi;
    return v;
  }
  Eigen::VectorXd width() const { return hi() - lo(); }

  bool contains(const IntervalVector& other) const {
    if (other.size() != size()) throw DimensionError("IntervalVector::contains: size mismatch");
    for (std::size_t i = 0; i < size(); ++i)
      if (!comps_[i].contains(other[i])) return false;
    return true;
  }

 private:
  std::vector<Interval> comps_;
};

// Closed membership test: lo_i <= p_i <= hi_i for all i. `slack` relaxes both
// sides (used by the soundness checker to absorb integrator error).
inline bool contains(const IntervalVector& box, const Eigen::VectorXd& p, double slack = 0.0) {
  if (static_cast<std::size_t>(p.size()) != box.size())
    throw DimensionError("contains: point dimension " + std::to_string(p.size()) +
                         " vs box dimension " + std::to_string(box.size()));
  for (std::size_t i = 0; i < box.size(); ++i) {
    const auto j = static_cast<Eigen::Index>(i);
    if (p[j] < box[i].lo - slack || p[j] > box[i].hi + slack) return false;
  }
  return true;
}

// Componentwise interval hull of a non-empty collection of boxes: the
// smallest box containing all of them.
inline IntervalVector hull(const std::vector<IntervalVector>& boxes) {
  if (boxes.empty()) throw ValidationError("hull: empty collection");
  const std::size_t n = boxes.front().size();
  std::vector<Interval> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double lo = boxes.front()[i].lo, hi = boxes.front()[i].hi;
    for (const auto& b : boxes) {
      if (b.size() != n) throw DimensionError("hull: dimension mismatch across boxes");
      lo = std::min(lo, b[i].lo);
      hi = std::max(hi, b[i].hi);
    }
    out.emplace_back(lo, hi);
  }
  return IntervalVector(std::move(out));
}

// ---------------------------------------------------------------------------
// IntervalMatrix: rectangular grid of intervals, row-major storage.
// ---------------------------------------------------------------------------
class IntervalMatrix {
 public:
  IntervalMatrix() = default;
  IntervalMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}
  IntervalMatrix(const Eigen::MatrixXd& lo, const Eigen::MatrixXd& hi)
      : rows_(static_cast<std::size_t>(lo.rows())), cols_(static_cast<std::size_t>(lo.cols())) {
    if (lo.rows() != hi.rows() || lo.cols() != hi.cols())
      throw DimensionError("IntervalMatrix: lo/hi shape mismatch");
    data_.reserve(rows_ * cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        data_.emplace_back(lo(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                           hi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  }

  static IntervalMatrix point(const Eigen::MatrixXd& m) { return IntervalMatrix(m, m); }
  static IntervalMatrix identity(std::size_t n) {
    IntervalMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out.at(i, i) = Interval::point(1.0);
    return out;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Interval& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Interval& at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Eigen::MatrixXd lo() const {
    Eigen::MatrixXd m(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = at(i, j).lo;
    return m;
  }
  Eigen::MatrixXd hi() const {
    Eigen::MatrixXd m(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = at(i, j).hi;
    return m;
  }

 private:
  std::size_t rows_{0}, cols_{0};
  std::vector<Interval> data_;
};

// W * D for a point matrix W and interval matrix D. Each entry is an exact
// sum of sign-rule products, so the result encloses W*D0 for every D0 in D
// with no wrapping beyond the sum itself.
inline IntervalMatrix matmul_point_interval(const Eigen::MatrixXd& W, const IntervalMatrix& D) {
  if (static_cast<std::size_t>(W.cols()) != D.rows())
    throw DimensionError("matmul_point_interval: inner dimensions disagree");
  IntervalMatrix out(static_cast<std::size_t>(W.rows()), D.cols());
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) {
      Interval acc = Interval::point(0.0);
      for (std::size_t k = 0; k < D.rows(); ++k)
        acc = add(acc, scale(W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)),
                             D.at(k, j)));
      out.at(i, j) = acc;
    }
  return out;
}

// M * W for an interval matrix M and point matrix W (sign rule per term).
inline IntervalMatrix matmul_interval_point(const IntervalMatrix& M, const Eigen::MatrixXd& W) {
  if (M.cols() != static_cast<std::size_t>(W.rows()))
    throw DimensionError("matmul_interval_point: inner dimensions disagree");
  IntervalMatrix out(M.rows(), static_cast<std::size_t>(W.cols()));
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) {
      Interval acc = Interval::point(0.0);
      for (std::size_t k = 0; k < M.cols(); ++k)
        acc = add(acc, scale(W(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)),
                             M.at(i, k)));
      out.at(i, j) = acc;
    }
  return out;
}

// W * v for a point matrix W and interval vector v.
inline IntervalVector matvec_point_interval(const Eigen::MatrixXd& W, const IntervalVector& v) {
  if (static_cast<std::size_t>(W.cols()) != v.size())
    throw DimensionError("matvec_point_interval: inner dimensions disagree");
  std::vector<Interval> out;
  out.reserve(static_cast<std::size_t>(W.rows()));
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    Interval acc = Interval::point(0.0);
    for (std::size_t k = 0; k < v.size(); ++k)
      acc = add(acc, scale(W(i, static_cast<Eigen::Index>(k)), v[k]));
    out.push_back(acc);
  }
  return IntervalVector(std::move(out));
}

}  // namespace mmreach
