#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "gasnet/errors.hpp"

namespace gasnet {

enum class Interpolation { step, linear };

/// Piecewise-linear time series with optional jumps at breakpoints.
///
/// Segment k covers [t_k, t_{k+1}) and runs linearly from `left_[k]` at t_k
/// to `right_[k]` just before t_{k+1}; the value is right-continuous. After
/// the last breakpoint the last value is held. Step series are the special
/// case left == right. Sums and gated transforms of such series are exact
/// on the union of breakpoints, which keeps insult and control algebra
/// bit-exact.
class Profile {
public:
  Profile() = default;

  static Profile from_samples(int node, std::vector<double> times, const std::vector<double>& values,
                              Interpolation mode) {
    if (times.empty() || times.size() != values.size())
      throw ValidationError("profile for node " + std::to_string(node) + ": need equal, non-empty time/value arrays");
    for (std::size_t k = 1; k < times.size(); ++k)
      if (!(times[k] > times[k - 1]))
        throw ValidationError("profile for node " + std::to_string(node) + ": time stamps must be strictly increasing");
    Profile p;
    p.node_ = node;
    p.t_ = std::move(times);
    p.left_ = values;
    p.right_.resize(values.size());
    for (std::size_t k = 0; k < values.size(); ++k)
      p.right_[k] = (mode == Interpolation::linear && k + 1 < values.size()) ? values[k + 1] : values[k];
    return p;
  }

  static Profile constant(int node, double value, double t0 = 0.0) {
    return from_samples(node, {t0}, {value}, Interpolation::step);
  }

  int node() const { return node_; }
  void set_node(int n) { node_ = n; }
  bool empty() const { return t_.empty(); }
  std::size_t size() const { return t_.size(); }
  const std::vector<double>& times() const { return t_; }
  const std::vector<double>& left_values() const { return left_; }
  const std::vector<double>& right_values() const { return right_; }
  double start() const { return t_.front(); }
  double end() const { return t_.back(); }

  /// Value at t (right limit at breakpoints).
  double operator()(double t) const {
    const std::size_t k = segment(t);
    return eval(k, t);
  }

  /// Limit from the left at t; equals operator() away from breakpoints.
  double left_limit(double t) const {
    if (t <= t_.front()) return (*this)(t);
    auto it = std::lower_bound(t_.begin(), t_.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - t_.begin());
    if (it != t_.end() && *it == t) return right_[j - 1];
    return eval(j - 1, t);
  }

  /// Exact integral over [a, b] with a, b within or after the breakpoints.
  double integral(double a, double b) const {
    if (b < a) return -integral(b, a);
    double sum = 0.0;
    double lo = a;
    while (lo < b) {
      const std::size_t k = segment(lo);
      const double seg_end = (k + 1 < t_.size()) ? std::min(t_[k + 1], b) : b;
      sum += 0.5 * (eval(k, lo) + (k + 1 < t_.size() && seg_end == t_[k + 1] ? right_[k] : eval(k, seg_end))) *
             (seg_end - lo);
      lo = seg_end;
    }
    return sum;
  }

  double max_value() const {
    double m = left_.front();
    for (std::size_t k = 0; k < t_.size(); ++k) m = std::max({m, left_[k], right_[k]});
    return m;
  }

  double min_value() const {
    double m = left_.front();
    for (std::size_t k = 0; k < t_.size(); ++k) m = std::min({m, left_[k], right_[k]});
    return m;
  }

  friend bool operator==(const Profile& a, const Profile& b) {
    return a.node_ == b.node_ && a.t_ == b.t_ && a.left_ == b.left_ && a.right_ == b.right_;
  }

  /// Pointwise combination on the union of breakpoints (plus `extra` times).
  /// Exact whenever op(a(t), b(t)) is linear on every merged segment.
  static Profile combine(const Profile& a, const Profile& b, const std::function<double(double, double)>& op,
                         const std::vector<double>& extra = {}) {
    std::vector<double> grid;
    grid.reserve(a.size() + b.size() + extra.size());
    std::merge(a.t_.begin(), a.t_.end(), b.t_.begin(), b.t_.end(), std::back_inserter(grid));
    const double lo = std::max(a.start(), b.start());
    for (double e : extra)
      if (e > lo) grid.push_back(e);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    grid.erase(std::remove_if(grid.begin(), grid.end(), [lo](double t) { return t < lo; }), grid.end());

    Profile out;
    out.node_ = a.node_;
    out.t_ = grid;
    out.left_.resize(grid.size());
    out.right_.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      out.left_[k] = op(a(grid[k]), b(grid[k]));
      out.right_[k] = (k + 1 < grid.size()) ? op(a.left_limit(grid[k + 1]), b.left_limit(grid[k + 1])) : out.left_[k];
    }
    return out;
  }

  /// Drops interior breakpoints that neither jump nor bend, so transforms
  /// that turned out to be identities leave the breakpoint set unchanged.
  Profile simplified() const {
    Profile out;
    out.node_ = node_;
    for (std::size_t k = 0; k < t_.size(); ++k) {
      if (!out.t_.empty()) {
        const std::size_t m = out.t_.size() - 1;
        const bool flat_and_equal = out.left_[m] == out.right_[m] && out.right_[m] == left_[k] && left_[k] == right_[k];
        if (flat_and_equal) continue;
      }
      out.t_.push_back(t_[k]);
      out.left_.push_back(left_[k]);
      out.right_.push_back(right_[k]);
    }
    return out;
  }

  /// Same breakpoints, values mapped through f.
  Profile map(const std::function<double(double)>& f) const {
    Profile out = *this;
    for (auto& v : out.left_) v = f(v);
    for (auto& v : out.right_) v = f(v);
    return out;
  }

  /// Heaviside gate: 0 before t0, 1 from t0 on; defined from `start`.
  static Profile gate(double start, double t0) {
    if (t0 <= start) return constant(0, 1.0, start);
    return from_samples(0, {start, t0}, {0.0, 1.0}, Interpolation::step);
  }

  /// Min(profile, cap), inserting breakpoints where a segment crosses the cap.
  /// Sets `clipped` when any part of the series exceeded the cap.
  Profile clip_above(double cap, bool& clipped) const {
    clipped = false;
    Profile out;
    out.node_ = node_;
    for (std::size_t k = 0; k < t_.size(); ++k) {
      const double a = left_[k];
      const double b = right_[k];
      if (a > cap || b > cap) clipped = true;
      out.t_.push_back(t_[k]);
      out.left_.push_back(std::min(a, cap));
      if (k + 1 < t_.size() && (a - cap) * (b - cap) < 0.0) {
        const double s = (cap - a) / (b - a);
        const double tc = t_[k] + s * (t_[k + 1] - t_[k]);
        if (tc > t_[k] && tc < t_[k + 1]) {
          out.right_.push_back(cap);
          out.t_.push_back(tc);
          out.left_.push_back(cap);
          out.right_.push_back(std::min(b, cap));
          continue;
        }
      }
      out.right_.push_back(std::min(b, cap));
    }
    return out;
  }

private:
  std::size_t segment(double t) const {
    if (t_.empty()) throw ValidationError("profile for node " + std::to_string(node_) + " is empty");
    if (t < t_.front())
      throw ValidationError("boundary profile for node " + std::to_string(node_) + " undefined at t = " +
                            std::to_string(t) + " s");
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    return static_cast<std::size_t>(it - t_.begin()) - 1;
  }

  double eval(std::size_t k, double t) const {
    if (k + 1 >= t_.size()) return left_[k];
    const double w = (t - t_[k]) / (t_[k + 1] - t_[k]);
    return left_[k] + (right_[k] - left_[k]) * w;
  }

  int node_ = 0;
  std::vector<double> t_;
  std::vector<double> left_;
  std::vector<double> right_;
};

inline Profile operator+(const Profile& a, const Profile& b) {
  return Profile::combine(a, b, [](double x, double y) { return x + y; });
}

} // namespace gasnet
