#ifndef TRAPPING_SIMULATOR_HPP
#define TRAPPING_SIMULATOR_HPP

// Iterates x_{t+1} = x_t + gamma F(x_t) with optional escape monitoring.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "trapping/dynamics.hpp"
#include "trapping/error.hpp"
#include "trapping/geometry.hpp"

namespace trapping {

inline void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("learning rate gamma must be positive");
}

inline Point step(const DynamicsModel& model, std::span<const double> x, double gamma) {
  check_gamma(gamma);
  Point f = model.eval(x);
  Point next(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    next[d] = x[d] + gamma * f[d];
    if (!std::isfinite(next[d])) throw EvaluationError("learning step produced a non-finite coordinate");
  }
  return next;
}

/// ||F(x)||_2.
inline double residual(const DynamicsModel& model, std::span<const double> x) {
  Point f = model.eval(x);
  double s = 0.0;
  for (double v : f) s += v * v;
  return std::sqrt(s);
}

struct SimulateOptions {
  std::optional<HyperBox> monitor;
  bool stop_on_escape = false;
  /// Record every stride-th point. Step 0 and the last point are always kept.
  std::size_t stride = 1;
};

struct Trajectory {
  std::vector<std::size_t> steps;
  std::vector<Point> points;
  double gamma = 0.0;
  /// First step whose point lies outside the monitor box.
  std::optional<std::size_t> escaped_at;
  std::size_t steps_taken = 0;
  Point final_point;
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  /// Coordinate-wise extremes over every visited point.
  Point min_coords;
  Point max_coords;
  /// Set when an evaluation failed; the trajectory up to that point is kept.
  std::optional<std::string> error;
};

inline Trajectory simulate(const DynamicsModel& model, std::span<const double> x0, double gamma,
                           std::size_t steps, const SimulateOptions& opts = {}) {
  check_gamma(gamma);
  if (x0.size() != model.dim()) throw InvalidArgument("start point dimension does not match model");
  if (opts.stride == 0) throw InvalidArgument("stride must be >= 1");
  if (opts.monitor && opts.monitor->dim() != model.dim()) {
    throw InvalidArgument("monitor box dimension does not match model");
  }
  for (double v : x0) {
    if (!std::isfinite(v)) throw InvalidArgument("start point must be finite");
  }

  Trajectory tr;
  tr.gamma = gamma;
  Point x(x0.begin(), x0.end());
  Point f(x.size());
  tr.min_coords = x;
  tr.max_coords = x;
  tr.steps.push_back(0);
  tr.points.push_back(x);
  if (opts.monitor && !opts.monitor->contains(x)) tr.escaped_at = 0;

  std::size_t t = 0;
  while (t < steps && !(opts.stop_on_escape && tr.escaped_at)) {
    try {
      model.eval_into(x, f);
    } catch (const EvaluationError& e) {
      tr.error = e.what();
      break;
    }
    bool finite = true;
    for (std::size_t d = 0; d < x.size(); ++d) {
      x[d] += gamma * f[d];
      finite = finite && std::isfinite(x[d]);
    }
    ++t;
    if (!finite) {
      tr.error = "learning step produced a non-finite coordinate at step " + std::to_string(t);
      break;
    }
    for (std::size_t d = 0; d < x.size(); ++d) {
      tr.min_coords[d] = std::min(tr.min_coords[d], x[d]);
      tr.max_coords[d] = std::max(tr.max_coords[d], x[d]);
    }
    if (opts.monitor && !tr.escaped_at && !opts.monitor->contains(x)) tr.escaped_at = t;
    if (t % opts.stride == 0 || t == steps || (opts.stop_on_escape && tr.escaped_at)) {
      tr.steps.push_back(t);
      tr.points.push_back(x);
    }
  }
  tr.steps_taken = t;
  if (tr.error && tr.steps.back() != t) {
    // Keep the last finite point reached before the failure.
    bool finite = std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
    if (finite) {
      tr.steps.push_back(t);
      tr.points.push_back(x);
    }
  }
  tr.final_point = tr.points.back();
  if (!tr.error) {
    try {
      tr.final_residual = residual(model, tr.final_point);
    } catch (const EvaluationError& e) {
      tr.error = e.what();
    }
  }
  return tr;
}

/// Fraction of random points with 0 < ||x|| <= radius for which one learning
/// step strictly increases the Euclidean norm.
inline double repulsion_check(const DynamicsModel& model, double radius, std::size_t n_samples, double gamma,
                              std::uint64_t seed = 0) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("radius must be positive");
  check_gamma(gamma);
  if (n_samples == 0) throw InvalidArgument("need at least one sample");
  const std::size_t n = model.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::size_t grew = 0;
  Point x(n);
  for (std::size_t s = 0; s < n_samples; ++s) {
    double norm2;
    do {
      double len = 0.0;
      for (double& v : x) {
        v = normal(rng);
        len += v * v;
      }
      len = std::sqrt(len);
      const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(n));
      norm2 = 0.0;
      for (double& v : x) {
        v = len > 0.0 ? v / len * r : 0.0;
        norm2 += v * v;
      }
    } while (norm2 == 0.0);
    Point next = step(model, x, gamma);
    double next2 = 0.0;
    for (double v : next) next2 += v * v;
    if (next2 > norm2) ++grew;
  }
  return static_cast<double>(grew) / static_cast<double>(n_samples);
}

/// Uniform random points in `box`.
inline std::vector<Point> random_starts(const HyperBox& box, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> out(count, Point(box.dim()));
  for (Point& p : out) {
    for (std::size_t d = 0; d < box.dim(); ++d) p[d] = box.lower(d) + box.width(d) * unit(rng);
  }
  return out;
}

}  // namespace trapping

#endif  // TRAPPING_SIMULATOR_HPP
