#ifndef TRAPPING_ORACLE_HPP
#define TRAPPING_ORACLE_HPP

// Brute-force references for cross-checking the verifiers. Nothing here
// reuses the verifiers' face enumeration, meshing or subdivision; only the
// model interface and the box type are shared.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "trapping/dynamics.hpp"
#include "trapping/error.hpp"
#include "trapping/geometry.hpp"

namespace trapping::oracle {

inline constexpr std::size_t kMaxDenseDim = 4;

struct OracleReport {
  /// Per face, in order (coordinate 1 left, coordinate 1 right, ...): minimum
  /// over the grid of F_d on left faces and -F_d on right faces.
  std::vector<double> face_minima;
  bool verdict = false;
  /// Grid spacing per coordinate, and the largest of them.
  std::vector<double> spacing;
  double max_spacing = 0.0;
  std::size_t evaluations = 0;
};

/// Evaluates the isolation inequalities on a k^(N-1) grid on every face.
inline OracleReport dense_boundary_check(const DynamicsModel& model, const HyperBox& box, std::size_t k) {
  const std::size_t n = box.dim();
  if (k < 2) throw InvalidArgument("oracle grid needs at least 2 points per dimension");
  if (n > kMaxDenseDim) throw InvalidArgument("dense oracle limited to dimension <= 4");
  if (n != model.dim()) throw InvalidArgument("box dimension does not match model dimension");

  OracleReport rep;
  rep.spacing.resize(n);
  for (std::size_t d = 0; d < n; ++d) {
    rep.spacing[d] = (box.upper(d) - box.lower(d)) / static_cast<double>(k - 1);
    rep.max_spacing = std::max(rep.max_spacing, rep.spacing[d]);
  }

  auto node = [&](std::size_t d, std::size_t i) {
    return i == k - 1 ? box.upper(d) : box.lower(d) + static_cast<double>(i) * rep.spacing[d];
  };

  std::size_t per_face = 1;
  for (std::size_t d = 0; d + 1 < n; ++d) per_face *= k;

  Point x(n), f(n);
  for (std::size_t d = 0; d < n; ++d) {
    for (int side = 0; side < 2; ++side) {
      double lowest = std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < per_face; ++m) {
        // Decode m as base-k digits over the free coordinates.
        std::size_t rest = m;
        for (std::size_t j = n; j-- > 0;) {
          if (j == d) continue;
          x[j] = node(j, rest % k);
          rest /= k;
        }
        x[d] = side == 0 ? box.lower(d) : box.upper(d);
        model.eval_into(x, f);
        ++rep.evaluations;
        lowest = std::min(lowest, side == 0 ? f[d] : -f[d]);
      }
      rep.face_minima.push_back(lowest);
    }
  }
  rep.verdict = std::all_of(rep.face_minima.begin(), rep.face_minima.end(), [](double v) { return v > 0.0; });
  return rep;
}

/// Simulates from every node of a closed grid with `starts_per_dim` points per
/// coordinate and returns the first start (grid order) whose trajectory
/// leaves the box within `steps` updates.
inline std::optional<Point> escape_search(const DynamicsModel& model, const HyperBox& box, double gamma,
                                          std::size_t starts_per_dim, std::size_t steps) {
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  if (starts_per_dim < 1) throw InvalidArgument("need at least one start per dimension");
  const std::size_t n = box.dim();
  if (n != model.dim()) throw InvalidArgument("box dimension does not match model dimension");

  std::size_t total = 1;
  for (std::size_t d = 0; d < n; ++d) total *= starts_per_dim;

  Point x(n), f(n), start(n);
  for (std::size_t m = 0; m < total; ++m) {
    std::size_t rest = m;
    for (std::size_t j = n; j-- > 0;) {
      const std::size_t i = rest % starts_per_dim;
      rest /= starts_per_dim;
      start[j] = starts_per_dim == 1 ? 0.5 * (box.lower(j) + box.upper(j))
                                     : box.lower(j) + (box.upper(j) - box.lower(j)) * static_cast<double>(i) /
                                                          static_cast<double>(starts_per_dim - 1);
    }
    x = start;
    for (std::size_t t = 0; t < steps; ++t) {
      model.eval_into(x, f);
      bool outside = false;
      for (std::size_t j = 0; j < n; ++j) {
        x[j] = x[j] + gamma * f[j];
        outside = outside || !(x[j] >= box.lower(j) && x[j] <= box.upper(j));
      }
      if (outside) return start;
    }
  }
  return std::nullopt;
}

}  // namespace trapping::oracle

#endif  // TRAPPING_ORACLE_HPP
