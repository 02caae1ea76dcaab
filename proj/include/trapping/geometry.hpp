#ifndef TRAPPING_GEOMETRY_HPP
#define TRAPPING_GEOMETRY_HPP

// Axis-aligned box arithmetic shared by both verifiers: faces, bisection,
// baricenters, diameters and uniform face meshes.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trapping/error.hpp"

namespace trapping {

using Point = std::vector<double>;

/// Closed axis-aligned box [lower_0, upper_0] x ... x [lower_{N-1}, upper_{N-1}].
/// Every side has strictly positive, finite width.
class HyperBox {
 public:
  HyperBox(Point lower, Point upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size()) {
      throw InvalidArgument("box bounds have different lengths (" + std::to_string(lower_.size()) +
                            " vs " + std::to_string(upper_.size()) + ")");
    }
    if (lower_.empty()) throw InvalidArgument("box must have at least one coordinate");
    for (std::size_t d = 0; d < lower_.size(); ++d) {
      if (!std::isfinite(lower_[d]) || !std::isfinite(upper_[d])) {
        throw InvalidArgument("box coordinate " + std::to_string(d + 1) + " is not finite");
      }
      if (!(lower_[d] < upper_[d])) {
        throw InvalidArgument("box coordinate " + std::to_string(d + 1) +
                              ": lower bound must be strictly below upper bound");
      }
    }
  }

  std::size_t dim() const { return lower_.size(); }
  const Point& lower() const { return lower_; }
  const Point& upper() const { return upper_; }
  double lower(std::size_t d) const { return lower_[d]; }
  double upper(std::size_t d) const { return upper_[d]; }
  double width(std::size_t d) const { return upper_[d] - lower_[d]; }

  /// Closed membership; the boundary counts as inside.
  bool contains(std::span<const double> x) const {
    if (x.size() != dim()) return false;
    for (std::size_t d = 0; d < dim(); ++d) {
      if (!(x[d] >= lower_[d] && x[d] <= upper_[d])) return false;
    }
    return true;
  }

  /// Point reflection through the origin: -B.
  HyperBox reflected() const {
    Point lo(dim()), hi(dim());
    for (std::size_t d = 0; d < dim(); ++d) {
      lo[d] = -upper_[d];
      hi[d] = -lower_[d];
    }
    return {std::move(lo), std::move(hi)};
  }

  friend bool operator==(const HyperBox&, const HyperBox&) = default;

 private:
  Point lower_;
  Point upper_;
};

/// Maps the per-agent (i, j) indexing onto the flat coordinate index d.
/// Agent i owns coordinates [offset(i), offset(i) + k_i).
class AgentLayout {
 public:
  explicit AgentLayout(std::vector<std::size_t> dims_per_agent) : dims_(std::move(dims_per_agent)) {
    offsets_.reserve(dims_.size());
    std::size_t acc = 0;
    for (std::size_t k : dims_) {
      if (k == 0) throw InvalidArgument("every agent needs at least one coordinate");
      offsets_.push_back(acc);
      acc += k;
    }
    total_ = acc;
  }

  /// One scalar coordinate per agent.
  static AgentLayout scalar_agents(std::size_t n) { return AgentLayout(std::vector<std::size_t>(n, 1)); }

  std::size_t agents() const { return dims_.size(); }
  std::size_t total_dim() const { return total_; }
  std::size_t offset(std::size_t agent) const { return offsets_.at(agent); }
  std::size_t flatten(std::size_t agent, std::size_t coord) const {
    if (coord >= dims_.at(agent)) throw InvalidArgument("coordinate out of range for agent");
    return offsets_[agent] + coord;
  }
  std::pair<std::size_t, std::size_t> unflatten(std::size_t d) const {
    for (std::size_t i = dims_.size(); i-- > 0;) {
      if (d >= offsets_[i]) {
        if (d - offsets_[i] >= dims_[i]) break;
        return {i, d - offsets_[i]};
      }
    }
    throw InvalidArgument("flat index out of range");
  }

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

enum class Side { left, right };

inline const char* to_string(Side s) { return s == Side::left ? "left" : "right"; }

/// Sign applied to F_d by the isolation test: -1 on left faces, +1 on right faces.
inline double face_sign(Side s) { return s == Side::left ? -1.0 : 1.0; }

struct FaceId {
  std::size_t coordinate = 0;  // zero-based
  Side side = Side::left;

  friend bool operator==(const FaceId&, const FaceId&) = default;
};

/// One boundary face: coordinate `pinned_index` fixed at `pinned_value`,
/// remaining coordinates ranging over `profile` (absent when N = 1).
struct Face {
  std::size_t pinned_index = 0;
  Side side = Side::left;
  double pinned_value = 0.0;
  std::optional<HyperBox> profile;

  FaceId id() const { return {pinned_index, side}; }
  std::size_t dim() const { return profile ? profile->dim() + 1 : 1; }
  bool is_point() const { return !profile.has_value(); }
};

struct FaceMesh {
  std::vector<Point> points;
  double mesh_radius = 0.0;
};

inline HyperBox drop_coordinate(const HyperBox& box, std::size_t d) {
  Point lo, hi;
  lo.reserve(box.dim() - 1);
  hi.reserve(box.dim() - 1);
  for (std::size_t m = 0; m < box.dim(); ++m) {
    if (m == d) continue;
    lo.push_back(box.lower(m));
    hi.push_back(box.upper(m));
  }
  return {std::move(lo), std::move(hi)};
}

/// The 2N faces ordered by coordinate, left before right.
inline std::vector<Face> faces(const HyperBox& box) {
  std::vector<Face> out;
  out.reserve(2 * box.dim());
  for (std::size_t d = 0; d < box.dim(); ++d) {
    std::optional<HyperBox> profile;
    if (box.dim() > 1) profile = drop_coordinate(box, d);
    out.push_back({d, Side::left, box.lower(d), profile});
    out.push_back({d, Side::right, box.upper(d), std::move(profile)});
  }
  return out;
}

inline Face face_of(const HyperBox& box, FaceId id) {
  std::optional<HyperBox> profile;
  if (box.dim() > 1) profile = drop_coordinate(box, id.coordinate);
  double v = id.side == Side::left ? box.lower(id.coordinate) : box.upper(id.coordinate);
  return {id.coordinate, id.side, v, std::move(profile)};
}

/// Index of the widest side, lowest index on ties.
inline std::size_t longest_dimension(const HyperBox& box) {
  std::size_t best = 0;
  for (std::size_t d = 1; d < box.dim(); ++d) {
    if (box.width(d) > box.width(best)) best = d;
  }
  return best;
}

/// True when the widest side can be halved into two boxes of positive width.
inline bool splittable(const HyperBox& box) {
  std::size_t d = longest_dimension(box);
  double mid = 0.5 * (box.lower(d) + box.upper(d));
  return box.lower(d) < mid && mid < box.upper(d);
}

/// Bisects along the longest dimension at its midpoint.
inline std::pair<HyperBox, HyperBox> split(const HyperBox& box) {
  std::size_t d = longest_dimension(box);
  double mid = 0.5 * (box.lower(d) + box.upper(d));
  if (!(box.lower(d) < mid && mid < box.upper(d))) {
    throw InvalidArgument("box side too narrow to split at double precision");
  }
  Point hi1 = box.upper();
  hi1[d] = mid;
  Point lo2 = box.lower();
  lo2[d] = mid;
  return {HyperBox(box.lower(), std::move(hi1)), HyperBox(std::move(lo2), box.upper())};
}

inline Point baricenter(const HyperBox& box) {
  Point c(box.dim());
  for (std::size_t d = 0; d < box.dim(); ++d) c[d] = 0.5 * (box.lower(d) + box.upper(d));
  return c;
}

/// Euclidean length of the main diagonal.
inline double diameter(const HyperBox& box) {
  double s = 0.0;
  for (std::size_t d = 0; d < box.dim(); ++d) s += box.width(d) * box.width(d);
  return std::sqrt(s);
}

inline double diameter(const Face& face) { return face.profile ? diameter(*face.profile) : 0.0; }

/// Reinserts the pinned coordinate into a point of the face profile.
inline Point embed(const Face& face, std::span<const double> profile_point) {
  std::size_t expected = face.profile ? face.profile->dim() : 0;
  if (profile_point.size() != expected) {
    throw InvalidArgument("profile point has dimension " + std::to_string(profile_point.size()) +
                          ", face profile has " + std::to_string(expected));
  }
  Point x;
  x.reserve(expected + 1);
  x.insert(x.end(), profile_point.begin(), profile_point.begin() + face.pinned_index);
  x.push_back(face.pinned_value);
  x.insert(x.end(), profile_point.begin() + face.pinned_index, profile_point.end());
  return x;
}

inline Point baricenter(const Face& face) {
  if (!face.profile) return {face.pinned_value};
  return embed(face, baricenter(*face.profile));
}

/// Tensor grid of k points per profile dimension, endpoints included, in
/// lexicographic order (first profile coordinate slowest).
inline FaceMesh grid_sample(const Face& face, std::size_t points_per_dim) {
  if (points_per_dim < 2) throw InvalidArgument("points_per_dim must be at least 2");
  FaceMesh mesh;
  if (!face.profile) {
    mesh.points.push_back({face.pinned_value});
    return mesh;
  }
  const HyperBox& p = *face.profile;
  const std::size_t m = p.dim();
  const double steps = static_cast<double>(points_per_dim - 1);

  double h2 = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double h = p.width(j) / steps;
    h2 += h * h;
  }
  mesh.mesh_radius = 0.5 * std::sqrt(h2);

  std::size_t total = 1;
  for (std::size_t j = 0; j < m; ++j) total *= points_per_dim;
  mesh.points.reserve(total);

  std::vector<std::size_t> idx(m, 0);
  Point q(m);
  for (std::size_t n = 0; n < total; ++n) {
    for (std::size_t j = 0; j < m; ++j) {
      // Endpoints are hit exactly.
      q[j] = idx[j] + 1 == points_per_dim
                 ? p.upper(j)
                 : p.lower(j) + p.width(j) * (static_cast<double>(idx[j]) / steps);
    }
    mesh.points.push_back(embed(face, q));
    for (std::size_t j = m; j-- > 0;) {
      if (++idx[j] < points_per_dim) break;
      idx[j] = 0;
    }
  }
  return mesh;
}

}  // namespace trapping

#endif  // TRAPPING_GEOMETRY_HPP
