#ifndef TRAPPING_VERIFIER_SAMPLING_HPP
#define TRAPPING_VERIFIER_SAMPLING_HPP

// Heuristic verification on uniform face grids, and the a-posteriori
// certificate that upgrades a passed sample to a proof when L < m* / D.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "trapping/dynamics.hpp"
#include "trapping/error.hpp"
#include "trapping/geometry.hpp"
#include "trapping/parallel.hpp"
#include "trapping/verifier_bsp.hpp"

namespace trapping {

struct SampleOptions {
  /// Evaluate every sample even after a violation, so m* and D are global.
  bool full_scan = true;
  std::size_t threads = 1;
};

struct FaceSampleSummary {
  FaceId face;
  /// min |F_d| over the face samples.
  double min_abs = std::numeric_limits<double>::infinity();
  double mesh_radius = 0.0;
  std::size_t samples = 0;
};

struct SampleReport {
  bool verdict = false;
  double m_star = std::numeric_limits<double>::infinity();
  double mesh_radius_max = 0.0;
  std::optional<Witness> witness;
  std::size_t samples_evaluated = 0;
  std::size_t points_per_dim = 0;
  std::size_t points_per_face = 0;
  /// Sample attaining m*.
  Point argmin_point;
  FaceId argmin_face;
  double max_sample_norm = 0.0;
  std::vector<FaceSampleSummary> faces;
  double wall_ms = 0.0;
};

inline SampleReport sample_verify(const DynamicsModel& model, const HyperBox& box, std::size_t points_per_dim,
                                  const SampleOptions& opts = {}) {
  if (box.dim() != model.dim()) throw InvalidArgument("box dimension does not match model dimension");
  const auto start = std::chrono::steady_clock::now();

  const std::vector<Face> all = faces(box);
  std::vector<FaceMesh> meshes;
  meshes.reserve(all.size());
  for (const Face& f : all) meshes.push_back(grid_sample(f, points_per_dim));

  SampleReport rep;
  rep.points_per_dim = points_per_dim;
  rep.points_per_face = meshes.front().points.size();

  // Flat (face, sample) enumeration in deterministic order.
  std::vector<std::size_t> face_begin(all.size() + 1, 0);
  for (std::size_t i = 0; i < all.size(); ++i) face_begin[i + 1] = face_begin[i] + meshes[i].points.size();
  const std::size_t total = face_begin.back();
  auto locate = [&](std::size_t flat) {
    std::size_t fi = static_cast<std::size_t>(std::upper_bound(face_begin.begin(), face_begin.end(), flat) -
                                              face_begin.begin()) - 1;
    return std::pair{fi, flat - face_begin[fi]};
  };

  std::vector<double> component(total, 0.0);
  std::vector<double> norm(total, 0.0);
  std::size_t evaluated = 0;

  auto eval_sample = [&](std::size_t flat, Point& buf) {
    auto [fi, si] = locate(flat);
    model.eval_into(meshes[fi].points[si], buf);
    component[flat] = buf[all[fi].pinned_index];
    norm[flat] = max_abs(buf);
  };

  if (opts.full_scan) {
    parallel_for(total, opts.threads, [&](std::size_t flat) {
      Point buf(model.dim());
      eval_sample(flat, buf);
    });
    evaluated = total;
  } else {
    Point buf(model.dim());
    for (std::size_t flat = 0; flat < total; ++flat) {
      eval_sample(flat, buf);
      ++evaluated;
      if (face_sign(all[locate(flat).first].side) * component[flat] >= 0.0) break;
    }
  }

  rep.samples_evaluated = evaluated;
  rep.faces.resize(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    rep.faces[i].face = all[i].id();
    rep.faces[i].mesh_radius = meshes[i].mesh_radius;
    rep.mesh_radius_max = std::max(rep.mesh_radius_max, meshes[i].mesh_radius);
  }
  for (std::size_t flat = 0; flat < evaluated; ++flat) {
    auto [fi, si] = locate(flat);
    const double v = component[flat];
    const double a = std::abs(v);
    FaceSampleSummary& fs = rep.faces[fi];
    ++fs.samples;
    fs.min_abs = std::min(fs.min_abs, a);
    rep.max_sample_norm = std::max(rep.max_sample_norm, norm[flat]);
    if (a < rep.m_star) {
      rep.m_star = a;
      rep.argmin_point = meshes[fi].points[si];
      rep.argmin_face = all[fi].id();
    }
    if (!rep.witness && face_sign(all[fi].side) * v >= 0.0) {
      rep.witness = Witness{meshes[fi].points[si], all[fi].id(), v};
    }
  }
  rep.verdict = !rep.witness.has_value();
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

struct PosterioriCertificate {
  bool certified = false;
  /// m* / D; +inf when every face is sampled exhaustively (D = 0).
  double required_lipschitz = 0.0;
  double lipschitz = 0.0;
};

/// A passed sample is a trapping region whenever L < m* / D.
inline PosterioriCertificate certify_posteriori(const SampleReport& report, double lipschitz) {
  if (!report.verdict) throw InvalidArgument("cannot certify a sample that failed the isolation test");
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) throw InvalidArgument("lipschitz bound must be positive");
  PosterioriCertificate c;
  c.lipschitz = lipschitz;
  const double m = report.m_star;
  const double dmesh = report.mesh_radius_max;
  if (dmesh == 0.0) {
    c.required_lipschitz = m > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    c.certified = m > 0.0;
  } else {
    c.required_lipschitz = m / dmesh;
    c.certified = lipschitz < c.required_lipschitz;
  }
  return c;
}

/// Step-size bound for a certified sample: the true face minimum is at least
/// m* - L D, and B bounds ||F||_max over the box.
inline double posteriori_gamma_bound(const SampleReport& report, const PosterioriCertificate& cert, double sup_norm) {
  if (!cert.certified) throw InvalidArgument("posteriori_gamma_bound requires a certified sample");
  const double m = report.m_star - cert.lipschitz * report.mesh_radius_max;
  if (!(sup_norm > 0.0)) throw InvalidArgument("sup norm bound must be positive");
  return m / (cert.lipschitz * std::max(sup_norm, m));
}

}  // namespace trapping

#endif  // TRAPPING_VERIFIER_SAMPLING_HPP
