#ifndef TRAPPING_VERIFIER_BSP_HPP
#define TRAPPING_VERIFIER_BSP_HPP

// Rigorous trapping-region verification for boxes. Each face is bisected
// depth-first until every cell S satisfies the Lipschitz isolation test
//
//     sign * F_d(C(S)) + L * diam(S) / 2 + margin < 0
//
// (sign = -1 on left faces, +1 on right faces), or a baricenter violates
// sign * F_d(C(S)) + margin < 0.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trapping/dynamics.hpp"
#include "trapping/error.hpp"
#include "trapping/geometry.hpp"
#include "trapping/parallel.hpp"

namespace trapping {

struct BspConfig {
  /// Lipschitz bound override; the model's analytic bound is used when unset.
  std::optional<double> lipschitz;
  /// Maximum bisection depth per face. A cell that still needs splitting at
  /// this depth makes the face inconclusive.
  int max_depth = 60;
  /// Extra slack added to both tests.
  double margin = 0.0;
  /// When false, a violation on one face cancels the remaining faces and the
  /// reported witness depends on scheduling.
  bool deterministic = true;
  /// Worker threads over faces (0 = hardware concurrency).
  std::size_t threads = 1;

  void validate() const {
    if (lipschitz && !(*lipschitz > 0.0 && std::isfinite(*lipschitz))) {
      throw InvalidArgument("lipschitz bound must be positive and finite");
    }
    if (max_depth < 0) throw InvalidArgument("max_depth must be >= 0");
    if (!(margin >= 0.0) || !std::isfinite(margin)) throw InvalidArgument("margin must be >= 0");
  }
};

enum class Outcome { trapping, not_trapping, inconclusive };
enum class FaceStatus { passed, violated, inconclusive, cancelled };
enum class InconclusiveReason { depth_cap, eval_error };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::trapping: return "trapping";
    case Outcome::not_trapping: return "not_trapping";
    case Outcome::inconclusive: return "inconclusive";
  }
  return "?";
}

inline const char* to_string(InconclusiveReason r) {
  return r == InconclusiveReason::depth_cap ? "depth_cap" : "eval_error";
}

/// A point on a face where the isolation inequality fails. `value` is the raw
/// component F_d(point).
struct Witness {
  Point point;
  FaceId face;
  double value = 0.0;

  double signed_value() const { return face_sign(face.side) * value; }
};

struct FaceResult {
  FaceId face;
  FaceStatus status = FaceStatus::passed;
  std::size_t evaluations = 0;
  std::size_t leaf_count = 0;
  int max_depth_reached = 0;
  /// Smallest certified margin over passed cells; +inf if none passed.
  double min_margin = std::numeric_limits<double>::infinity();
  double max_boundary_norm = 0.0;
  std::optional<Witness> witness;
  std::optional<InconclusiveReason> reason;
  /// Profile-space cell at which the face became inconclusive.
  std::optional<HyperBox> deepest_cell;
  std::string diagnostic;
};

struct VerifyStats {
  std::size_t evaluations = 0;
  int max_depth_reached = 0;
  std::size_t leaf_count = 0;
  /// Lower bound on min over the faces of |F_d|, from passed cells.
  double min_certified_margin = std::numeric_limits<double>::infinity();
  double max_boundary_norm = 0.0;
  std::vector<std::size_t> face_leaf_counts;
};

struct InconclusiveInfo {
  InconclusiveReason reason = InconclusiveReason::depth_cap;
  FaceId face;
  std::optional<HyperBox> deepest_cell;
  std::string diagnostic;
};

struct Verdict {
  Outcome outcome = Outcome::inconclusive;
  double lipschitz = 0.0;
  double margin = 0.0;
  int max_depth = 0;
  /// Admissible learning rate; set only for Outcome::trapping.
  double gamma_bound = 0.0;
  VerifyStats stats;
  std::vector<FaceResult> faces;
  std::optional<Witness> witness;
  std::optional<InconclusiveInfo> inconclusive;
  double wall_ms = 0.0;

  bool trapping() const { return outcome == Outcome::trapping; }
};

/// Checks one face. `cfg.lipschitz` must be set. `cancel`, when given, is
/// polled between cells.
inline FaceResult check_face(const DynamicsModel& model, const Face& face, const BspConfig& cfg,
                             const std::atomic<bool>* cancel = nullptr) {
  cfg.validate();
  if (!cfg.lipschitz) throw InvalidArgument("check_face requires a Lipschitz bound");
  const double lip = *cfg.lipschitz;
  const double tau = cfg.margin;
  const double sign = face_sign(face.side);
  const std::size_t d = face.pinned_index;

  FaceResult res;
  res.face = face.id();
  Point f(model.dim());

  // Returns sign * F_d(x), or nullopt after recording an evaluation error.
  auto probe = [&](const Point& x) -> std::optional<double> {
    try {
      model.eval_into(x, f);
    } catch (const EvaluationError& e) {
      res.status = FaceStatus::inconclusive;
      res.reason = InconclusiveReason::eval_error;
      res.diagnostic = e.what();
      return std::nullopt;
    }
    ++res.evaluations;
    res.max_boundary_norm = std::max(res.max_boundary_norm, max_abs(f));
    return sign * f[d];
  };

  if (face.is_point()) {
    const Point x{face.pinned_value};
    auto v = probe(x);
    if (!v) return res;
    if (*v + tau >= 0.0) {
      res.status = FaceStatus::violated;
      res.witness = Witness{x, res.face, f[d]};
    } else {
      res.leaf_count = 1;
      res.min_margin = -*v - tau;
    }
    return res;
  }

  struct Cell {
    HyperBox box;
    int depth;
  };
  std::vector<Cell> work;
  work.push_back({*face.profile, 0});
  int deepest_inconclusive = -1;

  while (!work.empty()) {
    if (cancel && cancel->load(std::memory_order_relaxed)) {
      res.status = FaceStatus::cancelled;
      return res;
    }
    Cell cell = std::move(work.back());
    work.pop_back();
    res.max_depth_reached = std::max(res.max_depth_reached, cell.depth);

    const Point c = embed(face, baricenter(cell.box));
    auto v = probe(c);
    if (!v) {
      res.deepest_cell = cell.box;
      return res;
    }
    if (*v + tau >= 0.0) {
      res.status = FaceStatus::violated;
      res.witness = Witness{c, res.face, f[d]};
      return res;
    }
    const double slack = lip * diameter(cell.box) / 2.0;
    if (*v + slack + tau >= 0.0) {
      if (cell.depth + 1 > cfg.max_depth || !splittable(cell.box)) {
        res.status = FaceStatus::inconclusive;
        res.reason = InconclusiveReason::depth_cap;
        if (cell.depth > deepest_inconclusive) {
          deepest_inconclusive = cell.depth;
          res.deepest_cell = cell.box;
        }
        continue;
      }
      auto [lo, hi] = split(cell.box);
      // Lower half is popped first.
      work.push_back({std::move(hi), cell.depth + 1});
      work.push_back({std::move(lo), cell.depth + 1});
      continue;
    }
    ++res.leaf_count;
    res.min_margin = std::min(res.min_margin, -*v - slack - tau);
  }
  if (res.status == FaceStatus::inconclusive && res.diagnostic.empty()) {
    res.diagnostic = "subdivision depth cap reached before the isolation test could be decided";
  }
  return res;
}

/// Resolves the Lipschitz bound from the config or the model.
inline double resolve_lipschitz(const DynamicsModel& model, const HyperBox& box, const BspConfig& cfg) {
  if (cfg.lipschitz) return *cfg.lipschitz;
  auto l = model.lipschitz_upper(box);
  if (!l) throw InvalidArgument(model.name() + " has no analytic Lipschitz bound; supply one explicitly");
  if (!(*l > 0.0) || !std::isfinite(*l)) {
    throw InvalidArgument(model.name() + ": Lipschitz bound must be positive and finite");
  }
  return *l;
}

/// Largest step size certified by a Trapping run: m / (L * B), where m is the
/// certified face margin and B bounds ||F||_max over the whole box (analytic
/// when the model provides it, else boundary maximum + L * diam(box)).
inline double gamma_bound(const VerifyStats& stats, const DynamicsModel& model, const HyperBox& box,
                          double lipschitz) {
  const double m = stats.min_certified_margin;
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw InvalidArgument("gamma_bound requires a trapping verdict with positive certified margin");
  }
  if (!(lipschitz > 0.0)) throw InvalidArgument("gamma_bound requires L > 0");
  double sup;
  if (auto s = model.sup_norm_upper(box)) {
    sup = *s;
  } else {
    sup = stats.max_boundary_norm + lipschitz * diameter(box);
  }
  // F vanishing identically cannot coexist with a positive margin, but guard
  // the division anyway.
  sup = std::max(sup, m);
  return m / (lipschitz * sup);
}

/// Verifies all 2N faces of `box`.
inline Verdict verify_box(const DynamicsModel& model, const HyperBox& box, const BspConfig& cfg) {
  cfg.validate();
  if (box.dim() != model.dim()) {
    throw InvalidArgument("box dimension " + std::to_string(box.dim()) + " does not match model dimension " +
                          std::to_string(model.dim()));
  }
  const auto start = std::chrono::steady_clock::now();

  BspConfig run = cfg;
  run.lipschitz = resolve_lipschitz(model, box, cfg);

  Verdict verdict;
  verdict.lipschitz = *run.lipschitz;
  verdict.margin = cfg.margin;
  verdict.max_depth = cfg.max_depth;

  const std::vector<Face> all = faces(box);
  verdict.faces.resize(all.size());
  std::atomic<bool> cancel{false};
  parallel_for(all.size(), cfg.threads, [&](std::size_t i) {
    verdict.faces[i] = check_face(model, all[i], run, cfg.deterministic ? nullptr : &cancel);
    if (verdict.faces[i].status == FaceStatus::violated) cancel = true;
  });

  VerifyStats& st = verdict.stats;
  for (const FaceResult& r : verdict.faces) {
    st.evaluations += r.evaluations;
    st.max_depth_reached = std::max(st.max_depth_reached, r.max_depth_reached);
    st.leaf_count += r.leaf_count;
    st.min_certified_margin = std::min(st.min_certified_margin, r.min_margin);
    st.max_boundary_norm = std::max(st.max_boundary_norm, r.max_boundary_norm);
    st.face_leaf_counts.push_back(r.leaf_count);
  }

  for (const FaceResult& r : verdict.faces) {
    if (r.status == FaceStatus::violated) {
      verdict.outcome = Outcome::not_trapping;
      verdict.witness = r.witness;
      break;
    }
  }
  if (!verdict.witness) {
    for (const FaceResult& r : verdict.faces) {
      if (r.status == FaceStatus::inconclusive) {
        verdict.outcome = Outcome::inconclusive;
        verdict.inconclusive = InconclusiveInfo{*r.reason, r.face, r.deepest_cell, r.diagnostic};
        break;
      }
    }
    if (!verdict.inconclusive) {
      verdict.outcome = Outcome::trapping;
      verdict.gamma_bound = gamma_bound(st, model, box, verdict.lipschitz);
    }
  }

  verdict.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return verdict;
}

}  // namespace trapping

#endif  // TRAPPING_VERIFIER_BSP_HPP
