#ifndef TRAPPING_CLI_CERTIFICATE_HPP
#define TRAPPING_CLI_CERTIFICATE_HPP

// Verification certificate record, serialized as a single JSON line.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "trapping/geometry.hpp"
#include "trapping/oracle.hpp"
#include "trapping/verifier_bsp.hpp"
#include "trapping/verifier_sampling.hpp"

namespace trapping::cli {

using nlohmann::json;

inline constexpr int kCertificateSchema = 1;

struct WitnessRecord {
  Point point;
  std::size_t coordinate = 1;  // one-based
  std::string side;
  double value = 0.0;

  friend bool operator==(const WitnessRecord&, const WitnessRecord&) = default;
};

struct InconclusiveRecord {
  std::string reason;
  std::size_t coordinate = 1;
  std::string side;
  std::optional<Point> cell_lower;
  std::optional<Point> cell_upper;
  std::string diagnostic;

  friend bool operator==(const InconclusiveRecord&, const InconclusiveRecord&) = default;
};

struct BspRecord {
  std::size_t evaluations = 0;
  int max_depth_reached = 0;
  std::size_t leaf_count = 0;
  std::optional<double> min_certified_margin;
  double max_boundary_norm = 0.0;
  std::vector<std::size_t> face_leaf_counts;

  friend bool operator==(const BspRecord&, const BspRecord&) = default;
};

struct SamplingRecord {
  std::size_t points_per_dim = 0;
  std::size_t points_per_face = 0;
  std::size_t samples_evaluated = 0;
  double m_star = 0.0;
  double mesh_radius = 0.0;
  /// null when the mesh radius is zero (exhaustive point faces).
  std::optional<double> required_lipschitz;
  bool certified = false;
  std::vector<double> face_minima;

  friend bool operator==(const SamplingRecord&, const SamplingRecord&) = default;
};

struct OracleRecord {
  bool verdict = false;
  std::size_t points_per_dim = 0;
  double max_spacing = 0.0;
  std::vector<double> face_minima;
  bool agrees = false;

  friend bool operator==(const OracleRecord&, const OracleRecord&) = default;
};

struct Certificate {
  int schema_version = kCertificateSchema;
  json config = json::object();
  std::string mode;
  /// trapping | not_trapping | inconclusive | uncertified
  std::string verdict;
  Point box_lower;
  Point box_upper;
  std::optional<double> lipschitz;
  double margin = 0.0;
  int max_depth = 0;
  std::optional<double> gamma_bound;
  std::optional<BspRecord> bsp;
  std::optional<SamplingRecord> sampling;
  std::optional<WitnessRecord> witness;
  std::optional<InconclusiveRecord> inconclusive;
  std::optional<OracleRecord> oracle;
  double wall_ms = 0.0;

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

namespace detail {

template <typename T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

inline std::optional<double> finite_or_null(double v) {
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace detail

inline void to_json(json& j, const WitnessRecord& w) {
  j = {{"point", w.point}, {"coordinate", w.coordinate}, {"side", w.side}, {"value", w.value}};
}
inline void from_json(const json& j, WitnessRecord& w) {
  j.at("point").get_to(w.point);
  j.at("coordinate").get_to(w.coordinate);
  j.at("side").get_to(w.side);
  j.at("value").get_to(w.value);
}

inline void to_json(json& j, const InconclusiveRecord& r) {
  j = {{"reason", r.reason}, {"coordinate", r.coordinate}, {"side", r.side}, {"diagnostic", r.diagnostic}};
  detail::put_opt(j, "cell_lower", r.cell_lower);
  detail::put_opt(j, "cell_upper", r.cell_upper);
}
inline void from_json(const json& j, InconclusiveRecord& r) {
  j.at("reason").get_to(r.reason);
  j.at("coordinate").get_to(r.coordinate);
  j.at("side").get_to(r.side);
  j.at("diagnostic").get_to(r.diagnostic);
  r.cell_lower = detail::get_opt<Point>(j, "cell_lower");
  r.cell_upper = detail::get_opt<Point>(j, "cell_upper");
}

inline void to_json(json& j, const BspRecord& s) {
  j = {{"evaluations", s.evaluations},
       {"max_depth_reached", s.max_depth_reached},
       {"leaf_count", s.leaf_count},
       {"max_boundary_norm", s.max_boundary_norm},
       {"face_leaf_counts", s.face_leaf_counts}};
  detail::put_opt(j, "min_certified_margin", s.min_certified_margin);
}
inline void from_json(const json& j, BspRecord& s) {
  j.at("evaluations").get_to(s.evaluations);
  j.at("max_depth_reached").get_to(s.max_depth_reached);
  j.at("leaf_count").get_to(s.leaf_count);
  j.at("max_boundary_norm").get_to(s.max_boundary_norm);
  j.at("face_leaf_counts").get_to(s.face_leaf_counts);
  s.min_certified_margin = detail::get_opt<double>(j, "min_certified_margin");
}

inline void to_json(json& j, const SamplingRecord& s) {
  j = {{"points_per_dim", s.points_per_dim}, {"points_per_face", s.points_per_face},
       {"samples_evaluated", s.samples_evaluated}, {"m_star", s.m_star},
       {"mesh_radius", s.mesh_radius}, {"certified", s.certified},
       {"face_minima", s.face_minima}};
  detail::put_opt(j, "required_lipschitz", s.required_lipschitz);
}
inline void from_json(const json& j, SamplingRecord& s) {
  j.at("points_per_dim").get_to(s.points_per_dim);
  j.at("points_per_face").get_to(s.points_per_face);
  j.at("samples_evaluated").get_to(s.samples_evaluated);
  j.at("m_star").get_to(s.m_star);
  j.at("mesh_radius").get_to(s.mesh_radius);
  j.at("certified").get_to(s.certified);
  j.at("face_minima").get_to(s.face_minima);
  s.required_lipschitz = detail::get_opt<double>(j, "required_lipschitz");
}

inline void to_json(json& j, const OracleRecord& o) {
  j = {{"verdict", o.verdict}, {"points_per_dim", o.points_per_dim}, {"max_spacing", o.max_spacing},
       {"face_minima", o.face_minima}, {"agrees", o.agrees}};
}
inline void from_json(const json& j, OracleRecord& o) {
  j.at("verdict").get_to(o.verdict);
  j.at("points_per_dim").get_to(o.points_per_dim);
  j.at("max_spacing").get_to(o.max_spacing);
  j.at("face_minima").get_to(o.face_minima);
  j.at("agrees").get_to(o.agrees);
}

inline void to_json(json& j, const Certificate& c) {
  j = {{"schema_version", c.schema_version},
       {"config", c.config},
       {"mode", c.mode},
       {"verdict", c.verdict},
       {"box", {{"lower", c.box_lower}, {"upper", c.box_upper}}},
       {"margin", c.margin},
       {"max_depth", c.max_depth},
       {"wall_ms", c.wall_ms}};
  detail::put_opt(j, "lipschitz", c.lipschitz);
  detail::put_opt(j, "gamma_bound", c.gamma_bound);
  detail::put_opt(j, "bsp", c.bsp);
  detail::put_opt(j, "sampling", c.sampling);
  detail::put_opt(j, "witness", c.witness);
  detail::put_opt(j, "inconclusive", c.inconclusive);
  detail::put_opt(j, "oracle", c.oracle);
}
inline void from_json(const json& j, Certificate& c) {
  j.at("schema_version").get_to(c.schema_version);
  c.config = j.at("config");
  j.at("mode").get_to(c.mode);
  j.at("verdict").get_to(c.verdict);
  j.at("box").at("lower").get_to(c.box_lower);
  j.at("box").at("upper").get_to(c.box_upper);
  j.at("margin").get_to(c.margin);
  j.at("max_depth").get_to(c.max_depth);
  j.at("wall_ms").get_to(c.wall_ms);
  c.lipschitz = detail::get_opt<double>(j, "lipschitz");
  c.gamma_bound = detail::get_opt<double>(j, "gamma_bound");
  c.bsp = detail::get_opt<BspRecord>(j, "bsp");
  c.sampling = detail::get_opt<SamplingRecord>(j, "sampling");
  c.witness = detail::get_opt<WitnessRecord>(j, "witness");
  c.inconclusive = detail::get_opt<InconclusiveRecord>(j, "inconclusive");
  c.oracle = detail::get_opt<OracleRecord>(j, "oracle");
}

inline std::string serialize(const Certificate& c) { return json(c).dump() + "\n"; }

inline Certificate deserialize_certificate(const std::string& line) { return json::parse(line).get<Certificate>(); }

inline WitnessRecord to_record(const Witness& w) {
  return {w.point, w.face.coordinate + 1, to_string(w.face.side), w.value};
}

inline BspRecord to_record(const VerifyStats& s) {
  return {s.evaluations,       s.max_depth_reached, s.leaf_count, detail::finite_or_null(s.min_certified_margin),
          s.max_boundary_norm, s.face_leaf_counts};
}

inline InconclusiveRecord to_record(const InconclusiveInfo& info) {
  InconclusiveRecord r;
  r.reason = to_string(info.reason);
  r.coordinate = info.face.coordinate + 1;
  r.side = to_string(info.face.side);
  if (info.deepest_cell) {
    r.cell_lower = info.deepest_cell->lower();
    r.cell_upper = info.deepest_cell->upper();
  }
  r.diagnostic = info.diagnostic;
  return r;
}

}  // namespace trapping::cli

#endif  // TRAPPING_CLI_CERTIFICATE_HPP
