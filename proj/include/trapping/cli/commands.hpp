#ifndef TRAPPING_CLI_COMMANDS_HPP
#define TRAPPING_CLI_COMMANDS_HPP

// Subcommand drivers. Exit codes: 0 trapping (or certified / contained),
// 1 not trapping (or escaped), 2 inconclusive / uncertified / evaluation
// failure, 3 usage or configuration error.

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "trapping/cli/certificate.hpp"
#include "trapping/cli/config.hpp"
#include "trapping/dynamics.hpp"
#include "trapping/oracle.hpp"
#include "trapping/simulator.hpp"
#include "trapping/verifier_bsp.hpp"
#include "trapping/verifier_sampling.hpp"

namespace trapping::cli {

enum ExitCode : int { kExitTrapping = 0, kExitNotTrapping = 1, kExitUndecided = 2, kExitUsage = 3 };

struct VerifyResult {
  int exit_code = kExitUsage;
  Certificate certificate;
};

inline int exit_code_for(Outcome o) {
  switch (o) {
    case Outcome::trapping: return kExitTrapping;
    case Outcome::not_trapping: return kExitNotTrapping;
    case Outcome::inconclusive: return kExitUndecided;
  }
  return kExitUndecided;
}

inline BspConfig bsp_config(const ExperimentConfig& c) {
  BspConfig b;
  b.lipschitz = c.verifier.lipschitz;
  b.max_depth = c.verifier.max_depth;
  b.margin = c.verifier.margin;
  b.threads = c.threads;
  return b;
}

namespace detail {

inline Certificate base_certificate(const ExperimentConfig& c) {
  Certificate cert;
  cert.config = config_to_json(c);
  cert.mode = c.verifier.mode;
  cert.box_lower = c.lower;
  cert.box_upper = c.upper;
  cert.margin = c.verifier.margin;
  cert.max_depth = c.verifier.max_depth;
  return cert;
}

inline void attach_oracle(const ExperimentConfig& c, const DynamicsModel& model, const HyperBox& box,
                          VerifyResult& res, std::ostream& log) {
  if (box.dim() > oracle::kMaxDenseDim) {
    log << "oracle: skipped, dense check is limited to dimension " << oracle::kMaxDenseDim << "\n";
    return;
  }
  try {
    auto rep = oracle::dense_boundary_check(model, box, c.verifier.oracle_points_per_dim);
    OracleRecord o;
    o.verdict = rep.verdict;
    o.points_per_dim = c.verifier.oracle_points_per_dim;
    o.max_spacing = rep.max_spacing;
    o.face_minima = rep.face_minima;
    o.agrees = rep.verdict == (res.exit_code == kExitTrapping);
    res.certificate.oracle = o;
    log << "oracle: dense boundary check " << (rep.verdict ? "passed" : "failed")
        << (o.agrees ? " (agrees)" : " (disagrees)") << "\n";
  } catch (const EvaluationError& e) {
    log << "oracle: evaluation failed: " << e.what() << "\n";
  }
}

}  // namespace detail

inline VerifyResult verify_bsp(const ExperimentConfig& c, const DynamicsModel& model, const HyperBox& box) {
  VerifyResult res;
  res.certificate = detail::base_certificate(c);
  Verdict v;
  try {
    v = verify_box(model, box, bsp_config(c));
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  Certificate& cert = res.certificate;
  cert.mode = "bsp";
  cert.verdict = to_string(v.outcome);
  cert.lipschitz = v.lipschitz;
  cert.bsp = to_record(v.stats);
  if (v.trapping()) cert.gamma_bound = v.gamma_bound;
  if (v.witness) cert.witness = to_record(*v.witness);
  if (v.inconclusive) cert.inconclusive = to_record(*v.inconclusive);
  cert.wall_ms = v.wall_ms;
  res.exit_code = exit_code_for(v.outcome);
  return res;
}

inline VerifyResult verify_sampling(const ExperimentConfig& c, const DynamicsModel& model, const HyperBox& box) {
  VerifyResult res;
  res.certificate = detail::base_certificate(c);
  Certificate& cert = res.certificate;
  cert.mode = "sampling";

  double lip = 0.0;
  try {
    lip = resolve_lipschitz(model, box, bsp_config(c));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  cert.lipschitz = lip;

  SampleReport rep;
  try {
    rep = sample_verify(model, box, c.verifier.points_per_dim, SampleOptions{true, c.threads});
  } catch (const EvaluationError& e) {
    cert.verdict = "inconclusive";
    cert.inconclusive = InconclusiveRecord{"eval_error", 0, "", std::nullopt, std::nullopt, e.what()};
    res.exit_code = kExitUndecided;
    return res;
  }

  SamplingRecord s;
  s.points_per_dim = rep.points_per_dim;
  s.points_per_face = rep.points_per_face;
  s.samples_evaluated = rep.samples_evaluated;
  s.m_star = rep.m_star;
  s.mesh_radius = rep.mesh_radius_max;
  for (const auto& f : rep.faces) s.face_minima.push_back(f.min_abs);
  cert.wall_ms = rep.wall_ms;

  if (!rep.verdict) {
    cert.verdict = "not_trapping";
    cert.witness = to_record(*rep.witness);
    s.required_lipschitz = rep.mesh_radius_max > 0.0 ? std::optional(rep.m_star / rep.mesh_radius_max) : std::nullopt;
    cert.sampling = s;
    res.exit_code = kExitNotTrapping;
    return res;
  }

  PosterioriCertificate pc = certify_posteriori(rep, lip);
  s.certified = pc.certified;
  s.required_lipschitz = detail::finite_or_null(pc.required_lipschitz);
  cert.sampling = s;
  if (pc.certified) {
    double sup = model.sup_norm_upper(box).value_or(rep.max_sample_norm + lip * diameter(box));
    cert.gamma_bound = posteriori_gamma_bound(rep, pc, sup);
    cert.verdict = "trapping";
    res.exit_code = kExitTrapping;
  } else {
    cert.verdict = "uncertified";
    res.exit_code = kExitUndecided;
  }
  return res;
}

/// Runs the configured verifier without any I/O.
inline VerifyResult verify(const ExperimentConfig& c, std::ostream& log = std::cerr) {
  ModelPtr model = build_model(c.model);
  HyperBox box = config_box(c);
  VerifyResult res = c.verifier.mode == "sampling" ? verify_sampling(c, *model, box) : verify_bsp(c, *model, box);
  if (c.verifier.oracle) detail::attach_oracle(c, *model, box, res, log);
  return res;
}

inline void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

inline void print_summary(const Certificate& cert, std::ostream& log) {
  log << "verdict: " << cert.verdict;
  if (cert.gamma_bound) log << "  gamma_bound: " << *cert.gamma_bound;
  if (cert.sampling && cert.sampling->required_lipschitz) {
    log << "  m*: " << cert.sampling->m_star << "  D: " << cert.sampling->mesh_radius
        << "  required_L: " << *cert.sampling->required_lipschitz;
  }
  if (cert.lipschitz) log << "  L: " << *cert.lipschitz;
  if (cert.witness) {
    log << "  witness: face x_" << cert.witness->coordinate << " " << cert.witness->side << " value "
        << cert.witness->value;
  }
  if (cert.inconclusive) log << "  reason: " << cert.inconclusive->reason << " (" << cert.inconclusive->diagnostic << ")";
  log << "\n";
}

inline int run_verify(const ExperimentConfig& c, const std::string& out_path, std::ostream& out, std::ostream& log) {
  VerifyResult res = verify(c, log);
  write_text(out_path, serialize(res.certificate), out);
  print_summary(res.certificate, log);
  return res.exit_code;
}

inline int run_gamma_bound(const ExperimentConfig& c, const std::string& out_path, std::ostream& out,
                           std::ostream& log) {
  ExperimentConfig bsp = c;
  bsp.verifier.mode = "bsp";
  VerifyResult res = verify(bsp, log);
  if (!out_path.empty()) write_text(out_path, serialize(res.certificate), out);
  if (res.certificate.gamma_bound) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, *res.certificate.gamma_bound);
    out << std::string(buf, r.ptr) << "\n";
  } else {
    print_summary(res.certificate, log);
  }
  return res.exit_code;
}

inline std::string format_number(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// Header `step,x_1,...,x_N,inside`, one row per recorded point.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const HyperBox& monitor) {
  os << "step";
  for (std::size_t d = 0; d < monitor.dim(); ++d) os << ",x_" << d + 1;
  os << ",inside\n";
  for (std::size_t i = 0; i < tr.points.size(); ++i) {
    os << tr.steps[i];
    for (double v : tr.points[i]) os << ',' << format_number(v);
    os << ',' << (monitor.contains(tr.points[i]) ? 1 : 0) << '\n';
  }
}

/// `out` for a single start, `<stem>_<i><ext>` otherwise.
inline std::string trajectory_path(const std::string& out, std::size_t index, std::size_t count) {
  if (count == 1) return out;
  std::filesystem::path p(out);
  std::string name = p.stem().string() + "_" + std::to_string(index) + p.extension().string();
  return (p.parent_path() / name).string();
}

inline int run_simulate(const ExperimentConfig& c, const std::string& out_path, std::ostream& out, std::ostream& log) {
  if (!c.simulate) throw ConfigError("simulate needs a simulate section (--gamma, --steps, --starts or --x0)");
  const SimulateSpec& s = *c.simulate;
  ModelPtr model = build_model(c.model);
  HyperBox box = config_box(c);

  double gamma = 0.0;
  if (s.gamma) {
    gamma = *s.gamma;
  } else {
    ExperimentConfig bsp = c;
    bsp.verifier.mode = "bsp";
    VerifyResult res = verify_bsp(bsp, *model, box);
    if (!res.certificate.gamma_bound) {
      log << "gamma=auto needs a trapping verdict; ";
      print_summary(res.certificate, log);
      return res.exit_code;
    }
    gamma = 0.9 * *res.certificate.gamma_bound;
    log << "gamma: " << gamma << " (0.9 x certified bound)\n";
  }

  std::vector<Point> starts = s.x0.empty() ? random_starts(box, s.starts, c.seed) : s.x0;
  SimulateOptions opts;
  opts.monitor = box;
  opts.stride = s.stride;

  // An observed escape is decisive even if the run later failed numerically.
  bool escaped = false, failed = false;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    Trajectory tr = simulate(*model, starts[i], gamma, s.steps, opts);
    if (out_path.empty()) {
      write_trajectory_csv(out, tr, box);
    } else {
      std::string path = trajectory_path(out_path, i, starts.size());
      std::ofstream f(path);
      if (!f) throw ConfigError("cannot write '" + path + "'");
      write_trajectory_csv(f, tr, box);
    }
    log << "start " << i << ": steps " << tr.steps_taken << ", escaped_at "
        << (tr.escaped_at ? std::to_string(*tr.escaped_at) : std::string("none")) << ", residual "
        << tr.final_residual << "\n";
    if (tr.error) {
      log << "start " << i << ": " << *tr.error << "\n";
      failed = true;
    }
    escaped = escaped || tr.escaped_at.has_value();
  }
  if (escaped) return kExitNotTrapping;
  return failed ? kExitUndecided : kExitTrapping;
}

inline void list_models(std::ostream& out) {
  for (const auto& m : available_models()) {
    out << m.name << "\t" << m.params << (m.analytic_bounds ? "" : "\t[requires --lipschitz]") << "\n";
  }
}

}  // namespace trapping::cli

#endif  // TRAPPING_CLI_COMMANDS_HPP
