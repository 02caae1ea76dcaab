#ifndef TRAPPING_CLI_CONFIG_HPP
#define TRAPPING_CLI_CONFIG_HPP

// Experiment configuration: JSON file schema, command-line overrides,
// validation, and the model registry.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"
#include "trapping/dynamics.hpp"
#include "trapping/error.hpp"
#include "trapping/geometry.hpp"

namespace trapping::cli {

using nlohmann::json;

/// Invalid or inconsistent configuration. Maps to exit code 3.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct ModelInfo {
  const char* name;
  const char* params;
  bool analytic_bounds;
};

inline const std::vector<ModelInfo>& available_models() {
  static const std::vector<ModelInfo> models = {
      {"dirac_gan", "epsilon > 0 (--epsilon)", true},
      {"cournot", "a, b (n x n), c (n); defaults to the reference duopoly (--cournot-params)", true},
      {"affine", "A (n x n), b (n) (--affine-params)", true},
      {"external_table", "axes (N increasing arrays), values (row-major F rows) or path (--table)", false},
  };
  return models;
}

inline std::string model_names() {
  std::string s;
  for (const auto& m : available_models()) {
    if (!s.empty()) s += ", ";
    s += m.name;
  }
  return s;
}

inline const ModelInfo* find_model(const std::string& name) {
  for (const auto& m : available_models()) {
    if (name == m.name) return &m;
  }
  return nullptr;
}

struct ModelSpec {
  std::string name;
  json params = json::object();
};

struct VerifierSpec {
  std::string mode = "bsp";
  std::optional<double> lipschitz;  // nullopt = auto
  int max_depth = 60;
  double margin = 0.0;
  std::size_t points_per_dim = 5;
  bool oracle = false;
  std::size_t oracle_points_per_dim = 101;
};

struct SimulateSpec {
  std::optional<double> gamma;  // nullopt = auto
  std::size_t steps = 1000;
  std::size_t starts = 1;
  std::vector<Point> x0;
  std::size_t stride = 1;
};

struct ExperimentConfig {
  ModelSpec model;
  Point lower;
  Point upper;
  VerifierSpec verifier;
  std::optional<SimulateSpec> simulate;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// Command-line values; every set field overrides the config file.
struct FlagValues {
  std::optional<std::string> config_path;
  std::optional<std::string> model;
  std::optional<double> epsilon;
  std::optional<std::string> cournot_params;
  std::optional<std::string> affine_params;
  std::optional<std::string> table;
  std::optional<std::string> box;
  std::optional<std::string> mode;
  std::optional<std::string> lipschitz;
  std::optional<int> max_depth;
  std::optional<double> margin;
  std::optional<std::size_t> points_per_dim;
  std::optional<std::string> gamma;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> starts;
  std::optional<std::string> x0;
  std::optional<std::size_t> stride;
  std::optional<std::uint64_t> seed;
  bool oracle = false;
  std::optional<std::size_t> threads;
};

inline json read_json_file(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + what + " file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + " file '" + path + "' is not valid JSON: " + e.what());
  }
}

inline double parse_number(const std::string& text, const std::string& field) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(field + ": '" + text + "' is not a number");
  }
  if (used != text.size()) throw ConfigError(field + ": '" + text + "' is not a number");
  return v;
}

/// "auto" -> nullopt, otherwise a number.
inline std::optional<double> parse_auto_or_number(const std::string& text, const std::string& field) {
  if (text == "auto") return std::nullopt;
  return parse_number(text, field);
}

/// "lo:hi,lo:hi,..." -> (lower, upper).
inline std::pair<Point, Point> parse_box_flag(const std::string& text) {
  Point lo, hi;
  std::stringstream ss(text);
  std::string item;
  std::size_t d = 0;
  while (std::getline(ss, item, ',')) {
    ++d;
    auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("box coordinate " + std::to_string(d) + ": expected lo:hi, got '" + item + "'");
    }
    lo.push_back(parse_number(item.substr(0, colon), "box coordinate " + std::to_string(d) + " lower"));
    hi.push_back(parse_number(item.substr(colon + 1), "box coordinate " + std::to_string(d) + " upper"));
  }
  if (lo.empty()) throw ConfigError("box: no coordinates given");
  return {lo, hi};
}

/// "a,b;c,d" -> points separated by ';'.
inline std::vector<Point> parse_points_flag(const std::string& text) {
  std::vector<Point> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    Point p;
    std::stringstream ps(item);
    std::string num;
    while (std::getline(ps, num, ',')) p.push_back(parse_number(num, "x0"));
    if (p.empty()) throw ConfigError("x0: empty start point");
    out.push_back(std::move(p));
  }
  return out;
}

namespace detail {

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

inline std::optional<double> auto_or_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const json& v = j.at(key);
  if (v.is_string()) return parse_auto_or_number(v.get<std::string>(), where + "." + key);
  if (v.is_number()) return v.get<double>();
  throw ConfigError(where + "." + key + " must be \"auto\" or a number");
}

}  // namespace detail

inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  if (j.contains("model")) {
    const json& m = j.at("model");
    if (m.is_string()) {
      c.model.name = m.get<std::string>();
    } else {
      c.model.name = detail::get_or<std::string>(m, "name", "", "model");
      if (m.contains("params")) c.model.params = m.at("params");
    }
  }
  if (j.contains("box")) {
    c.lower = detail::get_or<Point>(j.at("box"), "lower", {}, "box");
    c.upper = detail::get_or<Point>(j.at("box"), "upper", {}, "box");
  }
  if (j.contains("verifier")) {
    const json& v = j.at("verifier");
    VerifierSpec& s = c.verifier;
    s.mode = detail::get_or<std::string>(v, "mode", s.mode, "verifier");
    s.lipschitz = detail::auto_or_number(v, "lipschitz", "verifier");
    s.max_depth = detail::get_or<int>(v, "max_depth", s.max_depth, "verifier");
    s.margin = detail::get_or<double>(v, "margin", s.margin, "verifier");
    s.points_per_dim = detail::get_or<std::size_t>(v, "points_per_dim", s.points_per_dim, "verifier");
    s.oracle = detail::get_or<bool>(v, "oracle", s.oracle, "verifier");
    s.oracle_points_per_dim =
        detail::get_or<std::size_t>(v, "oracle_points_per_dim", s.oracle_points_per_dim, "verifier");
  }
  if (j.contains("simulate") && !j.at("simulate").is_null()) {
    const json& v = j.at("simulate");
    SimulateSpec s;
    s.gamma = detail::auto_or_number(v, "gamma", "simulate");
    s.steps = detail::get_or<std::size_t>(v, "steps", s.steps, "simulate");
    s.starts = detail::get_or<std::size_t>(v, "starts", s.starts, "simulate");
    s.x0 = detail::get_or<std::vector<Point>>(v, "x0", {}, "simulate");
    s.stride = detail::get_or<std::size_t>(v, "stride", s.stride, "simulate");
    c.simulate = std::move(s);
  }
  c.seed = detail::get_or<std::uint64_t>(j, "seed", c.seed, "config");
  c.threads = detail::get_or<std::size_t>(j, "threads", c.threads, "config");
  return c;
}

inline json config_to_json(const ExperimentConfig& c) {
  json j;
  j["model"] = {{"name", c.model.name}, {"params", c.model.params}};
  j["box"] = {{"lower", c.lower}, {"upper", c.upper}};
  json v;
  v["mode"] = c.verifier.mode;
  v["lipschitz"] = c.verifier.lipschitz ? json(*c.verifier.lipschitz) : json("auto");
  v["max_depth"] = c.verifier.max_depth;
  v["margin"] = c.verifier.margin;
  v["points_per_dim"] = c.verifier.points_per_dim;
  v["oracle"] = c.verifier.oracle;
  v["oracle_points_per_dim"] = c.verifier.oracle_points_per_dim;
  j["verifier"] = v;
  if (c.simulate) {
    const SimulateSpec& s = *c.simulate;
    j["simulate"] = {{"gamma", s.gamma ? json(*s.gamma) : json("auto")},
                     {"steps", s.steps},
                     {"starts", s.starts},
                     {"x0", s.x0},
                     {"stride", s.stride}};
  }
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j;
}

inline void validate(const ExperimentConfig& c);

/// Reads the config file (if any), applies flag overrides, validates.
inline ExperimentConfig parse_config(const FlagValues& f) {
  ExperimentConfig c;
  if (f.config_path) c = config_from_json(read_json_file(*f.config_path, "config"));

  if (f.model) c.model.name = *f.model;
  if (f.epsilon) c.model.params["epsilon"] = *f.epsilon;
  if (f.cournot_params) c.model.params = read_json_file(*f.cournot_params, "cournot params");
  if (f.affine_params) c.model.params = read_json_file(*f.affine_params, "affine params");
  if (f.table) c.model.params = read_json_file(*f.table, "table");
  if (f.box) std::tie(c.lower, c.upper) = parse_box_flag(*f.box);
  if (f.mode) c.verifier.mode = *f.mode;
  if (f.lipschitz) c.verifier.lipschitz = parse_auto_or_number(*f.lipschitz, "lipschitz");
  if (f.max_depth) c.verifier.max_depth = *f.max_depth;
  if (f.margin) c.verifier.margin = *f.margin;
  if (f.points_per_dim) c.verifier.points_per_dim = *f.points_per_dim;
  if (f.oracle) c.verifier.oracle = true;
  if (f.gamma || f.steps || f.starts || f.x0 || f.stride) {
    if (!c.simulate) c.simulate = SimulateSpec{};
    if (f.gamma) c.simulate->gamma = parse_auto_or_number(*f.gamma, "gamma");
    if (f.steps) c.simulate->steps = *f.steps;
    if (f.starts) c.simulate->starts = *f.starts;
    if (f.x0) c.simulate->x0 = parse_points_flag(*f.x0);
    if (f.stride) c.simulate->stride = *f.stride;
  }
  if (f.seed) c.seed = *f.seed;
  if (f.threads) c.threads = *f.threads;

  validate(c);
  return c;
}

namespace detail {

inline Matrix matrix_param(const json& params, const char* key, const std::string& model) {
  if (!params.contains(key)) throw ConfigError(model + ": missing params." + key);
  try {
    return params.at(key).get<Matrix>();
  } catch (const json::exception&) {
    throw ConfigError(model + ": params." + key + " must be a matrix (array of arrays of numbers)");
  }
}

inline Point vector_param(const json& params, const char* key, const std::string& model) {
  if (!params.contains(key)) throw ConfigError(model + ": missing params." + key);
  try {
    return params.at(key).get<Point>();
  } catch (const json::exception&) {
    throw ConfigError(model + ": params." + key + " must be an array of numbers");
  }
}

}  // namespace detail

/// Instantiates the configured model. Parameter problems raise ConfigError.
inline ModelPtr build_model(const ModelSpec& spec) {
  const json& p = spec.params;
  if (!p.is_object()) throw ConfigError("model params must be a JSON object");
  try {
    if (spec.name == "dirac_gan") {
      if (!p.contains("epsilon") || !p.at("epsilon").is_number()) {
        throw ConfigError("dirac_gan: missing numeric params.epsilon (--epsilon)");
      }
      return make_dirac_gan({p.at("epsilon").get<double>()});
    }
    if (spec.name == "cournot") {
      CournotParams cp = CournotParams::reference_duopoly();
      if (p.contains("a")) cp.a = p.at("a").get<double>();
      if (p.contains("b")) cp.b = detail::matrix_param(p, "b", "cournot");
      if (p.contains("c")) cp.c = detail::vector_param(p, "c", "cournot");
      return make_cournot(cp);
    }
    if (spec.name == "affine") {
      return make_affine(detail::matrix_param(p, "A", "affine"), detail::vector_param(p, "b", "affine"));
    }
    if (spec.name == "external_table") {
      json table = p;
      if (p.contains("path")) table = read_json_file(p.at("path").get<std::string>(), "table");
      auto axes = detail::matrix_param(table, "axes", "external_table");
      auto values = detail::matrix_param(table, "values", "external_table");
      return std::make_shared<TableModel>(std::move(axes), std::move(values));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(spec.name + ": malformed params: " + e.what());
  }
  throw ConfigError("unknown model '" + spec.name + "'; available models: " + model_names());
}

inline HyperBox config_box(const ExperimentConfig& c) {
  try {
    return HyperBox(c.lower, c.upper);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

inline void validate(const ExperimentConfig& c) {
  if (c.model.name.empty()) throw ConfigError("no model given (--model); available models: " + model_names());
  const ModelInfo* info = find_model(c.model.name);
  if (!info) throw ConfigError("unknown model '" + c.model.name + "'; available models: " + model_names());

  if (c.lower.empty() && c.upper.empty()) throw ConfigError("no box given (--box lo:hi,lo:hi,...)");
  if (c.lower.size() != c.upper.size()) {
    throw ConfigError("box: lower has " + std::to_string(c.lower.size()) + " entries but upper has " +
                      std::to_string(c.upper.size()));
  }
  for (std::size_t d = 0; d < c.lower.size(); ++d) {
    if (!(c.lower[d] < c.upper[d])) {
      throw ConfigError("box coordinate " + std::to_string(d + 1) + ": lower bound " + std::to_string(c.lower[d]) +
                        " must be strictly below upper bound " + std::to_string(c.upper[d]));
    }
  }
  config_box(c);

  const VerifierSpec& v = c.verifier;
  if (v.mode != "bsp" && v.mode != "sampling") {
    throw ConfigError("verifier.mode must be 'bsp' or 'sampling', got '" + v.mode + "'");
  }
  if (!v.lipschitz && !info->analytic_bounds) {
    throw ConfigError("model " + c.model.name +
                      " has no analytic Lipschitz bound; lipschitz=auto is not allowed, pass --lipschitz <number>");
  }
  if (v.lipschitz && !(*v.lipschitz > 0.0)) throw ConfigError("lipschitz must be positive");
  if (v.max_depth < 0) throw ConfigError("max_depth must be >= 0");
  if (!(v.margin >= 0.0)) throw ConfigError("margin must be >= 0");
  if (v.points_per_dim < 2) throw ConfigError("points_per_dim must be >= 2");
  if (v.oracle_points_per_dim < 2) throw ConfigError("oracle_points_per_dim must be >= 2");

  if (c.simulate) {
    const SimulateSpec& s = *c.simulate;
    if (s.gamma && !(*s.gamma > 0.0)) throw ConfigError("gamma must be positive");
    if (s.stride == 0) throw ConfigError("stride must be >= 1");
    if (s.x0.empty() && s.starts == 0) throw ConfigError("starts must be >= 1");
    for (const Point& p : s.x0) {
      if (p.size() != c.lower.size()) {
        throw ConfigError("x0 has dimension " + std::to_string(p.size()) + ", box has " +
                          std::to_string(c.lower.size()));
      }
    }
  }

  ModelPtr model = build_model(c.model);
  if (model->dim() != c.lower.size()) {
    throw ConfigError("model " + c.model.name + " has dimension " + std::to_string(model->dim()) + " but the box has " +
                      std::to_string(c.lower.size()) + " coordinates");
  }
}

}  // namespace trapping::cli

#endif  // TRAPPING_CLI_CONFIG_HPP
