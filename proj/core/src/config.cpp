#include "patlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "patlab/errors.hpp"

namespace patlab {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const ConfigEntry& e) {
  double v = 0.0;
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) {
    throw ConfigError("'" + e.key + "' expects a number, got '" + e.value + "'", e.line);
  }
  return v;
}

std::uint64_t parse_uint(const ConfigEntry& e) {
  std::uint64_t v = 0;
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || p != end) {
    throw ConfigError("'" + e.key + "' expects a non-negative integer, got '" + e.value + "'",
                      e.line);
  }
  return v;
}

bool parse_bool(const ConfigEntry& e) {
  std::string v = e.value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw ConfigError("'" + e.key + "' expects true/false, got '" + e.value + "'", e.line);
}

std::vector<ConfigEntry> split_list(const ConfigEntry& e) {
  std::vector<ConfigEntry> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    ConfigEntry part{e.key, trim(item), e.line};
    if (part.value.empty()) throw ConfigError("empty list item in '" + e.key + "'", e.line);
    out.push_back(std::move(part));
  }
  if (out.empty()) throw ConfigError("'" + e.key + "' expects a non-empty list", e.line);
  return out;
}

using Setter = std::function<void(const ConfigEntry&)>;

void apply_keys(const ConfigSection& sec, const std::map<std::string, Setter>& keys) {
  for (const ConfigEntry& e : sec.entries) {
    auto it = keys.find(e.key);
    if (it == keys.end()) {
      throw ConfigError("unknown key '" + e.key + "' in section [" + sec.name + "]", e.line);
    }
    it->second(e);
  }
}

std::map<std::string, Setter> feature_keys(PhantomFeature& f) {
  return {
      {"x", [&](const ConfigEntry& e) { f.x = parse_double(e); }},
      {"y", [&](const ConfigEntry& e) { f.y = parse_double(e); }},
      {"radius", [&](const ConfigEntry& e) { f.radius = parse_double(e); }},
      {"radius_y", [&](const ConfigEntry& e) { f.radius_y = parse_double(e); }},
      {"angle", [&](const ConfigEntry& e) { f.angle = parse_double(e); }},
      {"amplitude", [&](const ConfigEntry& e) { f.amplitude = parse_double(e); }},
  };
}

}  // namespace

ConfigDocument parse_config(const std::string& text) {
  ConfigDocument doc;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (name.empty()) throw ConfigError("empty section name", line_no);
      doc.sections.push_back({name, line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    if (doc.sections.empty()) throw ConfigError("key outside of any section", line_no);
    ConfigEntry e{trim(std::string_view(line).substr(0, eq)),
                  trim(std::string_view(line).substr(eq + 1)), line_no};
    if (e.key.empty()) throw ConfigError("empty key", line_no);
    if (e.value.empty()) throw ConfigError("missing value for '" + e.key + "'", line_no);
    auto& entries = doc.sections.back().entries;
    for (const auto& prev : entries) {
      if (prev.key == e.key) throw ConfigError("duplicate key '" + e.key + "'", line_no);
    }
    entries.push_back(std::move(e));
  }
  return doc;
}

std::uint64_t config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

Grid2D ExperimentConfig::grid() const { return Grid2D::unit_square(cells); }

SolverConfig ExperimentConfig::resolved_solver() const {
  SolverConfig s = solver;
  if (auto_final_time) {
    const double c_low = speed.c_low > 0.0
                             ? speed.c_low
                             : speed.c_base * (1.0 - std::max(speed.variation, 0.1));
    s.final_time = default_observation_time(grid(), c_low);
  }
  return s;
}

void ExperimentConfig::validate() const {
  (void)grid();
  resolved_solver().validate();
  if (!(gamma > 0.0)) throw ConfigError("impedance gamma must be positive");
  if (!(verify.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (verify.members < 1) throw ConfigError("ensemble needs at least one member");
  if (perturbation.mode == TargetMode::log_uniform &&
      !(perturbation.state_min > 0.0 && perturbation.state_min <= perturbation.state_max)) {
    throw ConfigError("state_min/state_max must satisfy 0 < min <= max");
  }
  if (perturbation.speed_fraction < 0.0) throw ConfigError("speed_fraction must be >= 0");
  if (reconstruct.pressure_init != "zero" && reconstruct.pressure_init != "truth") {
    throw ConfigError("pressure_init must be 'zero' or 'truth'");
  }
  if (reconstruct.speed_init != "constant" && reconstruct.speed_init != "truth") {
    throw ConfigError("speed_init must be 'constant' or 'truth'");
  }
  if (reconstruct.noise_level < 0.0) throw ConfigError("noise_level must be >= 0");
  reconstruct.params.validate(grid());
  for (std::size_t n : sweep.cells) (void)Grid2D::unit_square(n);
}

ExperimentConfig load_experiment_config(const std::string& text) {
  const ConfigDocument doc = parse_config(text);
  ExperimentConfig cfg;
  bool saw_pressure_features = false;

  for (const ConfigSection& sec : doc.sections) {
    if (sec.name == "run") {
      apply_keys(sec, {
                     {"seed", [&](const ConfigEntry& e) { cfg.seed = parse_uint(e); }},
                     {"workers", [&](const ConfigEntry& e) { cfg.workers = parse_uint(e); }},
                     {"output_dir", [&](const ConfigEntry& e) { cfg.output_dir = e.value; }},
                 });
    } else if (sec.name == "grid") {
      apply_keys(sec, {{"cells", [&](const ConfigEntry& e) {
                     cfg.cells = parse_uint(e);
                     try {
                       (void)Grid2D::unit_square(cfg.cells);
                     } catch (const ConfigError& err) {
                       throw ConfigError(err.what(), e.line);
                     }
                   }}});
    } else if (sec.name == "solver") {
      apply_keys(sec, {
                     {"final_time",
                      [&](const ConfigEntry& e) {
                        if (e.value == "auto") {
                          cfg.auto_final_time = true;
                        } else {
                          cfg.auto_final_time = false;
                          cfg.solver.final_time = parse_double(e);
                        }
                      }},
                     {"cfl", [&](const ConfigEntry& e) { cfg.solver.cfl_factor = parse_double(e); }},
                     {"record_stride",
                      [&](const ConfigEntry& e) { cfg.solver.record_stride = parse_uint(e); }},
                     {"snapshot_stride",
                      [&](const ConfigEntry& e) { cfg.solver.snapshot_stride = parse_uint(e); }},
                 });
    } else if (sec.name == "impedance") {
      apply_keys(sec, {{"gamma", [&](const ConfigEntry& e) { cfg.gamma = parse_double(e); }}});
    } else if (sec.name == "phantom") {
      apply_keys(sec, {
                     {"kind",
                      [&](const ConfigEntry& e) {
                        try {
                          cfg.pressure.kind = parse_phantom_kind(e.value);
                        } catch (const ConfigError& err) {
                          throw ConfigError(err.what(), e.line);
                        }
                      }},
                     {"support_margin",
                      [&](const ConfigEntry& e) { cfg.pressure.support_margin = parse_double(e); }},
                     {"edge_fraction",
                      [&](const ConfigEntry& e) { cfg.pressure.edge_fraction = parse_double(e); }},
                 });
    } else if (sec.name == "phantom.feature") {
      saw_pressure_features = true;
      PhantomFeature f;
      apply_keys(sec, feature_keys(f));
      cfg.pressure.features.push_back(f);
    } else if (sec.name == "speed") {
      apply_keys(sec, {
                     {"kind",
                      [&](const ConfigEntry& e) {
                        try {
                          cfg.speed_shape.kind = parse_phantom_kind(e.value);
                        } catch (const ConfigError& err) {
                          throw ConfigError(err.what(), e.line);
                        }
                      }},
                     {"c_base", [&](const ConfigEntry& e) { cfg.speed.c_base = parse_double(e); }},
                     {"variation", [&](const ConfigEntry& e) { cfg.speed.variation = parse_double(e); }},
                     {"max_variation",
                      [&](const ConfigEntry& e) { cfg.speed.max_variation = parse_double(e); }},
                     {"c_low", [&](const ConfigEntry& e) { cfg.speed.c_low = parse_double(e); }},
                     {"c_high", [&](const ConfigEntry& e) { cfg.speed.c_high = parse_double(e); }},
                 });
    } else if (sec.name == "speed.feature") {
      PhantomFeature f;
      apply_keys(sec, feature_keys(f));
      cfg.speed_shape.features.push_back(f);
    } else if (sec.name == "perturbation") {
      PerturbationConfig& p = cfg.perturbation;
      apply_keys(sec, {
                     {"mode",
                      [&](const ConfigEntry& e) {
                        if (e.value == "log_uniform") {
                          p.mode = TargetMode::log_uniform;
                        } else if (e.value == "fixed") {
                          p.mode = TargetMode::fixed;
                        } else {
                          throw ConfigError("mode must be 'log_uniform' or 'fixed'", e.line);
                        }
                      }},
                     {"state_min", [&](const ConfigEntry& e) { p.state_min = parse_double(e); }},
                     {"state_max", [&](const ConfigEntry& e) { p.state_max = parse_double(e); }},
                     {"speed_fraction",
                      [&](const ConfigEntry& e) { p.speed_fraction = parse_double(e); }},
                     {"state_target", [&](const ConfigEntry& e) { p.state_target = parse_double(e); }},
                     {"speed_target", [&](const ConfigEntry& e) { p.speed_target = parse_double(e); }},
                 });
    } else if (sec.name == "verify") {
      VerifyConfig& v = cfg.verify;
      apply_keys(sec, {
                     {"epsilon", [&](const ConfigEntry& e) { v.epsilon = parse_double(e); }},
                     {"members", [&](const ConfigEntry& e) { v.members = parse_uint(e); }},
                     {"k", [&](const ConfigEntry& e) { v.k = parse_double(e); }},
                     {"K", [&](const ConfigEntry& e) { v.K = parse_double(e); }},
                     {"state_threshold",
                      [&](const ConfigEntry& e) { v.state_threshold = parse_double(e); }},
                     {"meas_threshold",
                      [&](const ConfigEntry& e) { v.meas_threshold = parse_double(e); }},
                 });
    } else if (sec.name == "reconstruct") {
      ReconstructRunConfig& r = cfg.reconstruct;
      ReconstructionConfig& p = r.params;
      apply_keys(sec, {
                     {"mode",
                      [&](const ConfigEntry& e) {
                        if (e.value == "fixed") {
                          r.mode = ReconstructMode::fixed_speed;
                        } else if (e.value == "joint") {
                          r.mode = ReconstructMode::joint;
                        } else {
                          throw ConfigError("mode must be 'fixed' or 'joint'", e.line);
                        }
                      }},
                     {"step_u", [&](const ConfigEntry& e) { p.step_u = parse_double(e); }},
                     {"step_c", [&](const ConfigEntry& e) { p.step_c = parse_double(e); }},
                     {"step_c_scale", [&](const ConfigEntry& e) { p.step_c_scale = parse_double(e); }},
                     {"max_iter", [&](const ConfigEntry& e) { p.max_iter = parse_uint(e); }},
                     {"tol_misfit", [&](const ConfigEntry& e) { p.tol_misfit = parse_double(e); }},
                     {"coarse_nx", [&](const ConfigEntry& e) { p.coarse_nx = parse_uint(e); }},
                     {"coarse_ny", [&](const ConfigEntry& e) { p.coarse_ny = parse_uint(e); }},
                     {"nesterov", [&](const ConfigEntry& e) { p.nesterov = parse_bool(e); }},
                     {"enforce", [&](const ConfigEntry& e) { p.enforce_relaxation = parse_bool(e); }},
                     {"epsilon", [&](const ConfigEntry& e) { p.epsilon = parse_double(e); }},
                     {"window", [&](const ConfigEntry& e) { p.window = parse_uint(e); }},
                     {"pressure_init", [&](const ConfigEntry& e) { r.pressure_init = e.value; }},
                     {"speed_init", [&](const ConfigEntry& e) { r.speed_init = e.value; }},
                     {"c_init", [&](const ConfigEntry& e) { r.c_init = parse_double(e); }},
                     {"noise_level", [&](const ConfigEntry& e) { r.noise_level = parse_double(e); }},
                     {"checkpoint_stride",
                      [&](const ConfigEntry& e) { r.checkpoint_stride = parse_uint(e); }},
                     {"monitor_truth", [&](const ConfigEntry& e) { r.monitor_truth = parse_bool(e); }},
                 });
    } else if (sec.name == "sweep") {
      SweepConfig& s = cfg.sweep;
      auto doubles = [](const ConfigEntry& e) {
        std::vector<double> out;
        for (const auto& part : split_list(e)) out.push_back(parse_double(part));
        return out;
      };
      apply_keys(sec, {
                     {"epsilon", [&](const ConfigEntry& e) { s.epsilon = doubles(e); }},
                     {"cells",
                      [&](const ConfigEntry& e) {
                        s.cells.clear();
                        for (const auto& part : split_list(e)) s.cells.push_back(parse_uint(part));
                      }},
                     {"state_target", [&](const ConfigEntry& e) { s.state_target = doubles(e); }},
                     {"speed_target", [&](const ConfigEntry& e) { s.speed_target = doubles(e); }},
                 });
    } else {
      throw ConfigError("unknown section [" + sec.name + "]", sec.line);
    }
  }

  if (!saw_pressure_features && cfg.pressure.kind == PhantomKind::shepp_like) {
    cfg.pressure.features = shepp_like_features(cfg.grid(), cfg.pressure.support_margin);
  }
  cfg.pressure.seed = cfg.seed;
  cfg.speed_shape.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_experiment_config(ss.str());
}

}  // namespace patlab
