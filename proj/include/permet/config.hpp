#pragma once

// Run configuration: the JSON schema consumed by the CLI. Strictly validated
// before anything is evaluated: unknown keys are rejected and defaults are
// applied here so that the report can echo the effective configuration.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "permet/catalog.hpp"
#include "permet/errors.hpp"
#include "permet/picard.hpp"
#include "permet/space.hpp"

namespace permet {

inline constexpr const char* kSeedEnvVar = "PERMET_SEED";

struct SamplingConfig {
  std::size_t points = 64;
  std::size_t pairs = 4096;
  std::size_t triples = 4096;
  std::uint64_t seed = 42;
  std::vector<std::pair<double, double>> include_pairs;
};

struct SolveConfig {
  std::vector<double> x0;  // defaults to the domain midpoint
  double epsilon = 1e-8;
  std::size_t max_iterations = 10000;
  std::string mode = "auto";  // phi | kannan | banach | residual-only | auto
  std::size_t horizon = 200;
};

struct OutputConfig {
  std::optional<std::string> report;
  std::optional<std::string> trace;
};

struct RunConfig {
  Interval domain{-10.0, 10.0};
  std::string D_src;
  std::string P_src;
  std::string space_label;
  std::optional<std::string> T_src;
  std::string map_label;
  std::optional<std::string> phi_src;
  std::optional<double> lambda;
  SamplingConfig sampling;
  SolveConfig solve;
  OutputConfig output;

  SolveMode effective_mode() const {
    if (solve.mode != "auto") return solve_mode_from_string(solve.mode);
    if (phi_src) return SolveMode::Phi;
    if (lambda) {
      if (*lambda >= 0.0 && *lambda < 0.5) return SolveMode::Kannan;
      if (*lambda < 1.0) return SolveMode::Banach;
    }
    return SolveMode::ResidualOnly;
  }

  std::vector<double> effective_starts() const {
    if (!solve.x0.empty()) return solve.x0;
    return {domain.midpoint()};
  }

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_catalog(const CatalogEntry& entry);

  nlohmann::ordered_json echo() const;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const char* block,
                                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string("'") + block + "' must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError("unknown key '" + key + "' in '" + block + "' block");
  }
}

template <typename T>
T get_as(const nlohmann::json& j, const char* block, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + block + "." + key + "': " + e.what());
  }
}

inline std::size_t get_count(const nlohmann::json& j, const char* block, const char* key,
                             std::size_t max_value = 100000000) {
  const auto raw = get_as<std::int64_t>(j, block, key);
  if (raw < 1 || static_cast<std::uint64_t>(raw) > max_value) {
    throw ConfigError(std::string("'") + block + "." + key + "' must lie in [1, " +
                      std::to_string(max_value) + "]");
  }
  return static_cast<std::size_t>(raw);
}

inline std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv(kSeedEnvVar);
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0') {
    throw ConfigError(std::string(kSeedEnvVar) + " must be a nonnegative integer");
  }
  return static_cast<std::uint64_t>(v);
}

}  // namespace detail

inline RunConfig RunConfig::from_json(const nlohmann::json& j) {
  detail::reject_unknown_keys(j, "config",
                              {"space", "map", "phi", "lambda", "sampling", "solve", "output"});
  RunConfig cfg;

  if (!j.contains("space")) throw ConfigError("config is missing the 'space' block");
  const auto& space = j.at("space");
  detail::reject_unknown_keys(space, "space", {"domain", "D", "P", "label"});
  const auto domain = detail::get_as<std::vector<double>>(space, "space", "domain");
  if (domain.size() != 2) throw ConfigError("'space.domain' must be [lo, hi]");
  cfg.domain = {domain[0], domain[1]};
  cfg.D_src = detail::get_as<std::string>(space, "space", "D");
  cfg.P_src = detail::get_as<std::string>(space, "space", "P");
  if (space.contains("label")) cfg.space_label = detail::get_as<std::string>(space, "space", "label");

  if (j.contains("map")) {
    const auto& map = j.at("map");
    detail::reject_unknown_keys(map, "map", {"T", "label"});
    cfg.T_src = detail::get_as<std::string>(map, "map", "T");
    if (map.contains("label")) cfg.map_label = detail::get_as<std::string>(map, "map", "label");
  }

  if (j.contains("phi")) {
    if (!j.at("phi").is_string()) throw ConfigError("'phi' must be an expression string");
    cfg.phi_src = j.at("phi").get<std::string>();
  }
  if (j.contains("lambda")) {
    if (!j.at("lambda").is_number()) throw ConfigError("'lambda' must be a number");
    cfg.lambda = j.at("lambda").get<double>();
  }

  if (const auto seed = detail::env_seed()) cfg.sampling.seed = *seed;
  if (j.contains("sampling")) {
    const auto& s = j.at("sampling");
    detail::reject_unknown_keys(s, "sampling",
                                {"points", "pairs", "triples", "seed", "include_pairs"});
    if (s.contains("points")) cfg.sampling.points = detail::get_count(s, "sampling", "points");
    if (s.contains("pairs")) cfg.sampling.pairs = detail::get_count(s, "sampling", "pairs");
    if (s.contains("triples")) cfg.sampling.triples = detail::get_count(s, "sampling", "triples");
    if (s.contains("seed")) cfg.sampling.seed = detail::get_as<std::uint64_t>(s, "sampling", "seed");
    if (s.contains("include_pairs")) {
      const auto raw = detail::get_as<std::vector<std::vector<double>>>(s, "sampling", "include_pairs");
      for (const auto& p : raw) {
        if (p.size() != 2) throw ConfigError("'sampling.include_pairs' entries must be [x, y]");
        cfg.sampling.include_pairs.emplace_back(p[0], p[1]);
      }
    }
  }

  if (j.contains("solve")) {
    const auto& s = j.at("solve");
    detail::reject_unknown_keys(s, "solve",
                                {"x0", "epsilon", "max_iterations", "mode", "horizon"});
    if (s.contains("x0")) {
      if (s.at("x0").is_number()) {
        cfg.solve.x0 = {s.at("x0").get<double>()};
      } else {
        cfg.solve.x0 = detail::get_as<std::vector<double>>(s, "solve", "x0");
      }
    }
    if (s.contains("epsilon")) cfg.solve.epsilon = detail::get_as<double>(s, "solve", "epsilon");
    if (s.contains("max_iterations"))
      cfg.solve.max_iterations = detail::get_count(s, "solve", "max_iterations");
    if (s.contains("mode")) {
      cfg.solve.mode = detail::get_as<std::string>(s, "solve", "mode");
      if (cfg.solve.mode != "auto") solve_mode_from_string(cfg.solve.mode);  // validate
    }
    if (s.contains("horizon")) cfg.solve.horizon = detail::get_count(s, "solve", "horizon", 100000);
    if (!(cfg.solve.epsilon > 0.0)) throw ConfigError("'solve.epsilon' must be positive");
  }

  if (j.contains("output")) {
    const auto& o = j.at("output");
    detail::reject_unknown_keys(o, "output", {"report", "trace"});
    if (o.contains("report")) cfg.output.report = detail::get_as<std::string>(o, "output", "report");
    if (o.contains("trace")) cfg.output.trace = detail::get_as<std::string>(o, "output", "trace");
  }

  return cfg;
}

inline RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid JSON in '" + path.string() + "': " + e.what());
  }
  return from_json(j);
}

inline nlohmann::ordered_json catalog_config_json(const CatalogEntry& entry) {
  nlohmann::ordered_json j;
  j["space"] = {{"domain", {entry.domain.lo, entry.domain.hi}},
                {"D", entry.D_src},
                {"P", entry.P_src},
                {"label", entry.id}};
  j["map"] = {{"T", entry.T_src}, {"label", entry.id}};
  if (entry.phi_src) j["phi"] = *entry.phi_src;
  if (entry.lambda) j["lambda"] = *entry.lambda;
  nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
  for (const auto& [a, b] : entry.required_pairs) pairs.push_back({a, b});
  // the seed is left to the default / PERMET_SEED / --seed chain
  j["sampling"] = {{"points", 64}, {"pairs", 4096}, {"triples", 4096},
                   {"include_pairs", pairs}};
  j["solve"] = {{"x0", entry.solve_starts},
                {"epsilon", entry.solve_epsilon},
                {"max_iterations", 10000},
                {"mode", std::string(to_string(entry.solve_mode))},
                {"horizon", 200}};
  return j;
}

inline RunConfig RunConfig::from_catalog(const CatalogEntry& entry) {
  return from_json(catalog_config_json(entry));
}

inline nlohmann::ordered_json RunConfig::echo() const {
  nlohmann::ordered_json j;
  j["space"] = {{"domain", {domain.lo, domain.hi}}, {"D", D_src}, {"P", P_src}};
  if (!space_label.empty()) j["space"]["label"] = space_label;
  if (T_src) {
    j["map"] = {{"T", *T_src}};
    if (!map_label.empty()) j["map"]["label"] = map_label;
  }
  if (phi_src) j["phi"] = *phi_src;
  if (lambda) j["lambda"] = *lambda;
  nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
  for (const auto& [a, b] : sampling.include_pairs) pairs.push_back({a, b});
  j["sampling"] = {{"points", sampling.points},
                   {"pairs", sampling.pairs},
                   {"triples", sampling.triples},
                   {"seed", sampling.seed},
                   {"include_pairs", pairs}};
  j["solve"] = {{"x0", effective_starts()},
                {"epsilon", solve.epsilon},
                {"max_iterations", solve.max_iterations},
                {"mode", std::string(to_string(effective_mode()))},
                {"horizon", solve.horizon}};
  if (output.report || output.trace) {
    j["output"] = nlohmann::ordered_json::object();
    if (output.report) j["output"]["report"] = *output.report;
    if (output.trace) j["output"]["trace"] = *output.trace;
  }
  return j;
}

}  // namespace permet
