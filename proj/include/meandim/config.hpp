#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "meandim/common.hpp"
#include "meandim/estimate.hpp"
#include "meandim/group.hpp"
#include "meandim/metric.hpp"
#include "meandim/systems.hpp"

namespace meandim {

using Json = nlohmann::json;

inline Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  try {
    Json j;
    in >> j;
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    return j;
  } catch (const Json::exception& e) {
    throw ConfigError("config: parse failure in '" + path + "': " + e.what());
  }
}

namespace cfg {

inline const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(path + "." + key + ": missing");
  return j.at(key);
}

inline double num(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return v.get<double>();
}

inline double num_or(const Json& j, const std::string& key, const std::string& path, double def) {
  if (!j.is_object() || !j.contains(key)) return def;
  return num(j, key, path);
}

inline std::int64_t integer(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

inline std::int64_t integer_or(const Json& j, const std::string& key, const std::string& path,
                               std::int64_t def) {
  if (!j.is_object() || !j.contains(key)) return def;
  return integer(j, key, path);
}

inline std::string str(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline std::string str_or(const Json& j, const std::string& key, const std::string& path,
                          const std::string& def) {
  if (!j.is_object() || !j.contains(key)) return def;
  return str(j, key, path);
}

inline bool flag_or(const Json& j, const std::string& key, const std::string& path, bool def) {
  if (!j.is_object() || !j.contains(key)) return def;
  const Json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(path + "." + key + ": expected a boolean");
  return v.get<bool>();
}

}  // namespace cfg

inline SolveMode parse_mode(const std::string& s) {
  if (s == "exact") return SolveMode::exact;
  if (s == "greedy") return SolveMode::greedy;
  if (s == "sampled") return SolveMode::sampled;
  throw ConfigError("mode: expected exact|greedy|sampled, got '" + s + "'");
}

inline AlphabetSpec parse_alphabet(const Json& j, const std::string& path) {
  const std::string kind = cfg::str(j, "kind", path);
  if (kind == "interval_grid") return AlphabetSpec::interval_grid(cfg::num(j, "step", path));
  if (kind == "circle_grid") {
    const std::int64_t count = cfg::integer(j, "count", path);
    if (count < 2) throw ConfigError(path + ".count: need at least 2");
    return AlphabetSpec::circle_grid(static_cast<std::size_t>(count));
  }
  if (kind == "explicit") {
    const Json& m = cfg::require(j, "matrix", path);
    if (!m.is_array() || m.empty()) throw ConfigError(path + ".matrix: expected a square array");
    const std::size_t n = m.size();
    std::vector<std::vector<double>> rows;
    for (const auto& row : m) {
      if (!row.is_array() || row.size() != n) {
        throw ConfigError(path + ".matrix: rows must all have length " + std::to_string(n));
      }
      rows.push_back(row.get<std::vector<double>>());
    }
    return AlphabetSpec::explicit_matrix(
        DistMatrix::from(n, [&](std::size_t a, std::size_t b) { return rows[a][b]; }));
  }
  throw ConfigError(path + ".kind: unknown alphabet kind '" + kind + "'");
}

inline ShiftSystem parse_system(const Json& j, const std::string& path) {
  const AlphabetSpec alphabet = parse_alphabet(cfg::require(j, "alphabet", path), path + ".alphabet");
  const Json& wj = cfg::require(j, "weights", path);
  const WeightFamily weights(cfg::num(wj, "lambda", path + ".weights"),
                             static_cast<int>(cfg::integer_or(wj, "radius", path + ".weights", 32)));
  const int rank = static_cast<int>(cfg::integer_or(j, "rank", path, 1));
  const std::int64_t side = cfg::integer_or(j, "side", path, 1);
  const std::string bnd = cfg::str_or(j, "boundary", path, "periodic");
  Boundary boundary;
  if (bnd == "periodic") {
    boundary = Boundary::periodic;
  } else if (bnd == "strict") {
    boundary = Boundary::strict;
  } else {
    throw ConfigError(path + ".boundary: expected periodic|strict");
  }
  std::vector<ForbiddenPattern> forbidden;
  if (j.contains("forbidden")) {
    const Json& fj = j.at("forbidden");
    if (!fj.is_array()) throw ConfigError(path + ".forbidden: expected an array");
    for (std::size_t i = 0; i < fj.size(); ++i) {
      const std::string fpath = path + ".forbidden[" + std::to_string(i) + "]";
      const Json& pj = fj.at(i);
      ForbiddenPattern p;
      const Json& off = cfg::require(pj, "offsets", fpath);
      const Json& sym = cfg::require(pj, "symbols", fpath);
      if (!off.is_array() || !sym.is_array() || off.size() != sym.size() || off.empty()) {
        throw ConfigError(fpath + ": offsets and symbols must be equal-length nonempty arrays");
      }
      for (const auto& o : off) {
        if (!o.is_array()) throw ConfigError(fpath + ".offsets: expected arrays of integers");
        p.offsets.push_back(o.get<GroupElement>());
      }
      for (const auto& s : sym) p.symbols.push_back(s.get<std::uint16_t>());
      forbidden.push_back(std::move(p));
    }
  }
  try {
    return ShiftSystem(alphabet, weights, rank, side, boundary, std::move(forbidden));
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline FolnerSequence parse_folner(const Json& j, int rank, const std::string& path) {
  const std::string kind = cfg::str_or(j, "kind", path, "boxes");
  if (kind == "boxes") {
    return FolnerSequence::boxes(rank, static_cast<int>(cfg::integer_or(j, "n_max", path, 16)));
  }
  if (kind == "explicit") {
    const Json& ws = cfg::require(j, "windows", path);
    if (!ws.is_array() || ws.empty()) throw ConfigError(path + ".windows: expected a nonempty array");
    std::vector<FiniteWindow> windows;
    for (const auto& w : ws) {
      std::vector<GroupElement> elems;
      for (const auto& e : w) elems.push_back(e.get<GroupElement>());
      windows.emplace_back(std::move(elems));
    }
    return FolnerSequence::explicit_list(std::move(windows));
  }
  throw ConfigError(path + ".kind: unknown window sequence kind '" + kind + "'");
}

inline ScaleGrid parse_grid(const Json& j, const std::string& path) {
  ScaleGrid g;
  if (j.contains("epsilons")) {
    const Json& e = j.at("epsilons");
    if (!e.is_array()) throw ConfigError(path + ".epsilons: expected an array");
    g.epsilons = e.get<std::vector<double>>();
  } else {
    g.epsilons = ScaleGrid::geometric(cfg::num(j, "eps_from", path), cfg::num(j, "eps_to", path),
                                      static_cast<std::size_t>(cfg::integer(j, "eps_count", path)));
  }
  g.n_min = static_cast<int>(cfg::integer_or(j, "n_min", path, 1));
  g.n_max = static_cast<int>(cfg::integer(j, "n_max", path));
  g.tail_fraction = cfg::num_or(j, "tail_fraction", path, 0.5);
  return g;
}

inline MetricTransform parse_transform(const Json& j, const std::string& path) {
  const std::string kind = cfg::str(j, "kind", path);
  try {
    if (kind == "power") return MetricTransform::power(cfg::num(j, "a", path));
    if (kind == "log_power") return MetricTransform::log_power(cfg::num(j, "a", path));
    if (kind == "hybrid") {
      return MetricTransform::hybrid(cfg::num(j, "alpha", path), cfg::num(j, "eps", path));
    }
    if (kind == "table") {
      const Json& xs = cfg::require(j, "xs", path);
      const Json& ys = cfg::require(j, "ys", path);
      if (!xs.is_array() || !ys.is_array() || xs.size() != ys.size()) {
        throw ConfigError(path + ": xs and ys must be equal-length arrays");
      }
      std::vector<std::pair<double, double>> samples;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        samples.emplace_back(xs.at(i).get<double>(), ys.at(i).get<double>());
      }
      return MetricTransform::table(std::move(samples));
    }
  } catch (const TransformError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  throw ConfigError(path + ".kind: unknown transform kind '" + kind + "'");
}

inline EstimatorOptions parse_options(const Json& root) {
  EstimatorOptions opt;
  opt.mode = parse_mode(cfg::str_or(root, "mode", "", "exact"));
  const std::int64_t sc = cfg::integer_or(root, "sample_count", "", 2000);
  if (sc < 2) throw ConfigError("sample_count: need at least 2");
  opt.sample_count = static_cast<std::size_t>(sc);
  opt.seed = static_cast<std::uint64_t>(cfg::integer_or(root, "seed", "", 1));
  opt.saturation_ratio = cfg::num_or(root, "saturation_ratio", "", 0.5);
  if (!(opt.saturation_ratio > 0.0 && opt.saturation_ratio <= 1.0)) {
    throw ConfigError("saturation_ratio: must be in (0,1]");
  }
  opt.degrade_on_budget = cfg::flag_or(root, "degrade_on_budget", "", true);
  if (root.contains("budgets")) {
    const Json& b = root.at("budgets");
    opt.budgets.solver_nodes = static_cast<std::uint64_t>(
        cfg::integer_or(b, "solver_nodes", "budgets", static_cast<std::int64_t>(opt.budgets.solver_nodes)));
    opt.budgets.enumeration = static_cast<std::uint64_t>(
        cfg::integer_or(b, "enumeration", "budgets", static_cast<std::int64_t>(opt.budgets.enumeration)));
    opt.budgets.exact_points = static_cast<std::size_t>(
        cfg::integer_or(b, "exact_points", "budgets", static_cast<std::int64_t>(opt.budgets.exact_points)));
  }
  return opt;
}

}  // namespace meandim
