#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "meandim/common.hpp"
#include "meandim/config.hpp"
#include "meandim/estimate.hpp"
#include "meandim/verify.hpp"
#include "meandim/version.hpp"

namespace meandim {

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::string config_stamp(const std::string& config_text) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_text)));
  return buf;
}

// Every persisted artifact opens with version and a hash of the config that
// produced it. No timestamps: reruns must be byte-identical.
inline std::string csv_preamble(const std::string& config_text) {
  return std::string("# meandim ") + kVersion + " config=" + config_stamp(config_text) + "\n";
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw ResourceError("failed writing '" + path + "'");
}

inline std::string csv_quote(const std::string& s) {
  bool needs = false;
  for (char c : s) {
    if (c == ',' || c == '"' || c == '\n') {
      needs = true;
      break;
    }
  }
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

inline std::string counts_csv(const DimensionReport& rep, const std::string& config_text,
                              const KatokProfile* katok = nullptr) {
  std::string out = csv_preamble(config_text);
  out += "epsilon,epsilon_used,n,window_size,points,s,r,cov,katok,bound_direction,mode,seed\n";
  for (const CountCell& c : rep.cells) {
    const KatokCell* kc = nullptr;
    if (katok != nullptr) {
      for (const KatokCell& cand : katok->cells) {
        if (cand.n == c.n && cand.epsilon == c.epsilon) {
          kc = &cand;
          break;
        }
      }
    }
    out += fmt17(c.epsilon);
    out += ',';
    out += fmt17(c.epsilon_used);
    out += ',';
    out += std::to_string(c.n);
    out += ',';
    out += std::to_string(c.window_size);
    out += ',';
    out += std::to_string(c.points);
    out += ',';
    out += fmt_int(c.s.count);
    out += ',';
    out += fmt_int(c.r.count);
    out += ',';
    out += fmt_int(c.cov.count);
    out += ',';
    if (kc != nullptr) out += fmt_int(kc->katok.count);
    out += ',';
    std::string dir = std::string(to_string(c.s.direction)) + "|" + to_string(c.r.direction) +
                      "|" + to_string(c.cov.direction);
    if (kc != nullptr) dir += std::string("|") + to_string(kc->katok.direction);
    out += dir;
    out += ',';
    out += to_string(rep.mode);
    out += ',';
    out += std::to_string(rep.seed);
    out += '\n';
  }
  return out;
}

inline std::string hausdorff_csv(const HausdorffEstimate& rep, const std::string& config_text) {
  std::string out = csv_preamble(config_text);
  out += "epsilon,epsilon_used,n,window_size,s_at_phi,normalized,cov,cov_ratio,phi,floor,"
         "bound_direction,mode,bisection_width\n";
  for (const HausdorffCell& c : rep.cells) {
    out += fmt17(c.epsilon);
    out += ',';
    out += fmt17(c.epsilon_used);
    out += ',';
    out += std::to_string(c.n);
    out += ',';
    out += std::to_string(c.window_size);
    out += ',';
    out += fmt17(c.dim.s);
    out += ',';
    out += fmt17(c.normalized);
    out += ',';
    out += fmt_int(c.cov.count);
    out += ',';
    out += fmt17(c.cov_ratio);
    out += ',';
    out += fmt17(rep.phi);
    out += ',';
    out += fmt17(rep.floor_delta);
    out += ',';
    out += std::string(to_string(c.dim.direction)) + "|" + to_string(c.cov.direction);
    out += ',';
    out += to_string(rep.mode);
    out += ',';
    out += fmt17(c.dim.bisection_width);
    out += '\n';
  }
  return out;
}

inline std::string minkowski_csv(const MinkowskiReport& rep, const std::string& config_text) {
  std::string out = csv_preamble(config_text);
  out += "epsilon,epsilon_used,count,ratio\n";
  for (const MinkowskiScale& sc : rep.scales) {
    out += fmt17(sc.epsilon);
    out += ',';
    out += fmt17(sc.epsilon_used);
    out += ',';
    out += fmt_int(sc.count);
    out += ',';
    out += fmt17(sc.ratio);
    out += '\n';
  }
  return out;
}

inline std::string verify_csv(const std::vector<CheckOutcome>& checks,
                              const std::string& config_text) {
  std::string out = csv_preamble(config_text);
  out += "name,status,margin,anchor,witness,note\n";
  for (const CheckOutcome& c : checks) {
    out += csv_quote(c.name);
    out += ',';
    out += to_string(c.status);
    out += ',';
    out += fmt17(c.margin);
    out += ',';
    out += csv_quote(c.anchor);
    out += ',';
    out += csv_quote(c.witness);
    out += ',';
    out += csv_quote(c.note);
    out += '\n';
  }
  return out;
}

inline Json slope_json(const SlopeFit& f) {
  return Json{{"slope", f.slope},
              {"intercept", f.intercept},
              {"max_residual", f.max_residual},
              {"points", f.points}};
}

inline Json flavor_json(const FlavorEstimate& est) {
  Json j;
  j["flavor"] = to_string(est.flavor);
  j["valid"] = est.valid;
  j["usable_windows"] = est.usable_windows;
  j["tail_windows"] = est.tail_windows;
  j["tail_upper"] = est.tail_upper;
  j["tail_lower"] = est.tail_lower;
  if (est.valid) {
    j["upper_fit"] = slope_json(est.upper_fit);
    j["lower_fit"] = slope_json(est.lower_fit);
    j["ratio_upper"] = est.ratio_upper;
    j["ratio_lower"] = est.ratio_lower;
    j["sensitivity"] = est.sensitivity;
  }
  j["any_nonexact"] = est.any_nonexact;
  j["any_budget"] = est.any_budget;
  return j;
}

inline Json grid_json(const ScaleGrid& g) {
  return Json{{"epsilons", g.epsilons},
              {"n_min", g.n_min},
              {"n_max", g.n_max},
              {"tail_fraction", g.tail_fraction}};
}

inline Json dimension_json(const DimensionReport& rep) {
  Json j;
  j["mode"] = to_string(rep.mode);
  j["seed"] = rep.seed;
  j["source"] = rep.source;
  j["grid"] = grid_json(rep.grid);
  j["separated"] = flavor_json(rep.s_est);
  j["spanning"] = flavor_json(rep.r_est);
  j["cover"] = flavor_json(rep.cov_est);
  Json cells = Json::array();
  for (const CountCell& c : rep.cells) {
    cells.push_back(Json{{"epsilon", c.epsilon},
                         {"epsilon_used", c.epsilon_used},
                         {"jittered", c.jittered},
                         {"n", c.n},
                         {"window_size", c.window_size},
                         {"points", c.points},
                         {"enumerated", c.enumerated},
                         {"duplicates", c.duplicates},
                         {"s", c.s.count},
                         {"r", c.r.count},
                         {"cov", c.cov.count},
                         {"direction", std::string(to_string(c.s.direction)) + "|" +
                                           to_string(c.r.direction) + "|" +
                                           to_string(c.cov.direction)}});
  }
  j["cells"] = std::move(cells);
  return j;
}

inline Json hausdorff_json(const HausdorffEstimate& rep) {
  Json j;
  j["mode"] = to_string(rep.mode);
  j["seed"] = rep.seed;
  j["source"] = rep.source;
  j["grid"] = grid_json(rep.grid);
  j["floor"] = rep.floor_delta;
  j["phi"] = rep.phi;
  j["tail_windows"] = rep.tail_windows;
  j["tail_upper"] = rep.tail_upper;
  j["tail_lower"] = rep.tail_lower;
  j["cov_ratio_upper"] = rep.cov_ratio_upper;
  j["value_upper"] = rep.value_upper;
  j["value_lower"] = rep.value_lower;
  j["trend"] = slope_json(rep.trend);
  j["any_capped"] = rep.any_capped;
  j["any_empty"] = rep.any_empty;
  j["any_nonexact"] = rep.any_nonexact;
  return j;
}

inline Json minkowski_json(const MinkowskiReport& rep) {
  Json j;
  Json scales = Json::array();
  for (const MinkowskiScale& sc : rep.scales) {
    scales.push_back(Json{{"epsilon", sc.epsilon},
                          {"epsilon_used", sc.epsilon_used},
                          {"jittered", sc.jittered},
                          {"count", sc.count},
                          {"ratio", sc.ratio}});
  }
  j["scales"] = std::move(scales);
  j["fit"] = slope_json(rep.fit);
  j["any_nonexact"] = rep.any_nonexact;
  return j;
}

inline Json katok_json(const KatokProfile& profile) {
  Json j;
  j["delta"] = profile.delta;
  Json cells = Json::array();
  for (const KatokCell& c : profile.cells) {
    cells.push_back(Json{{"epsilon", c.epsilon},
                         {"epsilon_used", c.epsilon_used},
                         {"n", c.n},
                         {"window_size", c.window_size},
                         {"points", c.points},
                         {"katok", c.katok.count},
                         {"r", c.r.count},
                         {"b", c.b},
                         {"direction", std::string(to_string(c.katok.direction)) + "|" +
                                           to_string(c.r.direction)}});
  }
  j["cells"] = std::move(cells);
  return j;
}

inline Json checks_json(const std::vector<CheckOutcome>& checks) {
  Json arr = Json::array();
  for (const CheckOutcome& c : checks) {
    arr.push_back(Json{{"name", c.name},
                       {"status", to_string(c.status)},
                       {"margin", c.margin},
                       {"anchor", c.anchor},
                       {"witness", c.witness},
                       {"note", c.note}});
  }
  return arr;
}

inline Json summary_root(const Json& config_echo) {
  Json j;
  j["version"] = kVersion;
  j["config"] = config_echo;
  return j;
}

inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace meandim
