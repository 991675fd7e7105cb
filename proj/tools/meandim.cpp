#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "meandim/config.hpp"
#include "meandim/estimate.hpp"
#include "meandim/report.hpp"
#include "meandim/runner.hpp"
#include "meandim/verify.hpp"
#include "meandim/version.hpp"

namespace md = meandim;

namespace {

struct Invocation {
  std::string config_path;
  std::string out_dir = "out";
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string mode;
  bool mode_set = false;
};

std::string read_config_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw md::ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

md::Json parse_config(const std::string& text, const std::string& path) {
  try {
    md::Json j = md::Json::parse(text);
    if (!j.is_object()) throw md::ConfigError("config: top level must be an object");
    return j;
  } catch (const md::Json::exception& e) {
    throw md::ConfigError("config: parse failure in '" + path + "': " + e.what());
  }
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw md::ResourceError("cannot create output directory '" + dir + "': " + ec.message());
}

std::string out_path(const Invocation& inv, const char* name) {
  return (std::filesystem::path(inv.out_dir) / name).string();
}

const md::Json& need(const md::Json& j, const char* key) {
  if (!j.contains(key)) throw md::ConfigError(std::string(key) + ": missing");
  return j.at(key);
}

void apply_overrides(md::Json& cfg, const Invocation& inv) {
  if (inv.seed_set) cfg["seed"] = inv.seed;
  if (inv.mode_set) cfg["mode"] = inv.mode;
}

std::vector<double> parse_eps_list(const md::Json& j, const std::string& path) {
  if (j.contains("epsilons")) {
    const md::Json& e = j.at("epsilons");
    if (!e.is_array()) throw md::ConfigError(path + ".epsilons: expected an array");
    return e.get<std::vector<double>>();
  }
  return md::ScaleGrid::geometric(
      md::cfg::num(j, "eps_from", path), md::cfg::num(j, "eps_to", path),
      static_cast<std::size_t>(md::cfg::integer(j, "eps_count", path)));
}

md::FolnerSequence windows_for(const md::Json& cfg, int rank, const md::ScaleGrid& grid) {
  md::FolnerSequence seq = cfg.contains("windows")
                               ? md::parse_folner(cfg.at("windows"), rank, "windows")
                               : md::FolnerSequence::boxes(rank, grid.n_max);
  if (seq.rank() != rank) throw md::ConfigError("windows: rank differs from the system rank");
  if (grid.n_max > seq.n_max()) {
    throw md::ConfigError("grid.n_max exceeds the window sequence length");
  }
  return seq;
}

void print_flavor(const md::FlavorEstimate& est) {
  std::cout << "  " << md::to_string(est.flavor) << ": ";
  if (!est.valid) {
    std::cout << "invalid (no usable windows)\n";
    return;
  }
  std::cout << "upper slope " << md::fmt17(est.upper_fit.slope) << " ratio "
            << md::fmt17(est.ratio_upper) << " | lower slope " << md::fmt17(est.lower_fit.slope)
            << " ratio " << md::fmt17(est.ratio_lower);
  if (est.any_nonexact) std::cout << " [nonexact]";
  if (est.any_budget) std::cout << " [budget]";
  std::cout << "\n";
}

int cmd_estimate(const Invocation& inv) {
  const std::string text = read_config_text(inv.config_path);
  md::Json cfg = parse_config(text, inv.config_path);
  apply_overrides(cfg, inv);

  const md::ShiftSystem system = md::parse_system(need(cfg, "system"), "system");
  md::ScaleGrid grid = md::parse_grid(need(cfg, "grid"), "grid");
  const md::FolnerSequence folner = windows_for(cfg, system.rank(), grid);
  const md::EstimatorOptions opt = md::parse_options(cfg);

  const md::ShiftCellSource base(system, folner);
  std::optional<md::TransformedCellSource> transformed;
  const md::CellSource* src = &base;
  if (cfg.contains("transform")) {
    const md::MetricTransform t = md::parse_transform(cfg.at("transform"), "transform");
    const double rescale = md::rescale_factor_for_transforms(base.diameter_bound());
    try {
      md::validate_transform(t, rescale * base.diameter_bound());
    } catch (const md::TransformError& e) {
      throw md::ConfigError(std::string("transform: ") + e.what());
    }
    transformed.emplace(base, t, rescale);
    for (double& e : grid.epsilons) e = transformed->map_scale(e);
    src = &*transformed;
  }

  const md::DimensionReport rep = md::run_metric_estimate(*src, grid, opt, inv.workers);

  std::optional<md::KatokProfile> katok;
  if (cfg.contains("katok")) {
    katok = md::katok_profile(*src, grid, md::cfg::num(cfg.at("katok"), "delta", "katok"), opt);
  }
  std::optional<md::HausdorffEstimate> hausdorff;
  if (cfg.contains("hausdorff")) {
    const md::Json& hj = cfg.at("hausdorff");
    hausdorff = md::mdim_hausdorff_estimate(*src, grid, md::cfg::num(hj, "floor", "hausdorff"),
                                            md::cfg::num_or(hj, "phi", "hausdorff", 1.0), opt);
  }

  ensure_out_dir(inv.out_dir);
  md::write_text_file(out_path(inv, "counts.csv"),
                      md::counts_csv(rep, text, katok ? &*katok : nullptr));
  if (hausdorff) {
    md::write_text_file(out_path(inv, "hausdorff.csv"), md::hausdorff_csv(*hausdorff, text));
  }
  md::Json summary = md::summary_root(cfg);
  summary["command"] = "estimate";
  summary["dimension"] = md::dimension_json(rep);
  if (katok) summary["katok"] = md::katok_json(*katok);
  if (hausdorff) summary["hausdorff"] = md::hausdorff_json(*hausdorff);
  md::write_text_file(out_path(inv, "summary.json"), md::dump_json(summary));

  std::cout << "source: " << rep.source << "\n";
  print_flavor(rep.s_est);
  print_flavor(rep.r_est);
  print_flavor(rep.cov_est);
  if (hausdorff) {
    std::cout << "  hausdorff: upper " << md::fmt17(hausdorff->value_upper) << " lower "
              << md::fmt17(hausdorff->value_lower) << "\n";
  }
  std::cout << "wrote " << out_path(inv, "counts.csv") << "\n";
  return 0;
}

int cmd_verify(const Invocation& inv) {
  const std::string text = read_config_text(inv.config_path);
  md::Json cfg = parse_config(text, inv.config_path);
  apply_overrides(cfg, inv);

  const std::uint64_t seed = static_cast<std::uint64_t>(md::cfg::integer_or(cfg, "seed", "", 1));
  const auto sandwich = static_cast<std::size_t>(
      md::cfg::integer_or(cfg, "sandwich_instances", "", 200));
  const auto pairs = static_cast<std::size_t>(md::cfg::integer_or(cfg, "product_pairs", "", 50));
  const auto katok = static_cast<std::size_t>(md::cfg::integer_or(cfg, "katok_instances", "", 50));

  const std::vector<md::CheckOutcome> checks = md::run_verify_suite(seed, sandwich, pairs, katok);

  ensure_out_dir(inv.out_dir);
  md::write_text_file(out_path(inv, "verify.csv"), md::verify_csv(checks, text));
  md::Json summary = md::summary_root(cfg);
  summary["command"] = "verify";
  summary["checks"] = md::checks_json(checks);
  md::write_text_file(out_path(inv, "summary.json"), md::dump_json(summary));

  bool hard_fail = false;
  for (const md::CheckOutcome& c : checks) {
    std::cout << c.name << ": " << md::to_string(c.status) << " margin " << md::fmt17(c.margin);
    if (!c.note.empty()) std::cout << " (" << c.note << ")";
    std::cout << "\n";
    if (md::is_hard_failure(c)) {
      hard_fail = true;
      if (!c.witness.empty()) std::cout << "  witness: " << c.witness << "\n";
    }
  }
  std::cout << "wrote " << out_path(inv, "verify.csv") << "\n";
  return hard_fail ? 1 : 0;
}

struct ScanRow {
  std::string transform;
  bool valid = false;
  md::ExponentEstimate exponents;
  bool have_minkowski = false;
  md::SlopeFit minkowski;
  double distance_lower = 0.0;
  std::string note;
};

int cmd_scan_metrics(const Invocation& inv) {
  const std::string text = read_config_text(inv.config_path);
  md::Json cfg = parse_config(text, inv.config_path);
  apply_overrides(cfg, inv);

  const md::AlphabetSpec alphabet = md::parse_alphabet(need(cfg, "alphabet"), "alphabet");
  const md::Json& tj = need(cfg, "transforms");
  if (!tj.is_array() || tj.empty()) throw md::ConfigError("transforms: expected a nonempty array");
  std::vector<md::MetricTransform> transforms;
  for (std::size_t i = 0; i < tj.size(); ++i) {
    transforms.push_back(md::parse_transform(tj.at(i), "transforms[" + std::to_string(i) + "]"));
  }
  const md::Json scan = cfg.contains("scan") ? cfg.at("scan") : md::Json::object();
  const double eps_max = md::cfg::num_or(scan, "eps_max", "scan", 0.1);
  const double eps_min = md::cfg::num_or(scan, "eps_min", "scan", 1e-6);
  const auto count = static_cast<std::size_t>(md::cfg::integer_or(scan, "count", "scan", 25));
  const double tail = md::cfg::num_or(scan, "tail_fraction", "scan", 0.5);
  if (!(eps_min > 0.0 && eps_max > eps_min && eps_max < 1.0)) {
    throw md::ConfigError("scan: need 0 < eps_min < eps_max < 1");
  }
  if (count < 4) throw md::ConfigError("scan.count: need at least 4");
  if (!(tail > 0.0 && tail <= 1.0)) throw md::ConfigError("scan.tail_fraction: must be in (0,1]");
  const std::vector<double> eps = parse_eps_list(need(cfg, "minkowski"), "minkowski");

  const md::DistMatrix base = alphabet.matrix();
  const double rescale = md::rescale_factor_for_transforms(alphabet.diameter());
  const md::DistMatrix base_scaled = base.map([&](double v) { return v * rescale; });
  md::CountQuery q;
  q.mode = md::parse_mode(md::cfg::str_or(cfg, "mode", "", "exact"));
  q.line_order = alphabet.line_order();

  std::vector<ScanRow> rows(transforms.size());
  md::run_parallel(transforms.size(), inv.workers, [&](std::size_t i) {
    ScanRow& row = rows[i];
    const md::MetricTransform& t = transforms[i];
    row.transform = t.describe();
    try {
      md::validate_transform(t, rescale * alphabet.diameter());
    } catch (const md::TransformError& e) {
      row.note = e.what();
      return;
    }
    row.valid = true;
    row.exponents = md::exponent_range(t, eps_max, eps_min, count, tail);
    const md::DistMatrix dz = base_scaled.map([&](double v) { return t(v); });
    row.distance_lower = md::uniform_distance_lower_bound(base_scaled, dz);
    try {
      row.minkowski = md::minkowski_dim_estimate(dz, eps, q).fit;
      row.have_minkowski = true;
    } catch (const md::Error& e) {
      row.note = e.what();
    }
  });

  ensure_out_dir(inv.out_dir);
  std::string csv = md::csv_preamble(text);
  csv += "transform,valid,k_min,k_max,raw_min,raw_max,clamped,minkowski_slope,"
         "distance_lower_bound,note\n";
  md::Json jrows = md::Json::array();
  for (const ScanRow& row : rows) {
    csv += md::csv_quote(row.transform);
    csv += ',';
    csv += row.valid ? "1" : "0";
    csv += ',';
    if (row.valid) {
      csv += md::fmt17(row.exponents.k_min) + "," + md::fmt17(row.exponents.k_max) + "," +
             md::fmt17(row.exponents.raw_min) + "," + md::fmt17(row.exponents.raw_max) + "," +
             (row.exponents.clamped ? "1" : "0") + ",";
      csv += row.have_minkowski ? md::fmt17(row.minkowski.slope) : std::string();
      csv += ',';
      csv += md::fmt17(row.distance_lower);
    } else {
      csv += ",,,,,,";
    }
    csv += ',';
    csv += md::csv_quote(row.note);
    csv += '\n';

    md::Json jr;
    jr["transform"] = row.transform;
    jr["valid"] = row.valid;
    if (row.valid) {
      jr["k_min"] = row.exponents.k_min;
      jr["k_max"] = row.exponents.k_max;
      jr["raw_min"] = row.exponents.raw_min;
      jr["raw_max"] = row.exponents.raw_max;
      jr["clamped"] = row.exponents.clamped;
      if (row.have_minkowski) jr["minkowski_slope"] = row.minkowski.slope;
      jr["distance_lower_bound"] = row.distance_lower;
    }
    if (!row.note.empty()) jr["note"] = row.note;
    jrows.push_back(std::move(jr));
  }
  md::write_text_file(out_path(inv, "scan_metrics.csv"), csv);
  md::Json summary = md::summary_root(cfg);
  summary["command"] = "scan-metrics";
  summary["rows"] = std::move(jrows);
  md::write_text_file(out_path(inv, "summary.json"), md::dump_json(summary));

  for (const ScanRow& row : rows) {
    std::cout << row.transform << ": "
              << (row.valid ? "k in [" + md::fmt17(row.exponents.k_min) + ", " +
                                  md::fmt17(row.exponents.k_max) + "]"
                            : "invalid (" + row.note + ")")
              << "\n";
  }
  std::cout << "wrote " << out_path(inv, "scan_metrics.csv") << "\n";
  return 0;
}

std::string role_counts_rows(const std::string& role, const md::DimensionReport& rep) {
  std::string out;
  for (const md::CountCell& c : rep.cells) {
    out += role;
    out += ',';
    out += md::fmt17(c.epsilon);
    out += ',';
    out += md::fmt17(c.epsilon_used);
    out += ',';
    out += std::to_string(c.n);
    out += ',';
    out += std::to_string(c.window_size);
    out += ',';
    out += std::to_string(c.points);
    out += ',';
    out += md::fmt_int(c.s.count);
    out += ',';
    out += md::fmt_int(c.r.count);
    out += ',';
    out += md::fmt_int(c.cov.count);
    out += ',';
    out += std::string(md::to_string(c.s.direction)) + "|" + md::to_string(c.r.direction) + "|" +
           md::to_string(c.cov.direction);
    out += '\n';
  }
  return out;
}

int cmd_product(const Invocation& inv) {
  const std::string text = read_config_text(inv.config_path);
  md::Json cfg = parse_config(text, inv.config_path);
  apply_overrides(cfg, inv);

  const md::ShiftSystem left = md::parse_system(need(cfg, "left"), "left");
  const md::ShiftSystem right = md::parse_system(need(cfg, "right"), "right");
  if (left.rank() != right.rank()) throw md::ConfigError("left and right ranks differ");
  const md::ScaleGrid grid = md::parse_grid(need(cfg, "grid"), "grid");
  const md::FolnerSequence folner = windows_for(cfg, left.rank(), grid);
  const md::EstimatorOptions opt = md::parse_options(cfg);

  const md::ShiftCellSource src_left(left, folner);
  const md::ShiftCellSource src_right(right, folner);
  const md::ProductCellSource src_product(src_left, src_right);

  const md::DimensionReport rep_left = md::run_metric_estimate(src_left, grid, opt, inv.workers);
  const md::DimensionReport rep_right = md::run_metric_estimate(src_right, grid, opt, inv.workers);
  const md::DimensionReport rep_product =
      md::run_metric_estimate(src_product, grid, opt, inv.workers);

  ensure_out_dir(inv.out_dir);
  std::string csv = md::csv_preamble(text);
  csv += "role,epsilon,epsilon_used,n,window_size,points,s,r,cov,bound_direction\n";
  csv += role_counts_rows("left", rep_left);
  csv += role_counts_rows("right", rep_right);
  csv += role_counts_rows("product", rep_product);
  md::write_text_file(out_path(inv, "product.csv"), csv);

  md::Json summary = md::summary_root(cfg);
  summary["command"] = "product";
  summary["left"] = md::dimension_json(rep_left);
  summary["right"] = md::dimension_json(rep_right);
  summary["product"] = md::dimension_json(rep_product);
  md::Json ordering;
  if (rep_left.r_est.valid && rep_right.r_est.valid && rep_product.r_est.valid) {
    ordering["spanning_subadditivity_margin"] =
        rep_left.r_est.ratio_upper + rep_right.r_est.ratio_upper - rep_product.r_est.ratio_upper;
  }
  if (rep_left.s_est.valid && rep_right.s_est.valid && rep_product.s_est.valid) {
    ordering["separated_superadditivity_margin"] =
        rep_product.s_est.ratio_lower -
        std::max(rep_left.s_est.ratio_lower, rep_right.s_est.ratio_lower);
  }
  ordering["note"] = "advisory margins from finite-scale ratios, not hard checks";
  summary["ordering"] = std::move(ordering);
  md::write_text_file(out_path(inv, "summary.json"), md::dump_json(summary));

  std::cout << "left:\n";
  print_flavor(rep_left.r_est);
  std::cout << "right:\n";
  print_flavor(rep_right.r_est);
  std::cout << "product:\n";
  print_flavor(rep_product.r_est);
  if (ordering.contains("spanning_subadditivity_margin")) {
    std::cout << "spanning subadditivity margin: "
              << md::fmt17(ordering["spanning_subadditivity_margin"].get<double>()) << "\n";
  }
  std::cout << "wrote " << out_path(inv, "product.csv") << "\n";
  return 0;
}

int cmd_minkowski(const Invocation& inv) {
  const std::string text = read_config_text(inv.config_path);
  md::Json cfg = parse_config(text, inv.config_path);
  apply_overrides(cfg, inv);

  const md::AlphabetSpec alphabet = md::parse_alphabet(need(cfg, "alphabet"), "alphabet");
  const std::vector<double> eps = parse_eps_list(need(cfg, "minkowski"), "minkowski");
  md::CountQuery q;
  q.mode = md::parse_mode(md::cfg::str_or(cfg, "mode", "", "exact"));
  q.line_order = alphabet.line_order();

  const md::MinkowskiReport rep = md::minkowski_dim_estimate(alphabet.matrix(), eps, q);

  ensure_out_dir(inv.out_dir);
  md::write_text_file(out_path(inv, "minkowski.csv"), md::minkowski_csv(rep, text));
  md::Json summary = md::summary_root(cfg);
  summary["command"] = "minkowski";
  summary["minkowski"] = md::minkowski_json(rep);
  md::write_text_file(out_path(inv, "summary.json"), md::dump_json(summary));

  std::cout << "minkowski slope " << md::fmt17(rep.fit.slope) << " over " << rep.scales.size()
            << " scales\n";
  std::cout << "wrote " << out_path(inv, "minkowski.csv") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("meandim ") + md::kVersion +
               ": packing, covering, and scale-limited dimension estimates for weighted shift "
               "systems"};
  app.require_subcommand(1);

  Invocation inv;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", inv.config_path, "JSON config file")->required();
    sub->add_option("--out", inv.out_dir, "output directory (default: out)");
    sub->add_option("--workers", inv.workers, "worker threads (default: 1)");
    sub->add_option("--seed", inv.seed, "override the config seed");
    sub->add_option("--mode", inv.mode, "override the solve mode (exact|greedy|sampled)");
  };
  std::vector<CLI::App*> subs = {
      app.add_subcommand("estimate", "dimension estimate for one system"),
      app.add_subcommand("verify", "run the invariant check suite"),
      app.add_subcommand("scan-metrics", "exponent ranges for a family of transforms"),
      app.add_subcommand("product", "compare a product system against its factors"),
      app.add_subcommand("minkowski", "box-counting slope for one alphabet")};
  for (CLI::App* sub : subs) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = nullptr;
  for (CLI::App* cand : subs) {
    if (cand->parsed()) sub = cand;
  }
  if (sub == nullptr) return 2;
  inv.seed_set = sub->count("--seed") > 0;
  inv.mode_set = sub->count("--mode") > 0;

  try {
    const std::string name = sub->get_name();
    if (name == "estimate") return cmd_estimate(inv);
    if (name == "verify") return cmd_verify(inv);
    if (name == "scan-metrics") return cmd_scan_metrics(inv);
    if (name == "product") return cmd_product(inv);
    return cmd_minkowski(inv);
  } catch (const md::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const md::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
