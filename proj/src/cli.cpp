#include "osqc/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

namespace osqc::cli {

namespace {

namespace fs = std::filesystem;

Json meta_json(const ScenarioConfig& cfg) {
  return Json{{"seed", cfg.seed.value_or(0)},
              {"config_hash", config_hash(cfg)},
              {"interpretation", to_json(cfg.interp)}};
}

std::vector<std::string> meta_lines(const ScenarioConfig& cfg) {
  return {
      "seed=" + std::to_string(cfg.seed.value_or(0)),
      "config_hash=" + config_hash(cfg),
      std::string("interpretation=ib:") + to_string(cfg.interp.ib) +
          ",chi:" + to_string(cfg.interp.chi) +
          ",lambda:" + to_string(cfg.interp.lambda_mode),
  };
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << content;
  if (!out.good()) {
    throw std::runtime_error("short write to " + path.string());
  }
}

void write_json(const fs::path& path, Json j, const ScenarioConfig& cfg) {
  j["meta"] = meta_json(cfg);
  write_file(path, j.dump(2) + "\n");
}

Json complex_matrix_json(const CMat<double>& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(Json::array({std::real(m(i, j)), std::imag(m(i, j))}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// Full probe matrices for the configured attack: the Kraus branches of the
// single-qubit channel. Transcripts otherwise carry only the summary (which
// particles were attacked and the sampled branch outcomes).
Json probe_model_json(const AttackParams& params) {
  std::vector<CMat<double>> kraus;
  if (params.kind == AttackKind::kSymmetricNg) {
    kraus = ng_kraus(params.theta);
  } else if (params.kind == AttackKind::kGenericProbe) {
    kraus = isometry_kraus(generic_isometry(params));
  } else {
    return Json();
  }
  Json list = Json::array();
  for (const auto& k : kraus) list.push_back(complex_matrix_json(k));
  return Json{{"kraus", list}};
}

int do_run(const ScenarioConfig& cfg, const fs::path& out) {
  const ProtocolTranscript tr = run_protocol(cfg.protocol_config());
  const fs::path path =
      out / (std::string("run_") + to_string(cfg.protocol) + ".json");
  Json j = to_json(tr);
  if (cfg.dump_probe_states && cfg.attack) {
    const Json model = probe_model_json(*cfg.attack);
    if (!model.is_null()) j["attack_model"] = model;
  }
  write_json(path, std::move(j), cfg);
  std::ostringstream line;
  line << "run " << to_string(cfg.protocol) << " n=" << cfg.n
       << " seed=" << cfg.seed.value_or(0)
       << " aborted=" << (tr.aborted ? "true" : "false");
  for (const auto& [name, value] : tr.error_rates) {
    line << " " << name << "=" << value;
  }
  line << " -> " << path.string();
  std::cout << line.str() << "\n";
  return 0;
}

int do_sweep(const ScenarioConfig& cfg, const fs::path& out) {
  const SecurityGrid grid = build_grid(cfg.protocol, cfg.resolution, cfg.interp);
  std::vector<std::string> written;
  for (const std::string& fmt : cfg.formats) {
    const fs::path path = out / (std::string("grid_") + to_string(cfg.protocol) +
                                 "." + fmt);
    if (fmt == "csv") {
      write_file(path, grid_csv(grid, meta_lines(cfg)));
    } else {
      write_json(path, to_json(grid), cfg);
    }
    written.push_back(path.string());
  }
  std::cout << "sweep " << to_string(cfg.protocol) << " " << cfg.resolution
            << "x" << cfg.resolution << " cells=" << grid.e.size() << " ->";
  for (const auto& p : written) std::cout << " " << p;
  std::cout << "\n";
  return 0;
}

int do_threshold(const ScenarioConfig& cfg, const fs::path& out) {
  const ThresholdResult result =
      threshold_with_variants(cfg.protocol, cfg.resolution, cfg.interp);
  const fs::path path =
      out / (std::string("threshold_") + to_string(cfg.protocol) + ".json");
  write_json(path, to_json(result), cfg);
  std::cout << "threshold " << to_string(cfg.protocol);
  if (result.has_threshold) {
    std::cout << " e0=" << result.e0 << " theta*=" << result.theta_star
              << " lambda*=" << result.lambda_star;
  } else {
    std::cout << " no-finite-threshold";
  }
  std::cout << " -> " << path.string() << "\n";
  return 0;
}

int do_suites(const ScenarioConfig& cfg, const fs::path& out) {
  Rng root(cfg.seed.value_or(0));
  Rng duality_rng = root.split("duality");
  Rng monogamy_rng = root.split("monogamy");
  const DualityReport duality = duality_suite(cfg.samples, duality_rng);
  const MonogamyReport monogamy = monogamy_suite(cfg.samples, monogamy_rng);
  const HeisenbergReport heisenberg = heisenberg_check();
  Json j{{"duality", to_json(duality)},
         {"monogamy", to_json(monogamy)},
         {"heisenberg", to_json(heisenberg)},
         {"notes", Json::array({kFidelityNormalizationNote})}};
  const fs::path path = out / "suites.json";
  write_json(path, j, cfg);
  std::cout << "suites samples=" << cfg.samples
            << " duality_pure_max=" << duality.max_pure_violation
            << " monogamy_violations=" << monogamy.violations << " -> "
            << path.string() << "\n";
  return 0;
}

}  // namespace

int execute(const ScenarioConfig& cfg) {
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  if (cfg.command == "run") return do_run(cfg, out);
  if (cfg.command == "sweep") return do_sweep(cfg, out);
  if (cfg.command == "threshold") return do_threshold(cfg, out);
  if (cfg.command == "suites") return do_suites(cfg, out);
  throw std::invalid_argument("command: unknown command " + cfg.command);
}

int run(int argc, const char* const* argv) {
  CLI::App app{"orthogonal-state QKD/QSDC simulator and security analyzer"};
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> formats;
  std::uint64_t seed = 0;
  int resolution = 0;
  app.add_option("--config", config_path, "scenario config (JSON)")->required();
  app.add_option("--out", out_dir, "output directory (overrides config)");
  auto* fmt_opt =
      app.add_option("--format", formats, "output formats: csv and/or json");
  auto* seed_opt = app.add_option("--seed", seed, "seed override");
  auto* res_opt =
      app.add_option("--resolution", resolution, "grid resolution override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      throw std::invalid_argument("config: cannot open " + config_path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    ScenarioConfig cfg = parse_config(buf.str());
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (fmt_opt->count() > 0) cfg.formats = formats;
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (res_opt->count() > 0) cfg.resolution = resolution;
    cfg.validate();
    return execute(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace osqc::cli
