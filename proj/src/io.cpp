#include "osqc/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace osqc {

namespace {

void check_keys(const Json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
    }
  }
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

Json to_json(const Interpretation& interp) {
  return Json{{"ib", to_string(interp.ib)},
              {"chi", to_string(interp.chi)},
              {"lambda", to_string(interp.lambda_mode)}};
}

Json to_json(const AttackParams& p) {
  Json j{{"kind", to_string(p.kind)},
         {"theta", p.theta},
         {"theta_prime", p.theta_prime},
         {"lambda", p.lambda},
         {"overlap_eps", p.overlap_eps},
         {"overlap_E", p.overlap_big_e},
         {"both_legs", p.attack_both_legs},
         {"delay_slots", p.delay_slots}};
  j["ir_basis"] = p.ir_basis == 0 ? "z" : (p.ir_basis == 1 ? "x" : "random");
  return j;
}

Json to_json(const ProtocolTranscript& tr) {
  Json events = Json::array();
  for (const Event& e : tr.events) {
    events.push_back(Json{{"kind", to_string(e.kind)},
                          {"label", e.label},
                          {"particles", e.particles},
                          {"values", e.values},
                          {"slot", e.time_slot}});
  }
  Json timings = Json::array();
  for (const GvTiming& t : tr.timings) {
    timings.push_back(Json{{"t_s", t.send_slot},
                           {"t_r", t.receive_slot},
                           {"delay", t.delay},
                           {"travel", t.travel}});
  }
  return Json{{"protocol", to_string(tr.protocol)},
              {"seed", tr.seed},
              {"qsdc_mode", tr.qsdc_mode},
              {"events", events},
              {"error_rates", tr.error_rates},
              {"sent_bits", tr.sent_bits},
              {"decoded_bits", tr.decoded_bits},
              {"eve_decoded_bits", tr.eve_decoded_bits},
              {"aborted", tr.aborted},
              {"abort_reason", tr.abort_reason},
              {"counters",
               Json{{"transmitted_leg1", tr.transmitted_leg1},
                    {"transmitted_leg2", tr.transmitted_leg2},
                    {"retained", tr.retained},
                    {"checked", tr.checked},
                    {"encoded_pairs", tr.encoded_pairs}}},
              {"basis_counts", tr.basis_counts},
              {"timings", timings},
              {"attacked_particles", tr.attacked_particles}};
}

Json to_json(const SecurityGrid& grid) {
  return Json{{"protocol", to_string(grid.protocol)},
              {"interpretation", to_json(grid.interp)},
              {"theta", grid.thetas},
              {"lambda", grid.lambdas},
              {"e", grid.e},
              {"I_B", grid.ib},
              {"chi", grid.chi},
              {"flag", grid.flag}};
}

Json to_json(const ThresholdResult& r) {
  Json j{{"protocol", to_string(r.protocol)},
         {"interpretation", to_json(r.interp)},
         {"has_threshold", r.has_threshold},
         {"resolution", r.resolution},
         {"monotonicity_violations", r.monotonicity_violations},
         {"variants", r.variants},
         {"notes", r.notes}};
  if (r.has_threshold) {
    j["e0"] = r.e0;
    j["theta_star"] = r.theta_star;
    j["lambda_star"] = r.lambda_star;
  } else {
    j["e0"] = nullptr;
    j["note"] = "no finite threshold: I_B exceeds chi everywhere";
  }
  return j;
}

Json to_json(const DualityReport& r) {
  return Json{{"samples", r.samples},
              {"seed", r.seed},
              {"max_pure_violation", r.max_pure_violation},
              {"max_mixed_excess", r.max_mixed_excess},
              {"entropy_reading_max", r.entropy_reading_max},
              {"entropy_reading_argmax", r.entropy_reading_argmax}};
}

Json to_json(const MonogamyReport& r) {
  return Json{{"samples", r.samples},
              {"seed", r.seed},
              {"violations", r.violations},
              {"max_violation", r.max_violation},
              {"ghz_three_tangle", r.ghz_three_tangle},
              {"w_three_tangle", r.w_three_tangle},
              {"ghz_pairwise_tangle", r.ghz_pairwise_tangle},
              {"fidelity_monotone", r.fidelity_monotone}};
}

Json to_json(const HeisenbergReport& r) {
  return Json{{"r_basis_error", r.r_basis_error},
              {"d_prob_plus", r.d_prob_plus},
              {"d_prob_minus", r.d_prob_minus},
              {"entropy_r", r.entropy_r},
              {"entropy_d", r.entropy_d}};
}

std::string grid_csv(const SecurityGrid& grid,
                     const std::vector<std::string>& meta_lines) {
  std::string out;
  for (const std::string& line : meta_lines) {
    out += "# " + line + "\n";
  }
  out += "theta,lambda,e,I_B,chi,flag\n";
  for (std::size_t i = 0; i < grid.thetas.size(); ++i) {
    for (std::size_t j = 0; j < grid.lambdas.size(); ++j) {
      const std::size_t idx = grid.index(i, j);
      out += format_double(grid.thetas[i]) + "," +
             format_double(grid.lambdas[j]) + "," + format_double(grid.e[idx]) +
             "," + format_double(grid.ib[idx]) + "," +
             format_double(grid.chi[idx]) + "," +
             std::to_string(grid.flag[idx]) + "\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scenario config
// ---------------------------------------------------------------------------

void ScenarioConfig::validate() const {
  if (command != "run" && command != "sweep" && command != "suites" &&
      command != "threshold") {
    throw std::invalid_argument("command: must be run, sweep, suites or threshold");
  }
  if ((command == "run" || command == "suites") && !seed.has_value()) {
    throw std::invalid_argument("seed: required for stochastic command '" +
                                command + "'");
  }
  if (resolution < 50) {
    throw std::invalid_argument("resolution: must be >= 50");
  }
  if (samples < 100) {
    throw std::invalid_argument("samples: must be >= 100");
  }
  for (const std::string& f : formats) {
    if (f != "csv" && f != "json") {
      throw std::invalid_argument("formats: entries must be 'csv' or 'json'");
    }
  }
  if (command == "run") {
    protocol_config().validate();
  } else if (attack) {
    attack->validate();
  }
}

ProtocolConfig ScenarioConfig::protocol_config() const {
  ProtocolConfig cfg;
  cfg.id = protocol;
  cfg.n = n;
  cfg.seed = seed.value_or(0);
  cfg.qsdc_mode = qsdc_mode;
  cfg.disclose_fraction = disclose_fraction;
  cfg.thresholds = thresholds;
  cfg.attack = attack;
  cfg.bits = message_bits;
  return cfg;
}

namespace {

AttackParams attack_from_json(const Json& j) {
  check_keys(j,
             {"kind", "theta", "theta_prime", "lambda", "overlap_eps",
              "overlap_E", "both_legs", "delay_slots", "ir_basis"},
             "attack");
  AttackParams p;
  p.kind = attack_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("theta")) p.theta = j.at("theta").get<double>();
  if (j.contains("theta_prime")) p.theta_prime = j.at("theta_prime").get<double>();
  if (j.contains("lambda")) p.lambda = j.at("lambda").get<double>();
  if (p.kind == AttackKind::kSymmetricNg) {
    // Overlaps are tied to theta; explicit values must agree.
    p.overlap_eps = std::cos(p.theta);
    p.overlap_big_e = std::cos(p.theta);
  }
  if (j.contains("overlap_eps")) p.overlap_eps = j.at("overlap_eps").get<double>();
  if (j.contains("overlap_E")) p.overlap_big_e = j.at("overlap_E").get<double>();
  if (j.contains("both_legs")) p.attack_both_legs = j.at("both_legs").get<bool>();
  if (j.contains("delay_slots")) p.delay_slots = j.at("delay_slots").get<int>();
  if (j.contains("ir_basis")) {
    const std::string b = j.at("ir_basis").get<std::string>();
    if (b == "z") {
      p.ir_basis = 0;
    } else if (b == "x") {
      p.ir_basis = 1;
    } else if (b == "random") {
      p.ir_basis = -1;
    } else {
      throw std::invalid_argument("attack.ir_basis: must be 'z', 'x' or 'random'");
    }
  }
  p.validate();
  return p;
}

Interpretation interpretation_from_json(const Json& j) {
  check_keys(j, {"ib", "chi", "lambda"}, "interpretation");
  Interpretation interp;
  if (j.contains("ib")) {
    interp.ib = ib_reading_from_string(j.at("ib").get<std::string>());
  }
  if (j.contains("chi")) {
    interp.chi = chi_reading_from_string(j.at("chi").get<std::string>());
  }
  if (j.contains("lambda")) {
    interp.lambda_mode =
        lambda_semantics_from_string(j.at("lambda").get<std::string>());
  }
  return interp;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw std::invalid_argument("config: top level must be an object");
  }
  check_keys(j,
             {"command", "protocol", "n", "seed", "resolution", "samples",
              "formats", "out_dir", "qsdc_mode", "dump_probe_states",
              "disclose_fraction", "thresholds", "attack", "message_bits",
              "interpretation"},
             "config");
  ScenarioConfig cfg;
  cfg.command = j.at("command").get<std::string>();
  if (j.contains("protocol")) {
    cfg.protocol = protocol_from_string(j.at("protocol").get<std::string>());
  }
  if (j.contains("n")) cfg.n = j.at("n").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("resolution")) cfg.resolution = j.at("resolution").get<int>();
  if (j.contains("samples")) cfg.samples = j.at("samples").get<int>();
  if (j.contains("formats")) {
    cfg.formats = j.at("formats").get<std::vector<std::string>>();
  }
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("qsdc_mode")) cfg.qsdc_mode = j.at("qsdc_mode").get<bool>();
  if (j.contains("dump_probe_states")) {
    cfg.dump_probe_states = j.at("dump_probe_states").get<bool>();
  }
  if (j.contains("disclose_fraction")) {
    cfg.disclose_fraction = j.at("disclose_fraction").get<double>();
  }
  if (j.contains("thresholds")) {
    const Json& t = j.at("thresholds");
    check_keys(t, {"bb84", "bell"}, "thresholds");
    if (t.contains("bb84")) cfg.thresholds.bb84 = t.at("bb84").get<double>();
    if (t.contains("bell")) cfg.thresholds.bell = t.at("bell").get<double>();
  }
  if (j.contains("attack") && !j.at("attack").is_null()) {
    cfg.attack = attack_from_json(j.at("attack"));
  }
  if (j.contains("message_bits")) {
    cfg.message_bits = j.at("message_bits").get<std::vector<int>>();
  }
  if (j.contains("interpretation")) {
    cfg.interp = interpretation_from_json(j.at("interpretation"));
  }
  cfg.validate();
  return cfg;
}

Json to_json(const ScenarioConfig& cfg) {
  Json j{{"command", cfg.command},
         {"protocol", to_string(cfg.protocol)},
         {"n", cfg.n},
         {"resolution", cfg.resolution},
         {"samples", cfg.samples},
         {"formats", cfg.formats},
         {"out_dir", cfg.out_dir},
         {"qsdc_mode", cfg.qsdc_mode},
         {"dump_probe_states", cfg.dump_probe_states},
         {"disclose_fraction", cfg.disclose_fraction},
         {"thresholds",
          Json{{"bb84", cfg.thresholds.bb84}, {"bell", cfg.thresholds.bell}}},
         {"interpretation", to_json(cfg.interp)}};
  if (cfg.seed) j["seed"] = *cfg.seed;
  if (cfg.attack) j["attack"] = to_json(*cfg.attack);
  if (!cfg.message_bits.empty()) j["message_bits"] = cfg.message_bits;
  return j;
}

std::string config_hash(const ScenarioConfig& cfg) {
  // The hash covers the semantic configuration; where the artifacts land
  // does not change what was computed.
  Json j = to_json(cfg);
  j.erase("out_dir");
  const std::string canonical = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : canonical) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

}  // namespace osqc
