#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "osqc/analysis.hpp"
#include "osqc/protocols.hpp"

// Serialization of transcripts, grids, thresholds and reports, plus the
// strict scenario-config schema used by the command-line runner. Unknown
// keys are rejected by name; all output is deterministic for a fixed config.

namespace osqc {

using Json = nlohmann::json;

Json to_json(const Interpretation& interp);
Json to_json(const AttackParams& params);
Json to_json(const ProtocolTranscript& transcript);
Json to_json(const SecurityGrid& grid);
Json to_json(const ThresholdResult& result);
Json to_json(const DualityReport& report);
Json to_json(const MonogamyReport& report);
Json to_json(const HeisenbergReport& report);

// CSV with fixed columns theta,lambda,e,I_B,chi,flag. Metadata (seed, config
// hash, interpretation) is embedded as leading '#' comment lines.
std::string grid_csv(const SecurityGrid& grid,
                     const std::vector<std::string>& meta_lines);

struct ScenarioConfig {
  std::string command;  // run | sweep | suites | threshold
  ProtocolId protocol = ProtocolId::kPpGv;
  int n = 8;
  std::optional<std::uint64_t> seed;
  int resolution = 200;
  int samples = 1000;
  std::vector<std::string> formats{"csv", "json"};
  std::string out_dir = ".";
  bool qsdc_mode = false;
  bool dump_probe_states = false;  // embed attack probe matrices in run output
  double disclose_fraction = 0.5;
  Thresholds thresholds;
  std::optional<AttackParams> attack;
  std::vector<int> message_bits;
  Interpretation interp;

  void validate() const;
  ProtocolConfig protocol_config() const;
};

ScenarioConfig parse_config(const std::string& text);
Json to_json(const ScenarioConfig& config);

// FNV-1a over the canonical serialized config, reported in output artifacts.
std::string config_hash(const ScenarioConfig& config);

}  // namespace osqc
