#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlmimo/framework.hpp"

namespace nlmimo {

/// Receive chain as written in a config (dB values normalized to the input
/// power).
struct ChainSpec {
  struct LimiterSpec {
    double threshold_db = 6.0;  // P_th / G^2
    double gain_db = 0.0;
    bool per_dimension = true;
  };
  std::optional<LimiterSpec> limiter;
  std::optional<double> p1db_pb_db;
  std::optional<double> p1db_bb_db;
  int bits = 0;  // 0: no ADC
  QuantizerKind quantizer = QuantizerKind::uniform;
  bool agc = false;

  NonlinearChain build() const;
};

struct BussgangOptions {
  std::size_t samples = kDefaultBussgangSamples;
  std::string method = "mc";  // mc | quadrature
};

struct SimulateOptions {
  std::size_t n_symbols = 10000;
  int n_drops = 20;
  double target_ber = 1e-3;
  double availability = 0.95;
  double snr_lo_db = 0.0;
  double snr_hi_db = 30.0;
  double tol_db = 0.25;
  std::vector<double> snr_points_db;  // extra fixed evaluation points
  std::size_t bussgang_samples = kDefaultBussgangSamples;
  std::optional<double> eta_ideal_db;  // enables the bound column
};

struct DesignRow {
  double beta = 0.5;
  PcScheme pc = PcScheme::none;
  std::optional<double> snr_edge_db;  // link budget
  std::optional<double> gamma_g_db;   // or an explicit intrinsic SNR target
  std::optional<double> eta_ideal_db;  // else estimated
};

struct DesignOptions {
  std::vector<DesignRow> rows;
  std::optional<double> sinr_target_db;  // default: QPSK at target_ber
  double target_ber = 1e-3;
  EtaConfig eta;                         // seed/workers taken from the run
  std::vector<int> bits{1, 2, 3, 4, 5, 6};
  double p1db_min_db = -4.0;
  double p1db_max_db = 10.0;
  double p1db_step_db = 0.1;
  std::size_t samples = 200000;
  std::size_t alpha_drops = 2000;  // adaptive alpha_p ensemble
};

/// Named chain in a sweep.
struct SweepChain {
  std::string name;
  ChainSpec chain;
};

struct SweepOptions {
  std::vector<double> betas;
  std::vector<PcScheme> pc;
  std::vector<SweepChain> chains;
  std::string out_dir;  // per-cell results and completion markers
};

/// Validated run description. Unknown keys anywhere are rejected.
struct RunConfig {
  std::optional<std::uint64_t> seed;
  int workers = 0;
  std::string format = "csv";
  std::string out_path;

  Scenario scenario;
  ChainSpec chain;
  BussgangOptions bussgang;
  SimulateOptions simulate;
  DesignOptions design;
  SweepOptions sweep;

  std::uint64_t require_seed(const std::string& command) const;
};

RunConfig parse_config(const nlohmann::json& j);
/// Canonical form with every default filled in; parse_config(to_json(c))
/// reproduces c.
nlohmann::json to_json(const RunConfig& config);

/// Reads YAML, or JSON when the file starts with '{' or ends in .json.
nlohmann::json read_config_file(const std::string& path);
nlohmann::json yaml_to_json(const std::string& text);

/// FNV-1a 64 of the canonical dump, excluding workers and output settings.
std::string config_hash(const RunConfig& config);

ChainSpec parse_chain(const nlohmann::json& j, const std::string& where = "chain");
nlohmann::json to_json(const ChainSpec& chain);

}  // namespace nlmimo
