#pragma once

// Experiment configuration read from TOML. Parsing is strict: unknown keys
// and tables are errors, reported before any simulation starts.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rcsense/delay_reservoir.hpp"
#include "rcsense/esn.hpp"
#include "rcsense/sweet.hpp"

namespace rcsense {

enum class Scenario {
  esn_benchmark,
  delay_run,
  sweet_memristor,
  sweet_oect,
  analyze,
  calibrate,
  infer,
};

[[nodiscard]] std::string_view to_string(Scenario s);
[[nodiscard]] Scenario scenario_from_string(std::string_view name);

/// Packet segmentation and spectrum settings shared by analysis commands.
struct PacketAnalysisParams {
  double drive_frequency = 20.0;  // Hz
  double threshold = 2e-3;
  double min_gap = 0.1;  // s
};

struct SweetParams {
  SweetScenario scenario;
  bool optimize = false;
  DriveSearchSpace search;
  std::size_t budget = 20;
};

/// Delay-reservoir settings; the mask is generated from kind and the run seed
/// unless explicit values are given.
struct DelayParams {
  double tau = 0.05;
  double theta = 1e-3;
  double gamma = 0.5;
  double eta = 0.8;
  std::string nonlinearity = "tanh";
  MaskKind mask_kind = MaskKind::chaotic;
  std::vector<double> mask_values;  // used when mask_kind == custom
  double saturation_bound = 1e6;
};

struct EsnBenchmarkParams {
  ReservoirParams esn;
  DelayParams delay;
  double ridge = 1e-8;
  std::size_t length = 2000;
  std::size_t washout = 200;
  std::vector<std::size_t> recall_lags = {0, 1, 2, 5};
  double input_offset = 0.5;  // added to each bit before driving a reservoir
};

struct DelayRunParams {
  DelayParams delay;
  std::string input;  // CSV or WAV of input symbols; empty: random {0,1}
  std::size_t length = 1000;
  std::string task = "parity";  // parity, recall or none
  std::size_t lag = 1;
  std::size_t washout = 100;
  double ridge = 1e-8;
  double input_offset = 0.5;  // added to each symbol before driving the reservoir
};

struct CalibrateParams {
  std::vector<double> concentrations;
  std::vector<double> tau_c;              // given directly, or
  std::vector<std::string> recordings;    // analysed to obtain tau_c
  PacketAnalysisParams analysis;
};

struct InferParams {
  std::string calibration;
  std::optional<double> tau_c;
  std::string recording;
  PacketAnalysisParams analysis;
};

struct AnalyzeParams {
  std::string input;
  PacketAnalysisParams analysis;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::sweet_oect;
  std::uint64_t seed = 0;
  std::string output = "rcsense-out";
  std::filesystem::path base_dir;  // relative input paths resolve here

  SweetParams sweet;
  EsnBenchmarkParams esn_benchmark;
  DelayRunParams delay_run;
  CalibrateParams calibrate;
  InferParams infer;
  AnalyzeParams analyze;

  [[nodiscard]] std::filesystem::path resolve(const std::string& p) const;
};

/// Parses TOML text. `base_dir` anchors relative paths.
[[nodiscard]] ExperimentConfig parse_config(const std::string& text,
                                            const std::filesystem::path& base_dir = {});
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// Defaults for a scenario, as if the config named only the scenario.
[[nodiscard]] ExperimentConfig default_config(Scenario scenario);

/// Fully resolved configuration (defaults filled in) as canonical JSON.
[[nodiscard]] std::string resolved_config_json(const ExperimentConfig& config);

/// Builds the delay reservoir configuration with a mask drawn from `seed`.
[[nodiscard]] DelayReservoirConfig make_delay_config(const DelayParams& p,
                                                     std::uint64_t seed);

}  // namespace rcsense
