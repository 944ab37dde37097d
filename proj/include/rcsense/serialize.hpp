#pragma once

// JSON documents for trained models and calibration curves. Matrices are
// stored flattened in row-major order next to their dimensions. Saving a
// loaded document reproduces it byte for byte.

#include <filesystem>
#include <string>

#include "rcsense/analysis.hpp"
#include "rcsense/delay_reservoir.hpp"
#include "rcsense/esn.hpp"

namespace rcsense {

[[nodiscard]] std::string esn_to_json(const EchoStateNetwork& esn);
[[nodiscard]] EchoStateNetwork esn_from_json(const std::string& text);

[[nodiscard]] std::string readout_to_json(const ReadoutWeights& weights);
[[nodiscard]] ReadoutWeights readout_from_json(const std::string& text);

/// Config section plus readout. Only named nonlinearities (tanh, logistic)
/// can be stored.
[[nodiscard]] std::string delay_model_to_json(const DelayReservoirConfig& config,
                                              const ReadoutWeights& weights);
struct DelayModel {
  DelayReservoirConfig config;
  ReadoutWeights weights;
};
[[nodiscard]] DelayModel delay_model_from_json(const std::string& text);

/// Free-form provenance stored with a calibration curve.
struct CalibrationMetadata {
  std::string scenario;
  std::string device;
  unsigned long long seed = 0;
  std::size_t replicates = 0;
  double drive_frequency = 0.0;
};

[[nodiscard]] std::string calibration_to_json(const CalibrationCurve& curve,
                                              const CalibrationMetadata& meta);
[[nodiscard]] CalibrationCurve calibration_from_json(const std::string& text,
                                                     CalibrationMetadata* meta = nullptr);

void save_text_file(const std::filesystem::path& path, const std::string& text);
[[nodiscard]] std::string load_text_file(const std::filesystem::path& path);

}  // namespace rcsense
