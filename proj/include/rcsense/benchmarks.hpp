#pragma once

// Memory and nonlinearity benchmarks shared by the CLI and the tests:
// parity-2 and delayed recall on {0, 1} input sequences.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rcsense/delay_reservoir.hpp"
#include "rcsense/esn.hpp"

namespace rcsense {

/// Uniform random {0, 1} sequence.
[[nodiscard]] std::vector<double> random_bits(std::size_t n, std::uint64_t seed);

/// With s = 2u - 1: t[c] = s[c] * s[c-1], t[0] = s[0]. Even in the inputs,
/// so no linear function of (u[c], u[c-1]) fits it.
[[nodiscard]] Eigen::MatrixXd parity_targets(const std::vector<double>& u);

/// t[c] = u[c - lag], zero before the sequence starts.
[[nodiscard]] Eigen::MatrixXd recall_targets(const std::vector<double>& u,
                                             std::size_t lag);

/// Adds `offset` to every element.
[[nodiscard]] std::vector<double> offset_inputs(const std::vector<double>& u, double offset);

/// Training NRMSE of a ridge readout on the delay reservoir states (after
/// `washout` rows), bias column included.
[[nodiscard]] double delay_task_nrmse(const DelayReservoirConfig& config,
                                      const std::vector<double>& u,
                                      const Eigen::MatrixXd& targets,
                                      std::size_t washout, double ridge);

/// Same for an echo state network with [state | input | bias] features.
[[nodiscard]] double esn_task_nrmse(const ReservoirParams& params,
                                    const std::vector<double>& u,
                                    const Eigen::MatrixXd& targets,
                                    std::size_t washout, double ridge);

/// Least squares on [u[c], 1] only.
[[nodiscard]] double linear_task_nrmse(const std::vector<double>& u,
                                       const Eigen::MatrixXd& targets,
                                       std::size_t washout);

struct BenchmarkRow {
  std::string task;     // parity2 or recall
  std::size_t lag = 0;  // recall lag; 1 for parity2
  std::string backend;  // esn, delay or linear
  double nrmse = 0.0;
};

struct BenchmarkSettings {
  ReservoirParams esn;
  DelayReservoirConfig delay;
  double ridge = 1e-8;
  std::size_t length = 2000;
  std::size_t washout = 200;
  std::vector<std::size_t> recall_lags = {0, 1, 2, 5};
  // Reservoirs are driven with bit + offset. A zero symbol would leave the
  // delay node undriven for that cycle, and with an odd nonlinearity a
  // multiplicative mask then only contributes |m_j|.
  double input_offset = 0.5;
};

/// Parity-2 then each recall lag, every task on esn, delay and linear
/// backends, all driven by one input sequence drawn from `seed`. Targets
/// and the linear baseline use the raw bits.
[[nodiscard]] std::vector<BenchmarkRow> run_benchmarks(const BenchmarkSettings& settings,
                                                       std::uint64_t seed);

}  // namespace rcsense
