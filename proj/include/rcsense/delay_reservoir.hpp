#pragma once

// Single-node reservoir with a delay line: each input symbol is held for one
// loop length tau, masked in theta-wide slots, and the node response in each
// slot is a virtual neuron.

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "rcsense/esn.hpp"
#include "rcsense/signal.hpp"

namespace rcsense {

/// Named scalar map used as the reservoir node.
struct Nonlinearity {
  std::string name;
  std::function<double(double)> fn;

  double operator()(double x) const { return fn(x); }

  static Nonlinearity tanh();
  static Nonlinearity logistic();
  /// "tanh" or "logistic".
  static Nonlinearity from_name(const std::string& name);
};

struct DelayReservoirConfig {
  double tau = 0.05;    // s, loop length
  double theta = 1e-3;  // s, virtual-node spacing
  double gamma = 0.5;   // input scaling
  double eta = 0.8;     // feedback strength
  Nonlinearity nonlinearity = Nonlinearity::tanh();
  Mask mask = Mask::constant(1, 1.0);
  double saturation_bound = 1e6;

  /// Checks that tau/theta is a positive integer equal to the mask length
  /// and that the scalings are finite.
  void validate() const;
  [[nodiscard]] std::size_t n_virtual() const;
};

/// N = tau / theta; non-integer ratios (relative 1e-9) are rejected.
[[nodiscard]] std::size_t virtual_neuron_count(double tau, double theta);

struct VirtualStateMatrix {
  Eigen::MatrixXd states;  // one row per input symbol, one column per node

  [[nodiscard]] std::size_t rows() const noexcept { return states.rows(); }
  [[nodiscard]] std::size_t cols() const noexcept { return states.cols(); }
};

/// v[c][j] = NL(gamma * m[j] * u[c] + eta * v[c-1][j]), v[-1] = 0.
/// Throws DivergenceError naming the cycle when |v| exceeds the bound.
[[nodiscard]] VirtualStateMatrix run_delay_reservoir(
    const DelayReservoirConfig& config, std::span<const double> inputs);

/// Appends a bias column and trains a ridge readout (lambda = 0 is the
/// pseudoinverse).
[[nodiscard]] ReadoutWeights train_delay_readout(const VirtualStateMatrix& states,
                                                 const Eigen::MatrixXd& targets,
                                                 double lambda);

/// Readout output for every row of `states` (bias appended).
[[nodiscard]] Eigen::MatrixXd predict_delay(const ReadoutWeights& weights,
                                            const VirtualStateMatrix& states);

}  // namespace rcsense
