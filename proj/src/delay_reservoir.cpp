#include "rcsense/delay_reservoir.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "rcsense/error.hpp"

namespace rcsense {

Nonlinearity Nonlinearity::tanh() {
  return {"tanh", [](double x) { return std::tanh(x); }};
}

Nonlinearity Nonlinearity::logistic() {
  return {"logistic", [](double x) { return 1.0 / (1.0 + std::exp(-x)); }};
}

Nonlinearity Nonlinearity::from_name(const std::string& name) {
  if (name == "tanh") return tanh();
  if (name == "logistic") return logistic();
  throw InvalidArgument("unknown nonlinearity '" + name + "'");
}

std::size_t virtual_neuron_count(double tau, double theta) {
  if (!(tau > 0.0) || !(theta > 0.0) || !std::isfinite(tau) ||
      !std::isfinite(theta)) {
    throw InvalidArgument("delay reservoir: tau and theta must be > 0");
  }
  const double ratio = tau / theta;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * ratio) {
    throw InvalidArgument("delay reservoir: tau/theta = " +
                          std::to_string(ratio) + " is not an integer");
  }
  return static_cast<std::size_t>(n);
}

void DelayReservoirConfig::validate() const {
  const std::size_t n = virtual_neuron_count(tau, theta);
  if (mask.size() != n) {
    throw InvalidArgument("delay reservoir: mask length " +
                          std::to_string(mask.size()) + " != tau/theta = " +
                          std::to_string(n));
  }
  if (!std::isfinite(gamma) || !std::isfinite(eta)) {
    throw InvalidArgument("delay reservoir: gamma and eta must be finite");
  }
  if (!nonlinearity.fn) throw InvalidArgument("delay reservoir: missing nonlinearity");
  if (!(saturation_bound > 0.0)) {
    throw InvalidArgument("delay reservoir: saturation bound must be > 0");
  }
}

std::size_t DelayReservoirConfig::n_virtual() const {
  return virtual_neuron_count(tau, theta);
}

VirtualStateMatrix run_delay_reservoir(const DelayReservoirConfig& config,
                                       std::span<const double> inputs) {
  config.validate();
  const std::size_t n = config.n_virtual();
  const std::size_t cycles = inputs.size();

  // Time axis sampled once per virtual node: rate 1/theta, one symbol per
  // n samples. Hold then mask with the shared signal primitives.
  const double rate = 1.0 / config.theta;
  std::vector<double> raw(cycles * n, 0.0);
  for (std::size_t c = 0; c < cycles; ++c) raw[c * n] = inputs[c];
  const Signal held = sample_and_hold(Signal(std::move(raw), rate),
                                      static_cast<double>(n) / rate);
  const Signal masked =
      apply_mask(held, config.mask, 1.0 / rate, static_cast<double>(n) / rate);

  VirtualStateMatrix out;
  out.states.resize(static_cast<Eigen::Index>(cycles),
                    static_cast<Eigen::Index>(n));
  std::vector<double> line(n, 0.0);  // delay-line content one tau earlier
  for (std::size_t c = 0; c < cycles; ++c) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v =
          config.nonlinearity(config.gamma * masked[c * n + j] + config.eta * line[j]);
      if (!std::isfinite(v) || std::abs(v) > config.saturation_bound) {
        throw DivergenceError(c, "delay reservoir diverged at cycle " +
                                     std::to_string(c) + ", node " +
                                     std::to_string(j));
      }
      line[j] = v;
      out.states(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return out;
}

namespace {

Eigen::MatrixXd with_bias(const Eigen::MatrixXd& s) {
  Eigen::MatrixXd a(s.rows(), s.cols() + 1);
  a.leftCols(s.cols()) = s;
  a.col(s.cols()).setOnes();
  return a;
}

}  // namespace

ReadoutWeights train_delay_readout(const VirtualStateMatrix& states,
                                   const Eigen::MatrixXd& targets, double lambda) {
  return train_ridge(with_bias(states.states), targets, lambda);
}

Eigen::MatrixXd predict_delay(const ReadoutWeights& weights,
                              const VirtualStateMatrix& states) {
  return predict(weights, with_bias(states.states));
}

}  // namespace rcsense
