#pragma once

// Echo state network: leaky state update, linear readout and readout
// training by least squares (pseudoinverse) or ridge regression.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace rcsense {

enum class Activation { tanh, logistic, relu };

[[nodiscard]] std::string_view to_string(Activation a);
[[nodiscard]] Activation activation_from_string(std::string_view name);
[[nodiscard]] double activate(Activation a, double x) noexcept;

/// Construction parameters for a randomly initialised reservoir.
struct ReservoirParams {
  std::size_t n_reservoir = 100;  // N
  std::size_t n_inputs = 1;       // K
  std::size_t n_outputs = 1;      // L
  double spectral_radius = 0.9;
  double sparsity = 0.1;     // fraction of nonzero entries in W
  double max_density = 0.2;  // construction rejects sparsity above this
  double input_scaling = 1.0;
  double leak_rate = 1.0;
  Activation activation = Activation::tanh;
  bool output_feedback = false;
  double feedback_scaling = 1.0;
  std::uint64_t seed = 0;
};

/// x(n+1) = (1 - a) x(n) + f(W x(n) + W_in u(n+1) + W_fb y(n)).
///
/// The instance owns its state vector, so a network must not be updated
/// from two threads at once.
class EchoStateNetwork {
 public:
  EchoStateNetwork(Eigen::MatrixXd w, Eigen::MatrixXd w_in,
                   std::optional<Eigen::MatrixXd> w_fb, double leak_rate,
                   Activation activation, std::uint64_t seed = 0);

  [[nodiscard]] std::size_t n_reservoir() const noexcept { return w_.rows(); }
  [[nodiscard]] std::size_t n_inputs() const noexcept { return w_in_.cols(); }
  [[nodiscard]] std::size_t n_outputs() const noexcept {
    return w_fb_ ? static_cast<std::size_t>(w_fb_->cols()) : 0;
  }
  [[nodiscard]] const Eigen::MatrixXd& w() const noexcept { return w_; }
  [[nodiscard]] const Eigen::MatrixXd& w_in() const noexcept { return w_in_; }
  [[nodiscard]] const std::optional<Eigen::MatrixXd>& w_fb() const noexcept {
    return w_fb_;
  }
  [[nodiscard]] double leak_rate() const noexcept { return leak_; }
  [[nodiscard]] Activation activation() const noexcept { return activation_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] const Eigen::VectorXd& state() const noexcept { return x_; }

  void set_state(const Eigen::VectorXd& x);
  void reset() { x_.setZero(); }

  /// Advances one step and returns the new state. `y_prev` feeds W_fb and is
  /// ignored when the network has no feedback matrix. Inputs are checked
  /// before the state is touched.
  const Eigen::VectorXd& update_state(
      const Eigen::VectorXd& u_next,
      const std::optional<Eigen::VectorXd>& y_prev = std::nullopt);

 private:
  Eigen::MatrixXd w_;
  Eigen::MatrixXd w_in_;
  std::optional<Eigen::MatrixXd> w_fb_;
  double leak_;
  Activation activation_;
  std::uint64_t seed_;
  Eigen::VectorXd x_;
};

/// Sparse-uniform W rescaled to the requested spectral radius, dense uniform
/// W_in in [-input_scaling, input_scaling], zero state. A W draw whose
/// spectral radius is zero is redrawn from the next sub-seed, at most 10
/// times.
[[nodiscard]] EchoStateNetwork init_reservoir(const ReservoirParams& params);

/// Largest eigenvalue modulus.
[[nodiscard]] double spectral_radius(const Eigen::MatrixXd& m);

/// Column layout of a state matrix: [reservoir | inputs | bias].
struct StateLayout {
  bool include_input = true;
  bool include_bias = true;

  friend bool operator==(const StateLayout&, const StateLayout&) = default;
};

struct StateMatrix {
  Eigen::MatrixXd values;  // rows: time steps after washout
  std::size_t washout = 0;
  std::size_t n_reservoir = 0;
  std::size_t n_inputs = 0;
  StateLayout layout;

  [[nodiscard]] std::size_t rows() const noexcept { return values.rows(); }
  [[nodiscard]] std::size_t cols() const noexcept { return values.cols(); }
};

/// Default washout: 10% of the sequence length.
[[nodiscard]] std::size_t default_washout(std::size_t length) noexcept;

/// Resets the state to zero, drives the network through `inputs` (one row per
/// step) and collects rows after `washout`. `teacher` rows, when given, are
/// the outputs y(n) fed through W_fb (teacher forcing); y before the first
/// step is zero.
[[nodiscard]] StateMatrix run(EchoStateNetwork& esn,
                              const Eigen::MatrixXd& inputs,
                              std::optional<std::size_t> washout = std::nullopt,
                              const std::optional<Eigen::MatrixXd>& teacher =
                                  std::nullopt,
                              StateLayout layout = {});

struct ReadoutWeights {
  Eigen::MatrixXd w_out;  // L x M
  bool rank_deficient = false;

  [[nodiscard]] std::size_t n_outputs() const noexcept { return w_out.rows(); }
  [[nodiscard]] std::size_t n_features() const noexcept {
    return w_out.cols();
  }
};

/// Least-squares readout, W_out = (Y^T S^+)^T arranged as L x M. Uses a
/// column-pivoting QR; rank-deficient systems fall back to the SVD
/// minimum-norm solution and are flagged.
[[nodiscard]] ReadoutWeights train_pinv(const Eigen::MatrixXd& states,
                                        const Eigen::MatrixXd& targets);
[[nodiscard]] ReadoutWeights train_pinv(const StateMatrix& states,
                                        const Eigen::MatrixXd& targets);

/// Solves (S^T S + lambda I) W_out^T = S^T Y through the augmented system
/// [S; sqrt(lambda) I]. lambda = 0 is train_pinv.
[[nodiscard]] ReadoutWeights train_ridge(const Eigen::MatrixXd& states,
                                         const Eigen::MatrixXd& targets,
                                         double lambda);
[[nodiscard]] ReadoutWeights train_ridge(const StateMatrix& states,
                                         const Eigen::MatrixXd& targets,
                                         double lambda);

/// y = W_out * row (identity output function).
[[nodiscard]] Eigen::VectorXd readout(const ReadoutWeights& weights,
                                      const Eigen::VectorXd& state_row);

/// Row-wise readout over a whole state matrix (T x L result).
[[nodiscard]] Eigen::MatrixXd predict(const ReadoutWeights& weights,
                                      const Eigen::MatrixXd& states);

struct EchoStateReport {
  bool converged = false;
  double final_distance = 0.0;
  std::vector<double> distances;  // Euclidean distance after each step
};

/// Drives two copies of `esn` from independent uniform [-1, 1] initial states
/// with the same input for `n_probe` steps (input rows are reused cyclically
/// when shorter) and compares the final states.
[[nodiscard]] EchoStateReport echo_state_check(const EchoStateNetwork& esn,
                                               const Eigen::MatrixXd& inputs,
                                               std::size_t n_probe,
                                               double tolerance,
                                               std::uint64_t seed);

/// sqrt(mean((y - t)^2)) / std(t), pooled over all output columns.
[[nodiscard]] double nrmse(const Eigen::MatrixXd& predicted,
                           const Eigen::MatrixXd& target);

}  // namespace rcsense
