#include "rcsense/esn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rcsense/error.hpp"
#include "rcsense/rng.hpp"

namespace rcsense {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::logistic: return "logistic";
    case Activation::relu: return "relu";
  }
  return "tanh";
}

Activation activation_from_string(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "logistic") return Activation::logistic;
  if (name == "relu") return Activation::relu;
  throw InvalidArgument("unknown activation '" + std::string(name) + "'");
}

double activate(Activation a, double x) noexcept {
  switch (a) {
    case Activation::tanh: return std::tanh(x);
    case Activation::logistic: return 1.0 / (1.0 + std::exp(-x));
    case Activation::relu: return x > 0.0 ? x : 0.0;
  }
  return x;
}

EchoStateNetwork::EchoStateNetwork(Eigen::MatrixXd w, Eigen::MatrixXd w_in,
                                   std::optional<Eigen::MatrixXd> w_fb,
                                   double leak_rate, Activation activation,
                                   std::uint64_t seed)
    : w_(std::move(w)),
      w_in_(std::move(w_in)),
      w_fb_(std::move(w_fb)),
      leak_(leak_rate),
      activation_(activation),
      seed_(seed) {
  if (w_.rows() == 0 || w_.rows() != w_.cols()) {
    throw InvalidArgument("esn: W must be square and non-empty");
  }
  if (w_in_.rows() != w_.rows() || w_in_.cols() == 0) {
    throw InvalidArgument("esn: W_in must have N rows and K >= 1 columns");
  }
  if (w_fb_ && (w_fb_->rows() != w_.rows() || w_fb_->cols() == 0)) {
    throw InvalidArgument("esn: W_fb must have N rows and L >= 1 columns");
  }
  if (!(leak_ >= 0.0 && leak_ <= 1.0)) {
    throw InvalidArgument("esn: leak rate must lie in [0, 1]");
  }
  if (!w_.allFinite() || !w_in_.allFinite() || (w_fb_ && !w_fb_->allFinite())) {
    throw InvalidArgument("esn: weight matrices must be finite");
  }
  x_ = Eigen::VectorXd::Zero(w_.rows());
}

void EchoStateNetwork::set_state(const Eigen::VectorXd& x) {
  if (x.size() != w_.rows() || !x.allFinite()) {
    throw InvalidArgument("esn: state must be a finite N-vector");
  }
  x_ = x;
}

const Eigen::VectorXd& EchoStateNetwork::update_state(
    const Eigen::VectorXd& u_next, const std::optional<Eigen::VectorXd>& y_prev) {
  if (u_next.size() != w_in_.cols()) {
    throw InvalidArgument("esn: input has " + std::to_string(u_next.size()) +
                          " entries, expected " +
                          std::to_string(w_in_.cols()));
  }
  if (!u_next.allFinite()) throw InvalidArgument("esn: non-finite input");
  Eigen::VectorXd pre = w_ * x_ + w_in_ * u_next;
  if (w_fb_ && y_prev) {
    if (y_prev->size() != w_fb_->cols()) {
      throw InvalidArgument("esn: feedback vector has wrong dimension");
    }
    if (!y_prev->allFinite()) throw InvalidArgument("esn: non-finite feedback");
    pre += *w_fb_ * *y_prev;
  }
  const Activation act = activation_;
  x_ = (1.0 - leak_) * x_ +
       pre.unaryExpr([act](double v) { return activate(act, v); });
  return x_;
}

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericError("esn: eigenvalue computation failed");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

Eigen::MatrixXd draw_sparse(std::size_t n, double sparsity, Rng& rng) {
  const std::size_t total = n * n;
  const auto nnz = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(sparsity * static_cast<double>(total))));
  // Partial Fisher-Yates over flat indices picks positions without repeats.
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < nnz; ++k) {
    const std::size_t j = k + rng.index(total - k);
    std::swap(idx[k], idx[j]);
    const double value = rng.uniform(-1.0, 1.0);
    w(idx[k] / n, idx[k] % n) = value;
  }
  return w;
}

Eigen::MatrixXd draw_dense(std::size_t rows, std::size_t cols, double scale,
                           Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rng.uniform(-scale, scale);
    }
  }
  return m;
}

}  // namespace

EchoStateNetwork init_reservoir(const ReservoirParams& p) {
  if (p.n_reservoir < 1 || p.n_inputs < 1 || p.n_outputs < 1) {
    throw InvalidArgument("esn: N, K and L must be >= 1");
  }
  if (!(p.spectral_radius > 0.0)) {
    throw InvalidArgument("esn: spectral radius must be > 0");
  }
  if (!(p.sparsity > 0.0 && p.sparsity <= 1.0)) {
    throw InvalidArgument("esn: sparsity must lie in (0, 1]");
  }
  if (p.sparsity > p.max_density) {
    throw InvalidArgument("esn: sparsity " + std::to_string(p.sparsity) +
                          " exceeds the configured maximum density " +
                          std::to_string(p.max_density));
  }

  constexpr int kMaxDraws = 10;
  Eigen::MatrixXd w;
  for (int attempt = 0;; ++attempt) {
    if (attempt == kMaxDraws) {
      throw NumericError("esn: W had zero spectral radius in " +
                         std::to_string(kMaxDraws) + " draws");
    }
    Rng rng(p.seed, 1 + static_cast<std::uint64_t>(attempt));
    w = draw_sparse(p.n_reservoir, p.sparsity, rng);
    const double rho = spectral_radius(w);
    if (rho > 1e-12) {
      w *= p.spectral_radius / rho;
      break;
    }
  }

  Rng in_rng(p.seed, 100);
  Eigen::MatrixXd w_in = draw_dense(p.n_reservoir, p.n_inputs, p.input_scaling, in_rng);
  std::optional<Eigen::MatrixXd> w_fb;
  if (p.output_feedback) {
    Rng fb_rng(p.seed, 200);
    w_fb = draw_dense(p.n_reservoir, p.n_outputs, p.feedback_scaling, fb_rng);
  }
  return EchoStateNetwork(std::move(w), std::move(w_in), std::move(w_fb),
                          p.leak_rate, p.activation, p.seed);
}

std::size_t default_washout(std::size_t length) noexcept { return length / 10; }

StateMatrix run(EchoStateNetwork& esn, const Eigen::MatrixXd& inputs,
                std::optional<std::size_t> washout,
                const std::optional<Eigen::MatrixXd>& teacher,
                StateLayout layout) {
  const auto steps = static_cast<std::size_t>(inputs.rows());
  if (steps == 0) throw InvalidArgument("esn: empty input sequence");
  if (static_cast<std::size_t>(inputs.cols()) != esn.n_inputs()) {
    throw InvalidArgument("esn: input width does not match K");
  }
  const std::size_t skip = washout.value_or(default_washout(steps));
  if (skip >= steps) {
    throw InvalidArgument("esn: washout must be shorter than the input");
  }
  if (teacher) {
    if (static_cast<std::size_t>(teacher->rows()) != steps) {
      throw InvalidArgument("esn: teacher sequence must align with inputs");
    }
    if (esn.w_fb() && teacher->cols() != esn.w_fb()->cols()) {
      throw InvalidArgument("esn: teacher width does not match L");
    }
  }

  const std::size_t n = esn.n_reservoir();
  const std::size_t k = esn.n_inputs();
  const std::size_t cols = n + (layout.include_input ? k : 0) +
                           (layout.include_bias ? 1 : 0);
  StateMatrix out;
  out.values.resize(static_cast<Eigen::Index>(steps - skip),
                    static_cast<Eigen::Index>(cols));
  out.washout = skip;
  out.n_reservoir = n;
  out.n_inputs = k;
  out.layout = layout;

  esn.reset();
  std::optional<Eigen::VectorXd> y_prev;
  if (teacher) y_prev = Eigen::VectorXd::Zero(teacher->cols());
  for (std::size_t t = 0; t < steps; ++t) {
    const Eigen::VectorXd u = inputs.row(static_cast<Eigen::Index>(t)).transpose();
    const Eigen::VectorXd& x = esn.update_state(u, y_prev);
    if (teacher) y_prev = teacher->row(static_cast<Eigen::Index>(t)).transpose();
    if (t < skip) continue;
    const auto r = static_cast<Eigen::Index>(t - skip);
    out.values.row(r).head(static_cast<Eigen::Index>(n)) = x.transpose();
    Eigen::Index c = static_cast<Eigen::Index>(n);
    if (layout.include_input) {
      out.values.row(r).segment(c, static_cast<Eigen::Index>(k)) = u.transpose();
      c += static_cast<Eigen::Index>(k);
    }
    if (layout.include_bias) out.values(r, c) = 1.0;
  }
  return out;
}

namespace {

void check_training_shapes(const Eigen::MatrixXd& s, const Eigen::MatrixXd& y) {
  if (s.rows() == 0 || s.cols() == 0) {
    throw InvalidArgument("readout: empty state matrix");
  }
  if (s.rows() != y.rows()) {
    throw InvalidArgument("readout: state matrix has " +
                          std::to_string(s.rows()) + " rows but targets have " +
                          std::to_string(y.rows()));
  }
  if (y.cols() == 0) throw InvalidArgument("readout: empty targets");
  if (!s.allFinite() || !y.allFinite()) {
    throw InvalidArgument("readout: non-finite training data");
  }
}

}  // namespace

ReadoutWeights train_pinv(const Eigen::MatrixXd& s, const Eigen::MatrixXd& y) {
  check_training_shapes(s, y);
  ReadoutWeights out;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(s);
  if (qr.rank() == s.cols()) {
    out.w_out = qr.solve(y).transpose();
    return out;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.w_out = svd.solve(y).transpose();
  out.rank_deficient = true;
  return out;
}

ReadoutWeights train_pinv(const StateMatrix& s, const Eigen::MatrixXd& y) {
  return train_pinv(s.values, y);
}

ReadoutWeights train_ridge(const Eigen::MatrixXd& s, const Eigen::MatrixXd& y,
                           double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("readout: ridge lambda must be >= 0");
  }
  if (lambda == 0.0) return train_pinv(s, y);
  check_training_shapes(s, y);
  const Eigen::Index m = s.cols();
  Eigen::MatrixXd a(s.rows() + m, m);
  a.topRows(s.rows()) = s;
  a.bottomRows(m) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(s.rows() + m, y.cols());
  b.topRows(y.rows()) = y;
  ReadoutWeights out;
  out.w_out = a.householderQr().solve(b).transpose();
  return out;
}

ReadoutWeights train_ridge(const StateMatrix& s, const Eigen::MatrixXd& y,
                           double lambda) {
  return train_ridge(s.values, y, lambda);
}

Eigen::VectorXd readout(const ReadoutWeights& weights,
                        const Eigen::VectorXd& state_row) {
  if (state_row.size() != weights.w_out.cols()) {
    throw InvalidArgument("readout: state row has " +
                          std::to_string(state_row.size()) +
                          " entries, weights expect " +
                          std::to_string(weights.w_out.cols()));
  }
  return weights.w_out * state_row;
}

Eigen::MatrixXd predict(const ReadoutWeights& weights,
                        const Eigen::MatrixXd& states) {
  if (states.cols() != weights.w_out.cols()) {
    throw InvalidArgument("readout: state matrix width does not match weights");
  }
  return states * weights.w_out.transpose();
}

EchoStateReport echo_state_check(const EchoStateNetwork& esn,
                                 const Eigen::MatrixXd& inputs,
                                 std::size_t n_probe, double tolerance,
                                 std::uint64_t seed) {
  if (n_probe < 10) throw InvalidArgument("echo_state_check: n_probe must be >= 10");
  if (inputs.rows() == 0) throw InvalidArgument("echo_state_check: empty input");
  EchoStateNetwork a = esn;
  EchoStateNetwork b = esn;
  Rng rng(seed, 300);
  Eigen::VectorXd xa(esn.n_reservoir());
  Eigen::VectorXd xb(esn.n_reservoir());
  for (Eigen::Index i = 0; i < xa.size(); ++i) xa(i) = rng.uniform(-1.0, 1.0);
  for (Eigen::Index i = 0; i < xb.size(); ++i) xb(i) = rng.uniform(-1.0, 1.0);
  a.set_state(xa);
  b.set_state(xb);

  EchoStateReport report;
  report.distances.reserve(n_probe);
  for (std::size_t t = 0; t < n_probe; ++t) {
    const Eigen::VectorXd u =
        inputs.row(static_cast<Eigen::Index>(t % inputs.rows())).transpose();
    a.update_state(u);
    b.update_state(u);
    report.distances.push_back((a.state() - b.state()).norm());
  }
  report.final_distance = report.distances.back();
  report.converged = report.final_distance < tolerance;
  return report;
}

double nrmse(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& target) {
  if (predicted.rows() != target.rows() || predicted.cols() != target.cols() ||
      target.size() == 0) {
    throw InvalidArgument("nrmse: shape mismatch");
  }
  const double mse = (predicted - target).squaredNorm() /
                     static_cast<double>(target.size());
  const double mean = target.mean();
  const double var = (target.array() - mean).square().sum() /
                     static_cast<double>(target.size());
  if (var <= 0.0) throw NumericError("nrmse: target has zero variance");
  return std::sqrt(mse / var);
}

}  // namespace rcsense
