#include "rcsense/benchmarks.hpp"

#include "rcsense/error.hpp"
#include "rcsense/rng.hpp"

namespace rcsense {

namespace {

void check_washout(std::size_t washout, std::size_t n) {
  if (washout >= n) {
    throw InvalidArgument("benchmark: washout " + std::to_string(washout) +
                          " leaves no rows of " + std::to_string(n));
  }
}

Eigen::MatrixXd tail(const Eigen::MatrixXd& m, std::size_t washout) {
  return m.bottomRows(m.rows() - static_cast<Eigen::Index>(washout));
}

}  // namespace

std::vector<double> random_bits(std::size_t n, std::uint64_t seed) {
  Rng rng(seed, 0x62697473ULL);
  std::vector<double> u(n);
  for (double& x : u) x = static_cast<double>(rng.index(2));
  return u;
}

std::vector<double> offset_inputs(const std::vector<double>& u, double offset) {
  std::vector<double> x(u);
  for (double& v : x) v += offset;
  return x;
}

Eigen::MatrixXd parity_targets(const std::vector<double>& u) {
  Eigen::MatrixXd t(static_cast<Eigen::Index>(u.size()), 1);
  for (std::size_t c = 0; c < u.size(); ++c) {
    const double s = 2.0 * u[c] - 1.0;
    const double prev = c == 0 ? 1.0 : 2.0 * u[c - 1] - 1.0;
    t(static_cast<Eigen::Index>(c), 0) = s * prev;
  }
  return t;
}

Eigen::MatrixXd recall_targets(const std::vector<double>& u, std::size_t lag) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(u.size()), 1);
  for (std::size_t c = lag; c < u.size(); ++c) {
    t(static_cast<Eigen::Index>(c), 0) = u[c - lag];
  }
  return t;
}

double delay_task_nrmse(const DelayReservoirConfig& config, const std::vector<double>& u,
                        const Eigen::MatrixXd& targets, std::size_t washout, double ridge) {
  check_washout(washout, u.size());
  const VirtualStateMatrix all = run_delay_reservoir(config, u);
  const VirtualStateMatrix s{tail(all.states, washout)};
  const Eigen::MatrixXd y = tail(targets, washout);
  const ReadoutWeights w = train_delay_readout(s, y, ridge);
  return nrmse(predict_delay(w, s), y);
}

double esn_task_nrmse(const ReservoirParams& params, const std::vector<double>& u,
                      const Eigen::MatrixXd& targets, std::size_t washout, double ridge) {
  check_washout(washout, u.size());
  EchoStateNetwork esn = init_reservoir(params);
  Eigen::MatrixXd in(static_cast<Eigen::Index>(u.size()), 1);
  for (std::size_t i = 0; i < u.size(); ++i) in(static_cast<Eigen::Index>(i), 0) = u[i];
  const StateMatrix s = run(esn, in, washout);
  const Eigen::MatrixXd y = tail(targets, washout);
  const ReadoutWeights w = train_ridge(s, y, ridge);
  return nrmse(predict(w, s.values), y);
}

double linear_task_nrmse(const std::vector<double>& u, const Eigen::MatrixXd& targets,
                         std::size_t washout) {
  check_washout(washout, u.size());
  const auto rows = static_cast<Eigen::Index>(u.size() - washout);
  Eigen::MatrixXd x(rows, 2);
  for (Eigen::Index r = 0; r < rows; ++r) {
    x(r, 0) = u[washout + static_cast<std::size_t>(r)];
    x(r, 1) = 1.0;
  }
  const Eigen::MatrixXd y = tail(targets, washout);
  const ReadoutWeights w = train_pinv(x, y);
  return nrmse(predict(w, x), y);
}

std::vector<BenchmarkRow> run_benchmarks(const BenchmarkSettings& st, std::uint64_t seed) {
  const std::vector<double> u = random_bits(st.length, seed);
  const std::vector<double> x = offset_inputs(u, st.input_offset);
  ReservoirParams esn = st.esn;
  esn.seed = seed;
  std::vector<BenchmarkRow> rows;
  auto add = [&](const std::string& task, std::size_t lag, const Eigen::MatrixXd& t) {
    rows.push_back({task, lag, "esn", esn_task_nrmse(esn, x, t, st.washout, st.ridge)});
    rows.push_back({task, lag, "delay", delay_task_nrmse(st.delay, x, t, st.washout, st.ridge)});
    rows.push_back({task, lag, "linear", linear_task_nrmse(u, t, st.washout)});
  };
  add("parity2", 1, parity_targets(u));
  for (std::size_t lag : st.recall_lags) add("recall", lag, recall_targets(u, lag));
  return rows;
}

}  // namespace rcsense
