#include "rcsense/serialize.hpp"

#include <json.hpp>

#include "rcsense/error.hpp"
#include "rcsense/io.hpp"

namespace rcsense {

using nlohmann::ordered_json;

namespace {

constexpr int kFormatVersion = 1;

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  j["data"] = flat;
  return j;
}

Eigen::MatrixXd matrix_from(const ordered_json& j, const char* what) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto flat = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(flat.size()) != rows * cols) {
    throw InvalidArgument(std::string(what) + ": data length does not match rows*cols");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    }
  }
  return m;
}

ordered_json parse(const std::string& text, const char* kind) {
  try {
    ordered_json j = ordered_json::parse(text);
    if (j.value("kind", std::string()) != kind) {
      throw InvalidArgument(std::string("expected a '") + kind + "' document");
    }
    if (j.value("format_version", 0) != kFormatVersion) {
      throw InvalidArgument(std::string(kind) + ": unsupported format_version");
    }
    return j;
  } catch (const ordered_json::exception& e) {
    throw InvalidArgument(std::string(kind) + ": " + e.what());
  }
}

template <class F>
auto guarded(const char* kind, F&& f) {
  try {
    return f();
  } catch (const ordered_json::exception& e) {
    throw InvalidArgument(std::string(kind) + ": " + e.what());
  }
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json readout_json(const ReadoutWeights& w) {
  ordered_json j;
  j["w_out"] = matrix_json(w.w_out);
  j["output_function"] = "identity";
  j["rank_deficient"] = w.rank_deficient;
  return j;
}

ReadoutWeights readout_from(const ordered_json& j) {
  ReadoutWeights w;
  w.w_out = matrix_from(j.at("w_out"), "readout");
  w.rank_deficient = j.at("rank_deficient").get<bool>();
  return w;
}

}  // namespace

std::string esn_to_json(const EchoStateNetwork& esn) {
  ordered_json j;
  j["kind"] = "echo_state_network";
  j["format_version"] = kFormatVersion;
  j["n_reservoir"] = esn.n_reservoir();
  j["n_inputs"] = esn.n_inputs();
  j["n_outputs"] = esn.n_outputs();
  j["leak_rate"] = esn.leak_rate();
  j["activation"] = std::string(to_string(esn.activation()));
  j["seed"] = esn.seed();
  j["w"] = matrix_json(esn.w());
  j["w_in"] = matrix_json(esn.w_in());
  j["w_fb"] = esn.w_fb() ? matrix_json(*esn.w_fb()) : ordered_json(nullptr);
  return dump(j);
}

EchoStateNetwork esn_from_json(const std::string& text) {
  const ordered_json j = parse(text, "echo_state_network");
  return guarded("echo_state_network", [&] {
    std::optional<Eigen::MatrixXd> fb;
    if (!j.at("w_fb").is_null()) fb = matrix_from(j.at("w_fb"), "w_fb");
    EchoStateNetwork esn(matrix_from(j.at("w"), "w"), matrix_from(j.at("w_in"), "w_in"),
                         std::move(fb), j.at("leak_rate").get<double>(),
                         activation_from_string(j.at("activation").get<std::string>()),
                         j.at("seed").get<std::uint64_t>());
    if (esn.n_reservoir() != j.at("n_reservoir").get<std::size_t>() ||
        esn.n_inputs() != j.at("n_inputs").get<std::size_t>() ||
        esn.n_outputs() != j.at("n_outputs").get<std::size_t>()) {
      throw InvalidArgument("echo_state_network: dimensions disagree with matrices");
    }
    return esn;
  });
}

std::string readout_to_json(const ReadoutWeights& weights) {
  ordered_json j;
  j["kind"] = "readout";
  j["format_version"] = kFormatVersion;
  const ordered_json body = readout_json(weights);
  for (auto& [k, v] : body.items()) j[k] = v;
  return dump(j);
}

ReadoutWeights readout_from_json(const std::string& text) {
  const ordered_json j = parse(text, "readout");
  return guarded("readout", [&] { return readout_from(j); });
}

std::string delay_model_to_json(const DelayReservoirConfig& config,
                                const ReadoutWeights& weights) {
  config.validate();
  if (config.nonlinearity.name != "tanh" && config.nonlinearity.name != "logistic") {
    throw InvalidArgument("delay model: nonlinearity '" + config.nonlinearity.name +
                          "' cannot be serialised");
  }
  ordered_json j;
  j["kind"] = "delay_reservoir_model";
  j["format_version"] = kFormatVersion;
  ordered_json c;
  c["tau"] = config.tau;
  c["theta"] = config.theta;
  c["gamma"] = config.gamma;
  c["eta"] = config.eta;
  c["nonlinearity"] = config.nonlinearity.name;
  c["saturation_bound"] = config.saturation_bound;
  c["mask_kind"] = std::string(to_string(config.mask.kind()));
  c["mask"] = std::vector<double>(config.mask.values().begin(), config.mask.values().end());
  j["config"] = c;
  j["readout"] = readout_json(weights);
  return dump(j);
}

DelayModel delay_model_from_json(const std::string& text) {
  const ordered_json j = parse(text, "delay_reservoir_model");
  return guarded("delay_reservoir_model", [&] {
    const auto& c = j.at("config");
    DelayReservoirConfig cfg;
    cfg.tau = c.at("tau").get<double>();
    cfg.theta = c.at("theta").get<double>();
    cfg.gamma = c.at("gamma").get<double>();
    cfg.eta = c.at("eta").get<double>();
    cfg.nonlinearity = Nonlinearity::from_name(c.at("nonlinearity").get<std::string>());
    cfg.saturation_bound = c.at("saturation_bound").get<double>();
    cfg.mask = Mask(c.at("mask").get<std::vector<double>>(),
                    mask_kind_from_string(c.at("mask_kind").get<std::string>()));
    cfg.validate();
    return DelayModel{std::move(cfg), readout_from(j.at("readout"))};
  });
}

std::string calibration_to_json(const CalibrationCurve& curve,
                                const CalibrationMetadata& meta) {
  ordered_json j;
  j["kind"] = "calibration_curve";
  j["format_version"] = kFormatVersion;
  j["interpolation"] = "piecewise_linear_log10_concentration";
  j["increasing"] = curve.increasing();
  ordered_json pts = ordered_json::array();
  for (const auto& p : curve.points()) {
    pts.push_back({{"concentration", p.concentration}, {"tau_c", p.tau_c}});
  }
  j["points"] = pts;
  j["metadata"] = {{"scenario", meta.scenario},
                   {"device", meta.device},
                   {"seed", meta.seed},
                   {"replicates", meta.replicates},
                   {"drive_frequency", meta.drive_frequency}};
  return dump(j);
}

CalibrationCurve calibration_from_json(const std::string& text, CalibrationMetadata* meta) {
  const ordered_json j = parse(text, "calibration_curve");
  return guarded("calibration_curve", [&] {
    std::vector<CalibrationPoint> pts;
    for (const auto& p : j.at("points")) {
      pts.push_back({p.at("concentration").get<double>(), p.at("tau_c").get<double>()});
    }
    if (meta != nullptr) {
      const auto& m = j.at("metadata");
      meta->scenario = m.at("scenario").get<std::string>();
      meta->device = m.at("device").get<std::string>();
      meta->seed = m.at("seed").get<unsigned long long>();
      meta->replicates = m.at("replicates").get<std::size_t>();
      meta->drive_frequency = m.at("drive_frequency").get<double>();
    }
    return build_calibration(std::move(pts));
  });
}

void save_text_file(const std::filesystem::path& path, const std::string& text) {
  write_text(path, text);
}

std::string load_text_file(const std::filesystem::path& path) { return read_text(path); }

}  // namespace rcsense
