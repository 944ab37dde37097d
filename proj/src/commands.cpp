#include "rcsense/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "rcsense/analysis.hpp"
#include "rcsense/benchmarks.hpp"
#include "rcsense/io.hpp"
#include "rcsense/parallel.hpp"
#include "rcsense/serialize.hpp"
#include "rcsense/svg.hpp"
#include "rcsense/sweet.hpp"

namespace rcsense {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kIntegrationTolerance = 0.01;

/// Tracks every artifact written under the output directory.
class Artifacts {
 public:
  Artifacts(fs::path root, RunReport& report, std::ostream& log)
      : root_(std::move(root)), report_(report), log_(log) {}

  fs::path add(const std::string& rel) {
    report_.files.push_back(rel);
    return root_ / rel;
  }

  void text(const std::string& rel, const std::string& content) { write_text(add(rel), content); }

  void json(const std::string& rel, const ordered_json& j) { text(rel, j.dump(2) + "\n"); }

  /// Plots are best effort.
  void plot(const std::string& rel, const PlotSpec& spec, const std::vector<PlotSeries>& s) {
    try {
      const std::string svg = render_svg(spec, s);
      write_text(root_ / rel, svg);
      report_.files.push_back(rel);
    } catch (const std::exception& e) {
      warn("plot " + rel + " not written: " + e.what());
    }
  }

  void warn(const std::string& msg) {
    report_.warnings.push_back(msg);
    log_ << "warning: " << msg << "\n";
  }

  std::ostream& log() { return log_; }
  [[nodiscard]] const fs::path& root() const { return root_; }

 private:
  fs::path root_;
  RunReport& report_;
  std::ostream& log_;
};

std::string two_digit(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02zu", i);
  return buf;
}

ordered_json fit_json(const DecayFit& f) {
  return {{"A0", f.a0}, {"tau_c", f.tau_c}, {"r_squared", f.r_squared}};
}

struct PacketAnalysis {
  std::vector<PulsePacket> packets;
  PacketSpectrumSeries series;
};

PacketAnalysis analyse_recording(const Signal& sig, const PacketAnalysisParams& p) {
  PacketAnalysis a;
  a.packets = segment_packets(sig, p.threshold, p.min_gap);
  if (a.packets.empty()) {
    throw NumericError("no packets: the sliding RMS never exceeds threshold " +
                       format_number(p.threshold));
  }
  a.series = packet_spectrum_series(a.packets, sig.sample_rate(), p.drive_frequency);
  return a;
}

PlotSeries amplitude_series(const std::string& label, const PacketSpectrumSeries& s) {
  PlotSeries ps;
  ps.label = label;
  for (const auto& e : s.entries) {
    ps.x.push_back(e.start_time);
    ps.y.push_back(e.amplitude);
  }
  return ps;
}

// ---------------------------------------------------------------- sweet ---

struct SweetRun {
  std::size_t q_index;
  std::size_t replicate;
  double q;
  SweetTrajectory trajectory;
  SensingFeatures features;
  std::optional<SensingFeatures> fine;  // dt/10 integration
};

void cmd_sweet(const ExperimentConfig& cfg, const RunOptions& opts, Artifacts& out) {
  const SweetScenario& sc = cfg.sweet.scenario;
  const bool oect = std::holds_alternative<OectDevice>(sc.device);
  const std::string q_label = oect ? "concentration (mol/L)" : "series impedance scale q";
  const std::size_t reps = sc.replicates;
  const std::size_t n_runs = sc.sweep.size() * reps;

  ordered_json fits = ordered_json::array();
  std::string fits_csv =
      "q,replicate,tau_c,A0,r_squared,fit_ok,packets,first_amplitude,cycles,hit_max_cycles\n";
  std::map<double, std::vector<FeatureVector>> classes;
  std::vector<std::vector<double>> taus(sc.sweep.size());
  std::vector<PlotSeries> amp_plot;
  ordered_json integration = ordered_json::array();
  double worst_integration = 0.0;
  std::size_t leakage = 0;
  std::size_t capped = 0;

  auto produce = [&](std::size_t i) -> SweetRun {
    const std::size_t qi = i / reps;
    const std::size_t rep = i % reps;
    const double q = sc.sweep[qi];
    try {
      const std::uint64_t ns = replicate_seed(cfg.seed, rep);
      SweetTrajectory traj = run_sweet_loop(sc.device, q, sc.loop, sc.sample_rate, ns);
      SensingFeatures feats = extract_features(traj, sc.loop.drive.frequency);
      std::optional<SensingFeatures> fine;
      if (opts.validate_integration) {
        SweetLoopConfig fl = sc.loop;
        fl.integration_substeps *= 10;
        const SweetTrajectory t = run_sweet_loop(sc.device, q, fl, sc.sample_rate, ns);
        fine = extract_features(t, sc.loop.drive.frequency);
      }
      return SweetRun{qi, rep, q, std::move(traj), std::move(feats), std::move(fine)};
    } catch (const Error& e) {
      throw Error(e.kind(), "run q=" + format_number(q) + " replicate " +
                                std::to_string(rep) + ": " + e.what());
    }
  };

  auto consume = [&](std::size_t, SweetRun&& r) {
    const std::string stem = "runs/q" + two_digit(r.q_index) + "_r" + two_digit(r.replicate);
    write_trajectory_csv(out.add(stem + "_trajectory.csv"), r.trajectory);
    write_analysis_csv(out.add(stem + "_analysis.csv"), r.features.series);
    const SensingFeatures& f = r.features;
    leakage += f.series.leakage_count;
    if (r.trajectory.hit_max_cycles) ++capped;
    fits_csv += format_number(r.q) + "," + std::to_string(r.replicate) + "," +
                format_number(f.tau_c) + "," + format_number(f.fit.a0) + "," +
                format_number(f.fit.r_squared) + "," + (f.fit_ok ? "1" : "0") + "," +
                std::to_string(r.trajectory.packets.size()) + "," +
                format_number(f.first_amplitude) + "," + std::to_string(r.trajectory.cycles) +
                "," + (r.trajectory.hit_max_cycles ? "1" : "0") + "\n";
    classes[r.q].push_back(f.vector());
    if (f.fit_ok) taus[r.q_index].push_back(f.tau_c);
    if (r.replicate == 0) {
      amp_plot.push_back(amplitude_series("q = " + format_number(r.q), f.series));
    }
    if (r.fine) {
      double rel = 0.0;
      if (f.fit_ok && r.fine->fit_ok) {
        rel = std::abs(r.fine->tau_c - f.tau_c) / f.tau_c;
      } else if (f.fit_ok != r.fine->fit_ok) {
        rel = std::numeric_limits<double>::infinity();
      }
      worst_integration = std::max(worst_integration, rel);
      integration.push_back({{"q", r.q},
                             {"replicate", r.replicate},
                             {"tau_c", f.tau_c},
                             {"tau_c_fine", r.fine->tau_c},
                             {"relative_difference", std::isfinite(rel) ? ordered_json(rel)
                                                                        : ordered_json(nullptr)}});
    }
    out.log() << "run q=" << format_number(r.q) << " replicate " << r.replicate
              << ": packets=" << r.trajectory.packets.size()
              << " tau_c=" << format_number(f.tau_c) << "\n";
  };

  ordered_parallel<SweetRun>(n_runs, opts.jobs, produce, consume);

  out.text("fits.csv", fits_csv);
  if (leakage > 0) {
    out.warn(std::to_string(leakage) +
             " packets span a non-integer number of drive periods (spectral leakage)");
  }
  if (capped > 0) {
    out.warn(std::to_string(capped) + " runs stopped at max_cycles before decaying");
  }

  // Per-q time constant: mean over replicates with a valid fit.
  std::vector<CalibrationPoint> points;
  ordered_json per_q = ordered_json::array();
  for (std::size_t k = 0; k < sc.sweep.size(); ++k) {
    ordered_json e = {{"q", sc.sweep[k]}, {"fits", taus[k].size()}};
    if (taus[k].empty()) {
      out.warn("q=" + format_number(sc.sweep[k]) + ": no replicate produced a decay fit");
      e["tau_c"] = nullptr;
    } else {
      double m = 0.0;
      for (double t : taus[k]) m += t;
      m /= static_cast<double>(taus[k].size());
      e["tau_c"] = m;
      points.push_back({sc.sweep[k], m});
    }
    per_q.push_back(e);
  }

  if (points.size() >= 2) {
    const CalibrationCurve curve = build_calibration(points);
    CalibrationMetadata meta{std::string(to_string(cfg.scenario)), device_name(sc.device),
                             cfg.seed, reps, sc.loop.drive.frequency};
    out.text("calibration.json", calibration_to_json(curve, meta));
  } else {
    out.warn("calibration skipped: needs at least 2 sweep values with a decay fit, have " +
             std::to_string(points.size()));
  }

  ordered_json quality = {{"features", {"tau_c", "first_amplitude", "packet_count"}},
                          {"per_q", per_q}};
  if (classes.size() < 2 || reps < 2) {
    quality["status"] = "rejected";
    quality["reason"] = classes.size() < 2 ? "quality index needs at least 2 environment values"
                                           : "quality index needs at least 2 replicates";
    quality["v"] = nullptr;
    out.warn(quality["reason"].get<std::string>());
  } else {
    quality["status"] = "ok";
    quality["v"] = quality_of_sensing(classes);
    out.log() << "quality of sensing v=" << format_number(quality["v"].get<double>()) << "\n";
  }
  out.json("quality.json", quality);

  if (cfg.sweet.optimize) {
    DriveSearchSpace space = cfg.sweet.search;
    space.base = sc.loop.drive;
    const DriveSearchResult res = optimize_drive(sc.device, sc.sweep, reps, sc.loop,
                                                 sc.sample_rate, space, cfg.sweet.budget,
                                                 cfg.seed);
    ordered_json cands = ordered_json::array();
    for (const auto& c : res.evaluated) {
      ordered_json e = {{"amplitude", c.drive.amplitude}, {"frequency", c.drive.frequency},
                        {"failed", c.failed}};
      e["v"] = c.failed ? ordered_json(nullptr) : ordered_json(c.v);
      if (c.failed) e["error"] = c.error;
      cands.push_back(e);
    }
    out.json("optimize.json", {{"best_index", res.best_index},
                               {"best", {{"amplitude", res.best.amplitude},
                                         {"frequency", res.best.frequency}}},
                               {"v", res.v},
                               {"candidates", cands}});
  }

  PlotSpec amp{"Packet amplitude at " + format_number(sc.loop.drive.frequency) + " Hz",
               "packet start time (s)", "amplitude (V)", false, true};
  out.plot("amplitude_vs_time.svg", amp, amp_plot);
  PlotSeries tau_series{"tau_c", {}, {}, true, true};
  for (const auto& p : points) {
    tau_series.x.push_back(p.concentration);
    tau_series.y.push_back(p.tau_c);
  }
  PlotSpec tau_spec{"Decay time constant", q_label, "tau_c (s)", true, false};
  out.plot("tau_vs_concentration.svg", tau_spec, {tau_series});

  if (opts.validate_integration) {
    const bool pass = worst_integration <= kIntegrationTolerance;
    out.json("integration.json", {{"substeps", sc.loop.integration_substeps},
                                  {"fine_substeps", sc.loop.integration_substeps * 10},
                                  {"tolerance", kIntegrationTolerance},
                                  {"max_relative_difference",
                                   std::isfinite(worst_integration) ? ordered_json(worst_integration)
                                                                    : ordered_json(nullptr)},
                                  {"pass", pass},
                                  {"runs", integration}});
    if (!pass) {
      throw NumericError("integration check failed: tau_c at dt and dt/10 differ by " +
                         format_number(worst_integration * 100.0) + "%");
    }
  }
}

// -------------------------------------------------------------- analyze ---

void cmd_analyze(const ExperimentConfig& cfg, Artifacts& out) {
  const auto& p = cfg.analyze;
  const Signal sig = read_recording(cfg.resolve(p.input));
  const PacketAnalysis a = analyse_recording(sig, p.analysis);
  write_analysis_csv(out.add("analysis.csv"), a.series);
  if (a.series.leakage_count > 0) {
    out.warn(std::to_string(a.series.leakage_count) +
             " packets span a non-integer number of periods (spectral leakage)");
  }
  if (a.series.skipped > 0) {
    out.warn(std::to_string(a.series.skipped) + " packets shorter than two periods skipped");
  }
  PlotSpec spec{"Packet amplitude at " + format_number(p.analysis.drive_frequency) + " Hz",
                "packet start time (s)", "amplitude", false, true};
  out.plot("amplitude_vs_time.svg", spec, {amplitude_series("packets", a.series)});
  const DecayFit fit = fit_decay(a.series);
  write_fit_csv(out.add("fit.csv"), fit);
  ordered_json j = fit_json(fit);
  j["packets"] = a.packets.size();
  j["analysed_packets"] = a.series.entries.size();
  j["drive_frequency"] = p.analysis.drive_frequency;
  j["sample_rate"] = sig.sample_rate();
  out.json("fit.json", j);
  out.log() << "packets=" << a.packets.size() << " tau_c=" << format_number(fit.tau_c) << "\n";
}

// ------------------------------------------------------------ benchmark ---

void cmd_esn_benchmark(const ExperimentConfig& cfg, Artifacts& out) {
  const auto& p = cfg.esn_benchmark;
  BenchmarkSettings st;
  st.esn = p.esn;
  st.delay = make_delay_config(p.delay, cfg.seed);
  st.ridge = p.ridge;
  st.length = p.length;
  st.washout = p.washout;
  st.recall_lags = p.recall_lags;
  st.input_offset = p.input_offset;
  const auto rows = run_benchmarks(st, cfg.seed);
  std::string csv = "task,lag,backend,nrmse\n";
  for (const auto& r : rows) {
    csv += r.task + "," + std::to_string(r.lag) + "," + r.backend + "," +
           format_number(r.nrmse) + "\n";
    out.log() << r.task << " lag " << r.lag << " " << r.backend << ": "
              << format_number(r.nrmse) << "\n";
  }
  out.text("nrmse.csv", csv);
}

// ------------------------------------------------------------ delay-run ---

void cmd_delay_run(const ExperimentConfig& cfg, Artifacts& out) {
  const auto& p = cfg.delay_run;
  const DelayReservoirConfig dc = make_delay_config(p.delay, cfg.seed);
  std::vector<double> u;
  if (p.input.empty()) {
    u = random_bits(p.length, cfg.seed);
  } else {
    const Signal s = read_recording(cfg.resolve(p.input));
    u.assign(s.samples().begin(), s.samples().end());
  }
  const VirtualStateMatrix states = run_delay_reservoir(dc, offset_inputs(u, p.input_offset));
  {
    std::string csv = "symbol";
    for (std::size_t j = 0; j < states.cols(); ++j) csv += ",node_" + std::to_string(j);
    csv += "\n";
    for (Eigen::Index r = 0; r < states.states.rows(); ++r) {
      csv += std::to_string(r);
      for (Eigen::Index c = 0; c < states.states.cols(); ++c) {
        csv += "," + format_number(states.states(r, c));
      }
      csv += "\n";
    }
    out.text("virtual_states.csv", csv);
  }
  ordered_json summary = {{"n_virtual", states.cols()}, {"symbols", states.rows()},
                          {"task", p.task}};
  if (p.task != "none") {
    if (p.washout >= u.size()) throw InvalidArgument("run.washout must be < number of symbols");
    const Eigen::MatrixXd targets =
        p.task == "parity" ? parity_targets(u) : recall_targets(u, p.lag);
    const auto keep = static_cast<Eigen::Index>(u.size() - p.washout);
    const VirtualStateMatrix s{states.states.bottomRows(keep)};
    const Eigen::MatrixXd y = targets.bottomRows(keep);
    const ReadoutWeights w = train_delay_readout(s, y, p.ridge);
    const double e = nrmse(predict_delay(w, s), y);
    out.text("model.json", delay_model_to_json(dc, w));
    summary["lag"] = p.task == "recall" ? p.lag : 1;
    summary["nrmse"] = e;
    summary["rank_deficient"] = w.rank_deficient;
    out.log() << p.task << " nrmse=" << format_number(e) << "\n";
  }
  out.json("summary.json", summary);
}

// ------------------------------------------------------ calibrate/infer ---

void cmd_calibrate(const ExperimentConfig& cfg, Artifacts& out) {
  const auto& p = cfg.calibrate;
  std::vector<CalibrationPoint> pts;
  for (std::size_t i = 0; i < p.concentrations.size(); ++i) {
    double tau = 0.0;
    if (!p.tau_c.empty()) {
      tau = p.tau_c[i];
    } else {
      try {
        const Signal s = read_recording(cfg.resolve(p.recordings[i]));
        tau = fit_decay(analyse_recording(s, p.analysis).series).tau_c;
      } catch (const Error& e) {
        throw Error(e.kind(), "recording '" + p.recordings[i] + "': " + e.what());
      }
    }
    pts.push_back({p.concentrations[i], tau});
  }
  const CalibrationCurve curve = build_calibration(pts);
  CalibrationMetadata meta{"calibrate", "", cfg.seed, 1, p.analysis.drive_frequency};
  out.text("calibration.json", calibration_to_json(curve, meta));
  PlotSeries s{"tau_c", {}, {}, true, true};
  for (const auto& pt : curve.points()) {
    s.x.push_back(pt.concentration);
    s.y.push_back(pt.tau_c);
  }
  out.plot("tau_vs_concentration.svg",
           {"Calibration", "concentration (mol/L)", "tau_c (s)", true, false}, {s});
}

void cmd_infer(const ExperimentConfig& cfg, Artifacts& out) {
  const auto& p = cfg.infer;
  const CalibrationCurve curve = calibration_from_json(read_text(cfg.resolve(p.calibration)));
  double tau = 0.0;
  if (p.tau_c) {
    tau = *p.tau_c;
  } else {
    const Signal s = read_recording(cfg.resolve(p.recording));
    tau = fit_decay(analyse_recording(s, p.analysis).series).tau_c;
  }
  double c = 0.0;
  try {
    c = infer_concentration(curve, tau);
  } catch (const OutOfRangeError& e) {
    throw OutOfRangeError(e.nearest_concentration(), e.nearest_tau_c(),
                          std::string(e.what()) + "; nearest calibrated point c=" +
                              format_number(e.nearest_concentration()) +
                              " mol/L, tau_c=" + format_number(e.nearest_tau_c()) + " s");
  }
  out.json("inference.json", {{"tau_c", tau}, {"concentration", c}});
  out.log() << "tau_c=" << format_number(tau) << " s -> concentration "
            << format_number(c) << " mol/L\n";
}

ordered_json read_manifest(const fs::path& dir) {
  const fs::path p = dir / "manifest.json";
  if (!fs::exists(p)) throw IoError("no manifest.json in '" + dir.string() + "'");
  try {
    return ordered_json::parse(read_text(p));
  } catch (const ordered_json::exception& e) {
    throw IoError("manifest.json in '" + dir.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return 1;
    case ErrorKind::numeric: return 2;
    case ErrorKind::io: return 3;
  }
  return 2;
}

ExperimentConfig apply_options(ExperimentConfig config, const RunOptions& opts) {
  if (opts.seed) config.seed = *opts.seed;
  if (!opts.out_dir.empty()) config.output = opts.out_dir.generic_string();
  return config;
}

RunReport run_experiment(const ExperimentConfig& config, const RunOptions& opts,
                         std::ostream& log) {
  if (opts.jobs == 0) throw InvalidArgument("--jobs must be >= 1");
  const ExperimentConfig cfg = apply_options(config, opts);
  RunReport report;
  report.out_dir = opts.out_dir.empty() ? fs::path(cfg.output) : opts.out_dir;
  std::error_code ec;
  fs::create_directories(report.out_dir, ec);
  if (ec) throw IoError("cannot create '" + report.out_dir.string() + "': " + ec.message());
  Artifacts out(report.out_dir, report, log);

  switch (cfg.scenario) {
    case Scenario::sweet_memristor:
    case Scenario::sweet_oect: cmd_sweet(cfg, opts, out); break;
    case Scenario::analyze: cmd_analyze(cfg, out); break;
    case Scenario::esn_benchmark: cmd_esn_benchmark(cfg, out); break;
    case Scenario::delay_run: cmd_delay_run(cfg, out); break;
    case Scenario::calibrate: cmd_calibrate(cfg, out); break;
    case Scenario::infer: cmd_infer(cfg, out); break;
  }

  std::vector<std::string> files = report.files;
  std::sort(files.begin(), files.end());
  ordered_json list = ordered_json::array();
  for (const auto& f : files) {
    const fs::path p = report.out_dir / f;
    list.push_back({{"path", f}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p)}});
  }
  ordered_json manifest;
  manifest["tool"] = "rcsense";
  manifest["version"] = kVersion;
  manifest["scenario"] = std::string(to_string(cfg.scenario));
  manifest["seed"] = cfg.seed;
  manifest["validate_integration"] = opts.validate_integration;
  manifest["config"] = ordered_json::parse(resolved_config_json(cfg));
  manifest["files"] = list;
  write_text(report.out_dir / "manifest.json", manifest.dump(2) + "\n");
  return report;
}

CheckReport check_experiment(const ExperimentConfig& config, const RunOptions& opts,
                             std::ostream& log) {
  const ExperimentConfig cfg = apply_options(config, opts);
  const fs::path dir = opts.out_dir.empty() ? fs::path(cfg.output) : opts.out_dir;
  const ordered_json recorded = read_manifest(dir);
  CheckReport rep;

  std::map<std::string, std::string> expected;
  for (const auto& f : recorded.at("files")) {
    const std::string rel = f.at("path").get<std::string>();
    const std::string digest = f.at("sha256").get<std::string>();
    expected[rel] = digest;
    const fs::path p = dir / rel;
    if (!fs::exists(p)) {
      rep.problems.push_back("missing: " + rel);
    } else if (sha256_file(p) != digest) {
      rep.problems.push_back("modified since the run: " + rel);
    }
  }
  if (recorded.at("config") != ordered_json::parse(resolved_config_json(cfg))) {
    rep.problems.push_back("config differs from the one recorded in the manifest");
  }

  const fs::path scratch = dir / ".rcsense-check";
  fs::remove_all(scratch);
  RunOptions o = opts;
  o.out_dir = scratch;
  std::ostringstream quiet;
  {
    ExperimentConfig c = cfg;
    const RunReport rerun = run_experiment(c, o, quiet);
    (void)rerun;
  }
  const ordered_json fresh = read_manifest(scratch);
  std::set<std::string> seen;
  for (const auto& f : fresh.at("files")) {
    const std::string rel = f.at("path").get<std::string>();
    seen.insert(rel);
    const auto it = expected.find(rel);
    if (it == expected.end()) {
      rep.problems.push_back("re-run produced a file not in the manifest: " + rel);
    } else if (it->second != f.at("sha256").get<std::string>()) {
      rep.problems.push_back("re-run differs: " + rel);
    }
  }
  for (const auto& [rel, d] : expected) {
    if (seen.count(rel) == 0) rep.problems.push_back("re-run did not produce: " + rel);
  }
  fs::remove_all(scratch);
  rep.ok = rep.problems.empty();
  for (const auto& p : rep.problems) log << "check: " << p << "\n";
  log << "check: " << expected.size() << " files, "
      << (rep.ok ? "all digests match" : std::to_string(rep.problems.size()) + " problems")
      << "\n";
  return rep;
}

}  // namespace rcsense
