#include "rcsense/config.hpp"

#include <json.hpp>

#define TOML_ENABLE_FORMATTERS 0
#include <toml.hpp>

#include <cmath>
#include <set>
#include <sstream>

#include "rcsense/error.hpp"
#include "rcsense/io.hpp"

namespace rcsense {

namespace {

/// Reads keys from one TOML table and remembers which were consumed, so
/// leftovers can be reported as unknown.
class Section {
 public:
  Section(const toml::table* table, std::string name)
      : table_(table), name_(std::move(name)) {}

  [[nodiscard]] bool present() const { return table_ != nullptr; }

  void get(const char* key, double& out) {
    if (const toml::node* n = take(key)) {
      const auto v = n->value<double>();
      if (!v || !n->is_number()) fail(key, "a number");
      out = *v;
    }
  }

  void get(const char* key, std::size_t& out) {
    if (const toml::node* n = take(key)) {
      const auto v = n->value_exact<std::int64_t>();
      if (!v || *v < 0) fail(key, "a non-negative integer");
      out = static_cast<std::size_t>(*v);
    }
  }

  void get(const char* key, std::uint64_t& out, bool) {
    if (const toml::node* n = take(key)) {
      const auto v = n->value_exact<std::int64_t>();
      if (!v || *v < 0) fail(key, "a non-negative integer");
      out = static_cast<std::uint64_t>(*v);
    }
  }

  void get(const char* key, bool& out) {
    if (const toml::node* n = take(key)) {
      const auto v = n->value_exact<bool>();
      if (!v) fail(key, "a boolean");
      out = *v;
    }
  }

  void get(const char* key, std::string& out) {
    if (const toml::node* n = take(key)) {
      const auto v = n->value_exact<std::string>();
      if (!v) fail(key, "a string");
      out = *v;
    }
  }

  void get(const char* key, std::optional<double>& out) {
    if (const toml::node* n = take(key)) {
      const auto v = n->value<double>();
      if (!v || !n->is_number()) fail(key, "a number");
      out = *v;
    }
  }

  void get(const char* key, std::vector<double>& out) {
    if (const toml::node* n = take(key)) {
      const toml::array* a = n->as_array();
      if (a == nullptr) fail(key, "an array of numbers");
      out.clear();
      for (const toml::node& e : *a) {
        const auto v = e.value<double>();
        if (!v || !e.is_number()) fail(key, "an array of numbers");
        out.push_back(*v);
      }
    }
  }

  void get(const char* key, std::vector<std::size_t>& out) {
    if (const toml::node* n = take(key)) {
      const toml::array* a = n->as_array();
      if (a == nullptr) fail(key, "an array of non-negative integers");
      out.clear();
      for (const toml::node& e : *a) {
        const auto v = e.value_exact<std::int64_t>();
        if (!v || *v < 0) fail(key, "an array of non-negative integers");
        out.push_back(static_cast<std::size_t>(*v));
      }
    }
  }

  void get(const char* key, std::vector<std::string>& out) {
    if (const toml::node* n = take(key)) {
      const toml::array* a = n->as_array();
      if (a == nullptr) fail(key, "an array of strings");
      out.clear();
      for (const toml::node& e : *a) {
        const auto v = e.value_exact<std::string>();
        if (!v) fail(key, "an array of strings");
        out.push_back(*v);
      }
    }
  }

  /// Throws on any key that was not read.
  void finish() const {
    if (table_ == nullptr) return;
    for (auto&& [k, v] : *table_) {
      if (used_.count(std::string(k.str())) == 0) {
        throw InvalidArgument("config: unknown key '" + qualified(std::string(k.str())) + "'");
      }
    }
  }

 private:
  const toml::node* take(const char* key) {
    if (table_ == nullptr) return nullptr;
    used_.insert(key);
    return table_->get(key);
  }

  [[noreturn]] void fail(const char* key, const char* expected) const {
    throw InvalidArgument("config: '" + qualified(key) + "' must be " + expected);
  }

  [[nodiscard]] std::string qualified(const std::string& key) const {
    return name_.empty() ? key : name_ + "." + key;
  }

  const toml::table* table_;
  std::string name_;
  std::set<std::string> used_;
};

const toml::table* subtable(const toml::table& root, const char* name) {
  const toml::node* n = root.get(name);
  if (n == nullptr) return nullptr;
  const toml::table* t = n->as_table();
  if (t == nullptr) throw InvalidArgument(std::string("config: '") + name + "' must be a table");
  return t;
}

void read_drive(Section& s, DriveSpec& d) {
  std::string wf(to_string(d.waveform));
  s.get("waveform", wf);
  d.waveform = waveform_from_string(wf);
  s.get("amplitude", d.amplitude);
  s.get("frequency", d.frequency);
  s.get("pulse_duration", d.pulse_duration);
  s.get("pulse_interval", d.pulse_interval);
  s.get("repeats", d.repeats);
}

void read_analysis(Section& s, PacketAnalysisParams& a) {
  s.get("drive_frequency", a.drive_frequency);
  s.get("threshold", a.threshold);
  s.get("min_gap", a.min_gap);
}

void read_delay(Section& s, DelayParams& d) {
  s.get("tau", d.tau);
  s.get("theta", d.theta);
  s.get("gamma", d.gamma);
  s.get("eta", d.eta);
  s.get("nonlinearity", d.nonlinearity);
  std::string kind(to_string(d.mask_kind));
  s.get("mask_kind", kind);
  d.mask_kind = mask_kind_from_string(kind);
  s.get("mask_values", d.mask_values);
  s.get("saturation_bound", d.saturation_bound);
  (void)Nonlinearity::from_name(d.nonlinearity);
  if (d.mask_kind == MaskKind::custom && d.mask_values.empty()) {
    throw InvalidArgument("config: delay.mask_kind = \"custom\" needs delay.mask_values");
  }
  if (d.mask_kind != MaskKind::custom && !d.mask_values.empty()) {
    throw InvalidArgument("config: delay.mask_values requires mask_kind = \"custom\"");
  }
}

void read_sweet(const toml::table& root, ExperimentConfig& cfg, std::set<std::string>& tables) {
  SweetParams& sp = cfg.sweet;
  SweetScenario& sc = sp.scenario;
  tables.insert({"device", "drive", "loop", "sweep", "optimize"});

  Section dev(subtable(root, "device"), "device");
  if (auto* o = std::get_if<OectDevice>(&sc.device)) {
    dev.get("tau_ion", o->tau_ion);
    dev.get("gain", o->gain);
    dev.get("g0", o->g0);
    dev.get("k_c", o->k_c);
    dev.get("v_sd", o->v_sd);
    o->validate();
  } else if (auto* m = std::get_if<MemristorDevice>(&sc.device)) {
    dev.get("w", m->w);
    dev.get("r_on", m->r_on);
    dev.get("r_off", m->r_off);
    dev.get("mu", m->mu);
    dev.get("q_coupling", m->q_coupling);
    m->validate();
  }
  dev.finish();

  Section drv(subtable(root, "drive"), "drive");
  read_drive(drv, sc.loop.drive);
  drv.finish();

  Section lp(subtable(root, "loop"), "loop");
  bool delay_given = false;
  if (lp.present()) delay_given = subtable(root, "loop")->get("delta_tau") != nullptr;
  lp.get("sample_rate", sc.sample_rate);
  lp.get("delta_tau", sc.loop.delta_tau);
  lp.get("coupling", sc.loop.coupling);
  lp.get("highpass_cutoff", sc.loop.highpass_cutoff);
  lp.get("stop_threshold", sc.loop.stop_threshold);
  lp.get("max_cycles", sc.loop.max_cycles);
  lp.get("transimpedance", sc.loop.transimpedance);
  lp.get("noise_rms", sc.loop.noise_rms);
  lp.get("min_gap", sc.loop.min_gap);
  lp.get("integration_substeps", sc.loop.integration_substeps);
  lp.get("saturation_bound", sc.loop.saturation_bound);
  lp.finish();
  // The delay follows the pulse period unless set explicitly.
  if (!delay_given) sc.loop.delta_tau = sc.loop.drive.period();
  if (!(sc.sample_rate > 0.0)) throw InvalidArgument("config: loop.sample_rate must be > 0");
  sc.loop.validate();

  Section sw(subtable(root, "sweep"), "sweep");
  sw.get("values", sc.sweep);
  sw.get("replicates", sc.replicates);
  sw.finish();
  if (sc.sweep.empty()) throw InvalidArgument("config: sweep.values must not be empty");
  if (sc.replicates == 0) throw InvalidArgument("config: sweep.replicates must be >= 1");
  for (double q : sc.sweep) {
    if (!(q >= 0.0) || !std::isfinite(q)) {
      throw InvalidArgument("config: sweep.values must be finite and >= 0");
    }
  }

  sp.search.base = sc.loop.drive;
  Section op(subtable(root, "optimize"), "optimize");
  sp.optimize = op.present();
  op.get("budget", sp.budget);
  op.get("amplitude_min", sp.search.amplitude_min);
  op.get("amplitude_max", sp.search.amplitude_max);
  op.get("frequency_min", sp.search.frequency_min);
  op.get("frequency_max", sp.search.frequency_max);
  op.finish();
  if (sp.optimize && sp.budget == 0) throw InvalidArgument("config: optimize.budget must be >= 1");
}

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::esn_benchmark: return "esn-benchmark";
    case Scenario::delay_run: return "delay-run";
    case Scenario::sweet_memristor: return "sweet-memristor";
    case Scenario::sweet_oect: return "sweet-oect";
    case Scenario::analyze: return "analyze";
    case Scenario::calibrate: return "calibrate";
    case Scenario::infer: return "infer";
  }
  return "?";
}

Scenario scenario_from_string(std::string_view name) {
  for (Scenario s : {Scenario::esn_benchmark, Scenario::delay_run, Scenario::sweet_memristor,
                     Scenario::sweet_oect, Scenario::analyze, Scenario::calibrate,
                     Scenario::infer}) {
    if (to_string(s) == name) return s;
  }
  throw InvalidArgument("config: unknown scenario '" + std::string(name) + "'");
}

std::filesystem::path ExperimentConfig::resolve(const std::string& p) const {
  const std::filesystem::path path(p);
  if (path.is_absolute() || base_dir.empty()) return path;
  return base_dir / path;
}

ExperimentConfig default_config(Scenario scenario) {
  ExperimentConfig cfg;
  cfg.scenario = scenario;
  if (scenario == Scenario::sweet_memristor) cfg.sweet.scenario = memristor_scenario();
  if (scenario == Scenario::sweet_oect) cfg.sweet.scenario = oect_scenario();
  cfg.sweet.search.base = cfg.sweet.scenario.loop.drive;
  return cfg;
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config: TOML syntax error at line " << e.source().begin.line << ": "
        << e.description();
    throw InvalidArgument(msg.str());
  }

  Section top(&root, "");
  std::string scenario_name;
  top.get("scenario", scenario_name);
  if (scenario_name.empty()) throw InvalidArgument("config: 'scenario' is required");
  ExperimentConfig cfg = default_config(scenario_from_string(scenario_name));
  cfg.base_dir = base_dir;
  top.get("seed", cfg.seed, true);
  top.get("output", cfg.output);

  std::set<std::string> tables;
  switch (cfg.scenario) {
    case Scenario::sweet_memristor:
    case Scenario::sweet_oect:
      read_sweet(root, cfg, tables);
      break;
    case Scenario::esn_benchmark: {
      tables.insert({"esn", "delay", "benchmark"});
      auto& p = cfg.esn_benchmark;
      Section e(subtable(root, "esn"), "esn");
      e.get("n_reservoir", p.esn.n_reservoir);
      e.get("spectral_radius", p.esn.spectral_radius);
      e.get("sparsity", p.esn.sparsity);
      e.get("input_scaling", p.esn.input_scaling);
      e.get("leak_rate", p.esn.leak_rate);
      std::string act(to_string(p.esn.activation));
      e.get("activation", act);
      p.esn.activation = activation_from_string(act);
      e.finish();
      Section d(subtable(root, "delay"), "delay");
      read_delay(d, p.delay);
      d.finish();
      (void)make_delay_config(p.delay, 0);  // geometry and mask checks
      Section b(subtable(root, "benchmark"), "benchmark");
      b.get("ridge", p.ridge);
      b.get("length", p.length);
      b.get("washout", p.washout);
      b.get("recall_lags", p.recall_lags);
      b.get("input_offset", p.input_offset);
      b.finish();
      if (p.washout >= p.length) {
        throw InvalidArgument("config: benchmark.washout must be < benchmark.length");
      }
      break;
    }
    case Scenario::delay_run: {
      tables.insert({"delay", "run"});
      auto& p = cfg.delay_run;
      Section d(subtable(root, "delay"), "delay");
      read_delay(d, p.delay);
      d.finish();
      (void)make_delay_config(p.delay, 0);  // geometry and mask checks
      Section r(subtable(root, "run"), "run");
      r.get("input", p.input);
      r.get("length", p.length);
      r.get("task", p.task);
      r.get("lag", p.lag);
      r.get("washout", p.washout);
      r.get("ridge", p.ridge);
      r.get("input_offset", p.input_offset);
      r.finish();
      if (p.task != "parity" && p.task != "recall" && p.task != "none") {
        throw InvalidArgument("config: run.task must be \"parity\", \"recall\" or \"none\"");
      }
      break;
    }
    case Scenario::analyze: {
      tables.insert("analyze");
      Section a(subtable(root, "analyze"), "analyze");
      a.get("input", cfg.analyze.input);
      read_analysis(a, cfg.analyze.analysis);
      a.finish();
      if (cfg.analyze.input.empty()) throw InvalidArgument("config: analyze.input is required");
      break;
    }
    case Scenario::calibrate: {
      tables.insert("calibrate");
      auto& p = cfg.calibrate;
      Section c(subtable(root, "calibrate"), "calibrate");
      c.get("concentrations", p.concentrations);
      c.get("tau_c", p.tau_c);
      c.get("recordings", p.recordings);
      read_analysis(c, p.analysis);
      c.finish();
      const std::size_t n = p.concentrations.size();
      if (p.tau_c.empty() == p.recordings.empty()) {
        throw InvalidArgument("config: calibrate needs exactly one of tau_c or recordings");
      }
      if ((!p.tau_c.empty() && p.tau_c.size() != n) ||
          (!p.recordings.empty() && p.recordings.size() != n)) {
        throw InvalidArgument("config: calibrate lists must match concentrations in length");
      }
      break;
    }
    case Scenario::infer: {
      tables.insert("infer");
      auto& p = cfg.infer;
      Section i(subtable(root, "infer"), "infer");
      i.get("calibration", p.calibration);
      i.get("tau_c", p.tau_c);
      i.get("recording", p.recording);
      read_analysis(i, p.analysis);
      i.finish();
      if (p.calibration.empty()) throw InvalidArgument("config: infer.calibration is required");
      if (p.tau_c.has_value() == !p.recording.empty()) {
        throw InvalidArgument("config: infer needs exactly one of tau_c or recording");
      }
      break;
    }
  }

  for (auto&& [k, v] : root) {
    const std::string key(k.str());
    if (key == "scenario" || key == "seed" || key == "output") continue;
    if (v.is_table()) {
      if (tables.count(key) == 0) {
        throw InvalidArgument("config: unknown table [" + key + "] for scenario " +
                              std::string(to_string(cfg.scenario)));
      }
      continue;
    }
    throw InvalidArgument("config: unknown key '" + key + "'");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  return parse_config(text, path.has_parent_path() ? path.parent_path()
                                                   : std::filesystem::path("."));
}

DelayReservoirConfig make_delay_config(const DelayParams& p, std::uint64_t seed) {
  DelayReservoirConfig c;
  c.tau = p.tau;
  c.theta = p.theta;
  c.gamma = p.gamma;
  c.eta = p.eta;
  c.nonlinearity = Nonlinearity::from_name(p.nonlinearity);
  c.saturation_bound = p.saturation_bound;
  const std::size_t n = virtual_neuron_count(p.tau, p.theta);
  c.mask = p.mask_kind == MaskKind::custom ? Mask(p.mask_values, MaskKind::custom)
                                           : generate_mask(p.mask_kind, n, seed);
  c.validate();
  return c;
}

namespace {

using nlohmann::ordered_json;

ordered_json drive_json(const DriveSpec& d) {
  return {{"waveform", std::string(to_string(d.waveform))},
          {"amplitude", d.amplitude},
          {"frequency", d.frequency},
          {"pulse_duration", d.pulse_duration},
          {"pulse_interval", d.pulse_interval},
          {"repeats", d.repeats}};
}

ordered_json analysis_json(const PacketAnalysisParams& a) {
  return {{"drive_frequency", a.drive_frequency},
          {"threshold", a.threshold},
          {"min_gap", a.min_gap}};
}

ordered_json delay_json(const DelayParams& d) {
  return {{"tau", d.tau},
          {"theta", d.theta},
          {"gamma", d.gamma},
          {"eta", d.eta},
          {"nonlinearity", d.nonlinearity},
          {"mask_kind", std::string(to_string(d.mask_kind))},
          {"mask_values", d.mask_values},
          {"saturation_bound", d.saturation_bound}};
}

}  // namespace

std::string resolved_config_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["scenario"] = std::string(to_string(cfg.scenario));
  j["seed"] = cfg.seed;
  j["output"] = cfg.output;
  switch (cfg.scenario) {
    case Scenario::sweet_memristor:
    case Scenario::sweet_oect: {
      const SweetScenario& sc = cfg.sweet.scenario;
      ordered_json dev;
      if (const auto* o = std::get_if<OectDevice>(&sc.device)) {
        dev = {{"type", "oect"}, {"tau_ion", o->tau_ion}, {"gain", o->gain}, {"g0", o->g0},
               {"k_c", o->k_c}, {"v_sd", o->v_sd}};
      } else if (const auto* m = std::get_if<MemristorDevice>(&sc.device)) {
        dev = {{"type", "memristor"}, {"w", m->w}, {"r_on", m->r_on}, {"r_off", m->r_off},
               {"mu", m->mu}, {"q_coupling", m->q_coupling}};
      }
      j["device"] = dev;
      j["drive"] = drive_json(sc.loop.drive);
      const SweetLoopConfig& l = sc.loop;
      j["loop"] = {{"sample_rate", sc.sample_rate},
                   {"delta_tau", l.delta_tau},
                   {"coupling", l.coupling},
                   {"highpass_cutoff", l.highpass_cutoff},
                   {"stop_threshold", l.stop_threshold},
                   {"max_cycles", l.max_cycles},
                   {"transimpedance", l.transimpedance},
                   {"noise_rms", l.noise_rms},
                   {"min_gap", l.min_gap},
                   {"integration_substeps", l.integration_substeps},
                   {"saturation_bound", l.saturation_bound}};
      j["sweep"] = {{"values", sc.sweep}, {"replicates", sc.replicates}};
      if (cfg.sweet.optimize) {
        const DriveSearchSpace& s = cfg.sweet.search;
        j["optimize"] = {{"budget", cfg.sweet.budget},
                         {"amplitude_min", s.amplitude_min},
                         {"amplitude_max", s.amplitude_max},
                         {"frequency_min", s.frequency_min},
                         {"frequency_max", s.frequency_max}};
      }
      break;
    }
    case Scenario::esn_benchmark: {
      const auto& p = cfg.esn_benchmark;
      j["esn"] = {{"n_reservoir", p.esn.n_reservoir},
                  {"spectral_radius", p.esn.spectral_radius},
                  {"sparsity", p.esn.sparsity},
                  {"input_scaling", p.esn.input_scaling},
                  {"leak_rate", p.esn.leak_rate},
                  {"activation", std::string(to_string(p.esn.activation))}};
      j["delay"] = delay_json(p.delay);
      j["benchmark"] = {{"ridge", p.ridge},
                        {"length", p.length},
                        {"washout", p.washout},
                        {"recall_lags", p.recall_lags},
                        {"input_offset", p.input_offset}};
      break;
    }
    case Scenario::delay_run: {
      const auto& p = cfg.delay_run;
      j["delay"] = delay_json(p.delay);
      j["run"] = {{"input", p.input}, {"length", p.length}, {"task", p.task},
                  {"lag", p.lag}, {"washout", p.washout}, {"ridge", p.ridge},
                  {"input_offset", p.input_offset}};
      break;
    }
    case Scenario::analyze:
      j["analyze"] = analysis_json(cfg.analyze.analysis);
      j["analyze"]["input"] = cfg.analyze.input;
      break;
    case Scenario::calibrate:
      j["calibrate"] = analysis_json(cfg.calibrate.analysis);
      j["calibrate"]["concentrations"] = cfg.calibrate.concentrations;
      j["calibrate"]["tau_c"] = cfg.calibrate.tau_c;
      j["calibrate"]["recordings"] = cfg.calibrate.recordings;
      break;
    case Scenario::infer:
      j["infer"] = analysis_json(cfg.infer.analysis);
      j["infer"]["calibration"] = cfg.infer.calibration;
      j["infer"]["tau_c"] = cfg.infer.tau_c ? ordered_json(*cfg.infer.tau_c) : ordered_json(nullptr);
      j["infer"]["recording"] = cfg.infer.recording;
      break;
  }
  return j.dump(2) + "\n";
}

}  // namespace rcsense
