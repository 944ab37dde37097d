#include "rcsense/sweet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <type_traits>

#include "rcsense/error.hpp"
#include "rcsense/rng.hpp"

namespace rcsense {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be finite and > 0");
  }
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

void MemristorDevice::validate() const {
  require_positive(r_on, "memristor r_on");
  require_positive(r_off, "memristor r_off");
  require_positive(mu, "memristor mu");
  if (!(r_on < r_off)) throw InvalidArgument("memristor needs r_on < r_off");
  if (!(q_coupling >= 0.0) || !std::isfinite(q_coupling)) {
    throw InvalidArgument("memristor q_coupling must be finite and >= 0");
  }
  if (!(w >= 0.0 && w <= 1.0)) {
    throw InvalidArgument("memristor state w must lie in [0, 1]");
  }
}

double memristor_step(MemristorDevice& dev, double v, double dt) {
  require_positive(dt, "memristor step dt");
  if (!std::isfinite(v)) throw InvalidArgument("memristor: non-finite input voltage");
  if (dev.mu * std::abs(v) * dt > 0.1) {
    throw InvalidArgument("memristor: step " + std::to_string(dt) +
                          " s is too coarse for mu*|v| = " +
                          std::to_string(dev.mu * std::abs(v)) +
                          "; increase integration_substeps");
  }
  const double i = v / dev.resistance();
  dev.w = std::clamp(dev.w + dev.mu * v * dev.w * (1.0 - dev.w) * dt, 0.0, 1.0);
  return i;
}

void OectDevice::validate() const {
  require_positive(tau_ion, "oect tau_ion");
  require_positive(g0, "oect g0");
  if (!std::isfinite(gain)) throw InvalidArgument("oect gain must be finite");
  if (!(k_c >= 0.0) || !std::isfinite(k_c)) {
    throw InvalidArgument("oect k_c must be finite and >= 0");
  }
  if (!std::isfinite(v_sd)) throw InvalidArgument("oect v_sd must be finite");
}

double OectDevice::uptake(double concentration) const noexcept {
  const double x = k_c * concentration;
  return x / (1.0 + x);
}

double oect_step(OectDevice& dev, double v_gate, double concentration, double dt) {
  require_positive(dt, "oect step dt");
  if (!(concentration >= 0.0) || !std::isfinite(concentration)) {
    throw InvalidArgument("oect: concentration must be finite and >= 0");
  }
  if (!std::isfinite(v_gate)) throw InvalidArgument("oect: non-finite gate voltage");
  if (dt > dev.tau_ion) {
    throw InvalidArgument("oect: step " + std::to_string(dt) +
                          " s exceeds tau_ion; increase integration_substeps");
  }
  const double target = sigmoid(dev.gain * v_gate) * dev.uptake(concentration);
  dev.charge += dt * (target - dev.charge) / dev.tau_ion;
  return dev.g0 * (1.0 + dev.charge) * dev.v_sd;
}

std::string device_name(const Device& device) {
  return std::visit(overloaded{[](const MemristorDevice&) { return std::string("memristor"); },
                               [](const OectDevice&) { return std::string("oect"); },
                               [](const LinearDevice&) { return std::string("linear"); }},
                    device);
}

void equilibrate(Device& device, double q) {
  std::visit(overloaded{[](MemristorDevice& d) { d.validate(); },
                        [q](OectDevice& d) {
                          d.validate();
                          if (!(q >= 0.0)) {
                            throw InvalidArgument("oect: concentration must be >= 0");
                          }
                          d.charge = 0.5 * d.uptake(q);
                        },
                        [](LinearDevice&) {}},
             device);
}

double device_current(Device& device, double v, double q, double dt) {
  return std::visit(
      overloaded{[&](MemristorDevice& d) {
                   // Series environment resistance; the memristor sees its
                   // share of the applied voltage.
                   const double r = d.resistance();
                   const double vm = v * r / (r + d.q_coupling * q);
                   return memristor_step(d, vm, dt);
                 },
                 [&](OectDevice& d) { return oect_step(d, v, q, dt); },
                 [&](LinearDevice& d) { return d.conductance * v; }},
      device);
}

double resting_current(const Device& device, double q) {
  return std::visit(
      overloaded{[](const MemristorDevice&) { return 0.0; },
                 [q](const OectDevice& d) {
                   return d.g0 * (1.0 + 0.5 * d.uptake(q)) * d.v_sd;
                 },
                 [](const LinearDevice&) { return 0.0; }},
      device);
}

Nonlinearity oect_node_map(const OectDevice& dev, double concentration,
                           double transimpedance) {
  dev.validate();
  const double scale = transimpedance * dev.g0 * dev.v_sd * dev.uptake(concentration);
  const double g = dev.gain;
  return {"oect", [scale, g](double x) { return scale * (sigmoid(g * x) - 0.5); }};
}

void SweetLoopConfig::validate() const {
  drive.validate();
  require_positive(delta_tau, "delta_tau");
  require_positive(highpass_cutoff, "highpass_cutoff");
  require_positive(stop_threshold, "stop_threshold");
  require_positive(min_gap, "min_gap");
  require_positive(saturation_bound, "saturation_bound");
  if (!std::isfinite(coupling)) throw InvalidArgument("coupling must be finite");
  if (!std::isfinite(transimpedance)) {
    throw InvalidArgument("transimpedance must be finite");
  }
  if (!(noise_rms >= 0.0) || !std::isfinite(noise_rms)) {
    throw InvalidArgument("noise_rms must be finite and >= 0");
  }
  if (max_cycles == 0) throw InvalidArgument("max_cycles must be >= 1");
  if (integration_substeps == 0) {
    throw InvalidArgument("integration_substeps must be >= 1");
  }
}

SweetTrajectory run_sweet_loop(const Device& device, double q,
                               const SweetLoopConfig& loop, double sample_rate,
                               std::uint64_t noise_seed) {
  loop.validate();
  const Signal drive = generate_drive(loop.drive, sample_rate);
  const std::size_t window = exact_samples(loop.delta_tau, sample_rate, "delta_tau");
  const std::size_t drive_len = drive.size();

  Device dev = device;
  equilibrate(dev, q);
  Device passive = dev;
  const double rest = loop.transimpedance * resting_current(dev, q);

  const double dt = 1.0 / sample_rate;
  const double h = dt / static_cast<double>(loop.integration_substeps);
  const double rc = 1.0 / (2.0 * std::numbers::pi * loop.highpass_cutoff);
  const double alpha = rc / (rc + dt);
  double hp_y = 0.0;
  double hp_x_prev = rest;
  Rng noise(noise_seed, 0x6e6f697365ULL);

  std::vector<double> out;
  std::vector<double> u;
  std::vector<double> xi;
  std::vector<double> phi;
  const std::size_t reserve = std::max(drive_len, window) + 8 * window;
  out.reserve(reserve);
  u.reserve(reserve);
  xi.reserve(reserve);
  phi.reserve(reserve);

  SweetTrajectory traj{Signal({}, sample_rate), Signal({}, sample_rate),
                       Signal({}, sample_rate), {}, 0, false};
  double last_rms = 0.0;
  for (std::size_t cycle = 0; cycle < loop.max_cycles; ++cycle) {
    double sum_sq = 0.0;
    for (std::size_t k = 0; k < window; ++k) {
      const std::size_t n = cycle * window + k;
      const double delayed = n >= window ? out[n - window] : rest;
      hp_y = alpha * (hp_y + delayed - hp_x_prev);
      hp_x_prev = delayed;
      const double un = n < drive_len ? drive[n] : 0.0;
      const double vin = un + loop.coupling * hp_y;

      double i_drv = 0.0;
      double i_pas = 0.0;
      for (std::size_t s = 0; s < loop.integration_substeps; ++s) {
        i_drv = device_current(dev, vin, q, h);
        i_pas = device_current(passive, 0.0, q, h);
      }
      double o = loop.transimpedance * i_drv;
      if (loop.noise_rms > 0.0) o += loop.noise_rms * noise.normal();
      if (!std::isfinite(o) || std::abs(o) > loop.saturation_bound) {
        throw DivergenceError(cycle, "sweet loop: output left the saturation "
                                     "bound in cycle " + std::to_string(cycle) +
                                     " (t = " + std::to_string(static_cast<double>(n) * dt) +
                                     " s)");
      }
      const double x = loop.transimpedance * i_pas;
      out.push_back(o);
      u.push_back(un);
      xi.push_back(x);
      phi.push_back(o - x);
      sum_sq += (o - x) * (o - x);
    }
    traj.cycles = cycle + 1;
    last_rms = std::sqrt(sum_sq / static_cast<double>(window));
    if ((cycle + 1) * window >= drive_len && last_rms < loop.stop_threshold) break;
  }
  traj.hit_max_cycles = traj.cycles == loop.max_cycles && !(last_rms < loop.stop_threshold);

  traj.drive = Signal(std::move(u), sample_rate);
  traj.xi = Signal(std::move(xi), sample_rate);
  traj.phi = Signal(std::move(phi), sample_rate);
  traj.packets = segment_packets(traj.phi, loop.stop_threshold, loop.min_gap);
  return traj;
}

SensingFeatures extract_features(const SweetTrajectory& trajectory,
                                 double drive_frequency) {
  SensingFeatures f;
  f.series = packet_spectrum_series(trajectory.packets,
                                    trajectory.phi.sample_rate(), drive_frequency);
  f.packet_count = static_cast<double>(trajectory.packets.size());
  if (!f.series.entries.empty()) f.first_amplitude = f.series.entries.front().amplitude;
  try {
    f.fit = fit_decay(f.series);
    f.tau_c = f.fit.tau_c;
    f.fit_ok = true;
  } catch (const NumericError&) {
    f.tau_c = 0.0;
  }
  return f;
}

double quality_of_sensing(const std::map<double, std::vector<FeatureVector>>& classes) {
  if (classes.size() < 2) {
    throw InvalidArgument("quality_of_sensing: need at least 2 environment values");
  }
  std::size_t dim = 0;
  std::size_t total = 0;
  for (const auto& [q, vecs] : classes) {
    if (vecs.size() < 2) {
      throw InvalidArgument("quality_of_sensing: need at least 2 replicates for q = " +
                            std::to_string(q));
    }
    for (const auto& v : vecs) {
      if (dim == 0) dim = v.size();
      if (v.size() != dim || dim == 0) {
        throw InvalidArgument("quality_of_sensing: feature vectors differ in length");
      }
      for (double x : v) {
        if (!std::isfinite(x)) {
          throw InvalidArgument("quality_of_sensing: non-finite feature");
        }
      }
      ++total;
    }
  }

  std::vector<double> mean(dim, 0.0);
  std::vector<double> sd(dim, 0.0);
  for (const auto& [q, vecs] : classes) {
    for (const auto& v : vecs) {
      for (std::size_t d = 0; d < dim; ++d) mean[d] += v[d];
    }
  }
  for (double& m : mean) m /= static_cast<double>(total);
  for (const auto& [q, vecs] : classes) {
    for (const auto& v : vecs) {
      for (std::size_t d = 0; d < dim; ++d) sd[d] += (v[d] - mean[d]) * (v[d] - mean[d]);
    }
  }
  for (double& s : sd) s = std::sqrt(s / static_cast<double>(total));

  auto standardise = [&](const FeatureVector& v) {
    FeatureVector z(dim, 0.0);
    for (std::size_t d = 0; d < dim; ++d) {
      z[d] = sd[d] > 0.0 ? (v[d] - mean[d]) / sd[d] : 0.0;
    }
    return z;
  };
  auto dist = [&](const FeatureVector& a, const FeatureVector& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
    return std::sqrt(s);
  };

  std::vector<FeatureVector> centroids;
  double spread = 0.0;
  for (const auto& [q, vecs] : classes) {
    std::vector<FeatureVector> z;
    FeatureVector c(dim, 0.0);
    for (const auto& v : vecs) {
      z.push_back(standardise(v));
      for (std::size_t d = 0; d < dim; ++d) c[d] += z.back()[d];
    }
    for (double& x : c) x /= static_cast<double>(vecs.size());
    for (const auto& zv : z) spread = std::max(spread, dist(zv, c));
    centroids.push_back(std::move(c));
  }
  double separation = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < centroids.size(); ++a) {
    for (std::size_t b = a + 1; b < centroids.size(); ++b) {
      separation = std::min(separation, dist(centroids[a], centroids[b]));
    }
  }
  return separation / (spread + 1e-12);
}

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t replicate) {
  Rng r(seed, 0x7265706cULL + replicate);
  return r.next();
}

std::map<double, std::vector<FeatureVector>> sweep_features(
    const Device& device, std::span<const double> env_values,
    std::size_t replicates, const SweetLoopConfig& loop, double sample_rate,
    std::uint64_t seed) {
  std::map<double, std::vector<FeatureVector>> out;
  for (double q : env_values) {
    auto& vecs = out[q];
    for (std::size_t r = 0; r < replicates; ++r) {
      const SweetTrajectory t =
          run_sweet_loop(device, q, loop, sample_rate, replicate_seed(seed, r));
      vecs.push_back(extract_features(t, loop.drive.frequency).vector());
    }
  }
  return out;
}

DriveSearchResult optimize_drive(const Device& device,
                                 std::span<const double> env_values,
                                 std::size_t replicates, const SweetLoopConfig& loop,
                                 double sample_rate, const DriveSearchSpace& space,
                                 std::size_t budget, std::uint64_t seed) {
  if (budget == 0) throw InvalidArgument("optimize_drive: budget must be >= 1");
  if (!(space.amplitude_min > 0.0) || !(space.amplitude_max >= space.amplitude_min) ||
      !(space.frequency_min > 0.0) || !(space.frequency_max >= space.frequency_min)) {
    throw InvalidArgument("optimize_drive: invalid amplitude or frequency range");
  }
  space.base.validate();

  std::vector<DriveSpec> queue;
  if (space.include_base) queue.push_back(space.base);
  for (const DriveSpec& d : space.candidates) queue.push_back(d);
  if (queue.size() > budget) queue.resize(budget);

  Rng rng(seed, 0x6f707469ULL);
  const double f_max = std::min(space.frequency_max, sample_rate / 10.0);
  const double per = space.base.pulse_duration;
  while (queue.size() < budget) {
    DriveSpec d = space.base;
    d.amplitude = rng.uniform(space.amplitude_min, space.amplitude_max);
    // Whole periods per pulse keep the packet spectrum free of leakage.
    const double f = rng.uniform(space.frequency_min, f_max);
    d.frequency = std::max(2.0, std::round(f * per)) / per;
    queue.push_back(d);
  }

  DriveSearchResult result;
  bool any = false;
  std::string failures;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    DriveCandidate cand;
    cand.drive = queue[i];
    try {
      SweetLoopConfig cfg = loop;
      cfg.drive = queue[i];
      cand.v = quality_of_sensing(
          sweep_features(device, env_values, replicates, cfg, sample_rate, seed));
    } catch (const Error& e) {
      cand.failed = true;
      cand.error = e.what();
      failures += "\n  candidate " + std::to_string(i) + ": " + e.what();
    }
    if (!cand.failed && (!any || cand.v > result.v)) {
      any = true;
      result.v = cand.v;
      result.best = cand.drive;
      result.best_index = i;
    }
    result.evaluated.push_back(std::move(cand));
  }
  if (!any) throw NumericError("optimize_drive: every candidate failed:" + failures);
  return result;
}

SweetScenario oect_scenario() {
  SweetScenario s;
  OectDevice d;
  d.k_c = 3000.0;
  d.gain = 2.0;
  s.device = d;
  s.sample_rate = 10e3;
  s.loop.drive = DriveSpec{};
  s.loop.delta_tau = s.loop.drive.period();
  s.loop.highpass_cutoff = 1.0;
  s.loop.transimpedance = 1.5e4;
  s.loop.coupling = 1.24;  // small-signal loop gain ~0.93 at 0.1 mol/L
  s.loop.stop_threshold = 2e-3;
  s.loop.noise_rms = 1e-4;
  s.loop.max_cycles = 100;
  s.loop.integration_substeps = 4;  // dt = 25 us, tau_ion / 40
  s.sweep = {1e-4, 5.62341325190349e-4, 3.16227766016838e-3, 1.77827941003892e-2, 1e-1};
  s.replicates = 3;
  return s;
}

SweetScenario memristor_scenario() {
  SweetScenario s;
  s.device = MemristorDevice{};
  s.sample_rate = 5e3;
  s.loop.drive.waveform = Waveform::sine;
  s.loop.drive.amplitude = 1.0;
  s.loop.drive.frequency = 100.0;
  s.loop.drive.pulse_duration = 2.0;
  s.loop.drive.pulse_interval = 0.5;
  s.loop.delta_tau = s.loop.drive.period();
  s.loop.highpass_cutoff = 1.0;
  s.loop.transimpedance = 1563.0;
  s.loop.coupling = 4.6;
  s.loop.stop_threshold = 2e-3;
  s.loop.noise_rms = 1e-4;
  s.loop.max_cycles = 100;
  s.sweep = {1.0, 3.0, 9.0};
  s.replicates = 3;
  return s;
}

}  // namespace rcsense
