#pragma once

// Sensing with an environment-coupled device inside a drive plus delayed
// feedback loop. The device output is recorded as packets whose decay,
// amplitude and count carry the environment value.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rcsense/analysis.hpp"
#include "rcsense/delay_reservoir.hpp"
#include "rcsense/signal.hpp"

namespace rcsense {

/// Linear ion-drift memristor with a w(1-w) window. In the loop the
/// environment enters as a series resistance q_coupling * q.
struct MemristorDevice {
  double w = 0.5;
  double r_on = 100.0;     // ohm
  double r_off = 16e3;     // ohm
  double mu = 20.0;        // 1/(V s)
  double q_coupling = 1e3; // ohm per unit q

  void validate() const;
  [[nodiscard]] double resistance() const noexcept {
    return r_on * w + r_off * (1.0 - w);
  }
};

/// w <- clamp(w + mu v w (1-w) dt, 0, 1); returns v / R(w) with the
/// pre-step w. Rejects mu |v| dt > 0.1 (step too coarse for the drift rate).
double memristor_step(MemristorDevice& dev, double v, double dt);

/// First-order gated ionic charging with saturating uptake.
struct OectDevice {
  double charge = 0.0;     // Q, normalised channel ionic charge in [0, 1]
  double tau_ion = 1e-3;   // s
  double gain = 2.0;       // g, gate coupling, 1/V
  double g0 = 1e-3;        // S, baseline channel conductance
  double k_c = 3000.0;     // L/mol, concentration sensitivity
  double v_sd = 0.1;       // V, source-drain bias

  void validate() const;
  /// k_c c / (1 + k_c c).
  [[nodiscard]] double uptake(double concentration) const noexcept;
};

/// Q <- Q + dt (sigmoid(g v_gate) c_eff - Q) / tau_ion; returns
/// I_sd = G0 (1 + Q) V_sd with the updated Q.
double oect_step(OectDevice& dev, double v_gate, double concentration, double dt);

/// current = conductance * v. Used to check loop plumbing.
struct LinearDevice {
  double conductance = 1.0;
};

using Device = std::variant<MemristorDevice, OectDevice, LinearDevice>;

[[nodiscard]] std::string device_name(const Device& device);

/// Puts the device in its undriven steady state for environment value q.
void equilibrate(Device& device, double q);

/// One integration step of length dt with input voltage v; returns current.
double device_current(Device& device, double v, double q, double dt);

/// Current of the undriven device at rest, without advancing it.
[[nodiscard]] double resting_current(const Device& device, double q);

/// Steady-state gate-voltage map of an OECT at a fixed concentration, output
/// in volts relative to the resting level. Usable as a delay-reservoir node.
[[nodiscard]] Nonlinearity oect_node_map(const OectDevice& dev, double concentration,
                                         double transimpedance);

struct SweetLoopConfig {
  DriveSpec drive;
  double delta_tau = 1.2;          // s, feedback delay
  double coupling = 1.0;           // feedback gain into the device input
  double highpass_cutoff = 1.0;    // Hz, capacitive coupling
  double stop_threshold = 2e-3;    // V, window RMS below which the loop stops
  std::size_t max_cycles = 100;
  double transimpedance = 1.0;     // V/A
  double noise_rms = 0.0;          // V, additive output noise (fed back)
  double min_gap = 0.1;            // s, packet segmentation gap
  std::size_t integration_substeps = 1;
  double saturation_bound = 1e6;   // V

  void validate() const;
};

struct SweetTrajectory {
  Signal drive;  // u(t), zero after the last pulse
  Signal xi;     // direct output of the undriven device
  Signal phi;    // driven output minus xi
  std::vector<PulsePacket> packets;
  std::size_t cycles = 0;
  bool hit_max_cycles = false;
};

/// device input(t) = drive(t) + coupling * highpass(output(t - delta_tau)),
/// output = transimpedance * current + noise. Runs whole delta_tau windows
/// and stops after the drive once a window's RMS of phi falls below
/// stop_threshold, or after max_cycles. The delay line starts filled with the
/// resting output. `noise_seed` selects the noise realisation.
[[nodiscard]] SweetTrajectory run_sweet_loop(const Device& device, double q,
                                             const SweetLoopConfig& loop,
                                             double sample_rate,
                                             std::uint64_t noise_seed = 0);

/// Per-trajectory sensing features: decay time constant, amplitude of the
/// first packet at the drive frequency, and packet count. tau_c is 0 when
/// fewer than three packets decay.
struct SensingFeatures {
  double tau_c = 0.0;
  double first_amplitude = 0.0;
  double packet_count = 0.0;
  bool fit_ok = false;
  DecayFit fit;
  PacketSpectrumSeries series;

  [[nodiscard]] std::vector<double> vector() const {
    return {tau_c, first_amplitude, packet_count};
  }
};

[[nodiscard]] SensingFeatures extract_features(const SweetTrajectory& trajectory,
                                               double drive_frequency);

using FeatureVector = std::vector<double>;

/// Separation index v on per-dimension standardised features:
/// (smallest distance between class centroids) /
/// (largest member-to-centroid distance + 1e-12). Dimensions with zero
/// spread are ignored. Needs >= 2 classes with >= 2 vectors each.
[[nodiscard]] double quality_of_sensing(
    const std::map<double, std::vector<FeatureVector>>& classes);

/// Noise seed for replicate r of a sweep seeded with `seed`. Independent of
/// the environment value, so every class sees the same noise realisations.
[[nodiscard]] std::uint64_t replicate_seed(std::uint64_t seed, std::size_t replicate);

/// Features for every (q, replicate) pair, in sweep order.
[[nodiscard]] std::map<double, std::vector<FeatureVector>> sweep_features(
    const Device& device, std::span<const double> env_values,
    std::size_t replicates, const SweetLoopConfig& loop, double sample_rate,
    std::uint64_t seed);

struct DriveSearchSpace {
  DriveSpec base;  // waveform, pulse timing and defaults for candidates
  double amplitude_min = 0.1;
  double amplitude_max = 1.5;
  double frequency_min = 5.0;
  double frequency_max = 50.0;
  bool include_base = true;             // base is candidate 0
  std::vector<DriveSpec> candidates;    // evaluated next, in order
};

struct DriveCandidate {
  DriveSpec drive;
  double v = 0.0;
  bool failed = false;
  std::string error;
};

struct DriveSearchResult {
  DriveSpec best;
  double v = 0.0;
  std::size_t best_index = 0;
  std::vector<DriveCandidate> evaluated;
};

/// Seeded random search: evaluates `budget` candidates (base, explicit
/// candidates, then random amplitude x frequency draws with an integer
/// number of periods per pulse) and returns the first candidate with the
/// largest v. Throws NumericError listing the failures when every
/// candidate fails.
[[nodiscard]] DriveSearchResult optimize_drive(
    const Device& device, std::span<const double> env_values,
    std::size_t replicates, const SweetLoopConfig& loop, double sample_rate,
    const DriveSearchSpace& space, std::size_t budget, std::uint64_t seed);

/// Complete simulation set-up for one device family.
struct SweetScenario {
  Device device;
  SweetLoopConfig loop;
  double sample_rate = 10e3;
  std::vector<double> sweep;
  std::size_t replicates = 3;
};

/// OECT potassium-sensing loop: 0.98 V / 20 Hz / 1 s pulses with 0.2 s gaps,
/// 100 mV source-drain bias, five concentrations from 1e-4 to 1e-1 mol/L.
[[nodiscard]] SweetScenario oect_scenario();

/// Memristor impedance loop: 1 V / 100 Hz / 2 s pulses, series impedance
/// scale q in {1, 3, 9}.
[[nodiscard]] SweetScenario memristor_scenario();

}  // namespace rcsense
