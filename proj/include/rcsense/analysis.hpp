#pragma once

// Packet post-processing: Fourier amplitude at the drive frequency,
// exponential decay fit of packet amplitudes, and the time-constant
// calibration curve with its inverse.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "rcsense/signal.hpp"

namespace rcsense {

struct PacketSpectrum {
  double amplitude = 0.0;
  double cycles = 0.0;   // target periods covered by the packet
  bool leakage = false;  // cycles not within 0.01 of an integer
};

/// Single-sided amplitude of the DFT bin nearest `target_freq`, rectangular
/// window, scaled so an integer-cycle tone A*sin(2*pi*f*t) yields A.
/// Packets shorter than two periods are rejected.
[[nodiscard]] PacketSpectrum packet_spectrum(std::span<const double> samples,
                                             double sample_rate,
                                             double target_freq);

[[nodiscard]] double packet_amplitude(const PulsePacket& packet,
                                      double sample_rate, double target_freq);

struct SpectrumEntry {
  double start_time = 0.0;  // s
  double amplitude = 0.0;
};

struct PacketSpectrumSeries {
  double target_frequency = 0.0;
  std::vector<SpectrumEntry> entries;
  std::size_t leakage_count = 0;  // packets with a non-integer period count
  std::size_t skipped = 0;        // packets too short for two periods
};

/// Amplitudes of every packet long enough to analyse, in packet order.
[[nodiscard]] PacketSpectrumSeries packet_spectrum_series(
    std::span<const PulsePacket> packets, double sample_rate,
    double target_freq);

struct DecayFit {
  double a0 = 0.0;
  double tau_c = 0.0;  // s
  double r_squared = 0.0;
};

/// A(t) = A0 exp(-t / tau_c) by least squares on (t, ln A) over entries with
/// A > 0. Needs three such entries; a non-negative slope raises NoDecayError.
[[nodiscard]] DecayFit fit_decay(const PacketSpectrumSeries& series);

struct CalibrationPoint {
  double concentration = 0.0;  // mol/L
  double tau_c = 0.0;          // s

  friend bool operator==(const CalibrationPoint&, const CalibrationPoint&) = default;
};

/// Strictly monotone tau_c(c), piecewise linear in (log10 c, tau_c).
class CalibrationCurve {
 public:
  [[nodiscard]] const std::vector<CalibrationPoint>& points() const noexcept {
    return points_;
  }
  [[nodiscard]] bool increasing() const noexcept { return increasing_; }
  [[nodiscard]] double tau_min() const noexcept;
  [[nodiscard]] double tau_max() const noexcept;

  /// Forward interpolation inside [c_min, c_max].
  [[nodiscard]] double tau_at(double concentration) const;

  friend CalibrationCurve build_calibration(std::vector<CalibrationPoint> pairs);

 private:
  std::vector<CalibrationPoint> points_;
  bool increasing_ = true;
};

/// Sorts by concentration, rejects fewer than two points, repeated or
/// non-positive concentrations, and non-monotone tau_c (MonotonicityError
/// naming the pair).
[[nodiscard]] CalibrationCurve build_calibration(std::vector<CalibrationPoint> pairs);

/// Inverse of the interpolant; exact at nodes. Outside the tau_c range throws
/// OutOfRangeError carrying the nearest endpoint.
[[nodiscard]] double infer_concentration(const CalibrationCurve& curve,
                                         double tau_c);

}  // namespace rcsense
