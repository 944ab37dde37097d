#pragma once

// Signals, drive generation, sample-and-hold, masking and packet
// segmentation shared by the reservoir and sensing modules.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace rcsense {

/// Uniformly sampled real time series. Samples are finite and the rate is
/// positive; both are checked on construction.
class Signal {
 public:
  Signal(std::vector<double> samples, double sample_rate);

  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  [[nodiscard]] bool empty() const noexcept { return samples_.empty(); }
  [[nodiscard]] double sample_rate() const noexcept { return sample_rate_; }
  [[nodiscard]] double dt() const noexcept { return 1.0 / sample_rate_; }
  [[nodiscard]] double duration() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }
  [[nodiscard]] double time(std::size_t i) const noexcept {
    return static_cast<double>(i) / sample_rate_;
  }
  [[nodiscard]] double operator[](std::size_t i) const noexcept {
    return samples_[i];
  }
  [[nodiscard]] std::span<const double> samples() const noexcept {
    return samples_;
  }

  /// Sub-signal [first, first + count).
  [[nodiscard]] Signal slice(std::size_t first, std::size_t count) const;

  friend bool operator==(const Signal&, const Signal&) = default;

 private:
  std::vector<double> samples_;
  double sample_rate_;
};

enum class MaskKind { binary, sinusoidal, chaotic, custom };

[[nodiscard]] std::string_view to_string(MaskKind kind);
[[nodiscard]] MaskKind mask_kind_from_string(std::string_view name);

/// Per-virtual-neuron modulation values.
class Mask {
 public:
  /// Rejects empty or non-finite values, binary masks with entries outside
  /// {-1, +1}, and masks of length >= 2 whose entries are all equal.
  Mask(std::vector<double> values, MaskKind kind);

  /// Constant mask; only meant for tests and identity checks.
  static Mask constant(std::size_t n, double value);

  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] MaskKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::span<const double> values() const noexcept {
    return values_;
  }
  [[nodiscard]] double operator[](std::size_t j) const noexcept {
    return values_[j];
  }

  [[nodiscard]] Mask negated() const;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  Mask() = default;
  std::vector<double> values_;
  MaskKind kind_ = MaskKind::custom;
};

enum class Waveform { sine, square };

[[nodiscard]] std::string_view to_string(Waveform waveform);
[[nodiscard]] Waveform waveform_from_string(std::string_view name);

/// Pulsed drive. Defaults are the OECT query drive: 980 mV, 20 Hz sine,
/// 1 s pulses separated by 0.2 s.
struct DriveSpec {
  Waveform waveform = Waveform::sine;
  double amplitude = 0.98;      // V
  double frequency = 20.0;      // Hz
  double pulse_duration = 1.0;  // s
  double pulse_interval = 0.2;  // s, silence after each pulse
  std::size_t repeats = 1;

  void validate() const;
  /// One pulse plus its trailing gap.
  [[nodiscard]] double period() const noexcept {
    return pulse_duration + pulse_interval;
  }
  [[nodiscard]] double total_duration() const noexcept {
    return static_cast<double>(repeats) * period();
  }

  friend bool operator==(const DriveSpec&, const DriveSpec&) = default;
};

struct PulsePacket {
  double start_time = 0.0;      // s, relative to the parent signal
  std::size_t start_index = 0;  // sample index in the parent signal
  Signal samples;
};

/// Converts a duration to an exact number of samples. Throws InvalidArgument
/// when `seconds * sample_rate` is not an integer within relative 1e-9 or is
/// smaller than one sample.
[[nodiscard]] std::size_t exact_samples(double seconds, double sample_rate,
                                        std::string_view what);

/// Pulses start at phase 0. Requires sample_rate >= 10 * frequency.
[[nodiscard]] Signal generate_drive(const DriveSpec& spec, double sample_rate);

/// Holds the first sample of each `hold_period` window across the window.
[[nodiscard]] Signal sample_and_hold(const Signal& input, double hold_period);

/// output[i] = held[i] * mask[(i / samples(theta)) mod N]. When `hold_period`
/// is given, one mask period N*theta must fit into it.
[[nodiscard]] Signal apply_mask(const Signal& held, const Mask& mask,
                                double theta,
                                std::optional<double> hold_period = {});

/// binary: +/-1 from the seeded stream; sinusoidal: sin(2*pi*j/N);
/// chaotic: logistic map at r = 4 from a seeded start, rescaled to [-1, 1].
[[nodiscard]] Mask generate_mask(MaskKind kind, std::size_t n_virtual,
                                 std::uint64_t seed);

/// Packets are runs where the centred sliding RMS (window min_gap/2, signal
/// zero-extended at both ends) exceeds `threshold`; runs closer than
/// `min_gap` are merged.
[[nodiscard]] std::vector<PulsePacket> segment_packets(const Signal& recording,
                                                       double threshold,
                                                       double min_gap);

}  // namespace rcsense
