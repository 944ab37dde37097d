#include "rcsense/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rcsense/error.hpp"
#include "rcsense/rng.hpp"

namespace rcsense {

Signal::Signal(std::vector<double> samples, double sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_)) {
    throw InvalidArgument("signal: sample rate must be positive and finite");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw InvalidArgument("signal: non-finite sample at index " +
                            std::to_string(i));
    }
  }
}

Signal Signal::slice(std::size_t first, std::size_t count) const {
  if (first > samples_.size() || count > samples_.size() - first) {
    throw InvalidArgument("signal: slice out of range");
  }
  const auto begin = samples_.begin() + static_cast<std::ptrdiff_t>(first);
  return Signal({begin, begin + static_cast<std::ptrdiff_t>(count)},
                sample_rate_);
}

std::string_view to_string(MaskKind kind) {
  switch (kind) {
    case MaskKind::binary: return "binary";
    case MaskKind::sinusoidal: return "sinusoidal";
    case MaskKind::chaotic: return "chaotic";
    case MaskKind::custom: return "custom";
  }
  return "custom";
}

MaskKind mask_kind_from_string(std::string_view name) {
  if (name == "binary") return MaskKind::binary;
  if (name == "sinusoidal") return MaskKind::sinusoidal;
  if (name == "chaotic") return MaskKind::chaotic;
  if (name == "custom") return MaskKind::custom;
  throw InvalidArgument("unknown mask kind '" + std::string(name) + "'");
}

Mask::Mask(std::vector<double> values, MaskKind kind)
    : values_(std::move(values)), kind_(kind) {
  if (values_.empty()) throw InvalidArgument("mask: length must be >= 1");
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("mask: non-finite value");
    if (kind_ == MaskKind::binary && v != 1.0 && v != -1.0) {
      throw InvalidArgument("mask: binary masks hold only -1 and +1");
    }
  }
  if (values_.size() >= 2 &&
      std::all_of(values_.begin(), values_.end(),
                  [&](double v) { return v == values_.front(); })) {
    throw InvalidArgument("mask: all values equal");
  }
}

Mask Mask::constant(std::size_t n, double value) {
  if (n == 0) throw InvalidArgument("mask: length must be >= 1");
  if (!std::isfinite(value)) throw InvalidArgument("mask: non-finite value");
  Mask m;
  m.values_.assign(n, value);
  m.kind_ = (value == 1.0 || value == -1.0) ? MaskKind::binary
                                            : MaskKind::custom;
  return m;
}

Mask Mask::negated() const {
  Mask m = *this;
  for (double& v : m.values_) v = -v;
  return m;
}

std::string_view to_string(Waveform waveform) {
  return waveform == Waveform::sine ? "sine" : "square";
}

Waveform waveform_from_string(std::string_view name) {
  if (name == "sine") return Waveform::sine;
  if (name == "square") return Waveform::square;
  throw InvalidArgument("unknown waveform '" + std::string(name) + "'");
}

void DriveSpec::validate() const {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw InvalidArgument("drive: amplitude must be >= 0");
  }
  if (!(frequency > 0.0) || !std::isfinite(frequency)) {
    throw InvalidArgument("drive: frequency must be > 0");
  }
  if (!(pulse_duration > 0.0) || !std::isfinite(pulse_duration)) {
    throw InvalidArgument("drive: pulse_duration must be > 0");
  }
  if (!(pulse_interval >= 0.0) || !std::isfinite(pulse_interval)) {
    throw InvalidArgument("drive: pulse_interval must be >= 0");
  }
  if (repeats < 1) throw InvalidArgument("drive: repeats must be >= 1");
}

std::size_t exact_samples(double seconds, double sample_rate,
                          std::string_view what) {
  const double n = seconds * sample_rate;
  const double r = std::round(n);
  if (!std::isfinite(n) || r < 1.0) {
    throw InvalidArgument(std::string(what) +
                          " is shorter than one sample interval");
  }
  if (std::abs(n - r) > 1e-9 * std::max(1.0, std::abs(n))) {
    throw InvalidArgument(std::string(what) + " (" + std::to_string(seconds) +
                          " s) is not an integer number of samples at " +
                          std::to_string(sample_rate) + " Hz");
  }
  return static_cast<std::size_t>(r);
}

Signal generate_drive(const DriveSpec& spec, double sample_rate) {
  spec.validate();
  if (!(sample_rate > 0.0)) {
    throw InvalidArgument("drive: sample rate must be positive");
  }
  if (sample_rate < 10.0 * spec.frequency * (1.0 - 1e-12)) {
    throw InvalidArgument("drive: sample rate " + std::to_string(sample_rate) +
                          " Hz is below 10x the drive frequency");
  }
  const auto on = static_cast<std::size_t>(
      std::llround(spec.pulse_duration * sample_rate));
  const auto off = static_cast<std::size_t>(
      std::llround(spec.pulse_interval * sample_rate));

  std::vector<double> out;
  out.reserve(spec.repeats * (on + off));
  for (std::size_t r = 0; r < spec.repeats; ++r) {
    for (std::size_t i = 0; i < on; ++i) {
      const double t = static_cast<double>(i) / sample_rate;
      if (spec.waveform == Waveform::sine) {
        // Reduce the phase first so long pulses keep full precision.
        const double cycles = spec.frequency * t;
        const double frac = cycles - std::floor(cycles);
        out.push_back(spec.amplitude *
                      std::sin(2.0 * std::numbers::pi * frac));
      } else {
        const double cycles = spec.frequency * t;
        const double frac = cycles - std::floor(cycles);
        out.push_back(frac < 0.5 ? spec.amplitude : -spec.amplitude);
      }
    }
    out.insert(out.end(), off, 0.0);
  }
  return Signal(std::move(out), sample_rate);
}

Signal sample_and_hold(const Signal& input, double hold_period) {
  const std::size_t hold =
      exact_samples(hold_period, input.sample_rate(), "hold period");
  std::vector<double> out(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    out[i] = input[i - i % hold];
  }
  return Signal(std::move(out), input.sample_rate());
}

Signal apply_mask(const Signal& held, const Mask& mask, double theta,
                  std::optional<double> hold_period) {
  if (!(theta > 0.0)) throw InvalidArgument("mask: theta must be > 0");
  const std::size_t step = exact_samples(theta, held.sample_rate(), "theta");
  if (hold_period) {
    const std::size_t hold =
        exact_samples(*hold_period, held.sample_rate(), "hold period");
    if (step * mask.size() > hold) {
      throw InvalidArgument("mask: N*theta exceeds the hold period");
    }
  }
  std::vector<double> out(held.size());
  for (std::size_t i = 0; i < held.size(); ++i) {
    out[i] = held[i] * mask[(i / step) % mask.size()];
  }
  return Signal(std::move(out), held.sample_rate());
}

namespace {

double logistic_seed(Rng& rng) {
  // Avoid the points that reach the fixed points 0 and 3/4 in a few steps.
  for (;;) {
    const double x = rng.uniform();
    if (x > 1e-6 && x < 1.0 - 1e-6 && std::abs(x - 0.25) > 1e-6 &&
        std::abs(x - 0.5) > 1e-6 && std::abs(x - 0.75) > 1e-6) {
      return x;
    }
  }
}

}  // namespace

Mask generate_mask(MaskKind kind, std::size_t n_virtual, std::uint64_t seed) {
  if (n_virtual < 1) throw InvalidArgument("mask: n_virtual must be >= 1");
  std::vector<double> v(n_virtual);
  switch (kind) {
    case MaskKind::binary: {
      Rng rng(seed, 0x6d61736b);
      do {
        for (double& x : v) x = rng.uniform() < 0.5 ? -1.0 : 1.0;
      } while (n_virtual >= 2 &&
               std::all_of(v.begin(), v.end(),
                           [&](double x) { return x == v.front(); }));
      break;
    }
    case MaskKind::sinusoidal:
      for (std::size_t j = 0; j < n_virtual; ++j) {
        v[j] = std::sin(2.0 * std::numbers::pi * static_cast<double>(j) /
                        static_cast<double>(n_virtual));
      }
      break;
    case MaskKind::chaotic: {
      Rng rng(seed, 0x6d61736b);
      double x = logistic_seed(rng);
      for (double& out : v) {
        x = 4.0 * x * (1.0 - x);
        // Finite precision can land on 0 or 1; restart from a fresh seed.
        if (x <= 0.0 || x >= 1.0) x = logistic_seed(rng);
        out = 2.0 * x - 1.0;
      }
      break;
    }
    case MaskKind::custom:
      throw InvalidArgument("mask: custom masks are built from explicit values");
  }
  return Mask(std::move(v), kind);
}

std::vector<PulsePacket> segment_packets(const Signal& recording,
                                         double threshold, double min_gap) {
  if (!(threshold > 0.0)) {
    throw InvalidArgument("segment_packets: threshold must be > 0");
  }
  if (!(min_gap > 0.0)) {
    throw InvalidArgument("segment_packets: min_gap must be > 0");
  }
  const std::size_t n = recording.size();
  std::vector<PulsePacket> packets;
  if (n == 0) return packets;

  const double rate = recording.sample_rate();
  const auto window = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(0.5 * min_gap * rate)));
  const auto gap = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(min_gap * rate)));

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i] + recording[i] * recording[i];
  }
  const double thr2 = threshold * threshold * static_cast<double>(window);
  const auto active = [&](std::size_t i) {
    // Window [i - window/2, i - window/2 + window), zero outside the signal.
    const long long lo = static_cast<long long>(i) -
                         static_cast<long long>(window / 2);
    const long long hi = lo + static_cast<long long>(window);
    const auto a = static_cast<std::size_t>(std::clamp<long long>(lo, 0, n));
    const auto b = static_cast<std::size_t>(std::clamp<long long>(hi, 0, n));
    return prefix[b] - prefix[a] > thr2;
  };

  std::size_t i = 0;
  while (i < n) {
    if (!active(i)) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    std::size_t last = i;
    std::size_t quiet = 0;
    for (++i; i < n; ++i) {
      if (active(i)) {
        last = i;
        quiet = 0;
      } else if (++quiet >= gap) {
        break;
      }
    }
    const std::size_t count = last + 1 - start;
    packets.push_back(PulsePacket{static_cast<double>(start) / rate, start,
                                  recording.slice(start, count)});
    i = last + 1;
  }
  return packets;
}

}  // namespace rcsense
