#include "rcsense/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "rcsense/error.hpp"

namespace rcsense {

PacketSpectrum packet_spectrum(std::span<const double> samples,
                               double sample_rate, double target_freq) {
  if (!(sample_rate > 0.0) || !(target_freq > 0.0)) {
    throw InvalidArgument("packet_amplitude: rate and frequency must be > 0");
  }
  const std::size_t n = samples.size();
  const double cycles = target_freq * static_cast<double>(n) / sample_rate;
  if (cycles < 2.0 - 1e-9) {
    throw InvalidArgument("packet_amplitude: packet covers " +
                          std::to_string(cycles) +
                          " periods, at least 2 are required");
  }
  const auto k = static_cast<std::size_t>(std::llround(cycles));
  // Integer phase index (k*i mod n) keeps the twiddle angles exact.
  double re = 0.0;
  double im = 0.0;
  const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
  std::size_t phase = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double angle = step * static_cast<double>(phase);
    re += samples[i] * std::cos(angle);
    im -= samples[i] * std::sin(angle);
    phase = (phase + k) % n;
  }
  PacketSpectrum out;
  out.amplitude = 2.0 * std::hypot(re, im) / static_cast<double>(n);
  out.cycles = cycles;
  out.leakage = std::abs(cycles - std::round(cycles)) > 0.01;
  return out;
}

double packet_amplitude(const PulsePacket& packet, double sample_rate,
                        double target_freq) {
  return packet_spectrum(packet.samples.samples(), sample_rate, target_freq)
      .amplitude;
}

PacketSpectrumSeries packet_spectrum_series(std::span<const PulsePacket> packets,
                                            double sample_rate,
                                            double target_freq) {
  PacketSpectrumSeries series;
  series.target_frequency = target_freq;
  const double min_samples = 2.0 * sample_rate / target_freq;
  for (const PulsePacket& p : packets) {
    if (static_cast<double>(p.samples.size()) < min_samples - 1e-9) {
      ++series.skipped;
      continue;
    }
    const PacketSpectrum s =
        packet_spectrum(p.samples.samples(), sample_rate, target_freq);
    if (s.leakage) ++series.leakage_count;
    series.entries.push_back({p.start_time, s.amplitude});
  }
  return series;
}

DecayFit fit_decay(const PacketSpectrumSeries& series) {
  std::vector<std::pair<double, double>> pts;
  for (const SpectrumEntry& e : series.entries) {
    if (e.amplitude > 0.0 && std::isfinite(e.amplitude)) {
      pts.emplace_back(e.start_time, std::log(e.amplitude));
    }
  }
  if (pts.size() < 3) {
    throw NumericError("fit_decay: need at least 3 packets with positive "
                       "amplitude, got " + std::to_string(pts.size()));
  }
  const auto m = static_cast<double>(pts.size());
  double mt = 0.0;
  double my = 0.0;
  for (const auto& [t, y] : pts) {
    mt += t;
    my += y;
  }
  mt /= m;
  my /= m;
  double stt = 0.0;
  double sty = 0.0;
  double syy = 0.0;
  for (const auto& [t, y] : pts) {
    stt += (t - mt) * (t - mt);
    sty += (t - mt) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (stt <= 0.0) throw NumericError("fit_decay: packets share one start time");
  const double slope = sty / stt;
  if (!(slope < 0.0)) {
    throw NoDecayError("fit_decay: amplitudes do not decay (slope " +
                       std::to_string(slope) + " per s)");
  }
  const double intercept = my - slope * mt;
  DecayFit fit;
  fit.tau_c = -1.0 / slope;
  fit.a0 = std::exp(intercept);
  double ss_res = 0.0;
  for (const auto& [t, y] : pts) {
    const double r = y - (intercept + slope * t);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

double CalibrationCurve::tau_min() const noexcept {
  return increasing_ ? points_.front().tau_c : points_.back().tau_c;
}

double CalibrationCurve::tau_max() const noexcept {
  return increasing_ ? points_.back().tau_c : points_.front().tau_c;
}

double CalibrationCurve::tau_at(double concentration) const {
  const double c_lo = points_.front().concentration;
  const double c_hi = points_.back().concentration;
  if (!(concentration >= c_lo && concentration <= c_hi)) {
    const auto& nearest =
        concentration < c_lo ? points_.front() : points_.back();
    throw OutOfRangeError(nearest.concentration, nearest.tau_c,
                          "calibration: concentration outside the curve");
  }
  const double x = std::log10(concentration);
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const auto& a = points_[i];
    const auto& b = points_[i + 1];
    if (concentration <= b.concentration) {
      const double xa = std::log10(a.concentration);
      const double xb = std::log10(b.concentration);
      return a.tau_c + (b.tau_c - a.tau_c) * (x - xa) / (xb - xa);
    }
  }
  return points_.back().tau_c;
}

CalibrationCurve build_calibration(std::vector<CalibrationPoint> pairs) {
  if (pairs.size() < 2) {
    throw InvalidArgument("calibration: need at least 2 points");
  }
  for (const auto& p : pairs) {
    if (!(p.concentration > 0.0) || !std::isfinite(p.concentration) ||
        !std::isfinite(p.tau_c)) {
      throw InvalidArgument("calibration: concentrations must be positive and "
                            "values finite");
    }
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& a, const auto& b) { return a.concentration < b.concentration; });
  for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
    if (pairs[i].concentration == pairs[i + 1].concentration) {
      throw InvalidArgument("calibration: repeated concentration " +
                            std::to_string(pairs[i].concentration));
    }
  }
  const bool increasing = pairs[1].tau_c > pairs[0].tau_c;
  for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
    const double d = pairs[i + 1].tau_c - pairs[i].tau_c;
    if (!(increasing ? d > 0.0 : d < 0.0)) {
      throw MonotonicityError(
          i + 1, "calibration: tau_c is not strictly monotone at (c=" +
                     std::to_string(pairs[i + 1].concentration) +
                     ", tau_c=" + std::to_string(pairs[i + 1].tau_c) + ")");
    }
  }
  CalibrationCurve curve;
  curve.points_ = std::move(pairs);
  curve.increasing_ = increasing;
  return curve;
}

double infer_concentration(const CalibrationCurve& curve, double tau_c) {
  const auto& pts = curve.points();
  for (const auto& p : pts) {
    if (p.tau_c == tau_c) return p.concentration;
  }
  if (!(tau_c >= curve.tau_min() && tau_c <= curve.tau_max())) {
    const bool below = tau_c < curve.tau_min();
    const auto& nearest =
        (below == curve.increasing()) ? pts.front() : pts.back();
    throw OutOfRangeError(nearest.concentration, nearest.tau_c,
                          "calibration: tau_c " + std::to_string(tau_c) +
                              " s is outside [" + std::to_string(curve.tau_min()) +
                              ", " + std::to_string(curve.tau_max()) + "]");
  }
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const auto& a = pts[i];
    const auto& b = pts[i + 1];
    const double lo = std::min(a.tau_c, b.tau_c);
    const double hi = std::max(a.tau_c, b.tau_c);
    if (tau_c >= lo && tau_c <= hi) {
      const double xa = std::log10(a.concentration);
      const double xb = std::log10(b.concentration);
      const double frac = (tau_c - a.tau_c) / (b.tau_c - a.tau_c);
      return std::pow(10.0, xa + frac * (xb - xa));
    }
  }
  return pts.back().concentration;
}

}  // namespace rcsense
