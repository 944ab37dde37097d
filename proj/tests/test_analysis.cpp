#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "rcsense/analysis.hpp"
#include "rcsense/error.hpp"
#include "rcsense/rng.hpp"

using namespace rcsense;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> tone(double a, double f, double seconds, double rate, double phase = 0.0) {
  std::vector<double> x(static_cast<std::size_t>(std::llround(seconds * rate)));
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = a * std::sin(2.0 * kPi * f * static_cast<double>(i) / rate + phase);
  return x;
}

// Plain O(N) correlation against the nearest bin.
double naive_bin_amplitude(const std::vector<double>& x, double rate, double f) {
  const double n = static_cast<double>(x.size());
  const double k = std::round(f * n / rate);
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    acc += x[i] * std::polar(1.0, -2.0 * kPi * k * static_cast<double>(i) / n);
  return 2.0 * std::abs(acc) / n;
}

PacketSpectrumSeries series_of(const std::vector<std::pair<double, double>>& pts) {
  PacketSpectrumSeries s;
  s.target_frequency = 20.0;
  for (auto [t, a] : pts) s.entries.push_back({t, a});
  return s;
}

// Ordinary least squares on (t, ln A).
std::pair<double, double> loglinear_oracle(const PacketSpectrumSeries& s) {
  double st = 0, sy = 0, stt = 0, sty = 0, n = 0;
  for (const auto& e : s.entries) {
    const double y = std::log(e.amplitude);
    st += e.start_time;
    sy += y;
    stt += e.start_time * e.start_time;
    sty += e.start_time * y;
    n += 1;
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  const double icpt = (sy - slope * st) / n;
  return {std::exp(icpt), -1.0 / slope};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("packet_spectrum: integer-cycle tone") {
  const auto x = tone(1.0, 20.0, 1.0, 10e3);
  const PacketSpectrum p = packet_spectrum(x, 10e3, 20.0);
  CHECK(std::abs(p.amplitude - 1.0) < 1e-9);
  CHECK(p.cycles == doctest::Approx(20.0));
  CHECK_FALSE(p.leakage);
  const auto y = tone(0.37, 20.0, 0.5, 10e3, 0.9);
  CHECK(std::abs(packet_spectrum(y, 10e3, 20.0).amplitude - 0.37) < 1e-9);
}

TEST_CASE("packet_spectrum: zero, short and leaky packets") {
  CHECK(packet_spectrum(std::vector<double>(1000, 0.0), 10e3, 20.0).amplitude == 0.0);
  CHECK_THROWS_AS((void)packet_spectrum(std::vector<double>(999, 0.0), 10e3, 20.0),
                  InvalidArgument);
  const auto x = tone(1.0, 20.0, 1.025, 10e3);
  CHECK(packet_spectrum(x, 10e3, 20.0).leakage);
}

TEST_CASE("packet_spectrum agrees with a direct DFT and is linear") {
  Rng rng(13);
  for (int k = 0; k < 10; ++k) {
    std::vector<double> x(1234);
    for (double& v : x) v = rng.normal();
    const double a = packet_spectrum(x, 10e3, 20.0).amplitude;
    CHECK(std::abs(a - naive_bin_amplitude(x, 10e3, 20.0)) < 1e-10);
    for (double& v : x) v *= 3.5;
    CHECK(std::abs(packet_spectrum(x, 10e3, 20.0).amplitude - 3.5 * a) < 1e-12 * (1 + a));
  }
}

TEST_CASE("packet_spectrum: 20 dB SNR recovery") {
  std::vector<double> err;
  const double sigma = 1.0 / std::sqrt(200.0);  // tone power 1/2, noise power 1/200
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed, 1);
    auto x = tone(1.0, 20.0, 1.0, 10e3);
    for (double& v : x) v += sigma * rng.normal();
    err.push_back(std::abs(packet_spectrum(x, 10e3, 20.0).amplitude - 1.0));
  }
  CHECK(median(err) < 0.02);
}

TEST_CASE("packet_spectrum_series") {
  std::vector<PulsePacket> packets;
  packets.push_back({0.0, 0, Signal(tone(1.0, 20.0, 1.0, 1000.0), 1000.0)});
  packets.push_back({1.2, 1200, Signal(tone(0.5, 20.0, 0.05, 1000.0), 1000.0)});
  packets.push_back({2.4, 2400, Signal(tone(0.25, 20.0, 1.0, 1000.0), 1000.0)});
  const auto s = packet_spectrum_series(packets, 1000.0, 20.0);
  REQUIRE(s.entries.size() == 2);
  CHECK(s.skipped == 1);
  CHECK(s.entries[1].start_time == 2.4);
  CHECK(std::abs(s.entries[1].amplitude - 0.25) < 1e-9);
}

TEST_CASE("fit_decay: exact exponential") {
  const auto s = series_of({{0, 2.0}, {1, 2.0 / std::numbers::e}, {2, 2.0 / std::exp(2.0)}});
  const DecayFit f = fit_decay(s);
  CHECK(std::abs(f.a0 - 2.0) < 1e-9);
  CHECK(std::abs(f.tau_c - 1.0) < 1e-9);
  CHECK(std::abs(f.r_squared - 1.0) < 1e-9);
}

TEST_CASE("fit_decay: errors") {
  CHECK_THROWS_AS((void)fit_decay(series_of({{0, 1.0}, {1, 1.0}, {2, 1.0}})), NoDecayError);
  CHECK_THROWS_AS((void)fit_decay(series_of({{0, 1.0}, {1, 2.0}, {2, 3.0}})), NoDecayError);
  CHECK_THROWS_AS((void)fit_decay(series_of({{0, 1.0}, {1, 0.5}})), NumericError);
  CHECK_THROWS_AS((void)fit_decay(series_of({{0, 1.0}, {1, 0.0}, {2, 0.2}})), NumericError);
}

TEST_CASE("fit_decay: matches the closed-form regression") {
  Rng rng(3);
  std::vector<std::pair<double, double>> pts;
  for (int k = 0; k < 12; ++k) {
    pts.push_back({1.2 * k, 0.8 * std::exp(-1.2 * k / 3.0) * (1.0 + 0.1 * rng.normal())});
  }
  const auto s = series_of(pts);
  const auto [a0, tau] = loglinear_oracle(s);
  const DecayFit f = fit_decay(s);
  CHECK(std::abs(f.a0 - a0) < 1e-12 * a0);
  CHECK(std::abs(f.tau_c - tau) < 1e-12 * tau);
  CHECK(f.r_squared > 0.0);
  CHECK(f.r_squared <= 1.0);
}

TEST_CASE("fit_decay: 5% noise recovery") {
  std::vector<double> rel;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed, 2);
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k < 10; ++k) {
      const double t = 0.1 * k;
      pts.push_back({t, std::exp(-t / 0.5) * (1.0 + 0.05 * rng.normal())});
    }
    rel.push_back(std::abs(fit_decay(series_of(pts)).tau_c - 0.5) / 0.5);
  }
  CHECK(median(rel) < 0.1);
}

TEST_CASE("fit_decay: shift and scale covariance") {
  const auto s = series_of({{0.0, 1.0}, {0.7, 0.61}, {1.3, 0.37}, {2.2, 0.2}});
  const DecayFit f = fit_decay(s);
  auto shifted = s;
  for (auto& e : shifted.entries) e.start_time += 5.0;
  const DecayFit g = fit_decay(shifted);
  CHECK(std::abs(g.tau_c - f.tau_c) < 1e-9);
  CHECK(std::abs(g.a0 - f.a0 * std::exp(5.0 / f.tau_c)) < 1e-9 * g.a0);
  auto scaled = s;
  for (auto& e : scaled.entries) e.amplitude *= 7.0;
  const DecayFit h = fit_decay(scaled);
  CHECK(std::abs(h.tau_c - f.tau_c) < 1e-12);
  CHECK(std::abs(h.a0 - 7.0 * f.a0) < 1e-12);
}

TEST_CASE("build_calibration") {
  const CalibrationCurve c = build_calibration({{1e-2, 1.0}, {1e-4, 2.0}});
  CHECK(c.points().front().concentration == 1e-4);
  CHECK_FALSE(c.increasing());
  CHECK_THROWS_AS((void)build_calibration({{1e-4, 1.0}, {1e-2, 1.0}}), MonotonicityError);
  CHECK_THROWS_AS((void)build_calibration({{1e-4, 1.0}}), InvalidArgument);
  CHECK_THROWS_AS((void)build_calibration({{1e-4, 1.0}, {1e-4, 2.0}}), InvalidArgument);
  CHECK_THROWS_AS((void)build_calibration({{0.0, 1.0}, {1e-4, 2.0}}), InvalidArgument);
  try {
    (void)build_calibration({{1e-4, 1.0}, {1e-3, 2.0}, {1e-2, 1.5}, {1e-1, 3.0}});
    FAIL("expected monotonicity error");
  } catch (const MonotonicityError& e) {
    CHECK(e.index() == 2);
  }
}

TEST_CASE("infer_concentration") {
  const CalibrationCurve c = build_calibration({{1e-4, 0.8}, {1e-3, 2.6}, {1e-2, 7.4}, {1e-1, 15.6}});
  for (const auto& p : c.points()) CHECK(infer_concentration(c, p.tau_c) == p.concentration);
  // midway in tau between nodes -> midway in log10 c
  const double mid = infer_concentration(c, 0.5 * (2.6 + 7.4));
  CHECK(std::abs(std::log10(mid) + 2.5) < 1e-12);
  CHECK(std::abs(c.tau_at(std::pow(10.0, -2.5)) - 5.0) < 1e-12);
  try {
    (void)infer_concentration(c, 20.0);
    FAIL("expected out of range");
  } catch (const OutOfRangeError& e) {
    CHECK(e.nearest_concentration() == 1e-1);
    CHECK(e.nearest_tau_c() == 15.6);
  }
  CHECK_THROWS_AS((void)infer_concentration(c, 0.1), OutOfRangeError);

  const CalibrationCurve d = build_calibration({{1.0, 10.0}, {3.0, 5.0}, {9.0, 2.0}});
  CHECK(infer_concentration(d, 5.0) == 3.0);
  CHECK(std::abs(std::log10(infer_concentration(d, 7.5)) - 0.5 * std::log10(3.0)) < 1e-12);
}
