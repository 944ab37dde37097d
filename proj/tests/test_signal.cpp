#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rcsense/error.hpp"
#include "rcsense/signal.hpp"

using namespace rcsense;

namespace {

std::vector<double> to_vec(const Signal& s) { return {s.samples().begin(), s.samples().end()}; }

Signal bursts(const std::vector<std::pair<double, double>>& on, double total, double rate) {
  std::vector<double> x(static_cast<std::size_t>(std::llround(total * rate)), 0.0);
  for (auto [t0, t1] : on) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = static_cast<double>(i) / rate;
      if (t >= t0 && t < t1) x[i] = std::sin(2.0 * std::numbers::pi * 20.0 * t);
    }
  }
  return Signal(x, rate);
}

}  // namespace

TEST_CASE("signal rejects bad rate and non-finite samples") {
  CHECK_THROWS_AS(Signal({1.0}, 0.0), InvalidArgument);
  CHECK_THROWS_AS(Signal({1.0, NAN}, 10.0), InvalidArgument);
  CHECK_THROWS_AS(Signal({INFINITY}, 10.0), InvalidArgument);
}

TEST_CASE("generate_drive: 0.98 V, 20 Hz, 1 s on, 0.2 s off") {
  DriveSpec d;
  d.amplitude = 0.98;
  d.frequency = 20.0;
  d.pulse_duration = 1.0;
  d.pulse_interval = 0.2;
  const Signal s = generate_drive(d, 10e3);
  REQUIRE(s.size() == 12000);
  double worst = 0.0;
  for (std::size_t i = 0; i < 10000; ++i) {
    const double t = static_cast<double>(i) / 10e3;
    worst = std::max(worst, std::abs(s[i] - 0.98 * std::sin(2.0 * std::numbers::pi * 20.0 * t)));
  }
  CHECK(worst < 1e-12);
  for (std::size_t i = 10000; i < 12000; ++i) REQUIRE(s[i] == 0.0);
}

TEST_CASE("generate_drive: zero amplitude, repeats and linearity") {
  DriveSpec d;
  d.amplitude = 0.0;
  d.repeats = 3;
  const Signal z = generate_drive(d, 10e3);
  CHECK(z.size() == 36000);
  for (double x : z.samples()) REQUIRE(x == 0.0);

  d.amplitude = 0.4;
  const Signal a = generate_drive(d, 10e3);
  d.amplitude = 0.8;
  const Signal b = generate_drive(d, 10e3);
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(b[i] == 2.0 * a[i]);
}

TEST_CASE("generate_drive: 1 V, 100 Hz, 2 s peak") {
  DriveSpec d;
  d.amplitude = 1.0;
  d.frequency = 100.0;
  d.pulse_duration = 2.0;
  d.pulse_interval = 0.0;
  const Signal s = generate_drive(d, 10e3);
  CHECK(s.size() == 20000);
  double peak = 0.0;
  for (double x : s.samples()) peak = std::max(peak, x);
  CHECK(std::abs(peak - 1.0) < 1e-9);
}

TEST_CASE("generate_drive: square wave and rate margin") {
  DriveSpec d;
  d.waveform = Waveform::square;
  d.amplitude = 0.5;
  const Signal s = generate_drive(d, 10e3);
  for (std::size_t i = 0; i < 10000; ++i) REQUIRE(std::abs(s[i]) == 0.5);
  CHECK(s[10] == 0.5);
  CHECK(s[260] == -0.5);
  CHECK_THROWS_AS((void)generate_drive(d, 150.0), InvalidArgument);
  d.frequency = -1.0;
  CHECK_THROWS_AS((void)generate_drive(d, 10e3), InvalidArgument);
}

TEST_CASE("sample_and_hold") {
  CHECK(to_vec(sample_and_hold(Signal({0, 1, 2, 3}, 1.0), 2.0)) == std::vector<double>{0, 0, 2, 2});
  const Signal c({3, 3, 3, 3, 3}, 5.0);
  CHECK(sample_and_hold(c, 0.4) == c);
  const Signal r({1, 5, 2, 7, 4, 9}, 2.0);
  CHECK(sample_and_hold(r, 0.5) == r);
  const Signal once = sample_and_hold(r, 1.0);
  CHECK(sample_and_hold(once, 1.0) == once);
  CHECK_THROWS_AS((void)sample_and_hold(r, 0.2), InvalidArgument);
  CHECK_THROWS_AS((void)sample_and_hold(r, 0.75), InvalidArgument);
}

TEST_CASE("apply_mask") {
  const Signal held({2, 2, 2, 2, 2, 2}, 1.0);
  const Mask alt({1.0, -1.0}, MaskKind::binary);
  CHECK(to_vec(apply_mask(held, alt, 1.0)) == std::vector<double>{2, -2, 2, -2, 2, -2});
  const Signal r({0.3, -1.2, 4.0, 0.0, 7.5, 2.2}, 1.0);
  CHECK(apply_mask(r, Mask::constant(3, 1.0), 1.0) == r);

  // theta of two samples: each mask value spans two samples
  const Mask m3({1.0, 0.5, -1.0}, MaskKind::custom);
  const Signal ones(std::vector<double>(12, 1.0), 2.0);
  CHECK(to_vec(apply_mask(ones, m3, 1.0)) ==
        std::vector<double>{1, 1, 0.5, 0.5, -1, -1, 1, 1, 0.5, 0.5, -1, -1});
  CHECK_THROWS_AS((void)apply_mask(ones, m3, 0.75), InvalidArgument);
  CHECK_THROWS_AS((void)apply_mask(ones, m3, 1.0, 2.0), InvalidArgument);

  const Mask c = generate_mask(MaskKind::chaotic, 8, 42);
  const Signal s(std::vector<double>(40, 0.7), 1.0);
  CHECK(apply_mask(s, c, 1.0) == apply_mask(s, generate_mask(MaskKind::chaotic, 8, 42), 1.0));
}

TEST_CASE("mask invariants") {
  CHECK_THROWS_AS(Mask({}, MaskKind::custom), InvalidArgument);
  CHECK_THROWS_AS(Mask({1.0, 0.5}, MaskKind::binary), InvalidArgument);
  CHECK_THROWS_AS(Mask({1.0, 1.0}, MaskKind::custom), InvalidArgument);
  CHECK_NOTHROW(Mask({1.0}, MaskKind::binary));
  const Mask m({1.0, -0.5}, MaskKind::custom);
  CHECK(m.negated()[0] == -1.0);
  CHECK(m.negated()[1] == 0.5);
}

TEST_CASE("generate_mask") {
  const Mask b1 = generate_mask(MaskKind::binary, 4, 9);
  const Mask b2 = generate_mask(MaskKind::binary, 4, 9);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(b1[j] == b2[j]);
    CHECK(std::abs(b1[j]) == 1.0);
  }

  const Mask s = generate_mask(MaskKind::sinusoidal, 4, 0);
  const std::vector<double> want{0.0, 1.0, 0.0, -1.0};
  for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(s[j] - want[j]) < 1e-12);

  // Independent oracle: the logistic map is fully chaotic at r = 4, so its
  // values follow the arcsine law on [-1, 1] and fill every bin.
  const Mask c = generate_mask(MaskKind::chaotic, 1000, 42);
  double mean = 0.0;
  std::vector<int> bins(20, 0);
  for (double v : c.values()) {
    REQUIRE(v >= -1.0);
    REQUIRE(v <= 1.0);
    mean += v;
    bins[std::min<std::size_t>(19, static_cast<std::size_t>((v + 1.0) / 0.1))]++;
  }
  mean /= 1000.0;
  CHECK(std::abs(mean) < 0.2);
  int occupied = 0;
  for (int n : bins) occupied += n > 0 ? 1 : 0;
  CHECK(occupied >= 18);
  // consecutive values obey x' = 4x(1-x) after mapping back to (0, 1)
  for (std::size_t j = 1; j < 50; ++j) {
    const double x = (c[j - 1] + 1.0) / 2.0;
    CHECK(std::abs((c[j] + 1.0) / 2.0 - 4.0 * x * (1.0 - x)) < 1e-9);
  }
  CHECK_THROWS_AS((void)generate_mask(MaskKind::binary, 0, 1), InvalidArgument);
}

TEST_CASE("segment_packets") {
  const double rate = 1000.0;
  CHECK(segment_packets(Signal(std::vector<double>(3000, 0.0), rate), 0.1, 0.1).empty());

  const Signal one = bursts({{1.0, 2.0}}, 3.0, rate);
  const auto p1 = segment_packets(one, 0.1, 0.1);
  REQUIRE(p1.size() == 1);
  CHECK(std::abs(p1[0].start_time - 1.0) <= 0.05);

  const Signal three = bursts({{0.5, 1.0}, {1.5, 2.0}, {2.5, 3.0}}, 3.5, rate);
  const auto p3 = segment_packets(three, 0.1, 0.1);
  REQUIRE(p3.size() == 3);
  for (std::size_t k = 1; k < 3; ++k) {
    CHECK(p3[k].start_time > p3[k - 1].start_time);
    CHECK(p3[k].start_index >= p3[k - 1].start_index + p3[k - 1].samples.size());
  }

  // two bursts 0.04 s apart merge into one packet
  const Signal close = bursts({{0.5, 1.0}, {1.04, 1.5}}, 2.0, rate);
  CHECK(segment_packets(close, 0.1, 0.1).size() == 1);

  CHECK_THROWS_AS((void)segment_packets(one, 0.0, 0.1), InvalidArgument);
}

TEST_CASE("segment_packets is translation covariant") {
  const double rate = 1000.0;
  const Signal base = bursts({{0.5, 1.0}, {1.5, 2.2}}, 3.0, rate);
  std::vector<double> shifted(700, 0.0);
  shifted.insert(shifted.end(), base.samples().begin(), base.samples().end());
  const auto a = segment_packets(base, 0.1, 0.1);
  const auto b = segment_packets(Signal(shifted, rate), 0.1, 0.1);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(std::abs(b[k].start_time - a[k].start_time - 0.7) < 1e-12);
    CHECK(b[k].samples == a[k].samples);
  }
}
