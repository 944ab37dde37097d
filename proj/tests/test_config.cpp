#include <doctest.h>

#include <json.hpp>

#include "rcsense/config.hpp"
#include "rcsense/error.hpp"

using namespace rcsense;

TEST_CASE("minimal configs take scenario defaults") {
  const ExperimentConfig c = parse_config("scenario = \"sweet-oect\"\n");
  CHECK(c.scenario == Scenario::sweet_oect);
  CHECK(c.seed == 0);
  CHECK(c.output == "rcsense-out");
  const SweetScenario d = oect_scenario();
  CHECK(c.sweet.scenario.sweep == d.sweep);
  CHECK(c.sweet.scenario.loop.coupling == d.loop.coupling);
  CHECK(c.sweet.scenario.loop.delta_tau == doctest::Approx(1.2));
  CHECK_FALSE(c.sweet.optimize);

  const ExperimentConfig m = parse_config("scenario = \"sweet-memristor\"\nseed = 4\n");
  CHECK(std::holds_alternative<MemristorDevice>(m.sweet.scenario.device));
  CHECK(m.seed == 4);
}

TEST_CASE("delta_tau follows the pulse period unless given") {
  const ExperimentConfig a = parse_config(
      "scenario = \"sweet-oect\"\n[drive]\npulse_duration = 0.5\npulse_interval = 0.3\n");
  CHECK(a.sweet.scenario.loop.delta_tau == doctest::Approx(0.8));
  const ExperimentConfig b = parse_config(
      "scenario = \"sweet-oect\"\n[drive]\npulse_duration = 0.5\n[loop]\ndelta_tau = 2.0\n");
  CHECK(b.sweet.scenario.loop.delta_tau == 2.0);
}

TEST_CASE("strict parsing") {
  CHECK_THROWS_AS((void)parse_config("scenario = \"sweet-oect\"\n[loop]\ncuopling = 1.0\n"),
                  InvalidArgument);
  CHECK_THROWS_AS((void)parse_config("scenario = \"sweet-oect\"\nsede = 3\n"), InvalidArgument);
  CHECK_THROWS_AS((void)parse_config("scenario = \"sweet-oect\"\n[esn]\nn_reservoir = 3\n"),
                  InvalidArgument);
  CHECK_THROWS_AS((void)parse_config("scenario = \"sweet-oect\"\n[loop]\ncoupling = \"x\"\n"),
                  InvalidArgument);
  CHECK_THROWS_AS((void)parse_config("scenario = \"nope\"\n"), InvalidArgument);
  CHECK_THROWS_AS((void)parse_config("seed = 1\n"), InvalidArgument);
  CHECK_THROWS_AS((void)parse_config("scenario = \n"), InvalidArgument);
  CHECK_THROWS_AS((void)parse_config("scenario = \"sweet-oect\"\n[sweep]\nvalues = []\n"),
                  InvalidArgument);
  CHECK_THROWS_AS((void)parse_config("scenario = \"sweet-oect\"\n[loop]\nstop_threshold = 0\n"),
                  InvalidArgument);
  CHECK_THROWS_AS(
      (void)parse_config("scenario = \"delay-run\"\n[delay]\ntau = 1.0\ntheta = 0.3\n"),
      InvalidArgument);
  CHECK_THROWS_AS((void)parse_config("scenario = \"esn-benchmark\"\n[benchmark]\n"
                                     "length = 100\nwashout = 100\n"),
                  InvalidArgument);
  CHECK_THROWS_AS((void)load_config("/nonexistent/rcsense.toml"), IoError);
}

TEST_CASE("esn and delay tables") {
  const ExperimentConfig c = parse_config(
      "scenario = \"esn-benchmark\"\nseed = 2\n"
      "[esn]\nn_reservoir = 30\nleak_rate = 0.5\nactivation = \"relu\"\n"
      "[delay]\ntau = 0.02\ntheta = 1e-3\nmask_kind = \"sinusoidal\"\n"
      "[benchmark]\nrecall_lags = [0, 3]\ninput_offset = 1.0\n");
  CHECK(c.esn_benchmark.esn.n_reservoir == 30);
  CHECK(c.esn_benchmark.esn.activation == Activation::relu);
  CHECK(c.esn_benchmark.recall_lags == std::vector<std::size_t>{0, 3});
  CHECK(c.esn_benchmark.input_offset == 1.0);
  const DelayReservoirConfig d = make_delay_config(c.esn_benchmark.delay, c.seed);
  CHECK(d.n_virtual() == 20);
  CHECK(d.mask.kind() == MaskKind::sinusoidal);

  const ExperimentConfig custom = parse_config(
      "scenario = \"delay-run\"\n[delay]\ntau = 3e-3\ntheta = 1e-3\nmask_kind = \"custom\"\n"
      "mask_values = [1.0, -0.5, 0.25]\n");
  CHECK(make_delay_config(custom.delay_run.delay, 0).mask[1] == -0.5);
}

TEST_CASE("resolved config JSON is complete and stable") {
  const ExperimentConfig c = parse_config("scenario = \"sweet-memristor\"\nseed = 9\n");
  const std::string a = resolved_config_json(c);
  CHECK(a == resolved_config_json(parse_config("scenario = \"sweet-memristor\"\nseed = 9\n")));
  const auto j = nlohmann::json::parse(a);
  CHECK(j.at("scenario") == "sweet-memristor");
  CHECK(j.at("seed") == 9);
  CHECK(j.at("device").at("r_off") == 16e3);
  CHECK(j.at("sweep").at("values").size() == 3);

  // the resolved document parses back to the same configuration
  CHECK(scenario_from_string(j.at("scenario").get<std::string>()) == Scenario::sweet_memristor);
}

TEST_CASE("relative inputs resolve against the config directory") {
  const ExperimentConfig c =
      parse_config("scenario = \"analyze\"\n[analyze]\ninput = \"rec.wav\"\n", "/data/run1");
  CHECK(c.resolve(c.analyze.input) == std::filesystem::path("/data/run1/rec.wav"));
  CHECK(c.resolve("/abs/x.csv") == std::filesystem::path("/abs/x.csv"));
}

TEST_CASE("calibrate and infer tables") {
  CHECK_THROWS_AS((void)parse_config("scenario = \"calibrate\"\n[calibrate]\n"
                                     "concentrations = [1e-3, 1e-2]\ntau_c = [1.0]\n"),
                  InvalidArgument);
  const ExperimentConfig c = parse_config(
      "scenario = \"infer\"\n[infer]\ncalibration = \"cal.json\"\ntau_c = 2.5\n");
  REQUIRE(c.infer.tau_c.has_value());
  CHECK(*c.infer.tau_c == 2.5);
}
