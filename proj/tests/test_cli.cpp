#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "fwm/cli/app.hpp"
#include "fwm/cli/config.hpp"
#include "fwm/error.hpp"
#include "fwm/io.hpp"
#include "fwm/jsa.hpp"
#include "fwm/schmidt.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fwm;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fwm_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fwmsim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

json read_json(const fs::path& p) { return json::parse(io::read_file(p)); }

int run_exe(const std::string& args) {
  const int status = std::system((std::string(FWMSIM_EXE) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(Config, DefaultsCoverSchema) {
  const cli::RunConfig cfg;
  const auto j = cfg.to_json();
  EXPECT_EQ(j.size(), cli::config_schema().size());
  EXPECT_EQ(cfg.number("pump.center_nm"), 771.0);
  EXPECT_EQ(cfg.integer("tmd.bins"), 8);
  EXPECT_NO_THROW(cli::validate(cfg));
}

TEST(Config, FlagNames) {
  EXPECT_EQ(cli::flag_name("pump.center_nm"), "pump-center-nm");
  EXPECT_EQ(cli::flag_name("grid.measured_jsi"), "grid-measured-jsi");
}

TEST(Config, RejectsUnknownKeysAndBadTypes) {
  EXPECT_THROW(cli::RunConfig::from_json_text(R"({"pump.colour": 3})"), ConfigError);
  EXPECT_THROW(cli::RunConfig::from_json_text(R"({"pump.center_nm": "771"})"), ConfigError);
  EXPECT_THROW(cli::RunConfig::from_json_text(R"({"tmd.bins": 2.5})"), ConfigError);
  EXPECT_THROW(cli::RunConfig::from_json_text("[1, 2]"), ConfigError);
  EXPECT_THROW(cli::RunConfig::from_json_text("{"), ConfigError);
  try {
    cli::RunConfig::from_json_text(R"({"pump.colour": 3})");
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("pump.colour"), std::string::npos);
  }
}

TEST(Config, RangeErrorsNameTheKey) {
  cli::RunConfig cfg;
  cfg.set("pump.fiber_length_m", -1.0);
  try {
    cli::validate(cfg);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("pump.fiber_length_m"), std::string::npos);
  }
  cli::RunConfig bins;
  bins.set("tmd.bin_probabilities", json::array({0.5, 0.5}));
  EXPECT_THROW(cli::validate(bins), ConfigError);
}

TEST(Config, StringOverrides) {
  cli::RunConfig cfg;
  cfg.set_from_string("run.gains", "0.1, 0.2,0.3");
  EXPECT_EQ(cfg.numbers("run.gains"), (std::vector<double>{0.1, 0.2, 0.3}));
  cfg.set_from_string("tmd.bins", "4");
  EXPECT_EQ(cfg.integer("tmd.bins"), 4);
  EXPECT_THROW(cfg.set_from_string("tmd.bins", "four"), ConfigError);
  EXPECT_THROW(cfg.set_from_string("pump.center_nm", "771nm"), ConfigError);
}

TEST(Cli, DispersionFixture) {
  const auto dir = scratch("dispersion");
  const auto r = run_cli({"dispersion", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto z = read_json(dir / "zdw.json").at("zdw_nm").get<std::vector<double>>();
  ASSERT_EQ(z.size(), 2u);
  EXPECT_NEAR(z[0], 747.0, 1.0);
  EXPECT_NEAR(z[1], 1260.0, 1.0);
  const auto curve = io::read_csv(dir / "dispersion.csv");
  EXPECT_EQ(curve.header.size(), 3u);
  EXPECT_GT(curve.rows.size(), 1000u);
  EXPECT_NO_THROW(read_profile_json(dir / "profile.json"));

  const auto manifest = read_json(dir / "manifest.json");
  EXPECT_EQ(manifest.at("command"), "dispersion");
  EXPECT_EQ(manifest.at("config").size(), cli::config_schema().size());
  // the manifest's config reproduces the run
  const auto again = scratch("dispersion_again");
  io::write_file_atomic(again / "cfg.json", manifest.at("config").dump());
  ASSERT_EQ(run_cli({"dispersion", "--config", (again / "cfg.json").string(), "--out", again.string()}).code, 0);
  EXPECT_EQ(io::read_file(again / "zdw.json"), io::read_file(dir / "zdw.json"));
}

TEST(Cli, MissingFileIsUsageError) {
  const auto dir = scratch("missing");
  const std::string path = (dir / "no_such_samples.csv").string();
  const auto r = run_cli({"dispersion", "--profile-source", "d-samples", "--profile-path", path, "--out", dir.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(path), std::string::npos);
  const auto c = run_cli({"dispersion", "--config", (dir / "nope.json").string(), "--out", dir.string()});
  EXPECT_EQ(c.code, 2);
  EXPECT_NE(c.err.find("nope.json"), std::string::npos);
}

TEST(Cli, ConstantBeta2HasNoZdws) {
  const auto dir = scratch("const");
  const auto r = run_cli({"dispersion", "--profile-source", "coefficients", "--profile-coefficients", "0,4.9e-9,-2e-26,0",
                          "--profile-reference-wavelength-nm", "1000", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(read_json(dir / "zdw.json").at("zdw_nm").empty());
}

TEST(Cli, DigitizedSamplesProfile) {
  const auto dir = scratch("digitized");
  const auto r = run_cli({"dispersion", "--profile-source", "d-samples", "--profile-path",
                          std::string(FWM_SOURCE_DIR) + "/data/fig1_inset_digitized.csv",
                          "--profile-reference-wavelength-nm", "1000", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto z = read_json(dir / "zdw.json").at("zdw_nm").get<std::vector<double>>();
  ASSERT_EQ(z.size(), 2u);
  EXPECT_NEAR(z[0], 747.0, 5.0);
  EXPECT_NEAR(z[1], 1260.0, 5.0);
}

TEST(Cli, Phasematch) {
  const auto dir = scratch("phasematch");
  const auto r = run_cli({"phasematch", "--pump-range-min-nm", "750", "--pump-range-max-nm", "790", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto contour = io::read_csv(dir / "contour.csv");
  bool near = false;
  for (const auto& row : contour.rows) {
    near |= std::abs(row[0] - 771.0) < 0.5 && std::abs(row[1] - 514.0) < 2.0 && std::abs(row[2] - 1542.0) < 6.0;
  }
  EXPECT_TRUE(near);
  const auto gv = read_json(dir / "gv_match.json");
  ASSERT_TRUE(gv.at("found").get<bool>());
  EXPECT_NEAR(gv.at("pump_nm").get<double>(), 771.0, 1.0);
}

TEST(Cli, PhasematchErrors) {
  const auto dir = scratch("phasematch_err");
  EXPECT_EQ(run_cli({"phasematch", "--pump-range-min-nm", "790", "--pump-range-max-nm", "750", "--out", dir.string()}).code, 2);
  const auto r = run_cli({"phasematch", "--profile-source", "coefficients", "--profile-coefficients", "0,4.9e-9,3e-26,0",
                          "--profile-reference-wavelength-nm", "1000", "--pump-range-min-nm", "900",
                          "--pump-range-max-nm", "1100", "--out", dir.string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("no phase-matched"), std::string::npos);
}

TEST(Cli, JsaSchmidtPipeline) {
  const auto dir = scratch("jsa");
  const auto r = run_cli({"jsa-schmidt", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto conv = read_json(dir / "schmidt_convolved.json");
  EXPECT_GE(conv.at("purity").get<double>(), 0.77);
  EXPECT_LE(conv.at("purity").get<double>(), 0.87);
  const auto widths = read_json(dir / "widths.json");
  const double ws = widths.at("convolved").at("signal_nm").get<double>();
  EXPECT_NEAR(widths.at("deconvolved").at("signal_nm").get<double>(), std::sqrt(ws * ws - 0.49), 1e-12);
  EXPECT_NEAR(widths.at("model").at("signal_nm").get<double>(), 1.2, 0.3);

  // every CSV parses back through the library readers
  EXPECT_EQ(io::read_csv(dir / "jsi_model.csv").rows.size(), 512u);
  EXPECT_EQ(io::read_csv(dir / "marginals.csv").rows.size(), 1024u);
  EXPECT_EQ(io::read_csv(dir / "schmidt_modes_signal.csv").rows.size(), 512u);
  const auto back = read_jsi_long_csv(dir / "jsi_convolved_long.csv");
  EXPECT_EQ(back.values.rows(), 512);
  EXPECT_NEAR(decompose(back, SchmidtSource::sqrt_of_intensity).purity, conv.at("purity").get<double>(), 1e-6);
  const auto marg = io::read_file(dir / "marginals.csv");
  EXPECT_NE(marg.find("deconvolved"), std::string::npos);
}

TEST(Cli, JsaSchmidtMeasuredRankOne) {
  const auto dir = scratch("rank1");
  io::CsvTable t{{"signal_nm", "idler_nm", "intensity"}, {}};
  for (int a = 0; a < 20; ++a)
    for (int b = 0; b < 15; ++b)
      t.rows.push_back({510.0 + 0.5 * a, 1500.0 + 5.0 * b, std::exp(-0.05 * (a - 9) * (a - 9)) * (1.0 + 0.1 * b)});
  io::write_file_atomic(dir / "rank1.csv", io::format_csv(t));
  const auto r = run_cli({"jsa-schmidt", "--grid-measured-jsi", (dir / "rank1.csv").string(), "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(read_json(dir / "schmidt_measured.json").at("K").get<double>(), 1.0, 1e-6);
  EXPECT_EQ(run_cli({"jsa-schmidt", "--grid-measured-jsi", (dir / "rank1.csv").string(), "--run-schmidt-source",
                     "amplitude", "--out", dir.string()})
                .code,
            2);
}

TEST(Cli, JsaSchmidtGridOutsideDomain) {
  const auto dir = scratch("jsa_domain");
  const auto r = run_cli({"jsa-schmidt", "--grid-signal-min-nm", "300", "--grid-signal-max-nm", "320", "--grid-signal-points",
                          "16", "--grid-idler-points", "16", "--out", dir.string()});
  EXPECT_EQ(r.code, 3);
}

TEST(Cli, Counting) {
  const auto dir = scratch("counting");
  const auto r = run_cli({"counting", "--run-shots", "200000", "--run-counting-grid-points", "96", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cond = io::read_csv(dir / "conditional.csv");
  const double theory[] = {0.055, 0.106975, 0.156091375};
  for (const auto& row : cond.rows) {
    const auto m = static_cast<std::size_t>(row[0]);
    EXPECT_NEAR(row[2], theory[m - 1], 1e-10);
    EXPECT_GE(row[3], row[2]);
  }
  const auto rates = read_json(dir / "rates.json");
  EXPECT_DOUBLE_EQ(rates.at("accidentals").get<double>(), 99.0);
  EXPECT_DOUBLE_EQ(rates.at("corrected_coincidences").get<double>(), 1201.0);
  EXPECT_NEAR(rates.at("heralding_efficiency").get<double>(), 0.291, 5e-4);
  const auto cal = read_json(dir / "calibration.json");
  EXPECT_GT(cal.at("fitted_r0").get<double>(), 0.0);
  EXPECT_NEAR(cal.at("predicted_click_rates_hz").at("2").get<double>(), 2200.0, 1e-3);
  for (const auto& row : io::read_csv(dir / "mc_check.csv").rows) EXPECT_LT(std::abs(row[5]), 5.0);
}

TEST(Cli, CountingTallyReproducible) {
  const auto a = scratch("tally_a"), b = scratch("tally_b"), c = scratch("tally_c");
  const std::vector<std::string> common{"counting", "--run-shots", "100000", "--run-schmidt-lambdas", "0.8,0.2", "--seed", "5"};
  auto with = [&](const fs::path& dir, const std::string& threads) {
    auto args = common;
    args.insert(args.end(), {"--threads", threads, "--out", dir.string()});
    return run_cli(args).code;
  };
  ASSERT_EQ(with(a, "1"), 0);
  ASSERT_EQ(with(b, "1"), 0);
  ASSERT_EQ(with(c, "4"), 0);
  EXPECT_EQ(io::read_file(a / "tally.json"), io::read_file(b / "tally.json"));
  EXPECT_EQ(io::read_file(a / "tally.json"), io::read_file(c / "tally.json"));
}

TEST(Cli, CountingZeroConditionIsInfeasible) {
  const auto dir = scratch("counting_zero");
  const auto r = run_cli({"counting", "--run-schmidt-lambdas", "1", "--run-gains", "0", "--run-shots", "1000", "--out",
                          dir.string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("1 signal clicks"), std::string::npos) << r.err;
}

TEST(Cli, FlagsOverrideConfigFile) {
  const auto dir = scratch("override");
  io::write_file_atomic(dir / "cfg.json", R"({"pump.range_min_nm": 760.0, "pump.range_max_nm": 780.0, "pump.steps": 5})");
  ASSERT_EQ(run_cli({"phasematch", "--config", (dir / "cfg.json").string(), "--pump-steps", "3", "--out", dir.string()}).code, 0);
  const auto m = read_json(dir / "manifest.json").at("config");
  EXPECT_EQ(m.at("pump.steps").get<int>(), 3);
  EXPECT_EQ(m.at("pump.range_min_nm").get<double>(), 760.0);
}

TEST(Cli, ReproducePaper) {
  const auto dir = scratch("reproduce");
  const auto r = run_cli({"reproduce-paper", "--run-shots", "200000", "--run-counting-grid-points", "96", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("ZDW, short"), std::string::npos);
  const auto summary = read_json(dir / "summary.json");
  EXPECT_GT(summary.size(), 20u);
  for (const char* sub : {"dispersion", "phasematch", "jsa-schmidt", "counting"}) {
    EXPECT_TRUE(fs::exists(dir / sub / "manifest.json")) << sub;
  }
}

TEST(Cli, ProcessExitCodes) {
  const auto dir = scratch("exe");
  EXPECT_EQ(run_exe("--help"), 0);
  EXPECT_EQ(run_exe(""), 2);
  EXPECT_EQ(run_exe("frobnicate"), 2);
  EXPECT_EQ(run_exe("dispersion --no-such-flag 1 --out " + dir.string()), 2);
  EXPECT_EQ(run_exe("dispersion --out " + dir.string()), 0);
  EXPECT_EQ(run_exe("phasematch --pump-steps 0 --out " + dir.string()), 2);
}
