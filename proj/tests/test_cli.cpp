#include "ddgrape/cli.hpp"

#include "support/paths.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <vector>

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ddgrape");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = ddgrape::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path write_small_config(const std::filesystem::path& dir) {
  std::ifstream is(testpaths::small_config());
  std::stringstream text;
  text << is.rdbuf();
  std::string body = text.str();
  const std::string key = "\"ddgrape_small_out\"";
  body.replace(body.find(key), key.size(), "\"" + (dir / "out").string() + "\"");
  const auto path = dir / "config.json";
  std::ofstream(path) << body;
  return path;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST(Cli, NoArgumentsPrintsUsage) {
  const CliRun r = cli({});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("optimize"), std::string::npos);
  EXPECT_NE(r.err.find("discord"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  const CliRun unknown_flag = cli({"discord", "--bogus"});
  EXPECT_EQ(unknown_flag.code, 1);
  EXPECT_FALSE(unknown_flag.err.empty());
  EXPECT_EQ(cli({"discord"}).code, 1);
  EXPECT_EQ(cli({"discord", "--state", "/nonexistent/file"}).code, 1);
  const auto cfg = write_small_config(testpaths::scratch_dir());
  EXPECT_EQ(cli({"simulate", "--config", cfg.string()}).code, 1);
}

TEST(Cli, Help) {
  const CliRun r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("simulate"), std::string::npos);
}

TEST(Cli, DiscordOfBellState) {
  const auto dir = testpaths::scratch_dir();
  std::ofstream(dir / "bell.txt") << "# (|00> + |11>) / sqrt 2\n"
                                     "0.5+0j 0+0j 0+0j 0.5+0j\n0+0j 0+0j 0+0j 0+0j\n"
                                     "0+0j 0+0j 0+0j 0+0j\n0.5+0j 0+0j 0+0j 0.5+0j\n";
  const CliRun r = cli({"discord", "--state", (dir / "bell.txt").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("discord=1.000000"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("mutual_information=2.000000"), std::string::npos);
  EXPECT_EQ(r.out.find("scaled_discord"), std::string::npos);
  EXPECT_NE(cli({"discord", "--state", (dir / "bell.txt").string(), "--epsilon", "0.5"}).out.find("scaled_discord="),
            std::string::npos);
}

TEST(Cli, InvalidStateIsRuntimeError) {
  const auto dir = testpaths::scratch_dir();
  std::ofstream(dir / "bad.txt") << "1+0j 0 0 0  0 1 0 0  0 0 1 0  0 0 0 1\n";
  const CliRun r = cli({"discord", "--state", (dir / "bad.txt").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("trace"), std::string::npos);
}

TEST(Cli, BadConfigIsRuntimeError) {
  const auto dir = testpaths::scratch_dir();
  std::ofstream(dir / "c.json") << R"({"iterations": 0})";
  EXPECT_EQ(cli({"simulate", "--config", (dir / "c.json").string(), "--ideal-gates"}).code, 2);
}

TEST(Cli, SimulateBeforeOptimizeNamesTheStep) {
  const auto cfg = write_small_config(testpaths::scratch_dir());
  const CliRun r = cli({"simulate", "--config", cfg.string(), "--scheme", "none", "--noise", "none"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("optimize"), std::string::npos);
  EXPECT_EQ(cli({"simulate", "--config", cfg.string(), "--ideal-gates", "--noise", "fog"}).code, 2);
}

TEST(Cli, IdealSimulationWritesFourteenRows) {
  const auto dir = testpaths::scratch_dir();
  const auto cfg = write_small_config(dir);
  const CliRun r = cli({"simulate", "--config", cfg.string(), "--ideal-gates", "--noise", "none"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = testpaths::slurp(dir / "out" / "trajectory_ideal_none.csv");
  EXPECT_EQ(count_lines(csv), 15);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "stage,marked_prob,discord_bits,scaled_discord");
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "manifest_simulate.json"));
}

TEST(Cli, PipelineIsByteDeterministic) {
  std::vector<std::filesystem::path> outs;
  const auto root = testpaths::scratch_dir();
  for (const char* run : {"a", "b"}) {
    const auto dir = root / run;
    std::filesystem::create_directories(dir);
    const auto cfg = write_small_config(dir);
    ASSERT_EQ(cli({"optimize", "--config", cfg.string()}).code, 0);
    const CliRun sim = cli({"simulate", "--config", cfg.string(), "--scheme", "none", "--noise", "none"});
    ASSERT_EQ(sim.code, 0) << sim.err;
    ASSERT_EQ(cli({"simulate", "--config", cfg.string(), "--scheme", "xy:90:20", "--noise", "incoherence"}).code, 0);
    ASSERT_EQ(cli({"sweep", "--config", cfg.string()}).code, 0);
    ASSERT_EQ(cli({"analyze", "--config", cfg.string()}).code, 0);
    outs.push_back(dir / "out");
  }
  for (const char* f : {"gates.csv", "trajectory_none_none.csv", "trajectory_xy_90_20_incoherence.csv", "sweep.csv",
                        "rms.csv", "pulses/xy_90_20_oracle_seed7.pulse"}) {
    const std::string a = testpaths::slurp(outs[0] / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, testpaths::slurp(outs[1] / f)) << f;
  }
  const std::string rows = testpaths::slurp(outs[0] / "trajectory_none_none.csv");
  EXPECT_EQ(count_lines(rows), 15);
  EXPECT_EQ(count_lines(testpaths::slurp(outs[0] / "rms.csv")), 5);
  EXPECT_EQ(count_lines(testpaths::slurp(outs[0] / "sweep.csv")), 5);
}
