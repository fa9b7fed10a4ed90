#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spinlaw_cli_" + name);
  fs::remove_all(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(SPINLAW_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string header(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST(Cli, DecayWritesCsvAndSidecar) {
  const fs::path out = scratch("decay");
  ASSERT_EQ(run("decay --out " + out.string()), 0);
  EXPECT_EQ(header(out / "decay.csv"), "t,value,truncation_radius");
  const auto side = nlohmann::json::parse(slurp(out / "decay.csv.json"));
  EXPECT_EQ(side["experiment"], "decay");
  EXPECT_EQ(side["seed"], 12345);
  EXPECT_LE(side["details"]["max_vieta_deviation"].get<double>(), 1e-8);
  EXPECT_TRUE(side.contains("wall_time_seconds"));
}

TEST(Cli, ExperimentFlagIsEquivalentToSubcommand) {
  const fs::path a = scratch("hist_a"), b = scratch("hist_b");
  ASSERT_EQ(run("histories --out " + a.string()), 0);
  ASSERT_EQ(run("--experiment histories --out " + b.string()), 0);
  EXPECT_EQ(header(a / "purification.csv"), "n,undecided_mass,mean_l_over_n_branch1,mean_l_over_n_branch2");
  EXPECT_EQ(slurp(a / "purification.csv"), slurp(b / "purification.csv"));
}

TEST(Cli, SeededRunsAreReproducible) {
  const fs::path a = scratch("fannes_a"), b = scratch("fannes_b"), c = scratch("fannes_c");
  ASSERT_EQ(run("fannes --trials 40 --seed 7 --out " + a.string()), 0);
  ASSERT_EQ(run("fannes --trials 40 --seed 7 --out " + b.string()), 0);
  ASSERT_EQ(run("fannes --trials 40 --seed 8 --out " + c.string()), 0);
  EXPECT_EQ(slurp(a / "fannes.csv"), slurp(b / "fannes.csv"));
  EXPECT_NE(slurp(a / "fannes.csv"), slurp(c / "fannes.csv"));
  EXPECT_EQ(header(a / "fannes.csv"), "trial,sites,lhs,rhs,a,trace_distance");
}

TEST(Cli, ConfigFileKeysMatchFlags) {
  const fs::path out = scratch("cfg");
  fs::create_directories(out);
  std::ofstream(out / "run.ini") << "steps=3\ngrid-bits=7\ncoarse-level=4\n";
  ASSERT_EQ(run("baker --config " + (out / "run.ini").string() + " --out " + out.string()), 0);
  EXPECT_EQ(header(out / "baker.csv"), "step,max_deviation");
  std::ifstream in(out / "baker.csv");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 5);
}

TEST(Cli, MeanFieldAndCollapseColumns) {
  const fs::path out = scratch("mf");
  ASSERT_EQ(run("meanfield --t-end 1 --out " + out.string()), 0);
  EXPECT_EQ(header(out / "meanfield.csv"), "t,M1,M2,M3");
  ASSERT_EQ(run("collapse --trials 5 --out " + out.string()), 0);
  EXPECT_EQ(header(out / "collapse.csv"), "trial,branches,s,s_av,margin");
}

TEST(Cli, BadInputsExitWithOne) {
  const fs::path out = scratch("bad");
  EXPECT_EQ(run("--experiment nonsense --out " + out.string()), 1);
  EXPECT_EQ(run("--out " + out.string()), 1);
  EXPECT_EQ(run("decay --variant exponential --xi 0.5 --out " + out.string()), 1);
  EXPECT_EQ(run("decay --no-such-flag 3"), 1);
  EXPECT_EQ(run("baker --steps 9 --grid-bits 10 --coarse-level 4 --out " + out.string()), 1);
}
