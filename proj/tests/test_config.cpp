#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "maxent/config.hpp"

using namespace maxent;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string(MAXENT_CLI_PATH) + " " + args + " 2>&1";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("maxent_test_" + name);
}

}  // namespace

TEST(Config, EmptyTextGivesDefaults) {
  const RunConfig c = parse_config("");
  EXPECT_DOUBLE_EQ(c.settings.real("epsilon"), 0.01);
  EXPECT_EQ(c.settings.integer("seed"), 1);
  EXPECT_EQ(c.settings.list("epsilons").size(), 3u);
  EXPECT_FALSE(c.settings.was_set("epsilon"));
}

TEST(Config, SectionsAndComments) {
  const RunConfig c = parse_config("# comment\nepsilon = 0.001 ; trailing\n[closure]\nk2 = 10\n[mdp]\nn = 6\n");
  EXPECT_DOUBLE_EQ(c.settings.real("epsilon"), 0.001);
  EXPECT_DOUBLE_EQ(c.settings.real("k2"), 10.0);
  EXPECT_EQ(c.settings.integer("n"), 6);
  EXPECT_TRUE(c.settings.was_set("k2"));
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("epsilon = -1\n"), ConfigError);
  try {
    parse_config("\nbogus = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("valid keys"), std::string::npos);
  }
  try {
    parse_config("[solve]\n\n\nquadrature_nodes = many\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("quadrature_nodes"), std::string::npos);
  }
  EXPECT_THROW(parse_config("[nowhere]\n"), ConfigError);
  EXPECT_THROW(parse_config("[mdp]\nepsilon = 0.1\n"), ConfigError);
  EXPECT_THROW(parse_config("[closure]\norder = 4\n"), ConfigError);
}

TEST(Config, DottedKeysAndLists) {
  Settings s;
  s.assign("solve.moments", "0.1, 0.2", "");
  ASSERT_EQ(s.list("moments").size(), 2u);
  EXPECT_DOUBLE_EQ(s.list("moments")[1], 0.2);
  s.assign("closure.exact", "yes", "");
  EXPECT_TRUE(s.flag("exact"));
  EXPECT_THROW(s.assign("mdp.k1", "1", ""), ConfigError);
}

TEST(Cli, MissingConfigNamesThePath) {
  const CliRun r = run_cli("solve --config /nonexistent/where.ini");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("/nonexistent/where.ini"), std::string::npos);
}

TEST(Cli, BadOverrideFails) {
  const CliRun r = run_cli("solve --set nope=3");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("nope"), std::string::npos);
}

TEST(Cli, SolveWritesCsv) {
  const auto out = scratch("solve.csv");
  const CliRun r = run_cli("solve --epsilon 0.01 --set quadrature_nodes=513 --output " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream f(out);
  std::string line, header, row;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header.empty()) header = line;
    else row = line;
  }
  EXPECT_EQ(header.rfind("epsilon,J_UB,J_LB", 0), 0u);
  ASSERT_FALSE(row.empty());
  std::istringstream rs(row);
  std::string eps, ub, lb;
  std::getline(rs, eps, ',');
  std::getline(rs, ub, ',');
  std::getline(rs, lb, ',');
  EXPECT_DOUBLE_EQ(std::stod(eps), 0.01);
  EXPECT_NEAR(std::stod(ub), -0.0195, 0.01);
  EXPECT_LE(std::stod(lb), std::stod(ub) + 1e-12);
  EXPECT_TRUE(std::filesystem::exists(scratch("solve.density.csv")));
}

TEST(Cli, ShippedConfigsParse) {
  for (const auto& e : std::filesystem::directory_iterator(std::filesystem::path(MAXENT_SOURCE_DIR) / "configs")) {
    if (e.path().extension() != ".ini") continue;
    EXPECT_NO_THROW(load_config_file(e.path().string())) << e.path();
  }
}
