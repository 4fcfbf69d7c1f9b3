#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "json.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(KPZLAB_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string temp_file(const std::string& name, const std::string& body) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << body;
  return path;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Cli, SimulateWritesSnapshots) {
  const auto r = run("simulate --window 6 --horizon 2 --snapshots 2 --seed 4");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "time,copy,site,height");
  EXPECT_EQ(lines(r.out), 1u + 3u * 13u);
  EXPECT_NE(r.out.find("\n0,0,0,0\n"), std::string::npos);  // apex of the wedge at time 0
}

TEST(Cli, SimulateExoticCopiesFromFile) {
  const auto copies = temp_file("copies.txt", "wedge 0\n# comment\ntwowedge -2 2\n");
  const auto rates = temp_file("asep.txt", "1 1.5\n-1 0.5\n");
  const auto r = run("simulate --model asep-exotic --a 2 --b 1 --p " + rates + " --copies " + copies +
                     " --window 8 --horizon 1 --snapshots 1");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(lines(r.out), 1u + 2u * 2u * 17u);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  for (const std::string args : {"simulate --window 10 --horizon 3 --seed 9",
                                 "metric --window 12 --horizon 2 --targets -1:2,1:2 --seed 9",
                                 "webdist --replicas 3 --n 60 --seed 9 --format json",
                                 "multitype --replicas 2 --horizon 1 --window 4 --seed 9"}) {
    const auto a = run(args), b = run(args);
    ASSERT_EQ(a.code, 0) << args;
    EXPECT_EQ(a.out, b.out) << args;
    EXPECT_FALSE(a.out.empty());
  }
}

TEST(Cli, JobCountDoesNotChangeOutput) {
  const auto a = run("multitype --quantity y --replicas 6 --t 1 --w 2 --jobs 1");
  const auto b = run("multitype --quantity y --replicas 6 --t 1 --w 2 --jobs 3");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, JsonReportsCarryHashAndVersion) {
  const auto r = run("metric --audit composition --window 8 --horizon 2 --replicas 2");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["tool_version"], "0.1.0");
  EXPECT_EQ(j["config_hash"].get<std::string>().size(), 16u);
  EXPECT_TRUE(j["pass"].get<bool>());
}

TEST(Cli, JsonTableFormat) {
  const auto r = run("metric --window 10 --horizon 1 --targets 0:1 --format json");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["rows"].size(), 1u);
  EXPECT_EQ(j["rows"][0]["y"], 0);
  EXPECT_TRUE(j.contains("config_hash"));
}

TEST(Cli, CommandLineOverridesConfig) {
  const auto cfg = temp_file("metric.ini", "seed = 3\n[metric]\nhorizon = 2\nwindow = 10\ntargets = 0:2\n");
  const auto from_cfg = run("metric --config " + cfg + " --format json");
  const auto same = run("metric --seed 3 --horizon 2 --window 10 --targets 0:2 --format json");
  const auto over = run("metric --config " + cfg + " --targets 0:1 --format json");
  ASSERT_EQ(from_cfg.code, 0);
  ASSERT_EQ(over.code, 0);
  const auto a = nlohmann::json::parse(from_cfg.out), b = nlohmann::json::parse(same.out),
             c = nlohmann::json::parse(over.out);
  EXPECT_EQ(a, b);  // same effective parameters, same hash and rows
  EXPECT_EQ(c["rows"][0]["t"], 1);
  EXPECT_NE(a["config_hash"], c["config_hash"]);
}

TEST(Cli, ExitCodeReflectsAudits) {
  const auto lo = temp_file("lo.txt", "0\n1\n2\n3\n4\n5\n6\n7\n8\n9\n");
  const auto hi = temp_file("hi.txt", "100\n101\n102\n103\n104\n105\n106\n107\n108\n109\n");
  EXPECT_EQ(run("stats ks --a " + lo + " --b " + lo).code, 0);
  const auto bad = run("stats ks --a " + lo + " --b " + hi);
  EXPECT_EQ(bad.code, 1);
  EXPECT_DOUBLE_EQ(nlohmann::json::parse(bad.out)["statistic"].get<double>(), 1.0);

  const auto cfg = temp_file("broken.ini",
                             "[audit]\naxioms = monotonicity\n[monotonicity]\ncouplings = 1:1\nseeds = 10\n"
                             "mismatched_clocks = true\n");
  EXPECT_EQ(run("audit --config " + cfg).code, 1);
  EXPECT_EQ(run("audit --axioms shift --config " + cfg).code, 0);
}

TEST(Cli, ErrorsExitWithTwo) {
  EXPECT_EQ(run("simulate --model nonsense").code, 2);
  EXPECT_EQ(run("audit --axioms geodesics").code, 2);
  EXPECT_EQ(run("horizon --k 3").code, 2);
  EXPECT_NE(run("no-such-command").code, 0);
}

TEST(Cli, WebOracleAndLightCone) {
  for (const std::string audit : {"oracle", "lightcone"}) {
    const auto r = run("webdist --audit " + audit + " --replicas 5 --box 6");
    ASSERT_EQ(r.code, 0) << audit;
    EXPECT_EQ(nlohmann::json::parse(r.out)["mismatches"], 0);
  }
}

TEST(Cli, HorizonWritesIncrementTable) {
  const auto table = ::testing::TempDir() + "increments.csv";
  const auto r = run("horizon --replicas 10 --epsilon 0.25 --grid -0.5,0.5 --table " + table);
  ASSERT_TRUE(r.code == 0 || r.code == 1);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["tests"].size(), 6u);
  std::ifstream in(table);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "replica,line,dx,before,after");
}
