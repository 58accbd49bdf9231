#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

// Runs the CLI with the given arguments; stdout is captured, stderr discarded.
CliRun run(const std::string& args) {
  const std::string cmd = std::string(XXZ_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p)) r.out += buf.data();
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("xxztorus_cli_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Cli, HelpForEveryCommand) {
  EXPECT_EQ(run("--help").code, 0);
  for (const char* c : {"ed", "bae", "tables", "gap", "fit", "verify-integrability", "ising"}) {
    const CliRun r = run(std::string(c) + " --help");
    EXPECT_EQ(r.code, 0) << c;
    EXPECT_NE(r.out.find("--out"), std::string::npos) << c;
  }
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("nonsense").code, 1);
}

TEST(Cli, EdTwoSites) {
  const CliRun r = run("ed --n 2 --eta 1 --k 1");
  ASSERT_EQ(r.code, 0);
  std::istringstream is(r.out);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  EXPECT_EQ(header, "n_sites,eta,index,energy,method,tolerance");
  ASSERT_EQ(row.rfind("2,1,0,", 0), 0u);
  EXPECT_NEAR(std::stod(row.substr(6)), -2.0, 1e-13);
  EXPECT_FALSE(std::getline(is, row));
}

TEST(Cli, EdClusterJson) {
  const auto path = temp_file("ed.json");
  const CliRun r = run("ed --n 10 --eta 1 --k 22 --out " + path.string());
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(slurp(path));
  EXPECT_EQ(j["energies"].size(), 22u);
  EXPECT_EQ(j["cluster"]["size"], 20);
  EXPECT_NEAR(j["energies"][0].get<double>(), -13.081571329092345, 1e-10);
  std::filesystem::remove(path);
}

TEST(Cli, EdValidation) {
  EXPECT_EQ(run("ed --n 30 --eta 1 --method dense").code, 1);
  EXPECT_EQ(run("ed --n 30 --eta 1").code, 1);
  EXPECT_EQ(run("ed --n 4 --eta -1").code, 1);
  EXPECT_EQ(run("ed --n 4 --eta 1 --k 0").code, 1);
  EXPECT_EQ(run("ed --n 4 --eta 1 --method lanczos").code, 1);
  EXPECT_EQ(run("ed --n 4 --eta 1 --out spectrum.txt").code, 1);
  EXPECT_EQ(run("ed --eta 1").code, 1);
}

TEST(Cli, BaeGroundRoots) {
  const CliRun r = run("bae --n 11 --eta 1");
  ASSERT_EQ(r.code, 0);
  std::istringstream is(r.out);
  std::string header, first;
  std::getline(is, header);
  std::getline(is, first);
  EXPECT_EQ(header, "n_sites,eta,label,index_j,re_u,im_u,residual_abs,seed_kind");
  std::vector<std::string> f;
  std::stringstream ss(first);
  for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
  ASSERT_EQ(f.size(), 8u);
  EXPECT_NEAR(std::stod(f[4]), -1.5708, 5e-4);
  EXPECT_NEAR(std::stod(f[5]), 5.0953, 5e-4);
}

TEST(Cli, BaeAlternateBranchMatchesGround) {
  const auto a = temp_file("a.json");
  const auto b = temp_file("b.json");
  ASSERT_EQ(run("bae --n 9 --eta 1 --out " + a.string()).code, 0);
  ASSERT_EQ(run("bae --n 9 --eta 1 --state ground-alt --out " + b.string()).code, 0);
  const auto ja = nlohmann::json::parse(slurp(a));
  const auto jb = nlohmann::json::parse(slurp(b));
  EXPECT_NEAR(ja["energy"]["value"].get<double>(), jb["energy"]["value"].get<double>(), 1e-8);
  EXPECT_EQ(ja["status"], "converged");
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(Cli, BaeValidationAndFailure) {
  EXPECT_EQ(run("bae --n 8 --eta 1 --state ground-alt").code, 1);
  EXPECT_EQ(run("bae --n 2 --eta 1 --state excited").code, 1);
  EXPECT_EQ(run("bae --n 6 --eta 1 --tol 0").code, 1);
  EXPECT_EQ(run("bae --n 6 --eta 1 --state bogus").code, 1);
  EXPECT_EQ(run("bae --n 8 --eta 1 --max-iter 0").code, 2);
}

TEST(Cli, BaeExcitedWithReport) {
  const auto rep = temp_file("report.json");
  const CliRun r = run("bae --n 7 --eta 1 --state excited --report " + rep.string());
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(slurp(rep));
  EXPECT_NEAR(j["energy"]["value"].get<double>(), -6.4085386602208647, 1e-6);
  std::filesystem::remove(rep);
}

TEST(Cli, RootTable) {
  const auto sum = temp_file("summary.json");
  const CliRun r = run("tables --id 2 --summary " + sum.string());
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("# generated ", 0), 0u);
  const auto j = nlohmann::json::parse(slurp(sum));
  EXPECT_EQ(j["cells_checked"], 45);
  EXPECT_EQ(j["cells_passed"], 45);
  std::filesystem::remove(sum);
  EXPECT_EQ(run("tables --id 4").code, 1);
  EXPECT_EQ(run("tables --id 3 --n-max 25").code, 1);
}

TEST(Cli, VerifyIntegrability) {
  const CliRun r = run("verify-integrability --n 4 --eta 1 --trials 3");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j.size(), 3u);
  for (const auto& rec : j) EXPECT_TRUE(rec["pass"].get<bool>());
  EXPECT_EQ(run("verify-integrability --n 12 --eta 1").code, 1);
}

TEST(Cli, IsingScan) {
  const CliRun r = run("ising --n 10 --eta-list 2,4,8");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "n_sites,eta,ground_discrepancy,excited_discrepancy");
  EXPECT_NE(r.out.find("10,8,"), std::string::npos);
  EXPECT_EQ(run("ising --n 10 --eta-list 4,2").code, 1);
  EXPECT_EQ(run("ising --n 10 --eta-list 1,x").code, 1);
}

TEST(Cli, GapThenFit) {
  const auto g = temp_file("gap.csv");
  ASSERT_EQ(run("gap --eta 2 --n-min 4 --n-max 8 --out " + g.string()).code, 0);
  const CliRun f = run("fit --input " + g.string() + " --column cluster_span --n-min 4 --n-max 8");
  ASSERT_EQ(f.code, 0);
  const auto j = nlohmann::json::parse(f.out);
  EXPECT_GT(j["rate"].get<double>(), 0.0);
  EXPECT_EQ(j["points"], 5);
  EXPECT_EQ(run("fit --input " + g.string() + " --column nope").code, 1);
  EXPECT_EQ(run("fit --input /nonexistent.csv").code, 1);
  std::filesystem::remove(g);
  EXPECT_EQ(run("gap --eta 1 --n-min 3 --n-max 30").code, 1);
}
