#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(BREAKLAB_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, RotnumRigid) {
  auto r = run("rotnum --family rigid --rho 0.375");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("0.375"), std::string::npos);
}

TEST(Cli, RotnumTargetWritesJson) {
  auto dir = std::filesystem::temp_directory_path() / "breaklab_cli_rotnum";
  std::filesystem::remove_all(dir);
  auto r = run("rotnum --family two_break_moebius --a 0.1 --b 0.55 --sigma-a 2 --sigma-b 1 --target golden --out " +
               dir.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("0.61803398"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "rotnum.json"));
  std::filesystem::remove_all(dir);
}

TEST(Cli, ContinuedFractionGolden) {
  auto r = run("cf --rho golden --depth 8");
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::vector<long> q;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'n') continue;
    std::istringstream ls(line);
    std::string f;
    std::vector<std::string> cols;
    while (std::getline(ls, f, ',')) cols.push_back(f);
    ASSERT_EQ(cols.size(), 4u);
    q.push_back(std::stol(cols[3]));
  }
  EXPECT_EQ(q, (std::vector<long>{1, 1, 2, 3, 5, 8, 13, 21}));
}

TEST(Cli, ContinuedFractionRational) {
  auto r = run("cf --rho 0.625 --depth 10");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("rational"), std::string::npos);
}

TEST(Cli, PartitionCsv) {
  auto dir = std::filesystem::temp_directory_path() / "breaklab_cli_partition";
  std::filesystem::remove_all(dir);
  auto r = run("partition --family two_break_pl --a 0.25 --b 0.75 --sigma-a 3 --level 4 --out " + dir.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("8 intervals"), std::string::npos);
  auto csv = slurp(dir / "partition.csv");
  EXPECT_EQ(csv.rfind("level,kind,i,left,right,length\n", 0), 0u);
  // q_4 + q_3 = 5 + 3 intervals
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
  std::filesystem::remove_all(dir);
}

TEST(Cli, Conditions) {
  EXPECT_EQ(run("conditions --z 0,0.03,0.33,0.63 --x0 0 --r1 2 --eps 0.01").code, 0);
  EXPECT_EQ(run("conditions --z 0,0.9,0.95,0.99 --x0 0 --r1 2 --eps 0.01").code, 1);
  EXPECT_EQ(run("conditions --z 0,0.5,0.3,0.9 --x0 0 --r1 2 --eps 0.01").code, 1);
}

TEST(Cli, Errors) {
  EXPECT_EQ(run("scenario run /nonexistent/missing.cfg").code, 1);
  EXPECT_EQ(run("frobnicate").code, 64);
  EXPECT_EQ(run("").code, 64);
  EXPECT_EQ(run("rotnum --family rigid --rho 0.3 --tol 1e-20").code, 1);
  EXPECT_EQ(run("cf --rho 1.5").code, 1);
}

TEST(Cli, ScenarioIdentityDeterministic) {
  auto base = std::filesystem::temp_directory_path() / "breaklab_cli_identity";
  std::filesystem::remove_all(base);
  std::filesystem::create_directories(base);
  {
    std::ofstream cfg(base / "id.cfg");
    cfg << "[scenario]\nname = id\nkind = identity\norbit_length = 20000\nscales = 6,8,10\n"
           "[f1]\nfamily = two_break_moebius\na = 0.1\nb = 0.55\nsigma_a = 4\nsigma_b = 0.5\n";
  }
  auto r1 = run("scenario run " + (base / "id.cfg").string() + " --out " + (base / "a").string());
  auto r2 = run("scenario run " + (base / "id.cfg").string() + " --out " + (base / "b").string());
  EXPECT_EQ(r1.code, 0);
  EXPECT_EQ(r2.code, 0);
  EXPECT_NE(r1.out.find("\"pass\": true"), std::string::npos);
  for (const char* f : {"profile.csv", "psi.csv"}) {
    auto x = slurp(base / "a" / f), y = slurp(base / "b" / f);
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(x, y) << f;
  }
  std::filesystem::remove_all(base);
}
