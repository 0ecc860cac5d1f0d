#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "rangeland/campaign.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome cli(const std::string& args) {
  const std::string cmd = std::string(RANGELAND_CLI_PATH) + " " + args + " 2>&1";
  Outcome o;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return o;
  char buf[4096];
  while (const auto n = std::fread(buf, 1, sizeof buf, p)) o.out.append(buf, n);
  const int status = pclose(p);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("rangeland_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  ADD_FAILURE() << "no column " << name;
  return 0;
}

} // namespace

TEST(Cli, DefaultRunPrintsFiveFiniteTargets) {
  const auto o = cli("run");
  ASSERT_EQ(o.code, 0) << o.out;
  std::istringstream in(o.out);
  std::string name;
  double v = 0.0;
  int count = 0;
  while (in >> name >> v) {
    EXPECT_EQ(name, rangeland::Targets::names[count]);
    EXPECT_TRUE(std::isfinite(v));
    ++count;
  }
  EXPECT_EQ(count, 5);
}

TEST(Cli, MissingParameterFileExitsWithParamsCode) {
  const auto o = cli("run --params /nonexistent/params.json");
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.out.find("/nonexistent/params.json"), std::string::npos);
}

TEST(Cli, InvalidParameterFileExitsWithParamsCode) {
  const auto dir = fresh_dir("invalid");
  fs::create_directories(dir);
  std::ofstream(dir / "p.json") << R"({"system-env": {"growth_rate": "fast"}})";
  const auto o = cli("run --params " + (dir / "p.json").string());
  EXPECT_EQ(o.code, 2) << o.out;
  EXPECT_EQ(cli("validate --params " + (dir / "p.json").string()).code, 2);
  fs::remove_all(dir);
}

TEST(Cli, ShippedFileValidates) {
  const auto o = cli(std::string("validate --params ") + RANGELAND_DATA_DIR + "/default_params.json");
  EXPECT_EQ(o.code, 0) << o.out;
  EXPECT_NE(o.out.find("87 parameters, 11 initial stocks, 70 varied"), std::string::npos) << o.out;
}

TEST(Cli, TraceReproducesTargets) {
  const auto dir = fresh_dir("trace");
  const auto o = cli("run --trace --out " + dir.string());
  ASSERT_EQ(o.code, 0) << o.out;
  std::ifstream in(dir / "targets.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j.at("status"), "ok");
  const auto& t = j.at("targets");

  const auto env = read_csv(dir / "trace_env.csv");
  const auto socio = read_csv(dir / "trace_socio.csv");
  const auto drivers = read_csv(dir / "trace_drivers.csv");
  ASSERT_EQ(env.size(), 38401u);
  ASSERT_EQ(socio.size(), 38401u);
  ASSERT_EQ(drivers.size(), 38401u);
  EXPECT_EQ(env[1][0], "1");
  EXPECT_EQ(env.back()[0], "38400");

  const auto mean = [](const std::vector<std::vector<std::string>>& rows, std::size_t c) {
    double s = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) s += std::stod(rows[i][c]);
    return s / static_cast<double>(rows.size() - 1);
  };
  const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
  EXPECT_TRUE(close(std::stod(env.back()[column(env[0], "soil_depth")]), t.at("soil_depth_end")));
  EXPECT_TRUE(close(mean(env, column(env[0], "herbage")), t.at("avg_herbage")));
  EXPECT_TRUE(close(mean(socio, column(socio[0], "active_farmers")), t.at("avg_farmers")));
  EXPECT_TRUE(close(mean(socio, column(socio[0], "stocking_rate")), t.at("avg_stocking")));
  EXPECT_TRUE(close(mean(socio, column(socio[0], "earnings")), t.at("avg_earnings")));
  fs::remove_all(dir);
}

TEST(Cli, SmallSweepRanksAndReproduces) {
  const auto a = fresh_dir("sweep_a"), b = fresh_dir("sweep_b");
  const std::string args = " --n 8 --horizon 5 --seed 3 --method both";
  const auto o = cli("sweep --out " + a.string() + args);
  ASSERT_EQ(o.code, 0) << o.out;
  EXPECT_NE(o.out.find("executed runs = 576"), std::string::npos) << o.out;
  ASSERT_EQ(cli("sweep --workers 3 --out " + b.string() + args).code, 0);
  for (const auto* f : {"manifest.json", "matrices.csv", "targets.csv"})
    EXPECT_EQ(rangeland::read_text(a / f), rangeland::read_text(b / f)) << f;

  const auto targets = read_csv(a / "targets.csv");
  EXPECT_EQ(targets.size(), 577u);

  const auto r = cli("rank --method both --out " + a.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(a / "report.md"));
  EXPECT_TRUE(fs::exists(a / "report-jansen-saltelli.md"));
  ASSERT_EQ(cli("rank --method both --out " + b.string()).code, 0);
  EXPECT_EQ(rangeland::read_text(a / "report.md"), rangeland::read_text(b / "report.md"));
  EXPECT_EQ(rangeland::read_text(a / "sobol.json"), rangeland::read_text(b / "sobol.json"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, DryRunReportsFullCampaignSize) {
  const auto o = cli("sweep --dry-run --n 4000");
  ASSERT_EQ(o.code, 0) << o.out;
  EXPECT_NE(o.out.find("N = 4000, k = 70, scheduled runs = 288000"), std::string::npos) << o.out;
}

TEST(Cli, ExportedDefaultsRoundTrip) {
  const auto dir = fresh_dir("export");
  fs::create_directories(dir);
  ASSERT_EQ(cli("export-defaults --out " + (dir / "p.json").string()).code, 0);
  ASSERT_EQ(cli("export-defaults --canonical --out " + (dir / "c.json").string()).code, 0);
  EXPECT_EQ(cli("validate --params " + (dir / "p.json").string()).code, 0);
  EXPECT_EQ(cli("validate --params " + (dir / "c.json").string()).code, 0);
  EXPECT_EQ(cli("run --params " + (dir / "p.json").string()).out, cli("run").out);
  fs::remove_all(dir);
}

TEST(Cli, UsageErrorsExitWithOne) {
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli("run --bogus").code, 1);
  EXPECT_EQ(cli("--help").code, 0);
}
