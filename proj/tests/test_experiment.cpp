#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "composita/experiment.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = COMPOSITA_CLI_PATH;
const fs::path kConfigs = COMPOSITA_CONFIG_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int code = -1;
  std::string out;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("composita_cli_" + std::to_string(::getpid()) + "_" +
                                       ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const nlohmann::json& j) {
    const auto p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }

  nlohmann::json config(const std::string& name) const { return nlohmann::json::parse(slurp(kConfigs / name)); }

  CliResult run(const std::string& study, const fs::path& cfg, const std::string& out, const std::string& extra = "") {
    const auto log = dir_ / "stdout.txt";
    const std::string cmd = "COMPOSITA_LOG=quiet '" + kCli + "' " + study + " --config '" + cfg.string() + "' --out '" +
                            (dir_ / out).string() + "' " + extra + " > '" + log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
  }

  // Small rates config that resolves the tree spec from the shipped configs.
  nlohmann::json small_rates() const {
    auto j = config("rates_small.json");
    j["dag_file"] = (kConfigs / "binary_tree_dag.json").string();
    return j;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, RatesWritesCsvSvgAndSummary) {
  const auto r = run("rates", write_config("r.json", small_rates()), "out");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("shallow_slope="), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("deep_slope="), std::string::npos);
  EXPECT_NE(r.out.find("d_G=2"), std::string::npos);
  const auto csv = slurp(dir_ / "out" / "rates_small.csv");
  EXPECT_EQ(csv.rfind("# composita " COMPOSITA_VERSION " config_hash=fnv1a64:", 0), 0u);
  EXPECT_NE(csv.find("\nN,shallow_err,deep_err,bound,probe_mesh,seed\n"), std::string::npos);
  EXPECT_NE(slurp(dir_ / "out" / "rates_small.svg").find("<!-- composita"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "out" / "rates_small.csv.tmp"));
}

TEST_F(Cli, ShippedConfigPathsResolve) {
  const auto r = run("dag-eval", kConfigs / "dag_eval_nine_inputs.json", "out");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("sink 'h19'"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("d_G=4"), std::string::npos);
  EXPECT_NE(r.out.find("10 inputs evaluated"), std::string::npos);
  const auto csv = slurp(dir_ / "out" / "dag_eval_nine_inputs.csv");
  EXPECT_NE(csv.find("\nx1,x2,x3,x4,x5,x6,x7,x8,x9,sink,"), std::string::npos);
}

TEST_F(Cli, ShortNListIsAValidationError) {
  auto j = small_rates();
  j["N"] = {32};
  const auto r = run("rates", write_config("bad.json", j), "out");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("'N' needs at least 4 values, got 1"), std::string::npos) << r.out;
  EXPECT_FALSE(fs::exists(dir_ / "out" / "rates_small.csv"));
}

TEST_F(Cli, UnknownKeysAndBoundsAreRejected) {
  auto j = small_rates();
  j["sampel_factor"] = 3;
  auto r = run("rates", write_config("typo.json", j), "out");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("unknown key 'sampel_factor'"), std::string::npos) << r.out;

  j = config("kernel_table.json");
  j["q"] = 9;
  r = run("kernel-table", write_config("q.json", j), "out");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("'q' = 9 outside [1, 6]"), std::string::npos) << r.out;

  j = config("propagation_check.json");
  r = run("rates", write_config("wrong.json", j), "out");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("not 'rates'"), std::string::npos) << r.out;

  std::ofstream(dir_ / "broken.json") << "{\"study\": ";
  r = run("rates", dir_ / "broken.json", "out");
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, BadDagIsAValidationError) {
  auto j = small_rates();
  j.erase("dag_file");
  j["dag"] = {{"input_count", 2}, {"nodes", {{{"id", "a"}, {"children", {"b"}}, {"function", {{"type", "identity"}}}},
                                             {{"id", "b"}, {"children", {"a"}}, {"function", {{"type", "identity"}}}}}}};
  const auto r = run("rates", write_config("cyc.json", j), "out");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("cycle"), std::string::npos) << r.out;
}

TEST_F(Cli, NumericalContractFailureExitsThree) {
  auto j = config("kernel_table.json");
  j["tolerance"] = 0.0;
  j["l_max"] = 8;
  const auto r = run("kernel-table", write_config("k.json", j), "out");
  EXPECT_EQ(r.code, 3) << r.out;
  EXPECT_TRUE(fs::exists(dir_ / "out" / "kernel_table_q2.csv"));
}

TEST_F(Cli, PropagationCheckReportsZeroViolations) {
  const auto r = run("propagation-check", kConfigs / "propagation_check.json", "out");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("100 instances x 200 probes, 0 violations"), std::string::npos) << r.out;
}

TEST_F(Cli, KernelTableAndDemo) {
  auto r = run("kernel-table", kConfigs / "kernel_table.json", "out");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto table = slurp(dir_ / "out" / "kernel_table_q2.csv");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 2 + 37);

  auto j = config("demo_d_plot.json");
  j["n_max"] = 12;
  j["lat_cells"] = 12;
  j["lon_cells"] = 24;
  r = run("demo-D-plot", write_config("d.json", j), "out");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(slurp(dir_ / "out" / "demo_D.svg").find("D f"), std::string::npos);
  const auto csv = slurp(dir_ / "out" / "demo_D.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2 + 12 * 24);
}

TEST_F(Cli, RatesOutputIsByteIdenticalAcrossRunsAndThreads) {
  const auto cfg = write_config("r.json", small_rates());
  ASSERT_EQ(run("rates", cfg, "a", "--threads 1").code, 0);
  ASSERT_EQ(run("rates", cfg, "b", "--threads 1").code, 0);
  ASSERT_EQ(run("rates", cfg, "c", "--threads 3").code, 0);
  const auto a = slurp(dir_ / "a" / "rates_small.csv");
  EXPECT_EQ(a, slurp(dir_ / "b" / "rates_small.csv"));
  EXPECT_EQ(a, slurp(dir_ / "c" / "rates_small.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "rates_small.svg"), slurp(dir_ / "c" / "rates_small.svg"));
}

TEST_F(Cli, SeedOverrideChangesOutputAndHash) {
  const auto cfg = write_config("r.json", small_rates());
  ASSERT_EQ(run("rates", cfg, "a").code, 0);
  ASSERT_EQ(run("rates", cfg, "b", "--seed 11").code, 0);
  const auto a = slurp(dir_ / "a" / "rates_small.csv"), b = slurp(dir_ / "b" / "rates_small.csv");
  EXPECT_NE(a.substr(0, a.find('\n')), b.substr(0, b.find('\n')));
  EXPECT_NE(b.find(",11\n"), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_NE(run("rates", dir_ / "missing.json", "out").code, 0);
  EXPECT_NE(run("nonsense", kConfigs / "kernel_table.json", "out").code, 0);
}

TEST(ExperimentLib, HashAndAtomicWrite) {
  EXPECT_EQ(composita::experiment::fnv1a64(""), 14695981039346656037ULL);
  EXPECT_EQ(composita::experiment::hex64(composita::experiment::fnv1a64("a")), "af63dc4c8601ec8c");
  const auto dir = fs::temp_directory_path() / ("composita_atomic_" + std::to_string(::getpid()));
  composita::experiment::write_atomic(dir, "x.txt", "one");
  composita::experiment::write_atomic(dir, "x.txt", "two");
  EXPECT_EQ(slurp(dir / "x.txt"), "two");
  EXPECT_FALSE(fs::exists(dir / "x.txt.tmp"));
  fs::remove_all(dir);
}
