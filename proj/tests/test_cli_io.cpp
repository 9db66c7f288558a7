#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>

#include "rotflow/io.hpp"

using namespace rotflow;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("rotflow_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliResult run(const std::string& args) const {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + ROTFLOW_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_text_file(out.string());
    r.err = read_text_file(err.string());
    return r;
  }

  static std::string scenario(const std::string& name) { return std::string("\"") + ROTFLOW_SCENARIO_DIR + "/" + name + "\""; }

  fs::path dir_;
};

}  // namespace

TEST(RunConfig, HashIsStableAndSensitive) {
  RunConfig a("tpt", {{"dim", "4"}, {"orders", "1,1"}});
  RunConfig b("tpt", {});
  b.set("orders", "1,1");
  b.set("dim", "4");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  b.set("dim", "5");
  EXPECT_NE(a.hash(), b.hash());
  RunConfig c("dispersion", {{"dim", "4"}, {"orders", "1,1"}});
  EXPECT_NE(a.hash(), c.hash());
  EXPECT_EQ(hex64(fnv1a("")), "cbf29ce484222325");
}

TEST(RunConfig, MetaAndHeader) {
  RunConfig a("kelvin", {{"seed", "42"}});
  const auto m = a.meta();
  EXPECT_EQ(m["tool"], "rotflow");
  EXPECT_EQ(m["seed"], 42u);
  EXPECT_EQ(m["config_hash"], a.hash());
  EXPECT_NE(a.header_line().find("config_hash=" + a.hash()), std::string::npos);
  EXPECT_THROW(a.require("dim"), InputError);
}

TEST(Parsers, KeyValues) {
  const auto kv = parse_key_values("# comment\n a = 1 \n\nb=x # trailing\na = 2\n");
  EXPECT_EQ(kv.at("a"), "2");
  EXPECT_EQ(kv.at("b"), "x");
  EXPECT_THROW(parse_key_values("novalue\n"), InputError);
  EXPECT_THROW(parse_key_values(" = 3\n"), InputError);
}

TEST(Parsers, Lists) {
  EXPECT_EQ(parse_int_list("1, 2,3"), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(parse_double_list("0.5,-1e-3"), (std::vector<double>{0.5, -1e-3}));
  const auto q = parse_rational_list("3/2, 0.125, -4");
  ASSERT_EQ(q.size(), 3u);
  EXPECT_EQ(q[0], Rational(3, 2));
  EXPECT_EQ(q[1], Rational(1, 8));
  EXPECT_EQ(q[2], Rational(-4));
  EXPECT_THROW(parse_int_list("1,x"), InputError);
  EXPECT_THROW(parse_double_list("1.5.2"), InputError);
  EXPECT_THROW(parse_rational("1/0"), InputError);
  EXPECT_THROW(parse_rational(""), InputError);
}

TEST_F(CliTest, NonSkewMatrixIsInputError) {
  const CliResult r = run("decompose " + scenario("nonskew_d3.txt"));
  EXPECT_EQ(r.code, 2) << r.out << r.err;
  EXPECT_NE(r.err.find("skew"), std::string::npos) << r.err;
}

TEST_F(CliTest, ZeroMatrixWarnsButSucceeds) {
  const CliResult r = run("decompose " + scenario("zero_d4.txt"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["decomposition"]["zero_axes"].size(), 4u);
  EXPECT_EQ(j["warnings"].size(), 1u);
}

TEST_F(CliTest, DecomposeCanonical) {
  const CliResult r = run("decompose " + scenario("canonical_d5.txt"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["decomposition"]["rates"].size(), 2u);
  EXPECT_NEAR(j["decomposition"]["rates"][0].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(j["decomposition"]["rates"][1].get<double>(), 1.5, 1e-12);
  EXPECT_EQ(j["meta"]["command"], "decompose");
}

TEST_F(CliTest, MissingFileAndBadArguments) {
  EXPECT_EQ(run("decompose /nonexistent/matrix.txt").code, 2);
  EXPECT_EQ(run("tpt --dim x").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("tpt --dim 4 --orders 1,1 --balance sideways").code, 2);
  EXPECT_EQ(run("dispersion --dim 4 --rates 1,1 --k 1,2").code, 2);
}

TEST_F(CliTest, TptJsonIsDeterministic) {
  const std::string args = "tpt --dim 5 --orders 2,1 --incompressible --format json";
  const CliResult a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_TRUE(j.contains("meta"));
  EXPECT_EQ(j["meta"]["config_hash"].get<std::string>().size(), 16u);
}

TEST_F(CliTest, TptTextForSimpleRotation) {
  const CliResult r = run("tpt --dim 4 --rates 1,0");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("There is no TPT constraint on u_3 nor u_4"), std::string::npos) << r.out;
  EXPECT_EQ(r.out.rfind("# rotflow", 0), 0u);
}

TEST_F(CliTest, DispersionJsonIsDeterministic) {
  const std::string args = "dispersion --dim 4 --rates 1,2 --k-grid -1,1 --emit json";
  const CliResult a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, DispersionCsvRows) {
  const CliResult r = run("dispersion --dim 4 --rates 1,1 --k 1,0,0,0 --emit csv");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("natural_vortical"), std::string::npos);
  EXPECT_NE(r.out.find("wave"), std::string::npos);
}

TEST_F(CliTest, VerifyE5Formula) {
  const CliResult r = run("dispersion --dim 5 --rates 2,3/2 --verify-e5-formula --samples 50 --seed 3");
  EXPECT_EQ(r.code, 0) << r.out << r.err;
}

TEST_F(CliTest, KelvinScenarios) {
  const CliResult shear = run("kelvin " + scenario("shear_d3.cfg"));
  EXPECT_EQ(shear.code, 0) << shear.err;
  EXPECT_NE(shear.out.find("control"), std::string::npos);
  const fs::path csv = dir_ / "series.csv";
  const CliResult tg = run("kelvin " + scenario("taylor_green_d3.cfg") + " --csv \"" + csv.string() + "\"");
  EXPECT_EQ(tg.code, 0) << tg.err;
  EXPECT_NE(tg.out.find("conserved"), std::string::npos);
  EXPECT_TRUE(fs::exists(csv));
}

TEST_F(CliTest, SelfcheckSubsetByFilter) {
  const CliResult r = run("selfcheck --filter dispersion");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("dispersion_e4"), std::string::npos);
  EXPECT_NE(r.out.find("dispersion_e5"), std::string::npos);
  EXPECT_EQ(r.out.find("kelvin"), std::string::npos);
  EXPECT_NE(r.out.find("2/2 checks passed"), std::string::npos) << r.out;
  EXPECT_EQ(run("selfcheck --filter no_such_check").code, 2);
}

TEST_F(CliTest, SelfcheckNamesPerturbedGoldenFile) {
  const fs::path gold = dir_ / "golden";
  fs::create_directories(gold);
  for (const auto& e : fs::directory_iterator(ROTFLOW_GOLDEN_DIR)) fs::copy_file(e.path(), gold / e.path().filename());
  EXPECT_EQ(run("selfcheck --filter golden --golden-dir \"" + gold.string() + "\"").code, 0);

  // seeded perturbation of one coefficient in a multi-term relation (a lone term would stay equivalent)
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(gold)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::mt19937_64 rng(20240611);
  const fs::path victim = files[std::uniform_int_distribution<std::size_t>(0, files.size() - 1)(rng)];
  auto j = nlohmann::json::parse(read_text_file(victim.string()));
  std::vector<std::size_t> multi;
  for (std::size_t i = 0; i < j["relations"].size(); ++i)
    if (j["relations"][i]["coeffs"].size() >= 2) multi.push_back(i);
  ASSERT_FALSE(multi.empty()) << victim;
  auto& coeffs = j["relations"][multi[std::uniform_int_distribution<std::size_t>(0, multi.size() - 1)(rng)]]["coeffs"];
  auto it = coeffs.begin();
  std::advance(it, static_cast<long>(std::uniform_int_distribution<std::size_t>(0, coeffs.size() - 1)(rng)));
  it.value() = "7";
  std::ofstream(victim) << j.dump(2);

  const CliResult r = run("selfcheck --filter golden --golden-dir \"" + gold.string() + "\"");
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_NE(r.out.find(victim.filename().string()), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST_F(CliTest, SelfcheckJsonIsDeterministic) {
  const fs::path a = dir_ / "a.json", b = dir_ / "b.json";
  EXPECT_EQ(run("selfcheck --filter golden,lemma2 --json \"" + a.string() + "\"").code, 0);
  EXPECT_EQ(run("selfcheck --filter golden,lemma2 --threads 1 --json \"" + b.string() + "\"").code, 0);
  EXPECT_EQ(read_text_file(a.string()), read_text_file(b.string()));
}

TEST_F(CliTest, VersionFlag) {
  const CliResult r = run("--version");
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(std::regex_search(r.out, std::regex(R"(\d+\.\d+\.\d+)")));
}
