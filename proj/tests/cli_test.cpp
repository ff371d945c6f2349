// Drives the installed CLI binary end to end: data generation, training,
// recovery, verification, experiment CSVs, plots, and exit codes.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

namespace fs = std::filesystem;

std::string cli_path() { return SPARSEGEN_CLI_PATH; }

int run(const std::string& args) {
  const std::string command = cli_path() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string run_capture(const std::string& args) {
  const fs::path tmp = fs::temp_directory_path() / "sparsegen_cli_capture.txt";
  const std::string command = cli_path() + " " + args + " > " + tmp.string() + " 2>&1";
  [[maybe_unused]] const int status = std::system(command.c_str());
  std::ifstream is(tmp);
  std::ostringstream os;
  os << is.rdbuf();
  fs::remove(tmp);
  return os.str();
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "sparsegen_cli_test";
    fs::create_directories(dir_);
    ASSERT_EQ(run("make-data --kind digits --count 60 --seed 3 --out " +
                  (dir_ / "digits.idx").string()),
              0);
    ASSERT_EQ(run("make-data --kind glyphs --count 20 --seed 4 --out " +
                  (dir_ / "glyphs.idx").string()),
              0);
    ASSERT_EQ(run("vae-train --data " + (dir_ / "digits.idx").string() +
                  " --limit 50 --hidden 24 --latent 4 --epochs 2 --batch 10 --seed 5 --out " +
                  (dir_ / "decoder.mlpw").string() + " --trace " +
                  (dir_ / "trace.csv").string()),
              0);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }
  static fs::path dir_;
};

fs::path CliPipeline::dir_;

TEST_F(CliPipeline, TrainWroteDecoderAndTrace) {
  EXPECT_TRUE(fs::exists(dir_ / "decoder.mlpw"));
  const std::string trace = read_file(dir_ / "trace.csv");
  EXPECT_EQ(trace.rfind("epoch,mean_neg_elbo,mean_bce,mean_kl", 0), 0u);
  EXPECT_GT(std::count(trace.begin(), trace.end(), '\n'), 2);
}

TEST_F(CliPipeline, SenseRoundTripsEnsembleFile) {
  const auto ens = dir_ / "a.csen";
  const auto first = run_capture("sense --data " + (dir_ / "digits.idx").string() +
                                 " --index 1 --m 12 --noise-std 0.1 --seed 9 --save-ensemble " +
                                 ens.string() + " --out -");
  const auto second = run_capture("sense --data " + (dir_ / "digits.idx").string() +
                                  " --index 1 --load-ensemble " + ens.string() + " --out -");
  EXPECT_EQ(first, second);
  EXPECT_NE(first.find("\"y\""), std::string::npos);
}

TEST_F(CliPipeline, RecoverEmitsResultJson) {
  const std::string out = run_capture(
      "recover --alg sparse-gen --weights " + (dir_ / "decoder.mlpw").string() + " --data " +
      (dir_ / "digits.idx").string() +
      " --index 0 --m 200 --seed 1 --iters 40 --restarts 2 --out -");
  EXPECT_NE(out.find("\"algorithm\": \"sparse-gen\""), std::string::npos);
  EXPECT_NE(out.find("\"l2_err\""), std::string::npos);
  EXPECT_NE(out.find("\"x_hat\""), std::string::npos);
}

TEST_F(CliPipeline, ConfigFileFlagsWinOverFile) {
  const auto cfg = dir_ / "solver.json";
  {
    std::ofstream os(cfg);
    os << R"({"lambda": 7.5, "iterations": 30, "mode": "alternating-prox"})";
  }
  const std::string blob = (dir_ / "xhat.f64").string();
  const std::string out = run_capture(
      "recover --alg sparse-gen --weights " + (dir_ / "decoder.mlpw").string() + " --data " +
      (dir_ / "digits.idx").string() + " --index 0 --m 100 --config " + cfg.string() +
      " --restarts 1 --xhat-blob " + blob + " --out -");
  EXPECT_NE(out.find("\"xhat_blob\""), std::string::npos);
  EXPECT_TRUE(fs::exists(blob));
  EXPECT_EQ(fs::file_size(blob), 784u * 8u);
}

TEST_F(CliPipeline, ExperimentDeterministicAndPlottable) {
  const auto csv_a = dir_ / "run_a.csv";
  const auto csv_b = dir_ / "run_b.csv";
  const std::string grid_args =
      "experiment --data " + (dir_ / "digits.idx").string() +
      " --algs lasso,sparse-gen --m 50,100 --weights " + (dir_ / "decoder.mlpw").string() +
      " --images 3 --base-seed 11 --iters 30 --restarts 1 --lasso-iters 60 --out ";
  ASSERT_EQ(run(grid_args + csv_a.string()), 0);
  ASSERT_EQ(run(grid_args + csv_b.string()), 0);
  EXPECT_EQ(read_file(csv_a), read_file(csv_b));

  const auto svg = dir_ / "plot.svg";
  ASSERT_EQ(run("plot --csv " + csv_a.string() + " --metric l2 --out " + svg.string()), 0);
  const std::string content = read_file(svg);
  EXPECT_EQ(content.rfind("<svg", 0), 0u);
  EXPECT_NE(content.find("sparse-gen"), std::string::npos);
}

TEST_F(CliPipeline, TransferRuns) {
  const auto csv = dir_ / "transfer.csv";
  ASSERT_EQ(run("transfer --source-weights " + (dir_ / "decoder.mlpw").string() + " --data " +
                (dir_ / "glyphs.idx").string() +
                " --algs gen,sparse-gen --m 60 --images 2 --iters 25 --restarts 1 --out " +
                csv.string()),
            0);
  const std::string content = read_file(csv);
  EXPECT_NE(content.find("gen"), std::string::npos);
}

TEST_F(CliPipeline, VerifyEmitsJsonReport) {
  const std::string rip = run_capture("verify --property rip --n 64 --m 48 --l 3 --trials 100");
  EXPECT_NE(rip.find("\"property\": \"rip\""), std::string::npos);
  const std::string lemma = run_capture(
      "verify --property lemma1 --n 10 --m 8 --l 1 --eps-max 0.05 --trials 10 --latent 2");
  EXPECT_NE(lemma.find("\"violations\": 0"), std::string::npos);
}

TEST_F(CliPipeline, GridSearchWritesCsv) {
  const auto csv = dir_ / "grid.csv";
  ASSERT_EQ(run("grid-search --data " + (dir_ / "digits.idx").string() + " --weights " +
                (dir_ / "decoder.mlpw").string() +
                " --m 60 --images 2 --lambdas 10,100 --steps 0.05,0.01 --iters 25 --restarts 1 "
                "--out " +
                csv.string()),
            0);
  const std::string content = read_file(csv);
  EXPECT_EQ(content.rfind("lambda,step_size,mean_l2_err,mean_measurement_err", 0), 0u);
  EXPECT_EQ(std::count(content.begin(), content.end(), '\n'), 5);
}

TEST(CliExitCodes, UsageDataAndNumericErrors) {
  EXPECT_EQ(run("no-such-command"), 1);
  EXPECT_EQ(run("recover --bogus-flag"), 1);
  EXPECT_EQ(run("plot --csv /nonexistent.csv --metric l2 --out /tmp/x.svg"), 2);

  const fs::path bad = fs::temp_directory_path() / "sparsegen_bad_magic.idx";
  {
    std::ofstream os(bad, std::ios::binary);
    os << "not an idx file at all";
  }
  EXPECT_EQ(run("vae-train --data " + bad.string() + " --out /tmp/x.mlpw"), 2);
  fs::remove(bad);
  EXPECT_EQ(run("--help"), 0);
}

}  // namespace
