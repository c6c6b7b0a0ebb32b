#include "ifslab/cli.hpp"
#include "ifslab/io.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using ifslab::cli::run;

namespace {

const fs::path kConfigs = IFSLAB_CONFIG_DIR;

struct Result {
  int code;
  std::string out, err;
};

Result ifslab_run(std::vector<std::string> args) {
  args.insert(args.begin(), "ifslab");
  std::vector<const char *> argv;
  for (const auto &a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / "ifslab_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_bytes(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string cfg(const std::string &name) { return (kConfigs / name).string(); }

} // namespace

TEST(CliAttractor, CantorCloudMatchesOracle) {
  const auto dir = fresh_dir("cantor");
  const auto r = ifslab_run({"attractor", "--config", cfg("cantor.cfg"), "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("radius=", 0), 0u);
  const auto header = ifslab::io::read_attractor_header(dir / "attractor.csv");
  EXPECT_LE(header.radius, 1e-3);
  const auto cloud = ifslab::io::read_cloud_csv(dir / "attractor.csv");
  std::vector<double> xs(cloud.points().data(), cloud.points().data() + cloud.size());
  EXPECT_LE(oracle::hausdorff_to_intervals(xs, oracle::cantor_left_endpoints(18), std::pow(3.0, -18)),
            1e-3);
}

TEST(CliAttractor, SingleMapAndInfeasibleTarget) {
  const auto dir = fresh_dir("single");
  ASSERT_EQ(ifslab_run({"attractor", "--config", cfg("single_map.cfg"), "--out", dir.string()}).code, 0);
  const auto cloud = ifslab::io::read_cloud_csv(dir / "attractor.csv");
  ASSERT_EQ(cloud.size(), 1);
  EXPECT_NEAR(cloud.point(0)(0), 1.0, 1e-12);

  const auto bad = ifslab_run({"attractor", "--config", cfg("cantor.cfg"), "--out", dir.string(), "rho=0.1"});
  EXPECT_EQ(bad.code, 3);
  EXPECT_NE(bad.err.find("infeasible"), std::string::npos);
}

TEST(CliClassify, VerdictLines) {
  const auto dir = fresh_dir("classify");
  const auto c = ifslab_run({"classify", "--config", cfg("cantor.cfg"), "--out", dir.string()});
  ASSERT_EQ(c.code, 0);
  EXPECT_EQ(c.out.rfind("DISCONNECTED gap=0.33", 0), 0u) << c.out;
  const auto i = ifslab_run({"classify", "--config", cfg("interval.cfg")});
  ASSERT_EQ(i.code, 0);
  EXPECT_EQ(i.out.rfind("UNDECIDED mingap=", 0), 0u) << i.out;
  const auto s = ifslab_run({"classify", "--config", cfg("single_map.cfg")});
  EXPECT_EQ(s.out, "CONNECTED witness=single-map\n");
}

TEST(CliWitness, DiagonalExampleAndClassify) {
  const auto dir = fresh_dir("witness");
  const auto r = ifslab_run({"witness", "--config", cfg("witness_diag.cfg"), "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char *f : {"S.csv", "low-defect_T.csv", "low-defect_w.csv", "low-defect_e.csv",
                        "low-defect.witness", "low-defect.cfg", "high-defect_T.csv",
                        "high-defect.witness", "high-defect.cfg", "residuals.txt"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const auto w = ifslab::io::read_vector_csv(dir / "low-defect_w.csv");
  EXPECT_LE((w - (Eigen::VectorXd(3) << 0.9, 0.5, 0).finished()).norm(), 1e-12);
  EXPECT_EQ(read_bytes(dir / "residuals.txt"), r.out);
  const auto pos = r.out.find("image_residual=");
  ASSERT_NE(pos, std::string::npos) << r.out;
  EXPECT_LE(std::stod(r.out.substr(pos + 15)), 1e-12);

  for (const std::string name : {"low-defect", "high-defect"}) {
    const auto c = ifslab_run({"classify", "--config", (dir / (name + ".cfg")).string(), "--witness",
                               (dir / (name + ".witness")).string()});
    ASSERT_EQ(c.code, 0) << c.err;
    EXPECT_EQ(c.out, "CONNECTED witness=" + name + "\n");
  }
}

TEST(CliWitness, TrivialProjectionExitsFour) {
  const auto dir = fresh_dir("witness4");
  const auto r = ifslab_run({"witness", "--config", cfg("witness_diag.cfg"), "--out", dir.string(), "eps=0.999"});
  EXPECT_EQ(r.code, 4);
}

TEST(CliWitness, TamperedWitnessRejected) {
  const auto dir = fresh_dir("tamper");
  ASSERT_EQ(ifslab_run({"witness", "--config", cfg("witness_diag.cfg"), "--out", dir.string()}).code, 0);
  auto w = ifslab::io::read_witness(dir / "low-defect.witness");
  w.p(2) += 1e-3;
  ifslab::io::write_witness(dir / "low-defect.witness", w);
  const auto c = ifslab_run({"classify", "--config", (dir / "low-defect.cfg").string(), "--witness",
                             (dir / "low-defect.witness").string()});
  EXPECT_EQ(c.code, 3);
}

TEST(CliWitness, BatchMode) {
  const auto dir = fresh_dir("batch");
  const auto r = ifslab_run({"witness", "--out", dir.string(), "--seed", "5", "batch=20", "max_dim=5"});
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream table(dir / "witness_batch.csv");
  int lines = 0;
  for (std::string line; std::getline(table, line);)
    ++lines;
  EXPECT_EQ(lines, 1 + 20 * 2);
  const auto again = ifslab_run({"witness", "--out", dir.string(), "--seed", "5", "batch=20", "max_dim=5"});
  EXPECT_EQ(again.out, r.out);
}

TEST(CliSweep, SingleCellAndThreadDeterminism) {
  const auto one = fresh_dir("sweep1");
  const auto r = ifslab_run({"sweep", "--config", cfg("demo3d_sweep.cfg"), "--out", one.string(), "count1=1",
                             "axis2=", "count2=1"});
  // An empty axis2 value is a config error.
  EXPECT_EQ(r.code, 2);

  std::ofstream(one / "one.cfg") << "S=" << (kConfigs / "data/S_rank1.csv").string() << "\nT="
                                 << (kConfigs / "data/T_rot.csv").string()
                                 << "\naxis1=0,0,1\nrange1=0.5,0.5\ncount1=1\ntarget_r=1e-2\n";
  const auto s = ifslab_run({"sweep", "--config", (one / "one.cfg").string(), "--out", one.string()});
  ASSERT_EQ(s.code, 0) << s.err;
  std::ifstream csv(one / "sweep.csv");
  int lines = 0;
  for (std::string line; std::getline(csv, line);)
    ++lines;
  EXPECT_EQ(lines, 2);
  EXPECT_FALSE(fs::exists(one / "sweep.pgm"));

  const auto a = fresh_dir("sweep_t1"), b = fresh_dir("sweep_t8");
  const std::vector<std::string> common = {"count1=7", "count2=5", "target_r=1e-2"};
  auto args_a = std::vector<std::string>{"sweep", "--config", cfg("demo3d_sweep.cfg"), "--out", a.string(), "--threads", "1"};
  auto args_b = std::vector<std::string>{"sweep", "--config", cfg("demo3d_sweep.cfg"), "--out", b.string(), "--threads", "8"};
  args_a.insert(args_a.end(), common.begin(), common.end());
  args_b.insert(args_b.end(), common.begin(), common.end());
  ASSERT_EQ(ifslab_run(args_a).code, 0);
  ASSERT_EQ(ifslab_run(args_b).code, 0);
  EXPECT_EQ(read_bytes(a / "sweep.csv"), read_bytes(b / "sweep.csv"));
  EXPECT_EQ(read_bytes(a / "sweep.pgm"), read_bytes(b / "sweep.pgm"));
}

TEST(CliOperatorReport, DiagonalHandValues) {
  const auto dir = fresh_dir("report");
  const auto r = ifslab_run({"operator-report", "--config", cfg("operator_report.cfg"), "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("norm=0.90000000000000002\n"), std::string::npos) << r.out;
  const auto pos = r.out.find("defect_spectrum=");
  ASSERT_NE(pos, std::string::npos) << r.out;
  const auto spectrum = ifslab::io::parse_vector_inline(r.out.substr(pos + 16, r.out.find('\n', pos) - pos - 16));
  ASSERT_EQ(spectrum.size(), 3);
  EXPECT_NEAR(spectrum(0), 0.01, 1e-15);
  EXPECT_NEAR(spectrum(1), 0.25, 1e-15);
  EXPECT_NEAR(spectrum(2), 2.25, 1e-15);
  EXPECT_NE(r.out.find("eps=0.5 low_rank=2 low_norm=0.5 "), std::string::npos) << r.out;
  EXPECT_EQ(read_bytes(dir / "operator_report.txt"), r.out);
}

TEST(CliOperatorReport, SmallPerturbationOfIdentityHasTinyResiduals) {
  const auto dir = fresh_dir("report_id");
  std::ofstream(dir / "a.csv") << "0.99,0.01,0\n-0.02,1.01,0.005\n0,0.003,0.98\n";
  std::ofstream(dir / "a.cfg") << "U=a.csv\n";
  const auto r = ifslab_run({"operator-report", "--config", (dir / "a.cfg").string(), "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto pos = r.out.find("flip_residual=");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_LE(std::stod(r.out.substr(pos + 14)), 1e-10);
}

TEST(CliErrors, ExitCodes) {
  const auto dir = fresh_dir("errors");
  std::ofstream(dir / "ns.csv") << "1,2,3\n4,5,6\n";
  std::ofstream(dir / "ns.cfg") << "U=ns.csv\n";
  EXPECT_EQ(ifslab_run({"operator-report", "--config", (dir / "ns.cfg").string(), "--out", dir.string()}).code, 2);
  EXPECT_EQ(ifslab_run({"classify", "--config", (dir / "missing.cfg").string()}).code, 2);
  EXPECT_EQ(ifslab_run({"frobnicate"}).code, 2);
  EXPECT_EQ(ifslab_run({"classify", "--config", cfg("cantor.cfg"), "target_r=abc"}).code, 2);
  EXPECT_EQ(ifslab_run({"classify", "--config", cfg("cantor.cfg"), "--threads", "x"}).code, 2);
}
