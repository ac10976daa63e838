#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "spinsense/cli.hpp"

using namespace spinsense;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("spinsense_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run_command(args, out_, err_);
  }

  std::string read(const std::string& name) const {
    std::ifstream f(dir_ / name, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
  }

  std::string write_profile(const std::string& text) const {
    const auto path = dir_ / "profile.ini";
    std::ofstream(path) << text;
    return path.string();
  }

  std::filesystem::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

}  // namespace

TEST_F(CliTest, ValidateDefaultProfile) {
  EXPECT_EQ(run({"validate"}), kExitOk);
  for (const char* field : {"sagnac_shift_hz", "coupling_g_hz", "thermal_phonons", "spectral_abscissa"})
    EXPECT_NE(out_.str().find(field), std::string::npos) << field;
}

TEST_F(CliTest, SpectrumWritesDocumentedColumns) {
  ASSERT_EQ(run({"spectrum", "--direction", "forward", "--nu-rot-hz", "5690", "--phi-lo", "optimal", "--output",
                 dir_.string()}),
            kExitOk);
  const std::string csv = read("spectrum.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "omega_hz,s_qq,s_pp,s_qp,r_m,n_add,n_sql,s_ff,s_qz,squeeze_db,phi_lo_rad");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 401);
}

TEST_F(CliTest, QnrSweepIsTwoDimensional) {
  const std::string profile = write_profile("[grids]\nnu_points = 5\nphi_points = 6\n");
  ASSERT_EQ(run({"qnr", "--sweep", "nu_rot,phi_lo", "--profile", profile, "--output", dir_.string()}), kExitOk);
  const std::string csv = read("qnr.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "nu_rot_hz,phi_lo_rad,qnr,masked");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 31);
  EXPECT_NE(out_.str().find("refined maximum"), std::string::npos);
}

TEST_F(CliTest, OtherSubcommandsSucceed) {
  const std::string profile = write_profile("[grids]\nomega_points = 20\nnu_points = 6\nphi_points = 12\n");
  const std::vector<std::vector<std::string>> cmds{
      {"squeeze", "--phi-lo", "qnr"},
      {"wigner"},
      {"advantage"},
      {"sweep", "--metric", "n_add_ratio", "--axes", "nu_rot,omega"},
      {"optimize", "--metric", "qnr", "--over", "phi_lo", "--goal", "max"}};
  for (auto cmd : cmds) {
    cmd.insert(cmd.end(), {"--profile", profile, "--output", dir_.string()});
    EXPECT_EQ(run(cmd), kExitOk) << cmd[0] << ": " << err_.str();
  }
  for (const char* f : {"squeeze.csv", "wigner.csv", "advantage.csv", "advantage_nu.csv", "sweep.csv", "optimize.csv"})
    EXPECT_TRUE(std::filesystem::exists(dir_ / f)) << f;
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({"spectrum", "--phi-lo", "sideways"}), kExitValidation);
  EXPECT_EQ(run({"frobnicate"}), kExitValidation);
  EXPECT_EQ(run({}), kExitValidation);
  EXPECT_EQ(run({"validate", "--profile", write_profile("[resonator]\neta_c = 1.2\n")}), kExitValidation);
  EXPECT_NE(err_.str().find("[0, 1]"), std::string::npos);
  EXPECT_EQ(run({"validate", "--profile", write_profile("[resonator]\nkappa = 3\n")}), kExitValidation);
  EXPECT_NE(err_.str().find(":2:"), std::string::npos);
  EXPECT_EQ(run({"validate", "--profile", (dir_ / "missing.ini").string()}), kExitIo);
  EXPECT_EQ(run({"spectrum", "--direction", "backward", "--nu-rot-hz", "19000", "--output", dir_.string()}),
            kExitInstability);
  EXPECT_EQ(run({"validate", "--direction", "backward", "--nu-rot-hz", "19000"}), kExitInstability);
  std::ofstream(dir_ / "blocker") << "x";
  EXPECT_EQ(run({"spectrum", "--output", (dir_ / "blocker" / "sub").string()}), kExitIo);
}

TEST_F(CliTest, DiagnosticsAreUncolouredOffTerminal) {
  run({"spectrum", "--phi-lo", "sideways"});
  EXPECT_EQ(err_.str().find('\x1b'), std::string::npos);
  EXPECT_NE(err_.str().find("error: "), std::string::npos);
}

TEST_F(CliTest, RepeatedRunsAreByteIdentical) {
  ASSERT_EQ(run({"spectrum", "--phi-lo", "qnr", "--output", dir_.string()}), kExitOk);
  const std::string first = read("spectrum.csv");
  ASSERT_EQ(run({"spectrum", "--phi-lo", "qnr", "--output", dir_.string()}), kExitOk);
  EXPECT_EQ(first, read("spectrum.csv"));
}
