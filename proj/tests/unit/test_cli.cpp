#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "conegreen/config.hpp"
#include "conegreen/runner.hpp"

using namespace conegreen;

namespace {

bool has_error(const ParseResult& r, const std::string& fragment) {
  for (const auto& e : r.errors)
    if (e.find(fragment) != std::string::npos) return true;
  return false;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, MinimalConfigGetsDefaults) {
  const auto r = parse_config("dist.kind = simple\ncone.kind = half-space  # plane\ncone.d = 2\nstart = 0,1\ntarget = 2,3\n");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.config.method, GreenMethod::dp);
  EXPECT_EQ(*r.config.start, (Point{0, 1}));
  EXPECT_DOUBLE_EQ(r.config.horizon_factor, 4.0);
  EXPECT_EQ(build_distribution(r.config).atoms().size(), 4u);
  EXPECT_EQ(build_cone(r.config).kind(), Cone::Kind::half_space);
}

TEST(Config, CollectsEveryError) {
  const auto r = parse_config("cone.d = 3\ntarget = 1,2\nmethod = mc\ncolour = blue\ntolerance.plateau = -1\n");
  EXPECT_TRUE(has_error(r, "dimension mismatch"));
  EXPECT_TRUE(has_error(r, "missing seed"));
  EXPECT_TRUE(has_error(r, "unknown key 'colour'"));
  EXPECT_TRUE(has_error(r, "tolerance.plateau"));
  EXPECT_EQ(r.errors.size(), 4u);
}

TEST(Config, OverridesWinAndFractionsParse) {
  const auto r = parse_config("seed = 1\nmethod = mc\n", {{"seed", "99"}, {"cone.beta", "3*pi/4"}});
  EXPECT_FALSE(r.ok());  // "3*pi/4" is not a number
  const auto ok = parse_config("seed = 1\nmethod = mc\ncone.kind = wedge\n", {{"seed", "99"}, {"cone.beta", "pi/2"}});
  ASSERT_TRUE(ok.ok());
  EXPECT_EQ(*ok.config.seed, 99u);
  EXPECT_DOUBLE_EQ(ok.config.wedge_opening, M_PI / 2);
  const auto pmf = parse_pmf("-1:2/3, 2:1/3");
  EXPECT_NEAR(pmf.mean(), 0.0, 1e-15);
  EXPECT_THROW(parse_pmf("-1:0.5,1:0.4"), std::invalid_argument);
}

TEST(Config, CommandRequirements) {
  const auto r = parse_config("");
  const auto e = command_errors("verify-martin", r.config);
  EXPECT_EQ(e.size(), 3u);  // start, moduli, start2
  EXPECT_EQ(command_errors("green-mc", r.config).size(), 3u);  // seed, start, target
  EXPECT_TRUE(command_errors("integral", r.config).empty());
}

TEST(Runner, IntegralPrintsValue) {
  auto r = parse_config("", {{"p", "1"}, {"d", "2"}});
  std::ostringstream out, err;
  EXPECT_EQ(run_command("integral", r.config, {}, out, err), kExitOk);
  EXPECT_EQ(out.str(), "2.0000000000\n");
}

TEST(Runner, OperationalErrorExitsOne) {
  auto r = parse_config("start = 0,0\ntarget = 1,1\n");
  std::ostringstream out, err;
  EXPECT_EQ(run_command("green-exact", r.config, {}, out, err), kExitError);
  EXPECT_NE(err.str().find("outside the cone"), std::string::npos);
}

TEST(Runner, GreenExactCsvAndDeterminism) {
  const auto dir = std::filesystem::temp_directory_path() / "cone_green_test";
  std::filesystem::create_directories(dir);
  auto r = parse_config("dist.kind = simple\ncone.d = 1\nstart = 1\ntarget = 1\nhorizon = 4\n");
  ASSERT_TRUE(r.ok());
  RunOptions o;
  o.deterministic = true;
  o.out_path = (dir / "a.csv").string();
  std::ostringstream out, err;
  ASSERT_EQ(run_command("green-exact", r.config, o, out, err), kExitOk) << err.str();
  o.out_path = (dir / "b.csv").string();
  ASSERT_EQ(run_command("green-exact", r.config, o, out, err), kExitOk);
  const std::string a = slurp(dir / "a.csv");
  EXPECT_EQ(a, slurp(dir / "b.csv"));
  EXPECT_EQ(a.rfind("# cone_green green-exact; method=dp", 0), 0u);
  EXPECT_EQ(a.find("generated="), std::string::npos);
  EXPECT_NE(a.find("n,survival,p_n_at_y,partial_green\n0,1,1,1\n1,0.5,0,1\n2,0.5,0.25,1.25\n"), std::string::npos);
  EXPECT_FALSE(std::filesystem::exists(dir / "a.csv.tmp"));
}

TEST(Runner, VerificationFailureExitsTwo) {
  auto r = parse_config(
      "dist.kind = product-rademacher\nstart = 0,1\nstart2 = 0,3\ntarget.direction = 0,1\ntarget.moduli = 6\n"
      "horizon.factor = 1\ntolerance.martin = 0.0001\n");
  ASSERT_TRUE(r.ok());
  std::ostringstream out, err;
  EXPECT_EQ(run_command("verify-martin", r.config, {}, out, err), kExitFail);
  EXPECT_NE(out.str().find("FAIL verify-martin"), std::string::npos);
}
