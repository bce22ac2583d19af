#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hopflax/cli.hpp"

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = hopflax::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return std::string(HOPFLAX_FIXTURES) + "/" + name; }

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST(Cli, KappaTwo) {
  const auto r = run({"kappa", "--p", "2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "7.38905610\n");
}

TEST(Cli, KappaJson) {
  const auto r = run({"kappa", "--p", "3", "--format", "json"});
  ASSERT_EQ(r.code, 0);
  const auto doc = hopflax::io::parse_json(r.out, "stdout");
  EXPECT_GT(doc["kappa"].get<double>(), 1.0);
  EXPECT_GT(doc["a_p"].get<double>(), 0.0);
  EXPECT_LT(doc["a_p"].get<double>(), 1.0);
}

TEST(Cli, EvolveTwoPoint) {
  const auto r = run({"evolve", "--space", fixture("two_point.json"), "--cost",
                      fixture("quadratic.json"), "--field", fixture("step.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out,
            "t,x,Ptf,Qtf,dplus,dminus,maxdist,mindist\n"
            "1,a,0.5,0,0.5,0.5,1,1\n"
            "1,b,1,0.5,0,0,0,0\n");
}

TEST(Cli, EvolveGridAndJson) {
  const auto r = run({"evolve", "--space", fixture("two_point.json"), "--p", "3", "--field",
                      fixture("step.json"), "--t-grid", "0.5:2:4", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = hopflax::io::parse_json(r.out, "stdout");
  ASSERT_EQ(doc["rows"].size(), 8u);
  EXPECT_EQ(doc["rows"][0]["x"], "a");
  EXPECT_EQ(doc["rows"][0]["t"].get<double>(), 0.5);
}

TEST(Cli, ToleranceOverridesAreEchoed) {
  const auto csv = run({"evolve", "--space", fixture("two_point.json"), "--field",
                        fixture("step.json"), "--tol", "tie=1e-12"});
  ASSERT_EQ(csv.code, 0) << csv.err;
  EXPECT_EQ(csv.out.rfind("# tol tie=", 0), 0u);
  const auto json = run({"evolve", "--space", fixture("two_point.json"), "--field",
                         fixture("step.json"), "--tol", "tie=1e-12", "--format", "json"});
  const auto doc = hopflax::io::parse_json(json.out, "stdout");
  EXPECT_EQ(doc["tolerances"]["tie"].get<double>(), 1e-12);
  const auto bad = run({"evolve", "--space", fixture("two_point.json"), "--field",
                        fixture("step.json"), "--tol", "nonsense=1"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_TRUE(contains(bad.err, "ValidationError"));
}

TEST(Cli, MalformedMeasureIsAParseError) {
  const auto r = run({"ot", "--space", fixture("two_point.json"), "--mu", fixture("uniform2.json"),
                      "--nu", fixture("malformed_measure.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(contains(r.err, "ParseError"));
  EXPECT_TRUE(contains(r.err, "malformed_measure.json:1:"));
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, InvalidInputsExitTwo) {
  EXPECT_EQ(run({"ot", "--space", fixture("two_point.json"), "--mu", fixture("uniform2.json"),
                 "--nu", fixture("bad_mass.json")})
                .code,
            2);
  EXPECT_EQ(run({"ot", "--space", fixture("two_point.json"), "--mu", fixture("uniform5.json"),
                 "--nu", fixture("uniform2.json")})
                .code,
            2);
  EXPECT_EQ(run({"evolve", "--space", fixture("missing.json"), "--field", fixture("step.json")})
                .code,
            2);
  EXPECT_EQ(run({"evolve", "--space", fixture("two_point.json")}).code, 2);
  EXPECT_EQ(run({"kappa", "--p", "1.5"}).code, 2);
  EXPECT_EQ(run({"kappa", "--bogus"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
}

TEST(Cli, TransportToPointMass) {
  const auto r = run({"ot", "--space", fixture("two_point.json"), "--mu", fixture("uniform2.json"),
                      "--nu", fixture("point_b.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = hopflax::io::parse_json(r.out, "stdout");
  EXPECT_NEAR(doc["transport_cost"].get<double>(), 0.25, 1e-15);
  EXPECT_LE(std::abs(doc["duality_gap"].get<double>()), 1e-12);
}

TEST(Cli, SubdifferentialOfHalfStep) {
  const auto r = run({"cconvex", "--space", fixture("two_point.json"), "--field",
                      fixture("half_step.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = hopflax::io::parse_json(r.out, "stdout");
  EXPECT_TRUE(doc["c_convex"].get<bool>());
  EXPECT_EQ(doc["subdifferential"]["a"].size(), 2u);
  EXPECT_EQ(doc["c_gradient_minus"][0].get<double>(), 0.0);
  EXPECT_EQ(doc["c_gradient_plus"][0].get<double>(), 1.0);
}

TEST(Cli, EstimateLsiOnTwoPoint) {
  const auto r = run({"estimate", "--space", fixture("two_point.json"), "--budget", "16",
                      "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = hopflax::io::parse_json(r.out, "stdout");
  EXPECT_EQ(doc["name"], "LSI");
  EXPECT_NEAR(doc["constant_estimate"].get<double>(), 0.5, 0.025);
  EXPECT_EQ(doc["witness"]["values"].size(), 2u);
  EXPECT_EQ(run({"estimate", "--space", fixture("two_point.json"), "--inequality", "x"}).code, 2);
}

TEST(Cli, OutputIsByteStable) {
  const std::vector<std::string> args = {"estimate", "--space", fixture("path5.json"),
                                         "--inequality", "tau-lsi", "--budget", "8", "--seed", "11"};
  EXPECT_EQ(run(args).out, run(args).out);
}

TEST(Cli, HyperReportsIncrease) {
  const auto r = run({"hyper", "--space", fixture("two_point.json"), "--field",
                      fixture("step.json"), "--C", "0.525"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(contains(r.err, "H(t) increases"));
  EXPECT_EQ(r.out.rfind("field,t,k,H\n", 0), 0u);
}

TEST(Cli, WritesToOutPath) {
  const std::string path = ::testing::TempDir() + "hopflax_evolve.csv";
  const auto r = run({"evolve", "--space", fixture("two_point.json"), "--field",
                      fixture("step.json"), "--out", path});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,x,Ptf,Qtf,dplus,dminus,maxdist,mindist");
  std::remove(path.c_str());
}

TEST(Cli, VerifySmokePasses) {
  const auto r = run({"verify-paper", "--scale", "smoke", "--seed", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "gating rows passed"));
}

TEST(Cli, InjectedFaultFailsDerivativeRow) {
  const auto r = run({"verify-paper", "--scale", "smoke", "--inject-fault", "perturbed-beta"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(contains(r.err, "hopf-lax-time-derivative"));
  std::istringstream lines(r.out);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind("#", 0) == 0 || line.rfind("row", 0) == 0) continue;
    if (contains(line, " gate ") && contains(line, "FAIL")) {
      EXPECT_EQ(line.rfind("hopf-lax-time-derivative", 0), 0u) << line;
    }
  }
}
