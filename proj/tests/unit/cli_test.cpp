#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "cli.hpp"
#include "testutil.hpp"

using projdyn::cli::run;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "projdyn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const std::string kCusp = testutil::data_file("cusp.json");

}  // namespace

TEST(Cli, SympowOfDiagonalIsDiagonal) {
  Result r = call({"sympow", kCusp, "a1", "2"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("[10x10]"), std::string::npos);
  EXPECT_NE(r.out.find("[pass] homomorphism"), std::string::npos);
  Result one = call({"sympow", kCusp, "g1", "1"});
  EXPECT_NE(one.out.find("1/2"), std::string::npos);
  EXPECT_EQ(call({"--mode", "float", "sympow", kCusp, "j1", "3"}).code, 0);
}

TEST(Cli, WeightsTable) {
  Result r = call({"weights", kCusp, "cusp"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mu4 = (0, 0)"), std::string::npos);
  EXPECT_NE(r.out.find("interior"), std::string::npos);
  EXPECT_NE(r.out.find("dim 0: 3 face(s)"), std::string::npos);
  EXPECT_NE(r.out.find("dim 1: 3 face(s)"), std::string::npos);
  EXPECT_NE(r.out.find("dim 2: 1 face(s)"), std::string::npos);
  Result j = call({"weights", kCusp, "jordan"});
  EXPECT_NE(j.out.find("nilpotence 2"), std::string::npos);
}

TEST(Cli, DynamicsExitCodes) {
  EXPECT_EQ(call({"dynamics", kCusp, "cusp", "--direction", "2,1"}).code, 0);
  EXPECT_EQ(call({"dynamics", kCusp, "cusp", "--direction", "1,2"}).code, 0);
  EXPECT_EQ(call({"dynamics", kCusp, "cusp", "--direction", "2,1", "--n-max", "1"}).code, 3);
  EXPECT_EQ(call({"dynamics", kCusp, "cusp", "--direction", "2,x"}).code, 2);
}

TEST(Cli, PeripheralListsBothSimplices) {
  Result r = call({"peripheral", kCusp, "cusp", "--m", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("count=9/9"), std::string::npos);
  EXPECT_EQ(r.out.find("v1v2v3,"), std::string::npos);
}

TEST(Cli, OrbitCloudMatchesWordCount) {
  std::string out = testing::TempDir() + "cloud.tsv";
  Result r = call({"--out", out, "orbit", testutil::data_file("sl2_pair.json"), "a,A,b,B", "--max-len", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  std::ifstream in(out);
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#' && line.rfind("word", 0) != 0) ++rows;
  EXPECT_EQ(rows, 52);
}

TEST(Cli, HilbertDistanceAndDual) {
  Result d = call({"hilbert", kCusp, "interval", "distance", "--x", "0,1", "--y", "1/2,1"});
  EXPECT_EQ(d.code, 0) << d.err;
  EXPECT_NE(d.out.find("distance 0.549306144334055"), std::string::npos);
  Result dual = call({"hilbert", kCusp, "square", "dual"});
  EXPECT_EQ(dual.code, 0);
  EXPECT_NE(dual.out.find("dual vertices (4)"), std::string::npos);
  EXPECT_EQ(call({"hilbert", kCusp, "interval", "distance", "--x", "3,1", "--y", "0,1"}).code, 2);
}

TEST(Cli, JsonReport) {
  std::string out = testing::TempDir() + "report.json";
  EXPECT_EQ(call({"--out", out, "--seed", "5", "weights", kCusp, "cusp"}).code, 0);
  std::ifstream in(out);
  std::stringstream s;
  s << in.rdbuf();
  EXPECT_NE(s.str().find("\"seed\": 5"), std::string::npos);
}

TEST(Cli, ParseErrors) {
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"weights", kCusp, "nope"}).code, 2);
  EXPECT_EQ(call({"weights", "/no/such/file.json", "cusp"}).code, 2);
  EXPECT_EQ(call({"--mode", "quad", "weights", kCusp, "cusp"}).code, 2);
  std::string bad = testing::TempDir() + "bad.json";
  std::ofstream(bad) << "{\"version\": \"projdyn-rep/1\", \"dim\": ";
  EXPECT_EQ(call({"sympow", bad, "a", "2"}).code, 2);
}

TEST(Cli, VerifyExample) {
  Result r = call({"verify-paper-example"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
}
