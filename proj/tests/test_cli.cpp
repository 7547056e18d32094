#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"

using namespace densitometer;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("densitometer_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) { return io::read_file(p.string()); }

}  // namespace

TEST(Cli, IndicesOnUnitPowerForm) {
  const auto r = run({"indices", "--seq", R"({"kind":"power","c":1,"p":2})"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("e_BT = 0.500000"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("plausible"), std::string::npos);
}

TEST(Cli, IndicesGeometricIsAFinding) {
  const auto r = run({"indices", "--seq", "geometric:c=1,rho=0.5"});
  EXPECT_EQ(r.code, 1) << r.err;
  EXPECT_NE(r.out.find("implausible"), std::string::npos);
}

TEST(Cli, Dilate1D) {
  const auto r = run({"dilate1d", "--in", "[[0,1]]", "--gamma", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = io::json::parse(r.out);
  EXPECT_EQ(j["union"], io::json::parse("[[-2,3]]"));
  EXPECT_EQ(j["measure"].get<double>(), 5.0);
}

TEST(Cli, Dilate2DIdentity) {
  const auto r = run({"dilate2d", "--in", "[[0,0,1],[3,3,1]]", "--gamma", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = io::json::parse(r.out);
  EXPECT_NEAR(j["measure"].get<double>(), j["identity_rhs"].get<double>(), 1e-12);
  EXPECT_EQ(j["identity_rhs"].get<double>(), 50.0);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({"dilate1d", "--in", "[[0,1]]", "--gamma", "1"}).code, 2);
  EXPECT_EQ(run({"dilate1d", "--in", "[[0,2],[1,3]]", "--gamma", "2"}).code, 2);
  EXPECT_EQ(run({"nonsense"}).code, 2);
  EXPECT_EQ(run({"indices"}).code, 2);
  const auto bad = run({"indices", "--seq", "power:c=1,p=1"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(bad.err.rfind("error: ", 0), 0u) << bad.err;
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, AuxfnAndDiagnostics) {
  const auto dir = fresh_dir("aux");
  const auto h = run({"--out-dir", dir.string(), "auxfn", "--seq", "power:c=0.25,p=2", "--out", "h.csv"});
  ASSERT_EQ(h.code, 0) << h.err;
  const auto rate = io::rate_from_csv(slurp(dir / "h.csv"));
  EXPECT_EQ(rate(0.01), 0.75);
  EXPECT_EQ(rate(0.5), -1.0);

  EXPECT_EQ(run({"diag", "series", "--seq", "geometric:c=1,rho=0.5"}).code, 0);
  EXPECT_EQ(run({"diag", "series", "--seq", "power:c=0.25,p=2", "--s-max", "8"}).code, 1);
  EXPECT_EQ(run({"diag", "littleo", "--seq", "power:c=0.25,p=2"}).code, 0);
  EXPECT_EQ(run({"diag", "littleo", "--seq", "geometric:c=1,rho=0.5"}).code, 1);
}

TEST(Cli, SetAndCoverRoundTrip) {
  const auto dir = fresh_dir("set");
  ASSERT_EQ(run({"--out-dir", dir.string(), "build-set", "--seq", "power:c=0.25,p=2", "--n", "3124", "--out", "set.json"}).code, 0);
  const auto model = io::set_from_json(io::parse_json(slurp(dir / "set.json"), "set"));
  EXPECT_EQ(model, build_packing(WeightSequence::power(0.25, 2.0), 3124, unit_square()));

  const auto& c27 = model.cubes()[26];
  const std::string inside = io::num(c27.x + c27.w / 2) + "," + io::num(c27.y + c27.w / 2);
  const auto r = run({"--out-dir", dir.string(), "cover", "--set", "set.json", "--out", "cover.json", "--query", inside});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("block 3: cubes 27..255"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find(inside + ": in-cover"), std::string::npos) << r.out;
  const auto cover = io::cover_from_json(io::parse_json(slurp(dir / "cover.json"), "cover"));
  EXPECT_EQ(cover, build_cover(model, 3, 4));
}

TEST(Cli, JsonRoundTrips) {
  const auto seq = WeightSequence::power(0.25, 2.0);
  EXPECT_EQ(io::sequence_from_json(io::to_json(seq)), seq);
  const auto rep = analyze(seq);
  EXPECT_EQ(io::index_report_from_json(io::json::parse(io::to_json(rep).dump())), rep);
  const auto d = dilate_2d({Rectangle{Interval(0, 1), Interval(0, 1)}, Rectangle{Interval(1.5, 2.5), Interval(3, 4)}}, 2.0);
  EXPECT_EQ(io::rect_union_from_json(io::json::parse(io::to_json(d).dump())), d);
  const auto h = build_h(choose_subsequence(seq, Schedule(20), 10));
  EXPECT_EQ(io::rate_from_csv(io::rate_csv(h)), h);
}

TEST(Cli, VerifyAllIsDeterministic) {
  const auto a = fresh_dir("verify_a"), b = fresh_dir("verify_b");
  const std::vector<std::string> common{"verify-all", "--seq", "power:c=0.25,p=2", "--points", "20", "--rects", "100"};
  auto args_a = common, args_b = common;
  args_a.insert(args_a.begin(), {"--out-dir", a.string()});
  args_b.insert(args_b.begin(), {"--out-dir", b.string()});
  const auto ra = run(args_a), rb = run(args_b);
  ASSERT_EQ(ra.code, 0) << ra.err << ra.out;
  ASSERT_EQ(rb.code, 0) << rb.err;
  EXPECT_EQ(ra.out, rb.out);
  for (const char* f : {"indices.json", "h.csv", "series.csv", "littleo.csv", "set.json", "cover.json", "report.csv",
                        "deficit.csv", "summary.csv"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}
