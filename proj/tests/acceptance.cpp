// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "oracles.hpp"

using namespace densitometer;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& id, double limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= limit_s) {
    o.pass = false;
    o.detail += "; runtime limit exceeded";
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s (%.2f s, limit %.0f s)\n", o.pass ? "PASS" : "FAIL", id.c_str(), o.detail.c_str(), secs, limit_s);
  std::fflush(stdout);
}

std::string g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

const WeightSequence kCanonical = WeightSequence::power(0.25, 2.0);

Outcome dilation_1d() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> count(1, 50);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto ivs = oracle::random_disjoint_intervals(rng, count(rng));
    double len = 0.0;
    for (const auto& iv : ivs) len += iv.length();
    for (double gamma : {1.5, 2.0, 4.0, 8.0, 64.0})
      worst = std::max(worst, rel(dilate_1d(ivs, gamma).measure(), (2 * gamma + 1) * len));
  }
  return {worst <= 1e-9, "worst relative error " + g(worst)};
}

Outcome dilation_2d() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> count(1, 40);
  double worst = 0.0, worst_raster = 0.0;
  bool raster_ok = true;
  constexpr int kRes = 2048;
  for (int trial = 0; trial < 200; ++trial) {
    const auto cubes = oracle::random_cubes(rng, count(rng), 1.0);
    double w2 = 0.0;
    for (const auto& c : cubes) w2 += c.area();
    for (double gamma : {2.0, 4.0, 8.0}) {
      const auto d = dilate_2d(cubes, gamma);
      worst = std::max(worst, rel(d.measure(), (2 * gamma + 1) * (2 * gamma + 1) * w2));
      const auto rects = d.rects();
      double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
      for (const auto& r : rects) {
        x0 = std::min(x0, r.x.lo());
        x1 = std::max(x1, r.x.hi());
        y0 = std::min(y0, r.y.lo());
        y1 = std::max(y1, r.y.hi());
      }
      const double side = std::max(x1 - x0, y1 - y0);
      const Rectangle bb{Interval(x0, x0 + side), Interval(y0, y0 + side)};
      const double pixel = side / kRes;
      // Each rectangle edge misclassifies at most one strip of pixels.
      double tol = 0.0;
      for (const auto& r : rects) tol += (r.x.length() + r.y.length() + 2 * pixel) * 2 * pixel;
      const double err = std::abs(oracle::raster_area(rects, bb, kRes) - d.measure());
      worst_raster = std::max(worst_raster, err / tol);
      raster_ok = raster_ok && err <= tol;
    }
  }
  return {worst <= 1e-9 && raster_ok,
          "worst relative error " + g(worst) + ", worst raster error / resolution bound " + g(worst_raster)};
}

Outcome hand_instances() {
  const auto a = dilate_1d({Interval(0, 1)}, 2.0);
  const bool a_ok = a.union_set.size() == 1 && a.union_set.items()[0] == Interval(-2, 3);
  const auto b = detail::dilate_1d_any(std::vector<Interval>{Interval(0, 1), Interval(2, 3)}, 1.0);
  const auto c = detail::dilate_2d_any(std::vector<Rectangle>{{Interval(0, 1), Interval(0, 1)}}, 1.0);
  const bool c_ok = c.rects().size() == 1 && c.rects()[0] == Rectangle{Interval(-1, 2), Interval(-1, 2)};
  const auto d = detail::dilate_2d_any(
      std::vector<Rectangle>{{Interval(0, 1), Interval(0, 1)}, {Interval(1.5, 2.5), Interval(3, 4)}}, 1.0);
  const bool ok = a_ok && b.measure() == 6.0 && c_ok && c.measure() == 9.0 && d.measure() == 18.0;
  return {ok, "1D (-2,3) " + std::string(a_ok ? "ok" : "wrong") + ", pair " + g(b.measure()) + ", cube " +
                  g(c.measure()) + ", overlap case " + g(d.measure())};
}

Outcome indices() {
  const auto probes = default_probes(1e6);
  const auto grid = linear_grid(0.01, 1.0, 0.01);
  bool ok = true;
  std::string detail;
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const auto seq = WeightSequence::power(1.0, p);
    const double bt = index_e_bt(seq, probes).estimate;
    const double bm = index_e_bm(seq, grid, probes).estimate;
    const double a = index_a(seq, probes).estimate;
    ok = ok && std::abs(bt - 1 / p) <= 0.02 && std::abs(bm - 1 / p) <= 0.02 && std::abs(a - 1 / p) <= 0.05;
    detail += "p=" + g(p) + " [" + g(bt) + " " + g(bm) + " " + g(a) + "] ";
  }
  const auto geo = WeightSequence::geometric(1.0, 0.5);
  const double gbt = index_e_bt(geo, probes).estimate, ga = index_a(geo, probes).estimate;
  ok = ok && gbt <= 0.01 && ga <= 0.01;
  return {ok, detail + "geometric [" + g(gbt) + " " + g(ga) + "]"};
}

Outcome subsequence_and_h() {
  const auto sel = choose_subsequence(kCanonical, Schedule(12), 6);
  bool ok = sel.s_ell == std::vector<int>{1, 2, 3, 4, 5, 6};
  const double expect[] = {1.0 / 3.0, 0.0769, 0.0157, 0.00256, 3.43e-4};
  double worst = 0.0;
  for (int s = 1; s <= 5; ++s) worst = std::max(worst, rel(sel.b_at(s).linear(), expect[s - 1]));
  const auto h = build_h(sel);
  // The hand values are quoted to three or four digits; 0.0157 is 0.0156863.. rounded.
  ok = ok && worst <= 1e-3 && h(0.01) == 0.75 && h.branches().front().value == -1.0 && h(0.5) == -1.0;
  return {ok, "worst b relative error " + g(worst) + ", h(0.01) = " + g(h(0.01)) + ", top " + g(h(0.5))};
}

Outcome series_canonical() {
  const auto traces = series_diagnostics(kCanonical, Schedule(8), 1e-12);
  bool ok = true;
  std::string detail;
  for (const auto& tr : traces) {
    ok = ok && tr.reached_tol;
    detail += std::string(to_string(tr.kind)) + " last term " + g(tr.terms.back().linear()) + "; ";
  }
  const auto wide = series_diagnostics(kCanonical, Schedule(40), 1e-12);
  for (const auto& tr : wide) detail += std::string(to_string(tr.kind)) + " reaches tol at s=" + std::to_string(tr.s_reached) + "; ";
  return {ok, detail};
}

Outcome series_geometric() {
  const auto traces = series_diagnostics(WeightSequence::geometric(1.0, 0.5), Schedule(12), 1e-12);
  const double sum = traces[0].sum;
  return {std::abs(sum - 2.5000001) <= 1e-6, "sum " + io::num(sum)};
}

Outcome little_o() {
  const Schedule sch(20);
  const auto tr = little_o_check(choose_subsequence(kCanonical, sch, 9), kCanonical, sch);
  bool ok = tr.product.size() >= 6;
  std::string detail;
  for (std::size_t i = 2; i < tr.product.size() && i < 8; ++i) {
    detail += g(tr.product[i]) + " ";
    if (i > 2) ok = ok && tr.product[i] < tr.product[i - 1];
  }
  const double want[] = {1.49, 0.997, 0.635};
  for (int i = 0; i < 3 && ok; ++i) ok = rel(tr.product[2 + i], want[i]) <= 0.02;
  const auto geo = WeightSequence::geometric(1.0, 0.5);
  const auto gtr = little_o_check(choose_subsequence(geo, sch, 8), geo, sch);
  ok = ok && gtr.verdict == DecayVerdict::diverging;
  return {ok, "canonical " + detail + "(" + to_string(tr.verdict) + "), geometric " + to_string(gtr.verdict)};
}

Outcome theorem6_scan() {
  const auto model = build_packing(kCanonical, 3124, unit_square());
  const auto cover = build_cover(model, 3, 4);
  const auto h = build_h(choose_subsequence(kCanonical, Schedule(12), 6));
  ScanConfig cfg;
  cfg.threads = threads_from_env();
  const auto rep = scan_theorem6(model, cover, h, cfg);
  const auto& c = model.cubes()[299];
  const Point adversary{c.x + c.w / 2, c.y + c.w / 2};
  const bool flagged = is_exceptional(model, cover, adversary).overall == CoverVerdict::in_cover;
  const auto adv = scan_points(model, cover, h, cfg, {adversary});
  const bool ok = rep.total_violations == 0 && rep.evaluations == 150000 && flagged && adv.exceptional_violations > 0;
  std::string margins;
  for (double m : rep.min_margin) margins += g(m) + " ";
  return {ok, std::to_string(rep.total_violations) + " violations over " + std::to_string(rep.evaluations) +
                  " evaluations, min margins " + margins + "acceptance " + g(rep.acceptance) + "; cube-300 centre " +
                  (flagged ? "in-cover" : "NOT flagged") + " with " + std::to_string(adv.exceptional_violations) +
                  " violations"};
}

Outcome cover_measure() {
  double prev = INFINITY;
  bool monotone = true;
  for (int m = 1; m <= 10; ++m) {
    const double b = cover_measure_bound(kCanonical, m);
    monotone = monotone && b <= prev;
    prev = b;
  }
  // Hand summation with r_n between 0.25/n and 0.25/(n-1).
  double lo = 0.0, hi = 0.0;
  for (int s = 3; s <= 12; ++s) {
    const double n = std::pow(s, s), f = (2 * std::ldexp(1.0, s) + 1) * (2 * std::ldexp(1.0, s) + 1);
    lo += f * 0.25 / n;
    hi += f * 0.25 / (n - 1);
  }
  const double b3 = cover_measure_bound(kCanonical, 3), b6 = cover_measure_bound(kCanonical, 6);
  const bool ok = monotone && lo <= b3 * (1 + 1e-12) && b3 <= hi * (1 + 1e-12) && std::abs(b3 - 4.3) <= 0.05 * 4.3 && b6 < 0.15;
  return {ok, "m=3 bound " + g(b3) + " in hand bracket [" + g(lo) + ", " + g(hi) + "], m=6 bound " + g(b6) +
                  (monotone ? ", non-increasing" : ", NOT monotone")};
}

Outcome determinism() {
  std::vector<fs::path> dirs;
  std::vector<std::string> outs;
  for (const char* tag : {"a", "b"}) {
    const auto dir = fs::temp_directory_path() / (std::string("densitometer_accept_") + tag);
    fs::remove_all(dir);
    std::ostringstream out, err;
    const int code = cli::run({"--out-dir", dir.string(), "verify-all", "--seq", "power:c=0.25,p=2", "--seed", "42"}, out, err);
    if (code != 0) return {false, "verify-all exit " + std::to_string(code) + ": " + err.str()};
    dirs.push_back(dir);
    outs.push_back(out.str());
  }
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dirs[0])) {
    const auto name = entry.path().filename();
    if (!fs::exists(dirs[1] / name) || io::read_file(entry.path().string()) != io::read_file((dirs[1] / name).string()))
      return {false, name.string() + " differs"};
    ++files;
  }
  return {files == 9 && outs[0] == outs[1], std::to_string(files) + " files byte-identical"};
}

}  // namespace

int main() {
  criterion("1 dilation identity 1D", 5, dilation_1d);
  criterion("2 dilation identity 2D and raster", 60, dilation_2d);
  criterion("3 hand instances", 1, hand_instances);
  criterion("4 index estimators", 10, indices);
  criterion("5 subsequence and h", 5, subsequence_and_h);
  criterion("6a canonical series below 1e-12 by s<=8", 5, series_canonical);
  criterion("6b geometric series sum", 5, series_geometric);
  criterion("7 little-o trace", 5, little_o);
  criterion("8 density scan", 300, theorem6_scan);
  criterion("9 cover measure bound", 5, cover_measure);
  criterion("10 verify-all determinism", 600, determinism);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
