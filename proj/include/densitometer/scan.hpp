#pragma once

// Sampling harness for the density lower bound ratio_N >= h(t).
//
// Points are drawn uniformly from the outer box and kept when they lie in
// K_N off every cube boundary and outside the cover blocks m..s_hi. The bound
// is asymptotic: it applies once t is below delta(x), the distance from x to
// the early cubes 1..n_m - 1 that the cover does not account for. Rectangles
// through x are therefore drawn with diameter below min(t, delta(x)); since h
// is non-increasing in t this is the bound at t restricted to rectangles that
// the asymptotic statement actually covers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "densitometer/auxfn.hpp"
#include "densitometer/dilation.hpp"
#include "densitometer/error.hpp"
#include "densitometer/setmodel.hpp"

namespace densitometer {

struct ScanConfig {
  std::vector<double> t_grid{0.25, 0.05, 0.01};
  std::size_t points = 100;
  std::size_t rects_per_point = 500;
  std::uint64_t seed = 42;
  double aspect_lo = 0.05;
  double aspect_hi = 20.0;
  int m = 3;
  int s_hi = 4;
  unsigned threads = 1;

  void validate() const {
    if (t_grid.empty()) throw Error(ErrorKind::invalid_input, "t grid is empty");
    for (double t : t_grid)
      if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorKind::invalid_input, "t values must be positive");
    if (points == 0 || rects_per_point == 0) throw Error(ErrorKind::invalid_input, "counts must be positive");
    if (!(aspect_lo >= 0.05 && aspect_hi <= 20.0 && aspect_lo <= aspect_hi))
      throw Error(ErrorKind::invalid_input, "aspect range must lie within [0.05, 20]");
  }
};

/// Thread cap from DENSITOMETER_THREADS, defaulting to the hardware count.
inline unsigned threads_from_env() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DENSITOMETER_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return std::min<unsigned>(hw, static_cast<unsigned>(v));
  }
  return hw;
}

namespace detail {

/// Substream for (seed, stream, index); independent of thread scheduling.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

/// Uniform on (0, 1), bit-reproducible across standard libraries.
inline double open_unit(std::mt19937_64& rng) {
  while (true) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += threads) fn(i);
    });
}

enum : std::uint64_t { kPointStream = 1, kRectStream = 2, kSeparationStream = 3 };

}  // namespace detail

/// Distance from p to the closed cubes 1..n_m - 1 (infinite when there are none).
inline double early_cube_distance(const CompactSetModel& model, int m, Point p) {
  const double limit = std::min(static_cast<double>(model.trunc()), std::pow(static_cast<double>(m), m) - 1.0);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < static_cast<std::size_t>(limit); ++i) {
    const auto& c = model.cubes()[i];
    const double dx = std::max({c.x - p.x, 0.0, p.x - (c.x + c.w)});
    const double dy = std::max({c.y - p.y, 0.0, p.y - (c.y + c.w)});
    best = std::min(best, std::hypot(dx, dy));
  }
  return best;
}

/// Rectangle through p with diameter below bound: uniform diameter, log-uniform
/// aspect, uniform offset; clipped to the outer box.
inline Rectangle sample_rect(std::mt19937_64& rng, Point p, double bound, const ScanConfig& cfg, const Rectangle& outer) {
  const double d = detail::open_unit(rng) * bound;
  const double log_lo = std::log(cfg.aspect_lo), log_hi = std::log(cfg.aspect_hi);
  const double aspect = std::exp(log_lo + detail::open_unit(rng) * (log_hi - log_lo));
  const double norm = std::sqrt(1.0 + aspect * aspect);
  const double width = d * aspect / norm;
  const double height = d / norm;
  const double x0 = p.x - detail::open_unit(rng) * width;
  const double y0 = p.y - detail::open_unit(rng) * height;
  const double x1 = std::max(x0 + width, std::nextafter(p.x, std::numeric_limits<double>::infinity()));
  const double y1 = std::max(y0 + height, std::nextafter(p.y, std::numeric_limits<double>::infinity()));
  Rectangle r{Interval(std::min(x0, std::nextafter(p.x, -1e300)), x1), Interval(std::min(y0, std::nextafter(p.y, -1e300)), y1)};
  auto clipped = clip(r, outer);
  return clipped ? *clipped : r;
}

struct SampledPoints {
  std::vector<Point> points;
  std::vector<double> delta;  // early_cube_distance per point
  std::size_t draws = 0;
  double acceptance = 0.0;
};

inline SampledPoints sample_points(const CompactSetModel& model, const CoverCm& cover, const ScanConfig& cfg) {
  cfg.validate();
  auto rng = detail::substream(cfg.seed, detail::kPointStream, 0);
  const auto& outer = model.outer();
  SampledPoints out;
  constexpr std::size_t kDrawLimit = 1000000;
  while (out.points.size() < cfg.points) {
    if (out.draws >= kDrawLimit &&
        static_cast<double>(out.points.size()) < 0.01 * static_cast<double>(out.draws))
      throw Error(ErrorKind::acceptance_too_low, "accepted " + std::to_string(out.points.size()) + " of " +
                                                     std::to_string(out.draws) + " draws; lower m or enlarge the outer box");
    ++out.draws;
    Point p{outer.x.lo() + detail::open_unit(rng) * outer.x.length(),
            outer.y.lo() + detail::open_unit(rng) * outer.y.length()};
    if (model.locate_in_cubes(p) != Location::outside) continue;
    if (is_exceptional(model, cover, p).overall != CoverVerdict::outside_cover_up_to_horizon) continue;
    out.points.push_back(p);
    out.delta.push_back(early_cube_distance(model, cover.m, p));
  }
  out.acceptance = static_cast<double>(out.points.size()) / static_cast<double>(out.draws);
  return out;
}

struct ScanRow {
  double t = 0.0;
  std::size_t point_id = 0;
  Point point;
  double min_ratio = 1.0;
  double h = 0.0;
  double margin = 0.0;  // min_ratio - h, signed
  std::size_t violations = 0;
  bool in_cover = false;
};

struct ScanReport {
  std::vector<ScanRow> rows;             // t-major in grid order, then point id
  std::vector<double> t_grid;
  std::vector<double> min_margin;        // per t, over non-exceptional points
  std::vector<std::size_t> violations;   // per t, over non-exceptional points
  std::size_t exceptional_violations = 0;  // on points flagged in-cover
  std::size_t total_violations = 0;        // non-exceptional only
  std::size_t evaluations = 0;
  double acceptance = 0.0;
  double seconds = 0.0;  // wall time, never serialized
};

/// Scans explicit points. Points flagged in-cover are still scanned; their
/// violations are reported apart as demonstrations of the exclusion.
inline ScanReport scan_points(const CompactSetModel& model, const CoverCm& cover, const RateFunction& h,
                              const ScanConfig& cfg, const std::vector<Point>& points) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> sorted_t = cfg.t_grid;
  std::sort(sorted_t.begin(), sorted_t.end());
  sorted_t.erase(std::unique(sorted_t.begin(), sorted_t.end()), sorted_t.end());
  std::vector<double> h_at;
  for (double t : sorted_t) h_at.push_back(h(t));

  struct PerPoint {
    bool in_cover = false;
    std::vector<double> min_ratio;  // per sorted t, cumulative over smaller t
    std::vector<std::size_t> violations;
  };
  std::vector<PerPoint> per(points.size());
  detail::parallel_for(points.size(), cfg.threads, [&](std::size_t id) {
    auto& pp = per[id];
    const Point p = points[id];
    pp.in_cover = is_exceptional(model, cover, p).overall != CoverVerdict::outside_cover_up_to_horizon;
    const double delta = early_cube_distance(model, cover.m, p);
    auto rng = detail::substream(cfg.seed, detail::kRectStream, id);
    std::vector<double> ratios;
    ratios.reserve(sorted_t.size() * cfg.rects_per_point);
    double running = 1.0;
    for (std::size_t k = 0; k < sorted_t.size(); ++k) {
      const double bound = std::min(sorted_t[k], delta);
      for (std::size_t j = 0; j < cfg.rects_per_point; ++j) {
        const auto r = sample_rect(rng, p, bound, cfg, model.outer());
        const double ratio = density_ratio(model, r).ratio_n;
        ratios.push_back(ratio);
        running = std::min(running, ratio);
      }
      pp.min_ratio.push_back(running);
      pp.violations.push_back(static_cast<std::size_t>(
          std::count_if(ratios.begin(), ratios.end(), [&](double v) { return v < h_at[k]; })));
    }
  });

  ScanReport rep;
  rep.t_grid = cfg.t_grid;
  for (double t : cfg.t_grid) {
    const std::size_t k = static_cast<std::size_t>(std::lower_bound(sorted_t.begin(), sorted_t.end(), t) - sorted_t.begin());
    double min_margin = std::numeric_limits<double>::infinity();
    std::size_t viol = 0;
    for (std::size_t id = 0; id < points.size(); ++id) {
      ScanRow row;
      row.t = t;
      row.point_id = id;
      row.point = points[id];
      row.min_ratio = per[id].min_ratio[k];
      row.h = h_at[k];
      row.margin = row.min_ratio - row.h;
      row.violations = per[id].violations[k];
      row.in_cover = per[id].in_cover;
      if (row.in_cover) {
        rep.exceptional_violations += row.violations;
      } else {
        min_margin = std::min(min_margin, row.margin);
        viol += row.violations;
      }
      rep.rows.push_back(row);
    }
    rep.min_margin.push_back(min_margin);
    rep.violations.push_back(viol);
    rep.total_violations += viol;
  }
  rep.evaluations = points.size() * sorted_t.size() * cfg.rects_per_point;
  rep.acceptance = 1.0;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

inline ScanReport scan_theorem6(const CompactSetModel& model, const CoverCm& cover, const RateFunction& h,
                                const ScanConfig& cfg) {
  const auto sampled = sample_points(model, cover, cfg);
  auto rep = scan_points(model, cover, h, cfg, sampled.points);
  rep.acceptance = sampled.acceptance;
  return rep;
}

struct SeparationReport {
  std::size_t checks = 0;
  std::size_t violations = 0;
  std::size_t skipped_in_cover = 0;   // points violating the precondition
  std::size_t skipped_top_branch = 0; // t on the vacuous top branch
};

/// For t in branch [b_{s_{l+1}}, b_{s_l}) a rectangle of diameter below t
/// through a non-exceptional point must miss every cube with index below
/// n_{s_{l+1}} (limited to the blocks the cover certifies).
inline SeparationReport separation_check(const CompactSetModel& model, const CoverCm& cover, const RateFunction& h,
                                         const ScanConfig& cfg, const std::vector<Point>& points) {
  cfg.validate();
  const Schedule schedule(cover.s_hi);
  const double certified_limit = std::min(static_cast<double>(model.trunc()), schedule.block_last(cover.s_hi));
  SeparationReport rep;
  for (std::size_t id = 0; id < points.size(); ++id) {
    const Point p = points[id];
    if (is_exceptional(model, cover, p).overall != CoverVerdict::outside_cover_up_to_horizon ||
        model.locate_in_cubes(p) != Location::outside) {
      ++rep.skipped_in_cover;
      continue;
    }
    const double delta = early_cube_distance(model, cover.m, p);
    auto rng = detail::substream(cfg.seed, detail::kSeparationStream, id);
    for (double t : cfg.t_grid) {
      const auto& branch = h.branch_at(LogReal::from_linear(t));
      if (branch.s_ell == 0) {
        ++rep.skipped_top_branch;
        continue;
      }
      const double limit = std::min(certified_limit, std::pow(static_cast<double>(branch.s_next), branch.s_next) - 1.0);
      for (std::size_t j = 0; j < cfg.rects_per_point; ++j) {
        const auto r = sample_rect(rng, p, std::min(t, delta), cfg, model.outer());
        bool hit = false;
        model.index().for_each_overlapping(model.cubes(), r, [&](std::uint32_t i) {
          if (static_cast<double>(i) + 1.0 <= limit) hit = true;
        });
        ++rep.checks;
        if (hit) ++rep.violations;
      }
    }
  }
  return rep;
}

struct DeficitRow {
  double t = 0.0;
  double worst_deficit = 0.0;  // 1 - min ratio over non-exceptional points
  double envelope = 0.0;       // f(t)
  double deficit_log = 0.0;    // worst_deficit * |log t|
  double envelope_log = 0.0;   // f(t) * |log t|
  bool within = true;          // worst_deficit <= f(t)
};

inline std::vector<DeficitRow> scan_theorem13(const ScanReport& scan, const RateFunction& f) {
  std::vector<DeficitRow> rows;
  for (double t : scan.t_grid) {
    DeficitRow row;
    row.t = t;
    double min_ratio = 1.0;
    for (const auto& r : scan.rows)
      if (r.t == t && !r.in_cover) min_ratio = std::min(min_ratio, r.min_ratio);
    row.worst_deficit = 1.0 - min_ratio;
    row.envelope = f(t);
    row.deficit_log = row.worst_deficit * std::abs(std::log(t));
    row.envelope_log = row.envelope * std::abs(std::log(t));
    row.within = row.worst_deficit <= row.envelope;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace densitometer
