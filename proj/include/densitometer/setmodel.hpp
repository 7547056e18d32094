#pragma once

// Truncated compact sets K_N = closed(outer) minus the first N open cubes of a
// weight sequence, shelf-packed; exact density ratios against rectangles;
// the exceptional cover C_m = union over s >= m of the 2^s-dilations of the
// cube blocks n_s .. n_{s+1}-1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "densitometer/auxfn.hpp"
#include "densitometer/dilation.hpp"
#include "densitometer/error.hpp"
#include "densitometer/weights.hpp"

namespace densitometer {

/// Open square (x, x+w) * (y, y+w).
struct Cube {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;

  Rectangle rect() const { return {Interval(x, x + w), Interval(y, y + w)}; }
  friend bool operator==(const Cube&, const Cube&) = default;
};

/// Uniform bucket grid over the outer box. A cube is reported for a query
/// rectangle only from the bucket holding the lower-left corner of their
/// intersection, so no per-query scratch state is needed.
class CubeIndex {
 public:
  CubeIndex() = default;
  CubeIndex(const Rectangle& outer, const std::vector<Cube>& cubes) : outer_(outer) {
    side_ = std::clamp<std::size_t>(static_cast<std::size_t>(2.0 * std::sqrt(static_cast<double>(cubes.size()))), 8, 256);
    buckets_.assign(side_ * side_, {});
    for (std::uint32_t i = 0; i < cubes.size(); ++i) {
      const auto& c = cubes[i];
      for (auto by = cell_y(c.y); by <= cell_y(c.y + c.w); ++by)
        for (auto bx = cell_x(c.x); bx <= cell_x(c.x + c.w); ++bx) buckets_[by * side_ + bx].push_back(i);
    }
  }

  std::size_t cell_x(double x) const { return cell(x, outer_->x); }
  std::size_t cell_y(double y) const { return cell(y, outer_->y); }

  /// Calls visit(index) once for every cube whose interior meets rect.
  template <class Visit>
  void for_each_overlapping(const std::vector<Cube>& cubes, const Rectangle& rect, Visit&& visit) const {
    if (!outer_) return;
    const auto x0 = cell_x(rect.x.lo()), x1 = cell_x(rect.x.hi());
    const auto y0 = cell_y(rect.y.lo()), y1 = cell_y(rect.y.hi());
    for (auto by = y0; by <= y1; ++by)
      for (auto bx = x0; bx <= x1; ++bx)
        for (auto i : buckets_[by * side_ + bx]) {
          const auto& c = cubes[i];
          const double cx = std::max(c.x, rect.x.lo());
          const double cy = std::max(c.y, rect.y.lo());
          if (cx >= std::min(c.x + c.w, rect.x.hi()) || cy >= std::min(c.y + c.w, rect.y.hi())) continue;
          if (cell_x(cx) != bx || cell_y(cy) != by) continue;
          visit(i);
        }
  }

  /// Calls visit(index) for every cube whose closure may hold p.
  template <class Visit>
  void for_each_near(const std::vector<Cube>& cubes, Point p, Visit&& visit) const {
    if (!outer_) return;
    for (auto i : buckets_[cell_y(p.y) * side_ + cell_x(p.x)]) {
      const auto& c = cubes[i];
      if (p.x >= c.x && p.x <= c.x + c.w && p.y >= c.y && p.y <= c.y + c.w) visit(i);
    }
  }

 private:
  std::size_t cell(double v, const Interval& range) const {
    const double u = (v - range.lo()) / range.length() * static_cast<double>(side_);
    if (!(u > 0.0)) return 0;
    return std::min(side_ - 1, static_cast<std::size_t>(u));
  }

  std::optional<Rectangle> outer_;
  std::size_t side_ = 0;
  std::vector<std::vector<std::uint32_t>> buckets_;
};

class CompactSetModel {
 public:
  CompactSetModel(Rectangle outer, std::vector<Cube> cubes, WeightSequence seq)
      : outer_(outer), cubes_(std::move(cubes)), seq_(std::move(seq)) {
    for (std::size_t i = 0; i < cubes_.size(); ++i) {
      const auto r = cubes_[i].rect();
      if (r.x.lo() < outer_.x.lo() || r.x.hi() > outer_.x.hi() || r.y.lo() < outer_.y.lo() || r.y.hi() > outer_.y.hi())
        throw Error(ErrorKind::invalid_input, "cube " + std::to_string(i + 1) + " leaves the outer box");
      if (i > 0 && cubes_[i].w > cubes_[i - 1].w)
        throw Error(ErrorKind::invalid_input, "cube sides must be non-increasing");
      removed_ += cubes_[i].w * cubes_[i].w;
    }
    std::vector<Rectangle> rects;
    rects.reserve(cubes_.size());
    for (const auto& c : cubes_) rects.push_back(c.rect());
    detail::check_disjoint(rects);
    if (auto n_max = seq_.n_max(); n_max && cubes_.size() > *n_max)
      throw Error(ErrorKind::invalid_input, "more cubes than weights");
    residual_ = detail::tail_or_zero(seq_, static_cast<double>(cubes_.size()) + 1.0);
    index_ = CubeIndex(outer_, cubes_);
  }

  const Rectangle& outer() const { return outer_; }
  const std::vector<Cube>& cubes() const { return cubes_; }
  const WeightSequence& seq() const { return seq_; }
  std::size_t trunc() const { return cubes_.size(); }
  const CubeIndex& index() const { return index_; }

  /// sum_{n <= N} w_n^2.
  double removed_area() const { return removed_; }
  /// |K_N| = |outer| - sum_{n <= N} w_n^2.
  double measure() const { return outer_.area() - removed_; }
  /// r_{N+1}, the measure of cubes not materialized.
  LogReal residual_tail() const { return residual_; }

  /// Area of rect covered by the materialized cubes.
  double covered_area(const Rectangle& rect) const {
    double covered = 0.0;
    index_.for_each_overlapping(cubes_, rect, [&](std::uint32_t i) { covered += intersection_area(rect, cubes_[i].rect()); });
    return covered;
  }

  /// Location of p relative to the union of materialized open cubes.
  Location locate_in_cubes(Point p) const {
    Location loc = Location::outside;
    index_.for_each_near(cubes_, p, [&](std::uint32_t i) {
      const auto l = cubes_[i].rect().locate(p);
      if (l == Location::inside) loc = Location::inside;
      else if (l == Location::boundary && loc == Location::outside) loc = Location::boundary;
    });
    return loc;
  }

  friend bool operator==(const CompactSetModel& a, const CompactSetModel& b) {
    return a.outer_ == b.outer_ && a.cubes_ == b.cubes_ && a.seq_ == b.seq_;
  }

 private:
  Rectangle outer_;
  std::vector<Cube> cubes_;
  WeightSequence seq_;
  double removed_ = 0.0;
  LogReal residual_;
  CubeIndex index_;
};

/// Shelf packing, next-fit: cubes go left to right along a row whose height is
/// the side of its first cube; a cube that does not fit opens a new row on top.
inline CompactSetModel build_packing(const WeightSequence& seq, std::size_t n, const Rectangle& outer) {
  if (auto n_max = seq.n_max(); n_max && n > *n_max)
    throw Error(ErrorKind::out_of_range, "N = " + std::to_string(n) + " exceeds the explicit list");
  std::vector<double> sides(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w2 = seq.w2(static_cast<double>(i + 1)).linear();
    sides[i] = std::sqrt(w2);
    total += w2;
  }
  const double min_side = std::min(outer.x.length(), outer.y.length());
  if (total > 0.5 * outer.area() || (n > 0 && sides[0] > min_side))
    throw Error(ErrorKind::packing_infeasible,
                "total area " + std::to_string(total) + " (limit " + std::to_string(0.5 * outer.area()) + "), w_1 = " +
                    std::to_string(n ? sides[0] : 0.0) + " (limit " + std::to_string(min_side) + ")");

  std::vector<Cube> cubes;
  cubes.reserve(n);
  double x = outer.x.lo();
  double row_y = outer.y.lo();
  double row_h = n ? sides[0] : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sides[i];
    if (x + w > outer.x.hi()) {
      x = outer.x.lo();
      row_y += row_h;
      row_h = w;
    }
    if (row_y + w > outer.y.hi())
      throw Error(ErrorKind::packing_infeasible, "shelf packing ran out of rows at cube " + std::to_string(i + 1));
    cubes.push_back({x, row_y, w});
    x += w;
  }
  return CompactSetModel(outer, std::move(cubes), seq);
}

inline Rectangle unit_square() { return {Interval(0.0, 1.0), Interval(0.0, 1.0)}; }

struct DensityRatio {
  double ratio_n = 1.0;           // |rect n K_N| / |rect|
  double lower_bound_true = 1.0;  // ratio_n - r_{N+1}/|rect|, clamped at 0
  bool clipped = false;           // rect was clipped to the outer box
};

inline std::optional<Rectangle> clip(const Rectangle& rect, const Rectangle& outer) {
  const double x0 = std::max(rect.x.lo(), outer.x.lo()), x1 = std::min(rect.x.hi(), outer.x.hi());
  const double y0 = std::max(rect.y.lo(), outer.y.lo()), y1 = std::min(rect.y.hi(), outer.y.hi());
  if (!(x0 < x1) || !(y0 < y1)) return std::nullopt;
  return Rectangle{Interval(x0, x1), Interval(y0, y1)};
}

/// Since K is contained in K_N the true ratio lies in [lower_bound_true, ratio_n].
inline DensityRatio density_ratio(const CompactSetModel& model, const Rectangle& rect) {
  auto clipped = clip(rect, model.outer());
  if (!clipped) throw Error(ErrorKind::empty_rect, "rectangle misses the outer box");
  DensityRatio out;
  out.clipped = !(*clipped == rect);
  const double area = clipped->area();
  out.ratio_n = std::clamp(1.0 - model.covered_area(*clipped) / area, 0.0, 1.0);
  out.lower_bound_true = std::max(0.0, out.ratio_n - model.residual_tail().linear() / area);
  return out;
}

// ---------------------------------------------------------------------------

struct CoverBlock {
  int s = 0;
  double gamma = 0.0;
  std::size_t first = 0;  // 1-based cube indices n_s .. n_{s+1}-1
  std::size_t last = 0;
  RectUnion dilation;
  double exact_measure = 0.0;
  double identity_rhs = 0.0;  // (2*gamma + 1)^2 * sum of w_i^2 over the block
};

struct CoverCm {
  int m = 0;
  int s_hi = 0;
  std::vector<CoverBlock> blocks;
  std::vector<double> bound_terms;  // (2*2^s + 1)^2 r_{n_s}, s = m, m+1, ...
  double measure_bound = 0.0;
};

inline bool operator==(const CoverBlock& a, const CoverBlock& b) {
  return a.s == b.s && a.gamma == b.gamma && a.first == b.first && a.last == b.last && a.dilation == b.dilation &&
         a.exact_measure == b.exact_measure && a.identity_rhs == b.identity_rhs;
}

inline bool operator==(const CoverCm& a, const CoverCm& b) {
  return a.m == b.m && a.s_hi == b.s_hi && a.blocks == b.blocks && a.bound_terms == b.bound_terms &&
         a.measure_bound == b.measure_bound;
}

/// sum_{s >= m} (2*2^s + 1)^2 r_{n_s}, summed until terms stop mattering.
inline std::vector<double> cover_bound_terms(const WeightSequence& seq, int m) {
  std::vector<double> terms;
  double sum = 0.0;
  for (int s = m; s <= Schedule::kMaxHorizon; ++s) {
    const double n = std::pow(static_cast<double>(s), static_cast<double>(s));
    const LogReal r = detail::tail_or_zero(seq, n);
    const double factor = 2.0 * std::ldexp(1.0, s) + 1.0;
    const double term = (LogReal::from_linear(factor * factor) * r).linear();
    terms.push_back(term);
    sum += term;
    if (term == 0.0 || term < 1e-17 * sum) break;
  }
  return terms;
}

inline double cover_measure_bound(const WeightSequence& seq, int m) {
  double sum = 0.0;
  for (double t : cover_bound_terms(seq, m)) sum += t;
  return sum;
}

inline CoverCm build_cover(const CompactSetModel& model, int m, int s_hi) {
  if (m < 1 || m > s_hi) throw Error(ErrorKind::invalid_input, "cover needs 1 <= m <= s_hi");
  const Schedule schedule(s_hi);
  if (schedule.block_last(s_hi) > static_cast<double>(model.trunc()))
    throw Error(ErrorKind::truncation_too_small, "block " + std::to_string(s_hi) + " needs cubes up to " +
                                                     std::to_string(schedule.block_last(s_hi)) + ", model has " +
                                                     std::to_string(model.trunc()));
  CoverCm cover;
  cover.m = m;
  cover.s_hi = s_hi;
  for (int s = m; s <= s_hi; ++s) {
    CoverBlock block;
    block.s = s;
    block.gamma = std::ldexp(1.0, s);
    block.first = static_cast<std::size_t>(schedule.block_first(s));
    block.last = static_cast<std::size_t>(schedule.block_last(s));
    std::vector<Rectangle> rects;
    double w2 = 0.0;
    for (std::size_t i = block.first; i <= block.last; ++i) {
      const auto& c = model.cubes()[i - 1];
      rects.push_back(c.rect());
      w2 += c.w * c.w;
    }
    block.dilation = dilate_2d(rects, block.gamma);
    block.exact_measure = block.dilation.measure();
    block.identity_rhs = (2.0 * block.gamma + 1.0) * (2.0 * block.gamma + 1.0) * w2;
    cover.blocks.push_back(std::move(block));
  }
  cover.bound_terms = cover_bound_terms(model.seq(), m);
  for (double t : cover.bound_terms) cover.measure_bound += t;
  return cover;
}

enum class CoverVerdict { in_cover, outside_cover_up_to_horizon, cube_boundary };

constexpr const char* to_string(CoverVerdict v) {
  switch (v) {
    case CoverVerdict::in_cover: return "in-cover";
    case CoverVerdict::outside_cover_up_to_horizon: return "outside-cover-up-to-horizon";
    case CoverVerdict::cube_boundary: return "boundary";
  }
  return "?";
}

struct ExceptionalReport {
  std::vector<Location> per_block;  // aligned with cover.blocks
  Location cubes = Location::outside;
  CoverVerdict overall = CoverVerdict::outside_cover_up_to_horizon;
};

inline ExceptionalReport is_exceptional(const CompactSetModel& model, const CoverCm& cover, Point p) {
  ExceptionalReport rep;
  rep.cubes = model.locate_in_cubes(p);
  bool covered = false;
  for (const auto& block : cover.blocks) {
    rep.per_block.push_back(block.dilation.locate(p));
    covered = covered || rep.per_block.back() != Location::outside;
  }
  if (rep.cubes == Location::boundary) rep.overall = CoverVerdict::cube_boundary;
  else if (covered) rep.overall = CoverVerdict::in_cover;
  return rep;
}

}  // namespace densitometer
