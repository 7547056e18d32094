#pragma once

// Simultaneous gamma-dilation of disjoint interval families (1D) and of
// disjoint axis-aligned rectangle families (2D).
//
// 1D: intervals are processed left to right. Interval k grows leftward from
// its right end until exactly gamma*|I_k| of measure not yet occupied by
// earlier dilations or remaining originals has been swept, and symmetrically
// rightward from its left end. Each step therefore adds 2*gamma*|I_k| of new
// measure and |union| = (2*gamma + 1) * sum |I_k|.
//
// 2D: projections are split into membership atoms R_alpha (x) and Q_beta (y);
// for every y-class beta the x-atoms paired with it are dilated into D_beta;
// the arrangement of the D_beta yields x-cells V_G labelled by the set G of
// classes whose D_beta covers them, and each V_G is paired with the dilation
// H_G of the union of Q_beta over G. Labels stand in for the power-set
// families, so nothing exponential is ever enumerated.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "densitometer/error.hpp"
#include "densitometer/interval.hpp"

namespace densitometer {

struct DilationPiece {
  Interval left;   // I'_k: shares the right end of I_k
  Interval right;  // I''_k: shares the left end of I_k
  Interval hat;    // I'_k u I''_k
};

struct DilationResult1D {
  std::vector<DilationPiece> pieces;  // aligned with the input order
  DisjointIntervalSet union_set;
  double gamma = 0.0;
  double input_measure = 0.0;

  double measure() const { return union_set.measure(); }
  double identity_rhs() const { return (2.0 * gamma + 1.0) * input_measure; }
  Location locate(double x) const { return union_set.locate(x); }
};

namespace detail {

inline void check_gamma(double gamma) {
  if (!(gamma > 1.0) || !std::isfinite(gamma))
    throw Error(ErrorKind::invalid_gamma, "gamma must be > 1, got " + std::to_string(gamma));
}

/// The construction itself, defined for every gamma > 0; gamma = 1 serves hand checks.
inline DilationResult1D dilate_1d_any(std::span<const Interval> inputs, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw Error(ErrorKind::invalid_gamma, "gamma must be positive, got " + std::to_string(gamma));
  std::vector<std::size_t> order(inputs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return inputs[a].lo() < inputs[b].lo(); });
  for (std::size_t k = 1; k < order.size(); ++k)
    if (inputs[order[k - 1]].hi() > inputs[order[k]].lo())
      throw Error(ErrorKind::overlapping_inputs, "dilation inputs must be pairwise disjoint");

  DilationResult1D result;
  result.gamma = gamma;
  // Occupied set as maximal components lo -> hi (touching inputs merged).
  std::map<double, double> occupied;
  for (std::size_t k : order) {
    const auto& iv = inputs[k];
    result.input_measure += iv.length();
    if (!occupied.empty()) {
      auto last = std::prev(occupied.end());
      if (last->second >= iv.lo()) {
        last->second = std::max(last->second, iv.hi());
        continue;
      }
    }
    occupied.emplace(iv.lo(), iv.hi());
  }

  std::vector<std::optional<DilationPiece>> pieces(inputs.size());
  for (std::size_t k : order) {
    const auto& iv = inputs[k];
    const double need = gamma * iv.length();
    auto comp = std::prev(occupied.upper_bound(iv.lo()));

    double left = comp->first;
    {
      double remaining = need;
      auto it = comp;
      while (true) {
        if (it == occupied.begin()) {
          left -= remaining;
          break;
        }
        auto prev = std::prev(it);
        const double gap = left - prev->second;
        if (gap >= remaining) {
          left -= remaining;
          break;
        }
        remaining -= gap;
        left = prev->first;
        it = prev;
      }
    }
    double right = comp->second;
    {
      double remaining = need;
      auto it = comp;
      while (true) {
        auto next = std::next(it);
        if (next == occupied.end()) {
          right += remaining;
          break;
        }
        const double gap = next->first - right;
        if (gap >= remaining) {
          right += remaining;
          break;
        }
        remaining -= gap;
        right = next->second;
        it = next;
      }
    }
    pieces[k] = DilationPiece{Interval(left, iv.hi()), Interval(iv.lo(), right), Interval(left, right)};

    // Occupy the hat, merging every component it touches.
    auto first = occupied.lower_bound(left);
    if (first != occupied.begin() && std::prev(first)->second >= left) --first;
    auto last = occupied.upper_bound(right);
    double lo = left;
    double hi = right;
    for (auto it = first; it != last; ++it) {
      lo = std::min(lo, it->first);
      hi = std::max(hi, it->second);
    }
    occupied.erase(first, last);
    occupied.emplace(lo, hi);
  }

  result.pieces.reserve(inputs.size());
  for (auto& p : pieces) result.pieces.push_back(*p);
  std::vector<Interval> comps;
  comps.reserve(occupied.size());
  for (const auto& [lo, hi] : occupied) comps.emplace_back(lo, hi);
  result.union_set = DisjointIntervalSet::from_sorted(std::move(comps));
  return result;
}

}  // namespace detail

inline DilationResult1D dilate_1d(std::span<const Interval> inputs, double gamma) {
  detail::check_gamma(gamma);
  return detail::dilate_1d_any(inputs, gamma);
}

inline DilationResult1D dilate_1d(const std::vector<Interval>& inputs, double gamma) {
  return dilate_1d(std::span<const Interval>(inputs), gamma);
}

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Open axis-aligned rectangle x * y.
struct Rectangle {
  Interval x;
  Interval y;

  double area() const { return x.length() * y.length(); }
  double diameter() const { return std::hypot(x.length(), y.length()); }

  Location locate(Point p) const {
    const auto lx = x.locate(p.x);
    const auto ly = y.locate(p.y);
    if (lx == Location::outside || ly == Location::outside) return Location::outside;
    if (lx == Location::inside && ly == Location::inside) return Location::inside;
    return Location::boundary;
  }

  friend bool operator==(const Rectangle&, const Rectangle&) = default;
};

inline double intersection_area(const Rectangle& a, const Rectangle& b) {
  return overlap(a.x, b.x) * overlap(a.y, b.y);
}

inline bool interiors_meet(const Rectangle& a, const Rectangle& b) {
  return a.x.lo() < b.x.hi() && b.x.lo() < a.x.hi() && a.y.lo() < b.y.hi() && b.y.lo() < a.y.hi();
}

/// Pairwise-disjoint rectangles stored as x-columns (the V_G cells) each
/// carrying an index into a table of y-sets (the H_G).
class RectUnion {
 public:
  struct Column {
    Interval x;
    std::uint32_t heights;
  };

  RectUnion() = default;
  RectUnion(std::vector<Column> columns, std::vector<DisjointIntervalSet> heights, double gamma)
      : columns_(std::move(columns)), heights_(std::move(heights)), gamma_(gamma) {}

  std::span<const Column> columns() const { return columns_; }
  const DisjointIntervalSet& heights(std::uint32_t i) const { return heights_[i]; }
  std::size_t height_sets() const { return heights_.size(); }
  double gamma() const { return gamma_; }
  bool empty() const { return columns_.empty(); }

  std::vector<Rectangle> rects() const {
    std::vector<Rectangle> out;
    for (const auto& col : columns_)
      for (const auto& h : heights_[col.heights].items()) out.push_back({col.x, h});
    return out;
  }

  std::size_t rect_count() const {
    std::size_t n = 0;
    for (const auto& col : columns_) n += heights_[col.heights].size();
    return n;
  }

  double measure() const {
    double total = 0.0;
    for (const auto& col : columns_) total += col.x.length() * heights_[col.heights].measure();
    return total;
  }

  Location locate(Point p) const {
    auto it = std::lower_bound(columns_.begin(), columns_.end(), p.x,
                               [](const Column& c, double v) { return c.x.hi() < v; });
    if (it == columns_.end()) return Location::outside;
    const auto lx = it->x.locate(p.x);
    if (lx == Location::outside) return Location::outside;
    if (lx == Location::inside) return heights_[it->heights].locate(p.y);
    // On a column edge: boundary if the closure of a neighbouring column holds p.
    bool touched = heights_[it->heights].locate(p.y) != Location::outside;
    auto next = std::next(it);
    if (next != columns_.end() && next->x.lo() == p.x)
      touched = touched || heights_[next->heights].locate(p.y) != Location::outside;
    return touched ? Location::boundary : Location::outside;
  }

  friend bool operator==(const RectUnion& a, const RectUnion& b) {
    if (a.gamma_ != b.gamma_ || a.columns_.size() != b.columns_.size()) return false;
    for (std::size_t i = 0; i < a.columns_.size(); ++i) {
      if (!(a.columns_[i].x == b.columns_[i].x)) return false;
      if (!(a.heights_[a.columns_[i].heights] == b.heights_[b.columns_[i].heights])) return false;
    }
    return true;
  }

 private:
  std::vector<Column> columns_;
  std::vector<DisjointIntervalSet> heights_;
  double gamma_ = 0.0;
};

namespace detail {

/// Groups atom cells by label; returns class id per cell and cells per class.
struct ClassTable {
  std::vector<Label> labels;
  std::vector<std::vector<Interval>> cells;
  std::vector<std::vector<std::uint32_t>> classes_of_input;
};

inline ClassTable classify(const AtomDecomposition& atoms, std::size_t inputs) {
  ClassTable t;
  t.classes_of_input.resize(inputs);
  std::map<Label, std::uint32_t> ids;
  for (const auto& c : atoms.cells()) {
    auto [it, fresh] = ids.try_emplace(c.label, static_cast<std::uint32_t>(t.labels.size()));
    if (fresh) {
      t.labels.push_back(c.label);
      t.cells.emplace_back();
      for (auto i : c.label) t.classes_of_input[i].push_back(it->second);
    }
    t.cells[it->second].push_back(c.cell);
  }
  return t;
}

inline void check_disjoint(std::span<const Rectangle> rects) {
  std::vector<std::size_t> order(rects.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rects[a].x.lo() < rects[b].x.lo(); });
  for (std::size_t a = 0; a < order.size(); ++a)
    for (std::size_t b = a + 1; b < order.size() && rects[order[b]].x.lo() < rects[order[a]].x.hi(); ++b)
      if (interiors_meet(rects[order[a]], rects[order[b]]))
        throw Error(ErrorKind::overlapping_inputs,
                    "rectangles " + std::to_string(order[a]) + " and " + std::to_string(order[b]) + " overlap");
}

inline RectUnion dilate_2d_any(std::span<const Rectangle> cubes, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw Error(ErrorKind::invalid_gamma, "gamma must be positive, got " + std::to_string(gamma));
  check_disjoint(cubes);
  if (cubes.empty()) return RectUnion({}, {}, gamma);

  std::vector<Interval> xs, ys;
  xs.reserve(cubes.size());
  ys.reserve(cubes.size());
  for (const auto& c : cubes) {
    xs.push_back(c.x);
    ys.push_back(c.y);
  }
  const auto xclass = detail::classify(atoms(xs), cubes.size());
  const auto yclass = detail::classify(atoms(ys), cubes.size());

  // F_beta: x-classes alpha with R_alpha x Q_beta inside the cube union, i.e.
  // alpha and beta share a cube.
  std::vector<std::vector<std::uint32_t>> f_beta(yclass.labels.size());
  for (std::size_t i = 0; i < cubes.size(); ++i)
    for (auto beta : yclass.classes_of_input[i])
      for (auto alpha : xclass.classes_of_input[i]) f_beta[beta].push_back(alpha);

  // Classes beta with equal F_beta share D_beta; dilate once per group.
  std::map<std::vector<std::uint32_t>, std::uint32_t> group_ids;
  std::vector<std::uint32_t> group_of_beta(f_beta.size());
  std::vector<std::vector<std::uint32_t>> betas_of_group;
  for (std::uint32_t beta = 0; beta < f_beta.size(); ++beta) {
    auto& f = f_beta[beta];
    std::sort(f.begin(), f.end());
    f.erase(std::unique(f.begin(), f.end()), f.end());
    auto [it, fresh] = group_ids.try_emplace(f, static_cast<std::uint32_t>(betas_of_group.size()));
    if (fresh) betas_of_group.emplace_back();
    betas_of_group[it->second].push_back(beta);
    group_of_beta[beta] = it->second;
  }

  std::vector<Interval> d_intervals;
  std::vector<std::uint32_t> d_owner;
  for (const auto& [f, group] : group_ids) {
    std::vector<Interval> pieces;
    for (auto alpha : f) pieces.insert(pieces.end(), xclass.cells[alpha].begin(), xclass.cells[alpha].end());
    auto d = dilate_1d_any(normalize(std::move(pieces)).items(), gamma);
    for (const auto& iv : d.union_set.items()) {
      d_intervals.push_back(iv);
      d_owner.push_back(group);
    }
  }

  // V_G cells of the D arrangement; G is kept as a sorted list of groups.
  const auto v_atoms = atoms(d_intervals);
  std::map<Label, std::uint32_t> h_ids;
  std::vector<DisjointIntervalSet> heights;
  std::vector<RectUnion::Column> columns;
  for (const auto& cell : v_atoms.cells()) {
    Label groups;
    groups.reserve(cell.label.size());
    for (auto idx : cell.label) groups.push_back(d_owner[idx]);
    std::sort(groups.begin(), groups.end());
    groups.erase(std::unique(groups.begin(), groups.end()), groups.end());

    auto [it, fresh] = h_ids.try_emplace(groups, static_cast<std::uint32_t>(heights.size()));
    if (fresh) {
      std::vector<Interval> q;
      for (auto g : groups)
        for (auto beta : betas_of_group[g]) q.insert(q.end(), yclass.cells[beta].begin(), yclass.cells[beta].end());
      heights.push_back(dilate_1d_any(normalize(std::move(q)).items(), gamma).union_set);
    }
    if (!columns.empty() && columns.back().x.hi() == cell.cell.lo() && columns.back().heights == it->second) {
      columns.back().x = Interval(columns.back().x.lo(), cell.cell.hi());
    } else {
      columns.push_back({cell.cell, it->second});
    }
  }
  return RectUnion(std::move(columns), std::move(heights), gamma);
}

}  // namespace detail

inline RectUnion dilate_2d(std::span<const Rectangle> cubes, double gamma) {
  detail::check_gamma(gamma);
  return detail::dilate_2d_any(cubes, gamma);
}

inline RectUnion dilate_2d(const std::vector<Rectangle>& cubes, double gamma) {
  return dilate_2d(std::span<const Rectangle>(cubes), gamma);
}

inline Location contains(const RectUnion& d, Point p) { return d.locate(p); }
inline Location contains(const DilationResult1D& d, double x) { return d.locate(x); }

struct RatioWitness {
  double lhs = 0.0;    // |rect n union cubes| / |rect|
  double bound = 0.0;  // 2 / gamma
  bool pass = false;   // lhs < bound
};

/// Density of the cube family inside a rectangle through a point lying
/// outside the gamma-dilation, checked against 2/gamma.
inline RatioWitness ratio_bound_witness(std::span<const Rectangle> cubes, const RectUnion& dilation, Point x,
                                        const Rectangle& rect) {
  if (dilation.locate(x) != Location::outside)
    throw Error(ErrorKind::point_not_outside, "witness point is not outside the dilation");
  if (rect.locate(x) == Location::outside) throw Error(ErrorKind::invalid_input, "rectangle does not contain the point");
  double covered = 0.0;
  for (const auto& c : cubes) covered += intersection_area(rect, c);
  RatioWitness w;
  w.lhs = covered / rect.area();
  w.bound = 2.0 / dilation.gamma();
  w.pass = w.lhs < w.bound;
  return w;
}

inline RatioWitness ratio_bound_witness(std::span<const Rectangle> cubes, double gamma, Point x, const Rectangle& rect) {
  return ratio_bound_witness(cubes, dilate_2d(cubes, gamma), x, rect);
}

}  // namespace densitometer
