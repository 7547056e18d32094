#pragma once

// Finite unions of bounded open intervals on the line and their membership
// atoms: the cells of the endpoint arrangement labelled by the set of inputs
// containing them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "densitometer/error.hpp"

namespace densitometer {

/// Point location verdict. Endpoints are never silently in or out.
enum class Location { inside, outside, boundary };

constexpr const char* to_string(Location loc) {
  switch (loc) {
    case Location::inside: return "inside";
    case Location::outside: return "outside";
    case Location::boundary: return "boundary";
  }
  return "?";
}

/// The open interval (lo, hi), lo < hi.
class Interval {
 public:
  Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
      throw Error(ErrorKind::invalid_interval, "need lo < hi, got (" + std::to_string(lo) + ", " + std::to_string(hi) + ")");
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double length() const { return hi_ - lo_; }

  Location locate(double x) const {
    if (x > lo_ && x < hi_) return Location::inside;
    if (x == lo_ || x == hi_) return Location::boundary;
    return Location::outside;
  }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  double lo_;
  double hi_;
};

/// Overlap length of two open intervals (0 if disjoint).
inline double overlap(const Interval& a, const Interval& b) {
  return std::max(0.0, std::min(a.hi(), b.hi()) - std::max(a.lo(), b.lo()));
}

/// Sorted intervals with sup of item k <= inf of item k+1.
class DisjointIntervalSet {
 public:
  DisjointIntervalSet() = default;

  /// Adopts an already sorted, pairwise disjoint list (touching allowed).
  static DisjointIntervalSet from_sorted(std::vector<Interval> items) {
    for (std::size_t i = 1; i < items.size(); ++i)
      if (items[i - 1].hi() > items[i].lo())
        throw Error(ErrorKind::overlapping_inputs, "intervals overlap or are unsorted at position " + std::to_string(i));
    DisjointIntervalSet s;
    s.items_ = std::move(items);
    return s;
  }

  std::span<const Interval> items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  double measure() const {
    double total = 0.0;
    for (const auto& iv : items_) total += iv.length();
    return total;
  }

  Location locate(double x) const {
    auto it = std::lower_bound(items_.begin(), items_.end(), x, [](const Interval& iv, double v) { return iv.hi() < v; });
    if (it == items_.end()) return Location::outside;
    return it->locate(x);
  }

  friend bool operator==(const DisjointIntervalSet&, const DisjointIntervalSet&) = default;

 private:
  std::vector<Interval> items_;
};

/// Merges overlapping or touching intervals into maximal open intervals.
inline DisjointIntervalSet normalize(std::vector<Interval> intervals) {
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.lo() < b.lo() || (a.lo() == b.lo() && a.hi() < b.hi()); });
  std::vector<Interval> merged;
  merged.reserve(intervals.size());
  for (const auto& iv : intervals) {
    if (!merged.empty() && iv.lo() <= merged.back().hi()) {
      if (iv.hi() > merged.back().hi()) merged.back() = Interval(merged.back().lo(), iv.hi());
    } else {
      merged.push_back(iv);
    }
  }
  return DisjointIntervalSet::from_sorted(std::move(merged));
}

inline DisjointIntervalSet normalize(const DisjointIntervalSet& set) {
  return normalize(std::vector<Interval>(set.items().begin(), set.items().end()));
}

inline double measure(const DisjointIntervalSet& set) { return set.measure(); }

/// Sorted list of input indices (0-based) containing a cell.
using Label = std::vector<std::uint32_t>;

struct AtomCell {
  Interval cell;
  Label label;
};

/// Cells of the endpoint arrangement with nonempty labels. Cells carrying the
/// same label form the atom class R_E; boundary points are not represented.
class AtomDecomposition {
 public:
  std::span<const AtomCell> cells() const { return cells_; }

  /// Distinct labels in first-appearance order (left to right).
  std::vector<Label> classes() const {
    std::vector<Label> out;
    std::set<Label> seen;
    for (const auto& c : cells_)
      if (seen.insert(c.label).second) out.push_back(c.label);
    return out;
  }

  /// The atom class of a label as a sorted interval list.
  std::vector<Interval> class_cells(const Label& label) const {
    std::vector<Interval> out;
    for (const auto& c : cells_)
      if (c.label == label) out.push_back(c.cell);
    return out;
  }

  double measure() const {
    double total = 0.0;
    for (const auto& c : cells_) total += c.cell.length();
    return total;
  }

  /// Label of the cell containing x; nullopt outside the union or on a cell boundary.
  std::optional<Label> label_at(double x) const {
    auto it = std::lower_bound(cells_.begin(), cells_.end(), x, [](const AtomCell& c, double v) { return c.cell.hi() < v; });
    if (it == cells_.end() || it->cell.locate(x) != Location::inside) return std::nullopt;
    return it->label;
  }

 private:
  friend AtomDecomposition atoms(std::span<const Interval> intervals);
  std::vector<AtomCell> cells_;
};

/// Sweep over the sorted endpoints; each elementary open cell receives the set
/// of inputs containing its interior. Adjacent cells with equal labels merge.
inline AtomDecomposition atoms(std::span<const Interval> intervals) {
  struct Event {
    double x;
    bool open;
    std::uint32_t index;
  };
  std::vector<Event> events;
  events.reserve(2 * intervals.size());
  for (std::uint32_t i = 0; i < intervals.size(); ++i) {
    events.push_back({intervals[i].lo(), true, i});
    events.push_back({intervals[i].hi(), false, i});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.x < b.x; });

  AtomDecomposition out;
  Label active;
  std::size_t e = 0;
  while (e < events.size()) {
    const double x = events[e].x;
    for (; e < events.size() && events[e].x == x; ++e) {
      const auto& ev = events[e];
      auto pos = std::lower_bound(active.begin(), active.end(), ev.index);
      if (ev.open) {
        active.insert(pos, ev.index);
      } else {
        active.erase(pos);
      }
    }
    if (e == events.size() || active.empty()) continue;
    const double next = events[e].x;
    if (!out.cells_.empty() && out.cells_.back().cell.hi() == x && out.cells_.back().label == active) {
      out.cells_.back().cell = Interval(out.cells_.back().cell.lo(), next);
    } else {
      out.cells_.push_back({Interval(x, next), active});
    }
  }
  return out;
}

inline AtomDecomposition atoms(const std::vector<Interval>& intervals) {
  return atoms(std::span<const Interval>(intervals));
}

}  // namespace densitometer
