#pragma once

// Slow reference implementations used only by the tests. They share no code
// with the library beyond the Interval/Rectangle value types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "densitometer/dilation.hpp"

namespace oracle {

using densitometer::Interval;
using densitometer::Rectangle;
using Span = std::pair<double, double>;

inline std::vector<Span> merge(std::vector<Span> v) {
  std::sort(v.begin(), v.end());
  std::vector<Span> out;
  for (const auto& s : v) {
    if (!out.empty() && s.first <= out.back().second) out.back().second = std::max(out.back().second, s.second);
    else out.push_back(s);
  }
  return out;
}

inline double covered(const std::vector<Span>& set, double a, double b) {
  double total = 0.0;
  for (const auto& s : set) total += std::max(0.0, std::min(b, s.second) - std::max(a, s.first));
  return total;
}

/// One-dimensional simultaneous dilation by bisection on the free measure.
/// Returns the hats in input order and the merged union.
inline std::pair<std::vector<Span>, std::vector<Span>> dilate_1d(const std::vector<Span>& inputs, double gamma) {
  std::vector<std::size_t> order(inputs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return inputs[a].first < inputs[b].first; });
  auto occupied = merge(inputs);
  std::vector<Span> hats(inputs.size());
  for (auto k : order) {
    const auto [a, b] = inputs[k];
    const double need = gamma * (b - a);
    double total = 0.0;
    for (const auto& s : occupied) total += s.second - s.first;
    auto free_left = [&](double l) { return (a - l) - covered(occupied, l, a); };
    auto free_right = [&](double r) { return (r - b) - covered(occupied, b, r); };
    double lo = a - need - total - 1.0, hi = a;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (free_left(mid) >= need ? lo : hi) = mid;
    }
    const double left = hi;
    lo = b;
    hi = b + need + total + 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (free_right(mid) >= need ? hi : lo) = mid;
    }
    const double right = lo;
    hats[k] = {left, right};
    occupied.push_back(hats[k]);
    occupied = merge(occupied);
  }
  return {hats, occupied};
}

/// Elementary cells of the endpoint arrangement with direct membership labels.
struct Cells {
  std::vector<Span> cells;
  std::vector<std::vector<std::uint32_t>> labels;
};

inline Cells cells_of(const std::vector<Span>& ivs) {
  std::vector<double> xs;
  for (const auto& s : ivs) {
    xs.push_back(s.first);
    xs.push_back(s.second);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  Cells c;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double mid = 0.5 * (xs[i] + xs[i + 1]);
    std::vector<std::uint32_t> label;
    for (std::uint32_t j = 0; j < ivs.size(); ++j)
      if (ivs[j].first < mid && mid < ivs[j].second) label.push_back(j);
    if (label.empty()) continue;
    c.cells.emplace_back(xs[i], xs[i + 1]);
    c.labels.push_back(label);
  }
  return c;
}

/// Two-dimensional dilation evaluated pointwise straight from the definition:
/// one D_beta per y-class (no grouping), V cells by direct membership in the
/// D_beta, and H_G recomputed per distinct G.
class Dilation2D {
 public:
  Dilation2D(const std::vector<Rectangle>& cubes, double gamma) : gamma_(gamma) {
    std::vector<Span> xs, ys;
    for (const auto& c : cubes) {
      xs.emplace_back(c.x.lo(), c.x.hi());
      ys.emplace_back(c.y.lo(), c.y.hi());
    }
    const auto xc = cells_of(xs), yc = cells_of(ys);
    std::map<std::vector<std::uint32_t>, std::vector<Span>> x_classes, y_classes;
    for (std::size_t i = 0; i < xc.cells.size(); ++i) x_classes[xc.labels[i]].push_back(xc.cells[i]);
    for (std::size_t i = 0; i < yc.cells.size(); ++i) y_classes[yc.labels[i]].push_back(yc.cells[i]);
    for (const auto& [beta, q] : y_classes) {
      std::vector<Span> r;
      for (const auto& [alpha, cells] : x_classes) {
        bool share = false;
        for (auto i : alpha) share = share || std::find(beta.begin(), beta.end(), i) != beta.end();
        if (share) r.insert(r.end(), cells.begin(), cells.end());
      }
      q_.push_back(q);
      d_.push_back(dilate_1d(merge(r), gamma).second);
    }
  }

  /// 1 inside, 0 outside, -1 within tol of an oracle endpoint (undecided).
  int contains(double x, double y, double tol) {
    std::vector<std::uint32_t> g;
    for (std::uint32_t b = 0; b < d_.size(); ++b)
      for (const auto& s : d_[b]) {
        if (std::abs(x - s.first) < tol || std::abs(x - s.second) < tol) return -1;
        if (s.first < x && x < s.second) g.push_back(b);
      }
    if (g.empty()) return 0;
    auto it = h_.find(g);
    if (it == h_.end()) {
      std::vector<Span> q;
      for (auto b : g) q.insert(q.end(), q_[b].begin(), q_[b].end());
      it = h_.emplace(g, dilate_1d(merge(q), gamma_).second).first;
    }
    for (const auto& s : it->second) {
      if (std::abs(y - s.first) < tol || std::abs(y - s.second) < tol) return -1;
      if (s.first < y && y < s.second) return 1;
    }
    return 0;
  }

 private:
  double gamma_;
  std::vector<std::vector<Span>> q_;
  std::vector<std::vector<Span>> d_;
  std::map<std::vector<std::uint32_t>, std::vector<Span>> h_;
};

/// Union area by painting pixel centers of a res x res grid over box.
inline double raster_area(const std::vector<Rectangle>& rects, const Rectangle& box, int res) {
  const double px = box.x.length() / res, py = box.y.length() / res;
  std::vector<std::uint8_t> grid(static_cast<std::size_t>(res) * res, 0);
  auto first_center = [](double lo, double origin, double step) {
    return std::max(0.0, std::floor((lo - origin) / step - 0.5) + 1.0);
  };
  for (const auto& r : rects) {
    for (int i = static_cast<int>(first_center(r.x.lo(), box.x.lo(), px)); i < res; ++i) {
      const double cx = box.x.lo() + (i + 0.5) * px;
      if (cx >= r.x.hi()) break;
      if (cx <= r.x.lo()) continue;
      for (int j = static_cast<int>(first_center(r.y.lo(), box.y.lo(), py)); j < res; ++j) {
        const double cy = box.y.lo() + (j + 0.5) * py;
        if (cy >= r.y.hi()) break;
        if (cy <= r.y.lo()) continue;
        grid[static_cast<std::size_t>(i) * res + j] = 1;
      }
    }
  }
  std::size_t n = 0;
  for (auto v : grid) n += v;
  return static_cast<double>(n) * px * py;
}

/// Disjoint open squares with sides up to max_side, by rejection.
inline std::vector<Rectangle> random_cubes(std::mt19937_64& rng, int n, double max_side) {
  std::uniform_real_distribution<double> pos(0.0, 10.0), side(0.05, max_side);
  std::vector<Rectangle> out;
  for (int tries = 0; static_cast<int>(out.size()) < n && tries < 20000; ++tries) {
    const double w = side(rng), x = pos(rng), y = pos(rng);
    const Rectangle c{Interval(x, x + w), Interval(y, y + w)};
    bool clash = false;
    for (const auto& o : out) clash = clash || densitometer::interiors_meet(o, c);
    if (!clash) out.push_back(c);
  }
  return out;
}

/// Disjoint intervals with random gaps, shuffled.
inline std::vector<Interval> random_disjoint_intervals(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> len(0.01, 3.0), gap(0.0, 5.0);
  std::bernoulli_distribution touch(0.2);
  std::vector<Interval> out;
  double x = -20.0;
  for (int i = 0; i < n; ++i) {
    x += touch(rng) ? 0.0 : gap(rng);
    const double l = len(rng);
    out.emplace_back(x, x + l);
    x += l;
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace oracle
