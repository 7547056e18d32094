#pragma once

// Block schedule n_s = s^s, the subsequence {s_l} and the step functions
//   h(t) = 1 - 4 * 2^(-s_{l+1})  on  [b_{s_{l+1}}, b_{s_l}),
//   h(t) = -1                    on  [b_{s_1}, inf),
// with breakpoints b_s = 2^s * w_{n_{s+1} - 1}, and f = 1 - h.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "densitometer/error.hpp"
#include "densitometer/logreal.hpp"
#include "densitometer/weights.hpp"

namespace densitometer {

using BigInt = boost::multiprecision::cpp_int;

class Schedule {
 public:
  /// Largest s whose successor index (s+1)^(s+1) still fits a double.
  static constexpr int kMaxHorizon = 140;

  explicit Schedule(int s_max) : s_max_(s_max) {
    if (s_max < 1 || s_max > kMaxHorizon)
      throw Error(ErrorKind::invalid_input, "schedule horizon must be in [1, " + std::to_string(kMaxHorizon) + "]");
  }

  int s_max() const { return s_max_; }

  /// Exact s^s; served for s <= s_max + 1 so that block s_max has an end.
  BigInt n(int s) const {
    check(s);
    return boost::multiprecision::pow(BigInt(s), static_cast<unsigned>(s));
  }

  double n_real(int s) const {
    check(s);
    return std::pow(static_cast<double>(s), static_cast<double>(s));
  }

  double log_n(int s) const {
    check(s);
    return s * std::log(static_cast<double>(s));
  }

  /// Block s covers indices n_s .. n_{s+1} - 1.
  double block_first(int s) const { return n_real(s); }
  double block_last(int s) const { return n_real(s + 1) - 1.0; }

 private:
  void check(int s) const {
    if (s < 1 || s > s_max_ + 1) throw Error(ErrorKind::out_of_range, "schedule index " + std::to_string(s) + " beyond horizon");
  }

  int s_max_;
};

/// b_s = 2^s * w_{n_{s+1} - 1}.
inline LogReal breakpoint(const WeightSequence& seq, const Schedule& schedule, int s) {
  const double index = schedule.block_last(s);
  if (auto n_max = seq.n_max(); n_max && index > static_cast<double>(*n_max))
    throw Error(ErrorKind::horizon_exhausted,
                "w at index " + std::to_string(index) + " needed for b_" + std::to_string(s) + " is beyond the explicit list");
  return LogReal::from_log(s * std::log(2.0)) * seq.w(index);
}

struct SubseqSelection {
  std::vector<int> s_ell;    // s_1 < s_2 < ...
  std::vector<LogReal> b;    // b_s for s = 1..b.size()

  LogReal b_at(int s) const { return b.at(static_cast<std::size_t>(s - 1)); }
  std::size_t size() const { return s_ell.size(); }
};

/// s_1 = 1; s_{l+1} is the first s > s_l with b_s <= b_{s_l}.
inline SubseqSelection choose_subsequence(const WeightSequence& seq, const Schedule& schedule, int ell_max) {
  if (ell_max < 1) throw Error(ErrorKind::invalid_input, "ell_max must be >= 1");
  SubseqSelection sel;
  sel.s_ell.push_back(1);
  sel.b.push_back(breakpoint(seq, schedule, 1));
  int s = 1;
  while (static_cast<int>(sel.s_ell.size()) < ell_max) {
    const LogReal current = sel.b_at(sel.s_ell.back());
    bool found = false;
    while (s < schedule.s_max()) {
      ++s;
      LogReal bs;
      try {
        bs = breakpoint(seq, schedule, s);
      } catch (const Error& e) {
        throw Error(ErrorKind::horizon_exhausted, std::string(e.what()) + "; selected " + std::to_string(sel.size()) +
                                                      " of " + std::to_string(ell_max));
      }
      sel.b.push_back(bs);
      if (bs <= current) {
        sel.s_ell.push_back(s);
        found = true;
        break;
      }
    }
    if (!found) {
      std::string msg = "no s <= " + std::to_string(schedule.s_max()) + " with b_s <= b_" +
                        std::to_string(sel.s_ell.back()) + " (log b = " + std::to_string(current.log()) + "); last log b_s = " +
                        std::to_string(sel.b.back().log());
      throw Error(ErrorKind::horizon_exhausted, msg);
    }
  }
  return sel;
}

enum class RateKind { h, f };

struct RateBranch {
  double t_lo_log = 0.0;  // inclusive
  double t_hi_log = 0.0;  // exclusive; +inf on the top branch
  double value = 0.0;
  int s_ell = 0;   // s_l of the branch (0 on the top branch)
  int s_next = 0;  // s_{l+1}; the value is 1 - 4 * 2^(-s_next) for h
};

/// 4 * 2^(-s) = sum_{k >= s} 2 / 2^k.
inline double tail_of_halvings(int s) { return std::ldexp(1.0, 2 - s); }

class RateFunction {
 public:
  RateFunction() = default;
  RateFunction(RateKind kind, std::vector<RateBranch> branches) : kind_(kind), branches_(std::move(branches)) {
    if (branches_.empty()) throw Error(ErrorKind::invalid_input, "rate function needs at least the top branch");
    for (std::size_t i = 1; i < branches_.size(); ++i)
      if (branches_[i].t_hi_log != branches_[i - 1].t_lo_log || !(branches_[i].t_lo_log <= branches_[i].t_hi_log))
        throw Error(ErrorKind::invalid_input, "rate branches must be consecutive and ordered from the top down");
  }

  RateKind kind() const { return kind_; }
  const std::vector<RateBranch>& branches() const { return branches_; }

  /// Smallest constructed breakpoint; evaluation below it is refused.
  LogReal horizon() const { return LogReal::from_log(branches_.back().t_lo_log); }

  const RateBranch& branch_at(LogReal t) const {
    if (t.log() < branches_.back().t_lo_log)
      throw Error(ErrorKind::below_horizon,
                  "t = exp(" + std::to_string(t.log()) + ") is below the smallest breakpoint exp(" +
                      std::to_string(branches_.back().t_lo_log) + ")");
    auto it = std::lower_bound(branches_.begin(), branches_.end(), t.log(),
                               [](const RateBranch& b, double v) { return b.t_lo_log > v; });
    return *it;
  }

  double operator()(LogReal t) const { return branch_at(t).value; }
  double operator()(double t) const { return (*this)(LogReal::from_linear(t)); }

  friend bool operator==(const RateFunction& a, const RateFunction& b) {
    if (a.kind_ != b.kind_ || a.branches_.size() != b.branches_.size()) return false;
    for (std::size_t i = 0; i < a.branches_.size(); ++i) {
      const auto &x = a.branches_[i], &y = b.branches_[i];
      if (x.t_lo_log != y.t_lo_log || x.t_hi_log != y.t_hi_log || x.value != y.value || x.s_ell != y.s_ell ||
          x.s_next != y.s_next)
        return false;
    }
    return true;
  }

 private:
  RateKind kind_ = RateKind::h;
  std::vector<RateBranch> branches_;
};

namespace detail {

inline RateFunction build_rate(const SubseqSelection& sel, RateKind kind) {
  if (sel.s_ell.empty()) throw Error(ErrorKind::invalid_input, "selection is empty");
  auto value = [kind](int s_next) {
    const double deficit = tail_of_halvings(s_next);
    return kind == RateKind::h ? 1.0 - deficit : deficit;
  };
  std::vector<RateBranch> branches;
  branches.push_back({sel.b_at(sel.s_ell.front()).log(), std::numeric_limits<double>::infinity(),
                      value(sel.s_ell.front()), 0, sel.s_ell.front()});
  for (std::size_t l = 0; l + 1 < sel.s_ell.size(); ++l) {
    const int s = sel.s_ell[l];
    const int next = sel.s_ell[l + 1];
    branches.push_back({sel.b_at(next).log(), sel.b_at(s).log(), value(next), s, next});
  }
  return RateFunction(kind, std::move(branches));
}

}  // namespace detail

inline RateFunction build_h(const SubseqSelection& sel) { return detail::build_rate(sel, RateKind::h); }
inline RateFunction build_f(const SubseqSelection& sel) { return detail::build_rate(sel, RateKind::f); }

// ---------------------------------------------------------------------------

enum class SeriesKind { two_s_r, two_s_sqrt_r, four_s_r };

constexpr const char* to_string(SeriesKind k) {
  switch (k) {
    case SeriesKind::two_s_r: return "2^s*r";
    case SeriesKind::two_s_sqrt_r: return "2^s*sqrt(r)";
    case SeriesKind::four_s_r: return "4^s*r";
  }
  return "?";
}

struct SeriesTrace {
  SeriesKind kind = SeriesKind::two_s_r;
  std::vector<int> s;
  std::vector<LogReal> terms;
  std::vector<double> partial_sums;
  std::vector<double> ratios;  // term_{s+1} / term_s, aligned with s[1..]
  double sum = 0.0;
  bool reached_tol = false;
  int s_reached = 0;  // first s with term < tol, 0 if the horizon ran out
};

namespace detail {

inline LogReal tail_or_zero(const WeightSequence& seq, double n) {
  if (auto n_max = seq.n_max(); n_max && n > static_cast<double>(*n_max) + 1.0) return LogReal::zero();
  return seq.tail(n).value;
}

}  // namespace detail

/// Partial sums of the three block series until a term drops below tol.
/// Divergent is raised when terms fail to decrease five times in a row.
inline std::vector<SeriesTrace> series_diagnostics(const WeightSequence& seq, const Schedule& schedule, double tol) {
  std::vector<SeriesTrace> out;
  for (auto kind : {SeriesKind::two_s_r, SeriesKind::two_s_sqrt_r, SeriesKind::four_s_r}) {
    SeriesTrace tr;
    tr.kind = kind;
    int rises = 0;
    for (int s = 1; s <= schedule.s_max(); ++s) {
      const LogReal r = detail::tail_or_zero(seq, schedule.n_real(s));
      const LogReal scale = LogReal::from_log(s * std::log(2.0));
      LogReal term;
      switch (kind) {
        case SeriesKind::two_s_r: term = scale * r; break;
        case SeriesKind::two_s_sqrt_r: term = scale * r.sqrt(); break;
        case SeriesKind::four_s_r: term = scale * scale * r; break;
      }
      if (!tr.terms.empty()) {
        tr.ratios.push_back(term.is_zero() ? 0.0 : std::exp(term.log() - tr.terms.back().log()));
        rises = term < tr.terms.back() ? 0 : rises + 1;
        if (rises >= 5)
          throw Error(ErrorKind::divergent, std::string(to_string(kind)) + " terms did not decrease for 5 consecutive s");
      }
      tr.s.push_back(s);
      tr.terms.push_back(term);
      tr.sum += term.linear();
      tr.partial_sums.push_back(tr.sum);
      if (term.is_zero() || term.log() < std::log(tol)) {
        tr.reached_tol = true;
        tr.s_reached = s;
        break;
      }
    }
    out.push_back(std::move(tr));
  }
  return out;
}

enum class DecayVerdict { decaying, diverging, withheld };

constexpr const char* to_string(DecayVerdict v) {
  switch (v) {
    case DecayVerdict::decaying: return "decaying";
    case DecayVerdict::diverging: return "diverging";
    case DecayVerdict::withheld: return "withheld";
  }
  return "?";
}

struct LittleOTrace {
  std::vector<int> ell;         // branch index l (1-based)
  std::vector<int> s_next;      // s_{l+1}
  std::vector<double> log_b;    // log b_{s_{l+1}}
  std::vector<double> f_value;  // f(b_{s_{l+1}}) = 4 * 2^(-s_{l+1})
  std::vector<double> product;  // f * |log b|
  std::vector<double> log_w_ratio;  // |log w_{n_{s_{l+1}+1}-1}| / (s_{l+1} log s_{l+1})
  DecayVerdict verdict = DecayVerdict::withheld;
};

/// f(b) * |log b| at the lower breakpoint of every branch. The verdict looks
/// at the last half of the trace and needs a selection of at least 3 entries.
inline LittleOTrace little_o_check(const SubseqSelection& sel, const WeightSequence& seq, const Schedule& schedule) {
  LittleOTrace tr;
  for (std::size_t l = 0; l + 1 < sel.s_ell.size(); ++l) {
    const int next = sel.s_ell[l + 1];
    const double log_b = sel.b_at(next).log();
    tr.ell.push_back(static_cast<int>(l) + 1);
    tr.s_next.push_back(next);
    tr.log_b.push_back(log_b);
    tr.f_value.push_back(tail_of_halvings(next));
    tr.product.push_back(tail_of_halvings(next) * std::abs(log_b));
    const double log_w = seq.w(schedule.block_last(next)).log();
    tr.log_w_ratio.push_back(next > 1 ? std::abs(log_w) / (next * std::log(static_cast<double>(next)))
                                      : std::numeric_limits<double>::quiet_NaN());
  }
  if (sel.s_ell.size() < 3) return tr;
  const std::size_t half = tr.product.size() / 2;
  const std::size_t start = tr.product.size() - std::max<std::size_t>(2, tr.product.size() - half);
  bool decreasing = true;
  for (std::size_t i = start + 1; i < tr.product.size(); ++i)
    if (!(tr.product[i] < tr.product[i - 1])) decreasing = false;
  tr.verdict = decreasing ? DecayVerdict::decaying : DecayVerdict::diverging;
  return tr;
}

}  // namespace densitometer
