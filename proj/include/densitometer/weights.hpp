#pragma once

// Weight sequences {w_n} of removed cube sides, their tail sums
// r_n = sum_{m>=n} w_m^2, and finite-horizon estimators of the sequence
// indexes a{w_n^2}, e_BT and e_BM.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "densitometer/error.hpp"
#include "densitometer/logreal.hpp"

namespace densitometer {

/// w_n^2 = c * n^(-p), p > 1.
struct PowerForm {
  double c = 1.0;
  double p = 2.0;
  friend bool operator==(const PowerForm&, const PowerForm&) = default;
};

/// w_n^2 = c * rho^n, 0 < rho < 1.
struct GeometricForm {
  double c = 1.0;
  double rho = 0.5;
  friend bool operator==(const GeometricForm&, const GeometricForm&) = default;
};

/// Finite list of w_n^2, n = 1..size.
struct ExplicitForm {
  std::vector<double> w2;
  friend bool operator==(const ExplicitForm&, const ExplicitForm&) = default;
};

/// r_n together with a certified bracket lo <= r_n <= hi.
struct TailSum {
  LogReal value;
  LogReal lo;
  LogReal hi;
};

class WeightSequence {
 public:
  using Kind = std::variant<PowerForm, GeometricForm, ExplicitForm>;

  static WeightSequence power(double c, double p) {
    if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorKind::invalid_input, "power form needs c > 0");
    if (!(p > 1.0) || !std::isfinite(p)) throw Error(ErrorKind::invalid_input, "power form needs p > 1 for a summable w_n^2");
    return WeightSequence(PowerForm{c, p});
  }

  static WeightSequence geometric(double c, double rho) {
    if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorKind::invalid_input, "geometric form needs c > 0");
    if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorKind::invalid_input, "geometric form needs 0 < rho < 1");
    return WeightSequence(GeometricForm{c, rho});
  }

  static WeightSequence from_list(std::vector<double> w2) {
    for (std::size_t i = 0; i < w2.size(); ++i) {
      if (!(w2[i] > 0.0) || !std::isfinite(w2[i]))
        throw Error(ErrorKind::invalid_input, "explicit w_n^2 must be positive, index " + std::to_string(i + 1));
      if (i > 0 && w2[i] > w2[i - 1])
        throw Error(ErrorKind::invalid_input, "explicit w_n^2 must be non-increasing, index " + std::to_string(i + 1));
    }
    return WeightSequence(ExplicitForm{std::move(w2)});
  }

  const Kind& kind() const { return kind_; }
  bool is_closed_form() const { return !std::holds_alternative<ExplicitForm>(kind_); }

  /// Largest index served; nullopt for the unbounded closed forms.
  std::optional<std::size_t> n_max() const {
    if (const auto* e = std::get_if<ExplicitForm>(&kind_)) return e->w2.size();
    return std::nullopt;
  }

  /// w_n^2. The index is a double so that schedule indices beyond 2^64 can be
  /// served by the closed forms.
  LogReal w2(double n) const {
    check_index(n, false);
    return std::visit(
        [n](const auto& k) -> LogReal {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, PowerForm>) {
            return LogReal::from_log(std::log(k.c) - k.p * std::log(n));
          } else if constexpr (std::is_same_v<K, GeometricForm>) {
            return LogReal::from_log(std::log(k.c) + n * std::log(k.rho));
          } else {
            return LogReal::from_linear(k.w2[static_cast<std::size_t>(n) - 1]);
          }
        },
        kind_);
  }

  LogReal w(double n) const { return w2(n).sqrt(); }

  /// r_n with its certified bracket. For explicit lists r_{size+1} is zero.
  TailSum tail(double n) const {
    check_index(n, true);
    return std::visit(
        [this, n](const auto& k) -> TailSum {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, PowerForm>) {
            return power_tail(k, n);
          } else if constexpr (std::is_same_v<K, GeometricForm>) {
            auto v = LogReal::from_log(std::log(k.c) + n * std::log(k.rho) - std::log1p(-k.rho));
            return {v, v, v};
          } else {
            auto v = LogReal::from_linear(suffix_[static_cast<std::size_t>(n) - 1]);
            return {v, v, v};
          }
        },
        kind_);
  }

  /// log r_n; throws ZeroTail where the explicit list is exhausted.
  double log_tail(double n) const {
    auto r = tail(n).value;
    if (r.is_zero()) throw Error(ErrorKind::zero_tail, "r_n = 0 at n = " + std::to_string(n));
    return r.log();
  }

  /// r_1 = sum of all w_n^2.
  LogReal total() const { return tail(1.0).value; }

  friend bool operator==(const WeightSequence& a, const WeightSequence& b) { return a.kind_ == b.kind_; }

 private:
  explicit WeightSequence(Kind kind) : kind_(std::move(kind)) {
    if (const auto* e = std::get_if<ExplicitForm>(&kind_)) {
      suffix_.assign(e->w2.size() + 1, 0.0);
      long double acc = 0.0L;
      for (std::size_t i = e->w2.size(); i-- > 0;) {
        acc += e->w2[i];
        suffix_[i] = static_cast<double>(acc);
      }
    }
  }

  void check_index(double n, bool allow_past_end) const {
    if (!(n >= 1.0) || !std::isfinite(n) || n != std::floor(n))
      throw Error(ErrorKind::out_of_range, "index must be an integer >= 1, got " + std::to_string(n));
    if (const auto* e = std::get_if<ExplicitForm>(&kind_)) {
      double limit = static_cast<double>(e->w2.size()) + (allow_past_end ? 1.0 : 0.0);
      if (n > limit)
        throw Error(ErrorKind::out_of_range,
                    "index " + std::to_string(n) + " beyond explicit list of length " + std::to_string(e->w2.size()));
    }
  }

  // Hurwitz zeta c*zeta(p, n): exact summation up to a cutoff, then
  // Euler-Maclaurin. The bracket uses the convexity bounds
  //   int_M f + f(M)/2 <= sum_{k>=M} f(k) <= int_{M-1/2} f.
  static TailSum power_tail(const PowerForm& k, double n) {
    constexpr double kCutoff = 256.0;
    const double p = k.p;
    const double m = std::max(n, kCutoff);
    const double log_n = std::log(n);
    // Everything below is scaled by n^p so the partial sum stays O(1).
    double head = 0.0;
    if (n < kCutoff)
      for (int j = static_cast<int>(kCutoff) - 1; j >= static_cast<int>(n); --j) head += std::exp(p * (log_n - std::log(j)));
    const double log_m = std::log(m);
    // int_M^inf x^-p dx = M^(1-p)/(p-1), scaled by n^p.
    const double log_integral = (1.0 - p) * log_m - std::log(p - 1.0) + p * log_n;
    const double inv = 1.0 / m;
    const double inv2 = inv * inv;
    const double rising3 = p * (p + 1.0) * (p + 2.0);
    const double rising5 = rising3 * (p + 3.0) * (p + 4.0);
    const double em_rel =
        (p - 1.0) * (0.5 * inv + p * inv2 / 12.0 - rising3 * inv2 * inv2 / 720.0 + rising5 * inv2 * inv2 * inv2 / 30240.0);
    const double log_em = log_integral + std::log1p(em_rel);
    const double log_lower_tail = log_integral + std::log1p(0.5 * (p - 1.0) * inv);
    const double log_upper_tail = (1.0 - p) * std::log(m - 0.5) - std::log(p - 1.0) + p * log_n;

    const double scale = std::log(k.c) - p * log_n;
    auto assemble = [&](double log_tail_part) {
      return LogReal::from_log(scale) * (LogReal::from_linear(head) + LogReal::from_log(log_tail_part));
    };
    TailSum out{assemble(log_em), assemble(log_lower_tail), assemble(log_upper_tail)};
    out.lo = std::min(out.lo, out.value);
    out.hi = std::max(out.hi, out.value);
    return out;
  }

  Kind kind_;
  std::vector<double> suffix_;
};

// ---------------------------------------------------------------------------
// Index estimators. All limits are finite-horizon proxies over a probe grid:
// liminf ~ min over the last quartile of probes, limsup ~ max over it.

/// n = 2^k for k = 1..19, then 10^6.
inline std::vector<double> default_probes(double horizon = 1e6) {
  std::vector<double> probes;
  for (double n = 2.0; n < horizon; n *= 2.0) probes.push_back(n);
  probes.push_back(horizon);
  return probes;
}

inline std::vector<double> linear_grid(double lo, double hi, double step) {
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    double a = lo + step * i;
    if (a > hi + step * 1e-9) break;
    grid.push_back(a);
  }
  return grid;
}

struct IndexEstimate {
  double estimate = 0.0;
  double tail_min = 0.0;
  double tail_max = 0.0;
  bool converged = false;  // last-quartile spread < 0.01
  std::vector<double> probes;
  std::vector<double> values;
};

namespace detail {

inline void require_closed_form(const WeightSequence& seq, const char* what) {
  if (!seq.is_closed_form())
    throw Error(ErrorKind::not_closed_form, std::string(what) + " is undefined on a finite explicit list");
}

inline void require_probes(const std::vector<double>& probes) {
  if (probes.empty()) throw Error(ErrorKind::invalid_input, "probe grid is empty");
  for (std::size_t i = 1; i < probes.size(); ++i)
    if (!(probes[i] > probes[i - 1])) throw Error(ErrorKind::invalid_input, "probe grid must be increasing");
}

inline std::size_t tail_begin(std::size_t size) { return size - std::max<std::size_t>(1, size / 4); }

inline IndexEstimate summarize(std::vector<double> probes, std::vector<double> values, bool use_min) {
  IndexEstimate est;
  auto first = values.begin() + static_cast<std::ptrdiff_t>(tail_begin(values.size()));
  est.tail_min = *std::min_element(first, values.end());
  est.tail_max = *std::max_element(first, values.end());
  est.estimate = use_min ? est.tail_min : est.tail_max;
  est.converged = est.tail_max - est.tail_min < 0.01;
  est.probes = std::move(probes);
  est.values = std::move(values);
  return est;
}

}  // namespace detail

/// a_n solving n (r_n/n)^{a_n} = 1, i.e. a_n = log n / (log n - log r_n).
inline double a_n(const WeightSequence& seq, double n) {
  const double log_n = std::log(n);
  const double log_r = seq.log_tail(n);
  if (!(log_r < log_n))
    throw Error(ErrorKind::degenerate_index, "r_n >= n at n = " + std::to_string(n));
  return log_n / (log_n - log_r);
}

/// liminf a_n estimated as the tail minimum over the probes.
inline IndexEstimate index_a(const WeightSequence& seq, const std::vector<double>& probes = default_probes()) {
  detail::require_closed_form(seq, "index a");
  detail::require_probes(probes);
  std::vector<double> values;
  values.reserve(probes.size());
  for (double n : probes) values.push_back(a_n(seq, n));
  return detail::summarize(probes, std::move(values), true);
}

/// limsup log n / |log w_n^2| estimated as the tail maximum.
inline IndexEstimate index_e_bt(const WeightSequence& seq, const std::vector<double>& probes = default_probes()) {
  detail::require_closed_form(seq, "e_BT");
  detail::require_probes(probes);
  std::vector<double> values;
  const std::size_t tail = detail::tail_begin(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const double log_w2 = seq.w2(probes[i]).log();
    if (!(log_w2 < 0.0)) {
      if (i >= tail) throw Error(ErrorKind::degenerate_index, "w_n >= 1 inside the probe tail");
      values.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    values.push_back(std::log(probes[i]) / -log_w2);
  }
  return detail::summarize(probes, std::move(values), false);
}

struct BmEstimate {
  double estimate = 0.0;
  std::vector<double> grid;
  std::vector<double> slopes;   // d log g / d log n over the probe tail, per grid a
  std::vector<bool> decaying;
};

/// Slope below which (w_n^2)^{a-1} r_n counts as tending to 0 at the horizon.
inline constexpr double kBmSlopeThreshold = 1e-3;

/// Smallest grid a for which g_a(n) = (w_n^2)^{a-1} r_n is strictly decreasing
/// over the probe tail with log-log slope below -kBmSlopeThreshold.
inline BmEstimate index_e_bm(const WeightSequence& seq, const std::vector<double>& a_grid,
                             const std::vector<double>& probes = default_probes()) {
  detail::require_closed_form(seq, "e_BM");
  detail::require_probes(probes);
  if (a_grid.empty() || !std::is_sorted(a_grid.begin(), a_grid.end()))
    throw Error(ErrorKind::invalid_input, "a grid must be nonempty and sorted");
  const std::size_t first = std::min(detail::tail_begin(probes.size()), probes.size() >= 2 ? probes.size() - 2 : 0);
  std::vector<double> log_w2, log_r;
  for (std::size_t i = first; i < probes.size(); ++i) {
    log_w2.push_back(seq.w2(probes[i]).log());
    log_r.push_back(seq.log_tail(probes[i]));
  }
  const double span = std::log(probes.back()) - std::log(probes[first]);
  if (!(span > 0.0)) throw Error(ErrorKind::invalid_input, "probe tail needs two distinct probes");

  BmEstimate est;
  est.grid = a_grid;
  std::optional<double> found;
  for (double a : a_grid) {
    bool monotone = true;
    double prev = 0.0;
    for (std::size_t i = 0; i < log_w2.size(); ++i) {
      const double g = (a - 1.0) * log_w2[i] + log_r[i];
      if (i > 0 && !(g < prev)) monotone = false;
      prev = g;
    }
    const double g_first = (a - 1.0) * log_w2.front() + log_r.front();
    const double slope = (prev - g_first) / span;
    const bool ok = monotone && slope < -kBmSlopeThreshold;
    est.slopes.push_back(slope);
    est.decaying.push_back(ok);
    if (ok && !found) found = a;
  }
  if (!found) throw Error(ErrorKind::grid_too_coarse, "no grid value makes (w_n^2)^(a-1) r_n decay");
  est.estimate = *found;
  return est;
}

struct FinallyReport {
  double e_bt_est = 0.0;
  double theta = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
  double onset_weight = 0.0;  // w_n^2 < n^(-1/theta)
  double onset_tail_weight = 0.0;  // r_n < (w_n^2)^(1-delta)
  double onset_tail_power = 0.0;  // r_n < n^(-epsilon)
};

namespace detail {

template <class Pred>
double onset(const std::vector<double>& probes, Pred holds, const char* label) {
  std::optional<std::size_t> start;
  for (std::size_t i = probes.size(); i-- > 0;) {
    if (!holds(probes[i])) break;
    start = i;
  }
  if (!start) throw Error(ErrorKind::never_holds, std::string(label) + " fails at the probe horizon");
  return probes[*start];
}

}  // namespace detail

/// Onsets of the three "finally for every n" inequalities. Tail sums enter
/// through the upper end of their certified bracket.
inline FinallyReport verify_finally_inequalities(const WeightSequence& seq, double theta, double delta,
                                                 const std::vector<double>& probes = default_probes()) {
  detail::require_closed_form(seq, "finally-inequalities");
  FinallyReport rep;
  rep.e_bt_est = index_e_bt(seq, probes).estimate;
  if (!(theta > rep.e_bt_est && theta < 1.0))
    throw Error(ErrorKind::inadmissible_parameter, "theta must lie in (e_BT, 1)");
  if (!(delta > rep.e_bt_est && delta < 1.0))
    throw Error(ErrorKind::inadmissible_parameter, "delta must lie in (e_BT, 1)");
  rep.theta = theta;
  rep.delta = delta;
  rep.epsilon = (1.0 / theta) * (1.0 - delta);
  rep.onset_weight = detail::onset(
      probes, [&](double n) { return seq.w2(n).log() < -std::log(n) / theta; }, "w_n^2 < n^(-1/theta)");
  rep.onset_tail_weight = detail::onset(
      probes, [&](double n) { return seq.tail(n).hi.log() < (1.0 - delta) * seq.w2(n).log(); },
      "r_n < (w_n^2)^(1-delta)");
  rep.onset_tail_power = detail::onset(
      probes, [&](double n) { return seq.tail(n).hi.log() < -rep.epsilon * std::log(n); }, "r_n < n^(-epsilon)");
  return rep;
}

struct ComparabilityResult {
  double liminf = 0.0;
  double limsup = 0.0;
  bool comparable = false;  // log n and |log w_n| comparable at probe scale
  std::vector<double> values;
};

/// log n / |log w_n| over the probes; comparable iff liminf > 0.01 and limsup < 100.
inline ComparabilityResult prop7_ratio(const WeightSequence& seq, const std::vector<double>& probes = default_probes()) {
  detail::require_closed_form(seq, "log n / |log w_n|");
  detail::require_probes(probes);
  std::vector<double> values;
  for (double n : probes) {
    const double log_w = seq.w(n).log();
    values.push_back(log_w < 0.0 ? std::log(n) / -log_w : std::numeric_limits<double>::infinity());
  }
  auto first = values.begin() + static_cast<std::ptrdiff_t>(detail::tail_begin(values.size()));
  ComparabilityResult res;
  res.liminf = *std::min_element(first, values.end());
  res.limsup = *std::max_element(first, values.end());
  res.comparable = res.liminf > 0.01 && res.limsup < 100.0;
  res.values = std::move(values);
  return res;
}

/// Smallest mu with r_n >= n^(-mu) at every probe n >= 2, plus a 1e-9 margin.
/// Equals 1/min a_n - 1 over the probes (lower bracket end).
inline double lower_exponent_mu(const WeightSequence& seq, const std::vector<double>& probes = default_probes()) {
  double mu = 0.0;
  for (double n : probes) {
    if (n < 2.0) continue;
    mu = std::max(mu, -seq.tail(n).lo.log() / std::log(n));
  }
  return mu + 1e-9;
}

struct IndexReport {
  double a_est = 0.0;
  double e_bt_est = 0.0;
  double e_bm_est = 0.0;
  double theta = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
  double mu = 0.0;
  double onset_weight = 0.0;
  double onset_tail_weight = 0.0;
  double onset_tail_power = 0.0;
  double onset_lower = 0.0;  // r_n >= n^(-mu)
  bool a_converged = false;
  ComparabilityResult comparability;
  /// a > 0 and e_BT < 1 at probe scale (same 0.01 margins as the comparability verdict).
  bool hypotheses_plausible = false;
};

/// Full sequence analysis. theta/delta default to the midpoint of (e_BT, 1).
inline IndexReport analyze(const WeightSequence& seq, std::optional<double> theta = std::nullopt,
                           std::optional<double> delta = std::nullopt,
                           const std::vector<double>& probes = default_probes(), double grid_step = 0.01) {
  IndexReport rep;
  auto a = index_a(seq, probes);
  rep.a_est = a.estimate;
  rep.a_converged = a.converged;
  rep.e_bt_est = index_e_bt(seq, probes).estimate;
  rep.e_bm_est = index_e_bm(seq, linear_grid(grid_step, 1.0, grid_step), probes).estimate;
  const double mid = 0.5 * (rep.e_bt_est + 1.0);
  auto fin = verify_finally_inequalities(seq, theta.value_or(mid), delta.value_or(mid), probes);
  rep.theta = fin.theta;
  rep.delta = fin.delta;
  rep.epsilon = fin.epsilon;
  rep.onset_weight = fin.onset_weight;
  rep.onset_tail_weight = fin.onset_tail_weight;
  rep.onset_tail_power = fin.onset_tail_power;
  rep.mu = lower_exponent_mu(seq, probes);
  rep.onset_lower = detail::onset(
      probes, [&](double n) { return n >= 2.0 && seq.tail(n).lo.log() >= -rep.mu * std::log(n); }, "r_n >= n^(-mu)");
  rep.comparability = prop7_ratio(seq, probes);
  rep.hypotheses_plausible = rep.a_est > 0.01 && rep.e_bt_est < 0.99;
  return rep;
}

}  // namespace densitometer
