#pragma once

// JSON and CSV forms of sequences, interval families, dilations, compact set
// models, covers, rate functions and reports. Every JSON artifact loads back
// into a value comparing equal to the one written. Requires nlohmann/json
// (json.hpp on the include path).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "densitometer/auxfn.hpp"
#include "densitometer/dilation.hpp"
#include "densitometer/error.hpp"
#include "densitometer/scan.hpp"
#include "densitometer/setmodel.hpp"
#include "densitometer/weights.hpp"

namespace densitometer::io {

using nlohmann::json;

/// Shortest text that reads back to the same double.
inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_num(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw Error(ErrorKind::invalid_input, "not a number: '" + s + "'");
  return v;
}

inline std::vector<double> parse_list(const std::string& s, char sep = ',') {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(parse_num(item));
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::invalid_input, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::invalid_input, "cannot write " + path);
  out << text;
}

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_input, what + ": " + e.what());
  }
}

template <class T>
T get(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::invalid_input, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_input, std::string("field '") + key + "': " + e.what());
  }
}

// --- sequences ---------------------------------------------------------------

inline json to_json(const WeightSequence& seq) {
  return std::visit(
      [](const auto& k) -> json {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, PowerForm>) return {{"kind", "power"}, {"c", k.c}, {"p", k.p}};
        else if constexpr (std::is_same_v<K, GeometricForm>) return {{"kind", "geometric"}, {"c", k.c}, {"rho", k.rho}};
        else return {{"kind", "explicit"}, {"w2", k.w2}};
      },
      seq.kind());
}

inline WeightSequence sequence_from_json(const json& j) {
  const auto kind = get<std::string>(j, "kind");
  if (kind == "power") return WeightSequence::power(get<double>(j, "c"), get<double>(j, "p"));
  if (kind == "geometric") return WeightSequence::geometric(get<double>(j, "c"), get<double>(j, "rho"));
  if (kind == "explicit") return WeightSequence::from_list(get<std::vector<double>>(j, "w2"));
  throw Error(ErrorKind::invalid_input, "unknown sequence kind '" + kind + "'");
}

/// "power:c=0.25,p=2" or "geometric:c=1,rho=0.5".
inline WeightSequence sequence_from_shorthand(const std::string& text) {
  const auto colon = text.find(':');
  json j;
  j["kind"] = text.substr(0, colon);
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::invalid_input, "expected key=value in '" + item + "'");
    j[item.substr(0, eq)] = parse_num(item.substr(eq + 1));
  }
  return sequence_from_json(j);
}

/// Inline JSON, shorthand, or a path to a JSON file.
inline WeightSequence load_sequence(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') return sequence_from_json(parse_json(arg, "sequence"));
  if (arg.rfind("power:", 0) == 0 || arg.rfind("geometric:", 0) == 0) return sequence_from_shorthand(arg);
  return sequence_from_json(parse_json(read_file(arg), arg));
}

// --- intervals and rectangles --------------------------------------------------

inline json to_json(const Interval& iv) { return json::array({iv.lo(), iv.hi()}); }

inline Interval interval_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(ErrorKind::invalid_input, "interval must be [lo, hi]");
  return Interval(j[0].get<double>(), j[1].get<double>());
}

inline std::vector<Interval> intervals_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::invalid_input, "expected [[lo,hi],...]");
  std::vector<Interval> out;
  for (const auto& e : j) out.push_back(interval_from_json(e));
  return out;
}

inline json to_json(std::span<const Interval> ivs) {
  json j = json::array();
  for (const auto& iv : ivs) j.push_back(to_json(iv));
  return j;
}

inline json to_json(const Rectangle& r) { return json::array({r.x.lo(), r.x.hi(), r.y.lo(), r.y.hi()}); }

/// [x0,x1,y0,y1] as a rectangle, or [x,y,w] as a square.
inline Rectangle rect_from_json(const json& j) {
  if (!j.is_array() || (j.size() != 4 && j.size() != 3))
    throw Error(ErrorKind::invalid_input, "rectangle must be [x0,x1,y0,y1] or [x,y,w]");
  for (const auto& v : j)
    if (!v.is_number()) throw Error(ErrorKind::invalid_input, "rectangle coordinates must be numbers");
  if (j.size() == 3) return Cube{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()}.rect();
  return {Interval(j[0].get<double>(), j[1].get<double>()), Interval(j[2].get<double>(), j[3].get<double>())};
}

inline std::vector<Rectangle> rects_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::invalid_input, "expected a list of rectangles");
  std::vector<Rectangle> out;
  for (const auto& e : j) out.push_back(rect_from_json(e));
  return out;
}

inline json to_json(const DilationResult1D& d) {
  json pieces = json::array();
  for (const auto& p : d.pieces) pieces.push_back({{"left", to_json(p.left)}, {"right", to_json(p.right)}});
  return {{"gamma", d.gamma},
          {"union", to_json(d.union_set.items())},
          {"pieces", pieces},
          {"measure", d.measure()},
          {"identity_rhs", d.identity_rhs()}};
}

inline json to_json(const RectUnion& u) {
  json rects = json::array();
  for (const auto& r : u.rects()) rects.push_back(to_json(r));
  return {{"gamma", u.gamma()}, {"rects", rects}, {"measure", u.measure()}};
}

/// Rebuilds the column form from a rect list emitted column by column.
inline RectUnion rect_union_from_json(const json& j) {
  const auto rects = rects_from_json(get<json>(j, "rects"));
  std::vector<RectUnion::Column> columns;
  std::vector<DisjointIntervalSet> heights;
  std::vector<std::vector<Interval>> pending;
  for (const auto& r : rects) {
    if (columns.empty() || !(columns.back().x == r.x)) {
      columns.push_back({r.x, static_cast<std::uint32_t>(pending.size())});
      pending.emplace_back();
    }
    pending.back().push_back(r.y);
  }
  std::map<std::vector<std::pair<double, double>>, std::uint32_t> ids;
  for (auto& col : columns) {
    std::vector<std::pair<double, double>> key;
    for (const auto& iv : pending[col.heights]) key.emplace_back(iv.lo(), iv.hi());
    auto [it, fresh] = ids.try_emplace(key, static_cast<std::uint32_t>(heights.size()));
    if (fresh) heights.push_back(DisjointIntervalSet::from_sorted(pending[col.heights]));
    col.heights = it->second;
  }
  return RectUnion(std::move(columns), std::move(heights), get<double>(j, "gamma"));
}

// --- compact set models and covers ----------------------------------------------

inline json to_json(const CompactSetModel& m) {
  json cubes = json::array();
  for (const auto& c : m.cubes()) cubes.push_back(json::array({c.x, c.y, c.w}));
  return {{"outer", to_json(m.outer())}, {"cubes", cubes}, {"trunc", m.trunc()}, {"seq", to_json(m.seq())}};
}

inline CompactSetModel set_from_json(const json& j) {
  const auto outer = rect_from_json(get<json>(j, "outer"));
  std::vector<Cube> cubes;
  for (const auto& c : get<json>(j, "cubes")) {
    if (!c.is_array() || c.size() != 3) throw Error(ErrorKind::invalid_input, "cube must be [x,y,w]");
    cubes.push_back({c[0].get<double>(), c[1].get<double>(), c[2].get<double>()});
  }
  if (get<std::size_t>(j, "trunc") != cubes.size())
    throw Error(ErrorKind::invalid_input, "trunc does not match the cube count");
  return CompactSetModel(outer, std::move(cubes), sequence_from_json(get<json>(j, "seq")));
}

inline json to_json(const CoverCm& c) {
  json blocks = json::array();
  for (const auto& b : c.blocks)
    blocks.push_back({{"s", b.s},
                      {"gamma", b.gamma},
                      {"first", b.first},
                      {"last", b.last},
                      {"dilation", to_json(b.dilation)},
                      {"exact_measure", b.exact_measure},
                      {"identity_rhs", b.identity_rhs}});
  return {{"m", c.m}, {"s_hi", c.s_hi}, {"blocks", blocks}, {"bound_terms", c.bound_terms}, {"measure_bound", c.measure_bound}};
}

inline CoverCm cover_from_json(const json& j) {
  CoverCm c;
  c.m = get<int>(j, "m");
  c.s_hi = get<int>(j, "s_hi");
  for (const auto& b : get<json>(j, "blocks")) {
    CoverBlock block;
    block.s = get<int>(b, "s");
    block.gamma = get<double>(b, "gamma");
    block.first = get<std::size_t>(b, "first");
    block.last = get<std::size_t>(b, "last");
    block.dilation = rect_union_from_json(get<json>(b, "dilation"));
    block.exact_measure = get<double>(b, "exact_measure");
    block.identity_rhs = get<double>(b, "identity_rhs");
    c.blocks.push_back(std::move(block));
  }
  c.bound_terms = get<std::vector<double>>(j, "bound_terms");
  c.measure_bound = get<double>(j, "measure_bound");
  return c;
}

// --- index report -----------------------------------------------------------------

inline json to_json(const IndexReport& r) {
  return {{"a_est", r.a_est},
          {"a_converged", r.a_converged},
          {"e_bt_est", r.e_bt_est},
          {"e_bm_est", r.e_bm_est},
          {"theta", r.theta},
          {"delta", r.delta},
          {"epsilon", r.epsilon},
          {"mu", r.mu},
          {"onset_weight", r.onset_weight},
          {"onset_tail_weight", r.onset_tail_weight},
          {"onset_tail_power", r.onset_tail_power},
          {"onset_lower", r.onset_lower},
          {"comparability", {{"liminf", r.comparability.liminf}, {"limsup", r.comparability.limsup}, {"comparable", r.comparability.comparable}, {"values", r.comparability.values}}},
          {"hypotheses_plausible", r.hypotheses_plausible}};
}

inline IndexReport index_report_from_json(const json& j) {
  IndexReport r;
  r.a_est = get<double>(j, "a_est");
  r.a_converged = get<bool>(j, "a_converged");
  r.e_bt_est = get<double>(j, "e_bt_est");
  r.e_bm_est = get<double>(j, "e_bm_est");
  r.theta = get<double>(j, "theta");
  r.delta = get<double>(j, "delta");
  r.epsilon = get<double>(j, "epsilon");
  r.mu = get<double>(j, "mu");
  r.onset_weight = get<double>(j, "onset_weight");
  r.onset_tail_weight = get<double>(j, "onset_tail_weight");
  r.onset_tail_power = get<double>(j, "onset_tail_power");
  r.onset_lower = get<double>(j, "onset_lower");
  const auto p = get<json>(j, "comparability");
  r.comparability.liminf = get<double>(p, "liminf");
  r.comparability.limsup = get<double>(p, "limsup");
  r.comparability.comparable = get<bool>(p, "comparable");
  r.comparability.values = get<std::vector<double>>(p, "values");
  r.hypotheses_plausible = get<bool>(j, "hypotheses_plausible");
  return r;
}

}  // namespace densitometer::io

namespace densitometer {

inline bool operator==(const IndexReport& a, const IndexReport& b) { return io::to_json(a) == io::to_json(b); }

}  // namespace densitometer

namespace densitometer::io {

// --- CSV ----------------------------------------------------------------------------

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : columns_(header.size()) { row_strings(header); }

  template <class... Cells>
  void row(const Cells&... cells) {
    std::vector<std::string> out{cell(cells)...};
    if (out.size() != columns_) throw Error(ErrorKind::invalid_input, "csv row width mismatch");
    row_strings(out);
  }

  const std::string& str() const { return text_; }

 private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const char* v) { return v; }
  static std::string cell(const std::string& v) { return v; }

  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
    text_ += '\n';
  }

  std::size_t columns_;
  std::string text_;
};

inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

/// Rows t_lo_log, t_hi_log, h, f from the top branch down.
inline std::string rate_csv(const RateFunction& h) {
  Csv csv({"t_lo_log", "t_hi_log", "h", "f"});
  for (const auto& b : h.branches()) {
    const double hv = h.kind() == RateKind::h ? b.value : 1.0 - b.value;
    csv.row(b.t_lo_log, b.t_hi_log, hv, 1.0 - hv);
  }
  return csv.str();
}

/// Reads rate_csv output back; s_{l+1} is recovered from f = 4 * 2^(-s_{l+1}).
inline RateFunction rate_from_csv(const std::string& text, RateKind kind = RateKind::h) {
  const auto rows = parse_csv(text);
  if (rows.empty() || rows[0] != std::vector<std::string>{"t_lo_log", "t_hi_log", "h", "f"})
    throw Error(ErrorKind::invalid_input, "rate csv needs header t_lo_log,t_hi_log,h,f");
  std::vector<RateBranch> branches;
  int prev_next = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 4) throw Error(ErrorKind::invalid_input, "rate csv row " + std::to_string(i) + " needs 4 cells");
    RateBranch b;
    b.t_lo_log = parse_num(rows[i][0]);
    b.t_hi_log = parse_num(rows[i][1]);
    const double hv = parse_num(rows[i][2]);
    const double fv = parse_num(rows[i][3]);
    const double s = 2.0 - std::log2(fv);
    if (!(fv > 0.0) || s != std::round(s) || 1.0 - hv != fv)
      throw Error(ErrorKind::invalid_input, "rate csv row " + std::to_string(i) + " is not of the form f = 4*2^-s");
    b.s_next = static_cast<int>(s);
    b.s_ell = prev_next;
    b.value = kind == RateKind::h ? hv : fv;
    prev_next = b.s_next;
    branches.push_back(b);
  }
  return RateFunction(kind, std::move(branches));
}

inline std::string scan_csv(const ScanReport& rep) {
  Csv csv({"t", "point_id", "x", "y", "min_ratio", "h", "margin", "violations", "in_cover"});
  for (const auto& r : rep.rows) csv.row(r.t, r.point_id, r.point.x, r.point.y, r.min_ratio, r.h, r.margin, r.violations, r.in_cover);
  return csv.str();
}

inline std::string deficit_csv(const std::vector<DeficitRow>& rows) {
  Csv csv({"t", "worst_deficit", "f", "deficit_times_abs_log_t", "f_times_abs_log_t", "within"});
  for (const auto& r : rows) csv.row(r.t, r.worst_deficit, r.envelope, r.deficit_log, r.envelope_log, r.within);
  return csv.str();
}

inline std::string series_csv(const std::vector<SeriesTrace>& traces) {
  Csv csv({"series", "s", "term_log", "partial_sum", "ratio"});
  for (const auto& tr : traces)
    for (std::size_t i = 0; i < tr.s.size(); ++i)
      csv.row(to_string(tr.kind), tr.s[i], tr.terms[i].log(), tr.partial_sums[i],
              i == 0 ? std::numeric_limits<double>::quiet_NaN() : tr.ratios[i - 1]);
  return csv.str();
}

inline std::string littleo_csv(const LittleOTrace& tr) {
  Csv csv({"ell", "s_next", "b_log", "f", "f_times_abs_log_b", "abs_log_w_over_n_log"});
  for (std::size_t i = 0; i < tr.ell.size(); ++i)
    csv.row(tr.ell[i], tr.s_next[i], tr.log_b[i], tr.f_value[i], tr.product[i], tr.log_w_ratio[i]);
  return csv.str();
}

}  // namespace densitometer::io
