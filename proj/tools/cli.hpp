#pragma once

// densitometer command line. Exit codes: 0 success, 1 findings present,
// 2 usage or input error. Relative paths resolve against --out-dir.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "densitometer.hpp"
#include "densitometer/io.hpp"

namespace densitometer::cli {

namespace fs = std::filesystem;
using io::json;

enum Exit : int { kOk = 0, kFindings = 1, kUsage = 2 };

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Context {
  fs::path out_dir = ".";
  std::ostream* out = nullptr;

  std::string resolve(const std::string& p) const {
    fs::path path(p);
    return path.is_absolute() ? path.string() : (out_dir / path).string();
  }

  /// Writes to the file when a path is given, otherwise to stdout.
  void emit(const std::string& path, const std::string& text) const {
    if (path.empty()) {
      *out << text;
      if (!text.empty() && text.back() != '\n') *out << '\n';
    } else {
      io::write_file(resolve(path), text);
    }
  }

  WeightSequence sequence(const std::string& arg) const {
    if (!arg.empty() && arg.front() != '{' && arg.find(':') == std::string::npos) return io::load_sequence(resolve(arg));
    return io::load_sequence(arg);
  }

  json inline_or_file(const std::string& arg, const char* what) const {
    if (!arg.empty() && (arg.front() == '[' || arg.front() == '{')) return io::parse_json(arg, what);
    return io::parse_json(io::read_file(resolve(arg)), arg);
  }
};

inline std::vector<double> parse_t_grid(const std::string& text) {
  auto t = io::parse_list(text);
  if (t.empty()) throw Error(ErrorKind::invalid_input, "--t needs at least one value");
  return t;
}

inline Point parse_point(const std::string& text) {
  const auto v = io::parse_list(text);
  if (v.size() != 2) throw Error(ErrorKind::invalid_input, "point must be x,y");
  return {v[0], v[1]};
}

inline Rectangle parse_outer(const std::string& text) {
  const auto v = io::parse_list(text);
  if (v.size() != 4) throw Error(ErrorKind::invalid_input, "--outer must be x0,x1,y0,y1");
  return {Interval(v[0], v[1]), Interval(v[2], v[3])};
}

/// Largest s >= m whose block n_s .. n_{s+1}-1 is fully materialized.
inline int default_s_hi(const CompactSetModel& model, int m) {
  int s = m;
  while (s + 1 < Schedule::kMaxHorizon && Schedule(s + 1).block_last(s + 1) <= static_cast<double>(model.trunc())) ++s;
  return s;
}

inline RateFunction rate_function(const WeightSequence& seq, int ell_max, int s_max, RateKind kind) {
  const auto sel = choose_subsequence(seq, Schedule(s_max), ell_max);
  return kind == RateKind::h ? build_h(sel) : build_f(sel);
}

inline std::string index_text(const IndexReport& r, const IndexEstimate& a, const IndexEstimate& bt, double grid_step) {
  std::string s;
  s += "a = " + fmt("%.6f", r.a_est) + " +- " + fmt("%.2g", a.tail_max - a.tail_min) + " (tail min over probes" +
       (r.a_converged ? ", converged" : ", not converged") + ")\n";
  s += "e_BT = " + fmt("%.6f", r.e_bt_est) + " +- " + fmt("%.2g", bt.tail_max - bt.tail_min) + " (tail max over probes)\n";
  s += "e_BM = " + fmt("%.4f", r.e_bm_est) + " +- " + fmt("%.2g", grid_step) + " (grid step)\n";
  s += "theta = " + fmt("%.6f", r.theta) + ", delta = " + fmt("%.6f", r.delta) + ", epsilon = " + fmt("%.6f", r.epsilon) + "\n";
  s += "onsets: w_n^2 < n^(-1/theta) from n = " + fmt("%.0f", r.onset_weight) + "; r_n < (w_n^2)^(1-delta) from n = " +
       fmt("%.0f", r.onset_tail_weight) + "; r_n < n^(-epsilon) from n = " + fmt("%.0f", r.onset_tail_power) + "\n";
  s += "mu = " + fmt("%.6f", r.mu) + " (r_n >= n^(-mu) from n = " + fmt("%.0f", r.onset_lower) + ")\n";
  s += "log n / |log w_n|: liminf " + fmt("%.6f", r.comparability.liminf) + ", limsup " + fmt("%.6f", r.comparability.limsup) +
       (r.comparability.comparable ? ", comparable\n" : ", not comparable\n");
  s += std::string("hypotheses a > 0, e_BT < 1: ") + (r.hypotheses_plausible ? "plausible" : "implausible") + "\n";
  return s;
}

struct ScanOptions {
  std::string t = "0.25,0.05,0.01";
  std::size_t points = 100;
  std::size_t rects = 500;
  std::uint64_t seed = 42;
  int m = 3;
  std::optional<int> s_hi;

  ScanConfig config(int s_hi_value) const {
    ScanConfig cfg;
    cfg.t_grid = parse_t_grid(t);
    cfg.points = points;
    cfg.rects_per_point = rects;
    cfg.seed = seed;
    cfg.m = m;
    cfg.s_hi = s_hi_value;
    cfg.threads = threads_from_env();
    return cfg;
  }

  void bind(CLI::App* sub) {
    sub->add_option("--t", t, "comma-separated t grid");
    sub->add_option("--points", points, "sampled points")->check(CLI::PositiveNumber);
    sub->add_option("--rects", rects, "rectangles per point and t")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "seed for all sampling");
    sub->add_option("--m", m, "first cover block")->check(CLI::PositiveNumber);
    sub->add_option("--s-hi", s_hi, "last cover block (default: last fully materialized block)");
  }
};

struct ScanOutcome {
  ScanReport scan;
  SeparationReport separation;
  std::vector<DeficitRow> deficit;
  bool findings() const { return scan.total_violations > 0 || separation.violations > 0; }
};

inline ScanOutcome run_scan(const CompactSetModel& model, const CoverCm& cover, const RateFunction& h,
                            const ScanConfig& cfg, const std::vector<Point>& extra) {
  auto sampled = sample_points(model, cover, cfg);
  auto points = sampled.points;
  points.insert(points.end(), extra.begin(), extra.end());
  ScanOutcome o;
  o.scan = scan_points(model, cover, h, cfg, points);
  o.scan.acceptance = sampled.acceptance;
  o.separation = separation_check(model, cover, h, cfg, sampled.points);
  std::vector<RateBranch> f_branches = h.branches();
  for (auto& b : f_branches) b.value = 1.0 - b.value;
  o.deficit = scan_theorem13(o.scan, RateFunction(RateKind::f, std::move(f_branches)));
  return o;
}

inline std::string scan_text(const ScanOutcome& o) {
  std::string s;
  s += "acceptance = " + fmt("%.6f", o.scan.acceptance) + "\n";
  for (std::size_t i = 0; i < o.scan.t_grid.size(); ++i)
    s += "t = " + fmt("%g", o.scan.t_grid[i]) + ": min margin " + fmt("%.6f", o.scan.min_margin[i]) + ", violations " +
         std::to_string(o.scan.violations[i]) + "\n";
  s += "violations on in-cover points (excluded) = " + std::to_string(o.scan.exceptional_violations) + "\n";
  s += "separation (inferred hypothesis): " + std::to_string(o.separation.violations) + " violations in " +
       std::to_string(o.separation.checks) + " checks, " + std::to_string(o.separation.skipped_in_cover) +
       " points skipped\n";
  return s;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dilation, index analysis and density-ratio verification for Swiss-cheese compact sets", "densitometer"};
  app.require_subcommand(1);
  Context ctx;
  ctx.out = &out;
  std::string out_dir = ".";
  app.add_option("--out-dir", out_dir, "directory for all relative paths");

  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    return sub;
  };

  // indices
  std::string seq_arg, out_path;
  std::optional<double> theta, delta;
  double probe_horizon = 1e6, grid_step = 0.01;
  auto* indices = add("indices", "convergence indexes of a weight sequence");
  indices->add_option("--seq", seq_arg, "sequence: JSON, shorthand like power:c=0.25,p=2, or file")->required();
  indices->add_option("--theta", theta);
  indices->add_option("--delta", delta);
  indices->add_option("--probe-horizon", probe_horizon)->check(CLI::Range(4.0, 1e300));
  indices->add_option("--grid-step", grid_step)->check(CLI::Range(1e-6, 0.5));
  indices->add_option("--out", out_path, "report JSON");

  // dilate1d / dilate2d
  std::string in_arg;
  double gamma = 2.0;
  auto* d1 = add("dilate1d", "simultaneous dilation of disjoint intervals");
  d1->add_option("--in", in_arg, "[[lo,hi],...] inline or file")->required();
  d1->add_option("--gamma", gamma)->required();
  d1->add_option("--out", out_path);
  auto* d2 = add("dilate2d", "simultaneous dilation of disjoint rectangles");
  d2->add_option("--in", in_arg, "[[x0,x1,y0,y1],...] or [[x,y,w],...] inline or file")->required();
  d2->add_option("--gamma", gamma)->required();
  d2->add_option("--out", out_path);

  // auxfn
  int ell_max = 8, s_max = 40;
  auto* aux = add("auxfn", "breakpoints and the step functions h and f");
  aux->add_option("--seq", seq_arg)->required();
  aux->add_option("--ell-max", ell_max)->check(CLI::PositiveNumber);
  aux->add_option("--s-max", s_max)->check(CLI::Range(1, Schedule::kMaxHorizon));
  aux->add_option("--out", out_path, "h.csv");

  // diag
  double tol = 1e-12;
  auto* diag = add("diag", "series and little-o diagnostics");
  diag->require_subcommand(1);
  auto* series = diag->add_subcommand("series", "partial sums of the block series");
  series->fallthrough();
  series->add_option("--seq", seq_arg)->required();
  series->add_option("--tol", tol)->check(CLI::PositiveNumber);
  series->add_option("--s-max", s_max)->check(CLI::Range(1, Schedule::kMaxHorizon));
  series->add_option("--out", out_path);
  auto* littleo = diag->add_subcommand("littleo", "f(b) |log b| at the branch breakpoints");
  littleo->fallthrough();
  littleo->add_option("--seq", seq_arg)->required();
  littleo->add_option("--ell-max", ell_max)->check(CLI::PositiveNumber);
  littleo->add_option("--s-max", s_max)->check(CLI::Range(1, Schedule::kMaxHorizon));
  littleo->add_option("--out", out_path);

  // build-set
  std::size_t n_cubes = 0;
  std::string outer_arg = "0,1,0,1";
  auto* build = add("build-set", "shelf-pack the first N cubes");
  build->add_option("--seq", seq_arg)->required();
  build->add_option("--n", n_cubes)->required();
  build->add_option("--outer", outer_arg, "x0,x1,y0,y1");
  build->add_option("--out", out_path, "set.json");

  // cover
  std::string set_arg;
  int m = 3;
  std::optional<int> s_hi;
  std::vector<std::string> query;
  auto* cover_cmd = add("cover", "exceptional cover C_m truncated at s_hi");
  cover_cmd->add_option("--set", set_arg)->required();
  cover_cmd->add_option("--m", m)->check(CLI::PositiveNumber);
  cover_cmd->add_option("--s-hi", s_hi);
  cover_cmd->add_option("--query", query, "x,y points to classify");
  cover_cmd->add_option("--out", out_path, "cover.json");

  // scan
  std::string auxfn_arg, deficit_path;
  std::vector<std::string> extra_points;
  ScanOptions scan_opts;
  auto* scan = add("scan", "sampled density ratios against h(t)");
  scan->add_option("--set", set_arg)->required();
  scan->add_option("--auxfn", auxfn_arg, "h.csv")->required();
  scan_opts.bind(scan);
  scan->add_option("--point", extra_points, "extra x,y points scanned after the sampled ones");
  scan->add_option("--deficit", deficit_path, "deficit trace CSV");
  scan->add_option("--out", out_path, "report.csv");

  // verify-all
  int level = 4;
  auto* verify = add("verify-all", "indices, h, diagnostics, set, cover and scan in one run");
  verify->add_option("--seq", seq_arg)->required();
  verify->add_option("--level", level, "last cover block; N = n_(level+1) - 1")->check(CLI::Range(1, 6));
  verify->add_option("--ell-max", ell_max)->check(CLI::PositiveNumber);
  scan_opts.bind(verify);

  std::vector<const char*> argv{"densitometer"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    ctx.out_dir = out_dir;
    fs::create_directories(ctx.out_dir);

    if (*indices) {
      const auto seq = ctx.sequence(seq_arg);
      const auto probes = default_probes(probe_horizon);
      const auto rep = analyze(seq, theta, delta, probes, grid_step);
      out << index_text(rep, index_a(seq, probes), index_e_bt(seq, probes), grid_step);
      if (!out_path.empty()) ctx.emit(out_path, io::to_json(rep).dump(2));
      return rep.hypotheses_plausible ? kOk : kFindings;
    }

    if (*d1) {
      const auto r = dilate_1d(io::intervals_from_json(ctx.inline_or_file(in_arg, "intervals")), gamma);
      ctx.emit(out_path, io::to_json(r).dump(2));
      return kOk;
    }

    if (*d2) {
      const auto cubes = io::rects_from_json(ctx.inline_or_file(in_arg, "rectangles"));
      const auto r = dilate_2d(cubes, gamma);
      double w2 = 0.0;
      for (const auto& c : cubes) w2 += c.area();
      auto j = io::to_json(r);
      j["identity_rhs"] = (2.0 * gamma + 1.0) * (2.0 * gamma + 1.0) * w2;
      ctx.emit(out_path, j.dump(2));
      return kOk;
    }

    if (*aux) {
      const auto h = rate_function(ctx.sequence(seq_arg), ell_max, s_max, RateKind::h);
      ctx.emit(out_path, io::rate_csv(h));
      return kOk;
    }

    if (*series) {
      try {
        const auto traces = series_diagnostics(ctx.sequence(seq_arg), Schedule(s_max), tol);
        ctx.emit(out_path, io::series_csv(traces));
        bool all = true;
        for (const auto& tr : traces) {
          if (!out_path.empty())
            out << to_string(tr.kind) << ": sum " << fmt("%.10g", tr.sum)
                << (tr.reached_tol ? ", term < tol at s = " + std::to_string(tr.s_reached) : ", tol not reached") << "\n";
          all = all && tr.reached_tol;
        }
        return all ? kOk : kFindings;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::divergent) throw;
        err << "finding: " << e.what() << "\n";
        return kFindings;
      }
    }

    if (*littleo) {
      const auto seq = ctx.sequence(seq_arg);
      const Schedule schedule(s_max);
      const auto tr = little_o_check(choose_subsequence(seq, schedule, ell_max), seq, schedule);
      ctx.emit(out_path, io::littleo_csv(tr));
      if (!out_path.empty()) out << "verdict: " << to_string(tr.verdict) << "\n";
      return tr.verdict == DecayVerdict::diverging ? kFindings : kOk;
    }

    if (*build) {
      const auto model = build_packing(ctx.sequence(seq_arg), n_cubes, parse_outer(outer_arg));
      ctx.emit(out_path, io::to_json(model).dump());
      return kOk;
    }

    if (*cover_cmd) {
      const auto model = io::set_from_json(ctx.inline_or_file(set_arg, "set"));
      const int hi = s_hi.value_or(default_s_hi(model, m));
      const auto cover = build_cover(model, m, hi);
      if (!out_path.empty()) {
        ctx.emit(out_path, io::to_json(cover).dump());
        for (const auto& b : cover.blocks)
          out << "block " << b.s << ": cubes " << b.first << ".." << b.last << ", measure " << fmt("%.10g", b.exact_measure)
              << " (identity " << fmt("%.10g", b.identity_rhs) << ")\n";
        out << "measure bound for m = " << m << ": " << fmt("%.10g", cover.measure_bound) << "\n";
      } else {
        ctx.emit("", io::to_json(cover).dump());
      }
      for (const auto& q : query) {
        const auto rep = is_exceptional(model, cover, parse_point(q));
        out << q << ": " << to_string(rep.overall) << "\n";
      }
      return kOk;
    }

    if (*scan) {
      const auto model = io::set_from_json(ctx.inline_or_file(set_arg, "set"));
      const auto h = io::rate_from_csv(io::read_file(ctx.resolve(auxfn_arg)));
      const int hi = scan_opts.s_hi.value_or(default_s_hi(model, scan_opts.m));
      const auto cfg = scan_opts.config(hi);
      const auto cover = build_cover(model, cfg.m, hi);
      std::vector<Point> extra;
      for (const auto& p : extra_points) extra.push_back(parse_point(p));
      const auto o = run_scan(model, cover, h, cfg, extra);
      ctx.emit(out_path, io::scan_csv(o.scan));
      if (!deficit_path.empty()) ctx.emit(deficit_path, io::deficit_csv(o.deficit));
      if (!out_path.empty()) out << scan_text(o);
      return o.findings() ? kFindings : kOk;
    }

    if (*verify) {
      const auto seq = ctx.sequence(seq_arg);
      io::Csv summary({"stage", "metric", "value"});
      bool findings = false;

      const auto rep = analyze(seq);
      ctx.emit("indices.json", io::to_json(rep).dump(2));
      summary.row("indices", "a", rep.a_est);
      summary.row("indices", "e_bt", rep.e_bt_est);
      summary.row("indices", "e_bm", rep.e_bm_est);
      summary.row("indices", "hypotheses_plausible", rep.hypotheses_plausible);
      findings = findings || !rep.hypotheses_plausible;

      const Schedule wide(s_max);
      const auto sel = choose_subsequence(seq, wide, ell_max);
      const auto h = build_h(sel);
      ctx.emit("h.csv", io::rate_csv(h));
      summary.row("auxfn", "branches", h.branches().size());
      summary.row("auxfn", "horizon_log", h.horizon().log());

      try {
        const auto traces = series_diagnostics(seq, wide, tol);
        ctx.emit("series.csv", io::series_csv(traces));
        for (const auto& tr : traces) {
          summary.row("series", std::string(to_string(tr.kind)) + " sum", tr.sum);
          summary.row("series", std::string(to_string(tr.kind)) + " s_reached", tr.s_reached);
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::divergent) throw;
        summary.row("series", "divergent", true);
        findings = true;
      }
      const auto lo = little_o_check(sel, seq, wide);
      ctx.emit("littleo.csv", io::littleo_csv(lo));
      summary.row("littleo", "verdict", to_string(lo.verdict));
      findings = findings || lo.verdict == DecayVerdict::diverging;

      const std::size_t n = static_cast<std::size_t>(Schedule(level).block_last(level));
      const auto model = build_packing(seq, n, unit_square());
      ctx.emit("set.json", io::to_json(model).dump());
      summary.row("build-set", "trunc", model.trunc());
      summary.row("build-set", "measure", model.measure());

      const auto cfg = scan_opts.config(level);
      const auto cover = build_cover(model, cfg.m, level);
      ctx.emit("cover.json", io::to_json(cover).dump());
      for (const auto& b : cover.blocks) {
        summary.row("cover", "block " + std::to_string(b.s) + " measure", b.exact_measure);
        summary.row("cover", "block " + std::to_string(b.s) + " identity_rhs", b.identity_rhs);
      }
      summary.row("cover", "measure_bound", cover.measure_bound);

      const auto o = run_scan(model, cover, h, cfg, {});
      ctx.emit("report.csv", io::scan_csv(o.scan));
      ctx.emit("deficit.csv", io::deficit_csv(o.deficit));
      summary.row("scan", "acceptance", o.scan.acceptance);
      summary.row("scan", "evaluations", o.scan.evaluations);
      for (std::size_t i = 0; i < o.scan.t_grid.size(); ++i) {
        summary.row("scan", "t=" + io::num(o.scan.t_grid[i]) + " min_margin", o.scan.min_margin[i]);
        summary.row("scan", "t=" + io::num(o.scan.t_grid[i]) + " violations", o.scan.violations[i]);
      }
      summary.row("separation", "checks", o.separation.checks);
      summary.row("separation", "violations", o.separation.violations);
      findings = findings || o.findings();
      summary.row("verify-all", "status", findings ? "findings" : "ok");

      ctx.emit("summary.csv", summary.str());
      out << summary.str();
      return findings ? kFindings : kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace densitometer::cli
