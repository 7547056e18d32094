// Canonical sequence w_n^2 = 0.25 / n^2: indexes, h, a small Swiss cheese set
// and one density-ratio scan.

#include <cstdio>

#include "densitometer.hpp"

using namespace densitometer;

int main() {
  const auto seq = WeightSequence::power(0.25, 2.0);

  const auto rep = analyze(seq);
  std::printf("a ~ %.4f  e_BT ~ %.4f  e_BM ~ %.2f\n", rep.a_est, rep.e_bt_est, rep.e_bm_est);

  const Schedule schedule(12);
  const auto sel = choose_subsequence(seq, schedule, 6);
  const auto h = build_h(sel);
  for (const auto& b : h.branches())
    std::printf("h = %+.4f on [%.4g, %.4g)\n", b.value, std::exp(b.t_lo_log), std::exp(b.t_hi_log));

  const auto model = build_packing(seq, 3124, unit_square());
  const auto cover = build_cover(model, 3, 4);
  std::printf("|K_N| = %.6f, cover bound for m = 3: %.4f\n", model.measure(), cover.measure_bound);

  ScanConfig cfg;
  cfg.points = 20;
  cfg.rects_per_point = 200;
  const auto scan = scan_theorem6(model, cover, h, cfg);
  for (std::size_t i = 0; i < scan.t_grid.size(); ++i)
    std::printf("t = %-5g h = %+.3f  min margin %.4f  violations %zu\n", scan.t_grid[i], h(scan.t_grid[i]),
                scan.min_margin[i], scan.violations[i]);
  return scan.total_violations == 0 ? 0 : 1;
}
