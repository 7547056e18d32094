#include <gtest/gtest.h>

#include <random>
#include <set>

#include "densitometer/interval.hpp"

using namespace densitometer;

namespace {

std::vector<Interval> random_family(std::mt19937_64& rng, int max_n) {
  std::uniform_int_distribution<int> count(0, max_n);
  std::uniform_real_distribution<double> pos(-10.0, 10.0), len(0.01, 4.0);
  std::vector<Interval> out;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    // Quarter-grid coordinates make shared endpoints common.
    const double lo = std::round(pos(rng) * 4.0) / 4.0;
    out.emplace_back(lo, lo + std::max(0.25, std::round(len(rng) * 4.0) / 4.0));
  }
  return out;
}

Label direct_label(const std::vector<Interval>& ivs, double x) {
  Label l;
  for (std::uint32_t i = 0; i < ivs.size(); ++i)
    if (ivs[i].locate(x) == Location::inside) l.push_back(i);
  return l;
}

}  // namespace

TEST(Interval, RejectsDegenerate) {
  EXPECT_THROW(Interval(1.0, 1.0), Error);
  EXPECT_THROW(Interval(2.0, 1.0), Error);
  EXPECT_THROW(Interval(0.0, INFINITY), Error);
}

TEST(Interval, LocateHasThreeVerdicts) {
  const Interval iv(0.0, 1.0);
  EXPECT_EQ(iv.locate(0.5), Location::inside);
  EXPECT_EQ(iv.locate(0.0), Location::boundary);
  EXPECT_EQ(iv.locate(1.0), Location::boundary);
  EXPECT_EQ(iv.locate(2.0), Location::outside);
}

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize({Interval(0, 1), Interval(0.5, 2)}), DisjointIntervalSet::from_sorted({Interval(0, 2)}));
  EXPECT_EQ(normalize({Interval(0, 1), Interval(2, 3)}).size(), 2u);
  EXPECT_TRUE(normalize(std::vector<Interval>{}).empty());
  EXPECT_EQ(normalize({Interval(0, 1), Interval(1, 2)}), DisjointIntervalSet::from_sorted({Interval(0, 2)}));
}

TEST(Measure, Examples) {
  EXPECT_EQ(measure(normalize({Interval(0, 1), Interval(2, 3)})), 2.0);
  EXPECT_EQ(measure(DisjointIntervalSet{}), 0.0);
  EXPECT_EQ(measure(normalize({Interval(-2, 3)})), 5.0);
}

TEST(Atoms, HandSweeps) {
  const auto a = atoms({Interval(0, 2), Interval(1, 3)});
  ASSERT_EQ(a.cells().size(), 3u);
  EXPECT_EQ(a.cells()[0].cell, Interval(0, 1));
  EXPECT_EQ(a.cells()[0].label, Label{0});
  EXPECT_EQ(a.cells()[1].cell, Interval(1, 2));
  EXPECT_EQ(a.cells()[1].label, (Label{0, 1}));
  EXPECT_EQ(a.cells()[2].label, Label{1});

  const auto b = atoms({Interval(0, 1), Interval(2, 3)});
  ASSERT_EQ(b.cells().size(), 2u);
  EXPECT_EQ(b.cells()[1].cell, Interval(2, 3));

  const auto c = atoms({Interval(0, 4), Interval(1, 2)});
  ASSERT_EQ(c.cells().size(), 3u);
  EXPECT_EQ(c.cells()[2].cell, Interval(2, 4));
  const auto r1 = c.class_cells(Label{0});
  ASSERT_EQ(r1.size(), 2u);
  EXPECT_EQ(r1[0], Interval(0, 1));
  EXPECT_EQ(r1[1], Interval(2, 4));
  EXPECT_EQ(c.classes().size(), 2u);
}

TEST(Properties, NormalizeIdempotentAndAtomsPartition) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto ivs = random_family(rng, 12);
    const auto once = normalize(ivs);
    ASSERT_EQ(normalize(once), once);
    const auto a = atoms(ivs);
    ASSERT_NEAR(a.measure(), once.measure(), 1e-12);
    std::set<std::uint32_t> seen;
    for (std::size_t k = 0; k < a.cells().size(); ++k) {
      const auto& cell = a.cells()[k];
      ASSERT_FALSE(cell.label.empty());
      seen.insert(cell.label.begin(), cell.label.end());
      if (k > 0 && a.cells()[k - 1].cell.hi() == cell.cell.lo()) ASSERT_NE(a.cells()[k - 1].label, cell.label);
      ASSERT_EQ(cell.label, direct_label(ivs, 0.5 * (cell.cell.lo() + cell.cell.hi())));
    }
    ASSERT_EQ(seen.size(), ivs.size());
  }
}

TEST(Properties, PointMembershipOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> x(-12.0, 16.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ivs = random_family(rng, 10);
    const auto a = atoms(ivs);
    for (int k = 0; k < 1000; ++k) {
      const double p = x(rng);
      const auto direct = direct_label(ivs, p);
      const auto got = a.label_at(p);
      bool on_endpoint = false;
      for (const auto& iv : ivs) on_endpoint = on_endpoint || p == iv.lo() || p == iv.hi();
      if (on_endpoint) continue;
      if (direct.empty()) {
        ASSERT_FALSE(got.has_value());
      } else {
        ASSERT_TRUE(got.has_value());
        ASSERT_EQ(*got, direct);
      }
    }
  }
}

TEST(DisjointIntervalSet, LocateAndOverlapGuard) {
  const auto s = DisjointIntervalSet::from_sorted({Interval(0, 1), Interval(1, 2), Interval(3, 4)});
  EXPECT_EQ(s.locate(0.5), Location::inside);
  EXPECT_EQ(s.locate(1.0), Location::boundary);
  EXPECT_EQ(s.locate(2.5), Location::outside);
  EXPECT_EQ(s.locate(4.0), Location::boundary);
  EXPECT_THROW(DisjointIntervalSet::from_sorted({Interval(0, 2), Interval(1, 3)}), Error);
}
