#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace diffseer;
using namespace diffseer::testing;

namespace {

OverviewMatrix grid(const std::vector<std::string>& nodes, std::size_t cols) {
  OverviewMatrix ov;
  for (const auto& n : nodes) ov.node_order.emplace_back(n);
  for (std::size_t c = 1; c <= cols; ++c) ov.transitions.push_back(c);
  for (std::size_t r = 0; r < nodes.size(); ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      OverviewCell cell;
      cell.node = ov.node_order[r];
      cell.transition_index = c + 1;
      ov.cells.push_back(cell);
    }
  return ov;
}

void set_avg(OverviewMatrix& ov, std::size_t r, std::size_t c, double avg) {
  auto& cell = ov.cell(r, c);
  cell.avg_change = avg;
  (avg > 0 ? cell.pos_count : cell.neg_count) = 1;
}

std::size_t count_kind(const std::vector<MaskPath>& paths, PathKind kind) {
  return static_cast<std::size_t>(
      std::count_if(paths.begin(), paths.end(), [&](const MaskPath& p) { return p.kind == kind; }));
}

}  // namespace

TEST(SelectHighlights, RuleExamples) {
  auto ov = grid({"A", "B"}, 1);
  set_avg(ov, 0, 0, 3.5);
  set_avg(ov, 1, 0, -1.0);
  const auto h = select_highlights(ov, {MaskCriterion::AvgChange, 3.0, 3});
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h[0], (Highlight{NodeId("A"), 1, Sign::Positive}));

  auto counts = grid({"A", "B", "C"}, 1);
  counts.cell(0, 0).pos_count = 2;
  counts.cell(1, 0).pos_count = 1;
  counts.cell(1, 0).neg_count = 1;
  counts.cell(2, 0).neg_count = 3;
  const auto hc = select_highlights(counts, {MaskCriterion::ChangedEdgeCount, 2.0, 3});
  ASSERT_EQ(hc.size(), 3u);
  EXPECT_EQ(hc[0].sign, Sign::Positive);
  EXPECT_EQ(hc[1].sign, Sign::Positive);  // tie
  EXPECT_EQ(hc[2].sign, Sign::Negative);
}

TEST(SelectHighlights, CoreFixtureThresholdThree) {
  const auto g = core_fixture();
  const auto diffs = compute_diff_sequence(g);
  const auto ov = build_overview(diffs, g.nodes, full_range(diffs));
  const auto h = select_highlights(ov, {MaskCriterion::AvgChange, 3.0, 3});
  ASSERT_FALSE(h.empty());
  EXPECT_EQ(h[0], (Highlight{NodeId("A"), 1, Sign::Positive}));
  EXPECT_TRUE(select_highlights(ov, {MaskCriterion::AvgChange, 1e9, 3}).empty());
}

TEST(MaskConfig, RejectsNonPositiveThreshold) {
  for (double t : {0.0, -1.0, std::nan("")}) {
    try {
      MaskConfig{MaskCriterion::AvgChange, t, 3}.validate();
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::DomainError);
    }
  }
}

TEST(BuildPaths, WithinColumnOnlyForPairs) {
  auto ov = grid({"A", "B", "C"}, 1);
  set_avg(ov, 0, 0, 2.0);
  set_avg(ov, 1, 0, 2.0);
  set_avg(ov, 2, 0, -2.0);
  const auto m = build_mask(ov, {MaskCriterion::AvgChange, 1.0, 3});
  ASSERT_EQ(m.paths.size(), 1u);
  EXPECT_EQ(m.paths[0].kind, PathKind::WithinColumn);
  EXPECT_EQ(m.paths[0].sign, Sign::Positive);
  EXPECT_EQ(m.paths[0].nodes, (std::vector<NodeId>{NodeId("A"), NodeId("B")}));
}

TEST(BuildPaths, GapRule) {
  auto ov = grid({"A", "B"}, 4);
  set_avg(ov, 0, 1, 2.0);   // A+ at t2
  set_avg(ov, 0, 3, -2.0);  // A- at t4, t3 quiet
  const auto bridged = build_mask(ov, {MaskCriterion::AvgChange, 1.0, 2});
  ASSERT_EQ(bridged.paths.size(), 1u);
  const auto& p = bridged.paths[0];
  EXPECT_EQ(p.kind, PathKind::CrossColumn);
  EXPECT_EQ(p.node, NodeId("A"));
  EXPECT_EQ(p.from_column, 2u);
  EXPECT_EQ(p.from_sign, Sign::Positive);
  EXPECT_EQ(p.to_column, 4u);
  EXPECT_EQ(p.to_sign, Sign::Negative);
  EXPECT_TRUE(build_mask(ov, {MaskCriterion::AvgChange, 1.0, 0}).paths.empty());
  EXPECT_EQ(build_mask(ov, {MaskCriterion::AvgChange, 1.0, 1}).paths.size(), 1u);
}

TEST(BuildPaths, OnlySuccessiveHighlightedColumnsConnect) {
  auto ov = grid({"A", "B"}, 3);
  set_avg(ov, 0, 0, 2.0);
  set_avg(ov, 1, 1, 2.0);  // column 2 highlighted, but not for A
  set_avg(ov, 0, 2, 2.0);
  const auto m = build_mask(ov, {MaskCriterion::AvgChange, 1.0, 5});
  EXPECT_EQ(count_kind(m.paths, PathKind::CrossColumn), 0u);
}

TEST(BuildPaths, ForeignHighlightRejected) {
  EXPECT_THROW(build_paths({{NodeId("Z"), 1, Sign::Positive}}, {1}, {NodeId("A")}, {}), Error);
  EXPECT_THROW(build_paths({{NodeId("A"), 9, Sign::Positive}}, {1}, {NodeId("A")}, {}), Error);
}

TEST(MaskProperties, BruteForceAudit) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> thr(0.2, 4.5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ov = random_overview(rng, 3 + trial % 9, 2 + trial % 13);
    const MaskConfig cfg{trial % 2 ? MaskCriterion::AvgChange : MaskCriterion::ChangedEdgeCount, thr(rng),
                         static_cast<std::size_t>(trial % 5)};
    const auto m = build_mask(ov, cfg);

    EXPECT_EQ(mask_audit(ov, cfg, m), "") << "trial " << trial;
  }
}

TEST(MaskProperties, ThresholdMonotonicity) {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ov = random_overview(rng, 6, 8);
    for (auto criterion : {MaskCriterion::AvgChange, MaskCriterion::ChangedEdgeCount}) {
      std::vector<Highlight> previous = select_highlights(ov, {criterion, 0.1, 3});
      for (double t = 0.5; t < 6.0; t += 0.5) {
        const auto now = select_highlights(ov, {criterion, t, 3});
        for (const auto& h : now)
          EXPECT_NE(std::find(previous.begin(), previous.end(), h), previous.end());
        previous = now;
      }
    }
  }
}

TEST(MaskProperties, RelabelingRelabelsOutput) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 40; ++trial) {
    const auto ov = random_overview(rng, 7, 6);
    std::vector<NodeId> order = ov.node_order;
    std::shuffle(order.begin(), order.end(), rng);
    const MaskConfig cfg{MaskCriterion::AvgChange, 1.5, 2};
    const auto a = build_mask(ov, cfg);
    const auto b = build_mask(permute_rows(ov, order), cfg);
    auto key = [](std::vector<Highlight> hs) {
      std::sort(hs.begin(), hs.end(), [](const Highlight& x, const Highlight& y) {
        return std::tie(x.transition_index, x.node) < std::tie(y.transition_index, y.node);
      });
      return hs;
    };
    EXPECT_EQ(key(a.highlights), key(b.highlights));
    std::multiset<std::tuple<std::string, std::size_t, std::size_t>> ca, cb;
    for (const auto& p : a.paths)
      if (p.kind == PathKind::CrossColumn) ca.insert({p.node.value, p.from_column, p.to_column});
    for (const auto& p : b.paths)
      if (p.kind == PathKind::CrossColumn) cb.insert({p.node.value, p.from_column, p.to_column});
    EXPECT_EQ(ca, cb);
    EXPECT_EQ(count_kind(a.paths, PathKind::WithinColumn), count_kind(b.paths, PathKind::WithinColumn));
  }
}

TEST(MaskProperties, AuditRejectsCorruptedMasks) {
  auto ov = grid({"A", "B", "C"}, 5);
  set_avg(ov, 0, 0, 2.0);
  set_avg(ov, 1, 0, 2.0);
  set_avg(ov, 0, 4, -2.0);
  const MaskConfig cfg{MaskCriterion::AvgChange, 1.0, 2};
  const auto good = build_mask(ov, cfg);
  ASSERT_EQ(mask_audit(ov, cfg, good), "");

  auto dropped = good;
  dropped.highlights.pop_back();
  EXPECT_NE(mask_audit(ov, cfg, dropped), "");

  auto bridged = good;
  MaskPath p;
  p.kind = PathKind::CrossColumn;
  p.node = NodeId("A");
  p.from_column = 1;
  p.to_column = 5;
  p.to_sign = Sign::Negative;
  bridged.paths.push_back(p);  // three quiet columns > gap limit 2
  EXPECT_NE(mask_audit(ov, cfg, bridged), "");

  auto lone = good;
  lone.paths.front().nodes.pop_back();
  EXPECT_NE(mask_audit(ov, cfg, lone), "");
}
