#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace diffseer;
using namespace diffseer::testing;

TEST(CanonicalDump, SortedKeysAndFixedPrecision) {
  const json j = {{"b", 1}, {"a", {0.1, -0.0, 1.0 / 3.0, 2.0}}, {"c", "x\"y"}, {"n", nullptr}, {"t", true}};
  EXPECT_EQ(canonical_dump(j), R"({"a":[0.1,0,0.333333333333,2],"b":1,"c":"x\"y","n":null,"t":true})");
  EXPECT_EQ(canonical_dump(json(1.0 / 3.0), kExactPrecision), "0.33333333333333331");
  EXPECT_EQ(canonical_dump(json(1e-20)), "1e-20");
  EXPECT_EQ(canonical_dump(json(std::nan(""))), "null");
}

TEST(Dataset, CanonicalRoundTrip) {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = random_graph(rng, 3 + trial % 8, 2 + trial % 5, false);
    const auto text = dataset_to_string(g);
    const auto back = dataset_from_string(text);
    ASSERT_TRUE(back.ok());
    EXPECT_EQ(dataset_to_string(back.graph), text);
    for (std::size_t t = 0; t < g.snapshots.size(); ++t)
      EXPECT_EQ(weights_of(back.graph.snapshots[t]), weights_of(g.snapshots[t]));
  }
}

TEST(Dataset, Layout) {
  const auto text = dataset_to_string(core_fixture());
  EXPECT_EQ(text,
            R"({"nodes":["A","B","C"],"snapshots":[[["A","B",2],["B","C",1]],[["A","B",5],["A","C",4],)"
            R"(["B","C",1]],[["A","B",5]]],"timeslices":["t0","t1","t2"],"version":1})");
}

TEST(Dataset, StructuralErrorsThrow) {
  for (const std::string bad :
       {"not json", "[]", R"({"version":1,"nodes":[],"timeslices":[]})",
        R"({"version":2,"nodes":[],"timeslices":[],"snapshots":[]})",
        R"({"version":1,"nodes":["a"],"timeslices":["t"],"snapshots":[[["a","b"]]]})",
        R"({"version":1,"nodes":["a"],"timeslices":["t","u"],"snapshots":[[]]})"}) {
    EXPECT_THROW(dataset_from_string(bad), ParseError) << bad;
  }
}

TEST(Dataset, ViolationsAreCollected) {
  const auto load = dataset_from_string(
      R"({"version":1,"nodes":["a","b","c"],"timeslices":["t0","t1"],)"
      R"("snapshots":[[["a","a",1],["a","b",1]],[["a","zz",1],["b","c",0]]]})");
  ASSERT_FALSE(load.ok());
  std::vector<std::string> codes;
  for (const auto& v : load.violations) codes.emplace_back(to_string(v.code));
  EXPECT_NE(std::find(codes.begin(), codes.end(), "SelfLoop"), codes.end());
  EXPECT_NE(std::find(codes.begin(), codes.end(), "UnknownNode"), codes.end());
  EXPECT_NE(std::find(codes.begin(), codes.end(), "ZeroWeight"), codes.end());
  const auto j = violations_to_json(load.violations);
  EXPECT_TRUE(j.is_array());
  EXPECT_TRUE(j[0].contains("code"));
}

TEST(Dataset, FileHelpers) {
  const auto dir = std::filesystem::temp_directory_path() / "diffseer_io_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "g.json").string();
  write_file(path, dataset_to_string(core_fixture()));
  EXPECT_EQ(load_dataset(path).node_count(), 3u);
  write_file(path, R"({"version":1,"nodes":["a","b"],"timeslices":["t"],"snapshots":[[["a","a",1]]]})");
  try {
    load_dataset(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidGraph);
  }
  try {
    read_file((dir / "missing.json").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
  std::filesystem::remove_all(dir);
}
