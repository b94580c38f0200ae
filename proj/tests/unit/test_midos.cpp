#include <gtest/gtest.h>

#include <map>
#include <set>
#include <string>
#include <vector>

#include "gridprobe/common/error.hpp"
#include "gridprobe/common/rng.hpp"
#include "gridprobe/midos/oracle.hpp"
#include "gridprobe/midos/selection.hpp"
#include "test_support.hpp"

namespace gridprobe::midos {
namespace {

using semantics::Embedding;

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no gridprobe::Error thrown";
  return ErrorCode::kIo;
}

Embedding unit(std::string id, std::vector<double> v) {
  return semantics::normalized({std::move(id), "t", std::move(v)});
}

std::vector<std::string> pool_ids(int n) {
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) {
    char id[8];
    std::snprintf(id, sizeof id, "p%02d", i);
    ids.emplace_back(id);
  }
  return ids;
}

// Worked example: n1 is the antipode of the guidance; the corners all sit on
// e1, so the edge slots prefer orthogonal candidates, smallest id first.
SelectionContext worked_example() {
  SelectionContext ctx;
  ctx.guidance = unit("g", {1, 0});
  for (auto& c : ctx.corners) c = unit("c", {1, 0});
  ctx.pool = {unit("p-same", {1, 0}), unit("p-orth2", {0, -1}), unit("p-neg", {-1, 0}), unit("p-orth1", {0, 1}),
              unit("p-diag", {1, 1})};
  return ctx;
}

TEST(Midos, WorkedExample) {
  const auto r = select_midos(worked_example());
  EXPECT_EQ(r.strategy, Strategy::kMidos);
  EXPECT_FALSE(r.seed);
  EXPECT_EQ(r.ids, (std::array<std::string, 5>{"p-neg", "p-orth1", "p-orth2", "p-diag", "p-same"}));
  EXPECT_EQ(r.scores[0].objective_value, 2.0);
  EXPECT_EQ(r.scores[0].runner_up_id, "p-orth1");
  EXPECT_EQ(r.scores[0].runner_up_value, 1.0);
  EXPECT_EQ(r.scores[1].objective_value, 2.0);
  EXPECT_EQ(r.scores[1].runner_up_id, "p-orth2");
  EXPECT_EQ(r.scores[4].slot, 5);
  EXPECT_FALSE(r.scores[4].runner_up_id);
  EXPECT_EQ(r.scores[4].objective_value, 2.0 / (semantics::kClampEpsilon * semantics::kClampEpsilon));
}

TEST(Midos, PoolOrderDoesNotMatter) {
  auto ctx = worked_example();
  const auto expected = select_midos(ctx);
  std::reverse(ctx.pool.begin(), ctx.pool.end());
  EXPECT_EQ(select_midos(ctx), expected);
}

TEST(Midos, ExactTiesGoToSmallestId) {
  SelectionContext ctx;
  ctx.guidance = unit("g", {1, 0, 0});
  for (auto& c : ctx.corners) c = unit("c", {0, 1, 0});
  for (const char* id : {"z", "m", "a", "q", "b"}) ctx.pool.push_back(unit(id, {0, 0, 1}));
  const auto r = select_midos(ctx);
  EXPECT_EQ(r.ids, (std::array<std::string, 5>{"a", "b", "m", "q", "z"}));
  EXPECT_EQ(r.scores[0].runner_up_value, r.scores[0].objective_value);
}

TEST(Midos, MatchesOracleOnRandomContexts) {
  SplitMix64 rng(21);
  for (int i = 0; i < 300; ++i) {
    const auto metric = i % 2 ? semantics::DistanceMetric::kEuclidean : semantics::DistanceMetric::kCosine;
    const auto ctx = testing::random_context(rng, 5 + rng.below(8), 2 + rng.below(4), i % 3 != 0, metric);
    const auto fast = select_midos(ctx);
    ASSERT_EQ(fast, oracle_select(ctx)) << "context " << i;
    const std::set<std::string> distinct(fast.ids.begin(), fast.ids.end());
    ASSERT_EQ(distinct.size(), kSlots);
  }
}

TEST(Midos, ValidationErrors) {
  auto ctx = worked_example();
  ctx.pool.pop_back();
  EXPECT_EQ(code_of([&] { select_midos(ctx); }), ErrorCode::kPoolTooSmall);

  ctx = worked_example();
  ctx.pool[1].id = "p-same";
  EXPECT_EQ(code_of([&] { select_midos(ctx); }), ErrorCode::kDuplicateId);

  ctx = worked_example();
  ctx.pool[0].v = {2, 0};
  EXPECT_EQ(code_of([&] { select_midos(ctx); }), ErrorCode::kInvalidArgument);

  ctx = worked_example();
  ctx.pool[0].model_tag = "other";
  EXPECT_EQ(code_of([&] { select_midos(ctx); }), ErrorCode::kModelMismatch);
}

TEST(Oracle, RejectsLargePools) {
  SplitMix64 rng(22);
  const auto ctx = testing::random_context(rng, kOracleMaxPool + 1, 3, false);
  EXPECT_EQ(code_of([&] { oracle_select(ctx); }), ErrorCode::kPoolTooLarge);
}

// Partial Fisher-Yates over sorted ids, checked against an independent implementation.
TEST(RandomSelection, ReferenceDraws) {
  EXPECT_EQ(select_random(pool_ids(25), 0).ids, (std::array<std::string, 5>{"p10", "p13", "p06", "p17", "p20"}));
  EXPECT_EQ(select_random(pool_ids(25), 1).ids, (std::array<std::string, 5>{"p15", "p08", "p24", "p10", "p16"}));
  EXPECT_EQ(select_random(pool_ids(25), 42).ids, (std::array<std::string, 5>{"p13", "p20", "p09", "p15", "p17"}));
  const auto r = select_random(pool_ids(25), 42);
  EXPECT_EQ(r.strategy, Strategy::kRandom);
  EXPECT_EQ(r.seed, 42u);
  EXPECT_FALSE(r.scores[0].objective_value);
}

TEST(RandomSelection, InputOrderDoesNotMatter) {
  auto ids = pool_ids(9);
  std::reverse(ids.begin(), ids.end());
  EXPECT_EQ(select_random(ids, 5), select_random(pool_ids(9), 5));
}

TEST(RandomSelection, UniformWithoutReplacement) {
  const auto ids = pool_ids(25);
  std::map<std::string, int> first;
  const int n = 50000;
  for (int s = 0; s < n; ++s) {
    const auto r = select_random(ids, static_cast<std::uint64_t>(s) * 0x9e3779b97f4a7c15ULL + 1);
    const std::set<std::string> distinct(r.ids.begin(), r.ids.end());
    ASSERT_EQ(distinct.size(), kSlots);
    ++first[r.ids[0]];
  }
  ASSERT_EQ(first.size(), 25u);
  for (const auto& [id, c] : first) EXPECT_NEAR(c / double(n), 1.0 / 25, 0.02) << id;
}

TEST(RandomSelection, Errors) {
  EXPECT_EQ(code_of([] { select_random(pool_ids(4), 1); }), ErrorCode::kPoolTooSmall);
  EXPECT_EQ(code_of([] { select_random({"a", "b", "c", "d", "a"}, 1); }), ErrorCode::kDuplicateId);
}

TEST(SelectionJson, RoundTripsBothStrategies) {
  SplitMix64 rng(23);
  const auto midos = select_midos(testing::random_context(rng, 9, 4, true));
  EXPECT_EQ(selection_from_json(nlohmann::json::parse(to_json(midos).dump())), midos);
  const auto random = select_random(pool_ids(12), 0xffffffffffffffffULL);
  EXPECT_EQ(selection_from_json(nlohmann::json::parse(to_json(random).dump())), random);
  EXPECT_EQ(to_json(random)["slots"][1]["cell"], "a12");
  EXPECT_EQ(parse_strategy("midos"), Strategy::kMidos);
  EXPECT_FALSE(parse_strategy("greedy"));
}

TEST(SelectionTable, ListsEverySlot) {
  const auto table = format_selection_table(select_midos(worked_example()));
  for (const char* needle : {"strategy: midos", "a22", "a12", "a23", "a32", "a21", "p-neg", "p-orth1"}) {
    EXPECT_NE(table.find(needle), std::string::npos) << needle;
  }
}

}  // namespace
}  // namespace gridprobe::midos
