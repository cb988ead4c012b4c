#include <gtest/gtest.h>

#include "support.hpp"

using namespace rectune;
using rectune::testing::hand_request;

namespace {

SystemConfig full_config(double k1, double k2, double n, double penalty, double cap) {
  SystemConfig c;
  c.params = {{"pre.w_a", 1.0},  {"pre.w_b", 2.0},  {"rank.w_a", 0.5},         {"rank.w_b", 0.5},
              {"pre.K1", k1},    {"rank.K2", k2},   {"re.N", n},               {"re.diversity_penalty", penalty},
              {"re.topic_cap", cap}};
  return c;
}

sim::RankedList list_of(sim::Stage st, std::vector<sim::RankedEntry> e) { return {st, std::move(e)}; }

std::vector<std::int64_t> ids(const sim::RankedList& l) {
  std::vector<std::int64_t> out;
  for (const auto& e : l.entries) out.push_back(e.item_id);
  return out;
}

}  // namespace

TEST(KeyedRng, SameKeySameStream) {
  KeyedRng a({1, 2, tag("x")}), b({1, 2, tag("x")}), c({1, 3, tag("x")});
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    EXPECT_EQ(va, b.next_u64());
    EXPECT_NE(va, c.next_u64());
  }
}

TEST(KeyedRng, UniformInUnitInterval) {
  KeyedRng r(42);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 20000.0, 0.5, 0.01);
}

TEST(Request, GenerationIsPureFunctionOfSeedAndId) {
  auto s = rectune::testing::planted_scenario();
  s.seed = 7;
  EXPECT_EQ(sim::generate_request(s, 0), sim::generate_request(s, 0));
  EXPECT_NE(sim::generate_request(s, 0).to_public_json(), sim::generate_request(s, 1).to_public_json());
}

TEST(Request, EmptyPoolIsDegenerate) {
  auto s = rectune::testing::planted_scenario();
  s.pool_size = 0;
  EXPECT_THROW(sim::generate_request(s, 0), ValidationError);
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(Request, PublicViewHidesLatentState) {
  const auto r = sim::generate_request(rectune::testing::planted_scenario(), 3);
  const std::string text = r.to_public_json().dump();
  EXPECT_EQ(text.find("latent"), std::string::npos);
  EXPECT_EQ(text.find("user_pref"), std::string::npos);
}

TEST(RunPre, WeightedFusionAndTopK) {
  const auto req = hand_request({{0, {0.8, 0.2}, {0, 0}}, {0, {0.4, 0.6}, {0, 0}}, {0, {0.9, 0.1}, {0, 0}}});
  const auto out = sim::run_pre(req, full_config(2, 1, 1, 0, 1));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out.entries[0].item_id, 1);
  EXPECT_NEAR(out.entries[0].score, 1.6, 1e-12);
  EXPECT_EQ(out.entries[1].item_id, 0);
  EXPECT_NEAR(out.entries[1].score, 1.2, 1e-12);
}

TEST(RunPre, SingleHeadUnitWeightKeepsRawOrder) {
  const auto req = hand_request({{0, {0.3}, {0.0}}, {0, {0.9}, {0.0}}, {0, {0.5}, {0.0}}}, {"a"}, {"a"});
  SystemConfig c;
  c.params = {{"pre.w_a", 1.0}, {"pre.K1", 3}};
  EXPECT_EQ(ids(sim::run_pre(req, c)), (std::vector<std::int64_t>{1, 2, 0}));
}

TEST(RunPre, ZeroWeightsTieBreakByItemId) {
  const auto req = hand_request({{0, {0.8, 0.2}, {0, 0}}, {0, {0.4, 0.6}, {0, 0}}, {0, {0.9, 0.1}, {0, 0}}});
  auto c = full_config(2, 1, 1, 0, 1);
  c.params["pre.w_a"] = 0.0;
  c.params["pre.w_b"] = 0.0;
  EXPECT_EQ(ids(sim::run_pre(req, c)), (std::vector<std::int64_t>{0, 1}));
}

TEST(RunPre, MissingWeightIsConfigError) {
  const auto req = hand_request({{0, {0.8, 0.2}, {0, 0}}});
  auto c = full_config(1, 1, 1, 0, 1);
  c.params.erase("pre.w_b");
  EXPECT_THROW(sim::run_pre(req, c), ConfigError);
}

TEST(RunRank, HandComputedTopItem) {
  // Rank heads reuse the pre scores: every fused score is 0.5, so the id
  // tie-break decides.
  const auto req = hand_request({{0, {0.8, 0.2}, {0.8, 0.2}}, {0, {0.4, 0.6}, {0.4, 0.6}}, {0, {0.9, 0.1}, {0.9, 0.1}}});
  const auto c = full_config(3, 1, 1, 0, 1);
  const auto out = sim::run_rank(sim::run_pre(req, c), req, c);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.entries[0].item_id, 0);
  EXPECT_NEAR(out.entries[0].score, 0.5, 1e-12);
}

TEST(RunRank, OnlyCandidatesFromStageOne) {
  const auto req = hand_request({{0, {1.0, 0.0}, {0.0, 0.0}}, {0, {0.0, 0.0}, {1.0, 1.0}}});
  auto c = full_config(1, 1, 1, 0, 1);
  const auto c1 = sim::run_pre(req, c);
  ASSERT_EQ(ids(c1), std::vector<std::int64_t>{0});
  EXPECT_EQ(ids(sim::run_rank(c1, req, c)), std::vector<std::int64_t>{0});
}

TEST(RunRank, K2AboveK1IsConfigError) {
  const auto req = hand_request({{0, {0.8, 0.2}, {0, 0}}});
  const auto c = full_config(1, 2, 1, 0, 1);
  EXPECT_THROW(sim::run_rank(sim::run_pre(req, c), req, c), ConfigError);
}

TEST(RunRe, PenaltyReordersByTopic) {
  const auto c2 = list_of(sim::Stage::rank, {{0, 1.0, 0}, {1, 0.9, 0}, {2, 0.5, 1}});
  const auto req = hand_request({{0, {0}, {0}}, {0, {0}, {0}}, {1, {0}, {0}}});
  const auto out = sim::run_re(c2, req, full_config(3, 3, 3, 0.6, 2));
  EXPECT_EQ(ids(out), (std::vector<std::int64_t>{0, 2, 1}));
  EXPECT_NEAR(out.entries[2].score, 0.3, 1e-12);
}

TEST(RunRe, NoPenaltyIsPrefix) {
  const auto c2 = list_of(sim::Stage::rank, {{4, 0.9, 0}, {2, 0.8, 0}, {7, 0.7, 0}, {1, 0.1, 1}});
  const auto req = hand_request({});
  EXPECT_EQ(ids(sim::run_re(c2, req, full_config(4, 4, 3, 0.0, 3))), (std::vector<std::int64_t>{4, 2, 7}));
}

TEST(RunRe, CapSaturationShortensList) {
  const auto c2 = list_of(sim::Stage::rank, {{0, 0.9, 5}, {1, 0.8, 5}, {2, 0.7, 5}});
  EXPECT_EQ(sim::run_re(c2, hand_request({}), full_config(3, 3, 3, 0.1, 1)).size(), 1u);
}

TEST(RunRe, InvalidNIsConfigError) {
  const auto c2 = list_of(sim::Stage::rank, {{0, 0.9, 5}});
  EXPECT_THROW(sim::run_re(c2, hand_request({}), full_config(3, 3, 0, 0.1, 1)), ConfigError);
}

TEST(RunSystem, EqualsExplicitComposition) {
  const auto scen = rectune::testing::planted_scenario();
  for (std::int64_t id = 0; id < 20; ++id) {
    const auto req = sim::generate_request(scen, id);
    KeyedRng rng({99, static_cast<std::uint64_t>(id)});
    SystemConfig c = scen.defaults;
    c.params["pre.w_ctr"] = rng.uniform();
    c.params["pre.w_heart"] = rng.uniform();
    c.params["rank.w_ctr"] = rng.uniform();
    c.params["rank.w_heart"] = rng.uniform();
    c.params["pre.K1"] = 20 + static_cast<double>(rng.below(81));
    c.params["re.diversity_penalty"] = rng.uniform(0.0, 0.3);
    const auto c1 = sim::run_pre(req, c);
    const auto c2 = sim::run_rank(c1, req, c);
    EXPECT_EQ(sim::run_system(req, c), sim::run_re(c2, req, c));
  }
}

TEST(RunSystem, PassThroughIsTopNByRankScore) {
  const auto req = hand_request({{0, {0.1, 0.1}, {0.2, 0.0}}, {1, {0.2, 0.2}, {0.9, 0.0}}, {2, {0.3, 0.3}, {0.5, 0.0}}});
  auto c = full_config(3, 3, 2, 0.0, 2);
  c.params["rank.w_a"] = 1.0;
  c.params["rank.w_b"] = 0.0;
  EXPECT_EQ(ids(sim::run_system(req, c)), (std::vector<std::int64_t>{1, 2}));
}

TEST(Feedback, DeterministicAndCommonRandomNumbers) {
  const auto scen = rectune::testing::planted_scenario();
  const auto req = sim::generate_request(scen, 11);
  // Many lists sharing their first item: the outcome at position 1 never
  // depends on the rest of the list.
  const auto first = sim::simulate_feedback(req, list_of(sim::Stage::re, {{5, 0, 0}, {6, 0, 0}}));
  EXPECT_EQ(first, sim::simulate_feedback(req, list_of(sim::Stage::re, {{5, 0, 0}, {6, 0, 0}})));
  for (std::int64_t other = 7; other < 40; ++other) {
    const auto fb = sim::simulate_feedback(req, list_of(sim::Stage::re, {{5, 0, 0}, {other, 0, 0}}));
    EXPECT_EQ(fb.outcomes[0], first.outcomes[0]);
  }
}

TEST(Feedback, EmptyListRejected) {
  const auto req = sim::generate_request(rectune::testing::planted_scenario(), 0);
  EXPECT_THROW(sim::simulate_feedback(req, {}), ValidationError);
}

TEST(Feedback, PositionBiasDecreases) {
  EXPECT_DOUBLE_EQ(sim::position_bias(1), 1.0 / std::log2(3.0));
  for (std::size_t p = 1; p < 20; ++p) EXPECT_GT(sim::position_bias(p), sim::position_bias(p + 1));
}

TEST(Metrics, HandExamples) {
  using sim::Outcome;
  const auto l4 = list_of(sim::Stage::re, {{0, 0, 0}, {1, 0, 0}, {2, 0, 1}, {3, 0, 2}});
  const sim::Feedback none{0, {Outcome{}, Outcome{}, Outcome{}, Outcome{}}};
  auto m = sim::compute_metrics({none}, {l4});
  EXPECT_DOUBLE_EQ(m.at("engagement1"), 0.0);
  EXPECT_DOUBLE_EQ(m.at("engagement2"), 0.0);
  EXPECT_DOUBLE_EQ(m.at("diversity"), 0.75);

  const sim::Feedback one{0, {{true, false}, {}, {}, {}}};
  const sim::Feedback three{1, {{true, true}, {true, false}, {true, false}, {}}};
  m = sim::compute_metrics({one, three}, {l4, l4});
  EXPECT_DOUBLE_EQ(m.at("engagement1"), 2.0);
  EXPECT_DOUBLE_EQ(m.at("engagement2"), 0.5);
  EXPECT_THROW(sim::compute_metrics({}, {}), ValidationError);
}

TEST(Cost, LinearInTruncationSizes) {
  sim::Scenario s;
  s.cost = {1.0, 10.0, 2000.0};
  SystemConfig c;
  c.params = {{"pre.K1", 500}, {"rank.K2", 50}};
  EXPECT_DOUBLE_EQ(sim::compute_cost(c, s), 1000.0);

  // Planted scenario: cheapest admissible config sits at the lower K1 bound.
  const auto planted = rectune::testing::planted_scenario();
  const auto skill = rectune::testing::planted_skill();
  SystemConfig lo = skill.initial_config;
  lo.params["pre.K1"] = skill.space().at("pre.K1").lower;
  EXPECT_DOUBLE_EQ(sim::compute_cost(lo, planted), 20.0 * 1.0 + 20.0 * 2.0);
}

TEST(Utility, FeasibleSumOfPrimaries) {
  NorthStar ns;
  ns.primary = {{"engagement1", Direction::maximize}, {"engagement2", Direction::maximize}};
  ns.guardrails = {{"diversity", Direction::maximize, 0.0}};
  auto u = utility(std::map<std::string, double>{{"engagement1", 0.75}, {"engagement2", 0.90}, {"diversity", 0.48}}, ns);
  EXPECT_TRUE(u.feasible);
  EXPECT_NEAR(u.value, 1.65, 1e-12);

  u = utility(std::map<std::string, double>{{"engagement1", 0.75}, {"engagement2", 0.90}, {"diversity", 0.0}}, ns);
  EXPECT_TRUE(u.feasible);  // the baseline itself is allowed

  u = utility(std::map<std::string, double>{{"engagement1", 9.0}, {"engagement2", 9.0}, {"diversity", -0.01}}, ns);
  EXPECT_FALSE(u.feasible);
  EXPECT_EQ(u.value, -std::numeric_limits<double>::infinity());

  u = utility(std::map<std::string, double>{{"engagement1", 1.0}, {"engagement2", 1.0}, {"diversity", 1.0}}, ns,
              CostCheck{121.0, 120.0});
  EXPECT_FALSE(u.feasible);

  EXPECT_THROW(utility(std::map<std::string, double>{{"engagement1", 1.0}}, ns), ValidationError);
}

TEST(Evaluator, WorkerCountDoesNotChangeResults) {
  const auto scen = rectune::testing::planted_scenario();
  sim::RequestPool pool(scen);
  const auto reqs = pool.first(200, 1);
  const auto c = rectune::testing::planted_skill().initial_config;
  EXPECT_EQ(sim::evaluate(scen, *reqs, c, 1), sim::evaluate(scen, *reqs, c, 8));
  sim::RequestPool pool8(scen);
  EXPECT_EQ(*pool8.first(200, 8), *reqs);
}
