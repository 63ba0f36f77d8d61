#include <gtest/gtest.h>

#include "brute_force.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "fixtures.hpp"

using namespace specbench;

namespace {

/// Greedy replay of the SAM drafter on a deterministic oracle, computed with
/// the quadratic brute-force matcher: expected accepted_count per step.
std::vector<std::size_t> simulate_sam_counts(const TokenOracle& oracle, std::vector<Token> ctx, std::size_t budget,
                                             std::size_t max_tokens) {
  std::vector<std::size_t> counts;
  std::size_t emitted = 0;
  while (emitted < max_tokens) {
    const auto draft = ref::brute_continuation(ctx, budget);
    std::size_t n = 0;
    std::vector<Token> next = ctx;
    for (Token t : draft) {
      if (oracle.next(next).argmax() != t) break;
      next.push_back(t);
      ++n;
    }
    next.push_back(oracle.next(next).argmax());
    std::size_t step = std::min(n + 1, max_tokens - emitted);
    ctx.insert(ctx.end(), next.end() - static_cast<std::ptrdiff_t>(n + 1),
               next.end() - static_cast<std::ptrdiff_t>(n + 1 - step));
    emitted += step;
    counts.push_back(step);
  }
  return counts;
}

}  // namespace

TEST(Engine, NoneDrafterIsAutoregressive) {
  auto oracle = make_oracle(ref::oracle_spec(OracleKind::kHashedMarkov, 32, 3));
  const std::vector<Token> prompt = {1, 2, 3};
  const auto r = run_autoregressive(*oracle, DecodePolicy{0.0, 0}, prompt, StopCondition{50});
  EXPECT_EQ(r.tokens, ref::greedy_reference(*oracle, prompt, 50));
  EXPECT_EQ(r.steps.size(), 50u);
  EXPECT_DOUBLE_EQ(r.mat(), 1.0);
  for (const auto& s : r.steps) EXPECT_EQ(s.accepted_count, 1u);
}

TEST(Engine, CyclicLoopIsDraftedInFullAfterWarmup) {
  const auto spec = ref::oracle_spec(OracleKind::kCyclic, 8, 0);
  auto oracle = make_oracle(spec);
  const std::vector<Token> prompt = {0, 1};
  SamDrafter drafter(8, 1);
  const auto r = run_trajectory(*oracle, drafter, DecodePolicy{0.0, 0}, prompt, StopCondition{200});
  const auto expected = simulate_sam_counts(*oracle, prompt, 8, 200);
  ASSERT_EQ(r.steps.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(r.steps[i].accepted_count, expected[i]);
  for (std::size_t i = 3; i + 1 < r.steps.size(); ++i) EXPECT_EQ(r.steps[i].accepted_count, 9u) << i;
}

TEST(Engine, GreedyMatchesAutoregressiveForEveryDrafter) {
  const auto target = ref::oracle_spec(OracleKind::kCopyMix, 24, 17);
  auto oracle = make_oracle(target);
  const auto corpus = ref::corpus_from(*oracle, {4, 9}, 300);
  auto kit = ref::make_kit(target, corpus);
  const std::vector<Token> prompt(corpus.begin() + 20, corpus.begin() + 50);
  const auto reference = ref::greedy_reference(*oracle, prompt, 120);
  for (Method m : all_speculative_methods()) {
    auto d = make_drafter(m, kit.params, kit.resources, DecodePolicy{0.0, 0});
    const auto r = run_trajectory(*oracle, *d, DecodePolicy{0.0, 0}, prompt, StopCondition{120});
    EXPECT_EQ(r.tokens, reference) << to_string(m);
    EXPECT_EQ(r.accepted_total(), r.tokens.size());
    EXPECT_EQ(r.oracle_batches, r.steps.size());
    EXPECT_LE(r.steps.size(), r.tokens.size());
  }
}

TEST(Engine, SamplingRunsAreReproducible) {
  const auto target = ref::oracle_spec(OracleKind::kHashedMarkov, 16, 6);
  auto oracle = make_oracle(target);
  auto kit = ref::make_kit(target, {1, 2, 3});
  const std::vector<Token> prompt = {5, 6, 5, 6};
  for (Method m : {Method::kSam, Method::kSpS, Method::kRecycling}) {
    auto d1 = make_drafter(m, kit.params, kit.resources, DecodePolicy{0.6, 42});
    auto d2 = make_drafter(m, kit.params, kit.resources, DecodePolicy{0.6, 42});
    const auto a = run_trajectory(*oracle, *d1, DecodePolicy{0.6, 42}, prompt, StopCondition{80});
    const auto b = run_trajectory(*oracle, *d2, DecodePolicy{0.6, 42}, prompt, StopCondition{80});
    EXPECT_EQ(a.tokens, b.tokens);
    ASSERT_EQ(a.steps.size(), b.steps.size());
    for (std::size_t i = 0; i < a.steps.size(); ++i) EXPECT_EQ(a.steps[i].accepted_count, b.steps[i].accepted_count);
  }
}

TEST(Engine, StopTokenEndsTrajectoryInclusively) {
  auto oracle = make_oracle(ref::oracle_spec(OracleKind::kCyclic, 8, 0));
  SamDrafter d(8, 1);
  StopCondition stop{100, Token{3}};
  const auto r = run_trajectory(*oracle, d, DecodePolicy{0.0, 0}, std::vector<Token>{0, 1, 2, 3, 0}, stop);
  EXPECT_TRUE(r.hit_stop_token);
  EXPECT_EQ(r.tokens, (std::vector<Token>{1, 2, 3}));
}

TEST(Engine, UnsupportedSamplingPropagates) {
  auto oracle = make_oracle(ref::oracle_spec(OracleKind::kHashedMarkov, 8, 0));
  PldDrafter pld(16, 1, 3);
  EXPECT_THROW(run_trajectory(*oracle, pld, DecodePolicy{0.5, 0}, std::vector<Token>{1}, StopCondition{4}),
               UnsupportedSamplingMode);
}

TEST(Engine, RejectsBadPrompts) {
  auto oracle = make_oracle(ref::oracle_spec(OracleKind::kHashedMarkov, 8, 0));
  EXPECT_THROW(run_autoregressive(*oracle, DecodePolicy{}, std::vector<Token>{}, StopCondition{4}), InvalidArgument);
  EXPECT_THROW(run_autoregressive(*oracle, DecodePolicy{}, std::vector<Token>{8}, StopCondition{4}), InvalidArgument);
}

TEST(Engine, PhaseTimesAddUpToStepWall) {
  auto oracle = make_oracle(ref::oracle_spec(OracleKind::kHashedMarkov, 8, 0));
  SamDrafter d(40, 1);
  const auto r = run_trajectory(*oracle, d, DecodePolicy{0.0, 0}, std::vector<Token>{1, 2}, StopCondition{64});
  for (const auto& s : r.steps) EXPECT_EQ(s.phases.total(), s.wall);
  const auto steady = steady_state_phases(r, 3);
  EXPECT_LE(steady.total(), steady_state_phases(r, 0).total());
}
