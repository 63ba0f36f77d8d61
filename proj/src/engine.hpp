#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "drafters.hpp"
#include "token_core.hpp"

namespace specbench {

/// Nanoseconds spent in each stage of one draft-verify step. "decode" is the
/// target evaluation over the context and every draft position; a real
/// backend maps it to its batched forward pass.
struct PhaseTimes {
  std::int64_t draft = 0;
  std::int64_t decode = 0;
  std::int64_t verify = 0;
  std::int64_t update = 0;

  std::int64_t total() const { return draft + decode + verify + update; }
  PhaseTimes& operator+=(const PhaseTimes& o) {
    draft += o.draft;
    decode += o.decode;
    verify += o.verify;
    update += o.update;
    return *this;
  }
};

struct StepTrace {
  std::size_t step_index = 0;
  PhaseTimes phases;
  std::int64_t wall = 0;
  std::size_t accepted_count = 0;
  std::size_t match_len = 0;
  std::size_t draft_size = 0;
  Method origin = Method::kNone;
};

struct StopCondition {
  std::size_t max_tokens = 256;
  std::optional<Token> stop_token;
};

struct TrajectoryResult {
  Method method = Method::kNone;
  std::vector<Token> tokens;  // emitted tokens only (prompt excluded)
  std::size_t prompt_len = 0;
  std::vector<StepTrace> steps;
  std::int64_t wall_time = 0;
  std::size_t turn_index = 0;
  std::size_t trajectory_index = 0;
  std::size_t oracle_batches = 0;
  bool hit_stop_token = false;

  std::size_t accepted_total() const;
  double mat() const;
};

/// Draft -> decode -> verify -> update until max_tokens or the stop token.
/// Calls drafter.begin(prompt) first; drafter state otherwise persists, so
/// chaining turns through one drafter carries its reuse state.
/// Randomness: verification uses Rng(policy.seed, 2 * stream), drafting
/// Rng(policy.seed, 2 * stream + 1).
TrajectoryResult run_trajectory(const TokenOracle& oracle, Drafter& drafter, const DecodePolicy& policy,
                                std::span<const Token> prompt, const StopCondition& stop,
                                std::uint64_t stream = 0);

/// One target step per token; shares the sampling stream layout of
/// run_trajectory, so an empty-draft drafter reproduces it exactly.
TrajectoryResult run_autoregressive(const TokenOracle& oracle, const DecodePolicy& policy,
                                    std::span<const Token> prompt, const StopCondition& stop,
                                    std::uint64_t stream = 0);

/// Phase totals over steps past the first `warmup` ones.
PhaseTimes steady_state_phases(const TrajectoryResult& r, std::size_t warmup);

}  // namespace specbench
