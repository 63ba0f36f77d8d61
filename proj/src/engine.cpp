#include "engine.hpp"

#include <algorithm>
#include <chrono>

#include "errors.hpp"
#include "verifier.hpp"

namespace specbench {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t ns_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count();
}

}  // namespace

std::size_t TrajectoryResult::accepted_total() const {
  std::size_t sum = 0;
  for (const auto& s : steps) sum += s.accepted_count;
  return sum;
}

double TrajectoryResult::mat() const {
  return steps.empty() ? 0.0 : static_cast<double>(accepted_total()) / static_cast<double>(steps.size());
}

TrajectoryResult run_trajectory(const TokenOracle& oracle, Drafter& drafter, const DecodePolicy& policy,
                                std::span<const Token> prompt, const StopCondition& stop, std::uint64_t stream) {
  if (prompt.empty()) throw InvalidArgument("prompt must be non-empty");
  for (Token t : prompt) {
    if (t < 0 || static_cast<std::size_t>(t) >= oracle.vocab_size()) {
      throw InvalidArgument("prompt token " + std::to_string(t) + " outside vocabulary");
    }
  }
  validate_config(drafter.method(), policy);

  TrajectoryResult result;
  result.method = drafter.method();
  result.prompt_len = prompt.size();
  Rng verify_rng(policy.seed, 2 * stream);
  Rng draft_rng(policy.seed, 2 * stream + 1);
  Context ctx(std::vector<Token>(prompt.begin(), prompt.end()));

  const auto start = Clock::now();
  drafter.begin(prompt);

  while (result.tokens.size() < stop.max_tokens && !result.hit_stop_token) {
    StepTrace step;
    step.step_index = result.steps.size();

    const auto t0 = Clock::now();
    const Draft draft = drafter.propose(ctx, draft_rng);
    const auto t1 = Clock::now();
    const TargetEvaluation target = evaluate_draft(oracle, ctx, draft);
    ++result.oracle_batches;
    const auto t2 = Clock::now();
    VerifyOutcome outcome = verify(draft, target, policy, verify_rng);
    const auto t3 = Clock::now();

    std::vector<Token> emitted = outcome.emitted();
    std::size_t keep = std::min(emitted.size(), stop.max_tokens - result.tokens.size());
    if (stop.stop_token) {
      auto it = std::find(emitted.begin(), emitted.begin() + static_cast<std::ptrdiff_t>(keep), *stop.stop_token);
      if (it != emitted.begin() + static_cast<std::ptrdiff_t>(keep)) {
        keep = static_cast<std::size_t>(it - emitted.begin()) + 1;
        result.hit_stop_token = true;
      }
    }
    emitted.resize(keep);
    outcome.target_dists.resize(keep);
    ctx.append(emitted);
    result.tokens.insert(result.tokens.end(), emitted.begin(), emitted.end());
    drafter.observe(emitted, outcome.target_dists);
    const auto t4 = Clock::now();

    step.phases = PhaseTimes{ns_between(t0, t1), ns_between(t1, t2), ns_between(t2, t3), ns_between(t3, t4)};
    step.wall = ns_between(t0, t4);
    step.accepted_count = keep;
    step.match_len = draft.match_len;
    step.draft_size = draft.size();
    step.origin = draft.origin;
    result.steps.push_back(step);
  }
  result.wall_time = ns_between(start, Clock::now());
  return result;
}

TrajectoryResult run_autoregressive(const TokenOracle& oracle, const DecodePolicy& policy,
                                    std::span<const Token> prompt, const StopCondition& stop,
                                    std::uint64_t stream) {
  NoneDrafter none;
  return run_trajectory(oracle, none, policy, prompt, stop, stream);
}

PhaseTimes steady_state_phases(const TrajectoryResult& r, std::size_t warmup) {
  PhaseTimes sum;
  for (std::size_t i = warmup; i < r.steps.size(); ++i) sum += r.steps[i].phases;
  return sum;
}

}  // namespace specbench
