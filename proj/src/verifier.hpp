#pragma once

#include <cstdint>
#include <vector>

#include "draft.hpp"
#include "token_core.hpp"

namespace specbench {

/// Raw target distributions for one draft: at the context itself and after
/// every draft node's root path. Produced by the engine's decode phase.
struct TargetEvaluation {
  Distribution root;
  std::vector<Distribution> nodes;
};

/// One batched target pass over ctx and every ctx + path(node).
TargetEvaluation evaluate_draft(const TokenOracle& oracle, const Context& ctx, const Draft& draft);

struct VerifyOutcome {
  std::vector<Token> accepted;
  std::vector<std::int32_t> accepted_nodes;
  Token bonus = 0;
  /// Raw target distribution behind each emitted token (accepted..., bonus).
  std::vector<Distribution> target_dists;

  std::size_t accepted_count() const { return accepted.size() + 1; }
  std::vector<Token> emitted() const {
    std::vector<Token> out = accepted;
    out.push_back(bonus);
    return out;
  }
};

/// normalize(max(p - q, 0)); returns p when that residual carries no mass
/// (p == q up to 1e-12).
Distribution residual(const Distribution& p, const Distribution& q);

/// Exact-match acceptance against the positional argmax. Never touches an rng.
VerifyOutcome verify_greedy(const Draft& draft, const TargetEvaluation& target);

/// Speculative rejection sampling. Siblings are tried in order; a rejected
/// sibling's proposal mass is removed from the target before the next one is
/// tried. Nodes without a proposal distribution count as point masses.
/// Throws InvalidProposal when a drafted token has zero proposal mass.
VerifyOutcome verify_sampling(const Draft& draft, const TargetEvaluation& target,
                              const DecodePolicy& policy, Rng& rng);

VerifyOutcome verify(const Draft& draft, const TargetEvaluation& target, const DecodePolicy& policy,
                     Rng& rng);

inline VerifyOutcome verify_greedy(const Context& ctx, const Draft& draft, const TokenOracle& oracle) {
  return verify_greedy(draft, evaluate_draft(oracle, ctx, draft));
}
inline VerifyOutcome verify_sampling(const Context& ctx, const Draft& draft, const TokenOracle& oracle,
                                     const DecodePolicy& policy, Rng& rng) {
  return verify_sampling(draft, evaluate_draft(oracle, ctx, draft), policy, rng);
}

}  // namespace specbench
