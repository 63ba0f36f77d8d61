#include "verifier.hpp"

#include <algorithm>
#include <functional>

#include "errors.hpp"

namespace specbench {

namespace {

std::vector<std::vector<std::int32_t>> child_lists(const Draft& draft) {
  // Slot 0 holds the first layer; slot i + 1 the children of node i.
  std::vector<std::vector<std::int32_t>> kids(draft.size() + 1);
  for (std::size_t i = 0; i < draft.size(); ++i) {
    kids[static_cast<std::size_t>(draft.nodes[i].parent + 1)].push_back(static_cast<std::int32_t>(i));
  }
  return kids;
}

}  // namespace

TargetEvaluation evaluate_draft(const TokenOracle& oracle, const Context& ctx, const Draft& draft) {
  TargetEvaluation out;
  out.root = oracle.next(ctx.tokens());
  out.nodes.resize(draft.size());
  if (draft.empty()) return out;

  const auto kids = child_lists(draft);
  std::vector<Token> buf(ctx.tokens().begin(), ctx.tokens().end());
  std::function<void(std::int32_t)> visit = [&](std::int32_t node) {
    buf.push_back(draft.nodes[static_cast<std::size_t>(node)].token);
    out.nodes[static_cast<std::size_t>(node)] = oracle.next(buf);
    for (std::int32_t c : kids[static_cast<std::size_t>(node + 1)]) visit(c);
    buf.pop_back();
  };
  for (std::int32_t c : kids[0]) visit(c);
  return out;
}

Distribution residual(const Distribution& p, const Distribution& q) {
  std::vector<double> r(p.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto t = static_cast<Token>(i);
    r[i] = std::max(p[t] - q[t], 0.0);
    sum += r[i];
  }
  if (sum < 1e-12) return p;
  for (double& v : r) v /= sum;
  return Distribution(std::move(r));
}

VerifyOutcome verify_greedy(const Draft& draft, const TargetEvaluation& target) {
  const auto kids = child_lists(draft);
  VerifyOutcome out;
  std::int32_t cur = -1;
  while (true) {
    const Distribution& dist = cur < 0 ? target.root : target.nodes[static_cast<std::size_t>(cur)];
    const Token want = dist.argmax();
    out.target_dists.push_back(dist);
    std::int32_t next = -1;
    for (std::int32_t c : kids[static_cast<std::size_t>(cur + 1)]) {
      if (draft.nodes[static_cast<std::size_t>(c)].token == want) {
        next = c;
        break;
      }
    }
    if (next < 0) {
      out.bonus = want;
      return out;
    }
    out.accepted.push_back(want);
    out.accepted_nodes.push_back(next);
    cur = next;
  }
}

VerifyOutcome verify_sampling(const Draft& draft, const TargetEvaluation& target, const DecodePolicy& policy,
                              Rng& rng) {
  const auto kids = child_lists(draft);
  VerifyOutcome out;
  std::int32_t cur = -1;
  while (true) {
    const Distribution& raw = cur < 0 ? target.root : target.nodes[static_cast<std::size_t>(cur)];
    out.target_dists.push_back(raw);
    Distribution p = apply_policy(raw, policy);
    std::int32_t next = -1;
    for (std::int32_t c : kids[static_cast<std::size_t>(cur + 1)]) {
      const DraftNode& node = draft.nodes[static_cast<std::size_t>(c)];
      const Distribution q = node.proposal >= 0 ? draft.proposals[static_cast<std::size_t>(node.proposal)]
                                                : Distribution::point_mass(p.size(), node.token);
      const double qx = q[node.token];
      if (!(qx > 0.0)) {
        throw InvalidProposal("drafted token " + std::to_string(node.token) + " has zero proposal mass");
      }
      const double accept = std::min(1.0, p[node.token] / qx);
      if (rng.uniform() < accept) {
        next = c;
        break;
      }
      p = residual(p, q);
    }
    if (next < 0) {
      out.bonus = sample(p, rng);
      return out;
    }
    out.accepted.push_back(draft.nodes[static_cast<std::size_t>(next)].token);
    out.accepted_nodes.push_back(next);
    cur = next;
  }
}

VerifyOutcome verify(const Draft& draft, const TargetEvaluation& target, const DecodePolicy& policy, Rng& rng) {
  return policy.greedy() ? verify_greedy(draft, target) : verify_sampling(draft, target, policy, rng);
}

}  // namespace specbench
