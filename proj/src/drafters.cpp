#include "drafters.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

#include "errors.hpp"

namespace specbench {

std::size_t default_budget(Method m) {
  switch (m) {
    case Method::kSam: return 40;
    case Method::kRecycling: return 81;
    case Method::kHybrid: return 40;
    case Method::kNone: return 1;
    default: return 16;
  }
}

namespace {

Draft tree_from(const TokenTree& tree, Method origin, std::size_t match_len) {
  Draft d;
  d.shape = DraftShape::kTree;
  d.origin = origin;
  d.match_len = match_len;
  d.nodes.reserve(tree.size());
  for (const auto& n : tree.nodes) d.nodes.push_back(DraftNode{n.token, n.parent, 1.0, -1});
  return d;
}

}  // namespace

// ---------------------------------------------------------------------------

SpsDrafter::SpsDrafter(std::shared_ptr<const TokenOracle> small, DecodePolicy policy, std::size_t budget)
    : Drafter(budget), small_(std::move(small)), policy_(policy) {
  if (!small_) throw InvalidArgument("sps drafter needs a draft oracle");
}

Draft SpsDrafter::propose(const Context& ctx, std::size_t budget, Rng& rng) {
  Draft d;
  d.shape = DraftShape::kLinear;
  d.origin = Method::kSpS;
  std::vector<Token> buf(ctx.tokens().begin(), ctx.tokens().end());
  for (std::size_t i = 0; i < budget; ++i) {
    const Distribution q = apply_policy(small_->next(buf), policy_);
    DraftNode node;
    node.parent = static_cast<std::int32_t>(i) - 1;
    if (policy_.greedy()) {
      node.token = q.argmax();
      node.q = 1.0;
    } else {
      node.token = sample(q, rng);
      node.q = q[node.token];
      node.proposal = static_cast<std::int32_t>(d.proposals.size());
      d.proposals.push_back(q);
    }
    d.nodes.push_back(node);
    buf.push_back(node.token);
  }
  return d;
}

// ---------------------------------------------------------------------------

EagleDrafter::EagleDrafter(std::shared_ptr<const TokenOracle> small, DecodePolicy policy,
                           std::size_t budget, std::size_t top_k, std::size_t max_depth)
    : Drafter(budget), small_(std::move(small)), policy_(policy), top_k_(top_k), max_depth_(max_depth) {
  if (!small_) throw InvalidArgument("learned drafter needs a draft oracle");
  if (top_k_ == 0 || max_depth_ == 0) throw InvalidArgument("learned drafter top_k and depth must be >= 1");
}

Draft EagleDrafter::propose(const Context& ctx, std::size_t budget, Rng&) {
  Draft d;
  d.shape = DraftShape::kTree;
  d.origin = Method::kEagle;
  if (budget == 0) return d;

  struct Candidate {
    double score;
    std::int32_t parent;
    Token token;
    double q;
    std::size_t depth;
    std::size_t order;  // insertion order breaks score ties
    bool operator<(const Candidate& o) const {
      return score != o.score ? score < o.score : order > o.order;
    }
  };
  std::priority_queue<Candidate> heap;
  std::size_t order = 0;

  std::vector<Token> buf(ctx.tokens().begin(), ctx.tokens().end());
  const std::size_t base = buf.size();
  auto push_children = [&](std::int32_t parent, double parent_score, std::size_t depth) {
    buf.resize(base);
    if (parent >= 0) {
      std::vector<Token> path;
      for (std::int32_t i = parent; i >= 0; i = d.nodes[static_cast<std::size_t>(i)].parent) {
        path.push_back(d.nodes[static_cast<std::size_t>(i)].token);
      }
      buf.insert(buf.end(), path.rbegin(), path.rend());
    }
    const Distribution raw = small_->next(buf);
    const Distribution shaped = apply_policy(raw, policy_);
    for (Token t : raw.top_k(top_k_)) {
      if (raw[t] <= 0.0) break;
      heap.push(Candidate{parent_score * raw[t], parent, t, shaped[t], depth, order++});
    }
  };

  push_children(-1, 1.0, 1);
  while (!heap.empty() && d.nodes.size() < budget) {
    const Candidate c = heap.top();
    heap.pop();
    d.nodes.push_back(DraftNode{c.token, c.parent, c.q, -1});
    if (c.depth < max_depth_ && d.nodes.size() < budget) {
      push_children(static_cast<std::int32_t>(d.nodes.size() - 1), c.score, c.depth + 1);
    }
  }
  return d;
}

// ---------------------------------------------------------------------------

PldDrafter::PldDrafter(std::size_t budget, std::size_t min_n, std::size_t max_n)
    : Drafter(budget), min_n_(min_n), max_n_(max_n), table_(min_n, max_n) {}

void PldDrafter::begin(std::span<const Token> prompt) {
  table_ = NgramTable(min_n_, max_n_);
  table_.append(prompt);
}

Draft PldDrafter::propose(const Context& ctx, std::size_t budget, Rng&) {
  const auto m = table_.lookup(ctx.tokens());
  last_match_ = m.key_len;
  if (m.positions.empty()) return Draft::linear(Method::kPld, {});
  const auto prompt = table_.tokens();
  const std::size_t start = m.positions.front();
  const std::size_t end = std::min(prompt.size(), start + budget);
  return Draft::linear(Method::kPld, std::vector<Token>(prompt.begin() + static_cast<std::ptrdiff_t>(start),
                                                        prompt.begin() + static_cast<std::ptrdiff_t>(end)),
                       m.key_len);
}

// ---------------------------------------------------------------------------

RestDrafter::RestDrafter(std::shared_ptr<const CorpusDatastore> ds, std::size_t budget,
                         std::size_t candidates, std::size_t max_match)
    : Drafter(budget), ds_(std::move(ds)), candidates_(candidates), max_match_(max_match) {
  if (!ds_) throw InvalidArgument("rest drafter needs a datastore");
}

Draft RestDrafter::propose(const Context& ctx, std::size_t budget, Rng&) {
  const auto r = ds_->retrieve(ctx.tokens(), candidates_, budget, max_match_);
  TokenTree tree;
  for (const auto& c : r.continuations) tree.insert_path(c, budget);
  return tree_from(tree, Method::kRest, r.match_len);
}

// ---------------------------------------------------------------------------

LookaheadDrafter::LookaheadDrafter(std::size_t budget, std::size_t min_n, std::size_t max_n,
                                   std::size_t window, std::size_t candidates, std::size_t ngram_len)
    : Drafter(budget),
      pool_(min_n, max_n),
      window_(window),
      candidates_(candidates),
      ngram_len_(ngram_len) {}

Draft LookaheadDrafter::propose(const Context& ctx, std::size_t budget, Rng&) {
  const std::size_t n = pool_.tokens().size();
  const std::size_t min_pos = n > window_ ? n - window_ : 0;
  const auto m = pool_.lookup(ctx.tokens(), min_pos);
  TokenTree tree;
  const auto toks = pool_.tokens();
  std::size_t used = 0;
  // Most recent occurrences first.
  for (auto it = m.positions.rbegin(); it != m.positions.rend() && used < candidates_; ++it, ++used) {
    const std::size_t end = std::min(toks.size(), *it + ngram_len_);
    tree.insert_path(toks.subspan(*it, end - *it), budget);
  }
  return tree_from(tree, Method::kLookahead, m.key_len);
}

void LookaheadDrafter::observe(std::span<const Token> emitted, std::span<const Distribution>) {
  pool_.append(emitted);
}

// ---------------------------------------------------------------------------

PiaDrafter::PiaDrafter(std::size_t budget, std::size_t window, std::size_t capacity, std::size_t max_match)
    : Drafter(budget), trie_(capacity), window_(window), max_match_(max_match) {
  if (window_ < 2) throw InvalidArgument("pia window must be >= 2");
}

void PiaDrafter::ingest(Token t) {
  stream_.push_back(t);
  if (stream_.size() >= window_) {
    trie_.insert_window(std::span<const Token>(stream_).last(window_));
  }
}

void PiaDrafter::begin(std::span<const Token> prompt) {
  for (Token t : prompt) ingest(t);
  trie_.prune();
}

Draft PiaDrafter::propose(const Context& ctx, std::size_t budget, Rng&) {
  const auto hit = trie_.lookup(ctx.tokens(), budget, max_match_);
  return tree_from(hit.tree, Method::kPia, hit.match_len);
}

void PiaDrafter::observe(std::span<const Token> emitted, std::span<const Distribution>) {
  for (Token t : emitted) ingest(t);
  trie_.prune();
}

// ---------------------------------------------------------------------------

SamDrafter::SamDrafter(std::size_t budget, std::size_t min_match)
    : Drafter(budget), min_match_(std::max<std::size_t>(1, min_match)) {}

void SamDrafter::begin(std::span<const Token> prompt) { sam_.extend(prompt); }

Draft SamDrafter::propose(const Context&, std::size_t budget, Rng&) {
  const std::size_t m = sam_.match_length();
  if (m < min_match_) return Draft::linear(Method::kSam, {});
  return Draft::linear(Method::kSam, sam_.continuation(budget), m);
}

void SamDrafter::observe(std::span<const Token> emitted, std::span<const Distribution>) {
  sam_.extend(emitted);
}

// ---------------------------------------------------------------------------

Draft recycling_tree(const RecyclingCache& cache, Token root, std::span<const std::size_t> branch,
                     std::size_t budget) {
  Draft d;
  d.shape = DraftShape::kTree;
  d.origin = Method::kRecycling;
  std::vector<std::pair<Token, std::int32_t>> frontier = {{root, -1}};
  for (std::size_t level = 0; level < branch.size() && !frontier.empty(); ++level) {
    std::vector<std::pair<Token, std::int32_t>> next;
    for (const auto& [tok, parent] : frontier) {
      auto it = cache.find(tok);
      if (it == cache.end()) continue;
      const std::size_t take = std::min(branch[level], it->second.size());
      for (std::size_t j = 0; j < take; ++j) {
        if (d.nodes.size() >= budget) return d;
        d.nodes.push_back(DraftNode{it->second[j], parent, 1.0, -1});
        next.emplace_back(it->second[j], static_cast<std::int32_t>(d.nodes.size() - 1));
      }
    }
    frontier = std::move(next);
  }
  return d;
}

RecyclingDrafter::RecyclingDrafter(std::size_t budget, std::size_t top_k, std::vector<std::size_t> branch)
    : Drafter(budget), top_k_(top_k), branch_(std::move(branch)) {}

void RecyclingDrafter::begin(std::span<const Token> prompt) {
  // No reuse across turns: the cache only covers the current generation.
  cache_.clear();
  last_token_ = prompt.empty() ? -1 : prompt.back();
}

Draft RecyclingDrafter::propose(const Context& ctx, std::size_t budget, Rng&) {
  return recycling_tree(cache_, ctx.back(), branch_, budget);
}

void RecyclingDrafter::observe(std::span<const Token> emitted, std::span<const Distribution> target_dists) {
  for (std::size_t i = 0; i < emitted.size() && i < target_dists.size(); ++i) {
    const Token key = i == 0 ? last_token_ : emitted[i - 1];
    if (key >= 0) cache_[key] = target_dists[i].top_k(top_k_);
  }
  if (!emitted.empty()) last_token_ = emitted.back();
}

// ---------------------------------------------------------------------------

HybridDrafter::HybridDrafter(std::unique_ptr<Drafter> primary, std::unique_ptr<Drafter> fallback,
                             std::size_t switch_threshold)
    : Drafter(std::max(primary->budget(), fallback->budget())),
      primary_(std::move(primary)),
      fallback_(std::move(fallback)),
      threshold_(switch_threshold) {
  if (threshold_ < 1) throw InvalidArgument("hybrid switch_threshold must be >= 1");
}

void HybridDrafter::begin(std::span<const Token> prompt) {
  primary_->begin(prompt);
  fallback_->begin(prompt);
}

Draft HybridDrafter::propose(const Context& ctx, std::size_t budget, Rng& rng) {
  if (use_primary(primary_->match_len(), threshold_)) {
    return primary_->propose(ctx, std::min(budget, primary_->budget()), rng);
  }
  Draft d = fallback_->propose(ctx, std::min(budget, fallback_->budget()), rng);
  d.match_len = primary_->match_len();
  return d;
}

void HybridDrafter::observe(std::span<const Token> emitted, std::span<const Distribution> target_dists) {
  primary_->observe(emitted, target_dists);
  fallback_->observe(emitted, target_dists);
}

// ---------------------------------------------------------------------------

void validate_config(Method m, const DecodePolicy& policy, const DrafterParams& params) {
  if (!(policy.temperature >= 0.0)) throw InvalidArgument("temperature must be >= 0");
  auto check = [&](Method x) {
    const auto caps = capabilities_of(x);
    if (!policy.greedy() && !caps.supports_sampling) {
      throw UnsupportedSamplingMode(to_string(x) + " does not support speculative sampling "
                                    "(capability matrix: " + to_string(x) +
                                    " / Verification / Sampling = no); use temperature 0");
    }
    if (policy.greedy() && !caps.supports_greedy) {
      throw UnsupportedSamplingMode(to_string(x) + " does not support greedy verification");
    }
  };
  check(m);
  if (m == Method::kHybrid) {
    if (params.hybrid_primary != Method::kSam) {
      throw InvalidArgument("hybrid primary drafter must be sam");
    }
    if (params.hybrid_fallback != Method::kEagle && params.hybrid_fallback != Method::kSpS) {
      throw InvalidArgument("hybrid fallback must be a model-based drafter (eagle or sps)");
    }
    check(params.hybrid_primary);
    check(params.hybrid_fallback);
  }
}

std::unique_ptr<Drafter> make_drafter(Method m, const DrafterParams& p, const DrafterResources& res,
                                      const DecodePolicy& policy) {
  const std::size_t budget = p.budget ? p.budget : default_budget(m);
  switch (m) {
    case Method::kNone: return std::make_unique<NoneDrafter>();
    case Method::kSpS: return std::make_unique<SpsDrafter>(res.draft_oracle, policy, budget);
    case Method::kEagle:
      return std::make_unique<EagleDrafter>(res.draft_oracle, policy, budget, p.eagle_top_k, p.eagle_max_depth);
    case Method::kPld: return std::make_unique<PldDrafter>(budget, p.pld_min_n, p.pld_max_n);
    case Method::kRest:
      return std::make_unique<RestDrafter>(res.datastore, budget, p.rest_candidates, p.rest_max_match);
    case Method::kLookahead:
      return std::make_unique<LookaheadDrafter>(budget, p.lookahead_min_n, p.lookahead_max_n,
                                                p.lookahead_window, p.lookahead_candidates,
                                                p.lookahead_ngram_len);
    case Method::kPia:
      return std::make_unique<PiaDrafter>(budget, p.pia_window, p.pia_capacity, p.pia_max_match);
    case Method::kSam: return std::make_unique<SamDrafter>(budget, p.sam_min_match);
    case Method::kRecycling:
      return std::make_unique<RecyclingDrafter>(budget, p.recycling_top_k, p.recycling_branch);
    case Method::kHybrid: {
      DrafterParams sub = p;
      sub.budget = 0;
      auto primary = make_drafter(p.hybrid_primary, sub, res, policy);
      auto fallback = make_drafter(p.hybrid_fallback, sub, res, policy);
      return std::make_unique<HybridDrafter>(std::move(primary), std::move(fallback),
                                             p.hybrid_switch_threshold);
    }
  }
  throw InvalidArgument("unknown method");
}

}  // namespace specbench
