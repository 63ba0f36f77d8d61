#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "draft.hpp"
#include "pattern_index.hpp"
#include "token_core.hpp"

namespace specbench {

/// Per-method knobs. A budget of 0 selects the method's default.
struct DrafterParams {
  std::size_t budget = 0;

  std::size_t sam_min_match = 1;

  std::size_t pld_min_n = 1;
  std::size_t pld_max_n = 3;

  std::size_t rest_candidates = 8;
  std::size_t rest_max_match = 16;

  std::size_t lookahead_min_n = 1;
  std::size_t lookahead_max_n = 2;
  std::size_t lookahead_window = 1024;
  std::size_t lookahead_candidates = 4;
  std::size_t lookahead_ngram_len = 4;

  std::size_t pia_window = 16;
  std::size_t pia_capacity = 1 << 16;
  std::size_t pia_max_match = 4;

  std::size_t recycling_top_k = 8;
  std::vector<std::size_t> recycling_branch = {8, 4, 2, 1};

  std::size_t eagle_top_k = 4;
  std::size_t eagle_max_depth = 8;

  Method hybrid_primary = Method::kSam;
  Method hybrid_fallback = Method::kEagle;
  std::size_t hybrid_switch_threshold = 2;
};

/// Shared read-only inputs some drafters need.
struct DrafterResources {
  std::shared_ptr<const TokenOracle> draft_oracle;    // SpS / learned drafter
  std::shared_ptr<const CorpusDatastore> datastore;   // REST
};

std::size_t default_budget(Method m);

/// Uniform drafting interface. One instance per trajectory (or per chain of
/// multi-round turns, so reuse state carries across turns).
class Drafter {
 public:
  virtual ~Drafter() = default;

  virtual Method method() const = 0;
  DrafterCapabilities capabilities() const { return capabilities_of(method()); }
  std::size_t budget() const { return budget_; }

  /// Start of a turn with a fresh prompt.
  virtual void begin(std::span<const Token> prompt) { (void)prompt; }
  /// May return an empty draft; never throws for lack of a pattern.
  virtual Draft propose(const Context& ctx, std::size_t budget, Rng& rng) = 0;
  Draft propose(const Context& ctx, Rng& rng) { return propose(ctx, budget_, rng); }
  /// Tokens emitted by one engine step and, for each, the raw target
  /// distribution it was verified against (conditioned on everything before
  /// it).
  virtual void observe(std::span<const Token> emitted, std::span<const Distribution> target_dists) {
    (void)emitted;
    (void)target_dists;
  }
  /// Length of the matched suffix that would seed the next draft.
  virtual std::size_t match_len() const { return 0; }

 protected:
  explicit Drafter(std::size_t budget) : budget_(budget) {}

 private:
  std::size_t budget_;
};

class NoneDrafter final : public Drafter {
 public:
  NoneDrafter() : Drafter(1) {}
  Method method() const override { return Method::kNone; }
  Draft propose(const Context&, std::size_t, Rng&) override { return Draft{}; }
  using Drafter::propose;
};

class SpsDrafter final : public Drafter {
 public:
  SpsDrafter(std::shared_ptr<const TokenOracle> small, DecodePolicy policy, std::size_t budget);
  Method method() const override { return Method::kSpS; }
  Draft propose(const Context& ctx, std::size_t budget, Rng& rng) override;
  using Drafter::propose;

 private:
  std::shared_ptr<const TokenOracle> small_;
  DecodePolicy policy_;
};

/// Learned-drafter slot: best-first token tree from a small oracle, expanding
/// the top-k children of the highest cumulative-probability node.
class EagleDrafter final : public Drafter {
 public:
  EagleDrafter(std::shared_ptr<const TokenOracle> small, DecodePolicy policy, std::size_t budget,
               std::size_t top_k, std::size_t max_depth);
  Method method() const override { return Method::kEagle; }
  Draft propose(const Context& ctx, std::size_t budget, Rng& rng) override;
  using Drafter::propose;

 private:
  std::shared_ptr<const TokenOracle> small_;
  DecodePolicy policy_;
  std::size_t top_k_;
  std::size_t max_depth_;
};

/// Prompt lookup: n-grams of the current prompt only.
class PldDrafter final : public Drafter {
 public:
  PldDrafter(std::size_t budget, std::size_t min_n, std::size_t max_n);
  Method method() const override { return Method::kPld; }
  void begin(std::span<const Token> prompt) override;
  Draft propose(const Context& ctx, std::size_t budget, Rng& rng) override;
  using Drafter::propose;
  std::size_t match_len() const override { return last_match_; }

 private:
  std::size_t min_n_, max_n_;
  NgramTable table_;
  std::size_t last_match_ = 0;
};

class RestDrafter final : public Drafter {
 public:
  RestDrafter(std::shared_ptr<const CorpusDatastore> ds, std::size_t budget, std::size_t candidates,
              std::size_t max_match);
  Method method() const override { return Method::kRest; }
  Draft propose(const Context& ctx, std::size_t budget, Rng& rng) override;
  using Drafter::propose;

 private:
  std::shared_ptr<const CorpusDatastore> ds_;
  std::size_t candidates_;
  std::size_t max_match_;
};

/// N-gram pool harvested from a rolling window of generated tokens; all pool
/// matches are drafted together as a tree.
class LookaheadDrafter final : public Drafter {
 public:
  LookaheadDrafter(std::size_t budget, std::size_t min_n, std::size_t max_n, std::size_t window,
                   std::size_t candidates, std::size_t ngram_len);
  Method method() const override { return Method::kLookahead; }
  Draft propose(const Context& ctx, std::size_t budget, Rng& rng) override;
  using Drafter::propose;
  void observe(std::span<const Token> emitted, std::span<const Distribution> target_dists) override;

  const NgramTable& pool() const { return pool_; }

 private:
  NgramTable pool_;
  std::size_t window_;
  std::size_t candidates_;
  std::size_t ngram_len_;
};

/// Trie-structured context cache over prompt and generation windows.
class PiaDrafter final : public Drafter {
 public:
  PiaDrafter(std::size_t budget, std::size_t window, std::size_t capacity, std::size_t max_match);
  Method method() const override { return Method::kPia; }
  void begin(std::span<const Token> prompt) override;
  Draft propose(const Context& ctx, std::size_t budget, Rng& rng) override;
  using Drafter::propose;
  void observe(std::span<const Token> emitted, std::span<const Distribution> target_dists) override;

  const ContextTrie& trie() const { return trie_; }

 private:
  void ingest(Token t);

  ContextTrie trie_;
  std::vector<Token> stream_;
  std::size_t window_;
  std::size_t max_match_;
};

/// Linear drafts from the suffix automaton over prompt + generation.
class SamDrafter final : public Drafter {
 public:
  SamDrafter(std::size_t budget, std::size_t min_match);
  Method method() const override { return Method::kSam; }
  void begin(std::span<const Token> prompt) override;
  Draft propose(const Context& ctx, std::size_t budget, Rng& rng) override;
  using Drafter::propose;
  void observe(std::span<const Token> emitted, std::span<const Distribution> target_dists) override;
  std::size_t match_len() const override { return sam_.match_length(); }

  const SuffixAutomaton& automaton() const { return sam_; }

 private:
  SuffixAutomaton sam_;
  std::size_t min_match_;
};

/// token -> top-k tokens of the target distribution that followed it.
using RecyclingCache = std::unordered_map<Token, std::vector<Token>>;

/// Breadth-first expansion from `root`: level d keeps the first branch[d]
/// cached successors of each node on level d - 1. At most `budget` nodes.
Draft recycling_tree(const RecyclingCache& cache, Token root, std::span<const std::size_t> branch,
                     std::size_t budget);

class RecyclingDrafter final : public Drafter {
 public:
  RecyclingDrafter(std::size_t budget, std::size_t top_k, std::vector<std::size_t> branch);
  Method method() const override { return Method::kRecycling; }
  void begin(std::span<const Token> prompt) override;
  Draft propose(const Context& ctx, std::size_t budget, Rng& rng) override;
  using Drafter::propose;
  void observe(std::span<const Token> emitted, std::span<const Distribution> target_dists) override;

  const RecyclingCache& cache() const { return cache_; }

 private:
  RecyclingCache cache_;
  std::size_t top_k_;
  std::vector<std::size_t> branch_;
  Token last_token_ = -1;
};

/// Pattern drafter when its match is long enough, learned drafter otherwise.
class HybridDrafter final : public Drafter {
 public:
  HybridDrafter(std::unique_ptr<Drafter> primary, std::unique_ptr<Drafter> fallback,
                std::size_t switch_threshold);
  Method method() const override { return Method::kHybrid; }
  void begin(std::span<const Token> prompt) override;
  Draft propose(const Context& ctx, std::size_t budget, Rng& rng) override;
  using Drafter::propose;
  void observe(std::span<const Token> emitted, std::span<const Distribution> target_dists) override;
  std::size_t match_len() const override { return primary_->match_len(); }

  /// Pure selection rule.
  static bool use_primary(std::size_t match_len, std::size_t threshold) { return match_len >= threshold; }

 private:
  std::unique_ptr<Drafter> primary_;
  std::unique_ptr<Drafter> fallback_;
  std::size_t threshold_;
};

/// Rejects sampling (T > 0) for methods whose verification does not support
/// it. Throws UnsupportedSamplingMode.
void validate_config(Method m, const DecodePolicy& policy, const DrafterParams& params = {});

std::unique_ptr<Drafter> make_drafter(Method m, const DrafterParams& params,
                                      const DrafterResources& resources, const DecodePolicy& policy);

}  // namespace specbench
