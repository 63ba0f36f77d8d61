#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "token_core.hpp"

namespace specbench {

enum class OracleKind { kCyclic, kHashedMarkov, kCopyMix };

std::string to_string(OracleKind kind);
OracleKind oracle_kind_from_string(const std::string& name);

/// Parameters of a synthetic target (or draft) model. Fields not used by the
/// selected kind are ignored.
struct SyntheticOracleSpec {
  OracleKind kind = OracleKind::kHashedMarkov;
  std::size_t vocab_size = 64;
  std::size_t max_context = std::size_t{1} << 20;

  // cyclic: explicit loop, or [offset, offset + period) when loop is empty.
  std::vector<Token> loop;
  std::size_t period = 4;
  Token offset = 0;

  // hashed-markov (also the novelty source of copy-mix)
  std::size_t order = 2;
  std::uint64_t seed = 0;
  double concentration = 1.5;  // Zipf exponent over the hashed ranking
  double perturb = 0.0;        // fraction of states whose ranking is re-drawn
  std::uint64_t perturb_seed = 0x5EED;

  // copy-mix
  double copy_prob = 0.5;
  std::size_t min_match = 1;
  // 0: copy gate keyed by the last `order` tokens. >0: gate is constant over
  // blocks of segment_len context positions.
  std::size_t segment_len = 0;

  void validate() const;
  std::vector<Token> cyclic_loop() const;
};

/// Emits the loop successor of the last token (loop[0] when the last token
/// is not on the loop).
class CyclicOracle final : public TokenOracle {
 public:
  explicit CyclicOracle(const SyntheticOracleSpec& spec);
  std::size_t vocab_size() const override { return vocab_size_; }

 protected:
  Distribution compute(std::span<const Token> ctx) const override;

 private:
  std::size_t vocab_size_;
  std::vector<Token> loop_;
  std::vector<int> position_;  // token -> index on loop, -1 when absent
};

/// Zipf-shaped distribution over a ranking that is a pure hash of
/// (seed, last `order` tokens).
class HashedMarkovOracle final : public TokenOracle {
 public:
  explicit HashedMarkovOracle(const SyntheticOracleSpec& spec);
  std::size_t vocab_size() const override { return spec_.vocab_size; }

 protected:
  Distribution compute(std::span<const Token> ctx) const override;

 private:
  friend class CopyMixOracle;
  SyntheticOracleSpec spec_;
  std::vector<double> rank_weights_;
};

/// Gated mixture: when the gate fires and the context has a suffix of at
/// least min_match tokens that also ends earlier, emits a point mass on the
/// token after the earliest such occurrence of the longest such suffix.
/// Otherwise falls back to hashed-markov.
class CopyMixOracle final : public TokenOracle {
 public:
  explicit CopyMixOracle(const SyntheticOracleSpec& spec);
  std::size_t vocab_size() const override { return spec_.vocab_size; }

 protected:
  Distribution compute(std::span<const Token> ctx) const override;

 private:
  bool gate(std::span<const Token> ctx) const;

  SyntheticOracleSpec spec_;
  HashedMarkovOracle fallback_;
};

/// Longest suffix of `seq` that also ends at an earlier position, with the
/// earliest such end position. Returns {0, npos} when nothing matches.
struct SuffixMatch {
  std::size_t length = 0;
  std::size_t end = static_cast<std::size_t>(-1);
};
SuffixMatch longest_earlier_suffix(std::span<const Token> seq);

std::unique_ptr<TokenOracle> make_oracle(const SyntheticOracleSpec& spec);

}  // namespace specbench
