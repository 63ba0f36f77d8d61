#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace specbench {

using Token = std::int32_t;

/// Next-token probability vector indexed by token id.
class Distribution {
 public:
  Distribution() = default;
  explicit Distribution(std::vector<double> probs);

  static Distribution point_mass(std::size_t vocab_size, Token token);
  static Distribution uniform(std::size_t vocab_size);

  std::size_t size() const { return probs_.size(); }
  double operator[](Token t) const { return probs_[static_cast<std::size_t>(t)]; }
  std::span<const double> probs() const { return probs_; }

  /// Highest-probability token; ties go to the lowest id.
  Token argmax() const;
  /// Up to k tokens ordered by probability (descending), ties by id.
  std::vector<Token> top_k(std::size_t k) const;
  bool is_point_mass() const;

  /// Throws InvalidArgument unless entries are >= 0 and sum to 1 within tol.
  void validate(double tol = 1e-9) const;

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> probs_;
};

struct DecodePolicy {
  double temperature = 0.0;
  std::uint64_t seed = 0;

  bool greedy() const { return temperature <= 0.0; }
};

/// Tokens seen so far in one decode run. Only append() mutates it.
class Context {
 public:
  Context() = default;
  explicit Context(std::vector<Token> prompt)
      : tokens_(std::move(prompt)), prompt_len_(tokens_.size()) {}

  std::span<const Token> tokens() const { return tokens_; }
  std::span<const Token> generated() const {
    return std::span<const Token>(tokens_).subspan(prompt_len_);
  }
  std::size_t size() const { return tokens_.size(); }
  std::size_t prompt_len() const { return prompt_len_; }
  bool empty() const { return tokens_.empty(); }
  Token back() const { return tokens_.back(); }

  void append(Token t) { tokens_.push_back(t); }
  void append(std::span<const Token> ts) { tokens_.insert(tokens_.end(), ts.begin(), ts.end()); }

 private:
  std::vector<Token> tokens_;
  std::size_t prompt_len_ = 0;
};

/// Counter-based generator. Draw i (0-based) of a stream with key K is
/// splitmix64(K + (i + 1) * 0x9E3779B97F4A7C15), so every value is
/// reproducible from (seed, stream, draw index) alone. The key is
/// splitmix64(seed ^ splitmix64(stream)).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);
/// Order-dependent hash over a token run, seeded.
std::uint64_t hash_tokens(std::uint64_t seed, std::span<const Token> tokens);

/// T = 0: point mass on the argmax. T > 0: renormalized exp(log p / T).
Distribution apply_policy(const Distribution& dist, const DecodePolicy& policy);

/// Inverse-CDF draw over token-id order; consumes exactly one rng value.
Token sample(const Distribution& dist, Rng& rng);

/// Target-model abstraction: next-token distribution for a context.
class TokenOracle {
 public:
  virtual ~TokenOracle() = default;

  /// Throws ContextTooLong when ctx exceeds max_context().
  Distribution next(std::span<const Token> ctx) const;

  virtual std::size_t vocab_size() const = 0;
  std::size_t max_context() const { return max_context_; }
  void set_max_context(std::size_t n) { max_context_ = n; }

 protected:
  virtual Distribution compute(std::span<const Token> ctx) const = 0;

 private:
  std::size_t max_context_ = std::size_t{1} << 20;
};

}  // namespace specbench
