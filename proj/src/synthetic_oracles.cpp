#include "synthetic_oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "errors.hpp"

namespace specbench {

std::string to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::kCyclic: return "cyclic";
    case OracleKind::kHashedMarkov: return "hashed-markov";
    case OracleKind::kCopyMix: return "copy-mix";
  }
  return "unknown";
}

OracleKind oracle_kind_from_string(const std::string& name) {
  if (name == "cyclic") return OracleKind::kCyclic;
  if (name == "hashed-markov") return OracleKind::kHashedMarkov;
  if (name == "copy-mix") return OracleKind::kCopyMix;
  throw InvalidArgument("unknown oracle kind '" + name + "'");
}

void SyntheticOracleSpec::validate() const {
  if (vocab_size == 0) throw InvalidArgument("oracle vocab_size must be >= 1");
  switch (kind) {
    case OracleKind::kCyclic: {
      const auto l = cyclic_loop();
      if (l.empty()) throw InvalidArgument("cyclic oracle needs period >= 1");
      std::vector<Token> sorted = l;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InvalidArgument("cyclic loop tokens must be distinct");
      }
      for (Token t : l) {
        if (t < 0 || static_cast<std::size_t>(t) >= vocab_size) {
          throw InvalidArgument("cyclic loop token outside vocabulary");
        }
      }
      break;
    }
    case OracleKind::kCopyMix:
      if (!(copy_prob >= 0.0 && copy_prob <= 1.0)) {
        throw InvalidArgument("copy_prob must lie in [0, 1]");
      }
      if (min_match == 0) throw InvalidArgument("min_match must be >= 1");
      [[fallthrough]];
    case OracleKind::kHashedMarkov:
      if (order == 0) throw InvalidArgument("hashed-markov order must be >= 1");
      if (!(concentration >= 0.0)) throw InvalidArgument("concentration must be >= 0");
      if (!(perturb >= 0.0 && perturb <= 1.0)) throw InvalidArgument("perturb must lie in [0, 1]");
      break;
  }
}

std::vector<Token> SyntheticOracleSpec::cyclic_loop() const {
  if (!loop.empty()) return loop;
  std::vector<Token> l(period);
  std::iota(l.begin(), l.end(), offset);
  return l;
}

CyclicOracle::CyclicOracle(const SyntheticOracleSpec& spec)
    : vocab_size_(spec.vocab_size), loop_(spec.cyclic_loop()), position_(spec.vocab_size, -1) {
  spec.validate();
  set_max_context(spec.max_context);
  for (std::size_t i = 0; i < loop_.size(); ++i) {
    position_[static_cast<std::size_t>(loop_[i])] = static_cast<int>(i);
  }
}

Distribution CyclicOracle::compute(std::span<const Token> ctx) const {
  const Token last = ctx.back();
  int pos = -1;
  if (last >= 0 && static_cast<std::size_t>(last) < vocab_size_) {
    pos = position_[static_cast<std::size_t>(last)];
  }
  const Token next = pos < 0 ? loop_.front() : loop_[(static_cast<std::size_t>(pos) + 1) % loop_.size()];
  return Distribution::point_mass(vocab_size_, next);
}

HashedMarkovOracle::HashedMarkovOracle(const SyntheticOracleSpec& spec) : spec_(spec) {
  spec_.validate();
  set_max_context(spec.max_context);
  rank_weights_.resize(spec_.vocab_size);
  double sum = 0.0;
  for (std::size_t r = 0; r < rank_weights_.size(); ++r) {
    rank_weights_[r] = std::pow(static_cast<double>(r + 1), -spec_.concentration);
    sum += rank_weights_[r];
  }
  for (double& w : rank_weights_) w /= sum;
}

Distribution HashedMarkovOracle::compute(std::span<const Token> ctx) const {
  const std::size_t k = std::min(spec_.order, ctx.size());
  const std::uint64_t state = hash_tokens(spec_.seed, ctx.last(k));

  std::uint64_t shuffle_key = state;
  if (spec_.perturb > 0.0) {
    const std::uint64_t h = splitmix64(state ^ spec_.perturb_seed);
    if (static_cast<double>(h >> 11) * 0x1.0p-53 < spec_.perturb) {
      shuffle_key = splitmix64(h);
    }
  }

  // Fisher-Yates over token ids: ranking[r] is the token holding rank r.
  std::vector<Token> ranking(spec_.vocab_size);
  std::iota(ranking.begin(), ranking.end(), 0);
  Rng rng(shuffle_key);
  for (std::size_t i = ranking.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(ranking[i - 1], ranking[j]);
  }

  std::vector<double> probs(spec_.vocab_size);
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    probs[static_cast<std::size_t>(ranking[r])] = rank_weights_[r];
  }
  return Distribution(std::move(probs));
}

SuffixMatch longest_earlier_suffix(std::span<const Token> seq) {
  // Z-function over the reversed sequence: z[i] is the common suffix length
  // of seq and seq[0, n - i).
  const std::size_t n = seq.size();
  SuffixMatch best;
  if (n < 2) return best;
  auto rev = [&](std::size_t i) { return seq[n - 1 - i]; };
  std::vector<std::size_t> z(n, 0);
  std::size_t l = 0, r = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (i < r) z[i] = std::min(r - i, z[i - l]);
    while (i + z[i] < n && rev(z[i]) == rev(i + z[i])) ++z[i];
    if (i + z[i] > r) {
      l = i;
      r = i + z[i];
    }
    // Larger i is an earlier end position, so >= keeps the earliest on ties.
    if (z[i] > 0 && z[i] >= best.length) {
      best.length = z[i];
      best.end = n - 1 - i;
    }
  }
  return best;
}

CopyMixOracle::CopyMixOracle(const SyntheticOracleSpec& spec) : spec_(spec), fallback_(spec) {
  set_max_context(spec.max_context);
}

bool CopyMixOracle::gate(std::span<const Token> ctx) const {
  if (spec_.copy_prob >= 1.0) return true;
  if (spec_.copy_prob <= 0.0) return false;
  std::uint64_t h;
  if (spec_.segment_len > 0) {
    const std::uint64_t block = ctx.size() / spec_.segment_len;
    h = splitmix64(splitmix64(spec_.seed ^ 0xC0FFEEULL) ^ block);
  } else {
    const std::size_t k = std::min(spec_.order, ctx.size());
    h = hash_tokens(spec_.seed ^ 0xC0FFEEULL, ctx.last(k));
  }
  return static_cast<double>(h >> 11) * 0x1.0p-53 < spec_.copy_prob;
}

Distribution CopyMixOracle::compute(std::span<const Token> ctx) const {
  if (gate(ctx)) {
    const SuffixMatch m = longest_earlier_suffix(ctx);
    if (m.length >= spec_.min_match) {
      return Distribution::point_mass(spec_.vocab_size, ctx[m.end + 1]);
    }
  }
  return fallback_.compute(ctx);
}

std::unique_ptr<TokenOracle> make_oracle(const SyntheticOracleSpec& spec) {
  switch (spec.kind) {
    case OracleKind::kCyclic: return std::make_unique<CyclicOracle>(spec);
    case OracleKind::kHashedMarkov: return std::make_unique<HashedMarkovOracle>(spec);
    case OracleKind::kCopyMix: return std::make_unique<CopyMixOracle>(spec);
  }
  throw InvalidArgument("unknown oracle kind");
}

}  // namespace specbench
