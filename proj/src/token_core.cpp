#include "token_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "errors.hpp"

namespace specbench {

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {}

Distribution Distribution::point_mass(std::size_t vocab_size, Token token) {
  if (token < 0 || static_cast<std::size_t>(token) >= vocab_size) {
    throw InvalidArgument("point mass token " + std::to_string(token) + " outside vocabulary of " +
                          std::to_string(vocab_size));
  }
  std::vector<double> p(vocab_size, 0.0);
  p[static_cast<std::size_t>(token)] = 1.0;
  return Distribution(std::move(p));
}

Distribution Distribution::uniform(std::size_t vocab_size) {
  return Distribution(std::vector<double>(vocab_size, 1.0 / static_cast<double>(vocab_size)));
}

Token Distribution::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs_.size(); ++i) {
    if (probs_[i] > probs_[best]) best = i;
  }
  return static_cast<Token>(best);
}

std::vector<Token> Distribution::top_k(std::size_t k) const {
  std::vector<Token> ids(probs_.size());
  std::iota(ids.begin(), ids.end(), 0);
  k = std::min(k, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(),
                    [this](Token a, Token b) {
                      const double pa = probs_[static_cast<std::size_t>(a)];
                      const double pb = probs_[static_cast<std::size_t>(b)];
                      return pa != pb ? pa > pb : a < b;
                    });
  ids.resize(k);
  return ids;
}

bool Distribution::is_point_mass() const {
  return std::count_if(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; }) == 1;
}

void Distribution::validate(double tol) const {
  if (probs_.empty()) throw InvalidArgument("empty distribution");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw InvalidArgument("negative or NaN probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > tol) {
    throw InvalidArgument("distribution sums to " + std::to_string(sum));
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_tokens(std::uint64_t seed, std::span<const Token> tokens) {
  std::uint64_t h = splitmix64(seed ^ 0x6A09E667F3BCC909ULL);
  for (Token t : tokens) {
    h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(t)));
  }
  return h;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : key_(splitmix64(seed ^ splitmix64(stream))) {}

std::uint64_t Rng::next_u64() {
  ++counter_;
  // splitmix64 adds the golden-ratio increment itself, so this is
  // splitmix64(key + counter * increment) in closed form.
  return splitmix64(key_ + (counter_ - 1) * 0x9E3779B97F4A7C15ULL);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

Distribution apply_policy(const Distribution& dist, const DecodePolicy& policy) {
  if (policy.greedy()) return Distribution::point_mass(dist.size(), dist.argmax());
  if (policy.temperature == 1.0) return dist;

  const auto p = dist.probs();
  std::vector<double> out(p.size(), 0.0);
  double max_logit = -std::numeric_limits<double>::infinity();
  for (double v : p) {
    if (v > 0.0) max_logit = std::max(max_logit, std::log(v) / policy.temperature);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      out[i] = std::exp(std::log(p[i]) / policy.temperature - max_logit);
      sum += out[i];
    }
  }
  for (double& v : out) v /= sum;
  return Distribution(std::move(out));
}

Token sample(const Distribution& dist, Rng& rng) {
  const double u = rng.uniform();
  const auto p = dist.probs();
  double cdf = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    cdf += p[i];
    last_nonzero = i;
    if (u < cdf) return static_cast<Token>(i);
  }
  // Rounding left u above the accumulated mass.
  return static_cast<Token>(last_nonzero);
}

Distribution TokenOracle::next(std::span<const Token> ctx) const {
  if (ctx.empty()) throw InvalidArgument("oracle queried with an empty context");
  if (ctx.size() > max_context_) {
    throw ContextTooLong("context of " + std::to_string(ctx.size()) + " tokens exceeds limit " +
                         std::to_string(max_context_));
  }
  return compute(ctx);
}

}  // namespace specbench
