// Shared scaffolding for building oracles and drafters in tests.
#pragma once

#include <memory>
#include <vector>

#include "drafters.hpp"
#include "synthetic_oracles.hpp"

namespace specbench::ref {

inline SyntheticOracleSpec oracle_spec(OracleKind kind, std::size_t vocab, std::uint64_t seed,
                                       std::size_t order = 2) {
  SyntheticOracleSpec s;
  s.kind = kind;
  s.vocab_size = vocab;
  s.seed = seed;
  s.order = order;
  if (kind == OracleKind::kCyclic) s.period = std::min<std::size_t>(4, vocab);
  return s;
}

/// A drafting oracle that disagrees with `target` on some states.
inline SyntheticOracleSpec small_oracle_spec(const SyntheticOracleSpec& target, double perturb = 0.3) {
  SyntheticOracleSpec s = target;
  if (s.kind == OracleKind::kCopyMix) s.kind = OracleKind::kHashedMarkov;
  if (s.kind == OracleKind::kCyclic) {
    s.kind = OracleKind::kHashedMarkov;
    s.order = 1;
  }
  s.perturb = perturb;
  return s;
}

/// Corpus that shares material with what the oracle generates.
inline std::vector<Token> corpus_from(const TokenOracle& oracle, std::vector<Token> seed_ctx, std::size_t n) {
  std::vector<Token> out = seed_ctx;
  for (std::size_t i = 0; i < n; ++i) {
    const Token t = oracle.next(out).argmax();
    out.push_back(t);
  }
  return out;
}

struct DrafterKit {
  DrafterResources resources;
  DrafterParams params;
};

inline DrafterKit make_kit(const SyntheticOracleSpec& target, std::vector<Token> corpus) {
  DrafterKit kit;
  kit.resources.draft_oracle = make_oracle(small_oracle_spec(target));
  kit.resources.datastore = std::make_shared<CorpusDatastore>(std::move(corpus));
  return kit;
}

}  // namespace specbench::ref
