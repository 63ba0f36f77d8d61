#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "token_core.hpp"

namespace specbench {

enum class Method {
  kNone,
  kSpS,
  kEagle,  // learned-drafter slot (tree drafts from a small oracle)
  kPld,
  kRest,
  kLookahead,
  kPia,
  kSam,
  kRecycling,
  kHybrid,
};

std::string to_string(Method m);
Method method_from_string(const std::string& name);
/// The eight drafting methods plus the hybrid.
const std::vector<Method>& all_speculative_methods();

enum class DraftShape { kLinear, kTree };

struct DrafterCapabilities {
  DraftShape speculation = DraftShape::kLinear;
  bool reuse = false;
  bool supports_greedy = true;
  bool supports_sampling = true;

  friend bool operator==(const DrafterCapabilities&, const DrafterCapabilities&) = default;
};

/// Drafting/verification capability row for a method.
DrafterCapabilities capabilities_of(Method m);

struct DraftNode {
  Token token = 0;
  std::int32_t parent = -1;  // -1: first draft position
  double q = 1.0;            // proposal probability of `token`
  /// Index into Draft::proposals when the token was sampled from a proposal
  /// distribution; -1 when it was chosen deterministically (point mass).
  std::int32_t proposal = -1;
};

/// A proposed continuation. Linear drafts are chains (parent = i - 1). Nodes
/// are stored parents first.
struct Draft {
  DraftShape shape = DraftShape::kLinear;
  std::vector<DraftNode> nodes;
  std::vector<Distribution> proposals;
  Method origin = Method::kNone;
  std::size_t match_len = 0;

  bool empty() const { return nodes.empty(); }
  std::size_t size() const { return nodes.size(); }

  static Draft linear(Method origin, const std::vector<Token>& tokens, std::size_t match_len = 0);

  /// Children of `parent` (-1 for the first layer), in insertion order.
  std::vector<std::int32_t> children(std::int32_t parent) const;
  std::size_t depth() const;
  /// Throws InvalidArgument when the structural invariants fail.
  void validate(std::size_t budget, std::size_t vocab_size) const;
};

}  // namespace specbench
