#include "draft.hpp"

#include <algorithm>

#include "errors.hpp"

namespace specbench {

std::string to_string(Method m) {
  switch (m) {
    case Method::kNone: return "ar";
    case Method::kSpS: return "sps";
    case Method::kEagle: return "eagle";
    case Method::kPld: return "pld";
    case Method::kRest: return "rest";
    case Method::kLookahead: return "lookahead";
    case Method::kPia: return "pia";
    case Method::kSam: return "sam";
    case Method::kRecycling: return "recycling";
    case Method::kHybrid: return "sam-hybrid";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  static const std::vector<Method> kAll = {Method::kNone, Method::kSpS,       Method::kEagle,
                                           Method::kPld,  Method::kRest,      Method::kLookahead,
                                           Method::kPia,  Method::kSam,       Method::kRecycling,
                                           Method::kHybrid};
  for (Method m : kAll) {
    if (to_string(m) == name) return m;
  }
  if (name == "none" || name == "autoregressive") return Method::kNone;
  throw InvalidArgument("unknown method '" + name + "'");
}

const std::vector<Method>& all_speculative_methods() {
  static const std::vector<Method> kMethods = {Method::kSpS,       Method::kEagle, Method::kPld,
                                               Method::kRest,      Method::kLookahead,
                                               Method::kPia,       Method::kSam,   Method::kRecycling,
                                               Method::kHybrid};
  return kMethods;
}

DrafterCapabilities capabilities_of(Method m) {
  using enum DraftShape;
  switch (m) {
    case Method::kNone: return {kLinear, false, true, true};
    case Method::kSpS: return {kLinear, false, true, true};
    case Method::kEagle: return {kTree, false, true, true};
    case Method::kPld: return {kLinear, false, true, false};
    case Method::kRest: return {kTree, false, true, true};
    case Method::kLookahead: return {kTree, true, true, false};
    case Method::kPia: return {kTree, true, true, true};
    case Method::kSam: return {kLinear, true, true, true};
    case Method::kRecycling: return {kTree, false, true, true};
    // Either component may fire; drafts carry the shape of whichever did.
    case Method::kHybrid: return {kTree, true, true, true};
  }
  throw InvalidArgument("unknown method");
}

Draft Draft::linear(Method origin, const std::vector<Token>& tokens, std::size_t match_len) {
  Draft d;
  d.shape = DraftShape::kLinear;
  d.origin = origin;
  d.match_len = match_len;
  d.nodes.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    d.nodes.push_back(DraftNode{tokens[i], static_cast<std::int32_t>(i) - 1, 1.0, -1});
  }
  return d;
}

std::vector<std::int32_t> Draft::children(std::int32_t parent) const {
  std::vector<std::int32_t> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].parent == parent) out.push_back(static_cast<std::int32_t>(i));
  }
  return out;
}

std::size_t Draft::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    d[i] = nodes[i].parent < 0 ? 1 : d[static_cast<std::size_t>(nodes[i].parent)] + 1;
    best = std::max(best, d[i]);
  }
  return best;
}

void Draft::validate(std::size_t budget, std::size_t vocab_size) const {
  if (nodes.size() > budget) throw InvalidArgument("draft exceeds its node budget");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const DraftNode& n = nodes[i];
    if (n.parent >= static_cast<std::int32_t>(i) || n.parent < -1) {
      throw InvalidArgument("draft parents must precede their children");
    }
    if (shape == DraftShape::kLinear && n.parent != static_cast<std::int32_t>(i) - 1) {
      throw InvalidArgument("linear draft is not a chain");
    }
    if (n.token < 0 || static_cast<std::size_t>(n.token) >= vocab_size) {
      throw InvalidArgument("draft token outside vocabulary");
    }
    if (!(n.q >= 0.0 && n.q <= 1.0)) throw InvalidArgument("draft q outside [0, 1]");
    if (n.proposal >= static_cast<std::int32_t>(proposals.size())) {
      throw InvalidArgument("draft proposal index out of range");
    }
  }
}

}  // namespace specbench
