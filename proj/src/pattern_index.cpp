#include "pattern_index.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <deque>
#include <fstream>
#include <queue>
#include <sstream>
#include <tuple>

#include "errors.hpp"

namespace specbench {

// ---------------------------------------------------------------------------
// SuffixAutomaton

SuffixAutomaton::SuffixAutomaton() { states_.emplace_back(); }

void SuffixAutomaton::extend(Token t) {
  stream_.push_back(t);
  const std::size_t pos = stream_.size() - 1;

  const auto cur = static_cast<std::int32_t>(states_.size());
  states_.push_back(State{states_[last_].len + 1, -1, pos, {}});

  std::int32_t p = last_;
  while (p != -1 && !states_[p].next.contains(t)) {
    states_[p].next.emplace(t, cur);
    p = states_[p].link;
  }
  if (p == -1) {
    states_[cur].link = 0;
  } else {
    const std::int32_t q = states_[p].next.at(t);
    if (states_[p].len + 1 == states_[q].len) {
      states_[cur].link = q;
    } else {
      const auto clone = static_cast<std::int32_t>(states_.size());
      State copy = states_[q];
      copy.len = states_[p].len + 1;
      states_.push_back(std::move(copy));
      while (p != -1) {
        auto it = states_[p].next.find(t);
        if (it == states_[p].next.end() || it->second != q) break;
        it->second = clone;
        p = states_[p].link;
      }
      states_[q].link = clone;
      states_[cur].link = clone;
    }
  }
  last_ = cur;

  const State& m = states_[states_[cur].link];
  match_len_ = m.len;
  match_end_ = m.first_end;
}

std::vector<Token> SuffixAutomaton::continuation(std::size_t max_len) const {
  std::vector<Token> out;
  if (match_len_ == 0) return out;
  const std::size_t n = stream_.size();
  out.reserve(max_len);
  for (std::size_t i = 0; i < max_len; ++i) {
    const std::size_t pos = match_end_ + 1 + i;
    out.push_back(pos < n ? stream_[pos] : out[pos - n]);
  }
  return out;
}

bool SuffixAutomaton::contains(std::span<const Token> pattern) const {
  std::int32_t s = 0;
  for (Token t : pattern) {
    auto it = states_[s].next.find(t);
    if (it == states_[s].next.end()) return false;
    s = it->second;
  }
  return true;
}

// ---------------------------------------------------------------------------
// TokenTree

std::vector<Token> TokenTree::path(std::size_t node) const {
  std::vector<Token> out;
  for (auto i = static_cast<std::int32_t>(node); i >= 0; i = nodes[static_cast<std::size_t>(i)].parent) {
    out.push_back(nodes[static_cast<std::size_t>(i)].token);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

void TokenTree::insert_path(std::span<const Token> seq, std::size_t budget, std::uint64_t weight) {
  std::int32_t parent = -1;
  for (Token t : seq) {
    std::int32_t found = -1;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].parent == parent && nodes[i].token == t) {
        found = static_cast<std::int32_t>(i);
        break;
      }
    }
    if (found < 0) {
      if (nodes.size() >= budget) return;
      nodes.push_back(Node{t, parent, weight});
      found = static_cast<std::int32_t>(nodes.size() - 1);
    } else {
      nodes[static_cast<std::size_t>(found)].weight += weight;
    }
    parent = found;
  }
}

// ---------------------------------------------------------------------------
// ContextTrie

ContextTrie::ContextTrie(std::size_t capacity) : capacity_(capacity) {
  nodes_.emplace_back();
  nodes_[0].live = true;
}

std::int32_t ContextTrie::alloc(Token token, std::int32_t parent) {
  std::int32_t id;
  if (!free_.empty()) {
    id = free_.back();
    free_.pop_back();
    nodes_[static_cast<std::size_t>(id)] = Node{};
  } else {
    id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
  }
  Node& n = nodes_[static_cast<std::size_t>(id)];
  n.token = token;
  n.parent = parent;
  n.live = true;
  ++live_nodes_;
  return id;
}

void ContextTrie::insert_window(std::span<const Token> window) {
  std::int32_t cur = 0;
  for (Token t : window) {
    auto& children = nodes_[static_cast<std::size_t>(cur)].children;
    auto it = children.find(t);
    std::int32_t child;
    if (it == children.end()) {
      child = alloc(t, cur);
      nodes_[static_cast<std::size_t>(cur)].children.emplace(t, child);
    } else {
      child = it->second;
    }
    ++nodes_[static_cast<std::size_t>(child)].count;
    cur = child;
  }
  ++windows_inserted_;
}

std::int32_t ContextTrie::find_path(std::span<const Token> path) const {
  std::int32_t cur = 0;
  for (Token t : path) {
    const auto& children = nodes_[static_cast<std::size_t>(cur)].children;
    auto it = children.find(t);
    if (it == children.end()) return -1;
    cur = it->second;
  }
  return cur;
}

ContextTrie::Lookup ContextTrie::lookup(std::span<const Token> tail, std::size_t budget,
                                        std::size_t max_match) const {
  Lookup out;
  for (std::size_t m = std::min(max_match, tail.size()); m >= 1; --m) {
    const std::int32_t hit = find_path(tail.last(m));
    if (hit < 0 || nodes_[static_cast<std::size_t>(hit)].children.empty()) continue;

    out.match_len = m;
    std::deque<std::pair<std::int32_t, std::int32_t>> queue;  // (trie node, tree parent)
    queue.emplace_back(hit, -1);
    while (!queue.empty() && out.tree.size() < budget) {
      const auto [node, tree_parent] = queue.front();
      queue.pop_front();
      std::vector<std::int32_t> kids;
      for (const auto& [tok, child] : nodes_[static_cast<std::size_t>(node)].children) {
        kids.push_back(child);
      }
      std::stable_sort(kids.begin(), kids.end(), [this](std::int32_t a, std::int32_t b) {
        return nodes_[static_cast<std::size_t>(a)].count > nodes_[static_cast<std::size_t>(b)].count;
      });
      for (std::int32_t child : kids) {
        if (out.tree.size() >= budget) break;
        const Node& c = nodes_[static_cast<std::size_t>(child)];
        out.tree.nodes.push_back(TokenTree::Node{c.token, tree_parent, c.count});
        queue.emplace_back(child, static_cast<std::int32_t>(out.tree.size() - 1));
      }
    }
    break;
  }
  return out;
}

void ContextTrie::prune() {
  if (live_nodes_ <= capacity_) return;
  using Entry = std::tuple<std::uint64_t, std::int32_t>;  // (count, id)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> leaves;
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (nodes_[i].live && nodes_[i].children.empty()) {
      leaves.emplace(nodes_[i].count, static_cast<std::int32_t>(i));
    }
  }
  while (live_nodes_ > capacity_ && !leaves.empty()) {
    const auto [count, id] = leaves.top();
    leaves.pop();
    Node& n = nodes_[static_cast<std::size_t>(id)];
    const std::int32_t parent = n.parent;
    nodes_[static_cast<std::size_t>(parent)].children.erase(n.token);
    n.live = false;
    n.children.clear();
    free_.push_back(id);
    --live_nodes_;
    if (parent != 0 && nodes_[static_cast<std::size_t>(parent)].children.empty()) {
      leaves.emplace(nodes_[static_cast<std::size_t>(parent)].count, parent);
    }
  }
}

std::vector<std::vector<Token>> ContextTrie::paths() const {
  std::vector<std::vector<Token>> out;
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!nodes_[i].live) continue;
    std::vector<Token> p;
    for (auto n = static_cast<std::int32_t>(i); n > 0; n = nodes_[static_cast<std::size_t>(n)].parent) {
      p.push_back(nodes_[static_cast<std::size_t>(n)].token);
    }
    std::reverse(p.begin(), p.end());
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// NgramTable

NgramTable::NgramTable(std::size_t min_n, std::size_t max_n) : min_n_(min_n), max_n_(max_n) {
  if (min_n_ == 0 || max_n_ < min_n_) throw InvalidArgument("n-gram range must satisfy 1 <= min_n <= max_n");
}

void NgramTable::append(Token t) {
  tokens_.push_back(t);
  const std::size_t p = tokens_.size() - 1;
  // Every key ending at p - 1 now has a following token at p.
  for (std::size_t n = min_n_; n <= max_n_ && n <= p; ++n) {
    std::vector<Token> key(tokens_.begin() + static_cast<std::ptrdiff_t>(p - n),
                           tokens_.begin() + static_cast<std::ptrdiff_t>(p));
    index_[std::move(key)].push_back(p);
  }
}

NgramTable::Match NgramTable::lookup(std::span<const Token> ctx_tail, std::size_t min_position) const {
  Match m;
  for (std::size_t n = std::min(max_n_, ctx_tail.size()); n >= min_n_ && n >= 1; --n) {
    const auto key = ctx_tail.last(n);
    auto it = index_.find(std::vector<Token>(key.begin(), key.end()));
    if (it == index_.end()) continue;
    for (std::size_t pos : it->second) {
      if (pos >= min_position) m.positions.push_back(pos);
    }
    if (!m.positions.empty()) {
      m.key_len = n;
      return m;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// CorpusDatastore

std::vector<std::uint32_t> build_suffix_array(std::span<const Token> text) {
  const std::size_t n = text.size();
  std::vector<std::uint32_t> sa(n);
  std::vector<std::int64_t> rank(n), tmp(n);
  for (std::size_t i = 0; i < n; ++i) {
    sa[i] = static_cast<std::uint32_t>(i);
    rank[i] = text[i];
  }
  if (n <= 1) return sa;
  for (std::size_t k = 1;; k <<= 1) {
    auto key = [&](std::uint32_t i) {
      return std::pair<std::int64_t, std::int64_t>(rank[i], i + k < n ? rank[i + k] : -1);
    };
    std::sort(sa.begin(), sa.end(), [&](std::uint32_t a, std::uint32_t b) { return key(a) < key(b); });
    tmp[sa[0]] = 0;
    for (std::size_t i = 1; i < n; ++i) {
      tmp[sa[i]] = tmp[sa[i - 1]] + (key(sa[i - 1]) < key(sa[i]) ? 1 : 0);
    }
    rank.swap(tmp);
    if (rank[sa[n - 1]] == static_cast<std::int64_t>(n - 1) || k >= n) break;
  }
  return sa;
}

CorpusDatastore::CorpusDatastore(std::vector<Token> corpus)
    : corpus_(std::move(corpus)), sa_(build_suffix_array(corpus_)) {
  for (Token t : corpus_) {
    if (t < 0) throw InvalidArgument("corpus token ids must be non-negative");
  }
}

namespace {
constexpr std::array<char, 8> kCorpusMagic = {'S', 'B', 'C', 'O', 'R', 'P', 'U', 'S'};
constexpr std::uint32_t kCorpusVersion = 1;
}  // namespace

CorpusDatastore CorpusDatastore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() == static_cast<std::streamsize>(magic.size()) && magic == kCorpusMagic) {
    std::uint32_t version = 0, reserved = 0;
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&reserved), sizeof reserved);
    in.read(reinterpret_cast<char*>(&count), sizeof count);
    if (!in || version != kCorpusVersion) {
      throw SchemaError("unsupported binary corpus header in " + path.string());
    }
    std::vector<Token> tokens(count);
    in.read(reinterpret_cast<char*>(tokens.data()),
            static_cast<std::streamsize>(count * sizeof(Token)));
    if (!in) throw SchemaError("truncated binary corpus " + path.string());
    return CorpusDatastore(std::move(tokens));
  }

  in.clear();
  in.seekg(0);
  std::vector<Token> tokens;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string word;
    while (ss >> word) {
      std::size_t used = 0;
      long v = -1;
      try {
        v = std::stol(word, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != word.size() || v < 0 || v > INT32_MAX) {
        throw SchemaError("invalid token id '" + word + "'", lineno);
      }
      tokens.push_back(static_cast<Token>(v));
    }
  }
  return CorpusDatastore(std::move(tokens));
}

void CorpusDatastore::save_binary(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus file " + path.string());
  const std::uint32_t version = kCorpusVersion, reserved = 0;
  const std::uint64_t count = corpus_.size();
  out.write(kCorpusMagic.data(), kCorpusMagic.size());
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&reserved), sizeof reserved);
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  out.write(reinterpret_cast<const char*>(corpus_.data()),
            static_cast<std::streamsize>(corpus_.size() * sizeof(Token)));
}

std::pair<std::size_t, std::size_t> CorpusDatastore::range(std::span<const Token> pattern) const {
  const std::size_t n = corpus_.size();
  // -1 / 0 / +1 comparing the suffix's first |pattern| tokens with pattern.
  auto cmp = [&](std::uint32_t start) {
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      if (start + i >= n) return -1;
      if (corpus_[start + i] != pattern[i]) return corpus_[start + i] < pattern[i] ? -1 : 1;
    }
    return 0;
  };
  const auto lo = std::partition_point(sa_.begin(), sa_.end(), [&](std::uint32_t s) { return cmp(s) < 0; });
  const auto hi = std::partition_point(lo, sa_.end(), [&](std::uint32_t s) { return cmp(s) == 0; });
  return {static_cast<std::size_t>(lo - sa_.begin()), static_cast<std::size_t>(hi - sa_.begin())};
}

CorpusDatastore::Retrieval CorpusDatastore::retrieve(std::span<const Token> ctx_tail, std::size_t k,
                                                     std::size_t cont_len, std::size_t max_match) const {
  if (corpus_.empty()) throw EmptyDatastore("retrieval datastore holds no tokens");
  Retrieval out;
  const std::size_t n = corpus_.size();
  for (std::size_t len = std::min(max_match, ctx_tail.size()); len >= 1; --len) {
    const auto [lo, hi] = range(ctx_tail.last(len));
    std::vector<std::size_t> starts;
    for (std::size_t i = lo; i < hi; ++i) {
      const std::size_t after = sa_[i] + len;
      if (after < n) starts.push_back(after);
    }
    if (starts.empty()) continue;
    std::sort(starts.begin(), starts.end());
    out.match_len = len;
    for (std::size_t s : starts) {
      if (out.continuations.size() >= k) break;
      const std::size_t end = std::min(n, s + cont_len);
      std::vector<Token> c(corpus_.begin() + static_cast<std::ptrdiff_t>(s),
                           corpus_.begin() + static_cast<std::ptrdiff_t>(end));
      if (std::find(out.continuations.begin(), out.continuations.end(), c) == out.continuations.end()) {
        out.continuations.push_back(std::move(c));
      }
    }
    break;
  }
  return out;
}

}  // namespace specbench
