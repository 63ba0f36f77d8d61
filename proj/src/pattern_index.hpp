#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "token_core.hpp"

namespace specbench {

/// Online suffix automaton over one token stream (prompt, then generation).
///
/// Besides the usual transitions/suffix links every state keeps the earliest
/// end position of its right-context class. The match cursor is the suffix
/// link of the last state: its length is the longest suffix of the stream
/// that also ends at an earlier position, and its annotation is the earliest
/// such end position.
class SuffixAutomaton {
 public:
  SuffixAutomaton();

  void extend(Token t);
  void extend(std::span<const Token> ts) {
    for (Token t : ts) extend(t);
  }

  /// Length of the longest suffix with an earlier occurrence (0 if none).
  std::size_t match_length() const { return match_len_; }
  /// Earliest end position of that suffix; only meaningful when matched.
  std::size_t match_end() const { return match_end_; }

  /// Up to max_len tokens that followed the earliest earlier occurrence of
  /// the current match. Reads past the end of the stream wrap into the
  /// continuation itself, so a learned period repeats.
  std::vector<Token> continuation(std::size_t max_len) const;

  /// True when `pattern` is a substring of the ingested stream.
  bool contains(std::span<const Token> pattern) const;

  std::size_t state_count() const { return states_.size(); }
  std::size_t size() const { return stream_.size(); }
  std::span<const Token> stream() const { return stream_; }

 private:
  struct State {
    std::size_t len = 0;
    std::int32_t link = -1;
    std::size_t first_end = 0;
    std::map<Token, std::int32_t> next;
  };

  std::vector<State> states_;
  std::vector<Token> stream_;
  std::int32_t last_ = 0;
  std::size_t match_len_ = 0;
  std::size_t match_end_ = 0;
};

/// Token tree returned by trie/retrieval lookups. Nodes are stored parents
/// first; parent == -1 marks the first layer.
struct TokenTree {
  struct Node {
    Token token;
    std::int32_t parent;
    std::uint64_t weight;
  };
  std::vector<Node> nodes;

  bool empty() const { return nodes.empty(); }
  std::size_t size() const { return nodes.size(); }
  /// Tokens on the path from the first layer down to `node`, inclusive.
  std::vector<Token> path(std::size_t node) const;
  /// Inserts `seq` as a path, merging shared prefixes. Stops once the tree
  /// holds `budget` nodes.
  void insert_path(std::span<const Token> seq, std::size_t budget, std::uint64_t weight = 1);
};

/// Frequency-counted trie of token windows with capacity-bounded pruning.
class ContextTrie {
 public:
  explicit ContextTrie(std::size_t capacity = 1 << 16);

  /// Inserts `window` as a root path; every node on the path gains one count.
  void insert_window(std::span<const Token> window);

  /// Finds the longest suffix of `tail` (at most max_match tokens) that is a
  /// root path and returns up to `budget` continuation nodes below it,
  /// expanded breadth-first with higher-frequency children first.
  struct Lookup {
    std::size_t match_len = 0;
    TokenTree tree;
  };
  Lookup lookup(std::span<const Token> tail, std::size_t budget, std::size_t max_match = 8) const;

  /// Evicts lowest-frequency leaves first until node count <= capacity.
  void prune();

  /// Nodes below the root.
  std::size_t node_count() const { return live_nodes_; }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t windows_inserted() const { return windows_inserted_; }

  /// Root paths of all live nodes (test support).
  std::vector<std::vector<Token>> paths() const;

 private:
  struct Node {
    Token token = 0;
    std::int32_t parent = -1;
    std::uint64_t count = 0;
    std::map<Token, std::int32_t> children;
    bool live = false;
  };

  std::int32_t alloc(Token token, std::int32_t parent);
  std::int32_t find_path(std::span<const Token> path) const;

  std::vector<Node> nodes_;  // nodes_[0] is the root
  std::vector<std::int32_t> free_;
  std::size_t capacity_;
  std::size_t live_nodes_ = 0;
  std::uint64_t windows_inserted_ = 0;
};

/// Map from n-gram keys (length in [min_n, max_n]) to continuation positions
/// over an appendable token buffer.
class NgramTable {
 public:
  NgramTable(std::size_t min_n = 1, std::size_t max_n = 3);

  void append(Token t);
  void append(std::span<const Token> ts) {
    for (Token t : ts) append(t);
  }

  struct Match {
    std::size_t key_len = 0;
    /// Positions (ascending) of the token that followed each occurrence.
    std::vector<std::size_t> positions;
  };
  /// The longest key in [min_n, max_n] that is a suffix of ctx_tail and has
  /// at least one occurrence followed by a token. Only positions >=
  /// min_position are reported.
  Match lookup(std::span<const Token> ctx_tail, std::size_t min_position = 0) const;

  std::span<const Token> tokens() const { return tokens_; }
  std::size_t min_n() const { return min_n_; }
  std::size_t max_n() const { return max_n_; }

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<Token>& k) const {
      return static_cast<std::size_t>(hash_tokens(0, k));
    }
  };

  std::size_t min_n_;
  std::size_t max_n_;
  std::vector<Token> tokens_;
  std::unordered_map<std::vector<Token>, std::vector<std::size_t>, KeyHash> index_;
};

/// Immutable token corpus with a suffix array.
class CorpusDatastore {
 public:
  explicit CorpusDatastore(std::vector<Token> corpus);

  /// Text (whitespace-separated ids) or binary (see docs/corpus-format.md).
  static CorpusDatastore load(const std::filesystem::path& path);
  void save_binary(const std::filesystem::path& path) const;

  struct Retrieval {
    std::size_t match_len = 0;
    std::vector<std::vector<Token>> continuations;
  };
  /// Continuations of length <= cont_len after the longest suffix of ctx_tail
  /// (at most max_match tokens) found in the corpus; up to k of them, ordered
  /// by corpus position. Throws EmptyDatastore on an empty corpus.
  Retrieval retrieve(std::span<const Token> ctx_tail, std::size_t k, std::size_t cont_len,
                     std::size_t max_match = 16) const;

  std::span<const Token> corpus() const { return corpus_; }
  std::span<const std::uint32_t> suffix_array() const { return sa_; }

 private:
  std::pair<std::size_t, std::size_t> range(std::span<const Token> pattern) const;

  std::vector<Token> corpus_;
  std::vector<std::uint32_t> sa_;
};

/// Prefix-doubling suffix array construction, O(n log^2 n).
std::vector<std::uint32_t> build_suffix_array(std::span<const Token> text);

}  // namespace specbench
