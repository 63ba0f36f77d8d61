#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "drafters.hpp"
#include "engine.hpp"
#include "synthetic_oracles.hpp"

namespace specbench {

struct BonConfig {
  std::size_t n = 1;
  std::string scorer = "majority";
};

struct MultiRoundConfig {
  std::size_t rounds = 1;
};

/// How round prompts are assembled and answers are read back out.
struct PromptingConfig {
  std::vector<Token> assistant_prefix;  // appended to every round's prompt
  std::optional<Token> answer_marker;
  std::size_t answer_fallback_len = 16;
};

struct DatastoreConfig {
  std::optional<std::filesystem::path> path;
  std::size_t generated_tokens = 4096;  // used when no path is given
  std::uint64_t generator_seed = 1;
};

struct TimingConfig {
  std::size_t warmup_steps = 3;
  std::size_t repetitions = 3;
};

struct BenchmarkConfig {
  std::string name = "benchmark";
  Method method = Method::kSam;
  DrafterParams params;
  SyntheticOracleSpec oracle;
  std::optional<SyntheticOracleSpec> draft_oracle;
  DatastoreConfig datastore;
  DecodePolicy policy;
  BonConfig bon;
  MultiRoundConfig multi_round;
  StopCondition stop;
  PromptingConfig prompting;
  TimingConfig timing;
  std::filesystem::path dataset;
  std::filesystem::path output = "results";

  /// Structural checks plus the capability matrix. Throws.
  void validate() const;
};

/// Parses the JSON config format documented in docs/config.md. Relative paths
/// resolve against `base_dir`.
BenchmarkConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
BenchmarkConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const BenchmarkConfig& cfg);

/// Draft oracle used when the config names none: the hashed-markov part of the
/// target with a fraction of its states re-ranked.
SyntheticOracleSpec default_draft_oracle(const SyntheticOracleSpec& target);

struct Problem {
  std::string id;
  std::string source;
  std::string text;  // empty when the prompt came as tokens
  std::vector<Token> prompt;
  std::optional<std::vector<Token>> answer;
};

/// Whitespace word tokenizer: each word maps to FNV-1a(word) mod vocab.
std::vector<Token> tokenize_text(const std::string& text, std::size_t vocab_size);

/// JSON Lines, one problem per line. Warnings (e.g. empty file) go to
/// `warnings` when given.
std::vector<Problem> ingest_dataset(const std::filesystem::path& path, std::size_t vocab_size,
                                    std::vector<std::string>* warnings = nullptr);
std::vector<Problem> parse_dataset(const std::string& jsonl, std::size_t vocab_size,
                                   std::vector<std::string>* warnings = nullptr);

inline constexpr const char* kPreviousAnswerLead = "The assistant's previous answer is: ";
inline constexpr const char* kReanswerRequest = "Please re-answer.";

/// Round 1: the question. Round r >= 2: question, newline, lead + previous
/// answer, newline, re-answer request.
std::string build_round_prompt(const std::string& question, const std::optional<std::string>& prev_answer,
                               std::size_t round);
/// Token form of the same template; the fixed phrases go through
/// tokenize_text.
std::vector<Token> build_round_prompt(std::span<const Token> question,
                                      const std::optional<std::vector<Token>>& prev_answer, std::size_t round,
                                      std::size_t vocab_size);

/// Tokens after the last answer marker, or the trailing fallback_len tokens.
std::vector<Token> extract_answer(std::span<const Token> generated, const PromptingConfig& prompting);

/// Index of the majority answer; ties go to the smallest answer so the
/// outcome depends only on the multiset.
std::size_t majority_vote(const std::vector<std::vector<Token>>& answers);

/// Everything a run needs that is built once from the config.
struct RunContext {
  std::shared_ptr<const TokenOracle> target;
  DrafterResources resources;
};

RunContext make_run_context(const BenchmarkConfig& cfg);

struct ChainResult {
  std::vector<TrajectoryResult> turns;
  std::vector<Token> final_answer;
};

/// M chained turns sharing one drafter. `trajectory_index` picks the rng
/// streams.
ChainResult run_multi_round(const BenchmarkConfig& cfg, const RunContext& rc, const Problem& problem,
                            std::size_t trajectory_index = 0);

struct BonResult {
  std::vector<ChainResult> chains;
  std::size_t selected = 0;
};

/// N independent chains (fresh drafter and streams each), majority-vote
/// selection over final answers.
BonResult run_best_of_n(const BenchmarkConfig& cfg, const RunContext& rc, const Problem& problem);

struct TrajectoryRecord {
  std::string problem_id;
  std::string source;
  std::size_t trajectory_index = 0;
  std::size_t turn_index = 0;
  TrajectoryResult result;
  std::vector<Token> answer;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&);
};

struct RunRecord {
  std::string run_id;
  std::string dataset;
  Method method = Method::kNone;
  double temperature = 0.0;
  std::uint64_t seed = 0;
  std::size_t bon_n = 1;
  std::size_t rounds = 1;
  std::size_t budget = 0;
  bool baseline = false;
  std::size_t warmup_steps = 3;
  std::vector<TrajectoryRecord> trajectories;
  std::map<std::string, std::size_t> selected;  // problem id -> trajectory index

  friend bool operator==(const RunRecord&, const RunRecord&);
};

/// Runs the configured method over the dataset. Each chain is repeated
/// cfg.timing.repetitions times and the repetition with the median total wall
/// time is kept.
RunRecord run_benchmark(const BenchmarkConfig& cfg, const std::vector<Problem>& problems);

/// Same workload with the autoregressive decoder, flagged as baseline.
RunRecord run_baseline(const BenchmarkConfig& cfg, const std::vector<Problem>& problems);

/// Dataset label used in results: the dataset file stem.
std::string dataset_label(const BenchmarkConfig& cfg);

}  // namespace specbench
