#include "harness.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"

#include "errors.hpp"

namespace specbench {

using nlohmann::json;

namespace {

// Strict object reader: every key must be consumed, so typos surface as
// schema errors instead of silently falling back to defaults.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw SchemaError(where_ + ": expected an object");
  }
  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw SchemaError(where_ + "." + key + ": " + e.what());
    }
  }

  const json& sub(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw SchemaError(where_ + ": unknown key '" + k + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

SyntheticOracleSpec parse_oracle(const json& j, const std::string& where) {
  SyntheticOracleSpec s;
  ObjectReader r(j, where);
  std::string kind = to_string(s.kind);
  r.get("kind", kind);
  s.kind = oracle_kind_from_string(kind);
  r.get("vocab_size", s.vocab_size);
  r.get("max_context", s.max_context);
  r.get("loop", s.loop);
  r.get("period", s.period);
  r.get("offset", s.offset);
  r.get("order", s.order);
  r.get("seed", s.seed);
  r.get("concentration", s.concentration);
  r.get("perturb", s.perturb);
  r.get("perturb_seed", s.perturb_seed);
  r.get("copy_prob", s.copy_prob);
  r.get("min_match", s.min_match);
  r.get("segment_len", s.segment_len);
  r.finish();
  return s;
}

json oracle_json(const SyntheticOracleSpec& s) {
  return json{{"kind", to_string(s.kind)},
              {"vocab_size", s.vocab_size},
              {"max_context", s.max_context},
              {"loop", s.loop},
              {"period", s.period},
              {"offset", s.offset},
              {"order", s.order},
              {"seed", s.seed},
              {"concentration", s.concentration},
              {"perturb", s.perturb},
              {"perturb_seed", s.perturb_seed},
              {"copy_prob", s.copy_prob},
              {"min_match", s.min_match},
              {"segment_len", s.segment_len}};
}

DrafterParams parse_params(const json& j) {
  DrafterParams p;
  ObjectReader r(j, "params");
  r.get("budget", p.budget);
  r.get("sam_min_match", p.sam_min_match);
  r.get("pld_min_n", p.pld_min_n);
  r.get("pld_max_n", p.pld_max_n);
  r.get("rest_candidates", p.rest_candidates);
  r.get("rest_max_match", p.rest_max_match);
  r.get("lookahead_min_n", p.lookahead_min_n);
  r.get("lookahead_max_n", p.lookahead_max_n);
  r.get("lookahead_window", p.lookahead_window);
  r.get("lookahead_candidates", p.lookahead_candidates);
  r.get("lookahead_ngram_len", p.lookahead_ngram_len);
  r.get("pia_window", p.pia_window);
  r.get("pia_capacity", p.pia_capacity);
  r.get("pia_max_match", p.pia_max_match);
  r.get("recycling_top_k", p.recycling_top_k);
  r.get("recycling_branch", p.recycling_branch);
  r.get("eagle_top_k", p.eagle_top_k);
  r.get("eagle_max_depth", p.eagle_max_depth);
  std::string primary = to_string(p.hybrid_primary), fallback = to_string(p.hybrid_fallback);
  r.get("hybrid_primary", primary);
  r.get("hybrid_fallback", fallback);
  p.hybrid_primary = method_from_string(primary);
  p.hybrid_fallback = method_from_string(fallback);
  r.get("hybrid_switch_threshold", p.hybrid_switch_threshold);
  r.finish();
  return p;
}

json params_json(const DrafterParams& p) {
  return json{{"budget", p.budget},
              {"sam_min_match", p.sam_min_match},
              {"pld_min_n", p.pld_min_n},
              {"pld_max_n", p.pld_max_n},
              {"rest_candidates", p.rest_candidates},
              {"rest_max_match", p.rest_max_match},
              {"lookahead_min_n", p.lookahead_min_n},
              {"lookahead_max_n", p.lookahead_max_n},
              {"lookahead_window", p.lookahead_window},
              {"lookahead_candidates", p.lookahead_candidates},
              {"lookahead_ngram_len", p.lookahead_ngram_len},
              {"pia_window", p.pia_window},
              {"pia_capacity", p.pia_capacity},
              {"pia_max_match", p.pia_max_match},
              {"recycling_top_k", p.recycling_top_k},
              {"recycling_branch", p.recycling_branch},
              {"eagle_top_k", p.eagle_top_k},
              {"eagle_max_depth", p.eagle_max_depth},
              {"hybrid_primary", to_string(p.hybrid_primary)},
              {"hybrid_fallback", to_string(p.hybrid_fallback)},
              {"hybrid_switch_threshold", p.hybrid_switch_threshold}};
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void check_tokens(std::span<const Token> tokens, std::size_t vocab, const std::string& what) {
  for (Token t : tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= vocab) {
      throw InvalidArgument(what + " token " + std::to_string(t) + " outside vocabulary of " + std::to_string(vocab));
    }
  }
}

std::vector<Token> generate_corpus(const TokenOracle& oracle, const DatastoreConfig& cfg) {
  constexpr std::size_t kSegment = 256;
  Rng rng(cfg.generator_seed, 0);
  const DecodePolicy policy{1.0, cfg.generator_seed};
  std::vector<Token> corpus;
  corpus.reserve(cfg.generated_tokens);
  while (corpus.size() < cfg.generated_tokens) {
    std::vector<Token> ctx = {static_cast<Token>(rng.next_u64() % oracle.vocab_size()),
                              static_cast<Token>(rng.next_u64() % oracle.vocab_size())};
    for (std::size_t i = 0; i < kSegment && corpus.size() < cfg.generated_tokens; ++i) {
      const Token t = sample(apply_policy(oracle.next(ctx), policy), rng);
      ctx.push_back(t);
      corpus.push_back(t);
    }
  }
  return corpus;
}

}  // namespace

// ---------------------------------------------------------------------------

SyntheticOracleSpec default_draft_oracle(const SyntheticOracleSpec& target) {
  SyntheticOracleSpec s = target;
  if (s.kind != OracleKind::kHashedMarkov) {
    s.kind = OracleKind::kHashedMarkov;
    if (target.kind == OracleKind::kCyclic) s.order = 1;
  }
  s.perturb = std::max(target.perturb, 0.3);
  return s;
}

void BenchmarkConfig::validate() const {
  oracle.validate();
  if (draft_oracle) {
    draft_oracle->validate();
    if (draft_oracle->vocab_size != oracle.vocab_size) {
      throw InvalidArgument("draft_oracle.vocab_size must equal oracle.vocab_size");
    }
  }
  if (bon.n < 1) throw InvalidArgument("framework.bon.n must be >= 1");
  if (bon.scorer != "majority") throw InvalidArgument("unknown scorer '" + bon.scorer + "'");
  if (bon.n > 1 && policy.greedy()) throw InvalidArgument("best-of-n with n > 1 requires temperature > 0");
  if (multi_round.rounds < 1) throw InvalidArgument("framework.multi_round.rounds must be >= 1");
  if (stop.max_tokens < 1) throw InvalidArgument("stop.max_tokens must be >= 1");
  if (timing.repetitions < 1) throw InvalidArgument("timing.repetitions must be >= 1");
  if (stop.stop_token) check_tokens(std::span<const Token>(&*stop.stop_token, 1), oracle.vocab_size, "stop");
  check_tokens(prompting.assistant_prefix, oracle.vocab_size, "assistant_prefix");
  if (prompting.answer_marker) {
    check_tokens(std::span<const Token>(&*prompting.answer_marker, 1), oracle.vocab_size, "answer_marker");
  }
  if (method == Method::kRest && datastore.path.has_value() && !std::filesystem::exists(*datastore.path)) {
    throw IoError("datastore file not found: " + datastore.path->string());
  }
  validate_config(method, policy, params);
}

BenchmarkConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < json_text.size(); ++i) line += json_text[i] == '\n';
    throw SchemaError(e.what(), line);
  }
  BenchmarkConfig cfg;
  ObjectReader r(j, "config");
  r.get("name", cfg.name);
  std::string method = to_string(cfg.method);
  r.get("method", method);
  cfg.method = method_from_string(method);
  if (r.has("params")) cfg.params = parse_params(r.sub("params"));
  if (!r.has("oracle")) throw SchemaError("config: missing required key 'oracle'");
  cfg.oracle = parse_oracle(r.sub("oracle"), "oracle");
  if (r.has("draft_oracle")) cfg.draft_oracle = parse_oracle(r.sub("draft_oracle"), "draft_oracle");
  if (r.has("datastore")) {
    ObjectReader d(r.sub("datastore"), "datastore");
    std::string path;
    d.get("path", path);
    if (!path.empty()) cfg.datastore.path = resolve(base_dir, path);
    d.get("generated_tokens", cfg.datastore.generated_tokens);
    d.get("generator_seed", cfg.datastore.generator_seed);
    d.finish();
  }
  if (r.has("policy")) {
    ObjectReader p(r.sub("policy"), "policy");
    p.get("temperature", cfg.policy.temperature);
    p.get("seed", cfg.policy.seed);
    p.finish();
  }
  if (r.has("framework")) {
    ObjectReader f(r.sub("framework"), "framework");
    if (f.has("bon")) {
      ObjectReader b(f.sub("bon"), "framework.bon");
      b.get("n", cfg.bon.n);
      b.get("scorer", cfg.bon.scorer);
      b.finish();
    }
    if (f.has("multi_round")) {
      ObjectReader m(f.sub("multi_round"), "framework.multi_round");
      m.get("rounds", cfg.multi_round.rounds);
      m.finish();
    }
    f.finish();
  }
  if (r.has("stop")) {
    ObjectReader s(r.sub("stop"), "stop");
    s.get("max_tokens", cfg.stop.max_tokens);
    Token stop_token = 0;
    const bool has_stop = s.has("stop_token");
    s.get("stop_token", stop_token);
    cfg.stop.stop_token = has_stop ? std::optional<Token>(stop_token) : std::nullopt;
    s.finish();
  }
  if (r.has("prompting")) {
    ObjectReader p(r.sub("prompting"), "prompting");
    p.get("assistant_prefix", cfg.prompting.assistant_prefix);
    Token marker = 0;
    const bool has_marker = p.has("answer_marker");
    p.get("answer_marker", marker);
    if (has_marker) cfg.prompting.answer_marker = marker;
    p.get("answer_fallback_len", cfg.prompting.answer_fallback_len);
    p.finish();
  }
  if (r.has("timing")) {
    ObjectReader t(r.sub("timing"), "timing");
    t.get("warmup_steps", cfg.timing.warmup_steps);
    t.get("repetitions", cfg.timing.repetitions);
    t.finish();
  }
  std::string dataset, output;
  r.get("dataset", dataset);
  r.get("output", output);
  if (!dataset.empty()) cfg.dataset = resolve(base_dir, dataset);
  if (!output.empty()) cfg.output = resolve(base_dir, output);
  r.finish();
  return cfg;
}

BenchmarkConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string config_to_json(const BenchmarkConfig& cfg) {
  json j{{"name", cfg.name},
         {"method", to_string(cfg.method)},
         {"params", params_json(cfg.params)},
         {"oracle", oracle_json(cfg.oracle)},
         {"policy", {{"temperature", cfg.policy.temperature}, {"seed", cfg.policy.seed}}},
         {"framework", {{"bon", {{"n", cfg.bon.n}, {"scorer", cfg.bon.scorer}}},
                        {"multi_round", {{"rounds", cfg.multi_round.rounds}}}}},
         {"stop", {{"max_tokens", cfg.stop.max_tokens}, {"stop_token", nullptr}}},
         {"prompting", {{"assistant_prefix", cfg.prompting.assistant_prefix},
                        {"answer_marker", nullptr},
                        {"answer_fallback_len", cfg.prompting.answer_fallback_len}}},
         {"timing", {{"warmup_steps", cfg.timing.warmup_steps}, {"repetitions", cfg.timing.repetitions}}},
         {"datastore", {{"generated_tokens", cfg.datastore.generated_tokens},
                        {"generator_seed", cfg.datastore.generator_seed}}},
         {"dataset", cfg.dataset.string()},
         {"output", cfg.output.string()}};
  if (cfg.draft_oracle) j["draft_oracle"] = oracle_json(*cfg.draft_oracle);
  if (cfg.datastore.path) j["datastore"]["path"] = cfg.datastore.path->string();
  if (cfg.stop.stop_token) j["stop"]["stop_token"] = *cfg.stop.stop_token;
  if (cfg.prompting.answer_marker) j["prompting"]["answer_marker"] = *cfg.prompting.answer_marker;
  return j.dump(2);
}

// ---------------------------------------------------------------------------

std::vector<Token> tokenize_text(const std::string& text, std::size_t vocab_size) {
  if (vocab_size == 0) throw InvalidArgument("vocab_size must be positive");
  std::vector<Token> out;
  std::istringstream in(text);
  std::string word;
  while (in >> word) out.push_back(static_cast<Token>(fnv1a(word) % vocab_size));
  return out;
}

std::vector<Problem> parse_dataset(const std::string& jsonl, std::size_t vocab_size,
                                   std::vector<std::string>* warnings) {
  std::vector<Problem> out;
  std::set<std::string> ids;
  std::istringstream in(jsonl);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(e.what(), line_no);
    }
    if (!j.is_object()) throw SchemaError("expected a JSON object", line_no);
    Problem p;
    try {
      const json& id = j.at("id");
      p.id = id.is_string() ? id.get<std::string>() : id.dump();
      if (j.contains("source")) p.source = j.at("source").get<std::string>();
      if (j.contains("prompt")) {
        p.prompt = j.at("prompt").get<std::vector<Token>>();
      } else if (j.contains("text")) {
        p.text = j.at("text").get<std::string>();
        p.prompt = tokenize_text(p.text, vocab_size);
      } else {
        throw SchemaError("problem needs 'prompt' (tokens) or 'text'", line_no);
      }
      if (j.contains("answer") && !j.at("answer").is_null()) {
        const json& a = j.at("answer");
        p.answer = a.is_string() ? tokenize_text(a.get<std::string>(), vocab_size) : a.get<std::vector<Token>>();
      }
      for (const auto& [k, v] : j.items()) {
        if (k != "id" && k != "source" && k != "prompt" && k != "text" && k != "answer") {
          throw SchemaError("unknown key '" + k + "'", line_no);
        }
      }
    } catch (const json::exception& e) {
      throw SchemaError(e.what(), line_no);
    }
    if (p.prompt.empty()) throw SchemaError("problem '" + p.id + "' has an empty prompt", line_no);
    for (Token t : p.prompt) {
      if (t < 0 || static_cast<std::size_t>(t) >= vocab_size) {
        throw SchemaError("prompt token " + std::to_string(t) + " outside vocabulary", line_no);
      }
    }
    if (!ids.insert(p.id).second) throw SchemaError("duplicate problem id '" + p.id + "'", line_no);
    out.push_back(std::move(p));
  }
  if (out.empty() && warnings) warnings->push_back("dataset is empty");
  return out;
}

std::vector<Problem> ingest_dataset(const std::filesystem::path& path, std::size_t vocab_size,
                                    std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str(), vocab_size, warnings);
}

std::string build_round_prompt(const std::string& question, const std::optional<std::string>& prev_answer,
                               std::size_t round) {
  if (round < 1) throw InvalidArgument("round is 1-based");
  if (round == 1) return question;
  if (!prev_answer) throw MissingPreviousAnswer("round " + std::to_string(round) + " needs the previous answer");
  return question + "\n" + kPreviousAnswerLead + *prev_answer + "\n" + kReanswerRequest;
}

std::vector<Token> build_round_prompt(std::span<const Token> question,
                                      const std::optional<std::vector<Token>>& prev_answer, std::size_t round,
                                      std::size_t vocab_size) {
  if (round < 1) throw InvalidArgument("round is 1-based");
  std::vector<Token> out(question.begin(), question.end());
  if (round == 1) return out;
  if (!prev_answer) throw MissingPreviousAnswer("round " + std::to_string(round) + " needs the previous answer");
  const auto lead = tokenize_text(kPreviousAnswerLead, vocab_size);
  const auto tail = tokenize_text(kReanswerRequest, vocab_size);
  out.insert(out.end(), lead.begin(), lead.end());
  out.insert(out.end(), prev_answer->begin(), prev_answer->end());
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

std::vector<Token> extract_answer(std::span<const Token> generated, const PromptingConfig& prompting) {
  if (prompting.answer_marker) {
    for (std::size_t i = generated.size(); i-- > 0;) {
      if (generated[i] == *prompting.answer_marker) {
        if (i + 1 < generated.size()) return {generated.begin() + static_cast<std::ptrdiff_t>(i + 1), generated.end()};
        break;
      }
    }
  }
  const std::size_t n = std::min(prompting.answer_fallback_len, generated.size());
  return {generated.end() - static_cast<std::ptrdiff_t>(n), generated.end()};
}

std::size_t majority_vote(const std::vector<std::vector<Token>>& answers) {
  if (answers.empty()) throw InvalidArgument("majority_vote needs at least one answer");
  std::map<std::vector<Token>, std::size_t> counts;
  for (const auto& a : answers) ++counts[a];
  // std::map iterates in lexicographic order, so strict > keeps the smallest
  // answer among equally frequent ones.
  const std::vector<Token>* best = nullptr;
  std::size_t best_count = 0;
  for (const auto& [a, c] : counts) {
    if (c > best_count) {
      best = &a;
      best_count = c;
    }
  }
  return static_cast<std::size_t>(std::find(answers.begin(), answers.end(), *best) - answers.begin());
}

// ---------------------------------------------------------------------------

RunContext make_run_context(const BenchmarkConfig& cfg) {
  cfg.validate();
  RunContext rc;
  rc.target = make_oracle(cfg.oracle);
  rc.resources.draft_oracle = make_oracle(cfg.draft_oracle ? *cfg.draft_oracle : default_draft_oracle(cfg.oracle));
  const bool needs_store = cfg.method == Method::kRest;
  if (needs_store) {
    rc.resources.datastore =
        cfg.datastore.path ? std::make_shared<CorpusDatastore>(CorpusDatastore::load(*cfg.datastore.path))
                           : std::make_shared<CorpusDatastore>(generate_corpus(*rc.target, cfg.datastore));
  }
  return rc;
}

namespace {

std::uint64_t stream_id(std::size_t trajectory, std::size_t turn) {
  return (static_cast<std::uint64_t>(trajectory) << 16) | static_cast<std::uint64_t>(turn);
}

std::int64_t chain_wall(const ChainResult& c) {
  std::int64_t w = 0;
  for (const auto& t : c.turns) w += t.wall_time;
  return w;
}

ChainResult timed_chain(const BenchmarkConfig& cfg, const RunContext& rc, const Problem& problem,
                        std::size_t trajectory_index) {
  std::vector<ChainResult> reps;
  for (std::size_t i = 0; i < cfg.timing.repetitions; ++i) {
    reps.push_back(run_multi_round(cfg, rc, problem, trajectory_index));
  }
  std::vector<std::size_t> order(reps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return chain_wall(reps[a]) < chain_wall(reps[b]); });
  return std::move(reps[order[order.size() / 2]]);
}

}  // namespace

ChainResult run_multi_round(const BenchmarkConfig& cfg, const RunContext& rc, const Problem& problem,
                            std::size_t trajectory_index) {
  auto drafter = make_drafter(cfg.method, cfg.params, rc.resources, cfg.policy);
  const std::size_t vocab = rc.target->vocab_size();
  ChainResult chain;
  std::optional<std::vector<Token>> prev_answer;
  for (std::size_t round = 1; round <= cfg.multi_round.rounds; ++round) {
    std::vector<Token> prompt = build_round_prompt(problem.prompt, prev_answer, round, vocab);
    prompt.insert(prompt.end(), cfg.prompting.assistant_prefix.begin(), cfg.prompting.assistant_prefix.end());
    TrajectoryResult r =
        run_trajectory(*rc.target, *drafter, cfg.policy, prompt, cfg.stop, stream_id(trajectory_index, round - 1));
    r.turn_index = round - 1;
    r.trajectory_index = trajectory_index;
    prev_answer = extract_answer(r.tokens, cfg.prompting);
    chain.turns.push_back(std::move(r));
  }
  chain.final_answer = prev_answer.value_or(std::vector<Token>{});
  return chain;
}

BonResult run_best_of_n(const BenchmarkConfig& cfg, const RunContext& rc, const Problem& problem) {
  BonResult out;
  std::vector<std::vector<Token>> answers;
  for (std::size_t i = 0; i < cfg.bon.n; ++i) {
    out.chains.push_back(run_multi_round(cfg, rc, problem, i));
    answers.push_back(out.chains.back().final_answer);
  }
  out.selected = majority_vote(answers);
  return out;
}

namespace {

std::string run_id_for(const BenchmarkConfig& cfg, const std::string& label) {
  return fmt::format("{}/{}/T{}/s{}/n{}/r{}", cfg.name, label, cfg.policy.temperature, cfg.policy.seed, cfg.bon.n,
                     cfg.multi_round.rounds);
}

}  // namespace

std::string dataset_label(const BenchmarkConfig& cfg) {
  return cfg.dataset.empty() ? std::string("inline") : cfg.dataset.stem().string();
}

RunRecord run_benchmark(const BenchmarkConfig& cfg, const std::vector<Problem>& problems) {
  const RunContext rc = make_run_context(cfg);
  RunRecord run;
  run.dataset = dataset_label(cfg);
  run.method = cfg.method;
  run.temperature = cfg.policy.temperature;
  run.seed = cfg.policy.seed;
  run.bon_n = cfg.bon.n;
  run.rounds = cfg.multi_round.rounds;
  run.budget = cfg.params.budget == 0 ? default_budget(cfg.method) : cfg.params.budget;
  run.warmup_steps = cfg.timing.warmup_steps;
  run.run_id = run_id_for(cfg, to_string(cfg.method));
  for (const auto& problem : problems) {
    std::vector<std::vector<Token>> answers;
    for (std::size_t i = 0; i < cfg.bon.n; ++i) {
      ChainResult chain = timed_chain(cfg, rc, problem, i);
      answers.push_back(chain.final_answer);
      for (auto& turn : chain.turns) {
        TrajectoryRecord rec;
        rec.problem_id = problem.id;
        rec.source = problem.source;
        rec.trajectory_index = i;
        rec.turn_index = turn.turn_index;
        rec.answer = extract_answer(turn.tokens, cfg.prompting);
        rec.result = std::move(turn);
        run.trajectories.push_back(std::move(rec));
      }
    }
    run.selected[problem.id] = majority_vote(answers);
  }
  return run;
}

RunRecord run_baseline(const BenchmarkConfig& cfg, const std::vector<Problem>& problems) {
  BenchmarkConfig ar = cfg;
  ar.method = Method::kNone;
  RunRecord run = run_benchmark(ar, problems);
  run.baseline = true;
  run.run_id = run_id_for(cfg, "baseline");
  return run;
}

bool operator==(const TrajectoryRecord& a, const TrajectoryRecord& b) {
  auto key = [](const TrajectoryRecord& r) {
    return std::tie(r.problem_id, r.source, r.trajectory_index, r.turn_index, r.answer);
  };
  if (key(a) != key(b)) return false;
  const auto& x = a.result;
  const auto& y = b.result;
  if (x.method != y.method || x.tokens != y.tokens || x.wall_time != y.wall_time || x.turn_index != y.turn_index ||
      x.trajectory_index != y.trajectory_index || x.oracle_batches != y.oracle_batches ||
      x.hit_stop_token != y.hit_stop_token || x.prompt_len != y.prompt_len || x.steps.size() != y.steps.size()) {
    return false;
  }
  for (std::size_t i = 0; i < x.steps.size(); ++i) {
    const auto& s = x.steps[i];
    const auto& t = y.steps[i];
    if (s.step_index != t.step_index || s.wall != t.wall || s.accepted_count != t.accepted_count ||
        s.match_len != t.match_len || s.draft_size != t.draft_size || s.origin != t.origin ||
        s.phases.draft != t.phases.draft || s.phases.decode != t.phases.decode ||
        s.phases.verify != t.phases.verify || s.phases.update != t.phases.update) {
      return false;
    }
  }
  return true;
}

bool operator==(const RunRecord& a, const RunRecord& b) {
  return std::tie(a.run_id, a.dataset, a.method, a.temperature, a.seed, a.bon_n, a.rounds, a.budget, a.baseline,
                  a.warmup_steps, a.trajectories, a.selected) ==
         std::tie(b.run_id, b.dataset, b.method, b.temperature, b.seed, b.bon_n, b.rounds, b.budget, b.baseline,
                  b.warmup_steps, b.trajectories, b.selected);
}

}  // namespace specbench
