// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "brute_force.hpp"
#include "errors.hpp"
#include "fixtures.hpp"
#include "harness.hpp"
#include "results.hpp"

using namespace specbench;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<Token> random_prompt(Rng& rng, std::size_t n, std::size_t vocab) {
  std::vector<Token> p(n);
  for (auto& t : p) t = static_cast<Token>(rng.next_u64() % vocab);
  return p;
}

// Every trajectory produced anywhere in the suite is checked for the
// accounting identity.
std::size_t g_trajectories_seen = 0;
std::size_t g_accounting_violations = 0;

void account(const TrajectoryResult& r) {
  ++g_trajectories_seen;
  if (r.accepted_total() != r.tokens.size()) ++g_accounting_violations;
}

Problem make_problem(std::uint64_t seed, std::size_t len, std::size_t vocab) {
  Rng rng(seed, 7);
  Problem p;
  p.id = "p" + std::to_string(seed);
  p.prompt = random_prompt(rng, len, vocab);
  return p;
}

// ---------------------------------------------------------------------------

Verdict greedy_losslessness() {
  const auto t0 = Clock::now();
  constexpr std::size_t kVocab = 64;
  constexpr std::size_t kPrompts = 100;
  constexpr std::size_t kTokens = 128;
  std::size_t runs = 0, mismatches = 0;
  std::string first_bad;
  for (OracleKind kind : {OracleKind::kCyclic, OracleKind::kHashedMarkov, OracleKind::kCopyMix}) {
    auto spec = ref::oracle_spec(kind, kVocab, 11);
    if (kind == OracleKind::kCyclic) spec.period = 7;
    auto oracle = make_oracle(spec);
    auto kit = ref::make_kit(spec, ref::corpus_from(*oracle, {5, 9}, 1024));
    Rng rng(static_cast<std::uint64_t>(kind) + 100, 0);
    for (std::size_t i = 0; i < kPrompts; ++i) {
      // Prompts mix fresh tokens with a repeated chunk so pattern drafters fire.
      auto prompt = random_prompt(rng, 16 + rng.next_u64() % 32, kVocab);
      prompt.insert(prompt.end(), prompt.begin(), prompt.begin() + 8);
      const DecodePolicy greedy{0.0, i};
      const auto ar = run_autoregressive(*oracle, greedy, prompt, StopCondition{kTokens});
      account(ar);
      if (ar.tokens != ref::greedy_reference(*oracle, prompt, kTokens)) {
        ++mismatches;
        if (first_bad.empty()) first_bad = "ar/" + to_string(kind);
      }
      for (Method m : all_speculative_methods()) {
        auto d = make_drafter(m, kit.params, kit.resources, greedy);
        const auto r = run_trajectory(*oracle, *d, greedy, prompt, StopCondition{kTokens});
        account(r);
        ++runs;
        if (r.tokens != ar.tokens) {
          ++mismatches;
          if (first_bad.empty()) first_bad = to_string(m) + "/" + to_string(kind) + "/prompt " + std::to_string(i);
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = mismatches == 0 && secs < 120.0;
  v.detail = std::to_string(runs) + " runs, " + std::to_string(mismatches) + " mismatches" +
             (first_bad.empty() ? "" : " (first: " + first_bad + ")") + ", " + fmt("%.1fs", secs) + " (limit 120s)";
  return v;
}

Verdict sampling_losslessness() {
  const auto t0 = Clock::now();
  constexpr std::size_t kVocab = 5;
  constexpr std::size_t kLength = 3;
  constexpr std::size_t kTrials = 100000;
  const auto spec = ref::oracle_spec(OracleKind::kHashedMarkov, kVocab, 3, 1);
  auto oracle = make_oracle(spec);
  auto kit = ref::make_kit(spec, ref::corpus_from(*oracle, {0, 1}, 512));
  // Repeats in the prompt give the pattern drafters something to propose; it
  // is longer than the PIA window so the trie holds complete paths.
  std::vector<Token> prompt;
  for (int rep = 0; rep < 3; ++rep) {
    for (Token t : {0, 1, 2, 3, 4, 0, 1, 2, 0, 1}) prompt.push_back(t);
  }
  const DecodePolicy policy{1.0, 2024};
  const auto exact = ref::exact_sequence_distribution(*oracle, policy, prompt, kLength);

  double worst = 0.0;
  std::string detail;
  for (Method m : {Method::kSpS, Method::kSam, Method::kPia, Method::kRest, Method::kRecycling}) {
    std::map<std::vector<Token>, std::size_t> counts;
    std::size_t drafted_steps = 0;
    for (std::size_t i = 0; i < kTrials; ++i) {
      auto d = make_drafter(m, kit.params, kit.resources, policy);
      const auto r = run_trajectory(*oracle, *d, policy, prompt, StopCondition{kLength}, i);
      account(r);
      ++counts[r.tokens];
      for (const auto& s : r.steps) drafted_steps += s.draft_size > 0;
    }
    const double tv = ref::total_variation(exact, counts, kTrials);
    worst = std::max(worst, tv);
    detail += to_string(m) + " TV " + fmt("%.4f", tv) + (drafted_steps == 0 ? " (never drafted)" : "") + "; ";
    if (drafted_steps == 0) worst = 1.0;
  }
  const double secs = seconds_since(t0);
  return {worst <= 0.02 && secs < 300.0, detail + fmt("%.1fs", secs) + " (limits TV 0.02, 300s)"};
}

Verdict suffix_automaton_equivalence() {
  Rng rng(1000, 0);
  std::size_t steps = 0, failures = 0;
  for (int s = 0; s < 1000; ++s) {
    const auto seq = random_prompt(rng, 1 + rng.next_u64() % 512, 16);
    SuffixAutomaton sam;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      sam.extend(seq[i]);
      const std::span<const Token> prefix(seq.data(), i + 1);
      const auto ref = ref::brute_longest_earlier_suffix(prefix);
      ++steps;
      bool ok = sam.match_length() == ref.length && sam.continuation(8) == ref::brute_continuation(prefix, 8);
      if (ref.length > 0) ok = ok && sam.match_end() == ref.end;
      if (i + 1 >= 2) ok = ok && sam.state_count() <= 2 * (i + 1) - 1;
      failures += !ok;
    }
  }
  return {failures == 0, std::to_string(steps) + " steps over 1000 sequences, " + std::to_string(failures) +
                             " disagreements with brute force"};
}

Verdict deterministic_repetition_bound() {
  auto spec = ref::oracle_spec(OracleKind::kCyclic, 8, 0);
  spec.period = 4;
  auto oracle = make_oracle(spec);
  SamDrafter sam(8, 1);
  // Two warmup steps learn the loop; 2 + 22 * 9 = 200 so no step is cut short.
  const auto r = run_trajectory(*oracle, sam, DecodePolicy{0.0, 0}, std::vector<Token>{0, 1, 2}, StopCondition{200});
  account(r);
  constexpr std::size_t kWarmup = 3;
  std::size_t bad = 0;
  for (std::size_t i = kWarmup; i < r.steps.size(); ++i) bad += r.steps[i].accepted_count != 9;
  return {bad == 0 && r.steps.size() > kWarmup,
          std::to_string(r.steps.size() - kWarmup) + " post-warmup steps, " + std::to_string(bad) + " not equal to 9"};
}

BenchmarkConfig per_turn_config(Method m, std::uint64_t seed) {
  BenchmarkConfig cfg;
  cfg.method = m;
  cfg.oracle = ref::oracle_spec(OracleKind::kCopyMix, 64, seed, 3);
  cfg.oracle.copy_prob = 0.5;
  cfg.oracle.min_match = 2;
  cfg.policy = DecodePolicy{0.0, seed};
  cfg.multi_round.rounds = 2;
  cfg.stop.max_tokens = 256;
  cfg.timing.repetitions = 1;
  cfg.prompting.assistant_prefix = {1, 2, 3, 4};
  cfg.prompting.answer_fallback_len = 3;
  return cfg;
}

double four_gram_overlap(const std::vector<Token>& a, const std::vector<Token>& b) {
  std::set<std::vector<Token>> grams;
  for (std::size_t i = 0; i + 4 <= a.size(); ++i) grams.emplace(a.begin() + i, a.begin() + i + 4);
  std::size_t hit = 0, n = 0;
  for (std::size_t i = 0; i + 4 <= b.size(); ++i, ++n) hit += grams.contains({b.begin() + i, b.begin() + i + 4});
  return n == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(n);
}

Verdict per_turn_gain() {
  std::string detail;
  bool pass = true;
  std::vector<double> overlaps;
  for (Method m : {Method::kSam, Method::kPia, Method::kSpS, Method::kEagle, Method::kPld, Method::kRest,
                   Method::kRecycling}) {
    std::vector<double> ratios;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto cfg = per_turn_config(m, seed);
      const auto rc = make_run_context(cfg);
      const auto chain = run_multi_round(cfg, rc, make_problem(seed, 24, 64));
      for (const auto& t : chain.turns) account(t);
      ratios.push_back(chain.turns[1].mat() / chain.turns[0].mat());
      if (m == Method::kSam) overlaps.push_back(four_gram_overlap(chain.turns[0].tokens, chain.turns[1].tokens));
    }
    const double r = median(ratios);
    const bool reuse = capabilities_of(m).reuse;
    const bool ok = reuse ? r >= 1.2 : std::abs(r - 1.0) < 0.05;
    pass = pass && ok;
    detail += to_string(m) + fmt(" %.3f", r) + (ok ? "" : "!") + "; ";
  }
  const double ov = median(overlaps);
  pass = pass && ov >= 0.6;
  return {pass, "round2/round1 MAT: " + detail + fmt("overlap %.2f", ov)};
}

Verdict temperature_sensitivity() {
  auto drop = [](Method m, std::vector<double>& t0, std::vector<double>& t1) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      for (double temp : {0.0, 1.0}) {
        BenchmarkConfig cfg;
        cfg.method = m;
        cfg.oracle = ref::oracle_spec(OracleKind::kHashedMarkov, 64, seed, 2);
        cfg.policy = DecodePolicy{temp, seed};
        cfg.stop.max_tokens = 256;
        const auto rc = make_run_context(cfg);
        const auto chain = run_multi_round(cfg, rc, make_problem(seed, 16, 64));
        account(chain.turns[0]);
        (temp == 0.0 ? t0 : t1).push_back(chain.turns[0].mat());
      }
    }
  };
  std::vector<double> s0, s1, r0, r1;
  drop(Method::kSam, s0, s1);
  drop(Method::kRecycling, r0, r1);
  const double sam_t0 = median(s0), sam_t1 = median(s1), rec_t0 = median(r0), rec_t1 = median(r1);
  const double sam_drop = 1.0 - sam_t1 / sam_t0;
  const double rec_drop = 1.0 - rec_t1 / rec_t0;
  return {sam_t1 <= sam_t0 && rec_drop < sam_drop,
          fmt("sam MAT %.2f", sam_t0) + fmt(" -> %.2f", sam_t1) + fmt(" (drop %.1f%%)", 100 * sam_drop) +
              fmt("; recycling %.2f", rec_t0) + fmt(" -> %.2f", rec_t1) + fmt(" (drop %.1f%%)", 100 * rec_drop)};
}

Verdict hybrid_benefit() {
  std::vector<double> sam, fallback, hybrid;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (Method m : {Method::kSam, Method::kEagle, Method::kHybrid}) {
      BenchmarkConfig cfg;
      cfg.method = m;
      cfg.oracle = ref::oracle_spec(OracleKind::kCopyMix, 64, seed, 3);
      cfg.oracle.copy_prob = 0.5;
      cfg.oracle.segment_len = 32;  // alternating repetitive / novel blocks
      cfg.policy = DecodePolicy{0.0, seed};
      cfg.stop.max_tokens = 384;
      const auto rc = make_run_context(cfg);
      const auto chain = run_multi_round(cfg, rc, make_problem(seed, 32, 64));
      account(chain.turns[0]);
      (m == Method::kSam ? sam : m == Method::kEagle ? fallback : hybrid).push_back(chain.turns[0].mat());
    }
  }
  const double s = median(sam), f = median(fallback), h = median(hybrid);
  const double hi = std::max(s, f), lo = std::min(s, f);
  return {h >= 0.95 * hi && h >= 1.1 * lo,
          fmt("sam %.2f", s) + fmt(", eagle %.2f", f) + fmt(", hybrid %.2f", h) + fmt(" (%.2fx best", h / hi) +
              fmt(", %.2fx weaker)", h / lo)};
}

Verdict capability_enforcement() {
  int rejected = 0, checks = 0;
  auto expect_reject = [&](const std::function<void()>& f) {
    ++checks;
    try {
      f();
    } catch (const UnsupportedSamplingMode&) {
      ++rejected;
    }
  };
  for (Method m : {Method::kPld, Method::kLookahead}) {
    for (double t : {0.1, 0.7, 1.0}) {
      expect_reject([&] { validate_config(m, DecodePolicy{t, 0}); });
      expect_reject([&] {
        BenchmarkConfig cfg;
        cfg.method = m;
        cfg.policy = DecodePolicy{t, 0};
        cfg.validate();
      });
      expect_reject([&] {
        auto oracle = make_oracle(ref::oracle_spec(OracleKind::kHashedMarkov, 8, 0));
        auto kit = ref::make_kit(ref::oracle_spec(OracleKind::kHashedMarkov, 8, 0), {1, 2});
        auto d = make_drafter(m, kit.params, kit.resources, DecodePolicy{0.0, 0});
        run_trajectory(*oracle, *d, DecodePolicy{t, 0}, std::vector<Token>{1, 2}, StopCondition{4});
      });
    }
  }
  return {rejected == checks, std::to_string(rejected) + "/" + std::to_string(checks) +
                                  " sampling configs rejected with UnsupportedSamplingMode"};
}

Verdict mat_and_phase_instrumentation(const std::filesystem::path& tmp) {
  std::vector<Problem> problems;
  for (std::uint64_t i = 0; i < 4; ++i) problems.push_back(make_problem(i, 20, 32));
  BenchmarkConfig cfg;
  cfg.name = "acceptance";
  cfg.oracle = ref::oracle_spec(OracleKind::kCopyMix, 32, 5, 2);
  cfg.multi_round.rounds = 2;
  cfg.stop.max_tokens = 96;
  cfg.prompting.assistant_prefix = {1, 2};

  ResultsDocument doc;
  doc.runs.push_back(run_baseline(cfg, problems));
  for (Method m : all_speculative_methods()) {
    cfg.method = m;
    doc.runs.push_back(run_benchmark(cfg, problems));
  }
  cfg.method = Method::kNone;
  cfg.name = "acceptance-ar";
  doc.runs.push_back(run_benchmark(cfg, problems));
  for (const auto& run : doc.runs) {
    for (const auto& t : run.trajectories) account(t.result);
  }

  const RunMetrics metrics = compute_metrics(doc.runs);
  bool ar_exact = true, fractions_ok = true;
  for (const auto& row : metrics.rows) {
    if (row.method == Method::kNone) ar_exact = ar_exact && row.mat == 1.0 && row.speedup == 1.0;
    fractions_ok = fractions_ok && std::abs(row.phases.sum() - 1.0) <= 1e-6;
  }

  persist_results(doc, tmp);
  const ResultsDocument back = load_results(tmp);
  const bool doc_roundtrip = back == doc;
  const bool metrics_roundtrip = compute_metrics(back.runs) == metrics;
  const bool report_roundtrip = report_data_from_json(report_data_json(metrics)) == metrics;

  bool missing_baseline = false;
  try {
    compute_metrics({doc.runs[1]});
  } catch (const MissingBaseline&) {
    missing_baseline = true;
  }

  const bool accounting = g_accounting_violations == 0;
  Verdict v;
  v.pass = ar_exact && fractions_ok && doc_roundtrip && metrics_roundtrip && report_roundtrip && missing_baseline &&
           accounting;
  v.detail = std::string("AR MAT/speedup exact: ") + (ar_exact ? "yes" : "no") +
             "; phase fractions sum to 1: " + (fractions_ok ? "yes" : "no") +
             "; results round-trip: " + (doc_roundtrip && metrics_roundtrip && report_roundtrip ? "yes" : "no") +
             "; MissingBaseline raised: " + (missing_baseline ? "yes" : "no") + "; accounting " +
             std::to_string(g_trajectories_seen - g_accounting_violations) + "/" +
             std::to_string(g_trajectories_seen) + " trajectories";
  return v;
}

}  // namespace

int main() {
  const auto tmp = std::filesystem::temp_directory_path() / "specbench_acceptance";
  std::filesystem::remove_all(tmp);

  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
  };
  // The accounting check runs last so it covers every trajectory above it.
  const std::vector<Criterion> criteria = {
      {"greedy losslessness", greedy_losslessness},
      {"sampling losslessness", sampling_losslessness},
      {"suffix automaton oracle equivalence", suffix_automaton_equivalence},
      {"deterministic repetition bound", deterministic_repetition_bound},
      {"per-turn gain", per_turn_gain},
      {"temperature sensitivity", temperature_sensitivity},
      {"hybrid benefit", hybrid_benefit},
      {"capability matrix enforcement", capability_enforcement},
      {"MAT accounting and phase instrumentation", [&] { return mat_and_phase_instrumentation(tmp); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %s: %s\n", v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  std::filesystem::remove_all(tmp);
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
