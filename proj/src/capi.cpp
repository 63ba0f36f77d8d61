#include "specbench/specbench.h"

#include <cstring>
#include <new>
#include <string>

#include "errors.hpp"
#include "harness.hpp"
#include "results.hpp"

struct sb_config {
  specbench::BenchmarkConfig cfg;
  std::string output;  // backing storage for sb_config_output
};

struct sb_results {
  specbench::ResultsDocument doc;
};

namespace {

thread_local std::string g_last_error;

sb_status status_of(specbench::ErrorCode code) {
  return static_cast<sb_status>(static_cast<int>(code));
}

template <class F>
sb_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return SB_OK;
  } catch (const specbench::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return SB_ERR_INTERNAL;
}

void require(const void* p, const char* what) {
  if (!p) throw specbench::InvalidArgument(std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<specbench::Problem> load_problems(const specbench::BenchmarkConfig& cfg,
                                              std::vector<std::string>* warnings) {
  if (cfg.dataset.empty()) throw specbench::InvalidArgument("config has no dataset");
  return specbench::ingest_dataset(cfg.dataset, cfg.oracle.vocab_size, warnings);
}

}  // namespace

extern "C" {

const char* sb_version(void) { return "0.1.0"; }

const char* sb_last_error(void) { return g_last_error.c_str(); }

const char* sb_status_name(sb_status status) {
  switch (status) {
    case SB_OK: return "ok";
    case SB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SB_ERR_IO: return "io error";
    case SB_ERR_SCHEMA: return "schema error";
    case SB_ERR_UNSUPPORTED_SAMPLING_MODE: return "unsupported sampling mode";
    case SB_ERR_MISSING_BASELINE: return "missing baseline";
    case SB_ERR_EMPTY_DATASTORE: return "empty datastore";
    case SB_ERR_CONTEXT_TOO_LONG: return "context too long";
    case SB_ERR_MISSING_PREVIOUS_ANSWER: return "missing previous answer";
    case SB_ERR_INVALID_PROPOSAL: return "invalid proposal";
    case SB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void sb_string_free(char* s) { delete[] s; }

sb_status sb_config_load(const char* path, sb_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new sb_config{specbench::load_config(path), {}};
  });
}

sb_status sb_config_parse(const char* json, const char* base_dir, sb_config** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new sb_config{specbench::parse_config(json, base_dir ? base_dir : ""), {}};
  });
}

void sb_config_free(sb_config* cfg) { delete cfg; }

sb_status sb_config_set_method(sb_config* cfg, const char* method) {
  return guarded([&] {
    require(cfg, "config");
    require(method, "method");
    cfg->cfg.method = specbench::method_from_string(method);
  });
}

sb_status sb_config_set_temperature(sb_config* cfg, double temperature) {
  return guarded([&] {
    require(cfg, "config");
    if (!(temperature >= 0.0)) throw specbench::InvalidArgument("temperature must be >= 0");
    cfg->cfg.policy.temperature = temperature;
  });
}

sb_status sb_config_set_rounds(sb_config* cfg, size_t rounds) {
  return guarded([&] {
    require(cfg, "config");
    cfg->cfg.multi_round.rounds = rounds;
  });
}

sb_status sb_config_set_bon_n(sb_config* cfg, size_t n) {
  return guarded([&] {
    require(cfg, "config");
    cfg->cfg.bon.n = n;
  });
}

sb_status sb_config_set_seed(sb_config* cfg, uint64_t seed) {
  return guarded([&] {
    require(cfg, "config");
    cfg->cfg.policy.seed = seed;
  });
}

sb_status sb_config_set_output(sb_config* cfg, const char* dir) {
  return guarded([&] {
    require(cfg, "config");
    require(dir, "dir");
    cfg->cfg.output = dir;
  });
}

sb_status sb_config_output(const sb_config* cfg, const char** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    auto* mut = const_cast<sb_config*>(cfg);
    mut->output = cfg->cfg.output.string();
    *out = mut->output.c_str();
  });
}

sb_status sb_config_to_json(const sb_config* cfg, char** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    *out = dup_string(specbench::config_to_json(cfg->cfg));
  });
}

sb_status sb_config_validate(const sb_config* cfg, char** warnings) {
  return guarded([&] {
    require(cfg, "config");
    if (warnings) *warnings = nullptr;
    cfg->cfg.validate();
    std::vector<std::string> w;
    load_problems(cfg->cfg, &w);
    if (warnings && !w.empty()) {
      std::string joined;
      for (const auto& line : w) joined += line + "\n";
      *warnings = dup_string(joined);
    }
  });
}

sb_status sb_run(const sb_config* cfg, int with_baseline, sb_results** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    cfg->cfg.validate();
    const auto problems = load_problems(cfg->cfg, nullptr);
    auto res = std::make_unique<sb_results>();
    if (with_baseline) res->doc.runs.push_back(specbench::run_baseline(cfg->cfg, problems));
    res->doc.runs.push_back(specbench::run_benchmark(cfg->cfg, problems));
    *out = res.release();
  });
}

sb_status sb_run_baseline(const sb_config* cfg, sb_results** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    cfg->cfg.validate();
    const auto problems = load_problems(cfg->cfg, nullptr);
    auto res = std::make_unique<sb_results>();
    res->doc.runs.push_back(specbench::run_baseline(cfg->cfg, problems));
    *out = res.release();
  });
}

sb_status sb_results_write(const sb_results* res, const char* dir) {
  return guarded([&] {
    require(res, "results");
    require(dir, "dir");
    specbench::persist_results(res->doc, dir);
  });
}

sb_status sb_results_load(const char* dir, sb_results** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new sb_results{specbench::load_results(dir)};
  });
}

sb_status sb_results_merge(sb_results* into, const sb_results* other) {
  return guarded([&] {
    require(into, "into");
    require(other, "other");
    into->doc = specbench::merge_results({into->doc, other->doc});
  });
}

sb_status sb_results_run_count(const sb_results* res, size_t* out) {
  return guarded([&] {
    require(res, "results");
    require(out, "out");
    *out = res->doc.runs.size();
  });
}

sb_status sb_results_report_data(const sb_results* res, char** out) {
  return guarded([&] {
    require(res, "results");
    require(out, "out");
    *out = dup_string(specbench::report_data_json(specbench::compute_metrics(res->doc.runs)));
  });
}

void sb_results_free(sb_results* res) { delete res; }

}  // extern "C"
