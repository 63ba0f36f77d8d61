// Command-line front end. Talks to the library only through the C API.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "specbench/specbench.h"

namespace {

struct Failure {
  sb_status status;
};

void check(sb_status s) {
  if (s != SB_OK) throw Failure{s};
}

// Owns a string handed out by the library.
std::string take(char* s) {
  std::string out = s ? s : "";
  sb_string_free(s);
  return out;
}

struct Overrides {
  std::optional<std::string> method;
  std::optional<double> temperature;
  std::optional<std::size_t> rounds, bon_n;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;

  void add_to(CLI::App* cmd, bool with_method) {
    if (with_method) cmd->add_option("--method", method, "Drafting method (none, sps, eagle, pld, rest, lookahead, pia, sam, recycling, hybrid)");
    cmd->add_option("--temperature", temperature, "Sampling temperature (0 = greedy)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--rounds", rounds, "Multi-round thinking turns")->check(CLI::PositiveNumber);
    cmd->add_option("--bon-n", bon_n, "Best-of-N trajectories")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "RNG seed");
    cmd->add_option("--out", out, "Results directory (overrides the config)");
  }

  void apply(sb_config* cfg) const {
    if (method) check(sb_config_set_method(cfg, method->c_str()));
    if (temperature) check(sb_config_set_temperature(cfg, *temperature));
    if (rounds) check(sb_config_set_rounds(cfg, *rounds));
    if (bon_n) check(sb_config_set_bon_n(cfg, *bon_n));
    if (seed) check(sb_config_set_seed(cfg, *seed));
    if (out) check(sb_config_set_output(cfg, out->c_str()));
  }
};

class Config {
 public:
  explicit Config(const std::string& path) { check(sb_config_load(path.c_str(), &h_)); }
  ~Config() { sb_config_free(h_); }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;
  sb_config* get() const { return h_; }

 private:
  sb_config* h_ = nullptr;
};

class Results {
 public:
  Results() = default;
  ~Results() { sb_results_free(h_); }
  Results(const Results&) = delete;
  Results& operator=(const Results&) = delete;
  sb_results** out() { return &h_; }
  sb_results* get() const { return h_; }

 private:
  sb_results* h_ = nullptr;
};

void print_summary(const sb_results* res) {
  char* text = nullptr;
  if (sb_results_report_data(res, &text) != SB_OK) {
    std::cerr << "note: metrics unavailable: " << sb_last_error() << "\n";
    return;
  }
  const auto doc = nlohmann::json::parse(take(text));
  std::printf("%-12s %-10s %6s %5s %8s %8s\n", "dataset", "method", "T", "turn", "MAT", "speedup");
  for (const auto& row : doc.at("rows")) {
    const auto& turn = row.at("turn");
    const std::string turn_s = turn.is_string() ? turn.get<std::string>() : std::to_string(turn.get<int>() + 1);
    std::printf("%-12s %-10s %6.2f %5s %8.3f %7.2fx\n", row.at("dataset").get<std::string>().c_str(),
                row.at("method").get<std::string>().c_str(), row.at("temperature").get<double>(), turn_s.c_str(),
                row.at("mat").get<double>(), row.at("speedup").get<double>());
  }
}

void write_results(const Config& cfg, const Results& res) {
  const char* dir = nullptr;
  check(sb_config_output(cfg.get(), &dir));
  check(sb_results_write(res.get(), dir));
  std::cout << "results written to " << dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speculative decoding benchmark for test-time scaling workloads"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sb_version()));

  std::string config_path;

  Overrides run_ov;
  bool no_baseline = false;
  auto* run = app.add_subcommand("run", "Run a method and its paired baseline, then write results");
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run_ov.add_to(run, true);
  run->add_flag("--no-baseline", no_baseline, "Skip the paired autoregressive run");

  Overrides base_ov;
  auto* baseline = app.add_subcommand("baseline", "Run only the autoregressive baseline");
  baseline->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  base_ov.add_to(baseline, false);

  std::vector<std::string> inputs;
  std::string report_out;
  auto* report = app.add_subcommand("report-data", "Merge results directories and emit report data JSON");
  report->add_option("results", inputs, "Results directories")->required()->check(CLI::ExistingDirectory);
  report->add_option("--out", report_out, "Output file (default: stdout)");

  Overrides val_ov;
  auto* validate = app.add_subcommand("validate", "Check a config, its capability combination and dataset");
  validate->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  val_ov.add_to(validate, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      Config cfg(config_path);
      run_ov.apply(cfg.get());
      Results res;
      check(sb_run(cfg.get(), no_baseline ? 0 : 1, res.out()));
      write_results(cfg, res);
      if (!no_baseline) print_summary(res.get());
    } else if (*baseline) {
      Config cfg(config_path);
      base_ov.apply(cfg.get());
      Results res;
      check(sb_run_baseline(cfg.get(), res.out()));
      write_results(cfg, res);
    } else if (*report) {
      Results merged;
      check(sb_results_load(inputs.front().c_str(), merged.out()));
      for (std::size_t i = 1; i < inputs.size(); ++i) {
        Results next;
        check(sb_results_load(inputs[i].c_str(), next.out()));
        check(sb_results_merge(merged.get(), next.get()));
      }
      char* text = nullptr;
      check(sb_results_report_data(merged.get(), &text));
      const std::string data = take(text);
      if (report_out.empty()) {
        std::cout << data << "\n";
      } else {
        std::ofstream f(report_out);
        if (!(f << data << "\n")) {
          std::cerr << "error: cannot write " << report_out << "\n";
          return 1;
        }
      }
    } else if (*validate) {
      Config cfg(config_path);
      val_ov.apply(cfg.get());
      char* warnings = nullptr;
      check(sb_config_validate(cfg.get(), &warnings));
      const std::string w = take(warnings);
      if (!w.empty()) std::cerr << "warning: " << w;
      std::cout << "config ok\n";
    }
  } catch (const Failure& f) {
    std::cerr << "error (" << sb_status_name(f.status) << "): " << sb_last_error() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
