#include "results.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "errors.hpp"
#include "json.hpp"

namespace specbench {

using nlohmann::json;

PhaseFractions phase_fractions(const PhaseTimes& t) {
  const double total = static_cast<double>(t.total());
  if (total <= 0.0) return {0.25, 0.25, 0.25, 0.25};
  PhaseFractions f{t.draft / total, t.decode / total, t.verify / total, 0.0};
  f.update = 1.0 - f.draft - f.decode - f.verify;
  return f;
}

const MetricsRow* RunMetrics::find(const std::string& dataset, Method m, double temperature,
                                   std::optional<std::size_t> turn) const {
  for (const auto& r : rows) {
    if (r.dataset == dataset && r.method == m && r.temperature == temperature && r.turn == turn) return &r;
  }
  return nullptr;
}

namespace {

using TrajKey = std::tuple<std::string, std::size_t, std::size_t>;  // problem, trajectory, turn

const RunRecord& baseline_for(const std::vector<RunRecord>& runs, const RunRecord& run) {
  if (run.method == Method::kNone) return run;
  for (const auto& b : runs) {
    if (b.method == Method::kNone && b.dataset == run.dataset && b.temperature == run.temperature &&
        b.seed == run.seed && b.bon_n == run.bon_n && b.rounds == run.rounds) {
      return b;
    }
  }
  throw MissingBaseline("no autoregressive baseline for run '" + run.run_id + "' (dataset " + run.dataset +
                        ", T=" + std::to_string(run.temperature) + ", seed " + std::to_string(run.seed) + ")");
}

struct Accumulator {
  std::size_t steps = 0;
  std::size_t tokens = 0;
  std::size_t accepted = 0;
  std::int64_t wall = 0;
  std::int64_t baseline_wall = 0;
  PhaseTimes phases;
  std::map<std::size_t, MatchLenBin> histogram;

  void add(const TrajectoryRecord& rec, std::int64_t base_wall, std::size_t warmup) {
    const auto& r = rec.result;
    steps += r.steps.size();
    tokens += r.tokens.size();
    wall += r.wall_time;
    baseline_wall += base_wall;
    for (const auto& s : r.steps) {
      accepted += s.accepted_count;
      auto& bin = histogram[s.match_len];
      ++bin.steps;
      bin.accepted += s.accepted_count;
      if (s.step_index >= warmup) phases += s.phases;
    }
  }
};

}  // namespace

RunMetrics compute_metrics(const std::vector<RunRecord>& runs) {
  // (dataset, method, T, turn or -1 for all turns)
  using CellKey = std::tuple<std::string, Method, double, std::int64_t>;
  std::map<CellKey, Accumulator> cells;
  for (const auto& run : runs) {
    const RunRecord& base = baseline_for(runs, run);
    std::map<TrajKey, std::int64_t> base_walls;
    for (const auto& t : base.trajectories) {
      base_walls[{t.problem_id, t.trajectory_index, t.turn_index}] = t.result.wall_time;
    }
    for (const auto& t : run.trajectories) {
      auto it = base_walls.find({t.problem_id, t.trajectory_index, t.turn_index});
      if (it == base_walls.end()) {
        throw MissingBaseline("baseline run '" + base.run_id + "' lacks problem '" + t.problem_id + "' turn " +
                              std::to_string(t.turn_index));
      }
      cells[{run.dataset, run.method, run.temperature, static_cast<std::int64_t>(t.turn_index)}].add(
          t, it->second, run.warmup_steps);
      cells[{run.dataset, run.method, run.temperature, -1}].add(t, it->second, run.warmup_steps);
    }
  }
  RunMetrics out;
  for (const auto& [key, acc] : cells) {
    MetricsRow row;
    row.dataset = std::get<0>(key);
    row.method = std::get<1>(key);
    row.temperature = std::get<2>(key);
    if (std::get<3>(key) >= 0) row.turn = static_cast<std::size_t>(std::get<3>(key));
    row.steps = acc.steps;
    row.tokens = acc.tokens;
    row.mat = acc.steps == 0 ? 0.0 : static_cast<double>(acc.accepted) / static_cast<double>(acc.steps);
    row.wall_time = acc.wall;
    row.baseline_wall_time = acc.baseline_wall;
    if (row.method == Method::kNone) {
      row.speedup = 1.0;
    } else {
      row.speedup = acc.wall > 0 ? static_cast<double>(acc.baseline_wall) / static_cast<double>(acc.wall) : 0.0;
    }
    row.phases = phase_fractions(acc.phases);
    row.histogram = acc.histogram;
    out.rows.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

json step_json(const StepTrace& s) {
  return json{{"step_index", s.step_index},   {"draft_ns", s.phases.draft},   {"decode_ns", s.phases.decode},
              {"verify_ns", s.phases.verify}, {"update_ns", s.phases.update}, {"wall_ns", s.wall},
              {"accepted_count", s.accepted_count}, {"match_len", s.match_len}, {"draft_size", s.draft_size},
              {"origin", to_string(s.origin)}};
}

StepTrace step_from(const json& j) {
  StepTrace s;
  s.step_index = j.at("step_index").get<std::size_t>();
  s.phases.draft = j.at("draft_ns").get<std::int64_t>();
  s.phases.decode = j.at("decode_ns").get<std::int64_t>();
  s.phases.verify = j.at("verify_ns").get<std::int64_t>();
  s.phases.update = j.at("update_ns").get<std::int64_t>();
  s.wall = j.at("wall_ns").get<std::int64_t>();
  s.accepted_count = j.at("accepted_count").get<std::size_t>();
  s.match_len = j.at("match_len").get<std::size_t>();
  s.draft_size = j.at("draft_size").get<std::size_t>();
  s.origin = method_from_string(j.at("origin").get<std::string>());
  return s;
}

json trajectory_json(const std::string& run_id, const TrajectoryRecord& t) {
  json steps = json::array();
  for (const auto& s : t.result.steps) steps.push_back(step_json(s));
  return json{{"run_id", run_id},
              {"problem_id", t.problem_id},
              {"source", t.source},
              {"trajectory_index", t.trajectory_index},
              {"turn_index", t.turn_index},
              {"method", to_string(t.result.method)},
              {"prompt_len", t.result.prompt_len},
              {"tokens", t.result.tokens},
              {"answer", t.answer},
              {"wall_time_ns", t.result.wall_time},
              {"oracle_batches", t.result.oracle_batches},
              {"hit_stop_token", t.result.hit_stop_token},
              {"steps", steps}};
}

TrajectoryRecord trajectory_from(const json& j) {
  TrajectoryRecord t;
  t.problem_id = j.at("problem_id").get<std::string>();
  t.source = j.at("source").get<std::string>();
  t.trajectory_index = j.at("trajectory_index").get<std::size_t>();
  t.turn_index = j.at("turn_index").get<std::size_t>();
  t.answer = j.at("answer").get<std::vector<Token>>();
  auto& r = t.result;
  r.method = method_from_string(j.at("method").get<std::string>());
  r.prompt_len = j.at("prompt_len").get<std::size_t>();
  r.tokens = j.at("tokens").get<std::vector<Token>>();
  r.wall_time = j.at("wall_time_ns").get<std::int64_t>();
  r.oracle_batches = j.at("oracle_batches").get<std::size_t>();
  r.hit_stop_token = j.at("hit_stop_token").get<bool>();
  r.turn_index = t.turn_index;
  r.trajectory_index = t.trajectory_index;
  for (const auto& s : j.at("steps")) r.steps.push_back(step_from(s));
  return t;
}

json run_meta_json(const RunRecord& r) {
  return json{{"run_id", r.run_id},   {"dataset", r.dataset},         {"method", to_string(r.method)},
              {"temperature", r.temperature}, {"seed", r.seed},       {"bon_n", r.bon_n},
              {"rounds", r.rounds},   {"budget", r.budget},           {"baseline", r.baseline},
              {"warmup_steps", r.warmup_steps}, {"selected", r.selected},
              {"trajectory_count", r.trajectories.size()}};
}

RunRecord run_meta_from(const json& j) {
  RunRecord r;
  r.run_id = j.at("run_id").get<std::string>();
  r.dataset = j.at("dataset").get<std::string>();
  r.method = method_from_string(j.at("method").get<std::string>());
  r.temperature = j.at("temperature").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.bon_n = j.at("bon_n").get<std::size_t>();
  r.rounds = j.at("rounds").get<std::size_t>();
  r.budget = j.at("budget").get<std::size_t>();
  r.baseline = j.at("baseline").get<bool>();
  r.warmup_steps = j.at("warmup_steps").get<std::size_t>();
  r.selected = j.at("selected").get<std::map<std::string, std::size_t>>();
  return r;
}

json metrics_json(const RunMetrics& m) {
  json rows = json::array();
  for (const auto& r : m.rows) {
    json hist = json::array();
    for (const auto& [len, bin] : r.histogram) {
      hist.push_back({{"match_len", len}, {"steps", bin.steps}, {"accepted", bin.accepted},
                      {"mean_accepted", bin.mean_accepted()}});
    }
    rows.push_back({{"dataset", r.dataset},
                    {"method", to_string(r.method)},
                    {"temperature", r.temperature},
                    {"turn", r.turn ? json(*r.turn) : json("all")},
                    {"steps", r.steps},
                    {"tokens", r.tokens},
                    {"mat", r.mat},
                    {"speedup", r.speedup},
                    {"wall_time_ns", r.wall_time},
                    {"baseline_wall_time_ns", r.baseline_wall_time},
                    {"phase_fractions",
                     {{"draft", r.phases.draft},
                      {"decode", r.phases.decode},
                      {"verify", r.phases.verify},
                      {"update", r.phases.update}}},
                    {"match_len_histogram", hist}});
  }
  return rows;
}

RunMetrics metrics_from(const json& rows) {
  RunMetrics m;
  for (const auto& j : rows) {
    MetricsRow r;
    r.dataset = j.at("dataset").get<std::string>();
    r.method = method_from_string(j.at("method").get<std::string>());
    r.temperature = j.at("temperature").get<double>();
    if (!j.at("turn").is_string()) r.turn = j.at("turn").get<std::size_t>();
    r.steps = j.at("steps").get<std::size_t>();
    r.tokens = j.at("tokens").get<std::size_t>();
    r.mat = j.at("mat").get<double>();
    r.speedup = j.at("speedup").get<double>();
    r.wall_time = j.at("wall_time_ns").get<std::int64_t>();
    r.baseline_wall_time = j.at("baseline_wall_time_ns").get<std::int64_t>();
    const auto& p = j.at("phase_fractions");
    r.phases = {p.at("draft").get<double>(), p.at("decode").get<double>(), p.at("verify").get<double>(),
                p.at("update").get<double>()};
    for (const auto& h : j.at("match_len_histogram")) {
      r.histogram[h.at("match_len").get<std::size_t>()] =
          MatchLenBin{h.at("steps").get<std::size_t>(), h.at("accepted").get<std::size_t>()};
    }
    m.rows.push_back(std::move(r));
  }
  return m;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_version(const json& j, const char* format, int version) {
  if (!j.is_object() || j.value("format", "") != format) throw SchemaError(std::string("not a ") + format + " file");
  const int v = j.value("schema_version", -1);
  if (v != version) {
    throw SchemaError(std::string(format) + " schema_version " + std::to_string(v) + " not supported (expected " +
                      std::to_string(version) + ")");
  }
}

}  // namespace

void persist_results(const ResultsDocument& doc, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream traces(dir / "traces.jsonl");
    if (!traces) throw IoError("cannot write " + (dir / "traces.jsonl").string());
    for (const auto& run : doc.runs) {
      for (const auto& t : run.trajectories) traces << trajectory_json(run.run_id, t).dump() << '\n';
    }
  }
  json runs = json::array();
  for (const auto& r : doc.runs) runs.push_back(run_meta_json(r));
  json summary{{"format", "specbench-results"}, {"schema_version", doc.schema_version}, {"runs", runs}};
  try {
    summary["metrics"] = metrics_json(compute_metrics(doc.runs));
  } catch (const MissingBaseline& e) {
    summary["metrics"] = nullptr;
    summary["metrics_error"] = e.what();
  }
  std::ofstream out(dir / "summary.json");
  if (!out) throw IoError("cannot write " + (dir / "summary.json").string());
  out << summary.dump(2) << '\n';
}

ResultsDocument load_results(const std::filesystem::path& dir) {
  json summary;
  try {
    summary = json::parse(read_file(dir / "summary.json"));
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("summary.json: ") + e.what());
  }
  check_version(summary, "specbench-results", kResultsSchemaVersion);
  ResultsDocument doc;
  doc.schema_version = summary.at("schema_version").get<int>();
  std::map<std::string, std::size_t> index;
  std::map<std::string, std::size_t> expected;
  try {
    for (const auto& r : summary.at("runs")) {
      index[r.at("run_id").get<std::string>()] = doc.runs.size();
      expected[r.at("run_id").get<std::string>()] = r.at("trajectory_count").get<std::size_t>();
      doc.runs.push_back(run_meta_from(r));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("summary.json: ") + e.what());
  }
  std::istringstream traces(read_file(dir / "traces.jsonl"));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(traces, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      auto it = index.find(j.at("run_id").get<std::string>());
      if (it == index.end()) throw SchemaError("trace references unknown run", line_no);
      doc.runs[it->second].trajectories.push_back(trajectory_from(j));
    } catch (const json::exception& e) {
      throw SchemaError(std::string("traces.jsonl: ") + e.what(), line_no);
    }
  }
  for (const auto& r : doc.runs) {
    if (r.trajectories.size() != expected[r.run_id]) {
      throw SchemaError("run '" + r.run_id + "' expects " + std::to_string(expected[r.run_id]) +
                        " trajectories, traces hold " + std::to_string(r.trajectories.size()));
    }
  }
  return doc;
}

ResultsDocument merge_results(const std::vector<ResultsDocument>& docs) {
  ResultsDocument out;
  std::set<std::string> ids;
  for (const auto& d : docs) {
    if (d.schema_version != kResultsSchemaVersion) throw SchemaError("cannot merge mismatched schema versions");
    for (const auto& r : d.runs) {
      if (!ids.insert(r.run_id).second) throw InvalidArgument("duplicate run id '" + r.run_id + "' in merge");
      out.runs.push_back(r);
    }
  }
  return out;
}

std::string report_data_json(const RunMetrics& metrics) {
  json j{{"format", "specbench-report-data"},
         {"schema_version", kReportDataSchemaVersion},
         {"rows", metrics_json(metrics)}};
  return j.dump(2);
}

RunMetrics report_data_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(e.what());
  }
  check_version(j, "specbench-report-data", kReportDataSchemaVersion);
  try {
    return metrics_from(j.at("rows"));
  } catch (const json::exception& e) {
    throw SchemaError(e.what());
  }
}

}  // namespace specbench
