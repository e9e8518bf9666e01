// congr: build consensus graphs from sampled responses and decode them.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "congr/congr.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 2;
constexpr int kExitUsage = 64;
constexpr int kExitUnavailable = 69;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string judge = "offline";
  std::string judge_url;
  std::string judge_model;
  std::string cache_path;
  int max_retries = 3;
  int backoff_ms = 500;
  std::vector<double> taus{0.5};
  double kappa = 0.7;
  std::string task_kind = "text";
  std::string task_label = "response";
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  int match = 1;
  int mismatch = -2;
  int gap_open = -1;
  int gap_extend = -1;
  std::string config;
  std::string out;
  std::string problems;
  std::size_t quantiles = 10;
  std::string overlap;
  bool json_rows = false;
  std::vector<std::string> inputs;
};

// Fills options that were not given on the command line from a JSON config.
void apply_config(CLI::App& app, Options& o) {
  if (o.config.empty()) return;
  std::ifstream in(o.config);
  if (!in) throw UsageError("cannot read config " + o.config);
  json c;
  try {
    c = json::parse(in);
  } catch (const std::exception& e) {
    throw UsageError("config " + o.config + ": " + e.what());
  }
  auto given = [&](const char* flag) {
    for (auto* sub : app.get_subcommands()) {
      try {
        if (sub->get_option(flag)->count() > 0) return true;
      } catch (const CLI::OptionNotFound&) {
      }
    }
    return false;
  };
  auto take = [&](const char* key, const char* flag, auto& field) {
    if (c.contains(key) && !given(flag)) field = c.at(key).get<std::decay_t<decltype(field)>>();
  };
  try {
    take("judge", "--judge", o.judge);
    take("judge_url", "--judge-url", o.judge_url);
    take("judge_model", "--judge-model", o.judge_model);
    take("cache_path", "--cache-path", o.cache_path);
    take("max_retries", "--max-retries", o.max_retries);
    take("backoff_ms", "--backoff-ms", o.backoff_ms);
    take("tau", "--tau", o.taus);
    take("kappa", "--kappa", o.kappa);
    take("task_kind", "--task-kind", o.task_kind);
    take("task_label", "--task-label", o.task_label);
    take("seed", "--seed", o.seed);
    take("jobs", "--jobs", o.jobs);
    take("quantiles", "--quantiles", o.quantiles);
    if (c.contains("scoring")) {
      const auto& s = c.at("scoring");
      if (s.contains("match") && !given("--match")) o.match = s.at("match").get<int>();
      if (s.contains("mismatch") && !given("--mismatch")) o.mismatch = s.at("mismatch").get<int>();
      if (s.contains("gap_open") && !given("--gap-open")) o.gap_open = s.at("gap_open").get<int>();
      if (s.contains("gap_extend") && !given("--gap-extend")) o.gap_extend = s.at("gap_extend").get<int>();
    }
  } catch (const json::exception& e) {
    throw UsageError("config " + o.config + ": " + e.what());
  }
}

void validate(const Options& o) {
  for (double t : o.taus) {
    if (!(t >= 0.0 && t <= 1.0)) throw UsageError("tau must lie in [0, 1]");
  }
  if (!(o.kappa > 0.0 && o.kappa <= 1.0)) throw UsageError("kappa must lie in (0, 1]");
  if (o.judge != "offline" && o.judge != "remote") throw UsageError("--judge must be offline or remote");
  if (o.task_kind != "text" && o.task_kind != "math") throw UsageError("--task-kind must be text or math");
  if (o.jobs == 0) throw UsageError("--jobs must be positive");
}

std::string take_string(char* s) {
  std::string out = s ? s : "";
  congr_string_free(s);
  return out;
}

// Failure carrying the library status.
struct Failure {
  congr_status status;
  std::string message;
};

void check(congr_status st) {
  if (st != CONGR_OK) throw Failure{st, congr_last_error()};
}

using JudgePtr = std::unique_ptr<congr_judge, decltype(&congr_judge_free)>;
using GraphPtr = std::unique_ptr<congr_graph, decltype(&congr_graph_free)>;
using SetPtr = std::unique_ptr<congr_response_set, decltype(&congr_response_set_free)>;

JudgePtr make_judge(const Options& o) {
  congr_judge_options opts;
  congr_judge_options_default(&opts);
  opts.kind = o.judge == "remote" ? CONGR_JUDGE_REMOTE : CONGR_JUDGE_OFFLINE;
  opts.base_url = o.judge_url.empty() ? nullptr : o.judge_url.c_str();
  opts.model = o.judge_model.empty() ? nullptr : o.judge_model.c_str();
  opts.cache_path = o.cache_path.empty() ? nullptr : o.cache_path.c_str();
  opts.max_retries = o.max_retries;
  opts.backoff_ms = o.backoff_ms;
  congr_judge* judge = nullptr;
  congr_status st = congr_judge_create(&opts, &judge);
  if (st != CONGR_OK) throw UsageError(std::string("judge: ") + congr_last_error());
  return JudgePtr(judge, congr_judge_free);
}

congr_task_kind task_of(const Options& o) { return o.task_kind == "math" ? CONGR_TASK_MATH : CONGR_TASK_TEXT; }

std::string file_stem_for(const std::string& prompt_id) {
  std::string out;
  for (char c : prompt_id) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{CONGR_ERR_IO, "cannot read " + path.string()};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure{CONGR_ERR_IO, "cannot write " + path.string()};
}

// Expands directories to their *.json files, sorted.
std::vector<fs::path> graph_files(const std::vector<std::string>& inputs) {
  if (inputs.empty()) throw UsageError("no graph inputs given");
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      out.push_back(p);
    } else {
      throw UsageError("no such input: " + in);
    }
  }
  if (out.empty()) throw UsageError("no graph files found");
  return out;
}

GraphPtr load_graph(const fs::path& path) {
  congr_graph* g = nullptr;
  check(congr_graph_from_json(read_file(path).c_str(), &g));
  return GraphPtr(g, congr_graph_free);
}

// Runs `work(i)` for i in [0, n) on up to `jobs` threads. Each item is
// processed by one thread from start to finish.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& work) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) work(i);
  };
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < std::min<std::size_t>(jobs, n); ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
}

struct Outcome {
  std::string label;
  std::optional<Failure> failure;
};

int report(const std::vector<Outcome>& outcomes) {
  bool failed = false, unavailable = false;
  for (const auto& o : outcomes) {
    if (!o.failure) continue;
    failed = true;
    unavailable |= o.failure->status == CONGR_ERR_JUDGE_TRANSPORT;
    std::cerr << "failed: " << o.label << ": " << congr_status_name(o.failure->status) << ": "
              << o.failure->message << "\n";
  }
  if (unavailable) return kExitUnavailable;
  return failed ? kExitPartial : kExitOk;
}

// Runs per-item work, turning library failures into outcomes.
std::vector<Outcome> run_items(std::size_t n, unsigned jobs, const std::function<std::string(std::size_t)>& label,
                               const std::function<void(std::size_t)>& work) {
  std::vector<Outcome> outcomes(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    outcomes[i].label = label(i);
    try {
      work(i);
    } catch (const Failure& f) {
      outcomes[i].failure = f;
    } catch (const std::exception& e) {
      outcomes[i].failure = Failure{CONGR_ERR_INTERNAL, e.what()};
    }
  });
  return outcomes;
}

void emit_lines(const Options& o, const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream text;
  for (const auto& group : rows) {
    for (const auto& line : group) text << line << "\n";
  }
  if (o.out.empty() || o.out == "-") {
    std::cout << text.str();
  } else {
    write_file(o.out, text.str());
  }
}

int cmd_build(const Options& o) {
  if (o.inputs.size() != 1) throw UsageError("build takes exactly one JSONL input");
  if (o.out.empty()) throw UsageError("build needs --out DIR");
  std::ifstream in(o.inputs[0]);
  if (!in) throw UsageError("cannot read " + o.inputs[0]);
  std::vector<std::string> lines;
  std::vector<std::size_t> line_numbers;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.push_back(line);
    line_numbers.push_back(n);
  }
  if (lines.empty()) throw UsageError("no records in " + o.inputs[0]);
  fs::create_directories(o.out);

  auto judge = make_judge(o);
  congr_scoring scoring{o.match, o.mismatch, o.gap_open, o.gap_extend};
  std::vector<std::string> labels(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    labels[i] = "line " + std::to_string(line_numbers[i]);
    try {
      auto j = json::parse(lines[i]);
      if (j.contains("prompt_id") && j["prompt_id"].is_string()) labels[i] = j["prompt_id"].get<std::string>();
    } catch (const std::exception&) {
    }
  }
  std::mutex names_mutex;
  std::map<std::string, std::size_t> claimed;
  auto outcomes = run_items(
      lines.size(), o.jobs, [&](std::size_t i) { return labels[i]; },
      [&](std::size_t i) {
        congr_response_set* raw = nullptr;
        check(congr_response_set_from_json(lines[i].c_str(), &raw));
        SetPtr rs(raw, congr_response_set_free);
        congr_graph* g = nullptr;
        check(congr_graph_build(rs.get(), &scoring, judge.get(), task_of(o), &g));
        GraphPtr graph(g, congr_graph_free);
        char* text = nullptr;
        check(congr_graph_to_json(graph.get(), &text));
        std::string name = file_stem_for(congr_response_set_prompt_id(rs.get()));
        {
          std::lock_guard lock(names_mutex);
          auto [it, fresh] = claimed.emplace(name, i);
          if (!fresh && it->second != i) throw Failure{CONGR_ERR_INVALID_ARGUMENT, "duplicate prompt_id " + name};
        }
        write_file(fs::path(o.out) / (name + ".json"), json::parse(take_string(text)).dump(2) + "\n");
      });
  return report(outcomes);
}

int cmd_decode(const Options& o) {
  auto files = graph_files(o.inputs);
  if (o.taus.empty()) throw UsageError("decode needs at least one --tau");
  auto judge = make_judge(o);
  std::vector<std::vector<std::string>> rows(files.size());
  auto outcomes = run_items(
      files.size(), o.jobs, [&](std::size_t i) { return files[i].string(); },
      [&](std::size_t i) {
        auto graph = load_graph(files[i]);
        for (double tau : o.taus) {
          char* result = nullptr;
          check(congr_consensus_decode(graph.get(), tau, judge.get(), o.task_label.c_str(), &result));
          rows[i].push_back(take_string(result));
        }
      });
  emit_lines(o, rows);
  return report(outcomes);
}

std::map<std::string, std::string> read_problems(const std::string& path) {
  std::map<std::string, std::string> out;
  if (path.empty()) return out;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read problems file " + path);
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      std::string text = j.contains("problem") ? j.at("problem").get<std::string>() : j.value("prompt", "");
      out[j.at("prompt_id").get<std::string>()] = text;
    } catch (const std::exception& e) {
      throw UsageError(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

int cmd_verify(const Options& o) {
  auto files = graph_files(o.inputs);
  auto problems = read_problems(o.problems);
  std::vector<GraphPtr> graphs;
  std::vector<std::string> texts;
  for (const auto& f : files) {
    try {
      graphs.push_back(load_graph(f));
    } catch (const Failure& fail) {
      throw UsageError(f.string() + ": " + fail.message);
    }
    std::string id = congr_graph_prompt_id(graphs.back().get());
    auto it = problems.find(id);
    std::string text = it != problems.end() ? it->second : "";
    if (text.empty()) {
      // Fall back to the prompt stored in the graph.
      char* doc = nullptr;
      check(congr_graph_to_json(graphs.back().get(), &doc));
      text = json::parse(take_string(doc)).value("prompt", "");
    }
    if (text.empty()) throw UsageError("no problem text for " + id);
    texts.push_back(text);
  }
  auto judge = make_judge(o);
  std::vector<std::vector<std::string>> rows(files.size());
  auto outcomes = run_items(
      files.size(), o.jobs, [&](std::size_t i) { return files[i].string(); },
      [&](std::size_t i) {
        char* result = nullptr;
        check(congr_guided_verify(graphs[i].get(), o.kappa, judge.get(), texts[i].c_str(), &result));
        rows[i].push_back(take_string(result));
      });
  emit_lines(o, rows);
  return report(outcomes);
}

int cmd_stats(const Options& o) {
  std::ostringstream text;
  if (!o.inputs.empty() || o.overlap.empty()) {
    auto files = graph_files(o.inputs);
    std::vector<GraphPtr> graphs;
    for (const auto& f : files) {
      try {
        graphs.push_back(load_graph(f));
      } catch (const Failure& fail) {
        std::cerr << "failed: " << f.string() << ": " << fail.message << "\n";
        return kExitPartial;
      }
    }
    if (o.json_rows) {
      for (const auto& g : graphs) {
        char* row = nullptr;
        check(congr_graph_stats(g.get(), &row));
        text << take_string(row) << "\n";
      }
    } else {
      std::vector<const congr_graph*> raw;
      for (const auto& g : graphs) raw.push_back(g.get());
      char* table = nullptr;
      check(congr_stats_table(raw.data(), raw.size(), &table));
      text << take_string(table);
    }
  }
  if (!o.overlap.empty()) {
    std::ifstream in(o.overlap);
    if (!in) throw UsageError("cannot read " + o.overlap);
    std::vector<double> real(o.quantiles, 0.0), shuffled(o.quantiles, 0.0);
    std::size_t used = 0;
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      congr_response_set* raw = nullptr;
      if (congr_response_set_from_json(line.c_str(), &raw) != CONGR_OK) {
        std::cerr << "skipped record: " << congr_last_error() << "\n";
        continue;
      }
      SetPtr rs(raw, congr_response_set_free);
      std::vector<double> a(o.quantiles), b(o.quantiles);
      if (congr_overlap_profile(rs.get(), o.quantiles, 0, o.seed, a.data(), a.size()) != CONGR_OK ||
          congr_overlap_profile(rs.get(), o.quantiles, 1, o.seed, b.data(), b.size()) != CONGR_OK) {
        std::cerr << "skipped " << congr_response_set_prompt_id(rs.get()) << ": " << congr_last_error() << "\n";
        continue;
      }
      for (std::size_t q = 0; q < o.quantiles; ++q) {
        real[q] += a[q];
        shuffled[q] += b[q];
      }
      ++used;
    }
    if (used == 0) throw UsageError("no usable records in " + o.overlap);
    text << "quantile  overlap  shuffled\n";
    char buf[96];
    for (std::size_t q = 0; q < o.quantiles; ++q) {
      std::snprintf(buf, sizeof buf, "%8zu  %7.4f  %8.4f\n", q + 1, real[q] / double(used), shuffled[q] / double(used));
      text << buf;
    }
  }
  if (o.out.empty() || o.out == "-") {
    std::cout << text.str();
  } else {
    write_file(o.out, text.str());
  }
  return kExitOk;
}

int cmd_export_dot(const Options& o) {
  auto files = graph_files(o.inputs);
  if (o.out.empty()) throw UsageError("export-dot needs --out DIR");
  auto outcomes = run_items(
      files.size(), o.jobs, [&](std::size_t i) { return files[i].string(); },
      [&](std::size_t i) {
        auto graph = load_graph(files[i]);
        char* dot = nullptr;
        check(congr_graph_to_dot(graph.get(), &dot));
        write_file(fs::path(o.out) / (files[i].stem().string() + ".dot"), take_string(dot));
      });
  return report(outcomes);
}

int cmd_cache_info(const Options& o) {
  if (o.cache_path.empty()) throw UsageError("cache-info needs --cache-path");
  char* info = nullptr;
  if (congr_cache_info(o.cache_path.c_str(), &info) != CONGR_OK) {
    std::cerr << congr_last_error() << "\n";
    return kExitUsage;
  }
  std::cout << json::parse(take_string(info)).dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consensus graphs over sampled LM responses"};
  app.require_subcommand(1);
  app.set_version_flag("--version", congr_version());
  Options o;

  auto judge_flags = [&](CLI::App* sub) {
    sub->add_option("--judge", o.judge, "offline or remote")->check(CLI::IsMember({"offline", "remote"}));
    sub->add_option("--judge-url", o.judge_url, "chat-completions base URL");
    sub->add_option("--judge-model", o.judge_model, "remote model name");
    sub->add_option("--cache-path", o.cache_path, "verdict cache (JSONL)");
    sub->add_option("--max-retries", o.max_retries, "remote retries after the first attempt");
    sub->add_option("--backoff-ms", o.backoff_ms, "initial retry delay");
    sub->add_option("--jobs,-j", o.jobs, "records processed in parallel");
    sub->add_option("--config", o.config, "JSON config; flags take precedence");
  };

  auto* build = app.add_subcommand("build", "Build one graph file per input record");
  build->add_option("input", o.inputs, "responses JSONL")->required();
  build->add_option("--out,-o", o.out, "output directory")->required();
  build->add_option("--task-kind", o.task_kind, "text or math");
  build->add_option("--match", o.match);
  build->add_option("--mismatch", o.mismatch);
  build->add_option("--gap-open", o.gap_open);
  build->add_option("--gap-extend", o.gap_extend);
  judge_flags(build);

  auto* decode = app.add_subcommand("decode", "Consensus decoding at one or more thresholds");
  decode->add_option("graphs", o.inputs, "graph files or directories")->required();
  decode->add_option("--tau", o.taus, "support threshold (repeatable)");
  decode->add_option("--task-label", o.task_label, "task name shown to the edit step");
  decode->add_option("--out,-o", o.out, "results JSONL (default stdout)");
  judge_flags(decode);

  auto* verify = app.add_subcommand("verify", "Guided self-verification");
  verify->add_option("graphs", o.inputs, "graph files or directories")->required();
  verify->add_option("--problems", o.problems, "JSONL of {prompt_id, problem}");
  verify->add_option("--kappa", o.kappa, "branching trigger");
  verify->add_option("--out,-o", o.out, "results JSONL (default stdout)");
  judge_flags(verify);

  auto* stats = app.add_subcommand("stats", "Structural statistics table");
  stats->add_option("graphs", o.inputs, "graph files or directories");
  stats->add_flag("--json", o.json_rows, "one JSON object per graph instead of a table");
  stats->add_option("--overlap", o.overlap, "responses JSONL for the lexical overlap profile");
  stats->add_option("--quantiles", o.quantiles, "overlap segments")->check(CLI::PositiveNumber);
  stats->add_option("--seed", o.seed, "shuffle seed for the overlap baseline");
  stats->add_option("--out,-o", o.out, "output file (default stdout)");
  stats->add_option("--config", o.config, "JSON config; flags take precedence");

  auto* dot = app.add_subcommand("export-dot", "Write Graphviz files");
  dot->add_option("graphs", o.inputs, "graph files or directories")->required();
  dot->add_option("--out,-o", o.out, "output directory")->required();
  dot->add_option("--jobs,-j", o.jobs, "files processed in parallel");

  auto* cache = app.add_subcommand("cache-info", "Summarize a verdict cache");
  cache->add_option("--cache-path", o.cache_path, "verdict cache (JSONL)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    apply_config(app, o);
    validate(o);
    if (build->parsed()) return cmd_build(o);
    if (decode->parsed()) return cmd_decode(o);
    if (verify->parsed()) return cmd_verify(o);
    if (stats->parsed()) return cmd_stats(o);
    if (dot->parsed()) return cmd_export_dot(o);
    if (cache->parsed()) return cmd_cache_info(o);
  } catch (const UsageError& e) {
    std::cerr << "congr: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Failure& f) {
    std::cerr << "congr: " << f.message << "\n";
    return f.status == CONGR_ERR_JUDGE_TRANSPORT ? kExitUnavailable : kExitPartial;
  } catch (const std::exception& e) {
    std::cerr << "congr: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitUsage;
}
