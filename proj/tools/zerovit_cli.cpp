// zerovit command-line tool: score, search, bench, eval, rerun.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "zerovit/zerovit.h"

namespace {

using nlohmann::json;

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kConfig = 3, kNumeric = 4, kInfeasible = 5 };

int exit_code(zv_status s) {
  switch (s) {
    case ZV_OK: return kOk;
    case ZV_ERR_USAGE: return kUsage;
    case ZV_ERR_CONFIG:
    case ZV_ERR_MALFORMED_JSON:
    case ZV_ERR_MISSING_FIELD:
    case ZV_ERR_SHAPE: return kConfig;
    case ZV_ERR_NUMERIC: return kNumeric;
    case ZV_ERR_INFEASIBLE: return kInfeasible;
    default: return kFailure;
  }
}

struct Failure {
  int code;
  std::string message;
};

void check(zv_status s, const std::string& what) {
  if (s != ZV_OK) throw Failure{exit_code(s), what + ": " + zv_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
template <typename T, void (*Free)(T*)>
using Handle = std::unique_ptr<T, Deleter<T, Free>>;

using Config = Handle<zv_config, zv_config_free>;
using Space = Handle<zv_space, zv_space_free>;
using ConfigList = Handle<zv_config_list, zv_config_list_free>;
using Reports = Handle<zv_report_list, zv_report_list_free>;
using Bench = Handle<zv_bench, zv_bench_free>;
using Tau = Handle<zv_tau_report, zv_tau_report_free>;

std::string take(char* s) {
  std::string out = s ? s : "";
  zv_string_free(s);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kUsage, "cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Failure{kFailure, "cannot write " + path};
}

std::string sibling(const std::string& out, const std::string& suffix) {
  const std::string ext = ".jsonl";
  if (out.size() > ext.size() && out.compare(out.size() - ext.size(), ext.size(), ext) == 0) {
    return out.substr(0, out.size() - ext.size()) + suffix;
  }
  return out + suffix;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

zv_seed_policy parse_policy(const std::string& name) {
  return name == "fixed" ? ZV_SEED_FIXED : ZV_SEED_CONFIG_HASH;
}

struct Common {
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  std::string seed_policy = "hash";
  std::string out;
};

json streams(std::uint64_t seed) {
  return {{"sampling", hex16(zv_derive_seed(seed, "sampling"))},
          {"init", hex16(zv_derive_seed(seed, "init"))},
          {"task", hex16(zv_derive_seed(seed, "task"))}};
}

// Written next to every output; "args" replays the run via `zerovit rerun`.
void write_manifest(const std::string& command, const std::vector<std::string>& args, const Common& c,
                    json extra, const std::vector<std::string>& outputs) {
  json m = std::move(extra);
  m["command"] = command;
  m["args"] = args;
  m["seed"] = c.seed;
  m["seed_policy"] = c.seed_policy;
  m["streams"] = streams(c.seed);
  m["jobs"] = c.jobs == 0 ? zv_default_jobs() : c.jobs;
  m["outputs"] = outputs;
  m["timestamp"] = utc_now();
  m["version"] = zv_version();
  write_file(sibling(c.out, ".manifest.json"), m.dump(2) + "\n");
}

Space load_space(const std::string& path) {
  zv_space* s = nullptr;
  check(zv_space_decode(read_file(path).c_str(), &s), "search space " + path);
  return Space(s);
}

std::string report_lines(const zv_report_list* reports, const std::vector<std::size_t>& order) {
  std::string text;
  for (std::size_t i : order) {
    char* line = nullptr;
    check(zv_report_list_json(reports, i, &line), "report");
    text += take(line);
    text += '\n';
  }
  return text;
}

int cmd_score(const std::vector<std::string>& args, const Common& c, const std::string& config_path,
              const std::string& proxy) {
  zv_config* cfg = nullptr;
  check(zv_config_decode(read_file(config_path).c_str(), &cfg), "config " + config_path);
  Config config(cfg);
  zv_config_list* list = nullptr;
  check(zv_config_list_from_config(config.get(), &list), "config");
  ConfigList configs(list);
  zv_report_list* r = nullptr;
  check(zv_score_list(configs.get(), proxy.c_str(), parse_policy(c.seed_policy), zv_derive_seed(c.seed, "init"),
                      c.jobs, &r),
        "scoring");
  Reports reports(r);
  write_file(c.out, report_lines(reports.get(), {0}));
  write_manifest("score", args, c, {{"config", config_path}, {"proxy", proxy}}, {c.out});
  return kOk;
}

int cmd_search(const std::vector<std::string>& args, const Common& c, const std::string& space_path,
               std::size_t n, std::uint64_t param_min, std::uint64_t param_max, bool constrained,
               const std::string& proxy, std::size_t top, std::uint64_t max_tries) {
  if (n == 0) throw Failure{kUsage, "--n must be at least 1"};
  Space space = load_space(space_path);
  if (constrained) check(zv_space_set_param_range(space.get(), param_min, param_max), "param range");

  zv_config_list* list = nullptr;
  std::uint64_t nearest = 0;
  const zv_status st =
      zv_space_sample_many(space.get(), n, zv_derive_seed(c.seed, "sampling"), max_tries, &list, &nearest);
  if (st == ZV_ERR_INFEASIBLE) {
    throw Failure{kInfeasible, std::string("constraint infeasible: ") + zv_last_error()};
  }
  check(st, "sampling");
  ConfigList configs(list);

  zv_report_list* r = nullptr;
  check(zv_score_list(configs.get(), proxy.c_str(), parse_policy(c.seed_policy), zv_derive_seed(c.seed, "init"),
                      c.jobs, &r),
        "scoring");
  Reports reports(r);
  const std::size_t count = zv_report_list_size(reports.get());
  std::vector<std::size_t> all(count);
  for (std::size_t i = 0; i < count; ++i) all[i] = i;

  std::vector<std::size_t> best(std::min(top, count));
  std::size_t kept = 0;
  check(zv_report_list_rank(reports.get(), best.size(), best.data(), &kept), "ranking");
  best.resize(kept);

  const std::string top_path = sibling(c.out, ".top.jsonl");
  write_file(c.out, report_lines(reports.get(), all));
  write_file(top_path, report_lines(reports.get(), best));
  json extra{{"space", space_path}, {"n_samples", n}, {"proxy", proxy}, {"top", top}, {"max_tries", max_tries}};
  if (constrained) extra["param_range"] = {param_min, param_max};
  write_manifest("search", args, c, extra, {c.out, top_path});
  return kOk;
}

int cmd_bench(const std::vector<std::string>& args, const Common& c, const std::string& space_path, std::size_t n,
              std::size_t budget) {
  if (n == 0) throw Failure{kUsage, "--n must be at least 1"};
  Space space = load_space(space_path);
  zv_bench* b = nullptr;
  check(zv_bench_build(space.get(), n, budget, c.seed, zv_derive_seed(c.seed, "task"), c.jobs, &b), "benchmark");
  Bench bench(b);
  char* text = nullptr;
  check(zv_bench_encode(bench.get(), &text), "benchmark");
  write_file(c.out, take(text));
  write_manifest("bench", args, c, {{"space", space_path}, {"n_samples", n}, {"budget", budget}}, {c.out});
  return kOk;
}

std::vector<std::string> split_proxies(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const std::string& item : raw) {
    std::stringstream ss(item);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (!name.empty()) out.push_back(name);
    }
  }
  return out;
}

int cmd_eval(const std::vector<std::string>& args, const Common& c, const std::string& bench_path,
             const std::vector<std::string>& proxy_args, bool lenient) {
  const std::vector<std::string> proxies = split_proxies(proxy_args);
  if (proxies.empty()) throw Failure{kUsage, "--proxy needs at least one name"};
  for (const std::string& p : proxies) {
    if (!zv_proxy_known(p.c_str())) throw Failure{kUsage, "unknown proxy \"" + p + "\""};
  }
  zv_bench* b = nullptr;
  check(zv_bench_decode(read_file(bench_path).c_str(), &b), "benchmark " + bench_path);
  Bench bench(b);

  std::vector<Tau> reports;
  std::string jsonl;
  std::vector<std::string> outputs{c.out};
  for (const std::string& p : proxies) {
    zv_tau_report* t = nullptr;
    check(zv_evaluate(bench.get(), p.c_str(), parse_policy(c.seed_policy), zv_derive_seed(c.seed, "init"), c.jobs,
                      lenient ? 0 : 1, &t),
          "evaluating " + p);
    reports.emplace_back(t);
    char* line = nullptr;
    check(zv_tau_report_json(t, &line), "tau report");
    jsonl += take(line) + "\n";
    char* csv = nullptr;
    check(zv_tau_report_scatter_csv(t, &csv), "scatter");
    const std::string csv_path = sibling(c.out, "." + p + ".scatter.csv");
    write_file(csv_path, take(csv));
    outputs.push_back(csv_path);
  }
  write_file(c.out, jsonl);

  std::vector<const zv_tau_report*> raw;
  for (const Tau& t : reports) raw.push_back(t.get());
  char* table = nullptr;
  check(zv_tau_report_table(raw.data(), raw.size(), &table), "table");
  const std::string table_text = take(table);
  const std::string table_path = sibling(c.out, ".table.txt");
  write_file(table_path, table_text);
  outputs.push_back(table_path);
  std::cout << table_text;

  write_manifest("eval", args, c, {{"bench", bench_path}, {"proxies", proxies}, {"strict", !lenient}}, outputs);
  return kOk;
}

int run(std::vector<std::string> args);

int cmd_rerun(const std::string& manifest_path) {
  json m;
  try {
    m = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw Failure{kConfig, "manifest " + manifest_path + ": " + e.what()};
  }
  if (!m.contains("args") || !m["args"].is_array()) throw Failure{kConfig, "manifest has no \"args\" array"};
  return run(m["args"].get<std::vector<std::string>>());
}

void add_common(CLI::App* cmd, Common& c, bool needs_seed_policy = true) {
  cmd->add_option("--seed", c.seed, "Root seed; sampling, init and task streams derive from it");
  cmd->add_option("--jobs", c.jobs, "Worker threads (default: ZEROVIT_JOBS or all cores)");
  cmd->add_option("--out", c.out, "Output file")->required();
  if (needs_seed_policy) {
    cmd->add_option("--seed-policy", c.seed_policy, "Init seed per config: hash (derived from config) or fixed")
        ->check(CLI::IsMember({"hash", "fixed"}));
  }
}

int run(std::vector<std::string> args) {
  CLI::App app{"Zero-cost ViT architecture scoring"};
  app.set_version_flag("--version", std::string(zv_version()));
  app.require_subcommand(1);

  Common common;
  std::string config_path, space_path, bench_path, manifest_path, proxy = "dss";
  std::vector<std::string> proxies;
  std::size_t n = 8000, top = 10, budget = 1500;
  std::uint64_t param_min = 0, param_max = UINT64_MAX, max_tries = 10000;
  bool lenient = false;

  CLI::App* score = app.add_subcommand("score", "Score one architecture");
  score->add_option("--config", config_path, "Architecture JSON")->required()->check(CLI::ExistingFile);
  score->add_option("--proxy", proxy, "Proxy name");
  add_common(score, common);

  CLI::App* search = app.add_subcommand("search", "Sample, score and rank architectures");
  search->add_option("--space", space_path, "Search space JSON")->required()->check(CLI::ExistingFile);
  search->add_option("--n", n, "Number of samples");
  CLI::Option* min_opt = search->add_option("--param-min", param_min, "Minimum parameter count");
  CLI::Option* max_opt = search->add_option("--param-max", param_max, "Maximum parameter count");
  search->add_option("--proxy", proxy, "Proxy name");
  search->add_option("--top", top, "Ranked list length");
  search->add_option("--max-tries", max_tries, "Rejection sampling attempts per draw");
  add_common(search, common);

  CLI::App* bench = app.add_subcommand("bench", "Toy-train sampled architectures into a benchmark");
  bench->add_option("--space", space_path, "Search space JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("--n", n, "Number of architectures")->required();
  bench->add_option("--budget", budget, "SGD steps per architecture");
  add_common(bench, common, false);

  CLI::App* eval = app.add_subcommand("eval", "Kendall tau of proxies against a benchmark");
  eval->add_option("--bench", bench_path, "Benchmark JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--proxy", proxies, "Proxy names, comma separated")->required();
  eval->add_flag("--lenient", lenient, "Skip entries whose scoring fails");
  add_common(eval, common);

  CLI::App* rerun = app.add_subcommand("rerun", "Repeat the run recorded in a manifest");
  rerun->add_option("--manifest", manifest_path, "Manifest JSON")->required()->check(CLI::ExistingFile);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*score) return cmd_score(args, common, config_path, proxy);
    if (*search) {
      const bool constrained = min_opt->count() > 0 || max_opt->count() > 0;
      return cmd_search(args, common, space_path, n, param_min, param_max, constrained, proxy, top, max_tries);
    }
    if (*bench) return cmd_bench(args, common, space_path, n, budget);
    if (*eval) return cmd_eval(args, common, bench_path, proxies, lenient);
    if (*rerun) return cmd_rerun(manifest_path);
  } catch (const Failure& f) {
    std::cerr << "zerovit: " << f.message << "\n";
    return f.code;
  }
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Training allocates and frees the same large buffers every step; keep
  // them on the heap instead of round-tripping through mmap.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  return run(std::vector<std::string>(argv + 1, argv + argc));
}
