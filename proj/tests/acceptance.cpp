// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Pass criterion numbers as arguments to run a subset.

#include <Eigen/Dense>
#include <json.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "test_util.hpp"
#include "zerovit/harness.hpp"
#include "zerovit/linalg.hpp"
#include "zerovit/parallel.hpp"
#include "zerovit/proxies.hpp"
#include "zerovit/random.hpp"
#include "zerovit/searchspace.hpp"
#include "zerovit/vit.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace zerovit;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------- files & CLI

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "zerovit_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string in_work(const std::string& name) { return (work_dir() / name).string(); }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(ZEROVIT_CLI_PATH) + " " + args + " >>" + in_work("cli.log") + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ------------------------------------------------------------------- schemas

bool is_number(const json& j) { return j.is_number(); }

bool valid_config(const json& c) {
  for (const char* k : {"img_size", "patch_size", "num_classes", "embed_dim", "depth"}) {
    if (!c.contains(k) || !c[k].is_number_integer() || c[k].get<long long>() <= 0) return false;
  }
  if (!c.contains("qkv_bias") || !c["qkv_bias"].is_boolean()) return false;
  const auto depth = c["depth"].get<std::size_t>();
  if (!c.contains("heads") || !c["heads"].is_array() || c["heads"].size() != depth) return false;
  if (!c.contains("mlp_ratio") || !c["mlp_ratio"].is_array() || c["mlp_ratio"].size() != depth) return false;
  for (const json& h : c["heads"])
    if (!h.is_number_integer() || c["embed_dim"].get<int>() % h.get<int>() != 0) return false;
  for (const json& r : c["mlp_ratio"])
    if (!is_number(r) || r.get<double>() <= 0) return false;
  if (c.size() != 8) return false;
  try {
    validate(decode(c.dump()));
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

bool valid_hex16(const json& j) {
  static const std::regex hex("[0-9a-f]{16}");
  return j.is_string() && std::regex_match(j.get<std::string>(), hex);
}

bool valid_report(const json& r, const std::string& proxy) {
  if (!r.is_object() || !r.contains("config") || !valid_config(r["config"])) return false;
  if (!valid_hex16(r["config_hash"])) return false;
  if (!r.contains("proxy") || r["proxy"] != proxy) return false;
  if (!r.contains("score") || !is_number(r["score"]) || !std::isfinite(r["score"].get<double>())) return false;
  if (!r.contains("params") || !r["params"].is_number_unsigned()) return false;
  if (!r.contains("elapsed_ms") || !is_number(r["elapsed_ms"]) || r["elapsed_ms"].get<double>() < 0) return false;
  for (const char* k : {"d_msa", "s_mlp"}) {
    if (!r.contains(k) || !r[k].is_array()) return false;
    if (proxy == "dss" && r[k].size() != r["config"]["depth"].get<std::size_t>()) return false;
    for (const json& v : r[k])
      if (!is_number(v)) return false;
  }
  const ArchConfig c = decode(r["config"].dump());
  if (r["params"].get<std::uint64_t>() != count_params(c)) return false;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(c)));
  return r["config_hash"] == hash && r.size() == 8;
}

bool valid_bench_entry(const json& e) {
  return e.is_object() && e.size() == 3 && e.contains("config") && valid_config(e["config"]) &&
         e.contains("accuracy") && is_number(e["accuracy"]) && e["accuracy"].get<double>() >= 0.0 &&
         e["accuracy"].get<double>() <= 1.0 && e.contains("meta") && e["meta"].is_string();
}

bool valid_tau_report(const json& t) {
  if (!t.is_object() || t.size() != 4 || !t.contains("proxy") || !t["proxy"].is_string()) return false;
  if (!t.contains("n") || !t["n"].is_number_unsigned() || !t.contains("tau") || !is_number(t["tau"])) return false;
  if (std::fabs(t["tau"].get<double>()) > 1.0) return false;
  if (!t.contains("scatter") || !t["scatter"].is_array() || t["scatter"].size() != t["n"].get<std::size_t>())
    return false;
  for (const json& p : t["scatter"])
    if (!p.is_array() || p.size() != 2 || !is_number(p[0]) || !is_number(p[1])) return false;
  return true;
}

bool valid_scatter_csv(const std::string& text, std::size_t n) {
  const auto lines = split_lines(text);
  if (lines.size() != n + 1 || lines[0] != "score,accuracy") return false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto comma = lines[i].find(',');
    if (comma == std::string::npos) return false;
    char* end = nullptr;
    std::strtod(lines[i].c_str(), &end);
    if (end != lines[i].c_str() + comma) return false;
    std::strtod(lines[i].c_str() + comma + 1, &end);
    if (*end != '\0') return false;
  }
  return true;
}

bool valid_manifest(const json& m, const std::string& command) {
  static const std::regex iso("\\d{4}-\\d{2}-\\d{2}T\\d{2}:\\d{2}:\\d{2}Z");
  if (!m.is_object() || m.value("command", "") != command) return false;
  if (!m.contains("args") || !m["args"].is_array() || m["args"].empty() || m["args"][0] != command) return false;
  if (!m.contains("seed") || !m["seed"].is_number_unsigned()) return false;
  if (!m.contains("jobs") || !m["jobs"].is_number_unsigned() || m["jobs"].get<std::size_t>() == 0) return false;
  if (!m.contains("streams") || !m["streams"].is_object()) return false;
  for (const char* s : {"sampling", "init", "task"})
    if (!valid_hex16(m["streams"][s])) return false;
  if (!m.contains("outputs") || !m["outputs"].is_array() || m["outputs"].empty()) return false;
  for (const json& o : m["outputs"])
    if (!o.is_string() || !fs::exists(o.get<std::string>())) return false;
  if (!m.contains("timestamp") || !m["timestamp"].is_string() ||
      !std::regex_match(m["timestamp"].get<std::string>(), iso))
    return false;
  return m.contains("version") && m["version"].is_string();
}

// -------------------------------------------------------------- criterion 1

Outcome nuclear_norm_correctness() {
  Outcome out;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> dim(1, 64);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    linalg::Matrix m(dim(rng), dim(rng));
    for (double& v : m.data()) v = normal(rng);
    Eigen::MatrixXd e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
    const double oracle = Eigen::JacobiSVD<Eigen::MatrixXd>(e).singularValues().sum();
    worst = std::max(worst, std::fabs(linalg::nuclear_norm(m) - oracle) / oracle);
  }
  out.require(worst <= 1e-8, "max rel err " + fmt("%.3g", worst) + " > 1e-8");
  for (std::size_t n = 1; n <= 16; ++n) {
    const double v = linalg::nuclear_norm(linalg::Matrix::identity(n));
    out.require(v == double(n), "nuclear(I_" + std::to_string(n) + ") = " + fmt("%.17g", v));
  }
  const double elapsed = seconds_since(t0);
  out.require(elapsed < 10.0, "runtime " + fmt("%.1f", elapsed) + " s >= 10 s");
  out.note("200 matrices, max rel err " + fmt("%.2e", worst) + ", identity 1..16 exact, " + fmt("%.2f", elapsed) +
           " s");
  return out;
}

// -------------------------------------------------------------- criterion 2

// Relative error uses max(|analytic|, |numeric|, 1e-6) as denominator so
// that entries whose true gradient is zero compare absolute round-off.
constexpr double kGradFloor = 1e-6;

double vit_gradient_error(std::uint64_t seed, std::size_t& checked) {
  std::mt19937_64 rng(seed);
  const ArchConfig c = testing::tiny_config(8, 1);
  const Model m = materialize(c, seed);
  const Tensor image = testing::random_tensor(rng, {3, 8, 8});
  const Tensor weights = testing::random_tensor(rng, {std::size_t(c.num_classes)});

  auto loss_at = [&](const Model& model) {
    ForwardPass f = forward_classify(model, image);
    const auto logits = f.graph.tensor(f.logits).data();
    double s = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) s += logits[k] * weights[k];
    return s;
  };
  ForwardPass f = forward_classify(m, image);
  const NodeId w = f.graph.input(weights);
  f.graph.backward(ops::sum(f.graph, ops::mul(f.graph, f.logits, w)));

  const double h = 1e-5;
  double worst = 0.0;
  Model probe = m;
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    const Tensor& leaf = f.graph.tensor(f.param_nodes[i]);
    for (std::size_t j = 0; j < leaf.size(); ++j) {
      const double original = probe.params[i].tensor[j];
      probe.params[i].tensor[j] = original + h;
      const double up = loss_at(probe);
      probe.params[i].tensor[j] = original - h;
      const double down = loss_at(probe);
      probe.params[i].tensor[j] = original;
      const double analytic = leaf.has_grad() ? leaf.grad()[j] : 0.0;
      worst = std::max(worst, testing::rel_err(analytic, (up - down) / (2 * h), kGradFloor));
      ++checked;
    }
  }
  return worst;
}

Outcome autodiff_correctness() {
  Outcome out;
  const auto t0 = Clock::now();
  double worst_primitive = 0.0, worst_vit = 0.0;
  std::string worst_name;
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    for (const auto& pc : testing::primitive_cases()) {
      std::vector<Tensor> inputs;
      for (const Shape& s : pc.shapes) inputs.push_back(testing::random_tensor(rng, s));
      const auto r = testing::check_gradients(pc.build, inputs, 1e-5, kGradFloor);
      checked += r.checked;
      if (r.max_rel_err > worst_primitive) {
        worst_primitive = r.max_rel_err;
        worst_name = pc.name;
      }
    }
    worst_vit = std::max(worst_vit, vit_gradient_error(seed, checked));
  }
  out.require(worst_primitive <= 1e-5, "primitive " + worst_name + " rel err " + fmt("%.3g", worst_primitive));
  out.require(worst_vit <= 1e-5, "tiny ViT rel err " + fmt("%.3g", worst_vit));
  const double elapsed = seconds_since(t0);
  out.require(elapsed < 30.0, "runtime " + fmt("%.1f", elapsed) + " s >= 30 s");
  out.note(std::to_string(testing::primitive_cases().size()) + " primitives + 1-block ViT x 20 seeds, " +
           std::to_string(checked) + " entries, max rel err primitives " + fmt("%.2e", worst_primitive) +
           " vit " + fmt("%.2e", worst_vit) + ", " + fmt("%.1f", elapsed) + " s");
  return out;
}

// -------------------------------------------------------------- criterion 3

Outcome dss_decomposition_and_determinism() {
  Outcome out;
  const SearchSpace space = tiny_desk_space();
  std::vector<ArchConfig> configs;
  for (std::uint64_t i = 0; i < 50; ++i) configs.push_back(sample(space, derive_seed(303, i)));

  const auto one = score_many(configs, "dss", SeedPolicy::kConfigHash, 7, 1);
  const auto four = score_many(configs, "dss", SeedPolicy::kConfigHash, 7, 4);
  const auto again = score_many(configs, "dss", SeedPolicy::kConfigHash, 7, 1);
  std::size_t decomposed = 0, identical = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    double sum = 0.0;
    for (double d : one[i].d_msa_per_layer) sum += d;
    for (double s : one[i].s_mlp_per_layer) sum += s;
    decomposed += std::memcmp(&sum, &one[i].score, sizeof sum) == 0;
    identical += std::memcmp(&one[i].score, &four[i].score, sizeof(double)) == 0 &&
                 std::memcmp(&one[i].score, &again[i].score, sizeof(double)) == 0 &&
                 one[i].d_msa_per_layer == four[i].d_msa_per_layer && one[i].s_mlp_per_layer == four[i].s_mlp_per_layer;
  }
  out.require(decomposed == 50, std::to_string(50 - decomposed) + " scores differ from their decomposition");
  out.require(identical == 50, std::to_string(50 - identical) + " scores differ across runs or jobs");

  // The same through the CLI, as separate processes with different --jobs.
  const std::string space_path = in_work("c3_space.json");
  spit(space_path, encode(space));
  const int rc1 = cli("search --space " + space_path + " --n 50 --seed 3 --jobs 1 --out " + in_work("c3_a.jsonl"));
  const int rc2 = cli("search --space " + space_path + " --n 50 --seed 3 --jobs 3 --out " + in_work("c3_b.jsonl"));
  out.require(rc1 == 0 && rc2 == 0, "cli search failed");
  const auto a = split_lines(slurp(in_work("c3_a.jsonl"))), b = split_lines(slurp(in_work("c3_b.jsonl")));
  std::size_t cli_same = 0, cli_decomposed = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    json x = json::parse(a[i]), y = json::parse(b[i]);
    double sum = 0.0;
    for (double d : x["d_msa"]) sum += d;
    for (double s : x["s_mlp"]) sum += s;
    cli_decomposed += sum == x["score"].get<double>();
    x.erase("elapsed_ms");
    y.erase("elapsed_ms");
    cli_same += x.dump() == y.dump();
  }
  out.require(a.size() == 50 && cli_same == 50, "cli --jobs 1 vs 3: " + std::to_string(cli_same) + "/50 identical");
  out.require(cli_decomposed == 50, "cli decomposition " + std::to_string(cli_decomposed) + "/50");
  out.note("50 configs: decomposition bitwise, jobs 1/4 and repeat bit-identical; cli jobs 1/3 identical");
  return out;
}

// -------------------------------------------------------------- criterion 4

Outcome kendall_correctness() {
  Outcome out;
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> len(2, 12);
  std::size_t instances = 0, matched = 0, tied = 0;
  while (instances < 1000) {
    const std::size_t n = len(rng);
    std::uniform_int_distribution<int> levels(2, 6);
    std::uniform_int_distribution<int> xv(0, levels(rng)), yv(0, levels(rng));
    std::vector<double> xs(n), ys(n);
    for (auto& v : xs) v = xv(rng);
    for (auto& v : ys) v = yv(rng);
    const auto flat = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
    };
    if (flat(xs) || flat(ys)) continue;  // tau-b is undefined
    ++instances;
    tied += std::set<double>(xs.begin(), xs.end()).size() < n || std::set<double>(ys.begin(), ys.end()).size() < n;
    matched += kendall_tau(xs, ys) == testing::brute_force_tau(xs, ys);
  }
  out.require(matched == 1000, std::to_string(1000 - matched) + " instances differ from pair counting");
  std::size_t identity = 0, reversed = 0;
  for (std::size_t n = 2; n <= 12; ++n) {
    std::vector<double> xs(n);
    std::normal_distribution<double> normal;
    for (auto& v : xs) v = normal(rng);
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> desc(sorted.rbegin(), sorted.rend());
    identity += kendall_tau(xs, xs) == 1.0;
    reversed += kendall_tau(sorted, desc) == -1.0;
  }
  out.require(identity == 11, "xs == ys did not give 1.0");
  out.require(reversed == 11, "reversed order did not give -1.0");
  out.note("1000 instances n<=12 (" + std::to_string(tied) + " with ties) exact; identity 1.0, reversed -1.0");
  return out;
}

// -------------------------------------------------------------- criterion 5

Outcome search_argmax_equivalence() {
  Outcome out;
  const auto t0 = Clock::now();
  // One depth choice keeps sampling uniform over configs, so every config
  // is drawn with probability 1/size.
  SearchSpace space;
  space.name = "argmax";
  space.img_size = 16;
  space.patch_size = 4;
  space.num_classes = 4;
  space.embed_dim_choices = {16, 32};
  space.depth_choices = {3};
  space.head_choices = {2, 4};
  space.mlp_ratio_choices = {1.0, 2.0, 4.0};
  const std::vector<ArchConfig> all = enumerate_small(space);
  const std::size_t size = all.size();
  out.require(size <= 1024, "space has " + std::to_string(size) + " configs");

  const std::uint64_t seed = 5;
  const auto reports = score_many(all, "dss", SeedPolicy::kConfigHash, derive_seed(seed, "init"), 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const auto& b = reports[best];
    if (r.score > b.score || (r.score == b.score && r.config_hash < b.config_hash)) best = i;
  }

  const std::size_t n = 10 * size;
  const std::string space_path = in_work("c5_space.json");
  spit(space_path, encode(space));
  const int rc = cli("search --space " + space_path + " --n " + std::to_string(n) + " --top 1 --seed " +
                     std::to_string(seed) + " --out " + in_work("c5.jsonl"));
  out.require(rc == 0, "cli search exit " + std::to_string(rc));
  const auto top = split_lines(slurp(in_work("c5.top.jsonl")));
  out.require(top.size() == 1, "top list has " + std::to_string(top.size()) + " lines");
  if (top.size() == 1) {
    const json t = json::parse(top[0]);
    const ArchConfig found = decode(t["config"].dump());
    out.require(found == reports[best].config, "cli top-1 " + encode(found) + " != argmax " +
                                                   encode(reports[best].config));
    out.require(t["score"].get<double>() == reports[best].score, "top-1 score differs from enumerated score");
  }
  const double elapsed = seconds_since(t0);
  out.require(elapsed < 300.0, "runtime " + fmt("%.1f", elapsed) + " s >= 300 s");
  out.note(std::to_string(size) + " configs, n = " + std::to_string(n) + ", " + fmt("%.1f", elapsed) + " s");
  return out;
}

// -------------------------------------------------------------- criterion 6

struct TauRun {
  double dss = 0, mlp = 0, msa = 0;
  bool ok = false;
};

TauRun desk_taus(std::size_t n, const std::string& tag) {
  TauRun run;
  const std::string space_path = in_work("c6_space.json");
  spit(space_path, encode(tiny_desk_space()));
  const std::string bench = in_work("c6_bench_" + tag + ".jsonl"), eval = in_work("c6_eval_" + tag + ".jsonl");
  if (cli("bench --space " + space_path + " --n " + std::to_string(n) + " --budget 1500 --out " + bench) != 0) {
    return run;
  }
  if (cli("eval --bench " + bench + " --proxy dss,saliency_mlp,saliency_msa --out " + eval) != 0) return run;
  for (const std::string& line : split_lines(slurp(eval))) {
    const json t = json::parse(line);
    const double tau = t["tau"].get<double>();
    if (t["proxy"] == "dss") run.dss = tau;
    if (t["proxy"] == "saliency_mlp") run.mlp = tau;
    if (t["proxy"] == "saliency_msa") run.msa = tau;
  }
  run.ok = true;
  return run;
}

Outcome desk_rank_correlation() {
  Outcome out;
  const auto t0 = Clock::now();
  // A directional failure at 16 entries is retried once at 32 to rule out
  // small-sample noise; the verdict is taken on the last run.
  TauRun run = desk_taus(16, "n16");
  std::size_t n = 16;
  std::string history;
  if (run.ok && run.dss < run.msa) {
    history = "n=16 dss " + fmt("%.3f", run.dss) + " < msa " + fmt("%.3f", run.msa) + ", rerun; ";
    run = desk_taus(32, "n32");
    n = 32;
  }
  out.require(run.ok, "benchmark or evaluation failed (see cli.log)");
  out.require(run.dss > 0.0, "dss tau " + fmt("%.3f", run.dss) + " <= 0");
  out.require(run.dss >= run.msa, "dss tau " + fmt("%.3f", run.dss) + " < saliency_msa tau " + fmt("%.3f", run.msa));
  const double elapsed = seconds_since(t0);
  out.require(elapsed < 1800.0, "runtime " + fmt("%.0f", elapsed) + " s >= 1800 s");
  out.note(history + "n=" + std::to_string(n) + " tau dss " + fmt("%.3f", run.dss) + " saliency_mlp " +
           fmt("%.3f", run.mlp) + " saliency_msa " + fmt("%.3f", run.msa) + ", " + fmt("%.0f", elapsed) + " s on " +
           std::to_string(default_jobs()) + " thread(s)");
  return out;
}

// -------------------------------------------------------------- criterion 7

Outcome throughput() {
  Outcome out;
  SearchSpace space = tiny_desk_space();
  // The largest tiny-desk config.
  ArchConfig big;
  big.img_size = space.img_size;
  big.patch_size = space.patch_size;
  big.num_classes = space.num_classes;
  big.embed_dim = *std::max_element(space.embed_dim_choices.begin(), space.embed_dim_choices.end());
  big.depth = *std::max_element(space.depth_choices.begin(), space.depth_choices.end());
  big.heads.assign(big.depth, space.head_choices.front());
  big.mlp_ratio.assign(big.depth, *std::max_element(space.mlp_ratio_choices.begin(), space.mlp_ratio_choices.end()));
  big.qkv_bias = space.qkv_bias;
  out.require(count_params(big) <= 500'000, "largest config exceeds 0.5M params");
  const std::string config_path = in_work("c7_config.json");
  spit(config_path, encode(big));

  auto t0 = Clock::now();
  const int rc1 = cli("score --config " + config_path + " --out " + in_work("c7_one.jsonl"));
  const double one = seconds_since(t0);
  out.require(rc1 == 0, "cli score failed");
  out.require(one < 1.0, "one config took " + fmt("%.2f", one) + " s");

  const std::string space_path = in_work("c7_space.json");
  spit(space_path, encode(space));
  t0 = Clock::now();
  const int rc2 = cli("search --space " + space_path + " --n 1000 --out " + in_work("c7_many.jsonl"));
  const double many = seconds_since(t0);
  out.require(rc2 == 0, "cli search failed");
  out.require(split_lines(slurp(in_work("c7_many.jsonl"))).size() == 1000, "search did not score 1000 configs");
  out.require(many < 600.0, "1000 configs took " + fmt("%.0f", many) + " s");
  out.note("largest config (" + std::to_string(count_params(big)) + " params) " + fmt("%.2f", one) +
           " s end to end; 1000 configs " + fmt("%.1f", many) + " s on " + std::to_string(default_jobs()) +
           " thread(s)");
  return out;
}

// -------------------------------------------------------------- criterion 8

Outcome format_round_trips() {
  Outcome out;
  SearchSpace space = tiny_desk_space();
  space.mlp_ratio_choices = {0.5, 1.0, 1.3333333333333333, 2.5, 4.0};
  std::size_t same = 0;
  for (std::uint64_t i = 0; i < 500; ++i) {
    ArchConfig c = sample(space, derive_seed(808, i));
    c.qkv_bias = i % 3 != 0;
    const std::string text = encode(c);
    same += decode(text) == c && encode(decode(text)) == text;
  }
  out.require(same == 500, std::to_string(500 - same) + " configs changed in a round trip");

  // Every CLI output kind, produced afresh and checked against its schema.
  SearchSpace small = space;
  small.img_size = 8;
  small.embed_dim_choices = {8, 16};
  small.depth_choices = {1, 2};
  small.mlp_ratio_choices = {1.0, 2.0};
  const std::string space_path = in_work("c8_space.json"), config_path = in_work("c8_config.json");
  spit(space_path, encode(small));
  spit(config_path, encode(sample(small, 1)));

  std::vector<std::string> bad;
  auto check_lines = [&](const std::string& path, std::size_t expected, auto&& valid) {
    const auto lines = split_lines(slurp(path));
    if (lines.size() != expected) bad.push_back(path + " has " + std::to_string(lines.size()) + " lines");
    for (const auto& line : lines) {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception&) {
        bad.push_back(path + ": not JSON");
        continue;
      }
      if (!valid(j)) bad.push_back(path + ": " + line.substr(0, 80));
    }
  };
  auto check_manifest = [&](const std::string& path, const std::string& command) {
    try {
      if (!valid_manifest(json::parse(slurp(path)), command)) bad.push_back(path);
    } catch (const json::exception&) {
      bad.push_back(path + ": not JSON");
    }
  };

  if (cli("score --config " + config_path + " --proxy dss --out " + in_work("c8_score.jsonl")) != 0)
    bad.push_back("score failed");
  check_lines(in_work("c8_score.jsonl"), 1, [](const json& j) { return valid_report(j, "dss"); });
  check_manifest(in_work("c8_score.manifest.json"), "score");

  for (const std::string proxy : {"dss", "saliency_msa", "snip"}) {
    const std::string stem = in_work("c8_search_" + proxy);
    if (cli("search --space " + space_path + " --n 20 --top 4 --proxy " + proxy + " --out " + stem + ".jsonl") != 0)
      bad.push_back("search " + proxy + " failed");
    check_lines(stem + ".jsonl", 20, [&](const json& j) { return valid_report(j, proxy); });
    check_lines(stem + ".top.jsonl", 4, [&](const json& j) { return valid_report(j, proxy); });
    check_manifest(stem + ".manifest.json", "search");
  }

  if (cli("bench --space " + space_path + " --n 6 --budget 20 --out " + in_work("c8_bench.jsonl")) != 0)
    bad.push_back("bench failed");
  check_lines(in_work("c8_bench.jsonl"), 6, valid_bench_entry);
  check_manifest(in_work("c8_bench.manifest.json"), "bench");

  // Fixed accuracies keep tau defined whatever the tiny budget produced.
  std::string fixed;
  int k = 0;
  for (const auto& line : split_lines(slurp(in_work("c8_bench.jsonl")))) {
    json e = json::parse(line);
    e["accuracy"] = 0.2 + 0.1 * k++;
    fixed += e.dump() + "\n";
  }
  spit(in_work("c8_bench_fixed.jsonl"), fixed);
  if (cli("eval --bench " + in_work("c8_bench_fixed.jsonl") + " --proxy params,dss --lenient --out " +
          in_work("c8_eval.jsonl")) != 0)
    bad.push_back("eval failed");
  check_lines(in_work("c8_eval.jsonl"), 2, valid_tau_report);
  for (const std::string proxy : {"params", "dss"}) {
    const std::string csv = in_work("c8_eval." + proxy + ".scatter.csv");
    std::size_t n = 0;
    for (const auto& line : split_lines(slurp(in_work("c8_eval.jsonl")))) {
      const json t = json::parse(line);
      if (t["proxy"] == proxy) n = t["n"].get<std::size_t>();
    }
    if (!valid_scatter_csv(slurp(csv), n)) bad.push_back(csv);
  }
  const auto table = split_lines(slurp(in_work("c8_eval.table.txt")));
  if (table.size() != 3 || table[0].find("tau") == std::string::npos) bad.push_back("table layout");
  check_manifest(in_work("c8_eval.manifest.json"), "eval");

  out.require(bad.empty(), "schema violations: " + (bad.empty() ? std::string() : bad.front()) + " (" +
                               std::to_string(bad.size()) + " total)");
  out.note("500 configs round-trip; score, search (3 proxies), top, bench, eval, csv, table and manifests valid");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"nuclear norm vs singular-value oracle", nuclear_norm_correctness},
      {"autodiff vs finite differences", autodiff_correctness},
      {"dss decomposition and determinism", dss_decomposition_and_determinism},
      {"kendall tau vs pair counting", kendall_correctness},
      {"search top-1 vs enumerated argmax", search_argmax_equivalence},
      {"desk-scale rank correlation", desk_rank_correlation},
      {"throughput", throughput},
      {"format round trips and output schemas", format_round_trips},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::printf("criterion %d %s: %s (%s)\n", number, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
