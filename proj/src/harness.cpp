#include "zerovit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "zerovit/error.hpp"
#include "zerovit/parallel.hpp"
#include "zerovit/random.hpp"

namespace zerovit {

namespace {

using nlohmann::json;

std::int64_t tie_pairs(std::int64_t t) { return t * (t - 1) / 2; }

// Sorts `v` ascending and returns the number of inversions removed.
std::int64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
  return swaps;
}

class TaskGenerator {
 public:
  explicit TaskGenerator(const TaskSpec& task) : task_(task) {
    const std::size_t pixels = 3 * static_cast<std::size_t>(task.img_size) * task.img_size;
    prototypes_.resize(task.num_classes);
    for (int c = 0; c < task.num_classes; ++c) {
      Rng rng(derive_seed(derive_seed(task.data_seed, "prototype"), static_cast<std::uint64_t>(c)));
      std::normal_distribution<double> normal(0.0, task.prototype_scale);
      prototypes_[c].resize(pixels);
      for (double& v : prototypes_[c]) v = normal(rng);
    }
  }

  TaskBatch samples(bool validation, std::span<const std::size_t> indices) const {
    const std::size_t side = task_.img_size;
    const std::size_t pixels = 3 * side * side;
    TaskBatch batch{Tensor({indices.size(), 3, side, side}), std::vector<std::size_t>(indices.size())};
    const std::uint64_t split = derive_seed(task_.data_seed, validation ? "validation" : "train");
    std::uniform_int_distribution<std::size_t> label(0, static_cast<std::size_t>(task_.num_classes) - 1);
    std::normal_distribution<double> noise(0.0, task_.noise);
    for (std::size_t b = 0; b < indices.size(); ++b) {
      Rng rng(derive_seed(split, static_cast<std::uint64_t>(indices[b])));
      const std::size_t y = label(rng);
      batch.labels[b] = y;
      double* dst = batch.images.data().data() + b * pixels;
      for (std::size_t p = 0; p < pixels; ++p) dst[p] = prototypes_[y][p] + noise(rng);
    }
    return batch;
  }

 private:
  TaskSpec task_;
  std::vector<std::vector<double>> prototypes_;
};

void check_task(const ArchConfig& config, const TaskSpec& task) {
  if (task.num_classes < 2 || task.img_size <= 0 || task.train_size == 0 || task.val_size == 0 ||
      task.batch_size == 0) {
    throw Error(ErrorKind::kConfig, "task spec needs >= 2 classes and non-empty splits and batches");
  }
  if (config.img_size != task.img_size || config.num_classes != task.num_classes) {
    throw Error(ErrorKind::kConfig, "architecture (img " + std::to_string(config.img_size) + ", " +
                                        std::to_string(config.num_classes) +
                                        " classes) does not match the task (img " +
                                        std::to_string(task.img_size) + ", " +
                                        std::to_string(task.num_classes) + " classes)");
  }
}

double accuracy_with(const Model& model, const TaskSpec& task, const TaskGenerator& gen) {
  constexpr std::size_t kChunk = 50;
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t first = 0; first < task.val_size; first += kChunk) {
    idx.clear();
    for (std::size_t i = first; i < std::min(task.val_size, first + kChunk); ++i) idx.push_back(i);
    const TaskBatch batch = gen.samples(true, idx);
    const ForwardPass fp = forward_batch(model, batch.images);
    const Tensor& logits = fp.graph.tensor(fp.logits);
    const std::size_t classes = logits.dim(1);
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const auto row = logits.data().subspan(b * classes, classes);
      const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
      if (best == batch.labels[b]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(task.val_size);
}

}  // namespace

double kendall_tau(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorKind::kUsage, "kendall_tau: lengths differ (" + std::to_string(xs.size()) +
                                       " vs " + std::to_string(ys.size()) + ")");
  }
  const std::size_t n = xs.size();
  if (n < 2) throw Error(ErrorKind::kUsage, "kendall_tau: need at least 2 observations");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw Error(ErrorKind::kNumeric, "kendall_tau: non-finite observation at " + std::to_string(i));
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return xs[a] != xs[b] ? xs[a] < xs[b] : ys[a] < ys[b];
  });

  std::int64_t x_ties = 0, joint_ties = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && xs[order[j]] == xs[order[i]]) ++j;
    x_ties += tie_pairs(static_cast<std::int64_t>(j - i));
    for (std::size_t a = i; a < j;) {
      std::size_t b = a;
      while (b < j && ys[order[b]] == ys[order[a]]) ++b;
      joint_ties += tie_pairs(static_cast<std::int64_t>(b - a));
      a = b;
    }
    i = j;
  }

  std::vector<double> y_sorted(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) y_sorted[i] = ys[order[i]];
  const std::int64_t discordant = merge_count(y_sorted, buf, 0, n);

  std::int64_t y_ties = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && y_sorted[j] == y_sorted[i]) ++j;
    y_ties += tie_pairs(static_cast<std::int64_t>(j - i));
    i = j;
  }

  const std::int64_t total = tie_pairs(static_cast<std::int64_t>(n));
  const std::int64_t untied_x = total - x_ties;  // C + D + (tied in y only)
  const std::int64_t untied_y = total - y_ties;  // C + D + (tied in x only)
  if (untied_x == 0 || untied_y == 0) {
    throw Error(ErrorKind::kNumeric, "kendall_tau: undefined when every value in a list is tied");
  }
  const std::int64_t c_minus_d = total - x_ties - y_ties + joint_ties - 2 * discordant;
  return static_cast<double>(c_minus_d) /
         std::sqrt(static_cast<double>(untied_x) * static_cast<double>(untied_y));
}

TauReport evaluate_scores(std::string_view proxy_name, std::span<const BenchmarkEntry> entries,
                          const ScoreFn& score, const EvalOptions& options) {
  if (entries.size() < 2) throw Error(ErrorKind::kUsage, "evaluate: need at least 2 benchmark entries");
  std::vector<double> scores(entries.size());
  std::vector<char> ok(entries.size(), 1);
  parallel_for(entries.size(), options.jobs, [&](std::size_t i) {
    try {
      scores[i] = score(entries[i]);
    } catch (const Error&) {
      if (options.strict) throw;
      ok[i] = 0;
    }
  });

  TauReport report;
  report.proxy_name = std::string(proxy_name);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!ok[i]) continue;
    xs.push_back(scores[i]);
    ys.push_back(entries[i].accuracy);
    if (report.scatter.size() < kScatterCap) report.scatter.emplace_back(scores[i], entries[i].accuracy);
  }
  report.n = xs.size();
  report.tau = kendall_tau(xs, ys);
  return report;
}

TauReport evaluate_proxy(std::string_view proxy_name, std::span<const BenchmarkEntry> entries,
                         const EvalOptions& options) {
  if (!is_known_proxy(proxy_name)) {
    throw Error(ErrorKind::kUsage, "unknown proxy \"" + std::string(proxy_name) + "\"");
  }
  const std::string name(proxy_name);
  return evaluate_scores(
      proxy_name, entries,
      [&](const BenchmarkEntry& e) {
        validate(e.config);
        return score_proxy(name, e.config, init_seed_for(e.config, options.seed_policy, options.seed),
                           options.batch)
            .score;
      },
      options);
}

TaskSpec default_task() { return TaskSpec{}; }

TaskBatch task_samples(const TaskSpec& task, bool validation, std::span<const std::size_t> indices) {
  return TaskGenerator(task).samples(validation, indices);
}

double evaluate_accuracy(const Model& model, const TaskSpec& task) {
  check_task(model.config, task);
  return accuracy_with(model, task, TaskGenerator(task));
}

double toy_train(const ArchConfig& config, const TaskSpec& task, std::size_t budget, std::uint64_t seed) {
  check_task(config, task);
  Model model = materialize(config, derive_seed(seed, "init"));
  const TaskGenerator gen(task);
  Rng order(derive_seed(seed, "batches"));
  std::uniform_int_distribution<std::size_t> pick(0, task.train_size - 1);
  std::vector<std::size_t> idx(task.batch_size);

  for (std::size_t step = 0; step < budget; ++step) {
    for (auto& i : idx) i = pick(order);
    const TaskBatch batch = gen.samples(false, idx);
    const double lr = 0.5 * task.lr *
                      (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / static_cast<double>(budget)));
    try {
      ForwardPass fp = forward_batch(model, batch.images);
      const NodeId loss = ops::cross_entropy(fp.graph, fp.logits, batch.labels);
      fp.graph.backward(loss);
      for (std::size_t p = 0; p < model.params.size(); ++p) {
        const Tensor& leaf = fp.graph.tensor(fp.param_nodes[p]);
        if (!leaf.has_grad()) continue;
        auto w = model.params[p].tensor.data();
        const auto g = leaf.grad();
        for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr * g[j];
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNumeric) throw;
      throw Error(ErrorKind::kNumeric, "training diverged at step " + std::to_string(step) + ": " + e.what());
    }
  }
  return accuracy_with(model, task, gen);
}

std::vector<BenchmarkEntry> build_desk_benchmark(const SearchSpace& space, std::size_t n,
                                                 const TaskSpec& task, std::size_t budget,
                                                 std::uint64_t seed, std::size_t jobs) {
  const std::uint64_t sampling = derive_seed(seed, "sampling");
  const std::uint64_t training = derive_seed(seed, "init");
  std::vector<BenchmarkEntry> entries(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t s = derive_seed(sampling, static_cast<std::uint64_t>(i));
    entries[i].config = space.param_range ? sample_constrained(space, s) : sample(space, s);
  }
  parallel_for(n, jobs, [&](std::size_t i) {
    const std::uint64_t s = derive_seed(training, static_cast<std::uint64_t>(i));
    entries[i].accuracy = toy_train(entries[i].config, task, budget, s);
    std::ostringstream meta;
    meta << "toy_train steps=" << budget << " train_seed=" << hex16(s)
         << " data_seed=" << hex16(task.data_seed) << " scale=" << task.prototype_scale << " noise=" << task.noise;
    entries[i].meta = meta.str();
  });
  return entries;
}

std::string to_jsonl(std::span<const BenchmarkEntry> entries) {
  std::string out;
  for (const BenchmarkEntry& e : entries) {
    json j;
    j["config"] = json::parse(encode(e.config));
    j["accuracy"] = e.accuracy;
    j["meta"] = e.meta;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<BenchmarkEntry> parse_benchmark(std::string_view jsonl) {
  std::vector<BenchmarkEntry> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "benchmark line " + std::to_string(line_no) + ": ";
    json j;
    try {
      j = json::parse(line.begin(), line.end());
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::kMalformedJson, where + e.what());
    }
    for (const char* key : {"config", "accuracy", "meta"}) {
      if (!j.contains(key)) throw Error(ErrorKind::kMissingField, where + "missing field \"" + key + "\"");
    }
    if (!j["accuracy"].is_number() || !j["meta"].is_string()) {
      throw Error(ErrorKind::kMalformedJson, where + "accuracy must be a number and meta a string");
    }
    BenchmarkEntry e;
    try {
      e.config = decode(j["config"].dump());
    } catch (const Error& err) {
      throw Error(err.kind(), where + err.what());
    }
    e.accuracy = j["accuracy"].get<double>();
    if (!(e.accuracy >= 0.0 && e.accuracy <= 1.0)) {
      throw Error(ErrorKind::kInvariant, where + "accuracy outside [0, 1]");
    }
    e.meta = j["meta"].get<std::string>();
    out.push_back(std::move(e));
  }
  return out;
}

std::string to_json(const TauReport& r) {
  json j;
  j["proxy"] = r.proxy_name;
  j["tau"] = r.tau;
  j["n"] = r.n;
  json scatter = json::array();
  for (const auto& [s, a] : r.scatter) scatter.push_back({s, a});
  j["scatter"] = std::move(scatter);
  return j.dump();
}

TauReport parse_tau_report(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kMalformedJson, std::string("tau report: ") + e.what());
  }
  for (const char* key : {"proxy", "tau", "n", "scatter"}) {
    if (!j.contains(key)) throw Error(ErrorKind::kMissingField, std::string("tau report is missing \"") + key + "\"");
  }
  try {
    TauReport r;
    r.proxy_name = j.at("proxy").get<std::string>();
    r.tau = j.at("tau").get<double>();
    r.n = j.at("n").get<std::size_t>();
    for (const json& pt : j.at("scatter")) {
      if (!pt.is_array() || pt.size() != 2) throw Error(ErrorKind::kMalformedJson, "scatter points are [score, accuracy]");
      r.scatter.emplace_back(pt[0].get<double>(), pt[1].get<double>());
    }
    if (std::fabs(r.tau) > 1.0) throw Error(ErrorKind::kInvariant, "tau outside [-1, 1]");
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedJson, std::string("tau report: ") + e.what());
  }
}

std::string scatter_csv(const TauReport& r) {
  std::ostringstream os;
  os << "score,accuracy\n" << std::setprecision(17);
  for (const auto& [s, a] : r.scatter) os << s << ',' << a << '\n';
  return os.str();
}

std::string comparison_table(std::span<const TauReport> reports) {
  std::ostringstream os;
  os << std::left << std::setw(16) << "proxy" << std::right << std::setw(10) << "tau" << std::setw(8) << "n" << '\n';
  for (const TauReport& r : reports) {
    os << std::left << std::setw(16) << r.proxy_name << std::right << std::fixed << std::setprecision(4)
       << std::setw(10) << r.tau << std::setw(8) << r.n << '\n';
  }
  return os.str();
}

}  // namespace zerovit
