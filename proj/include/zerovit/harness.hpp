#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zerovit/arch.hpp"
#include "zerovit/proxies.hpp"
#include "zerovit/searchspace.hpp"

namespace zerovit {

struct BenchmarkEntry {
  ArchConfig config;
  double accuracy = 0.0;
  std::string meta;

  bool operator==(const BenchmarkEntry&) const = default;
};

inline constexpr std::size_t kScatterCap = 10'000;

struct TauReport {
  std::string proxy_name;
  double tau = 0.0;
  std::size_t n = 0;
  std::vector<std::pair<double, double>> scatter;  // (score, accuracy), at most kScatterCap
};

// Kendall tau-b, computed in O(n log n). Throws kUsage on length mismatch or
// n < 2, kNumeric on non-finite input or when either list is entirely tied.
double kendall_tau(std::span<const double> xs, std::span<const double> ys);

struct EvalOptions {
  SeedPolicy seed_policy = SeedPolicy::kFixed;
  std::uint64_t seed = 0;
  bool strict = true;  // false: skip entries whose scoring fails
  std::size_t jobs = 1;
  BatchSpec batch;
};

using ScoreFn = std::function<double(const BenchmarkEntry&)>;

TauReport evaluate_proxy(std::string_view proxy_name, std::span<const BenchmarkEntry> entries,
                         const EvalOptions& options = {});
// Same protocol with an arbitrary scoring function, e.g. a test oracle.
TauReport evaluate_scores(std::string_view proxy_name, std::span<const BenchmarkEntry> entries,
                          const ScoreFn& score, const EvalOptions& options = {});

/// Synthetic image classification task. Each class has a fixed prototype
/// image; a sample is its class prototype plus i.i.d. Gaussian pixel noise.
/// Samples are generated on demand from (data_seed, split, index).
struct TaskSpec {
  int num_classes = 4;
  int img_size = 32;
  std::size_t train_size = 2000;
  std::size_t val_size = 500;
  // Prototype pixel sd relative to noise sd. At 0.3 desk-space models land
  // between chance and saturation after 1500 steps.
  double prototype_scale = 0.3;
  double noise = 1.0;
  std::uint64_t data_seed = 0;
  double lr = 0.05;
  std::size_t batch_size = 8;
};

TaskSpec default_task();

// Images [count, 3, S, S] and labels for the given sample indices of one split.
struct TaskBatch {
  Tensor images;
  std::vector<std::size_t> labels;
};
TaskBatch task_samples(const TaskSpec& task, bool validation, std::span<const std::size_t> indices);

double evaluate_accuracy(const Model& model, const TaskSpec& task);

// Plain SGD with a cosine-decayed learning rate and cross-entropy loss.
// Returns validation accuracy. Throws kNumeric naming the step on divergence.
double toy_train(const ArchConfig& config, const TaskSpec& task, std::size_t budget, std::uint64_t seed);

std::vector<BenchmarkEntry> build_desk_benchmark(const SearchSpace& space, std::size_t n,
                                                 const TaskSpec& task, std::size_t budget,
                                                 std::uint64_t seed, std::size_t jobs);

std::string to_jsonl(std::span<const BenchmarkEntry> entries);
std::vector<BenchmarkEntry> parse_benchmark(std::string_view jsonl);

std::string to_json(const TauReport& report);
TauReport parse_tau_report(std::string_view text);
std::string scatter_csv(const TauReport& report);
std::string comparison_table(std::span<const TauReport> reports);

}  // namespace zerovit
