#include "zerovit/zerovit.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "zerovit/error.hpp"
#include "zerovit/harness.hpp"
#include "zerovit/parallel.hpp"
#include "zerovit/proxies.hpp"
#include "zerovit/random.hpp"
#include "zerovit/searchspace.hpp"

struct zv_config {
  zerovit::ArchConfig value;
};
struct zv_space {
  zerovit::SearchSpace value;
};
struct zv_config_list {
  std::vector<zerovit::ArchConfig> items;
};
struct zv_report_list {
  std::vector<zerovit::ProxyReport> items;
};
struct zv_bench {
  std::vector<zerovit::BenchmarkEntry> entries;
};
struct zv_tau_report {
  zerovit::TauReport value;
};

namespace {

thread_local std::string g_last_error;

zv_status status_for(zerovit::ErrorKind kind) {
  using zerovit::ErrorKind;
  switch (kind) {
    case ErrorKind::kUsage: return ZV_ERR_USAGE;
    case ErrorKind::kShape: return ZV_ERR_SHAPE;
    case ErrorKind::kConfig:
    case ErrorKind::kInvariant: return ZV_ERR_CONFIG;
    case ErrorKind::kMalformedJson: return ZV_ERR_MALFORMED_JSON;
    case ErrorKind::kMissingField: return ZV_ERR_MISSING_FIELD;
    case ErrorKind::kNumeric: return ZV_ERR_NUMERIC;
    case ErrorKind::kInfeasible: return ZV_ERR_INFEASIBLE;
    case ErrorKind::kIo: return ZV_ERR_IO;
  }
  return ZV_ERR_INTERNAL;
}

zv_status fail(zv_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
zv_status guarded(Fn&& fn, uint64_t* nearest_miss = nullptr) {
  try {
    g_last_error.clear();
    fn();
    return ZV_OK;
  } catch (const zerovit::InfeasibleError& e) {
    if (nearest_miss) *nearest_miss = e.nearest_miss();
    return fail(ZV_ERR_INFEASIBLE, e.what());
  } catch (const zerovit::Error& e) {
    return fail(status_for(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(ZV_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ZV_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool condition, const char* message) {
  if (!condition) throw zerovit::Error(zerovit::ErrorKind::kUsage, message);
}

zerovit::SeedPolicy to_policy(zv_seed_policy p) {
  return p == ZV_SEED_CONFIG_HASH ? zerovit::SeedPolicy::kConfigHash : zerovit::SeedPolicy::kFixed;
}

}  // namespace

extern "C" {

const char* zv_version(void) { return ZEROVIT_VERSION; }
const char* zv_last_error(void) { return g_last_error.c_str(); }
void zv_string_free(char* s) { std::free(s); }

const char* zv_status_name(zv_status status) {
  switch (status) {
    case ZV_OK: return "ok";
    case ZV_ERR_INTERNAL: return "internal";
    case ZV_ERR_USAGE: return "usage";
    case ZV_ERR_CONFIG: return "config";
    case ZV_ERR_NUMERIC: return "numeric";
    case ZV_ERR_INFEASIBLE: return "infeasible";
    case ZV_ERR_IO: return "io";
    case ZV_ERR_MALFORMED_JSON: return "malformed-json";
    case ZV_ERR_MISSING_FIELD: return "missing-field";
    case ZV_ERR_SHAPE: return "shape";
  }
  return "unknown";
}

uint64_t zv_derive_seed(uint64_t seed, const char* purpose) {
  return zerovit::derive_seed(seed, purpose ? purpose : "");
}

size_t zv_default_jobs(void) { return zerovit::default_jobs(); }

zv_status zv_config_decode(const char* json, zv_config** out) {
  return guarded([&] {
    require(json && out, "zv_config_decode: null argument");
    *out = new zv_config{zerovit::decode(json)};
  });
}

zv_status zv_config_encode(const zv_config* config, char** out) {
  return guarded([&] {
    require(config && out, "zv_config_encode: null argument");
    *out = dup_string(zerovit::encode(config->value));
  });
}

zv_status zv_config_hash(const zv_config* config, uint64_t* out) {
  return guarded([&] {
    require(config && out, "zv_config_hash: null argument");
    *out = zerovit::config_hash(config->value);
  });
}

zv_status zv_config_param_count(const zv_config* config, uint64_t* out) {
  return guarded([&] {
    require(config && out, "zv_config_param_count: null argument");
    *out = zerovit::count_params(config->value);
  });
}

void zv_config_free(zv_config* config) { delete config; }

zv_status zv_space_decode(const char* json, zv_space** out) {
  return guarded([&] {
    require(json && out, "zv_space_decode: null argument");
    *out = new zv_space{zerovit::decode_space(json)};
  });
}

zv_status zv_space_tiny_desk(zv_space** out) {
  return guarded([&] {
    require(out, "zv_space_tiny_desk: null argument");
    *out = new zv_space{zerovit::tiny_desk_space()};
  });
}

zv_status zv_space_encode(const zv_space* space, char** out) {
  return guarded([&] {
    require(space && out, "zv_space_encode: null argument");
    *out = dup_string(zerovit::encode(space->value));
  });
}

zv_status zv_space_set_param_range(zv_space* space, uint64_t min_params, uint64_t max_params) {
  return guarded([&] {
    require(space, "zv_space_set_param_range: null argument");
    require(min_params <= max_params, "param range minimum exceeds maximum");
    space->value.param_range = zerovit::ParamRange{min_params, max_params};
  });
}

zv_status zv_space_has_param_range(const zv_space* space, int* out) {
  return guarded([&] {
    require(space && out, "zv_space_has_param_range: null argument");
    *out = space->value.param_range.has_value() ? 1 : 0;
  });
}

zv_status zv_space_combination_count(const zv_space* space, uint64_t* out) {
  return guarded([&] {
    require(space && out, "zv_space_combination_count: null argument");
    *out = zerovit::combination_count(space->value);
  });
}

zv_status zv_space_sample(const zv_space* space, uint64_t seed, zv_config** out) {
  return guarded([&] {
    require(space && out, "zv_space_sample: null argument");
    *out = new zv_config{zerovit::sample(space->value, seed)};
  });
}

zv_status zv_space_sample_constrained(const zv_space* space, uint64_t seed, uint64_t max_tries,
                                      zv_config** out, uint64_t* nearest_miss) {
  return guarded(
      [&] {
        require(space && out, "zv_space_sample_constrained: null argument");
        *out = new zv_config{zerovit::sample_constrained(space->value, seed, max_tries)};
      },
      nearest_miss);
}

zv_status zv_space_sample_many(const zv_space* space, size_t n, uint64_t seed, uint64_t max_tries,
                               zv_config_list** out, uint64_t* nearest_miss) {
  return guarded(
      [&] {
        require(space && out, "zv_space_sample_many: null argument");
        auto list = std::make_unique<zv_config_list>();
        list->items.reserve(n);
        for (size_t i = 0; i < n; ++i) {
          const uint64_t s = zerovit::derive_seed(seed, static_cast<uint64_t>(i));
          list->items.push_back(space->value.param_range
                                    ? zerovit::sample_constrained(space->value, s, max_tries)
                                    : zerovit::sample(space->value, s));
        }
        *out = list.release();
      },
      nearest_miss);
}

zv_status zv_space_enumerate(const zv_space* space, zv_config_list** out) {
  return guarded([&] {
    require(space && out, "zv_space_enumerate: null argument");
    *out = new zv_config_list{zerovit::enumerate_small(space->value)};
  });
}

void zv_space_free(zv_space* space) { delete space; }

size_t zv_config_list_size(const zv_config_list* list) { return list ? list->items.size() : 0; }

zv_status zv_config_list_get(const zv_config_list* list, size_t index, zv_config** out) {
  return guarded([&] {
    require(list && out, "zv_config_list_get: null argument");
    require(index < list->items.size(), "zv_config_list_get: index out of range");
    *out = new zv_config{list->items[index]};
  });
}

zv_status zv_config_list_from_config(const zv_config* config, zv_config_list** out) {
  return guarded([&] {
    require(config && out, "zv_config_list_from_config: null argument");
    *out = new zv_config_list{{config->value}};
  });
}

void zv_config_list_free(zv_config_list* list) { delete list; }

int zv_proxy_known(const char* proxy) { return proxy && zerovit::is_known_proxy(proxy) ? 1 : 0; }

zv_status zv_score_list(const zv_config_list* configs, const char* proxy, zv_seed_policy policy,
                        uint64_t seed, size_t jobs, zv_report_list** out) {
  return guarded([&] {
    require(configs && proxy && out, "zv_score_list: null argument");
    auto reports = std::make_unique<zv_report_list>();
    reports->items = zerovit::score_many(configs->items, proxy, to_policy(policy), seed,
                                         jobs == 0 ? zerovit::default_jobs() : jobs);
    *out = reports.release();
  });
}

size_t zv_report_list_size(const zv_report_list* reports) { return reports ? reports->items.size() : 0; }

zv_status zv_report_list_score(const zv_report_list* reports, size_t index, double* out) {
  return guarded([&] {
    require(reports && out, "zv_report_list_score: null argument");
    require(index < reports->items.size(), "zv_report_list_score: index out of range");
    *out = reports->items[index].score;
  });
}

zv_status zv_report_list_hash(const zv_report_list* reports, size_t index, uint64_t* out) {
  return guarded([&] {
    require(reports && out, "zv_report_list_hash: null argument");
    require(index < reports->items.size(), "zv_report_list_hash: index out of range");
    *out = reports->items[index].config_hash;
  });
}

zv_status zv_report_list_json(const zv_report_list* reports, size_t index, char** out) {
  return guarded([&] {
    require(reports && out, "zv_report_list_json: null argument");
    require(index < reports->items.size(), "zv_report_list_json: index out of range");
    *out = dup_string(zerovit::to_jsonl(reports->items[index]));
  });
}

zv_status zv_report_list_rank(const zv_report_list* reports, size_t k, size_t* out_indices,
                              size_t* out_count) {
  return guarded([&] {
    require(reports && out_count && (k == 0 || out_indices), "zv_report_list_rank: null argument");
    const std::vector<size_t> top = zerovit::rank_reports(reports->items, k);
    std::copy(top.begin(), top.end(), out_indices);
    *out_count = top.size();
  });
}

void zv_report_list_free(zv_report_list* reports) { delete reports; }

zv_status zv_bench_build(const zv_space* space, size_t n, size_t budget, uint64_t seed, uint64_t data_seed,
                         size_t jobs, zv_bench** out) {
  return guarded([&] {
    require(space && out, "zv_bench_build: null argument");
    zerovit::TaskSpec task = zerovit::default_task();
    task.data_seed = data_seed;
    task.img_size = space->value.img_size;
    task.num_classes = space->value.num_classes;
    auto bench = std::make_unique<zv_bench>();
    bench->entries = zerovit::build_desk_benchmark(space->value, n, task, budget, seed,
                                                   jobs == 0 ? zerovit::default_jobs() : jobs);
    *out = bench.release();
  });
}

zv_status zv_bench_decode(const char* jsonl, zv_bench** out) {
  return guarded([&] {
    require(jsonl && out, "zv_bench_decode: null argument");
    *out = new zv_bench{zerovit::parse_benchmark(jsonl)};
  });
}

zv_status zv_bench_encode(const zv_bench* bench, char** out) {
  return guarded([&] {
    require(bench && out, "zv_bench_encode: null argument");
    *out = dup_string(zerovit::to_jsonl(std::span<const zerovit::BenchmarkEntry>(bench->entries)));
  });
}

size_t zv_bench_size(const zv_bench* bench) { return bench ? bench->entries.size() : 0; }
void zv_bench_free(zv_bench* bench) { delete bench; }

zv_status zv_kendall_tau(const double* xs, const double* ys, size_t n, double* out) {
  return guarded([&] {
    require(out && (n == 0 || (xs && ys)), "zv_kendall_tau: null argument");
    *out = zerovit::kendall_tau({xs, n}, {ys, n});
  });
}

zv_status zv_evaluate(const zv_bench* bench, const char* proxy, zv_seed_policy policy, uint64_t seed,
                      size_t jobs, int strict, zv_tau_report** out) {
  return guarded([&] {
    require(bench && proxy && out, "zv_evaluate: null argument");
    zerovit::EvalOptions options;
    options.seed_policy = to_policy(policy);
    options.seed = seed;
    options.strict = strict != 0;
    options.jobs = jobs == 0 ? zerovit::default_jobs() : jobs;
    *out = new zv_tau_report{zerovit::evaluate_proxy(proxy, bench->entries, options)};
  });
}

zv_status zv_tau_report_tau(const zv_tau_report* report, double* out) {
  return guarded([&] {
    require(report && out, "zv_tau_report_tau: null argument");
    *out = report->value.tau;
  });
}

zv_status zv_tau_report_n(const zv_tau_report* report, size_t* out) {
  return guarded([&] {
    require(report && out, "zv_tau_report_n: null argument");
    *out = report->value.n;
  });
}

zv_status zv_tau_report_json(const zv_tau_report* report, char** out) {
  return guarded([&] {
    require(report && out, "zv_tau_report_json: null argument");
    *out = dup_string(zerovit::to_json(report->value));
  });
}

zv_status zv_tau_report_scatter_csv(const zv_tau_report* report, char** out) {
  return guarded([&] {
    require(report && out, "zv_tau_report_scatter_csv: null argument");
    *out = dup_string(zerovit::scatter_csv(report->value));
  });
}

zv_status zv_tau_report_table(const zv_tau_report* const* reports, size_t count, char** out) {
  return guarded([&] {
    require(out && (count == 0 || reports), "zv_tau_report_table: null argument");
    std::vector<zerovit::TauReport> rows;
    for (size_t i = 0; i < count; ++i) {
      require(reports[i] != nullptr, "zv_tau_report_table: null report");
      rows.push_back(reports[i]->value);
    }
    *out = dup_string(zerovit::comparison_table(rows));
  });
}

void zv_tau_report_free(zv_tau_report* report) { delete report; }

}  // extern "C"
