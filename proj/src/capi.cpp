// Copyright 2026 The psm Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "psm/psm.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "psm/detect.hpp"
#include "psm/error.hpp"
#include "psm/harness.hpp"
#include "psm/model.hpp"
#include "psm/observation_io.hpp"
#include "psm/recover.hpp"
#include "psm/theory.hpp"

struct psm_model {
  psm::ModelConfig config;
};

struct psm_support {
  psm::SupportSet support;
};

struct psm_observation {
  psm::Observation x;
};

struct psm_experiment {
  psm::harness::ExperimentConfig config;
};

namespace {

thread_local std::string last_error;

psm_status set_error(psm_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs body, translating exceptions into status codes.
template <class Body>
psm_status guarded(Body&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const psm::Error& e) {
    return set_error(static_cast<psm_status>(static_cast<int>(e.code())), e.what());
  } catch (const nlohmann::json::exception& e) {
    return set_error(PSM_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(PSM_ERR_BUDGET, "out of memory");
  } catch (const std::exception& e) {
    return set_error(PSM_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(PSM_ERR_INTERNAL, "unknown error");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool condition, const char* what) {
  if (!condition) psm::Fail(psm::ErrorCode::kConfig, what);
}

psm::ModelConfig to_config(const psm_model_params& p) {
  psm::ModelConfig c;
  c.n = p.n;
  c.k = p.k;
  c.m = p.m;
  c.lambda = p.lambda;
  require(p.variant == PSM_ARBITRARY || p.variant == PSM_CONSECUTIVE, "unknown variant");
  require(p.placement == PSM_UNIFORM || p.placement == PSM_SEPARATED, "unknown placement");
  require(p.boundary == PSM_LINEAR || p.boundary == PSM_CYCLIC, "unknown boundary");
  c.variant = p.variant == PSM_ARBITRARY ? psm::Variant::kArbitrary : psm::Variant::kConsecutive;
  c.placement =
      p.placement == PSM_SEPARATED ? psm::Placement::kSeparated : psm::Placement::kUniform;
  c.boundary = p.boundary == PSM_CYCLIC ? psm::Boundary::kCyclic : psm::Boundary::kLinear;
  c.validate();
  return c;
}

std::vector<psm::harness::Task> parse_task_list(const std::string& list) {
  std::vector<psm::harness::Task> tasks;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto task = psm::harness::parse_task(item);
    if (!task) psm::Fail(psm::ErrorCode::kConfig, "unknown task: " + item);
    tasks.push_back(*task);
  }
  return tasks;
}

}  // namespace

extern "C" {

const char* psm_version(void) { return "0.1.0"; }

const char* psm_last_error(void) { return last_error.c_str(); }

void psm_string_free(char* s) { std::free(s); }

void psm_model_params_default(psm_model_params* params) {
  if (!params) return;
  *params = psm_model_params{1, 1, 1, 0.0, PSM_CONSECUTIVE, PSM_UNIFORM, PSM_LINEAR};
}

psm_status psm_parse_variant(const char* name, psm_variant* out) {
  return guarded([&] {
    require(name && out, "null argument");
    const auto v = psm::parse_variant(name);
    if (!v) psm::Fail(psm::ErrorCode::kConfig, std::string("unknown variant: ") + name);
    *out = *v == psm::Variant::kArbitrary ? PSM_ARBITRARY : PSM_CONSECUTIVE;
    return PSM_OK;
  });
}

psm_status psm_parse_placement(const char* name, psm_placement* out) {
  return guarded([&] {
    require(name && out, "null argument");
    const auto v = psm::parse_placement(name);
    if (!v) psm::Fail(psm::ErrorCode::kConfig, std::string("unknown placement: ") + name);
    *out = *v == psm::Placement::kSeparated ? PSM_SEPARATED : PSM_UNIFORM;
    return PSM_OK;
  });
}

psm_status psm_parse_boundary(const char* name, psm_boundary* out) {
  return guarded([&] {
    require(name && out, "null argument");
    const auto v = psm::parse_boundary(name);
    if (!v) psm::Fail(psm::ErrorCode::kConfig, std::string("unknown boundary: ") + name);
    *out = *v == psm::Boundary::kCyclic ? PSM_CYCLIC : PSM_LINEAR;
    return PSM_OK;
  });
}

psm_status psm_model_create(const psm_model_params* params, psm_model** out) {
  return guarded([&] {
    require(params && out, "null argument");
    *out = new psm_model{to_config(*params)};
    return PSM_OK;
  });
}

void psm_model_destroy(psm_model* model) { delete model; }

psm_status psm_support_sample(const psm_model* model, uint64_t seed, psm_support** out) {
  return guarded([&] {
    require(model && out, "null argument");
    psm::RandomStream rng(seed);
    *out = new psm_support{psm::sample_support(model->config, rng)};
    return PSM_OK;
  });
}

psm_status psm_support_from_json(const psm_model* model, const char* json,
                                 psm_support** out) {
  return guarded([&] {
    require(model && json && out, "null argument");
    *out = new psm_support{
        psm::support_from_json(nlohmann::json::parse(json), model->config)};
    return PSM_OK;
  });
}

psm_status psm_support_to_json(const psm_support* support, char** out_json) {
  return guarded([&] {
    require(support && out_json, "null argument");
    *out_json = copy_string(psm::support_to_json(support->support).dump());
    return PSM_OK;
  });
}

void psm_support_destroy(psm_support* support) { delete support; }

psm_status psm_observation_sample(const psm_model* model, uint64_t seed,
                                  psm_observation** out, psm_support** out_support) {
  return guarded([&] {
    require(model && out, "null argument");
    psm::RandomStream rng(seed);
    psm::SupportSet support = psm::sample_support(model->config, rng);
    auto* x = new psm_observation{
        psm::sample_observation(support, model->config.lambda, rng)};
    if (out_support) *out_support = new psm_support{std::move(support)};
    *out = x;
    return PSM_OK;
  });
}

psm_status psm_observation_null(int n, uint64_t seed, psm_observation** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    psm::RandomStream rng(seed);
    *out = new psm_observation{psm::sample_null(n, rng)};
    return PSM_OK;
  });
}

psm_status psm_observation_create(int n, const double* data, psm_observation** out) {
  return guarded([&] {
    require(data && out, "null argument");
    require(n >= 1, "n must be at least 1");
    const std::size_t size = static_cast<std::size_t>(n) * n;
    *out = new psm_observation{psm::Observation(n, std::vector<double>(data, data + size))};
    return PSM_OK;
  });
}

psm_status psm_observation_read(const char* path, psm_observation** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new psm_observation{psm::read_observation_file(path)};
    return PSM_OK;
  });
}

psm_status psm_observation_write(const psm_observation* x, const char* path, int binary) {
  return guarded([&] {
    require(x != nullptr, "null argument");
    const auto format = binary ? psm::ObservationFormat::kBinary : psm::ObservationFormat::kText;
    if (!path || std::string_view(path) == "-") {
      std::ostringstream os;
      psm::write_observation(os, x->x, format);
      psm::harness::write_text(os.str(), "");
    } else {
      psm::write_observation_file(path, x->x, format);
    }
    return PSM_OK;
  });
}

int psm_observation_size(const psm_observation* x) { return x ? x->x.n() : 0; }

const double* psm_observation_data(const psm_observation* x) {
  return x ? x->x.data().data() : nullptr;
}

void psm_observation_destroy(psm_observation* x) { delete x; }

psm_status psm_detect(const psm_observation* x, const psm_model* model, const char* test,
                      double delta, char** out_json) {
  return guarded([&] {
    require(x && model && test && out_json, "null argument");
    const std::string_view name(test);
    psm::detect::TestKind kind;
    if (name == "sum")
      kind = psm::detect::TestKind::kSum;
    else if (name == "scan_sd")
      kind = psm::detect::TestKind::kScanSD;
    else if (name == "scan_csd")
      kind = psm::detect::TestKind::kScanCSD;
    else
      psm::Fail(psm::ErrorCode::kConfig, std::string("unknown test: ") + test);
    require(x->x.n() == model->config.n, "observation size does not match model n");
    const auto outcome = psm::detect::run_test(kind, x->x, model->config, delta);
    *out_json = copy_string(psm::detect::to_json(outcome, kind).dump());
    return PSM_OK;
  });
}

psm_status psm_recover(const psm_observation* x, int k, int m, const char* estimator,
                       const psm_support* truth, char** out_json) {
  return guarded([&] {
    require(x && estimator && out_json, "null argument");
    const auto est = psm::recover::parse_estimator(estimator);
    if (!est) psm::Fail(psm::ErrorCode::kConfig, std::string("unknown estimator: ") + estimator);
    auto result = psm::recover::estimate_support(*est, x->x, k, m);
    if (truth) {
      require(truth->support.n() == x->x.n(), "truth size does not match observation");
      result.exact = psm::recover::exact_match(result.estimate, truth->support);
      result.overlap_cells = psm::overlap(result.estimate, truth->support);
    }
    *out_json = copy_string(psm::recover::to_json(result, *est).dump());
    return PSM_OK;
  });
}

psm_status psm_experiment_create(const psm_model* model, const char* task, int64_t trials,
                                 uint64_t seed, double delta, psm_experiment** out) {
  return guarded([&] {
    require(model && task && out, "null argument");
    const auto parsed = psm::harness::parse_task(task);
    if (!parsed) psm::Fail(psm::ErrorCode::kConfig, std::string("unknown task: ") + task);
    psm::harness::ExperimentConfig config;
    config.model = model->config;
    config.task = *parsed;
    config.trials = trials;
    config.master_seed = seed;
    config.delta = delta;
    config.validate();
    *out = new psm_experiment{std::move(config)};
    return PSM_OK;
  });
}

void psm_experiment_destroy(psm_experiment* experiment) { delete experiment; }

psm_status psm_experiment_set_threads(psm_experiment* experiment, int threads) {
  return guarded([&] {
    require(experiment != nullptr, "null argument");
    require(threads >= 1, "threads must be at least 1");
    experiment->config.threads = threads;
    return PSM_OK;
  });
}

psm_status psm_experiment_set_grid(psm_experiment* experiment, const char* axis,
                                   const double* values, size_t count) {
  return guarded([&] {
    require(experiment && axis && (values || count == 0), "null argument");
    const std::string_view name(axis);
    auto& grid = experiment->config.grid;
    if (name == "lambda") {
      grid.lambda.assign(values, values + count);
      return PSM_OK;
    }
    std::vector<int>* target = nullptr;
    if (name == "k")
      target = &grid.k;
    else if (name == "m")
      target = &grid.m;
    else if (name == "n")
      target = &grid.n;
    else
      psm::Fail(psm::ErrorCode::kConfig, std::string("unknown grid axis: ") + axis);
    std::vector<int> ints;
    for (size_t i = 0; i < count; ++i) {
      const double v = values[i];
      require(std::isfinite(v) && v == std::floor(v) && v >= 1 && v <= 1e9,
              "integer grid values must be positive integers");
      ints.push_back(static_cast<int>(v));
    }
    *target = std::move(ints);
    return PSM_OK;
  });
}

psm_status psm_experiment_set_tasks(psm_experiment* experiment, const char* tasks) {
  return guarded([&] {
    require(experiment && tasks, "null argument");
    experiment->config.grid.tasks = parse_task_list(tasks);
    return PSM_OK;
  });
}

psm_status psm_experiment_run_estimate(const psm_experiment* experiment, char** out_json) {
  return guarded([&] {
    require(experiment && out_json, "null argument");
    const auto& config = experiment->config;
    nlohmann::json j{{"task", psm::harness::to_string(config.task)}};
    if (psm::harness::is_detection(config.task)) {
      const auto r = psm::harness::estimate_risk(config);
      j["type1"] = r.type1_rate;
      j["type2"] = r.type2_rate;
      j["risk"] = r.risk;
      j["trials"] = r.trials_per_hypothesis;
      j["ci"] = r.ci_halfwidth;
      j["false_positives"] = r.false_positives;
      j["false_negatives"] = r.false_negatives;
    } else {
      const auto r = psm::harness::estimate_recovery(config);
      j["exact_rate"] = r.exact_rate;
      j["overlap_frac"] = r.mean_overlap_fraction;
      j["trials"] = r.trials;
      j["ci"] = r.ci_halfwidth;
      j["exact_count"] = r.exact_count;
      j["fallback_count"] = r.fallback_count;
    }
    *out_json = copy_string(j.dump());
    return PSM_OK;
  });
}

psm_status psm_experiment_run_sweep(const psm_experiment* experiment, psm_format format,
                                    char** out_text) {
  return guarded([&] {
    require(experiment && out_text, "null argument");
    require(format == PSM_FORMAT_CSV || format == PSM_FORMAT_JSON, "unknown format");
    const auto rows = psm::harness::sweep(experiment->config);
    *out_text = copy_string(psm::harness::render(
        rows, format == PSM_FORMAT_CSV ? psm::harness::Format::kCsv
                                       : psm::harness::Format::kJson));
    for (const auto& row : rows) {
      if (!row.error) continue;
      std::ostringstream os;
      os << "row n=" << row.n << " k=" << row.k << " m=" << row.m
         << " lambda=" << row.lambda << " task=" << psm::harness::to_string(row.task)
         << ": " << *row.error;
      return set_error(static_cast<psm_status>(row.error_code), os.str());
    }
    return PSM_OK;
  });
}

psm_status psm_theory(int n, int k, int m, double lambda, double delta, int paper_chi2,
                      char** out_json) {
  return guarded([&] {
    require(out_json != nullptr, "null argument");
    const auto table = psm::theory::threshold_table(
        n, k, m, lambda, delta,
        paper_chi2 ? psm::theory::Chi2Convention::kPaper
                   : psm::theory::Chi2Convention::kStandard);
    *out_json = copy_string(psm::theory::to_json(table).dump());
    return PSM_OK;
  });
}

psm_status psm_crossval(int n_max, int64_t matrices, uint64_t seed, char** out_json) {
  return guarded([&] {
    require(out_json != nullptr, "null argument");
    psm::harness::CrossvalOptions options;
    options.n_max = n_max;
    options.matrices = matrices;
    options.seed = seed;
    const auto report = psm::harness::crossval(options);
    *out_json = copy_string(psm::harness::to_json(report).dump(2));
    if (!report.passed) {
      for (const auto& suite : report.suites)
        if (!suite.passed)
          return set_error(PSM_ERR_CROSSVAL, "crossval suite " + suite.name +
                                                 " failed: " + suite.detail);
    }
    return PSM_OK;
  });
}

psm_status psm_write_file(const char* path, const char* text) {
  return guarded([&] {
    require(text != nullptr, "null argument");
    psm::harness::write_text(text, path ? path : "");
    return PSM_OK;
  });
}

}  // extern "C"
