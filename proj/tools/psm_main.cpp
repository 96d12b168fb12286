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

// psm command-line front end. Links only the C API.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "psm/psm.h"

namespace {

struct Options {
  int n = 100;
  int k = 10;
  int m = 1;
  double lambda = 0.0;
  std::string variant = "consecutive";
  std::string placement = "uniform";
  std::string boundary = "linear";
  std::int64_t trials = 100;
  std::uint64_t seed = 0;
  double delta = 0.5;
  std::string task;
  std::vector<double> grid_lambda;
  std::vector<int> grid_k, grid_m, grid_n;
  std::string format = "csv";
  std::string out;
  int threads = 1;
  std::string input;
  std::string truth;
  std::string support_out;
  bool binary = false;
  bool null_draw = false;
  bool paper_chi2 = false;
};

// Thrown after a psm call fails; carries the status as exit code.
struct Failure {
  int code;
};

void check(psm_status status) {
  if (status == PSM_OK) return;
  std::cerr << "psm: " << psm_last_error() << '\n';
  throw Failure{static_cast<int>(status)};
}

void usage_error(const std::string& message) {
  std::cerr << "psm: " << message << '\n';
  throw Failure{PSM_ERR_CONFIG};
}

struct StringDeleter {
  void operator()(char* s) const { psm_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

template <class T, void (*Destroy)(T*)>
struct HandleDeleter {
  void operator()(T* p) const { Destroy(p); }
};
using Model = std::unique_ptr<psm_model, HandleDeleter<psm_model, psm_model_destroy>>;
using Support = std::unique_ptr<psm_support, HandleDeleter<psm_support, psm_support_destroy>>;
using Obs = std::unique_ptr<psm_observation,
                            HandleDeleter<psm_observation, psm_observation_destroy>>;
using Experiment =
    std::unique_ptr<psm_experiment, HandleDeleter<psm_experiment, psm_experiment_destroy>>;

void add_model_flags(CLI::App* app, Options& o) {
  app->add_option("--n", o.n, "matrix side")->capture_default_str();
  app->add_option("--k", o.k, "submatrix side")->capture_default_str();
  app->add_option("--m", o.m, "number of planted submatrices")->capture_default_str();
  app->add_option("--lambda", o.lambda, "elevated mean")->capture_default_str();
  app->add_option("--variant", o.variant, "arbitrary|consecutive")->capture_default_str();
  app->add_option("--placement", o.placement, "uniform|separated")->capture_default_str();
  app->add_option("--boundary", o.boundary, "linear|cyclic")->capture_default_str();
  app->add_option("--seed", o.seed, "master seed")->capture_default_str();
}

Model make_model(const Options& o) {
  psm_model_params p;
  psm_model_params_default(&p);
  p.n = o.n;
  p.k = o.k;
  p.m = o.m;
  p.lambda = o.lambda;
  check(psm_parse_variant(o.variant.c_str(), &p.variant));
  check(psm_parse_placement(o.placement.c_str(), &p.placement));
  check(psm_parse_boundary(o.boundary.c_str(), &p.boundary));
  psm_model* model = nullptr;
  check(psm_model_create(&p, &model));
  return Model(model);
}

psm_format parse_format(const std::string& s) {
  if (s == "csv") return PSM_FORMAT_CSV;
  if (s == "json") return PSM_FORMAT_JSON;
  usage_error("unknown format: " + s);
  return PSM_FORMAT_CSV;
}

void write(const std::string& text, const std::string& path) {
  check(psm_write_file(path.empty() ? nullptr : path.c_str(), text.c_str()));
}

// Observation from --input, or a fresh draw from the model and seed.
Obs load_or_sample(const Options& o, const psm_model* model, Support* truth) {
  psm_observation* x = nullptr;
  if (!o.input.empty()) {
    check(psm_observation_read(o.input.c_str(), &x));
  } else if (o.null_draw) {
    check(psm_observation_null(o.n, o.seed, &x));
  } else {
    psm_support* support = nullptr;
    check(psm_observation_sample(model, o.seed, &x, &support));
    if (truth) truth->reset(support);
    else psm_support_destroy(support);
  }
  return Obs(x);
}

std::string read_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) {
    std::cerr << "psm: cannot open " << path << '\n';
    throw Failure{PSM_ERR_IO};
  }
  std::string text;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof(buf), f)) > 0) text.append(buf, got);
  std::fclose(f);
  return text;
}

int run_gen(const Options& o) {
  Model model = make_model(o);
  Support support;
  Obs x = load_or_sample(o, model.get(), &support);
  check(psm_observation_write(x.get(), o.out.empty() ? nullptr : o.out.c_str(), o.binary));
  if (!o.support_out.empty()) {
    if (!support) usage_error("--support needs an alternative draw");
    char* json = nullptr;
    check(psm_support_to_json(support.get(), &json));
    OwnedString owned(json);
    write(std::string(json) + '\n', o.support_out);
  }
  return 0;
}

std::string detection_test(const std::string& task) {
  if (task.empty() || task == "detect_scan_csd" || task == "scan_csd") return "scan_csd";
  if (task == "detect_scan_sd" || task == "scan_sd") return "scan_sd";
  if (task == "detect_sum" || task == "sum") return "sum";
  usage_error("not a detection task: " + task);
  return {};
}

std::string recovery_estimator(const std::string& task) {
  if (task.empty() || task == "recover_peel" || task == "peel") return "peel";
  if (task == "recover_ml" || task == "ml") return "ml";
  if (task == "recover_modified_peel" || task == "modified_peel") return "modified_peel";
  usage_error("not a recovery task: " + task);
  return {};
}

int run_detect(const Options& o) {
  Model model = make_model(o);
  Obs x = load_or_sample(o, model.get(), nullptr);
  char* json = nullptr;
  check(psm_detect(x.get(), model.get(), detection_test(o.task).c_str(), o.delta, &json));
  OwnedString owned(json);
  write(std::string(json) + '\n', o.out);
  return 0;
}

int run_recover(const Options& o) {
  Model model = make_model(o);
  Support truth;
  Obs x = load_or_sample(o, model.get(), &truth);
  if (!o.truth.empty()) {
    psm_support* s = nullptr;
    check(psm_support_from_json(model.get(), read_file(o.truth).c_str(), &s));
    truth.reset(s);
  }
  char* json = nullptr;
  check(psm_recover(x.get(), o.k, o.m, recovery_estimator(o.task).c_str(), truth.get(),
                    &json));
  OwnedString owned(json);
  write(std::string(json) + '\n', o.out);
  return 0;
}

template <class T>
void set_grid(psm_experiment* e, const char* axis, const std::vector<T>& values) {
  if (values.empty()) return;
  std::vector<double> v(values.begin(), values.end());
  check(psm_experiment_set_grid(e, axis, v.data(), v.size()));
}

int run_sweep(const Options& o) {
  const psm_format format = parse_format(o.format);
  Model model = make_model(o);
  std::string tasks = o.task.empty() ? "detect_sum" : o.task;
  const std::string first = tasks.substr(0, tasks.find(','));
  psm_experiment* raw = nullptr;
  check(psm_experiment_create(model.get(), first.c_str(), o.trials, o.seed, o.delta, &raw));
  Experiment experiment(raw);
  check(psm_experiment_set_threads(raw, o.threads));
  check(psm_experiment_set_tasks(raw, tasks.c_str()));
  set_grid(raw, "lambda", o.grid_lambda);
  set_grid(raw, "k", o.grid_k);
  set_grid(raw, "m", o.grid_m);
  set_grid(raw, "n", o.grid_n);
  char* text = nullptr;
  const psm_status status = psm_experiment_run_sweep(raw, format, &text);
  const std::string error = psm_last_error();
  if (text) {
    OwnedString owned(text);
    write(text, o.out);
  }
  if (status != PSM_OK) {
    std::cerr << "psm: " << error << '\n';
    return static_cast<int>(status);
  }
  return 0;
}

std::string csv_cell(const nlohmann::json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

int run_theory(const Options& o) {
  const psm_format format = parse_format(o.format);
  auto or_default = [](const auto& grid, auto value) {
    using T = decltype(value);
    return grid.empty() ? std::vector<T>{value} : std::vector<T>(grid.begin(), grid.end());
  };
  nlohmann::json tables = nlohmann::json::array();
  for (int n : or_default(o.grid_n, o.n))
    for (int k : or_default(o.grid_k, o.k))
      for (int m : or_default(o.grid_m, o.m))
        for (double lambda : or_default(o.grid_lambda, o.lambda)) {
          char* json = nullptr;
          check(psm_theory(n, k, m, lambda, o.delta, o.paper_chi2, &json));
          OwnedString owned(json);
          tables.push_back(nlohmann::json::parse(json));
        }
  if (format == PSM_FORMAT_JSON) {
    write(tables.dump(2) + '\n', o.out);
    return 0;
  }
  static const char* kColumns[] = {
      "n", "k", "m", "lambda", "delta", "chi2_convention", "tau_sum", "tau_scan_sd",
      "tau_scan_csd", "peel_lambda_min", "chi2", "chi2_ceiling_sd", "chi2_ceiling_csd",
      "sum_risk_bound", "csd_type1_bound", "alpha", "beta", "gamma_m", "regime_sd",
      "regime_sr", "regime_csd", "regime_csr"};
  std::string csv;
  for (const char* c : kColumns) csv += std::string(csv.empty() ? "" : ",") + c;
  csv += '\n';
  for (const auto& t : tables) {
    bool first = true;
    for (const char* c : kColumns) {
      if (!first) csv += ',';
      csv += csv_cell(t.at(c));
      first = false;
    }
    csv += '\n';
  }
  write(csv, o.out);
  return 0;
}

int run_crossval(const Options& o, int n_max, std::int64_t matrices) {
  char* json = nullptr;
  const psm_status status = psm_crossval(n_max, matrices, o.seed, &json);
  const std::string error = psm_last_error();
  if (json) {
    OwnedString owned(json);
    write(std::string(json) + '\n', o.out);
  }
  if (status != PSM_OK) {
    std::cerr << "psm: " << error << '\n';
    return static_cast<int>(status);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planted submatrix detection and recovery experiments"};
  app.set_version_flag("--version", psm_version());
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen", "sample an observation matrix");
  add_model_flags(gen, o);
  gen->add_flag("--null", o.null_draw, "pure-noise draw");
  gen->add_flag("--binary", o.binary, "binary matrix format");
  gen->add_option("--out", o.out, "matrix output path (default stdout)");
  gen->add_option("--support", o.support_out, "write the planted support as JSON");

  auto* det = app.add_subcommand("detect", "run a detection test");
  add_model_flags(det, o);
  det->add_option("--task", o.task, "detect_sum|detect_scan_sd|detect_scan_csd");
  det->add_option("--delta", o.delta, "scan threshold slack")->capture_default_str();
  det->add_option("--input", o.input, "observation file (default: sample one)");
  det->add_flag("--null", o.null_draw, "sample a pure-noise matrix");
  det->add_option("--out", o.out, "output path");

  auto* rec = app.add_subcommand("recover", "estimate the planted support");
  add_model_flags(rec, o);
  rec->add_option("--task", o.task, "recover_ml|recover_peel|recover_modified_peel");
  rec->add_option("--input", o.input, "observation file (default: sample one)");
  rec->add_option("--truth", o.truth, "support JSON to score against");
  rec->add_option("--out", o.out, "output path");

  auto* sw = app.add_subcommand("sweep", "Monte Carlo sweep over a parameter grid");
  add_model_flags(sw, o);
  sw->add_option("--task", o.task, "comma-separated task list")->capture_default_str();
  sw->add_option("--trials", o.trials, "trials per hypothesis")->capture_default_str();
  sw->add_option("--delta", o.delta, "scan threshold slack")->capture_default_str();
  sw->add_option("--grid-lambda", o.grid_lambda, "lambda values")->delimiter(',');
  sw->add_option("--grid-k", o.grid_k, "k values")->delimiter(',');
  sw->add_option("--grid-m", o.grid_m, "m values")->delimiter(',');
  sw->add_option("--grid-n", o.grid_n, "n values")->delimiter(',');
  sw->add_option("--threads", o.threads, "worker threads")->capture_default_str();
  sw->add_option("--format", o.format, "csv|json")->capture_default_str();
  sw->add_option("--out", o.out, "output path (default stdout)");

  auto* th = app.add_subcommand("theory", "threshold table and regime labels");
  add_model_flags(th, o);
  th->add_option("--delta", o.delta, "scan threshold slack")->capture_default_str();
  th->add_option("--grid-lambda", o.grid_lambda, "lambda values")->delimiter(',');
  th->add_option("--grid-k", o.grid_k, "k values")->delimiter(',');
  th->add_option("--grid-m", o.grid_m, "m values")->delimiter(',');
  th->add_option("--grid-n", o.grid_n, "n values")->delimiter(',');
  th->add_flag("--paper-chi2", o.paper_chi2, "halved chi-square convention");
  th->add_option("--format", o.format, "csv|json")->capture_default_str();
  th->add_option("--out", o.out, "output path (default stdout)");

  int cv_n = 32;
  std::int64_t cv_matrices = 1000;
  auto* cv = app.add_subcommand("crossval", "oracle cross-validation suites");
  cv->add_option("--n", cv_n, "largest matrix side for the scan suite")->capture_default_str();
  cv->add_option("--trials", cv_matrices, "random matrices in the scan suite")
      ->capture_default_str();
  cv->add_option("--seed", o.seed, "master seed")->capture_default_str();
  cv->add_option("--out", o.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : PSM_ERR_CONFIG;
  }

  try {
    if (gen->parsed()) return run_gen(o);
    if (det->parsed()) return run_detect(o);
    if (rec->parsed()) return run_recover(o);
    if (sw->parsed()) return run_sweep(o);
    if (th->parsed()) return run_theory(o);
    if (cv->parsed()) return run_crossval(o, cv_n, cv_matrices);
  } catch (const Failure& f) {
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "psm: " << e.what() << '\n';
    return PSM_ERR_INTERNAL;
  }
  return 0;
}
