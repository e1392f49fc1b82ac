// Copyright 2026 The cbmnl Authors.
//
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

// Command-line front end over the C API.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cbmnl/cbmnl.h"

namespace {

struct CString {
  char* ptr = nullptr;
  ~CString() { cbmnl_string_free(ptr); }
};

int report(cbmnl_status status) {
  std::cerr << "cbmnl: " << cbmnl_status_string(status);
  const std::string detail = cbmnl_last_error();
  if (!detail.empty()) std::cerr << ": " << detail;
  std::cerr << '\n';
  return static_cast<int>(status) == 0 ? 0 : 2;
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Common {
  std::string config;
  std::string seeds;
  std::string out;
  std::string policy;
  std::optional<std::size_t> T;
  std::optional<double> delta;
  std::size_t jobs = 1;
};

// Builds the experiment from --config plus flag overrides.
cbmnl_status load_experiment(const Common& c, cbmnl_experiment** exp) {
  cbmnl_status s;
  if (c.config.empty()) {
    s = cbmnl_experiment_default(exp);
  } else {
    const auto text = read_file(c.config);
    if (!text) {
      std::cerr << "cbmnl: cannot read " << c.config << '\n';
      return CBMNL_ERR_IO;
    }
    s = cbmnl_experiment_from_json(text->c_str(), exp);
  }
  if (s != CBMNL_OK) return s;
  if (!c.policy.empty() && (s = cbmnl_experiment_set_policy(*exp, c.policy.c_str())) != CBMNL_OK) return s;
  if (c.T && (s = cbmnl_experiment_set_T(*exp, *c.T)) != CBMNL_OK) return s;
  if (c.delta && (s = cbmnl_experiment_set_delta(*exp, *c.delta)) != CBMNL_OK) return s;
  if (!c.seeds.empty() && (s = cbmnl_experiment_set_seeds(*exp, c.seeds.c_str())) != CBMNL_OK) return s;
  if (!c.out.empty() && (s = cbmnl_experiment_set_output_dir(*exp, c.out.c_str())) != CBMNL_OK) return s;
  return CBMNL_OK;
}

int cmd_run(const Common& c) {
  cbmnl_experiment* exp = nullptr;
  cbmnl_status s = load_experiment(c, &exp);
  if (s != CBMNL_OK) {
    cbmnl_experiment_free(exp);
    return report(s);
  }
  CString summary;
  s = cbmnl_run_batch(exp, c.jobs, &summary.ptr);
  cbmnl_experiment_free(exp);
  if (s != CBMNL_OK) return report(s);
  std::cout << summary.ptr << '\n';
  return 0;
}

int cmd_check(const std::string& suite, const std::string& seeds) {
  std::uint64_t seed = 1;
  if (!seeds.empty()) seed = std::stoull(seeds.substr(0, seeds.find("..")));
  CString json;
  const cbmnl_status s = cbmnl_check(suite.c_str(), seed, &json.ptr);
  if (json.ptr != nullptr) std::cout << json.ptr << '\n';
  if (s == CBMNL_ERR_CHECK_FAILED) return 1;
  return s == CBMNL_OK ? 0 : report(s);
}

int cmd_summarize(const std::string& dir) {
  CString json;
  const cbmnl_status s = cbmnl_summarize_dir(dir.c_str(), &json.ptr);
  if (s != CBMNL_OK) return report(s);
  std::cout << json.ptr << '\n';
  return 0;
}

int cmd_instance(const Common& c, const std::string& inspect, std::size_t kappa_grid) {
  cbmnl_instance* inst = nullptr;
  cbmnl_status s;
  if (!inspect.empty()) {
    const auto text = read_file(inspect);
    if (!text) {
      std::cerr << "cbmnl: cannot read " << inspect << '\n';
      return 2;
    }
    s = cbmnl_instance_from_json(text->c_str(), &inst);
  } else {
    cbmnl_experiment* exp = nullptr;
    s = load_experiment(Common{c.config, "", "", "", std::nullopt, std::nullopt, 1}, &exp);
    std::uint64_t seed = 1;
    if (!c.seeds.empty()) seed = std::stoull(c.seeds.substr(0, c.seeds.find("..")));
    if (s == CBMNL_OK) s = cbmnl_experiment_instance(exp, seed, &inst);
    cbmnl_experiment_free(exp);
  }
  if (s != CBMNL_OK) return report(s);

  CString json;
  double kappa = 0.0;
  s = cbmnl_instance_to_json(inst, &json.ptr);
  if (s == CBMNL_OK) s = cbmnl_instance_kappa(inst, kappa_grid, &kappa);
  cbmnl_instance_free(inst);
  if (s != CBMNL_OK) return report(s);

  if (!c.out.empty()) {
    std::ofstream out(c.out, std::ios::binary);
    if (!out) {
      std::cerr << "cbmnl: cannot write " << c.out << '\n';
      return 2;
    }
    out << json.ptr << '\n';
  } else {
    std::cout << json.ptr << '\n';
  }
  std::cerr << "kappa_hat " << kappa << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual MNL bandits: simulation, checks and aggregation"};
  app.set_version_flag("--version", std::string(cbmnl_version()));
  app.require_subcommand(1);

  Common run_opts;
  auto* run = app.add_subcommand("run", "Run one config over many seeds");
  run->add_option("--config", run_opts.config, "Experiment JSON")->check(CLI::ExistingFile);
  run->add_option("--seeds", run_opts.seeds, "Seed range a..b or list a,b,c");
  run->add_option("--out", run_opts.out, "Output directory");
  run->add_option("--policy", run_opts.policy, "cb_mnl_e, cb_mnl_c, bonus_ucb, oracle or random");
  run->add_option("--T", run_opts.T, "Horizon");
  run->add_option("--delta", run_opts.delta, "Confidence level");
  run->add_option("--jobs", run_opts.jobs, "Parallel runs")->check(CLI::PositiveNumber);

  std::string suite = "all";
  std::string check_seed;
  auto* check = app.add_subcommand("check", "Run numerical property check suites");
  check->add_option("suite", suite, "mnl, estimator, confidence, policy, simulator, harness or all");
  check->add_option("--seeds", check_seed, "Seed for the random draws (first of a..b)");

  std::string summarize_dir;
  auto* summarize = app.add_subcommand("summarize", "Aggregate run_<seed>.csv files in a directory");
  summarize->add_option("dir", summarize_dir, "Directory with run files");
  summarize->add_option("--out", summarize_dir, "Same as the positional directory");

  Common inst_opts;
  std::string inspect;
  std::size_t kappa_grid = 256;
  auto* instance = app.add_subcommand("instance", "Generate or inspect an instance");
  instance->add_option("--config", inst_opts.config, "Experiment JSON whose instance block is used")
      ->check(CLI::ExistingFile);
  instance->add_option("--seeds", inst_opts.seeds, "Instance seed (first of a..b)");
  instance->add_option("--out", inst_opts.out, "Write the instance JSON here instead of stdout");
  instance->add_option("--inspect", inspect, "Load an instance JSON instead of generating one")
      ->check(CLI::ExistingFile);
  instance->add_option("--kappa-grid", kappa_grid, "Grid size for the kappa estimate");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opts);
    if (*check) return cmd_check(suite, check_seed);
    if (*summarize) {
      if (summarize_dir.empty()) {
        std::cerr << "cbmnl: summarize needs a directory\n";
        return 2;
      }
      return cmd_summarize(summarize_dir);
    }
    if (*instance) return cmd_instance(inst_opts, inspect, kappa_grid);
  } catch (const std::exception& e) {
    std::cerr << "cbmnl: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
