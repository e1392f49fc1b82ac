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

#include "cbmnl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace cbmnl {

using nlohmann::json;

std::string_view library_version() { return CBMNL_VERSION_STRING; }

void ExperimentConfig::validate() const {
  instance.validate();
  if (T < 1) throw ConfigError("horizon T must be at least 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("delta must lie in (0, 1]");
  if (lambda && !(*lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (!(L_const > 0.0 && L_const <= 1.0)) throw ConfigError("L_const must lie in (0, 1]");
  if (!(M_const > 0.0 && M_const <= 1.0)) throw ConfigError("M_const must lie in (0, 1]");
  if (restarts < 1) throw ConfigError("restarts must be at least 1");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (!(mle_tol > 0.0)) throw ConfigError("mle_tol must be positive");
  if (mle_max_iter < 1) throw ConfigError("mle_max_iter must be at least 1");
}

double ExperimentConfig::effective_lambda() const {
  return lambda.value_or(default_lambda(instance.d, instance.K, T));
}

ConfidenceConfig ExperimentConfig::confidence_config(const Instance& inst) const {
  ConfidenceConfig c;
  c.delta = delta;
  c.lambda = effective_lambda();
  c.S = inst.S;
  c.L_const = L_const;
  c.d = inst.d;
  c.K = inst.K;
  c.horizon = T;
  return c;
}

std::vector<std::uint64_t> parse_seed_range(std::string_view text) {
  auto to_u64 = [&](std::string_view s) {
    std::size_t used = 0;
    const std::string str(s);
    unsigned long long v = 0;
    if (str.empty() || str[0] < '0' || str[0] > '9') throw ConfigError("bad seed '" + str + "'");
    try {
      v = std::stoull(str, &used);
    } catch (const std::exception&) {
      throw ConfigError("bad seed '" + str + "'");
    }
    if (used != str.size()) throw ConfigError("bad seed '" + str + "'");
    return static_cast<std::uint64_t>(v);
  };
  std::vector<std::uint64_t> seeds;
  const auto dots = text.find("..");
  if (dots != std::string_view::npos) {
    const std::uint64_t a = to_u64(text.substr(0, dots));
    const std::uint64_t b = to_u64(text.substr(dots + 2));
    if (b < a) throw ConfigError("seed range must be increasing");
    if (b - a >= 1'000'000) throw ConfigError("seed range too large");
    for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
    return seeds;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string_view::npos ? text.size() - start : comma - start);
    if (!piece.empty()) seeds.push_back(to_u64(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (seeds.empty()) throw ConfigError("no seeds given");
  return seeds;
}

namespace {

json instance_config_json(const InstanceConfig& c) {
  json j;
  j["d"] = c.d;
  j["N"] = c.N;
  j["K"] = c.K;
  j["S"] = c.S;
  j["S_true"] = c.S_true;
  j["context_mode"] = std::string(to_string(c.context_mode));
  j["prices"] = c.prices;
  return j;
}

json config_json(const ExperimentConfig& c, bool with_runtime_fields) {
  json j;
  j["instance"] = instance_config_json(c.instance);
  j["policy"] = std::string(to_string(c.policy));
  j["T"] = c.T;
  j["delta"] = c.delta;
  j["lambda"] = c.lambda ? json(*c.lambda) : json(nullptr);
  j["L_const"] = c.L_const;
  j["M_const"] = c.M_const;
  j["restarts"] = c.restarts;
  j["kappa_grid"] = c.kappa_grid;
  j["c_candidates"] = c.c_candidates;
  j["mle_tol"] = c.mle_tol;
  j["mle_max_iter"] = c.mle_max_iter;
  if (with_runtime_fields) {
    j["seeds"] = c.seeds;
    j["output_dir"] = c.output_dir;
  }
  return j;
}

template <typename T>
void read_optional(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig experiment_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config JSON does not parse: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config JSON must be an object");
  static const std::set<std::string> top_keys{"instance", "policy",   "T",            "delta",   "lambda",
                                              "L_const",  "M_const",  "restarts",     "seeds",   "output_dir",
                                              "kappa_grid", "c_candidates", "mle_tol", "mle_max_iter"};
  static const std::set<std::string> instance_keys{"d", "N", "K", "S", "S_true", "context_mode", "prices"};
  for (const auto& item : j.items()) {
    if (!top_keys.count(item.key())) throw ConfigError("unknown config key '" + item.key() + "'");
  }
  if (j.contains("instance") && j.at("instance").is_object()) {
    for (const auto& item : j.at("instance").items()) {
      if (!instance_keys.count(item.key())) throw ConfigError("unknown instance key '" + item.key() + "'");
    }
  }
  ExperimentConfig c;
  try {
    if (j.contains("instance")) {
      const json& ji = j.at("instance");
      read_optional(ji, "d", c.instance.d);
      read_optional(ji, "N", c.instance.N);
      read_optional(ji, "K", c.instance.K);
      read_optional(ji, "S", c.instance.S);
      read_optional(ji, "S_true", c.instance.S_true);
      read_optional(ji, "prices", c.instance.prices);
      if (ji.contains("context_mode")) c.instance.context_mode = parse_context_mode(ji.at("context_mode").get<std::string>());
    }
    if (j.contains("policy")) c.policy = parse_policy_kind(j.at("policy").get<std::string>());
    read_optional(j, "T", c.T);
    read_optional(j, "delta", c.delta);
    if (j.contains("lambda") && !j.at("lambda").is_null()) c.lambda = j.at("lambda").get<double>();
    read_optional(j, "L_const", c.L_const);
    read_optional(j, "M_const", c.M_const);
    read_optional(j, "restarts", c.restarts);
    read_optional(j, "kappa_grid", c.kappa_grid);
    read_optional(j, "c_candidates", c.c_candidates);
    read_optional(j, "mle_tol", c.mle_tol);
    read_optional(j, "mle_max_iter", c.mle_max_iter);
    read_optional(j, "output_dir", c.output_dir);
    if (j.contains("seeds")) {
      const json& s = j.at("seeds");
      c.seeds = s.is_string() ? parse_seed_range(s.get<std::string>()) : s.get<std::vector<std::uint64_t>>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config JSON has a mistyped field: ") + e.what());
  }
  c.validate();
  return c;
}

std::string experiment_to_json(const ExperimentConfig& cfg) { return config_json(cfg, true).dump(2); }

bool RunLog::covered_all_rounds() const {
  return std::all_of(rounds.begin(), rounds.end(), [](const RoundRecord& r) { return r.covered; });
}

namespace {

double h_norm(const Matrix& h, const Vector& v) { return std::sqrt(std::max(0.0, v.dot(h * v))); }

std::uint64_t round_seed(std::uint64_t seed, std::size_t t) {
  Rng rng = make_stream(seed, Stream::kPolicy, t);
  return rng();
}

}  // namespace

RunLog run_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const Instance inst = make_instance(cfg.instance, seed);
  const ConfidenceConfig ccfg = cfg.confidence_config(inst);
  const std::vector<IndexSet> sets = enumerate_assortments(inst.N, inst.K);

  RunLog log;
  log.seed = seed;
  log.policy = cfg.policy;
  log.config_echo = config_json(cfg, false).dump();
  log.lambda = ccfg.lambda;
  log.S = inst.S;
  log.K = inst.K;
  log.theta_star = inst.theta_star;
  log.kappa_hat = estimate_kappa(inst, cfg.kappa_grid).value;
  log.history = History(inst.d);
  History& history = log.history;

  PolicyOptions options;
  options.restarts = cfg.restarts;
  options.c_candidates = cfg.c_candidates;

  IndexSet cached_oracle;
  double cached_oracle_value = 0.0;
  bool oracle_cached = false;
  double cumulative = 0.0;

  for (std::size_t t = 1; t <= cfg.T; ++t) {
    const Matrix contexts = serve_contexts(inst, t);
    const MleResult mle = fit_mle(history, ccfg.lambda, cfg.mle_tol, cfg.mle_max_iter);
    if (!mle.converged) ++log.mle_failures;
    const ConfidenceState state = make_confidence_state(history, ccfg, mle.theta_hat, t);

    if (!oracle_cached) {
      cached_oracle = oracle_assortment(contexts, inst.prices, inst.theta_star, sets);
      cached_oracle_value = expected_revenue(Assortment::from_pool(contexts, inst.prices, cached_oracle), inst.theta_star);
      oracle_cached = inst.context_mode == ContextMode::kFixedPool;
    }

    const std::uint64_t step_seed = round_seed(seed, t);
    Decision decision;
    switch (cfg.policy) {
      case PolicyKind::kCbMnlE:
        decision = cb_mnl_step(contexts, inst.prices, sets, history, ccfg, state, SetKind::kE, step_seed, options);
        break;
      case PolicyKind::kCbMnlC:
        decision = cb_mnl_step(contexts, inst.prices, sets, history, ccfg, state, SetKind::kC, step_seed, options);
        break;
      case PolicyKind::kBonusUcb:
        decision = bonus_ucb_step(contexts, inst.prices, sets, ccfg, state, log.kappa_hat, cfg.M_const);
        break;
      case PolicyKind::kOracle:
        decision.assortment = Assortment::from_pool(contexts, inst.prices, cached_oracle);
        decision.theta_used = inst.theta_star;
        decision.optimistic_value = cached_oracle_value;
        break;
      case PolicyKind::kRandom: {
        Rng rng = make_stream(seed, Stream::kPolicy, t);
        decision = random_step(contexts, inst.prices, sets, mle.theta_hat, rng);
        break;
      }
    }

    RoundRecord rec;
    rec.t = t;
    rec.assortment = decision.assortment.items;
    rec.opt_value = decision.optimistic_value;
    rec.oracle_value = cached_oracle_value;
    rec.chosen_value = expected_revenue(decision.assortment, inst.theta_star);
    rec.inst_regret = cached_oracle_value - rec.chosen_value;
    cumulative += rec.inst_regret;
    rec.cum_regret = cumulative;
    rec.gamma = state.gamma;
    rec.beta = state.beta;
    rec.covered_E = in_set_E(inst.theta_star, history, ccfg, state);
    rec.covered_C = in_set_C(inst.theta_star, history, ccfg, state);
    rec.covered = cfg.policy == PolicyKind::kCbMnlC ? rec.covered_C : rec.covered_E;
    const Matrix h_star = matrix_H(history, inst.theta_star, ccfg.lambda);
    rec.dev_H = h_norm(h_star, decision.theta_used - inst.theta_star);
    rec.dev_bound = 2.0 * (1.0 + 2.0 * inst.S) * state.gamma;
    rec.dev_bound_E = (2.0 + 2.0 * inst.S) * state.gamma + 2.0 * std::sqrt(1.0 + inst.S) * state.beta;
    rec.pred_error = std::abs(rec.chosen_value - expected_revenue(decision.assortment, decision.theta_used));
    rec.mle_converged = mle.converged;

    Rng env = make_stream(seed, Stream::kEnvironment, t);
    rec.outcome = environment_step(inst, decision.assortment, env);
    history.append(decision.assortment, rec.outcome);
    log.rounds.push_back(std::move(rec));
  }
  log.total_regret = cumulative;
  log.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return log;
}

std::vector<RunLog> run_seeds(const ExperimentConfig& cfg, std::size_t jobs) {
  cfg.validate();
  std::vector<RunLog> logs(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
      try {
        logs[i] = run_experiment(cfg, cfg.seeds[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, cfg.seeds.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return logs;
}

namespace {

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

IndexSet parse_index_set(const std::string& text) {
  IndexSet set;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ';')) {
    if (piece.empty()) continue;
    const unsigned long v = std::stoul(piece);
    if (v == 0) throw IoError("assortment items are 1-based");
    set.push_back(static_cast<std::size_t>(v - 1));
  }
  return set;
}

}  // namespace

void write_csv(const RunLog& log, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const RoundRecord& r : log.rounds) {
    out << r.t << ',' << format_index_set(r.assortment) << ',' << r.outcome << ',' << fmt_real(r.opt_value) << ','
        << fmt_real(r.oracle_value) << ',' << fmt_real(r.inst_regret) << ',' << fmt_real(r.cum_regret) << ','
        << fmt_real(r.gamma) << ',' << fmt_real(r.beta) << ',' << (r.covered ? 1 : 0) << ','
        << fmt_real(r.dev_H) << ',' << fmt_real(r.dev_bound) << '\n';
  }
}

std::string to_csv(const RunLog& log) {
  std::ostringstream out;
  write_csv(log, out);
  return out.str();
}

RunLog read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw IoError("run CSV has an unexpected header");
  RunLog log;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 12) throw IoError("run CSV line " + std::to_string(line_no) + " has " +
                                          std::to_string(cells.size()) + " fields, expected 12");
    try {
      RoundRecord r;
      r.t = std::stoul(cells[0]);
      r.assortment = parse_index_set(cells[1]);
      r.outcome = std::stoul(cells[2]);
      r.opt_value = std::stod(cells[3]);
      r.oracle_value = std::stod(cells[4]);
      r.inst_regret = std::stod(cells[5]);
      r.cum_regret = std::stod(cells[6]);
      r.gamma = std::stod(cells[7]);
      r.beta = std::stod(cells[8]);
      r.covered = cells[9] == "1";
      r.dev_H = std::stod(cells[10]);
      r.dev_bound = std::stod(cells[11]);
      log.rounds.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw IoError("run CSV line " + std::to_string(line_no) + " does not parse");
    }
  }
  log.total_regret = log.rounds.empty() ? 0.0 : log.rounds.back().cum_regret;
  return log;
}

std::string run_metadata_json(const RunLog& log) {
  json j;
  j["config"] = log.config_echo.empty() ? json(nullptr) : json::parse(log.config_echo);
  j["seed"] = log.seed;
  j["policy"] = std::string(to_string(log.policy));
  j["kappa_hat"] = log.kappa_hat;
  j["lambda"] = log.lambda;
  j["rounds"] = log.rounds.size();
  j["total_regret"] = log.total_regret;
  j["covered_all_rounds"] = log.covered_all_rounds();
  j["mle_failures"] = log.mle_failures;
  j["wall_time_seconds"] = log.wall_time_seconds;
  j["version"] = std::string(library_version());
  return j.dump(2);
}

void write_run_files(const RunLog& log, const std::string& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw IoError("cannot create output directory " + directory + ": " + ec.message());
  const fs::path base = fs::path(directory) / ("run_" + std::to_string(log.seed));
  {
    std::ofstream csv(base.string() + ".csv", std::ios::binary);
    if (!csv) throw IoError("cannot write " + base.string() + ".csv");
    write_csv(log, csv);
  }
  std::ofstream meta(base.string() + ".json", std::ios::binary);
  if (!meta) throw IoError("cannot write " + base.string() + ".json");
  meta << run_metadata_json(log) << '\n';
}

RunLog load_run(const std::string& csv_path, const std::string& metadata_path) {
  std::ifstream csv(csv_path, std::ios::binary);
  if (!csv) throw IoError("cannot read " + csv_path);
  RunLog log = read_csv(csv);
  std::ifstream meta(metadata_path, std::ios::binary);
  if (!meta) throw IoError("cannot read " + metadata_path);
  try {
    const json j = json::parse(meta);
    if (j.contains("config") && !j.at("config").is_null()) log.config_echo = j.at("config").dump();
    log.seed = j.at("seed").get<std::uint64_t>();
    log.kappa_hat = j.value("kappa_hat", 0.0);
    log.lambda = j.value("lambda", 1.0);
    log.policy = parse_policy_kind(j.at("policy").get<std::string>());
  } catch (const json::exception& e) {
    throw IoError("run metadata " + metadata_path + " is malformed: " + e.what());
  }
  return log;
}

PotentialReport elliptical_potential_check(const RunLog& run, const History& history, double L_const) {
  PotentialReport rep;
  const auto d = static_cast<Eigen::Index>(history.dim());
  const double lam = run.lambda;
  Matrix J = lam * Matrix::Identity(d, d);
  Matrix V = lam * Matrix::Identity(d, d);
  const Vector& theta_star = run.theta_star.size() == d ? run.theta_star : Vector(Vector::Zero(d));
  for (const Round& r : history.rounds()) {
    const Eigen::LLT<Matrix> j_llt(J);
    const Eigen::LLT<Matrix> v_llt(V);
    double sum_j = 0.0;
    double sum_v = 0.0;
    Matrix j_update = Matrix::Zero(d, d);
    if (r.assortment.size() > 0) {
      const ChoiceDistribution dist = choice_probabilities(r.assortment, theta_star);
      for (Eigen::Index i = 0; i < r.assortment.contexts.rows(); ++i) {
        const Vector x = r.assortment.contexts.row(i).transpose();
        const double w = dist.item_probs[i] * (1.0 - dist.item_probs[i]);
        sum_j += w * x.dot(j_llt.solve(x));
        sum_v += x.dot(v_llt.solve(x));
        j_update.noalias() += w * x * x.transpose();
      }
      V.noalias() += r.assortment.contexts.transpose() * r.assortment.contexts;
    }
    J += j_update;
    rep.potential_J += std::min(sum_j, 1.0);
    rep.potential_V += std::min(sum_v, 1.0);
  }
  auto log_det = [](const Matrix& m) {
    const Eigen::LLT<Matrix> llt(m);
    const Matrix l = llt.matrixL();
    return 2.0 * l.diagonal().array().log().sum();
  };
  const double dd = static_cast<double>(d);
  const double T = static_cast<double>(history.size());
  const double K = static_cast<double>(run.K);
  rep.log_det_J = log_det(J);
  rep.log_det_V = log_det(V);
  rep.potential_J_bound = 2.0 * (rep.log_det_J - dd * std::log(lam));
  rep.potential_V_bound = 2.0 * (rep.log_det_V - dd * std::log(lam));
  rep.log_det_V_bound = dd * std::log(lam + T * K / dd);
  rep.log_det_J_bound = dd * std::log(lam + L_const * T * K / dd);
  auto within = [](double lhs, double rhs) { return lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs)); };
  rep.potential_holds = within(rep.potential_J, rep.potential_J_bound) && within(rep.potential_V, rep.potential_V_bound);
  rep.determinant_holds = within(rep.log_det_V, rep.log_det_V_bound) && within(rep.log_det_J, rep.log_det_J_bound);
  return rep;
}

double loglog_slope(const std::vector<double>& values) {
  const std::size_t T = values.size();
  if (T < 2) return 0.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t t = (T + 1) / 2; t <= T; ++t) {
    const double y = values[t - 1];
    if (!(y > 0.0)) continue;
    const double lx = std::log(static_cast<double>(t));
    const double ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return 0.0;
  const double nn = static_cast<double>(n);
  const double denom = nn * sxx - sx * sx;
  return denom > 0.0 ? (nn * sxy - sx * sy) / denom : 0.0;
}

RunSummary summarize_runs(const std::vector<RunLog>& logs) {
  if (logs.empty()) throw AggregationError("no runs to summarize");
  RunSummary s;
  s.runs = logs.size();
  s.T = logs.front().rounds.size();
  for (const RunLog& log : logs) {
    if (log.config_echo != logs.front().config_echo) {
      throw AggregationError("runs were produced by different configurations (seed " +
                             std::to_string(log.seed) + " differs)");
    }
    if (log.rounds.size() != s.T) throw AggregationError("runs have different horizons");
  }
  s.mean_cum_regret.assign(s.T, 0.0);
  s.stderr_cum_regret.assign(s.T, 0.0);
  const double n = static_cast<double>(s.runs);
  std::size_t covered = 0;
  for (const RunLog& log : logs) {
    if (log.covered_all_rounds()) ++covered;
    for (std::size_t t = 0; t < s.T; ++t) s.mean_cum_regret[t] += log.rounds[t].cum_regret / n;
  }
  if (s.runs > 1) {
    for (std::size_t t = 0; t < s.T; ++t) {
      double ss = 0.0;
      for (const RunLog& log : logs) {
        const double dev = log.rounds[t].cum_regret - s.mean_cum_regret[t];
        ss += dev * dev;
      }
      s.stderr_cum_regret[t] = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
  }
  s.coverage_rate = static_cast<double>(covered) / n;
  s.loglog_slope = loglog_slope(s.mean_cum_regret);
  return s;
}

std::string summary_to_json(const RunSummary& s) {
  json j;
  j["runs"] = s.runs;
  j["T"] = s.T;
  j["coverage_rate"] = s.coverage_rate;
  j["loglog_slope"] = s.loglog_slope;
  j["final_mean_cum_regret"] = s.mean_cum_regret.empty() ? 0.0 : s.mean_cum_regret.back();
  j["final_stderr_cum_regret"] = s.stderr_cum_regret.empty() ? 0.0 : s.stderr_cum_regret.back();
  j["mean_cum_regret"] = s.mean_cum_regret;
  j["stderr_cum_regret"] = s.stderr_cum_regret;
  return j.dump(2);
}

}  // namespace cbmnl
