// Copyright 2026 The compresim Authors. All Rights Reserved.
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
// =============================================================================

#include "compresim/experiment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace compresim {

namespace {

std::array<double, 7> ledger_columns(const CommLedger& l) {
  return {static_cast<double>(l.up_scalars), static_cast<double>(l.up_indices),
          static_cast<double>(l.down_scalars), static_cast<double>(l.down_indices),
          static_cast<double>(l.up_bits), static_cast<double>(l.down_bits),
          static_cast<double>(l.queries())};
}

// Sample mean and standard deviation (n - 1 denominator, 0 for one value).
std::pair<double, double> mean_std(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  const double m = sum / static_cast<double>(v.size());
  if (v.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

std::string g17(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

TrialSummary summarize(const std::vector<RunRecord>& records) {
  if (records.empty()) throw Error("summarize: no records");
  TrialSummary s;
  s.config = records.front().config;
  s.label = s.config.display_name();
  s.params = records.front().params;
  std::vector<const RunRecord*> ok;
  double wall = 0.0;
  for (const auto& r : records) {
    wall += r.wall_seconds;
    if (r.diverged) {
      ++s.diverged;
    } else {
      ok.push_back(&r);
    }
  }
  s.wall_seconds_mean = wall / static_cast<double>(records.size());
  s.trials = static_cast<int>(ok.size());
  if (ok.empty()) return s;

  const auto& grid = ok.front()->series;
  for (const auto* r : ok) {
    if (r->series.size() != grid.size()) throw Error("summarize: trials logged different rounds");
    for (std::size_t j = 0; j < grid.size(); ++j) {
      if (r->series[j].round != grid[j].round) throw Error("summarize: trials logged different rounds");
    }
  }
  double running = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    std::vector<double> f, g;
    std::array<double, 7> led{};
    for (const auto* r : ok) {
      f.push_back(r->series[j].f);
      g.push_back(r->series[j].grad_norm_sq);
      const auto cols = ledger_columns(r->series[j].ledger);
      for (std::size_t c = 0; c < cols.size(); ++c) led[c] += cols[c];
    }
    for (auto& c : led) c /= static_cast<double>(ok.size());
    const auto [fm, fs] = mean_std(f);
    const auto [gm, gs] = mean_std(g);
    s.rounds.push_back(grid[j].round);
    s.f_mean.push_back(fm);
    s.f_std.push_back(fs);
    s.grad_norm_sq_mean.push_back(gm);
    s.grad_norm_sq_std.push_back(gs);
    running += gm;
    s.grad_norm_sq_avg.push_back(running / static_cast<double>(j + 1));
    s.ledger_mean.push_back(led);
  }
  s.final_f_mean = s.f_mean.back();
  s.final_f_std = s.f_std.back();
  s.final_grad_norm_sq_mean = s.grad_norm_sq_mean.back();
  s.final_grad_norm_sq_std = s.grad_norm_sq_std.back();
  return s;
}

std::optional<long> estimate_transient_crossing(const TrialSummary& algo,
                                                const TrialSummary& reference, double tau) {
  if (algo.rounds.empty() || reference.rounds.empty()) return std::nullopt;
  std::optional<long> crossing;
  std::size_t ref_at = 0;
  for (std::size_t j = 0; j < algo.rounds.size(); ++j) {
    const long r = algo.rounds[j];
    while (ref_at + 1 < reference.rounds.size() && reference.rounds[ref_at + 1] <= r) ++ref_at;
    const bool within = algo.grad_norm_sq_mean[j] <= (1.0 + tau) * reference.grad_norm_sq_mean[ref_at];
    if (!within) {
      crossing.reset();
    } else if (!crossing) {
      crossing = r;
    }
  }
  return crossing;
}

void write_trial_csv(std::ostream& out, const RunRecord& record) {
  out << kTrialCsvHeader << '\n';
  for (const auto& p : record.series) {
    const auto& l = p.ledger;
    out << p.round << ',' << g17(p.f) << ',' << g17(p.grad_norm_sq) << ',' << l.up_scalars << ','
        << l.up_indices << ',' << l.down_scalars << ',' << l.down_indices << ',' << l.up_bits
        << ',' << l.down_bits << ',' << l.queries() << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, const TrialSummary& s) {
  out << "round,f_mean,f_std,grad_norm_sq_mean,grad_norm_sq_std,grad_norm_sq_avg,"
         "up_scalars,up_idx,down_scalars,down_idx,up_bits,down_bits,queries\n";
  for (std::size_t j = 0; j < s.rounds.size(); ++j) {
    out << s.rounds[j] << ',' << g17(s.f_mean[j]) << ',' << g17(s.f_std[j]) << ','
        << g17(s.grad_norm_sq_mean[j]) << ',' << g17(s.grad_norm_sq_std[j]) << ','
        << g17(s.grad_norm_sq_avg[j]);
    for (double c : s.ledger_mean[j]) out << ',' << g17(c);
    out << '\n';
  }
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& out_dir) {
  const auto problem = build_problem(config.problem, config.oracle);
  const std::size_t n_alg = config.algorithms.size();
  const auto n_trials = static_cast<std::size_t>(config.n_trials);

  // Fail on bad algorithm settings before spending time on trials.
  for (const auto& a : config.algorithms) resolve_parameters(*problem, a);

  ExperimentResult result;
  result.records.assign(n_alg, std::vector<RunRecord>(n_trials));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= n_alg * n_trials) return;
      const std::size_t a = task / n_trials;
      const std::size_t t = task % n_trials;
      try {
        result.records[a][t] = run_algorithm(*problem, config.oracle, config.algorithms[a],
                                             config.base_seed + t);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = n_alg * n_trials;
      }
    }
  };
  const int threads = std::max(1, std::min<int>(config.parallel, static_cast<int>(n_alg * n_trials)));
  std::vector<std::thread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);

  for (const auto& recs : result.records) result.summaries.push_back(summarize(recs));
  const TrialSummary* ref = nullptr;
  for (const auto& s : result.summaries) {
    if (s.label == config.reference) ref = &s;
  }
  if (!ref) {
    for (const auto& s : result.summaries) {
      if (to_string(s.config.name) == config.reference) ref = &s;
    }
  }
  for (auto& s : result.summaries) {
    if (s.diverged > 0) {
      fmt::print(stderr, "warning: {} had {} diverged trial(s), excluded from means\n", s.label,
                 s.diverged);
    }
    if (ref) s.transient_crossing = estimate_transient_crossing(s, *ref, config.tau);
  }

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    for (std::size_t a = 0; a < n_alg; ++a) {
      const auto& label = result.summaries[a].label;
      fs::create_directories(fs::path(out_dir) / label);
      for (const auto& rec : result.records[a]) {
        std::ofstream f(fs::path(out_dir) / label / fmt::format("trial_{}.csv", rec.seed));
        write_trial_csv(f, rec);
      }
      std::ofstream agg(fs::path(out_dir) / (label + "_aggregate.csv"));
      write_aggregate_csv(agg, result.summaries[a]);
    }
    std::ofstream js(fs::path(out_dir) / "summary.json");
    js << summary_json(config, result) << '\n';
  }
  return result;
}

std::string summary_json(const ExperimentConfig& config, const ExperimentResult& result) {
  using nlohmann::json;
  json j;
  j["config"] = {{"source", config.source},
                 {"problem", config.problem.name},
                 {"problem_seed", config.problem.seed},
                 {"oracle", to_string(config.oracle.kind)},
                 {"n_trials", config.n_trials},
                 {"base_seed", config.base_seed},
                 {"tau", config.tau},
                 {"reference", config.reference}};
  json algos = json::array();
  for (const auto& s : result.summaries) {
    json a;
    a["label"] = s.label;
    a["name"] = to_string(s.config.name);
    a["budget_T"] = s.config.budget_T;
    a["params"] = {{"gamma0", s.params.gamma0},
                   {"R", s.params.R},
                   {"K", s.params.K},
                   {"discarded_rounds", s.params.discarded_rounds},
                   {"delta", s.params.delta},
                   {"theta", s.params.theta},
                   {"worker_compressor", std::string(to_string(s.params.worker_compressor.kind))},
                   {"server_compressor", std::string(to_string(s.params.server_compressor.kind))}};
    a["trials"] = s.trials;
    a["diverged_trials"] = s.diverged;
    a["final_grad_norm_sq"] = {{"mean", s.final_grad_norm_sq_mean}, {"std", s.final_grad_norm_sq_std}};
    a["final_f"] = {{"mean", s.final_f_mean}, {"std", s.final_f_std}};
    a["transient_crossing"] = s.transient_crossing ? json(*s.transient_crossing) : json(nullptr);
    a["wall_seconds_mean"] = s.wall_seconds_mean;
    algos.push_back(std::move(a));
  }
  j["algorithms"] = std::move(algos);
  return j.dump(2);
}

std::vector<std::vector<HardInstanceResult>> run_hard_instance_experiment(
    const ExperimentConfig& config) {
  if (!config.adversary) throw Error("config: [adversary] is required for hard-instance runs");
  if (config.problem.name != "zero_chain") throw Error("config: hard instances need zero_chain");
  const ZeroChainProblem problem(config.problem.zero_chain);
  const auto& adv = *config.adversary;
  for (const auto& a : config.algorithms) hard_instance_oracle(problem, adv.kind, adv.p, a);
  const std::size_t n_alg = config.algorithms.size();
  const auto n_trials = static_cast<std::size_t>(config.n_trials);
  std::vector<std::vector<HardInstanceResult>> out(n_alg, std::vector<HardInstanceResult>(n_trials));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= n_alg * n_trials) return;
      const std::size_t a = task / n_trials;
      const std::size_t t = task % n_trials;
      try {
        out[a][t] = run_hard_instance_trial(problem, adv.kind, adv.p, config.algorithms[a],
                                            config.base_seed + t);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = n_alg * n_trials;
      }
    }
  };
  const int threads = std::max(1, std::min<int>(config.parallel, static_cast<int>(n_alg * n_trials)));
  std::vector<std::thread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

std::string hard_instance_json(const ExperimentConfig& config,
                               const std::vector<std::vector<HardInstanceResult>>& results) {
  using nlohmann::json;
  json j;
  const auto& z = config.problem.zero_chain;
  j["instance"] = {{"d", z.d},
                   {"n", z.n},
                   {"lambda", z.lambda},
                   {"L", z.L},
                   {"adversary", to_string(config.adversary->kind)},
                   {"p", config.adversary->p}};
  json algos = json::array();
  for (std::size_t a = 0; a < results.size(); ++a) {
    json trials = json::array();
    for (const auto& r : results[a]) {
      trials.push_back({{"seed", r.seed},
                        {"prog_span", r.prog_span},
                        {"prog_x_hat", r.prog_x_hat},
                        {"bound", r.bound},
                        {"bound_holds", r.bound_holds},
                        {"grad_norm_x_hat", r.grad_norm_x_hat},
                        {"chain_grad_inf_x_hat", r.chain_grad_inf_x_hat},
                        {"below_d", r.below_d},
                        {"floor_holds", r.floor_holds}});
    }
    algos.push_back({{"label", config.algorithms[a].display_name()}, {"trials", std::move(trials)}});
  }
  j["algorithms"] = std::move(algos);
  return j.dump(2);
}

}  // namespace compresim
