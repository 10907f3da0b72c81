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

#include "compresim/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <toml.hpp>

namespace compresim {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error("config: " + field + " " + what);
}

void check_keys(const toml::table& t, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& [key, node] : t) {
    if (!allowed.count(std::string(key.str()))) fail(where + "." + std::string(key.str()), "is not a known field");
  }
}

std::optional<std::int64_t> get_int(const toml::table& t, const std::string& where,
                                    const std::string& key) {
  const toml::node* n = t.get(key);
  if (!n) return std::nullopt;
  if (const auto* v = n->as_integer()) return v->get();
  fail(where + "." + key, "must be an integer");
}

std::optional<double> get_real(const toml::table& t, const std::string& where,
                               const std::string& key) {
  const toml::node* n = t.get(key);
  if (!n) return std::nullopt;
  if (const auto* v = n->as_floating_point()) return v->get();
  if (const auto* v = n->as_integer()) return static_cast<double>(v->get());
  fail(where + "." + key, "must be a number");
}

std::optional<std::string> get_string(const toml::table& t, const std::string& where,
                                      const std::string& key) {
  const toml::node* n = t.get(key);
  if (!n) return std::nullopt;
  if (const auto* v = n->as_string()) return v->get();
  fail(where + "." + key, "must be a string");
}

const toml::table* get_table(const toml::table& t, const std::string& where, const std::string& key) {
  const toml::node* n = t.get(key);
  if (!n) return nullptr;
  if (const auto* v = n->as_table()) return v;
  fail(where + "." + key, "must be a table");
}

int positive_int(std::int64_t v, const std::string& field) {
  if (v < 1 || v > std::numeric_limits<int>::max()) fail(field, "must be a positive integer");
  return static_cast<int>(v);
}

double positive_real(double v, const std::string& field) {
  if (!(v > 0.0) || !std::isfinite(v)) fail(field, "must be positive");
  return v;
}

template <typename F>
auto wrap(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    fail(field, std::string("is invalid: ") + e.what());
  }
}

CompressorSpec parse_compressor(const toml::table& t, const std::string& where) {
  check_keys(t, where, {"kind", "k", "levels", "randomness_mode"});
  const auto kind = get_string(t, where, "kind");
  if (!kind) fail(where + ".kind", "is required");
  CompressorSpec s;
  s.kind = wrap(where + ".kind", [&] { return parse_compressor_kind(*kind); });
  if (s.kind == CompressorKind::scaled_wrapper) {
    fail(where + ".kind", "cannot name the wrapper directly; algorithms wrap unbiased kinds");
  }
  if (auto k = get_int(t, where, "k")) s.k = positive_int(*k, where + ".k");
  if (auto l = get_int(t, where, "levels")) s.levels = positive_int(*l, where + ".levels");
  if (auto m = get_string(t, where, "randomness_mode")) {
    s.mode = wrap(where + ".randomness_mode", [&] { return parse_randomness_mode(*m); });
    const bool rand_kind = s.kind == CompressorKind::rand_k || s.kind == CompressorKind::rand_k_scaled;
    if (s.mode == RandomnessMode::shared_broadcast && !rand_kind) {
      fail(where + ".randomness_mode", "shared_broadcast is only offered for rand_k kinds");
    }
  }
  return s;
}

GammaConfig parse_gamma(const toml::node& n, const std::string& where) {
  GammaConfig g;
  if (n.is_number()) {
    g.mode = GammaConfig::Mode::manual;
    g.value = positive_real(n.value<double>().value(), where);
    return g;
  }
  const auto* t = n.as_table();
  if (!t) fail(where, "must be a number or a table");
  check_keys(*t, where, {"mode", "value", "decay_every", "decay_factor"});
  const std::string mode = get_string(*t, where, "mode").value_or("manual");
  if (mode == "auto" || mode == "auto_theory") {
    g.mode = GammaConfig::Mode::auto_theory;
  } else if (mode == "manual") {
    g.mode = GammaConfig::Mode::manual;
    const auto v = get_real(*t, where, "value");
    if (!v) fail(where + ".value", "is required when mode = \"manual\"");
    g.value = positive_real(*v, where + ".value");
  } else {
    fail(where + ".mode", "must be \"auto\" or \"manual\"");
  }
  if (auto e = get_int(*t, where, "decay_every")) {
    if (*e < 0) fail(where + ".decay_every", "must be >= 0");
    g.decay_every = static_cast<long>(*e);
  }
  if (auto f = get_real(*t, where, "decay_factor")) g.decay_factor = positive_real(*f, where + ".decay_factor");
  return g;
}

RConfig parse_R(const toml::node& n, const std::string& where) {
  RConfig r;
  if (const auto* v = n.as_integer()) {
    r.value = positive_int(v->get(), where);
    return r;
  }
  const auto* t = n.as_table();
  if (!t) fail(where, "must be an integer or a table");
  check_keys(*t, where, {"mode", "value"});
  const std::string mode = get_string(*t, where, "mode").value_or("manual");
  if (mode == "auto" || mode == "auto_theory") {
    r.mode = RConfig::Mode::auto_theory;
  } else if (mode == "manual") {
    const auto v = get_int(*t, where, "value");
    if (!v) fail(where + ".value", "is required when mode = \"manual\"");
    r.value = positive_int(*v, where + ".value");
  } else {
    fail(where + ".mode", "must be \"auto\" or \"manual\"");
  }
  return r;
}

AlgorithmConfig parse_algorithm(const toml::table& t, const std::string& where,
                                const AlgorithmConfig& defaults) {
  check_keys(t, where, {"name", "label", "gamma", "R", "worker", "server", "T", "log_every"});
  AlgorithmConfig a = defaults;
  const auto name = get_string(t, where, "name");
  if (!name) fail(where + ".name", "is required");
  a.name = wrap(where + ".name", [&] { return parse_algorithm_name(*name); });
  a.label = get_string(t, where, "label").value_or(*name);
  if (const auto* g = t.get("gamma")) a.gamma = parse_gamma(*g, where + ".gamma");
  if (const auto* r = t.get("R")) a.R = parse_R(*r, where + ".R");
  if (const auto* w = get_table(t, where, "worker")) a.worker_compressor = parse_compressor(*w, where + ".worker");
  if (const auto* s = get_table(t, where, "server")) a.server_compressor = parse_compressor(*s, where + ".server");
  if (auto T = get_int(t, where, "T")) a.budget_T = positive_int(*T, where + ".T");
  if (auto le = get_int(t, where, "log_every")) a.log_every = positive_int(*le, where + ".log_every");
  if (a.name == AlgorithmName::psgd && !t.get("worker")) {
    a.worker_compressor = CompressorSpec::identity();
  }
  if (a.name != AlgorithmName::neolithic && a.name != AlgorithmName::double_squeeze &&
      !t.get("server")) {
    a.server_compressor = CompressorSpec::identity();
  }
  return a;
}

ProblemConfig parse_problem(const toml::table& t) {
  const std::string w = "[problem]";
  check_keys(t, w, {"name", "seed", "d", "n", "M", "noise_variance", "lambda", "assignment", "L", "Delta"});
  ProblemConfig p;
  p.name = get_string(t, w, "name").value_or("least_squares");
  if (auto s = get_int(t, w, "seed")) {
    if (*s < 0) fail(w + ".seed", "must be >= 0");
    p.seed = static_cast<std::uint64_t>(*s);
  }
  const auto d = get_int(t, w, "d");
  const auto n = get_int(t, w, "n");
  const auto M = get_int(t, w, "M");
  if (p.name == "least_squares") {
    check_keys(t, w, {"name", "seed", "d", "n", "M", "noise_variance"});
    if (d) p.least_squares.d = positive_int(*d, w + ".d");
    if (n) p.least_squares.n = positive_int(*n, w + ".n");
    if (M) p.least_squares.M = positive_int(*M, w + ".M");
    if (auto nv = get_real(t, w, "noise_variance")) {
      if (*nv < 0.0) fail(w + ".noise_variance", "must be >= 0");
      p.least_squares.noise_variance = *nv;
    }
  } else if (p.name == "logistic") {
    check_keys(t, w, {"name", "seed", "d", "n", "M"});
    if (d) p.logistic.d = positive_int(*d, w + ".d");
    if (n) p.logistic.n = positive_int(*n, w + ".n");
    if (M) p.logistic.M = positive_int(*M, w + ".M");
  } else if (p.name == "zero_chain") {
    check_keys(t, w, {"name", "seed", "d", "n", "lambda", "assignment", "L", "Delta"});
    auto& z = p.zero_chain;
    if (d) z.d = positive_int(*d, w + ".d");
    if (n) z.n = positive_int(*n, w + ".n");
    if (auto l = get_real(t, w, "lambda")) z.lambda = positive_real(*l, w + ".lambda");
    if (auto L = get_real(t, w, "L")) z.L = positive_real(*L, w + ".L");
    if (auto D = get_real(t, w, "Delta")) z.Delta = positive_real(*D, w + ".Delta");
    if (auto a = get_string(t, w, "assignment")) {
      z.assignment = wrap(w + ".assignment", [&] { return parse_chain_assignment(*a); });
    }
  } else {
    fail(w + ".name", "must be least_squares, logistic or zero_chain");
  }
  return p;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config: parse error at line " << e.source().begin.line << ": " << e.description();
    throw Error(os.str());
  }
  check_keys(root, "config", {"problem", "oracle", "algorithm", "compressors", "budget",
                              "cost_model", "adversary", "transient"});
  ExperimentConfig cfg;
  cfg.source = std::string(text);

  if (const auto* p = get_table(root, "config", "problem")) cfg.problem = parse_problem(*p);
  const bool chain = cfg.problem.name == "zero_chain";
  cfg.oracle = chain ? OracleSpec::exact() : OracleSpec::minibatch(1);
  if (const auto* o = get_table(root, "config", "oracle")) {
    const std::string w = "[oracle]";
    check_keys(*o, w, {"kind", "batch", "p"});
    if (auto k = get_string(*o, w, "kind")) cfg.oracle.kind = wrap(w + ".kind", [&] { return parse_oracle_kind(*k); });
    if (auto b = get_int(*o, w, "batch")) cfg.oracle.batch = positive_int(*b, w + ".batch");
    if (auto p = get_real(*o, w, "p")) {
      if (!(*p > 0.0 && *p <= 1.0)) fail(w + ".p", "must lie in (0, 1]");
      cfg.oracle.p = *p;
    }
  }
  if (const auto* a = get_table(root, "config", "adversary")) {
    const std::string w = "[adversary]";
    check_keys(*a, w, {"kind", "p"});
    AdversaryConfig adv;
    const auto k = get_string(*a, w, "kind");
    if (!k) fail(w + ".kind", "is required");
    adv.kind = wrap(w + ".kind", [&] { return parse_adversary_kind(*k); });
    if (auto p = get_real(*a, w, "p")) {
      if (!(*p > 0.0 && *p <= 1.0)) fail(w + ".p", "must lie in (0, 1]");
      adv.p = *p;
    }
    if (!chain) fail(w, "requires [problem].name = \"zero_chain\"");
    cfg.adversary = adv;
  }

  AlgorithmConfig defaults;
  if (const auto* c = get_table(root, "config", "compressors")) {
    check_keys(*c, "[compressors]", {"worker", "server"});
    if (const auto* w = get_table(*c, "[compressors]", "worker")) {
      defaults.worker_compressor = parse_compressor(*w, "[compressors].worker");
    }
    if (const auto* s = get_table(*c, "[compressors]", "server")) {
      defaults.server_compressor = parse_compressor(*s, "[compressors].server");
    }
  }
  if (const auto* b = get_table(root, "config", "budget")) {
    const std::string w = "[budget]";
    check_keys(*b, w, {"T", "n_trials", "base_seed", "log_every", "parallel"});
    if (auto T = get_int(*b, w, "T")) defaults.budget_T = positive_int(*T, w + ".T");
    if (auto n = get_int(*b, w, "n_trials")) cfg.n_trials = positive_int(*n, w + ".n_trials");
    if (auto s = get_int(*b, w, "base_seed")) {
      if (*s < 0) fail(w + ".base_seed", "must be >= 0");
      cfg.base_seed = static_cast<std::uint64_t>(*s);
    }
    if (auto le = get_int(*b, w, "log_every")) defaults.log_every = positive_int(*le, w + ".log_every");
    if (auto par = get_int(*b, w, "parallel")) cfg.parallel = positive_int(*par, w + ".parallel");
  }
  if (const auto* c = get_table(root, "config", "cost_model")) {
    const std::string w = "[cost_model]";
    check_keys(*c, w, {"value_bits", "index_bits", "norm_bits"});
    if (auto v = get_int(*c, w, "value_bits")) defaults.cost.value_bits = positive_int(*v, w + ".value_bits");
    if (auto v = get_int(*c, w, "index_bits")) defaults.cost.index_bits = positive_int(*v, w + ".index_bits");
    if (auto v = get_int(*c, w, "norm_bits")) defaults.cost.norm_bits = positive_int(*v, w + ".norm_bits");
  }
  if (const auto* t = get_table(root, "config", "transient")) {
    const std::string w = "[transient]";
    check_keys(*t, w, {"tau", "reference"});
    if (auto tau = get_real(*t, w, "tau")) {
      if (*tau < 0.0) fail(w + ".tau", "must be >= 0");
      cfg.tau = *tau;
    }
    if (auto r = get_string(*t, w, "reference")) cfg.reference = *r;
  }

  const toml::node* algos = root.get("algorithm");
  if (!algos) fail("[algorithm]", "is required");
  if (const auto* t = algos->as_table()) {
    cfg.algorithms.push_back(parse_algorithm(*t, "[algorithm]", defaults));
  } else if (const auto* arr = algos->as_array()) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const std::string w = "[[algorithm]] #" + std::to_string(i + 1);
      const auto* t = arr->get(i)->as_table();
      if (!t) fail(w, "must be a table");
      cfg.algorithms.push_back(parse_algorithm(*t, w, defaults));
    }
  } else {
    fail("[algorithm]", "must be a table or an array of tables");
  }
  if (cfg.algorithms.empty()) fail("[algorithm]", "needs at least one entry");
  std::set<std::string> labels;
  for (const auto& a : cfg.algorithms) {
    if (!labels.insert(a.display_name()).second) {
      fail("[algorithm].label", "'" + a.display_name() + "' is used twice");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

std::unique_ptr<Problem> build_problem(const ProblemConfig& cfg, const OracleSpec& oracle) {
  std::unique_ptr<Problem> p;
  if (cfg.name == "least_squares") {
    p = gen_least_squares(cfg.seed, cfg.least_squares);
  } else if (cfg.name == "logistic") {
    p = gen_logistic(cfg.seed, cfg.logistic);
  } else if (cfg.name == "zero_chain") {
    p = gen_zero_chain(cfg.zero_chain);
    if (!p->constants().b2_analytic) {
      RngStream probe(cfg.seed, {StreamKind::probe, 0});
      p->mutable_constants().b2 = estimate_b2(*p, 11, probe);
    }
  } else {
    throw Error("unknown problem '" + cfg.name + "'");
  }
  validate_oracle(*p, oracle);
  // Generators price the one-row oracle; anything else is re-estimated at x0.
  const bool one_row = oracle.kind == OracleKind::minibatch && oracle.batch == 1;
  if (!one_row) {
    RngStream probe(cfg.seed, {StreamKind::probe, 1});
    p->mutable_constants().sigma2 = estimate_sigma2(*p, oracle, 1, probe);
  }
  return p;
}

}  // namespace compresim
