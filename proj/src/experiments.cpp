#include "pricing/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

namespace pricing {
namespace {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t stream_id(std::string_view tag, std::size_t n, double shift, std::size_t rep) {
  std::uint64_t shift_bits = 0;
  std::memcpy(&shift_bits, &shift, sizeof shift);
  std::uint64_t h = fnv1a(tag);
  for (std::uint64_t v : {static_cast<std::uint64_t>(n), shift_bits,
                          static_cast<std::uint64_t>(rep)}) {
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(&v), sizeof v), h);
  }
  return h;
}

template <typename T>
T get_checked(const nlohmann::json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("config key '") + key + "': " + e.what());
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

Environment environment_for(const ExperimentConfig& cfg, double shift, Rng& rng) {
  GenConfig gen;
  gen.d = cfg.d;
  gen.ladder = cfg.ladder;
  gen.lambda = cfg.lambda;
  gen.variant = cfg.variant;
  gen.logit_shift = shift;
  Environment env = make_environment(gen, rng);
  if (cfg.unit_cost != 0.0) {
    return Environment(env.demand().spec(), PriceLadder(cfg.ladder, cfg.unit_cost),
                       cfg.lambda);
  }
  return env;
}

std::unique_ptr<DemandModel> refit_tlearner(const Dataset& d) {
  return std::make_unique<TLearnerDemand>(fit_tlearner(d));
}

}  // namespace

ExperimentConfig parse_experiment_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw DomainError("config must be a JSON object");
  static const std::set<std::string> known = {
      "experiment", "n",        "n_grid",    "d",          "ladder",         "unit_cost",
      "lambda",     "alpha_grid", "shift",   "reps",       "learn_reps",     "seed",
      "estimators", "train",    "cv_folds",  "variant",    "n_target_train", "test_size"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw DomainError("unknown config key '" + key + "'");
  }
  ExperimentConfig cfg;
  if (doc.contains("experiment")) cfg.experiment = get_checked<std::string>(doc, "experiment");
  if (doc.contains("n") && doc.contains("n_grid")) {
    throw DomainError("give either 'n' or 'n_grid', not both");
  }
  if (doc.contains("n")) cfg.n_grid = {get_checked<std::size_t>(doc, "n")};
  if (doc.contains("n_grid")) cfg.n_grid = get_checked<std::vector<std::size_t>>(doc, "n_grid");
  if (doc.contains("d")) cfg.d = get_checked<std::size_t>(doc, "d");
  if (doc.contains("ladder")) cfg.ladder = get_checked<Vec>(doc, "ladder");
  if (doc.contains("unit_cost")) cfg.unit_cost = get_checked<double>(doc, "unit_cost");
  if (doc.contains("lambda")) cfg.lambda = get_checked<double>(doc, "lambda");
  if (doc.contains("alpha_grid")) cfg.alpha_grid = get_checked<Vec>(doc, "alpha_grid");
  if (doc.contains("shift")) {
    cfg.shifts = doc.at("shift").is_array() ? get_checked<Vec>(doc, "shift")
                                            : Vec{get_checked<double>(doc, "shift")};
  }
  if (doc.contains("reps")) cfg.reps = get_checked<std::size_t>(doc, "reps");
  if (doc.contains("learn_reps")) cfg.learn_reps = get_checked<std::size_t>(doc, "learn_reps");
  if (doc.contains("seed")) cfg.seed = get_checked<std::uint64_t>(doc, "seed");
  if (doc.contains("estimators")) {
    cfg.estimators.clear();
    for (const auto& name : get_checked<std::vector<std::string>>(doc, "estimators")) {
      cfg.estimators.push_back(parse_estimator_kind(name));
    }
  }
  if (doc.contains("train")) {
    const auto& t = doc.at("train");
    if (!t.is_object()) throw DomainError("config key 'train' must be an object");
    for (const auto& [key, value] : t.items()) {
      if (key != "lr" && key != "iters") throw DomainError("unknown train key '" + key + "'");
    }
    if (t.contains("lr")) cfg.train.learning_rate = get_checked<double>(t, "lr");
    if (t.contains("iters")) cfg.train.max_iters = get_checked<std::size_t>(t, "iters");
  }
  if (doc.contains("cv_folds")) cfg.cv_folds = get_checked<std::size_t>(doc, "cv_folds");
  if (doc.contains("variant")) {
    cfg.variant = parse_surface_variant(get_checked<std::string>(doc, "variant"));
  }
  if (doc.contains("n_target_train")) {
    cfg.n_target_train = get_checked<std::size_t>(doc, "n_target_train");
  }
  if (doc.contains("test_size")) cfg.test_size = get_checked<std::size_t>(doc, "test_size");

  PriceLadder(cfg.ladder, cfg.unit_cost);  // validates
  if (cfg.n_grid.empty()) throw DomainError("n_grid is empty");
  for (std::size_t n : cfg.n_grid) {
    if (n == 0) throw DomainError("sample sizes must be positive");
  }
  for (double a : cfg.alpha_grid) {
    if (!(a >= 0.0 && a <= 1.0)) throw DomainError("alpha values must lie in [0, 1]");
  }
  if (cfg.shifts.empty()) throw DomainError("shift list is empty");
  if (cfg.estimators.empty()) throw DomainError("no estimators requested");
  if (!(cfg.train.learning_rate > 0.0)) throw DomainError("train.lr must be positive");
  if (cfg.cv_folds < 2) throw DomainError("cv_folds must be at least 2");
  if (cfg.n_target_train == 0) throw DomainError("n_target_train must be positive");
  return cfg;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json doc;
  doc["experiment"] = cfg.experiment;
  doc["n_grid"] = cfg.n_grid;
  doc["d"] = cfg.d;
  doc["ladder"] = cfg.ladder;
  doc["unit_cost"] = cfg.unit_cost;
  doc["lambda"] = cfg.lambda;
  doc["alpha_grid"] = cfg.alpha_grid;
  doc["shift"] = cfg.shifts;
  doc["reps"] = cfg.reps;
  doc["learn_reps"] = cfg.learn_reps;
  doc["seed"] = cfg.seed;
  doc["estimators"] = nlohmann::json::array();
  for (EstimatorKind k : cfg.estimators) doc["estimators"].push_back(std::string(to_string(k)));
  doc["train"] = {{"lr", cfg.train.learning_rate}, {"iters", cfg.train.max_iters}};
  doc["cv_folds"] = cfg.cv_folds;
  doc["variant"] = std::string(to_string(cfg.variant));
  doc["n_target_train"] = cfg.n_target_train;
  doc["test_size"] = cfg.test_size;
  return doc;
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(to_json(cfg).dump())));
  return buf;
}

EvalRepOutcome run_eval_rep(const ExperimentConfig& cfg, std::size_t n, double shift,
                            std::size_t rep) {
  Rng rng = stream_rng(cfg.seed, stream_id("eval", n, shift, rep));
  const Environment env = environment_for(cfg, shift, rng);
  const Dataset train = env.sample(cfg.n_target_train, rng);
  const auto target_demand = std::make_shared<const TLearnerDemand>(fit_tlearner(train));
  const PolicyFn target = target_policy_for_evaluation(target_demand, env.ladder());
  const Dataset obs = env.sample(n, rng);
  const PolicyTable table = tabulate_policy(obs, target);

  EvalRepOutcome out;
  out.truth = true_policy_value(obs, table);

  auto truth_model = std::make_shared<const SyntheticDemand>(env.demand());
  std::vector<std::optional<double>> alphas;
  if (cfg.alpha_grid.empty()) {
    alphas.push_back(std::nullopt);
  } else {
    for (double a : cfg.alpha_grid) alphas.push_back(a);
  }
  std::optional<TLearnerDemand> fitted;
  for (const auto& alpha : alphas) {
    std::unique_ptr<DemandModel> blended;
    const DemandModel* demand = nullptr;
    DemandFitter refit;
    if (alpha) {
      blended = std::make_unique<BlendedDemand>(truth_model, *alpha);
      demand = blended.get();
    } else {
      if (!fitted) fitted = fit_tlearner(obs);
      demand = &*fitted;
      refit = refit_tlearner;
    }
    std::vector<double> est;
    std::optional<double> c_used;
    for (EstimatorKind kind : cfg.estimators) {
      EstimatorSpec spec{kind, std::nullopt, cfg.cv_folds};
      const PolicyValueEstimate e = estimate_policy_value(obs, table, spec, demand, refit);
      est.push_back(e.loss);
      if (e.c) c_used = e.c;
    }
    out.estimate.push_back(std::move(est));
    out.c.push_back(c_used);
  }
  return out;
}

LearnRepOutcome run_learn_rep(const ExperimentConfig& cfg, std::size_t n, double shift,
                              std::size_t rep) {
  Rng rng = stream_rng(cfg.seed, stream_id("learn", n, shift, rep));
  const Environment env = environment_for(cfg, shift, rng);
  const Dataset obs = env.sample(n, rng);
  const std::vector<Vec> test_x = env.sample_features(cfg.test_size, rng);

  std::optional<TLearnerDemand> fitted;
  LearnRepOutcome out;
  for (EstimatorKind kind : cfg.estimators) {
    if (needs_demand(kind) && !fitted) fitted = fit_tlearner(obs);
    const EstimatorSpec spec{kind, std::nullopt, cfg.cv_folds};
    const LearnedPolicy learned =
        optimize_policy(obs, spec, fitted ? &*fitted : nullptr, cfg.train);
    out.test_reward.push_back(env.expected_revenue(learned.train.policy.as_fn(), test_x));
    out.c.push_back(learned.c);
    out.descent_violations.push_back(learned.train.descent_violations);
  }
  return out;
}

std::string results_header() {
  return "experiment,method,n,alpha,shift,rep,metric,value,stderr,seed,config_hash";
}

std::string format_row(const ResultRow& r) {
  std::string s = r.experiment + "," + r.method + "," + std::to_string(r.n) + ",";
  s += r.alpha ? fmt(*r.alpha) : std::string("fitted");
  s += "," + fmt(r.shift) + ",";
  s += r.rep ? std::to_string(*r.rep) : std::string("all");
  s += "," + r.metric + "," + fmt(r.value) + ",";
  if (r.stderr_value) s += fmt(*r.stderr_value);
  s += "," + std::to_string(r.seed) + "," + r.config_hash;
  return s;
}

void write_results(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << results_header() << '\n';
  for (const auto& r : rows) out << format_row(r) << '\n';
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_value = std::sqrt(ss / static_cast<double>(values.size() - 1) /
                               static_cast<double>(values.size()));
  }
  return s;
}

std::vector<ResultRow> aggregate(const std::vector<ResultRow>& per_rep) {
  // Key on everything except rep/value so aggregation ignores row order.
  using Key = std::tuple<std::string, std::string, std::size_t, double, bool, double,
                         std::string>;
  std::map<Key, std::pair<const ResultRow*, Vec>> groups;
  for (const auto& r : per_rep) {
    if (!r.rep) continue;
    Key k{r.experiment, r.method, r.n, r.alpha.value_or(-1.0), r.alpha.has_value(), r.shift,
          r.metric};
    auto& g = groups[k];
    if (!g.first) g.first = &r;
    g.second.push_back(r.value);
  }
  std::vector<ResultRow> out;
  for (auto& [key, group] : groups) {
    const Summary s = summarize(group.second);
    ResultRow mean = *group.first;
    mean.rep.reset();
    mean.value = s.mean;
    mean.stderr_value = s.stderr_value;
    out.push_back(mean);
    ResultRow count = mean;
    count.metric = mean.metric + "_reps";
    count.value = static_cast<double>(s.count);
    count.stderr_value.reset();
    out.push_back(count);
  }
  return out;
}

namespace {

std::vector<ResultRow> eval_rows(const ExperimentConfig& cfg, const std::string& experiment,
                                 std::size_t n, double shift, std::size_t reps,
                                 const std::string& hash) {
  std::vector<ResultRow> rows;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const EvalRepOutcome o = run_eval_rep(cfg, n, shift, rep);
    for (std::size_t a = 0; a < o.estimate.size(); ++a) {
      std::optional<double> alpha;
      if (!cfg.alpha_grid.empty()) alpha = cfg.alpha_grid[a];
      for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
        const double err = o.estimate[a][e] - o.truth;
        rows.push_back({experiment, std::string(to_string(cfg.estimators[e])), n, alpha, shift,
                        rep, "sq_error", err * err, std::nullopt, cfg.seed, hash});
      }
      if (o.c[a]) {
        rows.push_back({experiment, "CMix", n, alpha, shift, rep, "c", *o.c[a], std::nullopt,
                        cfg.seed, hash});
      }
    }
  }
  return rows;
}

std::vector<ResultRow> learn_rows(const ExperimentConfig& cfg, const std::string& experiment,
                                  std::size_t n, double shift, std::size_t reps,
                                  const std::string& hash) {
  std::vector<ResultRow> rows;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const LearnRepOutcome o = run_learn_rep(cfg, n, shift, rep);
    for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
      const std::string method(to_string(cfg.estimators[e]));
      rows.push_back({experiment, method, n, std::nullopt, shift, rep, "test_reward",
                      o.test_reward[e], std::nullopt, cfg.seed, hash});
      if (o.c[e]) {
        rows.push_back({experiment, method, n, std::nullopt, shift, rep, "c", *o.c[e],
                        std::nullopt, cfg.seed, hash});
      }
    }
  }
  return rows;
}

std::vector<ResultRow> with_aggregates(std::vector<ResultRow> rows) {
  std::vector<ResultRow> agg = aggregate(rows);
  rows.insert(rows.end(), agg.begin(), agg.end());
  return rows;
}

}  // namespace

std::vector<ResultRow> eval_sweep(const ExperimentConfig& cfg) {
  const std::string hash = config_hash(cfg);
  std::vector<ResultRow> rows;
  for (double shift : cfg.shifts) {
    for (std::size_t n : cfg.n_grid) {
      auto part = eval_rows(cfg, "eval-sweep", n, shift, cfg.reps, hash);
      rows.insert(rows.end(), part.begin(), part.end());
    }
  }
  return with_aggregates(std::move(rows));
}

std::vector<ResultRow> learn_sweep(const ExperimentConfig& cfg) {
  const std::string hash = config_hash(cfg);
  std::vector<ResultRow> rows;
  for (double shift : cfg.shifts) {
    for (std::size_t n : cfg.n_grid) {
      auto part = learn_rows(cfg, "learn-sweep", n, shift, cfg.reps, hash);
      rows.insert(rows.end(), part.begin(), part.end());
    }
  }
  return with_aggregates(std::move(rows));
}

std::vector<ResultRow> sales_regime(const ExperimentConfig& cfg) {
  const std::string hash = config_hash(cfg);
  std::vector<ResultRow> rows;
  for (double shift : cfg.shifts) {
    for (std::size_t n : cfg.n_grid) {
      auto ev = eval_rows(cfg, "sales-regime-eval", n, shift, cfg.reps, hash);
      rows.insert(rows.end(), ev.begin(), ev.end());
      auto le = learn_rows(cfg, "sales-regime-learn", n, shift, cfg.learn_reps, hash);
      rows.insert(rows.end(), le.begin(), le.end());
    }
  }
  return with_aggregates(std::move(rows));
}

}  // namespace pricing
