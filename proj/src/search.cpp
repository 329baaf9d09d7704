#include "sgap/search.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <unordered_set>

#include "sgap/errors.hpp"

namespace sgap {

Eigen::VectorXd encode(const ArchitectureConfig& arch) {
  if (!is_canonical(arch)) throw ValidationError("cannot encode non-canonical config " + to_string(arch));
  Eigen::VectorXd e = Eigen::VectorXd::Zero(kEncodingSize);
  e[0] = arch.k_pre / 10.0;
  if (arch.ga_pre) e[1 + static_cast<Eigen::Index>(space::graph_aggregator_index(*arch.ga_pre))] = 1.0;
  e[6 + static_cast<Eigen::Index>(space::message_aggregator_index(arch.ma))] = 1.0;
  e[12] = (arch.k_trans - 1) / 9.0;
  e[13] = arch.k_post / 10.0;
  if (arch.ga_post) e[14 + static_cast<Eigen::Index>(space::graph_aggregator_index(*arch.ga_post))] = 1.0;
  return e;
}

std::vector<Objectives> normalize_objectives(std::span<const Observation> history) {
  std::vector<Objectives> out(history.size());
  for (std::size_t j = 0; j < 2; ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Observation& o : history) {
      lo = std::min(lo, o.objectives[j]);
      hi = std::max(hi, o.objectives[j]);
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
      out[i][j] = hi > lo ? (history[i].objectives[j] - lo) / (hi - lo) : 0.0;
    }
  }
  return out;
}

namespace {

// Up to `count` distinct unseen design-space indices, uniformly at random.
std::vector<std::size_t> sample_unseen(const std::unordered_set<std::size_t>& seen, std::size_t count, Rng& rng) {
  const std::size_t unseen = space::kCanonicalSize - seen.size();
  if (unseen == 0) throw ExhaustedError("every design-space config has been evaluated");
  count = std::min(count, unseen);
  std::vector<std::size_t> out;
  out.reserve(count);
  if (unseen < 4 * count || unseen * 4 < space::kCanonicalSize) {
    std::vector<std::size_t> pool;
    pool.reserve(unseen);
    for (std::size_t i = 0; i < space::kCanonicalSize; ++i) {
      if (!seen.contains(i)) pool.push_back(i);
    }
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
      out.push_back(pool[i]);
    }
    return out;
  }
  std::uniform_int_distribution<std::size_t> pick(0, space::kCanonicalSize - 1);
  std::unordered_set<std::size_t> taken;
  while (out.size() < count) {
    const std::size_t i = pick(rng);
    if (seen.contains(i) || !taken.insert(i).second) continue;
    out.push_back(i);
  }
  return out;
}

}  // namespace

Suggestion suggest_detailed(std::span<const Observation> history, Rng& rng, const SuggestOptions& options) {
  std::unordered_set<std::size_t> seen;
  for (const Observation& o : history) seen.insert(index_of(canonicalize(o.config)));

  Suggestion s;
  if (history.size() < std::max<std::size_t>(options.init, 2)) {
    s.config = config_at(sample_unseen(seen, 1, rng).front());
    return s;
  }
  s.random = false;
  const std::vector<std::size_t> picks = sample_unseen(seen, std::max<std::size_t>(options.n_candidates, 1), rng);
  for (std::size_t i : picks) s.candidates.push_back(config_at(i));
  if (s.candidates.size() == 1) {
    s.config = s.candidates.front();
    s.scores.assign(1, 0.0);
    return s;
  }

  const std::vector<Objectives> normalized = normalize_objectives(history);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(history.size()), static_cast<Eigen::Index>(kEncodingSize));
  Eigen::VectorXd y_error(x.rows()), y_cost(x.rows());
  ParetoFront front;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    x.row(r) = encode(canonicalize(history[i].config)).transpose();
    y_error[r] = normalized[i][0];
    y_cost[r] = normalized[i][1];
    Observation o = history[i];
    o.objectives = normalized[i];
    front.insert(o);
  }
  const GPSurrogate gp_error = GPSurrogate::fit(x, y_error);
  const GPSurrogate gp_cost = GPSurrogate::fit(x, y_cost);
  const std::vector<Objectives> front_points = front.points();

  s.scores.reserve(s.candidates.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < s.candidates.size(); ++i) {
    s.scores.push_back(ehvi(gp_error, gp_cost, front_points, options.ref, encode(s.candidates[i])));
    if (s.scores[i] > s.scores[best]) best = i;
  }
  s.config = s.candidates[best];
  return s;
}

ArchitectureConfig suggest(std::span<const Observation> history, Rng& rng, const SuggestOptions& options) {
  return suggest_detailed(history, rng, options).config;
}

SearchResult search(const Evaluator& evaluate, const SearchOptions& options) {
  SearchResult result;
  Rng rng(options.seed);
  result.history.reserve(options.budget);
  for (std::size_t it = 0; it < options.budget; ++it) {
    Observation obs;
    obs.config = suggest(result.history, rng, options.suggest);
    const auto start = std::chrono::steady_clock::now();
    try {
      const Evaluation e = evaluate(obs.config);
      obs.objectives = e.objectives;
      obs.test_accuracy = e.test_accuracy;
      obs.inference_cost = e.inference_cost;
      if (!std::isfinite(obs.objectives[0]) || !std::isfinite(obs.objectives[1])) {
        throw NumericalError("non-finite objectives");
      }
    } catch (const std::exception&) {
      obs.objectives = {1.0, 1.0};
      obs.failed = true;
    }
    obs.eval_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(obs);
    result.front.insert(obs);
    const std::vector<Objectives> points = result.front.points();
    result.hv_trace.push_back(hypervolume(points, options.suggest.ref));
  }
  return result;
}

Evaluation synthetic_benchmark(const ArchitectureConfig& arch) {
  static const Eigen::VectorXd target = encode(preset("pasca-v3").arch);
  static const CostModelSizes sizes{2708, 13264, 1433, 7, 64};
  static const CostRange range = design_space_cost_range(sizes);
  const ArchitectureConfig c = canonicalize(arch);
  Evaluation e;
  const double d2 = (encode(c) - target).squaredNorm();
  e.objectives[0] = 0.05 + 0.9 * std::min(d2 / 9.0, 1.0);
  e.inference_cost = inference_cost(c, sizes);
  e.objectives[1] = range.normalize(e.inference_cost);
  e.test_accuracy = 1.0 - e.objectives[0];
  return e;
}

}  // namespace sgap
