#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sgap/architecture.hpp"
#include "sgap/gp.hpp"
#include "sgap/model.hpp"

namespace sgap {

inline constexpr std::size_t kEncodingSize = 19;

/// Fixed-length numeric encoding of a canonical config; throws ValidationError
/// for non-canonical input.
Eigen::VectorXd encode(const ArchitectureConfig& arch);

/// (val_error, normalized_cost), both minimized.
using Objectives = std::array<double, 2>;

inline constexpr Objectives kDefaultReference{1.1, 1.1};

/// a ≤ b in both objectives and < in at least one.
bool dominates(const Objectives& a, const Objectives& b);

struct Observation {
  ArchitectureConfig config;
  Objectives objectives{1.0, 1.0};
  double eval_seconds = 0.0;
  double test_accuracy = 0.0;
  std::uint64_t inference_cost = 0;
  bool failed = false;
};

class ParetoFront {
 public:
  /// Inserts `obs` unless a member dominates it and evicts members it dominates.
  /// Returns whether `obs` was inserted.
  bool insert(const Observation& obs);

  const std::vector<Observation>& members() const { return members_; }
  std::vector<Objectives> points() const;
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }

 private:
  std::vector<Observation> members_;
};

ParetoFront pareto_update(ParetoFront front, const Observation& obs);

/// Area dominated by `points` and bounded by `ref`. Points beyond the
/// reference are skipped with a warning on stderr; their count goes to
/// `excluded` when given.
double hypervolume(std::span<const Objectives> points, const Objectives& ref = kDefaultReference,
                   std::size_t* excluded = nullptr);

/// Expected hypervolume improvement of an independent Gaussian point
/// N(mean[j], stddev[j]²) over `front`. stddev 0 is the deterministic limit.
double ehvi(const Objectives& mean, const Objectives& stddev, std::span<const Objectives> front,
            const Objectives& ref = kDefaultReference);

double ehvi(const GPSurrogate& gp_error, const GPSurrogate& gp_cost, std::span<const Objectives> front,
            const Objectives& ref, const Eigen::VectorXd& x);

struct SuggestOptions {
  std::size_t n_candidates = 500;
  std::size_t init = 10;
  Objectives ref = kDefaultReference;
};

struct Suggestion {
  ArchitectureConfig config;
  bool random = true;  // drawn during the initial design
  std::vector<ArchitectureConfig> candidates;
  std::vector<double> scores;  // EHVI per candidate
};

Suggestion suggest_detailed(std::span<const Observation> history, Rng& rng, const SuggestOptions& options = {});

/// Next config to evaluate. Throws ExhaustedError once every config has been
/// observed.
ArchitectureConfig suggest(std::span<const Observation> history, Rng& rng, const SuggestOptions& options = {});

/// Min-max normalization of each objective over `history`; constant columns map to 0.
std::vector<Objectives> normalize_objectives(std::span<const Observation> history);

struct Evaluation {
  Objectives objectives{1.0, 1.0};
  double test_accuracy = 0.0;
  std::uint64_t inference_cost = 0;
};

using Evaluator = std::function<Evaluation(const ArchitectureConfig&)>;

struct SearchOptions {
  std::size_t budget = 60;
  std::uint64_t seed = 0;
  SuggestOptions suggest;
};

struct SearchResult {
  ParetoFront front;
  std::vector<Observation> history;
  std::vector<double> hv_trace;  // hypervolume of the front after each evaluation
};

/// Sequential suggest → evaluate → update loop. Evaluator exceptions are
/// recorded as failed observations at (1, 1).
SearchResult search(const Evaluator& evaluate, const SearchOptions& options);

/// Analytic stand-in for training: error is a scaled squared distance in the
/// encoding to a fixed reference architecture, cost is the normalized MAC
/// count on a small citation-graph-sized problem.
Evaluation synthetic_benchmark(const ArchitectureConfig& arch);

}  // namespace sgap
