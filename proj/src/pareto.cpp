#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "sgap/search.hpp"

namespace sgap {

bool dominates(const Objectives& a, const Objectives& b) {
  return a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1]);
}

bool ParetoFront::insert(const Observation& obs) {
  for (const Observation& m : members_) {
    if (dominates(m.objectives, obs.objectives)) return false;
  }
  std::erase_if(members_, [&](const Observation& m) { return dominates(obs.objectives, m.objectives); });
  auto pos = std::upper_bound(members_.begin(), members_.end(), obs, [](const Observation& a, const Observation& b) {
    return a.objectives < b.objectives;
  });
  members_.insert(pos, obs);
  return true;
}

std::vector<Objectives> ParetoFront::points() const {
  std::vector<Objectives> p;
  p.reserve(members_.size());
  for (const Observation& m : members_) p.push_back(m.objectives);
  return p;
}

ParetoFront pareto_update(ParetoFront front, const Observation& obs) {
  front.insert(obs);
  return front;
}

double hypervolume(std::span<const Objectives> points, const Objectives& ref, std::size_t* excluded) {
  std::vector<Objectives> p;
  std::size_t skipped = 0;
  for (const Objectives& q : points) {
    if (!(q[0] <= ref[0] && q[1] <= ref[1])) {
      ++skipped;
      continue;
    }
    p.push_back(q);
  }
  if (skipped > 0) std::cerr << "warning: hypervolume skipped " << skipped << " point(s) beyond the reference\n";
  if (excluded != nullptr) *excluded = skipped;
  std::sort(p.begin(), p.end());
  double area = 0.0;
  double best_y = ref[1];
  for (std::size_t i = 0; i < p.size(); ++i) {
    best_y = std::min(best_y, p[i][1]);
    const double next_x = i + 1 < p.size() ? p[i + 1][0] : ref[0];
    area += (next_x - p[i][0]) * (ref[1] - best_y);
  }
  return area;
}

namespace {

// E[(b − Y)^+] for Y ~ N(mu, sigma²).
double partial_expectation(double b, double mu, double sigma) {
  if (b == -std::numeric_limits<double>::infinity()) return 0.0;
  if (sigma <= 0.0) return std::max(b - mu, 0.0);
  const double t = (b - mu) / sigma;
  const double pdf = std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
  const double cdf = 0.5 * std::erfc(-t / std::sqrt(2.0));
  return sigma * (t * cdf + pdf);
}

}  // namespace

double ehvi(const Objectives& mean, const Objectives& stddev, std::span<const Objectives> front,
            const Objectives& ref) {
  std::vector<Objectives> p;
  for (const Objectives& q : front) {
    if (q[0] < ref[0] && q[1] < ref[1]) p.push_back(q);
  }
  // Reduce to the non-dominated staircase, sorted by the first objective.
  std::sort(p.begin(), p.end());
  std::vector<Objectives> stairs;
  for (const Objectives& q : p) {
    if (stairs.empty() || q[1] < stairs.back()[1]) stairs.push_back(q);
  }

  // Strip i spans [x_i, x_{i+1}) and is already dominated above u_i.
  const double inf = std::numeric_limits<double>::infinity();
  double total = 0.0;
  double x_lo = -inf;
  double u = ref[1];
  for (std::size_t i = 0; i <= stairs.size(); ++i) {
    const double x_hi = i < stairs.size() ? stairs[i][0] : ref[0];
    const double width = partial_expectation(x_hi, mean[0], stddev[0]) - partial_expectation(x_lo, mean[0], stddev[0]);
    total += std::max(width, 0.0) * partial_expectation(u, mean[1], stddev[1]);
    if (i < stairs.size()) {
      x_lo = stairs[i][0];
      u = stairs[i][1];
    }
  }
  return std::max(total, 0.0);
}

double ehvi(const GPSurrogate& gp_error, const GPSurrogate& gp_cost, std::span<const Objectives> front,
            const Objectives& ref, const Eigen::VectorXd& x) {
  const GPPrediction a = gp_error.predict(x);
  const GPPrediction b = gp_cost.predict(x);
  return ehvi({a.mean, b.mean}, {a.stddev, b.stddev}, front, ref);
}

}  // namespace sgap
