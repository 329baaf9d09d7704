// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Tolerances and
// time limits are fixed below; the process fails if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "oracles.hpp"
#include "sgap/dataset.hpp"
#include "sgap/pipeline.hpp"
#include "sgap/search.hpp"

using namespace sgap;

namespace {

using GA = GraphAggregator;
using MA = MessageAggregator;

struct Outcome {
  enum Status { Pass, Fail, Skip } status = Fail;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Outcome::Pass : Outcome::Fail, std::move(detail)}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult cli(const std::string& args) {
  CliResult r;
  FILE* p = popen((std::string(SGAP_CLI) + " " + args + " 2>/dev/null").c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Matrix random_matrix(Eigen::Index n, Eigen::Index d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

// 1 ------------------------------------------------------------------------
Outcome design_space_cardinality() {
  constexpr double kLimitSeconds = 1.0;
  const auto t0 = std::chrono::steady_clock::now();
  const CliResult r = cli("enumerate --count-only");
  const double secs = elapsed(t0);
  std::size_t enumerated = 0;
  for (const auto& arch : enumerate_space()) enumerated += is_canonical(arch);
  const bool ok = r.code == 0 && r.out == "156060\n" && enumerated == 156060 && space::kRawGridSize == 181500 &&
                  secs < kLimitSeconds;
  return verdict(ok, fmt("cli=%s enumerated=%zu raw=%zu cli_time=%.3fs", r.out.substr(0, r.out.find('\n')).c_str(),
                         enumerated, space::kRawGridSize, secs));
}

// 2 ------------------------------------------------------------------------
Outcome operator_oracle() {
  constexpr double kTolerance = 1e-10;
  constexpr double kLimitSeconds = 10.0;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  double worst = 0.0;
  for (int graph = 0; graph < 100; ++graph) {
    const std::size_t n = 1 + rng() % 50;
    const auto edges = oracle::random_edges(n, 0.02 + 0.4 * static_cast<double>(rng() % 1000) / 1000.0, rng);
    const GraphCSR g = from_edges(n, edges);
    const oracle::Dense a = oracle::adjacency(n, edges);
    const Matrix m0 = random_matrix(static_cast<Eigen::Index>(n), 4, rng);
    for (const GA& ga : {GA::aug_na(), GA::ppr(0.1), GA::ppr(0.3), GA::triangle_ia()}) {
      const auto expect = oracle::dense_propagate(oracle::dense_operator(a, ga), m0, 5);
      const MessageStack got = propagate(build_operator(g, ga), m0, 5);
      for (std::size_t t = 0; t <= 5; ++t) worst = std::max(worst, (got.steps[t] - expect[t]).cwiseAbs().maxCoeff());
    }
  }
  const double secs = elapsed(t0);
  return verdict(worst <= kTolerance && secs < kLimitSeconds,
                 fmt("max_abs_diff=%.3e (tol %.0e) time=%.2fs", worst, kTolerance, secs));
}

// 3 ------------------------------------------------------------------------
Outcome conservation() {
  constexpr double kStochastic = 1e-12;
  constexpr double kMass = 1e-8;
  std::mt19937_64 rng(31337);
  double col_err = 0.0, mass_err = 0.0, row_err = 0.0, simplex_err = 0.0;
  bool identity = true;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + rng() % 60;
    auto edges = oracle::random_edges(n, 0.15, rng);
    const GraphCSR g = from_edges(n, edges);
    const PropagationOperator aug = build_operator(g, GA::aug_na());
    const Matrix aug_d = to_dense(aug.base);
    col_err = std::max(col_err, (aug_d.colwise().sum().array() - 1.0).abs().maxCoeff());
    const Matrix m0 = random_matrix(static_cast<Eigen::Index>(n), 3, rng).cwiseAbs();
    const MessageStack s = propagate(aug, m0, 10);
    const Eigen::RowVectorXd before = m0.colwise().sum();
    mass_err = std::max(mass_err, ((s.steps[10].colwise().sum() - before).array().abs() / before.array()).maxCoeff());

    const PropagationOperator tri = build_operator(g, GA::triangle_ia());
    row_err = std::max(row_err, (to_dense(tri.base).rowwise().sum().array() - 1.0).abs().maxCoeff());
    Matrix probs = random_matrix(static_cast<Eigen::Index>(n), 4, rng).cwiseAbs();
    for (Eigen::Index r = 0; r < probs.rows(); ++r) probs.row(r) /= probs.row(r).sum();
    for (const Matrix& m : propagate(tri, probs, 10).steps) {
      simplex_err = std::max(simplex_err, (m.rowwise().sum().array() - 1.0).abs().maxCoeff());
      simplex_err = std::max(simplex_err, std::max(0.0, -m.minCoeff()));
    }

    const MessageStack id = propagate(build_operator(g, GA::ppr(1.0)), m0, 10);
    for (const Matrix& m : id.steps) identity &= std::memcmp(m.data(), m0.data(), sizeof(double) * m0.size()) == 0;
  }
  // Post-processing of trained soft predictions through TriangleIA.
  SbmParams sp;
  sp.num_nodes = 120;
  sp.seed = 9;
  TrainConfig cfg;
  cfg.max_epochs = 40;
  const SgapRun run = run_sgap_detailed(synth_sbm(sp), {2, GA::aug_na(), MA::Mean, 2, 10, GA::triangle_ia()}, cfg);
  simplex_err = std::max(simplex_err, (run.final_predictions.rowwise().sum().array() - 1.0).abs().maxCoeff());
  simplex_err = std::max(simplex_err, std::max(0.0, -run.final_predictions.minCoeff()));

  const bool ok = col_err <= kStochastic && mass_err <= kMass && row_err <= kStochastic && simplex_err <= kStochastic &&
                  identity;
  return verdict(ok, fmt("augna_col=%.1e mass=%.1e tri_row=%.1e simplex=%.1e ppr1_identity=%s", col_err, mass_err,
                         row_err, simplex_err, identity ? "bitwise" : "NO"));
}

// 4 ------------------------------------------------------------------------
Outcome gradients() {
  constexpr double kRelTolerance = 1e-4;
  constexpr double kFloor = 1e-4;  // denominators below this are treated as this
  constexpr double kLimitSeconds = 30.0;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> g(0.0, 1.0);
  const MA kinds[] = {MA::None, MA::Mean, MA::Max, MA::Concatenate, MA::Weighted, MA::Adaptive};
  double worst = 0.0;
  int instances = 0;
  for (int i = 0; i < 20; ++i) {
    const MA kind = kinds[i % 6];
    const int k_trans = 1 + (i / 6) % 3;
    const std::size_t k = 1 + rng() % 4;
    const Eigen::Index n = 8 + static_cast<Eigen::Index>(rng() % 13), d = 2 + static_cast<Eigen::Index>(rng() % 7);
    MessageStack s;
    for (std::size_t t = 0; t <= k; ++t) {
      Matrix m(n, d);
      for (Eigen::Index j = 0; j < m.size(); ++j) m.data()[j] = g(rng);
      s.steps.push_back(m);
    }
    Rng init(rng());
    ModelParams p = init_params({kind, d, k, k_trans, 3, 6, 0.5, 0.5}, init);
    if (p.gate_s)
      for (Eigen::Index j = 0; j < p.gate_s->size(); ++j) (*p.gate_s)[j] = 0.5 * g(rng);
    for (Layer& l : p.layers)
      for (Eigen::Index j = 0; j < l.bias.size(); ++j) l.bias[j] = 0.1 * g(rng);
    std::vector<std::int32_t> labels(static_cast<std::size_t>(n));
    for (auto& l : labels) l = static_cast<std::int32_t>(rng() % 3);
    std::vector<std::size_t> mask;
    for (std::size_t v = 0; v < labels.size(); ++v)
      if (v % 4 != 3) mask.push_back(v);
    const Gradients grads = loss_and_grads(p, s, kind, labels, mask, 5e-4).grads;
    auto loss = [&] { return loss_and_grads(p, s, kind, labels, mask, 5e-4).loss; };
    auto check = [&](double analytic, double* x) {
      const double fd = oracle::central_difference(loss, x, 1e-5);
      worst = std::max(worst, std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), kFloor}));
    };
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      for (Eigen::Index j = 0; j < p.layers[l].weight.size(); ++j)
        check(grads.layers[l].weight.data()[j], p.layers[l].weight.data() + j);
      for (Eigen::Index j = 0; j < p.layers[l].bias.size(); ++j) check(grads.layers[l].bias[j], p.layers[l].bias.data() + j);
    }
    if (kind == MA::Adaptive) {
      if (!grads.gate_s) return verdict(false, "no gate gradient");
      for (Eigen::Index j = 0; j < p.gate_s->size(); ++j) check((*grads.gate_s)[j], p.gate_s->data() + j);
    }
    ++instances;
  }
  const double secs = elapsed(t0);
  return verdict(worst < kRelTolerance && secs < kLimitSeconds,
                 fmt("instances=%d max_rel_err=%.2e (tol %.0e) time=%.2fs", instances, worst, kRelTolerance, secs));
}

// 5 ------------------------------------------------------------------------
Outcome hypervolume_ehvi() {
  constexpr double kHvTolerance = 1e-15;  // floating-point rounding of 0.70
  constexpr double kSigmas = 3.0;
  const std::vector<Objectives> two{{0.2, 0.3}, {0.3, 0.1}};
  const double hv = hypervolume(two, {1.0, 1.0});
  std::mt19937_64 rng(555);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int within = 0;
  double worst_z = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Objectives> front;
    std::vector<oracle::Point> ref_front;
    for (std::size_t i = 0, m = 1 + rng() % 5; i < m; ++i) {
      front.push_back({u(rng), u(rng)});
      ref_front.push_back(front.back());
    }
    const Objectives mu{u(rng), u(rng)}, sd{0.02 + 0.3 * u(rng), 0.02 + 0.3 * u(rng)};
    const double exact = ehvi(mu, sd, front, kDefaultReference);
    const auto mc = oracle::mc_ehvi(mu, sd, ref_front, kDefaultReference, 100000, rng);
    const double z = std::abs(exact - mc.mean) / std::max(mc.stderr_, 1e-300);
    worst_z = std::max(worst_z, mc.stderr_ > 0 ? z : (exact == mc.mean ? 0.0 : INFINITY));
    within += mc.stderr_ > 0 ? z <= kSigmas : exact == mc.mean;
  }
  const std::vector<Objectives> one{{0.5, 0.5}};
  const double dominated = ehvi({0.9, 0.9}, {0.0, 0.0}, one, {1.0, 1.0}) + ehvi({0.5, 0.6}, {0.0, 0.0}, one, {1.0, 1.0});
  const bool ok = std::abs(hv - 0.70) <= kHvTolerance && within == 20 && dominated == 0.0;
  return verdict(ok, fmt("hv=%.17g mc_within_3se=%d/20 worst_z=%.2f dominated_ehvi=%g", hv, within, worst_z, dominated));
}

// 6 ------------------------------------------------------------------------
Outcome pareto_correctness() {
  std::mt19937_64 rng(6066);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int streams_ok = 0;
  for (int stream = 0; stream < 20; ++stream) {
    ParetoFront front;
    std::vector<oracle::Point> pts;
    bool ok = true;
    for (int i = 0; i < 100; ++i) {
      const double a = u(rng);
      const double b = stream % 2 ? u(rng) : std::max(0.0, 1.0 - a + 0.3 * (u(rng) - 0.5));
      Observation o;
      o.objectives = {a, b};
      front = pareto_update(front, o);
      pts.push_back({a, b});
      std::multiset<oracle::Point> expect;
      for (std::size_t j : oracle::nondominated(pts)) expect.insert(pts[j]);
      const auto got = front.points();
      ok &= std::multiset<oracle::Point>(got.begin(), got.end()) == expect;
    }
    streams_ok += ok;
  }
  int monotone = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SearchOptions opt;
    opt.budget = 40;
    opt.seed = seed;
    const SearchResult r = search(synthetic_benchmark, opt);
    monotone += std::is_sorted(r.hv_trace.begin(), r.hv_trace.end());
  }
  return verdict(streams_ok == 20 && monotone == 5,
                 fmt("streams_matching_brute_force=%d/20 monotone_hv_traces=%d/5", streams_ok, monotone));
}

// 7 ------------------------------------------------------------------------
Outcome search_beats_random() {
  constexpr int kRequiredWins = 7;
  constexpr double kLimitSeconds = 300.0;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> bo, random;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SearchOptions opt;
    opt.budget = 60;
    opt.seed = seed;
    bo.push_back(search(synthetic_benchmark, opt).hv_trace.back());
    opt.suggest.init = opt.budget;  // every suggestion from the random phase
    random.push_back(search(synthetic_benchmark, opt).hv_trace.back());
  }
  const double random_median = median(random);
  const int wins = static_cast<int>(std::count_if(bo.begin(), bo.end(), [&](double h) { return h >= random_median; }));
  const double secs = elapsed(t0);
  return verdict(wins >= kRequiredWins && secs < kLimitSeconds,
                 fmt("bo_wins=%d/10 (need %d) bo_median_hv=%.4f random_median_hv=%.4f time=%.1fs", wins,
                     kRequiredWins, median(bo), random_median, secs));
}

// 8 ------------------------------------------------------------------------
Outcome determinism() {
  std::mt19937_64 rng(8);
  SbmParams sp;
  sp.num_nodes = 300;
  sp.p_in = 0.1;
  sp.seed = 8;
  const Dataset ds = synth_sbm(sp);
  bool bitwise = true;
  for (const GA& ga : {GA::aug_na(), GA::ppr(0.2), GA::triangle_ia()}) {
    const PropagationOperator op = build_operator(ds.graph, ga);
    const MessageStack one = propagate(op, ds.features, 10, PropagateOptions{1});
    for (std::size_t w : {2u, 4u}) bitwise &= propagate(op, ds.features, 10, PropagateOptions{w}) == one;
  }

  const auto dir = std::filesystem::temp_directory_path() / "sgap_acceptance_determinism";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::string data = (dir / "data").string();
  bool files = cli("synth --out " + data + " --nodes 150 --seed 8").code == 0;
  std::ofstream(dir / "train.json") << R"({"max_epochs":80})";
  const std::string train = (dir / "train.json").string();
  auto twice = [&](const std::string& args, const char* a, const char* b) {
    const bool ran = cli(args + " --out " + (dir / a).string()).code == 0 && cli(args + " --out " + (dir / b).string()).code == 0;
    return ran && slurp(dir / a) == slurp(dir / b) && !slurp(dir / a).empty();
  };
  const bool run_same = files && twice("run --data " + data + " --arch pasca-v3 --train " + train + " --seed 3 --workers 4",
                                       "run1.json", "run2.json");
  const bool search_same =
      files && twice("search --data " + data + " --train " + train + " --budget 14 --init 8 --candidates 100 --seed 3",
                     "search1.json", "search2.json");
  std::filesystem::remove_all(dir);
  return verdict(bitwise && run_same && search_same,
                 fmt("propagation_workers_1_2_4=%s run=%s search=%s", bitwise ? "bitwise" : "DIFFER",
                     run_same ? "identical" : "DIFFER", search_same ? "identical" : "DIFFER"));
}

// 9 ------------------------------------------------------------------------
// Sparse two-block benchmark: communities are weak enough that ten AugNA steps
// wash out the block signal, while two steps still help.
SbmParams depth_benchmark(std::uint64_t seed) {
  SbmParams sp;
  sp.num_nodes = 400;
  sp.blocks = 2;
  sp.p_in = 0.05;
  sp.p_out = 0.02;
  sp.feature_dim = 8;
  sp.noise = 1.0;
  sp.seed = seed;
  return sp;
}

Outcome depth_contrast() {
  constexpr double kAdaptiveSlack = 0.02;
  constexpr double kLimitSeconds = 300.0;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> ada2, ada10, sgc2, sgc10;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset ds = synth_sbm(depth_benchmark(seed));
    TrainConfig cfg;
    cfg.seed = seed;
    ada2.push_back(run_sgap(ds, {2, GA::aug_na(), MA::Adaptive, 2, 0, std::nullopt}, cfg).test_accuracy);
    ada10.push_back(run_sgap(ds, {10, GA::aug_na(), MA::Adaptive, 2, 0, std::nullopt}, cfg).test_accuracy);
    sgc2.push_back(run_sgap(ds, {2, GA::aug_na(), MA::None, 1, 0, std::nullopt}, cfg).test_accuracy);
    sgc10.push_back(run_sgap(ds, {10, GA::aug_na(), MA::None, 1, 0, std::nullopt}, cfg).test_accuracy);
  }
  const double secs = elapsed(t0);
  const bool ok = median(ada10) >= median(ada2) - kAdaptiveSlack && median(sgc10) < median(sgc2) && secs < kLimitSeconds;
  return verdict(ok, fmt("adaptive k2=%.3f k10=%.3f | sgc k2=%.3f k10=%.3f (medians) time=%.1fs", median(ada2),
                         median(ada10), median(sgc2), median(sgc10), secs));
}

// 10 -----------------------------------------------------------------------
Outcome cora_reproduction() {
  constexpr double kV3Target = 0.846, kSgcTarget = 0.810, kBand = 0.015;
  constexpr double kLimitSeconds = 900.0;
  const char* dir = std::getenv("SGAP_CORA_DIR");
  if (dir == nullptr || !std::filesystem::exists(std::filesystem::path(dir) / "labels.csv")) {
    return {Outcome::Skip, "set SGAP_CORA_DIR to a converted Cora directory to run"};
  }
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset ds = load_dataset(dir);
  PropagationCache cache;
  RunOptions opt;
  opt.cache = &cache;
  double v3 = 0.0, sgc = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    TrainConfig cfg;
    cfg.seed = seed;
    v3 += run_sgap(ds, preset("pasca-v3").arch, cfg, opt).test_accuracy / 10.0;
    sgc += run_sgap(ds, preset("sgc").arch, cfg, opt).test_accuracy / 10.0;
  }
  const double secs = elapsed(t0);
  const bool ok = std::abs(v3 - kV3Target) <= kBand && std::abs(sgc - kSgcTarget) <= kBand && secs < kLimitSeconds;
  return verdict(ok, fmt("pasca-v3=%.1f%% (target 84.6±1.5) sgc=%.1f%% (target 81.0±1.5) time=%.0fs", 100 * v3,
                         100 * sgc, secs));
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"design-space cardinality", design_space_cardinality},
      {"operator oracle equivalence", operator_oracle},
      {"conservation and stochasticity", conservation},
      {"gradient suite", gradients},
      {"hypervolume and EHVI oracles", hypervolume_ehvi},
      {"Pareto correctness", pareto_correctness},
      {"search beats random", search_beats_random},
      {"determinism and scalability contract", determinism},
      {"model-scalability contrast", depth_contrast},
      {"optional Cora reproduction", cora_reproduction},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {Outcome::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Outcome::Pass ? "PASS" : o.status == Outcome::Skip ? "SKIP" : "FAIL";
    failed += o.status == Outcome::Fail;
    std::cout << "[" << tag << "] " << index << ". " << name << ": " << o.detail << std::endl;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criterion(s) failed" : std::string("acceptance: all criteria met"))
            << std::endl;
  return failed ? 1 : 0;
}
