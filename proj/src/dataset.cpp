#include "sgap/dataset.hpp"

#include <charconv>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "binary_io.hpp"
#include "sgap/errors.hpp"

namespace sgap {

void validate(const Dataset& ds) {
  const std::size_t n = ds.num_nodes();
  if (static_cast<std::size_t>(ds.features.rows()) != n) {
    throw DimensionError("feature rows " + std::to_string(ds.features.rows()) + " != num_nodes " +
                         std::to_string(n));
  }
  if (ds.labels.size() != n) {
    throw DimensionError("label count " + std::to_string(ds.labels.size()) + " != num_nodes " + std::to_string(n));
  }
  if (ds.num_classes < 1) throw ValidationError("num_classes must be >= 1");
  for (std::size_t v = 0; v < n; ++v) {
    if (ds.labels[v] < 0 || ds.labels[v] >= ds.num_classes) {
      throw RangeError("label of node " + std::to_string(v) + " outside [0, num_classes)");
    }
  }
  if (!ds.features.allFinite()) throw ValidationError("non-finite feature value");
  std::vector<char> owner(n, 0);
  const std::pair<const char*, const std::vector<std::size_t>*> parts[] = {
      {"train", &ds.splits.train}, {"val", &ds.splits.val}, {"test", &ds.splits.test}};
  for (auto [name, idx] : parts) {
    for (auto v : *idx) {
      if (v >= n) throw RangeError(std::string(name) + " split index " + std::to_string(v) + " out of range");
      if (owner[v]) throw ValidationError("splits overlap at node " + std::to_string(v));
      owner[v] = 1;
    }
  }
}

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("missing file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
T parse_number(std::string_view tok, const std::filesystem::path& path, std::size_t line) {
  while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r')) tok.remove_suffix(1);
  T value{};
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || p != tok.data() + tok.size() || tok.empty()) {
    throw ParseError(path.string() + ": bad number '" + std::string(tok) + "'", line);
  }
  return value;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  while (!lines.empty() && (lines.back().empty() || lines.back() == "\r")) lines.pop_back();
  return lines;
}

std::string format_double(double x) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::vector<std::size_t> index_list(const nlohmann::json& j, const char* key, const std::filesystem::path& path) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw ValidationError(path.string() + ": missing \"" + key + "\" array");
  }
  std::vector<std::size_t> out;
  for (const auto& v : j[key]) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ValidationError(path.string() + ": \"" + key + "\" holds a non-index value");
    }
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

}  // namespace

Matrix load_features_csv(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const auto lines = lines_of(text);
  std::vector<double> values;
  Eigen::Index cols = -1;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    Eigen::Index count = 0;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = line.find(',', pos);
      values.push_back(parse_number<double>(line.substr(pos, comma - pos), path, i + 1));
      ++count;
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (cols < 0) cols = count;
    if (count != cols) throw ParseError(path.string() + ": ragged feature row", i + 1);
  }
  const auto rows = static_cast<Eigen::Index>(lines.size());
  Matrix m(rows, std::max<Eigen::Index>(cols, 0));
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

void save_features_csv(const Matrix& features, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      if (c) out << ',';
      out << format_double(features(r, c));
    }
    out << '\n';
  }
}

Matrix load_features_binary(const std::filesystem::path& path) {
  detail::BinaryReader r(path);
  r.expect_magic("PASCAF1");
  const auto n = static_cast<Eigen::Index>(r.u64());
  const auto d = static_cast<Eigen::Index>(r.u64());
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<double>(r.f32());
  return m;
}

void save_features_binary(const Matrix& features, const std::filesystem::path& path) {
  detail::BinaryWriter w(path);
  w.magic("PASCAF1");
  w.u64(static_cast<std::uint64_t>(features.rows()));
  w.u64(static_cast<std::uint64_t>(features.cols()));
  for (Eigen::Index i = 0; i < features.size(); ++i) w.f32(static_cast<float>(features.data()[i]));
  w.finish();
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset ds;
  {
    const auto path = dir / "labels.csv";
    const std::string text = read_text(path);
    const auto lines = lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) ds.labels.push_back(parse_number<std::int32_t>(lines[i], path, i + 1));
    int max_label = -1;
    for (auto l : ds.labels) {
      if (l < 0) throw RangeError(path.string() + ": negative label");
      max_label = std::max(max_label, static_cast<int>(l));
    }
    ds.num_classes = max_label + 1;
  }
  const std::size_t n = ds.labels.size();
  ds.graph = load_edge_list_file(dir / "graph.tsv", n);

  if (std::filesystem::exists(dir / "features.bin")) {
    ds.features = load_features_binary(dir / "features.bin");
  } else if (std::filesystem::exists(dir / "features.csv")) {
    ds.features = load_features_csv(dir / "features.csv");
  } else {
    throw ValidationError("missing file " + (dir / "features.csv").string() + " (or features.bin)");
  }

  {
    const auto path = dir / "split.json";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
    ds.splits.train = index_list(j, "train", path);
    ds.splits.val = index_list(j, "val", path);
    ds.splits.test = index_list(j, "test", path);
  }
  validate(ds);
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir, FeatureFormat format) {
  validate(ds);
  std::filesystem::create_directories(dir);
  save_edge_list_file(ds.graph, dir / "graph.tsv");
  std::filesystem::remove(dir / "features.csv");
  std::filesystem::remove(dir / "features.bin");
  if (format == FeatureFormat::Binary) {
    save_features_binary(ds.features, dir / "features.bin");
  } else {
    save_features_csv(ds.features, dir / "features.csv");
  }
  {
    std::ofstream out(dir / "labels.csv");
    for (auto l : ds.labels) out << l << '\n';
    if (!out) throw RuntimeFailure("cannot write labels.csv");
  }
  nlohmann::ordered_json j;
  j["train"] = ds.splits.train;
  j["val"] = ds.splits.val;
  j["test"] = ds.splits.test;
  std::ofstream out(dir / "split.json");
  out << j.dump() << '\n';
  if (!out) throw RuntimeFailure("cannot write split.json");
}

Dataset synth_sbm(const SbmParams& p) {
  if (p.blocks < 1 || p.num_nodes < p.blocks) throw ValidationError("need 1 <= blocks <= num_nodes");
  if (!(p.p_in >= 0.0 && p.p_in <= 1.0 && p.p_out >= 0.0 && p.p_out <= 1.0)) {
    throw ValidationError("edge probabilities must lie in [0, 1]");
  }
  if (!(p.p_in > p.p_out)) throw ValidationError("p_in must exceed p_out");
  if (p.feature_dim < 1) throw ValidationError("feature_dim must be >= 1");
  if (!(p.noise >= 0.0)) throw ValidationError("noise must be non-negative");

  Rng rng(p.seed);
  const std::size_t n = p.num_nodes;
  Dataset ds;
  ds.num_classes = static_cast<int>(p.blocks);
  ds.labels.resize(n);
  for (std::size_t v = 0; v < n; ++v) ds.labels[v] = static_cast<std::int32_t>(v * p.blocks / n);

  std::bernoulli_distribution in_edge(p.p_in), out_edge(p.p_out);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const bool same = ds.labels[u] == ds.labels[v];
      if (same ? in_edge(rng) : out_edge(rng)) edges.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
    }
  }
  ds.graph = from_edges(n, edges);

  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(p.feature_dim);
  Matrix means(static_cast<Eigen::Index>(p.blocks), d);
  for (Eigen::Index i = 0; i < means.size(); ++i) means.data()[i] = gauss(rng);
  ds.features.resize(static_cast<Eigen::Index>(n), d);
  for (std::size_t v = 0; v < n; ++v) {
    for (Eigen::Index j = 0; j < d; ++j) {
      ds.features(static_cast<Eigen::Index>(v), j) = means(ds.labels[v], j) + p.noise * gauss(rng);
    }
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::size_t n_train = n * 6 / 10;
  const std::size_t n_val = n * 2 / 10;
  ds.splits.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  ds.splits.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                       perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  ds.splits.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
  return ds;
}

}  // namespace sgap
