#include "sgap/propagation.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <thread>

#include "binary_io.hpp"
#include "sgap/errors.hpp"

namespace sgap {

MessageStack MessageStack::prefix(std::size_t k) const {
  if (k + 1 > steps.size()) throw RangeError("prefix longer than stack");
  return MessageStack{std::vector<Matrix>(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(k + 1))};
}

bool MessageStack::operator==(const MessageStack& other) const {
  if (steps.size() != other.steps.size()) return false;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const Matrix& a = steps[t];
    const Matrix& b = other.steps[t];
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    if (std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) != 0) return false;
  }
  return true;
}

namespace {

void check_shapes(const PropagationOperator& op, const Matrix& prev, const Matrix& origin) {
  const auto n = static_cast<Eigen::Index>(op.base.num_nodes);
  if (prev.rows() != n || origin.rows() != n || prev.cols() != origin.cols()) {
    std::ostringstream os;
    os << "message shape mismatch: operator has " << n << " nodes, prev is " << prev.rows() << "x"
       << prev.cols() << ", origin is " << origin.rows() << "x" << origin.cols();
    throw DimensionError(os.str());
  }
}

void step_rows(const PropagationOperator& op, const Matrix& prev, const Matrix& origin, Matrix& out,
               std::size_t begin, std::size_t end) {
  const GraphCSR& base = op.base;
  const bool ppr = op.kind.kind == GraphAggregatorKind::PPR;
  const double alpha = op.restart_alpha;
  for (std::size_t v = begin; v < end; ++v) {
    const auto row = static_cast<Eigen::Index>(v);
    if (ppr && alpha == 1.0) {
      out.row(row) = origin.row(row);
      continue;
    }
    out.row(row).setZero();
    for (std::uint64_t e = base.row_ptr[v]; e < base.row_ptr[v + 1]; ++e) {
      out.row(row).noalias() += base.weight_at(e) * prev.row(base.col_idx[e]);
    }
    if (ppr) out.row(row) = alpha * origin.row(row) + (1.0 - alpha) * out.row(row);
  }
}

}  // namespace

Matrix apply_step(const PropagationOperator& op, const Matrix& prev, const Matrix& origin) {
  check_shapes(op, prev, origin);
  Matrix out(prev.rows(), prev.cols());
  step_rows(op, prev, origin, out, 0, op.base.num_nodes);
  return out;
}

std::size_t stack_bytes(Eigen::Index n, Eigen::Index dim, std::size_t k) {
  return static_cast<std::size_t>(n) * static_cast<std::size_t>(dim) * (k + 1) * sizeof(double);
}

MessageStack propagate(const PropagationOperator& op, const Matrix& m0, std::size_t k,
                       const PropagateOptions& options) {
  check_shapes(op, m0, m0);
  const std::size_t required = stack_bytes(m0.rows(), m0.cols(), k);
  if (required > options.memory_budget_bytes) {
    throw ResourceError("message stack exceeds memory budget of " +
                            std::to_string(options.memory_budget_bytes) + " bytes",
                        required);
  }
  const std::size_t n = op.base.num_nodes;
  const std::size_t workers = std::max<std::size_t>(1, options.workers);
  const std::size_t batch = options.batch_size > 0
                                ? options.batch_size
                                : std::max<std::size_t>(1, (n + 4 * workers - 1) / (4 * workers));
  const std::size_t num_batches = n == 0 ? 0 : (n + batch - 1) / batch;

  MessageStack stack;
  stack.steps.reserve(k + 1);
  stack.steps.push_back(m0);
  for (std::size_t t = 1; t <= k; ++t) {
    const Matrix& prev = stack.steps.back();
    Matrix out(m0.rows(), m0.cols());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t b = next.fetch_add(1); b < num_batches; b = next.fetch_add(1)) {
        const std::size_t begin = b * batch;
        step_rows(op, prev, m0, out, begin, std::min(n, begin + batch));
      }
    };
    if (workers == 1 || num_batches <= 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(workers - 1);
      for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
      work();
    }
    stack.steps.push_back(std::move(out));
  }
  return stack;
}

void save_stack(const MessageStack& stack, const std::filesystem::path& path) {
  if (stack.steps.empty()) throw ValidationError("cannot save an empty message stack");
  detail::BinaryWriter w(path);
  w.magic("SGAPM1");
  w.u64(static_cast<std::uint64_t>(stack.num_nodes()));
  w.u64(static_cast<std::uint64_t>(stack.dim()));
  w.u64(stack.k());
  for (const Matrix& m : stack.steps) w.raw(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
  w.finish();
}

MessageStack load_stack(const std::filesystem::path& path) {
  detail::BinaryReader r(path);
  r.expect_magic("SGAPM1");
  const auto n = static_cast<Eigen::Index>(r.u64());
  const auto dim = static_cast<Eigen::Index>(r.u64());
  const std::uint64_t k = r.u64();
  MessageStack stack;
  stack.steps.reserve(k + 1);
  for (std::uint64_t t = 0; t <= k; ++t) {
    Matrix m(n, dim);
    r.raw(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
    if (!m.allFinite()) throw ValidationError(path.string() + ": non-finite message entry");
    stack.steps.push_back(std::move(m));
  }
  return stack;
}

std::uint64_t content_hash(const Matrix& m) {
  detail::Fnv1a h;
  h.add_value(static_cast<std::uint64_t>(m.rows()));
  h.add_value(static_cast<std::uint64_t>(m.cols()));
  h.add(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
  return h.value();
}

PropagationCache::PropagationCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {
  if (dir_) std::filesystem::create_directories(*dir_);
}

PropagationCache PropagationCache::from_environment() {
  if (const char* env = std::getenv("SGAP_CACHE_DIR"); env != nullptr && *env != '\0') {
    return PropagationCache(std::filesystem::path(env));
  }
  return PropagationCache();
}

std::filesystem::path PropagationCache::file_for(const Key& key) const {
  std::ostringstream os;
  os << std::hex << std::get<0>(key) << '-' << std::get<1>(key) << '-' << std::get<2>(key) << '-'
     << std::get<3>(key) << '-' << std::get<4>(key) << ".sgapm";
  return *dir_ / os.str();
}

MessageStack PropagationCache::get(const GraphCSR& g, const GraphAggregator& kind,
                                   const OperatorOptions& op_options, const Matrix& m0, std::size_t k,
                                   const PropagateOptions& options) {
  const Key key{content_hash(g), static_cast<int>(kind.kind), std::bit_cast<std::uint64_t>(kind.alpha),
                kind.kind == GraphAggregatorKind::AugNA && op_options.aug_na_row_normalized,
                content_hash(m0)};
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end() && it->second.stack->k() >= k) {
      ++hits_;
      return it->second.stack->prefix(k);
    }
  }
  if (dir_) {
    const auto path = file_for(key);
    if (std::filesystem::exists(path)) {
      auto loaded = std::make_shared<const MessageStack>(load_stack(path));
      if (loaded->k() >= k && loaded->num_nodes() == m0.rows() && loaded->dim() == m0.cols()) {
        std::lock_guard lock(mutex_);
        ++hits_;
        auto& slot = entries_[key];
        if (!slot.stack || slot.stack->k() < loaded->k()) slot.stack = loaded;
        return loaded->prefix(k);
      }
    }
  }
  auto computed = std::make_shared<const MessageStack>(propagate(build_operator(g, kind, op_options), m0, k, options));
  if (dir_) save_stack(*computed, file_for(key));
  std::lock_guard lock(mutex_);
  ++misses_;
  auto& slot = entries_[key];
  if (!slot.stack || slot.stack->k() < computed->k()) slot.stack = computed;
  return *computed;
}

std::size_t PropagationCache::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::size_t PropagationCache::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

}  // namespace sgap
