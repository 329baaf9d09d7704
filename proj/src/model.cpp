#include "sgap/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "sgap/errors.hpp"

namespace sgap {

std::string_view to_string(MessageAggregator ma) {
  switch (ma) {
    case MessageAggregator::None: return "none";
    case MessageAggregator::Mean: return "mean";
    case MessageAggregator::Max: return "max";
    case MessageAggregator::Concatenate: return "concatenate";
    case MessageAggregator::Weighted: return "weighted";
    case MessageAggregator::Adaptive: return "adaptive";
  }
  return "?";
}

MessageAggregator parse_message_aggregator(std::string_view name) {
  for (auto ma : {MessageAggregator::None, MessageAggregator::Mean, MessageAggregator::Max,
                  MessageAggregator::Concatenate, MessageAggregator::Weighted, MessageAggregator::Adaptive}) {
    if (name == to_string(ma)) return ma;
  }
  throw ConfigError("unknown message aggregator '" + std::string(name) +
                    "' (expected none, mean, max, concatenate, weighted or adaptive)");
}

Eigen::Index combined_width(MessageAggregator kind, Eigen::Index dim, std::size_t k_pre) {
  return kind == MessageAggregator::Concatenate ? dim * static_cast<Eigen::Index>(k_pre + 1) : dim;
}

ModelParams init_params(const ModelShape& shape, Rng& rng) {
  if (shape.k_trans < 1) throw ConfigError("k_trans must be >= 1");
  if (shape.num_classes < 1 || shape.feature_dim < 1) throw ConfigError("empty model shape");
  if (shape.hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
  ModelParams p;
  p.hidden_dim = shape.hidden_dim;
  p.dropout = shape.dropout;
  p.weighted_beta = shape.weighted_beta;
  Eigen::Index fan_in = combined_width(shape.aggregator, shape.feature_dim, shape.k_pre);
  for (int l = 0; l < shape.k_trans; ++l) {
    const Eigen::Index fan_out = l + 1 == shape.k_trans ? shape.num_classes : shape.hidden_dim;
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Layer layer{Matrix(fan_in, fan_out), VectorXd::Zero(fan_out)};
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = dist(rng);
    p.layers.push_back(std::move(layer));
    fan_in = fan_out;
  }
  if (shape.aggregator == MessageAggregator::Adaptive) p.gate_s = VectorXd::Zero(shape.feature_dim);
  return p;
}

void TrainConfig::validate() const {
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(weighted_beta > 0.0 && weighted_beta < 1.0)) throw ConfigError("weighted_beta must lie in (0, 1)");
  if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void softmax_rows(Matrix& z) {
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double mx = z.row(r).maxCoeff();
    z.row(r) = (z.row(r).array() - mx).exp().matrix();
    z.row(r) /= z.row(r).sum();
  }
}

void check_labels(std::span<const std::int32_t> labels, std::span<const std::size_t> mask, Eigen::Index n,
                  Eigen::Index classes) {
  if (mask.empty()) throw ValidationError("empty mask");
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw DimensionError("label count " + std::to_string(labels.size()) + " != prediction rows " +
                         std::to_string(n));
  }
  for (auto v : mask) {
    if (static_cast<Eigen::Index>(v) >= n) throw RangeError("mask index out of range");
    if (labels[v] < 0 || labels[v] >= classes) throw RangeError("label out of range");
  }
}

}  // namespace

CombinedMessages combine_messages(MessageAggregator kind, const MessageStack& stack, const ModelParams& params) {
  if (stack.steps.empty()) throw ValidationError("empty message stack");
  const std::size_t k = stack.k();
  const Eigen::Index n = stack.num_nodes();
  const Eigen::Index d = stack.dim();
  CombinedMessages out;
  switch (kind) {
    case MessageAggregator::None:
      out.combined = stack.last();
      break;
    case MessageAggregator::Mean: {
      out.combined = stack.steps[0];
      for (std::size_t i = 1; i <= k; ++i) out.combined += stack.steps[i];
      out.combined /= static_cast<double>(k + 1);
      break;
    }
    case MessageAggregator::Max: {
      out.combined = stack.steps[0];
      out.max_step.assign(static_cast<std::size_t>(n * d), 0);
      for (std::size_t i = 1; i <= k; ++i) {
        const Matrix& m = stack.steps[i];
        for (Eigen::Index j = 0; j < m.size(); ++j) {
          // strict > keeps the earliest step on ties
          if (m.data()[j] > out.combined.data()[j]) {
            out.combined.data()[j] = m.data()[j];
            out.max_step[static_cast<std::size_t>(j)] = static_cast<Eigen::Index>(i);
          }
        }
      }
      break;
    }
    case MessageAggregator::Concatenate: {
      out.combined.resize(n, d * static_cast<Eigen::Index>(k + 1));
      for (std::size_t i = 0; i <= k; ++i) {
        out.combined.middleCols(static_cast<Eigen::Index>(i) * d, d) = stack.steps[i];
      }
      break;
    }
    case MessageAggregator::Weighted: {
      const double beta = params.weighted_beta;
      out.combined = Matrix::Zero(n, d);
      double w = beta;
      for (std::size_t i = 0; i <= k; ++i) {
        out.combined += w * stack.steps[i];
        w *= 1.0 - beta;
      }
      break;
    }
    case MessageAggregator::Adaptive: {
      if (!params.gate_s) throw ConfigError("adaptive aggregator requires a gate vector");
      const VectorXd& s = *params.gate_s;
      if (s.size() != d) throw DimensionError("gate vector length != message width");
      Matrix gates(n, static_cast<Eigen::Index>(k + 1));
      out.combined = Matrix::Zero(n, d);
      for (std::size_t i = 0; i <= k; ++i) {
        const VectorXd scores = stack.steps[i] * s;
        for (Eigen::Index v = 0; v < n; ++v) {
          const double w = sigmoid(scores[v]);
          gates(v, static_cast<Eigen::Index>(i)) = w;
          out.combined.row(v) += w * stack.steps[i].row(v);
        }
      }
      out.gates = std::move(gates);
      break;
    }
  }
  return out;
}

std::pair<Matrix, ForwardCache> mlp_forward(const ModelParams& params, const Matrix& c, bool training, Rng* rng) {
  if (params.layers.empty()) throw ConfigError("model has no layers");
  if (c.cols() != params.input_width()) {
    throw DimensionError("combined message width " + std::to_string(c.cols()) + " != layer-0 input width " +
                         std::to_string(params.input_width()));
  }
  const bool use_dropout = training && rng != nullptr && params.dropout > 0.0;
  const double keep = 1.0 - params.dropout;
  std::bernoulli_distribution keep_draw(keep);
  ForwardCache cache;
  Matrix a = c;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const Layer& layer = params.layers[l];
    Matrix z = a * layer.weight;
    z.rowwise() += layer.bias.transpose();
    cache.inputs.push_back(std::move(a));
    cache.pre_activation.push_back(z);
    if (l + 1 == params.layers.size()) {
      softmax_rows(z);
      return {std::move(z), std::move(cache)};
    }
    a = z.cwiseMax(0.0);
    if (use_dropout) {
      Matrix scale(a.rows(), a.cols());
      for (Eigen::Index i = 0; i < scale.size(); ++i) scale.data()[i] = keep_draw(*rng) ? 1.0 / keep : 0.0;
      a = a.cwiseProduct(scale);
      cache.dropout_scale.push_back(std::move(scale));
    }
  }
  return {};  // unreachable
}

namespace {

LossAndGrads backprop(const ModelParams& params, const MessageStack& stack, MessageAggregator kind,
                      const CombinedMessages& combined, std::span<const std::int32_t> labels,
                      std::span<const std::size_t> mask, double weight_decay, bool training, Rng* rng) {
  auto [probs, cache] = mlp_forward(params, combined.combined, training, rng);
  check_labels(labels, mask, probs.rows(), probs.cols());
  const double inv_m = 1.0 / static_cast<double>(mask.size());

  LossAndGrads out;
  Matrix dz = Matrix::Zero(probs.rows(), probs.cols());
  for (auto v : mask) {
    const auto row = static_cast<Eigen::Index>(v);
    out.loss -= std::log(std::max(probs(row, labels[v]), std::numeric_limits<double>::min())) * inv_m;
    dz.row(row) += probs.row(row) * inv_m;
    dz(row, labels[v]) -= inv_m;
  }
  for (const Layer& layer : params.layers) out.loss += 0.5 * weight_decay * layer.weight.squaredNorm();

  const std::size_t num_layers = params.layers.size();
  out.grads.layers.resize(num_layers);
  for (std::size_t l = num_layers; l-- > 0;) {
    const Layer& layer = params.layers[l];
    Layer& g = out.grads.layers[l];
    g.weight = cache.inputs[l].transpose() * dz + weight_decay * layer.weight;
    g.bias = dz.colwise().sum().transpose();
    Matrix da = dz * layer.weight.transpose();
    if (l == 0) {
      dz = std::move(da);  // gradient w.r.t. the combined message
      break;
    }
    if (!cache.dropout_scale.empty()) da = da.cwiseProduct(cache.dropout_scale[l - 1]);
    const Matrix& z_prev = cache.pre_activation[l - 1];
    dz = (z_prev.array() > 0.0).select(da, 0.0);
  }

  if (kind == MessageAggregator::Adaptive) {
    const Matrix& gates = *combined.gates;
    VectorXd gs = VectorXd::Zero(stack.dim());
    for (std::size_t i = 0; i <= stack.k(); ++i) {
      const Matrix& m = stack.steps[i];
      // d c_v / d s through w_vi = σ(s·m_vi): (dC_v·m_vi) w(1−w) m_vi
      const VectorXd proj = (dz.cwiseProduct(m)).rowwise().sum();
      const auto col = static_cast<Eigen::Index>(i);
      const VectorXd coeff =
          proj.cwiseProduct(gates.col(col)).cwiseProduct((1.0 - gates.col(col).array()).matrix());
      gs.noalias() += m.transpose() * coeff;
    }
    out.grads.gate_s = std::move(gs);
  }
  return out;
}

}  // namespace

LossAndGrads loss_and_grads(const ModelParams& params, const MessageStack& stack, MessageAggregator kind,
                            std::span<const std::int32_t> labels, std::span<const std::size_t> mask,
                            double weight_decay, bool training, Rng* rng) {
  if (mask.empty()) throw ValidationError("empty mask");
  const CombinedMessages combined = combine_messages(kind, stack, params);
  return backprop(params, stack, kind, combined, labels, mask, weight_decay, training, rng);
}

Matrix predict(const ModelParams& params, const MessageStack& stack, MessageAggregator kind) {
  return mlp_forward(params, combine_messages(kind, stack, params).combined, false).first;
}

std::int32_t argmax_row(const Matrix& m, Eigen::Index row) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < m.cols(); ++j) {
    if (m(row, j) > m(row, best)) best = j;
  }
  return static_cast<std::int32_t>(best);
}

double accuracy(const Matrix& predictions, std::span<const std::int32_t> labels, std::span<const std::size_t> mask) {
  if (mask.empty()) throw ValidationError("accuracy over an empty mask");
  std::size_t correct = 0;
  for (auto v : mask) {
    if (static_cast<Eigen::Index>(v) >= predictions.rows() || v >= labels.size()) {
      throw RangeError("mask index out of range");
    }
    if (argmax_row(predictions, static_cast<Eigen::Index>(v)) == labels[v]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(mask.size());
}

namespace {

Gradients zeros_like(const ModelParams& p) {
  Gradients g;
  for (const Layer& l : p.layers) {
    g.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), VectorXd::Zero(l.bias.size())});
  }
  if (p.gate_s) g.gate_s = VectorXd::Zero(p.gate_s->size());
  return g;
}

template <typename Derived, typename G>
void adam_update(Eigen::MatrixBase<Derived>& param, const G& grad, G& m, G& v, double lr, double b1, double b2,
                 double eps, double c1, double c2) {
  m = b1 * m + (1.0 - b1) * grad;
  v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
  param -= (lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps)).matrix();
}

}  // namespace

Adam::Adam(const ModelParams& like, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(zeros_like(like)), v_(zeros_like(like)) {}

void Adam::step(ModelParams& params, const Gradients& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    adam_update(params.layers[l].weight, grads.layers[l].weight, m_.layers[l].weight, v_.layers[l].weight, lr_,
                beta1_, beta2_, eps_, c1, c2);
    adam_update(params.layers[l].bias, grads.layers[l].bias, m_.layers[l].bias, v_.layers[l].bias, lr_, beta1_,
                beta2_, eps_, c1, c2);
  }
  if (params.gate_s && grads.gate_s) {
    adam_update(*params.gate_s, *grads.gate_s, *m_.gate_s, *v_.gate_s, lr_, beta1_, beta2_, eps_, c1, c2);
  }
}

namespace {

void check_splits(const Splits& splits, std::size_t n) {
  if (splits.train.empty()) throw ValidationError("empty training split");
  if (splits.val.empty()) throw ValidationError("empty validation split");
  std::vector<char> seen(n, 0);
  for (const auto* part : {&splits.train, &splits.val, &splits.test}) {
    for (auto v : *part) {
      if (v >= n) throw RangeError("split index " + std::to_string(v) + " out of range");
      if (seen[v]) throw ValidationError("splits overlap at node " + std::to_string(v));
      seen[v] = 1;
    }
  }
}

// Shared early-stopping bookkeeping for both trainers.
class EarlyStopper {
 public:
  EarlyStopper(int patience, const ModelParams& init) : patience_(patience), best_params_(init) {}

  // Returns true when training should stop after this epoch.
  bool record(int epoch, double val_acc, const ModelParams& params) {
    if (epoch == 1 || val_acc > best_acc_) {
      best_acc_ = val_acc;
      best_epoch_ = epoch;
      best_params_ = params;
    }
    return epoch - best_epoch_ >= patience_;
  }

  TrainedModel finish(std::vector<EpochRecord> log) && {
    return TrainedModel{std::move(best_params_), best_acc_, best_epoch_, std::move(log)};
  }

 private:
  int patience_;
  double best_acc_ = 0.0;
  int best_epoch_ = 0;
  ModelParams best_params_;
};

}  // namespace

TrainedModel train(const MessageStack& stack, MessageAggregator kind, std::span<const std::int32_t> labels,
                   const Splits& splits, ModelParams params, const TrainConfig& cfg) {
  cfg.validate();
  check_splits(splits, static_cast<std::size_t>(stack.num_nodes()));
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  Adam adam(params, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);

  // Only the Adaptive combination depends on trainable parameters.
  std::optional<CombinedMessages> fixed;
  if (kind != MessageAggregator::Adaptive) fixed = combine_messages(kind, stack, params);

  EarlyStopper stopper(cfg.patience, params);
  std::vector<EpochRecord> log;
  int last_finite = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    CombinedMessages adaptive;
    if (!fixed) adaptive = combine_messages(kind, stack, params);
    const CombinedMessages& combined = fixed ? *fixed : adaptive;
    LossAndGrads lg = backprop(params, stack, kind, combined, labels, splits.train, cfg.weight_decay, true, &rng);
    if (!std::isfinite(lg.loss)) throw TrainingError("training loss diverged", last_finite);
    adam.step(params, lg.grads);
    const Matrix probs =
        mlp_forward(params, fixed ? fixed->combined : combine_messages(kind, stack, params).combined, false).first;
    if (!probs.allFinite()) throw TrainingError("non-finite predictions", last_finite);
    last_finite = epoch;
    const double val_acc = accuracy(probs, labels, splits.val);
    log.push_back({epoch, lg.loss, val_acc});
    if (stopper.record(epoch, val_acc, params)) break;
  }
  return std::move(stopper).finish(std::move(log));
}

TrainedModel train_async(const MessageStack& stack, MessageAggregator kind, std::span<const std::int32_t> labels,
                         const Splits& splits, ModelParams params, const TrainConfig& cfg,
                         const AsyncTrainOptions& options) {
  cfg.validate();
  check_splits(splits, static_cast<std::size_t>(stack.num_nodes()));
  const std::size_t workers = std::max<std::size_t>(1, options.workers);
  const std::size_t batch = std::max<std::size_t>(1, options.minibatch_size);
  Rng shuffle_rng(cfg.seed ^ 0x51ed270b27e3f2a1ULL);
  Adam adam(params, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  std::mutex server;  // guards params and adam

  EarlyStopper stopper(cfg.patience, params);
  std::vector<EpochRecord> log;
  std::vector<std::size_t> order = splits.train;
  int last_finite = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const std::size_t num_batches = (order.size() + batch - 1) / batch;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> diverged{false};
    std::vector<double> batch_loss(num_batches, 0.0);
    auto work = [&] {
      for (std::size_t b = next.fetch_add(1); b < num_batches && !diverged; b = next.fetch_add(1)) {
        ModelParams snapshot;
        {
          std::lock_guard lock(server);
          snapshot = params;
        }
        Rng rng(cfg.seed + 1000003ULL * static_cast<std::uint64_t>(epoch) + b);
        const std::span<const std::size_t> mb(order.data() + b * batch, std::min(batch, order.size() - b * batch));
        LossAndGrads lg = loss_and_grads(snapshot, stack, kind, labels, mb, cfg.weight_decay, true, &rng);
        if (!std::isfinite(lg.loss)) {
          diverged = true;
          return;
        }
        batch_loss[b] = lg.loss * static_cast<double>(mb.size());
        std::lock_guard lock(server);
        adam.step(params, lg.grads);
      }
    };
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
      work();
    }
    if (diverged) throw TrainingError("training loss diverged", last_finite);
    last_finite = epoch;
    const double loss = std::accumulate(batch_loss.begin(), batch_loss.end(), 0.0) / static_cast<double>(order.size());
    const double val_acc = accuracy(predict(params, stack, kind), labels, splits.val);
    log.push_back({epoch, loss, val_acc});
    if (stopper.record(epoch, val_acc, params)) break;
  }
  return std::move(stopper).finish(std::move(log));
}

namespace {

void put_u64(std::vector<char>& buf, std::uint64_t v) {
  const char* p = reinterpret_cast<const char*>(&v);
  buf.insert(buf.end(), p, p + sizeof v);
}

void put_f64s(std::vector<char>& buf, const double* data, std::size_t count) {
  const char* p = reinterpret_cast<const char*>(data);
  buf.insert(buf.end(), p, p + count * sizeof(double));
}

class ByteCursor {
 public:
  ByteCursor(const std::vector<char>& buf, std::string name) : buf_(buf), name_(std::move(name)) {}
  void take(void* out, std::size_t n) {
    if (pos_ + n > buf_.size()) throw ValidationError(name_ + ": truncated model file");
    std::memcpy(out, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    take(&v, sizeof v);
    return v;
  }

 private:
  const std::vector<char>& buf_;
  std::string name_;
  std::size_t pos_ = 0;
};

constexpr std::string_view kModelMagic = "SGAPW1";

}  // namespace

std::vector<char> serialize_model(const ModelParams& params) {
  std::vector<char> buf(kModelMagic.begin(), kModelMagic.end());
  put_u64(buf, params.layers.size());
  for (const Layer& l : params.layers) {
    put_u64(buf, static_cast<std::uint64_t>(l.weight.rows()));
    put_u64(buf, static_cast<std::uint64_t>(l.weight.cols()));
    put_f64s(buf, l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    put_f64s(buf, l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
  const std::size_t gate_len = params.gate_s ? static_cast<std::size_t>(params.gate_s->size()) : 0;
  put_u64(buf, gate_len);
  if (gate_len > 0) put_f64s(buf, params.gate_s->data(), gate_len);
  return buf;
}

void save_model(const ModelParams& params, const std::filesystem::path& path) {
  const std::vector<char> buf = serialize_model(params);
  std::ofstream out(path, std::ios::binary);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw RuntimeFailure("cannot write " + path.string());
}

ModelParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  const std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ByteCursor cur(buf, path.string());
  std::string magic(kModelMagic.size(), '\0');
  cur.take(magic.data(), magic.size());
  if (magic != kModelMagic) throw ValidationError(path.string() + ": bad magic, expected SGAPW1");
  ModelParams p;
  const std::uint64_t layers = cur.u64();
  for (std::uint64_t l = 0; l < layers; ++l) {
    const auto rows = static_cast<Eigen::Index>(cur.u64());
    const auto cols = static_cast<Eigen::Index>(cur.u64());
    Layer layer{Matrix(rows, cols), VectorXd(cols)};
    cur.take(layer.weight.data(), static_cast<std::size_t>(layer.weight.size()) * sizeof(double));
    cur.take(layer.bias.data(), static_cast<std::size_t>(cols) * sizeof(double));
    p.layers.push_back(std::move(layer));
  }
  if (const std::uint64_t gate_len = cur.u64(); gate_len > 0) {
    VectorXd s(static_cast<Eigen::Index>(gate_len));
    cur.take(s.data(), gate_len * sizeof(double));
    p.gate_s = std::move(s);
  }
  if (p.layers.size() > 1) p.hidden_dim = static_cast<int>(p.layers.front().weight.cols());
  return p;
}

void write_epoch_log(const std::vector<EpochRecord>& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << "epoch,train_loss,val_acc\n" << std::setprecision(17);
  for (const auto& r : log) out << r.epoch << ',' << r.train_loss << ',' << r.val_acc << '\n';
}

}  // namespace sgap
