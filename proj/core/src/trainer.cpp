#include "kgamc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "kgamc/error.hpp"
#include "kgamc/nn/ops.hpp"
#include "kgamc/parallel.hpp"

namespace kgamc::trainer {
namespace {

constexpr std::uint64_t kMsnetStream = 1;
constexpr std::uint64_t kClassifierStream = 2;
constexpr std::uint64_t kRgcnStream = 3;
constexpr std::uint64_t kShuffleStream = 4;

template <typename T>
int argmax_row(const T* row, std::size_t n) {
  return static_cast<int>(std::max_element(row, row + n) - row);
}

void check_compatible(const Dataset& a, const Dataset& b) {
  if (a.frame_len != b.frame_len) {
    throw ConfigError("train/test frame lengths differ: " + std::to_string(a.frame_len) + " vs " +
                      std::to_string(b.frame_len));
  }
  if (a.class_names != b.class_names) throw ConfigError("train/test class tables differ");
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0 || batch_size == 0 || d == 0 || step_epochs == 0) {
    throw ConfigError("epochs, batch size, d and step epochs must be positive");
  }
  if (!(lr_msnet > 0) || !(lr_rgcn > 0)) throw ConfigError("learning rates must be positive");
  if (lr_rgcn > lr_msnet) {
    throw ConfigError("lr_rgcn (" + std::to_string(lr_rgcn) + ") must not exceed lr_msnet (" +
                      std::to_string(lr_msnet) + ")");
  }
  if (!(weight_decay >= 0) || !(step_factor > 0) || !(lambda >= 0) || !std::isfinite(lambda)) {
    throw ConfigError("weight decay, step factor and lambda must be finite and non-negative");
  }
}

double lr_schedule(std::size_t epoch, const TrainConfig& cfg) {
  return std::pow(cfg.step_factor, static_cast<double>(epoch / cfg.step_epochs));
}

template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v,
                 double lr, double weight_decay, std::size_t t) {
  if (t == 0) throw ConfigError("adam step count starts at 1");
  if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size()) {
    throw ShapeError("adam_update: parameter, gradient and moment sizes differ");
  }
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t));
  const T b1 = static_cast<T>(kAdamBeta1), b2 = static_cast<T>(kAdamBeta2);
  const T decay = static_cast<T>(lr * weight_decay);
  const T step = static_cast<T>(lr / c1);
  const T inv_c2 = static_cast<T>(1.0 / c2);
  const T eps = static_cast<T>(kAdamEpsilon);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const T g = grad[i];
    param[i] -= decay * param[i];
    m[i] = b1 * m[i] + (T{1} - b1) * g;
    v[i] = b2 * v[i] + (T{1} - b2) * g * g;
    param[i] -= step * m[i] / (std::sqrt(v[i] * inv_c2) + eps);
  }
}

template <typename T>
AdamMoments<T> AdamMoments<T>::zeros_like(const nn::ParamList<T>& params) {
  AdamMoments out;
  for (const auto& p : params) {
    out.m.emplace_back(p.var.shape());
    out.v.emplace_back(p.var.shape());
  }
  return out;
}

template <typename T>
void adam_step(nn::ParamList<T>& params, AdamMoments<T>& moments, double lr, double weight_decay,
               std::size_t t) {
  if (moments.m.size() != params.size() || moments.v.size() != params.size()) {
    throw StateError("optimizer moments do not match the parameter list");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& var = params[i].var;
    const auto g = var.grad();
    adam_update<T>(var.mutable_value().values(), g.values(), moments.m[i].values(),
                   moments.v[i].values(), lr, weight_decay, t);
  }
}

template <typename T>
ModelState<T> ModelState<T>::initialize(const TrainConfig& train_cfg,
                                        const msnet::MsnetConfig& msnet_cfg,
                                        const rgcn::RgcnConfig& rgcn_cfg,
                                        std::vector<std::string> class_names) {
  train_cfg.validate();
  if (msnet_cfg.num_classes != class_names.size()) {
    throw ConfigError("classifier width " + std::to_string(msnet_cfg.num_classes) + " for " +
                      std::to_string(class_names.size()) + " classes");
  }
  if (msnet_cfg.feature_dim != rgcn_cfg.out_dim) {
    throw ConfigError("signal feature and anchor dimensions differ");
  }
  ModelState s;
  s.train_config = train_cfg;
  s.msnet_config = msnet_cfg;
  s.rgcn_config = rgcn_cfg;
  s.class_names = std::move(class_names);
  s.msnet = msnet::MsnetParams<T>::init(msnet_cfg, derive_seed(train_cfg.seed, kMsnetStream));
  s.classifier =
      msnet::ClassifierParams<T>::init(msnet_cfg, derive_seed(train_cfg.seed, kClassifierStream));
  s.rgcn = rgcn::RgcnParams<T>::init(rgcn_cfg, derive_seed(train_cfg.seed, kRgcnStream));
  s.msnet_moments = AdamMoments<T>::zeros_like(s.msnet_parameters());
  s.rgcn_moments = AdamMoments<T>::zeros_like(s.rgcn_parameters());
  return s;
}

template <typename T>
nn::ParamList<T> ModelState<T>::msnet_parameters() const {
  auto out = msnet.parameters();
  for (auto& p : classifier.parameters()) out.push_back(std::move(p));
  return out;
}

template <typename T>
double anchor_mean_cosine(const nn::Tensor<T>& anchors) {
  if (anchors.rank() != 2 || anchors.dim(0) < 2) {
    throw ShapeError("anchor_mean_cosine: need at least two anchor rows");
  }
  const std::size_t m = anchors.dim(0), d = anchors.dim(1);
  std::vector<double> norms(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0;
    for (std::size_t k = 0; k < d; ++k) s += double(anchors[i * d + k]) * anchors[i * d + k];
    norms[i] = std::sqrt(s);
  }
  double total = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j || norms[i] <= nn::kNormEpsilon || norms[j] <= nn::kNormEpsilon) continue;
      double dot = 0;
      for (std::size_t k = 0; k < d; ++k) dot += double(anchors[i * d + k]) * anchors[j * d + k];
      total += dot / (norms[i] * norms[j]);
    }
  }
  return total / static_cast<double>(m * (m - 1));
}

template <typename T>
TrainResult<T> train(const Dataset& train_ds, const Dataset& test_ds, const mkg::HeteroGraph& graph,
                     const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  train_ds.validate();
  if (train_ds.frames.empty()) throw ConfigError("training set is empty");
  if (train_ds.num_classes() < 2) throw ConfigError("training needs at least two classes");
  if (!test_ds.frames.empty()) check_compatible(train_ds, test_ds);
  const auto anchor_nodes = mkg::anchors(graph, train_ds.class_names);

  msnet::MsnetConfig msnet_cfg;
  msnet_cfg.frame_len = train_ds.frame_len;
  msnet_cfg.feature_dim = cfg.d;
  msnet_cfg.num_classes = train_ds.num_classes();
  rgcn::RgcnConfig rgcn_cfg;
  rgcn_cfg.in_dim = mkg::feature_width(graph.num_nodes());
  rgcn_cfg.out_dim = cfg.d;

  TrainResult<T> result{ModelState<T>::initialize(cfg, msnet_cfg, rgcn_cfg, train_ds.class_names),
                        {}};
  auto& state = result.state;
  auto msnet_params = state.msnet_parameters();
  auto rgcn_params = state.rgcn_parameters();
  const auto ops = rgcn::GraphOperators<T>::build(graph);
  const auto node_features = nn::constant(mkg::init_node_features<T>(graph));

  const std::size_t n = train_ds.frames.size();
  const std::size_t num_classes = train_ds.num_classes();
  std::vector<std::size_t> order(n);
  std::vector<int> batch_labels;
  nn::Tensor<T> last_anchors;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double factor = lr_schedule(epoch, cfg);
    const double lr_m = cfg.lr_msnet * factor;
    const double lr_r = cfg.lr_rgcn * factor;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(cfg.seed, kShuffleStream, epoch));
    std::shuffle(order.begin(), order.end(), rng);

    loss::LossBreakdown sum;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, n - start);
      const std::span<const std::size_t> idx(order.data() + start, count);
      batch_labels.resize(count);
      for (std::size_t k = 0; k < count; ++k) batch_labels[k] = train_ds.frames[idx[k]].label;

      nn::Var<T> anchors;
      if (cfg.lambda == 0.0) {
        nn::NoGradGuard guard;
        anchors = rgcn::semantic_anchors(rgcn::rgcn_forward(ops, node_features, state.rgcn),
                                         anchor_nodes);
      } else {
        anchors = rgcn::semantic_anchors(rgcn::rgcn_forward(ops, node_features, state.rgcn),
                                         anchor_nodes);
      }
      const auto x = nn::constant(
          msnet::frames_to_input<T>(train_ds.frames, idx, train_ds.frame_len));
      const auto features = msnet::msnet_forward(x, state.msnet);
      const auto logits = msnet::classify(features, state.classifier);
      loss::LossBreakdown br;
      const auto total = loss::joint_loss(features, anchors, logits, batch_labels, cfg.lambda, &br);

      nn::zero_grads(msnet_params);
      nn::zero_grads(rgcn_params);
      nn::backward(total);
      ++state.step;
      adam_step(msnet_params, state.msnet_moments, lr_m, cfg.weight_decay, state.step);
      adam_step(rgcn_params, state.rgcn_moments, lr_r, cfg.weight_decay, state.step);
      if (hooks.on_step) hooks.on_step(state.step, br);

      const auto& lv = logits.value();
      for (std::size_t k = 0; k < count; ++k) {
        correct += argmax_row(lv.data.data() + k * num_classes, num_classes) == batch_labels[k];
      }
      const double w = static_cast<double>(count);
      sum.l_ce += br.l_ce * w;
      sum.l_npair += br.l_npair * w;
      sum.l_penalty += br.l_penalty * w;
      sum.l_total += br.l_total * w;
      last_anchors = anchors.value();
    }
    state.epoch = epoch + 1;

    EpochRecord rec;
    rec.epoch = epoch + 1;
    const double inv = 1.0 / static_cast<double>(n);
    rec.mean = {sum.l_ce * inv, sum.l_npair * inv, sum.l_penalty * inv, sum.l_total * inv,
                cfg.lambda};
    rec.train_acc = static_cast<double>(correct) * inv;
    rec.test_acc = std::numeric_limits<double>::quiet_NaN();
    if (!test_ds.frames.empty()) {
      const auto pred = infer<T>(test_ds.frames, state, InferMode::classifier);
      std::size_t hits = 0;
      for (std::size_t k = 0; k < pred.labels.size(); ++k) {
        hits += pred.labels[k] == test_ds.frames[k].label;
      }
      rec.test_acc = static_cast<double>(hits) / static_cast<double>(pred.labels.size());
    }
    rec.anchor_mean_cos = anchor_mean_cosine(last_anchors);
    rec.lr_msnet = lr_m;
    rec.lr_rgcn = lr_r;
    result.history.epochs.push_back(rec);
    if (hooks.on_epoch) hooks.on_epoch(rec);
  }
  state.anchors = std::move(last_anchors);
  return result;
}

InferMode parse_infer_mode(const std::string& name) {
  if (name == "classifier") return InferMode::classifier;
  if (name == "anchor") return InferMode::anchor;
  throw ConfigError("unknown inference mode '" + name + "' (expected classifier or anchor)");
}

template <typename T>
Inference infer(std::span<const SignalFrame> frames, const ModelState<T>& state, InferMode mode,
                std::size_t batch_size) {
  if (mode == InferMode::anchor && !state.anchors) {
    throw StateError("anchor-mode inference needs frozen anchors; the model was never trained");
  }
  if (batch_size == 0) batch_size = 1;
  nn::NoGradGuard guard;
  const std::size_t n = frames.size();
  const std::size_t d = state.msnet_config.feature_dim;
  const std::size_t m = state.class_names.size();
  Inference out;
  out.dim = d;
  out.num_classes = m;
  out.labels.resize(n);
  out.features.resize(n * d);
  out.scores.resize(n * m);
  nn::Var<T> anchors;
  if (mode == InferMode::anchor) anchors = nn::constant(*state.anchors);
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t count = std::min(batch_size, n - start);
    idx.resize(count);
    std::iota(idx.begin(), idx.end(), start);
    const auto x = nn::constant(msnet::frames_to_input<T>(frames, idx, state.msnet_config.frame_len));
    const auto features = msnet::msnet_forward(x, state.msnet);
    const auto similarity = mode == InferMode::classifier
                                ? msnet::classify(features, state.classifier)
                                : nn::cosine_matrix(features, anchors);
    const auto probs = nn::softmax(similarity);
    const auto& sv = similarity.value();
    for (std::size_t k = 0; k < count; ++k) {
      out.labels[start + k] = argmax_row(sv.data.data() + k * m, m);
    }
    std::copy(features.value().data.begin(), features.value().data.end(),
              out.features.begin() + static_cast<std::ptrdiff_t>(start * d));
    std::copy(probs.value().data.begin(), probs.value().data.end(),
              out.scores.begin() + static_cast<std::ptrdiff_t>(start * m));
  }
  return out;
}

#define KGAMC_INSTANTIATE_TRAINER(T)                                                           \
  template void adam_update(std::span<T>, std::span<const T>, std::span<T>, std::span<T>,     \
                            double, double, std::size_t);                                      \
  template struct AdamMoments<T>;                                                              \
  template void adam_step(nn::ParamList<T>&, AdamMoments<T>&, double, double, std::size_t);    \
  template struct ModelState<T>;                                                               \
  template double anchor_mean_cosine(const nn::Tensor<T>&);                                    \
  template TrainResult<T> train(const Dataset&, const Dataset&, const mkg::HeteroGraph&,       \
                                const TrainConfig&, const TrainHooks&);                        \
  template Inference infer(std::span<const SignalFrame>, const ModelState<T>&, InferMode,      \
                           std::size_t);

KGAMC_INSTANTIATE_TRAINER(float)
KGAMC_INSTANTIATE_TRAINER(double)

}  // namespace kgamc::trainer
