#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kgamc/dataset.hpp"
#include "kgamc/loss.hpp"
#include "kgamc/mkg.hpp"
#include "kgamc/msnet.hpp"
#include "kgamc/rgcn.hpp"

namespace kgamc::trainer {

struct TrainConfig {
  std::size_t epochs = 80;
  std::size_t batch_size = 1024;
  double lr_msnet = 1e-3;  // also used by the classifier head
  double lr_rgcn = 1e-6;
  double weight_decay = 5e-4;
  std::size_t step_epochs = 5;
  double step_factor = 0.8;
  double lambda = 0.2;
  std::size_t d = 128;
  std::uint64_t seed = 0;

  // Throws ConfigError on non-positive rates or sizes, or lr_rgcn > lr_msnet.
  void validate() const;
};

// step_factor ^ floor(epoch / step_epochs).
double lr_schedule(std::size_t epoch, const TrainConfig& cfg);

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

// One Adam update of a flat parameter block, t >= 1:
//   p -= lr * wd * p
//   m = b1 m + (1 - b1) g;  v = b2 v + (1 - b2) g^2
//   p -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v,
                 double lr, double weight_decay, std::size_t t);

template <typename T>
struct AdamMoments {
  std::vector<nn::Tensor<T>> m, v;  // aligned with the parameter list

  static AdamMoments zeros_like(const nn::ParamList<T>& params);
};

// Applies adam_update to every parameter using its accumulated gradient.
template <typename T>
void adam_step(nn::ParamList<T>& params, AdamMoments<T>& moments, double lr, double weight_decay,
               std::size_t t);

template <typename T>
struct ModelState {
  TrainConfig train_config;
  msnet::MsnetConfig msnet_config;
  rgcn::RgcnConfig rgcn_config;
  std::vector<std::string> class_names;

  msnet::MsnetParams<T> msnet;
  msnet::ClassifierParams<T> classifier;
  rgcn::RgcnParams<T> rgcn;
  AdamMoments<T> msnet_moments;  // msnet then classifier parameters
  AdamMoments<T> rgcn_moments;

  std::size_t epoch = 0;  // completed epochs
  std::size_t step = 0;   // completed optimizer steps
  std::optional<nn::Tensor<T>> anchors;  // M x d, captured at the end of training

  // Fresh initialization from the configs; requires class_names and configs set.
  static ModelState initialize(const TrainConfig& train_cfg, const msnet::MsnetConfig& msnet_cfg,
                               const rgcn::RgcnConfig& rgcn_cfg,
                               std::vector<std::string> class_names);

  // MSNet parameters followed by the classifier head.
  nn::ParamList<T> msnet_parameters() const;
  nn::ParamList<T> rgcn_parameters() const { return rgcn.parameters(); }
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  loss::LossBreakdown mean;
  double train_acc = 0;
  double test_acc = 0;  // NaN without a test set
  double anchor_mean_cos = 0;
  double lr_msnet = 0;
  double lr_rgcn = 0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

template <typename T>
struct TrainResult {
  ModelState<T> state;
  TrainHistory history;
};

struct TrainHooks {
  std::function<void(const EpochRecord&)> on_epoch;
  // Called after every optimizer step with that step's loss terms.
  std::function<void(std::size_t step, const loss::LossBreakdown&)> on_step;
};

// Joint training of RGCN, MSNet and classifier. Each step runs the whole-graph
// RGCN once for the anchors, MSNet on the batch, the joint loss, backward and
// two Adam updates with the separately scheduled rates. test may be empty.
template <typename T>
TrainResult<T> train(const Dataset& train_ds, const Dataset& test_ds, const mkg::HeteroGraph& graph,
                     const TrainConfig& cfg, const TrainHooks& hooks = {});

// Mean pairwise cosine over distinct anchor rows.
template <typename T>
double anchor_mean_cosine(const nn::Tensor<T>& anchors);

enum class InferMode { classifier, anchor };

InferMode parse_infer_mode(const std::string& name);

struct Inference {
  std::vector<int> labels;
  std::vector<float> features;  // N x d
  std::vector<float> scores;    // N x M softmax scores
  std::size_t dim = 0;
  std::size_t num_classes = 0;
};

// MSNet-only prediction. classifier: argmax of the head's logits; anchor:
// argmax cosine against the frozen anchors (StateError if none). Never runs the graph.
template <typename T>
Inference infer(std::span<const SignalFrame> frames, const ModelState<T>& state,
                InferMode mode = InferMode::classifier, std::size_t batch_size = 512);

// KGMC checkpoint, all integers little-endian:
//   char[4] "KGMC", u16 version, u32 length + JSON config echo,
//   u32 blob count, per blob: u16 name length, name, u8 rank, rank x u32 dims, float32 data.
// Blobs: every parameter, "adam.m.<name>", "adam.v.<name>", and "anchors" when frozen.
inline constexpr std::uint16_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize_checkpoint(const ModelState<float>& state);
ModelState<float> deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const ModelState<float>& state, const std::filesystem::path& path);
ModelState<float> load_checkpoint(const std::filesystem::path& path);

// JSON objects shared by the checkpoint echo, the CLI manifest and the training log.
std::string config_json(const ModelState<float>& state);
std::string epoch_json(const EpochRecord& record);

}  // namespace kgamc::trainer
