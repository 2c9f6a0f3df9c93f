#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "startext/charset.hpp"
#include "startext/model/layers.hpp"

namespace startext {

struct CorrectionLstmConfig {
  bool enabled = false;
  int hidden = 256;
  int layers = 1;
};

// Architecture hyperparameters. The default is the desk-scale configuration;
// larger stacks are expressed by widening the channel lists.
struct StarNetConfig {
  int input_w = 150, input_h = 48;
  int warped_w = 100, warped_h = 32;
  std::vector<int> loc_channels = {16, 32, 32};  // stride-2 convs in the localization net
  int loc_fc_hidden = 64;
  std::vector<int> feat_channels = {64, 128, 256};  // residual block widths
  int seq_hidden = 256;
  int num_classes = 2;  // |charset| + 1
  CorrectionLstmConfig correction_lstm;

  // Width downsampling is two 2x2 pools; T is the resulting sequence length.
  int time_steps() const { return warped_w / 4; }

  void validate() const;
  std::string to_json() const;
  static StarNetConfig from_json(const std::string& json_text);
};

// Residual block: conv-bn-relu-conv-bn + (projected) skip, relu.
struct ResidualBlock {
  ResidualBlock() = default;
  ResidualBlock(int64_t in_ch, int64_t out_ch, CounterRng& rng);

  Tensor forward(const Tensor& x, bool training);
  Tensor backward(const Tensor& dy);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);

  Conv2d conv1, conv2, proj;
  BatchNorm2d bn1, bn2, bn_proj;
  Relu relu1, relu2;
  bool has_proj = false;

 private:
  Tensor skip_cache_;
};

// Desk-scale STAR-Net: localization net + affine warp, residual feature
// extractor collapsing height to a T-step sequence, BiLSTM encoder, optional
// correction LSTM, and a linear class projection producing CTC logits.
class StarNet {
 public:
  StarNet(const StarNetConfig& config, uint64_t seed);

  const StarNetConfig& config() const { return config_; }

  // images: [N,1,input_h,input_w], normalized (see normalize_image).
  // Returns logits [T,N,num_classes].
  Tensor forward(const Tensor& images, bool training);
  // dlogits: [T,N,num_classes]; accumulates parameter gradients.
  void backward(const Tensor& dlogits);

  // The individual stages, exposed for tests and partial pipelines.
  Tensor localize(const Tensor& images, bool training);       // -> theta [N,6]
  Tensor warp(const Tensor& images, const Tensor& theta);     // -> [N,1,warped_h,warped_w]
  Tensor extract_features(const Tensor& warped, bool training);  // -> [T,N,C]
  Tensor encode_sequence(const Tensor& features, bool training);  // -> logits [T,N,K]

  // Adds the correction LSTM (freshly initialized) and re-initializes the
  // class projection for the new width. All other parameters are untouched.
  // Throws ValidationError if already attached.
  void attach_correction_lstm(uint64_t seed);

  std::vector<ParamRef> parameters();
  void zero_grad();
  int64_t parameter_count();

 private:
  void build(uint64_t seed);

  StarNetConfig config_;

  std::vector<Conv2d> loc_convs_;
  std::vector<Relu> loc_relus_;
  Linear loc_fc1_, loc_fc2_;
  Relu loc_fc_relu_;

  Conv2d stem_;
  BatchNorm2d stem_bn_;
  Relu stem_relu_;
  std::vector<ResidualBlock> blocks_;
  std::vector<MaxPool2d> pools_;

  Lstm lstm_fwd_, lstm_bwd_;
  std::optional<Lstm> correction_;
  Linear proj_;

  // forward caches for backward
  Tensor images_cache_, theta_cache_, warped_cache_, feat_seq_cache_;
  Tensor bilstm_out_cache_;
  Tensor feat_map_cache_;  // [N,C,1,W] pre-transpose
  bool training_cache_ = false;
};

// Grayscale pixels 0..255 -> [(v/255)-0.5]/0.5, shape [1,H,W] stacked by caller.
Tensor normalize_image(const std::vector<uint8_t>& pixels);

// Per-timestep argmax (ties toward the lowest class index), CTC collapse,
// then charset decode. logits: [T,K].
std::string greedy_decode(const Tensor& logits, const Charset& charset);

// Convenience slice: logits[T,N,K] -> sample n as [T,K].
Tensor slice_sample(const Tensor& logits, int64_t n);

}  // namespace startext
