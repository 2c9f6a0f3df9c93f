#include "startext/model/starnet.hpp"

#include <cmath>

#include "json.hpp"
#include "startext/core/error.hpp"
#include "startext/core/io.hpp"

namespace startext {

namespace K = kernels;

void StarNetConfig::validate() const {
  if (num_classes < 2) throw ValidationError("num_classes must be at least 2 (blank + 1 symbol)");
  if (input_w <= 0 || input_h <= 0 || warped_w <= 0 || warped_h <= 0)
    throw ValidationError("image dimensions must be positive");
  if (loc_channels.empty() || loc_fc_hidden <= 0)
    throw ValidationError("localization net needs at least one conv and a hidden layer");
  if (feat_channels.size() < 2 || feat_channels.size() > 4)
    throw ValidationError("feature extractor expects 2..4 residual blocks");
  if (warped_w % 4 != 0)
    throw ValidationError("warped width must be divisible by 4 (two 2x2 pools)");
  if (warped_h % (1 << feat_channels.size()) != 0)
    throw ValidationError("warped height must be divisible by 2^num_blocks");
  if (seq_hidden <= 0) throw ValidationError("seq_hidden must be positive");
  if (correction_lstm.enabled && (correction_lstm.hidden != 256 || correction_lstm.layers != 1))
    throw ValidationError("correction LSTM is fixed at 1 layer of 256 units");
}

std::string StarNetConfig::to_json() const {
  nlohmann::json j;
  j["input_size"] = {input_w, input_h};
  j["warped_size"] = {warped_w, warped_h};
  j["loc_channels"] = loc_channels;
  j["loc_fc_hidden"] = loc_fc_hidden;
  j["feat_channels"] = feat_channels;
  j["seq_hidden"] = seq_hidden;
  j["num_classes"] = num_classes;
  j["correction_lstm"] = {{"enabled", correction_lstm.enabled},
                          {"hidden", correction_lstm.hidden},
                          {"layers", correction_lstm.layers}};
  return j.dump(2);
}

StarNetConfig StarNetConfig::from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model config parse error: ") + e.what());
  }
  StarNetConfig c;
  if (j.contains("input_size")) {
    c.input_w = j["input_size"][0].get<int>();
    c.input_h = j["input_size"][1].get<int>();
  }
  if (j.contains("warped_size")) {
    c.warped_w = j["warped_size"][0].get<int>();
    c.warped_h = j["warped_size"][1].get<int>();
  }
  c.loc_channels = j.value("loc_channels", c.loc_channels);
  c.loc_fc_hidden = j.value("loc_fc_hidden", c.loc_fc_hidden);
  c.feat_channels = j.value("feat_channels", c.feat_channels);
  c.seq_hidden = j.value("seq_hidden", c.seq_hidden);
  c.num_classes = j.value("num_classes", c.num_classes);
  if (j.contains("correction_lstm")) {
    const auto& cj = j["correction_lstm"];
    c.correction_lstm.enabled = cj.value("enabled", false);
    c.correction_lstm.hidden = cj.value("hidden", 256);
    c.correction_lstm.layers = cj.value("layers", 1);
  }
  c.validate();
  return c;
}

ResidualBlock::ResidualBlock(int64_t in_ch, int64_t out_ch, CounterRng& rng)
    : conv1(in_ch, out_ch, 3, 1, 1, rng),
      conv2(out_ch, out_ch, 3, 1, 1, rng),
      bn1(out_ch),
      bn2(out_ch),
      has_proj(in_ch != out_ch) {
  if (has_proj) {
    proj = Conv2d(in_ch, out_ch, 1, 1, 0, rng);
    bn_proj = BatchNorm2d(out_ch);
  }
}

Tensor ResidualBlock::forward(const Tensor& x, bool training) {
  Tensor main = relu1.forward(bn1.forward(conv1.forward(x), training));
  main = bn2.forward(conv2.forward(main), training);
  Tensor skip = has_proj ? bn_proj.forward(proj.forward(x), training) : x;
  skip_cache_ = skip;
  for (int64_t i = 0; i < main.numel(); ++i) main[i] += skip[i];
  return relu2.forward(main);
}

Tensor ResidualBlock::backward(const Tensor& dy) {
  Tensor dsum = relu2.backward(dy);
  Tensor dx_main = conv1.backward(bn1.backward(relu1.backward(conv2.backward(bn2.backward(dsum)))));
  Tensor dx_skip = has_proj ? proj.backward(bn_proj.backward(dsum)) : std::move(dsum);
  for (int64_t i = 0; i < dx_main.numel(); ++i) dx_main[i] += dx_skip[i];
  return dx_main;
}

void ResidualBlock::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  conv1.collect(prefix + ".conv1", out);
  bn1.collect(prefix + ".bn1", out);
  conv2.collect(prefix + ".conv2", out);
  bn2.collect(prefix + ".bn2", out);
  if (has_proj) {
    proj.collect(prefix + ".proj", out);
    bn_proj.collect(prefix + ".bn_proj", out);
  }
}

}  // namespace startext
