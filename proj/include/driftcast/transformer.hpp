#pragma once

// Sequence-to-sequence Transformer forecaster: one encoder block (multi-head
// self-attention + FFN) and one decoder block (masked self-attention,
// cross-attention, FFN), sinusoidal positional encoding, linear head.

#include <cstdint>
#include <vector>

#include "driftcast/dataset.hpp"
#include "driftcast/mat.hpp"
#include "driftcast/tensor.hpp"
#include "driftcast/training.hpp"

namespace driftcast {

// PE(t, 2i) = sin(t / 10000^(2i/d_m)), PE(t, 2i+1) = cos(same). d_m must be even.
Mat positional_encoding(std::size_t steps, std::size_t d_m);

struct TransformerConfig {
  std::size_t input_dim = 399;
  std::size_t d_m = 64;
  std::size_t ffn = 128;
  std::size_t heads = 4;
  std::size_t d_k = 16;  // per-head width of the self-attentions
  // The decoder FFN carries a residual connection; the encoder FFN does not
  // unless this switch is set.
  bool encoder_ffn_residual = false;
  std::uint64_t seed = 1;
};

class Seq2SeqTransformer {
 public:
  explicit Seq2SeqTransformer(const TransformerConfig& cfg);

  TrainHistory train(const std::vector<SequenceExample>& examples, const TrainConfig& cfg);

  // Autoregressive inference: l_d decoder passes, feeding predictions back.
  Mat forecast(const Mat& x_e, std::size_t l_d) const;

  // Teacher-forced decode for a single example.
  Mat decode_teacher_forced(const Mat& x_e, const Mat& y_d) const;

  // Encoder output Z1 for a single example (l_e x d_m).
  Mat encoder_block(const Mat& x_e) const;

  TensorPtr batch_loss(const std::vector<const SequenceExample*>& batch) const;

  const TransformerConfig& config() const { return cfg_; }
  bool trained() const { return trained_; }
  void set_trained(bool t) { trained_ = t; }
  std::vector<TensorPtr>& params() { return params_; }
  const std::vector<TensorPtr>& params() const { return params_; }
  std::vector<std::string> param_names() const;

 private:
  struct LayerNormParams {
    TensorPtr gain, offset;
  };
  struct HeadParams {
    TensorPtr wq, wk, wv;
  };

  TensorPtr norm(const TensorPtr& x, const LayerNormParams& ln) const;
  TensorPtr self_attention(const TensorPtr& z, const std::vector<HeadParams>& heads,
                           const TensorPtr& wh, bool causal) const;
  TensorPtr encode_graph(const Mat& x_e) const;
  TensorPtr decode_graph(const TensorPtr& z1, const TensorPtr& y_d) const;

  TransformerConfig cfg_;

  TensorPtr we_, be_;  // input embedding p -> d_m
  LayerNormParams ln_e0_, ln_e1_, ln_e2_;
  std::vector<HeadParams> enc_heads_;
  TensorPtr enc_wh_;
  TensorPtr enc_w3_, enc_b3_, enc_w2_, enc_b2_;  // FFN d_m -> f -> d_m

  TensorPtr wd_, bd_;  // output-side embedding 2 -> d_m
  LayerNormParams ln_d0_, ln_d1_, ln_d2_, ln_d3_;
  std::vector<HeadParams> dec_heads_;
  TensorPtr dec_wh_;
  TensorPtr wq2_, wk2_, wv2_, whd_;  // single-head cross attention at width d_m
  TensorPtr dec_w1_, dec_b1_, dec_w2_, dec_b2_;
  TensorPtr wp_, bp_;  // head d_m -> 2

  std::vector<TensorPtr> params_;
  bool trained_ = false;
};

}  // namespace driftcast
