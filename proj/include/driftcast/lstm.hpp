#pragma once

// Sequence-to-sequence LSTM forecaster: two-layer encoder, one-layer decoder
// with teacher forcing, and an optional scaled dot-product attention over the
// encoder states.

#include <cstdint>
#include <vector>

#include "driftcast/dataset.hpp"
#include "driftcast/mat.hpp"
#include "driftcast/tensor.hpp"
#include "driftcast/training.hpp"

namespace driftcast {

// Combined-gate layout: columns [i | f | o | c~], each `units` wide.
struct LstmLayerParams {
  TensorPtr wx;  // input_dim x 4*units
  TensorPtr uh;  // units x 4*units
  TensorPtr b;   // 1 x 4*units, forget-gate block initialized to +1
  std::size_t units = 0;
};

LstmLayerParams make_lstm_layer(std::size_t input_dim, std::size_t units, Rng& rng);

// One step: gates = x*Wx + h*Uh + b; i,f,o sigmoid, c~ tanh;
// c = f.c_prev + i.c~; h = o.tanh(c). Returns {h, c}.
std::pair<TensorPtr, TensorPtr> lstm_cell(const LstmLayerParams& layer, const TensorPtr& x,
                                          const TensorPtr& h_prev, const TensorPtr& c_prev);

class Seq2SeqLstm {
 public:
  Seq2SeqLstm(std::size_t input_dim, bool attention, std::uint64_t seed,
              std::size_t units = 64, std::size_t d_k = 32);

  TrainHistory train(const std::vector<SequenceExample>& examples, const TrainConfig& cfg);

  // Autoregressive inference: decoder starts from the zero token and feeds
  // back its own predictions.
  Mat forecast(const Mat& x_e, std::size_t l_d) const;

  // Diagnostic teacher-forced decode (ground-truth decoder inputs).
  Mat decode_teacher_forced(const Mat& x_e, const Mat& y_d) const;

  // Single-example encoder states, one row per timestep (second layer).
  Mat encode_states(const Mat& x_e) const;

  struct DecodeResult {
    Mat predictions;  // l_d x 2
    Mat attention;    // l_d x l_e (empty without attention)
  };
  DecodeResult decode_with_attention(const Mat& x_e, const Mat& y_d) const;

  // Teacher-forced MSE over a batch; also the graph the gradient-check
  // tests rebuild.
  TensorPtr batch_loss(const std::vector<const SequenceExample*>& batch) const;

  bool attention() const { return attention_; }
  bool trained() const { return trained_; }
  void set_trained(bool t) { trained_ = t; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t units() const { return units_; }
  std::size_t d_k() const { return d_k_; }
  std::vector<TensorPtr>& params() { return params_; }
  const std::vector<TensorPtr>& params() const { return params_; }
  std::vector<std::string> param_names() const;

 private:
  struct Encoded {
    std::vector<TensorPtr> states;  // per timestep, batch x units (layer 2)
    TensorPtr h1, c1, h2, c2;       // final states per layer
  };
  Encoded encode_batch(const std::vector<const Mat*>& batch) const;
  // Teacher-forced decode over a batch; returns per-step outputs (batch x 2)
  // and optionally per-step attention rows.
  std::vector<TensorPtr> decode_batch(const Encoded& enc,
                                      const std::vector<const Mat*>& y_d,
                                      std::vector<TensorPtr>* attn_rows = nullptr) const;
  TensorPtr output_step(const TensorPtr& h3, const Encoded& enc,
                        TensorPtr* attn_row) const;

  std::size_t input_dim_, units_, d_k_;
  bool attention_;
  LstmLayerParams enc1_, enc2_, dec_;
  TensorPtr wq_, wk_, wv_;  // units x d_k (attention variant only)
  TensorPtr w_out_, b_out_;
  std::vector<TensorPtr> params_;
  bool trained_ = false;
};

}  // namespace driftcast
