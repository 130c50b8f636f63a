#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aggnet/corpus.hpp"
#include "aggnet/numerics.hpp"

namespace aggnet {

struct ModelConfig {
    std::size_t embed_dim = 100;
    std::size_t hidden_dim = 100;
    std::size_t num_classes = 3;
    double dropout_rate = 0.3;
    double learning_rate = 0.001;
    std::optional<std::size_t> max_len;  // truncate inputs to this many tokens
    std::size_t epochs = 10;
    std::uint64_t seed = 42;
    double init_scale = 0.08;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double grad_clip_norm = 0.0;  // 0 disables clipping

    void validate() const;
};

/// Consecutive epochs without a dev improvement before training stops.
constexpr std::size_t kEarlyStopPatience = 3;

/// Gate weights of one LSTM cell: W_* act on the input, U_* on the
/// recurrent state, b_* are biases.
struct LstmParams {
    Matrix W_f, W_i, W_o, W_c;  // hidden_dim x embed_dim
    Matrix U_f, U_i, U_o, U_c;  // hidden_dim x hidden_dim
    Vector b_f, b_i, b_o, b_c;  // hidden_dim
};

struct LstmState {
    Vector h;  // output vector
    Vector c;  // cell state
};

struct AttentionParams {
    Vector w_a;  // hidden_dim
};

struct DenseParams {
    Matrix W_d;  // num_classes x hidden_dim
    Vector b_d;  // num_classes
};

struct ModelParams {
    Matrix embedding;  // vocab_size x embed_dim
    LstmParams lstm;
    AttentionParams attn;
    DenseParams dense;
};

/// Named view over every tensor of a parameter set, in a fixed order.
/// Shared by the optimizer, the serializer and the gradient checker.
struct TensorRef {
    std::string name;
    std::vector<double>* data;
    std::vector<std::size_t> dims;
};

std::vector<TensorRef> tensor_refs(ModelParams& params);

struct AdamState {
    ModelParams m;  // first moments, same shapes as the parameters
    ModelParams v;  // second moments
    std::uint64_t t = 0;
};

/// Per-step activations cached by lstm_step for backpropagation.
struct LstmStepCache {
    Vector f, i, o, g;  // gate activations; g is the tanh candidate
    Vector tanh_c;
};

/// Everything forward() computed, kept for backward().
struct ForwardTrace {
    std::vector<std::uint32_t> indices;
    std::vector<Vector> x;      // post-dropout embeddings
    std::vector<Vector> mask;   // inverted-dropout masks (scale folded in)
    std::vector<LstmStepCache> steps;
    std::vector<Vector> c, h;
    Vector attn_scores;   // e_t, one scalar per step
    Vector attn_weights;  // softmax of the scores, sums to 1
    Vector context;       // attention-weighted sum of the h_t
    Vector logits;
    Vector probs;
};

/// Zero-filled parameters with the given shapes.
ModelParams zero_params(std::size_t vocab_size, const ModelConfig& cfg);

/// Uniform [-init_scale, init_scale] weights, zero biases. Draw order is
/// fixed (embedding, W_f..W_c, U_f..U_c, w_a, W_d) so a seed fully
/// determines the result.
ModelParams init_params(std::size_t vocab_size, const ModelConfig& cfg, Rng& rng);

/// One LSTM cell update:
///   f = sig(W_f x + U_f h_prev + b_f)      i, o analogous
///   c = f . c_prev + i . tanh(W_c x + U_c h_prev + b_c)
///   h = o . tanh(c)
std::pair<LstmState, LstmStepCache> lstm_step(const LstmParams& p, const Vector& x_t,
                                              const LstmState& prev);

struct AttentionResult {
    Vector scores;   // h_t . w_a per step
    Vector weights;  // softmax of scores
    Vector context;  // sum_t weights[t] * h_t
};

AttentionResult attention(const std::vector<Vector>& hs, const Vector& w_a);

/// Embedding lookup, dropout (train mode only), LSTM fold from zero state,
/// attention, dense layer, softmax.
ForwardTrace forward(const ModelParams& params, const ModelConfig& cfg,
                     const std::vector<std::uint32_t>& indices, bool train_mode, Rng& rng);

/// -log p(gold), with p clamped to 1e-12.
double cross_entropy(const Vector& probs, ClassLabel gold);

/// Analytic gradient of cross_entropy(forward(...)) for every parameter,
/// backpropagated through the attention softmax and through time.
ModelParams backward(const ModelParams& params, const ModelConfig& cfg, const ForwardTrace& trace,
                     ClassLabel gold);

/// In-place Adam step; state.t advances by exactly 1.
void adam_update(ModelParams& params, ModelParams& grads, AdamState& state, const ModelConfig& cfg);

/// Scales grads to the given global L2 norm when they exceed it.
void clip_gradients(ModelParams& grads, double max_norm);

struct EpochLogEntry {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double dev_weighted_f1 = 0.0;
};

struct TrainResult {
    ModelParams params;  // parameters of the best dev-F1 epoch
    std::vector<EpochLogEntry> log;
};

/// Seeded per-example training with Adam; keeps the best dev-F1 epoch and
/// stops early after kEarlyStopPatience epochs without improvement.
TrainResult train_model(ModelParams initial, const ModelConfig& cfg,
                        const std::vector<EncodedExample>& train_set,
                        const std::vector<EncodedExample>& dev_set, Rng& rng);

/// Index of the largest probability; ties break toward the lower class code.
ClassLabel argmax_label(const Vector& probs);

struct Prediction {
    ClassLabel label = ClassLabel::NAG;
    Vector probs;
};

Prediction predict_indices(const ModelParams& params, const ModelConfig& cfg,
                           const std::vector<std::uint32_t>& indices);
Prediction predict(const ModelParams& params, const ModelConfig& cfg, const TokenList& tokens,
                   const Vocabulary& vocab);

}  // namespace aggnet
