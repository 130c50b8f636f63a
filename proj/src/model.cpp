#include "aggnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aggnet/eval.hpp"

namespace aggnet {

void ModelConfig::validate() const {
    if (embed_dim == 0 || hidden_dim == 0 || num_classes == 0) {
        throw std::invalid_argument("model config: dimensions must be positive");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        throw std::invalid_argument("model config: dropout_rate must be in [0, 1)");
    }
    if (max_len.has_value() && *max_len == 0) {
        throw std::invalid_argument("model config: max_len must be >= 1 when set");
    }
    if (init_scale <= 0.0) {
        throw std::invalid_argument("model config: init_scale must be > 0");
    }
}

std::vector<TensorRef> tensor_refs(ModelParams& p) {
    auto mat = [](const char* name, Matrix& m) {
        return TensorRef{name, &m.data, {m.rows, m.cols}};
    };
    auto vec = [](const char* name, Vector& v) {
        return TensorRef{name, &v, {v.size()}};
    };
    return {
        mat("embedding", p.embedding), mat("lstm.W_f", p.lstm.W_f), mat("lstm.W_i", p.lstm.W_i),
        mat("lstm.W_o", p.lstm.W_o),   mat("lstm.W_c", p.lstm.W_c), mat("lstm.U_f", p.lstm.U_f),
        mat("lstm.U_i", p.lstm.U_i),   mat("lstm.U_o", p.lstm.U_o), mat("lstm.U_c", p.lstm.U_c),
        vec("lstm.b_f", p.lstm.b_f),   vec("lstm.b_i", p.lstm.b_i), vec("lstm.b_o", p.lstm.b_o),
        vec("lstm.b_c", p.lstm.b_c),   vec("attn.w_a", p.attn.w_a), mat("dense.W_d", p.dense.W_d),
        vec("dense.b_d", p.dense.b_d),
    };
}

ModelParams zero_params(std::size_t vocab_size, const ModelConfig& cfg) {
    cfg.validate();
    const std::size_t e = cfg.embed_dim;
    const std::size_t h = cfg.hidden_dim;
    ModelParams p;
    p.embedding = Matrix(vocab_size, e);
    p.lstm.W_f = Matrix(h, e);
    p.lstm.W_i = Matrix(h, e);
    p.lstm.W_o = Matrix(h, e);
    p.lstm.W_c = Matrix(h, e);
    p.lstm.U_f = Matrix(h, h);
    p.lstm.U_i = Matrix(h, h);
    p.lstm.U_o = Matrix(h, h);
    p.lstm.U_c = Matrix(h, h);
    p.lstm.b_f = Vector(h, 0.0);
    p.lstm.b_i = Vector(h, 0.0);
    p.lstm.b_o = Vector(h, 0.0);
    p.lstm.b_c = Vector(h, 0.0);
    p.attn.w_a = Vector(h, 0.0);
    p.dense.W_d = Matrix(cfg.num_classes, h);
    p.dense.b_d = Vector(cfg.num_classes, 0.0);
    return p;
}

ModelParams init_params(std::size_t vocab_size, const ModelConfig& cfg, Rng& rng) {
    ModelParams p = zero_params(vocab_size, cfg);
    const double s = cfg.init_scale;
    p.embedding = rand_uniform(rng, vocab_size, cfg.embed_dim, s);
    p.lstm.W_f = rand_uniform(rng, cfg.hidden_dim, cfg.embed_dim, s);
    p.lstm.W_i = rand_uniform(rng, cfg.hidden_dim, cfg.embed_dim, s);
    p.lstm.W_o = rand_uniform(rng, cfg.hidden_dim, cfg.embed_dim, s);
    p.lstm.W_c = rand_uniform(rng, cfg.hidden_dim, cfg.embed_dim, s);
    p.lstm.U_f = rand_uniform(rng, cfg.hidden_dim, cfg.hidden_dim, s);
    p.lstm.U_i = rand_uniform(rng, cfg.hidden_dim, cfg.hidden_dim, s);
    p.lstm.U_o = rand_uniform(rng, cfg.hidden_dim, cfg.hidden_dim, s);
    p.lstm.U_c = rand_uniform(rng, cfg.hidden_dim, cfg.hidden_dim, s);
    p.attn.w_a = rand_uniform_vec(rng, cfg.hidden_dim, s);
    p.dense.W_d = rand_uniform(rng, cfg.num_classes, cfg.hidden_dim, s);
    return p;
}

std::pair<LstmState, LstmStepCache> lstm_step(const LstmParams& p, const Vector& x_t,
                                              const LstmState& prev) {
    if (x_t.size() != p.W_f.cols) {
        throw std::invalid_argument("lstm_step: input length " + std::to_string(x_t.size()) +
                                    " does not match W_f shape " + p.W_f.shape_str());
    }
    if (prev.h.size() != p.U_f.cols || prev.c.size() != p.U_f.cols) {
        throw std::invalid_argument("lstm_step: state length does not match U_f shape " +
                                    p.U_f.shape_str());
    }
    auto gate = [&](const Matrix& W, const Matrix& U, const Vector& b) {
        Vector z = matvec(W, x_t);
        const Vector rec = matvec(U, prev.h);
        for (std::size_t k = 0; k < z.size(); ++k) z[k] += rec[k] + b[k];
        return z;
    };
    LstmStepCache cache;
    cache.f = sigmoid(gate(p.W_f, p.U_f, p.b_f));
    cache.i = sigmoid(gate(p.W_i, p.U_i, p.b_i));
    cache.o = sigmoid(gate(p.W_o, p.U_o, p.b_o));
    cache.g = tanh_vec(gate(p.W_c, p.U_c, p.b_c));

    LstmState state;
    state.c.resize(cache.f.size());
    for (std::size_t k = 0; k < state.c.size(); ++k) {
        state.c[k] = cache.f[k] * prev.c[k] + cache.i[k] * cache.g[k];
    }
    cache.tanh_c = tanh_vec(state.c);
    state.h.resize(state.c.size());
    for (std::size_t k = 0; k < state.h.size(); ++k) {
        state.h[k] = cache.o[k] * cache.tanh_c[k];
    }
    return {std::move(state), std::move(cache)};
}

AttentionResult attention(const std::vector<Vector>& hs, const Vector& w_a) {
    if (hs.empty()) throw std::invalid_argument("attention: empty sequence");
    AttentionResult res;
    res.scores.resize(hs.size());
    for (std::size_t t = 0; t < hs.size(); ++t) res.scores[t] = dot(hs[t], w_a);
    res.weights = softmax(res.scores);
    res.context.assign(w_a.size(), 0.0);
    for (std::size_t t = 0; t < hs.size(); ++t) axpy(res.weights[t], hs[t], res.context);
    return res;
}

ForwardTrace forward(const ModelParams& params, const ModelConfig& cfg,
                     const std::vector<std::uint32_t>& indices, bool train_mode, Rng& rng) {
    if (indices.empty()) throw std::invalid_argument("forward: empty index sequence");
    const std::size_t T = indices.size();
    const std::size_t e = cfg.embed_dim;

    ForwardTrace trace;
    trace.indices = indices;
    trace.x.resize(T);
    trace.mask.resize(T);
    trace.steps.resize(T);
    trace.c.resize(T);
    trace.h.resize(T);

    const bool drop = train_mode && cfg.dropout_rate > 0.0;
    const double keep = 1.0 - cfg.dropout_rate;

    LstmState state{Vector(cfg.hidden_dim, 0.0), Vector(cfg.hidden_dim, 0.0)};
    for (std::size_t t = 0; t < T; ++t) {
        const std::uint32_t idx = indices[t];
        if (idx >= params.embedding.rows) {
            throw std::out_of_range("forward: token index " + std::to_string(idx) +
                                    " out of range for vocabulary of " +
                                    std::to_string(params.embedding.rows));
        }
        Vector x(e);
        Vector mask(e, 1.0);
        const double* row = params.embedding.data.data() + static_cast<std::size_t>(idx) * e;
        if (drop) {
            for (std::size_t k = 0; k < e; ++k) {
                mask[k] = rng.next_double() < keep ? 1.0 / keep : 0.0;
                x[k] = row[k] * mask[k];
            }
        } else {
            for (std::size_t k = 0; k < e; ++k) x[k] = row[k];
        }
        trace.x[t] = std::move(x);
        trace.mask[t] = std::move(mask);

        auto [next, cache] = lstm_step(params.lstm, trace.x[t], state);
        trace.steps[t] = std::move(cache);
        trace.c[t] = next.c;
        trace.h[t] = next.h;
        state = std::move(next);
    }

    AttentionResult attn = attention(trace.h, params.attn.w_a);
    trace.attn_scores = std::move(attn.scores);
    trace.attn_weights = std::move(attn.weights);
    trace.context = std::move(attn.context);

    trace.logits = matvec(params.dense.W_d, trace.context);
    for (std::size_t k = 0; k < trace.logits.size(); ++k) trace.logits[k] += params.dense.b_d[k];
    trace.probs = softmax(trace.logits);
    return trace;
}

double cross_entropy(const Vector& probs, ClassLabel gold) {
    const auto k = static_cast<std::size_t>(gold);
    if (k >= probs.size()) throw std::invalid_argument("cross_entropy: gold class out of range");
    return -std::log(std::max(probs[k], 1e-12));
}

ModelParams backward(const ModelParams& params, const ModelConfig& cfg, const ForwardTrace& trace,
                     ClassLabel gold) {
    const std::size_t T = trace.h.size();
    const std::size_t hidden = cfg.hidden_dim;
    ModelParams grads = zero_params(params.embedding.rows, cfg);

    // Softmax + cross-entropy collapse to probs - onehot(gold).
    Vector dlogits = trace.probs;
    dlogits[static_cast<std::size_t>(gold)] -= 1.0;

    grads.dense.b_d = dlogits;
    grads.dense.W_d = outer(dlogits, trace.context);
    const Vector dcontext = matvec_transposed(params.dense.W_d, dlogits);

    // Attention: context = sum_t a_t h_t with a = softmax(e), e_t = h_t . w_a.
    std::vector<Vector> dh(T, Vector(hidden, 0.0));
    Vector dweights(T);
    for (std::size_t t = 0; t < T; ++t) {
        dweights[t] = dot(dcontext, trace.h[t]);
        axpy(trace.attn_weights[t], dcontext, dh[t]);
    }
    double weighted_sum = 0.0;
    for (std::size_t t = 0; t < T; ++t) weighted_sum += trace.attn_weights[t] * dweights[t];
    for (std::size_t t = 0; t < T; ++t) {
        const double dscore = trace.attn_weights[t] * (dweights[t] - weighted_sum);
        axpy(dscore, trace.h[t], grads.attn.w_a);
        axpy(dscore, params.attn.w_a, dh[t]);
    }

    // Through time.
    const Vector zeros(hidden, 0.0);
    Vector dh_next(hidden, 0.0);
    Vector dc_next(hidden, 0.0);
    for (std::size_t t = T; t-- > 0;) {
        const LstmStepCache& s = trace.steps[t];
        const Vector& c_prev = t > 0 ? trace.c[t - 1] : zeros;
        const Vector& h_prev = t > 0 ? trace.h[t - 1] : zeros;

        Vector df_pre(hidden), di_pre(hidden), do_pre(hidden), dg_pre(hidden), dc(hidden);
        for (std::size_t k = 0; k < hidden; ++k) {
            const double dh_total = dh[t][k] + dh_next[k];
            const double do_k = dh_total * s.tanh_c[k];
            const double dc_k = dc_next[k] + dh_total * s.o[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]);
            const double df_k = dc_k * c_prev[k];
            const double di_k = dc_k * s.g[k];
            const double dg_k = dc_k * s.i[k];
            dc[k] = dc_k * s.f[k];  // flows to c_{t-1}
            df_pre[k] = df_k * s.f[k] * (1.0 - s.f[k]);
            di_pre[k] = di_k * s.i[k] * (1.0 - s.i[k]);
            do_pre[k] = do_k * s.o[k] * (1.0 - s.o[k]);
            dg_pre[k] = dg_k * (1.0 - s.g[k] * s.g[k]);
        }
        dc_next = std::move(dc);

        auto accumulate = [&](Matrix& dW, Matrix& dU, Vector& db, const Vector& dpre) {
            for (std::size_t r = 0; r < hidden; ++r) {
                const double d = dpre[r];
                if (d == 0.0) continue;
                double* wrow = dW.data.data() + r * dW.cols;
                for (std::size_t k = 0; k < dW.cols; ++k) wrow[k] += d * trace.x[t][k];
                if (t > 0) {
                    double* urow = dU.data.data() + r * dU.cols;
                    for (std::size_t k = 0; k < dU.cols; ++k) urow[k] += d * h_prev[k];
                }
                db[r] += d;
            }
        };
        accumulate(grads.lstm.W_f, grads.lstm.U_f, grads.lstm.b_f, df_pre);
        accumulate(grads.lstm.W_i, grads.lstm.U_i, grads.lstm.b_i, di_pre);
        accumulate(grads.lstm.W_o, grads.lstm.U_o, grads.lstm.b_o, do_pre);
        accumulate(grads.lstm.W_c, grads.lstm.U_c, grads.lstm.b_c, dg_pre);

        Vector dx = matvec_transposed(params.lstm.W_f, df_pre);
        {
            const Vector dxi = matvec_transposed(params.lstm.W_i, di_pre);
            const Vector dxo = matvec_transposed(params.lstm.W_o, do_pre);
            const Vector dxc = matvec_transposed(params.lstm.W_c, dg_pre);
            for (std::size_t k = 0; k < dx.size(); ++k) dx[k] += dxi[k] + dxo[k] + dxc[k];
        }
        dh_next = matvec_transposed(params.lstm.U_f, df_pre);
        {
            const Vector dhi = matvec_transposed(params.lstm.U_i, di_pre);
            const Vector dho = matvec_transposed(params.lstm.U_o, do_pre);
            const Vector dhc = matvec_transposed(params.lstm.U_c, dg_pre);
            for (std::size_t k = 0; k < dh_next.size(); ++k) dh_next[k] += dhi[k] + dho[k] + dhc[k];
        }

        // Embedding rows see the dropout mask the forward pass applied.
        double* emb_row =
            grads.embedding.data.data() + static_cast<std::size_t>(trace.indices[t]) * cfg.embed_dim;
        for (std::size_t k = 0; k < cfg.embed_dim; ++k) emb_row[k] += dx[k] * trace.mask[t][k];
    }
    return grads;
}

void adam_update(ModelParams& params, ModelParams& grads, AdamState& state, const ModelConfig& cfg) {
    state.t += 1;
    const double b1 = cfg.adam_beta1;
    const double b2 = cfg.adam_beta2;
    const double m_corr = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double v_corr = 1.0 - std::pow(b2, static_cast<double>(state.t));

    auto p_refs = tensor_refs(params);
    auto g_refs = tensor_refs(grads);
    auto m_refs = tensor_refs(state.m);
    auto v_refs = tensor_refs(state.v);
    for (std::size_t k = 0; k < p_refs.size(); ++k) {
        std::vector<double>& theta = *p_refs[k].data;
        const std::vector<double>& g = *g_refs[k].data;
        std::vector<double>& m = *m_refs[k].data;
        std::vector<double>& v = *v_refs[k].data;
        if (theta.size() != g.size() || theta.size() != m.size() || theta.size() != v.size()) {
            throw std::invalid_argument("adam_update: shape mismatch for tensor " + p_refs[k].name);
        }
        for (std::size_t j = 0; j < theta.size(); ++j) {
            m[j] = b1 * m[j] + (1.0 - b1) * g[j];
            v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
            const double m_hat = m[j] / m_corr;
            const double v_hat = v[j] / v_corr;
            theta[j] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
        }
    }
}

void clip_gradients(ModelParams& grads, double max_norm) {
    if (max_norm <= 0.0) return;
    double sq = 0.0;
    for (const auto& ref : tensor_refs(grads)) {
        for (double v : *ref.data) sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (norm <= max_norm) return;
    const double scale = max_norm / norm;
    for (const auto& ref : tensor_refs(grads)) {
        for (double& v : *ref.data) v *= scale;
    }
}

namespace {

double dev_weighted_f1(const ModelParams& params, const ModelConfig& cfg,
                       const std::vector<EncodedExample>& dev_set) {
    std::vector<ClassLabel> gold;
    std::vector<ClassLabel> pred;
    gold.reserve(dev_set.size());
    pred.reserve(dev_set.size());
    for (const auto& ex : dev_set) {
        gold.push_back(ex.label);
        pred.push_back(predict_indices(params, cfg, ex.indices).label);
    }
    return weighted_f1(confusion(gold, pred)).weighted_f1;
}

}  // namespace

TrainResult train_model(ModelParams initial, const ModelConfig& cfg,
                        const std::vector<EncodedExample>& train_set,
                        const std::vector<EncodedExample>& dev_set, Rng& rng) {
    cfg.validate();
    if (train_set.empty()) throw std::invalid_argument("train_model: empty training set");
    if (dev_set.empty()) throw std::invalid_argument("train_model: empty dev set");

    TrainResult result;
    result.params = std::move(initial);
    if (cfg.epochs == 0) return result;

    ModelParams best = result.params;
    double best_f1 = -1.0;
    std::size_t since_improve = 0;

    AdamState adam;
    adam.m = zero_params(result.params.embedding.rows, cfg);
    adam.v = zero_params(result.params.embedding.rows, cfg);

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {  // Fisher-Yates
            std::swap(order[i - 1], order[rng.uniform_index(i)]);
        }
        double loss_sum = 0.0;
        for (std::size_t i : order) {
            const EncodedExample& ex = train_set[i];
            const ForwardTrace trace = forward(result.params, cfg, ex.indices, true, rng);
            loss_sum += cross_entropy(trace.probs, ex.label);
            ModelParams grads = backward(result.params, cfg, trace, ex.label);
            clip_gradients(grads, cfg.grad_clip_norm);
            adam_update(result.params, grads, adam, cfg);
        }
        const double dev_f1 = dev_weighted_f1(result.params, cfg, dev_set);
        result.log.push_back({epoch, loss_sum / static_cast<double>(train_set.size()), dev_f1});
        if (dev_f1 > best_f1) {
            best_f1 = dev_f1;
            best = result.params;
            since_improve = 0;
        } else {
            ++since_improve;
            if (since_improve >= kEarlyStopPatience) break;
        }
    }
    result.params = std::move(best);
    return result;
}

ClassLabel argmax_label(const Vector& probs) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < probs.size(); ++k) {
        if (probs[k] > probs[best]) best = k;
    }
    return static_cast<ClassLabel>(best);
}

Prediction predict_indices(const ModelParams& params, const ModelConfig& cfg,
                           const std::vector<std::uint32_t>& indices) {
    Rng unused(0);
    const ForwardTrace trace = forward(params, cfg, indices, false, unused);
    return {argmax_label(trace.probs), trace.probs};
}

Prediction predict(const ModelParams& params, const ModelConfig& cfg, const TokenList& tokens,
                   const Vocabulary& vocab) {
    return predict_indices(params, cfg, encode(tokens, vocab, cfg.max_len));
}

}  // namespace aggnet
