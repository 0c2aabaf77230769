#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "desklm/embeddings.hpp"
#include "desklm/lm_config.hpp"
#include "desklm/matrix.hpp"
#include "desklm/rng.hpp"
#include "desklm/vocab.hpp"

namespace desklm {

// One LSTM layer, gate order [i, f, g, o] stacked along the row axis.
struct LstmLayer {
    Matrix w_ih;               // 4*out x in
    Matrix w_hh;               // 4*out x out
    std::vector<double> bias;  // 4*out
};

// The language model: embeddings, LSTM stack, softmax projection. In tied
// configs output_emb stays empty and input_emb is the projection too, so
// there is exactly one storage to mutate.
struct Model {
    ModelConfig cfg;
    EmbeddingConfig ecfg;
    VocabularyPtr vocab;
    Matrix input_emb;                 // V x d
    Matrix output_emb;                // V x d, empty when tied
    std::vector<double> output_bias;  // V, always trainable
    std::vector<LstmLayer> layers;

    Matrix& output_matrix() { return ecfg.tied ? input_emb : output_emb; }
    const Matrix& output_matrix() const { return ecfg.tied ? input_emb : output_emb; }

    std::size_t parameter_count() const {
        std::size_t n = input_emb.size() + output_emb.size() + output_bias.size();
        for (const auto& l : layers) n += l.w_ih.size() + l.w_hh.size() + l.bias.size();
        return n;
    }
};

namespace detail {
// Row r is drawn from its own stream so a row's values do not depend on
// which other rows were filled from a pretrained set.
inline void fill_random_row(Matrix& m, int r, std::uint64_t matrix_seed, double scale) {
    Rng rng(derive_seed(matrix_seed, static_cast<std::uint64_t>(r)));
    double* p = m.row(r);
    for (int j = 0; j < m.cols; ++j) p[j] = rng.uniform(-scale, scale);
}

inline void fill_embedding_matrix(Matrix& m, const InitSpec& init, const Vocabulary& vocab,
                                  const EmbeddingSet* emb, const char* tag) {
    const std::uint64_t matrix_seed = derive_seed(init.seed, fnv1a(tag));
    for (int r = 0; r < m.rows; ++r) {
        const double* v = nullptr;
        if (init.kind == InitKind::Pretrained) v = emb->find(vocab.token(r));
        if (v) {
            double* p = m.row(r);
            for (int j = 0; j < m.cols; ++j) p[j] = v[j];
        } else {
            fill_random_row(m, r, matrix_seed, init.scale);
        }
    }
}
}  // namespace detail

// Builds a model per the tie/freeze/init descriptor. Pretrained rows are
// copied bit-exactly; tokens the set does not cover fall back to the same
// seeded draw a Random init would have produced for that row.
inline Model init_model(const ModelConfig& mcfg_in, const EmbeddingConfig& ecfg,
                        VocabularyPtr vocab, const EmbeddingSet* emb = nullptr,
                        std::uint64_t lstm_seed = 0) {
    ModelConfig mcfg = mcfg_in;
    if (mcfg.vocab_size == 0) mcfg.vocab_size = vocab->size();
    mcfg.validate();
    ecfg.validate();
    if (mcfg.vocab_size != vocab->size())
        throw std::invalid_argument("init_model: config vocab_size != vocabulary size");
    if (ecfg.uses_pretrained()) {
        if (!emb) throw std::invalid_argument("init_model: config needs an embedding set");
        if (emb->dim() != mcfg.emb_dim)
            throw std::invalid_argument("init_model: embedding dim " + std::to_string(emb->dim()) +
                                        " != model emb_dim " + std::to_string(mcfg.emb_dim));
    } else if (emb) {
        throw std::invalid_argument("init_model: embedding set provided but no init uses it");
    }

    Model model;
    model.cfg = mcfg;
    model.ecfg = ecfg;
    model.vocab = std::move(vocab);
    const int V = mcfg.vocab_size, d = mcfg.emb_dim;
    model.input_emb = Matrix(V, d);
    if (ecfg.tied) {
        detail::fill_embedding_matrix(model.input_emb, ecfg.input.init, *model.vocab, emb,
                                      "emb.tied");
    } else {
        detail::fill_embedding_matrix(model.input_emb, ecfg.input.init, *model.vocab, emb,
                                      "emb.in");
        model.output_emb = Matrix(V, d);
        detail::fill_embedding_matrix(model.output_emb, ecfg.output.init, *model.vocab, emb,
                                      "emb.out");
    }
    model.output_bias.assign(static_cast<std::size_t>(V), 0.0);

    Rng rng(derive_seed(lstm_seed, fnv1a("lstm.init")));
    model.layers.resize(static_cast<std::size_t>(mcfg.num_layers));
    for (int l = 0; l < mcfg.num_layers; ++l) {
        const int in = mcfg.layer_in(l), out = mcfg.layer_out(l);
        auto& layer = model.layers[static_cast<std::size_t>(l)];
        layer.w_ih = Matrix(4 * out, in);
        layer.w_hh = Matrix(4 * out, out);
        layer.bias.assign(static_cast<std::size_t>(4 * out), 0.0);
        const double k = 1.0 / std::sqrt(static_cast<double>(out));
        for (double& x : layer.w_ih.a) x = rng.uniform(-k, k);
        for (double& x : layer.w_hh.a) x = rng.uniform(-k, k);
        for (double& x : layer.bias) x = rng.uniform(-k, k);
    }
    return model;
}

// Gradients, shaped exactly like the model. Tied models accumulate both the
// embedding-lookup and projection gradients into input_emb.
struct ModelGrads {
    Matrix input_emb;
    Matrix output_emb;
    std::vector<double> output_bias;
    std::vector<LstmLayer> layers;

    static ModelGrads zeros_like(const Model& m) {
        ModelGrads g;
        g.input_emb = Matrix(m.input_emb.rows, m.input_emb.cols);
        if (!m.ecfg.tied) g.output_emb = Matrix(m.output_emb.rows, m.output_emb.cols);
        g.output_bias.assign(m.output_bias.size(), 0.0);
        g.layers.resize(m.layers.size());
        for (std::size_t l = 0; l < m.layers.size(); ++l) {
            g.layers[l].w_ih = Matrix(m.layers[l].w_ih.rows, m.layers[l].w_ih.cols);
            g.layers[l].w_hh = Matrix(m.layers[l].w_hh.rows, m.layers[l].w_hh.cols);
            g.layers[l].bias.assign(m.layers[l].bias.size(), 0.0);
        }
        return g;
    }

    void zero() {
        input_emb.zero();
        output_emb.zero();
        std::fill(output_bias.begin(), output_bias.end(), 0.0);
        for (auto& l : layers) {
            l.w_ih.zero();
            l.w_hh.zero();
            std::fill(l.bias.begin(), l.bias.end(), 0.0);
        }
    }
};

// Recurrent state, B rows per layer.
struct LstmState {
    std::vector<Matrix> h, c;

    static LstmState zeros(const ModelConfig& cfg, int batch) {
        LstmState s;
        s.h.reserve(static_cast<std::size_t>(cfg.num_layers));
        s.c.reserve(static_cast<std::size_t>(cfg.num_layers));
        for (int l = 0; l < cfg.num_layers; ++l) {
            s.h.emplace_back(batch, cfg.layer_out(l));
            s.c.emplace_back(batch, cfg.layer_out(l));
        }
        return s;
    }
};

// Dropout masks for one forward pass. Locked masks are sampled once and
// reused at every time step; the hidden-to-hidden masks apply to the weight
// matrix itself. All masks store 0 or 1/keep so application is a multiply.
struct ForwardMasks {
    std::vector<double> word_keep;    // V
    Matrix emb;                       // B x d
    std::vector<Matrix> hidden;       // per layer, B x out
    std::vector<Matrix> w_hh;         // per layer, 4*out x out

    static ForwardMasks sample(const ModelConfig& cfg, int batch, Rng& rng) {
        auto bernoulli = [&rng](double drop) {
            return rng.uniform() < drop ? 0.0 : 1.0 / (1.0 - drop);
        };
        ForwardMasks m;
        m.word_keep.resize(static_cast<std::size_t>(cfg.vocab_size));
        for (auto& x : m.word_keep) x = bernoulli(cfg.dropouts.word_drop);
        m.emb = Matrix(batch, cfg.emb_dim);
        for (auto& x : m.emb.a) x = bernoulli(cfg.dropouts.emb_variational);
        for (int l = 0; l < cfg.num_layers; ++l) {
            m.hidden.emplace_back(batch, cfg.layer_out(l));
            for (auto& x : m.hidden.back().a) x = bernoulli(cfg.dropouts.hidden_variational);
            m.w_hh.emplace_back(4 * cfg.layer_out(l), cfg.layer_out(l));
            for (auto& x : m.w_hh.back().a) x = bernoulli(cfg.dropouts.weight_drop);
        }
        return m;
    }
};

// One truncated-backpropagation window, laid out time-major: element
// t * batch + b.
struct LmBatch {
    int steps = 0;
    int batch = 0;
    std::vector<int> inputs;
    std::vector<int> targets;

    int input_at(int t, int b) const { return inputs[static_cast<std::size_t>(t) * batch + b]; }
    int target_at(int t, int b) const { return targets[static_cast<std::size_t>(t) * batch + b]; }
};

// Everything backward needs; probs doubles as the softmax-normalization
// witness in tests.
struct ForwardCache {
    std::vector<Matrix> h0;                      // L: hidden state entering the window
    std::vector<Matrix> x;                       // T: B x d, after both embedding dropouts
    std::vector<std::vector<Matrix>> layer_in;   // T x L: input fed to layer l
    std::vector<std::vector<Matrix>> gates;      // T x L: B x 4H, post-activation
    std::vector<std::vector<Matrix>> c_prev;     // T x L
    std::vector<std::vector<Matrix>> c;          // T x L
    std::vector<std::vector<Matrix>> h;          // T x L, pre vertical dropout
    std::vector<Matrix> top;                     // T: B x d, input to the projection
    std::vector<Matrix> probs;                   // T: B x V
};

struct ForwardResult {
    double mean_nll = 0.0;
    std::int64_t positions = 0;
    LstmState state;
};

namespace detail {
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline void check_finite(const Matrix& m, int layer, int step) {
    if (!all_finite(m))
        throw std::runtime_error("nonfinite activation in lstm layer " + std::to_string(layer) +
                                 " at step " + std::to_string(step));
}
}  // namespace detail

// Full window forward. masks == nullptr is eval mode (all dropouts off);
// cache != nullptr records activations for lm_backward. The returned state
// is detached: gradients never flow across window boundaries.
inline ForwardResult lm_forward(const Model& model, const LmBatch& batch, LstmState state,
                                const ForwardMasks* masks, ForwardCache* cache) {
    const ModelConfig& cfg = model.cfg;
    const int B = batch.batch, T = batch.steps, L = cfg.num_layers, d = cfg.emb_dim;
    const int V = cfg.vocab_size;
    if (static_cast<int>(state.h.size()) != L || state.h[0].rows != B)
        throw std::invalid_argument("lm_forward: state shape mismatch");

    // Effective hidden-to-hidden weights for this pass.
    std::vector<Matrix> w_hh_eff;
    if (masks) {
        w_hh_eff.reserve(static_cast<std::size_t>(L));
        for (int l = 0; l < L; ++l) {
            Matrix w = model.layers[static_cast<std::size_t>(l)].w_hh;
            const Matrix& m = masks->w_hh[static_cast<std::size_t>(l)];
            for (std::size_t i = 0; i < w.a.size(); ++i) w.a[i] *= m.a[i];
            w_hh_eff.push_back(std::move(w));
        }
    }

    if (cache) {
        cache->h0 = state.h;
        cache->x.assign(static_cast<std::size_t>(T), Matrix());
        auto lt = [&](auto& v) { v.assign(static_cast<std::size_t>(T), std::vector<Matrix>()); };
        lt(cache->layer_in);
        lt(cache->gates);
        lt(cache->c_prev);
        lt(cache->c);
        lt(cache->h);
        cache->top.assign(static_cast<std::size_t>(T), Matrix());
        cache->probs.assign(static_cast<std::size_t>(T), Matrix());
    }

    double total_nll = 0.0;
    Matrix logits(B, V);
    for (int t = 0; t < T; ++t) {
        // Embedding lookup with word-level and locked dropout.
        Matrix x(B, d);
        for (int b = 0; b < B; ++b) {
            const int w = batch.input_at(t, b);
            if (w < 0 || w >= V) throw std::invalid_argument("lm_forward: token id out of range");
            const double* src = model.input_emb.row(w);
            double* dst = x.row(b);
            const double keep = masks ? masks->word_keep[static_cast<std::size_t>(w)] : 1.0;
            for (int j = 0; j < d; ++j) dst[j] = src[j] * keep;
            if (masks) {
                const double* em = masks->emb.row(b);
                for (int j = 0; j < d; ++j) dst[j] *= em[j];
            }
        }
        if (cache) cache->x[static_cast<std::size_t>(t)] = x;

        Matrix in = std::move(x);
        for (int l = 0; l < L; ++l) {
            const auto& layer = model.layers[static_cast<std::size_t>(l)];
            const Matrix& w_hh = masks ? w_hh_eff[static_cast<std::size_t>(l)] : layer.w_hh;
            const int H = cfg.layer_out(l);
            Matrix& h_prev = state.h[static_cast<std::size_t>(l)];
            Matrix& c_prev = state.c[static_cast<std::size_t>(l)];

            Matrix z(B, 4 * H);
            for (int b = 0; b < B; ++b) {
                double* zp = z.row(b);
                const double* bp = layer.bias.data();
                for (int j = 0; j < 4 * H; ++j) zp[j] = bp[j];
            }
            matmul_nt(in, layer.w_ih, z);
            matmul_nt(h_prev, w_hh, z);

            Matrix c_new(B, H), h_new(B, H);
            for (int b = 0; b < B; ++b) {
                double* zp = z.row(b);
                const double* cp = c_prev.row(b);
                double* cn = c_new.row(b);
                double* hn = h_new.row(b);
                for (int j = 0; j < H; ++j) {
                    const double gi = detail::sigmoid(zp[j]);
                    const double gf = detail::sigmoid(zp[H + j]);
                    const double gg = std::tanh(zp[2 * H + j]);
                    const double go = detail::sigmoid(zp[3 * H + j]);
                    zp[j] = gi;
                    zp[H + j] = gf;
                    zp[2 * H + j] = gg;
                    zp[3 * H + j] = go;
                    cn[j] = gf * cp[j] + gi * gg;
                    hn[j] = go * std::tanh(cn[j]);
                }
            }
            detail::check_finite(h_new, l, t);

            if (cache) {
                auto& tl = *cache;
                tl.layer_in[static_cast<std::size_t>(t)].push_back(in);
                tl.gates[static_cast<std::size_t>(t)].push_back(std::move(z));
                tl.c_prev[static_cast<std::size_t>(t)].push_back(c_prev);
                tl.c[static_cast<std::size_t>(t)].push_back(c_new);
                tl.h[static_cast<std::size_t>(t)].push_back(h_new);
            }
            c_prev = c_new;
            h_prev = h_new;

            // Vertical output: locked dropout; the recurrent path keeps h raw.
            in = std::move(h_new);
            if (masks) {
                const Matrix& hm = masks->hidden[static_cast<std::size_t>(l)];
                for (std::size_t i = 0; i < in.a.size(); ++i) in.a[i] *= hm.a[i];
            }
        }
        if (cache) cache->top[static_cast<std::size_t>(t)] = in;

        logits.zero();
        for (int b = 0; b < B; ++b) {
            double* lp = logits.row(b);
            const double* bp = model.output_bias.data();
            for (int v = 0; v < V; ++v) lp[v] = bp[v];
        }
        matmul_nt(in, model.output_matrix(), logits);

        Matrix* probs = nullptr;
        if (cache) {
            cache->probs[static_cast<std::size_t>(t)] = Matrix(B, V);
            probs = &cache->probs[static_cast<std::size_t>(t)];
        }
        for (int b = 0; b < B; ++b) {
            double* lp = logits.row(b);
            double mx = lp[0];
            for (int v = 1; v < V; ++v) mx = std::max(mx, lp[v]);
            double sum = 0.0;
            for (int v = 0; v < V; ++v) sum += std::exp(lp[v] - mx);
            const double lse = mx + std::log(sum);
            const int target = batch.target_at(t, b);
            if (target < 0 || target >= V)
                throw std::invalid_argument("lm_forward: target id out of range");
            total_nll += lse - lp[target];
            if (probs) {
                double* pp = probs->row(b);
                for (int v = 0; v < V; ++v) pp[v] = std::exp(lp[v] - lse);
            }
        }
        if (!std::isfinite(total_nll))
            throw std::runtime_error("nonfinite activation in output layer at step " +
                                     std::to_string(t));
    }

    ForwardResult res;
    res.positions = static_cast<std::int64_t>(B) * T;
    res.mean_nll = total_nll / static_cast<double>(res.positions);
    res.state = std::move(state);
    return res;
}

// Spec'd evaluation entry point: mean NLL over the window, dropouts off.
inline std::pair<double, LstmState> forward_nll(const Model& model, const LmBatch& batch,
                                                LstmState state) {
    ForwardResult r = lm_forward(model, batch, std::move(state), nullptr, nullptr);
    return {r.mean_nll, std::move(r.state)};
}

// Gradient of the window's mean NLL with respect to every parameter,
// accumulated into `grads`. Frozen matrices get gradients like any other;
// the optimizer discards them, keeping the graph fully checkable.
inline void lm_backward(const Model& model, const LmBatch& batch, const ForwardCache& cache,
                        const ForwardMasks* masks, ModelGrads& grads) {
    const ModelConfig& cfg = model.cfg;
    const int B = batch.batch, T = batch.steps, L = cfg.num_layers, d = cfg.emb_dim;
    const int V = cfg.vocab_size;
    const double inv = 1.0 / (static_cast<double>(B) * T);

    Matrix& out_grad = model.ecfg.tied ? grads.input_emb : grads.output_emb;

    // Masked weights again; backward must see the same effective matrix.
    std::vector<Matrix> w_hh_eff;
    if (masks) {
        for (int l = 0; l < L; ++l) {
            Matrix w = model.layers[static_cast<std::size_t>(l)].w_hh;
            const Matrix& m = masks->w_hh[static_cast<std::size_t>(l)];
            for (std::size_t i = 0; i < w.a.size(); ++i) w.a[i] *= m.a[i];
            w_hh_eff.push_back(std::move(w));
        }
    }

    std::vector<Matrix> dh_next, dc_next;  // recurrent gradients flowing to step t
    for (int l = 0; l < L; ++l) {
        dh_next.emplace_back(B, cfg.layer_out(l));
        dc_next.emplace_back(B, cfg.layer_out(l));
    }

    Matrix dlogits(B, V);
    for (int t = T - 1; t >= 0; --t) {
        const auto ts = static_cast<std::size_t>(t);
        // d mean_nll / d logits = (softmax - onehot) / (B*T)
        dlogits = cache.probs[ts];
        for (double& p : dlogits.a) p *= inv;
        for (int b = 0; b < B; ++b)
            dlogits.row(b)[batch.target_at(t, b)] -= inv;

        matmul_tn(dlogits, cache.top[ts], out_grad);
        for (int b = 0; b < B; ++b) {
            const double* dp = dlogits.row(b);
            for (int v = 0; v < V; ++v) grads.output_bias[static_cast<std::size_t>(v)] += dp[v];
        }
        Matrix dtop(B, d);
        matmul_nn(dlogits, model.output_matrix(), dtop);

        Matrix dvert = std::move(dtop);  // gradient on layer l's dropped output
        for (int l = L - 1; l >= 0; --l) {
            const auto ls = static_cast<std::size_t>(l);
            const auto& layer = model.layers[ls];
            const Matrix& w_hh = masks ? w_hh_eff[ls] : layer.w_hh;
            const int H = cfg.layer_out(l);

            if (masks) {
                const Matrix& hm = masks->hidden[ls];
                for (std::size_t i = 0; i < dvert.a.size(); ++i) dvert.a[i] *= hm.a[i];
            }
            Matrix dh = std::move(dvert);
            for (std::size_t i = 0; i < dh.a.size(); ++i) dh.a[i] += dh_next[ls].a[i];

            const Matrix& gates = cache.gates[ts][ls];
            const Matrix& c_prev = cache.c_prev[ts][ls];
            const Matrix& c_cur = cache.c[ts][ls];
            Matrix dz(B, 4 * H);
            Matrix dc_prev(B, H);
            for (int b = 0; b < B; ++b) {
                const double* g = gates.row(b);
                const double* cp = c_prev.row(b);
                const double* cc = c_cur.row(b);
                const double* dhp = dh.row(b);
                double* dcn = dc_next[ls].row(b);
                double* dzp = dz.row(b);
                double* dcp = dc_prev.row(b);
                for (int j = 0; j < H; ++j) {
                    const double gi = g[j], gf = g[H + j], gg = g[2 * H + j], go = g[3 * H + j];
                    const double tc = std::tanh(cc[j]);
                    const double dho = dhp[j];
                    double dc = dcn[j] + dho * go * (1.0 - tc * tc);
                    dzp[j] = dc * gg * gi * (1.0 - gi);
                    dzp[H + j] = dc * cp[j] * gf * (1.0 - gf);
                    dzp[2 * H + j] = dc * gi * (1.0 - gg * gg);
                    dzp[3 * H + j] = dho * tc * go * (1.0 - go);
                    dcp[j] = dc * gf;
                }
            }
            dc_next[ls] = std::move(dc_prev);

            auto& lg = grads.layers[ls];
            matmul_tn(dz, cache.layer_in[ts][ls], lg.w_ih);
            // dL/dW_hh = (dz^T h_prev) o mask, because the forward used the
            // masked matrix.
            const Matrix& h_rec = t > 0 ? cache.h[ts - 1][ls] : cache.h0[ls];
            if (masks) {
                Matrix dwhh(4 * H, H);
                matmul_tn(dz, h_rec, dwhh);
                const Matrix& m = masks->w_hh[ls];
                for (std::size_t i = 0; i < dwhh.a.size(); ++i)
                    lg.w_hh.a[i] += dwhh.a[i] * m.a[i];
            } else {
                matmul_tn(dz, h_rec, lg.w_hh);
            }
            for (int b = 0; b < B; ++b) {
                const double* dzp = dz.row(b);
                for (int j = 0; j < 4 * H; ++j) lg.bias[static_cast<std::size_t>(j)] += dzp[j];
            }

            Matrix din(B, cfg.layer_in(l));
            matmul_nn(dz, layer.w_ih, din);
            dh_next[ls].zero();
            matmul_nn(dz, w_hh, dh_next[ls]);
            dvert = std::move(din);
        }

        // dvert is now the gradient on the dropped embedding x.
        for (int b = 0; b < B; ++b) {
            const int w = batch.input_at(t, b);
            double* dst = grads.input_emb.row(w);
            const double* src = dvert.row(b);
            const double keep = masks ? masks->word_keep[static_cast<std::size_t>(w)] : 1.0;
            if (masks) {
                const double* em = masks->emb.row(b);
                for (int j = 0; j < d; ++j) dst[j] += src[j] * em[j] * keep;
            } else {
                for (int j = 0; j < d; ++j) dst[j] += src[j] * keep;
            }
        }
    }
}

}  // namespace desklm
