#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "desklm/corpus.hpp"
#include "desklm/lm.hpp"
#include "desklm/lm_config.hpp"
#include "desklm/rng.hpp"

namespace desklm {

// Continuous batching over the evaluation stream: the stream's first P = B *
// floor((len-1)/B) prediction pairs are laid out in B parallel columns, so
// column b at step t reads stream[b*nbatch + t] and predicts the next token.
// The tail that does not fill a column is dropped, as usual for TBPTT
// training; evaluation uses batch 1 and sees everything.
struct BatchedStream {
    std::vector<int> stream;
    int batch = 0;
    int nbatch = 0;

    BatchedStream(std::vector<int> s, int b) : stream(std::move(s)), batch(b) {
        if (b <= 0) throw std::invalid_argument("batchify: batch must be positive");
        nbatch = static_cast<int>((stream.size() - 1) / static_cast<std::size_t>(b));
    }

    // Window [t0, t0+len) of every column.
    LmBatch window(int t0, int len) const {
        LmBatch w;
        w.steps = std::min(len, nbatch - t0);
        w.batch = batch;
        w.inputs.resize(static_cast<std::size_t>(w.steps) * batch);
        w.targets.resize(static_cast<std::size_t>(w.steps) * batch);
        for (int t = 0; t < w.steps; ++t)
            for (int b = 0; b < batch; ++b) {
                const std::size_t pos = static_cast<std::size_t>(b) * nbatch + t0 + t;
                w.inputs[static_cast<std::size_t>(t) * batch + b] = stream[pos];
                w.targets[static_cast<std::size_t>(t) * batch + b] = stream[pos + 1];
            }
        return w;
    }
};

namespace detail {

struct ParamRef {
    double* value;
    double* grad;
    std::size_t n;
    bool trainable;
};

// Fixed parameter enumeration; update order and clip accounting depend on it.
inline std::vector<ParamRef> collect_params(Model& m, ModelGrads& g) {
    std::vector<ParamRef> out;
    out.push_back({m.input_emb.a.data(), g.input_emb.a.data(), m.input_emb.size(),
                   !m.ecfg.input.frozen});
    if (!m.ecfg.tied)
        out.push_back({m.output_emb.a.data(), g.output_emb.a.data(), m.output_emb.size(),
                       !m.ecfg.output.frozen});
    out.push_back({m.output_bias.data(), g.output_bias.data(), m.output_bias.size(), true});
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        out.push_back({m.layers[l].w_ih.a.data(), g.layers[l].w_ih.a.data(),
                       m.layers[l].w_ih.size(), true});
        out.push_back({m.layers[l].w_hh.a.data(), g.layers[l].w_hh.a.data(),
                       m.layers[l].w_hh.size(), true});
        out.push_back({m.layers[l].bias.data(), g.layers[l].bias.data(), m.layers[l].bias.size(),
                       true});
    }
    return out;
}

// Global-norm clip over trainable parameters; frozen gradients are
// discarded here, after the full backward computed them.
inline void clip_and_step(std::vector<ParamRef>& params, double clip, double lr) {
    double sq = 0.0;
    for (const auto& p : params) {
        if (!p.trainable) continue;
        for (std::size_t i = 0; i < p.n; ++i) sq += p.grad[i] * p.grad[i];
    }
    double scale = 1.0;
    const double norm = std::sqrt(sq);
    if (clip > 0.0 && norm > clip) scale = clip / norm;
    for (const auto& p : params) {
        if (!p.trainable) continue;
        for (std::size_t i = 0; i < p.n; ++i) p.value[i] -= lr * scale * p.grad[i];
    }
}

}  // namespace detail

struct EpochStats {
    int epoch = 0;
    double train_nll = 0.0;
    double dev_ppl = 0.0;
    double wall_seconds = 0.0;
};

// exp(total NLL / total predicted tokens) over the whole corpus at batch 1,
// dropouts off, state carried across windows. Every token of every document
// is predicted, EOS and UNK included.
inline double perplexity(const Model& model, const Corpus& corpus) {
    if (corpus.empty()) throw std::invalid_argument("perplexity: empty corpus");
    if (!(*corpus.vocab == *model.vocab))
        throw std::invalid_argument("perplexity: corpus bound to a different vocabulary");
    BatchedStream data(corpus_stream(corpus), 1);
    LstmState state = LstmState::zeros(model.cfg, 1);
    double total = 0.0;
    std::int64_t count = 0;
    for (int t0 = 0; t0 < data.nbatch; t0 += model.cfg.bptt_len) {
        LmBatch w = data.window(t0, model.cfg.bptt_len);
        ForwardResult r = lm_forward(model, w, std::move(state), nullptr, nullptr);
        total += r.mean_nll * static_cast<double>(r.positions);
        count += r.positions;
        state = std::move(r.state);
    }
    return std::exp(total / static_cast<double>(count));
}

// SGD (optionally switching to averaged SGD after `trigger_patience` epochs
// without dev improvement) over TBPTT windows. Frozen matrices receive zero
// updates; the returned model carries the averaged weights once averaging
// has begun. History holds one entry per epoch.
inline std::vector<EpochStats> train(Model& model, const Corpus& train_corpus,
                                     const Corpus& dev_corpus, const TrainConfig& tcfg) {
    tcfg.validate();
    if (train_corpus.empty() || dev_corpus.empty())
        throw std::invalid_argument("train: empty corpus");
    if (!(*train_corpus.vocab == *model.vocab) || !(*dev_corpus.vocab == *model.vocab))
        throw std::invalid_argument("train: corpus bound to a different vocabulary");

    BatchedStream data(corpus_stream(train_corpus), model.cfg.batch_size);
    if (data.nbatch == 0) throw std::invalid_argument("train: corpus smaller than one batch column");

    ModelGrads grads = ModelGrads::zeros_like(model);
    auto params = detail::collect_params(model, grads);

    // Averaged-SGD bookkeeping.
    bool averaging = false;
    std::uint64_t avg_k = 0;
    std::vector<std::vector<double>> avg;
    auto begin_averaging = [&]() {
        averaging = true;
        avg_k = 1;
        avg.clear();
        for (const auto& p : params)
            if (p.trainable) avg.emplace_back(p.value, p.value + p.n);
    };
    auto accumulate_average = [&]() {
        ++avg_k;
        std::size_t slot = 0;
        for (const auto& p : params) {
            if (!p.trainable) continue;
            double* ax = avg[slot++].data();
            for (std::size_t i = 0; i < p.n; ++i) ax[i] += (p.value[i] - ax[i]) / static_cast<double>(avg_k);
        }
    };
    auto swap_in_average = [&]() {
        std::size_t slot = 0;
        for (const auto& p : params) {
            if (!p.trainable) continue;
            std::swap_ranges(avg[slot].begin(), avg[slot].end(), p.value);
            ++slot;
        }
    };

    const std::uint64_t mask_base = derive_seed(tcfg.seed, fnv1a("lm.dropout"));
    std::vector<EpochStats> history;
    double best_dev = std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        const auto t_start = std::chrono::steady_clock::now();
        Rng mask_rng(derive_seed(mask_base, static_cast<std::uint64_t>(epoch)));
        LstmState state = LstmState::zeros(model.cfg, model.cfg.batch_size);
        double epoch_nll = 0.0;
        std::int64_t epoch_positions = 0;

        for (int t0 = 0; t0 < data.nbatch; t0 += model.cfg.bptt_len) {
            LmBatch w = data.window(t0, model.cfg.bptt_len);
            ForwardMasks masks = ForwardMasks::sample(model.cfg, model.cfg.batch_size, mask_rng);
            ForwardCache cache;
            ForwardResult r;
            try {
                r = lm_forward(model, w, std::move(state), &masks, &cache);
            } catch (const std::runtime_error& e) {
                throw std::runtime_error("training diverged at epoch " + std::to_string(epoch + 1) +
                                         ": " + e.what());
            }
            state = std::move(r.state);
            epoch_nll += r.mean_nll * static_cast<double>(r.positions);
            epoch_positions += r.positions;

            grads.zero();
            lm_backward(model, w, cache, &masks, grads);
            detail::clip_and_step(params, tcfg.grad_clip, tcfg.learning_rate);
            if (averaging) accumulate_average();
        }

        EpochStats st;
        st.epoch = epoch + 1;
        st.train_nll = epoch_nll / static_cast<double>(epoch_positions);
        if (averaging) {
            swap_in_average();
            st.dev_ppl = perplexity(model, dev_corpus);
            swap_in_average();
        } else {
            st.dev_ppl = perplexity(model, dev_corpus);
        }
        if (!std::isfinite(st.train_nll) || !std::isfinite(st.dev_ppl))
            throw std::runtime_error("training diverged at epoch " + std::to_string(epoch + 1) +
                                     ": nonfinite loss");
        st.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        history.push_back(st);

        if (st.dev_ppl < best_dev) {
            best_dev = st.dev_ppl;
            since_best = 0;
        } else {
            ++since_best;
        }
        if (tcfg.optimizer == Optimizer::AveragedSGD && !averaging &&
            since_best >= tcfg.trigger_patience)
            begin_averaging();
    }

    if (averaging) swap_in_average();
    return history;
}

// Checkpoint: little additions beyond the matrices themselves - a version
// tag, the config echo, the training seed, and the vocabulary so a saved
// model can re-bind evaluation data by itself. Doubles are stored raw, so
// the round trip is bit-exact on one machine.
namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put_str(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
inline void put_vec(std::ostream& out, const std::vector<double>& v) {
    put_u64(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}
inline void put_matrix(std::ostream& out, const Matrix& m) {
    put_u32(out, static_cast<std::uint32_t>(m.rows));
    put_u32(out, static_cast<std::uint32_t>(m.cols));
    out.write(reinterpret_cast<const char*>(m.a.data()),
              static_cast<std::streamsize>(m.a.size() * sizeof(double)));
}

struct CkptReader {
    std::istream& in;
    std::uint32_t u32() {
        std::uint32_t v;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        check();
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        check();
        return v;
    }
    double f64() {
        double v;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        check();
        return v;
    }
    std::string str() {
        std::string s(u32(), '\0');
        in.read(s.data(), static_cast<std::streamsize>(s.size()));
        check();
        return s;
    }
    std::vector<double> vec() {
        std::vector<double> v(u64());
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
        check();
        return v;
    }
    Matrix matrix() {
        const int rows = static_cast<int>(u32());
        const int cols = static_cast<int>(u32());
        Matrix m(rows, cols);
        in.read(reinterpret_cast<char*>(m.a.data()),
                static_cast<std::streamsize>(m.a.size() * sizeof(double)));
        check();
        return m;
    }
    void check() {
        if (!in) throw std::runtime_error("checkpoint: truncated or unreadable file");
    }
};

inline void put_init(std::ostream& out, const InitSpec& s) {
    put_u32(out, s.kind == InitKind::Pretrained ? 1 : 0);
    put_u64(out, s.seed);
    put_f64(out, s.scale);
}
inline InitSpec get_init(CkptReader& r) {
    InitSpec s;
    s.kind = r.u32() ? InitKind::Pretrained : InitKind::Random;
    s.seed = r.u64();
    s.scale = r.f64();
    return s;
}

}  // namespace detail

inline constexpr char kCheckpointMagic[8] = {'D', 'L', 'M', 'C', 'K', 'P', 'T', '1'};

inline void write_checkpoint(const Model& model, std::uint64_t seed, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    detail::put_u64(out, seed);

    const ModelConfig& c = model.cfg;
    detail::put_u32(out, static_cast<std::uint32_t>(c.vocab_size));
    detail::put_u32(out, static_cast<std::uint32_t>(c.emb_dim));
    detail::put_u32(out, static_cast<std::uint32_t>(c.hidden_dim));
    detail::put_u32(out, static_cast<std::uint32_t>(c.num_layers));
    detail::put_f64(out, c.dropouts.word_drop);
    detail::put_f64(out, c.dropouts.emb_variational);
    detail::put_f64(out, c.dropouts.hidden_variational);
    detail::put_f64(out, c.dropouts.weight_drop);
    detail::put_u32(out, static_cast<std::uint32_t>(c.bptt_len));
    detail::put_u32(out, static_cast<std::uint32_t>(c.batch_size));

    const EmbeddingConfig& e = model.ecfg;
    detail::put_u32(out, e.tied ? 1 : 0);
    detail::put_u32(out, e.input.frozen ? 1 : 0);
    detail::put_init(out, e.input.init);
    detail::put_u32(out, e.output.frozen ? 1 : 0);
    detail::put_init(out, e.output.init);
    detail::put_str(out, e.label);
    detail::put_str(out, e.comparison_name);

    detail::put_u32(out, static_cast<std::uint32_t>(model.vocab->size()));
    for (const auto& entry : model.vocab->entries()) {
        detail::put_str(out, entry.token);
        detail::put_u64(out, entry.count);
    }

    detail::put_matrix(out, model.input_emb);
    detail::put_u32(out, model.ecfg.tied ? 0 : 1);
    if (!model.ecfg.tied) detail::put_matrix(out, model.output_emb);
    detail::put_vec(out, model.output_bias);
    detail::put_u32(out, static_cast<std::uint32_t>(model.layers.size()));
    for (const auto& l : model.layers) {
        detail::put_matrix(out, l.w_ih);
        detail::put_matrix(out, l.w_hh);
        detail::put_vec(out, l.bias);
    }
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

struct Checkpoint {
    Model model;
    std::uint64_t seed = 0;
};

inline Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
        throw std::runtime_error("not a model checkpoint (bad magic): " + path);
    detail::CkptReader r{in};

    Checkpoint ck;
    ck.seed = r.u64();
    ModelConfig& c = ck.model.cfg;
    c.vocab_size = static_cast<int>(r.u32());
    c.emb_dim = static_cast<int>(r.u32());
    c.hidden_dim = static_cast<int>(r.u32());
    c.num_layers = static_cast<int>(r.u32());
    c.dropouts.word_drop = r.f64();
    c.dropouts.emb_variational = r.f64();
    c.dropouts.hidden_variational = r.f64();
    c.dropouts.weight_drop = r.f64();
    c.bptt_len = static_cast<int>(r.u32());
    c.batch_size = static_cast<int>(r.u32());

    EmbeddingConfig& e = ck.model.ecfg;
    e.tied = r.u32() != 0;
    e.input.frozen = r.u32() != 0;
    e.input.init = detail::get_init(r);
    e.output.frozen = r.u32() != 0;
    e.output.init = detail::get_init(r);
    e.label = r.str();
    e.comparison_name = r.str();

    const std::uint32_t vsize = r.u32();
    std::vector<Vocabulary::Entry> entries;
    entries.reserve(vsize);
    for (std::uint32_t i = 0; i < vsize; ++i) {
        Vocabulary::Entry en;
        en.token = r.str();
        en.count = r.u64();
        entries.push_back(std::move(en));
    }
    ck.model.vocab = std::make_shared<Vocabulary>(Vocabulary::from_entries(entries));

    ck.model.input_emb = r.matrix();
    const bool has_output = r.u32() != 0;
    if (has_output) ck.model.output_emb = r.matrix();
    ck.model.output_bias = r.vec();
    const std::uint32_t nlayers = r.u32();
    for (std::uint32_t l = 0; l < nlayers; ++l) {
        LstmLayer layer;
        layer.w_ih = r.matrix();
        layer.w_hh = r.matrix();
        layer.bias = r.vec();
        ck.model.layers.push_back(std::move(layer));
    }
    return ck;
}

// Per-epoch training log: "epoch,train_nll,dev_ppl,wall_seconds".
inline void write_training_log(const std::vector<EpochStats>& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write training log: " + path);
    out << "epoch,train_nll,dev_ppl,wall_seconds\n";
    char buf[64];
    for (const auto& st : history) {
        out << st.epoch;
        std::snprintf(buf, sizeof(buf), "%.17g", st.train_nll);
        out << ',' << buf;
        std::snprintf(buf, sizeof(buf), "%.17g", st.dev_ppl);
        out << ',' << buf;
        std::snprintf(buf, sizeof(buf), "%.3f", st.wall_seconds);
        out << ',' << buf << '\n';
    }
}

}  // namespace desklm
