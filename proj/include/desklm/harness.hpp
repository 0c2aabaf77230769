#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "desklm/corpus.hpp"
#include "desklm/csv.hpp"
#include "desklm/glove.hpp"
#include "desklm/kv.hpp"
#include "desklm/lm.hpp"
#include "desklm/lm_train.hpp"
#include "desklm/rng.hpp"

namespace desklm {

enum class EmbeddingSource { None, TrainHere, LoadFile };

// One complete run: data + preprocessing + embedding source + model +
// training recipe. Everything a row in the results store depends on.
struct ExperimentSpec {
    std::string spec_id = "spec";
    std::string dataset = "dataset";
    std::string pretrain_path;  // extra-data file: embedding source and multiplier slices
    std::string train_path;
    std::string dev_path;
    std::string test_path;  // empty = skip test evaluation
    DocUnit unit = DocUnit::Sentence;
    PreprocessSpec preprocess;
    std::uint64_t cutoff_k = 0;
    EmbeddingSource embedding_source = EmbeddingSource::None;
    GloveConfig glove;
    std::string embedding_path;  // LoadFile source
    std::string config_label = "tied-unfrozen-random";
    ModelConfig model;
    TrainConfig train;
    int data_multiplier = 1;
    std::string checkpoint_path;  // empty = no checkpoint written

    void validate() const {
        if (train_path.empty() || dev_path.empty())
            throw std::invalid_argument("experiment spec: train and dev paths are required");
        if (data_multiplier < 1)
            throw std::invalid_argument("experiment spec: data_multiplier must be >= 1");
        if (embedding_source == EmbeddingSource::TrainHere && pretrain_path.empty())
            throw std::invalid_argument("experiment spec: embedding training needs a pretrain path");
        if (embedding_source == EmbeddingSource::LoadFile && embedding_path.empty())
            throw std::invalid_argument("experiment spec: embedding loading needs a path");
        if (data_multiplier > 1 && pretrain_path.empty())
            throw std::invalid_argument("experiment spec: data_multiplier > 1 needs a pretrain path");
        resolve_embedding_config(config_label);
        train.validate();
        if (embedding_source == EmbeddingSource::TrainHere) glove.validate();
    }
};

// Table-3-style UNK percentages for one cutoff value, measured on the
// corpora the cutoff was applied to.
struct UnkRates {
    std::uint64_t k = 0;
    double train_type_pct = 0.0;
    double train_token_pct = 0.0;
    double dev_type_pct = 0.0;
    double dev_token_pct = 0.0;
};

namespace detail {

// Percentage of observed types (EOS excluded) that the cutoff replaces, and
// percentage of content tokens replaced. Specials are never replaced, so a
// pre-existing UNK counts as an ordinary surviving type.
inline void unk_rates_for(const Corpus& original, const FrequencyList& list, std::uint64_t k,
                          double* type_pct, double* token_pct) {
    const Vocabulary& v = *original.vocab;
    std::vector<char> seen(static_cast<std::size_t>(v.size()), 0);
    std::uint64_t types = 0, replaced_types = 0, tokens = 0, replaced_tokens = 0;
    for (const auto& doc : original.documents) {
        for (std::size_t i = 0; i + 1 < doc.size(); ++i) {
            const int id = doc[i];
            const bool replace =
                k > 0 && !v.is_special(id) && list.count(v.token(id)) < k;
            ++tokens;
            if (replace) ++replaced_tokens;
            if (!seen[static_cast<std::size_t>(id)]) {
                seen[static_cast<std::size_t>(id)] = 1;
                ++types;
                if (replace) ++replaced_types;
            }
        }
    }
    *type_pct = types ? 100.0 * static_cast<double>(replaced_types) / static_cast<double>(types)
                      : 0.0;
    *token_pct = tokens
                     ? 100.0 * static_cast<double>(replaced_tokens) / static_cast<double>(tokens)
                     : 0.0;
}

template <typename F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error("stage " + std::string(name) + ": " + e.what());
    }
}

}  // namespace detail

inline UnkRates compute_unk_rates(const Corpus& train, const Corpus& dev,
                                  const FrequencyList& train_freq, std::uint64_t k) {
    UnkRates r;
    r.k = k;
    detail::unk_rates_for(train, train_freq, k, &r.train_type_pct, &r.train_token_pct);
    detail::unk_rates_for(dev, train_freq, k, &r.dev_type_pct, &r.dev_token_pct);
    return r;
}

// Data and embeddings shared by every run of a sweep, so that swept rows
// differ only in the swept variable.
struct PreparedExperiment {
    Corpus train, dev, test;  // cutoff already applied; test empty when unused
    bool has_test = false;
    FrequencyList train_freq;  // pre-cutoff train frequencies
    UnkRates unk_rates;
    std::optional<EmbeddingSet> embeddings;
};

inline PreparedExperiment prepare_experiment(const ExperimentSpec& spec) {
    spec.validate();
    PreparedExperiment prep;

    // Token documents; the multiplier appends successive disjoint slices of
    // the extra-data file, each the size of the base training set.
    std::vector<std::vector<std::string>> train_docs, dev_docs, test_docs, pretrain_docs;
    detail::stage("load-data", [&] {
        train_docs = read_token_documents(spec.train_path, spec.unit);
        dev_docs = read_token_documents(spec.dev_path, spec.unit);
        if (!spec.test_path.empty()) test_docs = read_token_documents(spec.test_path, spec.unit);
        if (!spec.pretrain_path.empty())
            pretrain_docs = read_token_documents(spec.pretrain_path, spec.unit);
        if (train_docs.empty()) throw std::runtime_error("train corpus is empty");
        if (dev_docs.empty()) throw std::runtime_error("dev corpus is empty");
        const std::size_t n = train_docs.size();
        const std::size_t extra = n * static_cast<std::size_t>(spec.data_multiplier - 1);
        if (extra > pretrain_docs.size())
            throw std::runtime_error("data_multiplier " + std::to_string(spec.data_multiplier) +
                                     " needs " + std::to_string(extra) +
                                     " extra documents, extra-data file has " +
                                     std::to_string(pretrain_docs.size()));
        for (std::size_t i = 0; i < extra; ++i) train_docs.push_back(pretrain_docs[i]);
        return 0;
    });

    detail::stage("preprocess", [&] {
        if (spec.preprocess.mode == PreprocessSpec::Mode::Std) {
            FrequencyList raw(count_tokens(train_docs));
            train_docs = replace_rare_tokens(train_docs, raw, spec.preprocess.std_min_count);
            dev_docs = replace_rare_tokens(dev_docs, raw, spec.preprocess.std_min_count);
            test_docs = replace_rare_tokens(test_docs, raw, spec.preprocess.std_min_count);
        }
        // Std: vocabulary over training text only, dev/test leftovers map to
        // UNK at bind time. Rare: the vocabulary spans every split so rare
        // evaluation words keep their identity.
        std::vector<std::vector<std::string>> vocab_docs = train_docs;
        if (spec.preprocess.mode == PreprocessSpec::Mode::Rare) {
            vocab_docs.insert(vocab_docs.end(), dev_docs.begin(), dev_docs.end());
            vocab_docs.insert(vocab_docs.end(), test_docs.begin(), test_docs.end());
        }
        auto vocab = std::make_shared<Vocabulary>(build_vocabulary(vocab_docs, 1));
        prep.train = bind_corpus(train_docs, vocab, spec.unit);
        prep.dev = bind_corpus(dev_docs, vocab, spec.unit);
        prep.has_test = !test_docs.empty();
        if (prep.has_test) prep.test = bind_corpus(test_docs, vocab, spec.unit);

        prep.train_freq = build_frequency_list(prep.train);
        prep.unk_rates = compute_unk_rates(prep.train, prep.dev, prep.train_freq, spec.cutoff_k);
        if (spec.cutoff_k > 0) {
            prep.train = apply_unk_cutoff(prep.train, prep.train_freq, spec.cutoff_k);
            prep.dev = apply_unk_cutoff(prep.dev, prep.train_freq, spec.cutoff_k);
            if (prep.has_test) prep.test = apply_unk_cutoff(prep.test, prep.train_freq, spec.cutoff_k);
        }
        return 0;
    });

    detail::stage("embeddings", [&] {
        if (spec.embedding_source == EmbeddingSource::TrainHere) {
            // Rare pretraining tokens become UNK so the UNK row gets a
            // trained vector instead of the random fallback.
            FrequencyList pre_freq(count_tokens(pretrain_docs));
            auto docs = replace_rare_tokens(pretrain_docs, pre_freq, spec.glove.min_count);
            auto vocab = std::make_shared<Vocabulary>(build_vocabulary(docs, 1));
            Corpus pre = bind_corpus(docs, vocab, spec.unit);
            prep.embeddings = train_glove(pre, spec.glove);
        } else if (spec.embedding_source == EmbeddingSource::LoadFile) {
            prep.embeddings = read_embeddings(spec.embedding_path);
        }
        return 0;
    });

    return prep;
}

// The run seed every per-run stream derives from. It depends on the global
// seed and the spec id but not on the config label, so sweep rows share it.
inline std::uint64_t experiment_run_seed(const ExperimentSpec& spec) {
    return derive_seed(spec.train.seed, fnv1a(spec.spec_id));
}

inline ResultRow run_prepared(const ExperimentSpec& spec, const PreparedExperiment& prep,
                              ResultsStore* store = nullptr,
                              std::vector<EpochStats>* history = nullptr) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t run_seed = experiment_run_seed(spec);

    Model model = detail::stage("init", [&] {
        EmbeddingConfig ecfg = resolve_embedding_config(spec.config_label);
        const std::uint64_t init_seed = derive_seed(run_seed, fnv1a("init.emb"));
        ecfg.input.init.seed = init_seed;
        ecfg.output.init.seed = init_seed;  // matrix tags keep untied draws distinct
        const std::uint64_t lstm_seed = derive_seed(run_seed, fnv1a("init.lstm"));
        if (ecfg.uses_pretrained() && !prep.embeddings.has_value())
            throw std::runtime_error("config " + ecfg.label +
                                     " needs embeddings but the spec provides none");
        const EmbeddingSet* emb =
            ecfg.uses_pretrained() ? &prep.embeddings.value() : nullptr;
        return init_model(spec.model, ecfg, prep.train.vocab, emb, lstm_seed);
    });

    auto stats = detail::stage("train", [&] {
        TrainConfig tcfg = spec.train;
        tcfg.seed = derive_seed(run_seed, fnv1a("train"));
        return desklm::train(model, prep.train, prep.dev, tcfg);
    });
    if (history) *history = std::move(stats);

    ResultRow row = detail::stage("evaluate", [&] {
        ResultRow r;
        r.spec_id = spec.spec_id;
        r.config_label = spec.config_label;
        r.dataset = spec.dataset;
        r.k = spec.cutoff_k;
        r.dev_ppl = perplexity(model, prep.dev);
        if (prep.has_test) {
            r.has_test = true;
            r.test_ppl = perplexity(model, prep.test);
        }
        r.tokens_dev = prep.dev.total_tokens();
        r.seed = run_seed;
        if (!std::isfinite(r.dev_ppl) || r.dev_ppl <= 0.0)
            throw std::runtime_error("dev perplexity is not positive and finite");
        return r;
    });

    if (!spec.checkpoint_path.empty())
        detail::stage("checkpoint", [&] {
            write_checkpoint(model, run_seed, spec.checkpoint_path);
            return 0;
        });

    row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (store) {
        row.run_id = store->next_run_id();
        store->append(row);
    }
    return row;
}

inline ResultRow run_experiment(const ExperimentSpec& spec, ResultsStore* store = nullptr,
                                std::vector<EpochStats>* history = nullptr) {
    PreparedExperiment prep = prepare_experiment(spec);
    return run_prepared(spec, prep, store, history);
}

// Everything except wall time and the store-assigned run id is reproducible,
// so determinism is judged on the remaining fields.
inline bool same_result(const ResultRow& a, const ResultRow& b) {
    return a.spec_id == b.spec_id && a.config_label == b.config_label && a.dataset == b.dataset &&
           a.k == b.k && a.dev_ppl == b.dev_ppl && a.has_test == b.has_test &&
           (!a.has_test || a.test_ppl == b.test_ppl) && a.tokens_dev == b.tokens_dev &&
           a.seed == b.seed;
}

// One row per label over identical data, embeddings, and seeds. Output is
// ordered by canonical label.
inline std::vector<ResultRow> run_config_sweep(const ExperimentSpec& base,
                                               const std::vector<std::string>& labels,
                                               ResultsStore* store = nullptr) {
    std::vector<std::string> canonical;
    canonical.reserve(labels.size());
    for (const auto& l : labels) canonical.push_back(resolve_embedding_config(l).label);
    std::sort(canonical.begin(), canonical.end());
    if (canonical.empty()) return {};

    PreparedExperiment prep = prepare_experiment(base);
    std::vector<ResultRow> rows;
    rows.reserve(canonical.size());
    for (const auto& label : canonical) {
        ExperimentSpec spec = base;
        spec.config_label = label;
        rows.push_back(run_prepared(spec, prep, store));
    }
    return rows;
}

struct CutoffSweepResult {
    std::vector<ResultRow> rows;
    std::vector<UnkRates> rates;
};

// One row per cutoff value; data is loaded and embeddings trained once, the
// cutoff itself is reapplied per K.
inline CutoffSweepResult run_cutoff_sweep(const ExperimentSpec& base,
                                          const std::vector<std::uint64_t>& ks,
                                          ResultsStore* store = nullptr) {
    CutoffSweepResult out;
    if (ks.empty()) return out;
    ExperimentSpec spec0 = base;
    spec0.cutoff_k = 0;
    PreparedExperiment prep0 = prepare_experiment(spec0);
    for (std::uint64_t k : ks) {
        ExperimentSpec spec = base;
        spec.cutoff_k = k;
        PreparedExperiment prep;
        prep.train = k ? apply_unk_cutoff(prep0.train, prep0.train_freq, k) : prep0.train;
        prep.dev = k ? apply_unk_cutoff(prep0.dev, prep0.train_freq, k) : prep0.dev;
        prep.has_test = prep0.has_test;
        if (prep0.has_test)
            prep.test = k ? apply_unk_cutoff(prep0.test, prep0.train_freq, k) : prep0.test;
        prep.train_freq = prep0.train_freq;
        prep.embeddings = prep0.embeddings;
        prep.unk_rates = compute_unk_rates(prep0.train, prep0.dev, prep0.train_freq, k);
        out.rates.push_back(prep.unk_rates);
        out.rows.push_back(run_prepared(spec, prep, store));
    }
    return out;
}

// Hyperparameter sampling. Each field's distribution is fixed: the learning
// rate is log-uniform, dropout rates are uniform, layer count, hidden size,
// and BPTT length are integer-uniform. Ranges bracket the training defaults.
struct SearchSpace {
    struct LogRange {
        double lo, hi;
    };
    struct UniRange {
        double lo, hi;
    };
    struct IntRange {
        int lo, hi;
    };

    LogRange learning_rate{15.0, 60.0};
    UniRange word_drop{0.0, 0.2};
    UniRange emb_variational{0.4, 0.8};
    UniRange hidden_variational{0.15, 0.45};
    UniRange weight_drop{0.25, 0.75};
    IntRange layers{2, 5};
    IntRange hidden_dim{800, 1500};
    IntRange bptt_len{35, 105};
    int count = 37;
    std::uint64_t seed = 0;
    std::string baseline_label = "tied-unfrozen-random";
    std::string proposed_label = "untied-frozen-pretrained-unfrozen-pretrained";

    void validate() const {
        if (!(learning_rate.lo > 0.0) || !(learning_rate.lo <= learning_rate.hi))
            throw std::invalid_argument("search space: bad learning_rate range");
        for (const auto& r : {word_drop, emb_variational, hidden_variational, weight_drop})
            if (!(r.lo >= 0.0 && r.lo <= r.hi && r.hi < 1.0))
                throw std::invalid_argument("search space: dropout ranges must sit inside [0, 1)");
        for (const auto& r : {layers, hidden_dim, bptt_len})
            if (r.lo < 1 || r.lo > r.hi)
                throw std::invalid_argument("search space: bad integer range");
        if (count < 0) throw std::invalid_argument("search space: count must be nonnegative");
    }
};

struct HyperSetting {
    double learning_rate = 0.0;
    double word_drop = 0.0, emb_variational = 0.0, hidden_variational = 0.0, weight_drop = 0.0;
    int layers = 0, hidden_dim = 0, bptt_len = 0;
};

inline HyperSetting sample_setting(const SearchSpace& space, int index) {
    Rng rng(derive_seed(space.seed, static_cast<std::uint64_t>(index)));
    HyperSetting s;
    s.learning_rate =
        std::exp(rng.uniform(std::log(space.learning_rate.lo), std::log(space.learning_rate.hi)));
    s.word_drop = rng.uniform(space.word_drop.lo, space.word_drop.hi);
    s.emb_variational = rng.uniform(space.emb_variational.lo, space.emb_variational.hi);
    s.hidden_variational = rng.uniform(space.hidden_variational.lo, space.hidden_variational.hi);
    s.weight_drop = rng.uniform(space.weight_drop.lo, space.weight_drop.hi);
    auto draw_int = [&rng](SearchSpace::IntRange r) {
        return r.lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(r.hi - r.lo + 1)));
    };
    s.layers = draw_int(space.layers);
    s.hidden_dim = draw_int(space.hidden_dim);
    s.bptt_len = draw_int(space.bptt_len);
    return s;
}

struct SearchPair {
    int index = 0;
    HyperSetting setting;
    bool ok = false;
    std::string error;  // set when !ok
    ResultRow baseline;
    ResultRow proposed;
};

// Runs the baseline and proposed configs once per sampled setting, always
// with the same setting, data, and seeds within a pair. A failed run marks
// the pair failed and the search moves on.
inline std::vector<SearchPair> random_search(const ExperimentSpec& base, const SearchSpace& space,
                                             ResultsStore* store = nullptr) {
    space.validate();
    std::vector<SearchPair> pairs;
    if (space.count == 0) return pairs;
    resolve_embedding_config(space.baseline_label);
    resolve_embedding_config(space.proposed_label);

    PreparedExperiment prep = prepare_experiment(base);
    for (int i = 0; i < space.count; ++i) {
        SearchPair pair;
        pair.index = i;
        pair.setting = sample_setting(space, i);

        ExperimentSpec spec = base;
        spec.spec_id = base.spec_id + ".search" + std::to_string(i);
        spec.train.learning_rate = pair.setting.learning_rate;
        spec.model.dropouts.word_drop = pair.setting.word_drop;
        spec.model.dropouts.emb_variational = pair.setting.emb_variational;
        spec.model.dropouts.hidden_variational = pair.setting.hidden_variational;
        spec.model.dropouts.weight_drop = pair.setting.weight_drop;
        spec.model.num_layers = pair.setting.layers;
        spec.model.hidden_dim = pair.setting.hidden_dim;
        spec.model.bptt_len = pair.setting.bptt_len;

        try {
            ExperimentSpec b = spec;
            b.config_label = space.baseline_label;
            pair.baseline = run_prepared(b, prep, store);
            ExperimentSpec p = spec;
            p.config_label = space.proposed_label;
            pair.proposed = run_prepared(p, prep, store);
            pair.ok = true;
        } catch (const std::exception& e) {
            pair.ok = false;
            pair.error = e.what();
        }
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

// Spec files are flat key = value text; unknown keys are rejected so typos
// fail loudly.
inline ExperimentSpec experiment_spec_from_kv(const KvFile& kv) {
    static const std::set<std::string> known = {
        "spec_id",      "dataset",      "pretrain",        "train",
        "dev",          "test",         "unit",            "regime",
        "std_min_count", "cutoff_k",    "embeddings",      "embedding_path",
        "glove_dim",    "glove_window", "glove_xmax",      "glove_alpha",
        "glove_iterations", "glove_lr", "glove_min_count", "glove_seed",
        "config",       "emb_dim",      "hidden_dim",      "layers",
        "word_drop",    "emb_drop",     "hidden_drop",     "weight_drop",
        "bptt",         "batch",        "lr",              "clip",
        "epochs",       "seed",         "optimizer",       "patience",
        "multiplier",   "checkpoint"};
    for (const auto& [key, value] : kv.values()) {
        (void)value;
        if (!known.count(key))
            throw std::runtime_error(kv.name() + ": unknown key " + key);
    }

    ExperimentSpec s;
    s.spec_id = kv.str("spec_id", s.spec_id);
    s.dataset = kv.str("dataset", s.dataset);
    s.pretrain_path = kv.str("pretrain", "");
    s.train_path = kv.str("train");
    s.dev_path = kv.str("dev");
    s.test_path = kv.str("test", "");

    const auto unit = kv.str("unit", "sentence");
    if (unit == "sentence") s.unit = DocUnit::Sentence;
    else if (unit == "article") s.unit = DocUnit::Article;
    else throw std::runtime_error(kv.name() + ": unit must be sentence or article");

    const auto regime = kv.str("regime", "rare");
    if (regime == "rare") s.preprocess.mode = PreprocessSpec::Mode::Rare;
    else if (regime == "std") s.preprocess.mode = PreprocessSpec::Mode::Std;
    else throw std::runtime_error(kv.name() + ": regime must be std or rare");
    s.preprocess.std_min_count = kv.u64("std_min_count", s.preprocess.std_min_count);
    s.cutoff_k = kv.u64("cutoff_k", 0);

    const auto source = kv.str("embeddings", "none");
    if (source == "none") s.embedding_source = EmbeddingSource::None;
    else if (source == "train") s.embedding_source = EmbeddingSource::TrainHere;
    else if (source == "load") s.embedding_source = EmbeddingSource::LoadFile;
    else throw std::runtime_error(kv.name() + ": embeddings must be none, train, or load");
    s.embedding_path = kv.str("embedding_path", "");

    s.glove.dim = static_cast<int>(kv.i64("glove_dim", s.glove.dim));
    s.glove.window = static_cast<int>(kv.i64("glove_window", s.glove.window));
    s.glove.x_max = kv.f64("glove_xmax", s.glove.x_max);
    s.glove.alpha = kv.f64("glove_alpha", s.glove.alpha);
    s.glove.iterations = static_cast<int>(kv.i64("glove_iterations", s.glove.iterations));
    s.glove.learning_rate = kv.f64("glove_lr", s.glove.learning_rate);
    s.glove.min_count = kv.u64("glove_min_count", s.glove.min_count);
    s.glove.seed = kv.u64("glove_seed", s.glove.seed);

    s.config_label = kv.str("config", s.config_label);
    s.model.emb_dim = static_cast<int>(kv.i64("emb_dim", s.model.emb_dim));
    s.model.hidden_dim = static_cast<int>(kv.i64("hidden_dim", s.model.hidden_dim));
    s.model.num_layers = static_cast<int>(kv.i64("layers", s.model.num_layers));
    s.model.dropouts.word_drop = kv.f64("word_drop", s.model.dropouts.word_drop);
    s.model.dropouts.emb_variational = kv.f64("emb_drop", s.model.dropouts.emb_variational);
    s.model.dropouts.hidden_variational = kv.f64("hidden_drop", s.model.dropouts.hidden_variational);
    s.model.dropouts.weight_drop = kv.f64("weight_drop", s.model.dropouts.weight_drop);
    s.model.bptt_len = static_cast<int>(kv.i64("bptt", s.model.bptt_len));
    s.model.batch_size = static_cast<int>(kv.i64("batch", s.model.batch_size));

    s.train.learning_rate = kv.f64("lr", s.train.learning_rate);
    s.train.grad_clip = kv.f64("clip", s.train.grad_clip);
    s.train.epochs = static_cast<int>(kv.i64("epochs", s.train.epochs));
    s.train.seed = kv.u64("seed", s.train.seed);
    const auto opt = kv.str("optimizer", "sgd");
    if (opt == "sgd") s.train.optimizer = Optimizer::SGD;
    else if (opt == "asgd") s.train.optimizer = Optimizer::AveragedSGD;
    else throw std::runtime_error(kv.name() + ": optimizer must be sgd or asgd");
    s.train.trigger_patience = static_cast<int>(kv.i64("patience", s.train.trigger_patience));

    s.data_multiplier = static_cast<int>(kv.i64("multiplier", s.data_multiplier));
    s.checkpoint_path = kv.str("checkpoint", "");
    return s;
}

inline ExperimentSpec load_experiment_spec(const std::string& path) {
    return experiment_spec_from_kv(KvFile::load(path));
}

}  // namespace desklm
