#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace desklm {

enum class InitKind { Random, Pretrained };

// For Random, (seed, scale) drive the uniform draw; for Pretrained they
// drive the fallback draw used on tokens the embedding set does not cover.
struct InitSpec {
    InitKind kind = InitKind::Random;
    std::uint64_t seed = 0;
    double scale = 0.1;

    bool operator==(const InitSpec& o) const {
        return kind == o.kind && seed == o.seed && scale == o.scale;
    }
};

struct MatrixSpec {
    bool frozen = false;
    InitSpec init;

    bool operator==(const MatrixSpec& o) const { return frozen == o.frozen && init == o.init; }
};

// One cell of the tie/freeze/init configuration space. When tied is set the
// input and output descriptors are identical and the model allocates one
// shared matrix. The output bias is outside this description: it always
// exists and is never frozen.
struct EmbeddingConfig {
    bool tied = false;
    MatrixSpec input;
    MatrixSpec output;
    std::string label;            // canonical, e.g. "untied-frozen-pretrained-unfrozen-random"
    std::string comparison_name;  // nonempty only for the six named comparison configs

    bool uses_pretrained() const {
        return input.init.kind == InitKind::Pretrained ||
               output.init.kind == InitKind::Pretrained;
    }

    void validate() const {
        if (tied && !(input == output))
            throw std::invalid_argument("embedding config: tied requires input == output");
    }
};

namespace detail {
inline std::string state_label(const MatrixSpec& m) {
    std::string s = m.frozen ? "frozen-" : "unfrozen-";
    s += m.init.kind == InitKind::Random ? "random" : "pretrained";
    return s;
}

inline const char* comparison_name_for(const std::string& label) {
    if (label == "tied-unfrozen-random") return "Standard approach";
    if (label == "tied-unfrozen-pretrained") return "Standard approach + pretraining";
    if (label == "untied-frozen-pretrained-unfrozen-pretrained") return "Our approach";
    if (label == "untied-frozen-pretrained-unfrozen-random")
        return "Our approach, but with random output embeddings";
    if (label == "untied-unfrozen-pretrained-unfrozen-pretrained")
        return "Our approach, but without freezing";
    if (label == "untied-unfrozen-pretrained-unfrozen-random")
        return "Our approach, but with random output embeddings and without freezing";
    return "";
}
}  // namespace detail

// The raw combination space: 4 tied (freeze x init) + 16 untied
// (4 input states x 4 output states). Two untied cells are functionally
// redundant with tied ones only when both sides share one random draw;
// here they are kept as distinct storage, so all 20 are returned.
inline std::vector<EmbeddingConfig> enumerate_embedding_configs() {
    std::vector<EmbeddingConfig> out;
    const bool flags[2] = {false, true};
    const InitKind kinds[2] = {InitKind::Random, InitKind::Pretrained};
    for (bool frozen : flags)
        for (InitKind kind : kinds) {
            EmbeddingConfig c;
            c.tied = true;
            c.input.frozen = frozen;
            c.input.init.kind = kind;
            c.output = c.input;
            c.label = "tied-" + detail::state_label(c.input);
            c.comparison_name = detail::comparison_name_for(c.label);
            out.push_back(c);
        }
    for (bool in_frozen : flags)
        for (InitKind in_kind : kinds)
            for (bool out_frozen : flags)
                for (InitKind out_kind : kinds) {
                    EmbeddingConfig c;
                    c.tied = false;
                    c.input.frozen = in_frozen;
                    c.input.init.kind = in_kind;
                    c.output.frozen = out_frozen;
                    c.output.init.kind = out_kind;
                    c.label = "untied-" + detail::state_label(c.input) + "-" +
                              detail::state_label(c.output);
                    c.comparison_name = detail::comparison_name_for(c.label);
                    out.push_back(c);
                }
    return out;
}

// Accepts a canonical label, one of the six comparison names, or a short
// alias for the six.
inline EmbeddingConfig resolve_embedding_config(const std::string& name) {
    std::string want = name;
    if (want == "standard") want = "tied-unfrozen-random";
    else if (want == "standard-pretrained") want = "tied-unfrozen-pretrained";
    else if (want == "ours") want = "untied-frozen-pretrained-unfrozen-pretrained";
    else if (want == "ours-random-output") want = "untied-frozen-pretrained-unfrozen-random";
    else if (want == "ours-unfrozen") want = "untied-unfrozen-pretrained-unfrozen-pretrained";
    else if (want == "ours-unfrozen-random-output")
        want = "untied-unfrozen-pretrained-unfrozen-random";
    for (const auto& c : enumerate_embedding_configs())
        if (c.label == want || (!c.comparison_name.empty() && c.comparison_name == name)) return c;
    throw std::invalid_argument("unknown embedding config label: " + name);
}

// The six configurations compared head to head in the experiments.
inline std::vector<std::string> comparison_config_labels() {
    std::vector<std::string> out;
    for (const auto& c : enumerate_embedding_configs())
        if (!c.comparison_name.empty()) out.push_back(c.label);
    return out;
}

struct DropoutConfig {
    double word_drop = 0.1;            // whole-row embedding dropout
    double emb_variational = 0.65;     // locked mask on embedding output
    double hidden_variational = 0.3;   // locked mask on each LSTM layer output
    double weight_drop = 0.5;          // DropConnect on hidden-to-hidden weights

    void validate() const {
        for (double p : {word_drop, emb_variational, hidden_variational, weight_drop})
            if (!(p >= 0.0 && p < 1.0))
                throw std::invalid_argument("dropout rates must be in [0, 1)");
    }
};

struct ModelConfig {
    int vocab_size = 0;
    int emb_dim = 400;
    int hidden_dim = 1150;
    int num_layers = 3;
    DropoutConfig dropouts;
    int bptt_len = 70;
    int batch_size = 80;

    void validate() const {
        if (vocab_size <= 0 || emb_dim <= 0 || hidden_dim <= 0 || num_layers <= 0 ||
            bptt_len <= 0 || batch_size <= 0)
            throw std::invalid_argument("model config: all dimensions must be positive");
        dropouts.validate();
    }

    // Layer l reads emb_dim when first, hidden_dim otherwise; the last
    // layer emits emb_dim so its output can be projected by a V x d matrix.
    int layer_in(int l) const { return l == 0 ? emb_dim : hidden_dim; }
    int layer_out(int l) const { return l == num_layers - 1 ? emb_dim : hidden_dim; }
};

enum class Optimizer { SGD, AveragedSGD };

struct TrainConfig {
    double learning_rate = 30.0;
    double grad_clip = 0.25;
    int epochs = 1;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::SGD;
    int trigger_patience = 5;  // AveragedSGD: epochs of no dev improvement before averaging

    void validate() const {
        if (!(learning_rate > 0.0))
            throw std::invalid_argument("train config: learning_rate must be positive");
        if (epochs < 0) throw std::invalid_argument("train config: epochs must be nonnegative");
        if (grad_clip < 0.0) throw std::invalid_argument("train config: grad_clip must be nonnegative");
        if (trigger_patience < 1)
            throw std::invalid_argument("train config: trigger_patience must be positive");
    }
};

}  // namespace desklm
