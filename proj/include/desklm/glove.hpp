#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "desklm/cooc.hpp"
#include "desklm/corpus.hpp"
#include "desklm/embeddings.hpp"
#include "desklm/matrix.hpp"
#include "desklm/rng.hpp"

namespace desklm {

struct GloveConfig {
    int dim = 400;
    int window = 15;
    double x_max = 100.0;
    double alpha = 0.75;
    int iterations = 15;
    double learning_rate = 0.05;
    std::uint64_t min_count = 5;
    std::uint64_t seed = 0;

    void validate() const {
        if (dim <= 0) throw std::invalid_argument("glove: dim must be positive");
        if (window <= 0) throw std::invalid_argument("glove: window must be positive");
        if (!(x_max > 0.0)) throw std::invalid_argument("glove: x_max must be positive");
        if (!(alpha > 0.0 && alpha <= 1.0))
            throw std::invalid_argument("glove: alpha must be in (0, 1]");
        if (iterations < 0) throw std::invalid_argument("glove: iterations must be nonnegative");
        if (!(learning_rate > 0.0))
            throw std::invalid_argument("glove: learning_rate must be positive");
    }
};

// Focus/context vectors plus the two bias vectors of the weighted
// least-squares objective.
struct GloveParams {
    Matrix focus;                      // V x d
    Matrix context;                    // V x d
    std::vector<double> focus_bias;    // V
    std::vector<double> context_bias;  // V

    int vocab() const { return focus.rows; }
    int dim() const { return focus.cols; }

    bool finite() const {
        auto vec_ok = [](const std::vector<double>& v) {
            for (double x : v)
                if (!std::isfinite(x)) return false;
            return true;
        };
        return all_finite(focus) && all_finite(context) && vec_ok(focus_bias) &&
               vec_ok(context_bias);
    }

    static GloveParams zeros(int vocab, int dim) {
        GloveParams p;
        p.focus = Matrix(vocab, dim);
        p.context = Matrix(vocab, dim);
        p.focus_bias.assign(static_cast<std::size_t>(vocab), 0.0);
        p.context_bias.assign(static_cast<std::size_t>(vocab), 0.0);
        return p;
    }
};

// Uniform init in [-0.5/d, 0.5/d] per coordinate, biases included.
inline GloveParams glove_init_params(int vocab, int dim, std::uint64_t seed) {
    GloveParams p = GloveParams::zeros(vocab, dim);
    Rng rng(seed);
    const double half = 0.5 / static_cast<double>(dim);
    for (double& x : p.focus.a) x = rng.uniform(-half, half);
    for (double& x : p.context.a) x = rng.uniform(-half, half);
    for (double& x : p.focus_bias) x = rng.uniform(-half, half);
    for (double& x : p.context_bias) x = rng.uniform(-half, half);
    return p;
}

// min(1, (x/x_max)^alpha); exactly 1 at and above x_max.
inline double glove_weight(double x, double x_max, double alpha) {
    if (x >= x_max) return 1.0;
    return std::pow(x / x_max, alpha);
}

// J = sum over entries of f(X_ij) (w_i.w~_j + b_i + b~_j - ln X_ij)^2,
// with its full analytic gradient. Both directions of a symmetric table
// are separate entries, as in the table itself.
inline std::pair<double, GloveParams> glove_objective_and_grads(
        const GloveParams& params, const std::vector<CoocTable::Entry>& entries,
        const GloveConfig& cfg) {
    if (entries.empty()) throw std::invalid_argument("glove objective: empty table");
    if (!params.finite()) throw std::runtime_error("glove objective: nonfinite parameter");
    const int d = params.dim();
    GloveParams grads = GloveParams::zeros(params.vocab(), d);
    double loss = 0.0;
    for (const auto& e : entries) {
        if (!(e.x > 0.0)) throw std::invalid_argument("glove objective: X entries must be positive");
        const double* wi = params.focus.row(e.focus);
        const double* wj = params.context.row(e.context);
        double diff = params.focus_bias[static_cast<std::size_t>(e.focus)] +
                      params.context_bias[static_cast<std::size_t>(e.context)] - std::log(e.x);
        for (int k = 0; k < d; ++k) diff += wi[k] * wj[k];
        const double f = glove_weight(e.x, cfg.x_max, cfg.alpha);
        loss += f * diff * diff;
        const double c = 2.0 * f * diff;
        double* gwi = grads.focus.row(e.focus);
        double* gwj = grads.context.row(e.context);
        for (int k = 0; k < d; ++k) {
            gwi[k] += c * wj[k];
            gwj[k] += c * wi[k];
        }
        grads.focus_bias[static_cast<std::size_t>(e.focus)] += c;
        grads.context_bias[static_cast<std::size_t>(e.context)] += c;
    }
    return {loss, std::move(grads)};
}

inline std::pair<double, GloveParams> glove_objective_and_grads(const GloveParams& params,
                                                                const CoocTable& table,
                                                                const GloveConfig& cfg) {
    if (params.vocab() != table.vocab_size())
        throw std::invalid_argument("glove objective: params/table vocab size mismatch");
    return glove_objective_and_grads(params, table.entries(), cfg);
}

// One AdaGrad pass over shuffled entries. Per-coordinate accumulators start
// at 1.0; each step uses the accumulator before adding the new square.
// Returns the objective as evaluated at the parameters each entry saw.
namespace detail {
inline double glove_iteration(GloveParams& p, GloveParams& accum,
                              std::vector<CoocTable::Entry>& entries, const GloveConfig& cfg,
                              std::uint64_t shuffle_seed, std::vector<double>& gw,
                              std::vector<double>& gc) {
    Rng rng(shuffle_seed);
    rng.shuffle(entries);
    const int d = cfg.dim;
    const double lr = cfg.learning_rate;
    double loss = 0.0;
    for (const auto& e : entries) {
        double* wi = p.focus.row(e.focus);
        double* wj = p.context.row(e.context);
        double diff = p.focus_bias[static_cast<std::size_t>(e.focus)] +
                      p.context_bias[static_cast<std::size_t>(e.context)] - std::log(e.x);
        for (int k = 0; k < d; ++k) diff += wi[k] * wj[k];
        const double f = glove_weight(e.x, cfg.x_max, cfg.alpha);
        loss += f * diff * diff;
        const double c = 2.0 * f * diff;
        for (int k = 0; k < d; ++k) {
            gw[static_cast<std::size_t>(k)] = c * wj[k];
            gc[static_cast<std::size_t>(k)] = c * wi[k];
        }
        double* awi = accum.focus.row(e.focus);
        double* awj = accum.context.row(e.context);
        for (int k = 0; k < d; ++k) {
            const double g1 = gw[static_cast<std::size_t>(k)];
            wi[k] -= lr * g1 / std::sqrt(awi[k]);
            awi[k] += g1 * g1;
            const double g2 = gc[static_cast<std::size_t>(k)];
            wj[k] -= lr * g2 / std::sqrt(awj[k]);
            awj[k] += g2 * g2;
        }
        double& bi = p.focus_bias[static_cast<std::size_t>(e.focus)];
        double& abi = accum.focus_bias[static_cast<std::size_t>(e.focus)];
        bi -= lr * c / std::sqrt(abi);
        abi += c * c;
        double& bj = p.context_bias[static_cast<std::size_t>(e.context)];
        double& abj = accum.context_bias[static_cast<std::size_t>(e.context)];
        bj -= lr * c / std::sqrt(abj);
        abj += c * c;
    }
    return loss;
}
}  // namespace detail

// Full pipeline: count co-occurrences, fit by AdaGrad over shuffled entries,
// export w + w~ per surviving token. Deterministic for a given
// (corpus, cfg) regardless of how counting was sharded.
inline EmbeddingSet train_glove(const Corpus& corpus, const GloveConfig& cfg,
                                std::vector<double>* iteration_loss = nullptr) {
    cfg.validate();
    if (corpus.empty()) throw std::invalid_argument("train_glove: empty corpus");

    CoocTable table = count_cooccurrences(corpus, cfg.window, cfg.min_count);
    std::vector<int> ids = cooc_vocabulary(corpus, cfg.min_count);
    std::vector<int> pos(static_cast<std::size_t>(corpus.vocab->size()), -1);
    for (std::size_t k = 0; k < ids.size(); ++k) pos[static_cast<std::size_t>(ids[k])] = static_cast<int>(k);

    auto entries = table.entries();
    for (auto& e : entries) {
        e.focus = pos[static_cast<std::size_t>(e.focus)];
        e.context = pos[static_cast<std::size_t>(e.context)];
    }
    // Canonical order before the seeded shuffles; the hash map above has none.
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return a.focus != b.focus ? a.focus < b.focus : a.context < b.context;
    });

    const int vocab = static_cast<int>(ids.size());
    GloveParams params = glove_init_params(vocab, cfg.dim, derive_seed(cfg.seed, fnv1a("glove.init")));
    GloveParams accum = GloveParams::zeros(vocab, cfg.dim);
    std::fill(accum.focus.a.begin(), accum.focus.a.end(), 1.0);
    std::fill(accum.context.a.begin(), accum.context.a.end(), 1.0);
    std::fill(accum.focus_bias.begin(), accum.focus_bias.end(), 1.0);
    std::fill(accum.context_bias.begin(), accum.context_bias.end(), 1.0);

    const std::uint64_t shuffle_base = derive_seed(cfg.seed, fnv1a("glove.shuffle"));
    std::vector<double> gw(static_cast<std::size_t>(cfg.dim)), gc(static_cast<std::size_t>(cfg.dim));
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        double loss = detail::glove_iteration(params, accum, entries, cfg,
                                              derive_seed(shuffle_base, static_cast<std::uint64_t>(iter)),
                                              gw, gc);
        if (!std::isfinite(loss))
            throw std::runtime_error("glove training diverged at iteration " +
                                     std::to_string(iter + 1) + " (nonfinite loss)");
        if (iteration_loss) iteration_loss->push_back(loss);
    }

    EmbeddingSet set(cfg.dim);
    std::vector<double> vec(static_cast<std::size_t>(cfg.dim));
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const double* w = params.focus.row(static_cast<int>(k));
        const double* wt = params.context.row(static_cast<int>(k));
        for (int j = 0; j < cfg.dim; ++j) vec[static_cast<std::size_t>(j)] = w[j] + wt[j];
        set.add(corpus.vocab->token(ids[k]), vec);
    }
    set.source_name = "glove";
    set.min_count = cfg.min_count;
    return set;
}

}  // namespace desklm
