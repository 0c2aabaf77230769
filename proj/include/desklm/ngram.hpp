#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "desklm/corpus.hpp"
#include "desklm/vocab.hpp"

namespace desklm {

// Interpolated modified Kneser-Ney, materialized in backoff form: every
// stored n-gram probability already includes the interpolation term, so a
// backoff walk reproduces the interpolated recursion exactly and the model
// normalizes per context by construction. Values are kept as log10 so an
// ARPA dump round-trips bit-exactly.
class NGramModel {
public:
    using Key = std::vector<int>;

    struct Entry {
        double log10p = 0.0;
        double log10bow = 0.0;  // 0 (= bow 1) unless this gram is an observed context
    };

    NGramModel() = default;
    NGramModel(int order, VocabularyPtr vocab)
        : order_(order), vocab_(std::move(vocab)), tables_(static_cast<std::size_t>(order)) {}

    int order() const { return order_; }
    const VocabularyPtr& vocab() const { return vocab_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    // D1, D2, D3+ for k-grams.
    const std::array<double, 3>& discounts(int k) const {
        return discounts_.at(static_cast<std::size_t>(k - 1));
    }
    const std::map<Key, Entry>& table(int k) const {
        return tables_.at(static_cast<std::size_t>(k - 1));
    }

    // p(word | history), history truncated to the last order-1 tokens.
    double prob(const std::vector<int>& history, int word) const {
        return std::pow(10.0, log10_prob(history, word));
    }

    double log10_prob(const std::vector<int>& history, int word) const {
        const int m = std::min<int>(static_cast<int>(history.size()), order_ - 1);
        const int* h = history.data() + (history.size() - static_cast<std::size_t>(m));
        double acc = 0.0;
        Key key;
        for (int len = m; len >= 0; --len) {
            key.assign(h + (m - len), h + m);
            key.push_back(word);
            const auto& tab = tables_[static_cast<std::size_t>(len)];
            auto it = tab.find(key);
            if (it != tab.end()) return acc + it->second.log10p;
            if (len == 0)
                throw std::runtime_error("ngram: word id " + std::to_string(word) +
                                         " missing from unigram table");
            key.pop_back();
            auto ct = tables_[static_cast<std::size_t>(len - 1)].find(key);
            if (ct != tables_[static_cast<std::size_t>(len - 1)].end())
                acc += ct->second.log10bow;
        }
        return acc;  // unreachable
    }

    bool operator==(const NGramModel& o) const {
        auto eq = [](const std::map<Key, Entry>& a, const std::map<Key, Entry>& b) {
            if (a.size() != b.size()) return false;
            auto ib = b.begin();
            for (auto ia = a.begin(); ia != a.end(); ++ia, ++ib)
                if (ia->first != ib->first || ia->second.log10p != ib->second.log10p ||
                    ia->second.log10bow != ib->second.log10bow)
                    return false;
            return true;
        };
        if (order_ != o.order_ || tables_.size() != o.tables_.size()) return false;
        for (std::size_t i = 0; i < tables_.size(); ++i)
            if (!eq(tables_[i], o.tables_[i])) return false;
        return true;
    }

private:
    int order_ = 0;
    VocabularyPtr vocab_;
    std::vector<std::map<Key, Entry>> tables_;  // tables_[k-1] holds k-grams
    std::vector<std::array<double, 3>> discounts_;
    std::vector<std::string> warnings_;

    friend NGramModel train_kn(const Corpus&, int);
    friend NGramModel mle_unigram(const Corpus&);
    friend NGramModel read_arpa(const std::string&, VocabularyPtr);
};

namespace detail {

// Count-of-count discount estimates; fixed 0.75 when the counts cannot
// support them (missing n1..n4 or a discount outside its valid range).
inline bool kn_discounts(const std::array<std::uint64_t, 4>& n, std::array<double, 3>& d,
                         std::string& why) {
    if (n[0] == 0 || n[1] == 0 || n[2] == 0 || n[3] == 0) {
        std::ostringstream os;
        os << "count-of-counts has zeros (n1=" << n[0] << " n2=" << n[1] << " n3=" << n[2]
           << " n4=" << n[3] << ")";
        why = os.str();
        return false;
    }
    const double y = static_cast<double>(n[0]) / (static_cast<double>(n[0]) + 2.0 * static_cast<double>(n[1]));
    d[0] = 1.0 - 2.0 * y * static_cast<double>(n[1]) / static_cast<double>(n[0]);
    d[1] = 2.0 - 3.0 * y * static_cast<double>(n[2]) / static_cast<double>(n[1]);
    d[2] = 3.0 - 4.0 * y * static_cast<double>(n[3]) / static_cast<double>(n[2]);
    if (!(d[0] > 0.0 && d[0] <= 1.0 && d[1] > 0.0 && d[1] <= 2.0 && d[2] > 0.0 && d[2] <= 3.0)) {
        std::ostringstream os;
        os << "discounts out of range (D1=" << d[0] << " D2=" << d[1] << " D3=" << d[2] << ")";
        why = os.str();
        return false;
    }
    return true;
}

inline double kn_discount_for(const std::array<double, 3>& d, std::uint64_t c) {
    if (c == 0) return 0.0;
    if (c == 1) return d[0];
    if (c == 2) return d[1];
    return d[2];
}

}  // namespace detail

inline NGramModel train_kn(const Corpus& corpus, int order) {
    if (corpus.empty()) throw std::invalid_argument("train_kn: empty corpus");
    if (order < 2) throw std::invalid_argument("train_kn: order must be >= 2");

    using Key = NGramModel::Key;
    const std::vector<int> stream = corpus_stream(corpus);
    const int vocab_size = corpus.vocab->size();

    // counts[k-1]: adjusted counts for k-grams. Highest order raw; lower
    // orders are continuation counts (distinct one-token left extensions).
    // Zero-count entries are contexts/suffixes kept so every stored gram's
    // parent and backoff target exist.
    std::vector<std::map<Key, std::uint64_t>> counts(static_cast<std::size_t>(order));
    if (stream.size() >= static_cast<std::size_t>(order)) {
        auto& top = counts[static_cast<std::size_t>(order - 1)];
        for (std::size_t s = 0; s + static_cast<std::size_t>(order) <= stream.size(); ++s)
            ++top[Key(stream.begin() + static_cast<std::ptrdiff_t>(s),
                      stream.begin() + static_cast<std::ptrdiff_t>(s) + order)];
    }
    for (int k = order; k >= 2; --k) {
        const auto& cur = counts[static_cast<std::size_t>(k - 1)];
        auto& lower = counts[static_cast<std::size_t>(k - 2)];
        for (const auto& [key, c] : cur) {
            Key suf(key.begin() + 1, key.end());
            if (c > 0)
                ++lower[std::move(suf)];
            else
                lower.try_emplace(std::move(suf), 0);
            lower.try_emplace(Key(key.begin(), key.end() - 1), 0);
        }
    }

    NGramModel model(order, corpus.vocab);
    model.discounts_.assign(static_cast<std::size_t>(order), {0.75, 0.75, 0.75});
    for (int k = 1; k <= order; ++k) {
        std::array<std::uint64_t, 4> n{0, 0, 0, 0};
        for (const auto& [key, c] : counts[static_cast<std::size_t>(k - 1)])
            if (c >= 1 && c <= 4) ++n[c - 1];
        std::array<double, 3> d;
        std::string why;
        if (detail::kn_discounts(n, d, why)) {
            model.discounts_[static_cast<std::size_t>(k - 1)] = d;
        } else {
            model.warnings_.push_back("order " + std::to_string(k) + ": " + why +
                                      "; falling back to fixed discount 0.75");
        }
    }

    // Every vocabulary word gets a unigram entry so scoring is total.
    for (int w = 0; w < vocab_size; ++w) counts[0].try_emplace(Key{w}, 0);

    // Per-context totals and count-of-count buckets (observed entries only).
    struct CtxStat {
        std::uint64_t tot = 0, n1 = 0, n2 = 0, n3p = 0;
    };
    std::vector<std::map<Key, CtxStat>> ctx(static_cast<std::size_t>(order));
    for (int k = 2; k <= order; ++k) {
        auto& stats = ctx[static_cast<std::size_t>(k - 1)];
        for (const auto& [key, c] : counts[static_cast<std::size_t>(k - 1)]) {
            if (c == 0) continue;
            auto& st = stats[Key(key.begin(), key.end() - 1)];
            st.tot += c;
            if (c == 1)
                ++st.n1;
            else if (c == 2)
                ++st.n2;
            else
                ++st.n3p;
        }
    }

    // Materialize bottom-up; keep linear probabilities alongside to avoid
    // pow/log round trips inside the recursion.
    std::vector<std::map<Key, double>> linear(static_cast<std::size_t>(order));
    {
        const auto& d = model.discounts_[0];
        std::uint64_t tot = 0;
        for (const auto& [key, c] : counts[0]) tot += c;
        double bow = 0.0;
        if (tot > 0) {
            double mass = 0.0;
            for (const auto& [key, c] : counts[0]) mass += detail::kn_discount_for(d, c);
            bow = mass / static_cast<double>(tot);
        } else {
            model.warnings_.push_back("order 1: no observed unigrams; uniform distribution");
        }
        const double uniform = 1.0 / static_cast<double>(vocab_size);
        for (const auto& [key, c] : counts[0]) {
            double p = tot > 0 ? (static_cast<double>(c) - detail::kn_discount_for(d, c)) /
                                         static_cast<double>(tot) +
                                     bow * uniform
                               : uniform;
            linear[0].emplace(key, p);
            model.tables_[0].emplace(key, NGramModel::Entry{std::log10(p), 0.0});
        }
    }
    for (int k = 2; k <= order; ++k) {
        const auto& d = model.discounts_[static_cast<std::size_t>(k - 1)];
        const auto& stats = ctx[static_cast<std::size_t>(k - 1)];
        // Backoff weights live on the context's (k-1)-gram entry.
        for (const auto& [h, st] : stats) {
            const double bow = (d[0] * static_cast<double>(st.n1) + d[1] * static_cast<double>(st.n2) +
                                d[2] * static_cast<double>(st.n3p)) /
                               static_cast<double>(st.tot);
            model.tables_[static_cast<std::size_t>(k - 2)].at(h).log10bow = std::log10(bow);
        }
        for (const auto& [key, c] : counts[static_cast<std::size_t>(k - 1)]) {
            const double plow = linear[static_cast<std::size_t>(k - 2)].at(Key(key.begin() + 1, key.end()));
            auto st = stats.find(Key(key.begin(), key.end() - 1));
            double p;
            if (st == stats.end()) {
                p = plow;  // context never observed at this order
            } else {
                const double bow = (d[0] * static_cast<double>(st->second.n1) +
                                    d[1] * static_cast<double>(st->second.n2) +
                                    d[2] * static_cast<double>(st->second.n3p)) /
                                   static_cast<double>(st->second.tot);
                p = (static_cast<double>(c) - detail::kn_discount_for(d, c)) /
                        static_cast<double>(st->second.tot) +
                    bow * plow;
            }
            linear[static_cast<std::size_t>(k - 1)].emplace(key, p);
            model.tables_[static_cast<std::size_t>(k - 1)].emplace(key,
                                                                   NGramModel::Entry{std::log10(p), 0.0});
        }
    }
    return model;
}

// Unsmoothed unigram over the corpus's prediction targets. A diagnostic
// model: words it never saw have no entry and cannot be scored.
inline NGramModel mle_unigram(const Corpus& corpus) {
    if (corpus.empty()) throw std::invalid_argument("mle_unigram: empty corpus");
    const std::vector<int> stream = corpus_stream(corpus);
    std::map<int, std::uint64_t> c;
    for (std::size_t t = 1; t < stream.size(); ++t) ++c[stream[t]];
    const double tot = static_cast<double>(stream.size() - 1);
    NGramModel model(1, corpus.vocab);
    model.discounts_.assign(1, {0.0, 0.0, 0.0});
    for (const auto& [w, n] : c)
        model.tables_[0].emplace(NGramModel::Key{w},
                                 NGramModel::Entry{std::log10(static_cast<double>(n) / tot), 0.0});
    return model;
}

// Same stream and token accounting as the neural evaluator: every token of
// every document, EOS included, is predicted once.
inline double ngram_perplexity(const NGramModel& model, const Corpus& corpus) {
    if (corpus.empty()) throw std::invalid_argument("ngram_perplexity: empty corpus");
    const std::vector<int> stream = corpus_stream(corpus);
    const int ctx_len = model.order() - 1;
    double nll = 0.0;
    std::vector<int> history;
    for (std::size_t t = 1; t < stream.size(); ++t) {
        const std::size_t lo = t > static_cast<std::size_t>(ctx_len) ? t - static_cast<std::size_t>(ctx_len) : 0;
        history.assign(stream.begin() + static_cast<std::ptrdiff_t>(lo),
                       stream.begin() + static_cast<std::ptrdiff_t>(t));
        nll -= model.log10_prob(history, stream[t]) * std::log(10.0);
    }
    return std::exp(nll / static_cast<double>(stream.size() - 1));
}

// ARPA text dump: log10 probabilities, tab-separated, backoff column only
// where a gram carries one. %.17g keeps the stored doubles exact.
inline void write_arpa(const NGramModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write arpa file: " + path);
    out << "\\data\\\n";
    for (int k = 1; k <= model.order(); ++k)
        out << "ngram " << k << "=" << model.table(k).size() << "\n";
    char buf[64];
    const auto& vocab = *model.vocab();
    for (int k = 1; k <= model.order(); ++k) {
        out << "\n\\" << k << "-grams:\n";
        for (const auto& [key, e] : model.table(k)) {
            std::snprintf(buf, sizeof(buf), "%.17g", e.log10p);
            out << buf;
            for (std::size_t i = 0; i < key.size(); ++i)
                out << (i == 0 ? '\t' : ' ') << vocab.token(key[i]);
            if (e.log10bow != 0.0) {
                std::snprintf(buf, sizeof(buf), "%.17g", e.log10bow);
                out << '\t' << buf;
            }
            out << "\n";
        }
    }
    out << "\n\\end\\\n";
}

inline NGramModel read_arpa(const std::string& path, VocabularyPtr vocab) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open arpa file: " + path);
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& msg) -> std::runtime_error {
        return std::runtime_error("arpa parse error at line " + std::to_string(lineno) + ": " + msg);
    };
    // Header.
    bool in_data = false;
    std::vector<std::size_t> sizes;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            if (in_data) break;
            continue;
        }
        if (line == "\\data\\") {
            in_data = true;
            continue;
        }
        if (!in_data) throw fail("expected \\data\\ header");
        unsigned k = 0;
        unsigned long long n = 0;
        if (std::sscanf(line.c_str(), "ngram %u=%llu", &k, &n) != 2 || k != sizes.size() + 1)
            throw fail("bad ngram count line");
        sizes.push_back(static_cast<std::size_t>(n));
    }
    if (sizes.empty()) throw fail("no ngram orders declared");

    NGramModel model(static_cast<int>(sizes.size()), vocab);
    model.discounts_.assign(sizes.size(), {0.0, 0.0, 0.0});
    int cur = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line == "\\end\\") break;
        if (line.size() > 2 && line[0] == '\\' && line.back() == ':') {
            cur = std::atoi(line.c_str() + 1);
            if (cur < 1 || cur > model.order()) throw fail("bad section header " + line);
            continue;
        }
        if (cur == 0) throw fail("entry before any \\k-grams: section");
        std::size_t tab1 = line.find('\t');
        if (tab1 == std::string::npos) throw fail("missing tab after log probability");
        char* end = nullptr;
        NGramModel::Entry e;
        e.log10p = std::strtod(line.c_str(), &end);
        if (end != line.c_str() + tab1) throw fail("bad log probability");
        std::size_t tab2 = line.find('\t', tab1 + 1);
        std::string grams = line.substr(tab1 + 1, tab2 == std::string::npos ? std::string::npos
                                                                            : tab2 - tab1 - 1);
        if (tab2 != std::string::npos) {
            const char* s = line.c_str() + tab2 + 1;
            e.log10bow = std::strtod(s, &end);
            if (end == s) throw fail("bad backoff weight");
        }
        NGramModel::Key key;
        std::istringstream gs(grams);
        std::string tok;
        while (gs >> tok) {
            int id = vocab->lookup(tok);
            if (id < 0) throw fail("token not in vocabulary: " + tok);
            key.push_back(id);
        }
        if (static_cast<int>(key.size()) != cur) throw fail("gram arity mismatch");
        model.tables_[static_cast<std::size_t>(cur - 1)].emplace(std::move(key), e);
    }
    for (std::size_t i = 0; i < sizes.size(); ++i)
        if (model.tables_[i].size() != sizes[i])
            throw std::runtime_error("arpa parse error: declared " + std::to_string(sizes[i]) +
                                     " " + std::to_string(i + 1) + "-grams, found " +
                                     std::to_string(model.tables_[i].size()));
    return model;
}

}  // namespace desklm
