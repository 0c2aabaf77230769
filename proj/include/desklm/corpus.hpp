#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "desklm/text.hpp"
#include "desklm/vocab.hpp"

namespace desklm {

enum class DocUnit { Sentence, Article };

// Normalization + rare-word regime for raw text.
//   Std:  rare words (train frequency < std_min_count) become UNK.
//   Rare: same normalization, rare words kept.
struct PreprocessSpec {
    bool lowercase = true;
    bool map_numbers = true;
    bool strip_punct = true;
    enum class Mode { Std, Rare } mode = Mode::Rare;
    std::uint64_t std_min_count = 5;
};

// One whitespace-tokenized line -> normalized tokens. Numeric tokens (at
// least one ASCII digit, no letter-like code point) become the number
// symbol; tokens made only of punctuation/symbols are dropped. `base` is
// the byte offset of `line` in its source, used for UTF-8 error positions.
inline std::vector<std::string> normalize_tokens(std::string_view line, const PreprocessSpec& spec,
                                                 std::size_t base = 0) {
    // Validate the whole line first so error offsets are absolute.
    std::size_t pos = 0;
    while (pos < line.size()) decode_utf8_cp(line, pos, base);

    std::vector<std::string> out;
    for (std::string_view raw : split_whitespace(line)) {
        std::string tok = spec.lowercase ? ascii_lower(raw) : std::string(raw);
        bool has_digit = false, has_alpha = false, all_punct = true;
        std::size_t p = 0;
        while (p < tok.size()) {
            std::uint32_t cp = decode_utf8_cp(tok, p);
            if (is_ascii_digit(cp)) {
                has_digit = true;
                all_punct = false;
            } else if (is_punct_cp(cp)) {
                // stays all_punct
            } else {
                has_alpha = has_alpha || is_alpha_cp(cp);
                all_punct = false;
            }
        }
        if (spec.map_numbers && has_digit && !has_alpha) {
            out.push_back(kNumToken);
        } else if (spec.strip_punct && all_punct && !tok.empty()) {
            // dropped
        } else {
            out.push_back(std::move(tok));
        }
    }
    return out;
}

// Ordered documents of token ids bound to one vocabulary. Every document
// ends with exactly one EOS id; a literal EOS string inside a document is
// treated as out-of-vocabulary rather than a boundary.
struct Corpus {
    std::vector<std::vector<int>> documents;
    DocUnit unit = DocUnit::Sentence;
    VocabularyPtr vocab;

    // Content tokens, excluding the per-document EOS.
    std::uint64_t content_tokens() const {
        std::uint64_t n = 0;
        for (const auto& d : documents) n += d.size() - 1;
        return n;
    }

    // All tokens including EOS: the number of positions a language model predicts.
    std::uint64_t total_tokens() const {
        std::uint64_t n = 0;
        for (const auto& d : documents) n += d.size();
        return n;
    }

    bool empty() const { return documents.empty(); }
};

// The evaluation stream: one leading EOS, then every document in order.
// A model at position t predicts stream[t+1], so every token of every
// document (including each EOS) is predicted exactly once.
inline std::vector<int> corpus_stream(const Corpus& corpus) {
    std::vector<int> s;
    s.reserve(static_cast<std::size_t>(corpus.total_tokens()) + 1);
    s.push_back(Vocabulary::kEosId);
    for (const auto& doc : corpus.documents) s.insert(s.end(), doc.begin(), doc.end());
    return s;
}

inline std::vector<int> bind_document(const std::vector<std::string>& tokens,
                                      const Vocabulary& vocab) {
    std::vector<int> doc;
    doc.reserve(tokens.size() + 1);
    for (const auto& t : tokens) {
        int id = vocab.to_id(t);
        if (id == Vocabulary::kEosId) id = Vocabulary::kUnkId;
        doc.push_back(id);
    }
    doc.push_back(Vocabulary::kEosId);
    return doc;
}

// Token documents from a pre-tokenized text file: one sentence per line, or
// blank-line separated articles. Tokens are taken verbatim (no normalization).
inline std::vector<std::vector<std::string>> read_token_documents(const std::string& path,
                                                                  DocUnit unit) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);
    std::vector<std::vector<std::string>> docs;
    std::vector<std::string> article;
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
        std::size_t pos = 0;
        while (pos < line.size()) decode_utf8_cp(line, pos, offset);
        auto parts = split_whitespace(line);
        if (unit == DocUnit::Sentence) {
            if (!parts.empty()) {
                docs.emplace_back(parts.begin(), parts.end());
            }
        } else {
            if (parts.empty()) {
                if (!article.empty()) docs.push_back(std::move(article));
                article.clear();
            } else {
                article.insert(article.end(), parts.begin(), parts.end());
            }
        }
        offset += line.size() + 1;
    }
    if (unit == DocUnit::Article && !article.empty()) docs.push_back(std::move(article));
    return docs;
}

inline void write_token_documents(const std::vector<std::vector<std::string>>& docs,
                                  const std::string& path, DocUnit unit) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write corpus file: " + path);
    bool first = true;
    for (const auto& doc : docs) {
        if (unit == DocUnit::Article && !first) out << "\n";
        first = false;
        for (std::size_t i = 0; i < doc.size(); ++i) {
            if (i) out << ' ';
            out << doc[i];
        }
        out << '\n';
    }
}

inline TokenCounts count_tokens(const std::vector<std::vector<std::string>>& docs) {
    TokenCounts counts;
    for (const auto& doc : docs)
        for (const auto& t : doc) ++counts[t];
    return counts;
}

// Vocabulary over a raw token stream. Tokens with count < min_count are
// excluded and will map to UNK; specials are always present.
inline Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs,
                                   std::uint64_t min_count) {
    return Vocabulary::from_counts(count_tokens(docs), min_count);
}

inline Corpus bind_corpus(const std::vector<std::vector<std::string>>& docs, VocabularyPtr vocab,
                          DocUnit unit) {
    Corpus c;
    c.unit = unit;
    c.vocab = std::move(vocab);
    c.documents.reserve(docs.size());
    for (const auto& d : docs) c.documents.push_back(bind_document(d, *c.vocab));
    return c;
}

// Exact frequencies over a corpus; EOS is structural and excluded.
inline FrequencyList build_frequency_list(const Corpus& corpus) {
    TokenCounts counts;
    for (const auto& doc : corpus.documents) {
        for (std::size_t i = 0; i + 1 < doc.size(); ++i)
            ++counts[corpus.vocab->token(doc[i])];
    }
    return FrequencyList(std::move(counts));
}

// Replaces a token by UNK iff its count in `list` is < K (absent counts as
// zero). K = 0 is the identity; specials are never replaced.
inline Corpus apply_unk_cutoff(const Corpus& corpus, const FrequencyList& list, std::uint64_t k) {
    Corpus out = corpus;
    if (k == 0) return out;
    const Vocabulary& v = *corpus.vocab;
    std::vector<char> replace(static_cast<std::size_t>(v.size()), 0);
    for (int id = 0; id < v.size(); ++id) {
        if (v.is_special(id)) continue;
        replace[static_cast<std::size_t>(id)] = list.count(v.token(id)) < k ? 1 : 0;
    }
    for (auto& doc : out.documents)
        for (int& id : doc)
            if (replace[static_cast<std::size_t>(id)]) id = Vocabulary::kUnkId;
    return out;
}

struct CoverageStats {
    std::uint64_t covered_types = 0, total_types = 0;
    std::uint64_t covered_tokens = 0, total_tokens = 0;
    double type_coverage = 0.0;
    double token_coverage = 0.0;
};

// Fraction of target types/tokens present in `vocab_tokens`. EOS excluded.
// Empty denominators yield coverage 0.
inline CoverageStats coverage_report(const std::unordered_set<std::string>& vocab_tokens,
                                     const Corpus& target) {
    CoverageStats s;
    std::unordered_set<std::string> seen;
    for (const auto& doc : target.documents) {
        for (std::size_t i = 0; i + 1 < doc.size(); ++i) {
            const std::string& tok = target.vocab->token(doc[i]);
            bool covered = vocab_tokens.count(tok) != 0;
            ++s.total_tokens;
            if (covered) ++s.covered_tokens;
            if (seen.insert(tok).second) {
                ++s.total_types;
                if (covered) ++s.covered_types;
            }
        }
    }
    s.type_coverage =
        s.total_types ? static_cast<double>(s.covered_types) / static_cast<double>(s.total_types)
                      : 0.0;
    s.token_coverage = s.total_tokens ? static_cast<double>(s.covered_tokens) /
                                            static_cast<double>(s.total_tokens)
                                      : 0.0;
    return s;
}

// Rare-word statistics at a frequency threshold: a type is rare when it
// occurs <= threshold times. Cross-dataset columns measure how training
// types/tokens fare under the pretraining corpus counts (absent = 0).
struct RareStats {
    std::uint64_t threshold = 5;
    std::uint64_t train_types = 0, train_rare_types = 0;
    std::uint64_t train_tokens = 0, train_rare_tokens = 0;
    std::uint64_t pretrain_types = 0, pretrain_rare_types = 0;
    std::uint64_t pretrain_tokens = 0, pretrain_rare_tokens = 0;
    std::uint64_t cross_rare_types = 0, cross_rare_tokens = 0;

    static double pct(std::uint64_t num, std::uint64_t den) {
        return den ? 100.0 * static_cast<double>(num) / static_cast<double>(den) : 0.0;
    }
    double train_type_pct() const { return pct(train_rare_types, train_types); }
    double train_token_pct() const { return pct(train_rare_tokens, train_tokens); }
    double pretrain_type_pct() const { return pct(pretrain_rare_types, pretrain_types); }
    double pretrain_token_pct() const { return pct(pretrain_rare_tokens, pretrain_tokens); }
    double cross_type_pct() const { return pct(cross_rare_types, train_types); }
    double cross_token_pct() const { return pct(cross_rare_tokens, train_tokens); }
};

inline RareStats rare_word_report(const Corpus& train, const Corpus& pretrain,
                                  std::uint64_t threshold = 5) {
    if (train.empty() || train.content_tokens() == 0)
        throw std::runtime_error("rare_word_report: empty train corpus");
    RareStats s;
    s.threshold = threshold;
    FrequencyList train_freq = build_frequency_list(train);
    FrequencyList pre_freq = build_frequency_list(pretrain);

    for (const auto& [tok, c] : train_freq.counts()) {
        ++s.train_types;
        s.train_tokens += c;
        if (c <= threshold) {
            ++s.train_rare_types;
            s.train_rare_tokens += c;
        }
        if (pre_freq.count(tok) <= threshold) {
            ++s.cross_rare_types;
            s.cross_rare_tokens += c;
        }
    }
    for (const auto& [tok, c] : pre_freq.counts()) {
        ++s.pretrain_types;
        s.pretrain_tokens += c;
        if (c <= threshold) {
            ++s.pretrain_rare_types;
            s.pretrain_rare_tokens += c;
        }
    }
    return s;
}

// Frequency list file: "token<TAB>count", descending count then token.
inline void write_frequency_list(const FrequencyList& list, const std::string& path) {
    std::vector<std::pair<std::string, std::uint64_t>> rows(list.counts().begin(),
                                                            list.counts().end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write frequency list: " + path);
    for (const auto& [tok, c] : rows) out << tok << '\t' << c << '\n';
}

inline FrequencyList read_frequency_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open frequency list: " + path);
    TokenCounts counts;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("frequency list: missing tab at line " +
                                     std::to_string(lineno));
        try {
            counts[line.substr(0, tab)] = std::stoull(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw std::runtime_error("frequency list: bad count at line " + std::to_string(lineno));
        }
    }
    return FrequencyList(std::move(counts));
}

// Rare-word replacement on token documents: tokens whose count in `list` is
// below `threshold` become UNK. This is the textual (Std-regime) pass;
// apply_unk_cutoff is the id-level equivalent.
inline std::vector<std::vector<std::string>> replace_rare_tokens(
    const std::vector<std::vector<std::string>>& docs, const FrequencyList& list,
    std::uint64_t threshold) {
    std::vector<std::vector<std::string>> out = docs;
    if (threshold == 0) return out;
    for (auto& doc : out)
        for (auto& tok : doc)
            if (tok != kUnkToken && tok != kNumToken && tok != kEosToken &&
                list.count(tok) < threshold)
                tok = kUnkToken;
    return out;
}

}  // namespace desklm
