#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "desklm/corpus.hpp"
#include "desklm/text.hpp"
#include "desklm/vocab.hpp"

namespace desklm {

inline constexpr const char* kBpeEow = "</w>";

// Ordered merge list; order is the whole model.
struct MergeTable {
    std::vector<std::pair<std::string, std::string>> merges;

    std::size_t size() const { return merges.size(); }
    bool operator==(const MergeTable& o) const { return merges == o.merges; }
};

// A word as its initial symbol sequence: UTF-8 code points plus the
// end-of-word marker as a final separate symbol. Empty word stays empty.
inline std::vector<std::string> bpe_word_symbols(const std::string& word) {
    std::vector<std::string> symbols;
    if (word.empty()) return symbols;
    auto cps = decode_utf8(word);
    symbols.reserve(cps.size() + 1);
    for (std::uint32_t cp : cps) {
        std::string sym;
        encode_utf8_cp(cp, sym);
        symbols.push_back(std::move(sym));
    }
    symbols.push_back(kBpeEow);
    return symbols;
}

// Replace left-to-right, non-overlapping; the merged symbol is not
// re-examined within the same pass.
inline void bpe_apply_merge(std::vector<std::string>& symbols, const std::string& left,
                            const std::string& right) {
    std::size_t w = 0;
    for (std::size_t r = 0; r < symbols.size();) {
        if (r + 1 < symbols.size() && symbols[r] == left && symbols[r + 1] == right) {
            symbols[w++] = left + right;
            r += 2;
        } else {
            if (w != r) symbols[w] = std::move(symbols[r]);
            ++w;
            ++r;
        }
    }
    symbols.resize(w);
}

inline std::vector<std::string> bpe_encode(const std::string& word, const MergeTable& table) {
    std::vector<std::string> symbols = bpe_word_symbols(word);
    for (const auto& [l, r] : table.merges) {
        if (symbols.size() < 2) break;
        bpe_apply_merge(symbols, l, r);
    }
    return symbols;
}

inline std::string bpe_decode(const std::vector<std::string>& pieces) {
    std::string word;
    for (const auto& p : pieces) word += p;
    const std::string eow = kBpeEow;
    if (word.size() >= eow.size() && word.compare(word.size() - eow.size(), eow.size(), eow) == 0)
        word.erase(word.size() - eow.size());
    return word;
}

// Greedy merge learning: repeatedly take the highest-frequency adjacent
// symbol pair (ties to the lexicographically smallest pair) over word
// types weighted by frequency, until num_merges is reached or no pair is
// left. Special tokens are atomic and never enter learning.
inline MergeTable learn_bpe(const Corpus& corpus, std::size_t num_merges) {
    using Pair = std::pair<std::string, std::string>;
    std::map<std::string, std::uint64_t> word_freq;
    for (const auto& doc : corpus.documents)
        for (std::size_t i = 0; i + 1 < doc.size(); ++i)
            if (!corpus.vocab->is_special(doc[i])) ++word_freq[corpus.vocab->token(doc[i])];

    std::vector<std::vector<std::string>> words;
    std::vector<std::uint64_t> freqs;
    words.reserve(word_freq.size());
    for (const auto& [w, f] : word_freq) {
        words.push_back(bpe_word_symbols(w));
        freqs.push_back(f);
    }

    std::map<Pair, std::int64_t> pair_counts;
    // Words that at some point contained a pair; entries may be stale and
    // are re-checked before use.
    std::map<Pair, std::vector<int>> candidates;
    auto note = [&](const Pair& p, int wid, std::int64_t delta) {
        pair_counts[p] += delta;
        auto& c = candidates[p];
        if (c.empty() || c.back() != wid) c.push_back(wid);
    };
    for (std::size_t wid = 0; wid < words.size(); ++wid) {
        const auto& s = words[wid];
        for (std::size_t i = 0; i + 1 < s.size(); ++i)
            note({s[i], s[i + 1]}, static_cast<int>(wid), static_cast<std::int64_t>(freqs[wid]));
    }

    MergeTable table;
    while (table.merges.size() < num_merges && !pair_counts.empty()) {
        auto best = pair_counts.begin();
        for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it)
            if (it->second > best->second) best = it;
        const Pair merge = best->first;
        table.merges.push_back(merge);

        std::vector<int> ids;
        if (auto ci = candidates.find(merge); ci != candidates.end()) {
            ids = std::move(ci->second);
            candidates.erase(ci);
        }
        int last = -1;
        for (int wid : ids) {
            if (wid == last) continue;
            last = wid;
            auto& s = words[static_cast<std::size_t>(wid)];
            bool has = false;
            for (std::size_t i = 0; i + 1 < s.size() && !has; ++i)
                has = (s[i] == merge.first && s[i + 1] == merge.second);
            if (!has) continue;
            const auto f = static_cast<std::int64_t>(freqs[static_cast<std::size_t>(wid)]);
            for (std::size_t i = 0; i + 1 < s.size(); ++i) {
                Pair p{s[i], s[i + 1]};
                auto it = pair_counts.find(p);
                if (it != pair_counts.end() && (it->second -= f) <= 0) pair_counts.erase(it);
            }
            bpe_apply_merge(s, merge.first, merge.second);
            for (std::size_t i = 0; i + 1 < s.size(); ++i) note({s[i], s[i + 1]}, wid, f);
        }
        // The chosen pair is fully consumed; drop it if the bookkeeping
        // left an empty shell behind.
        if (auto it = pair_counts.find(merge); it != pair_counts.end() && it->second <= 0)
            pair_counts.erase(it);
    }
    return table;
}

// Re-tokenize a word corpus at the BPE level. Special tokens pass through
// as single pieces; the piece vocabulary keeps everything it sees.
inline Corpus bpe_encode_corpus(const Corpus& corpus, const MergeTable& table) {
    std::unordered_map<std::string, std::vector<std::string>> cache;
    std::vector<std::vector<std::string>> piece_docs;
    piece_docs.reserve(corpus.documents.size());
    for (const auto& doc : corpus.documents) {
        std::vector<std::string> pieces;
        for (std::size_t i = 0; i + 1 < doc.size(); ++i) {
            const std::string& tok = corpus.vocab->token(doc[i]);
            if (corpus.vocab->is_special(doc[i])) {
                pieces.push_back(tok);
                continue;
            }
            auto it = cache.find(tok);
            if (it == cache.end()) it = cache.emplace(tok, bpe_encode(tok, table)).first;
            pieces.insert(pieces.end(), it->second.begin(), it->second.end());
        }
        piece_docs.push_back(std::move(pieces));
    }
    auto vocab = std::make_shared<Vocabulary>(build_vocabulary(piece_docs, 1));
    return bind_corpus(piece_docs, vocab, corpus.unit);
}

// Merge table file: "left SP right" per line, in application order.
inline void write_merge_table(const MergeTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write merge table: " + path);
    for (const auto& [l, r] : table.merges) out << l << ' ' << r << '\n';
}

inline MergeTable read_merge_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open merge table: " + path);
    MergeTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto sp = line.find(' ');
        if (sp == std::string::npos || sp == 0 || sp + 1 >= line.size())
            throw std::runtime_error("merge table parse error at line " + std::to_string(lineno) +
                                     ": expected \"left right\"");
        table.merges.emplace_back(line.substr(0, sp), line.substr(sp + 1));
    }
    return table;
}

}  // namespace desklm
