#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "desklm/corpus.hpp"

namespace desklm {

// Sparse symmetric co-occurrence table. A pair at distance d contributes
// 1/d to both (i,j) and (j,i). Weights are stored as integer multiples of
// 1/lcm(1..window), which keeps them exact: shard merges are plain integer
// additions and give bit-identical results for any sharding.
class CoocTable {
public:
    CoocTable() = default;
    CoocTable(int window, int vocab_size)
        : window_(window), vocab_size_(vocab_size), denom_(lcm_upto(window)) {}

    static std::int64_t lcm_upto(int n) {
        std::int64_t l = 1;
        for (int i = 2; i <= n; ++i) l = std::lcm(l, static_cast<std::int64_t>(i));
        return l;
    }

    static std::uint64_t key(int i, int j) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
               static_cast<std::uint32_t>(j);
    }

    void add(int i, int j, int distance) {
        std::int64_t num = denom_ / distance;
        cells_[key(i, j)] += num;
        cells_[key(j, i)] += num;
    }

    void merge(const CoocTable& other) {
        if (other.window_ != window_)
            throw std::invalid_argument("CoocTable::merge: window mismatch");
        for (const auto& [k, v] : other.cells_) cells_[k] += v;
    }

    double weight(int i, int j) const {
        auto it = cells_.find(key(i, j));
        return it == cells_.end() ? 0.0
                                  : static_cast<double>(it->second) / static_cast<double>(denom_);
    }

    int window() const { return window_; }
    int vocab_size() const { return vocab_size_; }
    std::int64_t denom() const { return denom_; }
    std::size_t nonzeros() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }
    const std::unordered_map<std::uint64_t, std::int64_t>& cells() const { return cells_; }

    // Dense-id list of (i, j, X_ij) in unspecified order.
    struct Entry {
        int focus;
        int context;
        double x;
    };
    std::vector<Entry> entries() const {
        std::vector<Entry> out;
        out.reserve(cells_.size());
        for (const auto& [k, v] : cells_) {
            out.push_back(Entry{static_cast<int>(k >> 32),
                                static_cast<int>(k & 0xffffffffULL),
                                static_cast<double>(v) / static_cast<double>(denom_)});
        }
        return out;
    }

private:
    int window_ = 0;
    int vocab_size_ = 0;
    std::int64_t denom_ = 1;
    std::unordered_map<std::uint64_t, std::int64_t> cells_;
};

// Per-id frequencies over the corpus content (EOS excluded).
inline std::vector<std::uint64_t> id_frequencies(const Corpus& corpus) {
    std::vector<std::uint64_t> freq(static_cast<std::size_t>(corpus.vocab->size()), 0);
    for (const auto& doc : corpus.documents)
        for (std::size_t i = 0; i + 1 < doc.size(); ++i) ++freq[static_cast<std::size_t>(doc[i])];
    return freq;
}

namespace detail {
inline void count_cooc_range(const Corpus& corpus, std::size_t doc_begin, std::size_t doc_end,
                             int window, const std::vector<char>& active, CoocTable& table) {
    for (std::size_t d = doc_begin; d < doc_end; ++d) {
        const auto& doc = corpus.documents[d];
        const std::size_t n = doc.size() - 1;  // content only, EOS excluded
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[static_cast<std::size_t>(doc[i])]) continue;
            const std::size_t jmax = std::min(n, i + static_cast<std::size_t>(window) + 1);
            for (std::size_t j = i + 1; j < jmax; ++j) {
                if (!active[static_cast<std::size_t>(doc[j])]) continue;
                table.add(doc[i], doc[j], static_cast<int>(j - i));
            }
        }
    }
}
}  // namespace detail

// Symmetric windowed co-occurrence counts over documents. Tokens whose
// corpus frequency is below min_count are excluded from the table's
// vocabulary; windows never cross document boundaries. `shards` only
// partitions the work: the merged result is identical for any value.
inline CoocTable count_cooccurrences(const Corpus& corpus, int window, std::uint64_t min_count,
                                     int shards = 1) {
    if (window <= 0) throw std::invalid_argument("count_cooccurrences: window must be positive");
    if (shards <= 0) shards = 1;
    auto freq = id_frequencies(corpus);
    std::vector<char> active(freq.size(), 0);
    for (std::size_t i = 0; i < freq.size(); ++i)
        active[i] = (freq[i] >= min_count && freq[i] > 0) ? 1 : 0;

    CoocTable table(window, corpus.vocab->size());
    const std::size_t ndocs = corpus.documents.size();
    if (shards == 1 || ndocs <= 1) {
        detail::count_cooc_range(corpus, 0, ndocs, window, active, table);
    } else {
        const std::size_t per = (ndocs + shards - 1) / static_cast<std::size_t>(shards);
        for (std::size_t b = 0; b < ndocs; b += per) {
            CoocTable part(window, corpus.vocab->size());
            detail::count_cooc_range(corpus, b, std::min(ndocs, b + per), window, active, part);
            table.merge(part);
        }
    }
    return table;
}

// Ids that survived the min_count cutoff for a given (corpus, min_count),
// i.e. the table's vocabulary (observed tokens only), in increasing id order.
inline std::vector<int> cooc_vocabulary(const Corpus& corpus, std::uint64_t min_count) {
    auto freq = id_frequencies(corpus);
    std::vector<int> ids;
    for (std::size_t i = 0; i < freq.size(); ++i)
        if (freq[i] >= min_count && freq[i] > 0) ids.push_back(static_cast<int>(i));
    return ids;
}

}  // namespace desklm
