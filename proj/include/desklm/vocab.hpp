#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace desklm {

// Reserved symbols. They exist in every vocabulary, at fixed ids, whether or
// not they occur in the data.
inline constexpr const char* kUnkToken = "<unk>";
inline constexpr const char* kNumToken = "N";
inline constexpr const char* kEosToken = "<eos>";

using TokenCounts = std::unordered_map<std::string, std::uint64_t>;

class Vocabulary {
public:
    struct Entry {
        std::string token;
        std::uint64_t count = 0;
    };

    static constexpr int kUnkId = 0;
    static constexpr int kNumId = 1;
    static constexpr int kEosId = 2;

    Vocabulary() {
        add_entry(kUnkToken, 0);
        add_entry(kNumToken, 0);
        add_entry(kEosToken, 0);
    }

    // Builds from exact counts. Tokens with count < min_count are excluded
    // (they will map to UNK). Non-special ids are assigned by descending
    // count, ties broken by token, so two runs over the same stream agree.
    static Vocabulary from_counts(const TokenCounts& counts, std::uint64_t min_count) {
        Vocabulary v;
        std::vector<const TokenCounts::value_type*> kept;
        kept.reserve(counts.size());
        for (const auto& kv : counts) {
            if (v.index_.count(kv.first)) {
                v.entries_[v.index_.at(kv.first)].count += kv.second;
                continue;
            }
            if (kv.second >= min_count) kept.push_back(&kv);
        }
        std::sort(kept.begin(), kept.end(), [](const auto* a, const auto* b) {
            if (a->second != b->second) return a->second > b->second;
            return a->first < b->first;
        });
        for (const auto* kv : kept) v.add_entry(kv->first, kv->second);
        return v;
    }

    // Rebuilds a vocabulary verbatim (checkpoint round-trips). The pinned
    // specials must already sit at ids 0..2.
    static Vocabulary from_entries(const std::vector<Entry>& entries) {
        if (entries.size() < 3 || entries[0].token != kUnkToken || entries[1].token != kNumToken ||
            entries[2].token != kEosToken)
            throw std::invalid_argument("vocabulary entries must start with the special tokens");
        Vocabulary v;
        for (std::size_t i = 0; i < 3; ++i) v.entries_[i].count = entries[i].count;
        for (std::size_t i = 3; i < entries.size(); ++i) {
            if (v.index_.count(entries[i].token))
                throw std::invalid_argument("duplicate vocabulary token: " + entries[i].token);
            v.add_entry(entries[i].token, entries[i].count);
        }
        return v;
    }

    int size() const { return static_cast<int>(entries_.size()); }

    const Entry& entry(int id) const { return entries_.at(static_cast<std::size_t>(id)); }
    const std::string& token(int id) const { return entry(id).token; }
    std::uint64_t count(int id) const { return entry(id).count; }
    const std::vector<Entry>& entries() const { return entries_; }

    // -1 when absent.
    int lookup(const std::string& token) const {
        auto it = index_.find(token);
        return it == index_.end() ? -1 : it->second;
    }

    // Absent tokens map to UNK.
    int to_id(const std::string& token) const {
        int id = lookup(token);
        return id < 0 ? kUnkId : id;
    }

    bool contains(const std::string& token) const { return index_.count(token) != 0; }

    bool is_special(int id) const { return id == kUnkId || id == kNumId || id == kEosId; }

    bool operator==(const Vocabulary& other) const {
        if (entries_.size() != other.entries_.size()) return false;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (entries_[i].token != other.entries_[i].token ||
                entries_[i].count != other.entries_[i].count)
                return false;
        }
        return true;
    }

private:
    void add_entry(std::string token, std::uint64_t count) {
        index_.emplace(token, static_cast<int>(entries_.size()));
        entries_.push_back(Entry{std::move(token), count});
    }

    std::vector<Entry> entries_;
    std::unordered_map<std::string, int> index_;
};

using VocabularyPtr = std::shared_ptr<const Vocabulary>;

// Exact token -> count map built from a designated training corpus.
// Absent token means count 0.
class FrequencyList {
public:
    FrequencyList() = default;
    explicit FrequencyList(TokenCounts counts) : counts_(std::move(counts)) {}

    std::uint64_t count(const std::string& token) const {
        auto it = counts_.find(token);
        return it == counts_.end() ? 0 : it->second;
    }

    const TokenCounts& counts() const { return counts_; }
    std::size_t size() const { return counts_.size(); }

private:
    TokenCounts counts_;
};

}  // namespace desklm
