#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace desklm {

// Fixed-dimension token -> vector map. Insertion order is preserved so that
// files round-trip exactly.
class EmbeddingSet {
public:
    EmbeddingSet() = default;
    explicit EmbeddingSet(int dim) : dim_(dim) {}

    int dim() const { return dim_; }
    std::size_t size() const { return tokens_.size(); }
    bool empty() const { return tokens_.empty(); }

    void add(const std::string& token, std::vector<double> vec) {
        if (static_cast<int>(vec.size()) != dim_)
            throw std::invalid_argument("EmbeddingSet::add: vector length != dim");
        if (index_.count(token)) throw std::invalid_argument("EmbeddingSet::add: duplicate token");
        index_.emplace(token, tokens_.size());
        tokens_.push_back(token);
        data_.insert(data_.end(), vec.begin(), vec.end());
    }

    bool contains(const std::string& token) const { return index_.count(token) != 0; }

    // nullptr when absent.
    const double* find(const std::string& token) const {
        auto it = index_.find(token);
        if (it == index_.end()) return nullptr;
        return data_.data() + it->second * static_cast<std::size_t>(dim_);
    }

    const std::vector<std::string>& tokens() const { return tokens_; }
    const double* vector_at(std::size_t i) const {
        return data_.data() + i * static_cast<std::size_t>(dim_);
    }

    bool operator==(const EmbeddingSet& o) const {
        return dim_ == o.dim_ && tokens_ == o.tokens_ && data_ == o.data_;
    }

    std::string source_name;
    std::uint64_t min_count = 0;

private:
    int dim_ = 0;
    std::vector<std::string> tokens_;
    std::vector<double> data_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Text interchange format: "token v1 v2 ... vd\n" per line, no header.
// %.17g keeps doubles bit-exact through a round trip.
inline void write_embeddings(const EmbeddingSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write embeddings: " + path);
    char buf[64];
    for (std::size_t i = 0; i < set.size(); ++i) {
        out << set.tokens()[i];
        const double* v = set.vector_at(i);
        for (int d = 0; d < set.dim(); ++d) {
            std::snprintf(buf, sizeof(buf), "%.17g", v[d]);
            out << ' ' << buf;
        }
        out << '\n';
    }
}

inline EmbeddingSet read_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embeddings: " + path);
    EmbeddingSet set;
    std::string line;
    std::size_t lineno = 0;
    int dim = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto sp = line.find(' ');
        if (sp == std::string::npos || sp == 0)
            throw std::runtime_error("embeddings parse error at line " + std::to_string(lineno) +
                                     ": expected \"token v1 ... vd\"");
        std::string token = line.substr(0, sp);
        std::vector<double> vec;
        const char* p = line.c_str() + sp;
        while (*p) {
            while (*p == ' ') ++p;
            if (!*p) break;
            char* end = nullptr;
            double v = std::strtod(p, &end);
            if (end == p)
                throw std::runtime_error("embeddings parse error at line " +
                                         std::to_string(lineno) + ": bad float");
            vec.push_back(v);
            p = end;
        }
        if (vec.empty())
            throw std::runtime_error("embeddings parse error at line " + std::to_string(lineno) +
                                     ": no values");
        if (dim < 0) {
            dim = static_cast<int>(vec.size());
            set = EmbeddingSet(dim);
        } else if (static_cast<int>(vec.size()) != dim) {
            throw std::runtime_error("embeddings parse error at line " + std::to_string(lineno) +
                                     ": expected " + std::to_string(dim) + " values, got " +
                                     std::to_string(vec.size()));
        }
        set.add(token, std::move(vec));
    }
    set.source_name = path;
    return set;
}

}  // namespace desklm
