#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace desklm {

// Flat key = value files with # comment lines. No sections, no nesting.
class KvFile {
public:
    static KvFile parse(std::istream& in, const std::string& name) {
        KvFile kv;
        kv.name_ = name;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto text = trim(line);
            if (text.empty() || text[0] == '#') continue;
            const auto eq = text.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error(name + ":" + std::to_string(lineno) +
                                         ": expected key = value");
            const auto key = trim(text.substr(0, eq));
            const auto value = trim(text.substr(eq + 1));
            if (key.empty())
                throw std::runtime_error(name + ":" + std::to_string(lineno) + ": empty key");
            if (!kv.values_.emplace(key, value).second)
                throw std::runtime_error(name + ":" + std::to_string(lineno) +
                                         ": duplicate key " + key);
        }
        return kv;
    }

    static KvFile load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open spec file: " + path);
        return parse(in, path);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string str(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end())
            throw std::runtime_error(name_ + ": missing required key " + key);
        return it->second;
    }

    std::string str(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::uint64_t u64(const std::string& key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        return parse_u64(key, str(key));
    }

    std::int64_t i64(const std::string& key, std::int64_t fallback) const {
        if (!has(key)) return fallback;
        const auto& s = str(key);
        char* end = nullptr;
        const auto v = std::strtoll(s.c_str(), &end, 10);
        if (s.empty() || end != s.c_str() + s.size())
            throw std::runtime_error(name_ + ": key " + key + " is not an integer: " + s);
        return v;
    }

    double f64(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        const auto& s = str(key);
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size())
            throw std::runtime_error(name_ + ": key " + key + " is not a number: " + s);
        return v;
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto& s = str(key);
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        throw std::runtime_error(name_ + ": key " + key + " is not a boolean: " + s);
    }

    const std::map<std::string, std::string>& values() const { return values_; }
    const std::string& name() const { return name_; }

private:
    std::uint64_t parse_u64(const std::string& key, const std::string& s) const {
        char* end = nullptr;
        const auto v = std::strtoull(s.c_str(), &end, 10);
        if (s.empty() || end != s.c_str() + s.size())
            throw std::runtime_error(name_ + ": key " + key +
                                     " is not a nonnegative integer: " + s);
        return v;
    }

    static std::string trim(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    std::string name_;
    std::map<std::string, std::string> values_;
};

}  // namespace desklm
