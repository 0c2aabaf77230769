#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace desklm {

// Minimal CSV with quoting for fields containing commas, quotes, or
// newlines, so labels like the long comparison names survive a round trip.
inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

inline std::vector<std::string> csv_split(const std::string& line, std::size_t lineno) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted)
        throw std::runtime_error("csv parse error at line " + std::to_string(lineno) +
                                 ": unterminated quote");
    fields.push_back(std::move(cur));
    return fields;
}

inline std::string csv_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// One completed (or attempted) run.
struct ResultRow {
    std::uint64_t run_id = 0;
    std::string spec_id;
    std::string config_label;
    std::string dataset;
    std::uint64_t k = 0;
    double dev_ppl = 0.0;
    bool has_test = false;
    double test_ppl = 0.0;
    std::uint64_t tokens_dev = 0;
    std::uint64_t seed = 0;
    double wall_s = 0.0;

    bool operator==(const ResultRow& o) const {
        return run_id == o.run_id && spec_id == o.spec_id && config_label == o.config_label &&
               dataset == o.dataset && k == o.k && dev_ppl == o.dev_ppl &&
               has_test == o.has_test && (!has_test || test_ppl == o.test_ppl) &&
               tokens_dev == o.tokens_dev && seed == o.seed && wall_s == o.wall_s;
    }
};

inline constexpr const char* kResultsHeader =
    "run_id,spec_id,config_label,dataset,K,dev_ppl,test_ppl,tokens_dev,seed,wall_s";

inline std::string format_result_row(const ResultRow& r) {
    std::ostringstream os;
    os << r.run_id << ',' << csv_escape(r.spec_id) << ',' << csv_escape(r.config_label) << ','
       << csv_escape(r.dataset) << ',' << r.k << ',' << csv_double(r.dev_ppl) << ','
       << (r.has_test ? csv_double(r.test_ppl) : std::string()) << ',' << r.tokens_dev << ','
       << r.seed << ',' << csv_double(r.wall_s);
    return os.str();
}

inline ResultRow parse_result_row(const std::string& line, std::size_t lineno) {
    auto f = csv_split(line, lineno);
    if (f.size() != 10)
        throw std::runtime_error("csv parse error at line " + std::to_string(lineno) +
                                 ": expected 10 fields, got " + std::to_string(f.size()));
    auto to_u64 = [&](const std::string& s, const char* what) {
        char* end = nullptr;
        const auto v = std::strtoull(s.c_str(), &end, 10);
        if (end != s.c_str() + s.size() || s.empty())
            throw std::runtime_error("csv parse error at line " + std::to_string(lineno) +
                                     ": bad " + std::string(what));
        return static_cast<std::uint64_t>(v);
    };
    auto to_f64 = [&](const std::string& s, const char* what) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size() || s.empty())
            throw std::runtime_error("csv parse error at line " + std::to_string(lineno) +
                                     ": bad " + std::string(what));
        return v;
    };
    ResultRow r;
    r.run_id = to_u64(f[0], "run_id");
    r.spec_id = f[1];
    r.config_label = f[2];
    r.dataset = f[3];
    r.k = to_u64(f[4], "K");
    r.dev_ppl = to_f64(f[5], "dev_ppl");
    r.has_test = !f[6].empty();
    if (r.has_test) r.test_ppl = to_f64(f[6], "test_ppl");
    r.tokens_dev = to_u64(f[7], "tokens_dev");
    r.seed = to_u64(f[8], "seed");
    r.wall_s = to_f64(f[9], "wall_s");
    return r;
}

inline void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write results csv: " + path);
    out << kResultsHeader << '\n';
    for (const auto& r : rows) out << format_result_row(r) << '\n';
}

inline std::vector<ResultRow> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results csv: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader)
        throw std::runtime_error("results csv missing expected header: " + path);
    std::vector<ResultRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        rows.push_back(parse_result_row(line, lineno));
    }
    return rows;
}

// Append-only store: appends never rewrite rows, and run ids keep counting
// up from what is already on disk.
class ResultsStore {
public:
    explicit ResultsStore(std::string path) : path_(std::move(path)) {}

    const std::string& path() const { return path_; }

    std::uint64_t next_run_id() const {
        std::ifstream in(path_);
        if (!in) return 1;
        std::string line;
        std::uint64_t max_id = 0, lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (lineno == 1 || line.empty()) continue;
            max_id = std::max(max_id, parse_result_row(line, lineno).run_id);
        }
        return max_id + 1;
    }

    void append(const ResultRow& row) {
        const bool fresh = !std::ifstream(path_).good();
        std::ofstream out(path_, std::ios::app);
        if (!out) throw std::runtime_error("cannot append to results store: " + path_);
        if (fresh) out << kResultsHeader << '\n';
        out << format_result_row(row) << '\n';
    }

    std::vector<ResultRow> rows() const {
        if (!std::ifstream(path_).good()) return {};
        return read_results_csv(path_);
    }

private:
    std::string path_;
};

}  // namespace desklm
