#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <tuple>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "desklm/csv.hpp"
#include "desklm/lm_config.hpp"

namespace desklm {

enum class ReportKind { Csv, Scatter };

// (baseline, proposed) rows from the same run conditions.
using ResultPair = std::pair<ResultRow, ResultRow>;

// Groups rows by (spec_id, dataset, K, seed) and pairs the baseline-labeled
// row with the proposed-labeled one. Groups missing either side are skipped.
inline std::vector<ResultPair> pair_rows(const std::vector<ResultRow>& rows,
                                         const std::string& baseline_label,
                                         const std::string& proposed_label) {
    const std::string base = resolve_embedding_config(baseline_label).label;
    const std::string prop = resolve_embedding_config(proposed_label).label;
    using Key = std::tuple<std::string, std::string, std::uint64_t, std::uint64_t>;
    std::map<Key, std::pair<const ResultRow*, const ResultRow*>> groups;
    for (const auto& r : rows) {
        std::string label;
        try {
            label = resolve_embedding_config(r.config_label).label;
        } catch (const std::exception&) {
            continue;  // foreign labels are not this report's business
        }
        Key key{r.spec_id, r.dataset, r.k, r.seed};
        if (label == base) groups[key].first = &r;
        else if (label == prop) groups[key].second = &r;
    }
    std::vector<ResultPair> pairs;
    for (const auto& [key, sides] : groups) {
        (void)key;
        if (sides.first && sides.second) pairs.emplace_back(*sides.first, *sides.second);
    }
    return pairs;
}

namespace detail {

struct ScatterScale {
    double lo = 0.0, hi = 1.0;
    double margin = 60.0, size = 640.0;

    double px(double v) const { return margin + (v - lo) / (hi - lo) * (size - 2.0 * margin); }
    double py(double v) const { return margin + (hi - v) / (hi - lo) * (size - 2.0 * margin); }
};

inline std::string svg_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace detail

// Self-contained SVG: one point per pair at (x = proposed ppl, y = baseline
// ppl) and the y = x diagonal. Points left of the diagonal are wins for the
// proposed configuration. The scale comment makes the transform invertible
// for tools reading the file back.
inline void render_scatter(const std::vector<ResultPair>& pairs, const std::string& path) {
    if (pairs.empty())
        throw std::runtime_error("scatter report: no paired rows to plot");

    double lo = pairs[0].second.dev_ppl, hi = lo;
    for (const auto& [baseline, proposed] : pairs) {
        lo = std::min({lo, baseline.dev_ppl, proposed.dev_ppl});
        hi = std::max({hi, baseline.dev_ppl, proposed.dev_ppl});
    }
    const double pad = (hi - lo) * 0.05 + 1e-9;
    detail::ScatterScale sc;
    sc.lo = lo - pad;
    sc.hi = hi + pad;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scatter report: " + path);
    const auto n = detail::svg_num;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << n(sc.size) << "\" height=\""
        << n(sc.size) << "\" viewBox=\"0 0 " << n(sc.size) << " " << n(sc.size) << "\">\n";
    out << "<!-- scale lo=" << csv_double(sc.lo) << " hi=" << csv_double(sc.hi)
        << " margin=" << csv_double(sc.margin) << " size=" << csv_double(sc.size) << " -->\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Axes along the plot edges.
    out << "<line x1=\"" << n(sc.margin) << "\" y1=\"" << n(sc.size - sc.margin) << "\" x2=\""
        << n(sc.size - sc.margin) << "\" y2=\"" << n(sc.size - sc.margin)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << n(sc.margin) << "\" y1=\"" << n(sc.margin) << "\" x2=\""
        << n(sc.margin) << "\" y2=\"" << n(sc.size - sc.margin) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << n(sc.size / 2.0) << "\" y=\"" << n(sc.size - sc.margin / 3.0)
        << "\" text-anchor=\"middle\" font-size=\"14\">proposed dev ppl</text>\n";
    out << "<text x=\"" << n(sc.margin / 3.0) << "\" y=\"" << n(sc.size / 2.0)
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 "
        << n(sc.margin / 3.0) << " " << n(sc.size / 2.0) << ")\">baseline dev ppl</text>\n";
    for (double v : {sc.lo, sc.hi}) {
        out << "<text x=\"" << n(sc.px(v)) << "\" y=\"" << n(sc.size - sc.margin + 18.0)
            << "\" text-anchor=\"middle\" font-size=\"11\">" << n(v) << "</text>\n";
        out << "<text x=\"" << n(sc.margin - 6.0) << "\" y=\"" << n(sc.py(v) + 4.0)
            << "\" text-anchor=\"end\" font-size=\"11\">" << n(v) << "</text>\n";
    }

    // y = x: everything left of this line favors the proposed configuration.
    out << "<line class=\"diagonal\" x1=\"" << n(sc.px(sc.lo)) << "\" y1=\"" << n(sc.py(sc.lo))
        << "\" x2=\"" << n(sc.px(sc.hi)) << "\" y2=\"" << n(sc.py(sc.hi))
        << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";

    for (const auto& [baseline, proposed] : pairs) {
        out << "<circle class=\"pair\" cx=\"" << csv_double(sc.px(proposed.dev_ppl)) << "\" cy=\""
            << csv_double(sc.py(baseline.dev_ppl))
            << "\" r=\"4\" fill=\"steelblue\" fill-opacity=\"0.8\"/>\n";
    }
    out << "</svg>\n";
}

inline void render_report(const std::vector<ResultRow>& rows, ReportKind kind,
                          const std::string& path,
                          const std::string& baseline_label = "standard",
                          const std::string& proposed_label = "ours") {
    if (kind == ReportKind::Csv) {
        write_results_csv(rows, path);
        return;
    }
    render_scatter(pair_rows(rows, baseline_label, proposed_label), path);
}

}  // namespace desklm
