// Command-line front end: every operation the library exposes, driven by
// flat key = value spec files and plain token-file corpora.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "desklm.hpp"

namespace {

using namespace desklm;

std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

DocUnit parse_unit(const std::string& s) {
    if (s == "sentence") return DocUnit::Sentence;
    if (s == "article") return DocUnit::Article;
    throw std::runtime_error("unit must be sentence or article");
}

// Raw text -> normalized token documents. Sentences are one per line;
// articles are blank-line separated blocks.
std::vector<std::vector<std::string>> normalize_file(const std::string& path, DocUnit unit,
                                                     const PreprocessSpec& spec) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    std::vector<std::vector<std::string>> docs;
    std::vector<std::string> article;
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
        auto toks = normalize_tokens(line, spec, offset);
        offset += line.size() + 1;
        if (unit == DocUnit::Sentence) {
            if (!toks.empty()) docs.push_back(std::move(toks));
            continue;
        }
        if (toks.empty() && line.find_first_not_of(" \t\r") == std::string::npos) {
            if (!article.empty()) docs.push_back(std::move(article));
            article.clear();
        } else {
            article.insert(article.end(), toks.begin(), toks.end());
        }
    }
    if (unit == DocUnit::Article && !article.empty()) docs.push_back(std::move(article));
    return docs;
}

void print_row(const ResultRow& row) {
    std::printf("spec=%s config=%s dataset=%s K=%llu dev_ppl=%.4f", row.spec_id.c_str(),
                row.config_label.c_str(), row.dataset.c_str(),
                static_cast<unsigned long long>(row.k), row.dev_ppl);
    if (row.has_test) std::printf(" test_ppl=%.4f", row.test_ppl);
    std::printf(" tokens_dev=%llu seed=%llu wall_s=%.1f\n",
                static_cast<unsigned long long>(row.tokens_dev),
                static_cast<unsigned long long>(row.seed), row.wall_s);
}

struct SpecOverrides {
    std::uint64_t seed = 0;
    bool has_seed = false;
    std::string checkpoint;
    std::string results;

    void apply(ExperimentSpec& spec) const {
        if (has_seed) spec.train.seed = seed;
        if (!checkpoint.empty()) spec.checkpoint_path = checkpoint;
    }
};

void add_spec_options(CLI::App* cmd, std::string& spec_path, SpecOverrides& ov) {
    cmd->add_option("--spec", spec_path, "experiment spec file (key = value lines)")->required();
    cmd->add_option("--seed", ov.seed, "override the spec's global seed")
        ->each([&ov](const std::string&) { ov.has_seed = true; });
    cmd->add_option("--results", ov.results, "results CSV store to append rows to");
}

int cmd_preprocess(const std::string& in, const std::string& out, const std::string& unit_s,
                   const std::string& regime, std::uint64_t min_count,
                   const std::string& freq_out, bool keep_case, bool keep_numbers,
                   bool keep_punct, const std::string& compare, const std::string& stats_out,
                   std::uint64_t rare_threshold) {
    DocUnit unit = parse_unit(unit_s);
    PreprocessSpec spec;
    spec.lowercase = !keep_case;
    spec.map_numbers = !keep_numbers;
    spec.strip_punct = !keep_punct;
    spec.std_min_count = min_count;
    if (regime == "std") spec.mode = PreprocessSpec::Mode::Std;
    else if (regime == "rare") spec.mode = PreprocessSpec::Mode::Rare;
    else throw std::runtime_error("regime must be std or rare");

    auto docs = normalize_file(in, unit, spec);
    if (spec.mode == PreprocessSpec::Mode::Std) {
        FrequencyList freq(count_tokens(docs));
        docs = replace_rare_tokens(docs, freq, spec.std_min_count);
    }
    write_token_documents(docs, out, unit);
    if (!freq_out.empty()) write_frequency_list(FrequencyList(count_tokens(docs)), freq_out);

    std::uint64_t tokens = 0;
    for (const auto& d : docs) tokens += d.size();
    std::printf("documents=%zu tokens=%llu types=%zu\n", docs.size(),
                static_cast<unsigned long long>(tokens), count_tokens(docs).size());

    std::vector<std::pair<std::string, double>> stats = {
        {"documents", static_cast<double>(docs.size())},
        {"tokens", static_cast<double>(tokens)},
        {"types", static_cast<double>(count_tokens(docs).size())},
    };
    if (!compare.empty()) {
        auto own_vocab = std::make_shared<Vocabulary>(build_vocabulary(docs, 1));
        const Corpus own = bind_corpus(docs, own_vocab, unit);
        auto cmp_docs = read_token_documents(compare, unit);
        auto cmp_vocab = std::make_shared<Vocabulary>(build_vocabulary(cmp_docs, 1));
        const Corpus other = bind_corpus(cmp_docs, cmp_vocab, unit);

        const FrequencyList other_freq = build_frequency_list(other);
        std::unordered_set<std::string> other_types;
        for (const auto& [tok, c] : other_freq.counts()) other_types.insert(tok);
        const CoverageStats cov = coverage_report(other_types, own);
        const RareStats rare = rare_word_report(own, other, rare_threshold);

        const std::vector<std::pair<std::string, double>> more = {
            {"covered_types", static_cast<double>(cov.covered_types)},
            {"total_types", static_cast<double>(cov.total_types)},
            {"type_coverage", cov.type_coverage},
            {"covered_tokens", static_cast<double>(cov.covered_tokens)},
            {"total_tokens", static_cast<double>(cov.total_tokens)},
            {"token_coverage", cov.token_coverage},
            {"rare_threshold", static_cast<double>(rare.threshold)},
            {"train_rare_type_pct", rare.train_type_pct()},
            {"train_rare_token_pct", rare.train_token_pct()},
            {"compare_rare_type_pct", rare.pretrain_type_pct()},
            {"compare_rare_token_pct", rare.pretrain_token_pct()},
            {"cross_rare_type_pct", rare.cross_type_pct()},
            {"cross_rare_token_pct", rare.cross_token_pct()},
        };
        stats.insert(stats.end(), more.begin(), more.end());
        std::printf("type_coverage=%.4f token_coverage=%.4f cross_rare_token_pct=%.2f\n",
                    cov.type_coverage, cov.token_coverage, rare.cross_token_pct());
    }
    if (!stats_out.empty()) {
        std::ofstream os(stats_out);
        if (!os) throw std::runtime_error("cannot write stats file: " + stats_out);
        os << "metric,value\n";
        for (const auto& [name, value] : stats) os << name << ',' << csv_double(value) << '\n';
    }
    return 0;
}

int cmd_embed_train(const std::string& train, const std::string& out, const std::string& unit_s,
                    const GloveConfig& cfg, const std::string& loss_log) {
    auto docs = read_token_documents(train, parse_unit(unit_s));
    auto vocab = std::make_shared<Vocabulary>(build_vocabulary(docs, 1));
    Corpus corpus = bind_corpus(docs, vocab, parse_unit(unit_s));
    std::vector<double> losses;
    EmbeddingSet set = train_glove(corpus, cfg, &losses);
    write_embeddings(set, out);
    if (!loss_log.empty()) {
        std::ofstream log(loss_log);
        if (!log) throw std::runtime_error("cannot write loss log: " + loss_log);
        log << "iteration,loss\n";
        for (std::size_t i = 0; i < losses.size(); ++i)
            log << i + 1 << ',' << csv_double(losses[i]) << '\n';
    }
    std::printf("vectors=%zu dim=%d", set.tokens().size(), set.dim());
    if (!losses.empty()) std::printf(" final_loss=%.6f", losses.back());
    std::printf("\n");
    return 0;
}

int cmd_lm_train(const std::string& spec_path, const SpecOverrides& ov,
                 const std::string& train_log) {
    ExperimentSpec spec = load_experiment_spec(spec_path);
    ov.apply(spec);
    ResultsStore store(ov.results);
    std::vector<EpochStats> history;
    ResultRow row = run_experiment(spec, ov.results.empty() ? nullptr : &store, &history);
    if (!train_log.empty()) write_training_log(history, train_log);
    for (const auto& e : history)
        std::printf("epoch=%d train_nll=%.4f dev_ppl=%.4f wall_s=%.1f\n", e.epoch, e.train_nll,
                    e.dev_ppl, e.wall_seconds);
    print_row(row);
    return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data, const std::string& unit_s) {
    Checkpoint ckpt = read_checkpoint(ckpt_path);
    auto docs = read_token_documents(data, parse_unit(unit_s));
    Corpus corpus = bind_corpus(docs, ckpt.model.vocab, parse_unit(unit_s));
    std::printf("ppl=%.6f tokens=%llu\n", perplexity(ckpt.model, corpus),
                static_cast<unsigned long long>(corpus.total_tokens()));
    return 0;
}

int cmd_ngram(const std::string& train, int order, const std::string& unit_s,
              const std::string& arpa_out, const std::string& eval_path) {
    DocUnit unit = parse_unit(unit_s);
    auto docs = read_token_documents(train, unit);
    auto vocab = std::make_shared<Vocabulary>(build_vocabulary(docs, 1));
    Corpus corpus = bind_corpus(docs, vocab, unit);
    NGramModel model = train_kn(corpus, order);
    for (const auto& w : model.warnings()) std::fprintf(stderr, "warning: %s\n", w.c_str());
    if (!arpa_out.empty()) write_arpa(model, arpa_out);
    if (!eval_path.empty()) {
        auto eval_docs = read_token_documents(eval_path, unit);
        Corpus eval_corpus = bind_corpus(eval_docs, vocab, unit);
        std::printf("ppl=%.6f tokens=%llu\n", ngram_perplexity(model, eval_corpus),
                    static_cast<unsigned long long>(eval_corpus.total_tokens()));
    }
    return 0;
}

int cmd_bpe(const std::string& train, int merges, const std::string& out,
            const std::string& unit_s, const std::string& table_path, const std::string& encode,
            const std::string& encoded_out) {
    DocUnit unit = parse_unit(unit_s);
    if (!table_path.empty()) {
        if (encode.empty() || encoded_out.empty())
            throw std::runtime_error("--table needs --encode and --encoded-out");
        MergeTable table = read_merge_table(table_path);
        auto docs = read_token_documents(encode, unit);
        std::vector<std::vector<std::string>> pieces;
        pieces.reserve(docs.size());
        for (const auto& doc : docs) {
            std::vector<std::string> enc;
            for (const auto& tok : doc) {
                if (tok == kUnkToken || tok == kNumToken || tok == kEosToken) {
                    enc.push_back(tok);
                    continue;
                }
                auto sym = bpe_encode(tok, table);
                enc.insert(enc.end(), sym.begin(), sym.end());
            }
            pieces.push_back(std::move(enc));
        }
        write_token_documents(pieces, encoded_out, unit);
        std::printf("encoded documents=%zu\n", pieces.size());
        return 0;
    }
    if (train.empty() || out.empty())
        throw std::runtime_error("learning mode needs --train and --out");
    auto docs = read_token_documents(train, unit);
    auto vocab = std::make_shared<Vocabulary>(build_vocabulary(docs, 1));
    Corpus corpus = bind_corpus(docs, vocab, unit);
    MergeTable table = learn_bpe(corpus, merges);
    write_merge_table(table, out);
    std::printf("merges=%zu\n", table.merges.size());
    return 0;
}

int cmd_sweep_configs(const std::string& spec_path, const SpecOverrides& ov,
                      const std::string& labels_csv, bool six, bool all20) {
    ExperimentSpec spec = load_experiment_spec(spec_path);
    ov.apply(spec);
    std::vector<std::string> labels;
    if (six) labels = comparison_config_labels();
    else if (all20)
        for (const auto& c : enumerate_embedding_configs()) labels.push_back(c.label);
    else labels = split_csv_list(labels_csv);
    if (labels.empty()) throw std::runtime_error("no config labels given");
    if (ov.results.empty()) throw std::runtime_error("--results is required");
    ResultsStore store(ov.results);
    auto rows = run_config_sweep(spec, labels, &store);
    for (const auto& r : rows) print_row(r);
    return 0;
}

int cmd_sweep_cutoff(const std::string& spec_path, const SpecOverrides& ov,
                     const std::string& ks_csv, const std::string& rates_out) {
    ExperimentSpec spec = load_experiment_spec(spec_path);
    ov.apply(spec);
    std::vector<std::uint64_t> ks;
    for (const auto& s : split_csv_list(ks_csv)) ks.push_back(std::stoull(s));
    if (ks.empty()) throw std::runtime_error("no cutoff values given");
    if (ov.results.empty()) throw std::runtime_error("--results is required");
    ResultsStore store(ov.results);
    auto out = run_cutoff_sweep(spec, ks, &store);
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        print_row(out.rows[i]);
        const auto& r = out.rates[i];
        std::printf("  K=%llu unk%%: train types %.2f tokens %.2f | dev types %.2f tokens %.2f\n",
                    static_cast<unsigned long long>(r.k), r.train_type_pct, r.train_token_pct,
                    r.dev_type_pct, r.dev_token_pct);
    }
    if (!rates_out.empty()) {
        std::ofstream f(rates_out);
        if (!f) throw std::runtime_error("cannot write rates file: " + rates_out);
        f << "K,train_type_pct,train_token_pct,dev_type_pct,dev_token_pct\n";
        for (const auto& r : out.rates)
            f << r.k << ',' << csv_double(r.train_type_pct) << ',' << csv_double(r.train_token_pct)
              << ',' << csv_double(r.dev_type_pct) << ',' << csv_double(r.dev_token_pct) << '\n';
    }
    return 0;
}

int cmd_search(const std::string& spec_path, const SpecOverrides& ov, int count,
               std::uint64_t space_seed, const std::string& baseline, const std::string& ours) {
    ExperimentSpec spec = load_experiment_spec(spec_path);
    ov.apply(spec);
    if (ov.results.empty()) throw std::runtime_error("--results is required");
    SearchSpace space;
    space.count = count;
    space.seed = space_seed;
    space.baseline_label = baseline;
    space.proposed_label = ours;
    ResultsStore store(ov.results);
    auto pairs = random_search(spec, space, &store);
    int ok = 0, wins = 0;
    for (const auto& p : pairs) {
        if (!p.ok) {
            std::printf("pair %d FAILED: %s\n", p.index, p.error.c_str());
            continue;
        }
        ++ok;
        if (p.proposed.dev_ppl < p.baseline.dev_ppl) ++wins;
        std::printf("pair %d lr=%.2f layers=%d hidden=%d bptt=%d baseline=%.2f proposed=%.2f\n",
                    p.index, p.setting.learning_rate, p.setting.layers, p.setting.hidden_dim,
                    p.setting.bptt_len, p.baseline.dev_ppl, p.proposed.dev_ppl);
    }
    std::printf("pairs=%zu completed=%d proposed_wins=%d\n", pairs.size(), ok, wins);
    return 0;
}

int cmd_report(const std::string& results, const std::string& kind, const std::string& out,
               const std::string& baseline, const std::string& ours) {
    auto rows = read_results_csv(results);
    if (kind == "csv") render_report(rows, ReportKind::Csv, out);
    else if (kind == "scatter") render_report(rows, ReportKind::Scatter, out, baseline, ours);
    else throw std::runtime_error("kind must be csv or scatter");
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale language modeling experiments"};
    app.require_subcommand(1);

    // preprocess
    std::string pp_in, pp_out, pp_unit = "sentence", pp_regime = "rare", pp_freq;
    std::string pp_compare, pp_stats;
    std::uint64_t pp_min = 5, pp_seed = 0, pp_rare = 5;
    bool pp_case = false, pp_num = false, pp_punct = false;
    auto* pp = app.add_subcommand("preprocess", "normalize raw text into token documents");
    pp->add_option("--in", pp_in)->required();
    pp->add_option("--out", pp_out)->required();
    pp->add_option("--unit", pp_unit, "sentence or article");
    pp->add_option("--regime", pp_regime, "std (rare words to UNK) or rare (keep them)");
    pp->add_option("--min-count", pp_min, "std regime rare-word threshold");
    pp->add_option("--freq-out", pp_freq, "write the final frequency list here");
    pp->add_flag("--keep-case", pp_case);
    pp->add_flag("--keep-numbers", pp_num);
    pp->add_flag("--keep-punct", pp_punct);
    pp->add_option("--compare", pp_compare,
                   "token file to measure coverage and rare-word overlap against");
    pp->add_option("--stats-out", pp_stats, "write metric,value rows here");
    pp->add_option("--rare-threshold", pp_rare, "rare-word count threshold for --compare");
    pp->add_option("--seed", pp_seed, "unused; accepted for interface uniformity");

    // embed-train
    std::string et_train, et_out, et_unit = "sentence", et_log;
    GloveConfig et_cfg;
    auto* et = app.add_subcommand("embed-train", "train embeddings on a token file");
    et->add_option("--train", et_train)->required();
    et->add_option("--out", et_out)->required();
    et->add_option("--unit", et_unit);
    et->add_option("--dim", et_cfg.dim);
    et->add_option("--window", et_cfg.window);
    et->add_option("--x-max", et_cfg.x_max);
    et->add_option("--alpha", et_cfg.alpha);
    et->add_option("--iterations", et_cfg.iterations);
    et->add_option("--lr", et_cfg.learning_rate);
    et->add_option("--min-count", et_cfg.min_count);
    et->add_option("--seed", et_cfg.seed);
    et->add_option("--loss-log", et_log, "per-iteration loss CSV");

    // lm-train
    std::string lt_spec, lt_log;
    SpecOverrides lt_ov;
    auto* lt = app.add_subcommand("lm-train", "run one experiment spec");
    add_spec_options(lt, lt_spec, lt_ov);
    lt->add_option("--checkpoint", lt_ov.checkpoint, "override the spec's checkpoint path");
    lt->add_option("--train-log", lt_log, "per-epoch training CSV");

    // eval
    std::string ev_ckpt, ev_data, ev_unit = "sentence";
    std::uint64_t ev_seed = 0;
    auto* ev = app.add_subcommand("eval", "perplexity of a checkpoint on a token file");
    ev->add_option("--checkpoint", ev_ckpt)->required();
    ev->add_option("--data", ev_data)->required();
    ev->add_option("--unit", ev_unit);
    ev->add_option("--seed", ev_seed, "unused; accepted for interface uniformity");

    // ngram
    std::string ng_train, ng_unit = "sentence", ng_arpa, ng_eval;
    int ng_order = 5;
    std::uint64_t ng_seed = 0;
    auto* ng = app.add_subcommand("ngram", "train a smoothed n-gram model");
    ng->add_option("--train", ng_train)->required();
    ng->add_option("--order", ng_order);
    ng->add_option("--unit", ng_unit);
    ng->add_option("--arpa", ng_arpa, "dump the model in ARPA format");
    ng->add_option("--eval", ng_eval, "token file to evaluate");
    ng->add_option("--seed", ng_seed, "unused; accepted for interface uniformity");

    // bpe
    std::string bp_train, bp_out, bp_unit = "sentence", bp_table, bp_encode, bp_encoded;
    int bp_merges = 10000;
    std::uint64_t bp_seed = 0;
    auto* bp = app.add_subcommand("bpe", "learn or apply subword merges");
    bp->add_option("--train", bp_train);
    bp->add_option("--merges", bp_merges);
    bp->add_option("--out", bp_out, "merge table output (learning mode)");
    bp->add_option("--unit", bp_unit);
    bp->add_option("--table", bp_table, "existing merge table (encoding mode)");
    bp->add_option("--encode", bp_encode, "token file to encode");
    bp->add_option("--encoded-out", bp_encoded);
    bp->add_option("--seed", bp_seed, "unused; accepted for interface uniformity");

    // sweep-configs
    std::string sc_spec, sc_labels;
    bool sc_six = false, sc_all = false;
    SpecOverrides sc_ov;
    auto* sc = app.add_subcommand("sweep-configs", "run several embedding configs on one spec");
    add_spec_options(sc, sc_spec, sc_ov);
    sc->add_option("--labels", sc_labels, "comma-separated config labels or aliases");
    sc->add_flag("--six", sc_six, "the six named comparison configs");
    sc->add_flag("--all", sc_all, "all 20 enumerated configs");

    // sweep-cutoff
    std::string su_spec, su_ks = "0,1,2,5", su_rates;
    SpecOverrides su_ov;
    auto* su = app.add_subcommand("sweep-cutoff", "run a spec across UNK cutoffs");
    add_spec_options(su, su_spec, su_ov);
    su->add_option("--ks", su_ks, "comma-separated cutoff values");
    su->add_option("--rates-out", su_rates, "UNK percentage table CSV");

    // search
    std::string se_spec, se_baseline = "standard", se_ours = "ours";
    int se_count = 37;
    std::uint64_t se_space_seed = 0;
    SpecOverrides se_ov;
    auto* se = app.add_subcommand("search", "paired random hyperparameter search");
    add_spec_options(se, se_spec, se_ov);
    se->add_option("--count", se_count, "number of sampled settings");
    se->add_option("--space-seed", se_space_seed, "sampling seed");
    se->add_option("--baseline", se_baseline);
    se->add_option("--ours", se_ours);

    // report
    std::string rp_results, rp_kind = "csv", rp_out, rp_baseline = "standard", rp_ours = "ours";
    std::uint64_t rp_seed = 0;
    auto* rp = app.add_subcommand("report", "render a results store as CSV or scatter SVG");
    rp->add_option("--results", rp_results)->required();
    rp->add_option("--kind", rp_kind, "csv or scatter");
    rp->add_option("--out", rp_out)->required();
    rp->add_option("--baseline", rp_baseline);
    rp->add_option("--ours", rp_ours);
    rp->add_option("--seed", rp_seed, "unused; accepted for interface uniformity");

    CLI11_PARSE(app, argc, argv);

    try {
        if (pp->parsed())
            return cmd_preprocess(pp_in, pp_out, pp_unit, pp_regime, pp_min, pp_freq, pp_case,
                                  pp_num, pp_punct, pp_compare, pp_stats, pp_rare);
        if (et->parsed()) return cmd_embed_train(et_train, et_out, et_unit, et_cfg, et_log);
        if (lt->parsed()) return cmd_lm_train(lt_spec, lt_ov, lt_log);
        if (ev->parsed()) return cmd_eval(ev_ckpt, ev_data, ev_unit);
        if (ng->parsed()) return cmd_ngram(ng_train, ng_order, ng_unit, ng_arpa, ng_eval);
        if (bp->parsed())
            return cmd_bpe(bp_train, bp_merges, bp_out, bp_unit, bp_table, bp_encode, bp_encoded);
        if (sc->parsed()) return cmd_sweep_configs(sc_spec, sc_ov, sc_labels, sc_six, sc_all);
        if (su->parsed()) return cmd_sweep_cutoff(su_spec, su_ov, su_ks, su_rates);
        if (se->parsed())
            return cmd_search(se_spec, se_ov, se_count, se_space_seed, se_baseline, se_ours);
        if (rp->parsed()) return cmd_report(rp_results, rp_kind, rp_out, rp_baseline, rp_ours);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
