#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "desklm/harness.hpp"
#include "desklm/rng.hpp"

using namespace desklm;

namespace {

std::string temp_path(const std::string& name) { return ::testing::TempDir() + name; }

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    ASSERT_TRUE(out.good()) << path;
    out << text;
}

KvFile kv_of(const std::string& text) {
    std::istringstream in(text);
    return KvFile::parse(in, "test.spec");
}

template <typename Fn>
void expect_error(Fn&& fn, const std::string& needle) {
    try {
        fn();
        FAIL() << "expected an exception mentioning: " << needle;
    } catch (const std::exception& e) {
        EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
}

// On-disk corpora shared by the run tests. Skewed draws over a small pool,
// plus two hand-planted rare types in train so cutoffs have something to hit.
struct Workspace {
    std::string train, dev, test, pretrain;

    explicit Workspace(const std::string& prefix, std::uint64_t seed = 77) {
        const std::vector<std::string> pool = {"the", "cat", "dog", "ran", "sat",
                                               "on",  "mat", "log", "big", "red"};
        Rng rng(seed);
        auto make = [&](std::size_t n) {
            std::vector<std::vector<std::string>> docs(n);
            for (auto& d : docs) {
                const std::size_t len = 3 + rng.below(5);
                for (std::size_t i = 0; i < len; ++i) {
                    const auto a = rng.below(pool.size()), b = rng.below(pool.size());
                    d.push_back(pool[std::min(a, b)]);
                }
            }
            return docs;
        };
        auto train_docs = make(30);
        train_docs.push_back({"rareone"});
        train_docs.push_back({"raretwo", "raretwo"});
        train = temp_path(prefix + ".train.txt");
        dev = temp_path(prefix + ".dev.txt");
        test = temp_path(prefix + ".test.txt");
        pretrain = temp_path(prefix + ".pre.txt");
        write_token_documents(train_docs, train, DocUnit::Sentence);
        write_token_documents(make(8), dev, DocUnit::Sentence);
        write_token_documents(make(6), test, DocUnit::Sentence);
        write_token_documents(make(60), pretrain, DocUnit::Sentence);
    }
};

ExperimentSpec base_spec(const Workspace& ws) {
    ExperimentSpec s;
    s.spec_id = "toyrun";
    s.dataset = "toy";
    s.train_path = ws.train;
    s.dev_path = ws.dev;
    s.model.emb_dim = 3;
    s.model.hidden_dim = 4;
    s.model.num_layers = 1;
    s.model.dropouts.word_drop = 0.1;
    s.model.dropouts.emb_variational = 0.2;
    s.model.dropouts.hidden_variational = 0.2;
    s.model.dropouts.weight_drop = 0.2;
    s.model.bptt_len = 4;
    s.model.batch_size = 2;
    s.train.learning_rate = 1.0;
    s.train.grad_clip = 0.25;
    s.train.epochs = 2;
    s.train.seed = 11;
    return s;
}

// Adds a glove source sized to the model above.
void with_glove(ExperimentSpec* s, const Workspace& ws) {
    s->embedding_source = EmbeddingSource::TrainHere;
    s->pretrain_path = ws.pretrain;
    s->glove.dim = 3;
    s->glove.window = 2;
    s->glove.iterations = 4;
    s->glove.min_count = 1;
    s->glove.seed = 5;
}

TEST(KvFileParse, TrimsKeysValuesAndSkipsComments) {
    const auto kv = kv_of(
        "# comment line\n"
        "  lr = 30.5 \n"
        "\n"
        "path = /tmp/some file\n"
        "flag= yes\n"
        "neg =-3\n"
        "expr = x=y\n");
    EXPECT_EQ(kv.name(), "test.spec");
    EXPECT_EQ(kv.values().size(), 5u);
    EXPECT_EQ(kv.str("lr"), "30.5");
    EXPECT_DOUBLE_EQ(kv.f64("lr", 0.0), 30.5);
    EXPECT_EQ(kv.str("path"), "/tmp/some file");
    EXPECT_TRUE(kv.boolean("flag", false));
    EXPECT_EQ(kv.i64("neg", 0), -3);
    EXPECT_EQ(kv.str("expr"), "x=y");
    EXPECT_FALSE(kv.has("absent"));
    EXPECT_EQ(kv.str("absent", "dflt"), "dflt");
    EXPECT_EQ(kv.u64("absent", 9u), 9u);
    EXPECT_EQ(kv.i64("absent", -9), -9);
    EXPECT_DOUBLE_EQ(kv.f64("absent", 1.5), 1.5);
    EXPECT_FALSE(kv.boolean("absent", false));
}

TEST(KvFileParse, ErrorsNameFileAndLine) {
    expect_error([] { kv_of("a = 1\nb = 2\nno equals here\n"); },
                 "test.spec:3: expected key = value");
    expect_error([] { kv_of(" = 3\n"); }, "test.spec:1: empty key");
    expect_error([] { kv_of("lr = 1\n# gap\nlr = 2\n"); }, "test.spec:3: duplicate key lr");

    const auto kv = kv_of("k = 2x\ni = 3.5\nf = abc\nb = maybe\n");
    expect_error([&] { kv.str("epochs"); }, "missing required key epochs");
    expect_error([&] { kv.u64("k", 0); }, "key k is not a nonnegative integer: 2x");
    expect_error([&] { kv.i64("i", 0); }, "key i is not an integer: 3.5");
    expect_error([&] { kv.f64("f", 0.0); }, "key f is not a number: abc");
    expect_error([&] { kv.boolean("b", false); }, "key b is not a boolean: maybe");

    expect_error([] { KvFile::load(temp_path("no_such.spec")); }, "cannot open spec file");
}

TEST(ExperimentSpecKv, EveryKeyMapsToItsField) {
    const auto s = experiment_spec_from_kv(kv_of(
        "spec_id = run1\n"
        "dataset = wiki\n"
        "pretrain = pre.txt\n"
        "train = tr.txt\n"
        "dev = dv.txt\n"
        "test = te.txt\n"
        "unit = article\n"
        "regime = std\n"
        "std_min_count = 7\n"
        "cutoff_k = 3\n"
        "embeddings = load\n"
        "embedding_path = emb.txt\n"
        "glove_dim = 12\n"
        "glove_window = 9\n"
        "glove_xmax = 50.5\n"
        "glove_alpha = 0.6\n"
        "glove_iterations = 21\n"
        "glove_lr = 0.04\n"
        "glove_min_count = 2\n"
        "glove_seed = 99\n"
        "config = ours\n"
        "emb_dim = 24\n"
        "hidden_dim = 48\n"
        "layers = 2\n"
        "word_drop = 0.05\n"
        "emb_drop = 0.5\n"
        "hidden_drop = 0.25\n"
        "weight_drop = 0.4\n"
        "bptt = 12\n"
        "batch = 6\n"
        "lr = 22.5\n"
        "clip = 0.3\n"
        "epochs = 9\n"
        "seed = 1234\n"
        "optimizer = asgd\n"
        "patience = 3\n"
        "multiplier = 2\n"
        "checkpoint = ck.bin\n"));
    EXPECT_EQ(s.spec_id, "run1");
    EXPECT_EQ(s.dataset, "wiki");
    EXPECT_EQ(s.pretrain_path, "pre.txt");
    EXPECT_EQ(s.train_path, "tr.txt");
    EXPECT_EQ(s.dev_path, "dv.txt");
    EXPECT_EQ(s.test_path, "te.txt");
    EXPECT_EQ(s.unit, DocUnit::Article);
    EXPECT_EQ(s.preprocess.mode, PreprocessSpec::Mode::Std);
    EXPECT_EQ(s.preprocess.std_min_count, 7u);
    EXPECT_EQ(s.cutoff_k, 3u);
    EXPECT_EQ(s.embedding_source, EmbeddingSource::LoadFile);
    EXPECT_EQ(s.embedding_path, "emb.txt");
    EXPECT_EQ(s.glove.dim, 12);
    EXPECT_EQ(s.glove.window, 9);
    EXPECT_DOUBLE_EQ(s.glove.x_max, 50.5);
    EXPECT_DOUBLE_EQ(s.glove.alpha, 0.6);
    EXPECT_EQ(s.glove.iterations, 21);
    EXPECT_DOUBLE_EQ(s.glove.learning_rate, 0.04);
    EXPECT_EQ(s.glove.min_count, 2u);
    EXPECT_EQ(s.glove.seed, 99u);
    EXPECT_EQ(s.config_label, "ours");
    EXPECT_EQ(s.model.emb_dim, 24);
    EXPECT_EQ(s.model.hidden_dim, 48);
    EXPECT_EQ(s.model.num_layers, 2);
    EXPECT_DOUBLE_EQ(s.model.dropouts.word_drop, 0.05);
    EXPECT_DOUBLE_EQ(s.model.dropouts.emb_variational, 0.5);
    EXPECT_DOUBLE_EQ(s.model.dropouts.hidden_variational, 0.25);
    EXPECT_DOUBLE_EQ(s.model.dropouts.weight_drop, 0.4);
    EXPECT_EQ(s.model.bptt_len, 12);
    EXPECT_EQ(s.model.batch_size, 6);
    EXPECT_DOUBLE_EQ(s.train.learning_rate, 22.5);
    EXPECT_DOUBLE_EQ(s.train.grad_clip, 0.3);
    EXPECT_EQ(s.train.epochs, 9);
    EXPECT_EQ(s.train.seed, 1234u);
    EXPECT_EQ(s.train.optimizer, Optimizer::AveragedSGD);
    EXPECT_EQ(s.train.trigger_patience, 3);
    EXPECT_EQ(s.data_multiplier, 2);
    EXPECT_EQ(s.checkpoint_path, "ck.bin");
}

TEST(ExperimentSpecKv, DefaultsUnknownKeysAndBadEnums) {
    const auto s = experiment_spec_from_kv(kv_of("train = a\ndev = b\n"));
    EXPECT_EQ(s.spec_id, "spec");
    EXPECT_EQ(s.dataset, "dataset");
    EXPECT_EQ(s.unit, DocUnit::Sentence);
    EXPECT_EQ(s.preprocess.mode, PreprocessSpec::Mode::Rare);
    EXPECT_EQ(s.cutoff_k, 0u);
    EXPECT_EQ(s.embedding_source, EmbeddingSource::None);
    EXPECT_EQ(s.config_label, "tied-unfrozen-random");
    EXPECT_EQ(s.train.optimizer, Optimizer::SGD);
    EXPECT_EQ(s.data_multiplier, 1);
    EXPECT_TRUE(s.test_path.empty());
    EXPECT_TRUE(s.checkpoint_path.empty());

    expect_error([] { experiment_spec_from_kv(kv_of("train = a\ndev = b\nfoo = 1\n")); },
                 "unknown key foo");
    expect_error([] { experiment_spec_from_kv(kv_of("train = a\ndev = b\nunit = word\n")); },
                 "unit must be sentence or article");
    expect_error([] { experiment_spec_from_kv(kv_of("train = a\ndev = b\nregime = weird\n")); },
                 "regime must be std or rare");
    expect_error([] { experiment_spec_from_kv(kv_of("train = a\ndev = b\nembeddings = maybe\n")); },
                 "embeddings must be none, train, or load");
    expect_error([] { experiment_spec_from_kv(kv_of("train = a\ndev = b\noptimizer = adam\n")); },
                 "optimizer must be sgd or asgd");
    expect_error([] { experiment_spec_from_kv(kv_of("dev = b\n")); }, "missing required key train");
}

TEST(ExperimentSpecKv, LoadReadsAFileAndNamesItInErrors) {
    const auto good = temp_path("good.spec");
    write_file(good, "train = tr.txt\ndev = dv.txt\nepochs = 4\n");
    const auto s = load_experiment_spec(good);
    EXPECT_EQ(s.train_path, "tr.txt");
    EXPECT_EQ(s.train.epochs, 4);

    const auto bad = temp_path("bad.spec");
    write_file(bad, "train = tr.txt\ndev = dv.txt\nmystery = 1\n");
    expect_error([&] { load_experiment_spec(bad); }, bad + ": unknown key mystery");
}

TEST(ExperimentSpecValidate, RejectsIncoherentSpecs) {
    ExperimentSpec s;
    expect_error([&] { s.validate(); }, "train and dev paths are required");

    s.train_path = "tr";
    s.dev_path = "dv";
    s.data_multiplier = 0;
    expect_error([&] { s.validate(); }, "data_multiplier must be >= 1");
    s.data_multiplier = 2;
    expect_error([&] { s.validate(); }, "data_multiplier > 1 needs a pretrain path");
    s.data_multiplier = 1;

    s.embedding_source = EmbeddingSource::TrainHere;
    expect_error([&] { s.validate(); }, "embedding training needs a pretrain path");
    s.embedding_source = EmbeddingSource::LoadFile;
    expect_error([&] { s.validate(); }, "embedding loading needs a path");
    s.embedding_source = EmbeddingSource::None;

    s.config_label = "nope";
    expect_error([&] { s.validate(); }, "unknown embedding config label");
    s.config_label = "ours";

    s.embedding_source = EmbeddingSource::TrainHere;
    s.pretrain_path = "pre";
    s.glove.dim = 0;
    expect_error([&] { s.validate(); }, "glove");
    s.glove.dim = 3;
    EXPECT_NO_THROW(s.validate());
}

TEST(ComputeUnkRates, HandWorkedPercentages) {
    const std::vector<std::vector<std::string>> train_docs = {{"a", "a", "b"}, {"a", "c"}};
    const std::vector<std::vector<std::string>> dev_docs = {{"a", "d"}, {"b"}};
    auto all = train_docs;
    all.insert(all.end(), dev_docs.begin(), dev_docs.end());
    auto vocab = std::make_shared<Vocabulary>(build_vocabulary(all, 1));
    const Corpus train = bind_corpus(train_docs, vocab, DocUnit::Sentence);
    const Corpus dev = bind_corpus(dev_docs, vocab, DocUnit::Sentence);
    const FrequencyList freq = build_frequency_list(train);

    const UnkRates r0 = compute_unk_rates(train, dev, freq, 0);
    EXPECT_EQ(r0.k, 0u);
    EXPECT_DOUBLE_EQ(r0.train_type_pct, 0.0);
    EXPECT_DOUBLE_EQ(r0.train_token_pct, 0.0);
    EXPECT_DOUBLE_EQ(r0.dev_type_pct, 0.0);
    EXPECT_DOUBLE_EQ(r0.dev_token_pct, 0.0);

    // K = 1 never replaces a training token (every observed count is >= 1);
    // on dev only the unseen type d falls.
    const UnkRates r1 = compute_unk_rates(train, dev, freq, 1);
    EXPECT_DOUBLE_EQ(r1.train_type_pct, 0.0);
    EXPECT_DOUBLE_EQ(r1.train_token_pct, 0.0);
    EXPECT_DOUBLE_EQ(r1.dev_type_pct, 100.0 / 3.0);
    EXPECT_DOUBLE_EQ(r1.dev_token_pct, 100.0 / 3.0);

    // K = 2: train counts a:3 b:1 c:1, so b and c fall (2 of 3 types, 2 of 5
    // tokens); on dev d (0) and b (1) fall.
    const UnkRates r2 = compute_unk_rates(train, dev, freq, 2);
    EXPECT_DOUBLE_EQ(r2.train_type_pct, 200.0 / 3.0);
    EXPECT_DOUBLE_EQ(r2.train_token_pct, 40.0);
    EXPECT_DOUBLE_EQ(r2.dev_type_pct, 200.0 / 3.0);
    EXPECT_DOUBLE_EQ(r2.dev_token_pct, 200.0 / 3.0);

    const UnkRates r5 = compute_unk_rates(train, dev, freq, 5);
    EXPECT_DOUBLE_EQ(r5.train_type_pct, 100.0);
    EXPECT_DOUBLE_EQ(r5.train_token_pct, 100.0);
    EXPECT_DOUBLE_EQ(r5.dev_type_pct, 100.0);
    EXPECT_DOUBLE_EQ(r5.dev_token_pct, 100.0);
}

TEST(ComputeUnkRates, SpecialsNeverCountAsReplacedAndRatesAreMonotone) {
    const std::vector<std::vector<std::string>> docs = {{"<unk>", "a"}};
    auto vocab = std::make_shared<Vocabulary>(build_vocabulary(docs, 1));
    const Corpus c = bind_corpus(docs, vocab, DocUnit::Sentence);
    const FrequencyList freq = build_frequency_list(c);
    const UnkRates r = compute_unk_rates(c, c, freq, 9);
    EXPECT_DOUBLE_EQ(r.train_type_pct, 50.0);
    EXPECT_DOUBLE_EQ(r.train_token_pct, 50.0);

    const std::vector<std::vector<std::string>> tdocs = {
        {"x", "x", "x", "y", "y", "z"}, {"x", "y", "w"}, {"v"}};
    const std::vector<std::vector<std::string>> ddocs = {{"x", "z", "q"}, {"w", "v", "v"}};
    auto all = tdocs;
    all.insert(all.end(), ddocs.begin(), ddocs.end());
    auto v2 = std::make_shared<Vocabulary>(build_vocabulary(all, 1));
    const Corpus train = bind_corpus(tdocs, v2, DocUnit::Sentence);
    const Corpus dev = bind_corpus(ddocs, v2, DocUnit::Sentence);
    const FrequencyList f2 = build_frequency_list(train);
    UnkRates prev;
    for (std::uint64_t k : {0u, 1u, 2u, 3u, 5u, 9u}) {
        const UnkRates cur = compute_unk_rates(train, dev, f2, k);
        EXPECT_GE(cur.train_type_pct, prev.train_type_pct) << "k=" << k;
        EXPECT_GE(cur.train_token_pct, prev.train_token_pct) << "k=" << k;
        EXPECT_GE(cur.dev_type_pct, prev.dev_type_pct) << "k=" << k;
        EXPECT_GE(cur.dev_token_pct, prev.dev_token_pct) << "k=" << k;
        prev = cur;
    }
    EXPECT_DOUBLE_EQ(prev.train_token_pct, 100.0);
}

TEST(PrepareExperiment, StdVocabularyIsTrainOnlyWhileRareSpansEverySplit) {
    const auto train = temp_path("regime.train.txt");
    const auto dev = temp_path("regime.dev.txt");
    write_file(train, "a a a b\n");
    write_file(dev, "a c\n");

    ExperimentSpec spec;
    spec.train_path = train;
    spec.dev_path = dev;
    spec.preprocess.mode = PreprocessSpec::Mode::Std;
    spec.preprocess.std_min_count = 2;
    const PreparedExperiment std_prep = prepare_experiment(spec);
    EXPECT_TRUE(std_prep.train.vocab->contains("a"));
    EXPECT_FALSE(std_prep.train.vocab->contains("b"));
    EXPECT_FALSE(std_prep.train.vocab->contains("c"));
    ASSERT_EQ(std_prep.dev.documents.size(), 1u);
    EXPECT_EQ(std_prep.dev.documents[0][1], Vocabulary::kUnkId);

    spec.preprocess.mode = PreprocessSpec::Mode::Rare;
    const PreparedExperiment rare_prep = prepare_experiment(spec);
    EXPECT_TRUE(rare_prep.train.vocab->contains("a"));
    EXPECT_TRUE(rare_prep.train.vocab->contains("b"));
    EXPECT_TRUE(rare_prep.train.vocab->contains("c"));
    EXPECT_NE(rare_prep.dev.documents[0][1], Vocabulary::kUnkId);
}

TEST(RunExperiment, DeterministicRowWithDerivedSeed) {
    const Workspace ws("runexp");
    ExperimentSpec spec = base_spec(ws);

    const ResultRow row1 = run_experiment(spec);
    const ResultRow row2 = run_experiment(spec);
    EXPECT_TRUE(same_result(row1, row2));

    EXPECT_EQ(row1.spec_id, "toyrun");
    EXPECT_EQ(row1.dataset, "toy");
    EXPECT_EQ(row1.config_label, "tied-unfrozen-random");
    EXPECT_EQ(row1.k, 0u);
    EXPECT_FALSE(row1.has_test);
    EXPECT_EQ(row1.seed, derive_seed(spec.train.seed, fnv1a(spec.spec_id)));
    EXPECT_EQ(row1.seed, experiment_run_seed(spec));
    EXPECT_TRUE(std::isfinite(row1.dev_ppl));
    EXPECT_GT(row1.dev_ppl, 0.0);

    std::uint64_t dev_tokens = 0;
    for (const auto& d : read_token_documents(ws.dev, DocUnit::Sentence))
        dev_tokens += d.size() + 1;
    EXPECT_EQ(row1.tokens_dev, dev_tokens);

    std::vector<EpochStats> history;
    const ResultRow row3 = run_experiment(spec, nullptr, &history);
    EXPECT_TRUE(same_result(row1, row3));
    ASSERT_EQ(history.size(), 2u);
    EXPECT_EQ(history[0].epoch, 1);
    EXPECT_EQ(history[1].epoch, 2);
    EXPECT_EQ(row3.dev_ppl, history.back().dev_ppl);

    ExperimentSpec other = spec;
    other.train.seed = 12;
    EXPECT_NE(run_experiment(other).dev_ppl, row1.dev_ppl);

    ExperimentSpec renamed = spec;
    renamed.spec_id = "toyrun2";
    EXPECT_NE(experiment_run_seed(renamed), experiment_run_seed(spec));

    // Adding a test split changes the run itself under the rare-word regime
    // (the vocabulary spans it), so only the shape of the row is checked.
    ExperimentSpec with_test = spec;
    with_test.test_path = ws.test;
    const ResultRow row4 = run_experiment(with_test);
    EXPECT_TRUE(row4.has_test);
    EXPECT_TRUE(std::isfinite(row4.test_ppl));
    EXPECT_GT(row4.test_ppl, 0.0);
}

TEST(RunExperiment, CheckpointReEvaluatesToTheSameDevPerplexity) {
    const Workspace ws("ckpt");
    ExperimentSpec spec = base_spec(ws);
    spec.checkpoint_path = temp_path("ckpt.run.bin");

    const ResultRow row = run_experiment(spec);
    const Checkpoint ck = read_checkpoint(spec.checkpoint_path);
    EXPECT_EQ(ck.seed, row.seed);

    const auto dev_docs = read_token_documents(ws.dev, DocUnit::Sentence);
    const Corpus dev = bind_corpus(dev_docs, ck.model.vocab, DocUnit::Sentence);
    EXPECT_EQ(perplexity(ck.model, dev), row.dev_ppl);
}

TEST(RunExperiment, StageNamesPrefixErrors) {
    const Workspace ws("stages");
    {
        ExperimentSpec spec = base_spec(ws);
        spec.train_path = temp_path("stages.missing.txt");
        expect_error([&] { run_experiment(spec); }, "stage load-data: cannot open corpus file");
    }
    {
        const auto empty = temp_path("stages.empty.txt");
        write_file(empty, "");
        ExperimentSpec spec = base_spec(ws);
        spec.train_path = empty;
        expect_error([&] { run_experiment(spec); }, "stage load-data: train corpus is empty");
    }
    {
        ExperimentSpec spec = base_spec(ws);
        spec.embedding_source = EmbeddingSource::LoadFile;
        spec.embedding_path = temp_path("stages.missing.emb");
        expect_error([&] { run_experiment(spec); }, "stage embeddings: cannot open embeddings");
    }
    {
        ExperimentSpec spec = base_spec(ws);
        spec.config_label = "tied-unfrozen-pretrained";
        expect_error([&] { run_experiment(spec); },
                     "stage init: config tied-unfrozen-pretrained needs embeddings but the spec "
                     "provides none");
    }
    {
        ExperimentSpec spec = base_spec(ws);
        spec.train.learning_rate = 1e150;
        expect_error([&] { run_experiment(spec); }, "stage train: training diverged at epoch 1");
    }
}

TEST(RunConfigSweep, SharesDataEmbeddingsAndSeedAcrossLabels) {
    const Workspace ws("sweep");
    ExperimentSpec spec = base_spec(ws);
    with_glove(&spec, ws);

    EXPECT_TRUE(run_config_sweep(spec, {}).empty());

    const auto rows = run_config_sweep(spec, {"ours", "standard", "standard-pretrained"});
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].config_label, "tied-unfrozen-pretrained");
    EXPECT_EQ(rows[1].config_label, "tied-unfrozen-random");
    EXPECT_EQ(rows[2].config_label, "untied-frozen-pretrained-unfrozen-pretrained");

    for (const auto& r : rows) {
        EXPECT_EQ(r.seed, rows[0].seed);
        EXPECT_EQ(r.tokens_dev, rows[0].tokens_dev);
        EXPECT_EQ(r.spec_id, spec.spec_id);
        EXPECT_EQ(r.k, 0u);
    }
    EXPECT_NE(rows[0].dev_ppl, rows[1].dev_ppl);

    // Sharing one prepared experiment must not change any row: each one
    // matches a from-scratch run of the same label.
    for (const auto& r : rows) {
        ExperimentSpec single = spec;
        single.config_label = r.config_label;
        EXPECT_TRUE(same_result(r, run_experiment(single))) << r.config_label;
    }
}

TEST(RunCutoffSweep, ReappliesCutoffsOverSharedData) {
    const Workspace ws("cut");
    ExperimentSpec spec = base_spec(ws);
    const std::vector<std::uint64_t> ks = {0, 1, 3};

    const CutoffSweepResult out = run_cutoff_sweep(spec, ks);
    ASSERT_EQ(out.rows.size(), 3u);
    ASSERT_EQ(out.rates.size(), 3u);

    EXPECT_DOUBLE_EQ(out.rates[0].train_token_pct, 0.0);
    EXPECT_DOUBLE_EQ(out.rates[0].dev_token_pct, 0.0);

    // Independent rate computation from a fresh preparation of the K = 0 data.
    ExperimentSpec spec0 = spec;
    spec0.cutoff_k = 0;
    const PreparedExperiment prep0 = prepare_experiment(spec0);
    for (std::size_t i = 0; i < ks.size(); ++i) {
        EXPECT_EQ(out.rows[i].k, ks[i]);
        EXPECT_EQ(out.rates[i].k, ks[i]);
        const UnkRates want =
            compute_unk_rates(prep0.train, prep0.dev, prep0.train_freq, ks[i]);
        EXPECT_DOUBLE_EQ(out.rates[i].train_type_pct, want.train_type_pct);
        EXPECT_DOUBLE_EQ(out.rates[i].train_token_pct, want.train_token_pct);
        EXPECT_DOUBLE_EQ(out.rates[i].dev_type_pct, want.dev_type_pct);
        EXPECT_DOUBLE_EQ(out.rates[i].dev_token_pct, want.dev_token_pct);
        if (i) {
            EXPECT_GE(out.rates[i].train_token_pct, out.rates[i - 1].train_token_pct);
        }

        ExperimentSpec single = spec;
        single.cutoff_k = ks[i];
        EXPECT_TRUE(same_result(out.rows[i], run_experiment(single))) << "k=" << ks[i];
    }

    // The planted singletons fall at K = 3, so the trained model differs.
    EXPECT_GT(out.rates[2].train_token_pct, 0.0);
    EXPECT_NE(out.rows[0].dev_ppl, out.rows[2].dev_ppl);
}

TEST(DataMultiplier, AppendsDisjointSlicesOfTheExtraDataFile) {
    const auto train = temp_path("mult.train.txt");
    const auto dev = temp_path("mult.dev.txt");
    const auto pre = temp_path("mult.pre.txt");
    write_file(train, "a b\nc d\n");
    write_file(dev, "a b\n");
    write_file(pre, "p0 x\np1 x\np2 x\np3 x\np4 x\np5 x\n");

    ExperimentSpec spec;
    spec.train_path = train;
    spec.dev_path = dev;
    spec.pretrain_path = pre;

    auto tokens_of = [](const Corpus& c, std::size_t i) {
        std::vector<std::string> t;
        const auto& doc = c.documents[i];
        for (std::size_t j = 0; j + 1 < doc.size(); ++j) t.push_back(c.vocab->token(doc[j]));
        return t;
    };

    spec.data_multiplier = 1;
    EXPECT_EQ(prepare_experiment(spec).train.documents.size(), 2u);

    spec.data_multiplier = 2;
    const PreparedExperiment p2 = prepare_experiment(spec);
    ASSERT_EQ(p2.train.documents.size(), 4u);
    EXPECT_EQ(tokens_of(p2.train, 2), (std::vector<std::string>{"p0", "x"}));
    EXPECT_EQ(tokens_of(p2.train, 3), (std::vector<std::string>{"p1", "x"}));

    spec.data_multiplier = 3;
    const PreparedExperiment p3 = prepare_experiment(spec);
    ASSERT_EQ(p3.train.documents.size(), 6u);
    EXPECT_EQ(tokens_of(p3.train, 4), (std::vector<std::string>{"p2", "x"}));
    EXPECT_EQ(tokens_of(p3.train, 5), (std::vector<std::string>{"p3", "x"}));

    spec.data_multiplier = 5;
    expect_error([&] { prepare_experiment(spec); },
                 "stage load-data: data_multiplier 5 needs 8 extra documents, extra-data file has "
                 "6");
}

TEST(SearchSpaceConfig, DefaultsAndValidation) {
    const SearchSpace space;
    EXPECT_EQ(space.count, 37);
    EXPECT_EQ(space.baseline_label, "tied-unfrozen-random");
    EXPECT_EQ(space.proposed_label, "untied-frozen-pretrained-unfrozen-pretrained");
    EXPECT_NO_THROW(space.validate());

    SearchSpace bad = space;
    bad.learning_rate.lo = 0.0;
    expect_error([&] { bad.validate(); }, "bad learning_rate range");
    bad = space;
    bad.word_drop.hi = 1.0;
    expect_error([&] { bad.validate(); }, "dropout ranges must sit inside [0, 1)");
    bad = space;
    bad.layers.lo = 0;
    expect_error([&] { bad.validate(); }, "bad integer range");
    bad = space;
    bad.count = -1;
    expect_error([&] { bad.validate(); }, "count must be nonnegative");
}

TEST(SampleSetting, SeededDrawsStayInsideTheirRanges) {
    SearchSpace space;
    space.seed = 41;
    for (int i = 0; i < 25; ++i) {
        const HyperSetting s = sample_setting(space, i);
        // log then exp can land an ulp outside the nominal bounds
        EXPECT_GE(s.learning_rate, space.learning_rate.lo * (1.0 - 1e-12));
        EXPECT_LE(s.learning_rate, space.learning_rate.hi * (1.0 + 1e-12));
        EXPECT_GE(s.word_drop, space.word_drop.lo);
        EXPECT_LT(s.word_drop, space.word_drop.hi);
        EXPECT_GE(s.emb_variational, space.emb_variational.lo);
        EXPECT_LT(s.emb_variational, space.emb_variational.hi);
        EXPECT_GE(s.hidden_variational, space.hidden_variational.lo);
        EXPECT_LT(s.hidden_variational, space.hidden_variational.hi);
        EXPECT_GE(s.weight_drop, space.weight_drop.lo);
        EXPECT_LT(s.weight_drop, space.weight_drop.hi);
        EXPECT_GE(s.layers, space.layers.lo);
        EXPECT_LE(s.layers, space.layers.hi);
        EXPECT_GE(s.hidden_dim, space.hidden_dim.lo);
        EXPECT_LE(s.hidden_dim, space.hidden_dim.hi);
        EXPECT_GE(s.bptt_len, space.bptt_len.lo);
        EXPECT_LE(s.bptt_len, space.bptt_len.hi);
    }

    const HyperSetting a = sample_setting(space, 7);
    const HyperSetting b = sample_setting(space, 7);
    EXPECT_EQ(a.learning_rate, b.learning_rate);
    EXPECT_EQ(a.word_drop, b.word_drop);
    EXPECT_EQ(a.layers, b.layers);
    EXPECT_EQ(a.bptt_len, b.bptt_len);
    EXPECT_NE(sample_setting(space, 0).learning_rate, sample_setting(space, 1).learning_rate);
    SearchSpace other = space;
    other.seed = 42;
    EXPECT_NE(sample_setting(other, 0).learning_rate, sample_setting(space, 0).learning_rate);

    // Draw order is part of the format: one seeded stream per index, the
    // learning rate first (log scale), the four dropouts, then the integers.
    Rng rng(derive_seed(space.seed, 3));
    HyperSetting want;
    want.learning_rate = std::exp(
        rng.uniform(std::log(space.learning_rate.lo), std::log(space.learning_rate.hi)));
    want.word_drop = rng.uniform(space.word_drop.lo, space.word_drop.hi);
    want.emb_variational = rng.uniform(space.emb_variational.lo, space.emb_variational.hi);
    want.hidden_variational =
        rng.uniform(space.hidden_variational.lo, space.hidden_variational.hi);
    want.weight_drop = rng.uniform(space.weight_drop.lo, space.weight_drop.hi);
    want.layers = space.layers.lo +
                  static_cast<int>(rng.below(
                      static_cast<std::uint64_t>(space.layers.hi - space.layers.lo + 1)));
    want.hidden_dim = space.hidden_dim.lo +
                      static_cast<int>(rng.below(static_cast<std::uint64_t>(
                          space.hidden_dim.hi - space.hidden_dim.lo + 1)));
    want.bptt_len = space.bptt_len.lo +
                    static_cast<int>(rng.below(
                        static_cast<std::uint64_t>(space.bptt_len.hi - space.bptt_len.lo + 1)));
    const HyperSetting got = sample_setting(space, 3);
    EXPECT_EQ(got.learning_rate, want.learning_rate);
    EXPECT_EQ(got.word_drop, want.word_drop);
    EXPECT_EQ(got.emb_variational, want.emb_variational);
    EXPECT_EQ(got.hidden_variational, want.hidden_variational);
    EXPECT_EQ(got.weight_drop, want.weight_drop);
    EXPECT_EQ(got.layers, want.layers);
    EXPECT_EQ(got.hidden_dim, want.hidden_dim);
    EXPECT_EQ(got.bptt_len, want.bptt_len);
}

SearchSpace tiny_space(int count) {
    SearchSpace space;
    space.learning_rate = {0.5, 1.5};
    space.word_drop = {0.0, 0.1};
    space.emb_variational = {0.0, 0.1};
    space.hidden_variational = {0.0, 0.1};
    space.weight_drop = {0.0, 0.1};
    space.layers = {1, 1};
    space.hidden_dim = {4, 5};
    space.bptt_len = {3, 4};
    space.count = count;
    space.seed = 9;
    return space;
}

TEST(RandomSearch, PairsShareSettingSeedAndData) {
    const Workspace ws("search");
    ExperimentSpec spec = base_spec(ws);
    with_glove(&spec, ws);
    const SearchSpace space = tiny_space(2);

    EXPECT_TRUE(random_search(spec, tiny_space(0)).empty());

    const auto pairs = random_search(spec, space);
    ASSERT_EQ(pairs.size(), 2u);
    for (int i = 0; i < 2; ++i) {
        const SearchPair& p = pairs[static_cast<std::size_t>(i)];
        EXPECT_EQ(p.index, i);
        EXPECT_TRUE(p.ok) << p.error;
        EXPECT_TRUE(p.error.empty());

        const HyperSetting want = sample_setting(space, i);
        EXPECT_EQ(p.setting.learning_rate, want.learning_rate);
        EXPECT_EQ(p.setting.hidden_dim, want.hidden_dim);
        EXPECT_EQ(p.setting.bptt_len, want.bptt_len);

        const std::string id = spec.spec_id + ".search" + std::to_string(i);
        EXPECT_EQ(p.baseline.spec_id, id);
        EXPECT_EQ(p.proposed.spec_id, id);
        EXPECT_EQ(p.baseline.config_label, space.baseline_label);
        EXPECT_EQ(p.proposed.config_label, space.proposed_label);
        EXPECT_EQ(p.baseline.seed, derive_seed(spec.train.seed, fnv1a(id)));
        EXPECT_EQ(p.proposed.seed, p.baseline.seed);
    }
    EXPECT_NE(pairs[0].baseline.seed, pairs[1].baseline.seed);
    EXPECT_NE(pairs[0].setting.learning_rate, pairs[1].setting.learning_rate);

    // Rerun with a store: identical pairs, rows appended in run order.
    const auto store_path = temp_path("search.results.csv");
    std::remove(store_path.c_str());
    ResultsStore store(store_path);
    const auto again = random_search(spec, space, &store);
    ASSERT_EQ(again.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_TRUE(same_result(again[i].baseline, pairs[i].baseline));
        EXPECT_TRUE(same_result(again[i].proposed, pairs[i].proposed));
    }
    const auto rows = store.rows();
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].run_id, i + 1);
    EXPECT_TRUE(same_result(rows[0], pairs[0].baseline));
    EXPECT_TRUE(same_result(rows[1], pairs[0].proposed));
    EXPECT_TRUE(same_result(rows[2], pairs[1].baseline));
    EXPECT_TRUE(same_result(rows[3], pairs[1].proposed));
}

TEST(RandomSearch, RecordsFailuresAndKeepsGoing) {
    const Workspace ws("searchfail");
    ExperimentSpec spec = base_spec(ws);
    with_glove(&spec, ws);
    SearchSpace space = tiny_space(2);
    space.learning_rate = {1e150, 1e150};

    const auto pairs = random_search(spec, space);
    ASSERT_EQ(pairs.size(), 2u);
    for (const auto& p : pairs) {
        EXPECT_FALSE(p.ok);
        EXPECT_NE(p.error.find("stage "), std::string::npos) << p.error;
        EXPECT_GT(p.setting.learning_rate, 1e149);
    }
    EXPECT_EQ(pairs[0].index, 0);
    EXPECT_EQ(pairs[1].index, 1);

    space.baseline_label = "bogus";
    expect_error([&] { random_search(spec, space); }, "unknown embedding config label");
}

TEST(ResultsStore, AssignsMonotonicRunIdsAndAppends) {
    const auto path = temp_path("store.results.csv");
    std::remove(path.c_str());

    ResultsStore store(path);
    EXPECT_EQ(store.path(), path);
    EXPECT_TRUE(store.rows().empty());
    EXPECT_EQ(store.next_run_id(), 1u);

    ResultRow row;
    row.run_id = store.next_run_id();
    row.spec_id = "s1";
    row.config_label = "tied-unfrozen-random";
    row.dataset = "toy";
    row.k = 2;
    row.dev_ppl = 123.456789012345678;
    row.has_test = true;
    row.test_ppl = 130.5;
    row.tokens_dev = 999;
    row.seed = 424242;
    row.wall_s = 0.125;
    store.append(row);

    auto rows = store.rows();
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0], row);
    EXPECT_EQ(store.next_run_id(), 2u);

    ResultRow later = row;
    later.run_id = 7;
    later.has_test = false;
    store.append(later);
    EXPECT_EQ(store.next_run_id(), 8u);

    // A second handle on the same file sees the same state.
    ResultsStore reopened(path);
    rows = reopened.rows();
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], row);
    EXPECT_EQ(rows[1], later);
}

TEST(ResultsStore, RunExperimentAppendsTheExactReturnedRow) {
    const Workspace ws("storerun");
    const ExperimentSpec spec = base_spec(ws);
    const auto path = temp_path("storerun.results.csv");
    std::remove(path.c_str());

    ResultsStore store(path);
    const ResultRow row = run_experiment(spec, &store);
    EXPECT_EQ(row.run_id, 1u);
    auto rows = store.rows();
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0], row);

    const ResultRow row2 = run_experiment(spec, &store);
    EXPECT_EQ(row2.run_id, 2u);
    EXPECT_TRUE(same_result(row, row2));
    EXPECT_EQ(store.rows().size(), 2u);
}

}  // namespace
