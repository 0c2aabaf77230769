// End-to-end miniature: build a corpus in memory, train embeddings on it,
// initialize a model with a frozen pretrained input matrix, train briefly,
// and report perplexity.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "desklm.hpp"

using namespace desklm;

int main() {
    std::vector<std::vector<std::string>> docs;
    const char* animals[] = {"cat", "dog", "owl", "fox"};
    const char* verbs[] = {"sees", "chases", "hears"};
    Rng rng(7);
    for (int i = 0; i < 400; ++i) {
        docs.push_back({"the", animals[rng.below(4)], verbs[rng.below(3)], "the",
                        animals[rng.below(4)]});
    }

    auto vocab = std::make_shared<Vocabulary>(build_vocabulary(docs, 1));
    Corpus train_set = bind_corpus({docs.begin(), docs.begin() + 320}, vocab, DocUnit::Sentence);
    Corpus dev_set = bind_corpus({docs.begin() + 320, docs.end()}, vocab, DocUnit::Sentence);

    GloveConfig gcfg;
    gcfg.dim = 16;
    gcfg.window = 4;
    gcfg.iterations = 20;
    gcfg.min_count = 1;
    EmbeddingSet vectors = train_glove(train_set, gcfg);
    std::printf("embeddings: %zu vectors of dim %d\n", vectors.tokens().size(), vectors.dim());

    ModelConfig mcfg;
    mcfg.emb_dim = 16;
    mcfg.hidden_dim = 32;
    mcfg.num_layers = 1;
    mcfg.bptt_len = 12;
    mcfg.batch_size = 8;
    mcfg.dropouts = DropoutConfig{0.0, 0.0, 0.0, 0.0};

    EmbeddingConfig ecfg = resolve_embedding_config("ours");
    Model model = init_model(mcfg, ecfg, vocab, &vectors);

    TrainConfig tcfg;
    tcfg.learning_rate = 4.0;
    tcfg.epochs = 8;
    tcfg.seed = 1;
    for (const auto& e : train(model, train_set, dev_set, tcfg))
        std::printf("epoch %d: train nll %.3f, dev ppl %.2f\n", e.epoch, e.train_nll, e.dev_ppl);

    std::printf("final dev ppl: %.2f (vocab %d)\n", perplexity(model, dev_set), vocab->size());
    return 0;
}
