// Learn a few subword merges and encode a word with them.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "desklm.hpp"

using namespace desklm;

int main() {
    std::vector<std::vector<std::string>> docs = {
        {"low", "low", "low", "lower", "lower", "newest", "newest"},
        {"widest", "widest", "newest", "low"},
    };
    auto vocab = std::make_shared<Vocabulary>(build_vocabulary(docs, 1));
    Corpus corpus = bind_corpus(docs, vocab, DocUnit::Sentence);

    MergeTable table = learn_bpe(corpus, 8);
    std::printf("learned %zu merges:\n", table.merges.size());
    for (const auto& [a, b] : table.merges) std::printf("  %s + %s\n", a.c_str(), b.c_str());

    for (const std::string word : {"lowest", "wider"}) {
        auto pieces = bpe_encode(word, table);
        std::printf("%s ->", word.c_str());
        for (const auto& p : pieces) std::printf(" %s", p.c_str());
        std::printf(" (decodes to %s)\n", bpe_decode(pieces).c_str());
    }
    return 0;
}
