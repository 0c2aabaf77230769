#pragma once

#include "desklm/bpe.hpp"
#include "desklm/cooc.hpp"
#include "desklm/corpus.hpp"
#include "desklm/csv.hpp"
#include "desklm/embeddings.hpp"
#include "desklm/glove.hpp"
#include "desklm/harness.hpp"
#include "desklm/kv.hpp"
#include "desklm/lm.hpp"
#include "desklm/lm_config.hpp"
#include "desklm/lm_train.hpp"
#include "desklm/matrix.hpp"
#include "desklm/ngram.hpp"
#include "desklm/report.hpp"
#include "desklm/rng.hpp"
#include "desklm/text.hpp"
#include "desklm/vocab.hpp"
