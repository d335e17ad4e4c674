#pragma once

#include "emscore/embedding_store.hpp"
#include "emscore/error.hpp"
#include "emscore/eval_stats.hpp"
#include "emscore/idf_corpus.hpp"
#include "emscore/record_files.hpp"
#include "emscore/scoring.hpp"
