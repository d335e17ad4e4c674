#pragma once

#include <cstddef>
#include <vector>

#include "emscore/embedding_store.hpp"
#include "emscore/idf_corpus.hpp"
#include "emscore/record_files.hpp"
#include "emscore/scoring.hpp"

namespace emscore::cli {

struct BatchConfig {
  Mode mode = Mode::kEmscore;
  const IdfTable* idf = nullptr;
  const ReferenceMap* references = nullptr;
  ScoreOptions options;
  unsigned jobs = 1;
};

/// Scores every (caption, video) pair. Reports come back in input order and
/// are bit-identical for any job count. When several pairs fail, the error of
/// the lowest-index pair is rethrown.
std::vector<ScoreReport> score_pairs(const Archive& archive, const std::vector<ScorePair>& pairs,
                                     const BatchConfig& config);

/// Scores one pair, resolving ids and (in reference mode) the references of
/// the given caption ids.
ScoreReport score_one(const Archive& archive, const std::string& caption_id, const std::string& video_id,
                      const std::vector<std::string>* reference_ids, const BatchConfig& config);

}  // namespace emscore::cli
