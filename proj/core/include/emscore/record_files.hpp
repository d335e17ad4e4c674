#pragma once

// Text schemas for the evaluation inputs and the score report output. Every
// file opens with a "#emscore-<kind><TAB><version>" line; see docs/formats.md.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "emscore/eval_stats.hpp"
#include "emscore/scoring.hpp"

namespace emscore {

// caption_id  video_id  system_label  s1,s2,s3  [metric_score]
RatingsTable parse_ratings(std::string_view text);
std::string serialize_ratings(const RatingsTable& table);
RatingsTable read_ratings(const std::string& path);

// pair_id  video_id  correct_caption_id  foil_caption_id  [ref1,ref2,...]
// Consecutive lines with the same pair_id form one paragraph pair.
FoilPairSet parse_foil_pairs(std::string_view text);
std::string serialize_foil_pairs(const FoilPairSet& pairs);
FoilPairSet read_foil_pairs(const std::string& path);

struct ScorePair {
  std::string caption_id;
  std::string video_id;

  friend bool operator==(const ScorePair&, const ScorePair&) = default;
};

// caption_id  video_id
std::vector<ScorePair> parse_score_pairs(std::string_view text);
std::vector<ScorePair> read_score_pairs(const std::string& path);

/// video_id -> reference caption ids, in file order.
using ReferenceMap = std::map<std::string, std::vector<std::string>>;

// video_id  ref1[,ref2,...]
ReferenceMap parse_references(std::string_view text);
ReferenceMap read_references(const std::string& path);

struct ScoreRun {
  Mode mode = Mode::kEmscore;
  Granularity granularity = Granularity::kFull;
  bool idf = false;
  std::vector<ScoreReport> reports;
};

/// JSON Lines: a header object, then one object per report.
std::string serialize_scores(const ScoreRun& run);
ScoreRun parse_scores(std::string_view text);
ScoreRun read_scores(const std::string& path);

/// caption_id -> selected score. Throws kDuplicateId if a caption appears twice.
std::map<std::string, double> selected_scores(const ScoreRun& run);

}  // namespace emscore
