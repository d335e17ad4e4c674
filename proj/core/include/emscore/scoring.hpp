#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emscore/embedding_store.hpp"
#include "emscore/idf_corpus.hpp"

namespace emscore {

/// Precision, recall and their harmonic mean from greedy row matching.
struct FineScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// 2PR / (P + R) when P > 0 and R > 0, otherwise 0. Keeps F1 in [0, 1].
double f1_score(double precision, double recall);

/// Mean of the frame rows, L2-normalized. Throws kZeroVector when the mean
/// vanishes and kInvalidArgument when there are no frames.
std::vector<double> video_global(const EmbeddingMatrix& frames);

/// Inner product of two unit vectors.
double coarse_score(std::span<const double> caption_global, std::span<const double> ground_global);

/// Weighted greedy matching. Precision averages, over token rows, each token's
/// best similarity to any ground row; recall does the same from the ground
/// side. Sums run in ascending index order with 64-bit accumulation.
FineScore fine_match(const EmbeddingMatrix& tokens, std::span<const double> token_weights,
                     const EmbeddingMatrix& ground, std::span<const double> ground_weights);

/// Per-token idf weights for a caption. The last row always takes the table's
/// EOS weight, whatever its token string. Without a table, weights are uniform.
std::vector<double> caption_weights(const CaptionRecord& caption, const IdfTable* idf);

struct ScoreOptions {
  /// Weight reference tokens by idf on the recall side of text-to-text matching.
  bool reference_recall_idf = true;
};

struct PairScore {
  std::string ground_id;
  double coarse = 0.0;
  FineScore fine;
  double combined = 0.0;
};

/// Reference-augmented summary: each field averages the video-side value with
/// the best value over the references.
struct ReferenceSummary {
  double coarse = 0.0;
  double fine = 0.0;
  double combined = 0.0;
  std::string best_reference_id;
};

struct ScoreReport {
  std::string caption_id;
  std::string ground_id;
  double coarse = 0.0;
  FineScore fine;
  double combined = 0.0;
  std::vector<PairScore> per_reference;
  std::optional<ReferenceSummary> with_references;
};

ScoreReport emscore(const CaptionRecord& caption, const VideoRecord& video, const IdfTable* idf,
                    const ScoreOptions& options = {});
ScoreReport emscore(const CaptionRecord& caption, const CaptionRecord& reference, const IdfTable* idf,
                    const ScoreOptions& options = {});

using CaptionRef = std::reference_wrapper<const CaptionRecord>;

/// Scores against the video and every reference. Throws kNoReferences for an
/// empty reference list.
ScoreReport emscore_ref(const CaptionRecord& caption, const VideoRecord& video, std::span<const CaptionRef> references,
                        const IdfTable* idf, const ScoreOptions& options = {});

enum class Mode { kEmscore, kEmscoreRef };
enum class Granularity { kCoarse, kFine, kFull };

std::string_view to_string(Mode mode);
std::string_view to_string(Granularity granularity);
Mode parse_mode(std::string_view name);
Granularity parse_granularity(std::string_view name);

/// The headline number for one mode/granularity combination.
double selected_score(const ScoreReport& report, Mode mode, Granularity granularity);

struct TokenMatch {
  std::size_t index = 0;
  std::string token;
  std::size_t ground_row = 0;
  double similarity = 0.0;
  double weight = 0.0;
};

struct GroundMatch {
  std::size_t row = 0;
  std::size_t token_index = 0;
  double similarity = 0.0;
  double weight = 0.0;
};

/// Argmax alignment in both directions. Ties go to the lowest index.
struct MatchTrace {
  std::string caption_id;
  std::string ground_id;
  std::vector<TokenMatch> tokens;
  std::vector<GroundMatch> ground;
  FineScore score;
};

MatchTrace match_trace(const CaptionRecord& caption, const VideoRecord& video, const IdfTable* idf);
MatchTrace match_trace(const CaptionRecord& caption, const CaptionRecord& reference, const IdfTable* idf,
                       const ScoreOptions& options = {});

/// Mean of per-segment caption scores. Throws kEmptyParagraph.
double paragraph_score(std::span<const double> segment_scores);

}  // namespace emscore
