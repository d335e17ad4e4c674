#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace emscore {

// Rank correlations ----------------------------------------------------------

/// Kendall tau-b, computed in O(n log n) with Knight's merge-sort algorithm.
/// Throws kLengthMismatch for unequal lengths or n < 2, and kDegenerateInput
/// when either sequence is constant.
double kendall_tau(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of mid-ranks. Same error contract as kendall_tau.
double spearman_rho(std::span<const double> x, std::span<const double> y);

/// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

// Human-judgement tables -------------------------------------------------------

struct RatingRecord {
  std::string caption_id;
  std::string video_id;
  std::string system_label;
  std::vector<int> annotator_scores;
  std::optional<double> metric_score;

  double human_mean() const;
};

struct RatingsTable {
  std::vector<RatingRecord> records;
};

struct Correlation {
  double tau = 0.0;
  double rho = 0.0;
  std::size_t n = 0;
};

enum class HumanAggregation {
  /// One observation per caption: the mean annotator score.
  kMean,
  /// One observation per (caption, annotator) rating.
  kPerAnnotator,
};

/// Correlates metric_score with human judgement over all records. Throws
/// kMissingScore when a record has no metric score.
Correlation caption_level_correlation(const RatingsTable& table,
                                      HumanAggregation aggregation = HumanAggregation::kMean);

/// Range a metric's raw scores live in, for scaling onto [0, 1].
enum class MetricRange {
  kSignedUnit,  // [-1, 1], scaled by (s + 1) / 2
  kUnit,        // already [0, 1]
};

struct SystemRank {
  std::string system_label;
  std::size_t count = 0;
  double scaled_mean_metric = 0.0;
  double scaled_mean_human = 0.0;
  std::size_t rank_metric = 0;
  std::size_t rank_human = 0;
  bool consistent = false;
};

/// Human 1..5 means map to [0, 1] via (s - 1) / 4.
double scale_human(double mean_score);
double scale_metric(double score, MetricRange range);

/// Per-system means, ranked by descending scaled mean (1 = best). Equal means
/// share order by system label. Result is sorted by human rank. Throws
/// kSingleSystem for fewer than two systems.
std::vector<SystemRank> system_ranking(const RatingsTable& table, MetricRange range = MetricRange::kSignedUnit);

// Quality-drift biased sets ---------------------------------------------------

inline constexpr int kQualityLevels = 5;

/// Mean annotator score rounded half-up, clamped to 1..5.
int quality_bin(double human_mean);

/// Retention probability of a caption in quality bin k for biased set I.
double retention_probability(int set_index, int bin);

/// Five subsets (I = 1..5) of record indices. Each record is kept in set I
/// independently with probability 1 / (|I - k| + 1). Reproducible per seed on
/// every platform.
std::array<std::vector<std::size_t>, kQualityLevels> biased_sets(const RatingsTable& table, std::uint64_t seed);

/// Variant taking bins directly.
std::array<std::vector<std::size_t>, kQualityLevels> biased_sets(std::span<const int> bins, std::uint64_t seed);

// FOIL pairwise accuracy -----------------------------------------------------

struct FoilSegment {
  std::string video_id;
  std::string correct_caption_id;
  std::string foil_caption_id;
  std::vector<std::string> reference_caption_ids;
};

struct FoilPair {
  std::string pair_id;
  std::vector<FoilSegment> segments;
};

struct FoilPairSet {
  std::vector<FoilPair> pairs;
};

struct FoilOutcome {
  std::string pair_id;
  double correct_score = 0.0;
  double foil_score = 0.0;
  bool correct = false;
};

struct FoilResult {
  double accuracy = 0.0;
  std::vector<FoilOutcome> outcomes;
};

/// A pair counts only when the correct paragraph's mean segment score is
/// strictly greater than the foil's. Throws kMissingScore for unscored
/// captions and kEmptyParagraph for pairs without segments.
FoilResult foil_accuracy(const FoilPairSet& pairs, const std::map<std::string, double>& scores);

}  // namespace emscore
