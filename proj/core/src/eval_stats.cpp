#include "emscore/eval_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "emscore/error.hpp"
#include "emscore/scoring.hpp"

namespace emscore {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "sequences have lengths " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
  }
  if (x.size() < 2) throw Error(ErrorCode::kLengthMismatch, "correlation needs at least two observations");
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(x.begin(), x.end(), finite) || !std::all_of(y.begin(), y.end(), finite)) {
    throw Error(ErrorCode::kInvalidArgument, "correlation inputs must be finite");
  }
}

std::int64_t tied_pairs(std::span<const double> sorted) {
  std::int64_t total = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<std::int64_t>(j - i);
    total += t * (t - 1) / 2;
    i = j;
  }
  return total;
}

// Sorts v ascending and returns the number of inversions it removed.
std::int64_t merge_count(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const auto mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, scratch, lo, mid) + merge_count(v, scratch, mid, hi);
  std::size_t a = lo;
  std::size_t b = mid;
  std::size_t k = lo;
  while (a < mid && b < hi) {
    if (v[b] < v[a]) {
      swaps += static_cast<std::int64_t>(mid - a);
      scratch[k++] = v[b++];
    } else {
      scratch[k++] = v[a++];
    }
  }
  while (a < mid) scratch[k++] = v[a++];
  while (b < hi) scratch[k++] = v[b++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (const double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto n = x.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  std::vector<double> xs(n);
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[order[i]];
    ys[i] = y[order[i]];
  }

  const auto n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const auto n1 = tied_pairs(xs);

  std::int64_t n3 = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && xs[j] == xs[i] && ys[j] == ys[i]) ++j;
    const auto t = static_cast<std::int64_t>(j - i);
    n3 += t * (t - 1) / 2;
    i = j;
  }

  std::vector<double> scratch(n);
  const auto discordant = merge_count(ys, scratch, 0, n);
  const auto n2 = tied_pairs(ys);

  if (n1 == n0 || n2 == n0) throw Error(ErrorCode::kDegenerateInput, "constant sequence has no rank correlation");

  const auto s = n0 - n1 - n2 + n3 - 2 * discordant;
  const double denom = std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
  return static_cast<double>(s) / denom;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const auto n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 hold ranks i+1..j.
    const double rank = static_cast<double>(i + 1 + j) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mx = mean_of(rx);
  const double my = mean_of(ry);
  double num = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double a = rx[i] - mx;
    const double b = ry[i] - my;
    num += a * b;
    dx += a * a;
    dy += b * b;
  }
  if (dx == 0.0 || dy == 0.0) throw Error(ErrorCode::kDegenerateInput, "constant sequence has no rank correlation");
  return num / std::sqrt(dx * dy);
}

double RatingRecord::human_mean() const {
  if (annotator_scores.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "caption '" + caption_id + "' has no annotator scores");
  }
  double sum = 0.0;
  for (const int s : annotator_scores) sum += s;
  return sum / static_cast<double>(annotator_scores.size());
}

Correlation caption_level_correlation(const RatingsTable& table, HumanAggregation aggregation) {
  std::vector<double> metric;
  std::vector<double> human;
  for (const auto& r : table.records) {
    if (!r.metric_score) throw Error(ErrorCode::kMissingScore, "caption '" + r.caption_id + "' has no metric score");
    if (aggregation == HumanAggregation::kMean) {
      metric.push_back(*r.metric_score);
      human.push_back(r.human_mean());
    } else {
      for (const int s : r.annotator_scores) {
        metric.push_back(*r.metric_score);
        human.push_back(static_cast<double>(s));
      }
    }
  }
  return {kendall_tau(metric, human), spearman_rho(metric, human), metric.size()};
}

double scale_human(double mean_score) { return (mean_score - 1.0) / 4.0; }

double scale_metric(double score, MetricRange range) {
  return range == MetricRange::kSignedUnit ? (score + 1.0) / 2.0 : score;
}

std::vector<SystemRank> system_ranking(const RatingsTable& table, MetricRange range) {
  struct Sums {
    double metric = 0.0;
    double human = 0.0;
    std::size_t count = 0;
  };
  std::map<std::string, Sums> by_system;
  for (const auto& r : table.records) {
    if (!r.metric_score) throw Error(ErrorCode::kMissingScore, "caption '" + r.caption_id + "' has no metric score");
    auto& s = by_system[r.system_label];
    s.metric += *r.metric_score;
    s.human += r.human_mean();
    ++s.count;
  }
  if (by_system.size() < 2) throw Error(ErrorCode::kSingleSystem, "system ranking needs at least two systems");

  std::vector<SystemRank> out;
  for (const auto& [label, s] : by_system) {
    const auto n = static_cast<double>(s.count);
    SystemRank r;
    r.system_label = label;
    r.count = s.count;
    r.scaled_mean_metric = scale_metric(s.metric / n, range);
    r.scaled_mean_human = scale_human(s.human / n);
    out.push_back(std::move(r));
  }

  const auto assign = [&out](auto key, auto rank_field) {
    std::vector<std::size_t> order(out.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return key(out[a]) > key(out[b]); });
    for (std::size_t i = 0; i < order.size(); ++i) out[order[i]].*rank_field = i + 1;
  };
  assign([](const SystemRank& r) { return r.scaled_mean_metric; }, &SystemRank::rank_metric);
  assign([](const SystemRank& r) { return r.scaled_mean_human; }, &SystemRank::rank_human);

  for (auto& r : out) r.consistent = r.rank_metric == r.rank_human;
  std::sort(out.begin(), out.end(), [](const SystemRank& a, const SystemRank& b) { return a.rank_human < b.rank_human; });
  return out;
}

int quality_bin(double human_mean) {
  const auto k = static_cast<int>(std::floor(human_mean + 0.5));
  return std::clamp(k, 1, kQualityLevels);
}

double retention_probability(int set_index, int bin) { return 1.0 / (std::abs(set_index - bin) + 1); }

std::array<std::vector<std::size_t>, kQualityLevels> biased_sets(std::span<const int> bins, std::uint64_t seed) {
  // mt19937_64 output is fully specified by the standard, unlike the
  // distribution classes, so draws are built from raw bits.
  std::mt19937_64 gen(seed);
  const auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };

  std::array<std::vector<std::size_t>, kQualityLevels> sets;
  for (int set = 1; set <= kQualityLevels; ++set) {
    auto& kept = sets[static_cast<std::size_t>(set - 1)];
    for (std::size_t i = 0; i < bins.size(); ++i) {
      if (uniform() < retention_probability(set, bins[i])) kept.push_back(i);
    }
  }
  return sets;
}

std::array<std::vector<std::size_t>, kQualityLevels> biased_sets(const RatingsTable& table, std::uint64_t seed) {
  std::vector<int> bins;
  bins.reserve(table.records.size());
  for (const auto& r : table.records) bins.push_back(quality_bin(r.human_mean()));
  return biased_sets(bins, seed);
}

FoilResult foil_accuracy(const FoilPairSet& pairs, const std::map<std::string, double>& scores) {
  const auto score_of = [&scores](const std::string& id) {
    const auto it = scores.find(id);
    if (it == scores.end()) throw Error(ErrorCode::kMissingScore, "no score for caption '" + id + "'");
    return it->second;
  };

  FoilResult result;
  std::size_t correct = 0;
  for (const auto& pair : pairs.pairs) {
    if (pair.segments.empty()) throw Error(ErrorCode::kEmptyParagraph, "pair '" + pair.pair_id + "' has no segments");
    std::vector<double> good;
    std::vector<double> foil;
    for (const auto& seg : pair.segments) {
      good.push_back(score_of(seg.correct_caption_id));
      foil.push_back(score_of(seg.foil_caption_id));
    }
    FoilOutcome o{pair.pair_id, paragraph_score(good), paragraph_score(foil), false};
    o.correct = o.correct_score > o.foil_score;
    if (o.correct) ++correct;
    result.outcomes.push_back(std::move(o));
  }
  result.accuracy = pairs.pairs.empty() ? 0.0
                                        : static_cast<double>(correct) / static_cast<double>(pairs.pairs.size());
  return result;
}

}  // namespace emscore
