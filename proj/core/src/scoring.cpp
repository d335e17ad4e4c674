#include "emscore/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "emscore/error.hpp"

namespace emscore {

namespace {

constexpr double kZeroNormThreshold = 1e-12;

double dot(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += static_cast<double>(a[k]) * static_cast<double>(b[k]);
  return sum;
}

struct Best {
  std::size_t index = 0;
  double similarity = 0.0;
};

// Best ground row for every token and best token for every ground row.
struct Alignment {
  std::vector<Best> token_best;
  std::vector<Best> ground_best;
};

Alignment align(const EmbeddingMatrix& tokens, const EmbeddingMatrix& ground) {
  if (tokens.rows() == 0 || ground.rows() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "fine matching needs at least one row on each side");
  }
  if (tokens.dim() != ground.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "token dim " + std::to_string(tokens.dim()) + " != ground dim " + std::to_string(ground.dim()));
  }
  const auto n = tokens.rows();
  const auto m = ground.rows();
  const auto d = tokens.dim();
  std::vector<double> sim(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const float* x = tokens.row(i).data();
    std::size_t j = 0;
    // Four independent ascending-index sums per pass; each equals dot() bit for bit.
    for (; j + 4 <= m; j += 4) {
      const float* g0 = ground.row(j).data();
      const float* g1 = g0 + d;
      const float* g2 = g1 + d;
      const float* g3 = g2 + d;
      double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double xk = x[k];
        s0 += xk * static_cast<double>(g0[k]);
        s1 += xk * static_cast<double>(g1[k]);
        s2 += xk * static_cast<double>(g2[k]);
        s3 += xk * static_cast<double>(g3[k]);
      }
      sim[i * m + j] = s0;
      sim[i * m + j + 1] = s1;
      sim[i * m + j + 2] = s2;
      sim[i * m + j + 3] = s3;
    }
    for (; j < m; ++j) sim[i * m + j] = dot(tokens.row(i), ground.row(j));
  }

  Alignment out{std::vector<Best>(n), std::vector<Best>(m)};
  for (std::size_t i = 0; i < n; ++i) {
    Best best{0, sim[i * m]};
    for (std::size_t j = 1; j < m; ++j) {
      if (sim[i * m + j] > best.similarity) best = {j, sim[i * m + j]};
    }
    out.token_best[i] = best;
  }
  for (std::size_t j = 0; j < m; ++j) {
    Best best{0, sim[j]};
    for (std::size_t i = 1; i < n; ++i) {
      if (sim[i * m + j] > best.similarity) best = {i, sim[i * m + j]};
    }
    out.ground_best[j] = best;
  }
  return out;
}

double weighted_mean(const std::vector<Best>& best, std::span<const double> weights, std::string_view side) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < best.size(); ++i) {
    num += weights[i] * best[i].similarity;
    den += weights[i];
  }
  if (!(den > 0.0)) throw Error(ErrorCode::kAllZeroWeights, std::string(side) + " weights sum to zero");
  return num / den;
}

void check_weights(std::span<const double> weights, std::size_t rows, std::string_view side) {
  if (weights.size() != rows) {
    throw Error(ErrorCode::kLengthMismatch, std::string(side) + " has " + std::to_string(rows) + " rows but " +
                                                std::to_string(weights.size()) + " weights");
  }
  for (const double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidArgument, std::string(side) + " weights must be finite and non-negative");
    }
  }
}

FineScore score_alignment(const Alignment& a, std::span<const double> token_weights,
                          std::span<const double> ground_weights) {
  FineScore s;
  s.precision = weighted_mean(a.token_best, token_weights, "token");
  s.recall = weighted_mean(a.ground_best, ground_weights, "ground");
  s.f1 = f1_score(s.precision, s.recall);
  return s;
}

std::vector<double> to_double(std::span<const float> v) { return {v.begin(), v.end()}; }

std::vector<double> reference_weights(const CaptionRecord& reference, const IdfTable* idf,
                                      const ScoreOptions& options) {
  return caption_weights(reference, options.reference_recall_idf ? idf : nullptr);
}

void check_caption(const CaptionRecord& caption) {
  if (caption.embeddings.rows() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "caption '" + caption.id + "' has no embedding rows");
  }
}

ScoreReport finish(const CaptionRecord& caption, std::string ground_id, double coarse, FineScore fine) {
  ScoreReport r;
  r.caption_id = caption.id;
  r.ground_id = std::move(ground_id);
  r.coarse = coarse;
  r.fine = fine;
  r.combined = (coarse + fine.f1) / 2.0;
  return r;
}

MatchTrace build_trace(const CaptionRecord& caption, const std::string& ground_id, const EmbeddingMatrix& ground,
                       std::span<const double> token_weights, std::span<const double> ground_weights) {
  check_weights(token_weights, caption.embeddings.rows(), "caption");
  check_weights(ground_weights, ground.rows(), "ground");
  const auto a = align(caption.embeddings, ground);

  MatchTrace trace;
  trace.caption_id = caption.id;
  trace.ground_id = ground_id;
  for (std::size_t i = 0; i < a.token_best.size(); ++i) {
    trace.tokens.push_back({i, i < caption.tokens.size() ? caption.tokens[i] : std::string(), a.token_best[i].index,
                            a.token_best[i].similarity, token_weights[i]});
  }
  for (std::size_t j = 0; j < a.ground_best.size(); ++j) {
    trace.ground.push_back({j, a.ground_best[j].index, a.ground_best[j].similarity, ground_weights[j]});
  }
  trace.score = score_alignment(a, token_weights, ground_weights);
  return trace;
}

}  // namespace

double f1_score(double precision, double recall) {
  if (!(precision > 0.0 && recall > 0.0)) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<double> video_global(const EmbeddingMatrix& frames) {
  if (frames.rows() == 0) throw Error(ErrorCode::kInvalidArgument, "video has no frames");
  std::vector<double> mean(frames.dim(), 0.0);
  for (std::size_t i = 0; i < frames.rows(); ++i) {
    const auto row = frames.row(i);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += row[k];
  }
  double sq = 0.0;
  for (auto& v : mean) {
    v /= static_cast<double>(frames.rows());
    sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (norm < kZeroNormThreshold) throw Error(ErrorCode::kZeroVector, "mean frame embedding has zero norm");
  for (auto& v : mean) v /= norm;
  return mean;
}

double coarse_score(std::span<const double> caption_global, std::span<const double> ground_global) {
  if (caption_global.size() != ground_global.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "global embeddings have dims " + std::to_string(caption_global.size()) +
                                                   " and " + std::to_string(ground_global.size()));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < caption_global.size(); ++k) sum += caption_global[k] * ground_global[k];
  return sum;
}

FineScore fine_match(const EmbeddingMatrix& tokens, std::span<const double> token_weights,
                     const EmbeddingMatrix& ground, std::span<const double> ground_weights) {
  check_weights(token_weights, tokens.rows(), "token");
  check_weights(ground_weights, ground.rows(), "ground");
  return score_alignment(align(tokens, ground), token_weights, ground_weights);
}

std::vector<double> caption_weights(const CaptionRecord& caption, const IdfTable* idf) {
  const auto rows = caption.embeddings.rows();
  if (idf == nullptr) return std::vector<double>(rows, 1.0);
  if (caption.tokens.size() != rows) {
    throw Error(ErrorCode::kDimensionMismatch, "caption '" + caption.id + "' has " +
                                                   std::to_string(caption.tokens.size()) + " tokens for " +
                                                   std::to_string(rows) + " rows");
  }
  std::vector<double> w(rows);
  for (std::size_t i = 0; i + 1 < rows; ++i) w[i] = idf->lookup(caption.tokens[i]);
  if (rows > 0) w[rows - 1] = idf->eos_weight();
  return w;
}

ScoreReport emscore(const CaptionRecord& caption, const VideoRecord& video, const IdfTable* idf,
                    const ScoreOptions& /*options*/) {
  check_caption(caption);
  const auto caption_global = to_double(caption.global());
  const auto ground_global = video_global(video.frames);
  const double coarse = coarse_score(caption_global, ground_global);

  const auto token_w = caption_weights(caption, idf);
  const std::vector<double> frame_w(video.frames.rows(), 1.0);
  const auto fine = fine_match(caption.embeddings, token_w, video.frames, frame_w);
  return finish(caption, video.id, coarse, fine);
}

ScoreReport emscore(const CaptionRecord& caption, const CaptionRecord& reference, const IdfTable* idf,
                    const ScoreOptions& options) {
  check_caption(caption);
  check_caption(reference);
  const double coarse = coarse_score(to_double(caption.global()), to_double(reference.global()));
  const auto token_w = caption_weights(caption, idf);
  const auto ref_w = reference_weights(reference, idf, options);
  const auto fine = fine_match(caption.embeddings, token_w, reference.embeddings, ref_w);
  return finish(caption, reference.id, coarse, fine);
}

ScoreReport emscore_ref(const CaptionRecord& caption, const VideoRecord& video, std::span<const CaptionRef> references,
                        const IdfTable* idf, const ScoreOptions& options) {
  if (references.empty()) throw Error(ErrorCode::kNoReferences, "caption '" + caption.id + "' has no references");
  auto report = emscore(caption, video, idf, options);

  double best_coarse = -std::numeric_limits<double>::infinity();
  double best_fine = best_coarse;
  double best_combined = best_coarse;
  std::string best_id;
  for (const auto& ref : references) {
    const auto r = emscore(caption, ref.get(), idf, options);
    best_coarse = std::max(best_coarse, r.coarse);
    best_fine = std::max(best_fine, r.fine.f1);
    if (r.combined > best_combined) {
      best_combined = r.combined;
      best_id = r.ground_id;
    }
    report.per_reference.push_back({r.ground_id, r.coarse, r.fine, r.combined});
  }
  report.with_references = ReferenceSummary{(report.coarse + best_coarse) / 2.0, (report.fine.f1 + best_fine) / 2.0,
                                            (report.combined + best_combined) / 2.0, std::move(best_id)};
  return report;
}

std::string_view to_string(Mode mode) { return mode == Mode::kEmscore ? "emscore" : "emscore_ref"; }

std::string_view to_string(Granularity granularity) {
  switch (granularity) {
    case Granularity::kCoarse: return "coarse";
    case Granularity::kFine: return "fine";
    case Granularity::kFull: return "full";
  }
  return "full";
}

Mode parse_mode(std::string_view name) {
  if (name == "emscore") return Mode::kEmscore;
  if (name == "emscore_ref") return Mode::kEmscoreRef;
  throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + std::string(name) + "'");
}

Granularity parse_granularity(std::string_view name) {
  if (name == "coarse") return Granularity::kCoarse;
  if (name == "fine") return Granularity::kFine;
  if (name == "full") return Granularity::kFull;
  throw Error(ErrorCode::kInvalidArgument, "unknown granularity '" + std::string(name) + "'");
}

double selected_score(const ScoreReport& report, Mode mode, Granularity granularity) {
  if (mode == Mode::kEmscore) {
    switch (granularity) {
      case Granularity::kCoarse: return report.coarse;
      case Granularity::kFine: return report.fine.f1;
      case Granularity::kFull: return report.combined;
    }
  }
  if (!report.with_references) {
    throw Error(ErrorCode::kNoReferences, "report for '" + report.caption_id + "' has no reference scores");
  }
  const auto& refs = *report.with_references;
  switch (granularity) {
    case Granularity::kCoarse: return refs.coarse;
    case Granularity::kFine: return refs.fine;
    case Granularity::kFull: return refs.combined;
  }
  return refs.combined;
}

MatchTrace match_trace(const CaptionRecord& caption, const VideoRecord& video, const IdfTable* idf) {
  const auto token_w = caption_weights(caption, idf);
  const std::vector<double> frame_w(video.frames.rows(), 1.0);
  return build_trace(caption, video.id, video.frames, token_w, frame_w);
}

MatchTrace match_trace(const CaptionRecord& caption, const CaptionRecord& reference, const IdfTable* idf,
                       const ScoreOptions& options) {
  const auto token_w = caption_weights(caption, idf);
  const auto ref_w = reference_weights(reference, idf, options);
  return build_trace(caption, reference.id, reference.embeddings, token_w, ref_w);
}

double paragraph_score(std::span<const double> segment_scores) {
  if (segment_scores.empty()) throw Error(ErrorCode::kEmptyParagraph, "paragraph has no segment scores");
  double sum = 0.0;
  for (const double s : segment_scores) sum += s;
  return sum / static_cast<double>(segment_scores.size());
}

}  // namespace emscore
