#include "emscore/scoring.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "emscore/error.hpp"
#include "oracles.hpp"

namespace emscore {
namespace {

using testing::as_rows;
using testing::make_caption;
using testing::oracle_fine;
using testing::random_matrix;

const std::vector<double> kUniform2{1.0, 1.0};
const std::vector<double> kUniform1{1.0};

template <typename F>
ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

EmbeddingMatrix toy_tokens() { return EmbeddingMatrix::from_rows({{1.0f, 0.0f}, {0.0f, 1.0f}}); }
EmbeddingMatrix toy_frame() { return EmbeddingMatrix::from_rows({{1.0f, 0.0f}}); }

TEST(FineMatch, TwoTokensOneFrame) {
  const auto oracle = oracle_fine(as_rows(toy_tokens()), kUniform2, as_rows(toy_frame()), kUniform1);
  EXPECT_DOUBLE_EQ(oracle.p, 0.5);
  EXPECT_DOUBLE_EQ(oracle.r, 1.0);
  EXPECT_DOUBLE_EQ(oracle.f, 2.0 / 3.0);

  const auto s = fine_match(toy_tokens(), kUniform2, toy_frame(), kUniform1);
  EXPECT_DOUBLE_EQ(s.precision, oracle.p);
  EXPECT_DOUBLE_EQ(s.recall, oracle.r);
  EXPECT_DOUBLE_EQ(s.f1, oracle.f);
}

TEST(FineMatch, IdfWeightedPrecision) {
  const std::vector<double> w{2.0, 1.0};
  const auto oracle = oracle_fine(as_rows(toy_tokens()), w, as_rows(toy_frame()), kUniform1);
  EXPECT_DOUBLE_EQ(oracle.p, 2.0 / 3.0);
  const auto s = fine_match(toy_tokens(), w, toy_frame(), kUniform1);
  EXPECT_DOUBLE_EQ(s.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall, 1.0);
}

TEST(FineMatch, SelfMatchIsOne) {
  std::mt19937_64 rng(1);
  const auto m = random_matrix(rng, 5, 8);
  const std::vector<double> w(5, 1.0);
  const auto s = fine_match(m, w, m, w);
  EXPECT_NEAR(s.precision, 1.0, 1e-6);
  EXPECT_NEAR(s.recall, 1.0, 1e-6);
  EXPECT_NEAR(s.f1, 1.0, 1e-6);
}

TEST(FineMatch, Errors) {
  const std::vector<double> zeros{0.0, 0.0};
  EXPECT_EQ(error_of([&] { fine_match(toy_tokens(), zeros, toy_frame(), kUniform1); }), ErrorCode::kAllZeroWeights);
  EXPECT_EQ(error_of([&] { fine_match(toy_tokens(), kUniform2, toy_frame(), std::vector<double>{0.0}); }),
            ErrorCode::kAllZeroWeights);
  EXPECT_EQ(error_of([&] { fine_match(toy_tokens(), kUniform1, toy_frame(), kUniform1); }), ErrorCode::kLengthMismatch);
  EXPECT_EQ(error_of([&] { fine_match(toy_tokens(), std::vector<double>{1.0, -1.0}, toy_frame(), kUniform1); }),
            ErrorCode::kInvalidArgument);
  const auto three_d = EmbeddingMatrix::from_rows({{1.0f, 0.0f, 0.0f}});
  EXPECT_EQ(error_of([&] { fine_match(toy_tokens(), kUniform2, three_d, kUniform1); }), ErrorCode::kDimensionMismatch);
}

TEST(F1, NonPositiveSideIsZero) {
  EXPECT_EQ(f1_score(0.0, 0.0), 0.0);
  EXPECT_EQ(f1_score(-0.3, 0.1), 0.0);
  EXPECT_EQ(f1_score(-0.2, -0.2), 0.0);
  EXPECT_EQ(f1_score(0.0, 0.7), 0.0);
  // Mixed signs with P + R > 0 would give 2PR/(P+R) < -1 here.
  EXPECT_EQ(f1_score(-0.1475, 0.1574), 0.0);
  EXPECT_DOUBLE_EQ(f1_score(0.5, 1.0), 2.0 / 3.0);
}

TEST(F1, ContinuousAtZeroAndBounded) {
  EXPECT_LT(f1_score(1e-12, 0.9), 1e-11);
  for (double p = -1.0; p <= 1.0; p += 0.01) {
    for (double r = -1.0; r <= 1.0; r += 0.01) {
      const double f = f1_score(p, r);
      EXPECT_GE(f, 0.0);
      EXPECT_LE(f, 1.0);
    }
  }
}

TEST(VideoGlobal, SingleFrame) {
  const auto g = video_global(EmbeddingMatrix::from_rows({{0.6f, 0.8f}}));
  EXPECT_NEAR(g[0], 0.6, 1e-7);
  EXPECT_NEAR(g[1], 0.8, 1e-7);
}

TEST(VideoGlobal, AntipodalFramesCancel) {
  EXPECT_EQ(error_of([] { video_global(EmbeddingMatrix::from_rows({{1.0f, 0.0f}, {-1.0f, 0.0f}})); }),
            ErrorCode::kZeroVector);
}

TEST(VideoGlobal, OrthonormalPair) {
  const auto g = video_global(EmbeddingMatrix::from_rows({{1.0f, 0.0f}, {0.0f, 1.0f}}));
  EXPECT_NEAR(g[0], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(g[1], 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(VideoGlobal, UnitNormResult) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto g = video_global(random_matrix(rng, 1 + i % 7, 12));
    const double n = std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
    EXPECT_NEAR(n, 1.0, 1e-12);
  }
}

TEST(CoarseScore, BasicGeometry) {
  const std::vector<double> u{0.6, 0.8};
  const std::vector<double> v{-0.8, 0.6};
  const std::vector<double> minus_u{-0.6, -0.8};
  EXPECT_NEAR(coarse_score(u, u), 1.0, 1e-15);
  EXPECT_NEAR(coarse_score(u, v), 0.0, 1e-15);
  EXPECT_NEAR(coarse_score(u, minus_u), -1.0, 1e-15);
  EXPECT_EQ(error_of([&] { coarse_score(u, std::vector<double>{1.0, 0.0, 0.0}); }), ErrorCode::kDimensionMismatch);
}

TEST(Emscore, ToyCaptionAgainstOneFrame) {
  // Caption global is its last row (0,1); video global is (1,0).
  const CaptionRecord caption{"c", {"<sos>", "<eos>"}, toy_tokens()};
  const VideoRecord video{"v", toy_frame(), {}};
  const auto r = emscore(caption, video, nullptr);
  EXPECT_DOUBLE_EQ(r.coarse, 0.0);
  EXPECT_DOUBLE_EQ(r.fine.f1, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.combined, 1.0 / 3.0);
  EXPECT_EQ(r.caption_id, "c");
  EXPECT_EQ(r.ground_id, "v");
  EXPECT_FALSE(r.with_references.has_value());
}

TEST(Emscore, SelfMatchAgainstVideo) {
  // Frames u, v; caption rows u, v, and a global equal to the normalized mean.
  const float h = static_cast<float>(1.0 / std::sqrt(2.0));
  const VideoRecord video{"v", EmbeddingMatrix::from_rows({{1.0f, 0.0f}, {0.0f, 1.0f}}), {}};
  const CaptionRecord caption{"c", {"<sos>", "x", "<eos>"}, EmbeddingMatrix::from_rows({{1.0f, 0.0f}, {0.0f, 1.0f}, {h, h}})};
  const auto r = emscore(caption, video, nullptr);
  EXPECT_NEAR(r.coarse, 1.0, 1e-6);
  // Global row (h,h) also matches both frames at 0.707, but frames each find an exact token.
  EXPECT_NEAR(r.fine.recall, 1.0, 1e-12);

  // A caption whose rows are exactly the frames (global = last frame) with one frame.
  const VideoRecord single{"s", EmbeddingMatrix::from_rows({{0.6f, 0.8f}}), {}};
  const CaptionRecord same{"c2", {"<sos>", "<eos>"}, EmbeddingMatrix::from_rows({{0.6f, 0.8f}, {0.6f, 0.8f}})};
  const auto r2 = emscore(same, single, nullptr);
  EXPECT_NEAR(r2.coarse, 1.0, 1e-6);
  EXPECT_NEAR(r2.fine.f1, 1.0, 1e-6);
  EXPECT_NEAR(r2.combined, 1.0, 1e-6);
}

TEST(Emscore, CaptionAgainstItselfAsTextIsOne) {
  std::mt19937_64 rng(8);
  const auto caption = make_caption("c", random_matrix(rng, 6, 16));
  const auto idf = build_idf({{"<|startoftext|>", "w1", "w2", "<|endoftext|>"}, {"<|startoftext|>", "w3", "<|endoftext|>"}});
  for (const IdfTable* t : {static_cast<const IdfTable*>(nullptr), &idf}) {
    const auto r = emscore(caption, caption, t);
    EXPECT_NEAR(r.combined, 1.0, 1e-6);
  }
}

TEST(Emscore, IdfWeightsEnterPrecisionNotVideoRecall) {
  std::mt19937_64 rng(9);
  const auto caption = make_caption("c", random_matrix(rng, 5, 8));
  const VideoRecord video{"v", random_matrix(rng, 4, 8), {}};
  const auto idf = build_idf({{"<|startoftext|>", "w1", "<|endoftext|>"}, {"<|startoftext|>", "w2", "w3", "<|endoftext|>"}});
  const auto plain = emscore(caption, video, nullptr);
  const auto weighted = emscore(caption, video, &idf);
  EXPECT_DOUBLE_EQ(plain.fine.recall, weighted.fine.recall);
  EXPECT_DOUBLE_EQ(plain.coarse, weighted.coarse);

  const auto w = caption_weights(caption, &idf);
  const auto o = oracle_fine(as_rows(caption.embeddings), w, as_rows(video.frames), std::vector<double>(4, 1.0));
  EXPECT_NEAR(weighted.fine.precision, o.p, 1e-12);
}

TEST(Emscore, EosWeightIsPositional) {
  std::mt19937_64 rng(10);
  auto caption = make_caption("c", random_matrix(rng, 4, 8));
  caption.tokens.back() = "[EOS-under-another-name]";
  const auto idf = build_idf({{"<|startoftext|>", "w1", "<|endoftext|>"}, {"<|startoftext|>", "w2", "<|endoftext|>"}});
  const auto w = caption_weights(caption, &idf);
  EXPECT_EQ(w.back(), idf.eos_weight());
  EXPECT_EQ(w.front(), 0.0);  // SOS occurs in every document
}

TEST(Emscore, ReferenceRecallWeightingIsConfigurable) {
  std::mt19937_64 rng(12);
  const auto caption = make_caption("c", random_matrix(rng, 4, 8));
  const auto reference = make_caption("r", random_matrix(rng, 5, 8), "w");
  const auto idf = build_idf({{"<|startoftext|>", "w1", "w2", "<|endoftext|>"}, {"<|startoftext|>", "w3", "<|endoftext|>"}});
  ScoreOptions uniform;
  uniform.reference_recall_idf = false;
  const auto a = emscore(caption, reference, &idf);
  const auto b = emscore(caption, reference, &idf, uniform);
  EXPECT_DOUBLE_EQ(a.fine.precision, b.fine.precision);
  const auto oa = oracle_fine(as_rows(caption.embeddings), caption_weights(caption, &idf), as_rows(reference.embeddings),
                              caption_weights(reference, &idf));
  const auto ob = oracle_fine(as_rows(caption.embeddings), caption_weights(caption, &idf), as_rows(reference.embeddings),
                              std::vector<double>(5, 1.0));
  EXPECT_NEAR(a.fine.recall, oa.r, 1e-12);
  EXPECT_NEAR(b.fine.recall, ob.r, 1e-12);
}

TEST(EmscoreRef, IdentityReferenceDominates) {
  std::mt19937_64 rng(13);
  const auto caption = make_caption("c", random_matrix(rng, 5, 16));
  const VideoRecord video{"v", random_matrix(rng, 6, 16), {}};
  const auto other = make_caption("o", random_matrix(rng, 4, 16));
  const std::vector<CaptionRef> refs{other, caption};
  const auto r = emscore_ref(caption, video, refs, nullptr);
  ASSERT_TRUE(r.with_references);
  EXPECT_NEAR(r.with_references->combined, (r.combined + 1.0) / 2.0, 1e-6);
  EXPECT_EQ(r.with_references->best_reference_id, "c");
  EXPECT_EQ(r.per_reference.size(), 2u);
}

TEST(EmscoreRef, SingleReferenceMax) {
  std::mt19937_64 rng(14);
  const auto caption = make_caption("c", random_matrix(rng, 5, 16));
  const VideoRecord video{"v", random_matrix(rng, 6, 16), {}};
  const auto ref = make_caption("r", random_matrix(rng, 4, 16));
  const std::vector<CaptionRef> refs{ref};
  const auto r = emscore_ref(caption, video, refs, nullptr);
  const auto text = emscore(caption, ref, nullptr);
  EXPECT_DOUBLE_EQ(r.with_references->combined, (r.combined + text.combined) / 2.0);
  EXPECT_DOUBLE_EQ(r.with_references->coarse, (r.coarse + text.coarse) / 2.0);
  EXPECT_DOUBLE_EQ(r.with_references->fine, (r.fine.f1 + text.fine.f1) / 2.0);
}

TEST(EmscoreRef, NoReferences) {
  std::mt19937_64 rng(15);
  const auto caption = make_caption("c", random_matrix(rng, 3, 4));
  const VideoRecord video{"v", random_matrix(rng, 2, 4), {}};
  EXPECT_EQ(error_of([&] { emscore_ref(caption, video, {}, nullptr); }), ErrorCode::kNoReferences);
}

TEST(EmscoreRef, AddingReferencesNeverLowersScore) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 50; ++trial) {
    const auto caption = make_caption("c", random_matrix(rng, 4, 8));
    const VideoRecord video{"v", random_matrix(rng, 3, 8), {}};
    std::vector<CaptionRecord> pool;
    for (int i = 0; i < 5; ++i) pool.push_back(make_caption("r" + std::to_string(i), random_matrix(rng, 3 + i, 8)));
    std::vector<CaptionRef> refs;
    double previous = -2.0;
    for (const auto& p : pool) {
      refs.emplace_back(p);
      const auto r = emscore_ref(caption, video, refs, nullptr);
      EXPECT_GE(r.with_references->combined, previous);
      previous = r.with_references->combined;
    }
  }
}

TEST(SelectedScore, GranularityPicksComponent) {
  const CaptionRecord caption{"c", {"<sos>", "<eos>"}, toy_tokens()};
  const VideoRecord video{"v", toy_frame(), {}};
  const auto r = emscore(caption, video, nullptr);
  EXPECT_EQ(selected_score(r, Mode::kEmscore, Granularity::kCoarse), r.coarse);
  EXPECT_EQ(selected_score(r, Mode::kEmscore, Granularity::kFine), r.fine.f1);
  EXPECT_EQ(selected_score(r, Mode::kEmscore, Granularity::kFull), r.combined);
  EXPECT_EQ(error_of([&] { selected_score(r, Mode::kEmscoreRef, Granularity::kFull); }), ErrorCode::kNoReferences);
  EXPECT_EQ(parse_granularity("fine"), Granularity::kFine);
  EXPECT_EQ(parse_mode("emscore_ref"), Mode::kEmscoreRef);
}

TEST(MatchTrace, TokenEqualToGroundRow) {
  std::mt19937_64 rng(17);
  auto frames = random_matrix(rng, 5, 16);
  const auto row3 = frames.row(3);
  auto tokens = random_matrix(rng, 3, 16);
  std::copy(row3.begin(), row3.end(), tokens.row(1).begin());
  const auto caption = make_caption("c", tokens);
  const VideoRecord video{"v", frames, {}};
  const auto t = match_trace(caption, video, nullptr);
  EXPECT_EQ(t.tokens[1].ground_row, 3u);
  EXPECT_NEAR(t.tokens[1].similarity, 1.0, 1e-6);
  EXPECT_EQ(t.ground[3].token_index, 1u);
}

TEST(MatchTrace, TiesGoToLowestIndex) {
  // Token (1,0) is equidistant from frames (h,h) and (h,-h).
  const float h = static_cast<float>(1.0 / std::sqrt(2.0));
  const VideoRecord video{"v", EmbeddingMatrix::from_rows({{0.0f, 1.0f}, {h, h}, {h, -h}}), {}};
  const CaptionRecord caption{"c", {"<sos>", "<eos>"}, EmbeddingMatrix::from_rows({{1.0f, 0.0f}, {1.0f, 0.0f}})};
  const auto t = match_trace(caption, video, nullptr);
  EXPECT_EQ(t.tokens[0].ground_row, 1u);
  EXPECT_EQ(t.tokens[1].ground_row, 1u);
  // Both tokens are identical, so every frame's best token is token 0.
  for (const auto& g : t.ground) EXPECT_EQ(g.token_index, 0u);
}

TEST(MatchTrace, ReaggregationReproducesScores) {
  std::mt19937_64 rng(18);
  const auto idf = build_idf({{"<|startoftext|>", "w1", "w2", "<|endoftext|>"}, {"<|startoftext|>", "w3", "<|endoftext|>"}});
  for (int trial = 0; trial < 100; ++trial) {
    const auto caption = make_caption("c", random_matrix(rng, 2 + trial % 6, 12));
    const VideoRecord video{"v", random_matrix(rng, 1 + trial % 7, 12), {}};
    const auto t = match_trace(caption, video, &idf);
    double pn = 0, pd = 0, rn = 0, rd = 0;
    for (const auto& m : t.tokens) {
      pn += m.weight * m.similarity;
      pd += m.weight;
    }
    for (const auto& m : t.ground) {
      rn += m.weight * m.similarity;
      rd += m.weight;
    }
    const auto s = emscore(caption, video, &idf).fine;
    EXPECT_EQ(pn / pd, s.precision);
    EXPECT_EQ(rn / rd, s.recall);
    EXPECT_EQ(t.score.f1, s.f1);
  }
}

TEST(ParagraphScore, Means) {
  EXPECT_DOUBLE_EQ(paragraph_score(std::vector<double>{0.4, 0.6}), 0.5);
  EXPECT_EQ(paragraph_score(std::vector<double>{0.37}), 0.37);
  EXPECT_DOUBLE_EQ(paragraph_score(std::vector<double>(7, 0.25)), 0.25);
  EXPECT_EQ(error_of([] { paragraph_score(std::vector<double>{}); }), ErrorCode::kEmptyParagraph);
}

// Properties ----------------------------------------------------------------

TEST(ScoringProperty, FineMatchMatchesOracle) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::size_t> rows(1, 8);
  std::uniform_int_distribution<std::size_t> dims(1, 16);
  std::uniform_real_distribution<double> weight(0.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    const auto d = dims(rng);
    const auto n = rows(rng);
    const auto m = rows(rng);
    const auto tokens = random_matrix(rng, n, d);
    const auto ground = random_matrix(rng, m, d);
    std::vector<double> tw(n), gw(m);
    for (auto& w : tw) w = trial % 2 ? weight(rng) + 1e-3 : 1.0;
    for (auto& w : gw) w = trial % 3 ? weight(rng) + 1e-3 : 1.0;
    const auto s = fine_match(tokens, tw, ground, gw);
    const auto o = oracle_fine(as_rows(tokens), tw, as_rows(ground), gw);
    EXPECT_NEAR(s.precision, o.p, 1e-9);
    EXPECT_NEAR(s.recall, o.r, 1e-9);
    EXPECT_NEAR(s.f1, o.f, 1e-9);
  }
}

TEST(ScoringProperty, UniformWeightsReduceToUnweighted) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const auto tokens = random_matrix(rng, 1 + trial % 8, 10);
    const auto ground = random_matrix(rng, 1 + trial % 5, 10);
    const double c = 0.25 + trial;
    const auto a = fine_match(tokens, std::vector<double>(tokens.rows(), 1.0), ground, std::vector<double>(ground.rows(), 1.0));
    const auto b = fine_match(tokens, std::vector<double>(tokens.rows(), c), ground, std::vector<double>(ground.rows(), c));
    EXPECT_NEAR(a.precision, b.precision, 1e-12);
    EXPECT_NEAR(a.recall, b.recall, 1e-12);
  }
}

TEST(ScoringProperty, Bounds) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const auto caption = make_caption("c", random_matrix(rng, 2 + trial % 7, 6));
    const VideoRecord video{"v", random_matrix(rng, 1 + trial % 5, 6), {}};
    const auto r = emscore(caption, video, nullptr);
    for (const double x : {r.coarse, r.fine.precision, r.fine.recall, r.fine.f1, r.combined}) {
      EXPECT_GE(x, -1.0 - 1e-9);
      EXPECT_LE(x, 1.0 + 1e-9);
    }
  }
}

TEST(ScoringProperty, FramePermutationInvariance) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const auto caption = make_caption("c", random_matrix(rng, 2 + trial % 6, 12));
    const auto frames = random_matrix(rng, 2 + trial % 7, 12);
    std::vector<std::size_t> perm(frames.rows());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    EmbeddingMatrix permuted(frames.rows(), frames.dim());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      const auto src = frames.row(perm[i]);
      std::copy(src.begin(), src.end(), permuted.row(i).begin());
    }
    const auto g1 = video_global(frames);
    const auto g2 = video_global(permuted);
    for (std::size_t k = 0; k < g1.size(); ++k) EXPECT_NEAR(g1[k], g2[k], 1e-9);
    const auto a = emscore(caption, VideoRecord{"v", frames, {}}, nullptr);
    const auto b = emscore(caption, VideoRecord{"v", permuted, {}}, nullptr);
    EXPECT_NEAR(a.fine.precision, b.fine.precision, 1e-9);
    EXPECT_NEAR(a.fine.recall, b.fine.recall, 1e-9);
    EXPECT_NEAR(a.combined, b.combined, 1e-9);
  }
}

}  // namespace
}  // namespace emscore
