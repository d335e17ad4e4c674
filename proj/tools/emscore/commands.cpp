#include "emscore/commands.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "emscore/batch.hpp"
#include "emscore/emscore.hpp"
#include "emscore/text_util.hpp"

namespace emscore::cli {

namespace {

using text::format_double;

struct Common {
  std::vector<std::string> archives;
  std::string idf_path;
  std::string out_path;
};

struct Sink {
  std::ostream& out;
  std::string path;

  void emit(const std::string& contents) const {
    if (path.empty() || path == "-") {
      out << contents;
    } else {
      text::write_file(path, contents);
    }
  }
};

Archive load_archives(const std::vector<std::string>& prefixes, std::ostream& err) {
  if (prefixes.empty()) throw Error(ErrorCode::kInvalidArgument, "at least one --archive is required");
  std::optional<Archive> merged;
  std::size_t violations = 0;
  for (const auto& prefix : prefixes) {
    auto loaded = read_archive(ArchivePaths::from_prefix(prefix));
    violations += loaded.norm_violations.size();
    if (!merged) {
      merged = std::move(loaded.archive);
    } else {
      merged->merge(loaded.archive);
    }
  }
  if (violations > 0) err << "warning: " << violations << " embedding rows violate the unit-norm tolerance\n";
  return std::move(*merged);
}

std::optional<IdfTable> load_optional_idf(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return load_idf(path);
}

// --- validate -----------------------------------------------------------------

struct ValidateArgs {
  std::vector<std::string> archives;
  std::string out_path;
  bool strict = false;
};

int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream& /*err*/) {
  std::string report;
  std::size_t total = 0;
  std::optional<std::size_t> first_dim;
  for (const auto& prefix : a.archives) {
    const auto loaded = read_archive(ArchivePaths::from_prefix(prefix));
    const auto& ar = loaded.archive;
    report += "archive\t" + prefix + "\tdim\t" + std::to_string(ar.dim()) + "\tvideos\t" +
              std::to_string(ar.video_count()) + "\tcaptions\t" + std::to_string(ar.caption_count()) + "\n";
    auto findings = validate(ar).findings;
    if (!first_dim) {
      first_dim = ar.dim();
    } else if (*first_dim != ar.dim()) {
      findings.insert(findings.begin(), {FindingKind::kDimInconsistency, prefix, std::nullopt,
                                         "archive dim " + std::to_string(ar.dim()) + " != " +
                                             std::to_string(*first_dim)});
    }
    for (const auto& f : findings) {
      report += "finding\t" + std::string(to_string(f.kind)) + "\t" + f.record_id + "\t" +
                (f.row ? std::to_string(*f.row) : std::string("-")) + "\t" + f.detail + "\n";
    }
    total += findings.size();
  }
  report += "findings\t" + std::to_string(total) + "\n";
  Sink{out, a.out_path}.emit(report);
  return a.strict && total > 0 ? kExitFindings : kExitOk;
}

// --- idf ----------------------------------------------------------------------

struct IdfArgs {
  std::string corpus;
  std::string out_path;
  std::string eos_token{kDefaultEosToken};
  std::string unseen = "smoothed";
  std::string eos_mean = "exclude_eos";
};

int cmd_idf(const IdfArgs& a, std::ostream& out, std::ostream& /*err*/) {
  IdfOptions options;
  options.eos_token = a.eos_token;
  options.unseen_policy = parse_unseen_policy(a.unseen);
  options.eos_mean = parse_eos_mean(a.eos_mean);
  const auto table = build_idf(read_corpus(a.corpus), options);
  Sink{out, a.out_path}.emit(serialize_idf(table));
  return kExitOk;
}

// --- score --------------------------------------------------------------------

struct ScoreArgs {
  Common common;
  std::string pairs;
  std::string refs;
  std::string mode = "emscore";
  std::string granularity = "full";
  std::string weighting = "auto";
  bool uniform_reference_recall = false;
  unsigned jobs = 1;
};

struct ScoringSetup {
  Archive archive;
  std::optional<IdfTable> idf;
  std::optional<ReferenceMap> refs;
  Mode mode;
  Granularity granularity;
  ScoreOptions options;
  unsigned jobs = 1;

  BatchConfig batch() const {
    return {mode, idf ? &*idf : nullptr, refs ? &*refs : nullptr, options, jobs};
  }
};

// Resolves the flags shared by score and foil.
ScoringSetup prepare_scoring(const Common& common, const std::string& mode_name, const std::string& granularity_name,
                             const std::string& weighting, bool uniform_reference_recall, unsigned jobs,
                             const std::string& refs_path, std::ostream& err) {
  ScoringSetup s{load_archives(common.archives, err), std::nullopt, std::nullopt, parse_mode(mode_name),
                 parse_granularity(granularity_name), {}, std::max(1u, jobs)};
  if (weighting == "idf" && common.idf_path.empty()) {
    throw Error(ErrorCode::kMissingIdf, "--weighting idf requires --idf");
  }
  if (weighting != "uniform") s.idf = load_optional_idf(common.idf_path);
  if (!refs_path.empty()) s.refs = read_references(refs_path);
  s.options.reference_recall_idf = !uniform_reference_recall;
  return s;
}

int cmd_score(const ScoreArgs& a, std::ostream& out, std::ostream& err) {
  if (a.mode == "emscore_ref" && a.refs.empty()) {
    err << "error: --mode emscore_ref requires --refs\n";
    return kExitUsage;
  }
  auto setup = prepare_scoring(a.common, a.mode, a.granularity, a.weighting, a.uniform_reference_recall, a.jobs, a.refs,
                               err);
  const auto pairs = read_score_pairs(a.pairs);

  ScoreRun run;
  run.mode = setup.mode;
  run.granularity = setup.granularity;
  run.idf = setup.idf.has_value();
  run.reports = score_pairs(setup.archive, pairs, setup.batch());
  Sink{out, a.common.out_path}.emit(serialize_scores(run));
  return kExitOk;
}

// --- correlate ----------------------------------------------------------------

struct CorrelateArgs {
  std::string ratings;
  std::string scores;
  std::string out_path;
  bool per_annotator = false;
  bool biased = false;
  std::uint64_t seed = 2022;
};

RatingsTable ratings_with_scores(const std::string& ratings_path, const std::string& scores_path) {
  auto table = read_ratings(ratings_path);
  if (scores_path.empty()) return table;
  const auto scores = selected_scores(read_scores(scores_path));
  for (auto& r : table.records) {
    const auto it = scores.find(r.caption_id);
    if (it == scores.end()) throw Error(ErrorCode::kMissingScore, "no score for caption '" + r.caption_id + "'");
    r.metric_score = it->second;
  }
  return table;
}

std::string correlation_row(const std::string& name, const RatingsTable& table, HumanAggregation agg) {
  try {
    const auto c = caption_level_correlation(table, agg);
    return name + "\t" + std::to_string(c.n) + "\t" + format_double(c.tau) + "\t" + format_double(c.rho) + "\n";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateInput && e.code() != ErrorCode::kLengthMismatch) throw;
    return name + "\t" + std::to_string(table.records.size()) + "\tNA\tNA\n";
  }
}

int cmd_correlate(const CorrelateArgs& a, std::ostream& out, std::ostream& /*err*/) {
  const auto table = ratings_with_scores(a.ratings, a.scores);
  const auto agg = a.per_annotator ? HumanAggregation::kPerAnnotator : HumanAggregation::kMean;

  std::string report = "#emscore-correlation\t1\n";
  report += "human\t" + std::string(a.per_annotator ? "per_annotator" : "mean") + "\n";
  // The full-table correlation must be well defined; biased subsets may not be.
  const auto all = caption_level_correlation(table, agg);
  report += "set\tn\ttau\trho\n";
  report += "all\t" + std::to_string(all.n) + "\t" + format_double(all.tau) + "\t" + format_double(all.rho) + "\n";
  if (a.biased) {
    report += "seed\t" + std::to_string(a.seed) + "\n";
    const auto sets = biased_sets(table, a.seed);
    for (std::size_t s = 0; s < sets.size(); ++s) {
      RatingsTable subset;
      for (const auto idx : sets[s]) subset.records.push_back(table.records[idx]);
      report += correlation_row("biased_" + std::to_string(s + 1), subset, agg);
    }
  }
  Sink{out, a.out_path}.emit(report);
  return kExitOk;
}

// --- rank-systems ---------------------------------------------------------------

struct RankArgs {
  std::string ratings;
  std::string scores;
  std::string out_path;
  std::string metric_range = "signed";
};

int cmd_rank(const RankArgs& a, std::ostream& out, std::ostream& /*err*/) {
  const auto table = ratings_with_scores(a.ratings, a.scores);
  const auto range = a.metric_range == "unit" ? MetricRange::kUnit : MetricRange::kSignedUnit;
  const auto ranking = system_ranking(table, range);

  std::string report = "#emscore-ranking\t1\n";
  report += "system\tn\tscaled_metric\trank_metric\tscaled_human\trank_human\tconsistent\n";
  for (const auto& r : ranking) {
    report += r.system_label + "\t" + std::to_string(r.count) + "\t" + format_double(r.scaled_mean_metric) + "\t" +
              std::to_string(r.rank_metric) + "\t" + format_double(r.scaled_mean_human) + "\t" +
              std::to_string(r.rank_human) + "\t" + (r.consistent ? "yes" : "no") + "\n";
  }
  Sink{out, a.out_path}.emit(report);
  return kExitOk;
}

// --- foil ---------------------------------------------------------------------

struct FoilArgs {
  Common common;
  std::string foil;
  std::string scores;
  std::string mode = "emscore";
  std::string granularity = "full";
  std::string weighting = "auto";
  bool uniform_reference_recall = false;
  unsigned jobs = 1;
};

// References in a foil file belong to segments, not videos, so each segment is
// scored with its own reference list.
std::map<std::string, double> score_foil_captions(const FoilPairSet& pairs, const ScoringSetup& setup) {
  std::map<std::string, double> out;
  const auto record = [&](const ScoreReport& r) {
    const double score = selected_score(r, setup.mode, setup.granularity);
    const auto [it, inserted] = out.emplace(r.caption_id, score);
    if (!inserted && it->second != score) {
      throw Error(ErrorCode::kDuplicateId, "caption '" + r.caption_id + "' scored differently in two segments");
    }
  };
  const auto config = setup.batch();
  for (const auto& p : pairs.pairs) {
    for (const auto& s : p.segments) {
      const auto* refs = &s.reference_caption_ids;
      record(score_one(setup.archive, s.correct_caption_id, s.video_id, refs, config));
      record(score_one(setup.archive, s.foil_caption_id, s.video_id, refs, config));
    }
  }
  return out;
}

int cmd_foil(const FoilArgs& a, std::ostream& out, std::ostream& err) {
  const auto pairs = read_foil_pairs(a.foil);
  std::map<std::string, double> scores;
  if (!a.scores.empty()) {
    scores = selected_scores(read_scores(a.scores));
  } else if (!a.common.archives.empty()) {
    const auto setup =
        prepare_scoring(a.common, a.mode, a.granularity, a.weighting, a.uniform_reference_recall, a.jobs, "", err);
    scores = score_foil_captions(pairs, setup);
  } else {
    err << "error: foil needs --scores or --archive\n";
    return kExitUsage;
  }

  const auto result = foil_accuracy(pairs, scores);
  std::string report = "#emscore-foil-result\t1\n";
  report += "pair\tcorrect_score\tfoil_score\toutcome\n";
  for (const auto& o : result.outcomes) {
    report += o.pair_id + "\t" + format_double(o.correct_score) + "\t" + format_double(o.foil_score) + "\t" +
              (o.correct ? "correct" : "wrong") + "\n";
  }
  report += "accuracy\t" + format_double(result.accuracy) + "\n";
  Sink{out, a.common.out_path}.emit(report);
  return kExitOk;
}

// --- trace --------------------------------------------------------------------

struct TraceArgs {
  Common common;
  std::string pairs;
  std::string caption;
  std::string video;
  std::string reference;
};

std::string trace_records(const MatchTrace& t, const CaptionRecord& caption, const VideoRecord* video) {
  const auto frame_label = [video](std::size_t row) {
    if (video == nullptr || video->frame_indices.size() != video->frames.rows()) return std::string("-");
    return std::to_string(video->frame_indices[row]);
  };
  std::string s;
  for (const auto& m : t.tokens) {
    s += "token\t" + t.caption_id + "\t" + t.ground_id + "\t" + std::to_string(m.index) + "\t" + m.token + "\t" +
         std::to_string(m.ground_row) + "\t" + frame_label(m.ground_row) + "\t" + format_double(m.similarity) + "\t" +
         format_double(m.weight) + "\n";
  }
  for (const auto& m : t.ground) {
    const auto& tok = m.token_index < caption.tokens.size() ? caption.tokens[m.token_index] : std::string("-");
    s += "ground\t" + t.caption_id + "\t" + t.ground_id + "\t" + std::to_string(m.row) + "\t" + frame_label(m.row) +
         "\t" + std::to_string(m.token_index) + "\t" + tok + "\t" + format_double(m.similarity) + "\t" +
         format_double(m.weight) + "\n";
  }
  s += "score\t" + t.caption_id + "\t" + t.ground_id + "\t" + format_double(t.score.precision) + "\t" +
       format_double(t.score.recall) + "\t" + format_double(t.score.f1) + "\n";
  return s;
}

int cmd_trace(const TraceArgs& a, std::ostream& out, std::ostream& err) {
  const auto archive = load_archives(a.common.archives, err);
  const auto idf = load_optional_idf(a.common.idf_path);
  const IdfTable* idf_ptr = idf ? &*idf : nullptr;

  std::string report = "#emscore-trace\t1\n";
  if (!a.caption.empty()) {
    const auto& caption = archive.caption(a.caption);
    if (!a.reference.empty()) {
      report += trace_records(match_trace(caption, archive.caption(a.reference), idf_ptr), caption, nullptr);
    } else if (!a.video.empty()) {
      const auto& video = archive.video(a.video);
      report += trace_records(match_trace(caption, video, idf_ptr), caption, &video);
    } else {
      err << "error: --caption needs --video or --reference\n";
      return kExitUsage;
    }
  } else if (!a.pairs.empty()) {
    for (const auto& p : read_score_pairs(a.pairs)) {
      const auto& caption = archive.caption(p.caption_id);
      const auto& video = archive.video(p.video_id);
      report += trace_records(match_trace(caption, video, idf_ptr), caption, &video);
    }
  } else {
    err << "error: trace needs --pairs or --caption\n";
    return kExitUsage;
  }
  Sink{out, a.common.out_path}.emit(report);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Embedding-matching evaluation of video captions", "emscore"};
  app.require_subcommand(1);

  ValidateArgs validate_args;
  auto* validate_cmd = app.add_subcommand("validate", "Check archives for dimension, norm and count problems");
  validate_cmd->add_option("--archive", validate_args.archives, "Archive prefix (repeatable)")->required();
  validate_cmd->add_option("--out", validate_args.out_path, "Output file (default stdout)");
  validate_cmd->add_flag("--strict", validate_args.strict, "Exit 4 when there are findings");

  IdfArgs idf_args;
  auto* idf_cmd = app.add_subcommand("idf", "Build an idf table from a tokenized corpus");
  idf_cmd->add_option("--corpus", idf_args.corpus, "Corpus file, one tokenized caption per line")->required();
  idf_cmd->add_option("--out", idf_args.out_path, "Output idf file (default stdout)");
  idf_cmd->add_option("--eos-token", idf_args.eos_token, "End-of-sentence token string");
  idf_cmd->add_option("--unseen", idf_args.unseen, "Unseen-token policy")
      ->check(CLI::IsMember({"smoothed", "max_observed"}));
  idf_cmd->add_option("--eos-mean", idf_args.eos_mean, "Weights averaged into the EOS weight")
      ->check(CLI::IsMember({"exclude_eos", "include_eos"}));

  ScoreArgs score_args;
  auto* score_cmd = app.add_subcommand("score", "Score caption/video pairs");
  score_cmd->add_option("--archive", score_args.common.archives, "Archive prefix (repeatable)")->required();
  score_cmd->add_option("--pairs", score_args.pairs, "Pairs file")->required();
  score_cmd->add_option("--idf", score_args.common.idf_path, "Idf table");
  score_cmd->add_option("--refs", score_args.refs, "References file (video id -> reference caption ids)");
  score_cmd->add_option("--mode", score_args.mode)->check(CLI::IsMember({"emscore", "emscore_ref"}));
  score_cmd->add_option("--granularity", score_args.granularity)->check(CLI::IsMember({"coarse", "fine", "full"}));
  score_cmd->add_option("--weighting", score_args.weighting, "auto: idf when --idf is given")
      ->check(CLI::IsMember({"auto", "idf", "uniform"}));
  score_cmd->add_flag("--uniform-reference-recall", score_args.uniform_reference_recall,
                      "Do not idf-weight reference tokens on the recall side");
  score_cmd->add_option("--jobs", score_args.jobs, "Worker threads")->check(CLI::PositiveNumber);
  score_cmd->add_option("--out", score_args.common.out_path, "Output file (default stdout)");

  CorrelateArgs corr_args;
  auto* corr_cmd = app.add_subcommand("correlate", "Kendall tau-b and Spearman rho against human ratings");
  corr_cmd->add_option("--ratings", corr_args.ratings, "Ratings file")->required();
  corr_cmd->add_option("--scores", corr_args.scores, "Score file from 'score' (overrides ratings metric column)");
  corr_cmd->add_flag("--per-annotator", corr_args.per_annotator, "Correlate against individual ratings");
  corr_cmd->add_flag("--biased", corr_args.biased, "Also report the five quality-drift biased sets");
  corr_cmd->add_option("--seed", corr_args.seed, "Sampling seed for --biased");
  corr_cmd->add_option("--out", corr_args.out_path, "Output file (default stdout)");

  RankArgs rank_args;
  auto* rank_cmd = app.add_subcommand("rank-systems", "System-level ranking against human ranking");
  rank_cmd->add_option("--ratings", rank_args.ratings, "Ratings file")->required();
  rank_cmd->add_option("--scores", rank_args.scores, "Score file from 'score'");
  rank_cmd->add_option("--metric-range", rank_args.metric_range, "signed: [-1,1]; unit: [0,1]")
      ->check(CLI::IsMember({"signed", "unit"}));
  rank_cmd->add_option("--out", rank_args.out_path, "Output file (default stdout)");

  FoilArgs foil_args;
  auto* foil_cmd = app.add_subcommand("foil", "Pairwise correct-vs-foil paragraph accuracy");
  foil_cmd->add_option("--foil", foil_args.foil, "Foil pairs file")->required();
  foil_cmd->add_option("--scores", foil_args.scores, "Precomputed score file");
  foil_cmd->add_option("--archive", foil_args.common.archives, "Archive prefix, to score captions directly");
  foil_cmd->add_option("--idf", foil_args.common.idf_path, "Idf table");
  foil_cmd->add_option("--mode", foil_args.mode)->check(CLI::IsMember({"emscore", "emscore_ref"}));
  foil_cmd->add_option("--granularity", foil_args.granularity)->check(CLI::IsMember({"coarse", "fine", "full"}));
  foil_cmd->add_option("--weighting", foil_args.weighting)->check(CLI::IsMember({"auto", "idf", "uniform"}));
  foil_cmd->add_flag("--uniform-reference-recall", foil_args.uniform_reference_recall);
  foil_cmd->add_option("--out", foil_args.common.out_path, "Output file (default stdout)");

  TraceArgs trace_args;
  auto* trace_cmd = app.add_subcommand("trace", "Token-to-frame and frame-to-token argmax alignment");
  trace_cmd->add_option("--archive", trace_args.common.archives, "Archive prefix (repeatable)")->required();
  trace_cmd->add_option("--idf", trace_args.common.idf_path, "Idf table");
  trace_cmd->add_option("--pairs", trace_args.pairs, "Pairs file");
  trace_cmd->add_option("--caption", trace_args.caption, "Caption id");
  trace_cmd->add_option("--video", trace_args.video, "Video id");
  trace_cmd->add_option("--reference", trace_args.reference, "Reference caption id (text ground truth)");
  trace_cmd->add_option("--out", trace_args.common.out_path, "Output file (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*validate_cmd) return cmd_validate(validate_args, out, err);
    if (*idf_cmd) return cmd_idf(idf_args, out, err);
    if (*score_cmd) return cmd_score(score_args, out, err);
    if (*corr_cmd) return cmd_correlate(corr_args, out, err);
    if (*rank_cmd) return cmd_rank(rank_args, out, err);
    if (*foil_cmd) return cmd_foil(foil_args, out, err);
    if (*trace_cmd) return cmd_trace(trace_args, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_input_error(e.code()) ? kExitInput : kExitCompute;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitCompute;
  }
  return kExitUsage;
}

}  // namespace emscore::cli
