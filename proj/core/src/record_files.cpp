#include "emscore/record_files.hpp"

#include <set>

#include "emscore/error.hpp"
#include "emscore/text_util.hpp"
#include "json.hpp"

namespace emscore {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::string_view kRatingsKind = "ratings";
constexpr std::string_view kFoilKind = "foil";
constexpr std::string_view kPairsKind = "pairs";
constexpr std::string_view kRefsKind = "refs";
constexpr std::string_view kScoresFormat = "emscore-scores";
constexpr int kVersion = 1;

std::string magic(std::string_view kind) { return "#emscore-" + std::string(kind) + "\t" + std::to_string(kVersion); }

[[noreturn]] void fail(std::string_view kind, std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::kParseError,
              std::string(kind) + " file line " + std::to_string(line_no) + ": " + what);
}

struct Line {
  std::size_t number;
  std::vector<std::string_view> fields;
};

// Checks the magic line and returns the tab-split data lines. Blank lines and
// '#' comments are skipped.
std::vector<Line> data_lines(std::string_view text, std::string_view kind) {
  auto lines = text::split(text, '\n');
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  }
  if (lines.empty() || lines.front() != magic(kind)) fail(kind, 1, "expected header '" + magic(kind) + "'");
  std::vector<Line> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty() || lines[i].front() == '#') continue;
    out.push_back({i + 1, text::split(lines[i], '\t')});
  }
  return out;
}

std::vector<std::string> split_ids(std::string_view field) {
  std::vector<std::string> ids;
  if (field.empty() || field == "-") return ids;
  for (const auto id : text::split(field, ',')) {
    if (!id.empty()) ids.emplace_back(id);
  }
  return ids;
}

std::string join_ids(const std::vector<std::string>& ids) {
  if (ids.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += ids[i];
  }
  return out;
}

void check_field(std::string_view kind, const std::string& value) {
  if (value.empty() || value.find_first_of("\t\n\r,") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(kind) + " file: identifier '" + value + "' is empty or contains a tab, comma or newline");
  }
}

ordered_json fine_json(const FineScore& f) {
  return {{"precision", f.precision}, {"recall", f.recall}, {"f1", f.f1}};
}

double get_number(const json& obj, const char* key, std::size_t line_no) {
  if (!obj.contains(key) || !obj.at(key).is_number()) fail("scores", line_no, std::string("missing number '") + key + "'");
  return obj.at(key).get<double>();
}

std::string get_string(const json& obj, const char* key, std::size_t line_no) {
  if (!obj.contains(key) || !obj.at(key).is_string()) fail("scores", line_no, std::string("missing string '") + key + "'");
  return obj.at(key).get<std::string>();
}

}  // namespace

RatingsTable parse_ratings(std::string_view input) {
  RatingsTable table;
  for (const auto& line : data_lines(input, kRatingsKind)) {
    const auto& f = line.fields;
    if (f.size() != 4 && f.size() != 5) fail(kRatingsKind, line.number, "expected 4 or 5 tab-separated fields");
    RatingRecord r;
    r.caption_id = f[0];
    r.video_id = f[1];
    r.system_label = f[2];
    for (const auto s : text::split(f[3], ',')) {
      const auto v = text::parse_int(text::trim(s), "annotator score");
      if (v < 1 || v > 5) fail(kRatingsKind, line.number, "annotator score outside 1..5");
      r.annotator_scores.push_back(static_cast<int>(v));
    }
    if (f.size() == 5 && !f[4].empty()) r.metric_score = text::parse_double(f[4], "metric score");
    table.records.push_back(std::move(r));
  }
  return table;
}

std::string serialize_ratings(const RatingsTable& table) {
  std::string out = magic(kRatingsKind) + "\n";
  for (const auto& r : table.records) {
    out += r.caption_id + "\t" + r.video_id + "\t" + r.system_label + "\t";
    for (std::size_t i = 0; i < r.annotator_scores.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(r.annotator_scores[i]);
    }
    if (r.metric_score) out += "\t" + text::format_double(*r.metric_score);
    out += "\n";
  }
  return out;
}

RatingsTable read_ratings(const std::string& path) { return parse_ratings(text::read_file(path)); }

FoilPairSet parse_foil_pairs(std::string_view input) {
  FoilPairSet set;
  std::set<std::string> finished;
  for (const auto& line : data_lines(input, kFoilKind)) {
    const auto& f = line.fields;
    if (f.size() != 4 && f.size() != 5) fail(kFoilKind, line.number, "expected 4 or 5 tab-separated fields");
    const std::string pair_id(f[0]);
    if (set.pairs.empty() || set.pairs.back().pair_id != pair_id) {
      if (!set.pairs.empty()) finished.insert(set.pairs.back().pair_id);
      if (finished.contains(pair_id)) fail(kFoilKind, line.number, "segments of pair '" + pair_id + "' are not contiguous");
      set.pairs.push_back({pair_id, {}});
    }
    FoilSegment seg{std::string(f[1]), std::string(f[2]), std::string(f[3]), {}};
    if (f.size() == 5) seg.reference_caption_ids = split_ids(f[4]);
    set.pairs.back().segments.push_back(std::move(seg));
  }
  return set;
}

std::string serialize_foil_pairs(const FoilPairSet& pairs) {
  std::string out = magic(kFoilKind) + "\n";
  for (const auto& p : pairs.pairs) {
    check_field(kFoilKind, p.pair_id);
    for (const auto& s : p.segments) {
      out += p.pair_id + "\t" + s.video_id + "\t" + s.correct_caption_id + "\t" + s.foil_caption_id + "\t" +
             join_ids(s.reference_caption_ids) + "\n";
    }
  }
  return out;
}

FoilPairSet read_foil_pairs(const std::string& path) { return parse_foil_pairs(text::read_file(path)); }

std::vector<ScorePair> parse_score_pairs(std::string_view input) {
  std::vector<ScorePair> pairs;
  for (const auto& line : data_lines(input, kPairsKind)) {
    if (line.fields.size() != 2) fail(kPairsKind, line.number, "expected caption_id<TAB>video_id");
    pairs.push_back({std::string(line.fields[0]), std::string(line.fields[1])});
  }
  return pairs;
}

std::vector<ScorePair> read_score_pairs(const std::string& path) { return parse_score_pairs(text::read_file(path)); }

ReferenceMap parse_references(std::string_view input) {
  ReferenceMap refs;
  for (const auto& line : data_lines(input, kRefsKind)) {
    if (line.fields.size() != 2) fail(kRefsKind, line.number, "expected video_id<TAB>ref_id[,ref_id...]");
    auto& ids = refs[std::string(line.fields[0])];
    for (auto& id : split_ids(line.fields[1])) ids.push_back(std::move(id));
  }
  return refs;
}

ReferenceMap read_references(const std::string& path) { return parse_references(text::read_file(path)); }

std::string serialize_scores(const ScoreRun& run) {
  ordered_json header = {{"format", kScoresFormat},
                         {"version", kVersion},
                         {"mode", to_string(run.mode)},
                         {"granularity", to_string(run.granularity)},
                         {"idf", run.idf}};
  std::string out = header.dump() + "\n";
  for (const auto& r : run.reports) {
    ordered_json rec = {{"caption_id", r.caption_id},
                        {"ground_id", r.ground_id},
                        {"score", selected_score(r, run.mode, run.granularity)},
                        {"coarse", r.coarse},
                        {"fine", fine_json(r.fine)},
                        {"combined", r.combined}};
    if (r.with_references) {
      auto refs = ordered_json::array();
      for (const auto& p : r.per_reference) {
        refs.push_back({{"reference_id", p.ground_id},
                        {"coarse", p.coarse},
                        {"fine", fine_json(p.fine)},
                        {"combined", p.combined}});
      }
      rec["references"] = std::move(refs);
      rec["ref_coarse"] = r.with_references->coarse;
      rec["ref_fine"] = r.with_references->fine;
      rec["emscore_ref"] = r.with_references->combined;
      rec["best_reference_id"] = r.with_references->best_reference_id;
    }
    out += rec.dump() + "\n";
  }
  return out;
}

ScoreRun parse_scores(std::string_view input) {
  auto lines = text::split(input, '\n');
  while (!lines.empty() && text::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) fail("scores", 1, "missing header");

  const auto parse_line = [](std::string_view line, std::size_t line_no) {
    try {
      auto j = json::parse(line);
      if (!j.is_object()) fail("scores", line_no, "record must be a JSON object");
      return j;
    } catch (const json::parse_error& e) {
      fail("scores", line_no, e.what());
    }
  };
  const auto fine_from = [](const json& obj, std::size_t line_no) {
    if (!obj.contains("fine") || !obj.at("fine").is_object()) fail("scores", line_no, "missing 'fine' object");
    const auto& f = obj.at("fine");
    return FineScore{get_number(f, "precision", line_no), get_number(f, "recall", line_no), get_number(f, "f1", line_no)};
  };

  const auto header = parse_line(lines.front(), 1);
  if (get_string(header, "format", 1) != kScoresFormat || !header.contains("version") ||
      header.at("version") != kVersion) {
    fail("scores", 1, "not an emscore-scores v1 file");
  }
  ScoreRun run;
  try {
    run.mode = parse_mode(get_string(header, "mode", 1));
    run.granularity = parse_granularity(get_string(header, "granularity", 1));
  } catch (const Error& e) {
    fail("scores", 1, e.what());
  }
  if (!header.contains("idf") || !header.at("idf").is_boolean()) fail("scores", 1, "missing boolean 'idf'");
  run.idf = header.at("idf").get<bool>();

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line_no = i + 1;
    if (text::trim(lines[i]).empty()) continue;
    const auto rec = parse_line(lines[i], line_no);
    ScoreReport r;
    r.caption_id = get_string(rec, "caption_id", line_no);
    r.ground_id = get_string(rec, "ground_id", line_no);
    r.coarse = get_number(rec, "coarse", line_no);
    r.fine = fine_from(rec, line_no);
    r.combined = get_number(rec, "combined", line_no);
    if (rec.contains("references")) {
      for (const auto& p : rec.at("references")) {
        r.per_reference.push_back({get_string(p, "reference_id", line_no), get_number(p, "coarse", line_no),
                                   fine_from(p, line_no), get_number(p, "combined", line_no)});
      }
      r.with_references = ReferenceSummary{get_number(rec, "ref_coarse", line_no), get_number(rec, "ref_fine", line_no),
                                           get_number(rec, "emscore_ref", line_no),
                                           get_string(rec, "best_reference_id", line_no)};
    }
    run.reports.push_back(std::move(r));
  }
  return run;
}

ScoreRun read_scores(const std::string& path) { return parse_scores(text::read_file(path)); }

std::map<std::string, double> selected_scores(const ScoreRun& run) {
  std::map<std::string, double> out;
  for (const auto& r : run.reports) {
    if (!out.emplace(r.caption_id, selected_score(r, run.mode, run.granularity)).second) {
      throw Error(ErrorCode::kDuplicateId, "caption '" + r.caption_id + "' scored more than once");
    }
  }
  return out;
}

}  // namespace emscore
