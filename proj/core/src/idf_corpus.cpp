#include "emscore/idf_corpus.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "emscore/error.hpp"
#include "emscore/text_util.hpp"

namespace emscore {

namespace {

constexpr std::string_view kMagic = "#emscore-idf\t1";
constexpr std::string_view kWeightsMarker = "#weights";

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::kParseError, "idf file: " + what); }

}  // namespace

std::string_view to_string(UnseenPolicy policy) {
  return policy == UnseenPolicy::kSmoothed ? "smoothed" : "max_observed";
}

UnseenPolicy parse_unseen_policy(std::string_view name) {
  if (name == "smoothed") return UnseenPolicy::kSmoothed;
  if (name == "max_observed") return UnseenPolicy::kMaxObserved;
  throw Error(ErrorCode::kParseError, "unknown unseen policy '" + std::string(name) + "'");
}

std::string_view to_string(EosMean mode) { return mode == EosMean::kExcludeEos ? "exclude_eos" : "include_eos"; }

EosMean parse_eos_mean(std::string_view name) {
  if (name == "exclude_eos") return EosMean::kExcludeEos;
  if (name == "include_eos") return EosMean::kIncludeEos;
  throw Error(ErrorCode::kParseError, "unknown eos mean mode '" + std::string(name) + "'");
}

IdfTable::IdfTable(WeightMap weights, std::size_t corpus_size, IdfOptions options)
    : weights_(std::move(weights)), corpus_size_(corpus_size), options_(std::move(options)) {
  if (options_.unseen_policy == UnseenPolicy::kSmoothed) {
    unseen_weight_ = -std::log(1.0 / static_cast<double>(corpus_size_ + 1));
  } else {
    for (const auto& [token, w] : weights_) unseen_weight_ = std::max(unseen_weight_, w);
  }
}

double IdfTable::lookup(std::string_view token) const {
  const auto it = weights_.find(token);
  return it == weights_.end() ? unseen_weight_ : it->second;
}

bool IdfTable::contains(std::string_view token) const { return weights_.find(token) != weights_.end(); }

bool operator==(const IdfTable& a, const IdfTable& b) {
  return a.weights_ == b.weights_ && a.corpus_size_ == b.corpus_size_ && a.options_.eos_token == b.options_.eos_token &&
         a.options_.unseen_policy == b.options_.unseen_policy && a.options_.eos_mean == b.options_.eos_mean;
}

IdfTable build_idf(const std::vector<Document>& corpus, const IdfOptions& options) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "idf corpus has no documents");

  std::map<std::string, std::size_t, std::less<>> doc_freq;
  std::set<std::string_view> present;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    if (corpus[d].empty()) throw Error(ErrorCode::kEmptyCorpus, "document " + std::to_string(d) + " is empty");
    present.clear();
    for (const auto& token : corpus[d]) present.insert(token);
    for (const auto token : present) ++doc_freq[std::string(token)];
  }

  const auto n = static_cast<double>(corpus.size());
  WeightMap weights;
  // Adding 0.0 turns -log(1) = -0.0 into +0.0.
  for (const auto& [token, df] : doc_freq) weights.emplace(token, -std::log(static_cast<double>(df) / n) + 0.0);

  // Ascending-token order keeps the mean independent of corpus order.
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& [token, w] : weights) {
    if (token == options.eos_token && options.eos_mean == EosMean::kExcludeEos) continue;
    sum += w;
    ++count;
  }
  weights[options.eos_token] = count == 0 ? 0.0 : sum / static_cast<double>(count);

  return IdfTable(std::move(weights), corpus.size(), options);
}

std::string serialize_idf(const IdfTable& table) {
  std::string out;
  out += kMagic;
  out += "\ncorpus_size\t" + std::to_string(table.corpus_size());
  out += "\neos_token\t" + table.eos_token();
  out += "\nunseen_policy\t" + std::string(to_string(table.unseen_policy()));
  out += "\neos_mean\t" + std::string(to_string(table.eos_mean()));
  out += "\n";
  out += kWeightsMarker;
  out += "\n";
  for (const auto& [token, w] : table.weights()) {
    if (token.find_first_of("\t\n\r") != std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "token contains a tab or newline and cannot be serialized");
    }
    out += token + "\t" + text::format_double(w) + "\n";
  }
  return out;
}

IdfTable parse_idf(std::string_view input) {
  auto lines = text::split(input, '\n');
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  }
  if (lines.empty() || lines.front() != kMagic) parse_fail("missing '#emscore-idf' header");

  std::map<std::string, std::string, std::less<>> header;
  std::size_t i = 1;
  for (; i < lines.size() && lines[i] != kWeightsMarker; ++i) {
    if (lines[i].empty()) continue;
    const auto fields = text::split(lines[i], '\t');
    if (fields.size() != 2) parse_fail("malformed header line '" + std::string(lines[i]) + "'");
    header[std::string(fields[0])] = std::string(fields[1]);
  }
  if (i == lines.size()) parse_fail("missing '#weights' marker");

  const auto get = [&](std::string_view key) -> const std::string& {
    const auto it = header.find(key);
    if (it == header.end()) parse_fail("missing header field '" + std::string(key) + "'");
    return it->second;
  };

  IdfOptions options;
  const auto n = text::parse_int(get("corpus_size"), "corpus_size");
  if (n < 1) parse_fail("corpus_size must be positive");
  options.eos_token = get("eos_token");
  options.unseen_policy = parse_unseen_policy(get("unseen_policy"));
  if (header.contains("eos_mean")) options.eos_mean = parse_eos_mean(header.at("eos_mean"));

  WeightMap weights;
  for (++i; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto tab = lines[i].rfind('\t');
    if (tab == std::string_view::npos) parse_fail("weight line without tab: '" + std::string(lines[i]) + "'");
    const auto token = lines[i].substr(0, tab);
    const double w = text::parse_double(lines[i].substr(tab + 1), "idf weight");
    if (!(w >= 0.0) || !std::isfinite(w)) parse_fail("weight for '" + std::string(token) + "' is not a finite non-negative number");
    if (!weights.emplace(std::string(token), w).second) parse_fail("duplicate token '" + std::string(token) + "'");
  }
  return IdfTable(std::move(weights), static_cast<std::size_t>(n), std::move(options));
}

void save_idf(const IdfTable& table, const std::string& path) { text::write_file(path, serialize_idf(table)); }

IdfTable load_idf(const std::string& path) { return parse_idf(text::read_file(path)); }

std::vector<Document> parse_corpus(std::string_view input) {
  std::vector<Document> corpus;
  for (auto line : text::split(input, '\n')) {
    const auto fields = text::split_whitespace(text::trim(line));
    if (fields.empty()) continue;
    corpus.emplace_back(fields.begin(), fields.end());
  }
  return corpus;
}

std::vector<Document> read_corpus(const std::string& path) { return parse_corpus(text::read_file(path)); }

}  // namespace emscore
