#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace emscore {

/// How tokens outside the idf corpus are weighted.
enum class UnseenPolicy {
  /// -log(1 / (N + 1)): the token is treated as if it occurred in one extra document.
  kSmoothed,
  /// Largest weight stored in the table.
  kMaxObserved,
};

std::string_view to_string(UnseenPolicy policy);
UnseenPolicy parse_unseen_policy(std::string_view name);

/// Which weights are averaged to produce the EOS weight.
enum class EosMean {
  /// Mean over every token type except EOS.
  kExcludeEos,
  /// Mean over every token type, with EOS counted at its raw weight (0 when
  /// EOS occurs in every document).
  kIncludeEos,
};

std::string_view to_string(EosMean mode);
EosMean parse_eos_mean(std::string_view name);

struct IdfOptions {
  std::string eos_token = "<|endoftext|>";
  UnseenPolicy unseen_policy = UnseenPolicy::kSmoothed;
  EosMean eos_mean = EosMean::kExcludeEos;
};

using WeightMap = std::map<std::string, double, std::less<>>;

class IdfTable {
 public:
  IdfTable() = default;
  IdfTable(WeightMap weights, std::size_t corpus_size, IdfOptions options);

  /// Stored weight for seen tokens; the unseen policy otherwise.
  double lookup(std::string_view token) const;
  double eos_weight() const { return lookup(options_.eos_token); }
  bool contains(std::string_view token) const;

  const WeightMap& weights() const noexcept { return weights_; }
  std::size_t corpus_size() const noexcept { return corpus_size_; }
  const std::string& eos_token() const noexcept { return options_.eos_token; }
  UnseenPolicy unseen_policy() const noexcept { return options_.unseen_policy; }
  EosMean eos_mean() const noexcept { return options_.eos_mean; }
  double unseen_weight() const noexcept { return unseen_weight_; }

  friend bool operator==(const IdfTable& a, const IdfTable& b);

 private:
  WeightMap weights_;
  std::size_t corpus_size_ = 0;
  IdfOptions options_;
  double unseen_weight_ = 0.0;
};

using Document = std::vector<std::string>;

/// Document-frequency idf, -log(df / N), with the EOS weight replaced by the
/// mean weight selected by options.eos_mean. Throws kEmptyCorpus when the
/// corpus or any document is empty.
IdfTable build_idf(const std::vector<Document>& corpus, const IdfOptions& options = {});

/// Text form: a header block, then one "token<TAB>weight" line per token,
/// sorted by token.
std::string serialize_idf(const IdfTable& table);
IdfTable parse_idf(std::string_view text);

void save_idf(const IdfTable& table, const std::string& path);
IdfTable load_idf(const std::string& path);

/// One document per line, tokens separated by spaces or tabs. Blank lines are
/// skipped.
std::vector<Document> read_corpus(const std::string& path);
std::vector<Document> parse_corpus(std::string_view text);

}  // namespace emscore
