#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace emscore {

inline constexpr std::size_t kDefaultDim = 512;
inline constexpr double kNormTolerance = 1e-3;
inline constexpr std::string_view kDefaultSosToken = "<|startoftext|>";
inline constexpr std::string_view kDefaultEosToken = "<|endoftext|>";

/// Row-major n x d block of float32 embeddings. Rows are expected to be unit
/// norm; that is checked by validate(), not enforced here.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim);
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data);

  /// Builds a matrix from nested rows; all rows must share one length.
  static EmbeddingMatrix from_rows(const std::vector<std::vector<float>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const float> row(std::size_t i) const;
  std::span<float> row(std::size_t i);

  std::span<const float> data() const noexcept { return data_; }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

struct VideoRecord {
  std::string id;
  EmbeddingMatrix frames;
  /// Source frame numbers, one per row, strictly increasing. May be empty.
  std::vector<std::int64_t> frame_indices;

  friend bool operator==(const VideoRecord&, const VideoRecord&) = default;
};

/// Token strings run SOS ... EOS; the last embedding row is the sentence-level
/// global embedding.
struct CaptionRecord {
  std::string id;
  std::vector<std::string> tokens;
  EmbeddingMatrix embeddings;

  std::span<const float> global() const { return embeddings.row(embeddings.rows() - 1); }

  friend bool operator==(const CaptionRecord&, const CaptionRecord&) = default;
};

using Record = std::variant<VideoRecord, CaptionRecord>;

enum class RecordKind { kVideo, kCaption };

const std::string& record_id(const Record& record);
RecordKind record_kind(const Record& record);
const EmbeddingMatrix& record_matrix(const Record& record);

/// An ordered set of records sharing one embedding dimension. Order defines the
/// payload layout on disk.
class Archive {
 public:
  explicit Archive(std::size_t dim = kDefaultDim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<Record>& records() const noexcept { return records_; }

  /// Appends a record. Throws kDuplicateId if the id is taken for that kind.
  void add(Record record);

  const VideoRecord* find_video(const std::string& id) const;
  const CaptionRecord* find_caption(const std::string& id) const;

  const VideoRecord& video(const std::string& id) const;
  const CaptionRecord& caption(const std::string& id) const;

  std::size_t video_count() const noexcept { return videos_.size(); }
  std::size_t caption_count() const noexcept { return captions_.size(); }

  /// Appends all records of another archive. Dimensions must agree.
  void merge(const Archive& other);

 private:
  std::size_t dim_;
  std::vector<Record> records_;
  std::map<std::string, std::size_t> videos_;
  std::map<std::string, std::size_t> captions_;
};

struct ArchivePaths {
  std::string manifest;
  std::string payload;

  /// "<prefix>.manifest" and "<prefix>.payload".
  static ArchivePaths from_prefix(const std::string& prefix);
};

enum class FindingKind {
  kDimInconsistency,
  kNormViolation,
  kCountMismatch,
  kTooFewRows,
  kFrameIndexOrder,
};

std::string_view to_string(FindingKind kind);

struct Finding {
  FindingKind kind;
  std::string record_id;
  std::optional<std::size_t> row;
  std::string detail;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const noexcept { return findings.empty(); }
  std::size_t count(FindingKind kind) const;
};

/// Serialized manifest text and payload bytes for an archive. Identical input
/// gives identical bytes.
struct EncodedArchive {
  std::string manifest;
  std::string payload;
};

/// Throws kDimensionMismatch if a matrix disagrees with the archive dim, and
/// kDuplicateId for repeated ids within a kind.
EncodedArchive encode_archive(const Archive& archive);
EncodedArchive encode_archive(std::span<const Record> records, std::size_t dim);

void write_archive(const Archive& archive, const ArchivePaths& paths);
void write_archive(std::span<const Record> records, std::size_t dim, const ArchivePaths& paths);

struct LoadedArchive {
  Archive archive;
  /// Rows whose L2 norm is more than kNormTolerance away from 1.
  std::vector<Finding> norm_violations;
};

/// Throws kCorruptManifest for malformed manifests or overlapping extents, and
/// kOffsetOutOfBounds for extents that run past the end of the payload.
LoadedArchive decode_archive(std::string_view manifest, std::string_view payload);
LoadedArchive read_archive(const ArchivePaths& paths);

/// Checks dimension consistency, unit norms, token/row counts, minimum row
/// counts and frame index ordering. Never throws, never mutates.
ValidationReport validate(const Archive& archive);

std::vector<Finding> norm_violations(const Record& record, double tolerance = kNormTolerance);

}  // namespace emscore
