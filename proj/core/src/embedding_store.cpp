#include "emscore/embedding_store.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <utility>

#include "emscore/error.hpp"
#include "emscore/text_util.hpp"
#include "json.hpp"

namespace emscore {

namespace {

using nlohmann::json;

constexpr std::string_view kFormatName = "emsa";
constexpr int kFormatVersion = 1;

void append_le(std::string& out, float value) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  out.push_back(static_cast<char>(bits & 0xFFu));
  out.push_back(static_cast<char>((bits >> 8) & 0xFFu));
  out.push_back(static_cast<char>((bits >> 16) & 0xFFu));
  out.push_back(static_cast<char>((bits >> 24) & 0xFFu));
}

float read_le(const char* p) {
  const auto b = [p](int i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])); };
  const std::uint32_t bits = b(0) | (b(1) << 8) | (b(2) << 16) | (b(3) << 24);
  return std::bit_cast<float>(bits);
}

double row_norm(std::span<const float> row) {
  double sq = 0.0;
  for (const float v : row) sq += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(sq);
}

[[noreturn]] void corrupt(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::kCorruptManifest, "manifest line " + std::to_string(line_no) + ": " + what);
}

std::uint64_t require_count(const json& obj, const char* key, std::size_t line_no) {
  if (!obj.contains(key)) corrupt(line_no, std::string("missing field '") + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned()) corrupt(line_no, std::string("field '") + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string require_string(const json& obj, const char* key, std::size_t line_no) {
  if (!obj.contains(key) || !obj.at(key).is_string()) {
    corrupt(line_no, std::string("missing or non-string field '") + key + "'");
  }
  return obj.at(key).get<std::string>();
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim)
    : rows_(rows), dim_(dim), data_(rows * dim, 0.0f) {}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data)
    : rows_(rows), dim_(dim), data_(std::move(data)) {
  if (data_.size() != rows_ * dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "matrix data has " + std::to_string(data_.size()) + " values, expected " +
                    std::to_string(rows_) + "x" + std::to_string(dim_));
  }
}

EmbeddingMatrix EmbeddingMatrix::from_rows(const std::vector<std::vector<float>>& rows) {
  if (rows.empty()) return EmbeddingMatrix(0, 0);
  const auto dim = rows.front().size();
  std::vector<float> data;
  data.reserve(rows.size() * dim);
  for (const auto& r : rows) {
    if (r.size() != dim) throw Error(ErrorCode::kDimensionMismatch, "ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return EmbeddingMatrix(rows.size(), dim, std::move(data));
}

std::span<const float> EmbeddingMatrix::row(std::size_t i) const {
  return std::span<const float>(data_).subspan(i * dim_, dim_);
}

std::span<float> EmbeddingMatrix::row(std::size_t i) {
  return std::span<float>(data_).subspan(i * dim_, dim_);
}

const std::string& record_id(const Record& record) {
  return std::visit([](const auto& r) -> const std::string& { return r.id; }, record);
}

RecordKind record_kind(const Record& record) {
  return std::holds_alternative<VideoRecord>(record) ? RecordKind::kVideo : RecordKind::kCaption;
}

const EmbeddingMatrix& record_matrix(const Record& record) {
  if (const auto* v = std::get_if<VideoRecord>(&record)) return v->frames;
  return std::get<CaptionRecord>(record).embeddings;
}

void Archive::add(Record record) {
  auto& index = record_kind(record) == RecordKind::kVideo ? videos_ : captions_;
  const auto& id = record_id(record);
  if (index.contains(id)) {
    throw Error(ErrorCode::kDuplicateId,
                std::string(record_kind(record) == RecordKind::kVideo ? "video" : "caption") +
                    " id '" + id + "' appears more than once");
  }
  index.emplace(id, records_.size());
  records_.push_back(std::move(record));
}

const VideoRecord* Archive::find_video(const std::string& id) const {
  const auto it = videos_.find(id);
  return it == videos_.end() ? nullptr : &std::get<VideoRecord>(records_[it->second]);
}

const CaptionRecord* Archive::find_caption(const std::string& id) const {
  const auto it = captions_.find(id);
  return it == captions_.end() ? nullptr : &std::get<CaptionRecord>(records_[it->second]);
}

const VideoRecord& Archive::video(const std::string& id) const {
  if (const auto* v = find_video(id)) return *v;
  throw Error(ErrorCode::kUnresolvedId, "unknown video id '" + id + "'");
}

const CaptionRecord& Archive::caption(const std::string& id) const {
  if (const auto* c = find_caption(id)) return *c;
  throw Error(ErrorCode::kUnresolvedId, "unknown caption id '" + id + "'");
}

void Archive::merge(const Archive& other) {
  if (other.dim() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "cannot merge archives of dim " + std::to_string(dim_) +
                                                   " and " + std::to_string(other.dim()));
  }
  for (const auto& r : other.records()) add(r);
}

ArchivePaths ArchivePaths::from_prefix(const std::string& prefix) {
  return {prefix + ".manifest", prefix + ".payload"};
}

std::string_view to_string(FindingKind kind) {
  switch (kind) {
    case FindingKind::kDimInconsistency: return "dim-inconsistency";
    case FindingKind::kNormViolation: return "norm-violation";
    case FindingKind::kCountMismatch: return "count-mismatch";
    case FindingKind::kTooFewRows: return "too-few-rows";
    case FindingKind::kFrameIndexOrder: return "frame-index-order";
  }
  return "unknown";
}

std::size_t ValidationReport::count(FindingKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(findings.begin(), findings.end(), [kind](const Finding& f) { return f.kind == kind; }));
}

EncodedArchive encode_archive(std::span<const Record> records, std::size_t dim) {
  std::set<std::pair<RecordKind, std::string>> seen;
  EncodedArchive out;

  json header = {{"format", kFormatName}, {"version", kFormatVersion}, {"dim", dim}};
  out.manifest = header.dump() + "\n";

  std::uint64_t offset = 0;
  for (const auto& record : records) {
    const auto& id = record_id(record);
    const auto kind = record_kind(record);
    if (!seen.emplace(kind, id).second) {
      throw Error(ErrorCode::kDuplicateId, "id '" + id + "' appears more than once");
    }
    const auto& m = record_matrix(record);
    if (m.dim() != dim && m.rows() > 0) {
      throw Error(ErrorCode::kDimensionMismatch, "record '" + id + "' has dim " + std::to_string(m.dim()) +
                                                     ", archive dim is " + std::to_string(dim));
    }

    json desc = {{"id", id}, {"rows", m.rows()}, {"byte_offset", offset}};
    if (const auto* v = std::get_if<VideoRecord>(&record)) {
      desc["kind"] = "video";
      if (!v->frame_indices.empty()) desc["frame_indices"] = v->frame_indices;
    } else {
      desc["kind"] = "caption";
      desc["tokens"] = std::get<CaptionRecord>(record).tokens;
    }
    out.manifest += desc.dump() + "\n";

    for (const float value : m.data()) append_le(out.payload, value);
    offset += static_cast<std::uint64_t>(m.rows()) * dim * sizeof(float);
  }
  return out;
}

EncodedArchive encode_archive(const Archive& archive) {
  return encode_archive(archive.records(), archive.dim());
}

void write_archive(std::span<const Record> records, std::size_t dim, const ArchivePaths& paths) {
  const auto encoded = encode_archive(records, dim);
  text::write_file(paths.manifest, encoded.manifest);
  text::write_file(paths.payload, encoded.payload);
}

void write_archive(const Archive& archive, const ArchivePaths& paths) {
  write_archive(archive.records(), archive.dim(), paths);
}

LoadedArchive decode_archive(std::string_view manifest, std::string_view payload) {
  std::vector<std::string_view> lines = text::split(manifest, '\n');
  while (!lines.empty() && text::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) corrupt(1, "missing header record");

  json header;
  try {
    header = json::parse(lines.front());
  } catch (const json::parse_error& e) {
    corrupt(1, std::string("header is not valid JSON: ") + e.what());
  }
  if (!header.is_object() || header.value("format", "") != kFormatName) corrupt(1, "not an emsa manifest");
  if (!header.contains("version") || header.at("version") != kFormatVersion) {
    corrupt(1, "unsupported format version");
  }
  const auto dim = require_count(header, "dim", 1);
  if (dim == 0 || dim > (1u << 20)) corrupt(1, "dim out of range");

  LoadedArchive loaded{Archive(dim), {}};
  std::vector<std::pair<std::uint64_t, std::uint64_t>> extents;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line_no = i + 1;
    json desc;
    try {
      desc = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      corrupt(line_no, std::string("not valid JSON: ") + e.what());
    }
    if (!desc.is_object()) corrupt(line_no, "descriptor must be an object");

    auto id = require_string(desc, "id", line_no);
    const auto kind = require_string(desc, "kind", line_no);
    const auto rows = require_count(desc, "rows", line_no);
    const auto offset = require_count(desc, "byte_offset", line_no);

    const std::uint64_t row_bytes = dim * sizeof(float);
    const auto extent = rows * row_bytes;
    if (offset > payload.size() || rows > payload.size() / row_bytes || extent > payload.size() - offset) {
      throw Error(ErrorCode::kOffsetOutOfBounds,
                  "record '" + id + "' spans bytes [" + std::to_string(offset) + ", " +
                      std::to_string(offset + extent) + ") but payload has " + std::to_string(payload.size()));
    }
    if (extent > 0) extents.emplace_back(offset, offset + extent);

    std::vector<float> data(rows * dim);
    const char* base = payload.data() + offset;
    for (std::size_t k = 0; k < data.size(); ++k) data[k] = read_le(base + 4 * k);
    EmbeddingMatrix matrix(rows, dim, std::move(data));

    Record record;
    if (kind == "video") {
      VideoRecord v{std::move(id), std::move(matrix), {}};
      if (desc.contains("frame_indices")) {
        const auto& fi = desc.at("frame_indices");
        if (!fi.is_array()) corrupt(line_no, "frame_indices must be an array");
        for (const auto& x : fi) {
          if (!x.is_number_integer()) corrupt(line_no, "frame_indices must hold integers");
          v.frame_indices.push_back(x.get<std::int64_t>());
        }
      }
      record = std::move(v);
    } else if (kind == "caption") {
      CaptionRecord c{std::move(id), {}, std::move(matrix)};
      if (!desc.contains("tokens") || !desc.at("tokens").is_array()) corrupt(line_no, "caption needs a tokens array");
      for (const auto& t : desc.at("tokens")) {
        if (!t.is_string()) corrupt(line_no, "tokens must be strings");
        c.tokens.push_back(t.get<std::string>());
      }
      record = std::move(c);
    } else {
      corrupt(line_no, "unknown kind '" + kind + "'");
    }

    auto violations = norm_violations(record);
    loaded.norm_violations.insert(loaded.norm_violations.end(), std::make_move_iterator(violations.begin()),
                                  std::make_move_iterator(violations.end()));
    loaded.archive.add(std::move(record));
  }

  std::sort(extents.begin(), extents.end());
  for (std::size_t i = 1; i < extents.size(); ++i) {
    if (extents[i].first < extents[i - 1].second) {
      throw Error(ErrorCode::kCorruptManifest,
                  "overlapping payload extents at byte " + std::to_string(extents[i].first));
    }
  }
  return loaded;
}

LoadedArchive read_archive(const ArchivePaths& paths) {
  const auto manifest = text::read_file(paths.manifest);
  const auto payload = text::read_file(paths.payload);
  return decode_archive(manifest, payload);
}

std::vector<Finding> norm_violations(const Record& record, double tolerance) {
  std::vector<Finding> out;
  const auto& m = record_matrix(record);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double norm = row_norm(m.row(r));
    if (!(std::abs(norm - 1.0) <= tolerance)) {
      out.push_back({FindingKind::kNormViolation, record_id(record), r,
                     "row norm " + text::format_double(norm)});
    }
  }
  return out;
}

ValidationReport validate(const Archive& archive) {
  ValidationReport report;
  auto& f = report.findings;
  for (const auto& record : archive.records()) {
    const auto& id = record_id(record);
    const auto& m = record_matrix(record);
    if (m.dim() != archive.dim()) {
      f.push_back({FindingKind::kDimInconsistency, id, std::nullopt,
                   "dim " + std::to_string(m.dim()) + " != archive dim " + std::to_string(archive.dim())});
    }
    if (const auto* v = std::get_if<VideoRecord>(&record)) {
      if (m.rows() < 1) f.push_back({FindingKind::kTooFewRows, id, std::nullopt, "video has no frames"});
      if (!v->frame_indices.empty()) {
        if (v->frame_indices.size() != m.rows()) {
          f.push_back({FindingKind::kCountMismatch, id, std::nullopt,
                       std::to_string(v->frame_indices.size()) + " frame indices for " +
                           std::to_string(m.rows()) + " rows"});
        }
        for (std::size_t i = 1; i < v->frame_indices.size(); ++i) {
          if (v->frame_indices[i] <= v->frame_indices[i - 1]) {
            f.push_back({FindingKind::kFrameIndexOrder, id, i, "frame indices not strictly increasing"});
            break;
          }
        }
      }
    } else {
      const auto& c = std::get<CaptionRecord>(record);
      if (c.tokens.size() != m.rows()) {
        f.push_back({FindingKind::kCountMismatch, id, std::nullopt,
                     std::to_string(c.tokens.size()) + " tokens for " + std::to_string(m.rows()) + " rows"});
      }
      if (m.rows() < 2) f.push_back({FindingKind::kTooFewRows, id, std::nullopt, "caption needs SOS and EOS rows"});
    }
    auto violations = norm_violations(record);
    f.insert(f.end(), std::make_move_iterator(violations.begin()), std::make_move_iterator(violations.end()));
  }
  return report;
}

}  // namespace emscore
