#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "glyphforge/raster.hpp"

namespace glyphforge {

struct LabelRecord {
  std::uint64_t id = 0;  // 1-based position in the store
  std::string page_id;
  BoundingBox box;
  char letter = 0;
  std::string hash;
  std::string ts;
  std::string who;

  friend bool operator==(const LabelRecord&, const LabelRecord&) = default;
};

/// One record per line: {"v":1,"page","box":[4 ints],"letter","hash","ts","who"}.
std::string record_json(const LabelRecord& rec);
LabelRecord parse_record(const std::string& line, std::uint64_t id);

/// Append-only label file. Every append is written and fsynced before it
/// returns. Opening replays the file; a torn final line left by a crash is
/// cut off, while a malformed line elsewhere is a FormatError.
class LabelStore {
 public:
  using Clock = std::function<std::string()>;

  explicit LabelStore(std::filesystem::path file, Clock clock = {});
  ~LabelStore();
  LabelStore(const LabelStore&) = delete;
  LabelStore& operator=(const LabelStore&) = delete;

  /// Fills id and, when empty, ts. Throws InvalidLetter, StorageError.
  LabelRecord append(LabelRecord rec);

  std::vector<LabelRecord> records() const;
  /// The latest record for each (page, box), ordered by id.
  std::vector<LabelRecord> active() const;
  std::size_t size() const;
  const std::filesystem::path& path() const noexcept { return file_; }

 private:
  std::filesystem::path file_;
  Clock clock_;
  int fd_ = -1;
  mutable std::mutex mu_;
  std::vector<LabelRecord> records_;
};

/// UTC, second resolution, e.g. 2026-01-02T03:04:05Z.
std::string utc_timestamp();

}  // namespace glyphforge
