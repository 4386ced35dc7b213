#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "glyphforge/detect.hpp"
#include "glyphforge/label_store.hpp"
#include "glyphforge/layout.hpp"
#include "glyphforge/ocr.hpp"
#include "glyphforge/raster.hpp"
#include "glyphforge/segmenter.hpp"

namespace glyphforge {

struct PageLoadConfig {
  std::uint8_t threshold = kDefaultThreshold;
  bool ink_is_light = false;  // scans are dark ink on light paper by default
};

BinaryRaster load_page(const std::filesystem::path& path, const PageLoadConfig& cfg);

/// Page images (png/jpg/jpeg) directly inside one directory; the id of a
/// page is its file stem. Binarized pages are cached.
class PageLibrary {
 public:
  PageLibrary(std::filesystem::path dir, PageLoadConfig cfg = {});

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  bool contains(const std::string& id) const { return files_.count(id) != 0; }
  const std::filesystem::path& file(const std::string& id) const;  // throws UnknownPage
  const BinaryRaster& page(const std::string& id);                  // throws UnknownPage
  PageSource source();

 private:
  std::filesystem::path dir_;
  PageLoadConfig cfg_;
  std::vector<std::string> ids_;
  std::map<std::string, std::filesystem::path> files_;
  std::mutex mu_;
  std::map<std::string, BinaryRaster> cache_;
};

std::vector<LabeledBox> labeled_boxes(const std::vector<LabelRecord>& active);

struct ExportEntry {
  std::string file;  // relative to the export directory
  char letter = 0;
  std::string page_id;
  BoundingBox box;
  std::string hash;
};

/// Writes <letter>/<page>_<x0>_<y0>_<x1>_<y1>.png glyph images (ink 255 on 0)
/// for every active record plus manifest.json. Letter directories and the
/// manifest from a previous export are replaced. Throws EmptyStore.
std::vector<ExportEntry> export_dataset(const LabelStore& store, PageLibrary& pages, const std::filesystem::path& out_dir,
                                        const SegmenterConfig& seg);
std::string manifest_json(const std::vector<ExportEntry>& entries);

/// Reads an export back; glyph hashes are verified. Throws EmptyStore,
/// UnknownLabel, HashMismatch.
CharDataset load_exported_dataset(const std::filesystem::path& dir, const CharDatasetConfig& cfg);

struct BoxEntry {
  std::uint64_t id = 0;
  std::uint64_t version = 1;
  BoundingBox box;

  friend bool operator==(const BoxEntry&, const BoxEntry&) = default;
};

struct GlyphPreview {
  BoxEntry entry;
  Glyph glyph;
  std::string hash;
};

/// Labeling session over a page library and a label store. Box proposals
/// come from the segmenter; edits bump a per-box version so stale edits are
/// rejected with StaleVersion. Safe to call from several threads.
class LabelSession {
 public:
  LabelSession(PageLibrary& pages, LabelStore& store, SegmenterConfig seg, std::filesystem::path export_dir);

  std::vector<BoxEntry> boxes(const std::string& page_id);
  /// Replaces box `id` (version must match) or, without an id, adds a box.
  GlyphPreview put_box(const std::string& page_id, std::optional<std::uint64_t> id,
                       std::optional<std::uint64_t> version, const BoundingBox& box);
  /// Union of the given boxes; returns the new proposal list.
  std::vector<BoxEntry> merge(const std::string& page_id, const std::vector<std::uint64_t>& ids,
                              const std::vector<std::uint64_t>& versions);
  /// Equal-width split into n slices, each trimmed to its ink.
  std::vector<BoxEntry> split(const std::string& page_id, std::uint64_t id, std::uint64_t version, int n);
  /// Throws UnknownPage, InvalidLetter, BoxOutsidePage, EmptyRegion, StorageError.
  LabelRecord label(const std::string& page_id, const BoundingBox& box, char letter, const std::string& who);
  std::vector<ExportEntry> export_all();

  PageLibrary& pages() noexcept { return pages_; }
  LabelStore& store() noexcept { return store_; }
  const SegmenterConfig& segmenter() const noexcept { return seg_; }

 private:
  struct PageState {
    std::vector<BoxEntry> boxes;
    std::uint64_t next_id = 1;
  };
  PageState& state(const std::string& page_id);  // caller holds mu_
  BoxEntry& find(PageState& st, std::uint64_t id, std::uint64_t version);
  void check_box(const std::string& page_id, const BoundingBox& box);

  PageLibrary& pages_;
  LabelStore& store_;
  SegmenterConfig seg_;
  std::filesystem::path export_dir_;
  std::mutex mu_;
  std::map<std::string, PageState> states_;
};

struct PathsConfig {
  std::filesystem::path pages = "pages";
  std::filesystem::path store = "labels.jsonl";
  std::filesystem::path export_dir = "export";
  std::filesystem::path corpus = "corpus";
  std::filesystem::path models = "models";
};

struct CharnetConfig {
  std::size_t epochs = 4;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double test_fraction = 0.2;
};

/// Everything a CLI run can be configured with. Files use TOML-style
/// [section] headers and `key = value` lines; unknown keys are rejected.
struct WorkbenchConfig {
  std::uint64_t seed = 0;
  SegmenterConfig segmenter;
  LayoutConfig layout;
  TrainConfig detect;
  AugmentConfig augment;
  CharnetConfig charnet;
  PageLoadConfig page;
  PathsConfig paths;

  void validate() const;
};

/// Throws IoError, FormatError, InvalidArgument.
WorkbenchConfig load_config(const std::filesystem::path& path);
WorkbenchConfig parse_config(const std::string& text);
/// Defaults, or the file named by GLYPHFORGE_CONFIG when set.
WorkbenchConfig config_from_env();

}  // namespace glyphforge
