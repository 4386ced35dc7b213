#include "glyphforge/workbench.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "json.hpp"

#include "glyphforge/error.hpp"
#include "glyphforge/image_io.hpp"

namespace glyphforge {

namespace fs = std::filesystem;

namespace {

bool is_image(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::string box_key(const BoundingBox& b) {
  return std::to_string(b.x_min) + "_" + std::to_string(b.y_min) + "_" + std::to_string(b.x_max) + "_" +
         std::to_string(b.y_max);
}

// Reading order: rows top to bottom, left to right within a row.
void sort_entries(std::vector<BoxEntry>& boxes) {
  if (boxes.empty()) return;
  std::vector<BoundingBox> raw;
  raw.reserve(boxes.size());
  for (const auto& e : boxes) raw.push_back(e.box);
  std::vector<BoxEntry> out;
  out.reserve(boxes.size());
  for (const auto& t : linearize(raw, LayoutConfig{})) {
    if (t.kind == Token::Kind::Glyph) out.push_back(boxes[t.index]);
  }
  boxes = std::move(out);
}

}  // namespace

BinaryRaster load_page(const fs::path& path, const PageLoadConfig& cfg) {
  return binarize(load_image(path), cfg.threshold, cfg.ink_is_light);
}

PageLibrary::PageLibrary(fs::path dir, PageLoadConfig cfg) : dir_(std::move(dir)), cfg_(cfg) {
  if (!fs::is_directory(dir_)) throw Error(ErrorCode::IoError, "pages directory not found: " + dir_.string());
  for (const auto& e : fs::directory_iterator(dir_)) {
    if (!e.is_regular_file() || !is_image(e.path())) continue;
    const auto id = e.path().stem().string();
    if (!files_.emplace(id, e.path()).second) {
      throw Error(ErrorCode::InvalidArgument, "two page files share the id '" + id + "'");
    }
  }
  for (const auto& [id, p] : files_) ids_.push_back(id);
}

const fs::path& PageLibrary::file(const std::string& id) const {
  const auto it = files_.find(id);
  if (it == files_.end()) throw Error(ErrorCode::UnknownPage, "unknown page '" + id + "'");
  return it->second;
}

const BinaryRaster& PageLibrary::page(const std::string& id) {
  const auto& path = file(id);
  std::lock_guard lock(mu_);
  auto it = cache_.find(id);
  if (it == cache_.end()) it = cache_.emplace(id, load_page(path, cfg_)).first;
  return it->second;
}

PageSource PageLibrary::source() {
  return [this](const std::string& id) { return page(id); };
}

std::vector<LabeledBox> labeled_boxes(const std::vector<LabelRecord>& active) {
  std::vector<LabeledBox> out;
  out.reserve(active.size());
  for (const auto& r : active) out.push_back({r.page_id, r.box, r.letter, r.hash});
  return out;
}

std::string manifest_json(const std::vector<ExportEntry>& entries) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : entries) {
    rows.push_back({{"file", e.file},
                    {"letter", std::string(1, e.letter)},
                    {"page", e.page_id},
                    {"box", {e.box.x_min, e.box.y_min, e.box.x_max, e.box.y_max}},
                    {"hash", e.hash}});
  }
  return nlohmann::json{{"count", entries.size()}, {"entries", rows}}.dump(2) + "\n";
}

std::vector<ExportEntry> export_dataset(const LabelStore& store, PageLibrary& pages, const fs::path& out_dir,
                                        const SegmenterConfig& seg) {
  const auto active = store.active();
  if (active.empty()) throw Error(ErrorCode::EmptyStore, "label store is empty");
  fs::create_directories(out_dir);
  for (char c = 'a'; c <= 'z'; ++c) fs::remove_all(out_dir / std::string(1, c));
  fs::remove(out_dir / "manifest.json");

  std::vector<ExportEntry> entries;
  entries.reserve(active.size());
  for (const auto& r : active) {
    const Glyph g = normalize_glyph(pages.page(r.page_id), r.box, seg, r.page_id);
    ExportEntry e{std::string(1, r.letter) + "/" + r.page_id + "_" + box_key(r.box) + ".png", r.letter, r.page_id,
                  r.box, glyph_hash(g)};
    fs::create_directories(out_dir / std::string(1, r.letter));
    write_png(out_dir / e.file, to_raster(g.image, 255, 0));
    entries.push_back(std::move(e));
  }
  const auto manifest = manifest_json(entries);
  write_file(out_dir / "manifest.json", std::vector<std::uint8_t>(manifest.begin(), manifest.end()));
  return entries;
}

CharDataset load_exported_dataset(const fs::path& dir, const CharDatasetConfig& cfg) {
  const auto bytes = read_file(dir / "manifest.json");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("bad manifest: ") + e.what());
  }
  std::vector<CharSample> samples;
  for (const auto& row : j.at("entries")) {
    const auto letter = row.at("letter").get<std::string>();
    const int label = letter.size() == 1 ? letter_index(letter[0]) : -1;
    if (label < 0) throw Error(ErrorCode::UnknownLabel, "label '" + letter + "' is not a-z");
    Glyph g;
    g.image = binarize(load_image(dir / row.at("file").get<std::string>()), kDefaultThreshold, true);
    const auto& b = row.at("box");
    g.source_box = {b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
    g.page_id = row.at("page").get<std::string>();
    if (glyph_hash(g) != row.at("hash").get<std::string>()) {
      throw Error(ErrorCode::HashMismatch, "glyph " + row.at("file").get<std::string>() + " does not match its hash");
    }
    samples.push_back({std::move(g), label});
  }
  return make_char_dataset(std::move(samples), cfg);
}

LabelSession::LabelSession(PageLibrary& pages, LabelStore& store, SegmenterConfig seg, fs::path export_dir)
    : pages_(pages), store_(store), seg_(seg), export_dir_(std::move(export_dir)) {
  seg_.validate();
}

LabelSession::PageState& LabelSession::state(const std::string& page_id) {
  auto it = states_.find(page_id);
  if (it != states_.end()) return it->second;
  PageState st;
  auto raw = segment_boxes(pages_.page(page_id), seg_);
  for (const auto& b : raw) st.boxes.push_back({0, 1, b});
  sort_entries(st.boxes);
  for (auto& e : st.boxes) e.id = st.next_id++;
  return states_.emplace(page_id, std::move(st)).first->second;
}

BoxEntry& LabelSession::find(PageState& st, std::uint64_t id, std::uint64_t version) {
  const auto it = std::find_if(st.boxes.begin(), st.boxes.end(), [&](const BoxEntry& e) { return e.id == id; });
  if (it == st.boxes.end()) throw Error(ErrorCode::UnknownBox, "unknown box " + std::to_string(id));
  if (it->version != version) {
    throw Error(ErrorCode::StaleVersion, "box " + std::to_string(id) + " is at version " +
                                             std::to_string(it->version) + ", not " + std::to_string(version));
  }
  return *it;
}

void LabelSession::check_box(const std::string& page_id, const BoundingBox& box) {
  if (!box.valid()) throw Error(ErrorCode::InvalidArgument, "box corners are out of order");
  if (!pages_.page(page_id).contains(box)) throw Error(ErrorCode::BoxOutsidePage, "box lies outside the page");
}

std::vector<BoxEntry> LabelSession::boxes(const std::string& page_id) {
  pages_.file(page_id);
  std::lock_guard lock(mu_);
  return state(page_id).boxes;
}

GlyphPreview LabelSession::put_box(const std::string& page_id, std::optional<std::uint64_t> id,
                                   std::optional<std::uint64_t> version, const BoundingBox& box) {
  check_box(page_id, box);
  Glyph g = normalize_glyph(pages_.page(page_id), box, seg_, page_id);
  std::lock_guard lock(mu_);
  auto& st = state(page_id);
  BoxEntry out;
  if (id) {
    if (!version) throw Error(ErrorCode::InvalidArgument, "editing a box needs its version");
    auto& e = find(st, *id, *version);
    e.box = box;
    ++e.version;
    out = e;
  } else {
    out = {st.next_id++, 1, box};
    st.boxes.push_back(out);
  }
  sort_entries(st.boxes);
  auto hash = glyph_hash(g);
  return {out, std::move(g), std::move(hash)};
}

std::vector<BoxEntry> LabelSession::merge(const std::string& page_id, const std::vector<std::uint64_t>& ids,
                                          const std::vector<std::uint64_t>& versions) {
  pages_.file(page_id);
  if (ids.size() < 2 || ids.size() != versions.size()) {
    throw Error(ErrorCode::InvalidArgument, "merge needs two or more ids with matching versions");
  }
  if (std::set<std::uint64_t>(ids.begin(), ids.end()).size() != ids.size()) {
    throw Error(ErrorCode::InvalidArgument, "merge ids must be distinct");
  }
  std::lock_guard lock(mu_);
  auto& st = state(page_id);
  BoundingBox merged = find(st, ids[0], versions[0]).box;
  for (std::size_t i = 1; i < ids.size(); ++i) merged = union_box(merged, find(st, ids[i], versions[i]).box);
  std::erase_if(st.boxes, [&](const BoxEntry& e) { return std::find(ids.begin(), ids.end(), e.id) != ids.end(); });
  st.boxes.push_back({st.next_id++, 1, merged});
  sort_entries(st.boxes);
  return st.boxes;
}

std::vector<BoxEntry> LabelSession::split(const std::string& page_id, std::uint64_t id, std::uint64_t version, int n) {
  const auto& page = pages_.page(page_id);
  std::lock_guard lock(mu_);
  auto& st = state(page_id);
  const BoundingBox box = find(st, id, version).box;
  if (n < 2 || n > box.width()) throw Error(ErrorCode::InvalidArgument, "split count must be in [2, box width]");
  std::vector<BoundingBox> parts;
  for (const auto& [x0, x1] : slice_columns(box, n)) {
    try {
      parts.push_back(ink_extent(page, {x0, box.y_min, x1, box.y_max}));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyRegion) throw;
    }
  }
  if (parts.empty()) throw Error(ErrorCode::EmptyRegion, "box holds no ink");
  std::erase_if(st.boxes, [&](const BoxEntry& e) { return e.id == id; });
  for (const auto& p : parts) st.boxes.push_back({st.next_id++, 1, p});
  sort_entries(st.boxes);
  return st.boxes;
}

LabelRecord LabelSession::label(const std::string& page_id, const BoundingBox& box, char letter,
                                const std::string& who) {
  pages_.file(page_id);
  if (letter < 'a' || letter > 'z') throw Error(ErrorCode::InvalidLetter, "letter must be a-z");
  check_box(page_id, box);
  const Glyph g = normalize_glyph(pages_.page(page_id), box, seg_, page_id);
  LabelRecord rec;
  rec.page_id = page_id;
  rec.box = box;
  rec.letter = letter;
  rec.hash = glyph_hash(g);
  rec.who = who;
  return store_.append(std::move(rec));
}

std::vector<ExportEntry> LabelSession::export_all() {
  std::lock_guard lock(mu_);
  return export_dataset(store_, pages_, export_dir_, seg_);
}

void WorkbenchConfig::validate() const {
  segmenter.validate();
  layout.validate();
  detect.validate();
  augment.validate();
  if (charnet.epochs < 1 || charnet.batch_size < 1 || !(charnet.learning_rate > 0.0) || charnet.test_fraction < 0.0 ||
      charnet.test_fraction >= 1.0) {
    throw Error(ErrorCode::InvalidArgument, "invalid charnet settings");
  }
}

namespace {

std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\''))) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  T out{};
  is >> out;
  if (!is || !is.eof()) throw Error(ErrorCode::FormatError, "bad value for " + key + ": '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw Error(ErrorCode::FormatError, "bad value for " + key + ": '" + v + "' (true/false)");
}

}  // namespace

WorkbenchConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::FormatError, std::string("config: ") + e.what());
  }

  WorkbenchConfig c;
  using Setter = std::function<void(const std::string& key, const std::string& value)>;
  auto dbl = [](double& f) -> Setter { return [&f](auto& k, auto& v) { f = parse_number<double>(k, v); }; };
  auto int_ = [](int& f) -> Setter { return [&f](auto& k, auto& v) { f = parse_number<int>(k, v); }; };
  auto size = [](std::size_t& f) -> Setter { return [&f](auto& k, auto& v) { f = parse_number<std::size_t>(k, v); }; };
  auto path = [](fs::path& f) -> Setter { return [&f](auto&, auto& v) { f = v; }; };
  const std::map<std::string, Setter> setters = {
      {"seed", [&](auto& k, auto& v) { c.seed = parse_number<std::uint64_t>(k, v); }},
      {"segmenter.split_factor", dbl(c.segmenter.split_factor)},
      {"segmenter.dot_height_factor", dbl(c.segmenter.dot_height_factor)},
      {"segmenter.dot_width_factor", dbl(c.segmenter.dot_width_factor)},
      {"segmenter.dot_search_slack", dbl(c.segmenter.dot_search_slack)},
      {"segmenter.dot_max_gap", dbl(c.segmenter.dot_max_gap)},
      {"segmenter.min_component_pixels", int_(c.segmenter.min_component_pixels)},
      {"segmenter.glyph_size", int_(c.segmenter.glyph_size)},
      {"layout.row_factor", dbl(c.layout.row_factor)},
      {"layout.gap_factor", dbl(c.layout.gap_factor)},
      {"detect.image_size", int_(c.detect.image_size)},
      {"detect.val_split", dbl(c.detect.val_split)},
      {"detect.batch_size", size(c.detect.batch_size)},
      {"detect.max_epochs", size(c.detect.max_epochs)},
      {"detect.patience", size(c.detect.patience)},
      {"detect.learning_rate", dbl(c.detect.adam.learning_rate)},
      {"augment.rotate_probability", dbl(c.augment.rotate_probability)},
      {"augment.rotate_degrees", dbl(c.augment.rotate_degrees)},
      {"augment.blur_probability", dbl(c.augment.blur_probability)},
      {"charnet.epochs", size(c.charnet.epochs)},
      {"charnet.batch_size", size(c.charnet.batch_size)},
      {"charnet.learning_rate", dbl(c.charnet.learning_rate)},
      {"charnet.test_fraction", dbl(c.charnet.test_fraction)},
      {"page.threshold",
       [&](auto& k, auto& v) {
         const int t = parse_number<int>(k, v);
         if (t < 0 || t > 255) throw Error(ErrorCode::InvalidArgument, k + " must be in [0, 255]");
         c.page.threshold = static_cast<std::uint8_t>(t);
       }},
      {"page.ink_is_light", [&](auto& k, auto& v) { c.page.ink_is_light = parse_bool(k, v); }},
      {"paths.pages", path(c.paths.pages)},
      {"paths.store", path(c.paths.store)},
      {"paths.export", path(c.paths.export_dir)},
      {"paths.corpus", path(c.paths.corpus)},
      {"paths.models", path(c.paths.models)},
  };

  auto apply = [&](const std::string& key, const std::string& raw) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    it->second(key, unquote(raw));
  };
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      apply(name, node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) apply(name + "." + key, leaf.data());
  }
  c.detect.seed = c.seed;
  c.validate();
  return c;
}

WorkbenchConfig load_config(const fs::path& path) {
  const auto bytes = read_file(path);
  return parse_config(std::string(bytes.begin(), bytes.end()));
}

WorkbenchConfig config_from_env() {
  const char* env = std::getenv("GLYPHFORGE_CONFIG");
  if (!env || !*env) return {};
  return load_config(env);
}

}  // namespace glyphforge
