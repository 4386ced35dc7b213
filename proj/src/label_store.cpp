#include "glyphforge/label_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "glyphforge/error.hpp"

namespace glyphforge {

namespace fs = std::filesystem;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string record_json(const LabelRecord& rec) {
  const nlohmann::json j = {{"v", 1},
                            {"page", rec.page_id},
                            {"box", {rec.box.x_min, rec.box.y_min, rec.box.x_max, rec.box.y_max}},
                            {"letter", std::string(1, rec.letter)},
                            {"hash", rec.hash},
                            {"ts", rec.ts},
                            {"who", rec.who}};
  return j.dump();
}

LabelRecord parse_record(const std::string& line, std::uint64_t id) {
  try {
    const auto j = nlohmann::json::parse(line);
    if (j.at("v").get<int>() != 1) throw Error(ErrorCode::FormatError, "unsupported record version");
    const auto& b = j.at("box");
    if (!b.is_array() || b.size() != 4) throw Error(ErrorCode::FormatError, "box must hold 4 integers");
    const auto letter = j.at("letter").get<std::string>();
    if (letter.size() != 1) throw Error(ErrorCode::FormatError, "letter must be one character");
    LabelRecord r;
    r.id = id;
    r.page_id = j.at("page").get<std::string>();
    r.box = {b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
    r.letter = letter[0];
    r.hash = j.at("hash").get<std::string>();
    r.ts = j.at("ts").get<std::string>();
    r.who = j.at("who").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("bad label record: ") + e.what());
  }
}

LabelStore::LabelStore(fs::path file, Clock clock) : file_(std::move(file)), clock_(std::move(clock)) {
  if (!clock_) clock_ = utc_timestamp;
  if (file_.has_parent_path()) fs::create_directories(file_.parent_path());

  std::string content;
  if (fs::exists(file_)) {
    std::ifstream in(file_, std::ios::binary);
    if (!in) throw Error(ErrorCode::StorageError, "cannot read " + file_.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    content = ss.str();
  }
  std::size_t pos = 0;
  std::size_t good_end = 0;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    const bool complete = nl != std::string::npos;
    const std::string line = content.substr(pos, complete ? nl - pos : std::string::npos);
    if (!line.empty()) {
      try {
        records_.push_back(parse_record(line, records_.size() + 1));
      } catch (const Error&) {
        if (complete) throw;
        break;  // torn tail from an interrupted append
      }
    }
    if (!complete) {
      // Parsed fine but the newline never made it to disk.
      good_end = content.size();
      break;
    }
    pos = nl + 1;
    good_end = pos;
  }

  fd_ = ::open(file_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::StorageError, "cannot open " + file_.string() + ": " + std::strerror(errno));
  if (good_end < content.size()) {
    if (::ftruncate(fd_, static_cast<off_t>(good_end)) != 0) {
      throw Error(ErrorCode::StorageError, "cannot truncate torn record");
    }
  }
  if (!content.empty() && good_end == content.size() && content.back() != '\n') {
    if (::write(fd_, "\n", 1) != 1) throw Error(ErrorCode::StorageError, "cannot repair final line");
  }
  ::fsync(fd_);
}

LabelStore::~LabelStore() {
  if (fd_ >= 0) ::close(fd_);
}

LabelRecord LabelStore::append(LabelRecord rec) {
  if (rec.letter < 'a' || rec.letter > 'z') {
    throw Error(ErrorCode::InvalidLetter, std::string("letter must be a-z, got '") + rec.letter + "'");
  }
  std::lock_guard lock(mu_);
  rec.id = records_.size() + 1;
  if (rec.ts.empty()) rec.ts = clock_();
  const std::string line = record_json(rec) + "\n";
  std::size_t written = 0;
  while (written < line.size()) {
    const auto n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::StorageError, std::string("append failed: ") + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) throw Error(ErrorCode::StorageError, std::string("fsync failed: ") + std::strerror(errno));
  records_.push_back(rec);
  return rec;
}

std::vector<LabelRecord> LabelStore::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::vector<LabelRecord> LabelStore::active() const {
  std::lock_guard lock(mu_);
  using Key = std::tuple<std::string, int, int, int, int>;
  std::map<Key, std::size_t> latest;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    latest[{r.page_id, r.box.x_min, r.box.y_min, r.box.x_max, r.box.y_max}] = i;
  }
  std::vector<std::size_t> idx;
  idx.reserve(latest.size());
  for (const auto& [k, i] : latest) idx.push_back(i);
  std::sort(idx.begin(), idx.end());
  std::vector<LabelRecord> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(records_[i]);
  return out;
}

std::size_t LabelStore::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

}  // namespace glyphforge
