#include "glyphforge/service.hpp"

#include <openssl/evp.h>

#include "httplib.h"
#include "json.hpp"

#include "glyphforge/image_io.hpp"

namespace glyphforge {

using nlohmann::json;

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownPage:
    case ErrorCode::UnknownBox:
      return 404;
    case ErrorCode::StaleVersion:
      return 409;
    case ErrorCode::StorageError:
    case ErrorCode::IoError:
      return 500;
    default:
      return 400;
  }
}

namespace {

std::string base64(const std::vector<std::uint8_t>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

json box_json(const BoundingBox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

BoundingBox parse_box(const json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::InvalidArgument, "box must be [x_min, y_min, x_max, y_max]");
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw Error(ErrorCode::InvalidArgument, "box coordinates must be integers");
  }
  const BoundingBox b{j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
  if (!b.valid()) throw Error(ErrorCode::InvalidArgument, "box corners are out of order");
  return b;
}

std::uint64_t parse_uint(const json& j, const char* name) {
  if (!j.is_number_unsigned()) throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be a positive integer");
  return j.get<std::uint64_t>();
}

json parse_body(const httplib::Request& req) {
  try {
    auto j = json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::FormatError, std::string("malformed JSON: ") + e.what());
  }
}

const json& field(const json& body, const char* name) {
  const auto it = body.find(name);
  if (it == body.end()) throw Error(ErrorCode::InvalidArgument, std::string("missing field '") + name + "'");
  return *it;
}

void send_json(httplib::Response& res, const json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

json proposals_json(LabelSession& session, const std::string& page_id, const std::vector<BoxEntry>& boxes) {
  std::map<std::tuple<int, int, int, int>, char> labels;
  for (const auto& r : session.store().active()) {
    if (r.page_id == page_id) labels[{r.box.x_min, r.box.y_min, r.box.x_max, r.box.y_max}] = r.letter;
  }
  json out = json::array();
  for (const auto& e : boxes) {
    json row = {{"id", e.id}, {"version", e.version}, {"box", box_json(e.box)}, {"letter", nullptr}};
    const auto it = labels.find({e.box.x_min, e.box.y_min, e.box.x_max, e.box.y_max});
    if (it != labels.end()) row["letter"] = std::string(1, it->second);
    out.push_back(std::move(row));
  }
  return out;
}

json record_to_json(const LabelRecord& r) {
  return {{"id", r.id},     {"page", r.page_id}, {"box", box_json(r.box)}, {"letter", std::string(1, r.letter)},
          {"hash", r.hash}, {"ts", r.ts},        {"who", r.who}};
}

// Runs a handler and turns library errors into {code, message} bodies.
template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_json(res, {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}, http_status(e.code()));
    } catch (const json::exception& e) {
      send_json(res, {{"code", "InvalidArgument"}, {"message", e.what()}}, 400);
    } catch (const std::exception& e) {
      send_json(res, {{"code", "Internal"}, {"message", e.what()}}, 500);
    }
  };
}

}  // namespace

struct LabelServer::Impl {
  LabelSession& session;
  httplib::Server server;

  explicit Impl(LabelSession& s) : session(s) { routes(); }

  void routes() {
    server.Get("/api/pages", guarded([this](const httplib::Request&, httplib::Response& res) {
                 json out = json::array();
                 for (const auto& id : session.pages().ids()) {
                   const auto& p = session.pages().page(id);
                   out.push_back({{"id", id}, {"width", p.width()}, {"height", p.height()}});
                 }
                 send_json(res, out);
               }));
    server.Get(R"(/api/pages/([^/]+)/image)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto png = encode_png(to_raster(session.pages().page(req.matches[1]), 0, 255));
                 res.set_content(std::string(png.begin(), png.end()), "image/png");
               }));
    server.Get(R"(/api/pages/([^/]+)/boxes)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string id = req.matches[1];
                 send_json(res, proposals_json(session, id, session.boxes(id)));
               }));
    server.Post(R"(/api/pages/([^/]+)/boxes)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = req.matches[1];
                  const auto body = parse_body(req);
                  std::optional<std::uint64_t> box_id;
                  std::optional<std::uint64_t> version;
                  if (body.contains("id")) box_id = parse_uint(body["id"], "id");
                  if (body.contains("version")) version = parse_uint(body["version"], "version");
                  const auto p = session.put_box(id, box_id, version, parse_box(field(body, "box")));
                  const auto png = encode_png(to_raster(p.glyph.image, 255, 0));
                  send_json(res, {{"box", {{"id", p.entry.id}, {"version", p.entry.version}, {"box", box_json(p.entry.box)}}},
                                  {"glyph", {{"size", p.glyph.image.width()}, {"hash", p.hash}, {"png_base64", base64(png)}}}});
                }));
    server.Post(R"(/api/pages/([^/]+)/boxes/merge)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = req.matches[1];
                  const auto body = parse_body(req);
                  std::vector<std::uint64_t> ids;
                  std::vector<std::uint64_t> versions;
                  for (const auto& v : field(body, "ids")) ids.push_back(parse_uint(v, "ids"));
                  for (const auto& v : field(body, "versions")) versions.push_back(parse_uint(v, "versions"));
                  send_json(res, proposals_json(session, id, session.merge(id, ids, versions)));
                }));
    server.Post(R"(/api/pages/([^/]+)/boxes/split)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = req.matches[1];
                  const auto body = parse_body(req);
                  const auto n = parse_uint(field(body, "n"), "n");
                  if (n > 4096) throw Error(ErrorCode::InvalidArgument, "split count too large");
                  const auto boxes = session.split(id, parse_uint(field(body, "id"), "id"),
                                                   parse_uint(field(body, "version"), "version"), static_cast<int>(n));
                  send_json(res, proposals_json(session, id, boxes));
                }));
    server.Post("/api/labels", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  const auto& page = field(body, "page");
                  if (!page.is_string()) throw Error(ErrorCode::InvalidArgument, "page must be a string");
                  const auto& letter = field(body, "letter");
                  if (!letter.is_string() || letter.get<std::string>().size() != 1) {
                    throw Error(ErrorCode::InvalidLetter, "letter must be a single character a-z");
                  }
                  std::string who = "anonymous";
                  if (body.contains("who") && body["who"].is_string()) who = body["who"].get<std::string>();
                  const auto rec = session.label(page.get<std::string>(), parse_box(field(body, "box")),
                                                 letter.get<std::string>()[0], who);
                  send_json(res, record_to_json(rec), 201);
                }));
    server.Get("/api/export", guarded([this](const httplib::Request&, httplib::Response& res) {
                 res.set_content(manifest_json(session.export_all()), "application/json");
               }));
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
  }
};

LabelServer::LabelServer(LabelSession& session) : impl_(std::make_unique<Impl>(session)) {}

LabelServer::~LabelServer() { stop(); }

int LabelServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

bool LabelServer::run() { return impl_->server.listen_after_bind(); }

void LabelServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace glyphforge
