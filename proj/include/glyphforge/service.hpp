#pragma once

#include <memory>
#include <string>

#include "glyphforge/error.hpp"
#include "glyphforge/workbench.hpp"

namespace glyphforge {

/// HTTP status used for a library error code.
int http_status(ErrorCode code) noexcept;

/// JSON labeling API over a LabelSession:
///   GET  /api/pages                     page list
///   GET  /api/pages/{id}/image          binarized page as PNG
///   GET  /api/pages/{id}/boxes          box proposals with versions and labels
///   POST /api/pages/{id}/boxes          add or adjust a box, returns the glyph
///   POST /api/pages/{id}/boxes/merge    {ids, versions}
///   POST /api/pages/{id}/boxes/split    {id, version, n}
///   POST /api/labels                    {page, box, letter, who}
///   GET  /api/export                    run the export, returns the manifest
/// Errors come back as {code, message}.
class LabelServer {
 public:
  explicit LabelServer(LabelSession& session);
  ~LabelServer();
  LabelServer(const LabelServer&) = delete;
  LabelServer& operator=(const LabelServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port; throws IoError.
  int bind(const std::string& host, int port);
  /// Serves until stop(); returns false if the listener failed.
  bool run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace glyphforge
