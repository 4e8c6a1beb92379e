#pragma once

#include <filesystem>
#include <system_error>

#include "graph_forest/common.hpp"

namespace graph_forest::detail {

inline void make_dirs(const std::filesystem::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace graph_forest::detail
