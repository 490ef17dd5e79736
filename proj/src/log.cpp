#include "zsl/log.hpp"

#include <cstdlib>
#include <cstring>

namespace zsl {
namespace log {

namespace {

Level parse_env() {
  const char* v = std::getenv("ZSL_LOG");
  if (v == nullptr) return Level::kError;
  if (std::strcmp(v, "debug") == 0) return Level::kDebug;
  if (std::strcmp(v, "info") == 0) return Level::kInfo;
  return Level::kError;
}

}  // namespace

Level level() {
  static const Level lvl = parse_env();
  return lvl;
}

bool enabled(Level lvl) { return static_cast<int>(lvl) <= static_cast<int>(level()); }

void write(Level lvl, const std::string& msg) {
  if (!enabled(lvl)) return;
  const char* tag = lvl == Level::kError ? "error" : (lvl == Level::kInfo ? "info" : "debug");
  std::fprintf(stderr, "[zsl %s] %s\n", tag, msg.c_str());
}

}  // namespace log
}  // namespace zsl
