#ifndef ZSL_LOG_HPP_
#define ZSL_LOG_HPP_

#include <cstdio>
#include <string>

namespace zsl {
namespace log {

enum class Level { kError = 0, kInfo = 1, kDebug = 2 };

// Level comes from the ZSL_LOG environment variable: error | info | debug.
// Unset or unrecognized values mean error-only.
Level level();

bool enabled(Level lvl);

void write(Level lvl, const std::string& msg);

inline void error(const std::string& msg) { write(Level::kError, msg); }
inline void info(const std::string& msg) { write(Level::kInfo, msg); }
inline void debug(const std::string& msg) { write(Level::kDebug, msg); }

}  // namespace log
}  // namespace zsl

#endif  // ZSL_LOG_HPP_
