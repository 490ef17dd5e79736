#ifndef ZSL_ERROR_HPP_
#define ZSL_ERROR_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace zsl {

// Base class for all library errors. CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Precondition violations: dimension mismatches, bad ranges, unknown ids.
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

// Non-finite values or singular systems encountered mid-computation.
// `where` carries the failing step/epoch/batch index when known, -1 otherwise.
class NumericFailure : public Error {
 public:
  explicit NumericFailure(const std::string& msg, std::int64_t where = -1)
      : Error(msg), where_(where) {}
  std::int64_t where() const { return where_; }

 private:
  std::int64_t where_;
};

// Malformed files: bad magic, truncation. `offset` is the byte offset of the
// first inconsistency.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& msg, std::int64_t offset = -1)
      : Error(msg), offset_(offset) {}
  std::int64_t offset() const { return offset_; }

 private:
  std::int64_t offset_;
};

// Structurally valid files with unusable payload (NaN entries etc).
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

}  // namespace zsl

#endif  // ZSL_ERROR_HPP_
