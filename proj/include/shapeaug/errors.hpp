#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace shapeaug {

// Invalid parameters or configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input file content; carries the byte offset where parsing stopped.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

// Wrong magic, unsupported version or inconsistent header of a binary container.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shapeaug
