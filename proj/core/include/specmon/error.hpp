#pragma once

#include <stdexcept>
#include <string>

namespace specmon {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse failure tied to a specific input file.
class FileParseError : public ParseError {
 public:
  FileParseError(std::string file, const std::string& what)
      : ParseError(file + ": " + what), file_(std::move(file)) {}
  const std::string& file() const noexcept { return file_; }

 private:
  std::string file_;
};

/// Archive failed its integrity check on decompression.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The gate threshold is above the analysis threshold, which would bias AU low.
class GateViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the analytic AU oracle when the configuration is outside its simple case.
class UnsupportedConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid declarative configuration; names the source file and the JSON pointer of the key.
class ConfigError : public ParseError {
 public:
  ConfigError(std::string source, std::string pointer, const std::string& message)
      : ParseError(source + ": " + (pointer.empty() ? "/" : pointer) + ": " + message),
        source_(std::move(source)),
        pointer_(std::move(pointer)) {}
  const std::string& source() const noexcept { return source_; }
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string source_;
  std::string pointer_;
};

}  // namespace specmon
