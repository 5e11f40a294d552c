#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace stcorpus {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (JSON line, config line). Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A domain invariant does not hold. `field()` names the offending field.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, std::string message, std::size_t line = 0)
      : Error((line ? "line " + std::to_string(line) + ": " : std::string()) + field + ": " + message),
        field_(std::move(field)),
        message_(std::move(message)),
        line_(line) {}
  const std::string& field() const { return field_; }
  const std::string& message() const { return message_; }
  std::size_t line() const { return line_; }

 private:
  std::string field_;
  std::string message_;
  std::size_t line_;
};

class IoError : public Error {
 public:
  IoError(const std::filesystem::path& path, const std::string& what)
      : Error(path.string() + ": " + what), path_(path) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// A required input file does not exist.
class MissingInputError : public IoError {
 public:
  explicit MissingInputError(const std::filesystem::path& path) : IoError(path, "missing input") {}
};

/// Binary container with the wrong magic or an unknown tag.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Binary container whose byte count disagrees with its header.
class LengthError : public Error {
 public:
  LengthError(std::size_t expected, std::size_t actual)
      : Error("expected " + std::to_string(expected) + " bytes, found " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}
  std::size_t expected() const { return expected_; }
  std::size_t actual() const { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Invalid UTF-8.
class DecodeError : public Error {
 public:
  using Error::Error;
};

/// Too few frames to emit the target sequence under CTC.
class InfeasibleError : public Error {
 public:
  InfeasibleError(std::size_t frames, std::size_t min_frames)
      : Error("alignment infeasible: " + std::to_string(frames) + " frames, need at least " +
              std::to_string(min_frames)),
        min_frames_(min_frames) {}
  std::size_t min_frames() const { return min_frames_; }

 private:
  std::size_t min_frames_;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Network failure after all retries, or a non-retryable HTTP status.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// The service answered, but not with the JSON shape we asked for. `raw()` keeps the payload.
class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& what, std::string raw) : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

}  // namespace stcorpus
