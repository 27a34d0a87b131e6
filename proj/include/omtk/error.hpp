#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace omtk {

enum class ErrorCategory {
  input,        // malformed or out-of-contract arguments
  parse,        // drift expression syntax
  schema,       // configuration file structure
  evaluation,   // non-finite or undefined numeric result
  unsupported,  // valid request outside the implemented structure class
  usage,        // command line misuse
  io,
};

std::string_view to_string(ErrorCategory category);

/// Base of every error raised by the toolkit. The category is what the CLI
/// reports in its structured error output.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& message)
      : Error(ErrorCategory::input, message) {}
};

class EvalError : public Error {
 public:
  explicit EvalError(const std::string& message)
      : Error(ErrorCategory::evaluation, message) {}
};

class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& message)
      : Error(ErrorCategory::unsupported, message) {}
};

class SchemaError : public Error {
 public:
  SchemaError(std::string key_path, const std::string& message)
      : Error(ErrorCategory::schema, key_path + ": " + message),
        key_path_(std::move(key_path)) {}

  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

/// Syntax error in a drift expression. `offset` is a byte offset into the
/// source, at most source.size() (end of input).
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::string expected, std::string found);

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }
  const std::string& found() const noexcept { return found_; }

 private:
  std::size_t offset_;
  std::string expected_;
  std::string found_;
};

}  // namespace omtk
