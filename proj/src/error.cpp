#include "omtk/error.hpp"

namespace omtk {

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::input: return "input";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::schema: return "schema";
    case ErrorCategory::evaluation: return "evaluation";
    case ErrorCategory::unsupported: return "unsupported";
    case ErrorCategory::usage: return "usage";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

ParseError::ParseError(std::size_t offset, std::string expected,
                       std::string found)
    : Error(ErrorCategory::parse,
            "at offset " + std::to_string(offset) + ": expected " + expected +
                ", found " + found),
      offset_(offset),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

}  // namespace omtk
