#pragma once

#include <cstddef>
#include <exception>
#include <string>

#include "omtk/error.hpp"

namespace omtk {

/// Collects the first exception thrown by any iteration of a parallel loop.
class FirstError {
 public:
  void record(std::size_t index, const std::exception& e) {
#pragma omp critical(omtk_first_error)
    if (index < index_) {
      index_ = index;
      message_ = e.what();
      category_ = ErrorCategory::evaluation;
      if (const auto* err = dynamic_cast<const Error*>(&e)) category_ = err->category();
    }
  }
  void rethrow(const char* what) const {
    if (index_ == kNone) return;
    throw Error(category_, std::string(what) + " " + std::to_string(index_) + ": " + message_);
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t index_ = kNone;
  std::string message_;
  ErrorCategory category_ = ErrorCategory::evaluation;
};

}  // namespace omtk
