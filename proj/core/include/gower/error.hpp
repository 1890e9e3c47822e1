#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace gower {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised while ingesting data; carries the 1-based data row when one applies.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what, std::optional<std::size_t> row = std::nullopt)
      : Error(row ? what + " (row " + std::to_string(*row) + ")" : what), row_(row) {}

  std::optional<std::size_t> row() const noexcept { return row_; }

 private:
  std::optional<std::size_t> row_;
};

}  // namespace gower
