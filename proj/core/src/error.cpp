#include "zsl/error.hpp"

namespace zsl {

namespace {
std::string with_row(const std::string& what, std::optional<std::size_t> row) {
  if (!row) return what;
  return "row " + std::to_string(*row) + ": " + what;
}
}  // namespace

DataError::DataError(const std::string& what, std::optional<std::size_t> row)
    : Error(with_row(what, row)), row_(row) {}

}  // namespace zsl
