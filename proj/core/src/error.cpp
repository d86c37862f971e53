#include "anisograph/error.hpp"

namespace anisograph {

FormatError::FormatError(const std::string& what, std::size_t offset)
    : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
      offset_(offset) {}

}  // namespace anisograph
