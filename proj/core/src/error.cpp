#include "clsid/error.hpp"

namespace clsid {

void require(bool condition, const std::string& field, const std::string& message) {
  if (!condition) {
    throw ValidationError(field + ": " + message);
  }
}

}  // namespace clsid
