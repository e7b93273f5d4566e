#include "kennel/error.hpp"

namespace kennel {

int Error::exit_code() const noexcept {
  const std::string_view c = class_;
  const auto prefix = c.substr(0, c.find('.'));
  if (prefix == "io" || prefix == "format") return 2;
  if (prefix == "config" || prefix == "data") return 3;
  if (prefix == "acceptance") return 5;
  return 4;
}

}  // namespace kennel
