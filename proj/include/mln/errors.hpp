#pragma once

#include <stdexcept>
#include <string>

namespace mln {

/* Structured refusal: the run is well-formed but outside what the method
 * can honestly do.  The CLI maps kinds onto distinct exit codes. */
struct Refusal : std::runtime_error {
  enum class Kind { config = 2, geometry = 3, convergence = 4, bandwidth = 5 };
  Kind kind;
  Refusal(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

}  // namespace mln
