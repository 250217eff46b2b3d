#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace ringgas {

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr const char* version_string = "ringgas 0.1.0";

/* Library errors. `error` covers domain violations and solver failures;
 * `config_error` is reserved for malformed experiment configuration so the
 * CLI can map the two onto distinct exit codes. */
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct config_error : error {
  using error::error;
};

template <class... Ts>
std::string cat(Ts&&... parts) {
  std::ostringstream os;
  (os << ... << parts);
  return os.str();
}

}  // namespace ringgas

/* Input/state validation that stays on in every build. */
#define RG_REQUIRE(cond, ...)                             \
  do {                                                    \
    if (!(cond)) throw ::ringgas::error(::ringgas::cat(__VA_ARGS__)); \
  } while (0)
