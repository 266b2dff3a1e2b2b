#pragma once

#include <stdexcept>
#include <string>

namespace bergamot {

// Failure classes exposed one-to-one through the C API status codes.
enum class errc {
  invalid_argument = 1,
  not_plurisubharmonic = 2,
  hypothesis_failed = 3,
  numerical = 4,
  io = 5,
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace bergamot
