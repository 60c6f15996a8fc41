#pragma once

#include <stdexcept>
#include <string>

namespace etm {

// Error kinds map onto the CLI exit codes: input -> 2, unresolved_star -> 3,
// verification -> 1. internal signals a broken invariant, not user input.
enum class errc { input, unresolved_star, verification, internal };

class error : public std::runtime_error {
 public:
  error(errc kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  errc kind() const { return kind_; }

 private:
  errc kind_;
};

[[noreturn]] inline void fail_input(const std::string& msg) { throw error(errc::input, msg); }
[[noreturn]] inline void fail_internal(const std::string& msg) { throw error(errc::internal, msg); }
[[noreturn]] inline void fail_unresolved(const std::string& msg) {
  throw error(errc::unresolved_star, msg);
}
[[noreturn]] inline void fail_verification(const std::string& msg) {
  throw error(errc::verification, msg);
}

inline void require_input(bool ok, const std::string& msg) {
  if (!ok) fail_input(msg);
}

}  // namespace etm
