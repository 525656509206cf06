#ifndef PARAFORGE_ERROR_H_
#define PARAFORGE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace paraforge {

// Failure categories surfaced by every module. The CLI prints the kind name
// verbatim on its error line, so these strings are part of the interface.
enum class ErrorKind {
  kParse,
  kStructural,
  kCapacity,
  kTransport,
  kGeneration,
  kCoverage,
  kTraining,
  kConfig,
  kIo,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace paraforge

#endif  // PARAFORGE_ERROR_H_
