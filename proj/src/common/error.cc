#include "paraforge/error.h"

namespace paraforge {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kStructural: return "structural";
    case ErrorKind::kCapacity: return "capacity";
    case ErrorKind::kTransport: return "transport";
    case ErrorKind::kGeneration: return "generation";
    case ErrorKind::kCoverage: return "coverage";
    case ErrorKind::kTraining: return "training";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace paraforge
