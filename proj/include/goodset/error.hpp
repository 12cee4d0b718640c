#pragma once

#include <stdexcept>
#include <string>

namespace goodset {

// Error categories surfaced through the C API as status detail codes.
enum class Errc {
  schema = 1,
  domain,
  consistency,
  size,
  zero_variance,
  positivity,
  empty_group,
  empty_selection,
  singular,
  missing_label,
  unidentified,
  io,
  config,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::schema: return "schema";
    case Errc::domain: return "domain";
    case Errc::consistency: return "consistency";
    case Errc::size: return "size";
    case Errc::zero_variance: return "zero_variance";
    case Errc::positivity: return "positivity";
    case Errc::empty_group: return "empty_group";
    case Errc::empty_selection: return "empty_selection";
    case Errc::singular: return "singular";
    case Errc::missing_label: return "missing_label";
    case Errc::unidentified: return "unidentified";
    case Errc::io: return "io";
    case Errc::config: return "config";
    case Errc::internal: return "internal";
  }
  return "unknown";
}

}  // namespace goodset
