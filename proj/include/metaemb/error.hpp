#ifndef METAEMB_ERROR_HPP
#define METAEMB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace metaemb {

enum class Errc {
  io,
  format,         // malformed input record
  dimension,      // inconsistent or mismatched vector dimension
  invalid_value,  // non-finite entry, non-positive size, ...
  degenerate,     // zero-norm vector or column
  empty,          // nothing to operate on
  config,
};

inline const char* errc_name(Errc e) {
  switch (e) {
    case Errc::io: return "io";
    case Errc::format: return "format";
    case Errc::dimension: return "dimension";
    case Errc::invalid_value: return "invalid value";
    case Errc::degenerate: return "degenerate";
    case Errc::empty: return "empty";
    case Errc::config: return "config";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace metaemb

#endif  // METAEMB_ERROR_HPP
