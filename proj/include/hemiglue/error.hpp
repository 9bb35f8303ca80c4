#pragma once

#include <stdexcept>
#include <string>

namespace hemi {

/// Library error carrying a stable machine-readable code (e.g. "jet-singular")
/// alongside a human-readable detail string.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace hemi
