#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpd {

// Numeric values double as CLI exit codes and must stay stable.
enum class Errc : int {
  usage = 2,
  io = 3,
  bad_magic = 10,
  bad_version = 11,
  dim_overflow = 12,
  truncated = 13,
  negative_value = 14,
  bad_kind = 15,
  structural = 20,
  contract = 21,
  input = 22,
  parse = 23,
  rank_deficient = 30,
  numeric = 31,
  config = 40,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace cpd
