#include "cpd/error.hpp"

namespace cpd {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::usage: return "usage";
    case Errc::io: return "io";
    case Errc::bad_magic: return "bad_magic";
    case Errc::bad_version: return "bad_version";
    case Errc::dim_overflow: return "dim_overflow";
    case Errc::truncated: return "truncated";
    case Errc::negative_value: return "negative_value";
    case Errc::bad_kind: return "bad_kind";
    case Errc::structural: return "structural";
    case Errc::contract: return "contract";
    case Errc::input: return "input";
    case Errc::parse: return "parse";
    case Errc::rank_deficient: return "rank_deficient";
    case Errc::numeric: return "numeric";
    case Errc::config: return "config";
  }
  return "unknown";
}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace cpd
