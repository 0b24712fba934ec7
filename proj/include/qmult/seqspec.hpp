#pragma once

#include <string>
#include <string_view>

#include "qmult/seqcore.hpp"

namespace qmult {

// Parses the sequence mini-language: name[:key=value{,key=value}], list
// values separated by ';'. Names: tm, gtm, digitsum, dsmod, strong, random,
// periodic, rudin-shapiro. Unknown names or keys raise InvalidArgument.
SeqSpec parse_seq_spec(std::string_view text);

// Canonical text form; parse_seq_spec(format_seq_spec(s)) == s.
std::string format_seq_spec(const SeqSpec& spec);

}  // namespace qmult
