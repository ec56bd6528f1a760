#pragma once

#include <string_view>

#include "svyglm/model_frame.hpp"

namespace svyglm {

// Grammar (whitespace-insensitive):
//
//   formula := name '~' rhs
//   rhs     := item (('+' | '-') item)*
//   item    := '1' | '0' | name | 'C(' name [',' 'ref' '=' level] ')'
//            | 'center(' name [',' ('weighted' | 'unweighted')] ')'
//   level   := quoted string | any text up to ')' (trimmed)
//
// '- 1' or '+ 0' drops the intercept. Names are [A-Za-z0-9_.]+ or a
// back-quoted string for columns with other characters.
ModelSpec parse_formula(std::string_view text);

}  // namespace svyglm
