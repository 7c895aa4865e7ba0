#pragma once

#include <string_view>

#include "pshkit/expr.hpp"

namespace pshkit {

/// Parses an expression in z1, z2:
///
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := ('-'|'+') factor | base ('^' integer)?
///   base   := number | 'i' | 'z1' | 'z2' | func '(' expr ')' | '(' expr ')'
///   func   := re | im | conj | abs2 | exp | sqrt
///
/// Throws ParseError carrying the 0-based offset of the offending character.
ScalarField parse(std::string_view text);

}  // namespace pshkit
