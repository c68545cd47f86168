#pragma once

#include <string_view>

#include "dictate/doc.hpp"
#include "dictate/dsl/ast.hpp"

namespace dictate::dsl {

// Runs a program against a document. Targets resolve against the state the
// enclosing action sees; `do` folds its children left to right. Throws
// ResolutionError when a required target matches nothing and ExecutionError
// for actions that cannot apply.
DocumentState execute(const Program& program, const DocumentState& d);
DocumentState execute(const Expr& action, const DocumentState& d);

// Window searched by `correction` without an explicit target.
inline constexpr std::size_t kCorrectionWindow = 120;

// "V I N C E" / "v-i-n-c-e" -> "VINCE" / "vince"; other literals pass through trimmed.
std::u32string render_spelled(std::u32string_view literal);

// Span grown by one adjacent whitespace character so that removing it does
// not leave a double space or a space before closing punctuation.
Span join_whitespace(std::u32string_view content, Span span);

}  // namespace dictate::dsl
