#pragma once

// Concrete syntax (.cwl) for programs and annotations. The grammar is
// documented in docs/grammar.md.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leaklab/lang.hpp"

namespace leaklab {

enum class AnnotationKind : std::uint8_t { Pre, Leaky, Post };

/// An annotation as written in source: `{| A |}` before a statement,
/// `@leaky {| A |}` before a statement, or `post {| A |}` at thread end.
/// Post annotations sit at the thread's exit label.
struct RawAnnotation {
  AnnotationKind kind = AnnotationKind::Pre;
  Location at;
  ExprPtr assertion;
  std::size_t line = 0;
  std::size_t column = 0;
};

struct ParsedSource {
  Program program;
  std::vector<RawAnnotation> annotations;
};

/// Parses a whole source file. Throws ParseError (with line/column) on
/// syntax errors, duplicate declarations, undeclared names, type errors
/// and nested awaits.
ParsedSource parse_source(std::string_view text);

/// parse_source() without the annotations.
Program parse_program(std::string_view text);

/// Parses a standalone assertion against `p`. Unqualified snapshot and
/// control predicates (t@l7, at(l3)) resolve to `context`; without a context
/// they are only accepted for single-thread programs.
ExprPtr parse_assertion(std::string_view text, const Program& p,
                        std::optional<ThreadId> context = std::nullopt);

struct UnparseOptions {
  bool labels = false;                                  // prefix statements with `lN:`
  const std::vector<RawAnnotation>* annotations = nullptr;
};

/// Canonical source text; parse_program(unparse(p)) is structurally equal to p.
std::string unparse(const Program& p, const UnparseOptions& options = {});

/// Renders an expression or assertion. Snapshot/control terms of `context`
/// are printed unqualified.
std::string unparse_expr(const Expr& e, const Program& p,
                         std::optional<ThreadId> context = std::nullopt);

}  // namespace leaklab
