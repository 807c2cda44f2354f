#pragma once

// Parser, pretty-printer and JSON dump for `.pts` programs.

#include <string>
#include <string_view>
#include <vector>

#include "ptyck/ast.hpp"
#include "ptyck/lexer.hpp"

namespace ptyck {

/// Parses a whole program. Throws SyntaxError at the first error.
ast::Program parse_program(std::string_view source);
ast::Program parse_program(std::vector<Token> tokens);

/// Single expression / statement entry points (used by tests and tools).
ast::ExprPtr parse_expression(std::string_view source);

/// Canonical source text; parse_program(pretty_print(p)) equals p.
std::string pretty_print(const ast::Program& p);
std::string pretty_print(const ast::TypeExpr& t);
std::string pretty_print(const ast::Expr& e);

/// Machine-readable AST with spans.
std::string ast_to_json(const ast::Program& p, int indent = 2);

}  // namespace ptyck
