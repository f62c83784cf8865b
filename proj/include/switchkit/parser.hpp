#pragma once

#include "switchkit/formula.hpp"
#include "switchkit/program.hpp"
#include "switchkit/term.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace switchkit {

/// Syntax or name-resolution error with a 0-based byte offset and the
/// 1-based line/column derived from it.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t offset, std::size_t line, std::size_t column);

    [[nodiscard]] std::size_t offset() const { return offset_; }
    [[nodiscard]] std::size_t line() const { return line_; }
    [[nodiscard]] std::size_t column() const { return column_; }

private:
    std::size_t offset_, line_, column_;
};

enum class Tok {
    End,
    Ident,
    Number,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Dot,
    Prime,
    Question,
    Eq,
    Ne,
    Ge,
    Gt,
    Le,
    Lt,
    And,
    Or,
    Not,
    Arrow,
    Assign,
    PlusPlus,
};

struct Token {
    Tok kind;
    std::string text;
    std::size_t offset;
};

std::vector<Token> tokenize(std::string_view text);

/// Recursive-descent parser shared by the term, formula, program, model and
/// certificate readers.
///
/// Identifiers resolve against `vars`; bound quantifier variables are in
/// scope inside their body. With `allow_new` set, other identifiers are
/// accepted and appended to the variable list (used for program
/// auxiliaries); otherwise they raise "unknown variable".
class Parser {
public:
    Parser(std::string_view text, VarListPtr vars, bool allow_new = false);

    Term term();
    Formula formula();
    ProgramPtr program();

    [[nodiscard]] const Token& peek(std::size_t ahead = 0) const;
    [[nodiscard]] bool at(Tok kind) const { return peek().kind == kind; }
    [[nodiscard]] bool at_word(std::string_view word) const;
    bool accept(Tok kind);
    bool accept_word(std::string_view word);
    const Token& expect(Tok kind, std::string_view what);
    void expect_word(std::string_view word);
    std::string ident(std::string_view what = "identifier");
    Rational rational();
    void expect_end();

    [[nodiscard]] std::size_t position() const { return pos_; }
    void reset(std::size_t pos) { pos_ = pos; }

    [[noreturn]] void fail(const std::string& message) const;
    [[noreturn]] void fail_at(const std::string& message, std::size_t offset) const;

    [[nodiscard]] const VarListPtr& vars() const { return vars_; }
    void set_vars(VarListPtr vars) { vars_ = std::move(vars); }

private:
    Term additive();
    Term multiplicative();
    Term unary();
    Term power();
    Term primary();
    Term variable(const Token& tok);

    Formula implication();
    Formula disjunction();
    Formula conjunction();
    Formula negation();
    Formula comparison();

    ProgramPtr choice();
    ProgramPtr sequence();
    ProgramPtr postfix();
    ProgramPtr atomic();
    ProgramPtr ode_block();

    std::string source_;
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    VarListPtr vars_;
    bool allow_new_;
    std::vector<std::string> bound_;
};

/// Parses an expression over `vars` (any identifier allowed if vars is null).
Term parse_term(std::string_view text, VarListPtr vars = nullptr);
Formula parse_formula(std::string_view text, VarListPtr vars = nullptr);
ProgramPtr parse_program(std::string_view text, VarListPtr vars = nullptr);

} // namespace switchkit
