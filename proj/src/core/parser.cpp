#include "switchkit/parser.hpp"

#include <algorithm>
#include <cctype>

namespace switchkit {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

bool is_keyword(const std::string& s)
{
    return s == "forall" || s == "exists" || s == "true" || s == "false" || s == "if";
}

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t offset)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

std::string describe(const Token& t)
{
    if (t.kind == Tok::End)
        return "end of input";
    return "'" + t.text + "'";
}

} // namespace

ParseError::ParseError(const std::string& message, std::size_t offset, std::size_t line, std::size_t column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      offset_(offset),
      line_(line),
      column_(column)
{
}

std::vector<Token> tokenize(std::string_view text)
{
    std::vector<Token> out;
    std::size_t i = 0;
    auto error = [&](const std::string& msg, std::size_t at) {
        auto [l, c] = line_col(text, at);
        throw ParseError(msg, at, l, c);
    };
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '#' || (c == '/' && i + 1 < text.size() && text[i + 1] == '/')) {
            while (i < text.size() && text[i] != '\n')
                ++i;
            continue;
        }
        std::size_t start = i;
        if (is_ident_start(c)) {
            while (i < text.size() && is_ident_char(text[i]))
                ++i;
            out.push_back({Tok::Ident, std::string(text.substr(start, i - start)), start});
            continue;
        }
        if (is_digit(c) || (c == '.' && i + 1 < text.size() && is_digit(text[i + 1]))) {
            while (i < text.size() && is_digit(text[i]))
                ++i;
            if (i + 1 < text.size() && text[i] == '.' && is_digit(text[i + 1])) {
                ++i;
                while (i < text.size() && is_digit(text[i]))
                    ++i;
            }
            if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < text.size() && (text[j] == '+' || text[j] == '-'))
                    ++j;
                if (j < text.size() && is_digit(text[j])) {
                    i = j;
                    while (i < text.size() && is_digit(text[i]))
                        ++i;
                }
            }
            out.push_back({Tok::Number, std::string(text.substr(start, i - start)), start});
            continue;
        }
        auto two = text.substr(i, 2);
        struct Op {
            std::string_view text;
            Tok kind;
        };
        static constexpr Op ops2[] = {{"!=", Tok::Ne}, {">=", Tok::Ge}, {"<=", Tok::Le}, {"->", Tok::Arrow},
                                      {":=", Tok::Assign}, {"++", Tok::PlusPlus}, {"==", Tok::Eq}};
        bool matched = false;
        for (const auto& op : ops2) {
            if (two == op.text) {
                out.push_back({op.kind, std::string(op.text), start});
                i += 2;
                matched = true;
                break;
            }
        }
        if (matched)
            continue;
        Tok kind;
        switch (c) {
        case '+': kind = Tok::Plus; break;
        case '-': kind = Tok::Minus; break;
        case '*': kind = Tok::Star; break;
        case '/': kind = Tok::Slash; break;
        case '^': kind = Tok::Caret; break;
        case '(': kind = Tok::LParen; break;
        case ')': kind = Tok::RParen; break;
        case '{': kind = Tok::LBrace; break;
        case '}': kind = Tok::RBrace; break;
        case ',': kind = Tok::Comma; break;
        case ';': kind = Tok::Semi; break;
        case ':': kind = Tok::Colon; break;
        case '.': kind = Tok::Dot; break;
        case '\'': kind = Tok::Prime; break;
        case '?': kind = Tok::Question; break;
        case '=': kind = Tok::Eq; break;
        case '>': kind = Tok::Gt; break;
        case '<': kind = Tok::Lt; break;
        case '&': kind = Tok::And; break;
        case '|': kind = Tok::Or; break;
        case '!': kind = Tok::Not; break;
        default: error(std::string("unexpected character '") + c + "'", i);
        }
        out.push_back({kind, std::string(1, c), start});
        ++i;
    }
    out.push_back({Tok::End, "", text.size()});
    return out;
}

Parser::Parser(std::string_view text, VarListPtr vars, bool allow_new)
    : source_(text), tokens_(tokenize(text)), vars_(vars ? std::move(vars) : make_vars({})), allow_new_(allow_new)
{
}

const Token& Parser::peek(std::size_t ahead) const
{
    std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
}

bool Parser::at_word(std::string_view word) const { return peek().kind == Tok::Ident && peek().text == word; }

bool Parser::accept(Tok kind)
{
    if (!at(kind))
        return false;
    ++pos_;
    return true;
}

bool Parser::accept_word(std::string_view word)
{
    if (!at_word(word))
        return false;
    ++pos_;
    return true;
}

const Token& Parser::expect(Tok kind, std::string_view what)
{
    if (!at(kind))
        fail("expected " + std::string(what) + ", found " + describe(peek()));
    return tokens_[pos_++];
}

void Parser::expect_word(std::string_view word)
{
    if (!accept_word(word))
        fail("expected '" + std::string(word) + "', found " + describe(peek()));
}

std::string Parser::ident(std::string_view what)
{
    const Token& t = expect(Tok::Ident, what);
    if (is_keyword(t.text))
        fail_at("unexpected keyword '" + t.text + "'", t.offset);
    return t.text;
}

Rational Parser::rational()
{
    bool negative = accept(Tok::Minus);
    const Token& num = expect(Tok::Number, "number");
    Rational value = parse_rational(num.text);
    if (accept(Tok::Slash)) {
        const Token& den = expect(Tok::Number, "denominator");
        Rational d = parse_rational(den.text);
        if (d == 0)
            fail_at("division by zero", den.offset);
        value /= d;
    }
    return negative ? Rational(-value) : value;
}

void Parser::expect_end()
{
    if (!at(Tok::End))
        fail("unexpected " + describe(peek()));
}

void Parser::fail(const std::string& message) const { fail_at(message, peek().offset); }

void Parser::fail_at(const std::string& message, std::size_t offset) const
{
    auto [l, c] = line_col(source_, offset);
    throw ParseError(message, offset, l, c);
}

// ---- terms ----

Term Parser::term() { return additive(); }

Term Parser::additive()
{
    Term acc = multiplicative();
    for (;;) {
        if (accept(Tok::Plus))
            acc += multiplicative();
        else if (accept(Tok::Minus))
            acc -= multiplicative();
        else
            return acc;
    }
}

Term Parser::multiplicative()
{
    Term acc = unary();
    for (;;) {
        if (accept(Tok::Star)) {
            acc *= unary();
        } else if (at(Tok::Slash)) {
            std::size_t at_offset = peek().offset;
            ++pos_;
            Term d = unary();
            if (!d.is_constant())
                fail_at("division by a non-constant expression", at_offset);
            if (d.is_zero())
                fail_at("division by zero", at_offset);
            acc = acc.scaled(1 / d.constant_term());
        } else {
            return acc;
        }
    }
}

Term Parser::unary()
{
    if (accept(Tok::Minus))
        return -unary();
    if (accept(Tok::Plus))
        return unary();
    return power();
}

Term Parser::power()
{
    Term base = primary();
    while (at(Tok::Caret)) {
        ++pos_;
        const Token& e = expect(Tok::Number, "natural exponent");
        if (!std::all_of(e.text.begin(), e.text.end(), is_digit) || e.text.size() > 4)
            fail_at("exponent must be a natural number literal", e.offset);
        base = base.pow(static_cast<unsigned>(std::stoul(e.text)));
    }
    return base;
}

Term Parser::primary()
{
    const Token& t = peek();
    switch (t.kind) {
    case Tok::Number: {
        ++pos_;
        try {
            return Term::constant(parse_rational(t.text), vars_);
        } catch (const std::invalid_argument& e) {
            fail_at(e.what(), t.offset);
        }
    }
    case Tok::Ident:
        if (is_keyword(t.text))
            fail("unexpected keyword '" + t.text + "' in expression");
        ++pos_;
        return variable(t);
    case Tok::LParen: {
        ++pos_;
        Term inner = term();
        expect(Tok::RParen, "')'");
        return inner;
    }
    default:
        fail("expected expression, found " + describe(t));
    }
}

Term Parser::variable(const Token& tok)
{
    const std::string& name = tok.text;
    if (std::find(vars_->begin(), vars_->end(), name) != vars_->end())
        return Term::variable(name, vars_);
    if (std::find(bound_.begin(), bound_.end(), name) != bound_.end()) {
        VarList extended = *vars_;
        extended.push_back(name);
        return Term::variable(name, make_vars(std::move(extended)));
    }
    if (!allow_new_)
        fail_at("unknown variable '" + name + "'", tok.offset);
    VarList extended = *vars_;
    extended.push_back(name);
    vars_ = make_vars(std::move(extended));
    return Term::variable(name, vars_);
}

// ---- formulas ----

Formula Parser::formula() { return implication(); }

Formula Parser::implication()
{
    Formula lhs = disjunction();
    if (accept(Tok::Arrow))
        return f_implies(lhs, implication());
    return lhs;
}

Formula Parser::disjunction()
{
    std::vector<Formula> args{conjunction()};
    while (accept(Tok::Or))
        args.push_back(conjunction());
    return args.size() == 1 ? args.front() : f_or(std::move(args));
}

Formula Parser::conjunction()
{
    std::vector<Formula> args{negation()};
    while (accept(Tok::And))
        args.push_back(negation());
    return args.size() == 1 ? args.front() : f_and(std::move(args));
}

Formula Parser::negation()
{
    if (accept(Tok::Not))
        return f_not(negation());
    if (at_word("forall") || at_word("exists")) {
        bool universal = peek().text == "forall";
        ++pos_;
        std::string var = ident("bound variable");
        expect(Tok::Dot, "'.' after bound variable");
        bound_.push_back(var);
        Formula body = formula();
        bound_.pop_back();
        return universal ? f_forall(var, body) : f_exists(var, body);
    }
    if (accept_word("true"))
        return Formula::truth();
    if (accept_word("false"))
        return Formula::falsity();
    if (at(Tok::LParen)) {
        // Either a parenthesized term starting a comparison or a
        // parenthesized formula; try the comparison first.
        std::size_t save = pos_;
        VarListPtr save_vars = vars_;
        try {
            return comparison();
        } catch (const ParseError& first) {
            pos_ = save;
            vars_ = save_vars;
            try {
                ++pos_;
                Formula inner = formula();
                expect(Tok::RParen, "')'");
                return inner;
            } catch (const ParseError& second) {
                if (first.offset() > second.offset())
                    throw first;
                throw;
            }
        }
    }
    return comparison();
}

Formula Parser::comparison()
{
    Term lhs = term();
    Cmp op;
    switch (peek().kind) {
    case Tok::Eq: op = Cmp::Eq; break;
    case Tok::Ne: op = Cmp::Ne; break;
    case Tok::Ge: op = Cmp::Ge; break;
    case Tok::Gt: op = Cmp::Gt; break;
    case Tok::Le: op = Cmp::Le; break;
    case Tok::Lt: op = Cmp::Lt; break;
    default: fail("expected comparison operator, found " + describe(peek()));
    }
    ++pos_;
    Term rhs = term();
    return Formula::atom(std::move(lhs), op, std::move(rhs));
}

// ---- programs ----

ProgramPtr Parser::program() { return choice(); }

ProgramPtr Parser::choice()
{
    ProgramPtr left = sequence();
    if (accept(Tok::PlusPlus))
        return p_choice(left, choice());
    return left;
}

ProgramPtr Parser::sequence()
{
    ProgramPtr first = postfix();
    if (accept(Tok::Semi))
        return p_seq(first, sequence());
    return first;
}

ProgramPtr Parser::postfix()
{
    ProgramPtr p = atomic();
    while (accept(Tok::Star))
        p = p_loop(p);
    return p;
}

ProgramPtr Parser::atomic()
{
    const Token& t = peek();
    if (t.kind == Tok::Question) {
        ++pos_;
        return p_test(formula());
    }
    if (t.kind == Tok::LParen) {
        ++pos_;
        ProgramPtr inner = choice();
        expect(Tok::RParen, "')'");
        return inner;
    }
    if (t.kind == Tok::LBrace) {
        if (peek(1).kind == Tok::Ident && peek(2).kind == Tok::Prime)
            return ode_block();
        ++pos_;
        ProgramPtr inner = choice();
        expect(Tok::RBrace, "'}'");
        return inner;
    }
    if (t.kind == Tok::Ident && t.text == "if") {
        ++pos_;
        expect(Tok::LParen, "'(' after if");
        Formula cond = formula();
        expect(Tok::RParen, "')'");
        expect(Tok::LBrace, "'{'");
        ProgramPtr body = choice();
        expect(Tok::RBrace, "'}'");
        return p_if(cond, body);
    }
    if (t.kind == Tok::Ident) {
        std::string var = ident("assigned variable");
        variable(tokens_[pos_ - 1]);
        expect(Tok::Assign, "':='");
        return p_assign(var, term());
    }
    fail("expected program, found " + describe(t));
}

ProgramPtr Parser::ode_block()
{
    expect(Tok::LBrace, "'{'");
    VectorField field;
    do {
        const Token& v = expect(Tok::Ident, "ODE variable");
        std::string name = v.text;
        variable(v);
        expect(Tok::Prime, "'");
        expect(Tok::Eq, "'='");
        for (const auto& [existing, _] : field.equations)
            if (existing == name)
                fail_at("duplicate ODE variable '" + name + "'", v.offset);
        field.equations.emplace_back(name, term());
    } while (accept(Tok::Comma));
    Formula domain = Formula::truth();
    if (accept(Tok::And))
        domain = formula();
    expect(Tok::RBrace, "'}'");
    return p_ode(field, domain);
}

Term parse_term(std::string_view text, VarListPtr vars)
{
    bool open = !vars;
    Parser p(text, std::move(vars), open);
    Term t = p.term();
    p.expect_end();
    return t;
}

Formula parse_formula(std::string_view text, VarListPtr vars)
{
    bool open = !vars;
    Parser p(text, std::move(vars), open);
    Formula f = p.formula();
    p.expect_end();
    return f;
}

ProgramPtr parse_program(std::string_view text, VarListPtr vars)
{
    bool open = !vars;
    Parser p(text, std::move(vars), open);
    ProgramPtr prog = p.program();
    p.expect_end();
    return prog;
}

} // namespace switchkit
