#include "switchkit/term.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace switchkit {

VarListPtr make_vars(VarList names) { return std::make_shared<const VarList>(std::move(names)); }

namespace {

const VarListPtr& empty_vars()
{
    static const VarListPtr empty = make_vars({});
    return empty;
}

unsigned total_degree(const Exponents& e) { return std::accumulate(e.begin(), e.end(), 0U); }

std::size_t index_of(const VarList& vars, const std::string& name)
{
    auto it = std::find(vars.begin(), vars.end(), name);
    return it == vars.end() ? vars.size() : static_cast<std::size_t>(it - vars.begin());
}

double ipow(double base, unsigned power)
{
    double result = 1.0;
    while (power) {
        if (power & 1U)
            result *= base;
        base *= base;
        power >>= 1U;
    }
    return result;
}

} // namespace

bool GrlexDescending::operator()(const Exponents& a, const Exponents& b) const
{
    unsigned da = total_degree(a), db = total_degree(b);
    if (da != db)
        return da > db;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

Term::Term() : vars_(empty_vars()) {}

Term::Term(VarListPtr vars) : vars_(vars ? std::move(vars) : empty_vars()) {}

Term Term::constant(const Rational& c, VarListPtr vars)
{
    Term t(std::move(vars));
    if (c != 0)
        t.terms_.emplace(Exponents(t.vars_->size(), 0), c);
    return t;
}

Term Term::variable(const std::string& name, VarListPtr vars)
{
    if (!vars)
        vars = make_vars({name});
    std::size_t i = index_of(*vars, name);
    if (i == vars->size())
        throw std::invalid_argument("unknown variable '" + name + "'");
    Term t(std::move(vars));
    Exponents e(t.vars_->size(), 0);
    e[i] = 1;
    t.terms_.emplace(std::move(e), Rational(1));
    return t;
}

bool Term::is_constant() const
{
    return terms_.empty() || (terms_.size() == 1 && total_degree(terms_.begin()->first) == 0);
}

Rational Term::constant_term() const
{
    auto it = terms_.find(Exponents(vars_->size(), 0));
    return it == terms_.end() ? Rational(0) : it->second;
}

unsigned Term::degree() const { return terms_.empty() ? 0 : total_degree(terms_.begin()->first); }

std::vector<std::string> Term::used_vars() const
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < vars_->size(); ++i) {
        for (const auto& [e, c] : terms_) {
            if (e[i] != 0) {
                out.push_back((*vars_)[i]);
                break;
            }
        }
    }
    return out;
}

bool Term::mentions(const std::string& name) const
{
    std::size_t i = index_of(*vars_, name);
    if (i == vars_->size())
        return false;
    return std::any_of(terms_.begin(), terms_.end(), [i](const auto& kv) { return kv.first[i] != 0; });
}

Term Term::rebase(VarListPtr vars) const
{
    if (!vars)
        vars = empty_vars();
    if (vars == vars_ || *vars == *vars_) {
        Term t(*this);
        t.vars_ = std::move(vars);
        return t;
    }
    std::vector<std::size_t> map(vars_->size());
    for (std::size_t i = 0; i < vars_->size(); ++i)
        map[i] = index_of(*vars, (*vars_)[i]);
    Term out(std::move(vars));
    for (const auto& [e, c] : terms_) {
        Exponents ne(out.vars_->size(), 0);
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0)
                continue;
            if (map[i] == out.vars_->size())
                throw std::invalid_argument("variable '" + (*vars_)[i] + "' not declared");
            ne[map[i]] = e[i];
        }
        out.terms_.emplace(std::move(ne), c);
    }
    return out;
}

Term Term::derivative(const std::string& name) const
{
    Term out(vars_);
    std::size_t i = index_of(*vars_, name);
    if (i == vars_->size())
        return out;
    for (const auto& [e, c] : terms_) {
        if (e[i] == 0)
            continue;
        Exponents ne = e;
        --ne[i];
        out.add_monomial(ne, c * e[i]);
    }
    return out;
}

Term Term::pow(unsigned k) const
{
    Term result = Term::constant(Rational(1), vars_);
    Term base = *this;
    while (k) {
        if (k & 1U)
            result *= base;
        k >>= 1U;
        if (k)
            base *= base;
    }
    return result;
}

Term Term::scaled(const Rational& c) const
{
    Term out(vars_);
    if (c == 0)
        return out;
    for (const auto& [e, coef] : terms_)
        out.terms_.emplace(e, coef * c);
    return out;
}

Term Term::substitute(const std::map<std::string, Term>& replacement) const
{
    Term result(vars_);
    for (const auto& [e, c] : terms_) {
        Term mono = Term::constant(c, vars_);
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0)
                continue;
            auto it = replacement.find((*vars_)[i]);
            if (it != replacement.end()) {
                mono *= it->second.pow(e[i]);
            } else {
                mono *= Term::variable((*vars_)[i], vars_).pow(e[i]);
            }
        }
        result += mono;
    }
    return result;
}

Rational Term::eval(std::span<const Rational> values) const
{
    if (values.size() < vars_->size())
        throw std::out_of_range("valuation shorter than variable list");
    Rational sum = 0;
    for (const auto& [e, c] : terms_) {
        Rational m = c;
        for (std::size_t i = 0; i < e.size(); ++i) {
            for (unsigned k = 0; k < e[i]; ++k)
                m *= values[i];
        }
        sum += m;
    }
    return sum;
}

Rational Term::eval(const std::map<std::string, Rational>& valuation) const
{
    std::vector<Rational> values(vars_->size());
    for (std::size_t i = 0; i < vars_->size(); ++i) {
        auto it = valuation.find((*vars_)[i]);
        if (it != valuation.end()) {
            values[i] = it->second;
        } else if (mentions((*vars_)[i])) {
            throw std::out_of_range("missing binding for variable '" + (*vars_)[i] + "'");
        }
    }
    return eval(std::span<const Rational>(values));
}

Rational Term::content() const
{
    if (terms_.empty())
        return Rational(1);
    mpz_class num_gcd = 0, den_lcm = 1;
    for (const auto& [e, c] : terms_) {
        mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), c.get_num_mpz_t());
        mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), c.get_den_mpz_t());
    }
    Rational out(abs(num_gcd), den_lcm);
    out.canonicalize();
    return out;
}

void Term::add_monomial(const Exponents& e, const Rational& c)
{
    if (c == 0)
        return;
    auto [it, inserted] = terms_.emplace(e, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0)
            terms_.erase(it);
    }
}

VarListPtr Term::merge_vars(const VarListPtr& a, const VarListPtr& b)
{
    if (a == b || *a == *b)
        return a;
    VarList merged = *a;
    bool grew = false;
    for (const auto& name : *b) {
        if (std::find(merged.begin(), merged.end(), name) == merged.end()) {
            merged.push_back(name);
            grew = true;
        }
    }
    return grew ? make_vars(std::move(merged)) : a;
}

void Term::unify_with(Term& other)
{
    if (vars_ == other.vars_)
        return;
    if (*vars_ == *other.vars_) {
        other.vars_ = vars_;
        return;
    }
    VarListPtr merged = merge_vars(vars_, other.vars_);
    if (merged != vars_)
        *this = rebase(merged);
    other = other.rebase(merged);
}

Term& Term::operator+=(const Term& rhs)
{
    Term r = rhs;
    unify_with(r);
    for (const auto& [e, c] : r.terms_)
        add_monomial(e, c);
    return *this;
}

Term& Term::operator-=(const Term& rhs)
{
    Term r = rhs;
    unify_with(r);
    for (const auto& [e, c] : r.terms_)
        add_monomial(e, -c);
    return *this;
}

Term& Term::operator*=(const Term& rhs)
{
    Term r = rhs;
    unify_with(r);
    Term out(vars_);
    for (const auto& [ea, ca] : terms_) {
        for (const auto& [eb, cb] : r.terms_) {
            Exponents e(ea.size());
            for (std::size_t i = 0; i < e.size(); ++i)
                e[i] = ea[i] + eb[i];
            out.add_monomial(e, ca * cb);
        }
    }
    terms_ = std::move(out.terms_);
    return *this;
}

bool operator==(const Term& a, const Term& b)
{
    if (a.terms_.size() != b.terms_.size())
        return false;
    if (a.vars_ == b.vars_ || *a.vars_ == *b.vars_)
        return a.terms_ == b.terms_;
    Term d = a - b;
    return d.is_zero();
}

std::string Term::to_string() const
{
    if (terms_.empty())
        return "0";
    std::string out;
    bool first = true;
    for (const auto& [e, c] : terms_) {
        bool negative = c < 0;
        Rational mag = abs(c);
        if (first) {
            if (negative)
                out += "-";
        } else {
            out += negative ? " - " : " + ";
        }
        first = false;

        std::string mono;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0)
                continue;
            if (!mono.empty())
                mono += "*";
            mono += (*vars_)[i];
            if (e[i] > 1)
                mono += "^" + std::to_string(e[i]);
        }
        if (mono.empty()) {
            out += switchkit::to_string(mag);
            continue;
        }
        if (mag.get_num() != 1)
            out += mag.get_num().get_str() + "*";
        out += mono;
        if (mag.get_den() != 1)
            out += "/" + mag.get_den().get_str();
    }
    return out;
}

CompiledTerm::CompiledTerm(const Term& term, const VarList& order)
{
    const VarList& vars = *term.vars();
    std::vector<std::size_t> map(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i)
        map[i] = index_of(order, vars[i]);
    for (const auto& [e, c] : term.monomials()) {
        Mono m{to_double(c), {}};
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0)
                continue;
            if (map[i] == order.size())
                throw std::invalid_argument("variable '" + vars[i] + "' missing from evaluation order");
            m.factors.push_back({map[i], e[i]});
        }
        monos_.push_back(std::move(m));
    }
}

double CompiledTerm::eval(std::span<const double> x) const
{
    double sum = 0.0;
    for (const auto& m : monos_) {
        double v = m.coef;
        for (const auto& f : m.factors)
            v *= ipow(x[f.index], f.power);
        sum += v;
    }
    return sum;
}

double CompiledTerm::magnitude(std::span<const double> x) const
{
    double sum = 0.0;
    for (const auto& m : monos_) {
        double v = std::fabs(m.coef);
        for (const auto& f : m.factors)
            v *= std::fabs(ipow(x[f.index], f.power));
        sum += v;
    }
    return sum;
}

} // namespace switchkit
