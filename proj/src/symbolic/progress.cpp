#include "switchkit/symbolic.hpp"

#include <map>
#include <stdexcept>

namespace switchkit {

const char* to_string(Direction d) { return d == Direction::Into ? "into" : "exit"; }

namespace {

/// Rational row-reduced span of polynomials over one variable list.
class Span {
public:
    /// Reduces p against the span; adds it when independent. Returns
    /// true when p was already in the span.
    bool absorb(Term p)
    {
        for (const auto& row : rows_) {
            auto it = p.monomials().find(row.lead);
            if (it != p.monomials().end())
                p -= row.poly.scaled(it->second);
        }
        if (p.is_zero())
            return true;
        auto lead = p.monomials().begin();
        Exponents e = lead->first;
        p = p.scaled(Rational(1) / lead->second);
        for (auto& row : rows_) {
            auto it = row.poly.monomials().find(e);
            if (it != row.poly.monomials().end())
                row.poly -= p.scaled(it->second);
        }
        rows_.push_back({std::move(e), std::move(p)});
        return false;
    }

private:
    struct Row {
        Exponents lead;
        Term poly;
    };
    std::vector<Row> rows_;
};

VarListPtr field_vars(const Term& p, const VectorField& f)
{
    VarListPtr vars = p.vars();
    for (const auto& [v, rhs] : f.equations) {
        vars = Term::merge_vars(vars, rhs.vars());
        vars = Term::merge_vars(vars, make_vars({v}));
    }
    return vars;
}

Formula cascade_formula(const std::vector<Term>& levels, Formula residue)
{
    Formula acc = std::move(residue);
    for (auto it = levels.rbegin(); it != levels.rend(); ++it)
        acc = f_or({Formula::compare_zero(*it, Cmp::Gt), f_and({Formula::compare_zero(*it, Cmp::Eq), acc})});
    return acc;
}

} // namespace

Cascade lie_cascade(const Term& p, const VectorField& f, unsigned rank)
{
    VarListPtr vars = field_vars(p, f);
    Cascade out;
    Span span;
    Term d = p.rebase(vars);
    if (d.is_constant()) {
        out.derivatives.push_back(d);
        out.closed = true;
        return out;
    }
    span.absorb(d);
    out.derivatives.push_back(d);
    for (unsigned k = 1; k <= rank; ++k) {
        d = lie_derivative(d, f).rebase(vars);
        if (d.is_constant() && !d.is_zero()) {
            // Its sign settles every point where the earlier levels vanish.
            out.derivatives.push_back(d);
            out.closed = true;
            return out;
        }
        if (span.absorb(d)) {
            out.closed = true;
            return out;
        }
        out.derivatives.push_back(d);
    }
    return out;
}

ProgressFormula local_progress(const VectorField& f, const Formula& q, unsigned rank, Direction direction)
{
    if (rank == 0)
        throw std::invalid_argument("progress rank must be at least 1");
    if (!q.is_quantifier_free())
        throw std::invalid_argument("progress set must be quantifier-free: " + q.to_string());
    const VectorField g = direction == Direction::Exit ? f.negated() : f;
    Formula nq = normalize(q);

    ProgressFormula out;
    out.direction = direction;
    out.rank = rank;
    std::map<std::string, Cascade> cache;
    auto cascade = [&](const SignAtom& a) -> const Cascade& {
        auto key = a.p.to_string();
        auto it = cache.find(key);
        if (it == cache.end())
            it = cache.emplace(key, lie_cascade(a.p, g, rank)).first;
        return it->second;
    };
    out.formula = map_sign_atoms(nq, [&](const SignAtom& a) {
        const Cascade& c = cascade(a);
        out.exact = out.exact && c.closed;
        return cascade_formula(c.derivatives, c.closed && a.strict ? Formula::falsity() : Formula::truth());
    });
    out.under = map_sign_atoms(nq, [&](const SignAtom& a) {
        const Cascade& c = cascade(a);
        return cascade_formula(c.derivatives, c.closed && !a.strict ? Formula::truth() : Formula::falsity());
    });
    return out;
}

} // namespace switchkit
