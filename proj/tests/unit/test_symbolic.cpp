#include "oracle.hpp"

#include "switchkit/parser.hpp"
#include "switchkit/symbolic.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

using namespace switchkit;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& name)
{
    std::ifstream in(fs::path(SWITCHKIT_CORPUS_DIR) / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SwitchedSystem load(const std::string& name) { return parse_model(slurp(name)); }

const VarListPtr& xy()
{
    static VarListPtr v = make_vars({"x1", "x2"});
    return v;
}

Formula F(const std::string& text, const VarListPtr& vars = xy()) { return parse_formula(text, vars); }
Term T(const std::string& text, const VarListPtr& vars = xy()) { return parse_term(text, vars); }

VectorField field2(const std::string& f1, const std::string& f2)
{
    return VectorField{{{"x1", T(f1)}, {"x2", T(f2)}}};
}

std::map<std::string, Rational> at(const Rational& a, const Rational& b) { return {{"x1", a}, {"x2", b}}; }

SwitchedSystem state_system(const std::vector<std::tuple<std::string, VectorField, Formula>>& modes)
{
    SwitchedSystem sys;
    sys.state = xy();
    for (const auto& [id, f, q] : modes)
        sys.modes.push_back({id, f, q});
    sys.mechanism = mechanism::StateDependent{};
    return sys;
}

DecideConfig small(std::size_t samples = 4000)
{
    DecideConfig c;
    c.samples = samples;
    return c;
}

Obligation bare(const std::string& text, const VarListPtr& vars = xy())
{
    return make_obligation("t", vars, F(text, vars), std::nullopt, {});
}

// Independent cascade oracle over dense bivariate polynomials.
oracle::Poly2 random_poly(std::mt19937_64& rng, int max_deg, int terms)
{
    std::uniform_int_distribution<int> deg(0, max_deg);
    oracle::Poly2 p;
    for (int i = 0; i < terms; ++i) {
        int a = deg(rng), b = deg(rng);
        if (a + b > max_deg)
            continue;
        p = p + oracle::Poly2::mono(oracle::random_rational(rng, 4, 2), a, b);
    }
    return p;
}

Term to_term(const oracle::Poly2& p)
{
    Term out = Term::constant(0, xy());
    for (const auto& [e, c] : p.c)
        out += Term::constant(c, xy()) * Term::variable("x1", xy()).pow(e.first) *
               Term::variable("x2", xy()).pow(e.second);
    return out;
}

/// Sign of the first nonvanishing derivative among the first `depth`.
int first_sign(const oracle::Poly2& p, const oracle::Poly2& f1, const oracle::Poly2& f2, const mpq_class& a,
               const mpq_class& b, int depth)
{
    oracle::Poly2 d = p;
    for (int k = 0; k < depth; ++k) {
        mpq_class v = d.at(a, b);
        if (v != 0)
            return v > 0 ? 1 : -1;
        d = oracle::lie(d, f1, f2);
    }
    return 0;
}

// Minimal SMT-LIB reader for checking exported scripts.
struct Sexp {
    std::string atom;
    std::vector<Sexp> list;
    bool is_atom() const { return !atom.empty(); }
};

std::vector<Sexp> parse_sexps(const std::string& text)
{
    std::vector<std::string> toks;
    for (std::size_t i = 0; i < text.size();) {
        char c = text[i];
        if (c == ';') {
            while (i < text.size() && text[i] != '\n')
                ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '(' || c == ')') {
            toks.emplace_back(1, c);
            ++i;
        } else {
            std::size_t j = i;
            while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '(' &&
                   text[j] != ')')
                ++j;
            toks.push_back(text.substr(i, j - i));
            i = j;
        }
    }
    std::size_t pos = 0;
    std::function<Sexp()> one = [&]() -> Sexp {
        if (pos >= toks.size())
            throw std::runtime_error("unexpected end");
        if (toks[pos] == ")")
            throw std::runtime_error("unexpected )");
        if (toks[pos] != "(")
            return Sexp{toks[pos++], {}};
        ++pos;
        Sexp s;
        while (pos < toks.size() && toks[pos] != ")")
            s.list.push_back(one());
        if (pos >= toks.size())
            throw std::runtime_error("unbalanced");
        ++pos;
        return s;
    };
    std::vector<Sexp> out;
    while (pos < toks.size())
        out.push_back(one());
    return out;
}

mpq_class smt_real(const Sexp& s, const std::map<std::string, mpq_class>& env)
{
    if (s.is_atom()) {
        if (auto it = env.find(s.atom); it != env.end())
            return it->second;
        mpq_class q(s.atom, 10);
        q.canonicalize();
        return q;
    }
    const std::string& op = s.list.front().atom;
    std::vector<mpq_class> args;
    for (std::size_t i = 1; i < s.list.size(); ++i)
        args.push_back(smt_real(s.list[i], env));
    if (op == "+")
        return std::accumulate(args.begin(), args.end(), mpq_class(0));
    if (op == "*")
        return std::accumulate(args.begin(), args.end(), mpq_class(1), std::multiplies<>());
    if (op == "-")
        return args.size() == 1 ? mpq_class(-args[0]) : mpq_class(args[0] - args[1]);
    if (op == "/")
        return args[0] / args[1];
    throw std::runtime_error("unknown real operator " + op);
}

bool smt_bool(const Sexp& s, const std::map<std::string, mpq_class>& env)
{
    if (s.is_atom()) {
        if (s.atom == "true")
            return true;
        if (s.atom == "false")
            return false;
        throw std::runtime_error("unknown boolean " + s.atom);
    }
    const std::string& op = s.list.front().atom;
    auto sub = [&](std::size_t i) { return smt_bool(s.list[i], env); };
    if (op == "not")
        return !sub(1);
    if (op == "and") {
        for (std::size_t i = 1; i < s.list.size(); ++i)
            if (!sub(i))
                return false;
        return true;
    }
    if (op == "or") {
        for (std::size_t i = 1; i < s.list.size(); ++i)
            if (sub(i))
                return true;
        return false;
    }
    if (op == "=>")
        return !sub(1) || sub(2);
    mpq_class l = smt_real(s.list[1], env), r = smt_real(s.list[2], env);
    if (op == "=")
        return l == r;
    if (op == "distinct")
        return l != r;
    if (op == ">=")
        return l >= r;
    if (op == ">")
        return l > r;
    if (op == "<=")
        return l <= r;
    if (op == "<")
        return l < r;
    throw std::runtime_error("unknown predicate " + op);
}

/// Declared names and the single asserted formula of a script.
std::pair<std::vector<std::string>, Sexp> read_script(const std::string& text)
{
    std::vector<std::string> decls;
    std::optional<Sexp> assertion;
    bool logic = false, check = false;
    for (const auto& cmd : parse_sexps(text)) {
        REQUIRE_FALSE(cmd.is_atom());
        const std::string& head = cmd.list.front().atom;
        if (head == "set-logic") {
            CHECK(cmd.list[1].atom == "NRA");
            logic = true;
        } else if (head == "declare-fun") {
            REQUIRE(cmd.list.size() == 4);
            CHECK(cmd.list[2].list.empty());
            CHECK(cmd.list[3].atom == "Real");
            decls.push_back(cmd.list[1].atom);
        } else if (head == "assert") {
            assertion = cmd.list[1];
        } else if (head == "check-sat") {
            check = true;
        }
    }
    CHECK(logic);
    CHECK(check);
    REQUIRE(assertion.has_value());
    return {decls, *assertion};
}

} // namespace

TEST_SUITE("local progress")
{
    TEST_CASE("upward flow leaves the half-plane from its boundary")
    {
        ProgressFormula p = local_progress(field2("0", "1"), F("x1 >= x2"));
        CHECK(p.exact);
        CHECK(p.formula == Formula::compare_zero(T("x1 - x2"), Cmp::Gt));
        CHECK(p.under == p.formula);
        CHECK_FALSE(p.formula.eval(at(1, 1)));
        CHECK(p.formula.eval(at(2, 1)));
    }

    TEST_CASE("diagonal flow progresses along the diagonal")
    {
        ProgressFormula p = local_progress(field2("1/2", "1/2"), F("x1 = x2"));
        CHECK(p.exact);
        for (int k = -3; k <= 3; ++k)
            CHECK(p.formula.eval(at(Rational(k, 2), Rational(k, 2))));
        CHECK_FALSE(p.formula.eval(at(1, 0)));
    }

    TEST_CASE("the whole space progresses trivially")
    {
        ProgressFormula p = local_progress(field2("x2", "-x1"), Formula::truth());
        CHECK(p.formula.is_true());
        CHECK(p.exact);
    }

    TEST_CASE("strict atoms admit progress from their boundary")
    {
        ProgressFormula p = local_progress(field2("-1", "0"), F("x1 < x2"));
        CHECK(p.exact);
        CHECK(p.formula.eval(at(1, 1)));
        CHECK_FALSE(F("x1 < x2").eval(at(1, 1)));
    }

    TEST_CASE("linear flow on a quadratic closes within rank 3")
    {
        Cascade c = lie_cascade(T("-x1*x2"), field2("-x1/8 - x2", "2*x1 - x2/8"), 3);
        CHECK(c.closed);
        CHECK(c.derivatives.size() <= 3);
    }

    TEST_CASE("a non-closing cascade is cut and flagged")
    {
        ProgressFormula p = local_progress(field2("x2", "x1^2"), F("x1 >= 0"), 2);
        CHECK_FALSE(p.exact);
        CHECK_FALSE(p.formula == p.under);
    }

    TEST_CASE("quantified sets and rank zero are rejected")
    {
        CHECK_THROWS_AS(local_progress(field2("1", "0"), F("forall x1. x1 >= x2")), std::invalid_argument);
        CHECK_THROWS_AS(local_progress(field2("1", "0"), F("x1 >= 0"), 0), std::invalid_argument);
    }

    TEST_CASE("property: cascades agree with first-nonzero-derivative signs")
    {
        std::mt19937_64 rng(7);
        int exact_seen = 0, cut_seen = 0;
        for (int trial = 0; trial < 300; ++trial) {
            oracle::Poly2 f1 = random_poly(rng, 1 + trial % 2, 3), f2 = random_poly(rng, 1 + trial % 2, 3);
            oracle::Poly2 p = random_poly(rng, 2, 4);
            mpq_class a = oracle::random_rational(rng, 3, 2), b = oracle::random_rational(rng, 3, 2);
            // Half of the trials sit on the atom's boundary.
            if (trial % 2 == 0)
                p = p + oracle::Poly2::mono(-p.at(a, b), 0, 0);
            if (p.c.empty())
                continue;
            bool strict = trial % 3 == 0;
            VectorField f{{{"x1", to_term(f1)}, {"x2", to_term(f2)}}};
            Formula q = Formula::compare_zero(to_term(p), strict ? Cmp::Gt : Cmp::Ge);
            ProgressFormula pf = local_progress(f, q, 3);
            int s = first_sign(p, f1, f2, a, b, 12);
            bool truth = s > 0 || (s == 0 && !strict);
            bool over = pf.formula.eval(at(a, b)), under = pf.under.eval(at(a, b));
            CHECK((!under || truth));
            CHECK((!truth || over));
            if (pf.exact) {
                ++exact_seen;
                CHECK(over == truth);
                CHECK(under == truth);
            } else {
                ++cut_seen;
            }
        }
        CHECK(exact_seen > 50);
        CHECK(cut_seen > 10);
    }

    TEST_CASE("property: conjunctions and disjunctions compose atomwise")
    {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 200; ++trial) {
            oracle::Poly2 f1 = random_poly(rng, 1, 3), f2 = random_poly(rng, 1, 3);
            oracle::Poly2 p = random_poly(rng, 2, 3), q = random_poly(rng, 1, 3);
            mpq_class a = oracle::random_rational(rng, 3, 2), b = oracle::random_rational(rng, 3, 2);
            p = p + oracle::Poly2::mono(-p.at(a, b), 0, 0);
            q = q + oracle::Poly2::mono(-q.at(a, b), 0, 0);
            if (p.c.empty() || q.c.empty())
                continue;
            VectorField f{{{"x1", to_term(f1)}, {"x2", to_term(f2)}}};
            Formula fp = Formula::compare_zero(to_term(p), Cmp::Ge);
            Formula fq = Formula::compare_zero(to_term(q), Cmp::Gt);
            bool tp = first_sign(p, f1, f2, a, b, 12) >= 0;
            bool tq = first_sign(q, f1, f2, a, b, 12) > 0;
            ProgressFormula conj = local_progress(f, f_and({fp, fq}), 3);
            ProgressFormula disj = local_progress(f, f_or({fp, fq}), 3);
            if (conj.exact)
                CHECK(conj.formula.eval(at(a, b)) == (tp && tq));
            if (disj.exact)
                CHECK(disj.formula.eval(at(a, b)) == (tp || tq));
        }
    }

    TEST_CASE("property: exit progress is into-progress along the reversed field")
    {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 200; ++trial) {
            oracle::Poly2 f1 = random_poly(rng, 2, 3), f2 = random_poly(rng, 2, 3);
            oracle::Poly2 p = random_poly(rng, 2, 4);
            mpq_class a = oracle::random_rational(rng, 3, 2), b = oracle::random_rational(rng, 3, 2);
            p = p + oracle::Poly2::mono(-p.at(a, b), 0, 0);
            if (p.c.empty())
                continue;
            VectorField f{{{"x1", to_term(f1)}, {"x2", to_term(f2)}}};
            Formula q = Formula::compare_zero(to_term(p), Cmp::Ge);
            ProgressFormula ex = local_progress(f, q, 3, Direction::Exit);
            ProgressFormula rev = local_progress(f.negated(), q, 3, Direction::Into);
            CHECK(ex.formula == rev.formula);
            CHECK(ex.under == rev.under);
            CHECK(ex.exact == rev.exact);
            // Reversal flips the sign of odd derivatives.
            oracle::Poly2 m1 = f1 * oracle::Poly2::mono(-1, 0, 0), m2 = f2 * oracle::Poly2::mono(-1, 0, 0);
            oracle::Poly2 d = p, e = p;
            for (int k = 0; k < 5; ++k) {
                CHECK(d.at(a, b) == (k % 2 ? -e.at(a, b) : e.at(a, b)));
                d = oracle::lie(d, m1, m2);
                e = oracle::lie(e, f1, f2);
            }
            if (ex.exact) {
                int s = first_sign(p, m1, m2, a, b, 12);
                CHECK(ex.formula.eval(at(a, b)) == (s >= 0));
            }
        }
    }

    TEST_CASE("property: closed cascades are stable under larger ranks")
    {
        std::mt19937_64 rng(5);
        int closed = 0;
        for (int trial = 0; trial < 200; ++trial) {
            oracle::Poly2 f1 = random_poly(rng, 1, 3), f2 = random_poly(rng, 1, 3);
            oracle::Poly2 p = random_poly(rng, 2, 4);
            if (p.c.empty())
                continue;
            VectorField f{{{"x1", to_term(f1)}, {"x2", to_term(f2)}}};
            Formula q = Formula::compare_zero(to_term(p), trial % 2 ? Cmp::Gt : Cmp::Ge);
            for (unsigned n = 1; n <= 3; ++n) {
                ProgressFormula base = local_progress(f, q, n);
                if (!base.exact)
                    continue;
                ++closed;
                for (unsigned m = n + 1; m <= n + 3; ++m) {
                    ProgressFormula more = local_progress(f, q, m);
                    CHECK(more.exact);
                    CHECK(more.formula == base.formula);
                    CHECK(more.under == base.under);
                }
                break;
            }
        }
        CHECK(closed > 50);
    }
}

TEST_SUITE("exact layer")
{
    TEST_CASE("nonnegativity certificates")
    {
        auto quartic = certify_nonneg(T("x1^2 + x2^4"));
        CHECK(quartic.nonneg);
        CHECK(quartic.definite);
        CHECK(quartic.method == "even-power sum");
        auto square = certify_nonneg(T("x1^2 - 2*x1*x2 + x2^2"));
        CHECK(square.nonneg);
        CHECK_FALSE(square.definite);
        CHECK(certify_nonneg(T("x1^2 - 2*x1 + 2")).positive);
        CHECK(certify_nonneg(T("x1^2 + 1")).positive);
        CHECK(certify_nonneg(T("(x1 - x2)^2 + 1")).positive);
        CHECK_FALSE(certify_nonneg(T("-x1^2")).nonneg);
        CHECK_FALSE(certify_nonneg(T("x1*x2")).nonneg);
        CHECK_FALSE(certify_nonneg(T("x1^2 - 3*x1*x2 + x2^2")).nonneg);
        CHECK(certify_nonneg(T("0")).nonneg);
        CHECK_FALSE(certify_nonneg(T("0")).positive);
    }

    TEST_CASE("negated even-power sum is valid")
    {
        Verdict v = decide_formula(bare("-x1^2 - x2^4 <= 0"), small());
        CHECK(v.label() == "valid-exact");
    }

    TEST_CASE("spiral derivative is nonpositive on its domain via multiplier 2")
    {
        Verdict v = decide_formula(bare("x1*x2 <= 0 -> -x1^2/4 + 2*x1*x2 - x2^2/4 <= 0"), small());
        CHECK(v.label() == "valid-exact");
        bool found = false;
        for (const auto& e : v.evidence)
            found = found || e.find("multipliers") != std::string::npos;
        CHECK(found);
        auto cert = certify_on(T("x1^2/4 - 2*x1*x2 + x2^2/4"), {T("-x1*x2")}, {Rational(2)});
        REQUIRE(cert.has_value());
        CHECK(cert->find("= x1^2/4 + x2^2/4 >= 0") != std::string::npos);
        CHECK_FALSE(certify_on(T("x1^2/4 - 2*x1*x2 + x2^2/4"), {T("-x1*x2")}, {Rational(1)}).has_value());
    }

    TEST_CASE("spiral derivative without domain is falsified at (1,1)")
    {
        Verdict v = decide_formula(bare("-x1^2/4 + 2*x1*x2 - x2^2/4 <= 0"), small());
        REQUIRE(v.is_falsified());
        CHECK(v.witness.at("x1") == 1);
        CHECK(v.witness.at("x2") == 1);
        oracle::Poly2 lv = oracle::Poly2::mono(mpq_class(-1, 4), 2, 0) + oracle::Poly2::mono(2, 1, 1) +
                           oracle::Poly2::mono(mpq_class(-1, 4), 0, 2);
        CHECK(lv.at(1, 1) == mpq_class(3, 2));
    }

    TEST_CASE("linear equalities are eliminated")
    {
        CHECK(prove_exact(F("x1 = x2 & x2 = 1 -> x1 >= 1")).is_valid());
        CHECK(prove_exact(F("x1 = 2*x2 -> x1^2 - 4*x2^2 >= 0")).is_valid());
    }

    TEST_CASE("monomial equalities split into cases")
    {
        CHECK(prove_exact(F("x1*x2 = 0 -> x1^2 + x2^2 - 2*x1*x2 >= 0 | x1 = 0 | x2 = 0")).is_valid());
        CHECK(prove_exact(F("x1*x2 = 0 & x1^2 - x2^2/4 < 0 -> x2^2 > 0")).is_valid());
    }

    TEST_CASE("the exact layer never claims a false formula")
    {
        CHECK_FALSE(prove_exact(F("x1 >= x2")).is_valid());
        CHECK_FALSE(prove_exact(F("x1*x2 <= 0")).is_valid());
        CHECK_FALSE(prove_exact(F("x1^2 > 0")).is_valid());
    }
}

TEST_SUITE("falsifier")
{
    TEST_CASE("property: witnesses violate the formula exactly and valid verdicts survive sampling")
    {
        std::mt19937_64 rng(13);
        auto vars = make_vars({"x1", "x2", "x3"});
        std::uniform_int_distribution<int> op(0, 5), shape(0, 3);
        int falsified = 0, valid = 0;
        for (int trial = 0; trial < 120; ++trial) {
            auto atom = [&] {
                Term p = oracle::random_term(rng, vars, 3, 2);
                return Formula::atom(p, static_cast<Cmp>(op(rng)), Term::constant(0, vars));
            };
            Formula f;
            switch (shape(rng)) {
            case 0: f = atom(); break;
            case 1: f = f_or({atom(), atom()}); break;
            case 2: f = f_implies(atom(), atom()); break;
            default: f = f_and({f_or({atom(), atom()}), f_implies(atom(), atom())}); break;
            }
            Obligation ob = make_obligation("p", vars, f, std::nullopt, {});
            Verdict v = decide_formula(ob, small(3000));
            if (v.is_falsified()) {
                ++falsified;
                CHECK_FALSE(oracle::truth(f, v.witness));
            } else if (v.is_valid()) {
                ++valid;
                for (int k = 0; k < 200; ++k) {
                    std::map<std::string, mpq_class> pt;
                    for (const auto& name : *vars)
                        pt[name] = oracle::random_rational(rng, 12, 5);
                    CHECK(oracle::truth(f, pt));
                }
            }
        }
        CHECK(falsified > 20);
        CHECK(valid > 5);
    }

    TEST_CASE("parallel and serial falsifiers agree")
    {
        for (const char* text : {"x1^2 + x2^2 <= 50", "x1*x2 < 7/3", "x1 >= x2 | x2 >= x1 + 1/1000", "x1^2 >= 0"}) {
            Formula f = F(text);
            Verdict a = falsify(f, *xy(), small(20000)), b = falsify_serial(f, *xy(), small(20000));
            CHECK(a.label() == b.label());
            CHECK(a.witness == b.witness);
            CHECK(a.samples == b.samples);
        }
    }

    TEST_CASE("narrow violations are found by random sampling")
    {
        // No shell value or dyadic grid point has 3/10 < x1 < 31/100.
        Verdict v = falsify(F("(x1 - 3/10)*(x1 - 31/100) >= 0"), *xy(), small(100000));
        REQUIRE(v.is_falsified());
        CHECK(v.reason.find("random") != std::string::npos);
    }

    TEST_CASE("budget exhaustion leaves the verdict unknown")
    {
        DecideConfig c = small(500);
        c.exact_layer = false;
        Verdict v = decide_formula(bare("x1^2 + x2^2 >= 0"), c);
        CHECK(v.is_unknown());
        CHECK(v.samples == 500);
    }
}

TEST_SUITE("well-formedness conditions")
{
    TEST_CASE("coverage")
    {
        auto complementary = state_system({{"A", field2("0", "1"), F("x1 >= x2")}, {"B", field2("1", "0"), F("x1 < x2")}});
        CHECK(check_coverage(complementary, small()).label() == "valid-exact");

        auto gap = state_system({{"A", field2("0", "1"), F("x1 >= x2")}, {"B", field2("1", "0"), F("x1 > x2")}});
        Verdict v = check_coverage(gap, small());
        REQUIRE(v.is_falsified());
        CHECK(v.witness.at("x1") < v.witness.at("x2"));

        CHECK(check_coverage(load("ex2_state.model"), small()).label() == "valid-exact");
    }

    TEST_CASE("infinitesimal jumps")
    {
        auto jump = check_no_infinitesimal_jumps(load("jump.model"), 3, small());
        REQUIRE(jump.size() == 2);
        CHECK(jump[0].label() == "valid-exact");
        REQUIRE(jump[1].is_falsified());
        CHECK(jump[1].witness.at("x1") == jump[1].witness.at("x2"));

        for (const auto& v : check_no_infinitesimal_jumps(load("jump_fixed.model"), 3, small()))
            CHECK(v.label() == "valid-exact");

        auto open = state_system({{"A", field2("x2", "-x1"), Formula::truth()}});
        CHECK(check_no_infinitesimal_jumps(open, 3, small())[0].label() == "valid-exact");
    }

    TEST_CASE("stuck states")
    {
        Verdict stuck = check_no_stuck_states(load("sliding.model"), 3, small());
        REQUIRE(stuck.is_falsified());
        CHECK(stuck.witness.at("x1") == stuck.witness.at("x2"));

        CHECK(check_no_stuck_states(load("sliding_mode.model"), 3, small()).is_valid());
        auto inflated = hysteresis_inflate(load("sliding.model"), Rational(1, 10));
        CHECK(check_no_stuck_states(inflated, 3, small()).is_valid());
    }

    TEST_CASE("conditions need state-dependent switching")
    {
        CHECK_THROWS_AS(check_coverage(load("ex1_arbitrary.model")), std::invalid_argument);
        CHECK_THROWS_AS(check_no_stuck_states(load("ex3_slow.model")), std::invalid_argument);
    }

    TEST_CASE("spiral design meets all three conditions exactly")
    {
        auto sys = load("ex2_state.model");
        CHECK(check_coverage(sys, small()).label() == "valid-exact");
        for (const auto& v : check_no_infinitesimal_jumps(sys, 3, small()))
            CHECK(v.label() == "valid-exact");
        CHECK(check_no_stuck_states(sys, 3, small()).label() == "valid-exact");
    }

    TEST_CASE("property: conditions two and three imply condition one over the corpus")
    {
        std::vector<SwitchedSystem> systems;
        for (const char* name : {"ex2_state.model", "jump.model", "jump_fixed.model", "sliding.model",
                                 "sliding_mode.model"}) {
            systems.push_back(load(name));
            systems.push_back(hysteresis_inflate(systems.back(), Rational(1, 10)));
        }
        systems.push_back(state_system({{"A", field2("0", "1"), F("x1 >= x2")}, {"B", field2("1", "0"), F("x1 > x2")}}));
        int premises = 0;
        for (const auto& sys : systems) {
            bool jumps = true;
            for (const auto& v : check_no_infinitesimal_jumps(sys, 3, small()))
                jumps = jumps && v.is_valid();
            bool stuck = check_no_stuck_states(sys, 3, small()).is_valid();
            if (jumps && stuck) {
                ++premises;
                CHECK(check_coverage(sys, small()).is_valid());
            }
        }
        CHECK(premises >= 3);
    }
}

TEST_SUITE("hysteresis")
{
    TEST_CASE("half-plane gains slack")
    {
        auto sys = hysteresis_inflate(load("sliding.model"), Rational(1, 10));
        CHECK(sys.modes[0].domain == Formula::compare_zero(T("x1 - x2 + 1/10"), Cmp::Ge));
        CHECK(sys.modes[1].domain == Formula::compare_zero(T("x2 - x1 + 1/10"), Cmp::Ge));
        CHECK(sys.modes[0].field == load("sliding.model").modes[0].field);
    }

    TEST_CASE("trivial domain is unchanged")
    {
        auto sys = hysteresis_inflate(load("ex1_arbitrary.model"), Rational(1, 10));
        CHECK(sys.modes[0].domain.is_true());
    }

    TEST_CASE("product domain gains slack")
    {
        auto sys = hysteresis_inflate(load("ex2_state.model"), Rational(1, 10));
        CHECK(sys.modes[0].domain == Formula::compare_zero(T("-x1*x2 + 1/10"), Cmp::Ge));
    }

    TEST_CASE("nonpositive width is rejected")
    {
        CHECK_THROWS_AS(hysteresis_inflate(load("sliding.model"), Rational(0)), std::invalid_argument);
    }
}

TEST_SUITE("invariance obligations")
{
    TEST_CASE("decaying scalar keeps the nonpositive half-line")
    {
        SwitchedSystem sys;
        sys.state = make_vars({"x"});
        sys.modes.push_back({"A", VectorField{{{"x", parse_term("-x", sys.state)}}}, Formula::truth()});
        auto obs = gen_invariance_obligation(sys, parse_formula("x <= 0", sys.state));
        REQUIRE(obs.size() == 2);
        for (const auto& ob : obs) {
            CHECK(ob.exact());
            CHECK(decide_formula(ob, small()).label() == "valid-exact");
        }
        CHECK(obs[0].provenance.to_string() == "sai_slow(A, into)");
        CHECK(obs[1].provenance.to_string() == "sai_slow(A, exit)");
    }

    TEST_CASE("unit disc obligations hold for the spiral design")
    {
        auto sys = load("ex2_state.model");
        auto obs = gen_invariance_obligation(sys, F("x1^2 + x2^2 <= 1"));
        REQUIRE(obs.size() == 4);
        for (const auto& ob : obs) {
            CHECK(ob.provenance.kind == Provenance::Kind::SaiState);
            Verdict v = decide_formula(ob, small(20000));
            CHECK_FALSE(v.is_falsified());
            CHECK(v.is_valid());
        }
    }

    TEST_CASE("true invariant needs no samples")
    {
        for (const auto& ob : gen_invariance_obligation(load("ex2_state.model"), Formula::truth())) {
            Verdict v = decide_formula(ob, small());
            CHECK(v.label() == "valid-exact");
            CHECK(v.samples == 0);
        }
    }

    TEST_CASE("a half-plane is not invariant under arbitrary switching")
    {
        auto obs = gen_invariance_obligation(load("ex1_arbitrary.model"), F("x1 >= 1"));
        bool falsified = false;
        for (const auto& ob : obs) {
            Verdict v = decide_formula(ob, small());
            if (v.is_falsified()) {
                falsified = true;
                CHECK_FALSE(oracle::truth(ob.weak_core(), v.witness));
            }
        }
        CHECK(falsified);
    }

    TEST_CASE("property: arbitrary switching splits into its single ODEs")
    {
        for (const char* name : {"ex1_arbitrary.model", "fig2_arbitrary.model", "ex2_stripped.model"}) {
            auto sys = load(name);
            for (const char* inv : {"x1^2 + x2^2 <= 1", "x1 >= x2", "x1*x2 < 1 & x1 > -2"}) {
                if (sys.dimension() != 2)
                    continue;
                Formula I = parse_formula(inv, sys.state);
                std::set<std::string> whole, parts;
                for (const auto& ob : gen_invariance_obligation(sys, I, 3))
                    whole.insert(ob.core.to_string());
                for (const auto& m : sys.modes) {
                    SwitchedSystem single = sys;
                    single.modes = {m};
                    for (const auto& ob : gen_invariance_obligation(single, I, 3))
                        parts.insert(ob.core.to_string());
                }
                CHECK(whole == parts);
            }
        }
    }

    TEST_CASE("property: obligations only mention state variables")
    {
        for (const char* name : {"ex1_arbitrary.model", "ex2_state.model", "ex3_slow.model", "sliding.model"}) {
            auto sys = load(name);
            for (const auto& ob : gen_invariance_obligation(sys, parse_formula("x1 - x2^2 >= 1", sys.state)))
                for (const auto& v : ob.weak_core().free_vars())
                    CHECK(std::find(sys.state->begin(), sys.state->end(), v) != sys.state->end());
        }
    }

    TEST_CASE("unsupported mechanisms and foreign variables are rejected")
    {
        CHECK_THROWS_AS(gen_invariance_obligation(load("fast_blowup.model"), parse_formula("x >= 0", make_vars({"x"}))),
                        std::invalid_argument);
        CHECK_THROWS_AS(gen_invariance_obligation(load("controlled.model"), Formula::truth()), std::invalid_argument);
        CHECK_THROWS_AS(gen_invariance_obligation(load("ex2_state.model"), parse_formula("y >= 0", make_vars({"y"}))),
                        std::invalid_argument);
    }
}

TEST_SUITE("smt-lib export")
{
    TEST_CASE("nonnegative square")
    {
        auto x = make_vars({"x"});
        Obligation ob = make_obligation("square", x, parse_formula("x^2 >= 0", x), std::nullopt, {});
        std::string script = export_smtlib(ob);
        CHECK(script.find("(assert (not (>= (* x x) 0)))") != std::string::npos);
        auto [decls, assertion] = read_script(script);
        CHECK(decls == std::vector<std::string>{"x"});
        CHECK(decide_formula(ob, small()).label() == "valid-exact");
    }

    TEST_CASE("stuck-state script is satisfied by the stuck witness")
    {
        auto sys = load("sliding.model");
        Obligation ob = stuck_obligation(sys);
        Verdict v = decide_formula(ob, small());
        REQUIRE(v.is_falsified());
        auto [decls, assertion] = read_script(export_smtlib(ob));
        CHECK(smt_bool(assertion, v.witness));
    }

    TEST_CASE("spiral obligation scripts read back to the same formula")
    {
        std::mt19937_64 rng(17);
        for (const auto& ob : gen_invariance_obligation(load("ex2_state.model"), F("x1^2 + x2^2 <= 1"))) {
            auto [decls, assertion] = read_script(export_smtlib(ob));
            CHECK(decls == *ob.vars);
            for (int k = 0; k < 200; ++k) {
                std::map<std::string, mpq_class> pt{{"x1", oracle::random_rational(rng, 6, 3)},
                                                    {"x2", oracle::random_rational(rng, 6, 3)}};
                if (k < 20)
                    pt["x2"] = 0;
                CHECK(smt_bool(assertion, pt) == !oracle::truth(ob.core, pt));
            }
        }
    }

    TEST_CASE("literals and connectives")
    {
        CHECK(smtlib_term(T("-x1^2/4 + 3")) == "(+ (* (- (/ 1 4)) x1 x1) 3)");
        CHECK(smtlib_term(T("0")) == "0");
        CHECK(smtlib_formula(F("x1 != 0 -> !(x2 < 1)")) == "(=> (distinct x1 0) (not (< x2 1)))");
    }

    TEST_CASE("manifest lines")
    {
        auto sys = load("jump.model");
        auto obs = jump_obligations(sys);
        Verdict v = decide_formula(obs[1], small());
        CHECK(manifest_line(obs[1], v) == "cond2_B falsified " + v.witness_text(*sys.state));
        CHECK(manifest_line(obs[0], decide_formula(obs[0], small())) == "cond2_A valid-exact");
    }
}
