#include "oracle.hpp"

#include "switchkit/parser.hpp"
#include "switchkit/stability.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace switchkit;
namespace fs = std::filesystem;
using oracle::Poly2;

namespace {

std::string slurp(const std::string& name)
{
    std::ifstream in(fs::path(SWITCHKIT_CORPUS_DIR) / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SwitchedSystem load(const std::string& name) { return parse_model(slurp(name)); }

LyapunovCertificate cert(const std::string& name, const SwitchedSystem& sys)
{
    return parse_certificate(slurp(name), sys.state);
}

DecideConfig small()
{
    DecideConfig cfg;
    cfg.samples = 20000;
    return cfg;
}

Poly2 x1(mpq_class k = 1) { return Poly2::mono(k, 1, 0); }
Poly2 x2(mpq_class k = 1) { return Poly2::mono(k, 0, 1); }

// The two spirals, written independently of the model files.
struct Spirals {
    Poly2 a1 = x1(mpq_class(-1, 8)) + x2(-1), a2 = x1(2) + x2(mpq_class(-1, 8));
    Poly2 b1 = x1(mpq_class(-1, 8)) + x2(-2), b2 = x1(1) + x2(mpq_class(-1, 8));
};

Term derivative_of(const std::vector<std::pair<std::string, Term>>& ds, const std::string& mode)
{
    for (const auto& [m, t] : ds)
        if (m == mode)
            return t;
    FAIL("no derivative for " << mode);
    return {};
}

/// ln 2 = Σ 1/(k 2^k); 80 terms leave an error below 2^-80.
mpq_class ln2_oracle()
{
    mpq_class sum = 0, pow2 = 1;
    for (int k = 1; k <= 80; ++k) {
        pow2 *= 2;
        sum += mpq_class(1) / (pow2 * k);
    }
    return sum;
}

LyapunovCertificate common(const std::string& v, const SwitchedSystem& sys)
{
    return parse_certificate("certificate { kind = common; V = " + v + "; }", sys.state);
}

SwitchedSystem with_tau(SwitchedSystem sys, const Rational& tau)
{
    sys.mechanism = mechanism::Slow{tau};
    return sys;
}

double norm(const std::vector<double>& x)
{
    double s = 0;
    for (double xi : x)
        s += xi * xi;
    return std::sqrt(s);
}

} // namespace

TEST_SUITE("certificates")
{
    TEST_CASE("corpus certificates round-trip exactly")
    {
        const std::pair<const char*, const char*> files[] = {{"ex1_common.cert", "ex1_arbitrary.model"},
                                                              {"ex2_common.cert", "ex2_stripped.model"},
                                                              {"ex2_state_domain.cert", "ex2_state.model"},
                                                              {"ex3_dwell.cert", "ex3_slow.model"},
                                                              {"ex3_abc_dwell.cert", "ex3_abc_slow.model"}};
        for (const auto& [c, m] : files) {
            CAPTURE(c);
            auto sys = load(m);
            auto a = cert(c, sys);
            std::string text = print_certificate(a);
            auto b = parse_certificate(text, sys.state);
            CHECK(print_certificate(b) == text);
            CHECK(a.kind == b.kind);
            CHECK(a.multipliers == b.multipliers);
            REQUIRE(a.functions.size() == b.functions.size());
            for (const auto& [mode, v] : a.functions)
                CHECK(b.functions.at(mode) == v);
        }
    }

    TEST_CASE("optional fields")
    {
        auto sys = load("ex3_slow.model");
        auto c = parse_certificate("certificate { kind = multiple-dwell; mode A: V = 2*x1^2 + x2^2;"
                                   " mode B: V = x1^2 + 2*x2^2; lambda = 1/4; lambda(B) = 1/8; mu = 2; }",
                                   sys.state);
        CHECK(c.lambda.at("") == Rational(1, 4));
        CHECK(c.lambda.at("B") == Rational(1, 8));
        CHECK(*c.mu == 2);
        CHECK(parse_certificate(print_certificate(c), sys.state).lambda == c.lambda);
        auto s = cert("ex2_state_domain.cert", load("ex2_state.model"));
        CHECK(s.kind == CertificateKind::StateDomain);
        CHECK(s.multipliers.at({"A", 1}) == 2);
    }

    TEST_CASE("malformed certificates")
    {
        auto vars = make_vars({"x1", "x2"});
        const char* bad[] = {
            "certificate { kind = quadratic; V = x1^2; }",
            "certificate { kind = common; V = x1^2 + y^2; }",
            "certificate { kind = common; V = x1^2; V = x2^2; }",
            "certificate { V = x1^2; }",
            "certificate { kind = state-domain; V = x1^2; multiplier(A, atom0) = 1; }",
            "certificate { kind = state-domain; V = x1^2; multiplier(A, atom1) = -1; }",
            "certificate { kind = multiple-dwell; mode A: V = x1^2; lambda = 0; }",
            "certificate { kind = multiple-dwell; mode A: V = x1^2; mu = 1/2; }",
            "certificate { kind = multiple-dwell; V = x1^2; }",
            "certificate { kind = common; V = x1^2; mu = 2; }",
            "certificate { kind = common; V = x1^2 }",
        };
        for (const char* text : bad) {
            CAPTURE(text);
            CHECK_THROWS_AS(parse_certificate(text, vars), ParseError);
        }
    }
}

TEST_SUITE("stability specification")
{
    TEST_CASE("stability formula over the mechanism's program")
    {
        for (const char* m : {"ex1_arbitrary.model", "ex2_state.model", "ex3_slow.model"}) {
            CAPTURE(m);
            auto sys = load(m);
            StabilitySpec s = gen_stability_spec(sys);
            CHECK(s.program->to_string() == sys.program()->to_string());
            CHECK(s.epsilon == "eps");
            CHECK(s.delta == "delta");
            CHECK(s.norm2.to_string() == "x1^2 + x2^2");
            CHECK(s.pre.to_string() == "x1^2 + x2^2 < delta^2");
            CHECK(s.post.to_string() == "x1^2 + x2^2 < eps^2");
            std::string text = s.to_string();
            CHECK(text.rfind("forall eps. eps > 0 -> exists delta. delta > 0 & forall x1. forall x2. (", 0) == 0);
            CHECK(text.find("[" + sys.program()->to_string() + "]") != std::string::npos);
            CHECK(parse_program(sys.program()->to_string())->to_string() == s.program->to_string());
        }
    }

    TEST_CASE("fresh names avoid state variables")
    {
        auto sys = parse_model("vars eps delta; mode A { ode eps' = -eps, delta' = -delta; } mechanism arbitrary;");
        StabilitySpec s = gen_stability_spec(sys);
        CHECK(s.epsilon == "eps_1");
        CHECK(s.delta == "delta_1");
        CHECK(s.norm2.to_string() == "eps^2 + delta^2");
    }

    TEST_CASE("unsupported mechanisms")
    {
        CHECK_THROWS_AS(gen_stability_spec(load("fast_blowup.model")), std::invalid_argument);
        CHECK_THROWS_AS(gen_stability_spec(load("controlled.model")), std::invalid_argument);
    }
}

TEST_SUITE("common lyapunov")
{
    TEST_CASE("shared function under arbitrary switching")
    {
        auto sys = load("ex1_arbitrary.model");
        auto rep = check_common_lyapunov(sys, cert("ex1_common.cert", sys), small());
        CHECK(rep.verdict.label() == "valid-exact");
        // Oracle: V = x1²/2 + x2⁴/4 against both fields.
        Poly2 v = Poly2::mono(mpq_class(1, 2), 2, 0) + Poly2::mono(mpq_class(1, 4), 0, 4);
        Poly2 la = oracle::lie(v, x1(-1) + Poly2::mono(1, 0, 3), x1(-1) + x2(-1));
        Poly2 lb = oracle::lie(v, x1(-1), x2(-1));
        Poly2 expected = Poly2::mono(-1, 2, 0) + Poly2::mono(-1, 0, 4);
        CHECK(la.c == expected.c);
        CHECK(lb.c == expected.c);
        CHECK(la.agrees_with(derivative_of(rep.derivatives, "A")));
        CHECK(lb.agrees_with(derivative_of(rep.derivatives, "B")));
        CHECK(rep.invariant == "x2^4/4 + x1^2/2 < k & x1^2 + x2^2 < eps^2");
    }

    TEST_CASE("function on the domains with a multiplier")
    {
        auto sys = load("ex2_state.model");
        auto rep = check_common_lyapunov(sys, cert("ex2_state_domain.cert", sys), small());
        CHECK(rep.verdict.label() == "valid-exact");
        // Oracle: L_A V + 2·(−x1x2)·(−1)... residual of the S-procedure.
        Spirals s;
        Poly2 v = Poly2::mono(1, 2, 0) + Poly2::mono(1, 0, 2);
        Poly2 la = oracle::lie(v, s.a1, s.a2);
        Poly2 residual = la + Poly2::mono(-2, 1, 1);
        Poly2 expected = Poly2::mono(mpq_class(-1, 4), 2, 0) + Poly2::mono(mpq_class(-1, 4), 0, 2);
        CHECK(residual.c == expected.c);
        CHECK(la.agrees_with(derivative_of(rep.derivatives, "A")));
        bool mentions = false;
        for (const auto& l : rep.lines)
            mentions = mentions || l.find("x1^2/4 + x2^2/4 >= 0") != std::string::npos;
        CHECK(mentions);
    }

    TEST_CASE("without multipliers the domain check searches")
    {
        auto sys = load("ex2_state.model");
        auto rep = check_common_lyapunov(
            sys, parse_certificate("certificate { kind = state-domain; V = x1^2 + x2^2; }", sys.state), small());
        CHECK(rep.verdict.is_valid());
    }

    TEST_CASE("stripped domains are falsified at (1,1)")
    {
        auto sys = load("ex2_stripped.model");
        auto rep = check_common_lyapunov(sys, cert("ex2_common.cert", sys), small());
        REQUIRE(rep.verdict.is_falsified());
        const auto& w = rep.verdict.witness;
        CHECK(w.at("x1") == 1);
        CHECK(w.at("x2") == 1);
        Spirals s;
        Poly2 v = Poly2::mono(1, 2, 0) + Poly2::mono(1, 0, 2);
        CHECK(oracle::lie(v, s.a1, s.a2).at(1, 1) == mpq_class(3, 2));
        CHECK(rep.verdict.reason.find("3/2") != std::string::npos);
    }

    TEST_CASE("V must vanish at the origin and be definite")
    {
        auto sys = load("ex1_arbitrary.model");
        auto shifted = check_common_lyapunov(sys, common("x1^2 + x2^2 + 1", sys), small());
        REQUIRE(shifted.verdict.is_falsified());
        CHECK(shifted.verdict.witness.at("x1") == 0);
        auto semi = check_common_lyapunov(sys, common("x1^2", sys), small());
        CHECK(semi.verdict.is_falsified());
    }

    TEST_CASE("rejections")
    {
        auto sys = load("ex3_slow.model");
        CHECK_THROWS_AS(check_common_lyapunov(sys, cert("ex3_dwell.cert", sys)), std::invalid_argument);
        auto ex1 = load("ex1_arbitrary.model");
        LyapunovCertificate c = common("x1^2 + x2^2", ex1);
        c.functions.at("") = parse_term("x1^2 + z^2");
        CHECK_THROWS_AS(check_common_lyapunov(ex1, c), std::invalid_argument);
    }

    TEST_CASE("property: verdicts are invariant under positive scaling")
    {
        std::mt19937_64 rng(7);
        const std::pair<const char*, const char*> cases[] = {{"ex1_common.cert", "ex1_arbitrary.model"},
                                                              {"ex2_state_domain.cert", "ex2_state.model"},
                                                              {"ex2_common.cert", "ex2_stripped.model"}};
        for (const auto& [c, m] : cases) {
            auto sys = load(m);
            auto base = cert(c, sys);
            std::string label = check_common_lyapunov(sys, base, small()).verdict.label();
            for (int trial = 0; trial < 4; ++trial) {
                mpq_class k(1 + static_cast<int>(rng() % 97), 1 + static_cast<int>(rng() % 13));
                k.canonicalize();
                auto scaled = base;
                scaled.functions.at("") = base.functions.at("").scaled(k);
                CAPTURE(c);
                CAPTURE(k.get_str());
                CHECK(check_common_lyapunov(sys, scaled, small()).verdict.label() == label);
            }
        }
    }

    TEST_CASE("property: falsified verdicts carry a positive Lie derivative")
    {
        std::mt19937_64 rng(11);
        auto sys = load("ex2_stripped.model");
        Spirals s;
        int falsified = 0;
        for (int trial = 0; trial < 12; ++trial) {
            mpq_class a(1 + static_cast<int>(rng() % 6), 1 + static_cast<int>(rng() % 3));
            mpq_class b(1 + static_cast<int>(rng() % 6), 1 + static_cast<int>(rng() % 3));
            a.canonicalize();
            b.canonicalize();
            auto c = common(a.get_str() + "*x1^2 + " + b.get_str() + "*x2^2", sys);
            auto rep = check_common_lyapunov(sys, c, small());
            if (!rep.verdict.is_falsified())
                continue;
            ++falsified;
            Poly2 v = Poly2::mono(a, 2, 0) + Poly2::mono(b, 0, 2);
            const auto& w = rep.verdict.witness;
            mpq_class la = oracle::lie(v, s.a1, s.a2).at(w.at("x1"), w.at("x2"));
            mpq_class lb = oracle::lie(v, s.b1, s.b2).at(w.at("x1"), w.at("x2"));
            CHECK((la > 0 || lb > 0));
        }
        CHECK(falsified > 0);
    }
}

TEST_SUITE("dwell time")
{
    TEST_CASE("derived rates, mu and bound")
    {
        auto sys = load("ex3_slow.model");
        auto rep = check_multiple_lyapunov_dwell(sys, cert("ex3_dwell.cert", sys), std::nullopt, small());
        CHECK(rep.verdict.label() == "valid-exact");
        CHECK(rep.lambda.at("A") == Rational(1, 4));
        CHECK(rep.lambda.at("B") == Rational(1, 4));
        CHECK(rep.mu == 2);
        CHECK(rep.bound == doctest::Approx(2.772588722239781).epsilon(1e-12));
        CHECK(rep.tau == 3);

        // Oracle: L V_p = −V_p/4 for both modes.
        Spirals s;
        Poly2 va = Poly2::mono(2, 2, 0) + Poly2::mono(1, 0, 2);
        Poly2 vb = Poly2::mono(1, 2, 0) + Poly2::mono(2, 0, 2);
        Poly2 qa = va * Poly2::mono(mpq_class(-1, 4), 0, 0);
        Poly2 qb = vb * Poly2::mono(mpq_class(-1, 4), 0, 0);
        CHECK(oracle::lie(va, s.a1, s.a2).c == qa.c);
        CHECK(oracle::lie(vb, s.b1, s.b2).c == qb.c);
        CHECK(oracle::lie(va, s.a1, s.a2).agrees_with(derivative_of(rep.derivatives, "A")));
        // Oracle: μV_B − V_A = (μ−2)x1² + (2μ−1)x2² and symmetrically, so
        // the least admissible μ on a grid of eighths is 2.
        mpq_class least = 0;
        for (int num = 8; num <= 32 && least == 0; ++num) {
            mpq_class mu(num, 8);
            mu.canonicalize();
            if (mu - 2 >= 0 && 2 * mu - 1 >= 0)
                least = mu;
        }
        CHECK(least == 2);
    }

    TEST_CASE("tau below the bound is rejected")
    {
        auto sys = load("ex3_slow.model");
        auto c = cert("ex3_dwell.cert", sys);
        auto low = check_multiple_lyapunov_dwell(sys, c, Rational(5, 2), small());
        CHECK(low.verdict.is_falsified());
        CHECK(low.verdict.reason.find("2.77258872224") != std::string::npos);
        CHECK(low.bound == doctest::Approx(4 * std::log(2.0)));
        CHECK(check_multiple_lyapunov_dwell(with_tau(sys, Rational(5, 2)), c, std::nullopt, small())
                  .verdict.is_falsified());
    }

    TEST_CASE("third mode keeps tau = 3")
    {
        auto sys = load("ex3_abc_slow.model");
        auto rep = check_multiple_lyapunov_dwell(sys, cert("ex3_abc_dwell.cert", sys), std::nullopt, small());
        CHECK(rep.verdict.is_valid());
        CHECK(rep.mu == 2);
        CHECK(rep.lambda.at("C") == 1);
        Poly2 vc = Poly2::mono(1, 2, 0) + Poly2::mono(1, 0, 2);
        CHECK(oracle::lie(vc, x1(-1), x2(-1)).c == (vc * Poly2::mono(-2, 0, 0)).c);
        CHECK(rep.bound == doctest::Approx(2.772588722239781).epsilon(1e-12));
    }

    TEST_CASE("supplied rates and mu")
    {
        auto sys = load("ex3_slow.model");
        auto given = parse_certificate("certificate { kind = multiple-dwell; mode A: V = 2*x1^2 + x2^2;"
                                       " mode B: V = x1^2 + 2*x2^2; lambda = 1/8; mu = 2; }",
                                       sys.state);
        auto rep = check_multiple_lyapunov_dwell(sys, given, std::nullopt, small());
        CHECK(rep.bound == doctest::Approx(8 * std::log(2.0)));
        CHECK(rep.verdict.is_falsified());
        CHECK(check_multiple_lyapunov_dwell(sys, given, Rational(6), small()).verdict.is_valid());

        auto too_fast = given;
        too_fast.lambda = {{"", Rational(1, 2)}};
        auto bad = check_multiple_lyapunov_dwell(sys, too_fast, std::nullopt, small());
        CHECK(bad.verdict.is_falsified());
        CHECK(std::isnan(bad.bound));

        auto small_mu = given;
        small_mu.mu = Rational(3, 2);
        auto incompatible = check_multiple_lyapunov_dwell(sys, small_mu, std::nullopt, small());
        REQUIRE(incompatible.verdict.is_falsified());
        const auto& w = incompatible.verdict.witness;
        Rational va = 2 * w.at("x1") * w.at("x1") + w.at("x2") * w.at("x2");
        Rational vb = w.at("x1") * w.at("x1") + 2 * w.at("x2") * w.at("x2");
        CHECK((va > Rational(3, 2) * vb || vb > Rational(3, 2) * va));
    }

    TEST_CASE("property: verdict agrees with the exact bound")
    {
        // 4 ln 2 to well beyond twelve digits, from the series oracle.
        const mpq_class bound = 4 * ln2_oracle();
        auto sys = load("ex3_slow.model");
        auto c = cert("ex3_dwell.cert", sys);
        for (const char* offset : {"1/1000", "1/1000000", "1/1000000000", "1/100000000000"})
            for (int sign : {1, -1}) {
                mpq_class tau = bound + sign * mpq_class(offset, 10);
                // Round to a short rational on the same side of the bound.
                mpz_class scale("1000000000000000", 10);
                mpz_class n = sign > 0 ? mpz_class(tau * scale + 1) : mpz_class(tau * scale);
                mpq_class t(n, scale);
                t.canonicalize();
                REQUIRE((sign > 0 ? t > bound : t < bound));
                CAPTURE(t.get_str());
                auto rep = check_multiple_lyapunov_dwell(sys, c, Rational(t), small());
                CHECK(rep.verdict.is_valid() == (sign > 0));
                CHECK(rep.bound == doctest::Approx(bound.get_d()).epsilon(1e-15));
            }
    }

    TEST_CASE("rejections")
    {
        auto sys = load("ex3_slow.model");
        auto c = cert("ex3_dwell.cert", sys);
        CHECK_THROWS_AS(check_multiple_lyapunov_dwell(load("ex1_arbitrary.model"), cert("ex1_common.cert", sys)),
                        std::invalid_argument);
        auto arb = sys;
        arb.mechanism = mechanism::Arbitrary{};
        CHECK_THROWS_AS(check_multiple_lyapunov_dwell(arb, c), std::invalid_argument);
        auto zero = c;
        zero.lambda = {{"", Rational(0)}};
        CHECK_THROWS_AS(check_multiple_lyapunov_dwell(sys, zero), std::invalid_argument);
        auto low_mu = c;
        low_mu.mu = Rational(1, 2);
        CHECK_THROWS_AS(check_multiple_lyapunov_dwell(sys, low_mu), std::invalid_argument);
        auto missing = c;
        missing.functions.erase("B");
        CHECK_THROWS_AS(check_multiple_lyapunov_dwell(sys, missing), std::invalid_argument);
    }

    TEST_CASE("exported obligations")
    {
        auto sys = load("ex3_slow.model");
        auto obs = lyapunov_obligations(sys, cert("ex3_dwell.cert", sys));
        std::vector<std::string> names;
        for (const auto& o : obs)
            names.push_back(o.name);
        CHECK(names == std::vector<std::string>{"lyap_pos_A", "lyap_pos_B", "lyap_decay_A", "lyap_decay_B",
                                                "lyap_compat_A_B", "lyap_compat_B_A"});
        for (const auto& o : obs) {
            CAPTURE(o.name);
            Verdict v = decide_formula(o, small());
            if (o.name.rfind("lyap_pos", 0) == 0)
                CHECK_FALSE(v.is_falsified());
            else
                CHECK(v.label() == "valid-exact");
        }
        auto ex2 = load("ex2_state.model");
        auto obs2 = lyapunov_obligations(ex2, cert("ex2_state_domain.cert", ex2));
        REQUIRE(obs2.size() == 3);
        CHECK(obs2[1].provenance.to_string() == "lyapunov(decrease(A))");
    }
}

TEST_SUITE("epsilon-delta witnesses")
{
    TEST_CASE("squared norm: spheres coincide")
    {
        auto sys = load("ex2_stripped.model");
        sys.mechanism = mechanism::Arbitrary{};
        auto c = common("x1^2 + x2^2", sys);
        WitnessConfig cfg;
        cfg.trajectories = 4;
        cfg.exec.horizon = 1;
        auto w = delta_witness(sys, c, 1.0, cfg);
        CHECK(w.k == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(w.delta == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(w.delta <= 1.0);
    }

    TEST_CASE("shared function: delta inside the ball, monotone in epsilon")
    {
        auto sys = load("ex1_arbitrary.model");
        auto c = cert("ex1_common.cert", sys);
        WitnessConfig cfg;
        cfg.exec.horizon = 5;
        double previous = 0;
        for (double eps : {0.25, 0.5, 1.0, 2.0}) {
            CAPTURE(eps);
            auto w = delta_witness(sys, c, eps, cfg);
            CHECK(w.delta > 0);
            CHECK(w.delta < eps);
            CHECK(w.delta >= previous);
            CHECK(w.sane);
            CHECK(w.trajectories == 100);
            CHECK(w.max_norm < eps);
            previous = w.delta;
        }
        // Oracle: k is the minimum of V on the unit circle, x2 = ±1.
        auto w = delta_witness(sys, c, 1.0, cfg);
        CHECK(w.k == doctest::Approx(0.25).epsilon(1e-9));
        // Along x1 the level x1²/2 = 1/4 is reached at 1/√2.
        CHECK(w.delta <= 1 / std::sqrt(2.0) + 1e-12);
    }

    TEST_CASE("parallel equals serial")
    {
        auto sys = load("ex3_slow.model");
        auto c = cert("ex3_dwell.cert", sys);
        WitnessConfig cfg;
        cfg.trajectories = 24;
        cfg.exec.horizon = 8;
        auto a = delta_witness(sys, c, 1.0, cfg);
        auto b = delta_witness_serial(sys, c, 1.0, cfg);
        CHECK(a.k == b.k);
        CHECK(a.delta == b.delta);
        CHECK(a.max_norm == b.max_norm);
        CHECK(a.sane);
    }

    TEST_CASE("rejections")
    {
        auto sys = load("ex1_arbitrary.model");
        CHECK_THROWS_AS(delta_witness(sys, cert("ex1_common.cert", sys), 0.0), std::invalid_argument);
        CHECK_THROWS_AS(delta_witness(sys, common("x1^2", sys), 1.0), std::runtime_error);
        CHECK_THROWS_AS(delta_witness(sys, common("x1^2 - x2^2", sys), 1.0), std::runtime_error);
    }

    TEST_CASE("property: V is nonincreasing along sampled trajectories")
    {
        const std::pair<const char*, const char*> cases[] = {{"ex1_common.cert", "ex1_arbitrary.model"},
                                                              {"ex2_state_domain.cert", "ex2_state.model"}};
        for (const auto& [cn, mn] : cases) {
            CAPTURE(cn);
            auto sys = load(mn);
            auto c = cert(cn, sys);
            REQUIRE(check_common_lyapunov(sys, c, small()).verdict.is_valid());
            WitnessConfig cfg;
            cfg.trajectories = 0;
            auto w = delta_witness(sys, c, 1.0, cfg);
            CompiledTerm v(c.function("").rebase(sys.state), *sys.state);
            ExecConfig ec;
            ec.horizon = 6;
            for (std::uint64_t i = 0; i < 100; ++i) {
                auto x0 = ball_point(2, w.delta / 2, 1000 + i);
                REQUIRE(norm(x0) < w.delta / 2);
                auto s = sample_signal(sys, x0, ec, 1000 + i);
                ExecConfig run = ec;
                run.horizon = s.horizon;
                if (s.horizon <= 0)
                    continue;
                auto t = simulate_signal(sys, s.signal, x0, run);
                for (std::size_t k = 1; k < t.samples.size(); ++k)
                    REQUIRE(v.eval(t.samples[k].state) <= v.eval(t.samples[k - 1].state) + 1e-4);
            }
        }
    }

    TEST_CASE("property: multiple functions respect the switching envelope")
    {
        auto sys = load("ex3_slow.model");
        auto c = cert("ex3_dwell.cert", sys);
        auto rep = check_multiple_lyapunov_dwell(sys, c, std::nullopt, small());
        REQUIRE(rep.verdict.is_valid());
        const double mu = to_double(rep.mu);
        std::vector<CompiledTerm> v;
        for (const auto& m : sys.modes)
            v.emplace_back(c.function(m.id).rebase(sys.state), *sys.state);
        WitnessConfig cfg;
        cfg.trajectories = 0;
        auto w = delta_witness(sys, c, 1.0, cfg);
        ExecConfig ec;
        ec.horizon = 12;
        for (std::uint64_t i = 0; i < 100; ++i) {
            auto x0 = ball_point(2, w.delta / 2, 2000 + i);
            auto s = sample_signal(sys, x0, ec, 2000 + i);
            ExecConfig run = ec;
            run.horizon = s.horizon;
            auto t = simulate_signal(sys, s.signal, x0, run);
            double start = v[t.samples.front().mode].eval(t.samples.front().state);
            for (std::size_t k = 1; k < t.samples.size(); ++k) {
                const auto& a = t.samples[k - 1];
                const auto& b = t.samples[k];
                double before = v[a.mode].eval(b.state);
                double after = v[b.mode].eval(b.state);
                REQUIRE(before <= v[a.mode].eval(a.state) + 1e-4);
                REQUIRE(after <= mu * before + 1e-4);
                // Slow switching never lets the active function exceed its
                // initial value.
                REQUIRE(after <= start + 1e-4);
            }
        }
    }
}
