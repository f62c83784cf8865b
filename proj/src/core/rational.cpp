#include "switchkit/rational.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace switchkit {

namespace {

bool all_digits(std::string_view s)
{
    if (s.empty())
        return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            return false;
    return true;
}

Rational pow10(long e)
{
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(e < 0 ? -e : e));
    return e < 0 ? Rational(mpz_class(1), p) : Rational(p);
}

} // namespace

Rational parse_rational(std::string_view text)
{
    std::string_view s = text;
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    if (s.empty())
        throw std::invalid_argument("empty rational literal");

    Rational value;
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        auto num = s.substr(0, slash);
        auto den = s.substr(slash + 1);
        if (!all_digits(num) || !all_digits(den))
            throw std::invalid_argument("malformed rational literal '" + std::string(text) + "'");
        mpz_class n{std::string(num), 10}, d{std::string(den), 10};
        if (d == 0)
            throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
        value = Rational(n, d);
        value.canonicalize();
    } else {
        std::string_view mantissa = s;
        long exponent = 0;
        if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
            mantissa = s.substr(0, e);
            auto exp_text = s.substr(e + 1);
            bool exp_negative = false;
            if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
                exp_negative = exp_text.front() == '-';
                exp_text.remove_prefix(1);
            }
            if (!all_digits(exp_text) || exp_text.size() > 6)
                throw std::invalid_argument("malformed exponent in '" + std::string(text) + "'");
            exponent = std::stol(std::string(exp_text));
            if (exp_negative)
                exponent = -exponent;
        }
        std::string digits;
        long scale = 0;
        if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
            auto whole = mantissa.substr(0, dot);
            auto frac = mantissa.substr(dot + 1);
            if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac)) ||
                (whole.empty() && frac.empty()))
                throw std::invalid_argument("malformed decimal literal '" + std::string(text) + "'");
            digits = std::string(whole) + std::string(frac);
            scale = static_cast<long>(frac.size());
        } else {
            if (!all_digits(mantissa))
                throw std::invalid_argument("malformed rational literal '" + std::string(text) + "'");
            digits = std::string(mantissa);
        }
        value = Rational(mpz_class(digits, 10)) * pow10(exponent - scale);
        value.canonicalize();
    }
    return negative ? Rational(-value) : value;
}

std::string to_string(const Rational& q)
{
    if (q.get_den() == 1)
        return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

double to_double(const Rational& q) { return q.get_d(); }

Rational from_double(double x)
{
    if (!std::isfinite(x))
        throw std::invalid_argument("cannot convert non-finite double to rational");
    Rational q;
    mpq_set_d(q.get_mpq_t(), x);
    return q;
}

Rational snap(double x, long max_den)
{
    if (!std::isfinite(x))
        throw std::invalid_argument("cannot snap non-finite double");
    if (max_den < 1)
        max_den = 1;
    Rational target = from_double(x);

    // Convergents h/k of the continued fraction of target.
    mpz_class h_prev = 1, h = 0, k_prev = 0, k = 1;
    Rational rest = target;
    Rational best = Rational(mpz_class(0));
    bool have_best = false;
    for (int iter = 0; iter < 128; ++iter) {
        mpz_class a;
        mpz_fdiv_q(a.get_mpz_t(), rest.get_num_mpz_t(), rest.get_den_mpz_t());
        mpz_class h_next = a * h_prev + h;
        mpz_class k_next = a * k_prev + k;
        if (k_next > max_den) {
            // Largest semiconvergent that respects the bound.
            mpz_class t = (mpz_class(max_den) - k) / k_prev;
            if (t > 0) {
                Rational semi(t * h_prev + h, t * k_prev + k);
                semi.canonicalize();
                if (!have_best || abs(semi - target) < abs(best - target))
                    best = semi;
            }
            return best;
        }
        h = h_prev;
        k = k_prev;
        h_prev = h_next;
        k_prev = k_next;
        best = Rational(h_prev, k_prev);
        best.canonicalize();
        have_best = true;
        Rational frac = rest - Rational(a);
        if (frac == 0)
            return best;
        rest = 1 / frac;
    }
    return best;
}

} // namespace switchkit
