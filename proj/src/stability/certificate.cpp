#include "switchkit/parser.hpp"
#include "switchkit/stability.hpp"

#include <fmt/format.h>

#include <stdexcept>

namespace switchkit {

const char* to_string(CertificateKind k)
{
    switch (k) {
    case CertificateKind::Common: return "common";
    case CertificateKind::StateDomain: return "state-domain";
    case CertificateKind::MultipleDwell: return "multiple-dwell";
    }
    return "?";
}

const Term& LyapunovCertificate::function(const std::string& mode) const
{
    auto it = functions.find(kind == CertificateKind::MultipleDwell ? mode : std::string());
    if (it == functions.end())
        throw std::invalid_argument(mode.empty() ? std::string("certificate has no V")
                                                 : "certificate has no V for mode " + mode);
    return it->second;
}

void LyapunovCertificate::validate() const
{
    if (kind == CertificateKind::MultipleDwell) {
        if (functions.empty() || functions.count(""))
            throw std::invalid_argument("multiple-dwell certificate needs one V per mode");
        if (!multipliers.empty())
            throw std::invalid_argument("multipliers apply to state-domain certificates");
    } else {
        if (functions.size() != 1 || !functions.count(""))
            throw std::invalid_argument(fmt::format("{} certificate needs exactly one shared V", to_string(kind)));
        if (!lambda.empty() || mu)
            throw std::invalid_argument("decay rates and mu apply to multiple-dwell certificates");
        if (kind == CertificateKind::Common && !multipliers.empty())
            throw std::invalid_argument("multipliers apply to state-domain certificates");
    }
    for (const auto& [key, s] : multipliers)
        if (s < 0)
            throw std::invalid_argument(fmt::format("negative multiplier for ({}, atom{})", key.first, key.second));
    for (const auto& [mode, l] : lambda)
        if (l <= 0)
            throw std::invalid_argument("decay rate must be positive");
    if (mu && *mu < 1)
        throw std::invalid_argument("mu must be at least 1");
}

namespace {

CertificateKind parse_kind(Parser& p)
{
    std::size_t at = p.peek().offset;
    std::string word = p.ident("certificate kind");
    while (p.accept(Tok::Minus))
        word += "-" + p.ident("certificate kind");
    if (word == "common")
        return CertificateKind::Common;
    if (word == "state-domain")
        return CertificateKind::StateDomain;
    if (word == "multiple-dwell")
        return CertificateKind::MultipleDwell;
    p.fail_at("unknown certificate kind '" + word + "'", at);
}

std::size_t parse_atom_index(Parser& p)
{
    std::size_t at = p.peek().offset;
    std::string word = p.ident("atom reference");
    if (word.size() > 4 && word.compare(0, 4, "atom") == 0 &&
        word.find_first_not_of("0123456789", 4) == std::string::npos) {
        std::size_t k = std::stoul(word.substr(4));
        if (k > 0)
            return k;
    }
    p.fail_at("expected atomN with N >= 1, got '" + word + "'", at);
}

} // namespace

LyapunovCertificate parse_certificate(std::string_view text, const VarListPtr& state)
{
    Parser p(text, state);
    LyapunovCertificate cert;
    bool have_kind = false;

    p.expect_word("certificate");
    p.expect(Tok::LBrace, "'{'");
    while (!p.accept(Tok::RBrace)) {
        std::size_t at = p.peek().offset;
        if (p.accept_word("kind")) {
            p.expect(Tok::Eq, "'='");
            if (have_kind)
                p.fail_at("duplicate kind", at);
            cert.kind = parse_kind(p);
            have_kind = true;
        } else if (p.accept_word("mode")) {
            std::string mode = p.ident("mode id");
            p.expect(Tok::Colon, "':'");
            p.expect_word("V");
            p.expect(Tok::Eq, "'='");
            if (!cert.functions.emplace(mode, p.term()).second)
                p.fail_at("duplicate V for mode " + mode, at);
        } else if (p.accept_word("V")) {
            p.expect(Tok::Eq, "'='");
            if (!cert.functions.emplace("", p.term()).second)
                p.fail_at("duplicate V", at);
        } else if (p.accept_word("lambda")) {
            std::string mode;
            if (p.accept(Tok::LParen)) {
                mode = p.ident("mode id");
                p.expect(Tok::RParen, "')'");
            }
            p.expect(Tok::Eq, "'='");
            if (!cert.lambda.emplace(mode, p.rational()).second)
                p.fail_at("duplicate lambda", at);
        } else if (p.accept_word("multiplier")) {
            p.expect(Tok::LParen, "'('");
            std::string mode = p.ident("mode id");
            p.expect(Tok::Comma, "','");
            std::size_t k = parse_atom_index(p);
            p.expect(Tok::RParen, "')'");
            p.expect(Tok::Eq, "'='");
            if (!cert.multipliers.emplace(std::make_pair(mode, k), p.rational()).second)
                p.fail_at("duplicate multiplier", at);
        } else if (p.accept_word("mu")) {
            p.expect(Tok::Eq, "'='");
            if (cert.mu)
                p.fail_at("duplicate mu", at);
            cert.mu = p.rational();
        } else {
            p.fail("expected kind, V, mode, lambda, multiplier or mu");
        }
        p.expect(Tok::Semi, "';'");
    }
    p.expect_end();
    if (!have_kind)
        p.fail("certificate without kind");
    try {
        cert.validate();
    } catch (const std::invalid_argument& e) {
        p.fail(e.what());
    }
    return cert;
}

std::string print_certificate(const LyapunovCertificate& cert)
{
    std::string out = fmt::format("certificate {{\n  kind = {};\n", to_string(cert.kind));
    for (const auto& [mode, v] : cert.functions) {
        if (mode.empty())
            out += fmt::format("  V = {};\n", v.to_string());
        else
            out += fmt::format("  mode {}: V = {};\n", mode, v.to_string());
    }
    for (const auto& [mode, l] : cert.lambda) {
        if (mode.empty())
            out += fmt::format("  lambda = {};\n", to_string(l));
        else
            out += fmt::format("  lambda({}) = {};\n", mode, to_string(l));
    }
    for (const auto& [key, s] : cert.multipliers)
        out += fmt::format("  multiplier({}, atom{}) = {};\n", key.first, key.second, to_string(s));
    if (cert.mu)
        out += fmt::format("  mu = {};\n", to_string(*cert.mu));
    return out + "}\n";
}

} // namespace switchkit
