#include "rdsym/eval.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace rdsym {

std::string to_string(Zero z)
{
    switch (z) {
        case Zero::ProvedZero: return "PROVED_ZERO";
        case Zero::ProbedZero: return "PROBED_ZERO";
        case Zero::NonZero: return "NONZERO";
    }
    return "?";
}

namespace {

std::uint64_t fnv64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull)
{
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b)
{
    a ^= b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2);
    a ^= a >> 33;
    a *= 0xff51afd7ed558ccdull;
    a ^= a >> 33;
    return a;
}

}  // namespace

ProbePoint::ProbePoint(const SymbolTable& tab, const SamplingDomain& dom, int index,
                       std::uint64_t salt)
    : tab_(tab), dom_(dom), index_(index), salt_(salt)
{
}

Rational ProbePoint::draw(const SamplingDomain::Range& r, const std::string& key) const
{
    std::uint64_t h = mix(mix(dom_.seed, fnv64(key)), static_cast<std::uint64_t>(index_) + salt_);
    if (!r.choices.empty()) return r.choices[h % r.choices.size()];
    // rational grid with denominator 64 inside [lo, hi]
    Rational span = r.hi - r.lo;
    if (span <= 0) throw DomainError("unsampleable domain for " + key + " (empty range)");
    Rational scaled = span * 64;
    Integer steps_i = numerator(scaled) / denominator(scaled);
    long long steps = steps_i.template convert_to<long long>();
    if (steps < 1) steps = 1;
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::uint64_t hh = mix(h, static_cast<std::uint64_t>(attempt));
        Rational val = r.lo + Rational(static_cast<long long>(hh % static_cast<std::uint64_t>(steps + 1)), 64);
        if (r.exclude_zero && val == 0) continue;
        if (r.exclude_zero && val > Rational(-1, 8) && val < Rational(1, 8)) continue;
        return val;
    }
    throw DomainError("unsampleable domain for " + key);
}

Rational ProbePoint::symbol_value(SymbolId s) const
{
    auto it = dom_.ranges.find(s);
    const SymbolInfo& info = tab_.info(s);
    const SamplingDomain::Range* r;
    if (it != dom_.ranges.end())
        r = &it->second;
    else if (info.kind == SymKind::Parameter)
        r = &dom_.default_param;
    else if (info.kind == SymKind::Jet && !info.multi.empty())
        r = &dom_.default_jet;
    else if (info.kind == SymKind::Jet)
        r = &dom_.default_symbol;  // u, v themselves: positive range
    else
        r = &dom_.default_symbol;
    return draw(*r, info.name);
}

Rational ProbePoint::indeterminate_value(const std::string& key) const
{
    return draw(dom_.default_indeterminate, key);
}

namespace {

struct NotExact {
};

}  // namespace

double ProbePoint::value_of(const Expr& e) const
{
    switch (e.kind()) {
        case Kind::Num: return to_double(e.num());
        case Kind::Sym: return to_double(symbol_value(e.sym()));
        case Kind::Add: {
            double s = 0;
            for (const auto& k : e.kids()) s += value_of(k);
            return s;
        }
        case Kind::Mul: {
            double p = 1;
            for (const auto& k : e.kids()) p *= value_of(k);
            return p;
        }
        case Kind::Pow: return std::pow(value_of(e.base()), value_of(e.expo()));
        case Kind::Exp: return std::exp(value_of(e.arg()));
        case Kind::Log: return std::log(value_of(e.arg()));
        case Kind::Sin: return std::sin(value_of(e.arg()));
        case Kind::Cos: return std::cos(value_of(e.arg()));
        case Kind::Fun: {
            std::ostringstream key;
            key << "F:" << tab_.opaque(e.fn_id()).name << ":" << e.deriv_order() << ":"
                << to_string(tab_, e.arg());
            return to_double(indeterminate_value(key.str()));
        }
        case Kind::Atom: {
            const DeclaredFunction& d = tab_.declared(e.fn_id());
            if (d.evaluator && e.multi().empty()) {
                auto lookup = [this](SymbolId s) { return to_double(symbol_value(s)); };
                return d.evaluator(lookup);
            }
            std::string key = "A:" + d.name + tab_.jet_suffix(e.multi());
            return to_double(indeterminate_value(key));
        }
    }
    return 0;
}

std::optional<Rational> ProbePoint::exact_value(const Expr& e) const
{
    try {
        std::function<Rational(const Expr&)> go = [&](const Expr& x) -> Rational {
            switch (x.kind()) {
                case Kind::Num: return x.num();
                case Kind::Sym: return symbol_value(x.sym());
                case Kind::Add: {
                    Rational s = 0;
                    for (const auto& k : x.kids()) s += go(k);
                    return s;
                }
                case Kind::Mul: {
                    Rational p = 1;
                    for (const auto& k : x.kids()) p *= go(k);
                    return p;
                }
                case Kind::Pow: {
                    if (!x.expo().is_int()) throw NotExact{};
                    Integer n = numerator(x.expo().num());
                    if (n > 64 || n < -64) throw NotExact{};
                    long long k = n.template convert_to<long long>();
                    Rational b = go(x.base());
                    if (b == 0 && k <= 0) throw DomainError("0^negative during probing");
                    Rational r = 1;
                    for (long long i = 0; i < std::llabs(k); ++i) r *= b;
                    if (k < 0) r = Rational(1) / r;
                    return r;
                }
                case Kind::Atom: {
                    const DeclaredFunction& d = tab_.declared(x.fn_id());
                    if (d.evaluator) throw NotExact{};
                    return indeterminate_value("A:" + d.name + tab_.jet_suffix(x.multi()));
                }
                case Kind::Fun: {
                    std::ostringstream key;
                    key << "F:" << tab_.opaque(x.fn_id()).name << ":" << x.deriv_order() << ":"
                        << to_string(tab_, x.arg());
                    return indeterminate_value(key.str());
                }
                default: throw NotExact{};
            }
        };
        return go(e);
    } catch (const NotExact&) {
        return std::nullopt;
    }
}

double ProbePoint::magnitude_of(const Expr& e) const
{
    double mag = 0;
    for (const auto& t : terms_of(e)) mag += std::abs(value_of(t));
    return mag;
}

std::map<std::string, Rational> ProbePoint::describe(const Expr& e) const
{
    std::map<std::string, Rational> out;
    for (SymbolId s : free_symbols(e)) out[tab_.name(s)] = symbol_value(s);
    return out;
}

ZeroVerdict is_zero(const SymbolTable& tab, const Expr& e, const SamplingDomain& dom)
{
    ZeroVerdict v;
    if (e.is_zero()) {
        v.kind = Zero::ProvedZero;
        return v;
    }
    Expr n = normalize(tab, e);
    if (n.is_zero()) {
        v.kind = Zero::ProvedZero;
        return v;
    }
    for (int i = 0; i < dom.probes; ++i) {
        v.probes_run = i + 1;
        bool handled = false;
        for (std::uint64_t salt = 0; salt < 16 && !handled; ++salt) {
            ProbePoint ps(tab, dom, i, salt * 7919);
            try {
                if (auto exact = ps.exact_value(n)) {
                    if (*exact != 0) {
                        v.kind = Zero::NonZero;
                        v.witness = ps.describe(n);
                        v.witness_value = to_double(*exact);
                        return v;
                    }
                    handled = true;
                    break;
                }
            } catch (const DomainError&) {
                continue;  // unlucky draw (e.g. zero denominator); redraw
            }
            double val = ps.value_of(n);
            double mag = ps.magnitude_of(n);
            if (!std::isfinite(val) || !std::isfinite(mag)) continue;
            double rel = std::abs(val) / std::max(1.0, mag);
            if (rel > dom.rel_tol) {
                v.kind = Zero::NonZero;
                v.witness = ps.describe(n);
                v.witness_value = val;
                return v;
            }
            handled = true;
        }
        if (!handled)
            throw DomainError("expression not finite on the sampling domain");
    }
    v.kind = Zero::ProbedZero;
    return v;
}

}  // namespace rdsym
