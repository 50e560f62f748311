#pragma once

#include "rdsym/expr.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rdsym {

/// Safe numeric ranges per symbol for randomized zero probing. Values are drawn
/// as exact rationals (denominator 64) so purely rational expressions can be
/// probed with exact arithmetic.
struct SamplingDomain {
    struct Range {
        Rational lo = Rational(1, 2);
        Rational hi = Rational(2);
        bool exclude_zero = false;
        std::vector<Rational> choices;  // when nonempty, draw from this finite set
    };

    std::map<SymbolId, Range> ranges;
    Range default_symbol{Rational(1, 2), Rational(2), false, {}};
    Range default_jet{Rational(-2), Rational(2), false, {}};
    Range default_param{Rational(-3), Rational(3), true, {}};
    Range default_indeterminate{Rational(-2), Rational(2), true, {}};

    std::uint64_t seed = 0x5eed;
    int probes = 8;
    double rel_tol = 1e-8;

    void set_range(SymbolId s, Rational lo, Rational hi, bool exclude_zero = false)
    {
        ranges[s] = Range{std::move(lo), std::move(hi), exclude_zero, {}};
    }
    void set_choices(SymbolId s, std::vector<Rational> cs)
    {
        Range r;
        r.choices = std::move(cs);
        ranges[s] = std::move(r);
    }
};

enum class Zero : std::uint8_t { ProvedZero, ProbedZero, NonZero };

struct ZeroVerdict {
    Zero kind = Zero::NonZero;
    // witness for NonZero
    std::map<std::string, Rational> witness;
    double witness_value = 0.0;
    int probes_run = 0;

    bool passed() const { return kind != Zero::NonZero; }
};

std::string to_string(Zero z);

/// Deterministic assignment of probe values for one probe point; all symbols,
/// opaque applications (per argument and derivative order) and declared atoms
/// draw consistent values keyed by (seed, probe index, name).
class ProbePoint {
public:
    ProbePoint(const SymbolTable& tab, const SamplingDomain& dom, int index, std::uint64_t salt = 0);

    Rational symbol_value(SymbolId s) const;
    Rational indeterminate_value(const std::string& key) const;
    double value_of(const Expr& e) const;
    /// Exact evaluation; nullopt when the expression contains a transcendental,
    /// an opaque/declared object with no rational value, or a non-integer power.
    std::optional<Rational> exact_value(const Expr& e) const;
    /// Sum of absolute values of the top-level terms; scale for relative tolerance.
    double magnitude_of(const Expr& e) const;

    std::map<std::string, Rational> describe(const Expr& e) const;

private:
    Rational draw(const SamplingDomain::Range& r, const std::string& key) const;
    const SymbolTable& tab_;
    const SamplingDomain& dom_;
    int index_;
    std::uint64_t salt_;
};

/// PROVED_ZERO when the normal form is the zero constant; otherwise probes the
/// expression at `dom.probes` random points and returns PROBED_ZERO when every
/// probe vanishes within the relative tolerance, NONZERO with a witness otherwise.
ZeroVerdict is_zero(const SymbolTable& tab, const Expr& e, const SamplingDomain& dom);

}  // namespace rdsym
