#include "rdsym/expr.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace rdsym {

namespace {

std::size_t hash_combine(std::size_t h, std::size_t v)
{
    return h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
}

std::size_t hash_rational(const Rational& q)
{
    std::hash<std::string> hs;
    return hs(to_string(q));
}

std::size_t node_hash(const Expr::Node& n)
{
    std::size_t h = static_cast<std::size_t>(n.kind) * 0x100000001b3ull;
    switch (n.kind) {
        case Kind::Num: h = hash_combine(h, hash_rational(n.num)); break;
        case Kind::Sym: h = hash_combine(h, n.sym); break;
        case Kind::Fun:
            h = hash_combine(h, n.fn);
            h = hash_combine(h, static_cast<std::size_t>(n.deriv_order));
            break;
        case Kind::Atom:
            h = hash_combine(h, n.fn);
            for (SymbolId s : n.multi) h = hash_combine(h, s);
            break;
        default: break;
    }
    for (const Expr& k : n.kids) h = hash_combine(h, k.hash());
    return h;
}

}  // namespace

Expr make_node(Expr::Node&& n)
{
    n.hash = node_hash(n);
    struct Access : Expr {
        explicit Access(std::shared_ptr<const Node> p) : Expr(std::move(p)) {}
    };
    return Access(std::make_shared<const Expr::Node>(std::move(n)));
}

std::shared_ptr<const Expr::Node> Expr::zero_node()
{
    static const std::shared_ptr<const Node> z = [] {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Num;
        n->num = 0;
        n->hash = node_hash(*n);
        return n;
    }();
    return z;
}

int Expr::compare(const Expr& a, const Expr& b)
{
    if (a.node_ == b.node_) return 0;
    if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
    switch (a.kind()) {
        case Kind::Num: {
            if (a.num() == b.num()) return 0;
            return a.num() < b.num() ? -1 : 1;
        }
        case Kind::Sym:
            if (a.sym() != b.sym()) return a.sym() < b.sym() ? -1 : 1;
            return 0;
        case Kind::Fun:
            if (a.fn_id() != b.fn_id()) return a.fn_id() < b.fn_id() ? -1 : 1;
            if (a.deriv_order() != b.deriv_order())
                return a.deriv_order() < b.deriv_order() ? -1 : 1;
            break;
        case Kind::Atom: {
            if (a.fn_id() != b.fn_id()) return a.fn_id() < b.fn_id() ? -1 : 1;
            const auto& ma = a.multi();
            const auto& mb = b.multi();
            if (ma.size() != mb.size()) return ma.size() < mb.size() ? -1 : 1;
            for (std::size_t i = 0; i < ma.size(); ++i)
                if (ma[i] != mb[i]) return ma[i] < mb[i] ? -1 : 1;
            break;
        }
        default: break;
    }
    const auto& ka = a.kids();
    const auto& kb = b.kids();
    if (ka.size() != kb.size()) return ka.size() < kb.size() ? -1 : 1;
    for (std::size_t i = 0; i < ka.size(); ++i) {
        int c = compare(ka[i], kb[i]);
        if (c != 0) return c;
    }
    return 0;
}

// -- raw builders (assume children already canonical) ---------------------------

namespace {

const Expr& const_zero()
{
    static const Expr z = Expr();
    return z;
}

const Expr& const_one()
{
    static const Expr o = num(1);
    return o;
}

Expr raw(Kind k, std::vector<Expr> kids)
{
    Expr::Node n;
    n.kind = k;
    n.kids = std::move(kids);
    return make_node(std::move(n));
}

Expr raw_atom(std::uint32_t decl, std::vector<SymbolId> multi)
{
    Expr::Node n;
    n.kind = Kind::Atom;
    n.fn = decl;
    n.multi = std::move(multi);
    return make_node(std::move(n));
}

Expr raw_add(std::vector<Expr> terms)
{
    if (terms.empty()) return const_zero();
    if (terms.size() == 1) return terms[0];
    return raw(Kind::Add, std::move(terms));
}

Expr raw_mul(const Rational& coeff, std::vector<Expr> factors)
{
    if (coeff == 0) return const_zero();
    if (factors.empty()) return num(coeff);
    if (coeff != 1) {
        std::vector<Expr> kids;
        kids.reserve(factors.size() + 1);
        kids.push_back(num(coeff));
        for (auto& f : factors) kids.push_back(std::move(f));
        return raw(Kind::Mul, std::move(kids));
    }
    if (factors.size() == 1) return factors[0];
    return raw(Kind::Mul, std::move(factors));
}

bool int_fits(const Rational& q, long long& out)
{
    if (!is_integer(q)) return false;
    const Integer& n = numerator(q);
    if (n > std::numeric_limits<long long>::max() || n < std::numeric_limits<long long>::min())
        return false;
    out = n.template convert_to<long long>();
    return true;
}

}  // namespace

Expr num(Rational q)
{
    if (q == 0) return const_zero();
    Expr::Node n;
    n.kind = Kind::Num;
    n.num = std::move(q);
    return make_node(std::move(n));
}

Expr num(long long v) { return num(Rational(v)); }
Expr num(long long p, long long q) { return num(Rational(p) / q); }

Expr sym(SymbolId id)
{
    Expr::Node n;
    n.kind = Kind::Sym;
    n.sym = id;
    return make_node(std::move(n));
}

std::pair<Rational, Expr> coeff_split(const Expr& term)
{
    if (term.is_num()) return {term.num(), const_one()};
    if (term.kind() == Kind::Mul && term.kids()[0].is_num()) {
        std::vector<Expr> rest(term.kids().begin() + 1, term.kids().end());
        return {term.kids()[0].num(), raw_mul(1, std::move(rest))};
    }
    return {Rational(1), term};
}

std::vector<Expr> terms_of(const Expr& e)
{
    if (e.kind() == Kind::Add) return e.kids();
    if (e.is_zero()) return {};
    return {e};
}

std::vector<Expr> factors_of(const Expr& e)
{
    if (e.kind() == Kind::Mul) return e.kids();
    return {e};
}

Expr add(std::vector<Expr> in)
{
    std::map<Expr, Rational, Expr::Less> acc;
    Rational constant = 0;
    std::vector<const Expr*> stack;
    std::vector<Expr> flat;
    for (auto& e : in) {
        if (e.kind() == Kind::Add)
            for (const auto& k : e.kids()) flat.push_back(k);
        else
            flat.push_back(e);
    }
    for (const auto& t : flat) {
        if (t.is_zero()) continue;
        auto [c, m] = coeff_split(t);
        if (m.is_one()) {
            constant += c;
            continue;
        }
        auto it = acc.find(m);
        if (it == acc.end())
            acc.emplace(m, c);
        else
            it->second += c;
    }
    std::vector<Expr> out;
    out.reserve(acc.size() + 1);
    if (constant != 0) out.push_back(num(constant));
    for (const auto& [m, c] : acc) {
        if (c == 0) continue;
        if (c == 1)
            out.push_back(m);
        else if (m.kind() == Kind::Mul)
            out.push_back(raw_mul(c, std::vector<Expr>(
                                         m.kids().begin() + (m.kids()[0].is_num() ? 1 : 0),
                                         m.kids().end())));
        else
            out.push_back(raw_mul(c, {m}));
    }
    std::sort(out.begin(), out.end(), Expr::Less{});
    return raw_add(std::move(out));
}

Expr add(const Expr& a, const Expr& b) { return add(std::vector<Expr>{a, b}); }
Expr neg(const Expr& a) { return mul(num(-1), a); }
Expr sub(const Expr& a, const Expr& b) { return add(a, neg(b)); }

namespace {

// base^exponent view of a factor
std::pair<Expr, Expr> pow_split(const Expr& f)
{
    if (f.kind() == Kind::Pow) return {f.base(), f.expo()};
    return {f, const_one()};
}

constexpr int kMaxMulDepth = 64;

Expr mul_impl(std::vector<Expr> in, int depth)
{
    if (depth > kMaxMulDepth) throw RdsymError("normalization recursion limit exceeded");

    std::vector<Expr> flat;
    for (auto& e : in) {
        if (e.kind() == Kind::Mul)
            for (const auto& k : e.kids()) flat.push_back(k);
        else
            flat.push_back(e);
    }

    Rational coeff = 1;
    std::vector<Expr> factors;
    std::size_t add_at = static_cast<std::size_t>(-1);
    for (auto& f : flat) {
        if (f.is_num()) {
            coeff *= f.num();
            if (coeff == 0) return const_zero();
        } else {
            if (f.kind() == Kind::Add && add_at == static_cast<std::size_t>(-1))
                add_at = factors.size();
            factors.push_back(std::move(f));
        }
    }
    if (coeff == 0) return const_zero();

    // Distribute over the first sum found, recursing on each term.
    if (add_at != static_cast<std::size_t>(-1)) {
        const Expr sum = factors[add_at];
        std::vector<Expr> rest;
        rest.reserve(factors.size());
        for (std::size_t i = 0; i < factors.size(); ++i)
            if (i != add_at) rest.push_back(factors[i]);
        std::vector<Expr> terms;
        terms.reserve(sum.kids().size());
        for (const auto& t : sum.kids()) {
            std::vector<Expr> prod = rest;
            prod.push_back(t);
            prod.push_back(num(coeff));
            terms.push_back(mul_impl(std::move(prod), depth + 1));
        }
        return add(std::move(terms));
    }

    // Merge factors sharing a base; collect exp() arguments together.
    std::map<Expr, Expr, Expr::Less> bases;
    std::vector<Expr> exp_args;
    for (const auto& f : factors) {
        if (f.kind() == Kind::Exp) {
            exp_args.push_back(f.arg());
            continue;
        }
        auto [b, e] = pow_split(f);
        auto it = bases.find(b);
        if (it == bases.end())
            bases.emplace(std::move(b), std::move(e));
        else
            it->second = add(it->second, e);
    }

    std::vector<Expr> rebuilt;
    bool reprocess = false;
    for (const auto& [b, e] : bases) {
        if (e.is_zero()) continue;
        Expr f = pow(b, e);
        if (f.is_num()) {
            coeff *= f.num();
            if (coeff == 0) return const_zero();
            continue;
        }
        if (f.kind() == Kind::Mul || f.kind() == Kind::Add || f.kind() == Kind::Exp)
            reprocess = true;
        rebuilt.push_back(std::move(f));
    }
    if (!exp_args.empty()) {
        Expr e = exp_(add(std::move(exp_args)));
        if (e.is_num())
            coeff *= e.num();
        else
            rebuilt.push_back(std::move(e));
    }
    if (reprocess) {
        rebuilt.push_back(num(coeff));
        return mul_impl(std::move(rebuilt), depth + 1);
    }
    std::sort(rebuilt.begin(), rebuilt.end(), Expr::Less{});
    return raw_mul(coeff, std::move(rebuilt));
}

}  // namespace

Expr mul(std::vector<Expr> factors) { return mul_impl(std::move(factors), 0); }
Expr mul(const Expr& a, const Expr& b) { return mul(std::vector<Expr>{a, b}); }
Expr mul(const Expr& a, const Expr& b, const Expr& c) { return mul(std::vector<Expr>{a, b, c}); }
Expr mul(const Expr& a, const Expr& b, const Expr& c, const Expr& d)
{
    return mul(std::vector<Expr>{a, b, c, d});
}
Expr div(const Expr& a, const Expr& b) { return mul(a, pow(b, num(-1))); }

Expr pow(const Expr& base, long long k) { return pow(base, num(k)); }

Expr pow(const Expr& b, const Expr& e)
{
    if (e.is_zero()) return const_one();
    if (e.is_one()) return b;
    if (b.is_num()) {
        if (b.num() == 0) {
            if (e.is_num()) {
                if (e.num() > 0) return const_zero();
                throw DomainError("0 raised to a non-positive power");
            }
            // symbolic exponent over zero base: keep the node
        } else if (b.num() == 1) {
            return const_one();
        } else {
            long long k = 0;
            if (e.is_num() && int_fits(e.num(), k) && k > -256 && k < 256) {
                Integer pn = numerator(b.num());
                Integer pd = denominator(b.num());
                bool invert = k < 0;
                unsigned long long kk = invert ? -k : k;
                Integer rn = boost::multiprecision::pow(pn, static_cast<unsigned>(kk));
                Integer rd = boost::multiprecision::pow(pd, static_cast<unsigned>(kk));
                Rational r(rn, rd);
                if (invert) {
                    if (r == 0) throw DomainError("0 raised to a negative power");
                    r = Rational(1) / r;
                }
                return num(r);
            }
        }
    }
    if (b.kind() == Kind::Exp) return exp_(mul(b.arg(), e));
    if (b.kind() == Kind::Pow && e.is_int()) return pow(b.base(), mul(b.expo(), e));
    if (b.kind() == Kind::Mul && e.is_int()) {
        std::vector<Expr> out;
        out.reserve(b.kids().size());
        for (const auto& k : b.kids()) out.push_back(pow(k, e));
        return mul(std::move(out));
    }
    long long k = 0;
    if (b.kind() == Kind::Add && e.is_num() && int_fits(e.num(), k) && k > 1 && k <= 8) {
        Expr acc = b;
        for (long long i = 1; i < k; ++i) acc = mul(acc, b);
        return acc;
    }
    // canonicalize even cosine powers: cos^2 = 1 - sin^2 (makes rotation
    // determinants and Pythagorean cancellations provable)
    if (b.kind() == Kind::Cos && e.is_num() && int_fits(e.num(), k) && k >= 2) {
        Expr s2 = sub(const_one(), pow(sin_(b.arg()), 2));
        Expr out = pow(s2, k / 2);
        if (k % 2 != 0) out = mul(out, b);
        return out;
    }
    return raw(Kind::Pow, {b, e});
}

Expr exp_(const Expr& a)
{
    if (a.is_zero()) return const_one();
    if (a.kind() == Kind::Log) return a.arg();
    return raw(Kind::Exp, {a});
}

Expr log_(const Expr& a)
{
    if (a.is_one()) return const_zero();
    if (a.kind() == Kind::Exp) return a.arg();
    if (a.is_zero()) throw DomainError("log of zero");
    if (a.kind() == Kind::Mul) {
        // split exponential factors: log(exp(s) * w) = s + log(w)
        std::vector<Expr> expo, rest;
        for (const auto& k : a.kids()) {
            if (k.kind() == Kind::Exp)
                expo.push_back(k.arg());
            else
                rest.push_back(k);
        }
        if (!expo.empty()) {
            Expr w = mul(std::move(rest));
            return add(add(std::move(expo)), log_(w));
        }
    }
    return raw(Kind::Log, {a});
}

Expr sin_(const Expr& a)
{
    if (a.is_zero()) return const_zero();
    return raw(Kind::Sin, {a});
}

Expr cos_(const Expr& a)
{
    if (a.is_zero()) return const_one();
    return raw(Kind::Cos, {a});
}

Expr fun(std::uint32_t fn_id, const Expr& arg, int deriv_order)
{
    Expr::Node n;
    n.kind = Kind::Fun;
    n.fn = fn_id;
    n.deriv_order = deriv_order;
    n.kids = {arg};
    return make_node(std::move(n));
}

// -- declared-function atoms -----------------------------------------------------

namespace {

Expr diff_multi(const SymbolTable& tab, Expr e, const std::vector<SymbolId>& multi)
{
    for (SymbolId s : multi) e = diff(tab, e, s);
    return e;
}

int total_order(const std::vector<SymbolId>& multi) { return static_cast<int>(multi.size()); }

Expr bump_atom(const SymbolTable& tab, std::uint32_t decl_id, const std::vector<SymbolId>& multi,
               SymbolId s)
{
    const DeclaredFunction& d = tab.declared(decl_id);
    auto it = d.dirs.find(s);
    if (it == d.dirs.end() || it->second.rule == DeclaredFunction::Rule::Zero)
        return const_zero();
    if (it->second.rule == DeclaredFunction::Rule::Rewrite)
        return diff_multi(tab, *it->second.rhs, multi);
    if (d.second_order_dir == s &&
        std::count(multi.begin(), multi.end(), s) >= 1) {
        std::vector<SymbolId> rest = multi;
        rest.erase(std::find(rest.begin(), rest.end(), s));
        return diff_multi(tab, *d.second_order_rhs, rest);
    }
    std::vector<SymbolId> m2 = multi;
    m2.push_back(s);
    std::sort(m2.begin(), m2.end(),
              [&tab](SymbolId a, SymbolId b) { return tab.dir_less(a, b); });
    if (total_order(m2) > d.max_order)
        throw JetOverflowError("derivative order beyond the supported jet for declared function '" +
                               d.name + "'");
    return raw_atom(decl_id, std::move(m2));
}

}  // namespace

Expr atom(const SymbolTable& tab, std::uint32_t decl_id, const std::vector<SymbolId>& multi)
{
    Expr cur = raw_atom(decl_id, {});
    for (SymbolId s : multi) cur = diff(tab, cur, s);
    return cur;
}

// -- differentiation ---------------------------------------------------------------

Expr diff(const SymbolTable& tab, const Expr& e, SymbolId s)
{
    switch (e.kind()) {
        case Kind::Num: return const_zero();
        case Kind::Sym: return e.sym() == s ? const_one() : const_zero();
        case Kind::Add: {
            std::vector<Expr> out;
            out.reserve(e.kids().size());
            for (const auto& k : e.kids()) out.push_back(diff(tab, k, s));
            return add(std::move(out));
        }
        case Kind::Mul: {
            std::vector<Expr> terms;
            const auto& ks = e.kids();
            for (std::size_t i = 0; i < ks.size(); ++i) {
                if (ks[i].is_num()) continue;
                Expr d = diff(tab, ks[i], s);
                if (d.is_zero()) continue;
                std::vector<Expr> prod;
                prod.reserve(ks.size());
                for (std::size_t j = 0; j < ks.size(); ++j) prod.push_back(j == i ? d : ks[j]);
                terms.push_back(mul(std::move(prod)));
            }
            return add(std::move(terms));
        }
        case Kind::Pow: {
            const Expr& b = e.base();
            const Expr& x = e.expo();
            Expr db = diff(tab, b, s);
            Expr dx = diff(tab, x, s);
            Expr t1 = db.is_zero()
                          ? const_zero()
                          : mul(x, pow(b, sub(x, const_one())), db);
            Expr t2 = dx.is_zero() ? const_zero() : mul(e, log_(b), dx);
            return add(t1, t2);
        }
        case Kind::Exp: return mul(e, diff(tab, e.arg(), s));
        case Kind::Log: return div(diff(tab, e.arg(), s), e.arg());
        case Kind::Sin: return mul(cos_(e.arg()), diff(tab, e.arg(), s));
        case Kind::Cos: return neg(mul(sin_(e.arg()), diff(tab, e.arg(), s)));
        case Kind::Fun: {
            Expr da = diff(tab, e.arg(), s);
            if (da.is_zero()) return const_zero();
            return mul(fun(e.fn_id(), e.arg(), e.deriv_order() + 1), da);
        }
        case Kind::Atom: return bump_atom(tab, e.fn_id(), e.multi(), s);
    }
    return const_zero();
}

// -- substitution / normalization ---------------------------------------------------

namespace {

Expr rebuild(const SymbolTable& tab, const Expr& e, const std::map<SymbolId, Expr>* bindings)
{
    switch (e.kind()) {
        case Kind::Num: return e;
        case Kind::Sym:
            if (bindings) {
                auto it = bindings->find(e.sym());
                if (it != bindings->end()) return it->second;
            }
            return e;
        case Kind::Add: {
            std::vector<Expr> out;
            out.reserve(e.kids().size());
            for (const auto& k : e.kids()) out.push_back(rebuild(tab, k, bindings));
            return add(std::move(out));
        }
        case Kind::Mul: {
            std::vector<Expr> out;
            out.reserve(e.kids().size());
            for (const auto& k : e.kids()) out.push_back(rebuild(tab, k, bindings));
            return mul(std::move(out));
        }
        case Kind::Pow:
            return pow(rebuild(tab, e.base(), bindings), rebuild(tab, e.expo(), bindings));
        case Kind::Exp: return exp_(rebuild(tab, e.arg(), bindings));
        case Kind::Log: return log_(rebuild(tab, e.arg(), bindings));
        case Kind::Sin: return sin_(rebuild(tab, e.arg(), bindings));
        case Kind::Cos: return cos_(rebuild(tab, e.arg(), bindings));
        case Kind::Fun: return fun(e.fn_id(), rebuild(tab, e.arg(), bindings), e.deriv_order());
        case Kind::Atom: return e;
    }
    return e;
}

}  // namespace

Expr substitute(const SymbolTable& tab, const Expr& e, const std::map<SymbolId, Expr>& bindings)
{
    return rebuild(tab, e, &bindings);
}

Expr normalize(const SymbolTable& tab, const Expr& e) { return rebuild(tab, e, nullptr); }

Expr substitute_atom(const SymbolTable& tab, const Expr& e, std::uint32_t decl_id,
                     const Expr& replacement)
{
    switch (e.kind()) {
        case Kind::Atom:
            if (e.fn_id() == decl_id) {
                if (!e.multi().empty())
                    throw RdsymError("cannot substitute a derivative atom of '" +
                                     tab.declared(decl_id).name + "'");
                return replacement;
            }
            return e;
        case Kind::Num:
        case Kind::Sym: return e;
        default: break;
    }
    std::vector<Expr> kids;
    kids.reserve(e.kids().size());
    for (const auto& k : e.kids()) kids.push_back(substitute_atom(tab, k, decl_id, replacement));
    switch (e.kind()) {
        case Kind::Add: return add(std::move(kids));
        case Kind::Mul: return mul(std::move(kids));
        case Kind::Pow: return pow(kids[0], kids[1]);
        case Kind::Exp: return exp_(kids[0]);
        case Kind::Log: return log_(kids[0]);
        case Kind::Sin: return sin_(kids[0]);
        case Kind::Cos: return cos_(kids[0]);
        case Kind::Fun: return fun(e.fn_id(), kids[0], e.deriv_order());
        default: return e;
    }
}

// -- queries --------------------------------------------------------------------------

namespace {

template <typename F>
void walk(const Expr& e, F&& f)
{
    f(e);
    for (const auto& k : e.kids()) walk(k, f);
}

}  // namespace

std::set<SymbolId> free_symbols(const Expr& e)
{
    std::set<SymbolId> out;
    walk(e, [&](const Expr& n) {
        if (n.kind() == Kind::Sym) out.insert(n.sym());
    });
    return out;
}

std::set<std::uint32_t> atoms_of(const Expr& e)
{
    std::set<std::uint32_t> out;
    walk(e, [&](const Expr& n) {
        if (n.kind() == Kind::Atom) out.insert(n.fn_id());
    });
    return out;
}

bool contains_symbol(const Expr& e, SymbolId s)
{
    if (e.kind() == Kind::Sym) return e.sym() == s;
    for (const auto& k : e.kids())
        if (contains_symbol(k, s)) return true;
    return false;
}

bool contains_kind(const Expr& e, Kind k)
{
    if (e.kind() == k) return true;
    for (const auto& kid : e.kids())
        if (contains_kind(kid, k)) return true;
    return false;
}

// -- printing ----------------------------------------------------------------------

namespace {

// precedence: 1 sum, 2 product, 3 power, 4 atomic
void print(const SymbolTable& tab, const Expr& e, int parent_prec, std::ostream& os);

void print_paren(const SymbolTable& tab, const Expr& e, int prec, int parent, std::ostream& os)
{
    if (prec < parent) {
        os << '(';
        print(tab, e, 1, os);
        os << ')';
    } else {
        print(tab, e, parent, os);
    }
}

void print_product(const SymbolTable& tab, const Rational& coeff, const std::vector<Expr>& factors,
                   std::ostream& os)
{
    bool first = true;
    if (coeff != 1) {
        if (coeff == -1 && !factors.empty()) {
            os << '-';
        } else {
            if (!is_integer(coeff)) os << '(' << to_string(coeff) << ')';
            else os << to_string(coeff);
            first = false;
        }
    }
    if (factors.empty() && coeff == 1) os << '1';
    for (const auto& f : factors) {
        if (!first) os << '*';
        first = false;
        print_paren(tab, f, f.kind() == Kind::Add ? 1 : (f.kind() == Kind::Mul ? 2 : 4), 2, os);
    }
}

void print(const SymbolTable& tab, const Expr& e, int parent_prec, std::ostream& os)
{
    switch (e.kind()) {
        case Kind::Num: {
            const Rational& q = e.num();
            bool needs = (q < 0 || !is_integer(q)) && parent_prec > 1;
            if (needs) os << '(';
            os << to_string(q);
            if (needs) os << ')';
            return;
        }
        case Kind::Sym: os << tab.name(e.sym()); return;
        case Kind::Add: {
            bool first = true;
            for (const auto& t : e.kids()) {
                auto [c, m] = coeff_split(t);
                if (!first) {
                    if (c < 0) {
                        os << " - ";
                        c = -c;
                    } else {
                        os << " + ";
                    }
                } else if (c < 0 && m.is_one()) {
                    // negative leading constant prints via to_string below
                } else if (c < 0) {
                    os << '-';
                    c = -c;
                }
                first = false;
                if (m.is_one()) {
                    os << to_string(c);
                } else {
                    print_product(tab, c, factors_of(m), os);
                }
            }
            if (first) os << '0';
            return;
        }
        case Kind::Mul: {
            auto [c, m] = coeff_split(e);
            print_product(tab, c, m.is_one() ? std::vector<Expr>{} : factors_of(m), os);
            return;
        }
        case Kind::Pow: {
            print_paren(tab, e.base(),
                        e.base().kind() == Kind::Sym || e.base().kind() == Kind::Fun ||
                                e.base().kind() == Kind::Atom ||
                                (e.base().is_num() && e.base().num() > 0 && e.base().is_int())
                            ? 4
                            : 0,
                        3, os);
            os << '^';
            const Expr& x = e.expo();
            bool simple = x.is_num() && x.is_int() && x.num() > 0;
            if (simple) {
                os << to_string(x.num());
            } else {
                os << '(';
                print(tab, x, 1, os);
                os << ')';
            }
            return;
        }
        case Kind::Exp: os << "exp("; print(tab, e.arg(), 1, os); os << ')'; return;
        case Kind::Log: os << "log("; print(tab, e.arg(), 1, os); os << ')'; return;
        case Kind::Sin: os << "sin("; print(tab, e.arg(), 1, os); os << ')'; return;
        case Kind::Cos: os << "cos("; print(tab, e.arg(), 1, os); os << ')'; return;
        case Kind::Fun: {
            os << tab.opaque(e.fn_id()).name;
            for (int i = 0; i < e.deriv_order(); ++i) os << '\'';
            os << '(';
            print(tab, e.arg(), 1, os);
            os << ')';
            return;
        }
        case Kind::Atom: {
            os << tab.declared(e.fn_id()).name << tab.jet_suffix(e.multi());
            return;
        }
    }
}

}  // namespace

std::string to_string(const SymbolTable& tab, const Expr& e)
{
    std::ostringstream os;
    print(tab, e, 1, os);
    return os.str();
}

}  // namespace rdsym
