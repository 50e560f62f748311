#pragma once

#include "rdsym/symbols.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace rdsym {

// Immutable symbolic expression. Every Expr is in normal form by construction:
// expanded sum of products, factors merged by base with exponents added,
// rational constants exact, commutative ordering of terms and factors.
// exp/log contraction is limited to exp(a)*exp(b) -> exp(a+b), pow(exp(a),k)
// -> exp(k*a) and log(exp(a)) -> a.

enum class Kind : std::uint8_t {
    Num,   // exact rational constant
    Sym,   // table symbol (independent, jet, parameter, free)
    Add,   // flattened n-ary sum
    Mul,   // flattened n-ary product; optional leading rational coefficient
    Pow,   // base^exponent, exponent an arbitrary Expr
    Exp,
    Log,
    Sin,
    Cos,
    Fun,   // opaque function application F^(k)(arg)
    Atom,  // declared-function jet atom: decl id + derivative multi-index
};

class Expr {
public:
    struct Node {
        Kind kind;
        Rational num;                    // Num
        SymbolId sym = kNoSymbol;        // Sym
        std::uint32_t fn = 0;            // Fun: opaque id; Atom: declared id
        int deriv_order = 0;             // Fun
        std::vector<SymbolId> multi;     // Atom
        std::vector<Expr> kids;          // Add/Mul children, Pow {base,expo}, arg of unary/Fun
        std::size_t hash = 0;
    };

    Expr() : node_(zero_node()) {}

    Kind kind() const { return node_->kind; }
    const Rational& num() const { return node_->num; }
    SymbolId sym() const { return node_->sym; }
    std::uint32_t fn_id() const { return node_->fn; }
    int deriv_order() const { return node_->deriv_order; }
    const std::vector<SymbolId>& multi() const { return node_->multi; }
    const std::vector<Expr>& kids() const { return node_->kids; }
    const Expr& base() const { return node_->kids[0]; }
    const Expr& expo() const { return node_->kids[1]; }
    const Expr& arg() const { return node_->kids[0]; }
    std::size_t hash() const { return node_->hash; }

    bool is_num() const { return kind() == Kind::Num; }
    bool is_zero() const { return is_num() && num() == 0; }
    bool is_one() const { return is_num() && num() == 1; }
    bool is_int() const { return is_num() && is_integer(num()); }

    friend bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }
    friend bool operator!=(const Expr& a, const Expr& b) { return compare(a, b) != 0; }
    static int compare(const Expr& a, const Expr& b);

    struct Less {
        bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
    };

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    static std::shared_ptr<const Node> zero_node();
    std::shared_ptr<const Node> node_;

    friend Expr make_node(Node&&);
};

// -- constructors (always return normal form) ---------------------------------
Expr num(Rational q);
Expr num(long long n);
Expr num(long long p, long long q);
Expr sym(SymbolId id);
Expr add(std::vector<Expr> terms);
Expr add(const Expr& a, const Expr& b);
Expr sub(const Expr& a, const Expr& b);
Expr neg(const Expr& a);
Expr mul(std::vector<Expr> factors);
Expr mul(const Expr& a, const Expr& b);
Expr mul(const Expr& a, const Expr& b, const Expr& c);
Expr mul(const Expr& a, const Expr& b, const Expr& c, const Expr& d);
Expr div(const Expr& a, const Expr& b);
Expr pow(const Expr& base, const Expr& expo);
Expr pow(const Expr& base, long long k);
Expr exp_(const Expr& a);
Expr log_(const Expr& a);
Expr sin_(const Expr& a);
Expr cos_(const Expr& a);
Expr fun(std::uint32_t fn_id, const Expr& arg, int deriv_order = 0);
/// Declared-function atom; applies the function's rewrite rules to reach the
/// canonical jet, so the result is not necessarily an Atom node.
Expr atom(const SymbolTable& tab, std::uint32_t decl_id, const std::vector<SymbolId>& multi = {});

inline Expr operator+(const Expr& a, const Expr& b) { return add(a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return sub(a, b); }
inline Expr operator-(const Expr& a) { return neg(a); }
inline Expr operator*(const Expr& a, const Expr& b) { return mul(a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return div(a, b); }

// -- operations ----------------------------------------------------------------
/// Exact partial derivative in jet-space coordinates: jet symbols are mutually
/// independent; opaque applications use the chain rule; declared atoms follow
/// their rewrite rules.
Expr diff(const SymbolTable& tab, const Expr& e, SymbolId s);

/// Simultaneous substitution (bindings are read against the original tree only).
Expr substitute(const SymbolTable& tab, const Expr& e, const std::map<SymbolId, Expr>& bindings);

/// Replaces the order-0 atom of a declared function by an expression (throws if a
/// derivative atom of the same function is present).
Expr substitute_atom(const SymbolTable& tab, const Expr& e, std::uint32_t decl_id,
                     const Expr& replacement);

/// Rebuild through the smart constructors. Idempotent; exposed mainly for tests.
Expr normalize(const SymbolTable& tab, const Expr& e);

/// All table symbols appearing in the tree (jet symbols included, atoms excluded).
std::set<SymbolId> free_symbols(const Expr& e);
/// Declared-function ids appearing in the tree.
std::set<std::uint32_t> atoms_of(const Expr& e);
bool contains_symbol(const Expr& e, SymbolId s);
bool contains_kind(const Expr& e, Kind k);

/// Splits a normalized term into (rational coefficient, monomial part).
std::pair<Rational, Expr> coeff_split(const Expr& term);
/// Top-level terms of a sum (the expression itself when not an Add).
std::vector<Expr> terms_of(const Expr& e);
std::vector<Expr> factors_of(const Expr& e);

std::string to_string(const SymbolTable& tab, const Expr& e);

// -- parsing --------------------------------------------------------------------
// Grammar: infix + - * / ^ with the usual precedence, ^ right-associative and
// binding tighter than unary minus; call syntax name(arg) for exp/log/sin/cos and
// registered opaque functions, with postfix apostrophes for derivative order
// (F1'(w)); identifiers [A-Za-z][A-Za-z0-9_]*; jet markers u_t, u_x1, u_x1x2;
// declared-function atoms use the same marker syntax (psi_x1).
Expr parse(std::string_view src, const SymbolTable& tab);

}  // namespace rdsym
