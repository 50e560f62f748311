#pragma once

#include "rdsym/rational.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdsym {

class Expr;

using SymbolId = std::uint32_t;
constexpr SymbolId kNoSymbol = static_cast<SymbolId>(-1);

enum class SymKind : std::uint8_t {
    Independent,  // t, x1..xm
    Jet,          // u, v and their derivative coordinates (base + multi-index)
    Parameter,    // a, nu, eps, ...
    Free,         // ad-hoc names (CLI scratch symbols, d_* basis tokens)
};

struct SymbolInfo {
    std::string name;
    SymKind kind = SymKind::Free;
    SymbolId base = kNoSymbol;     // for Jet: the order-0 jet of the same dependent
    std::vector<SymbolId> multi;   // for Jet: sorted derivative directions
};

struct RdsymError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : RdsymError {
    ParseError(const std::string& msg, std::size_t offset)
        : RdsymError(msg + " (at byte " + std::to_string(offset) + ")"), offset(offset)
    {
    }
    std::size_t offset;
};

struct UnknownSymbolError : RdsymError {
    explicit UnknownSymbolError(const std::string& id)
        : RdsymError("unknown symbol '" + id + "'"), identifier(id)
    {
    }
    std::string identifier;
};

struct JetOverflowError : RdsymError {
    using RdsymError::RdsymError;
};

struct DomainError : RdsymError {
    using RdsymError::RdsymError;
};

/// An "arbitrary function" of one scalar argument, e.g. the F^1, F^2 of the
/// classification tables. Applications carry a derivative order; F, F', F''
/// at the same argument are independent indeterminates for zero testing.
struct OpaqueFunction {
    std::string name;
};

/// A declared special function of (t, x, u, v) with rewrite rules for some of
/// its partial derivatives (heat-type psi, Laplace-type Psi, polar angle z,
/// determining-equation unknowns, ...). Derivatives not covered by a rule are
/// kept as canonical jet atoms of the function itself.
struct DeclaredFunction {
    enum class Rule : std::uint8_t { Zero, Bump, Rewrite };

    struct DirRule {
        Rule rule = Rule::Zero;
        std::shared_ptr<const Expr> rhs;  // for Rewrite: d(atom)/d(dir) as an Expr
    };

    std::string name;
    std::map<SymbolId, DirRule> dirs;
    // Optional second-order rule: bumping direction `first` twice rewrites to `second`
    // (e.g. Laplace-type Psi_xx -> mu*Psi at m=1).
    SymbolId second_order_dir = kNoSymbol;
    std::shared_ptr<const Expr> second_order_rhs;
    int max_order = 3;
    // Concrete numeric evaluator (e.g. z = atan2(v,u)); when absent the atom is an
    // independent indeterminate during probing.
    std::function<double(const std::function<double(SymbolId)>&)> evaluator;
};

/// Registry of every name the expression kernel may see. Mutable until freeze(),
/// immutable (and safe to share across threads) afterwards.
class SymbolTable {
public:
    SymbolTable() = default;

    // -- setup (before freeze) ------------------------------------------------
    /// Registers t, x1..xm, u, v and all jet coordinates up to max_jet_order.
    void init_standard(int m, int max_jet_order = 4);

    SymbolId register_parameter(const std::string& name);
    SymbolId register_free(const std::string& name);
    std::uint32_t register_opaque(const std::string& name);
    std::uint32_t declare_function(const std::string& name);

    DeclaredFunction& declared_mutable(std::uint32_t id);
    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }

    // -- queries --------------------------------------------------------------
    int m() const { return m_; }
    int max_jet_order() const { return max_jet_order_; }
    SymbolId t() const { return t_; }
    SymbolId x(int mu) const;                // mu in [1, m]
    const std::vector<SymbolId>& xs() const { return x_; }
    SymbolId u() const { return u_; }
    SymbolId v() const { return v_; }
    std::vector<SymbolId> independents() const;

    const SymbolInfo& info(SymbolId id) const { return syms_.at(id); }
    const std::string& name(SymbolId id) const { return syms_.at(id).name; }
    std::size_t size() const { return syms_.size(); }

    std::optional<SymbolId> lookup(const std::string& name) const;
    /// Jet coordinate of dependent `base` with the given directions (sorted internally).
    /// Throws JetOverflowError beyond max_jet_order.
    SymbolId jet(SymbolId base, std::vector<SymbolId> multi) const;
    bool is_dependent_base(SymbolId id) const { return id == u_ || id == v_; }

    std::size_t opaque_count() const { return opaques_.size(); }
    const OpaqueFunction& opaque(std::uint32_t id) const { return opaques_.at(id); }
    std::optional<std::uint32_t> lookup_opaque(const std::string& name) const;

    std::size_t declared_count() const { return decls_.size(); }
    const DeclaredFunction& declared(std::uint32_t id) const { return decls_.at(id); }
    std::optional<std::uint32_t> lookup_declared(const std::string& name) const;

    /// Canonical direction ordering: t before x1 before x2 ...
    bool dir_less(SymbolId a, SymbolId b) const;
    std::string jet_suffix(const std::vector<SymbolId>& multi) const;

private:
    SymbolId add(SymbolInfo info);
    void check_mutable() const;

    std::vector<SymbolInfo> syms_;
    std::map<std::string, SymbolId, std::less<>> by_name_;
    std::vector<OpaqueFunction> opaques_;
    std::map<std::string, std::uint32_t, std::less<>> opaque_by_name_;
    std::vector<DeclaredFunction> decls_;
    std::map<std::string, std::uint32_t, std::less<>> decl_by_name_;
    std::map<std::pair<SymbolId, std::vector<SymbolId>>, SymbolId> jets_;
    int m_ = 0;
    int max_jet_order_ = 4;
    SymbolId t_ = kNoSymbol, u_ = kNoSymbol, v_ = kNoSymbol;
    std::vector<SymbolId> x_;
    bool frozen_ = false;
};

}  // namespace rdsym
