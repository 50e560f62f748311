#pragma once

#include "rdsym/eval.hpp"
#include "rdsym/expr.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rdsym {

// -- predicates ------------------------------------------------------------------

enum class Cmp : std::uint8_t { EqZero, NeZero, GtZero, GeZero, LtZero, LeZero };

/// A machine-checkable side condition, stored as an expression compared to zero.
struct Predicate {
    Expr expr;
    Cmp cmp = Cmp::NeZero;
    std::string text;

    /// Parses "nu != 0", "a - 1 == 0", "a > 0", "nu*m*(1-a) - 4 == 0" style strings.
    static Predicate parse_str(const std::string& s, const SymbolTable& tab);
    /// Evaluates under exact bindings; nullopt when symbols remain unbound.
    std::optional<bool> holds(const SymbolTable& tab,
                              const std::map<SymbolId, Rational>& bindings) const;
};

// -- systems ---------------------------------------------------------------------

enum class SystemKind : std::uint8_t {
    Diagonal,    // u_t - Lap u = f1, v_t - a Lap v = f2   (a = 0 allowed)
    FirstOrder,  // u_t - Lap u = f1, v_t - p u_{x_m} = f2, p in {0,1}
};

/// A concrete reaction-diffusion system instance from the classified family.
struct DiffusionSystem {
    std::shared_ptr<const SymbolTable> tab;
    SystemKind kind = SystemKind::Diagonal;
    Expr a;      // Diagonal: diffusion coefficient of v (Expr constant or parameter)
    int p = 1;   // FirstOrder: 0 or 1; only the x_m component is nonzero
    Expr f1, f2;
    std::vector<Predicate> constraints;

    int m() const { return tab->m(); }

    static DiffusionSystem diagonal(std::shared_ptr<const SymbolTable> tab, Expr a, Expr f1,
                                    Expr f2);
    static DiffusionSystem first_order(std::shared_ptr<const SymbolTable> tab, int p, Expr f1,
                                       Expr f2);
};

struct Violation {
    enum class Severity { Warning, Error } severity;
    std::string message;
};

/// Checks autonomy of f1/f2 (error) and whether a lies in the canonical set
/// {a=0} u {-1<=a<0} u {0<a<1} u {a=1} (warning with the a -> 1/a hint).
std::vector<Violation> validate(const DiffusionSystem& sys);

// -- vector fields -----------------------------------------------------------------

/// Point-symmetry generator candidate. Stored with the sign convention
///   X = eta d_t + xi^mu d_x_mu - pi1 d_u - pi2 d_v,
/// matching the classifying equations; accessors phi_u()/phi_v() give the plain
/// d_u/d_v coefficients. Printing emits the plain coefficients on the d_* basis.
struct VectorField {
    std::shared_ptr<const SymbolTable> tab;
    Expr eta;
    std::vector<Expr> xi;  // size m
    Expr pi1, pi2;

    Expr phi_u() const { return neg(pi1); }
    Expr phi_v() const { return neg(pi2); }

    static VectorField from_phi(std::shared_ptr<const SymbolTable> tab, Expr eta,
                                std::vector<Expr> xi, Expr phi_u, Expr phi_v);
    static VectorField zero(std::shared_ptr<const SymbolTable> tab);

    bool is_zero_field() const;
    VectorField scaled(const Expr& c) const;
    VectorField plus(const VectorField& o) const;
    bool equals(const VectorField& o) const;

    /// Plain-coefficient form on the d_t, d_x1.., d_u, d_v basis (round-trips
    /// through parse_field).
    std::string print() const;
    /// Same plus an explicit statement of the stored pi sign convention.
    std::string describe() const;
};

/// Parses a field given as an expression linear in the basis tokens d_t, d_x1..,
/// d_u, d_v (e.g. "u*d_v - v*d_u", "2*t*(t*d_t + x1*d_x1)"). The macro overload
/// additionally accepts named generator symbols (D, K, G1, ...) that expand to
/// the supplied fields.
VectorField parse_field(std::string_view src, std::shared_ptr<const SymbolTable> tab);
VectorField parse_field(std::string_view src, std::shared_ptr<const SymbolTable> tab,
                        const std::map<std::string, VectorField>& macros);

// -- named generators ---------------------------------------------------------------

enum class GeneratorName : std::uint8_t {
    P0,      // d_t
    P,       // d_x_mu (takes mu)
    J,       // x_mu d_x_nu - x_nu d_x_mu (takes mu, nu)
    D,       // t d_t + x_mu d_x_mu / 2
    K,       // conformal, diagonal systems with a != 0
    G,       // Galilei (takes mu)
    Ghat,    // exponential Galilei (takes mu and gamma)
    UDu,     // u d_u
    VDv,     // v d_v
    UDv,     // u d_v
    VDu,     // v d_u
    B1Du,    // payload(t,x) d_u
    B2Dv,    // payload(t,x) d_v
};

struct GeneratorSpec {
    GeneratorName name;
    int mu = 1, nu = 2;   // spatial indices for P, J, G, Ghat
    Expr gamma;           // Ghat
    Expr payload;         // B1Du / B2Dv
};

/// P0, all P_mu, all J_mu_nu: 1 + m + m(m-1)/2 fields.
std::vector<VectorField> make_basic(std::shared_ptr<const SymbolTable> tab);

/// Constructs a named generator for the given system; K, G, Ghat require a
/// Diagonal system with a != 0.
VectorField make_named(const GeneratorSpec& spec, const DiffusionSystem& sys);

// -- declared special functions -------------------------------------------------

/// psi with psi_t = c * Lap psi + mu * psi  (heat family; c = 1 or the system's a).
std::uint32_t declare_heat(SymbolTable& tab, const std::string& name, const Expr& mu,
                           const Expr& diffusion);
/// Psi(x) with Lap Psi = mu Psi (m = 1 only: Psi_x1x1 -> mu Psi).
std::uint32_t declare_laplace(SymbolTable& tab, const std::string& name, const Expr& mu);
/// Psi(x_m - eta t) with Psi'' + eta Psi' = mu Psi (m = 1; Table 1 traveling form).
std::uint32_t declare_laplace_drift(SymbolTable& tab, const std::string& name, const Expr& mu,
                                    const Expr& eta);
/// B = e^{-eta x_m} Phi_mu(t) family at m = 1: B_x = -eta B, B_t = Lap B + mu B.
std::uint32_t declare_heat_profile(SymbolTable& tab, const std::string& name, const Expr& mu,
                                   const Expr& eta);
/// Phi_mu(t, x~) at m = 1: Phi_t = mu Phi, Phi_x = 0.
std::uint32_t declare_lower_heat(SymbolTable& tab, const std::string& name, const Expr& mu);
/// Arbitrary Psi(x): no rewrite rules, independent spatial jets.
std::uint32_t declare_spatial(SymbolTable& tab, const std::string& name);
/// Polar angle z = atan(v/u): z_u = -v/(u^2+v^2), z_v = u/(u^2+v^2); concrete evaluator.
std::uint32_t declare_polar_angle(SymbolTable& tab, const std::string& name);

}  // namespace rdsym
