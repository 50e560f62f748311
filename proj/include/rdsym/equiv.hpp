#pragma once

#include "rdsym/prolongation.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rdsym {

/// Invertible change of variables preserving the general form of the system
/// class. LinearMix covers the two continuous families (K with shifts and t,x
/// scaling; the antidiagonal K~ with the a -> 1/a move); Aet covers the 22
/// additional transformations (t, x fixed, (u,v) affinely mixed with
/// t-dependent coefficients; nr. 22 adds a rho*x_m shift); Euclidean is the
/// kernel group (t shift, x rotation+shift) and acts trivially on (a, f).
struct PointTransformation {
    enum class Kind : std::uint8_t { LinearMix, Aet, Euclidean } kind = Kind::LinearMix;

    // LinearMix: u_b -> K^{bc} u_c + b_b, f -> lambda^2 K f, t -> lambda^-2 t,
    // x -> lambda^-1 x; with tilde = true instead u -> K~ u, f -> a^-1 K~ f,
    // t -> a^-1 t (K~ antidiagonal, requires a != 0).
    std::array<Expr, 4> K;  // row-major 2x2
    std::array<Expr, 2> shift;
    Expr lambda;
    bool tilde = false;

    // Aet
    int aet_id = 0;
    std::map<std::string, Expr> params;

    // Euclidean (recorded, acts as identity on the class data)
    Expr t_shift;

    static PointTransformation linear_mix(std::array<Expr, 4> K, std::array<Expr, 2> shift,
                                          Expr lambda);
    static PointTransformation tilde_mix(std::array<Expr, 4> Ktilde);
    static PointTransformation aet(int id, std::map<std::string, Expr> params);
};

/// The 22 additional equivalence transformations of the paper as affine maps
///   (u, v) -> M(t) (u, v)^T + c(t, x).
struct AetMap {
    std::array<Expr, 4> M;  // row-major 2x2, entries in t
    std::array<Expr, 2> c;  // entries in (t, x_m)
};
AetMap aet_map(int id, const SymbolTable& tab, const std::map<std::string, Expr>& params);

struct NonClassPreserving : RdsymError {
    NonClassPreserving(const std::string& msg, Expr residual_)
        : RdsymError("NON_CLASS_PRESERVING: " + msg), residual(std::move(residual_))
    {
    }
    Expr residual;
};

/// Pushes the system through the transformation by the chain rule; the result
/// must again be an autonomous system of the declared kind, otherwise throws
/// NonClassPreserving carrying the offending residual term.
DiffusionSystem apply_to_system(const PointTransformation& T, const DiffusionSystem& sys);

/// Pushforward T_* X of a point field (t, x fixed for Aet; full jacobian for
/// LinearMix).
VectorField push_forward(const PointTransformation& T, const VectorField& X);

/// One nonlinearity template: an expression over (u, v), parameter slots and
/// opaque-function slots applied to a fixed argument.
struct ClassTemplate {
    std::shared_ptr<const SymbolTable> tab;
    Expr f1, f2;
    std::vector<SymbolId> param_slots;          // free parameters of the template
    std::vector<std::uint32_t> opaque_slots;    // slot functions F1, F2, ...
    std::vector<Expr> opaque_args;              // their fixed arguments (over u, v)
    std::vector<Predicate> constraints;
};

struct MatchResult {
    bool matched = false;
    std::map<std::string, Rational> param_bindings;
    std::string note;
};

/// Finds parameter values and opaque-slot redefinitions making sys equal the
/// template. Slots must enter the template linearly (true for every table row);
/// the redefined slot is solved for symbolically and accepted when it depends
/// only on the declared argument (Jacobian functional-dependence test), with a
/// numeric/rational fallback for scalar parameters that enter linearly.
MatchResult matches_class(const DiffusionSystem& sys, const ClassTemplate& tmpl,
                          const SamplingDomain& dom);

struct AetVerdict {
    bool class_preserved = false;
    bool genuinely_changes_f = false;
    MatchResult match;
    std::string note;
};

/// Applies the AET to the probe-instantiated entry system and confirms the image
/// still matches the template family (per-probe-function-combination); also
/// checks the AET is not itself a symmetry (it must change f) unless allowed.
AetVerdict verify_aet_on(const PointTransformation& T, const DiffusionSystem& sys,
                         const ClassTemplate& tmpl, const SamplingDomain& dom);

}  // namespace rdsym
