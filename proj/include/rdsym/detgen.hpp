#pragma once

#include "rdsym/prolongation.hpp"

#include <map>
#include <string>
#include <vector>

namespace rdsym {

/// Overdetermined linear system for the symmetry coefficients, produced by
/// collecting jet-monomial coefficients of the prolonged on-shell criterion.
struct DeterminingSystem {
    std::shared_ptr<const SymbolTable> tab;
    std::vector<std::string> unknowns;           // declared-function names
    std::vector<Expr> equations;                 // each must vanish identically
    std::vector<Expr> monomials;                 // jet monomial keyed per equation
    std::vector<bool> involves_nonlinearity;     // true when f-atoms appear

    std::vector<Expr> f_free() const;
    std::vector<Expr> f_coupled() const;
    std::string print() const;
};

/// The ansatz for generate_determining: a general point field with unknown
/// coefficient functions eta(t,x,u,v), xi_mu(t,x,u,v), pi1, pi2.
struct DetgenResult {
    DeterminingSystem system;
    VectorField ansatz;
};

/// Builds a fresh symbol table with unknown coefficient functions and opaque
/// nonlinearities f1(u,v), f2(u,v) (unless concrete ones are supplied through
/// `sys_f1`/`sys_f2` source strings), applies pr^(2) and collects coefficients
/// of the jet monomials; when the nonlinearities are opaque, their derivative
/// atoms are treated as additional indeterminates during collection.
DetgenResult generate_determining(SystemKind kind, int m, int p_or_unused,
                                  const Expr* a = nullptr,
                                  const std::string* f1_src = nullptr,
                                  const std::string* f2_src = nullptr);

/// Main-symmetry coefficient data in the convention
///   X = -mu D + C1 u d_u + C2 v d_v + C3 u d_v + C4 v d_u + B1 d_u + B2 d_v
/// with C* functions of t and B* functions of (t, x).
struct MainSymmetryCoeffs {
    Expr mu;
    Expr C1, C2, C3, C4;
    Expr B1, B2;

    VectorField to_field(const DiffusionSystem& sys) const;
};

/// Evaluates both classifying equations (LHS - RHS) for the given main-symmetry
/// data: the diagonal family uses the a-form, the first-order family the
/// (mu+F) form with p B1_{x_m} transport. Throws when C3/C4 are nonzero for a != 1.
std::pair<Expr, Expr> classify_residual(const DiffusionSystem& sys,
                                        const MainSymmetryCoeffs& coeffs);

struct FlagEvidence {
    bool on = false;
    ZeroVerdict residual1, residual2;
    SymmetryReport generator_check;  // the implied generator, verified
    Expr gamma;                      // exponential Galilei rate when found
    std::string note;
};

struct ExtensionFlags {
    FlagEvidence galilei;       // (au d_u + v d_v) criterion
    FlagEvidence exp_galilei;   // gamma-shifted criterion
    FlagEvidence conformal;     // requires galilei; constructs the K combination
};

/// Candidate gamma values to try for the exponential-Galilei criterion in
/// addition to the symbolic attempt.
ExtensionFlags extension_flags(const DiffusionSystem& sys, const SamplingDomain& dom,
                               const std::vector<Expr>& gamma_candidates = {});

}  // namespace rdsym
