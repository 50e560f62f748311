#pragma once

#include "rdsym/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rdsym {

/// Total derivative D_s e = d_s e + sum_J u_{J,s} dE/du_J over tracked jets
/// (u and v, all orders present in e). Throws JetOverflowError when a required
/// jet symbol exceeds the tracked order.
Expr total_derivative(const SymbolTable& tab, const Expr& e, SymbolId s);

/// Second-prolongation coefficient of X for the jet coordinate (dep, multi).
Expr prolonged_coeff(const VectorField& X, SymbolId dep, const std::vector<SymbolId>& multi);

/// Applies pr^(2) X to both equations written as
///   D1 = u_t - Lap u - f1,   D2 = v_t - a Lap v - f2   (Diagonal)
///   D1 = u_t - Lap u - f1,   D2 = v_t - p u_{x_m} - f2 (FirstOrder)
/// and reduces on-shell (u_t, v_t first, then their spatial total derivatives).
std::pair<Expr, Expr> prolong2_apply(const VectorField& X, const DiffusionSystem& sys);

struct SymmetryReport {
    VectorField field;
    Expr residual1, residual2;
    ZeroVerdict verdict1, verdict2;
    bool pass = false;
    std::string note;
};

SymmetryReport check_symmetry(const VectorField& X, const DiffusionSystem& sys,
                              const SamplingDomain& dom);

/// Coefficient-wise commutator [X, Y] = X(Y-coeffs) - Y(X-coeffs).
VectorField lie_bracket(const VectorField& X, const VectorField& Y);

/// First-order application of X to a point function g(t, x, u, v).
Expr apply_first_order(const VectorField& X, const Expr& g);

struct ClosureResult {
    bool closed = false;
    bool symbolic_only = false;  // constants could not be snapped to small rationals
    // constants[i][j] = coefficients of [X_i, X_j] in the basis
    std::vector<std::vector<std::vector<Rational>>> constants;
    std::optional<std::pair<int, int>> witness;  // offending pair when not closed
    std::string note;
};

/// Checks that all pairwise brackets expand in the given basis with constant
/// rational coefficients: solved from random probe evaluations with exact
/// rational reconstruction, then verified symbolically.
ClosureResult closure_check(const std::vector<VectorField>& fields, const SamplingDomain& dom);

}  // namespace rdsym
