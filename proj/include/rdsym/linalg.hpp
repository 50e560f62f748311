#pragma once

#include "rdsym/expr.hpp"
#include "rdsym/rational.hpp"

#include <vector>

namespace rdsym {

using RatMatrix = std::vector<std::vector<Rational>>;
using RatVector = std::vector<Rational>;

/// Reduced row echelon form in place; returns the rank.
int rref(RatMatrix& m);

/// Solves A x = b exactly; empty optional when inconsistent. Free variables are 0.
std::optional<RatVector> solve_exact(RatMatrix a, RatVector b);

/// Is v in the row span of rows? (exact)
bool in_row_span(const RatMatrix& rows, const RatVector& v);

/// Least squares via normal equations (double). Returns false on singular systems.
bool least_squares(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                   std::vector<double>& out);

/// Writes a list of expressions as exact rational vectors over their combined
/// term-monomial basis (each distinct monomial becomes one coordinate).
struct TermBasis {
    std::vector<Expr> monomials;
    RatMatrix vectors;  // one row per input expression
    static TermBasis build(const std::vector<Expr>& exprs);
};

}  // namespace rdsym
