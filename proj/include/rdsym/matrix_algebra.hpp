#pragma once

#include "rdsym/model.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace rdsym {

/// 3x3 matrix with zero first row (the shape of the symmetry-coefficient
/// realization: first column = affine part, lower-right block = linear part).
/// Entries are exact rationals or carry a symbolic parameter slot.
struct MatrixRealization {
    std::string name;
    std::array<Expr, 9> e;  // row-major

    Expr at(int r, int c) const { return e[static_cast<std::size_t>(3 * r + c)]; }
    bool first_row_zero() const
    {
        return e[0].is_zero() && e[1].is_zero() && e[2].is_zero();
    }

    static MatrixRealization zero(std::string name = "0");
};

MatrixRealization mat_add(const MatrixRealization& a, const MatrixRealization& b);
MatrixRealization mat_scale(const Expr& c, const MatrixRealization& a);
MatrixRealization mat_mul(const MatrixRealization& a, const MatrixRealization& b);
/// gh - hg, exact.
MatrixRealization commutator(const MatrixRealization& g, const MatrixRealization& h);
/// U g U^-1 for U of the equivalence shape (first row (1,0,0)). Throws on singular U.
MatrixRealization conjugate(const MatrixRealization& g, const std::array<Expr, 9>& U,
                            const SymbolTable& tab);
bool mat_equal(const SymbolTable& tab, const MatrixRealization& a, const MatrixRealization& b);
bool mat_is_zero(const SymbolTable& tab, const MatrixRealization& a);

/// Declared bracket relation [e_i, e_j] = sum_k coeff_k e_k.
struct BracketRelation {
    int i = 0, j = 0;  // 0-based indices into the basis
    std::vector<Rational> rhs;
};

struct MatrixAlgebra {
    std::string name;
    std::vector<MatrixRealization> basis;
    std::vector<BracketRelation> relations;  // the declared nonzero ones
    bool declared_abelian = false;
    std::string isomorphic_to;  // optional claim, e.g. "A_{3,1}"
    std::string note;
    bool quarantined = false;
    std::string quarantine_reason;
};

struct AlgebraVerdict {
    bool closed = false;
    bool relations_hold = false;
    bool lambda_conditional = false;  // verdict depends on a symbolic parameter slot
    std::string detail;
};

/// Closure of the basis under commutator (exact span check, treating symbolic
/// parameter slots polynomially) and equality of computed vs declared relations.
AlgebraVerdict verify_algebra(const SymbolTable& tab, const MatrixAlgebra& A);

enum class RealizationForm : std::uint8_t {
    EHat,  // X = -(g)_{bc} u~_c d_{u~_b}            (homomorphism convention)
    X1,    // X = mu D - 2 (g)_{bc} u~_c d_{u~_b}
    X2,    // X = exp(lambda t) (g)_{bc} u~_c d....  (sign as EHat, scaled)
};

/// Vector field over the column u~ = (1, u, v); brackets of EHat-realized fields
/// match matrix commutators exactly.
VectorField realize_as_field(const MatrixRealization& g, RealizationForm form,
                             std::shared_ptr<const SymbolTable> tab, const Expr& mu,
                             const Expr& lambda);

struct IsoResult {
    enum class Kind { Found, NotIsomorphic, Undecided } kind = Kind::Undecided;
    std::string detail;
};

/// Best-effort structure-constant isomorphism search over basis changes with
/// small rational entries; reports UNDECIDED when the search space is exhausted.
IsoResult isomorphism_search(const SymbolTable& tab, const MatrixAlgebra& A,
                             const MatrixAlgebra& B, int budget = 20000);

/// The appendix realization set g^1..g^10 (lambda slots taken from `lambda`).
MatrixRealization appendix_matrix(const std::string& name, const SymbolTable& tab,
                                  const Expr& lambda);

}  // namespace rdsym
