#include "rdsym/matrix_algebra.hpp"

#include "rdsym/linalg.hpp"

#include <map>
#include <random>
#include <sstream>

namespace rdsym {

MatrixRealization MatrixRealization::zero(std::string name)
{
    MatrixRealization m;
    m.name = std::move(name);
    for (auto& x : m.e) x = Expr();
    return m;
}

MatrixRealization mat_add(const MatrixRealization& a, const MatrixRealization& b)
{
    MatrixRealization r = MatrixRealization::zero(a.name + "+" + b.name);
    for (int i = 0; i < 9; ++i)
        r.e[static_cast<std::size_t>(i)] =
            add(a.e[static_cast<std::size_t>(i)], b.e[static_cast<std::size_t>(i)]);
    return r;
}

MatrixRealization mat_scale(const Expr& c, const MatrixRealization& a)
{
    MatrixRealization r = MatrixRealization::zero(a.name);
    for (int i = 0; i < 9; ++i)
        r.e[static_cast<std::size_t>(i)] = mul(c, a.e[static_cast<std::size_t>(i)]);
    return r;
}

MatrixRealization mat_mul(const MatrixRealization& a, const MatrixRealization& b)
{
    MatrixRealization r = MatrixRealization::zero(a.name + "*" + b.name);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Expr s;
            for (int k = 0; k < 3; ++k) s = add(s, mul(a.at(i, k), b.at(k, j)));
            r.e[static_cast<std::size_t>(3 * i + j)] = s;
        }
    return r;
}

MatrixRealization commutator(const MatrixRealization& g, const MatrixRealization& h)
{
    MatrixRealization r = mat_add(mat_mul(g, h), mat_scale(num(-1), mat_mul(h, g)));
    r.name = "[" + g.name + "," + h.name + "]";
    return r;
}

bool mat_is_zero(const SymbolTable& tab, const MatrixRealization& a)
{
    for (const auto& x : a.e)
        if (!normalize(tab, x).is_zero()) return false;
    return true;
}

bool mat_equal(const SymbolTable& tab, const MatrixRealization& a, const MatrixRealization& b)
{
    return mat_is_zero(tab, mat_add(a, mat_scale(num(-1), b)));
}

MatrixRealization conjugate(const MatrixRealization& g, const std::array<Expr, 9>& U,
                            const SymbolTable& tab)
{
    // invert U by the adjugate; U has first row (1, 0, 0)
    auto at = [&](int r, int c) { return U[static_cast<std::size_t>(3 * r + c)]; };
    Expr det = add({mul(at(0, 0), sub(mul(at(1, 1), at(2, 2)), mul(at(1, 2), at(2, 1)))),
                    neg(mul(at(0, 1), sub(mul(at(1, 0), at(2, 2)), mul(at(1, 2), at(2, 0))))),
                    mul(at(0, 2), sub(mul(at(1, 0), at(2, 1)), mul(at(1, 1), at(2, 0))))});
    if (normalize(tab, det).is_zero()) throw RdsymError("singular conjugation matrix");
    Expr idet = pow(det, num(-1));
    std::array<Expr, 9> inv;
    auto cof = [&](int r, int c) {
        int r1 = (r + 1) % 3, r2 = (r + 2) % 3, c1 = (c + 1) % 3, c2 = (c + 2) % 3;
        // cofactor with sign folded by cyclic index choice
        return sub(mul(at(r1, c1), at(r2, c2)), mul(at(r1, c2), at(r2, c1)));
    };
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            inv[static_cast<std::size_t>(3 * c + r)] = mul(idet, cof(r, c));
    MatrixRealization Um = MatrixRealization::zero("U");
    MatrixRealization Ui = MatrixRealization::zero("U^-1");
    Um.e = U;
    Ui.e = inv;
    MatrixRealization r = mat_mul(mat_mul(Um, g), Ui);
    r.name = "U*" + g.name + "*U^-1";
    return r;
}

AlgebraVerdict verify_algebra(const SymbolTable& tab, const MatrixAlgebra& A)
{
    AlgebraVerdict v;
    std::ostringstream detail;
    const int n = static_cast<int>(A.basis.size());

    // exact span check: write all commutators and basis matrices over the joint
    // term basis of their 9 entries
    std::vector<Expr> all_entries;
    for (const auto& b : A.basis)
        for (const auto& x : b.e) all_entries.push_back(x);

    std::vector<MatrixRealization> brackets;
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            brackets.push_back(commutator(A.basis[static_cast<std::size_t>(i)],
                                          A.basis[static_cast<std::size_t>(j)]));
            pairs.push_back({i, j});
        }
    for (const auto& br : brackets)
        for (const auto& x : br.e) all_entries.push_back(x);

    TermBasis tb = TermBasis::build(all_entries);
    const std::size_t nm = tb.monomials.size();
    auto matrix_vec = [&](std::size_t offset) {
        RatVector out;
        out.reserve(9 * nm);
        for (int k = 0; k < 9; ++k)
            for (std::size_t mi = 0; mi < nm; ++mi)
                out.push_back(tb.vectors[offset + static_cast<std::size_t>(k)][mi]);
        return out;
    };

    RatMatrix basis_vecs;
    for (int i = 0; i < n; ++i) basis_vecs.push_back(matrix_vec(static_cast<std::size_t>(9 * i)));

    v.closed = true;
    bool lambda_dep = false;
    for (std::size_t bi = 0; bi < brackets.size(); ++bi) {
        RatVector bv = matrix_vec(static_cast<std::size_t>(9 * n) + 9 * bi);
        if (!in_row_span(basis_vecs, bv)) {
            v.closed = false;
            detail << "[e" << pairs[bi].first + 1 << ",e" << pairs[bi].second + 1
                   << "] leaves the span; ";
            // a lambda-dependent entry may be responsible
            for (const auto& x : brackets[bi].e)
                if (!free_symbols(x).empty()) lambda_dep = true;
        }
    }
    v.lambda_conditional = lambda_dep;

    // declared relations
    v.relations_hold = true;
    auto expected = [&](int i, int j) {
        MatrixRealization m = MatrixRealization::zero("expected");
        for (const auto& rel : A.relations) {
            if (rel.i == i && rel.j == j) {
                for (int k = 0; k < n; ++k)
                    if (rel.rhs[static_cast<std::size_t>(k)] != 0)
                        m = mat_add(m, mat_scale(num(rel.rhs[static_cast<std::size_t>(k)]),
                                                 A.basis[static_cast<std::size_t>(k)]));
            }
            if (rel.i == j && rel.j == i) {
                for (int k = 0; k < n; ++k)
                    if (rel.rhs[static_cast<std::size_t>(k)] != 0)
                        m = mat_add(m, mat_scale(num(-rel.rhs[static_cast<std::size_t>(k)]),
                                                 A.basis[static_cast<std::size_t>(k)]));
            }
        }
        return m;
    };
    for (std::size_t bi = 0; bi < brackets.size(); ++bi) {
        auto [i, j] = pairs[bi];
        MatrixRealization want = A.declared_abelian ? MatrixRealization::zero() : expected(i, j);
        if (!mat_equal(tab, brackets[bi], want)) {
            v.relations_hold = false;
            detail << "[e" << i + 1 << ",e" << j + 1 << "] != declared; ";
        }
    }
    v.detail = detail.str();
    return v;
}

VectorField realize_as_field(const MatrixRealization& g, RealizationForm form,
                             std::shared_ptr<const SymbolTable> tab, const Expr& mu,
                             const Expr& lambda)
{
    const SymbolTable& T = *tab;
    Expr t = sym(T.t());
    std::array<Expr, 3> utilde = {num(1), sym(T.u()), sym(T.v())};
    // affine + linear action: component b of g u~
    Expr gu = add({mul(g.at(1, 0), utilde[0]), mul(g.at(1, 1), utilde[1]),
                   mul(g.at(1, 2), utilde[2])});
    Expr gv = add({mul(g.at(2, 0), utilde[0]), mul(g.at(2, 1), utilde[1]),
                   mul(g.at(2, 2), utilde[2])});

    auto zero_xi = [&] { return std::vector<Expr>(static_cast<std::size_t>(T.m()), Expr()); };
    switch (form) {
        case RealizationForm::EHat:
            return VectorField::from_phi(tab, Expr(), zero_xi(), neg(gu), neg(gv));
        case RealizationForm::X1: {
            // mu D - 2 (g u~) d_u~
            std::vector<Expr> xi;
            for (int i = 1; i <= T.m(); ++i) xi.push_back(mul(num(1, 2), mu, sym(T.x(i))));
            return VectorField::from_phi(tab, mul(mu, t), std::move(xi),
                                         neg(mul(num(2), gu)), neg(mul(num(2), gv)));
        }
        case RealizationForm::X2: {
            Expr elt = exp_(mul(lambda, t));
            return VectorField::from_phi(tab, Expr(), zero_xi(), neg(mul(elt, gu)),
                                         neg(mul(elt, gv)));
        }
    }
    throw RdsymError("unknown realization form");
}

IsoResult isomorphism_search(const SymbolTable& tab, const MatrixAlgebra& A,
                             const MatrixAlgebra& B, int budget)
{
    IsoResult res;
    const int n = static_cast<int>(A.basis.size());
    if (n != static_cast<int>(B.basis.size()) || n > 3) {
        res.kind = IsoResult::Kind::Undecided;
        res.detail = "dimension mismatch or unsupported dimension";
        return res;
    }

    // structure constants of an algebra in a given basis (exact); nullopt when a
    // bracket leaves the span
    auto structure = [&](const std::vector<MatrixRealization>& basis)
        -> std::optional<std::vector<Rational>> {
        std::vector<Expr> entries;
        for (const auto& b : basis)
            for (const auto& x : b.e) entries.push_back(x);
        std::vector<MatrixRealization> brs;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                brs.push_back(commutator(basis[static_cast<std::size_t>(i)],
                                         basis[static_cast<std::size_t>(j)]));
        for (const auto& br : brs)
            for (const auto& x : br.e) entries.push_back(x);
        TermBasis tb = TermBasis::build(entries);
        const std::size_t nm = tb.monomials.size();
        auto vec = [&](std::size_t off) {
            RatVector out;
            for (int k = 0; k < 9; ++k)
                for (std::size_t mi = 0; mi < nm; ++mi)
                    out.push_back(tb.vectors[off + static_cast<std::size_t>(k)][mi]);
            return out;
        };
        RatMatrix M;
        for (int i = 0; i < n; ++i) M.push_back(vec(static_cast<std::size_t>(9 * i)));
        // solve each bracket in the basis
        std::vector<Rational> consts;
        std::size_t bi = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j, ++bi) {
                RatVector bv = vec(static_cast<std::size_t>(9 * n) + 9 * bi);
                // least-norm exact solve: transpose system
                RatMatrix At(M[0].size(), RatVector(static_cast<std::size_t>(n)));
                for (int k = 0; k < n; ++k)
                    for (std::size_t c = 0; c < M[0].size(); ++c)
                        At[c][static_cast<std::size_t>(k)] = M[static_cast<std::size_t>(k)][c];
                auto sol = solve_exact(At, bv);
                if (!sol) return std::nullopt;
                for (auto& q : *sol) consts.push_back(q);
            }
        return consts;
    };

    auto target = structure(B.basis);
    if (!target) {
        res.detail = "target algebra is not closed";
        return res;
    }

    // search over small-rational basis changes of A
    std::vector<Rational> entries_pool = {Rational(0), Rational(1),  Rational(-1),
                                          Rational(2), Rational(-2), Rational(1, 2),
                                          Rational(-1, 2), Rational(3), Rational(-3),
                                          Rational(1, 3), Rational(-1, 3)};
    std::mt19937_64 rng(0xa15eb);
    auto random_change = [&]() {
        std::vector<MatrixRealization> nb;
        for (int i = 0; i < n; ++i) {
            MatrixRealization m = MatrixRealization::zero("f" + std::to_string(i + 1));
            for (int j = 0; j < n; ++j) {
                Rational c = entries_pool[rng() % entries_pool.size()];
                if (c != 0)
                    m = mat_add(m, mat_scale(num(c), A.basis[static_cast<std::size_t>(j)]));
            }
            nb.push_back(m);
        }
        return nb;
    };
    auto independent = [&](const std::vector<MatrixRealization>& basis) {
        std::vector<Expr> entries;
        for (const auto& b : basis)
            for (const auto& x : b.e) entries.push_back(x);
        TermBasis tb = TermBasis::build(entries);
        RatMatrix M;
        const std::size_t nm = tb.monomials.size();
        for (int i = 0; i < n; ++i) {
            RatVector out;
            for (int k = 0; k < 9; ++k)
                for (std::size_t mi = 0; mi < nm; ++mi)
                    out.push_back(tb.vectors[static_cast<std::size_t>(9 * i + k)][mi]);
            M.push_back(out);
        }
        return rref(M) == n;
    };

    for (int it = 0; it < budget; ++it) {
        auto nb = random_change();
        if (!independent(nb)) continue;
        auto sc = structure(nb);
        if (!sc) continue;
        if (*sc == *target) {
            res.kind = IsoResult::Kind::Found;
            res.detail = "basis change found after " + std::to_string(it + 1) + " samples";
            return res;
        }
    }
    (void)tab;
    res.kind = IsoResult::Kind::Undecided;
    res.detail = "search budget exhausted";
    return res;
}

MatrixRealization appendix_matrix(const std::string& name, const SymbolTable& tab,
                                  const Expr& lambda)
{
    (void)tab;
    auto M = [&](std::initializer_list<Expr> xs) {
        MatrixRealization m = MatrixRealization::zero(name);
        int i = 0;
        for (const auto& x : xs) m.e[static_cast<std::size_t>(i++)] = x;
        return m;
    };
    Expr z;  // zero
    Expr one = num(1);
    if (name == "g1") return M({z, z, z, z, one, z, z, z, lambda});
    if (name == "g2") return M({z, z, z, one, z, z, z, z, one});
    if (name == "g3") return M({z, z, z, lambda, z, z, one, z, z});
    if (name == "g4") return M({z, z, z, z, z, z, z, z, one});
    if (name == "g5") return M({z, z, z, one, z, z, z, z, z});
    if (name == "g6") return M({z, z, z, z, lambda, num(-1), z, one, lambda});  // mu slot
    if (name == "g7") return M({z, z, z, z, one, z, z, one, one});
    if (name == "g8") return M({z, z, z, z, z, z, z, one, z});
    if (name == "g9") return M({z, z, z, one, z, z, z, one, z});
    if (name == "g10") return M({z, z, z, z, one, z, one, z, z});
    throw RdsymError("unknown appendix matrix '" + name + "'");
}

}  // namespace rdsym
