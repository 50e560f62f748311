#include "rdsym/detgen.hpp"

#include "rdsym/linalg.hpp"

#include <array>
#include <sstream>

namespace rdsym {

std::vector<Expr> DeterminingSystem::f_free() const
{
    std::vector<Expr> out;
    for (std::size_t i = 0; i < equations.size(); ++i)
        if (!involves_nonlinearity[i]) out.push_back(equations[i]);
    return out;
}

std::vector<Expr> DeterminingSystem::f_coupled() const
{
    std::vector<Expr> out;
    for (std::size_t i = 0; i < equations.size(); ++i)
        if (involves_nonlinearity[i]) out.push_back(equations[i]);
    return out;
}

std::string DeterminingSystem::print() const
{
    std::ostringstream os;
    for (std::size_t i = 0; i < equations.size(); ++i) {
        os << "[" << to_string(*tab, monomials[i]) << "]  0 = " << to_string(*tab, equations[i]);
        if (involves_nonlinearity[i]) os << "   (classifying)";
        os << "\n";
    }
    return os.str();
}

namespace {

/// Declares an unknown coefficient function of the given arguments (all
/// directions bump, nothing rewrites).
std::uint32_t declare_unknown(SymbolTable& tab, const std::string& name,
                              const std::vector<SymbolId>& args, int max_order = 3)
{
    std::uint32_t id = tab.declare_function(name);
    DeclaredFunction& d = tab.declared_mutable(id);
    for (SymbolId a : args) d.dirs[a] = {DeclaredFunction::Rule::Bump, nullptr};
    d.max_order = max_order;
    return id;
}

bool is_positive_order_jet(const SymbolTable& tab, const Expr& e)
{
    return e.kind() == Kind::Sym && tab.info(e.sym()).kind == SymKind::Jet &&
           !tab.info(e.sym()).multi.empty();
}

}  // namespace

DetgenResult generate_determining(SystemKind kind, int m, int p, const Expr* a_in,
                                  const std::string* f1_src, const std::string* f2_src)
{
    auto tab = std::make_shared<SymbolTable>();
    tab->init_standard(m);
    SymbolId a_param = kNoSymbol;
    if (kind == SystemKind::Diagonal && !a_in) a_param = tab->register_parameter("a");

    std::vector<SymbolId> point_args = tab->independents();
    point_args.push_back(tab->u());
    point_args.push_back(tab->v());
    std::uint32_t eta_id = declare_unknown(*tab, "eta", point_args);
    std::vector<std::uint32_t> xi_ids;
    for (int i = 1; i <= m; ++i)
        xi_ids.push_back(declare_unknown(*tab, "xi" + std::to_string(i), point_args));
    std::uint32_t pi1_id = declare_unknown(*tab, "pi1", point_args);
    std::uint32_t pi2_id = declare_unknown(*tab, "pi2", point_args);

    std::uint32_t f1_id = 0, f2_id = 0;
    bool opaque_f = !(f1_src && f2_src);
    if (opaque_f) {
        f1_id = declare_unknown(*tab, "f1", {tab->u(), tab->v()});
        f2_id = declare_unknown(*tab, "f2", {tab->u(), tab->v()});
    }

    Expr f1, f2;
    if (opaque_f) {
        f1 = atom(*tab, f1_id);
        f2 = atom(*tab, f2_id);
    }
    tab->freeze();
    auto T = std::static_pointer_cast<const SymbolTable>(tab);
    if (!opaque_f) {
        f1 = parse(*f1_src, *T);
        f2 = parse(*f2_src, *T);
    }

    DiffusionSystem sys = (kind == SystemKind::Diagonal)
                              ? DiffusionSystem::diagonal(
                                    T, a_in ? *a_in : sym(a_param), f1, f2)
                              : DiffusionSystem::first_order(T, p, f1, f2);

    std::vector<Expr> xi;
    for (auto id : xi_ids) xi.push_back(atom(*T, id));
    VectorField ansatz = VectorField::from_phi(T, atom(*T, eta_id), std::move(xi),
                                               neg(atom(*T, pi1_id)), neg(atom(*T, pi2_id)));

    auto [r1, r2] = prolong2_apply(ansatz, sys);

    DeterminingSystem out;
    out.tab = T;
    out.unknowns = {"eta"};
    for (int i = 1; i <= m; ++i) out.unknowns.push_back("xi" + std::to_string(i));
    out.unknowns.push_back("pi1");
    out.unknowns.push_back("pi2");

    // Collect coefficients of jet monomials. Terms carrying a jet factor are
    // refined further by the nonlinearity atoms (arbitrary f makes them
    // independent); the jet-free remainder stays whole: it is the classifying
    // equation coupling the coefficients to f1, f2.
    auto collect = [&](const Expr& residual) {
        std::map<Expr, std::vector<Expr>, Expr::Less> buckets;
        for (const auto& term : terms_of(residual)) {
            std::vector<Expr> keyf, content;
            bool has_jet = false;
            for (const auto& f : factors_of(term)) {
                Expr b = f.kind() == Kind::Pow ? f.base() : f;
                if (is_positive_order_jet(*T, b)) {
                    has_jet = true;
                    keyf.push_back(f);
                } else {
                    content.push_back(f);
                }
            }
            if (has_jet && opaque_f) {
                std::vector<Expr> keep;
                for (auto& c : content) {
                    Expr b = c.kind() == Kind::Pow ? c.base() : c;
                    if (b.kind() == Kind::Atom && (b.fn_id() == f1_id || b.fn_id() == f2_id))
                        keyf.push_back(c);
                    else
                        keep.push_back(c);
                }
                content = std::move(keep);
            }
            Expr key = keyf.empty() ? num(1) : mul(std::move(keyf));
            buckets[key].push_back(content.empty() ? num(1) : mul(std::move(content)));
        }
        for (auto& [key, terms] : buckets) {
            Expr eq = add(std::move(terms));
            if (eq.is_zero()) continue;
            out.monomials.push_back(key);
            out.equations.push_back(eq);
            bool classifying = key.is_one();
            if (!classifying && !opaque_f) {
                // concrete nonlinearities can leave f-content in jet equations
                classifying = false;
            }
            out.involves_nonlinearity.push_back(classifying);
        }
    };
    collect(r1);
    collect(r2);

    return DetgenResult{std::move(out), std::move(ansatz)};
}

// -- classifying equations ---------------------------------------------------------

VectorField MainSymmetryCoeffs::to_field(const DiffusionSystem& sys) const
{
    const SymbolTable& T = *sys.tab;
    Expr t = sym(T.t());
    Expr u = sym(T.u());
    Expr v = sym(T.v());
    Expr eta = neg(mul(mu, t));
    std::vector<Expr> xi;
    for (int i = 1; i <= T.m(); ++i) xi.push_back(neg(mul(num(1, 2), mu, sym(T.x(i)))));
    Expr phi_u = add(add(mul(C1, u), mul(C4, v)), B1);
    Expr phi_v = add(add(mul(C2, v), mul(C3, u)), B2);
    return VectorField::from_phi(sys.tab, eta, std::move(xi), phi_u, phi_v);
}

namespace {

Expr laplacian_of(const SymbolTable& tab, const Expr& e)
{
    Expr out;
    for (SymbolId x : tab.xs()) out = add(out, diff(tab, diff(tab, e, x), x));
    return out;
}

}  // namespace

std::pair<Expr, Expr> classify_residual(const DiffusionSystem& sys,
                                        const MainSymmetryCoeffs& c)
{
    const SymbolTable& T = *sys.tab;
    Expr t = sym(T.t());
    Expr u = sym(T.u());
    Expr v = sym(T.v());
    Expr f1 = sys.f1, f2 = sys.f2;
    auto d_u = [&](const Expr& e) { return diff(T, e, T.u()); };
    auto d_v = [&](const Expr& e) { return diff(T, e, T.v()); };
    auto d_t = [&](const Expr& e) { return diff(T, e, T.t()); };

    if (sys.kind == SystemKind::Diagonal) {
        bool a_is_one = sys.a.is_num() && sys.a.num() == 1;
        if (!a_is_one && (!c.C3.is_zero() || !c.C4.is_zero()))
            throw RdsymError("C3/C4 must vanish unless a = 1");
        auto op = [&](const Expr& f) {
            return add({mul(c.C1, u, d_u(f)), mul(c.C2, v, d_v(f)), mul(c.C3, u, d_v(f)),
                        mul(c.C4, v, d_u(f)), mul(c.B1, d_u(f)), mul(c.B2, d_v(f))});
        };
        Expr lhs1 = add({mul(add(c.mu, c.C1), f1), mul(c.C4, f2), mul(d_t(c.C1), u),
                         mul(d_t(c.C4), v), d_t(c.B1), neg(laplacian_of(T, c.B1))});
        Expr r1 = sub(lhs1, op(f1));
        Expr lhs2 = add({mul(add(c.mu, c.C2), f2), mul(c.C3, f1), mul(d_t(c.C2), v),
                         mul(d_t(c.C3), u), d_t(c.B2), neg(mul(sys.a, laplacian_of(T, c.B2)))});
        Expr r2 = sub(lhs2, op(f2));
        return {r1, r2};
    }

    // first-order family: rewrite the (4.2)-convention data into the F/G form
    if (!c.C3.is_zero() || !c.C4.is_zero())
        throw RdsymError("C3/C4 must vanish for first-order systems");
    Expr F = neg(c.C1), G = neg(c.C2), Bp1 = neg(c.B1), Bp2 = neg(c.B2), mup = neg(c.mu);
    auto op = [&](const Expr& f) {
        return add({mul(Bp1, d_u(f)), mul(Bp2, d_v(f)), mul(F, u, d_u(f)), mul(G, v, d_v(f))});
    };
    Expr r1 = sub(add({mul(add(mup, F), f1), mul(d_t(F), u), d_t(Bp1),
                       neg(laplacian_of(T, Bp1))}),
                  op(f1));
    Expr r2 = sub(add({mul(add(mup, G), f2), mul(d_t(G), v), d_t(Bp2),
                       neg(mul(num(sys.p), diff(T, Bp1, T.x(T.m()))))}),
                  op(f2));
    return {r1, r2};
}

// -- extension flags -----------------------------------------------------------------

namespace {

bool expr_is_constant(const SymbolTable& tab, const Expr& e)
{
    for (SymbolId s : free_symbols(e)) {
        SymKind k = tab.info(s).kind;
        if (k == SymKind::Jet || k == SymKind::Independent) return false;
    }
    return atoms_of(e).empty() && !contains_kind(e, Kind::Fun);
}

}  // namespace

ExtensionFlags extension_flags(const DiffusionSystem& sys, const SamplingDomain& dom,
                               const std::vector<Expr>& gamma_candidates)
{
    if (sys.kind != SystemKind::Diagonal)
        throw RdsymError("extension_flags requires a diagonal system");
    const SymbolTable& T = *sys.tab;
    ExtensionFlags flags;
    if (sys.a.is_zero()) {
        flags.galilei.note = flags.exp_galilei.note = flags.conformal.note =
            "a = 0: no Galilei or conformal extensions";
        return flags;
    }
    Expr a = sys.a;
    Expr u = sym(T.u());
    Expr v = sym(T.v());
    auto euler = [&](const Expr& f) {
        return add(mul(a, u, diff(T, f, T.u())), mul(v, diff(T, f, T.v())));
    };

    // (au d_u + v d_v) f1 = a f1 ; (au d_u + v d_v) f2 = f2
    Expr g1 = sub(mul(a, sys.f1), euler(sys.f1));
    Expr g2 = sub(sys.f2, euler(sys.f2));
    flags.galilei.residual1 = is_zero(T, g1, dom);
    flags.galilei.residual2 = is_zero(T, g2, dom);
    if (flags.galilei.residual1.passed() && flags.galilei.residual2.passed()) {
        GeneratorSpec gs{GeneratorName::G};
        gs.mu = 1;
        VectorField G1 = make_named(gs, sys);
        flags.galilei.generator_check = check_symmetry(G1, sys, dom);
        flags.galilei.on = flags.galilei.generator_check.pass;
        if (!flags.galilei.on) flags.galilei.note = "criterion held but G1 failed verification";
    }

    // exponential Galilei: a(f1 + gamma u) = (au d_u + v d_v) f1, f2 + gamma v = ...
    {
        std::vector<Expr> candidates = gamma_candidates;
        Expr sym_cand = div(sub(euler(sys.f1), mul(a, sys.f1)), mul(a, u));
        sym_cand = normalize(T, sym_cand);
        if (expr_is_constant(T, sym_cand) && !sym_cand.is_zero())
            candidates.insert(candidates.begin(), sym_cand);
        for (const Expr& gamma : candidates) {
            if (gamma.is_zero()) continue;
            Expr e1 = sub(mul(a, add(sys.f1, mul(gamma, u))), euler(sys.f1));
            Expr e2 = sub(add(sys.f2, mul(gamma, v)), euler(sys.f2));
            auto z1 = is_zero(T, e1, dom);
            auto z2 = is_zero(T, e2, dom);
            if (!z1.passed() || !z2.passed()) continue;
            GeneratorSpec gs{GeneratorName::Ghat};
            gs.mu = 1;
            gs.gamma = gamma;
            VectorField gh = make_named(gs, sys);
            auto chk = check_symmetry(gh, sys, dom);
            if (chk.pass) {
                flags.exp_galilei.on = true;
                flags.exp_galilei.residual1 = z1;
                flags.exp_galilei.residual2 = z2;
                flags.exp_galilei.gamma = gamma;
                flags.exp_galilei.generator_check = chk;
                break;
            }
        }
        if (!flags.exp_galilei.on && flags.exp_galilei.note.empty())
            flags.exp_galilei.note = "no gamma found";
    }

    // conformal package requires the Galilei flag
    if (flags.galilei.on) {
        bool a_is_one = sys.a.is_num() && sys.a.num() == 1;
        const int m = T.m();
        if (!a_is_one) {
            // (a-1) mu^cb = 0 forces all matching constants to vanish:
            // (m+4) f^c = m (u d_u + v d_v) f^c
            Expr c1 = sub(mul(num(m + 4), sys.f1),
                          mul(num(m), add(mul(u, diff(T, sys.f1, T.u())),
                                          mul(v, diff(T, sys.f1, T.v())))));
            Expr c2 = sub(mul(num(m + 4), sys.f2),
                          mul(num(m), add(mul(u, diff(T, sys.f2, T.u())),
                                          mul(v, diff(T, sys.f2, T.v())))));
            flags.conformal.residual1 = is_zero(T, c1, dom);
            flags.conformal.residual2 = is_zero(T, c2, dom);
            if (flags.conformal.residual1.passed() && flags.conformal.residual2.passed()) {
                GeneratorSpec gs{GeneratorName::K};
                VectorField K = make_named(gs, sys);
                flags.conformal.generator_check = check_symmetry(K, sys, dom);
                flags.conformal.on = flags.conformal.generator_check.pass;
            }
        } else {
            // a = 1: solve the mu^cb / nu^cb linear matching exactly
            // unknown order: mu11 mu12 mu21 mu22 nu11 nu12 nu21 nu22
            const int m4 = m + 4;
            auto fu = [&](const Expr& f) { return diff(T, f, T.u()); };
            auto fv = [&](const Expr& f) { return diff(T, f, T.v()); };
            std::vector<Expr> rhs0;
            std::vector<std::array<Expr, 8>> coeffs;
            auto pushA = [&](const Expr& fc) {
                Expr e0 = sub(mul(num(m4), fc),
                              mul(num(m), add(mul(u, fu(fc)), mul(v, fv(fc)))));
                std::array<Expr, 8> row;
                int c = (&fc == &sys.f1) ? 1 : 2;
                // mu^{c1} multiplies f1, mu^{c2} multiplies f2; mu^{1b}, mu^{2b}
                // also enter the operator part.
                row[0] = neg(mul(u, fu(fc)));
                row[1] = neg(mul(v, fu(fc)));
                row[2] = neg(mul(u, fv(fc)));
                row[3] = neg(mul(v, fv(fc)));
                row[4] = row[5] = row[6] = row[7] = Expr();
                if (c == 1) {
                    row[0] = add(row[0], sys.f1);  // mu^{11} f1
                    row[1] = add(row[1], sys.f2);  // mu^{12} f2
                } else {
                    row[2] = add(row[2], sys.f1);  // mu^{21} f1
                    row[3] = add(row[3], sys.f2);  // mu^{22} f2
                }
                rhs0.push_back(e0);
                coeffs.push_back(row);
            };
            auto pushB = [&](const Expr& fc) {
                std::array<Expr, 8> row;
                int c = (&fc == &sys.f1) ? 1 : 2;
                for (auto& r : row) r = Expr();
                row[4] = neg(mul(u, fu(fc)));
                row[5] = neg(mul(v, fu(fc)));
                row[6] = neg(mul(u, fv(fc)));
                row[7] = neg(mul(v, fv(fc)));
                if (c == 1) {
                    row[4] = add(row[4], sys.f1);
                    row[5] = add(row[5], sys.f2);
                    row[0] = u;  // mu^{11} u
                    row[1] = v;  // mu^{12} v
                } else {
                    row[6] = add(row[6], sys.f1);
                    row[7] = add(row[7], sys.f2);
                    row[2] = u;
                    row[3] = v;
                }
                rhs0.push_back(Expr());
                coeffs.push_back(row);
            };
            pushA(sys.f1);
            pushA(sys.f2);
            pushB(sys.f1);
            pushB(sys.f2);

            // expand every equation over a shared monomial basis and solve exactly
            std::vector<Expr> all;
            for (std::size_t e = 0; e < rhs0.size(); ++e) {
                all.push_back(rhs0[e]);
                for (const auto& c : coeffs[e]) all.push_back(c);
            }
            TermBasis tb = TermBasis::build(all);
            const std::size_t nm = tb.monomials.size();
            RatMatrix A;
            RatVector b;
            for (std::size_t e = 0; e < rhs0.size(); ++e) {
                for (std::size_t mi = 0; mi < nm; ++mi) {
                    RatVector arow(8, Rational(0));
                    bool nonzero = false;
                    for (int k = 0; k < 8; ++k) {
                        arow[static_cast<std::size_t>(k)] =
                            tb.vectors[e * 9 + 1 + static_cast<std::size_t>(k)][mi];
                        if (arow[static_cast<std::size_t>(k)] != 0) nonzero = true;
                    }
                    Rational rv = -tb.vectors[e * 9][mi];
                    if (!nonzero && rv == 0) continue;
                    A.push_back(std::move(arow));
                    b.push_back(rv);
                }
            }
            auto sol = solve_exact(A, b);
            if (sol) {
                // K - (t mu11 + nu11) u d_u - (t mu12 + nu12) v d_u
                //   - (t mu21 + nu21) u d_v - (t mu22 + nu22) v d_v
                GeneratorSpec gs{GeneratorName::K};
                VectorField K = make_named(gs, sys);
                Expr t = sym(T.t());
                auto lin = [&](int mu_i, int nu_i) {
                    return add(mul(num((*sol)[static_cast<std::size_t>(mu_i)]), t),
                               num((*sol)[static_cast<std::size_t>(nu_i)]));
                };
                Expr du_part = add(mul(lin(0, 4), u), mul(lin(1, 5), v));
                Expr dv_part = add(mul(lin(2, 6), u), mul(lin(3, 7), v));
                VectorField corr = VectorField::from_phi(
                    sys.tab, Expr(), std::vector<Expr>(static_cast<std::size_t>(m), Expr()),
                    neg(du_part), neg(dv_part));
                VectorField comb = K.plus(corr);
                flags.conformal.generator_check = check_symmetry(comb, sys, dom);
                flags.conformal.on = flags.conformal.generator_check.pass;
                if (!flags.conformal.on)
                    flags.conformal.note = "matching solved but K-combination failed";
            } else {
                flags.conformal.note = "mu/nu matching has no solution";
            }
        }
    } else {
        flags.conformal.note = "requires the Galilei flag";
    }
    return flags;
}

}  // namespace rdsym
