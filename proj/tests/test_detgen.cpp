#include "rdsym/detgen.hpp"
#include "rdsym/linalg.hpp"

#include <doctest.h>

using namespace rdsym;

namespace {

// -- transcription of the paper's determining system for the p = 1, m = 1 case
// (trace-condition sign corrected: 2 xi_x = +eta_t; see the project notes), as
// equations linear over the unknown-function jet atoms.
std::vector<Expr> reference_system(const SymbolTable& T)
{
    auto at = [&](const char* s) { return parse(s, T); };
    return {
        at("eta_tt"), at("eta_x1"), at("eta_u"), at("eta_v"),
        at("xi1_t"), at("xi1_u"), at("xi1_v"),
        at("pi1_v"), at("pi2_u"), at("pi1_uu"), at("pi2_vv"),
        at("pi1_x1u + pi1_x1v"), at("pi2_x1u + pi2_x1v"),
        at("pi1_u - pi2_v - 1/2*eta_t"),
        at("2*xi1_x1 - eta_t"),
    };
}

bool implies(const SymbolTable& T, const std::vector<Expr>& premises, const Expr& target,
             int rounds)
{
    // close the premises under derivative prolongation, then test exact span
    // membership of the target over the joint atom-monomial basis
    std::vector<SymbolId> dirs = {T.t(), T.x(1), T.u(), T.v()};
    std::vector<Expr> closure_exprs = premises;
    std::vector<Expr> frontier = premises;
    for (int r = 0; r < rounds; ++r) {
        std::vector<Expr> next;
        for (const auto& e : frontier)
            for (SymbolId d : dirs) {
                try {
                    Expr de = diff(T, e, d);
                    if (!de.is_zero()) next.push_back(de);
                } catch (const JetOverflowError&) {
                }
            }
        closure_exprs.insert(closure_exprs.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    closure_exprs.push_back(target);
    TermBasis tb = TermBasis::build(closure_exprs);
    RatMatrix prem(tb.vectors.begin(), tb.vectors.end() - 1);
    return in_row_span(prem, tb.vectors.back());
}

}  // namespace

TEST_CASE("determining system of eq (8), p = 1, m = 1, is equivalent to (2.8)")
{
    auto res = generate_determining(SystemKind::FirstOrder, 1, 1);
    const SymbolTable& T = *res.system.tab;
    auto derived = res.system.f_free();
    REQUIRE(!derived.empty());
    auto reference = reference_system(T);

    for (const auto& target : reference) {
        INFO("target: ", to_string(T, target));
        CHECK(implies(T, derived, target, 2));
    }
    for (const auto& target : derived) {
        INFO("derived: ", to_string(T, target));
        CHECK(implies(T, reference, target, 2));
    }
    // the as-printed trace sign is NOT implied (it would contradict 2 xi_x = eta_t)
    CHECK_FALSE(implies(T, derived, parse("2*xi1_x1 + eta_t", T), 2));
}

TEST_CASE("determining system contains the named members directly")
{
    auto res = generate_determining(SystemKind::FirstOrder, 1, 1);
    const SymbolTable& T = *res.system.tab;
    auto has = [&](const char* s) {
        Expr want = parse(s, T);
        for (const auto& e : res.system.f_free()) {
            auto [c1, m1] = coeff_split(terms_of(e).size() == 1 ? terms_of(e)[0] : e);
            (void)c1;
            (void)m1;
            if (sub(e, want).is_zero() || add(e, want).is_zero()) return true;
            // also accept scalar multiples
            auto tb = TermBasis::build({e, want});
            if (tb.vectors[0].size() == tb.vectors[1].size()) {
                RatMatrix m = {tb.vectors[0]};
                if (in_row_span(m, tb.vectors[1])) return true;
            }
        }
        return false;
    };
    CHECK(has("pi1_v"));
    CHECK(has("eta_u"));
    CHECK(has("eta_v"));
    CHECK(has("eta_x1"));
    CHECK(has("2*xi1_x1 - eta_t + eta_x1x1"));
}

TEST_CASE("heat-equation block alone reproduces the classical determining system")
{
    // f1 = 0, f2 = 0, diagonal a = 1: the u-equation is the heat equation. The
    // classical result (independent oracle, hand-derived): eta = eta(t),
    // 2 xi_x = eta_t, and the u-coefficient equations.
    std::string f1 = "0", f2 = "0";
    auto res = generate_determining(SystemKind::Diagonal, 1, 0, nullptr, &f1, &f2);
    const SymbolTable& T = *res.system.tab;
    auto eqs = res.system.equations;
    auto implies_eq = [&](const char* s) { return implies(T, eqs, parse(s, T), 2); };
    CHECK(implies_eq("eta_u"));
    CHECK(implies_eq("eta_v"));
    CHECK(implies_eq("eta_x1"));
    CHECK(implies_eq("2*xi1_x1 - eta_t"));
    CHECK(implies_eq("pi1_uu"));  // phi linear in u for the heat equation
}

TEST_CASE("trivial ansatz d_t produces no nontrivial equations")
{
    // the residual of d_t on an autonomous opaque system is identically zero;
    // generate_determining's ansatz is the general one, so check prolong2_apply
    // directly
    auto res = generate_determining(SystemKind::FirstOrder, 1, 1);
    auto T = res.system.tab;
    VectorField P0 = parse_field("d_t", T);
    DiffusionSystem sys = DiffusionSystem::first_order(
        T, 1, atom(*T, *T->lookup_declared("f1")), atom(*T, *T->lookup_declared("f2")));
    auto [r1, r2] = prolong2_apply(P0, sys);
    CHECK(r1.is_zero());
    CHECK(r2.is_zero());
}

TEST_CASE("classify_residual: worked example and cross-route agreement")
{
    auto tab = std::make_shared<SymbolTable>();
    tab->init_standard(1);
    SymbolId alpha = tab->register_parameter("alpha");
    SymbolId lam = tab->register_parameter("lambda");
    (void)alpha;
    (void)lam;
    tab->freeze();
    SamplingDomain dom;
    auto P = [&](const char* s) { return parse(s, *tab); };
    auto sys = DiffusionSystem::first_order(tab, 1, P("alpha*u^3*v^-2"), P("lambda*u^2*v^-1"));

    SUBCASE("(6.21): X2 = u d_u + v d_v gives f^a = (u du + v dv) f^a")
    {
        MainSymmetryCoeffs c;
        c.mu = Expr();
        c.C1 = num(1);
        c.C2 = num(1);
        auto [r1, r2] = classify_residual(sys, c);
        CHECK(is_zero(*tab, r1, dom).kind == Zero::ProvedZero);
        CHECK(is_zero(*tab, r2, dom).kind == Zero::ProvedZero);
        // cross-route: the corresponding field passes check_symmetry
        CHECK(check_symmetry(c.to_field(sys), sys, dom).pass);
    }
    SUBCASE("X1 = 2D + v d_v passes both routes")
    {
        MainSymmetryCoeffs c;
        c.mu = num(-2);
        c.C2 = num(1);
        auto [r1, r2] = classify_residual(sys, c);
        CHECK(is_zero(*tab, r1, dom).passed());
        CHECK(is_zero(*tab, r2, dom).passed());
        CHECK(check_symmetry(c.to_field(sys), sys, dom).pass);
    }
    SUBCASE("zero coefficients leave a vanishing residual for opaque f")
    {
        auto tab2 = std::make_shared<SymbolTable>();
        tab2->init_standard(1);
        auto fid1 = tab2->register_opaque("Fa");
        auto fid2 = tab2->register_opaque("Fb");
        tab2->freeze();
        Expr w = add(sym(tab2->u()), sym(tab2->v()));
        auto sys2 = DiffusionSystem::diagonal(tab2, num(1), fun(fid1, w), fun(fid2, w));
        MainSymmetryCoeffs c;
        auto [r1, r2] = classify_residual(sys2, c);
        CHECK(r1.is_zero());
        CHECK(r2.is_zero());
    }
    SUBCASE("(6.2) as printed disagrees with (6.3): recorded discrepancy")
    {
        // f1 = -u f1_u would need u f1_u = -f1; the actual solution has u f1_u = 3 f1
        Expr lhs = add(sys.f1, mul(sym(tab->u()), diff(*tab, sys.f1, tab->u())));
        CHECK(is_zero(*tab, lhs, dom).kind == Zero::NonZero);
    }
    SUBCASE("C3/C4 require a = 1")
    {
        auto sysd = DiffusionSystem::diagonal(tab, num(-1), P("u*v"), P("u*v"));
        MainSymmetryCoeffs c;
        c.C3 = num(1);
        CHECK_THROWS_AS((void)classify_residual(sysd, c), RdsymError);
    }
}

TEST_CASE("classify_residual matches check_symmetry on a diagonal a = 1 row")
{
    // Table 9 row 3: f1 = eta v, f2 = -v^2/u with X = D - v d_v
    auto tab = std::make_shared<SymbolTable>();
    tab->init_standard(1);
    tab->register_parameter("eta");
    tab->freeze();
    SamplingDomain dom;
    auto P = [&](const char* s) { return parse(s, *tab); };
    auto sys = DiffusionSystem::diagonal(tab, num(1), P("eta*v"), P("-v^2*u^-1"));
    MainSymmetryCoeffs c;
    c.mu = num(-1);
    c.C2 = num(-1);
    auto [r1, r2] = classify_residual(sys, c);
    CHECK(is_zero(*tab, r1, dom).passed());
    CHECK(is_zero(*tab, r2, dom).passed());
    CHECK(check_symmetry(c.to_field(sys), sys, dom).pass);
}

TEST_CASE("extension flags: Jackiw-Teitelboim and the exactness grid")
{
    auto tab = std::make_shared<SymbolTable>();
    tab->init_standard(1);
    tab->freeze();
    SamplingDomain dom;
    auto P = [&](const char* s) { return parse(s, *tab); };

    SUBCASE("JT satisfies (4.8) at m = 1")
    {
        auto sys = DiffusionSystem::diagonal(tab, num(-1), P("-2*u^2*v"), P("2*u*v^2"));
        auto flags = extension_flags(sys, dom);
        CHECK(flags.galilei.on);
        CHECK(flags.galilei.residual1.kind == Zero::ProvedZero);
    }
    SUBCASE("JT at m = 2 additionally satisfies the conformal package")
    {
        auto tab2 = std::make_shared<SymbolTable>();
        tab2->init_standard(2);
        tab2->freeze();
        auto sys = DiffusionSystem::diagonal(tab2, num(-1), parse("-2*u^2*v", *tab2),
                                             parse("2*u*v^2", *tab2));
        auto flags = extension_flags(sys, dom);
        CHECK(flags.galilei.on);
        CHECK(flags.conformal.on);
    }
    SUBCASE("f1 = f2 = 0 passes Galilei trivially")
    {
        auto sys = DiffusionSystem::diagonal(tab, num(1), Expr(), Expr());
        auto flags = extension_flags(sys, dom);
        CHECK(flags.galilei.residual1.kind == Zero::ProvedZero);
        CHECK(flags.galilei.residual2.kind == Zero::ProvedZero);
        CHECK(flags.galilei.on);
    }
    SUBCASE("exp-Galilei finds gamma symbolically on Table 9 row 11")
    {
        auto sys = DiffusionSystem::diagonal(tab, num(1), P("u*log(u)"), P("v*log(u)"));
        auto flags = extension_flags(sys, dom);
        CHECK(flags.exp_galilei.on);
        CHECK(sub(flags.exp_galilei.gamma, num(1)).is_zero());
    }
    SUBCASE("a = 0 has no extensions")
    {
        auto sys = DiffusionSystem::diagonal(tab, Expr(), P("u*v"), P("v"));
        auto flags = extension_flags(sys, dom);
        CHECK_FALSE(flags.galilei.on);
        CHECK(flags.galilei.note.find("a = 0") != std::string::npos);
    }
    SUBCASE("first-order systems are rejected")
    {
        auto sys = DiffusionSystem::first_order(tab, 1, P("u"), P("v"));
        CHECK_THROWS_AS((void)extension_flags(sys, dom), RdsymError);
    }
}

TEST_CASE("determining solutions pass check_symmetry (completeness spot check)")
{
    // pick concrete solutions of (2.8) for p = 1, m = 1 and verify them on an
    // opaque system via check_symmetry: translations, the dilatation family
    auto res = generate_determining(SystemKind::FirstOrder, 1, 1);
    auto T = res.system.tab;
    DiffusionSystem sys = DiffusionSystem::first_order(
        T, 1, atom(*T, *T->lookup_declared("f1")), atom(*T, *T->lookup_declared("f2")));
    SamplingDomain dom;
    for (const char* fld : {"d_t", "d_x1"}) {
        CHECK(check_symmetry(parse_field(fld, T), sys, dom).pass);
    }
}
