#include "rdsym/equiv.hpp"

#include <doctest.h>

#include <random>

using namespace rdsym;

namespace {

struct Fx {
    std::shared_ptr<SymbolTable> tab = std::make_shared<SymbolTable>();
    Fx(std::vector<std::string> params = {}, std::vector<std::string> opaques = {})
    {
        tab->init_standard(1);
        for (auto& p : params) tab->register_parameter(p);
        for (auto& o : opaques) tab->register_opaque(o);
        tab->freeze();
    }
    std::shared_ptr<const SymbolTable> T() const { return tab; }
    Expr P(const std::string& s) const { return parse(s, *tab); }
};

}  // namespace

TEST_CASE("the K~ mix implements the a -> 1/a move")
{
    Fx f;
    auto sys = DiffusionSystem::diagonal(f.T(), num(2), f.P("u^2*v"), f.P("u*v^2"));
    auto T = PointTransformation::tilde_mix({Expr(), num(1), num(1), Expr()});
    auto out = apply_to_system(T, sys);
    CHECK(sub(out.a, num(1, 2)).is_zero());
    // f~1 = a^-1 k1 f2(u <- v, v <- u) = (1/2) u^2 v ; f~2 = (1/2) u v^2
    CHECK(sub(out.f1, f.P("1/2*v^2*u")).is_zero());
    CHECK(sub(out.f2, f.P("1/2*v*u^2")).is_zero());

    // applying the inverse antidiagonal mix returns the original system exactly
    auto back = apply_to_system(PointTransformation::tilde_mix({Expr(), num(1), num(1), Expr()}),
                                out);
    CHECK(sub(back.a, sys.a).is_zero());
    CHECK(sub(back.f1, sys.f1).is_zero());
    CHECK(sub(back.f2, sys.f2).is_zero());
}

TEST_CASE("identity transformation returns a structurally equal system")
{
    Fx f;
    auto sys = DiffusionSystem::diagonal(f.T(), num(1), f.P("u^2"), f.P("u*v"));
    auto id = PointTransformation::linear_mix({num(1), Expr(), Expr(), num(1)}, {Expr(), Expr()},
                                              num(1));
    auto out = apply_to_system(id, sys);
    CHECK(sub(out.f1, sys.f1).is_zero());
    CHECK(sub(out.f2, sys.f2).is_zero());
}

TEST_CASE("group property: composing two linear mixes equals the composed data")
{
    Fx f;
    std::mt19937_64 rng(5);
    auto rat = [&]() { return Rational((long long)(rng() % 7) + 1, (long long)(rng() % 3) + 1); };
    for (int trial = 0; trial < 10; ++trial) {
        auto sys = DiffusionSystem::diagonal(f.T(), num(rat()), f.P("u^2*v"), f.P("u + v^2"));
        Rational k1 = rat(), k2 = rat(), b1 = rat(), b2 = rat(), l1 = rat();
        Rational k1b = rat(), k2b = rat(), b1b = rat(), b2b = rat(), l2 = rat();
        auto T1 = PointTransformation::linear_mix({num(k1), Expr(), Expr(), num(k2)},
                                                  {num(b1), num(b2)}, num(l1));
        auto T2 = PointTransformation::linear_mix({num(k1b), Expr(), Expr(), num(k2b)},
                                                  {num(b1b), num(b2b)}, num(l2));
        // composite data: K = K2 K1, b = K2 b1 + b2, lambda = l1 l2
        auto T12 = PointTransformation::linear_mix(
            {num(k1b * k1), Expr(), Expr(), num(k2b * k2)},
            {num(k1b * b1 + b1b), num(k2b * b2 + b2b)}, num(l1 * l2));
        auto lhs = apply_to_system(T2, apply_to_system(T1, sys));
        auto rhs = apply_to_system(T12, sys);
        CHECK(sub(lhs.f1, rhs.f1).is_zero());
        CHECK(sub(lhs.f2, rhs.f2).is_zero());
    }
}

TEST_CASE("AET 3 on Table 2 row 5: extra constant absorbed by the slot")
{
    Fx f({"rho"}, {"F2"});
    auto sys = DiffusionSystem::diagonal(f.T(), num(1, 2), Expr(), f.P("F2(u)"));
    auto T = PointTransformation::aet(3, {{"rho", f.P("rho")}});
    auto out = apply_to_system(T, sys);
    CHECK(sub(out.f2, f.P("F2(u) + rho")).is_zero());
    CHECK(out.f1.is_zero());

    // full verify_aet_on: match with the slot redefinition, and the AET is not a
    // symmetry (it changes f)
    ClassTemplate tmpl;
    tmpl.tab = f.T();
    tmpl.f1 = Expr();
    tmpl.f2 = f.P("F2(u)");
    tmpl.opaque_slots = {*f.tab->lookup_opaque("F2")};
    tmpl.opaque_args = {sym(f.tab->u())};
    SamplingDomain dom;
    // instantiate the slot with each probe shape first
    for (const char* shape : {"u^2", "exp(u)", "log(u)", "u"}) {
        DiffusionSystem inst = sys;
        inst.f2 = f.P(shape);
        auto verdict = verify_aet_on(T, inst, tmpl, dom);
        INFO(shape);
        CHECK(verdict.class_preserved);
        CHECK(verdict.genuinely_changes_f);
    }
}

TEST_CASE("AET 22 with rho = 0 is the identity (trivially preserved)")
{
    Fx f({}, {"F2"});
    auto sys = DiffusionSystem::first_order(f.T(), 1, f.P("u^2"), f.P("u"));
    auto T = PointTransformation::aet(22, {{"rho", Expr()}});
    auto out = apply_to_system(T, sys);
    CHECK(sub(out.f1, sys.f1).is_zero());
    CHECK(sub(out.f2, sys.f2).is_zero());
}

TEST_CASE("non-class-preserving transformations throw with a residual witness")
{
    Fx f;
    // AET 6 mixes v <- v + rho t u; for a != 1 the diffusion matrix breaks
    auto sys = DiffusionSystem::diagonal(f.T(), num(1, 2), f.P("u^2"), f.P("v"));
    auto T = PointTransformation::aet(6, {{"rho", num(1)}});
    CHECK_THROWS_AS((void)apply_to_system(T, sys), NonClassPreserving);
    // AET 3 on a v-dependent f2 leaves explicit t: not autonomous
    auto sys2 = DiffusionSystem::diagonal(f.T(), num(1), f.P("u"), f.P("v^2"));
    auto T3 = PointTransformation::aet(3, {{"rho", num(1)}});
    CHECK_THROWS_AS((void)apply_to_system(T3, sys2), NonClassPreserving);
}

TEST_CASE("matches_class: spec examples")
{
    SamplingDomain dom;
    SUBCASE("concrete u^3 F(v - ln u) against the Table 1 row 4 template")
    {
        Fx f({}, {"F1", "F2"});
        ClassTemplate tmpl;
        tmpl.tab = f.T();
        tmpl.f1 = f.P("u^3*F1(v - log(u))");
        tmpl.f2 = f.P("u^2*F2(v - log(u))");
        tmpl.opaque_slots = {*f.tab->lookup_opaque("F1"), *f.tab->lookup_opaque("F2")};
        tmpl.opaque_args = {f.P("v - log(u)"), f.P("v - log(u)")};
        auto sys = DiffusionSystem::first_order(f.T(), 1, f.P("u^3*exp(v - log(u))"),
                                                f.P("u^2*(v - log(u))^2"));
        auto m = matches_class(sys, tmpl, dom);
        CHECK(m.matched);
        // mismatched functional dependence fails
        auto bad = DiffusionSystem::first_order(f.T(), 1, f.P("u^3*exp(v)"), f.P("u^2"));
        CHECK_FALSE(matches_class(bad, tmpl, dom).matched);
    }
    SUBCASE("non-autonomous systems fail")
    {
        Fx f({}, {"F1", "F2"});
        ClassTemplate tmpl;
        tmpl.tab = f.T();
        tmpl.f1 = f.P("F1(u)");
        tmpl.f2 = f.P("F2(u)");
        tmpl.opaque_slots = {*f.tab->lookup_opaque("F1"), *f.tab->lookup_opaque("F2")};
        tmpl.opaque_args = {sym(f.tab->u()), sym(f.tab->u())};
        auto sys = DiffusionSystem::diagonal(f.T(), num(1), f.P("t*u"), f.P("u"));
        auto m = matches_class(sys, tmpl, dom);
        CHECK_FALSE(m.matched);
        CHECK(m.note.find("autonomous") != std::string::npos);
    }
    SUBCASE("two-slot template (Table 6 style) solves the linear slot system")
    {
        Fx f({}, {"F1", "F2"});
        ClassTemplate tmpl;
        tmpl.tab = f.T();
        // f1 = u F1(w) + v F2(w), f2 = v F1(w) - u F2(w), w = u (simplified shape)
        tmpl.f1 = f.P("u*F1(u) + v*F2(u)");
        tmpl.f2 = f.P("v*F1(u) - u*F2(u)");
        tmpl.opaque_slots = {*f.tab->lookup_opaque("F1"), *f.tab->lookup_opaque("F2")};
        tmpl.opaque_args = {sym(f.tab->u()), sym(f.tab->u())};
        auto sys = DiffusionSystem::diagonal(f.T(), num(1), f.P("u*log(u) + v*u^2"),
                                             f.P("v*log(u) - u*u^2"));
        CHECK(matches_class(sys, tmpl, dom).matched);
        auto bad = DiffusionSystem::diagonal(f.T(), num(1), f.P("u*log(u) + v*u^2"),
                                             f.P("v*log(v) - u^3"));
        CHECK_FALSE(matches_class(bad, tmpl, dom).matched);
    }
}

TEST_CASE("symmetry pushforward: T*X is a symmetry of T(sys)")
{
    SamplingDomain dom;
    Fx f({"delta", "mu"});
    auto sys = DiffusionSystem::first_order(f.T(), 1, f.P("delta*u^3*v^-2"),
                                            f.P("mu*u^2*v^-1"));
    VectorField X = parse_field("2*(t*d_t + 0.5*x1*d_x1) + v*d_v", f.T());
    REQUIRE(check_symmetry(X, sys, dom).pass);

    // a (13)-mix with lambda = 1 (first-order systems keep p fixed)
    auto T = PointTransformation::linear_mix({num(3), Expr(), Expr(), num(3)},
                                             {num(1), num(2)}, num(1));
    auto sys2 = apply_to_system(T, sys);
    auto X2 = push_forward(T, X);
    CHECK(check_symmetry(X2, sys2, dom).pass);

    // an AET: 3 shifts v; the pushforward picks up the t-dependent correction
    Fx g({"rho"}, {"F2"});
    auto gsys = DiffusionSystem::diagonal(g.T(), num(1, 2), Expr(), g.P("F2(u)"));
    VectorField Y = parse_field("t*d_t + 0.5*x1*d_x1 + v*d_v", g.T());
    REQUIRE(check_symmetry(Y, gsys, dom).pass);
    auto TA = PointTransformation::aet(3, {{"rho", g.P("rho")}});
    auto gsys2 = apply_to_system(TA, gsys);
    auto Y2 = push_forward(TA, Y);
    CHECK(check_symmetry(Y2, gsys2, dom).pass);
}
