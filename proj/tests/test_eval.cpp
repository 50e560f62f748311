#include "rdsym/eval.hpp"

#include <doctest.h>

#include <cmath>

using namespace rdsym;

namespace {

// independent direct-evaluation oracle for fixed rational points
double direct_eval(const SymbolTable& tab, const Expr& e, double u, double v)
{
    switch (e.kind()) {
        case Kind::Num: return to_double(e.num());
        case Kind::Sym:
            if (e.sym() == tab.u()) return u;
            if (e.sym() == tab.v()) return v;
            FAIL("unexpected symbol");
            return 0;
        case Kind::Add: {
            double s = 0;
            for (const auto& k : e.kids()) s += direct_eval(tab, k, u, v);
            return s;
        }
        case Kind::Mul: {
            double p = 1;
            for (const auto& k : e.kids()) p *= direct_eval(tab, k, u, v);
            return p;
        }
        case Kind::Pow:
            return std::pow(direct_eval(tab, e.base(), u, v), direct_eval(tab, e.expo(), u, v));
        case Kind::Exp: return std::exp(direct_eval(tab, e.arg(), u, v));
        default: FAIL("unexpected node"); return 0;
    }
}

}  // namespace

TEST_CASE("is_zero verdict classes")
{
    auto tab = std::make_shared<SymbolTable>();
    tab->init_standard(1);
    SymbolId nu = tab->register_parameter("nu");
    (void)nu;
    tab->register_opaque("F1");
    tab->freeze();
    SamplingDomain dom;

    CHECK(is_zero(*tab, parse("(u+v)^2 - u^2 - 2*u*v - v^2", *tab), dom).kind ==
          Zero::ProvedZero);
    CHECK(is_zero(*tab, parse("exp(u+v) - exp(u)*exp(v)", *tab), dom).kind == Zero::ProvedZero);

    // a transcendental identity the normalizer does not know: probing decides
    Expr probed = parse("exp(2*log(u)) - u^2", *tab);
    auto pv = is_zero(*tab, probed, dom);
    CHECK(pv.passed());

    auto nz = is_zero(*tab, parse("u^2 - u*v", *tab), dom);
    CHECK(nz.kind == Zero::NonZero);
    CHECK(nz.witness_value != doctest::Approx(0.0));

    // the spec's pinned point: value at (u, v) = (1, 2) is -1 by the direct oracle
    CHECK(direct_eval(*tab, parse("u^2 - u*v", *tab), 1.0, 2.0) == doctest::Approx(-1.0));
}

TEST_CASE("opaque indeterminates: invariance holds identically in F and derivatives")
{
    auto tab = std::make_shared<SymbolTable>();
    tab->init_standard(1);
    tab->register_opaque("F1");
    tab->freeze();
    SamplingDomain dom;
    // same argument, same order: cancels
    CHECK(is_zero(*tab, parse("F1(u*v) - F1(v*u)", *tab), dom).kind == Zero::ProvedZero);
    // derivative orders are independent indeterminates
    CHECK(is_zero(*tab, parse("F1(u) - F1'(u)", *tab), dom).kind == Zero::NonZero);
    // structurally different arguments are independent
    CHECK(is_zero(*tab, parse("F1(u) - F1(v)", *tab), dom).kind == Zero::NonZero);
}

TEST_CASE("unsampleable domain raises")
{
    auto tab = std::make_shared<SymbolTable>();
    tab->init_standard(1);
    SymbolId nu = tab->register_parameter("nu");
    tab->freeze();
    SamplingDomain dom;
    dom.set_range(nu, Rational(2), Rational(1));  // empty range
    CHECK_THROWS_AS((void)is_zero(*tab, parse("nu*u", *tab), dom), DomainError);
}

TEST_CASE("probing is deterministic for a fixed seed")
{
    auto tab = std::make_shared<SymbolTable>();
    tab->init_standard(1);
    tab->freeze();
    SamplingDomain dom;
    dom.seed = 1234;
    auto v1 = is_zero(*tab, parse("u^2 - u*v", *tab), dom);
    auto v2 = is_zero(*tab, parse("u^2 - u*v", *tab), dom);
    CHECK(v1.witness_value == v2.witness_value);
    CHECK(v1.witness == v2.witness);
}
