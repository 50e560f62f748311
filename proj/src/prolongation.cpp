#include "rdsym/prolongation.hpp"

#include "rdsym/linalg.hpp"

#include <algorithm>
#include <map>

namespace rdsym {

Expr total_derivative(const SymbolTable& tab, const Expr& e, SymbolId s)
{
    Expr out = diff(tab, e, s);
    // chain through every jet coordinate the expression depends on (the dependent
    // bases u, v always count: declared atoms may carry hidden u/v dependence)
    std::set<SymbolId> jets;
    for (SymbolId id : free_symbols(e)) {
        const SymbolInfo& info = tab.info(id);
        if (info.kind == SymKind::Jet) jets.insert(id);
    }
    jets.insert(tab.u());
    jets.insert(tab.v());
    for (SymbolId j : jets) {
        Expr de = diff(tab, e, j);
        if (de.is_zero()) continue;
        const SymbolInfo& info = tab.info(j);
        std::vector<SymbolId> multi = info.multi;
        multi.push_back(s);
        SymbolId succ = tab.jet(info.base, std::move(multi));  // throws on overflow
        out = add(out, mul(sym(succ), de));
    }
    return out;
}

Expr prolonged_coeff(const VectorField& X, SymbolId dep, const std::vector<SymbolId>& multi)
{
    const SymbolTable& tab = *X.tab;
    if (multi.empty()) return dep == tab.u() ? X.phi_u() : X.phi_v();
    std::vector<SymbolId> head = multi;
    SymbolId s = head.back();
    head.pop_back();
    Expr prev = prolonged_coeff(X, dep, head);
    Expr out = total_derivative(tab, prev, s);
    // - sum over independent directions w: D_s(coeff_w) * u_{head, w}
    auto indep = tab.independents();
    for (std::size_t wi = 0; wi < indep.size(); ++wi) {
        const Expr& cw = (wi == 0) ? X.eta : X.xi[wi - 1];
        if (cw.is_zero()) continue;
        Expr d = total_derivative(tab, cw, s);
        if (d.is_zero()) continue;
        std::vector<SymbolId> m2 = head;
        m2.push_back(indep[wi]);
        out = sub(out, mul(d, sym(tab.jet(dep, std::move(m2)))));
    }
    return out;
}

namespace {

Expr laplacian_jet(const SymbolTable& tab, SymbolId dep)
{
    std::vector<Expr> terms;
    for (SymbolId x : tab.xs()) terms.push_back(sym(tab.jet(dep, {x, x})));
    return add(std::move(terms));
}

/// pr X applied to a jet-space function E.
Expr pr_apply(const VectorField& X, const Expr& E)
{
    const SymbolTable& tab = *X.tab;
    Expr out;
    auto indep = tab.independents();
    for (std::size_t wi = 0; wi < indep.size(); ++wi) {
        const Expr& cw = (wi == 0) ? X.eta : X.xi[wi - 1];
        if (cw.is_zero()) continue;
        Expr d = diff(tab, E, indep[wi]);
        if (!d.is_zero()) out = add(out, mul(cw, d));
    }
    for (SymbolId dep : {tab.u(), tab.v()}) {
        // every jet coordinate of dep that E depends on
        for (SymbolId id : free_symbols(E)) {
            const SymbolInfo& info = tab.info(id);
            if (info.kind != SymKind::Jet || info.base != dep) continue;
            Expr d = diff(tab, E, id);
            if (d.is_zero()) continue;
            out = add(out, mul(prolonged_coeff(X, dep, info.multi), d));
        }
    }
    return out;
}

}  // namespace

std::pair<Expr, Expr> prolong2_apply(const VectorField& X, const DiffusionSystem& sys)
{
    const SymbolTable& tab = *sys.tab;
    Expr u_t = sym(tab.jet(tab.u(), {tab.t()}));
    Expr v_t = sym(tab.jet(tab.v(), {tab.t()}));
    Expr lap_u = laplacian_jet(tab, tab.u());
    Expr lap_v = laplacian_jet(tab, tab.v());

    Expr delta1 = sub(sub(u_t, lap_u), sys.f1);
    Expr delta2;
    Expr rhs_u = add(lap_u, sys.f1);  // u_t on-shell
    Expr rhs_v;
    if (sys.kind == SystemKind::Diagonal) {
        delta2 = sub(sub(v_t, mul(sys.a, lap_v)), sys.f2);
        rhs_v = add(mul(sys.a, lap_v), sys.f2);
    } else {
        Expr ux = sym(tab.jet(tab.u(), {tab.x(tab.m())}));
        delta2 = sub(sub(v_t, mul(num(sys.p), ux)), sys.f2);
        rhs_v = add(mul(num(sys.p), ux), sys.f2);
    }

    Expr r1 = pr_apply(X, delta1);
    Expr r2 = pr_apply(X, delta2);

    // on-shell reduction: u_t, v_t first, then their spatial total derivatives
    std::map<SymbolId, Expr> shell;
    shell.emplace(tab.jet(tab.u(), {tab.t()}), rhs_u);
    shell.emplace(tab.jet(tab.v(), {tab.t()}), rhs_v);
    r1 = substitute(tab, r1, shell);
    r2 = substitute(tab, r2, shell);

    std::map<SymbolId, Expr> shell2;
    for (SymbolId x : tab.xs()) {
        shell2.emplace(tab.jet(tab.u(), {tab.t(), x}), total_derivative(tab, rhs_u, x));
        shell2.emplace(tab.jet(tab.v(), {tab.t(), x}), total_derivative(tab, rhs_v, x));
    }
    r1 = substitute(tab, r1, shell2);
    r2 = substitute(tab, r2, shell2);
    return {r1, r2};
}

SymmetryReport check_symmetry(const VectorField& X, const DiffusionSystem& sys,
                              const SamplingDomain& dom)
{
    SymmetryReport rep;
    rep.field = X;
    auto [r1, r2] = prolong2_apply(X, sys);
    rep.residual1 = r1;
    rep.residual2 = r2;
    rep.verdict1 = is_zero(*sys.tab, r1, dom);
    rep.verdict2 = is_zero(*sys.tab, r2, dom);
    rep.pass = rep.verdict1.passed() && rep.verdict2.passed();
    return rep;
}

Expr apply_first_order(const VectorField& X, const Expr& g)
{
    const SymbolTable& tab = *X.tab;
    Expr out;
    auto addterm = [&](const Expr& c, SymbolId s) {
        if (c.is_zero()) return;
        Expr d = diff(tab, g, s);
        if (!d.is_zero()) out = add(out, mul(c, d));
    };
    addterm(X.eta, tab.t());
    for (int i = 1; i <= tab.m(); ++i) addterm(X.xi[i - 1], tab.x(i));
    addterm(X.phi_u(), tab.u());
    addterm(X.phi_v(), tab.v());
    return out;
}

VectorField lie_bracket(const VectorField& X, const VectorField& Y)
{
    auto tab = X.tab;
    Expr eta = sub(apply_first_order(X, Y.eta), apply_first_order(Y, X.eta));
    std::vector<Expr> xi;
    for (int i = 0; i < tab->m(); ++i)
        xi.push_back(sub(apply_first_order(X, Y.xi[i]), apply_first_order(Y, X.xi[i])));
    Expr pu = sub(apply_first_order(X, Y.phi_u()), apply_first_order(Y, X.phi_u()));
    Expr pv = sub(apply_first_order(X, Y.phi_v()), apply_first_order(Y, X.phi_v()));
    return VectorField::from_phi(tab, eta, std::move(xi), pu, pv);
}

ClosureResult closure_check(const std::vector<VectorField>& fields, const SamplingDomain& dom)
{
    ClosureResult res;
    if (fields.empty()) throw RdsymError("closure_check requires a nonempty field list");
    const auto tab = fields.front().tab;
    const int n = static_cast<int>(fields.size());
    const int ncoords = 3 + tab->m();

    auto coords_of = [&](const VectorField& f) {
        std::vector<Expr> cs;
        cs.push_back(f.eta);
        for (const auto& x : f.xi) cs.push_back(x);
        cs.push_back(f.phi_u());
        cs.push_back(f.phi_v());
        return cs;
    };

    const int nprobes = 12;
    std::vector<std::vector<Expr>> basis_coords;
    basis_coords.reserve(fields.size());
    for (const auto& f : fields) basis_coords.push_back(coords_of(f));

    res.constants.assign(n, std::vector<std::vector<Rational>>(
                                n, std::vector<Rational>(static_cast<std::size_t>(n), Rational(0))));

    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            VectorField br = lie_bracket(fields[i], fields[j]);
            auto bc = coords_of(br);
            // assemble numeric least-squares system over probes
            std::vector<std::vector<double>> A;
            std::vector<double> b;
            bool numeric_ok = true;
            for (int pi = 0; pi < nprobes && numeric_ok; ++pi) {
                ProbePoint pp(*tab, dom, pi, 0xc105);
                for (int c = 0; c < ncoords; ++c) {
                    std::vector<double> row(static_cast<std::size_t>(n));
                    for (int k = 0; k < n; ++k) {
                        double vk = pp.value_of(basis_coords[k][c]);
                        if (!std::isfinite(vk)) numeric_ok = false;
                        row[static_cast<std::size_t>(k)] = vk;
                    }
                    double rhs = pp.value_of(bc[c]);
                    if (!std::isfinite(rhs)) numeric_ok = false;
                    A.push_back(std::move(row));
                    b.push_back(rhs);
                }
            }
            std::vector<double> sol;
            if (!numeric_ok || !least_squares(A, b, sol)) {
                res.witness = {i, j};
                res.note = "bracket could not be expanded numerically";
                return res;
            }
            std::vector<Rational> snapped(static_cast<std::size_t>(n));
            bool snap_ok = true;
            for (int k = 0; k < n; ++k) {
                auto q = rational_snap(sol[static_cast<std::size_t>(k)], 1000, 1e-6);
                if (!q) {
                    snap_ok = false;
                    break;
                }
                snapped[static_cast<std::size_t>(k)] = *q;
            }
            if (!snap_ok) {
                res.symbolic_only = true;
                res.witness = {i, j};
                res.note = "structure constants not reconstructible as small rationals";
                return res;
            }
            // symbolic verification: bracket - sum_k c_k X_k == 0 coefficient-wise
            VectorField acc = br;
            for (int k = 0; k < n; ++k)
                if (snapped[static_cast<std::size_t>(k)] != 0)
                    acc = acc.plus(fields[k].scaled(num(-snapped[static_cast<std::size_t>(k)])));
            bool all_zero = true;
            for (const auto& c : coords_of(acc)) {
                if (!is_zero(*tab, c, dom).passed()) {
                    all_zero = false;
                    break;
                }
            }
            if (!all_zero) {
                res.witness = {i, j};
                res.note = "bracket leaves the span of the basis";
                return res;
            }
            res.constants[i][j] = snapped;
            for (int k = 0; k < n; ++k)
                res.constants[j][i][static_cast<std::size_t>(k)] =
                    -snapped[static_cast<std::size_t>(k)];
        }
    }
    res.closed = true;
    return res;
}

}  // namespace rdsym
