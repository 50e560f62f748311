#include "rdsym/equiv.hpp"

#include "rdsym/linalg.hpp"

#include <sstream>

namespace rdsym {

PointTransformation PointTransformation::linear_mix(std::array<Expr, 4> K,
                                                    std::array<Expr, 2> shift, Expr lambda)
{
    PointTransformation t;
    t.kind = Kind::LinearMix;
    t.K = std::move(K);
    t.shift = std::move(shift);
    t.lambda = std::move(lambda);
    return t;
}

PointTransformation PointTransformation::tilde_mix(std::array<Expr, 4> Ktilde)
{
    PointTransformation t;
    t.kind = Kind::LinearMix;
    t.tilde = true;
    t.K = std::move(Ktilde);
    t.lambda = num(1);
    t.shift = {Expr(), Expr()};
    return t;
}

PointTransformation PointTransformation::aet(int id, std::map<std::string, Expr> params)
{
    PointTransformation t;
    t.kind = Kind::Aet;
    t.aet_id = id;
    t.params = std::move(params);
    return t;
}

namespace {

Expr getp(const std::map<std::string, Expr>& params, const std::string& name)
{
    auto it = params.find(name);
    if (it == params.end()) throw RdsymError("AET parameter '" + name + "' not bound");
    return it->second;
}

}  // namespace

AetMap aet_map(int id, const SymbolTable& tab, const std::map<std::string, Expr>& params)
{
    Expr t = sym(tab.t());
    Expr one = num(1);
    Expr zero;
    AetMap m;
    m.M = {one, zero, zero, one};
    m.c = {zero, zero};
    auto P = [&](const char* n) { return getp(params, n); };
    switch (id) {
        case 1: {
            Expr e = exp_(mul(P("rho"), t));
            m.M = {e, zero, zero, e};
            break;
        }
        case 2: m.c = {mul(P("omega"), t), zero}; break;
        case 3: m.c = {zero, mul(P("rho"), t)}; break;
        case 4:
            m.M = {one, zero, zero, exp_(neg(mul(P("rho"), t)))};
            m.c = {mul(P("mu"), P("rho"), t), zero};
            break;
        case 5:
            m.M = {exp_(mul(P("rho"), t)), zero, zero, one};
            m.c = {zero, neg(mul(P("kappa"), P("rho"), t))};
            break;
        case 6: m.M = {one, zero, mul(P("rho"), t), one}; break;
        case 7:
            m.M = {exp_(mul(num(2), P("omega"), t)), zero, zero, one};
            m.c = {zero, mul(P("omega"), pow(t, 2))};
            break;
        case 8:
            m.M = {one, zero, zero, exp_(mul(num(2), P("omega"), t))};
            m.c = {mul(P("omega"), pow(t, 2)), zero};
            break;
        case 9:
            m.M = {one, zero, neg(mul(num(2), P("rho"), t)), one};
            m.c = {zero, mul(P("rho"), P("delta"), pow(t, 2))};
            break;
        case 10: {
            Expr e = exp_(mul(num(2), P("rho"), t));
            m.M = {e, zero,
                   mul(e, add(mul(P("omega"), t), mul(P("rho"), pow(t, 2)))), e};
            break;
        }
        case 11: m.c = {mul(P("eta"), P("rho"), t), neg(mul(P("rho"), t))}; break;
        case 12: {
            Expr e = exp_(mul(P("kappa"), t));
            m.M = {e, zero, neg(mul(e, P("nu"), P("kappa"), t)), e};
            break;
        }
        case 13:
            m.M = {one, zero, mul(num(2), P("rho"), t), one};
            m.c = {mul(num(2), P("rho"), t), mul(num(2), pow(P("rho"), 2), pow(t, 2))};
            break;
        case 14:
            m.M = {exp_(mul(P("omega"), t)), zero, zero, exp_(mul(P("rho"), t))};
            break;
        case 15: {
            Expr e = exp_(mul(P("nu"), P("omega"), t));
            Expr ang = mul(P("omega"), P("sigma"), t);
            m.M = {mul(e, cos_(ang)), mul(e, sin_(ang)), neg(mul(e, sin_(ang))),
                   mul(e, cos_(ang))};
            break;
        }
        case 16: {
            Expr e = exp_(mul(num(2), P("omega"), t));
            Expr ang = mul(P("sigma"), P("omega"), pow(t, 2));
            m.M = {mul(e, cos_(ang)), neg(mul(e, sin_(ang))), mul(e, sin_(ang)),
                   mul(e, cos_(ang))};
            break;
        }
        case 17: {
            Expr e = exp_(mul(P("lambda"), P("omega"), pow(t, 2)));
            Expr ang = mul(num(2), P("omega"), t);
            m.M = {mul(e, cos_(ang)), mul(e, sin_(ang)), neg(mul(e, sin_(ang))),
                   mul(e, cos_(ang))};
            break;
        }
        case 18: {
            Expr e = exp_(mul(P("nu"), P("omega"), t));
            m.M = {e, zero, neg(mul(e, P("sigma"), P("omega"), t)), e};
            break;
        }
        case 19: {
            Expr e = exp_(mul(P("lambda"), P("omega"), pow(t, 2)));
            m.M = {e, zero, mul(e, num(2), P("omega"), t), e};
            break;
        }
        case 20:
            m.M = {exp_(mul(num(2), P("omega"), t)), zero, zero,
                   exp_(mul(P("eps"), P("omega"), pow(t, 2)))};
            break;
        case 21: {
            Expr w = P("omega"), r = P("rho");
            m.M = {one, zero, add(mul(num(3), w, pow(t, 2)), mul(r, t)), one};
            m.c = {mul(num(3), w, t),
                   add(mul(num(3), pow(w, 2), pow(t, 3)), mul(num(3), w, r, pow(t, 2)))};
            break;
        }
        case 22: m.c = {mul(P("rho"), sym(tab.x(tab.m()))), zero}; break;
        default: throw RdsymError("AET id must be 1..22");
    }
    return m;
}

namespace {

/// z-atom shift for the rotation AETs: expressed in new variables, the old polar
/// angle equals the new one plus this amount.
Expr polar_shift(int id, const SymbolTable& tab, const std::map<std::string, Expr>& params)
{
    Expr t = sym(tab.t());
    auto P = [&](const char* n) { return getp(params, n); };
    switch (id) {
        case 15: return mul(P("omega"), P("sigma"), t);
        case 16: return neg(mul(P("sigma"), P("omega"), pow(t, 2)));
        case 17: return mul(num(2), P("omega"), t);
        default: return Expr();
    }
}

struct Mat2 {
    Expr a, b, c, d;  // [[a,b],[c,d]]
    Expr det() const { return sub(mul(a, d), mul(b, c)); }
};

std::array<Expr, 4> invert(const Mat2& m)
{
    Expr det = m.det();
    if (det.is_zero()) throw RdsymError("singular 2x2 matrix");
    Expr idet = pow(det, num(-1));
    return {mul(idet, m.d), neg(mul(idet, m.b)), neg(mul(idet, m.c)), mul(idet, m.a)};
}

bool structurally_zero(const SymbolTable& tab, const Expr& e)
{
    return normalize(tab, e).is_zero();
}

Expr lap_of(const SymbolTable& tab, const Expr& e)
{
    Expr out;
    for (SymbolId x : tab.xs()) out = add(out, diff(tab, diff(tab, e, x), x));
    return out;
}

DiffusionSystem push_through_map(const DiffusionSystem& sys, const Mat2& M,
                                 const std::array<Expr, 2>& c, const Expr& polar_z_shift)
{
    const SymbolTable& T = *sys.tab;
    Expr t = sym(T.t());
    Expr u = sym(T.u());
    Expr v = sym(T.v());

    Expr Mp[4] = {diff(T, M.a, T.t()), diff(T, M.b, T.t()), diff(T, M.c, T.t()),
                  diff(T, M.d, T.t())};

    // class structure constraints on the diffusion part
    if (sys.kind == SystemKind::Diagonal) {
        // (MA - AM) must vanish: offdiagonals M.b (a-1), M.c (1-a)
        Expr r1 = mul(M.b, sub(sys.a, num(1)));
        Expr r2 = mul(M.c, sub(num(1), sys.a));
        if (!structurally_zero(T, r1))
            throw NonClassPreserving("mixing term u <- v incompatible with diffusion matrix",
                                     r1);
        if (!structurally_zero(T, r2))
            throw NonClassPreserving("mixing term v <- u incompatible with diffusion matrix",
                                     r2);
    } else {
        if (!structurally_zero(T, M.b))
            throw NonClassPreserving("first-order system: u may not mix with v", M.b);
        if (!structurally_zero(T, M.c))
            throw NonClassPreserving("first-order system: v may not mix with u", M.c);
        if (sys.p != 0) {
            Expr r = sub(M.d, M.a);
            if (!structurally_zero(T, r))
                throw NonClassPreserving("p u_x transport requires equal u,v scalings", r);
        }
    }

    // g_b = M' u + c_t - A lap(c) + M f
    Expr a2 = sys.kind == SystemKind::Diagonal ? sys.a : Expr();
    Expr g1 = add({mul(Mp[0], u), mul(Mp[1], v), diff(T, c[0], T.t()), neg(lap_of(T, c[0])),
                   mul(M.a, sys.f1), mul(M.b, sys.f2)});
    Expr g2_diffpart = sys.kind == SystemKind::Diagonal
                           ? neg(mul(a2, lap_of(T, c[1])))
                           : neg(mul(num(sys.p), diff(T, c[0], T.x(T.m()))));
    Expr g2 = add({mul(Mp[2], u), mul(Mp[3], v), diff(T, c[1], T.t()), g2_diffpart,
                   mul(M.c, sys.f1), mul(M.d, sys.f2)});

    // express in the new variables
    auto Minv = invert(M);
    std::map<SymbolId, Expr> back;
    back.emplace(T.u(), add(mul(Minv[0], sub(u, c[0])), mul(Minv[1], sub(v, c[1]))));
    back.emplace(T.v(), add(mul(Minv[2], sub(u, c[0])), mul(Minv[3], sub(v, c[1]))));

    auto push = [&](Expr g) {
        if (!polar_z_shift.is_zero()) {
            for (std::uint32_t d = 0; d < T.declared_count(); ++d) {
                if (!T.declared(d).evaluator) continue;
                if (atoms_of(g).count(d))
                    g = substitute_atom(T, g, d, add(atom(T, d), polar_z_shift));
            }
        }
        return substitute(T, g, back);
    };
    Expr f1n = push(g1);
    Expr f2n = push(g2);

    for (const Expr* f : {&f1n, &f2n}) {
        for (SymbolId s : free_symbols(*f)) {
            const SymbolInfo& info = T.info(s);
            if (info.kind == SymKind::Independent || (info.kind == SymKind::Jet && !info.multi.empty()))
                throw NonClassPreserving(
                    "transformed nonlinearity is not autonomous: " + to_string(T, *f), *f);
        }
    }

    DiffusionSystem out = sys;
    out.f1 = f1n;
    out.f2 = f2n;
    return out;
}

}  // namespace

DiffusionSystem apply_to_system(const PointTransformation& T, const DiffusionSystem& sys)
{
    const SymbolTable& tab = *sys.tab;
    switch (T.kind) {
        case PointTransformation::Kind::Euclidean: return sys;
        case PointTransformation::Kind::Aet: {
            AetMap m = aet_map(T.aet_id, tab, T.params);
            Mat2 M{m.M[0], m.M[1], m.M[2], m.M[3]};
            return push_through_map(sys, M, m.c, polar_shift(T.aet_id, tab, T.params));
        }
        case PointTransformation::Kind::LinearMix: break;
    }

    if (T.tilde) {
        if (sys.kind != SystemKind::Diagonal || sys.a.is_zero())
            throw RdsymError("the K~ mix requires a diagonal system with a != 0");
        if (!structurally_zero(tab, T.K[0]) || !structurally_zero(tab, T.K[3]))
            throw RdsymError("K~ must be antidiagonal");
        Expr k1 = T.K[1], k2 = T.K[2];
        if (k1.is_zero() || k2.is_zero()) throw RdsymError("K~ must be invertible");
        Expr u = sym(tab.u()), v = sym(tab.v());
        std::map<SymbolId, Expr> back;
        back.emplace(tab.u(), div(v, k2));  // old u in new variables
        back.emplace(tab.v(), div(u, k1));
        Expr ainv = pow(sys.a, num(-1));
        DiffusionSystem out = sys;
        out.a = ainv;
        out.f1 = mul(ainv, k1, substitute(tab, sys.f2, back));
        out.f2 = mul(ainv, k2, substitute(tab, sys.f1, back));
        return out;
    }

    // plain (13): u -> K u + b, f -> lambda^2 K f, t -> lambda^-2 t, x -> lambda^-1 x
    Mat2 K{T.K[0], T.K[1], T.K[2], T.K[3]};
    if (sys.kind == SystemKind::Diagonal) {
        bool a_is_one = sys.a.is_num() && sys.a.num() == 1;
        if (!a_is_one) {
            if (!structurally_zero(tab, mul(K.b, sub(sys.a, num(1)))) ||
                !structurally_zero(tab, mul(K.c, sub(sys.a, num(1)))))
                throw RdsymError("K must commute with diag(1, a): diagonal unless a = 1");
        }
        Expr u = sym(tab.u()), v = sym(tab.v());
        auto Kinv = invert(K);
        std::map<SymbolId, Expr> back;
        back.emplace(tab.u(),
                     add(mul(Kinv[0], sub(u, T.shift[0])), mul(Kinv[1], sub(v, T.shift[1]))));
        back.emplace(tab.v(),
                     add(mul(Kinv[2], sub(u, T.shift[0])), mul(Kinv[3], sub(v, T.shift[1]))));
        Expr l2 = pow(T.lambda, 2);
        DiffusionSystem out = sys;
        out.f1 = mul(l2, add(mul(K.a, substitute(tab, sys.f1, back)),
                             mul(K.b, substitute(tab, sys.f2, back))));
        out.f2 = mul(l2, add(mul(K.c, substitute(tab, sys.f1, back)),
                             mul(K.d, substitute(tab, sys.f2, back))));
        return out;
    }
    // first-order systems: no t,x rescaling (it would change p), constant mix only
    if (!(T.lambda.is_one()))
        throw RdsymError("first-order systems support lambda = 1 mixes only");
    return push_through_map(sys, K, T.shift, Expr());
}

VectorField push_forward(const PointTransformation& T, const VectorField& X)
{
    const SymbolTable& tab = *X.tab;
    Expr u = sym(tab.u()), v = sym(tab.v());
    if (T.kind == PointTransformation::Kind::Euclidean) return X;
    if (T.kind == PointTransformation::Kind::Aet) {
        AetMap m = aet_map(T.aet_id, tab, T.params);
        Mat2 M{m.M[0], m.M[1], m.M[2], m.M[3]};
        auto Minv = invert(M);
        std::map<SymbolId, Expr> back;
        back.emplace(tab.u(),
                     add(mul(Minv[0], sub(u, m.c[0])), mul(Minv[1], sub(v, m.c[1]))));
        back.emplace(tab.v(),
                     add(mul(Minv[2], sub(u, m.c[0])), mul(Minv[3], sub(v, m.c[1]))));
        auto Xof = [&](const Expr& target) { return apply_first_order(X, target); };
        Expr new_u = add(add(mul(M.a, u), mul(M.b, v)), m.c[0]);
        Expr new_v = add(add(mul(M.c, u), mul(M.d, v)), m.c[1]);
        Expr phi_u = substitute(tab, Xof(new_u), back);
        Expr phi_v = substitute(tab, Xof(new_v), back);
        Expr eta = substitute(tab, X.eta, back);
        std::vector<Expr> xi;
        for (const auto& x : X.xi) xi.push_back(substitute(tab, x, back));
        return VectorField::from_phi(X.tab, eta, std::move(xi), phi_u, phi_v);
    }
    // LinearMix
    if (T.tilde) {
        Expr k1 = T.K[1], k2 = T.K[2];
        std::map<SymbolId, Expr> back;
        back.emplace(tab.u(), div(v, k2));
        back.emplace(tab.v(), div(u, k1));
        Expr t_old = div(sym(tab.t()), num(1));  // t_new = a t_old is handled via eta scale
        (void)t_old;
        throw RdsymError("pushforward through the K~ mix is not implemented");
    }
    Mat2 K{T.K[0], T.K[1], T.K[2], T.K[3]};
    auto Kinv = invert(K);
    Expr l = T.lambda;
    std::map<SymbolId, Expr> back;
    back.emplace(tab.u(),
                 add(mul(Kinv[0], sub(u, T.shift[0])), mul(Kinv[1], sub(v, T.shift[1]))));
    back.emplace(tab.v(),
                 add(mul(Kinv[2], sub(u, T.shift[0])), mul(Kinv[3], sub(v, T.shift[1]))));
    back.emplace(tab.t(), mul(pow(l, 2), sym(tab.t())));
    for (int i = 1; i <= tab.m(); ++i) back.emplace(tab.x(i), mul(l, sym(tab.x(i))));

    Expr eta = substitute(tab, mul(pow(l, num(-2)), X.eta), back);
    std::vector<Expr> xi;
    for (const auto& x : X.xi) xi.push_back(substitute(tab, mul(pow(l, num(-1)), x), back));
    Expr phi_u =
        substitute(tab, add(mul(K.a, X.phi_u()), mul(K.b, X.phi_v())), back);
    Expr phi_v =
        substitute(tab, add(mul(K.c, X.phi_u()), mul(K.d, X.phi_v())), back);
    return VectorField::from_phi(X.tab, eta, std::move(xi), phi_u, phi_v);
}

// -- template matching -----------------------------------------------------------

namespace {

struct SlotDecomposition {
    Expr base;
    std::vector<std::pair<std::size_t, Expr>> slots;  // (index into tmpl.opaque_slots, coefficient)
};

/// Writes a template component as base + sum coef_s * F_s(arg_s). Slots must
/// appear linearly with derivative order 0.
SlotDecomposition decompose(const ClassTemplate& tmpl, const Expr& f)
{
    const SymbolTable& T = *tmpl.tab;
    SlotDecomposition out;
    std::map<std::size_t, std::vector<Expr>> coef_terms;
    std::vector<Expr> base_terms;
    for (const auto& term : terms_of(f)) {
        std::optional<std::size_t> slot;
        std::vector<Expr> rest;
        for (const auto& factor : factors_of(term)) {
            if (factor.kind() == Kind::Fun && factor.deriv_order() == 0) {
                for (std::size_t s = 0; s < tmpl.opaque_slots.size(); ++s) {
                    if (tmpl.opaque_slots[s] == factor.fn_id()) {
                        if (slot) throw RdsymError("template term has two opaque slots");
                        if (!(factor.arg() == tmpl.opaque_args[s]))
                            throw RdsymError("slot argument differs from the declared one: " +
                                             to_string(T, factor.arg()));
                        slot = s;
                    }
                }
                if (!slot) rest.push_back(factor);
            } else {
                if (contains_kind(factor, Kind::Fun))
                    throw RdsymError("opaque slot appears non-linearly in template");
                rest.push_back(factor);
            }
        }
        Expr coef = rest.empty() ? num(1) : mul(std::move(rest));
        if (slot)
            coef_terms[*slot].push_back(coef);
        else
            base_terms.push_back(coef);
    }
    out.base = add(std::move(base_terms));
    for (auto& [s, ts] : coef_terms) out.slots.emplace_back(s, add(std::move(ts)));
    return out;
}

}  // namespace

MatchResult matches_class(const DiffusionSystem& sys, const ClassTemplate& tmpl,
                          const SamplingDomain& dom)
{
    MatchResult res;
    const SymbolTable& T = *tmpl.tab;
    // autonomy pre-check
    for (const Expr* f : {&sys.f1, &sys.f2})
        for (SymbolId s : free_symbols(*f)) {
            const SymbolInfo& info = T.info(s);
            if (info.kind == SymKind::Independent ||
                (info.kind == SymKind::Jet && !info.multi.empty())) {
                res.note = "system is not autonomous";
                return res;
            }
        }

    auto d1 = decompose(tmpl, tmpl.f1);
    auto d2 = decompose(tmpl, tmpl.f2);

    // linear parameters: theta enters f-templates linearly
    std::vector<SymbolId> theta = tmpl.param_slots;
    for (SymbolId th : theta) {
        if (contains_symbol(diff(T, d1.base, th), th) ||
            contains_symbol(diff(T, d2.base, th), th)) {
            res.note = "template parameter " + T.name(th) + " is not linear";
            return res;
        }
    }

    // R_b(theta) = sys.f_b - base_b(theta); then solve slot functions
    Expr R1 = sub(sys.f1, d1.base);
    Expr R2 = sub(sys.f2, d2.base);

    // Solve slot functions symbolically where possible. Handle the common cases:
    // each component has at most 2 slots and the joint slot system is triangular
    // or 2x2 invertible.
    std::vector<Expr> phi(tmpl.opaque_slots.size(), Expr());
    std::vector<bool> solved(tmpl.opaque_slots.size(), false);

    struct Row {
        Expr rhs;
        std::vector<std::pair<std::size_t, Expr>> slots;
    };
    std::vector<Row> rows = {{R1, d1.slots}, {R2, d2.slots}};

    // simple elimination over the two rows
    for (int pass = 0; pass < 3; ++pass) {
        for (auto& row : rows) {
            std::vector<std::pair<std::size_t, Expr>> remaining;
            for (auto& [s, coef] : row.slots) {
                if (solved[s])
                    row.rhs = sub(row.rhs, mul(coef, phi[s]));
                else
                    remaining.push_back({s, coef});
            }
            row.slots = remaining;
            if (row.slots.size() == 1) {
                auto [s, coef] = row.slots[0];
                phi[s] = div(row.rhs, coef);
                solved[s] = true;
                row.slots.clear();
                row.rhs = Expr();
            }
        }
    }
    // a 2x2 block left over?
    if (!rows[0].slots.empty() && rows[1].slots.size() == rows[0].slots.size() &&
        rows[0].slots.size() == 2) {
        auto s0 = rows[0].slots[0].first, s1 = rows[0].slots[1].first;
        Mat2 M{rows[0].slots[0].second, rows[0].slots[1].second, Expr(), Expr()};
        // align second row slot order
        for (auto& [s, c] : rows[1].slots) {
            if (s == s0) M.c = c;
            if (s == s1) M.d = c;
        }
        Expr det = M.det();
        if (!is_zero(T, det, dom).passed()) {
            auto Minv = invert(M);
            phi[s0] = add(mul(Minv[0], rows[0].rhs), mul(Minv[1], rows[1].rhs));
            phi[s1] = add(mul(Minv[2], rows[0].rhs), mul(Minv[3], rows[1].rhs));
            solved[s0] = solved[s1] = true;
            rows[0].slots.clear();
            rows[1].slots.clear();
            rows[0].rhs = rows[1].rhs = Expr();
        }
    }
    for (const auto& row : rows)
        if (!row.slots.empty()) {
            res.note = "slot system could not be solved";
            return res;
        }

    // Now require: leftover rhs rows vanish and each solved slot depends only on
    // its argument. Everything is linear in theta, so collect the conditions and
    // solve exactly over the term basis.
    std::vector<Expr> conditions;
    for (const auto& row : rows)
        if (!row.rhs.is_zero()) conditions.push_back(row.rhs);
    for (std::size_t s = 0; s < phi.size(); ++s) {
        if (!solved[s]) continue;
        const Expr& w = tmpl.opaque_args[s];
        Expr J = sub(mul(diff(T, phi[s], T.u()), diff(T, w, T.v())),
                     mul(diff(T, phi[s], T.v()), diff(T, w, T.u())));
        conditions.push_back(J);
    }

    if (theta.empty()) {
        for (const auto& c : conditions)
            if (!is_zero(T, c, dom).passed()) {
                res.note = "residual condition failed: " + to_string(T, c);
                return res;
            }
        res.matched = true;
        return res;
    }

    // solve for theta: conditions are linear in theta
    std::vector<Expr> exprs;
    for (const auto& c : conditions) {
        exprs.push_back(substitute(T, c, [&] {
            std::map<SymbolId, Expr> z;
            for (SymbolId th : theta) z.emplace(th, Expr());
            return z;
        }()));
        for (SymbolId th : theta) exprs.push_back(diff(T, c, th));
    }
    TermBasis tb = TermBasis::build(exprs);
    const std::size_t ncond = conditions.size(), nth = theta.size(), nm = tb.monomials.size();
    RatMatrix A;
    RatVector b;
    for (std::size_t e = 0; e < ncond; ++e) {
        for (std::size_t mi = 0; mi < nm; ++mi) {
            RatVector arow(nth, Rational(0));
            bool nonzero = false;
            for (std::size_t k = 0; k < nth; ++k) {
                arow[k] = tb.vectors[e * (nth + 1) + 1 + k][mi];
                if (arow[k] != 0) nonzero = true;
            }
            Rational rv = -tb.vectors[e * (nth + 1)][mi];
            if (!nonzero && rv == 0) continue;
            A.push_back(std::move(arow));
            b.push_back(rv);
        }
    }
    auto sol = solve_exact(A, b);
    if (!sol) {
        res.note = "no parameter binding satisfies the matching conditions";
        return res;
    }
    std::map<SymbolId, Expr> binding;
    for (std::size_t k = 0; k < nth; ++k) {
        binding.emplace(theta[k], num((*sol)[k]));
        res.param_bindings[T.name(theta[k])] = (*sol)[k];
    }
    for (const auto& c : conditions) {
        Expr cc = substitute(T, c, binding);
        if (!is_zero(T, cc, dom).passed()) {
            res.note = "solved parameters fail verification: " + to_string(T, cc);
            return res;
        }
    }
    // template constraints that the binding can decide
    for (const auto& pred : tmpl.constraints) {
        std::map<SymbolId, Rational> vals;
        for (std::size_t k = 0; k < nth; ++k) vals[theta[k]] = (*sol)[k];
        auto h = pred.holds(T, vals);
        if (h && !*h) {
            res.note = "matched bindings violate constraint: " + pred.text;
            return res;
        }
    }
    res.matched = true;
    return res;
}

AetVerdict verify_aet_on(const PointTransformation& T, const DiffusionSystem& sys,
                         const ClassTemplate& tmpl, const SamplingDomain& dom)
{
    AetVerdict v;
    DiffusionSystem image = sys;
    try {
        image = apply_to_system(T, sys);
    } catch (const NonClassPreserving& e) {
        v.note = e.what();
        return v;
    }
    v.match = matches_class(image, tmpl, dom);
    v.class_preserved = v.match.matched;
    if (!v.match.note.empty()) v.note = v.match.note;

    Expr du = sub(image.f1, sys.f1);
    Expr dv = sub(image.f2, sys.f2);
    v.genuinely_changes_f =
        !(is_zero(*sys.tab, du, dom).passed() && is_zero(*sys.tab, dv, dom).passed());
    return v;
}

}  // namespace rdsym
