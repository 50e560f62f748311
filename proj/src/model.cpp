#include "rdsym/model.hpp"

#include <cmath>
#include <sstream>

namespace rdsym {

// -- predicates ---------------------------------------------------------------

Predicate Predicate::parse_str(const std::string& s, const SymbolTable& tab)
{
    static const std::vector<std::pair<std::string, Cmp>> ops = {
        {"!=", Cmp::NeZero}, {"==", Cmp::EqZero}, {">=", Cmp::GeZero},
        {"<=", Cmp::LeZero}, {">", Cmp::GtZero},  {"<", Cmp::LtZero},
    };
    for (const auto& [op, cmp] : ops) {
        auto at = s.find(op);
        if (at == std::string::npos) continue;
        Expr lhs = parse(s.substr(0, at), tab);
        Expr rhs = parse(s.substr(at + op.size()), tab);
        return Predicate{sub(lhs, rhs), cmp, s};
    }
    throw RdsymError("predicate needs a comparison operator: '" + s + "'");
}

std::optional<bool> Predicate::holds(const SymbolTable& tab,
                                     const std::map<SymbolId, Rational>& bindings) const
{
    std::map<SymbolId, Expr> b;
    for (const auto& [k, q] : bindings) b.emplace(k, num(q));
    Expr val = substitute(tab, expr, b);
    if (!val.is_num()) return std::nullopt;
    const Rational& q = val.num();
    switch (cmp) {
        case Cmp::EqZero: return q == 0;
        case Cmp::NeZero: return q != 0;
        case Cmp::GtZero: return q > 0;
        case Cmp::GeZero: return q >= 0;
        case Cmp::LtZero: return q < 0;
        case Cmp::LeZero: return q <= 0;
    }
    return std::nullopt;
}

// -- systems -------------------------------------------------------------------

DiffusionSystem DiffusionSystem::diagonal(std::shared_ptr<const SymbolTable> tab, Expr a, Expr f1,
                                          Expr f2)
{
    DiffusionSystem s;
    s.tab = std::move(tab);
    s.kind = SystemKind::Diagonal;
    s.a = std::move(a);
    s.f1 = std::move(f1);
    s.f2 = std::move(f2);
    return s;
}

DiffusionSystem DiffusionSystem::first_order(std::shared_ptr<const SymbolTable> tab, int p, Expr f1,
                                             Expr f2)
{
    if (p != 0 && p != 1) throw RdsymError("first-order coefficient p must be 0 or 1");
    DiffusionSystem s;
    s.tab = std::move(tab);
    s.kind = SystemKind::FirstOrder;
    s.a = num(0);
    s.p = p;
    s.f1 = std::move(f1);
    s.f2 = std::move(f2);
    return s;
}

std::vector<Violation> validate(const DiffusionSystem& sys)
{
    std::vector<Violation> out;
    const SymbolTable& tab = *sys.tab;

    auto check_autonomous = [&](const Expr& f, const std::string& label) {
        for (SymbolId s : free_symbols(f)) {
            const SymbolInfo& info = tab.info(s);
            if (info.kind == SymKind::Independent)
                out.push_back({Violation::Severity::Error,
                               label + " depends on independent variable " + info.name});
            if (info.kind == SymKind::Jet && !info.multi.empty())
                out.push_back({Violation::Severity::Error,
                               label + " contains jet symbol " + info.name});
        }
    };
    check_autonomous(sys.f1, "f1");
    check_autonomous(sys.f2, "f2");

    if (sys.kind == SystemKind::Diagonal && sys.a.is_num()) {
        const Rational& a = sys.a.num();
        bool canonical = (a == 0) || (a >= -1 && a < 0) || (a > 0 && a < 1) || (a == 1);
        if (!canonical)
            out.push_back({Violation::Severity::Warning,
                           "a = " + to_string(a) + " is non-canonical, apply a -> 1/a"});
    }
    return out;
}

// -- vector fields -----------------------------------------------------------------

VectorField VectorField::from_phi(std::shared_ptr<const SymbolTable> tab, Expr eta,
                                  std::vector<Expr> xi, Expr phi_u, Expr phi_v)
{
    VectorField f;
    f.tab = std::move(tab);
    if (static_cast<int>(xi.size()) != f.tab->m())
        throw RdsymError("xi must have one component per spatial direction");
    f.eta = std::move(eta);
    f.xi = std::move(xi);
    f.pi1 = neg(phi_u);
    f.pi2 = neg(phi_v);
    return f;
}

VectorField VectorField::zero(std::shared_ptr<const SymbolTable> tab)
{
    std::vector<Expr> xi(tab->m(), Expr());
    return from_phi(std::move(tab), Expr(), std::move(xi), Expr(), Expr());
}

bool VectorField::is_zero_field() const
{
    if (!eta.is_zero() || !pi1.is_zero() || !pi2.is_zero()) return false;
    for (const auto& x : xi)
        if (!x.is_zero()) return false;
    return true;
}

VectorField VectorField::scaled(const Expr& c) const
{
    VectorField f = *this;
    f.eta = mul(c, eta);
    for (auto& x : f.xi) x = mul(c, x);
    f.pi1 = mul(c, pi1);
    f.pi2 = mul(c, pi2);
    return f;
}

VectorField VectorField::plus(const VectorField& o) const
{
    VectorField f = *this;
    f.eta = add(eta, o.eta);
    for (int i = 0; i < tab->m(); ++i) f.xi[i] = add(xi[i], o.xi[i]);
    f.pi1 = add(pi1, o.pi1);
    f.pi2 = add(pi2, o.pi2);
    return f;
}

bool VectorField::equals(const VectorField& o) const
{
    if (!(eta == o.eta) || !(pi1 == o.pi1) || !(pi2 == o.pi2)) return false;
    for (int i = 0; i < tab->m(); ++i)
        if (!(xi[i] == o.xi[i])) return false;
    return true;
}

std::string VectorField::print() const
{
    std::ostringstream os;
    bool first = true;
    auto emit = [&](const Expr& c, const std::string& basis) {
        if (c.is_zero()) return;
        if (!first) os << " + ";
        first = false;
        if (c.is_one()) {
            os << basis;
        } else {
            os << "(" << to_string(*tab, c) << ")*" << basis;
        }
    };
    emit(eta, "d_t");
    for (int i = 0; i < tab->m(); ++i) emit(xi[i], "d_x" + std::to_string(i + 1));
    emit(phi_u(), "d_u");
    emit(phi_v(), "d_v");
    if (first) os << "0";
    return os.str();
}

std::string VectorField::describe() const
{
    std::ostringstream os;
    os << print() << "  [convention: X = eta d_t + xi d_x - pi1 d_u - pi2 d_v; pi1 = "
       << to_string(*tab, pi1) << ", pi2 = " << to_string(*tab, pi2) << "]";
    return os.str();
}

VectorField parse_field(std::string_view src, std::shared_ptr<const SymbolTable> base_tab)
{
    return parse_field(src, std::move(base_tab), {});
}

VectorField parse_field(std::string_view src, std::shared_ptr<const SymbolTable> base_tab,
                        const std::map<std::string, VectorField>& macros)
{
    // Parse against a scratch table extended with the d_* basis tokens, then
    // extract the (required linear) coefficients by differentiation.
    SymbolTable ext;
    ext.init_standard(base_tab->m(), base_tab->max_jet_order());
    // replicate parameters, free symbols, opaques, declared functions by name
    for (SymbolId s = 0; s < base_tab->size(); ++s) {
        const SymbolInfo& info = base_tab->info(s);
        if (info.kind == SymKind::Parameter && !ext.lookup(info.name))
            ext.register_parameter(info.name);
        if (info.kind == SymKind::Free && !ext.lookup(info.name)) ext.register_free(info.name);
    }
    for (std::uint32_t i = 0; i < base_tab->opaque_count(); ++i)
        ext.register_opaque(base_tab->opaque(i).name);
    std::vector<std::uint32_t> decl_map;
    for (std::uint32_t i = 0; i < base_tab->declared_count(); ++i) {
        // declared functions are referenced by atoms only; share rule structure
        std::uint32_t id = ext.declare_function(base_tab->declared(i).name);
        decl_map.push_back(id);
    }
    SymbolId dt = ext.register_free("d_t");
    std::vector<SymbolId> dx;
    for (int i = 1; i <= ext.m(); ++i) dx.push_back(ext.register_free("d_x" + std::to_string(i)));
    SymbolId du = ext.register_free("d_u");
    SymbolId dv = ext.register_free("d_v");
    std::map<SymbolId, const VectorField*> macro_syms;
    for (const auto& [name, field] : macros)
        macro_syms.emplace(ext.register_free(name), &field);
    // Symbol and declared-function ids in ext coincide with base_tab by construction
    // (same init_standard(m) prefix, same registration order), so rule bodies can be
    // shared as-is.
    for (std::uint32_t i = 0; i < base_tab->declared_count(); ++i) {
        DeclaredFunction& d = ext.declared_mutable(decl_map[i]);
        const DeclaredFunction& src_d = base_tab->declared(i);
        d.max_order = src_d.max_order;
        d.dirs = src_d.dirs;
        d.second_order_dir = src_d.second_order_dir;
        d.second_order_rhs = src_d.second_order_rhs;
        d.evaluator = src_d.evaluator;
    }
    ext.freeze();

    Expr e = parse(src, ext);

    // expand macro symbols into their d_* form (symbol ids in the macro fields'
    // coefficient expressions coincide with ext ids)
    if (!macro_syms.empty()) {
        std::map<SymbolId, Expr> expansion;
        for (const auto& [ms, field] : macro_syms) {
            Expr acc = mul(field->eta, sym(dt));
            for (int i = 0; i < ext.m(); ++i)
                acc = add(acc, mul(field->xi[static_cast<std::size_t>(i)], sym(dx[static_cast<std::size_t>(i)])));
            acc = add(acc, mul(field->phi_u(), sym(du)));
            acc = add(acc, mul(field->phi_v(), sym(dv)));
            expansion.emplace(ms, acc);
        }
        e = substitute(ext, e, expansion);
    }

    auto coeff_of = [&](SymbolId basis) {
        Expr c = diff(ext, e, basis);
        for (SymbolId other : {dt, du, dv})
            if (contains_symbol(c, other))
                throw RdsymError("field is not linear in the d_* basis tokens");
        for (SymbolId other : dx)
            if (contains_symbol(c, other))
                throw RdsymError("field is not linear in the d_* basis tokens");
        return c;
    };
    Expr ceta = coeff_of(dt);
    std::vector<Expr> cxi;
    for (SymbolId d : dx) cxi.push_back(coeff_of(d));
    Expr cu = coeff_of(du);
    Expr cv = coeff_of(dv);

    // the remainder must vanish: e - sum(coeff * basis)
    Expr rest = e;
    rest = sub(rest, mul(ceta, sym(dt)));
    for (int i = 0; i < ext.m(); ++i) rest = sub(rest, mul(cxi[i], sym(dx[i])));
    rest = sub(rest, mul(cu, sym(du)));
    rest = sub(rest, mul(cv, sym(dv)));
    if (!rest.is_zero())
        throw RdsymError("field expression has terms without a d_* basis factor: " +
                         to_string(ext, rest));

    // Re-parse coefficients in the base table (names resolve identically).
    auto back = [&](const Expr& c) { return parse(to_string(ext, c), *base_tab); };
    std::vector<Expr> xs;
    for (const auto& c : cxi) xs.push_back(back(c));
    return VectorField::from_phi(std::move(base_tab), back(ceta), std::move(xs), back(cu),
                                 back(cv));
}

// -- named generators -----------------------------------------------------------

namespace {

Expr x_squared(const SymbolTable& tab)
{
    std::vector<Expr> terms;
    for (SymbolId x : tab.xs()) terms.push_back(pow(sym(x), 2));
    return add(std::move(terms));
}

}  // namespace

std::vector<VectorField> make_basic(std::shared_ptr<const SymbolTable> tab)
{
    std::vector<VectorField> out;
    const int m = tab->m();
    auto zero_xi = [&] { return std::vector<Expr>(m, Expr()); };
    {
        VectorField p0 = VectorField::from_phi(tab, num(1), zero_xi(), Expr(), Expr());
        out.push_back(std::move(p0));
    }
    for (int mu = 0; mu < m; ++mu) {
        auto xi = zero_xi();
        xi[mu] = num(1);
        out.push_back(VectorField::from_phi(tab, Expr(), std::move(xi), Expr(), Expr()));
    }
    for (int mu = 0; mu < m; ++mu)
        for (int nu = mu + 1; nu < m; ++nu) {
            auto xi = zero_xi();
            xi[nu] = sym(tab->x(mu + 1));
            xi[mu] = neg(sym(tab->x(nu + 1)));
            out.push_back(VectorField::from_phi(tab, Expr(), std::move(xi), Expr(), Expr()));
        }
    return out;
}

VectorField make_named(const GeneratorSpec& spec, const DiffusionSystem& sys)
{
    auto tab = sys.tab;
    const SymbolTable& T = *tab;
    const int m = T.m();
    auto zero_xi = [&] { return std::vector<Expr>(m, Expr()); };
    Expr t = sym(T.t());
    Expr u = sym(T.u());
    Expr v = sym(T.v());

    auto require_diag_a = [&]() -> Expr {
        if (sys.kind != SystemKind::Diagonal)
            throw RdsymError("generator requires a diagonal system");
        if (sys.a.is_zero())
            throw RdsymError("generator requires a != 0");
        return sys.a;
    };

    switch (spec.name) {
        case GeneratorName::P0:
            return VectorField::from_phi(tab, num(1), zero_xi(), Expr(), Expr());
        case GeneratorName::P: {
            auto xi = zero_xi();
            xi.at(spec.mu - 1) = num(1);
            return VectorField::from_phi(tab, Expr(), std::move(xi), Expr(), Expr());
        }
        case GeneratorName::J: {
            auto xi = zero_xi();
            xi.at(spec.nu - 1) = sym(T.x(spec.mu));
            xi.at(spec.mu - 1) = neg(sym(T.x(spec.nu)));
            return VectorField::from_phi(tab, Expr(), std::move(xi), Expr(), Expr());
        }
        case GeneratorName::D: {
            auto xi = zero_xi();
            for (int i = 1; i <= m; ++i) xi[i - 1] = mul(num(1, 2), sym(T.x(i)));
            return VectorField::from_phi(tab, t, std::move(xi), Expr(), Expr());
        }
        case GeneratorName::K: {
            Expr a = require_diag_a();
            auto xi = zero_xi();
            for (int i = 1; i <= m; ++i) xi[i - 1] = mul(num(2), t, sym(T.x(i)));
            Expr x2 = x_squared(T);
            Expr phi_u = neg(add(mul(num(1, 2), x2, u), mul(num(m), t, u)));
            Expr phi_v = neg(add(mul(num(1, 2), x2, div(v, a)), mul(num(m), t, v)));
            return VectorField::from_phi(tab, mul(num(2), pow(t, 2)), std::move(xi), phi_u,
                                         phi_v);
        }
        case GeneratorName::G: {
            Expr a = require_diag_a();
            auto xi = zero_xi();
            xi.at(spec.mu - 1) = t;
            Expr xm = sym(T.x(spec.mu));
            Expr phi_u = neg(mul(num(1, 2), xm, u));
            Expr phi_v = neg(mul(num(1, 2), xm, div(v, a)));
            return VectorField::from_phi(tab, Expr(), std::move(xi), phi_u, phi_v);
        }
        case GeneratorName::Ghat: {
            Expr a = require_diag_a();
            Expr g = spec.gamma;
            Expr egt = exp_(mul(g, t));
            auto xi = zero_xi();
            xi.at(spec.mu - 1) = egt;
            Expr xm = sym(T.x(spec.mu));
            Expr phi_u = neg(mul({egt, num(1, 2), g, xm, u}));
            Expr phi_v = neg(mul({egt, num(1, 2), g, xm, div(v, a)}));
            return VectorField::from_phi(tab, Expr(), std::move(xi), phi_u, phi_v);
        }
        case GeneratorName::UDu:
            return VectorField::from_phi(tab, Expr(), zero_xi(), u, Expr());
        case GeneratorName::VDv:
            return VectorField::from_phi(tab, Expr(), zero_xi(), Expr(), v);
        case GeneratorName::UDv:
            return VectorField::from_phi(tab, Expr(), zero_xi(), Expr(), u);
        case GeneratorName::VDu:
            return VectorField::from_phi(tab, Expr(), zero_xi(), v, Expr());
        case GeneratorName::B1Du:
            return VectorField::from_phi(tab, Expr(), zero_xi(), spec.payload, Expr());
        case GeneratorName::B2Dv:
            return VectorField::from_phi(tab, Expr(), zero_xi(), Expr(), spec.payload);
    }
    throw RdsymError("unknown generator");
}

// -- declared special functions ----------------------------------------------------

namespace {

Expr lap_atom(SymbolTable& tab, std::uint32_t id)
{
    // sum of second x-derivative atoms; callers install this as part of a t-rule,
    // construction happens before rules fire because we build raw templates here.
    std::vector<Expr> terms;
    for (SymbolId x : tab.xs()) terms.push_back(atom(tab, id, {x, x}));
    return add(std::move(terms));
}

std::shared_ptr<const Expr> keep(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

}  // namespace

std::uint32_t declare_heat(SymbolTable& tab, const std::string& name, const Expr& mu,
                           const Expr& diffusion)
{
    std::uint32_t id = tab.declare_function(name);
    {
        DeclaredFunction& d = tab.declared_mutable(id);
        for (SymbolId x : tab.xs()) d.dirs[x] = {DeclaredFunction::Rule::Bump, nullptr};
        d.max_order = 3;
    }
    Expr rhs = add(mul(diffusion, lap_atom(tab, id)), mul(mu, atom(tab, id)));
    DeclaredFunction& d = tab.declared_mutable(id);
    d.dirs[tab.t()] = {DeclaredFunction::Rule::Rewrite, keep(rhs)};
    return id;
}

std::uint32_t declare_laplace(SymbolTable& tab, const std::string& name, const Expr& mu)
{
    if (tab.m() != 1)
        throw RdsymError("Laplace-type declared functions are verified at m = 1 only");
    std::uint32_t id = tab.declare_function(name);
    {
        DeclaredFunction& d = tab.declared_mutable(id);
        d.dirs[tab.t()] = {DeclaredFunction::Rule::Zero, nullptr};
        d.dirs[tab.x(1)] = {DeclaredFunction::Rule::Bump, nullptr};
        d.max_order = 3;
        d.second_order_dir = tab.x(1);
    }
    Expr rhs = mul(mu, atom(tab, id));
    tab.declared_mutable(id).second_order_rhs = keep(rhs);
    return id;
}

std::uint32_t declare_laplace_drift(SymbolTable& tab, const std::string& name, const Expr& mu,
                                    const Expr& eta)
{
    if (tab.m() != 1)
        throw RdsymError("traveling Laplace profiles are verified at m = 1 only");
    std::uint32_t id = tab.declare_function(name);
    {
        DeclaredFunction& d = tab.declared_mutable(id);
        d.dirs[tab.x(1)] = {DeclaredFunction::Rule::Bump, nullptr};
        d.max_order = 3;
        d.second_order_dir = tab.x(1);
    }
    // Psi'' = mu Psi - eta Psi'
    Expr rhs2 = sub(mul(mu, atom(tab, id)), mul(eta, atom(tab, id, {tab.x(1)})));
    tab.declared_mutable(id).second_order_rhs = keep(rhs2);
    // d/dt Psi(x - eta t) = -eta Psi'
    Expr rhst = neg(mul(eta, atom(tab, id, {tab.x(1)})));
    tab.declared_mutable(id).dirs[tab.t()] = {DeclaredFunction::Rule::Rewrite, keep(rhst)};
    return id;
}

std::uint32_t declare_heat_profile(SymbolTable& tab, const std::string& name, const Expr& mu,
                                   const Expr& eta)
{
    if (tab.m() != 1) throw RdsymError("heat profiles are verified at m = 1 only");
    std::uint32_t id = tab.declare_function(name);
    {
        DeclaredFunction& d = tab.declared_mutable(id);
        d.dirs[tab.x(1)] = {DeclaredFunction::Rule::Bump, nullptr};
        d.max_order = 3;
    }
    // B_x = -eta B
    Expr rhsx = neg(mul(eta, atom(tab, id)));
    tab.declared_mutable(id).dirs[tab.x(1)] = {DeclaredFunction::Rule::Rewrite, keep(rhsx)};
    // B_t = Lap B + mu B, with the x-rule folding Lap B to eta^2 B
    Expr rhst = add(mul(eta, mul(eta, atom(tab, id))), mul(mu, atom(tab, id)));
    tab.declared_mutable(id).dirs[tab.t()] = {DeclaredFunction::Rule::Rewrite, keep(rhst)};
    return id;
}

std::uint32_t declare_lower_heat(SymbolTable& tab, const std::string& name, const Expr& mu)
{
    if (tab.m() != 1) throw RdsymError("lower-dimensional heat profiles need m = 1");
    std::uint32_t id = tab.declare_function(name);
    {
        DeclaredFunction& d = tab.declared_mutable(id);
        d.dirs[tab.x(1)] = {DeclaredFunction::Rule::Zero, nullptr};
        d.max_order = 3;
    }
    Expr rhs = mul(mu, atom(tab, id));
    tab.declared_mutable(id).dirs[tab.t()] = {DeclaredFunction::Rule::Rewrite, keep(rhs)};
    return id;
}

std::uint32_t declare_spatial(SymbolTable& tab, const std::string& name)
{
    std::uint32_t id = tab.declare_function(name);
    DeclaredFunction& d = tab.declared_mutable(id);
    d.dirs[tab.t()] = {DeclaredFunction::Rule::Zero, nullptr};
    for (SymbolId x : tab.xs()) d.dirs[x] = {DeclaredFunction::Rule::Bump, nullptr};
    d.max_order = 3;
    return id;
}

std::uint32_t declare_polar_angle(SymbolTable& tab, const std::string& name)
{
    std::uint32_t id = tab.declare_function(name);
    SymbolId u = tab.u(), v = tab.v();
    Expr r2inv = pow(add(pow(sym(u), 2), pow(sym(v), 2)), num(-1));
    {
        DeclaredFunction& d = tab.declared_mutable(id);
        d.dirs[u] = {DeclaredFunction::Rule::Rewrite, keep(neg(mul(sym(v), r2inv)))};
        d.dirs[v] = {DeclaredFunction::Rule::Rewrite, keep(mul(sym(u), r2inv))};
        d.max_order = 3;
        d.evaluator = [u, v](const std::function<double(SymbolId)>& val) {
            return std::atan2(val(v), val(u));
        };
    }
    return id;
}

}  // namespace rdsym
