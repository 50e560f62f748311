#include "oracle_prolongation.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace rdsym::testing {

double eval_plain(const SymbolTable& tab, const Expr& e,
                  const std::map<SymbolId, double>& values)
{
    switch (e.kind()) {
        case Kind::Num: return to_double(e.num());
        case Kind::Sym: {
            auto it = values.find(e.sym());
            if (it == values.end())
                throw std::runtime_error("eval_plain: unbound symbol " + tab.name(e.sym()));
            return it->second;
        }
        case Kind::Add: {
            double s = 0;
            for (const auto& k : e.kids()) s += eval_plain(tab, k, values);
            return s;
        }
        case Kind::Mul: {
            double p = 1;
            for (const auto& k : e.kids()) p *= eval_plain(tab, k, values);
            return p;
        }
        case Kind::Pow:
            return std::pow(eval_plain(tab, e.base(), values), eval_plain(tab, e.expo(), values));
        case Kind::Exp: return std::exp(eval_plain(tab, e.arg(), values));
        case Kind::Log: return std::log(eval_plain(tab, e.arg(), values));
        case Kind::Sin: return std::sin(eval_plain(tab, e.arg(), values));
        case Kind::Cos: return std::cos(eval_plain(tab, e.arg(), values));
        default: throw std::runtime_error("eval_plain: unsupported node");
    }
}

namespace {

// dense least squares via normal equations + Gauss (local to the oracle)
std::vector<double> lsq(const std::vector<std::vector<double>>& A, const std::vector<double>& b)
{
    const std::size_t n = A[0].size();
    std::vector<std::vector<double>> M(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t r = 0; r < A.size(); ++r)
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) M[i][j] += A[r][i] * A[r][j];
            M[i][n] += A[r][i] * b[r];
        }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
        std::swap(M[piv], M[c]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            double f = M[r][c] / M[c][c];
            for (std::size_t k = c; k <= n; ++k) M[r][k] -= f * M[c][k];
        }
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = M[i][n] / M[i][i];
    return out;
}

struct Surrogate {
    // Taylor coefficients c[i][j] = d_t^i d_x^j w at (t0, x0); degree i + j <= 4
    double t0, x0;
    double c[5][5] = {};
    double operator()(double t, double x) const
    {
        double dt = t - t0, dx = x - x0;
        double s = 0, ti = 1, fi = 1;
        for (int i = 0; i <= 4; ++i) {
            double xj = 1, fj = 1;
            for (int j = 0; i + j <= 4; ++j) {
                s += c[i][j] * ti * xj / (fi * fj);
                xj *= dx;
                fj *= (j + 1);
            }
            ti *= dt;
            fi *= (i + 1);
        }
        return s;
    }
};

struct JetVals {
    std::map<SymbolId, double> vals;
};

// Builds the full on-shell value assignment up to tracked order 4 (higher
// spatial jets of u, v beyond uxxx are zero).
JetVals onshell_values(const DiffusionSystem& sys, const JetPoint& z)
{
    const SymbolTable& T = *sys.tab;
    SymbolId t = T.t(), x = T.x(1), U = T.u(), V = T.v();
    JetVals out;
    auto& m = out.vals;
    m[t] = z.t;
    m[x] = z.x;
    auto set_spatial = [&](SymbolId dep, double w0, double w1, double w2, double w3) {
        m[T.jet(dep, {})] = w0;
        m[T.jet(dep, {x})] = w1;
        m[T.jet(dep, {x, x})] = w2;
        m[T.jet(dep, {x, x, x})] = w3;
        m[T.jet(dep, {x, x, x, x})] = 0.0;
    };
    set_spatial(U, z.u, z.ux, z.uxx, z.uxxx);
    set_spatial(V, z.v, z.vx, z.vxx, z.vxxx);

    // right-hand sides as expressions
    Expr lap_u = sym(T.jet(U, {x, x}));
    Expr lap_v = sym(T.jet(V, {x, x}));
    Expr rhs_u = add(lap_u, sys.f1);
    Expr rhs_v = sys.kind == SystemKind::Diagonal
                     ? add(mul(sys.a, lap_v), sys.f2)
                     : add(mul(num(sys.p), sym(T.jet(U, {T.x(T.m())}))), sys.f2);

    // t-derivatives by total differentiation; evaluate with current values, then
    // record and continue (order of filling matters)
    auto D = [&](const Expr& e, SymbolId s) { return total_derivative(T, e, s); };
    auto ev = [&](const Expr& e) { return eval_plain(T, e, m); };

    m[T.jet(U, {t})] = ev(rhs_u);
    m[T.jet(V, {t})] = ev(rhs_v);
    Expr u_tx = D(rhs_u, x);
    Expr v_tx = D(rhs_v, x);
    m[T.jet(U, {t, x})] = ev(u_tx);
    m[T.jet(V, {t, x})] = ev(v_tx);
    m[T.jet(U, {t, x, x})] = ev(D(u_tx, x));
    m[T.jet(V, {t, x, x})] = ev(D(v_tx, x));
    // u_tt needs u_t-values, present by now
    Expr u_tt = D(rhs_u, t);
    Expr v_tt = D(rhs_v, t);
    m[T.jet(U, {t, t})] = ev(u_tt);
    m[T.jet(V, {t, t})] = ev(v_tt);
    m[T.jet(U, {t, t, x})] = ev(D(u_tt, x));
    m[T.jet(V, {t, t, x})] = ev(D(v_tt, x));
    m[T.jet(U, {t, t, t})] = 0.0;
    m[T.jet(V, {t, t, t})] = 0.0;
    return out;
}

Surrogate make_surrogate(const SymbolTable& T, SymbolId dep, const JetVals& jv, double t0,
                         double x0)
{
    Surrogate s;
    s.t0 = t0;
    s.x0 = x0;
    SymbolId t = T.t(), x = T.x(1);
    for (int i = 0; i <= 4; ++i)
        for (int j = 0; i + j <= 4; ++j) {
            std::vector<SymbolId> multi;
            for (int k = 0; k < i; ++k) multi.push_back(t);
            for (int k = 0; k < j; ++k) multi.push_back(x);
            auto it = jv.vals.find(T.jet(dep, multi));
            s.c[i][j] = it == jv.vals.end() ? 0.0 : it->second;
        }
    return s;
}

struct FlowPoint {
    double t, x, u, v;
};

// RK4 flow of the point vector field
FlowPoint flow(const VectorField& X, FlowPoint p, double eps, int steps)
{
    const SymbolTable& T = *X.tab;
    auto rhs = [&](const FlowPoint& q) {
        std::map<SymbolId, double> m{{T.t(), q.t}, {T.x(1), q.x}, {T.u(), q.u}, {T.v(), q.v}};
        FlowPoint d;
        d.t = eval_plain(T, X.eta, m);
        d.x = eval_plain(T, X.xi[0], m);
        d.u = eval_plain(T, X.phi_u(), m);
        d.v = eval_plain(T, X.phi_v(), m);
        return d;
    };
    double h = eps / steps;
    for (int s = 0; s < steps; ++s) {
        auto k1 = rhs(p);
        FlowPoint p2{p.t + h / 2 * k1.t, p.x + h / 2 * k1.x, p.u + h / 2 * k1.u,
                     p.v + h / 2 * k1.v};
        auto k2 = rhs(p2);
        FlowPoint p3{p.t + h / 2 * k2.t, p.x + h / 2 * k2.x, p.u + h / 2 * k2.u,
                     p.v + h / 2 * k2.v};
        auto k3 = rhs(p3);
        FlowPoint p4{p.t + h * k3.t, p.x + h * k3.x, p.u + h * k3.u, p.v + h * k3.v};
        auto k4 = rhs(p4);
        p.t += h / 6 * (k1.t + 2 * k2.t + 2 * k3.t + k4.t);
        p.x += h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
        p.u += h / 6 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u);
        p.v += h / 6 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v);
    }
    return p;
}

// 2-jet of the transformed graph at the transformed base point, by refitting a
// degree-4 polynomial to the flowed stencil.
struct Jet2 {
    double w, wt, wx, wtt, wtx, wxx;
};

std::pair<Jet2, Jet2> transformed_jet(const VectorField& X, const Surrogate& su,
                                      const Surrogate& sv, double t0, double x0, double eps)
{
    const double h = 0.01;
    const int n = 5;  // stencil 11 x 11
    FlowPoint base = flow(X, {t0, x0, su(t0, x0), sv(t0, x0)}, eps, 4);

    std::vector<std::vector<double>> A;
    std::vector<double> bu, bv;
    for (int i = -n; i <= n; ++i)
        for (int j = -n; j <= n; ++j) {
            double ts = t0 + i * h, xs = x0 + j * h;
            FlowPoint q = flow(X, {ts, xs, su(ts, xs), sv(ts, xs)}, eps, 4);
            double dt = (q.t - base.t) / h, dx = (q.x - base.x) / h;
            std::vector<double> row;
            for (int p = 0; p <= 4; ++p)
                for (int r = 0; p + r <= 4; ++r) row.push_back(std::pow(dt, p) * std::pow(dx, r));
            A.push_back(std::move(row));
            bu.push_back(q.u);
            bv.push_back(q.v);
        }
    auto cu = lsq(A, bu);
    auto cv = lsq(A, bv);
    // coefficient order: (p, r) with p outer; scaled by h^(p+r)
    auto idx = [&](int p, int r) {
        int k = 0;
        for (int pp = 0; pp <= 4; ++pp)
            for (int rr = 0; pp + rr <= 4; ++rr) {
                if (pp == p && rr == r) return k;
                ++k;
            }
        return -1;
    };
    auto jet_of = [&](const std::vector<double>& c) {
        Jet2 j;
        j.w = c[static_cast<std::size_t>(idx(0, 0))];
        j.wt = c[static_cast<std::size_t>(idx(1, 0))] / h;
        j.wx = c[static_cast<std::size_t>(idx(0, 1))] / h;
        j.wtt = 2 * c[static_cast<std::size_t>(idx(2, 0))] / (h * h);
        j.wtx = c[static_cast<std::size_t>(idx(1, 1))] / (h * h);
        j.wxx = 2 * c[static_cast<std::size_t>(idx(0, 2))] / (h * h);
        return j;
    };
    return {jet_of(cu), jet_of(cv)};
}

double delta_value(const DiffusionSystem& sys, int eq, const FlowPoint& base, const Jet2& ju,
                   const Jet2& jv)
{
    const SymbolTable& T = *sys.tab;
    std::map<SymbolId, double> m{
        {T.t(), base.t}, {T.x(1), base.x}, {T.jet(T.u(), {}), ju.w}, {T.jet(T.v(), {}), jv.w}};
    double f1 = eval_plain(T, sys.f1, m);
    double f2 = eval_plain(T, sys.f2, m);
    if (eq == 1) return ju.wt - ju.wxx - f1;
    if (sys.kind == SystemKind::Diagonal) {
        double a = eval_plain(T, sys.a, m);
        return jv.wt - a * jv.wxx - f2;
    }
    return jv.wt - sys.p * ju.wx - f2;
}

}  // namespace

double oracle_residual(const VectorField& X, const DiffusionSystem& sys, int eq,
                       const JetPoint& z)
{
    const SymbolTable& T = *sys.tab;
    if (T.m() != 1) throw std::runtime_error("oracle supports m = 1");
    JetVals jv = onshell_values(sys, z);
    Surrogate su = make_surrogate(T, T.u(), jv, z.t, z.x);
    Surrogate sv = make_surrogate(T, T.v(), jv, z.t, z.x);

    const double eps = 1e-3;
    auto value_at = [&](double e) {
        FlowPoint base = flow(X, {z.t, z.x, su(z.t, z.x), sv(z.t, z.x)}, e, 4);
        auto [ju2, jv2] = transformed_jet(X, su, sv, z.t, z.x, e);
        return delta_value(sys, eq, base, ju2, jv2);
    };
    return (value_at(eps) - value_at(-eps)) / (2 * eps);
}

double symbolic_residual_at(const VectorField& X, const DiffusionSystem& sys, int eq,
                            const JetPoint& z)
{
    auto [r1, r2] = prolong2_apply(X, sys);
    JetVals jv = onshell_values(sys, z);
    return eval_plain(*sys.tab, eq == 1 ? r1 : r2, jv.vals);
}

}  // namespace rdsym::testing
