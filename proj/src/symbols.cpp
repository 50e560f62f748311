#include "rdsym/symbols.hpp"

#include "rdsym/expr.hpp"

#include <algorithm>
#include <cmath>

namespace rdsym {

std::optional<Rational> rational_snap(double x, std::int64_t max_den, double tol)
{
    if (!std::isfinite(x) || std::abs(x) > 1e12) return std::nullopt;
    // continued-fraction convergents
    double v = x;
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    for (int i = 0; i < 64; ++i) {
        double fl = std::floor(v);
        if (fl > 9e17 || fl < -9e17) break;
        std::int64_t a = static_cast<std::int64_t>(fl);
        std::int64_t p2 = a * p1 + p0;
        std::int64_t q2 = a * q1 + q0;
        if (q2 > max_den || q2 < 0) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        double rem = v - fl;
        if (rem < 1e-15) break;
        v = 1.0 / rem;
    }
    if (q1 == 0) return std::nullopt;
    Rational r(p1, q1);
    double err = std::abs(to_double(r) - x);
    double scale = std::max(1.0, std::abs(x));
    if (err <= tol * scale) return r;
    return std::nullopt;
}

void SymbolTable::check_mutable() const
{
    if (frozen_) throw RdsymError("SymbolTable is frozen");
}

SymbolId SymbolTable::add(SymbolInfo info)
{
    check_mutable();
    if (by_name_.count(info.name)) throw RdsymError("duplicate symbol name '" + info.name + "'");
    SymbolId id = static_cast<SymbolId>(syms_.size());
    by_name_.emplace(info.name, id);
    syms_.push_back(std::move(info));
    return id;
}

void SymbolTable::init_standard(int m, int max_jet_order)
{
    check_mutable();
    if (m < 1 || m > 3) throw RdsymError("spatial dimension m must be 1..3");
    m_ = m;
    max_jet_order_ = max_jet_order;
    t_ = add({"t", SymKind::Independent, kNoSymbol, {}});
    x_.clear();
    for (int i = 1; i <= m; ++i)
        x_.push_back(add({"x" + std::to_string(i), SymKind::Independent, kNoSymbol, {}}));

    auto make_dep = [&](const std::string& base_name) {
        SymbolId base = add({base_name, SymKind::Jet, kNoSymbol, {}});
        syms_[base].base = base;
        jets_[{base, {}}] = base;
        // enumerate all multi-indices over {t, x1..xm} with total order <= max_jet_order
        std::vector<SymbolId> dirs;
        dirs.push_back(t_);
        for (SymbolId x : x_) dirs.push_back(x);
        std::vector<std::vector<SymbolId>> level = {{}};
        for (int ord = 1; ord <= max_jet_order; ++ord) {
            std::vector<std::vector<SymbolId>> next;
            for (const auto& mlt : level) {
                SymbolId start = mlt.empty() ? dirs.front() : mlt.back();
                for (SymbolId d : dirs) {
                    if (!mlt.empty() && d < start) continue;  // nondecreasing => sorted
                    auto m2 = mlt;
                    m2.push_back(d);
                    next.push_back(m2);
                }
            }
            for (const auto& m2 : next) {
                if (jets_.count({base, m2})) continue;
                SymbolId id = add({base_name + jet_suffix(m2), SymKind::Jet, base, m2});
                jets_[{base, m2}] = id;
            }
            level = std::move(next);
        }
        return base;
    };
    u_ = make_dep("u");
    v_ = make_dep("v");
}

SymbolId SymbolTable::register_parameter(const std::string& name)
{
    return add({name, SymKind::Parameter, kNoSymbol, {}});
}

SymbolId SymbolTable::register_free(const std::string& name)
{
    return add({name, SymKind::Free, kNoSymbol, {}});
}

std::uint32_t SymbolTable::register_opaque(const std::string& name)
{
    check_mutable();
    if (opaque_by_name_.count(name) || by_name_.count(name))
        throw RdsymError("duplicate name '" + name + "'");
    std::uint32_t id = static_cast<std::uint32_t>(opaques_.size());
    opaques_.push_back({name});
    opaque_by_name_.emplace(name, id);
    return id;
}

std::uint32_t SymbolTable::declare_function(const std::string& name)
{
    check_mutable();
    if (decl_by_name_.count(name) || by_name_.count(name))
        throw RdsymError("duplicate name '" + name + "'");
    std::uint32_t id = static_cast<std::uint32_t>(decls_.size());
    DeclaredFunction d;
    d.name = name;
    decls_.push_back(std::move(d));
    decl_by_name_.emplace(name, id);
    return id;
}

DeclaredFunction& SymbolTable::declared_mutable(std::uint32_t id)
{
    check_mutable();
    return decls_.at(id);
}

SymbolId SymbolTable::x(int mu) const
{
    if (mu < 1 || mu > m_) throw RdsymError("x index out of range");
    return x_[mu - 1];
}

std::vector<SymbolId> SymbolTable::independents() const
{
    std::vector<SymbolId> out{t_};
    out.insert(out.end(), x_.begin(), x_.end());
    return out;
}

std::optional<SymbolId> SymbolTable::lookup(const std::string& name) const
{
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::uint32_t> SymbolTable::lookup_opaque(const std::string& name) const
{
    auto it = opaque_by_name_.find(name);
    if (it == opaque_by_name_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::uint32_t> SymbolTable::lookup_declared(const std::string& name) const
{
    auto it = decl_by_name_.find(name);
    if (it == decl_by_name_.end()) return std::nullopt;
    return it->second;
}

SymbolId SymbolTable::jet(SymbolId base, std::vector<SymbolId> multi) const
{
    std::sort(multi.begin(), multi.end(),
              [this](SymbolId a, SymbolId b) { return dir_less(a, b); });
    auto it = jets_.find({base, multi});
    if (it == jets_.end())
        throw JetOverflowError("jet symbol of order " + std::to_string(multi.size()) +
                               " for '" + name(base) + "' is not tracked (max order " +
                               std::to_string(max_jet_order_) + ")");
    return it->second;
}

bool SymbolTable::dir_less(SymbolId a, SymbolId b) const
{
    // t first, then x1 < x2 < ... (registration order matches)
    return a < b;
}

std::string SymbolTable::jet_suffix(const std::vector<SymbolId>& multi) const
{
    if (multi.empty()) return "";
    std::string s = "_";
    for (SymbolId d : multi) s += name(d);
    return s;
}

}  // namespace rdsym
