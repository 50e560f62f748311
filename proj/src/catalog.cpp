#include "rdsym/catalog.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <atomic>
#include <future>
#include <sstream>

namespace rdsym {

using nlohmann::json;
namespace fs = std::filesystem;

std::string engine_version() { return "0.1.0"; }

std::string fnv1a_hex(const std::string& bytes, std::uint64_t h)
{
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

// -- loading ---------------------------------------------------------------------

namespace {

template <typename T>
T get_req(const json& j, const std::string& path, const char* key)
{
    if (!j.contains(key)) throw SchemaError(path + "/" + key, "missing required field");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw SchemaError(path + "/" + key, e.what());
    }
}

template <typename T>
T get_opt(const json& j, const char* key, T def)
{
    if (!j.contains(key)) return def;
    return j.at(key).get<T>();
}

Rational rational_from_json(const json& j, const std::string& path)
{
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        auto slash = s.find('/');
        try {
            if (slash == std::string::npos) return Rational(Integer(s));
            return Rational(Integer(s.substr(0, slash)), Integer(s.substr(slash + 1)));
        } catch (...) {
            throw SchemaError(path, "not a rational: " + s);
        }
    }
    throw SchemaError(path, "expected integer or \"p/q\" string");
}

CatalogEntry parse_entry(const json& j, const std::string& path)
{
    CatalogEntry e;
    e.id = get_req<std::string>(j, path, "id");
    e.row = get_req<std::string>(j, path, "row");
    e.anchor = get_opt<std::string>(j, "anchor", "");
    e.kind = get_req<std::string>(j, path, "kind");
    if (e.kind != "diagonal" && e.kind != "first_order")
        throw SchemaError(path + "/kind", "must be 'diagonal' or 'first_order'");
    e.p = get_opt<int>(j, "p", 1);
    e.a = get_opt<std::string>(j, "a", "any");
    e.m = get_opt<int>(j, "m", 1);
    e.m_extra = get_opt<std::vector<int>>(j, "m_extra", {});
    e.params = get_opt<std::vector<std::string>>(j, "params", {});
    if (j.contains("enums")) {
        for (auto& [k, v] : j.at("enums").items()) {
            std::vector<Rational> vals;
            int i = 0;
            for (const auto& x : v)
                vals.push_back(rational_from_json(x, path + "/enums/" + k + "/" +
                                                         std::to_string(i++)));
            e.enums[k] = std::move(vals);
        }
    }
    if (j.contains("opaque")) {
        int i = 0;
        for (const auto& o : j.at("opaque")) {
            std::string p2 = path + "/opaque/" + std::to_string(i++);
            e.opaque.push_back({get_req<std::string>(o, p2, "name"),
                                get_req<std::string>(o, p2, "arg")});
        }
    }
    if (j.contains("declared")) {
        int i = 0;
        for (const auto& d : j.at("declared")) {
            std::string p2 = path + "/declared/" + std::to_string(i++);
            CatalogEntry::DeclaredSpec ds;
            ds.name = get_req<std::string>(d, p2, "name");
            ds.type = get_req<std::string>(d, p2, "type");
            ds.mu = get_opt<std::string>(d, "mu", "0");
            ds.eta = get_opt<std::string>(d, "eta", "0");
            e.declared.push_back(std::move(ds));
        }
    }
    e.f1 = get_req<std::string>(j, path, "f1");
    e.f2 = get_req<std::string>(j, path, "f2");
    e.constraints = get_opt<std::vector<std::string>>(j, "constraints", {});
    if (j.contains("symmetries")) {
        int i = 0;
        for (const auto& s : j.at("symmetries")) {
            std::string p2 = path + "/symmetries/" + std::to_string(i++);
            CatalogEntry::SymmetryRef r;
            r.field = get_req<std::string>(s, p2, "field");
            r.condition = get_opt<std::string>(s, "condition", "");
            if (s.contains("bind"))
                for (auto& [k, v] : s.at("bind").items()) r.bind[k] = v.get<std::string>();
            r.gamma = get_opt<std::string>(s, "gamma", "");
            r.expect = get_opt<std::string>(s, "expect", "pass");
            r.m = get_opt<int>(s, "m", 0);
            r.flag = get_opt<std::string>(s, "flag", "");
            r.note = get_opt<std::string>(s, "note", "");
            e.symmetries.push_back(std::move(r));
        }
    }
    if (j.contains("aet")) {
        int i = 0;
        for (const auto& a : j.at("aet")) {
            std::string p2 = path + "/aet/" + std::to_string(i++);
            CatalogEntry::AetRef r;
            r.id = get_req<int>(a, p2, "id");
            if (r.id < 1 || r.id > 22) throw SchemaError(p2 + "/id", "AET id must be 1..22");
            if (a.contains("bindings"))
                for (auto& [k, v] : a.at("bindings").items())
                    r.bindings[k] = v.get<std::string>();
            r.condition = get_opt<std::string>(a, "condition", "");
            if (a.contains("bind"))
                for (auto& [k, v] : a.at("bind").items()) r.bind[k] = v.get<std::string>();
            r.absorb_f1 = get_opt<std::vector<std::string>>(a, "absorb_f1", {});
            r.absorb_f2 = get_opt<std::vector<std::string>>(a, "absorb_f2", {});
            if (a.contains("p_override")) r.p_override = a.at("p_override").get<int>();
            r.f1_override = get_opt<std::string>(a, "f1_override", "");
            r.f2_override = get_opt<std::string>(a, "f2_override", "");
            r.allow_symmetry = get_opt<bool>(a, "allow_symmetry", false);
            r.expect = get_opt<std::string>(a, "expect", "pass");
            r.note = get_opt<std::string>(a, "note", "");
            e.aets.push_back(std::move(r));
        }
    }
    e.quarantine = get_opt<std::string>(j, "quarantine", "");
    e.notes = get_opt<std::string>(j, "notes", "");
    return e;
}

json load_json_file(const std::string& file)
{
    std::ifstream in(file);
    if (!in) throw RdsymError("cannot open " + file);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw SchemaError(file, "empty file");
    try {
        return json::parse(text);
    } catch (const json::exception& ex) {
        throw SchemaError(file, ex.what());
    }
}

}  // namespace

Catalog load_catalog(const std::string& path)
{
    Catalog cat;
    std::vector<std::string> files;
    if (fs::is_directory(path)) {
        for (int n = 1; n <= 10; ++n) {
            fs::path f = fs::path(path) / ("table" + std::to_string(n) + ".json");
            if (fs::exists(f)) files.push_back(f.string());
        }
        fs::path sc = fs::path(path) / "showcase.json";
        if (fs::exists(sc)) files.push_back(sc.string());
    } else {
        files.push_back(path);
    }
    if (files.empty()) throw RdsymError("no catalog files found under " + path);

    std::string all_bytes;
    for (const auto& f : files) {
        json j = load_json_file(f);
        {
            std::ifstream in(f);
            std::stringstream ss;
            ss << in.rdbuf();
            all_bytes += ss.str();
        }
        int table = get_req<int>(j, f, "table");
        if (!j.contains("entries") || !j.at("entries").is_array())
            throw SchemaError(f + "/entries", "missing entry array");
        int i = 0;
        for (const auto& je : j.at("entries")) {
            CatalogEntry e = parse_entry(je, f + "/entries/" + std::to_string(i++));
            e.table = table;
            cat.entries.push_back(std::move(e));
        }
    }
    cat.hash = fnv1a_hex(all_bytes);
    cat.files = files;

    // resolve every entry once so unknown symbols fail at load time
    for (const auto& e : cat.entries) {
        try {
            instantiate_entry(e, e.m, 1, {});
        } catch (const RdsymError& ex) {
            throw RdsymError("entry " + e.id + ": " + ex.what());
        }
    }
    return cat;
}

AppendixData load_appendix(const std::string& path)
{
    json j = load_json_file(path);
    AppendixData out;
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    out.hash = fnv1a_hex(ss.str());

    SymbolTable tab;
    tab.init_standard(1);
    SymbolId lam1 = tab.register_parameter("lambda1");
    SymbolId lam2 = tab.register_parameter("lambda2");
    tab.freeze();

    if (!j.contains("algebras")) throw SchemaError(path, "missing 'algebras'");
    int i = 0;
    for (const auto& ja : j.at("algebras")) {
        std::string p = path + "/algebras/" + std::to_string(i++);
        MatrixAlgebra A;
        A.name = get_req<std::string>(ja, p, "name");
        bool used_lambda = false;
        for (const auto& jb : get_req<json>(ja, p, "basis")) {
            std::string spec = jb.get<std::string>();
            // forms: "g5", "g1(0)", "g1(1)", "g1(2)", "g1(lambda)", "-g10",
            //        "g1/(lambda-1)"
            Expr scale = num(1);
            std::string name = spec;
            if (!name.empty() && name[0] == '-') {
                scale = num(-1);
                name = name.substr(1);
            }
            bool inv_lm1 = false;
            auto slash = name.find('/');
            if (slash != std::string::npos) {
                inv_lm1 = true;
                name = name.substr(0, slash);
            }
            Expr lambda = sym(used_lambda ? lam2 : lam1);
            auto paren = name.find('(');
            if (paren != std::string::npos) {
                std::string arg = name.substr(paren + 1, name.find(')') - paren - 1);
                name = name.substr(0, paren);
                if (arg == "lambda")
                    used_lambda = true;
                else
                    lambda = num(Rational(Integer(arg)));
            } else if (name == "g1" || name == "g3" || name == "g6") {
                used_lambda = true;
            }
            MatrixRealization g = appendix_matrix(name, tab, lambda);
            if (inv_lm1) scale = mul(scale, pow(sub(lambda, num(1)), num(-1)));
            g = mat_scale(scale, g);
            g.name = spec;
            A.basis.push_back(std::move(g));
        }
        A.declared_abelian = get_opt<bool>(ja, "abelian", false);
        if (ja.contains("relations")) {
            for (const auto& jr : ja.at("relations")) {
                BracketRelation r;
                r.i = jr.at("i").get<int>() - 1;
                r.j = jr.at("j").get<int>() - 1;
                for (const auto& c : jr.at("rhs"))
                    r.rhs.push_back(rational_from_json(c, p + "/relations"));
                A.relations.push_back(std::move(r));
            }
        }
        A.isomorphic_to = get_opt<std::string>(ja, "isomorphic_to", "");
        A.note = get_opt<std::string>(ja, "note", "");
        A.quarantined = get_opt<bool>(ja, "quarantine", false);
        A.quarantine_reason = get_opt<std::string>(ja, "quarantine_reason", "");
        out.algebras.push_back(std::move(A));
    }
    return out;
}

// -- instantiation ------------------------------------------------------------------

EntryInstance instantiate_entry(const CatalogEntry& e, int m, std::uint64_t seed,
                                const std::map<std::string, Rational>& enum_binding,
                                const std::map<std::string, std::string>& extra_bind)
{
    auto tab = std::make_shared<SymbolTable>();
    tab->init_standard(m);
    EntryInstance inst;

    std::map<std::string, SymbolId> pid;
    auto ensure_param = [&](const std::string& name) {
        if (!pid.count(name)) pid[name] = tab->register_parameter(name);
        return pid[name];
    };
    bool a_symbolic = false;
    if (e.kind == "diagonal" &&
        (e.a == "any" || e.a == "any_not1" || e.a == "any_not01" || e.a == "any_not0")) {
        ensure_param("a");
        a_symbolic = true;
    }
    for (const auto& p : e.params) ensure_param(p);
    for (const auto& [name, vals] : e.enums) {
        (void)vals;
        ensure_param(name);
    }
    for (const auto& o : e.opaque) tab->register_opaque(o.name);

    // declared functions; their mu/eta strings may reference parameters
    for (const auto& d : e.declared) {
        if (m != 1 && d.type != "heat" && d.type != "aheat" && d.type != "spatial" &&
            d.type != "polar")
            throw RdsymError("declared function '" + d.name + "' requires m = 1");
        // parse mu/eta against a scratch expression later; register the function
        // with placeholder rules after parameters exist
        (void)d;
    }

    // a as expression
    Expr a_expr;
    if (e.kind == "diagonal") {
        if (a_symbolic)
            a_expr = sym(pid.at("a"));
        else {
            // literal: parse after freeze below; remember string
        }
    }

    // freeze happens after declared functions are registered; mu/eta expressions
    // can only reference parameters (registered above), so parse them via a
    // temporary unfrozen-table trick: parse uses the same table pre-freeze.
    for (const auto& d : e.declared) {
        Expr mu = parse(d.mu, *tab);
        Expr eta = parse(d.eta, *tab);
        if (d.type == "heat")
            declare_heat(*tab, d.name, mu, num(1));
        else if (d.type == "aheat")
            declare_heat(*tab, d.name, mu, a_symbolic ? sym(pid.at("a")) : parse(e.a, *tab));
        else if (d.type == "laplace")
            declare_laplace(*tab, d.name, mu);
        else if (d.type == "laplace_drift")
            declare_laplace_drift(*tab, d.name, mu, eta);
        else if (d.type == "heat_profile")
            declare_heat_profile(*tab, d.name, mu, eta);
        else if (d.type == "lower_heat")
            declare_lower_heat(*tab, d.name, mu);
        else if (d.type == "spatial")
            declare_spatial(*tab, d.name);
        else if (d.type == "polar")
            declare_polar_angle(*tab, d.name);
        else
            throw RdsymError("unknown declared-function type '" + d.type + "'");
    }
    tab->freeze();
    auto T = std::static_pointer_cast<const SymbolTable>(tab);

    if (e.kind == "diagonal" && !a_symbolic) a_expr = parse(e.a, *T);

    Expr f1 = parse(e.f1, *T);
    Expr f2 = parse(e.f2, *T);

    // parameter substitutions: enum values + extra binds (strings)
    std::map<SymbolId, Expr> subst;
    for (const auto& [name, q] : enum_binding) {
        auto it = pid.find(name);
        if (it == pid.end()) throw RdsymError("enum parameter '" + name + "' not registered");
        subst[it->second] = num(q);
    }
    for (const auto& [name, str] : extra_bind) {
        auto it = pid.find(name);
        if (it == pid.end()) throw UnknownSymbolError(name);
        subst[it->second] = parse(str, *T);
    }
    if (!subst.empty()) {
        f1 = substitute(*T, f1, subst);
        f2 = substitute(*T, f2, subst);
        if (e.kind == "diagonal") a_expr = substitute(*T, a_expr, subst);
    }

    DiffusionSystem sys = e.kind == "diagonal" ? DiffusionSystem::diagonal(T, a_expr, f1, f2)
                                               : DiffusionSystem::first_order(T, e.p, f1, f2);
    for (const auto& c : e.constraints) sys.constraints.push_back(Predicate::parse_str(c, *T));

    SamplingDomain dom;
    dom.seed = seed;
    if (a_symbolic) {
        std::vector<Rational> choices = {Rational(-1), Rational(-1, 2), Rational(1, 2),
                                         Rational(2)};
        if (e.a == "any") choices.push_back(Rational(1));
        dom.set_choices(pid.at("a"), choices);
    }

    inst.tab = T;
    inst.sys = std::move(sys);
    inst.dom = std::move(dom);
    inst.param_ids = std::move(pid);
    return inst;
}

VectorField parse_field_macros(const std::string& src, const DiffusionSystem& sys,
                               const Expr& gamma)
{
    std::map<std::string, VectorField> macros;
    GeneratorSpec d{GeneratorName::D};
    macros.emplace("D", make_named(d, sys));
    const int m = sys.tab->m();
    bool diag_nonzero_a = sys.kind == SystemKind::Diagonal && !sys.a.is_zero();
    if (diag_nonzero_a) {
        GeneratorSpec k{GeneratorName::K};
        macros.emplace("K", make_named(k, sys));
        for (int mu = 1; mu <= m; ++mu) {
            GeneratorSpec g{GeneratorName::G};
            g.mu = mu;
            macros.emplace("G" + std::to_string(mu), make_named(g, sys));
            if (!gamma.is_zero()) {
                GeneratorSpec gh{GeneratorName::Ghat};
                gh.mu = mu;
                gh.gamma = gamma;
                macros.emplace("Ghat" + std::to_string(mu), make_named(gh, sys));
            }
        }
    }
    return parse_field(src, sys.tab, macros);
}

// -- verification ---------------------------------------------------------------------

namespace {

std::vector<std::map<std::string, Rational>> enum_combinations(const CatalogEntry& e)
{
    std::vector<std::map<std::string, Rational>> out = {{}};
    for (const auto& [name, vals] : e.enums) {
        std::vector<std::map<std::string, Rational>> next;
        for (const auto& base : out)
            for (const auto& v : vals) {
                auto c = base;
                c[name] = v;
                next.push_back(std::move(c));
            }
        out = std::move(next);
    }
    return out;
}

std::string combo_str(const std::map<std::string, Rational>& combo)
{
    if (combo.empty()) return "";
    std::string s = " [";
    bool first = true;
    for (const auto& [k, v] : combo) {
        if (!first) s += ",";
        first = false;
        s += k + "=" + to_string(v);
    }
    return s + "]";
}

/// Replaces an opaque function (all derivative orders) by a concrete shape.
Expr instantiate_opaque(const SymbolTable& tab, const Expr& e, std::uint32_t fid,
                        const std::string& shape)
{
    std::function<Expr(const Expr&)> go = [&](const Expr& x) -> Expr {
        std::vector<Expr> kids;
        for (const auto& k : x.kids()) kids.push_back(go(k));
        switch (x.kind()) {
            case Kind::Fun: {
                Expr arg = kids[0];
                if (x.fn_id() != fid) return fun(x.fn_id(), arg, x.deriv_order());
                int k = x.deriv_order();
                if (shape == "square") {
                    if (k == 0) return pow(arg, 2);
                    if (k == 1) return mul(num(2), arg);
                    if (k == 2) return num(2);
                    return Expr();
                }
                if (shape == "exp") return exp_(arg);
                if (shape == "log") {
                    if (k == 0) return log_(arg);
                    // d^k log = (-1)^{k-1} (k-1)! arg^{-k}
                    long long f = 1;
                    for (long long i = 2; i < k; ++i) f *= i;
                    return mul(num((k % 2 == 1 ? 1 : -1) * f), pow(arg, num(-k)));
                }
                if (shape == "id") {
                    if (k == 0) return arg;
                    if (k == 1) return num(1);
                    return Expr();
                }
                throw RdsymError("unknown probe shape " + shape);
            }
            case Kind::Num:
            case Kind::Sym:
            case Kind::Atom: return x;
            case Kind::Add: return add(std::move(kids));
            case Kind::Mul: return mul(std::move(kids));
            case Kind::Pow: return pow(kids[0], kids[1]);
            case Kind::Exp: return exp_(kids[0]);
            case Kind::Log: return log_(kids[0]);
            case Kind::Sin: return sin_(kids[0]);
            case Kind::Cos: return cos_(kids[0]);
        }
        return x;
    };
    return go(e);
}

const std::vector<std::string>& probe_shapes()
{
    static const std::vector<std::string> s = {"square", "exp", "log", "id"};
    return s;
}

bool field_uses_declared(const VectorField& f)
{
    if (!atoms_of(f.eta).empty() || !atoms_of(f.pi1).empty() || !atoms_of(f.pi2).empty())
        return true;
    for (const auto& x : f.xi)
        if (!atoms_of(x).empty()) return true;
    return false;
}

}  // namespace

EntryReport verify_entry(const CatalogEntry& e, const VerifyOptions& opt)
{
    EntryReport rep;
    rep.id = e.id;
    rep.table = e.table;
    rep.row = e.row;
    rep.quarantined = !e.quarantine.empty();
    if (rep.quarantined)
        rep.checks.push_back({"quarantine", true, true, "QUARANTINED", e.quarantine});

    std::uint64_t eseed = std::stoull(fnv1a_hex(e.id + std::to_string(opt.seed)), nullptr, 16);

    std::vector<int> ms = {e.m};
    for (int mm : e.m_extra) ms.push_back(mm);
    auto combos = enum_combinations(e);

    auto add_check = [&](CheckResult c) { rep.checks.push_back(std::move(c)); };

    for (int m : ms) {
        for (std::size_t ci = 0; ci < combos.size(); ++ci) {
            const auto& combo = combos[ci];
            EntryInstance inst;
            try {
                inst = instantiate_entry(e, m, eseed, combo);
            } catch (const RdsymError& ex) {
                if (m != e.m) continue;  // declared functions may be m=1 only
                add_check({"instantiate" + combo_str(combo), false, false, "ERROR", ex.what()});
                continue;
            }

            // symmetries
            for (std::size_t si = 0; si < e.symmetries.size(); ++si) {
                const auto& sref = e.symmetries[si];
                if (sref.m != 0 && sref.m != m) continue;
                if (sref.m == 0 && m != e.m) continue;
                std::string label = "m" + std::to_string(m) + combo_str(combo) + " sym[" +
                                    std::to_string(si) + "] " + sref.field;
                try {
                    EntryInstance si_inst = sref.bind.empty()
                                                ? inst
                                                : instantiate_entry(e, m, eseed, combo, sref.bind);
                    Expr gamma;
                    if (!sref.gamma.empty()) {
                        gamma = parse(sref.gamma, *si_inst.tab);
                        if (!sref.bind.empty()) {
                            std::map<SymbolId, Expr> sb;
                            for (const auto& [n, s2] : sref.bind)
                                sb[si_inst.param_ids.at(n)] = parse(s2, *si_inst.tab);
                            gamma = substitute(*si_inst.tab, gamma, sb);
                        }
                    }
                    VectorField X = parse_field_macros(sref.field, si_inst.sys, gamma);
                    auto repx = check_symmetry(X, si_inst.sys, si_inst.dom);
                    CheckResult c;
                    c.name = label;
                    c.pass = repx.pass;
                    c.quarantined = sref.expect == "open_question";
                    c.verdict = to_string(repx.verdict1.kind) + "/" + to_string(repx.verdict2.kind);
                    if (!repx.pass)
                        c.note = "residuals: " + to_string(*si_inst.tab, repx.residual1) + " ; " +
                                 to_string(*si_inst.tab, repx.residual2);
                    if (!sref.condition.empty())
                        c.name += " (if " + sref.condition + ")";
                    add_check(std::move(c));

                    if (!sref.flag.empty() && si_inst.sys.kind == SystemKind::Diagonal) {
                        std::vector<Expr> cand;
                        if (!gamma.is_zero()) cand.push_back(gamma);
                        auto flags = extension_flags(si_inst.sys, si_inst.dom, cand);
                        bool on = sref.flag == "galilei"
                                      ? flags.galilei.on
                                      : (sref.flag == "exp_galilei" ? flags.exp_galilei.on
                                                                    : flags.conformal.on);
                        add_check({label + " flag:" + sref.flag, on,
                                   sref.expect == "open_question", on ? "ON" : "OFF",
                                   on ? "" : "extension flag did not confirm"});
                    }
                } catch (const RdsymError& ex) {
                    add_check({label, false, sref.expect == "open_question", "ERROR", ex.what()});
                }
            }

            // closure of the finite-dimensional part (base m, first combo)
            if (opt.run_closure && m == e.m && ci == 0) {
                try {
                    std::vector<VectorField> fields = make_basic(inst.tab);
                    std::vector<VectorField> family;
                    for (const auto& sref : e.symmetries) {
                        if (!sref.condition.empty() || (sref.m != 0 && sref.m != m)) continue;
                        Expr gamma;
                        if (!sref.gamma.empty()) gamma = parse(sref.gamma, *inst.tab);
                        VectorField X = parse_field_macros(sref.field, inst.sys, gamma);
                        if (field_uses_declared(X))
                            family.push_back(std::move(X));
                        else
                            fields.push_back(std::move(X));
                    }
                    auto cl = closure_check(fields, inst.dom);
                    add_check({"closure" + combo_str(combo), cl.closed,
                               false, cl.closed ? "CLOSED" : "NOT_CLOSED", cl.note});
                    // family fields: bracket with the first finite fields must stay
                    // symmetries
                    for (std::size_t fi = 0; fi < family.size() && fi < 1; ++fi) {
                        for (std::size_t bi = 0; bi < fields.size() && bi < 2; ++bi) {
                            VectorField br = lie_bracket(fields[bi], family[fi]);
                            if (br.is_zero_field()) continue;
                            auto chk = check_symmetry(br, inst.sys, inst.dom);
                            add_check({"family-bracket[" + std::to_string(bi) + "," +
                                           std::to_string(fi) + "]",
                                       chk.pass, false,
                                       to_string(chk.verdict1.kind) + "/" +
                                           to_string(chk.verdict2.kind),
                                       ""});
                        }
                    }
                } catch (const RdsymError& ex) {
                    add_check({"closure", false, false, "ERROR", ex.what()});
                }
            }

            // AET references (base m, first combo)
            if (opt.run_aets && m == e.m && ci == 0) {
                for (std::size_t ai = 0; ai < e.aets.size(); ++ai) {
                    const auto& aref = e.aets[ai];
                    std::string label = "aet[" + std::to_string(aref.id) + "]";
                    if (!aref.condition.empty()) label += " (if " + aref.condition + ")";
                    try {
                        CatalogEntry e2 = e;
                        if (aref.p_override) e2.p = *aref.p_override;
                        if (!aref.f1_override.empty()) e2.f1 = aref.f1_override;
                        if (!aref.f2_override.empty()) e2.f2 = aref.f2_override;
                        // AET free parameter and slack parameters must be registered
                        EntryInstance ainst = instantiate_entry(e2, m, eseed, combo, aref.bind);
                        const SymbolTable& T = *ainst.tab;
                        // template: entry f's with bind applied plus absorb slack
                        ClassTemplate tmpl;
                        tmpl.tab = ainst.tab;
                        std::map<SymbolId, Expr> bind_sub;
                        for (const auto& [n, s2] : aref.bind)
                            bind_sub[ainst.param_ids.at(n)] = parse(s2, T);
                        Expr tf1 = substitute(T, parse(e2.f1, T), bind_sub);
                        Expr tf2 = substitute(T, parse(e2.f2, T), bind_sub);
                        std::set<SymbolId> slack;
                        for (const auto& s2 : aref.absorb_f1) {
                            Expr term = parse(s2, T);
                            tf1 = add(tf1, term);
                            for (SymbolId sid : free_symbols(term))
                                if (T.info(sid).kind == SymKind::Parameter &&
                                    T.name(sid).rfind("c", 0) == 0)
                                    slack.insert(sid);
                        }
                        for (const auto& s2 : aref.absorb_f2) {
                            Expr term = parse(s2, T);
                            tf2 = add(tf2, term);
                            for (SymbolId sid : free_symbols(term))
                                if (T.info(sid).kind == SymKind::Parameter &&
                                    T.name(sid).rfind("c", 0) == 0)
                                    slack.insert(sid);
                        }
                        tmpl.f1 = tf1;
                        tmpl.f2 = tf2;
                        // linear row parameters also float freely during matching:
                        // collect coefficient-like params (those the image may rescale)
                        for (SymbolId sid : slack) tmpl.param_slots.push_back(sid);
                        for (const auto& o : e.opaque) {
                            auto fid = T.lookup_opaque(o.name);
                            tmpl.opaque_slots.push_back(*fid);
                            Expr oarg = substitute(T, parse(o.arg, T), bind_sub);
                            tmpl.opaque_args.push_back(oarg);
                        }

                        std::map<std::string, Expr> tparams;
                        for (const auto& [n, s2] : aref.bindings)
                            tparams[n] = substitute(T, parse(s2, T), bind_sub);
                        PointTransformation trans = PointTransformation::aet(aref.id, tparams);

                        bool all_ok = true, any_change = false;
                        std::string note;
                        // instantiate every combination of probe shapes
                        std::vector<std::size_t> idx(e.opaque.size(), 0);
                        bool done = e.opaque.empty() ? false : false;
                        int combos_run = 0;
                        for (;;) {
                            DiffusionSystem psys = ainst.sys;
                            ClassTemplate ptmpl = tmpl;
                            for (std::size_t oi = 0; oi < e.opaque.size(); ++oi) {
                                auto fid = T.lookup_opaque(e.opaque[oi].name);
                                const std::string& shape = probe_shapes()[idx[oi]];
                                psys.f1 = instantiate_opaque(T, psys.f1, *fid, shape);
                                psys.f2 = instantiate_opaque(T, psys.f2, *fid, shape);
                            }
                            auto verdict = verify_aet_on(trans, psys, ptmpl, ainst.dom);
                            ++combos_run;
                            if (!verdict.class_preserved) {
                                all_ok = false;
                                note = verdict.note;
                            }
                            if (verdict.genuinely_changes_f) any_change = true;
                            // advance
                            std::size_t k = 0;
                            for (; k < idx.size(); ++k) {
                                if (++idx[k] < probe_shapes().size()) break;
                                idx[k] = 0;
                            }
                            if (idx.empty() || k == idx.size()) break;
                            (void)done;
                        }
                        bool changes_ok = aref.allow_symmetry || any_change || e.opaque.empty();
                        // for slot-free rows the transformation may still be checked
                        if (e.opaque.empty() && !aref.allow_symmetry) changes_ok = any_change;
                        CheckResult c;
                        c.name = label + " (" + std::to_string(combos_run) + " probe combos)";
                        c.pass = all_ok && changes_ok;
                        c.quarantined = aref.expect == "open_question";
                        c.verdict = all_ok ? "CLASS_PRESERVED" : "NOT_PRESERVED";
                        if (!changes_ok) c.verdict += "/DID_NOT_CHANGE_F";
                        c.note = note.empty() ? aref.note : note;
                        add_check(std::move(c));
                    } catch (const RdsymError& ex) {
                        add_check({label, false, false, "ERROR", ex.what()});
                    }
                }
            }
        }
    }

    bool ok = true;
    for (const auto& c : rep.checks)
        if (!c.pass && !c.quarantined && !rep.quarantined) ok = false;
    rep.pass = ok;
    return rep;
}

VerificationReport verify_all(const Catalog& cat, const VerifyOptions& opt)
{
    VerificationReport vr;
    vr.seed = opt.seed;
    vr.engine_version = engine_version();
    vr.catalog_hash = cat.hash;
    vr.entries.resize(cat.entries.size());

    if (opt.jobs <= 1) {
        for (std::size_t i = 0; i < cat.entries.size(); ++i)
            vr.entries[i] = verify_entry(cat.entries[i], opt);
    } else {
        std::vector<std::future<void>> futs;
        std::atomic<std::size_t> next{0};
        for (int j = 0; j < opt.jobs; ++j) {
            futs.push_back(std::async(std::launch::async, [&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= cat.entries.size()) return;
                    vr.entries[i] = verify_entry(cat.entries[i], opt);
                }
            }));
        }
        for (auto& f : futs) f.get();
    }

    for (const auto& er : vr.entries) {
        if (er.quarantined)
            ++vr.n_quarantined;
        else if (er.pass)
            ++vr.n_pass;
        else
            ++vr.n_fail;
    }
    return vr;
}

std::string VerificationReport::to_text() const
{
    std::ostringstream os;
    os << "rdsym " << engine_version << "  seed=" << seed << "  catalog=" << catalog_hash
       << "\n";
    for (const auto& er : entries) {
        std::string status = er.quarantined ? "QUARANTINED" : (er.pass ? "PASS" : "FAIL");
        os << status << "  table " << er.table << " row " << er.row << " (" << er.id << ")\n";
        for (const auto& c : er.checks) {
            if (c.pass && !er.quarantined) continue;  // details only for problems
            os << "    " << (c.pass ? "ok  " : (c.quarantined ? "oq  " : "FAIL")) << " "
               << c.name << "  " << c.verdict;
            if (!c.note.empty()) os << "  -- " << c.note;
            os << "\n";
        }
    }
    os << "summary: " << n_pass << " pass, " << n_fail << " fail, " << n_quarantined
       << " quarantined\n";
    return os.str();
}

std::string VerificationReport::to_json() const
{
    nlohmann::ordered_json j;
    j["engine_version"] = engine_version;
    j["seed"] = seed;
    j["catalog_hash"] = catalog_hash;
    j["summary"] = {{"pass", n_pass}, {"fail", n_fail}, {"quarantined", n_quarantined}};
    j["entries"] = nlohmann::ordered_json::array();
    for (const auto& er : entries) {
        nlohmann::ordered_json je;
        je["id"] = er.id;
        je["table"] = er.table;
        je["row"] = er.row;
        je["status"] = er.quarantined ? "QUARANTINED" : (er.pass ? "PASS" : "FAIL");
        je["checks"] = nlohmann::ordered_json::array();
        for (const auto& c : er.checks) {
            nlohmann::ordered_json jc;
            jc["name"] = c.name;
            jc["pass"] = c.pass;
            jc["quarantined"] = c.quarantined;
            jc["verdict"] = c.verdict;
            if (!c.note.empty()) jc["note"] = c.note;
            je["checks"].push_back(std::move(jc));
        }
        j["entries"].push_back(std::move(je));
    }
    return j.dump(2) + "\n";
}

}  // namespace rdsym
