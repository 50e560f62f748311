#include "rdsym/catalog.hpp"

#include <CLI11.hpp>

#include <cctype>
#include <cstdlib>
#include <set>
#include <fstream>
#include <iostream>

using namespace rdsym;

namespace {

std::uint64_t default_seed()
{
    if (const char* env = std::getenv("RDSYM_SEED")) return std::strtoull(env, nullptr, 0);
    return 0x5eed;
}

void write_out(const std::string& path, const std::string& text)
{
    if (path.empty()) return;
    std::ofstream out(path);
    out << text;
}

/// Ad-hoc symbol table for user expressions: every unknown identifier in the
/// inputs becomes a parameter.
std::shared_ptr<const SymbolTable> adhoc_table(const std::vector<std::string>& sources, int m)
{
    auto tab = std::make_shared<SymbolTable>();
    tab->init_standard(m);
    // collect candidate identifiers
    for (const auto& src : sources) {
        std::string ident;
        for (std::size_t i = 0; i <= src.size(); ++i) {
            char c = i < src.size() ? src[i] : '\0';
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
                ident += c;
                continue;
            }
            if (!ident.empty() && std::isalpha(static_cast<unsigned char>(ident[0]))) {
                bool call = c == '(';
                static const std::set<std::string> reserved = {"exp", "log", "sin", "cos"};
                if (!tab->lookup(ident) && !reserved.count(ident) && ident.rfind("d_", 0) != 0) {
                    if (call) {
                        if (!tab->lookup_opaque(ident)) tab->register_opaque(ident);
                    } else {
                        // jet markers resolve against the standard table
                        auto us = ident.find('_');
                        bool jetlike = false;
                        if (us != std::string::npos) {
                            std::string head = ident.substr(0, us);
                            if (auto b = tab->lookup(head))
                                jetlike = tab->is_dependent_base(*b);
                        }
                        if (!jetlike) tab->register_parameter(ident);
                    }
                }
                ident.clear();
            } else {
                ident.clear();
            }
        }
    }
    tab->freeze();
    return tab;
}

int exit_code_of(const VerificationReport& r) { return r.all_ok() ? 0 : 1; }

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"rdsym - Lie point-symmetry verification for reaction-diffusion systems"};
    app.set_version_flag("--version", engine_version());
    std::uint64_t seed = default_seed();
    app.add_option("--seed", seed, "random seed (env RDSYM_SEED)");

    // verify
    auto* verify = app.add_subcommand("verify", "verify catalog entries");
    std::string catalog_dir = "catalog";
    int v_table = 0;
    std::string v_row;
    int v_m = 0;
    bool v_all = false;
    int jobs = 1;
    std::string out_path, json_path;
    verify->add_option("--catalog", catalog_dir, "catalog directory");
    verify->add_option("--table", v_table, "table number (1..10)");
    verify->add_option("--row", v_row, "row id within the table");
    verify->add_option("--m", v_m, "override spatial dimension");
    verify->add_flag("--all", v_all, "verify the whole catalog");
    verify->add_option("--jobs", jobs, "parallel workers");
    verify->add_option("--out", out_path, "write the text report here");
    verify->add_option("--json", json_path, "write the JSON report here");

    // check
    auto* check = app.add_subcommand("check", "ad-hoc symmetry check");
    std::string c_f1, c_f2 = "0", c_a = "1", c_field, c_system = "eq2";
    int c_m = 1, c_p = 1;
    check->add_option("--f1", c_f1, "first nonlinearity")->required();
    check->add_option("--f2", c_f2, "second nonlinearity");
    check->add_option("--a", c_a, "diffusion coefficient of v (eq2 kind)");
    check->add_option("--system", c_system, "eq2 (diagonal) or eq8 (first order)");
    check->add_option("--p", c_p, "p for eq8");
    check->add_option("--m", c_m, "spatial dimension");
    check->add_option("--field", c_field, "generator, e.g. \"u*d_v - v*d_u\"")->required();

    // detgen
    auto* detgen = app.add_subcommand("detgen", "print the determining system");
    std::string d_system = "eq8";
    int d_p = 1, d_m = 1;
    std::string d_f1, d_f2;
    detgen->add_option("--system", d_system, "eq2 or eq8");
    detgen->add_option("--p", d_p, "p for eq8");
    detgen->add_option("--m", d_m, "spatial dimension");
    detgen->add_option("--f1", d_f1, "concrete f1 (default: opaque)");
    detgen->add_option("--f2", d_f2, "concrete f2 (default: opaque)");

    // transform
    auto* transform = app.add_subcommand("transform", "apply an AET to a catalog row");
    int t_aet = 0, t_table = 0;
    std::string t_row, t_catalog = "catalog";
    transform->add_option("--aet", t_aet, "AET id (1..22)")->required();
    transform->add_option("--table", t_table, "table number")->required();
    transform->add_option("--row", t_row, "row id")->required();
    transform->add_option("--catalog", t_catalog, "catalog directory");

    // bracket
    auto* bracket = app.add_subcommand("bracket", "Lie bracket of two generators");
    std::vector<std::string> b_fields;
    int b_m = 1;
    bracket->add_option("fields", b_fields, "two generator expressions")->expected(2);
    bracket->add_option("--m", b_m, "spatial dimension");

    // catalog
    auto* catc = app.add_subcommand("catalog", "list or inspect catalog entries");
    std::string cc_dir = "catalog", cc_id;
    catc->add_option("--catalog", cc_dir, "catalog directory");
    catc->add_option("--id", cc_id, "inspect one entry");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*verify) {
            Catalog cat;
            try {
                cat = load_catalog(catalog_dir);
            } catch (const RdsymError& e) {
                std::cerr << "load error: " << e.what() << "\n";
                return 2;
            }
            Catalog selected;
            selected.hash = cat.hash;
            if (v_all || (v_table == 0 && v_row.empty())) {
                selected = cat;
            } else {
                for (auto& e : cat.entries) {
                    if (v_table != 0 && e.table != v_table) continue;
                    if (!v_row.empty() && e.row != v_row) continue;
                    auto copy = e;
                    if (v_m > 0) {
                        copy.m_extra.clear();
                        if (copy.m != v_m) {
                            copy.m_extra = {v_m};
                        }
                    }
                    selected.entries.push_back(std::move(copy));
                }
                if (selected.entries.empty()) {
                    std::cerr << "no such table/row\n";
                    return 2;
                }
            }
            VerifyOptions opt;
            opt.seed = seed;
            opt.jobs = jobs;
            auto rep = verify_all(selected, opt);
            std::cout << rep.to_text();
            write_out(out_path, rep.to_text());
            write_out(json_path, rep.to_json());
            return exit_code_of(rep);
        }

        if (*check) {
            auto tab = adhoc_table({c_f1, c_f2, c_a, c_field}, c_m);
            DiffusionSystem sys =
                c_system == "eq8"
                    ? DiffusionSystem::first_order(tab, c_p, parse(c_f1, *tab), parse(c_f2, *tab))
                    : DiffusionSystem::diagonal(tab, parse(c_a, *tab), parse(c_f1, *tab),
                                                parse(c_f2, *tab));
            for (const auto& viol : validate(sys)) {
                std::cout << (viol.severity == Violation::Severity::Error ? "error: " : "warning: ")
                          << viol.message << "\n";
                if (viol.severity == Violation::Severity::Error) return 2;
            }
            SamplingDomain dom;
            dom.seed = seed;
            VectorField X = parse_field_macros(c_field, sys, Expr());
            auto rep = check_symmetry(X, sys, dom);
            std::cout << "X = " << X.print() << "\n";
            std::cout << "residual1: " << to_string(rep.verdict1.kind) << "\n";
            std::cout << "residual2: " << to_string(rep.verdict2.kind) << "\n";
            if (!rep.pass) {
                std::cout << "residual1 = " << to_string(*tab, rep.residual1) << "\n";
                std::cout << "residual2 = " << to_string(*tab, rep.residual2) << "\n";
            }
            std::cout << (rep.pass ? "PASS" : "FAIL") << "\n";
            return rep.pass ? 0 : 1;
        }

        if (*detgen) {
            SystemKind kind = d_system == "eq2" ? SystemKind::Diagonal : SystemKind::FirstOrder;
            const std::string* f1p = d_f1.empty() ? nullptr : &d_f1;
            const std::string* f2p = d_f2.empty() ? nullptr : &d_f2;
            auto res = generate_determining(kind, d_m, d_p, nullptr, f1p, f2p);
            std::cout << "ansatz: " << res.ansatz.print() << "\n";
            std::cout << res.system.print();
            return 0;
        }

        if (*transform) {
            Catalog cat;
            try {
                cat = load_catalog(t_catalog);
            } catch (const RdsymError& e) {
                std::cerr << "load error: " << e.what() << "\n";
                return 2;
            }
            const CatalogEntry* entry = nullptr;
            for (const auto& e : cat.entries)
                if (e.table == t_table && e.row == t_row) entry = &e;
            if (!entry) {
                std::cerr << "no such table/row\n";
                return 2;
            }
            CatalogEntry e2 = *entry;
            // keep only the requested AET
            e2.symmetries.clear();
            std::vector<CatalogEntry::AetRef> keep;
            for (const auto& a : e2.aets)
                if (a.id == t_aet) keep.push_back(a);
            if (keep.empty()) {
                std::cerr << "row does not reference AET " << t_aet << "\n";
                return 2;
            }
            e2.aets = keep;
            VerifyOptions opt;
            opt.seed = seed;
            opt.run_closure = false;
            auto rep = verify_entry(e2, opt);
            for (const auto& c : rep.checks)
                std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << c.verdict
                          << (c.note.empty() ? "" : "  -- " + c.note) << "\n";
            return rep.pass ? 0 : 1;
        }

        if (*bracket) {
            auto tab = adhoc_table(b_fields, b_m);
            VectorField X = parse_field(b_fields[0], tab);
            VectorField Y = parse_field(b_fields[1], tab);
            std::cout << lie_bracket(X, Y).print() << "\n";
            return 0;
        }

        if (*catc) {
            Catalog cat;
            try {
                cat = load_catalog(cc_dir);
            } catch (const RdsymError& e) {
                std::cerr << "load error: " << e.what() << "\n";
                return 2;
            }
            if (cc_id.empty()) {
                std::cout << "catalog " << cat.hash << ": " << cat.entries.size() << " entries\n";
                for (const auto& e : cat.entries)
                    std::cout << "  " << e.id << "  table " << e.table << " row " << e.row
                              << "  f1=" << e.f1 << "  f2=" << e.f2
                              << (e.quarantine.empty() ? "" : "  [quarantined]") << "\n";
            } else {
                for (const auto& e : cat.entries) {
                    if (e.id != cc_id) continue;
                    std::cout << "id: " << e.id << "\ntable: " << e.table << " row " << e.row
                              << "\nkind: " << e.kind << " a=" << e.a << " m=" << e.m
                              << "\nf1: " << e.f1 << "\nf2: " << e.f2 << "\nanchor: " << e.anchor
                              << "\nnotes: " << e.notes << "\n";
                    for (const auto& s : e.symmetries)
                        std::cout << "symmetry: " << s.field
                                  << (s.condition.empty() ? "" : " if " + s.condition) << "\n";
                    for (const auto& a : e.aets) std::cout << "aet: " << a.id << "\n";
                }
            }
            return 0;
        }

        std::cout << app.help();
        return 0;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const RdsymError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
