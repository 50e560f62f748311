#pragma once

#include "rdsym/detgen.hpp"
#include "rdsym/equiv.hpp"
#include "rdsym/matrix_algebra.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rdsym {

struct SchemaError : RdsymError {
    SchemaError(const std::string& path, const std::string& msg)
        : RdsymError("schema violation at " + path + ": " + msg)
    {
    }
};

/// One table row: nonlinearity templates, constraints, symmetry list, AET
/// references and verification directives.
struct CatalogEntry {
    std::string id;        // e.g. "t4r1"
    int table = 0;         // 1..10, 0 = showcase
    std::string row;       // row label within the table
    std::string anchor;    // short verbatim quote for audit

    std::string kind;      // "diagonal" | "first_order"
    int p = 1;
    std::string a;         // "0" | "1" | "any" | "any_not1" | "any_not01" | literal
    int m = 1;
    std::vector<int> m_extra;

    std::vector<std::string> params;
    std::map<std::string, std::vector<Rational>> enums;
    struct OpaqueSlot {
        std::string name;
        std::string arg;
    };
    std::vector<OpaqueSlot> opaque;
    struct DeclaredSpec {
        std::string name;
        std::string type;  // heat aheat laplace laplace_drift heat_profile lower_heat spatial polar
        std::string mu = "0";
        std::string eta = "0";
    };
    std::vector<DeclaredSpec> declared;

    std::string f1, f2;
    std::vector<std::string> constraints;

    struct SymmetryRef {
        std::string field;
        std::string condition;             // human-readable predicate text
        std::map<std::string, std::string> bind;  // parameter substitutions enforcing it
        std::string gamma;                 // for Ghat macros
        std::string expect = "pass";       // "pass" | "open_question"
        int m = 0;                         // 0 = entry default
        std::string flag;                  // "galilei" | "exp_galilei" | "conformal"
        std::string note;
    };
    std::vector<SymmetryRef> symmetries;

    struct AetRef {
        int id = 0;
        std::map<std::string, std::string> bindings;  // AET parameter -> expr over row params
        std::string condition;
        std::map<std::string, std::string> bind;      // row-parameter substitutions
        std::vector<std::string> absorb_f1, absorb_f2;
        std::optional<int> p_override;
        std::string f1_override, f2_override;  // replace the row templates (rare)
        bool allow_symmetry = false;
        std::string expect = "pass";  // "pass" | "open_question"
        std::string note;
    };
    std::vector<AetRef> aets;

    std::string quarantine;  // nonempty = quarantined, with reason
    std::string notes;
};

struct Catalog {
    std::vector<CatalogEntry> entries;
    std::string hash;  // FNV-1a over the loaded files
    std::vector<std::string> files;
};

/// Loads catalog/table{N}.json (+ showcase.json) from a directory, or a single
/// file. Throws SchemaError with a JSON-pointer-style path on malformed input.
Catalog load_catalog(const std::string& path);

/// Appendix realizations and algebras from catalog/appendix.json.
struct AppendixData {
    std::vector<MatrixAlgebra> algebras;
    std::string hash;
};
AppendixData load_appendix(const std::string& path);

// -- verification -------------------------------------------------------------------

struct CheckResult {
    std::string name;
    bool pass = false;
    bool quarantined = false;
    std::string verdict;  // PROVED_ZERO / PROBED_ZERO / NONZERO / descriptive
    std::string note;
};

struct EntryReport {
    std::string id;
    int table = 0;
    std::string row;
    bool pass = false;
    bool quarantined = false;
    std::vector<CheckResult> checks;
};

struct VerificationReport {
    std::vector<EntryReport> entries;
    int n_pass = 0, n_fail = 0, n_quarantined = 0;
    std::uint64_t seed = 0;
    std::string engine_version;
    std::string catalog_hash;

    bool all_ok() const { return n_fail == 0; }
    std::string to_text() const;
    std::string to_json() const;
};

struct VerifyOptions {
    std::uint64_t seed = 0x5eed;
    int jobs = 1;
    bool run_aets = true;
    bool run_closure = true;
};

/// Builds the runtime objects for one entry at dimension m with the given
/// parameter substitutions; exposed for tests and the CLI `check`/`transform`
/// paths.
struct EntryInstance {
    std::shared_ptr<const SymbolTable> tab;
    DiffusionSystem sys;
    SamplingDomain dom;
    std::map<std::string, SymbolId> param_ids;
};
EntryInstance instantiate_entry(const CatalogEntry& e, int m, std::uint64_t seed,
                                const std::map<std::string, Rational>& enum_binding,
                                const std::map<std::string, std::string>& extra_bind = {});

/// Parses a generator specification which may reference the macros D, K, G<mu>,
/// Ghat<mu> (gamma supplied) and J<mu><nu> in addition to the d_* basis tokens.
VectorField parse_field_macros(const std::string& src, const DiffusionSystem& sys,
                               const Expr& gamma);

EntryReport verify_entry(const CatalogEntry& e, const VerifyOptions& opt);
VerificationReport verify_all(const Catalog& cat, const VerifyOptions& opt);

std::string engine_version();
std::string fnv1a_hex(const std::string& bytes, std::uint64_t h = 0xcbf29ce484222325ull);

}  // namespace rdsym
