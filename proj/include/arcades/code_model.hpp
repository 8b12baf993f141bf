#pragma once

// Global symbol table of an object-oriented code base: packages, classes,
// their members, and optional per-file repository history.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "arcades/error.hpp"
#include "json.hpp"

namespace arcades {

using Json = nlohmann::json;

enum class Access { Public, Private };
enum class RefMode { Value, Pointer, Reference };

/// A use of a type. `target` is a class id when `external` is false, otherwise
/// the name as written in the source.
struct TypeRef {
    std::string target;
    bool external = false;
    RefMode mode = RefMode::Value;
    std::vector<TypeRef> template_args;

    bool operator==(const TypeRef&) const = default;
};

struct FieldEntity {
    std::string id;
    std::string name;
    TypeRef type_ref;
    Access access = Access::Private;

    bool operator==(const FieldEntity&) const = default;
};

struct MethodEntity {
    std::string id;
    std::string name;
    Access access = Access::Private;
    std::vector<TypeRef> params;
    std::size_t body_line_count = 0;
    std::size_t call_site_count = 0;

    bool operator==(const MethodEntity&) const = default;
};

struct ClassEntity {
    std::string id;
    std::string name;
    std::string package_id;
    std::string file_id;
    std::vector<TypeRef> bases;
    std::vector<FieldEntity> fields;
    std::vector<MethodEntity> methods;  // declaration order
    std::size_t line_count = 1;

    bool operator==(const ClassEntity&) const = default;
};

struct PackageEntity {
    std::string id;
    std::string name;  // '::'-joined namespace path
    std::vector<std::string> file_ids;

    bool operator==(const PackageEntity&) const = default;
};

struct FileStats {
    std::size_t commit_count = 0;
    std::set<std::string> contributors;
    std::int64_t last_modified = 0;

    bool operator==(const FileStats&) const = default;
};

struct RepoStats {
    std::map<std::string, FileStats> files;  // keyed by file id

    bool operator==(const RepoStats&) const = default;
};

struct CodeModel {
    std::vector<PackageEntity> packages;
    std::vector<ClassEntity> classes;
    std::optional<RepoStats> repo_stats;
    std::int64_t reference_time = 0;

    bool operator==(const CodeModel&) const = default;

    const ClassEntity* find_class(std::string_view id) const {
        for (const auto& c : classes)
            if (c.id == id) return &c;
        return nullptr;
    }

    const PackageEntity* find_package(std::string_view id) const {
        for (const auto& p : packages)
            if (p.id == id) return &p;
        return nullptr;
    }

    /// Fully qualified name of a class: its package path joined with its name.
    std::string qualified_name(const ClassEntity& c) const {
        const auto* p = find_package(c.package_id);
        if (p == nullptr || p->name == kGlobalPackageName) return c.name;
        return p->name + "::" + c.name;
    }

    static constexpr std::string_view kGlobalPackageName = "(global)";
};

// ---------------------------------------------------------------------------
// enum <-> string

inline std::string_view to_string(Access a) { return a == Access::Public ? "public" : "private"; }

inline std::string_view to_string(RefMode m) {
    switch (m) {
        case RefMode::Value: return "value";
        case RefMode::Pointer: return "pointer";
        case RefMode::Reference: return "reference";
    }
    return "value";
}

namespace detail {

/// Typed accessors over a JSON tree that report the failing path.
class JsonReader {
public:
    static const Json& field(const Json& obj, const std::string& path, const char* key) {
        if (!obj.is_object()) throw SchemaError(path, "expected object");
        auto it = obj.find(key);
        if (it == obj.end()) throw SchemaError(join(path, key), "missing field");
        return *it;
    }

    static const Json* optional_field(const Json& obj, const char* key) {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return nullptr;
        return &*it;
    }

    static std::string string(const Json& v, const std::string& path) {
        if (!v.is_string()) throw SchemaError(path, "expected string");
        return v.get<std::string>();
    }

    static std::size_t count(const Json& v, const std::string& path) {
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            throw SchemaError(path, "expected non-negative integer");
        return v.get<std::size_t>();
    }

    static std::int64_t integer(const Json& v, const std::string& path) {
        if (!v.is_number_integer()) throw SchemaError(path, "expected integer");
        return v.get<std::int64_t>();
    }

    static const Json& array(const Json& v, const std::string& path) {
        if (!v.is_array()) throw SchemaError(path, "expected array");
        return v;
    }

    static std::string join(const std::string& path, const char* key) {
        return path.empty() ? std::string(key) : path + "." + key;
    }

    static std::string index(const std::string& path, std::size_t i) {
        return path + "[" + std::to_string(i) + "]";
    }
};

inline Access parse_access(const Json& v, const std::string& path) {
    auto s = JsonReader::string(v, path);
    if (s == "public") return Access::Public;
    if (s == "private") return Access::Private;
    throw SchemaError(path, "expected \"public\" or \"private\", got \"" + s + "\"");
}

inline RefMode parse_mode(const Json& v, const std::string& path) {
    auto s = JsonReader::string(v, path);
    if (s == "value") return RefMode::Value;
    if (s == "pointer") return RefMode::Pointer;
    if (s == "reference") return RefMode::Reference;
    throw SchemaError(path, "expected \"value\", \"pointer\" or \"reference\", got \"" + s + "\"");
}

inline TypeRef parse_typeref(const Json& v, const std::string& path) {
    using R = JsonReader;
    TypeRef t;
    t.target = R::string(R::field(v, path, "target"), R::join(path, "target"));
    if (t.target.empty()) throw SchemaError(R::join(path, "target"), "empty type name");
    if (const auto* e = R::optional_field(v, "external")) {
        if (!e->is_boolean()) throw SchemaError(R::join(path, "external"), "expected boolean");
        t.external = e->get<bool>();
    }
    if (const auto* m = R::optional_field(v, "mode")) t.mode = parse_mode(*m, R::join(path, "mode"));
    if (const auto* a = R::optional_field(v, "template_args")) {
        const auto apath = R::join(path, "template_args");
        R::array(*a, apath);
        for (std::size_t i = 0; i < a->size(); ++i) t.template_args.push_back(parse_typeref((*a)[i], R::index(apath, i)));
    }
    return t;
}

inline Json typeref_to_json(const TypeRef& t) {
    Json args = Json::array();
    for (const auto& a : t.template_args) args.push_back(typeref_to_json(a));
    return Json{{"target", t.target},
                {"external", t.external},
                {"mode", std::string(to_string(t.mode))},
                {"template_args", std::move(args)}};
}

inline void mark_external(TypeRef& t, const std::unordered_set<std::string>& class_ids) {
    t.external = class_ids.count(t.target) == 0;
    for (auto& a : t.template_args) mark_external(a, class_ids);
}

}  // namespace detail

/// Sorts packages and classes by id and package file lists; member order is
/// declaration order and stays untouched.
inline void canonicalize(CodeModel& m) {
    auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
    std::sort(m.packages.begin(), m.packages.end(), by_id);
    std::sort(m.classes.begin(), m.classes.end(), by_id);
    for (auto& p : m.packages) {
        std::sort(p.file_ids.begin(), p.file_ids.end());
        p.file_ids.erase(std::unique(p.file_ids.begin(), p.file_ids.end()), p.file_ids.end());
    }
}

/// Checks model invariants and recomputes the `external` flag of every type
/// reference against the declared classes. Throws ValidationError.
inline void validate(CodeModel& m) {
    std::unordered_set<std::string> ids;
    auto claim = [&](const std::string& id, const char* what) {
        if (id.empty()) throw ValidationError(std::string("empty ") + what + " id");
        if (!ids.insert(id).second) throw ValidationError("duplicate id '" + id + "'");
    };

    std::unordered_set<std::string> package_ids;
    for (const auto& p : m.packages) {
        claim(p.id, "package");
        if (p.name.empty()) throw ValidationError("package '" + p.id + "' has an empty name");
        package_ids.insert(p.id);
    }
    std::unordered_set<std::string> class_ids;
    for (const auto& c : m.classes) {
        claim(c.id, "class");
        class_ids.insert(c.id);
    }
    for (auto& c : m.classes) {
        if (package_ids.count(c.package_id) == 0)
            throw ValidationError("class '" + c.id + "' references unknown package '" + c.package_id + "'");
        if (c.line_count < 1) throw ValidationError("class '" + c.id + "' has line_count 0");
        std::set<std::string> field_names;
        for (auto& f : c.fields) {
            claim(f.id, "field");
            if (!field_names.insert(f.name).second)
                throw ValidationError("class '" + c.id + "' declares field '" + f.name + "' twice");
            detail::mark_external(f.type_ref, class_ids);
        }
        for (auto& mt : c.methods) {
            claim(mt.id, "method");
            for (auto& p : mt.params) detail::mark_external(p, class_ids);
        }
        for (auto& b : c.bases) detail::mark_external(b, class_ids);
    }
    if (m.repo_stats) {
        for (const auto& [file, st] : m.repo_stats->files) {
            if (st.commit_count < 1) throw ValidationError("repo_stats for '" + file + "' has commit_count 0");
            if (st.last_modified > m.reference_time)
                throw ValidationError("repo_stats for '" + file + "' is newer than reference_time");
        }
    }
}

/// Parses and validates a model document. Throws SchemaError (with the JSON
/// path) or ValidationError.
inline CodeModel load_model(std::string_view document) {
    using R = detail::JsonReader;
    Json doc;
    try {
        doc = Json::parse(document);
    } catch (const Json::parse_error& e) {
        throw SchemaError("", e.what());
    }
    if (!doc.is_object()) throw SchemaError("", "expected top-level object");

    CodeModel m;
    const auto& pkgs = R::array(R::field(doc, "", "packages"), "packages");
    for (std::size_t i = 0; i < pkgs.size(); ++i) {
        const auto path = R::index("packages", i);
        const auto& v = pkgs[i];
        PackageEntity p;
        p.id = R::string(R::field(v, path, "id"), R::join(path, "id"));
        p.name = R::string(R::field(v, path, "name"), R::join(path, "name"));
        if (const auto* f = R::optional_field(v, "file_ids")) {
            const auto fpath = R::join(path, "file_ids");
            R::array(*f, fpath);
            for (std::size_t k = 0; k < f->size(); ++k) p.file_ids.push_back(R::string((*f)[k], R::index(fpath, k)));
        }
        m.packages.push_back(std::move(p));
    }

    const auto& classes = R::array(R::field(doc, "", "classes"), "classes");
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const auto path = R::index("classes", i);
        const auto& v = classes[i];
        ClassEntity c;
        c.id = R::string(R::field(v, path, "id"), R::join(path, "id"));
        c.name = R::string(R::field(v, path, "name"), R::join(path, "name"));
        c.package_id = R::string(R::field(v, path, "package_id"), R::join(path, "package_id"));
        if (const auto* f = R::optional_field(v, "file_id")) c.file_id = R::string(*f, R::join(path, "file_id"));
        c.line_count = R::count(R::field(v, path, "line_count"), R::join(path, "line_count"));
        if (const auto* b = R::optional_field(v, "bases")) {
            const auto bpath = R::join(path, "bases");
            R::array(*b, bpath);
            for (std::size_t k = 0; k < b->size(); ++k) c.bases.push_back(detail::parse_typeref((*b)[k], R::index(bpath, k)));
        }
        if (const auto* fs = R::optional_field(v, "fields")) {
            const auto fpath = R::join(path, "fields");
            R::array(*fs, fpath);
            for (std::size_t k = 0; k < fs->size(); ++k) {
                const auto p = R::index(fpath, k);
                const auto& fv = (*fs)[k];
                FieldEntity f;
                f.id = R::string(R::field(fv, p, "id"), R::join(p, "id"));
                f.name = R::string(R::field(fv, p, "name"), R::join(p, "name"));
                f.type_ref = detail::parse_typeref(R::field(fv, p, "type_ref"), R::join(p, "type_ref"));
                f.access = detail::parse_access(R::field(fv, p, "access"), R::join(p, "access"));
                c.fields.push_back(std::move(f));
            }
        }
        if (const auto* ms = R::optional_field(v, "methods")) {
            const auto mpath = R::join(path, "methods");
            R::array(*ms, mpath);
            for (std::size_t k = 0; k < ms->size(); ++k) {
                const auto p = R::index(mpath, k);
                const auto& mv = (*ms)[k];
                MethodEntity mt;
                mt.id = R::string(R::field(mv, p, "id"), R::join(p, "id"));
                mt.name = R::string(R::field(mv, p, "name"), R::join(p, "name"));
                mt.access = detail::parse_access(R::field(mv, p, "access"), R::join(p, "access"));
                if (const auto* ps = R::optional_field(mv, "params")) {
                    const auto ppath = R::join(p, "params");
                    R::array(*ps, ppath);
                    for (std::size_t q = 0; q < ps->size(); ++q)
                        mt.params.push_back(detail::parse_typeref((*ps)[q], R::index(ppath, q)));
                }
                mt.body_line_count = R::count(R::field(mv, p, "body_line_count"), R::join(p, "body_line_count"));
                mt.call_site_count = R::count(R::field(mv, p, "call_site_count"), R::join(p, "call_site_count"));
                c.methods.push_back(std::move(mt));
            }
        }
        m.classes.push_back(std::move(c));
    }

    if (const auto* rt = R::optional_field(doc, "reference_time")) m.reference_time = R::integer(*rt, "reference_time");

    if (const auto* rs = R::optional_field(doc, "repo_stats")) {
        if (!rs->is_object()) throw SchemaError("repo_stats", "expected object");
        RepoStats stats;
        for (const auto& [file, v] : rs->items()) {
            const auto path = "repo_stats." + file;
            FileStats st;
            st.commit_count = R::count(R::field(v, path, "commit_count"), path + ".commit_count");
            st.last_modified = R::integer(R::field(v, path, "last_modified"), path + ".last_modified");
            const auto& names = R::array(R::field(v, path, "contributors"), path + ".contributors");
            for (std::size_t k = 0; k < names.size(); ++k)
                st.contributors.insert(R::string(names[k], R::index(path + ".contributors", k)));
            stats.files.emplace(file, std::move(st));
        }
        m.repo_stats = std::move(stats);
    }

    validate(m);
    canonicalize(m);
    return m;
}

inline Json model_to_json(CodeModel m) {
    canonicalize(m);
    Json pkgs = Json::array();
    for (const auto& p : m.packages) pkgs.push_back(Json{{"id", p.id}, {"name", p.name}, {"file_ids", p.file_ids}});

    Json classes = Json::array();
    for (const auto& c : m.classes) {
        Json bases = Json::array();
        for (const auto& b : c.bases) bases.push_back(detail::typeref_to_json(b));
        Json fields = Json::array();
        for (const auto& f : c.fields)
            fields.push_back(Json{{"id", f.id},
                                  {"name", f.name},
                                  {"type_ref", detail::typeref_to_json(f.type_ref)},
                                  {"access", std::string(to_string(f.access))}});
        Json methods = Json::array();
        for (const auto& mt : c.methods) {
            Json params = Json::array();
            for (const auto& p : mt.params) params.push_back(detail::typeref_to_json(p));
            methods.push_back(Json{{"id", mt.id},
                                   {"name", mt.name},
                                   {"access", std::string(to_string(mt.access))},
                                   {"params", std::move(params)},
                                   {"body_line_count", mt.body_line_count},
                                   {"call_site_count", mt.call_site_count}});
        }
        classes.push_back(Json{{"id", c.id},
                               {"name", c.name},
                               {"package_id", c.package_id},
                               {"file_id", c.file_id},
                               {"bases", std::move(bases)},
                               {"fields", std::move(fields)},
                               {"methods", std::move(methods)},
                               {"line_count", c.line_count}});
    }

    Json stats = nullptr;
    if (m.repo_stats) {
        stats = Json::object();
        for (const auto& [file, st] : m.repo_stats->files)
            stats[file] = Json{{"commit_count", st.commit_count},
                               {"contributors", st.contributors},
                               {"last_modified", st.last_modified}};
    }
    return Json{{"packages", std::move(pkgs)},
                {"classes", std::move(classes)},
                {"repo_stats", std::move(stats)},
                {"reference_time", m.reference_time}};
}

/// Canonical serialization: sorted keys, entities sorted by id, two-space
/// indent, trailing newline. Equal models give identical bytes.
inline std::string save_model(const CodeModel& m) { return model_to_json(m).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Repository history

struct IngestResult {
    RepoStats stats;
    std::vector<std::string> warnings;
};

/// Reads a commit log made of `commit <hash> <author> <unix-ts>` headers, each
/// followed by one touched path per line. A path line may carry a git numstat
/// prefix (`<added>\t<deleted>\t<path>`). Paths missing from `file_map` are
/// skipped with a warning. Throws LineError on malformed input.
inline IngestResult ingest_repo_stats(std::string_view log, const std::map<std::string, std::string>& file_map) {
    IngestResult out;
    std::istringstream in{std::string(log)};
    std::string line;
    std::size_t line_no = 0;
    bool in_commit = false;
    std::string author;
    std::int64_t timestamp = 0;
    std::set<std::string> touched;  // file ids already counted for this commit

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;

        if (line.compare(first, 7, "commit ") == 0) {
            std::istringstream words(line.substr(first + 7));
            std::vector<std::string> parts;
            for (std::string w; words >> w;) parts.push_back(w);
            if (parts.size() < 3) throw LineError(line_no, "expected 'commit <hash> <author> <unix-ts>'");
            const auto& ts = parts.back();
            std::size_t used = 0;
            try {
                timestamp = std::stoll(ts, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != ts.size() || ts.empty()) throw LineError(line_no, "bad timestamp '" + ts + "'");
            author = parts[1];
            for (std::size_t i = 2; i + 1 < parts.size(); ++i) author += " " + parts[i];
            in_commit = true;
            touched.clear();
            continue;
        }

        if (!in_commit) throw LineError(line_no, "path before any commit header");
        std::string path = line.substr(first);
        // numstat prefix: two tab-separated counts ('-' for binary files)
        auto t1 = path.find('\t');
        if (t1 != std::string::npos) {
            auto t2 = path.find('\t', t1 + 1);
            auto numeric = [](std::string_view s) {
                return !s.empty() && (s == "-" || std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; }));
            };
            if (t2 == std::string::npos || !numeric(std::string_view(path).substr(0, t1)) ||
                !numeric(std::string_view(path).substr(t1 + 1, t2 - t1 - 1)))
                throw LineError(line_no, "malformed numstat line");
            path = path.substr(t2 + 1);
        }
        while (!path.empty() && (path.back() == ' ' || path.back() == '\t')) path.pop_back();

        auto it = file_map.find(path);
        if (it == file_map.end()) {
            out.warnings.push_back("line " + std::to_string(line_no) + ": unmapped file '" + path + "' ignored");
            continue;
        }
        if (!touched.insert(it->second).second) continue;
        auto& st = out.stats.files[it->second];
        if (st.commit_count == 0 || timestamp > st.last_modified) st.last_modified = timestamp;
        ++st.commit_count;
        st.contributors.insert(author);
    }
    return out;
}

}  // namespace arcades
