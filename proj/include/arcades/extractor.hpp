#pragma once

// Front end for MiniOO, a small object-oriented source language:
//
//   unit      := (namespace | class)*
//   namespace := "namespace" id "{" unit "}"
//   class     := "class" id (":" base ("," base)*)? "{" section* "}" ";"
//   base      := "public"? qualified-id
//   section   := ("public:" | "private:")? member*
//   member    := field | method
//   field     := typeref id ";"
//   method    := typeref id "(" params? ")" (";" | block)
//   params    := typeref id? ("," typeref id?)*
//   typeref   := qualified-id ("<" typeref ("," typeref)* ">")? ("*" | "&")?
//
// Method bodies are brace-balanced token streams; only their line span and
// call sites (`identifier(`) are kept.

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "arcades/code_model.hpp"

namespace arcades {

struct SourceUnit {
    std::string file;
    std::string text;
};

enum class Severity { Error, Warning };

struct ParseDiagnostic {
    std::string file;
    std::size_t line = 1;
    std::size_t column = 1;
    std::string message;
    Severity severity = Severity::Error;

    std::string to_string() const {
        return file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " +
               (severity == Severity::Error ? "error: " : "warning: ") + message;
    }
};

/// Type use as written, before name resolution.
struct RawTypeRef {
    std::string name;  // possibly qualified, e.g. "util::List"
    RefMode mode = RefMode::Value;
    std::vector<RawTypeRef> args;
};

struct RawField {
    std::string name;
    RawTypeRef type;
    Access access = Access::Private;
};

struct RawMethod {
    std::string name;
    Access access = Access::Private;
    std::vector<RawTypeRef> params;
    std::size_t body_line_count = 0;
    std::size_t call_site_count = 0;
};

struct RawClass {
    std::vector<std::string> scope;  // enclosing namespaces, outermost first
    std::string name;
    std::vector<RawTypeRef> bases;
    std::vector<RawField> fields;
    std::vector<RawMethod> methods;
    std::size_t line_count = 1;
    std::size_t line = 1;
};

/// Classes declared by one source file.
struct UnitFragment {
    std::string file;
    std::vector<RawClass> classes;
};

struct ParseResult {
    UnitFragment fragment;
    std::vector<ParseDiagnostic> diagnostics;
};

namespace detail {

struct Token {
    enum Kind { Ident, Punct, Number, Literal, End } kind = End;
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;

    bool is(std::string_view s) const { return (kind == Punct || kind == Ident) && text == s; }
};

inline bool is_ident_start(unsigned char c) { return c == '_' || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_ident_char(unsigned char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

inline std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0, line = 1, col = 1;
    auto bump = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        const unsigned char c = static_cast<unsigned char>(src[i]);
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
            bump(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') bump(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
            bump(2);
            while (i < src.size() && !(src[i] == '*' && i + 1 < src.size() && src[i + 1] == '/')) bump(1);
            bump(2);
            continue;
        }
        Token t;
        t.line = line;
        t.column = col;
        const std::size_t start = i;
        if (is_ident_start(c)) {
            t.kind = Token::Ident;
            while (i < src.size() && is_ident_char(static_cast<unsigned char>(src[i]))) bump(1);
        } else if (c >= '0' && c <= '9') {
            t.kind = Token::Number;
            while (i < src.size() && (is_ident_char(static_cast<unsigned char>(src[i])) || src[i] == '.')) bump(1);
        } else if (c == '"' || c == '\'') {
            t.kind = Token::Literal;
            bump(1);
            while (i < src.size() && src[i] != static_cast<char>(c) && src[i] != '\n') bump(src[i] == '\\' ? 2 : 1);
            if (i < src.size() && src[i] == static_cast<char>(c)) bump(1);
        } else if (c == ':' && i + 1 < src.size() && src[i + 1] == ':') {
            t.kind = Token::Punct;
            bump(2);
        } else {
            t.kind = Token::Punct;
            bump(1);
        }
        t.text = std::string(src.substr(start, i - start));
        out.push_back(std::move(t));
    }
    Token end;
    end.kind = Token::End;
    end.line = line;
    end.column = col;
    out.push_back(end);
    return out;
}

inline bool is_reserved(std::string_view s) {
    return s == "namespace" || s == "class" || s == "public" || s == "private";
}

inline bool is_call_keyword(std::string_view s) {
    return s == "if" || s == "while" || s == "for" || s == "switch" || s == "return";
}

struct SyntaxError {
    std::size_t pos;
    std::string message;
};

class Parser {
public:
    Parser(std::string file, std::string_view text) : toks_(tokenize(text)) { result_.fragment.file = std::move(file); }

    ParseResult run() {
        std::vector<std::string> scope;
        parse_unit(scope, 0);
        return std::move(result_);
    }

private:
    static constexpr std::size_t kMaxDepth = 200;

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    ParseResult result_;

    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    const Token& next() {
        const Token& t = peek();
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }
    bool at_end() const { return peek().kind == Token::End; }

    [[noreturn]] void fail(std::string msg) const { throw SyntaxError{pos_, std::move(msg)}; }

    void expect(std::string_view s) {
        if (!peek().is(s)) fail("expected '" + std::string(s) + "'" + found());
        next();
    }

    std::string found() const {
        return at_end() ? " before end of input" : ", found '" + peek().text + "'";
    }

    std::string identifier(const char* what) {
        const Token& t = peek();
        if (t.kind != Token::Ident || is_reserved(t.text)) fail(std::string("expected ") + what + found());
        return next().text;
    }

    void diagnose(std::size_t at, std::string msg, Severity sev = Severity::Error) {
        const Token& t = toks_[std::min(at, toks_.size() - 1)];
        result_.diagnostics.push_back({result_.fragment.file, t.line, t.column, std::move(msg), sev});
    }

    // Skips to the end of the broken declaration starting at `start`: the
    // brace that balances it (plus a trailing ';'), the next 'class' or
    // 'namespace' keyword, or a '}' closing the enclosing scope.
    void recover(std::size_t start) {
        std::size_t depth = 0;
        for (std::size_t k = start; k < pos_; ++k) {
            if (toks_[k].is("{")) ++depth;
            else if (toks_[k].is("}") && depth > 0) --depth;
        }
        while (!at_end()) {
            const Token& t = peek();
            if (pos_ > start && (t.is("class") || t.is("namespace"))) return;
            if (t.is("{")) {
                ++depth;
            } else if (t.is("}")) {
                if (depth == 0) {
                    if (pos_ > start) return;
                } else if (--depth == 0) {
                    next();
                    if (peek().is(";")) next();
                    return;
                }
            } else if (t.is(";") && depth == 0) {
                next();
                return;
            }
            next();
        }
    }

    void parse_unit(std::vector<std::string>& scope, std::size_t depth) {
        while (!at_end()) {
            const Token& t = peek();
            if (t.is("}")) {
                if (depth > 0) return;
                diagnose(pos_, "unbalanced '}'");
                next();
                continue;
            }
            const std::size_t start = pos_;
            try {
                if (t.is("namespace")) {
                    next();
                    const std::size_t name_pos = pos_;
                    auto name = identifier("namespace name");
                    expect("{");
                    if (depth + 1 > kMaxDepth) {
                        pos_ = name_pos;
                        fail("namespaces nested too deeply");
                    }
                    scope.push_back(std::move(name));
                    parse_unit(scope, depth + 1);
                    scope.pop_back();
                    if (at_end()) {
                        diagnose(pos_, "unterminated namespace");
                        return;
                    }
                    next();  // '}'
                } else if (t.is("class")) {
                    parse_class(scope);
                } else {
                    fail("expected 'namespace' or 'class'" + found());
                }
            } catch (const SyntaxError& e) {
                diagnose(e.pos, e.message);
                recover(start);
            }
        }
    }

    RawTypeRef typeref(std::size_t depth = 0) {
        if (depth > kMaxDepth) fail("type nested too deeply");
        RawTypeRef t;
        t.name = identifier("type name");
        while (peek().is("::")) {
            next();
            t.name += "::" + identifier("identifier after '::'");
        }
        if (peek().is("<")) {
            next();
            t.args.push_back(typeref(depth + 1));
            while (peek().is(",")) {
                next();
                t.args.push_back(typeref(depth + 1));
            }
            expect(">");
        }
        if (peek().is("*")) {
            next();
            t.mode = RefMode::Pointer;
        } else if (peek().is("&")) {
            next();
            t.mode = RefMode::Reference;
        }
        return t;
    }

    void parse_class(const std::vector<std::string>& scope) {
        RawClass c;
        c.scope = scope;
        c.line = peek().line;
        expect("class");
        c.name = identifier("class name");
        if (peek().is(":")) {
            next();
            do {
                if (peek().is("public")) next();
                RawTypeRef b;
                b.name = identifier("base class name");
                while (peek().is("::")) {
                    next();
                    b.name += "::" + identifier("identifier after '::'");
                }
                c.bases.push_back(std::move(b));
            } while (peek().is(",") && (next(), true));
        }
        expect("{");
        Access access = Access::Private;
        while (!peek().is("}")) {
            if (at_end()) fail("unterminated class body");
            if ((peek().is("public") || peek().is("private")) && peek(1).is(":")) {
                access = next().text == "public" ? Access::Public : Access::Private;
                next();
                continue;
            }
            parse_member(c, access);
        }
        const std::size_t end_line = next().line;  // '}'
        expect(";");
        c.line_count = end_line - c.line + 1;
        result_.fragment.classes.push_back(std::move(c));
    }

    void parse_member(RawClass& c, Access access) {
        const std::size_t member_pos = pos_;
        RawTypeRef type = typeref();
        std::string name = identifier("member name");
        if (peek().is(";")) {
            next();
            const bool dup = std::any_of(c.fields.begin(), c.fields.end(), [&](const RawField& f) { return f.name == name; });
            if (dup) {
                diagnose(member_pos, "duplicate field '" + name + "' in class '" + c.name + "'");
                return;
            }
            c.fields.push_back({std::move(name), std::move(type), access});
            return;
        }
        if (!peek().is("(")) fail("expected ';' or '('" + found());
        next();
        RawMethod m;
        m.name = std::move(name);
        m.access = access;
        if (!peek().is(")")) {
            for (;;) {
                m.params.push_back(typeref());
                if (peek().kind == Token::Ident && !is_reserved(peek().text)) next();
                if (!peek().is(",")) break;
                next();
            }
        }
        expect(")");
        if (peek().is(";")) {
            next();
        } else if (peek().is("{")) {
            body(m);
        } else {
            fail("expected ';' or method body" + found());
        }
        c.methods.push_back(std::move(m));
    }

    void body(RawMethod& m) {
        const std::size_t open_line = next().line;  // '{'
        std::size_t depth = 1;
        while (depth > 0) {
            if (at_end()) fail("unterminated method body");
            const Token& t = next();
            if (t.is("{")) {
                ++depth;
            } else if (t.is("}")) {
                if (--depth == 0) m.body_line_count = t.line - open_line;
            } else if (t.kind == Token::Ident && peek().is("(") && !is_call_keyword(t.text)) {
                ++m.call_site_count;
            }
        }
    }
};

inline std::string join_scope(const std::vector<std::string>& scope, std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += "::";
        out += scope[i];
    }
    return out;
}

}  // namespace detail

/// Parses one MiniOO file. Never throws on bad input: syntax errors become
/// diagnostics and parsing resumes at the next top-level declaration.
inline ParseResult parse_unit(const SourceUnit& u) { return detail::Parser(u.file, u.text).run(); }

inline std::string package_id_for(std::string_view name) { return "pkg:" + std::string(name); }
inline std::string class_id_for(std::string_view qualified) { return "cls:" + std::string(qualified); }

/// Merges per-file fragments into one model, resolving type names from the
/// innermost enclosing namespace outwards. Names that match no declared class
/// become external references. Throws ValidationError on a duplicate fully
/// qualified class name.
inline CodeModel link_units(std::vector<UnitFragment> fragments) {
    std::stable_sort(fragments.begin(), fragments.end(), [](const auto& a, const auto& b) { return a.file < b.file; });

    std::unordered_map<std::string, std::string> declared_in;  // qualified name -> file
    for (const auto& f : fragments) {
        for (const auto& c : f.classes) {
            auto qn = c.scope.empty() ? c.name : detail::join_scope(c.scope, c.scope.size()) + "::" + c.name;
            auto [it, fresh] = declared_in.emplace(qn, f.file);
            if (!fresh)
                throw ValidationError("class '" + qn + "' declared in both '" + it->second + "' and '" + f.file + "'");
        }
    }

    auto resolve = [&](const std::vector<std::string>& scope, const RawTypeRef& raw, auto& self) -> TypeRef {
        TypeRef t;
        t.mode = raw.mode;
        t.external = true;
        t.target = raw.name;
        for (std::size_t k = scope.size() + 1; k-- > 0;) {
            auto candidate = k == 0 ? raw.name : detail::join_scope(scope, k) + "::" + raw.name;
            if (declared_in.count(candidate)) {
                t.target = class_id_for(candidate);
                t.external = false;
                break;
            }
        }
        for (const auto& a : raw.args) t.template_args.push_back(self(scope, a, self));
        return t;
    };

    CodeModel m;
    std::map<std::string, PackageEntity> packages;
    for (const auto& f : fragments) {
        for (const auto& rc : f.classes) {
            const auto pkg_name = rc.scope.empty() ? std::string(CodeModel::kGlobalPackageName)
                                                   : detail::join_scope(rc.scope, rc.scope.size());
            auto& pkg = packages[pkg_name];
            pkg.id = package_id_for(pkg_name);
            pkg.name = pkg_name;
            pkg.file_ids.push_back(f.file);

            const auto qn = rc.scope.empty() ? rc.name : pkg_name + "::" + rc.name;
            ClassEntity c;
            c.id = class_id_for(qn);
            c.name = rc.name;
            c.package_id = pkg.id;
            c.file_id = f.file;
            c.line_count = rc.line_count;
            for (const auto& b : rc.bases) c.bases.push_back(resolve(rc.scope, b, resolve));
            for (const auto& rf : rc.fields) {
                c.fields.push_back({"fld:" + qn + "::" + rf.name, rf.name, resolve(rc.scope, rf.type, resolve), rf.access});
            }
            for (std::size_t i = 0; i < rc.methods.size(); ++i) {
                const auto& rm = rc.methods[i];
                MethodEntity mt;
                mt.id = "mth:" + qn + "::" + rm.name + "#" + std::to_string(i);
                mt.name = rm.name;
                mt.access = rm.access;
                for (const auto& p : rm.params) mt.params.push_back(resolve(rc.scope, p, resolve));
                mt.body_line_count = rm.body_line_count;
                mt.call_site_count = rm.call_site_count;
                c.methods.push_back(std::move(mt));
            }
            m.classes.push_back(std::move(c));
        }
    }
    for (auto& [_, p] : packages) m.packages.push_back(std::move(p));
    validate(m);
    canonicalize(m);
    return m;
}

struct ExtractResult {
    CodeModel model;
    std::vector<ParseDiagnostic> diagnostics;
};

/// parse_unit over every source followed by link_units. The result does not
/// depend on the order of `units`.
inline ExtractResult extract(const std::vector<SourceUnit>& units) {
    ExtractResult out;
    std::vector<UnitFragment> fragments;
    for (const auto& u : units) {
        auto r = parse_unit(u);
        fragments.push_back(std::move(r.fragment));
        out.diagnostics.insert(out.diagnostics.end(), r.diagnostics.begin(), r.diagnostics.end());
    }
    std::sort(out.diagnostics.begin(), out.diagnostics.end(), [](const auto& a, const auto& b) {
        return std::tie(a.file, a.line, a.column, a.message) < std::tie(b.file, b.line, b.column, b.message);
    });
    out.model = link_units(std::move(fragments));
    return out;
}

}  // namespace arcades
