#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "arcades/code_model.hpp"

namespace arcades {

/// Dependency semantics between two classes, referrer -> referent.
enum class DepKind {
    IsA,          // referent is a base of referrer
    PartOf,       // referrer holds a referent by value
    Uses,         // referrer holds or receives a referent by pointer/reference, or takes it as a parameter
    TemplateArg,  // referent appears as a template argument in a type used by referrer
};

inline constexpr DepKind kAllDepKinds[] = {DepKind::IsA, DepKind::PartOf, DepKind::Uses, DepKind::TemplateArg};

inline std::string_view to_string(DepKind k) {
    switch (k) {
        case DepKind::IsA: return "isa";
        case DepKind::PartOf: return "partof";
        case DepKind::Uses: return "uses";
        case DepKind::TemplateArg: return "template";
    }
    return "isa";
}

inline std::optional<DepKind> dep_kind_from_string(std::string_view s) {
    for (auto k : kAllDepKinds)
        if (to_string(k) == s) return k;
    return std::nullopt;
}

struct DepEdge {
    std::string referrer;
    std::string referent;
    DepKind kind = DepKind::IsA;
    std::size_t multiplicity = 1;

    bool operator==(const DepEdge&) const = default;
};

struct DependencyGraph {
    std::vector<std::string> nodes;  // sorted class ids
    std::vector<DepEdge> edges;      // sorted by (referrer, referent, kind)

    bool operator==(const DependencyGraph&) const = default;
};

/// Derives typed edges from bases, fields, and method parameters. References
/// to external types and self references are dropped.
inline DependencyGraph build_graph(const CodeModel& m) {
    DependencyGraph g;
    std::unordered_set<std::string> ids;
    for (const auto& c : m.classes) {
        g.nodes.push_back(c.id);
        ids.insert(c.id);
    }
    std::sort(g.nodes.begin(), g.nodes.end());

    std::map<std::tuple<std::string, std::string, DepKind>, std::size_t> counts;
    auto add = [&](const std::string& from, const std::string& to, DepKind k) {
        if (from == to || ids.count(to) == 0) return;
        ++counts[{from, to, k}];
    };
    auto template_args = [&](const std::string& from, const TypeRef& t, auto& self) -> void {
        for (const auto& a : t.template_args) {
            if (!a.external) add(from, a.target, DepKind::TemplateArg);
            self(from, a, self);
        }
    };

    for (const auto& c : m.classes) {
        for (const auto& b : c.bases) {
            if (!b.external) add(c.id, b.target, DepKind::IsA);
            template_args(c.id, b, template_args);
        }
        for (const auto& f : c.fields) {
            const auto& t = f.type_ref;
            if (!t.external) add(c.id, t.target, t.mode == RefMode::Value ? DepKind::PartOf : DepKind::Uses);
            template_args(c.id, t, template_args);
        }
        for (const auto& mt : c.methods) {
            for (const auto& p : mt.params) {
                if (!p.external) add(c.id, p.target, DepKind::Uses);
                template_args(c.id, p, template_args);
            }
        }
    }
    for (const auto& [key, n] : counts) {
        const auto& [from, to, kind] = key;
        g.edges.push_back({from, to, kind, n});
    }
    return g;
}

/// IsA cycles: each returned vector lists the classes of one strongly
/// connected component of the inheritance subgraph that has more than one
/// member. The grammar cannot forbid them, so callers report them as warnings.
inline std::vector<std::vector<std::string>> isa_cycles(const DependencyGraph& g) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& e : g.edges)
        if (e.kind == DepKind::IsA) adj[e.referrer].push_back(e.referent);

    // Tarjan, iterative over sorted node ids
    std::map<std::string, std::size_t> index, low;
    std::set<std::string> on_stack;
    std::vector<std::string> stack;
    std::vector<std::vector<std::string>> out;
    std::size_t counter = 0;

    for (const auto& root : g.nodes) {
        if (index.count(root)) continue;
        std::vector<std::pair<std::string, std::size_t>> work{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack.insert(root);
        while (!work.empty()) {
            auto& [v, next_child] = work.back();
            const auto& succ = adj[v];
            if (next_child < succ.size()) {
                const auto w = succ[next_child++];
                if (!index.count(w)) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack.insert(w);
                    work.emplace_back(w, 0);
                } else if (on_stack.count(w)) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const std::string node = v;
            work.pop_back();
            if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[node]);
            if (low[node] == index[node]) {
                std::vector<std::string> comp;
                std::string w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack.erase(w);
                    comp.push_back(w);
                } while (w != node);
                if (comp.size() > 1) {
                    std::sort(comp.begin(), comp.end());
                    out.push_back(std::move(comp));
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct DegreeStats {
    std::size_t in_degree = 0;
    std::size_t out_degree = 0;
    std::size_t in_weight = 0;   // multiplicity sums
    std::size_t out_weight = 0;

    bool operator==(const DegreeStats&) const = default;
};

inline std::map<std::string, DegreeStats> degree_stats(const DependencyGraph& g) {
    std::map<std::string, DegreeStats> out;
    for (const auto& n : g.nodes) out[n];
    for (const auto& e : g.edges) {
        auto& from = out[e.referrer];
        auto& to = out[e.referent];
        ++from.out_degree;
        from.out_weight += e.multiplicity;
        ++to.in_degree;
        to.in_weight += e.multiplicity;
    }
    return out;
}

struct PairCoupling {
    std::string first;   // lexicographically smaller id
    std::string second;
    std::size_t multiplicity = 0;
    bool bidirectional = false;

    bool operator==(const PairCoupling&) const = default;
};

/// Combined multiplicity (all kinds, both directions) for every class pair
/// joined by at least one edge, ordered by (first, second).
inline std::vector<PairCoupling> pair_coupling(const DependencyGraph& g) {
    struct Acc {
        std::size_t total = 0;
        bool forward = false;   // first -> second
        bool backward = false;  // second -> first
    };
    std::map<std::pair<std::string, std::string>, Acc> acc;
    for (const auto& e : g.edges) {
        const bool forward = e.referrer < e.referent;
        auto& a = acc[forward ? std::pair{e.referrer, e.referent} : std::pair{e.referent, e.referrer}];
        a.total += e.multiplicity;
        (forward ? a.forward : a.backward) = true;
    }
    std::vector<PairCoupling> out;
    for (const auto& [key, a] : acc) out.push_back({key.first, key.second, a.total, a.forward && a.backward});
    return out;
}

inline Json graph_to_json(const DependencyGraph& g) {
    Json edges = Json::array();
    for (const auto& e : g.edges)
        edges.push_back(Json{{"referrer", e.referrer},
                             {"referent", e.referent},
                             {"kind", std::string(to_string(e.kind))},
                             {"multiplicity", e.multiplicity}});
    return Json{{"nodes", g.nodes}, {"edges", std::move(edges)}};
}

/// Graphviz text, one edge per line labelled with its kind.
inline std::string graph_to_dot(const DependencyGraph& g) {
    auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\') q += '\\';
            q += c;
        }
        return q + "\"";
    };
    std::string out = "digraph deps {\n";
    for (const auto& n : g.nodes) out += "  " + quote(n) + ";\n";
    for (const auto& e : g.edges) {
        out += "  " + quote(e.referrer) + " -> " + quote(e.referent) + " [label=\"" + std::string(to_string(e.kind));
        if (e.multiplicity > 1) out += " x" + std::to_string(e.multiplicity);
        out += "\"];\n";
    }
    return out + "}\n";
}

}  // namespace arcades
