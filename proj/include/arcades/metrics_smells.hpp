#pragma once

// Fine- and coarse-grained metrics, the smell predicate registry, and the
// mapping from detected smells to visual overrides.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "arcades/code_model.hpp"
#include "arcades/depgraph.hpp"
#include "arcades/grouping.hpp"

namespace arcades {

using Rgba = std::array<double, 4>;
using Vec3 = std::array<double, 3>;

struct MethodMetrics {
    std::string class_id;
    std::size_t size_lines = 0;
    std::size_t formal_args = 0;
    std::size_t call_sites = 0;

    bool operator==(const MethodMetrics&) const = default;
};

struct ClassMetrics {
    std::size_t field_count = 0;
    std::size_t method_count = 0;
    std::size_t member_count = 0;  // fields + methods
    std::size_t public_methods = 0;
    std::size_t private_methods = 0;
    std::size_t inheritors = 0;   // classes deriving from this one
    std::size_t components = 0;   // classes embedding this one by value
    std::size_t deployments = 0;  // classes using this one through pointers, references or parameters
    std::size_t parts_count = 0;  // classes this one embeds by value
    std::size_t line_count = 0;
    std::size_t max_formal_args = 0;

    bool operator==(const ClassMetrics&) const = default;
};

struct GroupMetrics {
    std::string label;
    std::size_t class_count = 0;
    std::size_t loc = 0;
    std::size_t total_commits = 0;
    std::size_t contributor_count = 0;
    double summative_age_days = 0.0;

    bool operator==(const GroupMetrics&) const = default;
};

struct MetricsTable {
    std::map<std::string, MethodMetrics> methods;
    std::map<std::string, ClassMetrics> classes;
    std::map<std::string, GroupMetrics> groups;      // by group id
    std::map<std::string, std::string> class_group;  // class id -> group id

    bool operator==(const MetricsTable&) const = default;
};

inline MetricsTable compute_metrics(const CodeModel& m, const DependencyGraph& g, const Grouping& grp) {
    MetricsTable t;
    for (const auto& c : m.classes) {
        auto& cm = t.classes[c.id];
        cm.field_count = c.fields.size();
        cm.method_count = c.methods.size();
        cm.member_count = cm.field_count + cm.method_count;
        cm.line_count = c.line_count;
        for (const auto& mt : c.methods) {
            (mt.access == Access::Public ? cm.public_methods : cm.private_methods)++;
            cm.max_formal_args = std::max(cm.max_formal_args, mt.params.size());
            t.methods[mt.id] = {c.id, mt.body_line_count, mt.params.size(), mt.call_site_count};
        }
    }
    for (const auto& e : g.edges) {
        auto to = t.classes.find(e.referent);
        auto from = t.classes.find(e.referrer);
        if (to == t.classes.end() || from == t.classes.end()) continue;
        switch (e.kind) {
            case DepKind::IsA: ++to->second.inheritors; break;
            case DepKind::PartOf:
                ++to->second.components;
                ++from->second.parts_count;
                break;
            case DepKind::Uses: ++to->second.deployments; break;
            case DepKind::TemplateArg: break;
        }
    }

    std::map<std::string, const ClassEntity*> by_id;
    for (const auto& c : m.classes) by_id.emplace(c.id, &c);
    for (const auto& group : grp.groups) {
        auto& gm = t.groups[group.id];
        gm.label = group.label;
        std::set<std::string> files;
        for (const auto& id : group.members) {
            t.class_group[id] = group.id;
            auto it = by_id.find(id);
            if (it == by_id.end()) continue;
            ++gm.class_count;
            gm.loc += it->second->line_count;
            if (!it->second->file_id.empty()) files.insert(it->second->file_id);
        }
        if (!m.repo_stats) continue;
        std::set<std::string> people;
        for (const auto& f : files) {
            auto st = m.repo_stats->files.find(f);
            if (st == m.repo_stats->files.end()) continue;
            gm.total_commits += st->second.commit_count;
            people.insert(st->second.contributors.begin(), st->second.contributors.end());
            gm.summative_age_days += static_cast<double>(m.reference_time - st->second.last_modified) / 86400.0;
        }
        gm.contributor_count = people.size();
    }
    return t;
}

inline Json metrics_to_json(const MetricsTable& t) {
    Json methods = Json::object(), classes = Json::object(), groups = Json::object();
    for (const auto& [id, mm] : t.methods)
        methods[id] = Json{{"class_id", mm.class_id},
                           {"size_lines", mm.size_lines},
                           {"formal_args", mm.formal_args},
                           {"call_sites", mm.call_sites}};
    for (const auto& [id, c] : t.classes)
        classes[id] = Json{{"field_count", c.field_count},         {"method_count", c.method_count},
                           {"member_count", c.member_count},       {"public_methods", c.public_methods},
                           {"private_methods", c.private_methods}, {"inheritors", c.inheritors},
                           {"components", c.components},           {"deployments", c.deployments},
                           {"parts_count", c.parts_count},         {"line_count", c.line_count},
                           {"max_formal_args", c.max_formal_args}, {"group", t.class_group.count(id) ? t.class_group.at(id) : ""}};
    for (const auto& [id, gm] : t.groups)
        groups[id] = Json{{"label", gm.label},
                          {"class_count", gm.class_count},
                          {"loc", gm.loc},
                          {"total_commits", gm.total_commits},
                          {"contributor_count", gm.contributor_count},
                          {"summative_age_days", gm.summative_age_days}};
    return Json{{"methods", std::move(methods)}, {"classes", std::move(classes)}, {"groups", std::move(groups)}};
}

// ---------------------------------------------------------------------------
// Smells

enum class SubjectKind { Class, Method, ClassPair, GroupPair };

inline std::string_view to_string(SubjectKind k) {
    switch (k) {
        case SubjectKind::Class: return "class";
        case SubjectKind::Method: return "method";
        case SubjectKind::ClassPair: return "class_pair";
        case SubjectKind::GroupPair: return "group_pair";
    }
    return "class";
}

/// What a smell is about. For Method subjects `primary` is the owning class
/// and `secondary` the method; pair subjects hold both ends in id order.
struct SmellSubject {
    SubjectKind kind = SubjectKind::Class;
    std::string primary;
    std::string secondary;

    bool operator==(const SmellSubject&) const = default;
};

struct SmellRecord {
    std::string id;
    std::string predicate;
    SmellSubject subject;
    double severity = 0.0;
    std::map<std::string, double> evidence;

    bool operator==(const SmellRecord&) const = default;
};

/// `value` at the threshold maps to 0.5, at 1.5x the threshold to 1.
inline double smell_severity(double value, double threshold) {
    if (!(threshold > 0.0) || std::isinf(value)) return 1.0;
    return std::clamp(std::min(1.0, value / threshold - 1.0 + 0.5), 0.0, 1.0);
}

struct SmellContext {
    const MetricsTable& table;
    const DependencyGraph& graph;
};

using SmellSink = std::vector<SmellRecord>;

struct SmellPredicate {
    std::string name;
    double default_threshold = 0.0;
    std::function<void(const SmellContext&, double threshold, SmellSink&)> evaluate;
};

/// Named predicates with default thresholds. Every predicate must be
/// monotone: raising its threshold never adds records.
class SmellRegistry {
public:
    void add(SmellPredicate p) {
        auto it = std::find_if(preds_.begin(), preds_.end(), [&](const auto& q) { return q.name == p.name; });
        if (it != preds_.end()) *it = std::move(p);
        else preds_.push_back(std::move(p));
        std::sort(preds_.begin(), preds_.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    }

    const std::vector<SmellPredicate>& predicates() const { return preds_; }

    std::map<std::string, double> default_thresholds() const {
        std::map<std::string, double> out;
        for (const auto& p : preds_) out[p.name] = p.default_threshold;
        return out;
    }

private:
    std::vector<SmellPredicate> preds_;
};

namespace detail {

inline SmellRecord make_record(std::string predicate, SmellSubject subject, double severity,
                               std::map<std::string, double> evidence) {
    SmellRecord r;
    r.id = predicate + ":" + subject.primary + (subject.secondary.empty() ? "" : "/" + subject.secondary);
    r.predicate = std::move(predicate);
    r.subject = std::move(subject);
    r.severity = severity;
    r.evidence = std::move(evidence);
    return r;
}

inline double as_double(std::size_t v) { return static_cast<double>(v); }

}  // namespace detail

inline SmellRegistry builtin_smells() {
    using detail::as_double;
    using detail::make_record;
    SmellRegistry reg;

    // Method-less classes with at least `threshold` fields.
    reg.add({"pod_class", 0.0, [](const SmellContext& ctx, double th, SmellSink& out) {
                 for (const auto& [id, c] : ctx.table.classes)
                     if (c.method_count == 0 && as_double(c.field_count) >= th)
                         out.push_back(make_record("pod_class", {SubjectKind::Class, id, ""}, 1.0,
                                                   {{"method_count", 0.0}, {"field_count", as_double(c.field_count)}}));
             }});

    reg.add({"god_class", 40.0, [](const SmellContext& ctx, double th, SmellSink& out) {
                 for (const auto& [id, c] : ctx.table.classes) {
                     const double v = as_double(c.member_count);
                     if (v >= th)
                         out.push_back(make_record("god_class", {SubjectKind::Class, id, ""}, smell_severity(v, th),
                                                   {{"member_count", v},
                                                    {"field_count", as_double(c.field_count)},
                                                    {"method_count", as_double(c.method_count)}}));
                 }
             }});

    reg.add({"long_method", 50.0, [](const SmellContext& ctx, double th, SmellSink& out) {
                 for (const auto& [id, mm] : ctx.table.methods) {
                     const double v = as_double(mm.size_lines);
                     if (v >= th)
                         out.push_back(make_record("long_method", {SubjectKind::Method, mm.class_id, id},
                                                   smell_severity(v, th), {{"size_lines", v}}));
                 }
             }});

    reg.add({"long_parameter_list", 6.0, [](const SmellContext& ctx, double th, SmellSink& out) {
                 for (const auto& [id, mm] : ctx.table.methods) {
                     const double v = as_double(mm.formal_args);
                     if (v >= th)
                         out.push_back(make_record("long_parameter_list", {SubjectKind::Method, mm.class_id, id},
                                                   smell_severity(v, th), {{"formal_args", v}}));
                 }
             }});

    // Mutually dependent class pairs with heavy combined coupling.
    reg.add({"class_merge_candidate", 4.0, [](const SmellContext& ctx, double th, SmellSink& out) {
                 for (const auto& pc : pair_coupling(ctx.graph)) {
                     const double v = as_double(pc.multiplicity);
                     if (pc.bidirectional && v >= th)
                         out.push_back(make_record("class_merge_candidate", {SubjectKind::ClassPair, pc.first, pc.second},
                                                   smell_severity(v, th), {{"multiplicity", v}}));
                 }
             }});

    // Group pairs whose mutual edge multiplicity reaches `threshold` times the
    // internal multiplicity of both groups.
    reg.add({"non_modular_packages", 1.0, [](const SmellContext& ctx, double th, SmellSink& out) {
                 std::map<std::string, std::size_t> intra;
                 std::map<std::pair<std::string, std::string>, std::size_t> inter;
                 for (const auto& e : ctx.graph.edges) {
                     auto a = ctx.table.class_group.find(e.referrer);
                     auto b = ctx.table.class_group.find(e.referent);
                     if (a == ctx.table.class_group.end() || b == ctx.table.class_group.end()) continue;
                     if (a->second == b->second) {
                         intra[a->second] += e.multiplicity;
                     } else {
                         auto key = std::minmax(a->second, b->second);
                         inter[{key.first, key.second}] += e.multiplicity;
                     }
                 }
                 for (const auto& [pair, n] : inter) {
                     const double cross = as_double(n);
                     const double inside = as_double(std::max(intra[pair.first], intra[pair.second]));
                     const double ratio = inside > 0.0 ? cross / inside : std::numeric_limits<double>::infinity();
                     if (cross >= th * inside)
                         out.push_back(make_record("non_modular_packages", {SubjectKind::GroupPair, pair.first, pair.second},
                                                   smell_severity(ratio, th),
                                                   {{"inter_multiplicity", cross},
                                                    {"intra_multiplicity_first", as_double(intra[pair.first])},
                                                    {"intra_multiplicity_second", as_double(intra[pair.second])}}));
                 }
             }});
    return reg;
}

/// Runs every registered predicate with thresholds from `cfg` layered over
/// the defaults. Throws Error on an unknown key or a negative / non-finite
/// threshold. Output is ordered by predicate name, then subject.
inline std::vector<SmellRecord> evaluate_smells(const MetricsTable& t, const DependencyGraph& g,
                                                const std::map<std::string, double>& cfg = {},
                                                const SmellRegistry& registry = builtin_smells()) {
    auto thresholds = registry.default_thresholds();
    for (const auto& [key, value] : cfg) {
        auto it = thresholds.find(key);
        if (it == thresholds.end()) throw Error("unknown smell threshold '" + key + "'");
        if (!std::isfinite(value) || value < 0.0) throw Error("threshold '" + key + "' must be a finite non-negative number");
        it->second = value;
    }
    SmellContext ctx{t, g};
    std::vector<SmellRecord> out;
    for (const auto& p : registry.predicates()) {
        SmellSink sink;
        p.evaluate(ctx, thresholds.at(p.name), sink);
        std::sort(sink.begin(), sink.end(), [](const auto& a, const auto& b) {
            return std::tie(a.subject.primary, a.subject.secondary) < std::tie(b.subject.primary, b.subject.secondary);
        });
        out.insert(out.end(), std::make_move_iterator(sink.begin()), std::make_move_iterator(sink.end()));
    }
    return out;
}

inline Json smells_to_json(const std::vector<SmellRecord>& records) {
    Json out = Json::array();
    for (const auto& r : records) {
        Json subject{{"kind", std::string(to_string(r.subject.kind))}};
        switch (r.subject.kind) {
            case SubjectKind::Class: subject["class"] = r.subject.primary; break;
            case SubjectKind::Method:
                subject["class"] = r.subject.primary;
                subject["method"] = r.subject.secondary;
                break;
            case SubjectKind::ClassPair: subject["classes"] = {r.subject.primary, r.subject.secondary}; break;
            case SubjectKind::GroupPair: subject["groups"] = {r.subject.primary, r.subject.secondary}; break;
        }
        out.push_back(Json{{"id", r.id},
                           {"predicate", r.predicate},
                           {"subject", std::move(subject)},
                           {"severity", r.severity},
                           {"evidence", r.evidence}});
    }
    return out;
}

/// Reads a `{predicate: number}` threshold document.
inline std::map<std::string, double> parse_thresholds(const Json& doc) {
    if (!doc.is_object()) throw SchemaError("thresholds", "expected object");
    std::map<std::string, double> out;
    for (const auto& [k, v] : doc.items()) {
        if (!v.is_number()) throw SchemaError("thresholds." + k, "expected number");
        out[k] = v.get<double>();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Visual overrides

struct VisualOverride {
    std::string target;  // entity id: class, method or group
    std::optional<Rgba> color;
    std::optional<Vec3> scale;
    std::optional<double> illumination;
    std::optional<std::string> material;
    std::optional<std::string> texture;

    bool operator==(const VisualOverride&) const = default;
};

/// How a smell shows up. Scale and illumination interpolate linearly from
/// `*_min` at severity 0 to `*_max` at severity 1.
struct OverrideTemplate {
    std::optional<Rgba> color;
    std::optional<Vec3> scale_min, scale_max;
    std::optional<double> illumination_min, illumination_max;
    std::optional<std::string> material;
    std::optional<std::string> texture;

    bool operator==(const OverrideTemplate&) const = default;
};

using SmellStyle = std::map<std::string, OverrideTemplate>;

inline constexpr Rgba kHighlightColor{1.0, 1.0, 0.0, 1.0};

inline SmellStyle default_smell_style() {
    SmellStyle s;
    s["pod_class"] = {Rgba{1.0, 0.0, 0.0, 1.0}, {}, {}, {}, {}, {}, {}};
    s["god_class"] = {{}, {}, {}, 0.2, 1.0, std::string("god"), std::string("cracked")};
    s["long_method"] = {Rgba{1.0, 0.55, 0.0, 1.0}, {}, {}, 0.0, 0.6, {}, {}};
    s["long_parameter_list"] = {{}, {}, {}, 0.1, 0.8, {}, std::string("striped")};
    s["class_merge_candidate"] = {{}, {}, {}, 0.3, 1.0, std::string("merge"), {}};
    s["non_modular_packages"] = {Rgba{0.6, 0.2, 0.8, 1.0}, {}, {}, {}, {}, {}, {}};
    return s;
}

/// One override per record, aimed at the record's primary subject (or the
/// method for method smells). Predicates without a template get a yellow
/// highlight glowing with the severity.
inline std::vector<VisualOverride> smells_to_overrides(const std::vector<SmellRecord>& records,
                                                       const SmellStyle& style = default_smell_style()) {
    auto lerp = [](double a, double b, double s) { return a + (b - a) * s; };
    std::vector<VisualOverride> out;
    for (const auto& r : records) {
        VisualOverride o;
        o.target = r.subject.kind == SubjectKind::Method ? r.subject.secondary : r.subject.primary;
        auto it = style.find(r.predicate);
        if (it == style.end()) {
            o.color = kHighlightColor;
            o.illumination = r.severity;
            out.push_back(std::move(o));
            continue;
        }
        const auto& t = it->second;
        o.color = t.color;
        o.material = t.material;
        o.texture = t.texture;
        if (t.illumination_min || t.illumination_max) {
            const double lo = t.illumination_min.value_or(0.0);
            o.illumination = lerp(lo, t.illumination_max.value_or(lo), r.severity);
        }
        if (t.scale_min || t.scale_max) {
            const Vec3 lo = t.scale_min.value_or(Vec3{1.0, 1.0, 1.0});
            const Vec3 hi = t.scale_max.value_or(lo);
            o.scale = Vec3{lerp(lo[0], hi[0], r.severity), lerp(lo[1], hi[1], r.severity), lerp(lo[2], hi[2], r.severity)};
        }
        if (!o.color && !o.scale && !o.illumination && !o.material && !o.texture) {
            o.color = kHighlightColor;
            o.illumination = r.severity;
        }
        out.push_back(std::move(o));
    }
    return out;
}

}  // namespace arcades
