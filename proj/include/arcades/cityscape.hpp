#pragma once

// City layout and scene generation. Groups become blocks on a west-to-east
// strip; classes become buildings with one floor per method and one window
// per formal argument; dependencies become two-colored links between roofs.
//
// Space is Y-up and right-handed. Building fronts (the facades carrying the
// windows) face +z; rows of a block run from the front edge (z = 0) towards -z.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "arcades/code_model.hpp"
#include "arcades/depgraph.hpp"
#include "arcades/grouping.hpp"
#include "arcades/metrics_smells.hpp"

namespace arcades {

// ---------------------------------------------------------------------------
// Configuration

enum class OrderCriterion { ClassCount, Loc, Commits, Contributors, SummativeAge };
enum class SortDirection { Ascending, Descending };

inline std::string_view to_string(OrderCriterion c) {
    switch (c) {
        case OrderCriterion::ClassCount: return "class_count";
        case OrderCriterion::Loc: return "loc";
        case OrderCriterion::Commits: return "commits";
        case OrderCriterion::Contributors: return "contributors";
        case OrderCriterion::SummativeAge: return "summative_age";
    }
    return "loc";
}

inline std::string_view to_string(SortDirection d) { return d == SortDirection::Ascending ? "asc" : "desc"; }

struct Ordering {
    OrderCriterion criterion = OrderCriterion::Loc;
    SortDirection direction = SortDirection::Descending;

    bool operator==(const Ordering&) const = default;
};

struct Palette {
    Rgba pod_color{1.0, 0.0, 0.0, 1.0};
    Rgba public_floor{0.68, 0.85, 1.0, 1.0};
    Rgba private_floor{0.1, 0.3, 0.85, 1.0};
    Rgba referrer_color{0.0, 1.0, 1.0, 1.0};
    Rgba referent_color{1.0, 0.41, 0.71, 1.0};
    Rgba block_color{0.55, 0.55, 0.55, 1.0};
    Rgba building_color{0.9, 0.9, 0.9, 0.15};
    Rgba window_color{0.95, 0.95, 0.7, 1.0};

    bool operator==(const Palette&) const = default;
};

struct UnitSizes {
    double floor_height = 1.0;
    double window_width = 0.5;
    double building_gap = 1.0;
    double block_padding = 1.0;
    double block_gap = 4.0;

    bool operator==(const UnitSizes&) const = default;
};

struct SceneConfig {
    std::string grouping = "ns";  // ns | recovered:lp | recovered:greedy | adhoc:<file>
    Ordering block_order;
    Ordering class_order;
    std::set<DepKind> kinds{DepKind::IsA, DepKind::PartOf, DepKind::Uses, DepKind::TemplateArg};
    Palette palette;
    UnitSizes sizes;
    std::vector<VisualOverride> overrides;
    std::map<std::string, double> thresholds;
    SmellStyle smell_style = default_smell_style();
    bool smell_effects = true;

    bool operator==(const SceneConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Config <-> JSON

namespace detail {

inline Json rgba_json(const Rgba& c) { return Json::array({c[0], c[1], c[2], c[3]}); }
inline Json vec3_json(const Vec3& v) { return Json::array({v[0], v[1], v[2]}); }

template <std::size_t N>
std::array<double, N> read_numbers(const Json& v, const std::string& path) {
    if (!v.is_array() || v.size() != N) throw SchemaError(path, "expected array of " + std::to_string(N) + " numbers");
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        if (!v[i].is_number()) throw SchemaError(path + "[" + std::to_string(i) + "]", "expected number");
        out[i] = v[i].get<double>();
        if (!std::isfinite(out[i])) throw SchemaError(path + "[" + std::to_string(i) + "]", "expected finite number");
    }
    return out;
}

inline Rgba read_color(const Json& v, const std::string& path) {
    auto c = read_numbers<4>(v, path);
    for (double x : c)
        if (x < 0.0 || x > 1.0) throw SchemaError(path, "color components must lie in [0,1]");
    return c;
}

inline double read_number(const Json& v, const std::string& path) {
    if (!v.is_number()) throw SchemaError(path, "expected number");
    return v.get<double>();
}

inline double read_positive(const Json& v, const std::string& path) {
    const double x = read_number(v, path);
    if (!(x > 0.0) || !std::isfinite(x)) throw SchemaError(path, "expected positive number");
    return x;
}

inline std::string read_string(const Json& v, const std::string& path) {
    if (!v.is_string()) throw SchemaError(path, "expected string");
    return v.get<std::string>();
}

inline Ordering read_ordering(const Json& v, const std::string& path) {
    if (!v.is_object()) throw SchemaError(path, "expected object");
    Ordering o;
    for (const auto& [key, val] : v.items()) {
        const auto p = path + "." + key;
        if (key == "criterion") {
            const auto s = read_string(val, p);
            bool ok = false;
            for (auto c : {OrderCriterion::ClassCount, OrderCriterion::Loc, OrderCriterion::Commits,
                           OrderCriterion::Contributors, OrderCriterion::SummativeAge})
                if (to_string(c) == s) {
                    o.criterion = c;
                    ok = true;
                }
            if (!ok) throw SchemaError(p, "unknown ordering criterion '" + s + "'");
        } else if (key == "direction") {
            const auto s = read_string(val, p);
            if (s == "asc") o.direction = SortDirection::Ascending;
            else if (s == "desc") o.direction = SortDirection::Descending;
            else throw SchemaError(p, "expected \"asc\" or \"desc\"");
        } else {
            throw SchemaError(p, "unknown field");
        }
    }
    return o;
}

inline Json override_json(const VisualOverride& o) {
    Json j{{"target", o.target}};
    if (o.color) j["color"] = rgba_json(*o.color);
    if (o.scale) j["scale"] = vec3_json(*o.scale);
    if (o.illumination) j["illumination"] = *o.illumination;
    if (o.material) j["material"] = *o.material;
    if (o.texture) j["texture"] = *o.texture;
    return j;
}

inline VisualOverride read_override(const Json& v, const std::string& path) {
    if (!v.is_object()) throw SchemaError(path, "expected object");
    VisualOverride o;
    bool has_target = false;
    for (const auto& [key, val] : v.items()) {
        const auto p = path + "." + key;
        if (key == "target") {
            o.target = read_string(val, p);
            has_target = true;
        } else if (key == "color") {
            o.color = read_color(val, p);
        } else if (key == "scale") {
            auto s = read_numbers<3>(val, p);
            for (double x : s)
                if (!(x > 0.0)) throw SchemaError(p, "scale factors must be positive");
            o.scale = s;
        } else if (key == "illumination") {
            const double x = read_number(val, p);
            if (!(x >= 0.0) || !std::isfinite(x)) throw SchemaError(p, "expected non-negative number");
            o.illumination = x;
        } else if (key == "material") {
            o.material = read_string(val, p);
        } else if (key == "texture") {
            o.texture = read_string(val, p);
        } else {
            throw SchemaError(p, "unknown field");
        }
    }
    if (!has_target) throw SchemaError(path + ".target", "missing field");
    if (!o.color && !o.scale && !o.illumination && !o.material && !o.texture)
        throw SchemaError(path, "override sets no attribute");
    return o;
}

inline Json template_json(const OverrideTemplate& t) {
    Json j = Json::object();
    if (t.color) j["color"] = rgba_json(*t.color);
    if (t.scale_min) j["scale_min"] = vec3_json(*t.scale_min);
    if (t.scale_max) j["scale_max"] = vec3_json(*t.scale_max);
    if (t.illumination_min) j["illumination_min"] = *t.illumination_min;
    if (t.illumination_max) j["illumination_max"] = *t.illumination_max;
    if (t.material) j["material"] = *t.material;
    if (t.texture) j["texture"] = *t.texture;
    return j;
}

inline OverrideTemplate read_template(const Json& v, const std::string& path) {
    if (!v.is_object()) throw SchemaError(path, "expected object");
    OverrideTemplate t;
    for (const auto& [key, val] : v.items()) {
        const auto p = path + "." + key;
        if (key == "color") t.color = read_color(val, p);
        else if (key == "scale_min") t.scale_min = read_numbers<3>(val, p);
        else if (key == "scale_max") t.scale_max = read_numbers<3>(val, p);
        else if (key == "illumination_min") t.illumination_min = read_number(val, p);
        else if (key == "illumination_max") t.illumination_max = read_number(val, p);
        else if (key == "material") t.material = read_string(val, p);
        else if (key == "texture") t.texture = read_string(val, p);
        else throw SchemaError(p, "unknown field");
    }
    return t;
}

}  // namespace detail

inline Json config_to_json(const SceneConfig& c) {
    Json kinds = Json::array();
    for (auto k : kAllDepKinds)
        if (c.kinds.count(k)) kinds.push_back(std::string(to_string(k)));
    const auto& p = c.palette;
    Json overrides = Json::array();
    for (const auto& o : c.overrides) overrides.push_back(detail::override_json(o));
    Json style = Json::object();
    for (const auto& [name, t] : c.smell_style) style[name] = detail::template_json(t);
    auto ordering = [](const Ordering& o) {
        return Json{{"criterion", std::string(to_string(o.criterion))}, {"direction", std::string(to_string(o.direction))}};
    };
    return Json{{"grouping", c.grouping},
                {"block_order", ordering(c.block_order)},
                {"class_order", ordering(c.class_order)},
                {"kinds", std::move(kinds)},
                {"palette",
                 {{"pod_color", detail::rgba_json(p.pod_color)},
                  {"public_floor", detail::rgba_json(p.public_floor)},
                  {"private_floor", detail::rgba_json(p.private_floor)},
                  {"referrer_color", detail::rgba_json(p.referrer_color)},
                  {"referent_color", detail::rgba_json(p.referent_color)},
                  {"block_color", detail::rgba_json(p.block_color)},
                  {"building_color", detail::rgba_json(p.building_color)},
                  {"window_color", detail::rgba_json(p.window_color)}}},
                {"sizes",
                 {{"floor_height", c.sizes.floor_height},
                  {"window_width", c.sizes.window_width},
                  {"building_gap", c.sizes.building_gap},
                  {"block_padding", c.sizes.block_padding},
                  {"block_gap", c.sizes.block_gap}}},
                {"overrides", std::move(overrides)},
                {"thresholds", c.thresholds},
                {"smell_style", std::move(style)},
                {"smell_effects", c.smell_effects}};
}

/// Reads a full or partial config document on top of `base`. Unknown fields
/// and out-of-range values raise SchemaError carrying the field path.
inline SceneConfig config_from_json(const Json& doc, SceneConfig base = {}) {
    using namespace detail;
    if (!doc.is_object()) throw SchemaError("", "expected object");
    SceneConfig c = std::move(base);
    for (const auto& [key, v] : doc.items()) {
        const std::string& path = key;
        if (key == "grouping") {
            c.grouping = read_string(v, path);
            const auto& g = c.grouping;
            if (g != "ns" && g != "recovered:lp" && g != "recovered:greedy" && g.rfind("adhoc:", 0) != 0)
                throw SchemaError(path, "expected ns, recovered:lp, recovered:greedy or adhoc:<file>");
        } else if (key == "block_order") {
            c.block_order = read_ordering(v, path);
        } else if (key == "class_order") {
            c.class_order = read_ordering(v, path);
        } else if (key == "kinds") {
            if (!v.is_array()) throw SchemaError(path, "expected array");
            c.kinds.clear();
            for (std::size_t i = 0; i < v.size(); ++i) {
                const auto p = path + "[" + std::to_string(i) + "]";
                auto k = dep_kind_from_string(read_string(v[i], p));
                if (!k) throw SchemaError(p, "unknown dependency kind");
                c.kinds.insert(*k);
            }
        } else if (key == "palette") {
            if (!v.is_object()) throw SchemaError(path, "expected object");
            auto& pal = c.palette;
            for (const auto& [name, col] : v.items()) {
                const auto p = path + "." + name;
                Rgba* slot = name == "pod_color"        ? &pal.pod_color
                             : name == "public_floor"   ? &pal.public_floor
                             : name == "private_floor"  ? &pal.private_floor
                             : name == "referrer_color" ? &pal.referrer_color
                             : name == "referent_color" ? &pal.referent_color
                             : name == "block_color"    ? &pal.block_color
                             : name == "building_color" ? &pal.building_color
                             : name == "window_color"   ? &pal.window_color
                                                        : nullptr;
                if (slot == nullptr) throw SchemaError(p, "unknown palette entry");
                *slot = read_color(col, p);
            }
        } else if (key == "sizes") {
            if (!v.is_object()) throw SchemaError(path, "expected object");
            auto& s = c.sizes;
            for (const auto& [name, val] : v.items()) {
                const auto p = path + "." + name;
                double* slot = name == "floor_height"    ? &s.floor_height
                               : name == "window_width"  ? &s.window_width
                               : name == "building_gap"  ? &s.building_gap
                               : name == "block_padding" ? &s.block_padding
                               : name == "block_gap"     ? &s.block_gap
                                                         : nullptr;
                if (slot == nullptr) throw SchemaError(p, "unknown size entry");
                *slot = read_positive(val, p);
            }
        } else if (key == "overrides") {
            if (!v.is_array()) throw SchemaError(path, "expected array");
            c.overrides.clear();
            for (std::size_t i = 0; i < v.size(); ++i) c.overrides.push_back(read_override(v[i], path + "[" + std::to_string(i) + "]"));
        } else if (key == "thresholds") {
            auto th = parse_thresholds(v);
            const auto known = builtin_smells().default_thresholds();
            for (const auto& [name, x] : th) {
                if (!known.count(name)) throw SchemaError(path + "." + name, "unknown smell predicate");
                if (!(x >= 0.0) || !std::isfinite(x)) throw SchemaError(path + "." + name, "expected non-negative number");
            }
            c.thresholds = std::move(th);
        } else if (key == "smell_style") {
            if (!v.is_object()) throw SchemaError(path, "expected object");
            SmellStyle style;
            for (const auto& [name, t] : v.items()) style[name] = read_template(t, path + "." + name);
            c.smell_style = std::move(style);
        } else if (key == "smell_effects") {
            if (!v.is_boolean()) throw SchemaError(path, "expected boolean");
            c.smell_effects = v.get<bool>();
        } else {
            throw SchemaError(path, "unknown field");
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// Layout

/// Axis-aligned rectangle on the ground plane.
struct Rect {
    double x0 = 0, x1 = 0, z0 = 0, z1 = 0;

    double width() const { return x1 - x0; }
    double depth() const { return z1 - z0; }
    double cx() const { return 0.5 * (x0 + x1); }
    double cz() const { return 0.5 * (z0 + z1); }

    bool operator==(const Rect&) const = default;
};

struct BuildingPlacement {
    std::string class_id;
    std::string group_id;
    Rect footprint;
};

struct BlockPlacement {
    std::string group_id;
    std::string label;
    Rect rect;
    std::vector<std::size_t> buildings;  // indices into Placements::buildings, placement order
};

struct Placements {
    std::vector<BlockPlacement> blocks;  // west to east
    std::vector<BuildingPlacement> buildings;
};

inline double group_criterion_value(const GroupMetrics& g, OrderCriterion c) {
    switch (c) {
        case OrderCriterion::ClassCount: return static_cast<double>(g.class_count);
        case OrderCriterion::Loc: return static_cast<double>(g.loc);
        case OrderCriterion::Commits: return static_cast<double>(g.total_commits);
        case OrderCriterion::Contributors: return static_cast<double>(g.contributor_count);
        case OrderCriterion::SummativeAge: return g.summative_age_days;
    }
    return 0.0;
}

/// Class-level projection of an ordering criterion. Only source size has a
/// per-class counterpart; every criterion orders classes by line count.
inline double class_criterion_value(const ClassMetrics& c, OrderCriterion) { return static_cast<double>(c.line_count); }

/// Square footprint side: wide enough for one window slot per formal argument
/// of the widest method, plus one.
inline double building_footprint(const ClassMetrics& c, const UnitSizes& s) {
    return std::max(1.0, s.window_width * (1.0 + static_cast<double>(c.max_formal_args)));
}

inline Placements layout(const CodeModel& m, const MetricsTable& t, const Grouping& grp, const SceneConfig& cfg) {
    (void)m;
    const auto& s = cfg.sizes;
    Placements out;

    auto before = [](double a, double b, SortDirection d) { return d == SortDirection::Ascending ? a < b : a > b; };

    std::vector<const Group*> order;
    for (const auto& g : grp.groups) order.push_back(&g);
    static const GroupMetrics kEmpty{};
    auto gm = [&](const Group* g) -> const GroupMetrics& {
        auto it = t.groups.find(g->id);
        return it == t.groups.end() ? kEmpty : it->second;
    };
    std::stable_sort(order.begin(), order.end(), [&](const Group* a, const Group* b) {
        const double va = group_criterion_value(gm(a), cfg.block_order.criterion);
        const double vb = group_criterion_value(gm(b), cfg.block_order.criterion);
        if (va != vb) return before(va, vb, cfg.block_order.direction);
        return a->id < b->id;
    });

    static const ClassMetrics kNoMetrics{};
    auto cm = [&](const std::string& id) -> const ClassMetrics& {
        auto it = t.classes.find(id);
        return it == t.classes.end() ? kNoMetrics : it->second;
    };

    double strip_x = 0.0;
    for (const Group* g : order) {
        std::vector<std::string> members = g->members;
        std::sort(members.begin(), members.end(), [&](const std::string& a, const std::string& b) {
            const double va = class_criterion_value(cm(a), cfg.class_order.criterion);
            const double vb = class_criterion_value(cm(b), cfg.class_order.criterion);
            if (va != vb) return before(va, vb, cfg.class_order.direction);
            return a < b;
        });

        BlockPlacement block;
        block.group_id = g->id;
        block.label = g->label;
        const std::size_t n = members.size();
        const std::size_t per_row = n == 0 ? 1 : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));

        // local frame: x grows east from the block's west edge, rows go from
        // z = 0 (front) towards -z
        double widest_row = 0.0;
        double row_front = -s.block_padding;
        for (std::size_t start = 0; start < n; start += per_row) {
            double x = s.block_padding;
            double row_depth = 0.0;
            for (std::size_t i = start; i < std::min(n, start + per_row); ++i) {
                const double fp = building_footprint(cm(members[i]), s);
                BuildingPlacement b{members[i], g->id, Rect{strip_x + x, strip_x + x + fp, row_front - fp, row_front}};
                block.buildings.push_back(out.buildings.size());
                out.buildings.push_back(std::move(b));
                x += fp + s.building_gap;
                row_depth = std::max(row_depth, fp);
            }
            widest_row = std::max(widest_row, x - s.building_gap - s.block_padding);
            row_front -= row_depth + s.building_gap;
        }
        const double width = 2.0 * s.block_padding + widest_row;
        const double depth = n == 0 ? 2.0 * s.block_padding : -(row_front + s.building_gap) + s.block_padding;
        block.rect = Rect{strip_x, strip_x + width, -depth, 0.0};
        out.blocks.push_back(std::move(block));
        strip_x += width + s.block_gap;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scene graph

enum class NodeKind { Block, Building, Floor, Window };

inline std::string_view to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Block: return "block";
        case NodeKind::Building: return "building";
        case NodeKind::Floor: return "floor";
        case NodeKind::Window: return "window";
    }
    return "block";
}

/// Axis-aligned box. `position` is its center.
struct SceneNode {
    std::string id;
    NodeKind kind = NodeKind::Block;
    std::string entity;  // group, class or method id
    Vec3 position{};
    Vec3 size{};
    Rgba color{};
    double emissive = 0.0;
    std::string material;
    std::string texture;

    bool operator==(const SceneNode&) const = default;
};

/// Polyline referrer roof -> raised midpoint -> referent roof. The first
/// segment takes `first_color`, the second `second_color`.
struct SceneLink {
    std::string id;
    std::string referrer;
    std::string referent;
    DepKind kind = DepKind::IsA;
    std::array<Vec3, 3> points{};
    Rgba first_color{};
    Rgba second_color{};

    bool operator==(const SceneLink&) const = default;
};

struct SceneGraph {
    std::vector<SceneNode> nodes;
    std::vector<SceneLink> links;

    bool operator==(const SceneGraph&) const = default;
};

struct SceneBuild {
    SceneGraph scene;
    std::vector<std::string> warnings;
};

/// Windows are thin boxes whose back face lies on the floor's front facade.
inline constexpr double kWindowDepth = 0.02;
inline constexpr double kBlockThickness = 0.1;

inline SceneBuild build_scene(const Placements& pl, const CodeModel& m, const MetricsTable& t, const DependencyGraph& g,
                              const std::vector<VisualOverride>& smell_overrides, const SceneConfig& cfg) {
    (void)t;
    const auto& s = cfg.sizes;
    const auto& pal = cfg.palette;
    SceneBuild out;
    auto& nodes = out.scene.nodes;

    std::unordered_map<std::string, const ClassEntity*> classes;
    for (const auto& c : m.classes) classes.emplace(c.id, &c);
    std::unordered_map<std::string, std::size_t> primary;  // entity id -> node index
    std::unordered_map<std::string, std::pair<Vec3, double>> roofs;  // class id -> (roof center, height)

    for (const auto& block : pl.blocks) {
        const auto& r = block.rect;
        primary[block.group_id] = nodes.size();
        nodes.push_back({"block:" + block.group_id, NodeKind::Block, block.group_id,
                         Vec3{r.cx(), -0.5 * kBlockThickness, r.cz()}, Vec3{r.width(), kBlockThickness, r.depth()},
                         pal.block_color, 0.0, "block", ""});

        for (std::size_t bi : block.buildings) {
            const auto& b = pl.buildings[bi];
            auto it = classes.find(b.class_id);
            if (it == classes.end()) {
                out.warnings.push_back("placement references unknown class '" + b.class_id + "'");
                continue;
            }
            const ClassEntity& c = *it->second;
            const auto& fp = b.footprint;
            const bool pod = c.methods.empty();
            const double height = pod ? s.floor_height : s.floor_height * static_cast<double>(c.methods.size());
            primary[c.id] = nodes.size();
            nodes.push_back({"building:" + c.id, NodeKind::Building, c.id, Vec3{fp.cx(), 0.5 * height, fp.cz()},
                             Vec3{fp.width(), height, fp.depth()}, pod ? pal.pod_color : pal.building_color, 0.0,
                             pod ? "pod" : "building", ""});
            roofs[c.id] = {Vec3{fp.cx(), height, fp.cz()}, height};

            for (std::size_t fi = 0; fi < c.methods.size(); ++fi) {
                const auto& mt = c.methods[fi];
                const double y = (static_cast<double>(fi) + 0.5) * s.floor_height;
                const bool pub = mt.access == Access::Public;
                primary[mt.id] = nodes.size();
                nodes.push_back({"floor:" + mt.id, NodeKind::Floor, mt.id, Vec3{fp.cx(), y, fp.cz()},
                                 Vec3{fp.width(), s.floor_height, fp.depth()}, pub ? pal.public_floor : pal.private_floor,
                                 0.0, pub ? "floor_public" : "floor_private", ""});
                const std::size_t n = mt.params.size();
                for (std::size_t wi = 0; wi < n; ++wi) {
                    const double x = fp.x0 + fp.width() * static_cast<double>(wi + 1) / static_cast<double>(n + 1);
                    nodes.push_back({"window:" + mt.id + ":" + std::to_string(wi), NodeKind::Window, mt.id,
                                     Vec3{x, y, fp.z1 + 0.5 * kWindowDepth},
                                     Vec3{s.window_width, 0.5 * s.floor_height, kWindowDepth}, pal.window_color, 0.0,
                                     "window", ""});
                }
            }
        }
    }

    for (const auto& e : g.edges) {
        if (!cfg.kinds.count(e.kind)) continue;
        auto a = roofs.find(e.referrer), b = roofs.find(e.referent);
        if (a == roofs.end() || b == roofs.end()) continue;
        const Vec3& p = a->second.first;
        const Vec3& q = b->second.first;
        const Vec3 mid{0.5 * (p[0] + q[0]), std::max(a->second.second, b->second.second) + 2.0 * s.floor_height,
                       0.5 * (p[2] + q[2])};
        out.scene.links.push_back({"link:" + e.referrer + "->" + e.referent + ":" + std::string(to_string(e.kind)),
                                   e.referrer, e.referent, e.kind, {p, mid, q}, pal.referrer_color, pal.referent_color});
    }

    auto apply = [&](const VisualOverride& o) {
        auto it = primary.find(o.target);
        if (it == primary.end()) {
            out.warnings.push_back("override targets unknown entity '" + o.target + "'");
            return;
        }
        auto& n = nodes[it->second];
        if (o.color) n.color = *o.color;
        if (o.illumination) n.emissive = *o.illumination;
        if (o.material) n.material = *o.material;
        if (o.texture) n.texture = *o.texture;
        if (o.scale) {
            const double bottom = n.position[1] - 0.5 * n.size[1];
            for (int k = 0; k < 3; ++k) n.size[k] *= (*o.scale)[k];
            n.position[1] = bottom + 0.5 * n.size[1];
        }
    };
    if (cfg.smell_effects)
        for (const auto& o : smell_overrides) apply(o);
    for (const auto& o : cfg.overrides) apply(o);
    return out;
}

// ---------------------------------------------------------------------------
// Scene document

inline Json scene_to_json(const SceneGraph& s) {
    using detail::rgba_json;
    using detail::vec3_json;
    Json nodes = Json::array();
    for (const auto& n : s.nodes)
        nodes.push_back(Json{{"id", n.id},
                             {"kind", std::string(to_string(n.kind))},
                             {"entity", n.entity},
                             {"position", vec3_json(n.position)},
                             {"size", vec3_json(n.size)},
                             {"color", rgba_json(n.color)},
                             {"emissive", n.emissive},
                             {"material", n.material},
                             {"texture", n.texture}});
    Json links = Json::array();
    for (const auto& l : s.links)
        links.push_back(Json{{"id", l.id},
                             {"referrer", l.referrer},
                             {"referent", l.referent},
                             {"kind", std::string(to_string(l.kind))},
                             {"points", Json::array({vec3_json(l.points[0]), vec3_json(l.points[1]), vec3_json(l.points[2])})},
                             {"first_color", rgba_json(l.first_color)},
                             {"second_color", rgba_json(l.second_color)}});
    return Json{{"nodes", std::move(nodes)}, {"links", std::move(links)}};
}

/// Canonical scene document: sorted keys, two-space indent, trailing newline.
inline std::string export_scene_doc(const SceneGraph& s) { return scene_to_json(s).dump(2) + "\n"; }

inline SceneGraph import_scene_doc(std::string_view document) {
    using R = detail::JsonReader;
    Json doc;
    try {
        doc = Json::parse(document);
    } catch (const Json::parse_error& e) {
        throw SchemaError("", e.what());
    }
    SceneGraph s;
    const auto& nodes = R::array(R::field(doc, "", "nodes"), "nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto p = R::index("nodes", i);
        const auto& v = nodes[i];
        SceneNode n;
        n.id = R::string(R::field(v, p, "id"), p + ".id");
        const auto kind = R::string(R::field(v, p, "kind"), p + ".kind");
        bool ok = false;
        for (auto k : {NodeKind::Block, NodeKind::Building, NodeKind::Floor, NodeKind::Window})
            if (to_string(k) == kind) {
                n.kind = k;
                ok = true;
            }
        if (!ok) throw SchemaError(p + ".kind", "unknown node kind '" + kind + "'");
        n.entity = R::string(R::field(v, p, "entity"), p + ".entity");
        n.position = detail::read_numbers<3>(R::field(v, p, "position"), p + ".position");
        n.size = detail::read_numbers<3>(R::field(v, p, "size"), p + ".size");
        n.color = detail::read_color(R::field(v, p, "color"), p + ".color");
        n.emissive = detail::read_number(R::field(v, p, "emissive"), p + ".emissive");
        n.material = R::string(R::field(v, p, "material"), p + ".material");
        n.texture = R::string(R::field(v, p, "texture"), p + ".texture");
        s.nodes.push_back(std::move(n));
    }
    const auto& links = R::array(R::field(doc, "", "links"), "links");
    for (std::size_t i = 0; i < links.size(); ++i) {
        const auto p = R::index("links", i);
        const auto& v = links[i];
        SceneLink l;
        l.id = R::string(R::field(v, p, "id"), p + ".id");
        l.referrer = R::string(R::field(v, p, "referrer"), p + ".referrer");
        l.referent = R::string(R::field(v, p, "referent"), p + ".referent");
        const auto kind = R::string(R::field(v, p, "kind"), p + ".kind");
        auto k = dep_kind_from_string(kind);
        if (!k) throw SchemaError(p + ".kind", "unknown dependency kind '" + kind + "'");
        l.kind = *k;
        const auto& pts = R::array(R::field(v, p, "points"), p + ".points");
        if (pts.size() != 3) throw SchemaError(p + ".points", "expected 3 points");
        for (std::size_t j = 0; j < 3; ++j) l.points[j] = detail::read_numbers<3>(pts[j], R::index(p + ".points", j));
        l.first_color = detail::read_color(R::field(v, p, "first_color"), p + ".first_color");
        l.second_color = detail::read_color(R::field(v, p, "second_color"), p + ".second_color");
        s.links.push_back(std::move(l));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Wavefront OBJ

struct ObjExport {
    std::string obj;
    std::string mtl;
};

/// Every node becomes an `o` object of 8 vertices and 6 outward-facing quads
/// with its own material. Links are not exported.
inline ObjExport export_obj(const SceneGraph& s, std::string_view mtl_name = "scene.mtl") {
    auto num = [](double v) {
        char buf[48];
        if (std::fabs(v) < 5e-7) v = 0.0;
        std::snprintf(buf, sizeof buf, "%.6f", v);
        return std::string(buf);
    };
    ObjExport out;
    out.obj = "# arcades scene export\n# nodes: " + std::to_string(s.nodes.size()) + "\n";
    out.mtl = "# arcades scene materials\n";
    if (!s.nodes.empty()) out.obj += "mtllib " + std::string(mtl_name) + "\n";

    static constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                          {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
    static constexpr int kFace[6][4] = {{0, 3, 2, 1}, {4, 5, 6, 7}, {0, 4, 7, 3},
                                        {1, 2, 6, 5}, {0, 1, 5, 4}, {3, 7, 6, 2}};
    std::size_t base = 1;
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
        const auto& n = s.nodes[i];
        const auto mat = "m" + std::to_string(i);
        out.obj += "o " + n.id + "\nusemtl " + mat + "\n";
        for (const auto& c : kCorner) {
            out.obj += "v";
            for (int k = 0; k < 3; ++k) out.obj += " " + num(n.position[k] + (c[k] ? 0.5 : -0.5) * n.size[k]);
            out.obj += "\n";
        }
        for (const auto& f : kFace) {
            out.obj += "f";
            for (int k : f) out.obj += " " + std::to_string(base + static_cast<std::size_t>(k));
            out.obj += "\n";
        }
        base += 8;

        out.mtl += "newmtl " + mat + "\n# node " + n.id + (n.material.empty() ? "" : " material " + n.material) + "\n";
        if (!n.texture.empty()) out.mtl += "# texture " + n.texture + "\n";
        out.mtl += "Kd " + num(n.color[0]) + " " + num(n.color[1]) + " " + num(n.color[2]) + "\n";
        out.mtl += "Ke " + num(n.color[0] * n.emissive) + " " + num(n.color[1] * n.emissive) + " " +
                   num(n.color[2] * n.emissive) + "\n";
        out.mtl += "d " + num(n.color[3]) + "\n";
    }
    return out;
}

}  // namespace arcades
