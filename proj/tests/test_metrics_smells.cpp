#include <gtest/gtest.h>

#include <random>
#include <set>

#include "arcades/metrics_smells.hpp"
#include "support/fixtures.hpp"
#include "support/random_model.hpp"

using namespace arcades;

namespace {

struct Analyzed {
    CodeModel model;
    DependencyGraph graph;
    Grouping grouping;
    MetricsTable table;
};

Analyzed analyze_source(const std::string& text) {
    Analyzed a;
    a.model = extract({{"t.moo", text}}).model;
    a.graph = build_graph(a.model);
    a.grouping = group_by_namespace(a.model);
    a.table = compute_metrics(a.model, a.graph, a.grouping);
    return a;
}

std::set<std::string> record_ids(const std::vector<SmellRecord>& rs) {
    std::set<std::string> out;
    for (const auto& r : rs) out.insert(r.id);
    return out;
}

}  // namespace

TEST(Metrics, InheritorsCountDistinctDerivedClasses) {
    auto a = analyze_source("class Base { void f(); }; class A : Base {}; class B : Base {}; class C : public Base {};");
    EXPECT_EQ(a.table.classes.at("cls:Base").inheritors, 3u);
    EXPECT_EQ(a.table.classes.at("cls:A").inheritors, 0u);
}

TEST(Metrics, AccessPartitionAndMemberCount) {
    auto a = analyze_source(R"(
class K {
public:
    int x;
    void a();
    void b(int p);
private:
    int y;
    void c();
};)");
    const auto& k = a.table.classes.at("cls:K");
    EXPECT_EQ(k.public_methods, 2u);
    EXPECT_EQ(k.private_methods, 1u);
    EXPECT_EQ(k.field_count, 2u);
    EXPECT_EQ(k.member_count, 5u);
    EXPECT_EQ(k.max_formal_args, 1u);
}

TEST(Metrics, NoRepoStatsMeansZeroHistory) {
    auto a = analyze_source("namespace a { class X {}; class Y {}; } namespace b { class Z {}; }");
    ASSERT_FALSE(a.model.repo_stats.has_value());
    for (const auto& [id, gm] : a.table.groups) {
        EXPECT_EQ(gm.summative_age_days, 0.0) << id;
        EXPECT_EQ(gm.total_commits, 0u) << id;
        EXPECT_EQ(gm.contributor_count, 0u) << id;
    }
}

TEST(Metrics, GroupHistoryAggregatesFiles) {
    CodeModel m = extract({{"a.moo", "namespace p { class X {}; }"}, {"b.moo", "namespace p { class Y {}; }"}}).model;
    RepoStats rs;
    rs.files["a.moo"] = {3, {"ann", "bo"}, 1000};
    rs.files["b.moo"] = {2, {"bo", "cy"}, 1000 + 86400};
    m.repo_stats = rs;
    m.reference_time = 1000 + 2 * 86400;
    auto g = build_graph(m);
    auto t = compute_metrics(m, g, group_by_namespace(m));
    const auto& gm = t.groups.at("pkg:p");
    EXPECT_EQ(gm.total_commits, 5u);
    EXPECT_EQ(gm.contributor_count, 3u);
    EXPECT_DOUBLE_EQ(gm.summative_age_days, 3.0);  // 2 days + 1 day
    EXPECT_EQ(gm.class_count, 2u);
}

TEST(Metrics, IdentitiesOnRandomModels) {
    std::mt19937 rng(61);
    for (int i = 0; i < 500; ++i) {
        auto m = testkit::random_model(rng);
        auto g = build_graph(m);
        auto t = compute_metrics(m, g, group_by_namespace(m));
        for (const auto& [id, c] : t.classes) {
            EXPECT_EQ(c.member_count, c.field_count + c.method_count) << id;
            EXPECT_EQ(c.public_methods + c.private_methods, c.method_count) << id;
        }
        std::size_t loc = 0;
        for (const auto& c : m.classes) loc += c.line_count;
        std::size_t group_loc = 0;
        for (const auto& [_, gm] : t.groups) group_loc += gm.loc;
        EXPECT_EQ(group_loc, loc);
    }
}

TEST(Metrics, CouplingCountsMatchRawEdgeRecount) {
    std::mt19937 rng(67);
    for (int i = 0; i < 200; ++i) {
        auto m = testkit::random_model(rng);
        auto g = build_graph(m);
        auto t = compute_metrics(m, g, group_by_namespace(m));
        // oracle: distinct referrers per (referent, kind), scanned directly
        std::map<std::pair<std::string, DepKind>, std::set<std::string>> from;
        std::map<std::string, std::set<std::string>> embeds;
        for (const auto& e : g.edges) {
            from[{e.referent, e.kind}].insert(e.referrer);
            if (e.kind == DepKind::PartOf) embeds[e.referrer].insert(e.referent);
        }
        auto referrers = [&](const std::string& id, DepKind k) { return from[std::make_pair(id, k)].size(); };
        for (const auto& [id, c] : t.classes) {
            EXPECT_EQ(c.inheritors, referrers(id, DepKind::IsA));
            EXPECT_EQ(c.components, referrers(id, DepKind::PartOf));
            EXPECT_EQ(c.deployments, referrers(id, DepKind::Uses));
            EXPECT_EQ(c.parts_count, embeds[id].size());
        }
    }
}

TEST(Smells, SeverityFormula) {
    EXPECT_DOUBLE_EQ(smell_severity(6, 6), 0.5);
    EXPECT_DOUBLE_EQ(smell_severity(9, 6), 1.0);
    EXPECT_DOUBLE_EQ(smell_severity(100, 6), 1.0);
    EXPECT_DOUBLE_EQ(smell_severity(1, 6), 0.0);
    EXPECT_DOUBLE_EQ(smell_severity(3, 0), 1.0);
}

TEST(Smells, PodClassRecord) {
    auto a = analyze_source("class P { int x; int y; }; class Q { void f(); };");
    auto rs = evaluate_smells(a.table, a.graph);
    ASSERT_EQ(rs.size(), 1u);
    EXPECT_EQ(rs[0].predicate, "pod_class");
    EXPECT_EQ(rs[0].subject.primary, "cls:P");
    EXPECT_EQ(rs[0].evidence.at("method_count"), 0.0);
}

TEST(Smells, LongParameterListAtThresholdHasSeverityHalf) {
    auto a = analyze_source("class M { void f(int a, int b, int c, int d, int e, int f); void g(int a); };");
    auto rs = evaluate_smells(a.table, a.graph);
    ASSERT_EQ(rs.size(), 1u);
    EXPECT_EQ(rs[0].predicate, "long_parameter_list");
    EXPECT_EQ(rs[0].subject.kind, SubjectKind::Method);
    EXPECT_EQ(rs[0].subject.secondary, "mth:M::f#0");
    EXPECT_DOUBLE_EQ(rs[0].severity, 0.5);
    EXPECT_DOUBLE_EQ(rs[0].evidence.at("formal_args"), 6.0);
}

TEST(Smells, EmptyModelEmptyCatalogue) {
    CodeModel m;
    auto g = build_graph(m);
    auto t = compute_metrics(m, g, group_by_namespace(m));
    EXPECT_TRUE(evaluate_smells(t, g).empty());
    EXPECT_TRUE(smells_to_overrides({}).empty());
}

TEST(Smells, UnknownOrBadThresholdIsAnError) {
    auto a = analyze_source("class A {};");
    EXPECT_THROW(evaluate_smells(a.table, a.graph, {{"no_such_smell", 1.0}}), Error);
    EXPECT_THROW(evaluate_smells(a.table, a.graph, {{"god_class", -1.0}}), Error);
    EXPECT_THROW(parse_thresholds(Json::parse(R"({"god_class": "big"})")), SchemaError);
}

TEST(Smells, MergeCandidateNeedsBothDirections) {
    auto a = analyze_source(R"(
class A { B* b1; B* b2; void f(B& b); };
class B { A* a; void g(); };
class C { D* d1; D* d2; D* d3; D* d4; void h(); };
class D { void k(); };
)");
    auto rs = evaluate_smells(a.table, a.graph, {{"pod_class", 1.0}});
    std::vector<SmellRecord> merge;
    for (const auto& r : rs)
        if (r.predicate == "class_merge_candidate") merge.push_back(r);
    ASSERT_EQ(merge.size(), 1u);
    EXPECT_EQ(merge[0].subject.primary, "cls:A");
    EXPECT_EQ(merge[0].subject.secondary, "cls:B");
    EXPECT_DOUBLE_EQ(merge[0].evidence.at("multiplicity"), 4.0);
}

TEST(Smells, NonModularPackages) {
    auto a = analyze_source(R"(
namespace p { class A { q::B* x; q::B* y; void f(); }; class A2 { A* a; void f(); }; }
namespace q { class B { void f(); }; class B2 { B* b; void f(); }; }
namespace r { class C { void f(); }; class C2 { C* c; C* d; void f(); }; }
)");
    auto rs = evaluate_smells(a.table, a.graph);
    std::vector<SmellRecord> nm;
    for (const auto& r : rs)
        if (r.predicate == "non_modular_packages") nm.push_back(r);
    ASSERT_EQ(nm.size(), 1u);
    EXPECT_EQ(nm[0].subject.primary, "pkg:p");
    EXPECT_EQ(nm[0].subject.secondary, "pkg:q");
    EXPECT_DOUBLE_EQ(nm[0].severity, smell_severity(2.0, 1.0));
}

TEST(Smells, ThresholdMonotonicityOnRandomModels) {
    std::mt19937 rng(71);
    const auto defaults = builtin_smells().default_thresholds();
    for (int i = 0; i < 100; ++i) {
        auto m = testkit::random_model(rng);
        auto g = build_graph(m);
        auto t = compute_metrics(m, g, group_by_namespace(m));
        std::map<std::string, double> low;
        for (const auto& [k, _] : defaults) low[k] = static_cast<double>(rng() % 8);
        const auto base = record_ids(evaluate_smells(t, g, low));
        for (const auto& [k, v] : low) {
            auto raised = low;
            raised[k] = v * 2 + 1;
            for (const auto& id : record_ids(evaluate_smells(t, g, raised))) EXPECT_TRUE(base.count(id)) << id;
        }
    }
}

TEST(Smells, PureAndDeterministic) {
    auto units = testkit::sample_corpus_units();
    auto m = testkit::sample_corpus_model(units);
    auto g = build_graph(m);
    auto t = compute_metrics(m, g, group_by_namespace(m));
    EXPECT_EQ(smells_to_json(evaluate_smells(t, g)).dump(), smells_to_json(evaluate_smells(t, g)).dump());
}

TEST(Smells, CorpusCatalogue) {
    auto m = testkit::sample_corpus_model(testkit::sample_corpus_units());
    auto g = build_graph(m);
    auto t = compute_metrics(m, g, group_by_namespace(m));
    auto rs = evaluate_smells(t, g);
    std::set<std::pair<std::string, std::string>> hits;
    for (const auto& r : rs) hits.insert({r.predicate, r.subject.primary});
    EXPECT_TRUE(hits.count({"god_class", "cls:game::World"}));
    EXPECT_TRUE(hits.count({"pod_class", "cls:game::Settings"}));
    EXPECT_TRUE(hits.count({"pod_class", "cls:game::Item"}));
    EXPECT_TRUE(hits.count({"class_merge_candidate", "cls:game::Inventory"}));
    EXPECT_TRUE(hits.count({"long_parameter_list", "cls:engine::render::Renderer"}));
    EXPECT_TRUE(std::is_sorted(rs.begin(), rs.end(), [](const auto& x, const auto& y) {
        return std::tie(x.predicate, x.subject.primary, x.subject.secondary) <
               std::tie(y.predicate, y.subject.primary, y.subject.secondary);
    }));
}

TEST(Smells, RegistryIsExtensible) {
    auto reg = builtin_smells();
    reg.add({"many_fields", 3.0, [](const SmellContext& ctx, double th, SmellSink& out) {
                 for (const auto& [id, c] : ctx.table.classes)
                     if (static_cast<double>(c.field_count) >= th)
                         out.push_back(detail::make_record("many_fields", {SubjectKind::Class, id, ""},
                                                           smell_severity(c.field_count, th), {}));
             }});
    auto a = analyze_source("class W { int a; int b; int c; void f(); };");
    auto rs = evaluate_smells(a.table, a.graph, {{"many_fields", 3.0}}, reg);
    ASSERT_EQ(rs.size(), 1u);
    EXPECT_EQ(rs[0].predicate, "many_fields");
    // no template in the default style: highlight fallback
    auto ov = smells_to_overrides(rs);
    ASSERT_EQ(ov.size(), 1u);
    EXPECT_EQ(ov[0].color, kHighlightColor);
    EXPECT_DOUBLE_EQ(*ov[0].illumination, 0.5);
}

TEST(Overrides, DefaultStyle) {
    SmellRecord pod = detail::make_record("pod_class", {SubjectKind::Class, "cls:P", ""}, 1.0, {});
    SmellRecord god = detail::make_record("god_class", {SubjectKind::Class, "cls:G", ""}, 1.0, {});
    SmellRecord lm = detail::make_record("long_method", {SubjectKind::Method, "cls:G", "mth:G::f#0"}, 0.5, {});
    auto ov = smells_to_overrides({pod, god, lm});
    ASSERT_EQ(ov.size(), 3u);
    EXPECT_EQ(ov[0].target, "cls:P");
    EXPECT_EQ(ov[0].color, (Rgba{1, 0, 0, 1}));
    EXPECT_EQ(ov[1].texture, "cracked");
    EXPECT_DOUBLE_EQ(*ov[1].illumination, *default_smell_style().at("god_class").illumination_max);
    EXPECT_EQ(ov[2].target, "mth:G::f#0");
    EXPECT_DOUBLE_EQ(*ov[2].illumination, 0.3);
}

TEST(Overrides, ScaleInterpolatesWithSeverity) {
    SmellStyle style;
    style["god_class"].scale_min = Vec3{1, 1, 1};
    style["god_class"].scale_max = Vec3{2, 3, 1};
    auto ov = smells_to_overrides({detail::make_record("god_class", {SubjectKind::Class, "cls:G", ""}, 0.5, {})}, style);
    ASSERT_TRUE(ov[0].scale.has_value());
    EXPECT_EQ(*ov[0].scale, (Vec3{1.5, 2.0, 1.0}));
}
