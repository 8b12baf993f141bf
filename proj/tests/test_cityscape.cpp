#include <gtest/gtest.h>

#include <random>

#include "arcades/pipeline.hpp"
#include "support/fixtures.hpp"
#include "support/random_model.hpp"
#include "support/scene_checks.hpp"

using namespace arcades;

namespace {

struct Built {
    CodeModel model;
    Analysis analysis;
    Placements placements;
    SceneBuild scene;
};

Built build(CodeModel m, const SceneConfig& cfg = {}) {
    Built b;
    b.model = std::move(m);
    b.analysis = analyze(b.model, cfg.grouping, cfg.thresholds);
    b.placements = layout(b.model, b.analysis.metrics, b.analysis.grouping, cfg);
    b.scene = render_scene(b.model, b.analysis, cfg);
    return b;
}

Built build_source(const std::string& text, const SceneConfig& cfg = {}) {
    return build(extract({{"t.moo", text}}).model, cfg);
}

const SceneNode* node(const SceneGraph& s, const std::string& id) {
    for (const auto& n : s.nodes)
        if (n.id == id) return &n;
    return nullptr;
}

std::vector<const SceneNode*> nodes_of(const SceneGraph& s, NodeKind k, const std::string& entity_prefix = "") {
    std::vector<const SceneNode*> out;
    for (const auto& n : s.nodes)
        if (n.kind == k && n.entity.rfind(entity_prefix, 0) == 0) out.push_back(&n);
    return out;
}

}  // namespace

TEST(Layout, FourEqualClassesMakeTwoByTwoGrid) {
    auto b = build_source("class A { void f(); }; class B { void f(); }; class C { void f(); }; class D { void f(); };");
    ASSERT_EQ(b.placements.blocks.size(), 1u);
    const auto& blk = b.placements.blocks[0];
    ASSERT_EQ(blk.buildings.size(), 4u);
    std::vector<Rect> r;
    for (auto i : blk.buildings) r.push_back(b.placements.buildings[i].footprint);
    // row-major: same row shares z, columns advance in +x, next row behind (-z)
    EXPECT_EQ(r[0].z1, r[1].z1);
    EXPECT_LT(r[0].x1, r[1].x0);
    EXPECT_EQ(r[2].z1, r[3].z1);
    EXPECT_LT(r[2].z1, r[0].z0);
    EXPECT_EQ(r[0].x0, r[2].x0);
    // equal line counts: name order breaks the tie
    EXPECT_EQ(b.placements.buildings[blk.buildings[0]].class_id, "cls:A");
    EXPECT_EQ(b.placements.buildings[blk.buildings[3]].class_id, "cls:D");
}

TEST(Layout, BlocksOrderedByLocDescending) {
    std::string small = "namespace small { class S { void f(); }; }\n";
    std::string big = "namespace big { class B {\n";
    for (int i = 0; i < 10; ++i) big += "  void m" + std::to_string(i) + "();\n";
    big += "}; }\n";
    SceneConfig cfg;
    cfg.block_order = {OrderCriterion::Loc, SortDirection::Descending};
    auto b = build_source(small + big, cfg);
    ASSERT_EQ(b.placements.blocks.size(), 2u);
    const auto& gm = b.analysis.metrics.groups;
    ASSERT_GT(gm.at("pkg:big").loc, gm.at("pkg:small").loc);
    EXPECT_EQ(b.placements.blocks[0].group_id, "pkg:big");
    EXPECT_LT(b.placements.blocks[0].rect.x1, b.placements.blocks[1].rect.x0);

    cfg.block_order.direction = SortDirection::Ascending;
    EXPECT_EQ(build_source(small + big, cfg).placements.blocks[0].group_id, "pkg:small");
}

TEST(Layout, BlockOrderMatchesSortOracleAndIgnoresScaling) {
    std::mt19937 rng(73);
    for (int i = 0; i < 100; ++i) {
        auto m = testkit::random_model(rng);
        auto scaled = m;
        for (auto& c : scaled.classes) c.line_count *= 7;
        for (auto crit : {OrderCriterion::Loc, OrderCriterion::ClassCount, OrderCriterion::Commits,
                          OrderCriterion::Contributors, OrderCriterion::SummativeAge}) {
            SceneConfig cfg;
            cfg.block_order = {crit, SortDirection::Descending};
            auto a = analyze(m, "ns");
            auto p = layout(m, a.metrics, a.grouping, cfg);
            // oracle: stable sort of group ids by (-value, id)
            std::vector<std::pair<double, std::string>> expect;
            for (const auto& g : a.grouping.groups)
                expect.push_back({-group_criterion_value(a.metrics.groups.at(g.id), crit), g.id});
            std::sort(expect.begin(), expect.end());
            ASSERT_EQ(p.blocks.size(), expect.size());
            for (std::size_t k = 0; k < expect.size(); ++k) EXPECT_EQ(p.blocks[k].group_id, expect[k].second);

            auto as = analyze(scaled, "ns");
            auto ps = layout(scaled, as.metrics, as.grouping, cfg);
            for (std::size_t k = 0; k < p.blocks.size(); ++k) EXPECT_EQ(p.blocks[k].group_id, ps.blocks[k].group_id);
        }
    }
}

TEST(Layout, EmptyModelEmptyPlacement) {
    auto b = build(CodeModel{});
    EXPECT_TRUE(b.placements.blocks.empty());
    EXPECT_TRUE(b.placements.buildings.empty());
    EXPECT_TRUE(b.scene.scene.nodes.empty());
}

TEST(Layout, SoundOnRandomModels) {
    std::mt19937 rng(79);
    for (int i = 0; i < 200; ++i) {
        auto m = testkit::random_model(rng);
        auto a = analyze(m, "ns");
        auto p = layout(m, a.metrics, a.grouping, SceneConfig{});
        auto v = testkit::layout_violations(p);
        EXPECT_TRUE(v.empty()) << "model " << i << ": " << v.front();
        EXPECT_EQ(p.buildings.size(), m.classes.size());
    }
}

TEST(Scene, FloorsColorsAndWindows) {
    auto b = build_source(R"(
class K {
public:
    void a();
private:
    void b(int x, int y);
public:
    void c(int z);
};)");
    const auto& s = b.scene.scene;
    const auto* bld = node(s, "building:cls:K");
    ASSERT_NE(bld, nullptr);
    EXPECT_DOUBLE_EQ(bld->size[1], 3.0);
    auto floors = nodes_of(s, NodeKind::Floor);
    ASSERT_EQ(floors.size(), 3u);
    const Palette pal;
    EXPECT_EQ(floors[0]->color, pal.public_floor);
    EXPECT_EQ(floors[1]->color, pal.private_floor);
    EXPECT_EQ(floors[2]->color, pal.public_floor);
    EXPECT_LT(floors[0]->position[1], floors[1]->position[1]);
    EXPECT_LT(floors[1]->position[1], floors[2]->position[1]);
    const std::vector<std::size_t> expect{0, 2, 1};
    for (std::size_t f = 0; f < 3; ++f) {
        auto windows = nodes_of(s, NodeKind::Window, floors[f]->entity);
        EXPECT_EQ(windows.size(), expect[f]);
        const double facade = floors[f]->position[2] + 0.5 * floors[f]->size[2];
        for (const auto* w : windows) {
            EXPECT_NEAR(w->position[2] - 0.5 * w->size[2], facade, 1e-9);  // back face on the facade
            EXPECT_NEAR(w->position[1], floors[f]->position[1], 1e-9);
            EXPECT_GT(w->position[0] - 0.5 * w->size[0], floors[f]->position[0] - 0.5 * floors[f]->size[0]);
            EXPECT_LT(w->position[0] + 0.5 * w->size[0], floors[f]->position[0] + 0.5 * floors[f]->size[0]);
        }
    }
    // floors nested in the building
    for (const auto* f : floors) {
        EXPECT_GE(f->position[1] - 0.5 * f->size[1], bld->position[1] - 0.5 * bld->size[1] - 1e-9);
        EXPECT_LE(f->position[1] + 0.5 * f->size[1], bld->position[1] + 0.5 * bld->size[1] + 1e-9);
    }
}

TEST(Scene, PodIsOneRedSlab) {
    auto b = build_source("class P { int x; int y; };");
    const auto& s = b.scene.scene;
    EXPECT_TRUE(nodes_of(s, NodeKind::Floor).empty());
    EXPECT_TRUE(nodes_of(s, NodeKind::Window).empty());
    auto buildings = nodes_of(s, NodeKind::Building);
    ASSERT_EQ(buildings.size(), 1u);
    EXPECT_EQ(buildings[0]->color, (Rgba{1, 0, 0, 1}));
    EXPECT_DOUBLE_EQ(buildings[0]->size[1], SceneConfig{}.sizes.floor_height);
}

TEST(Scene, LinkHalvesCarryReferrerAndReferentColors) {
    auto b = build_source("class B { void f(); }; class A : B { void g(); };");
    const auto& links = b.scene.scene.links;
    ASSERT_EQ(links.size(), 1u);
    const Palette pal;
    EXPECT_EQ(links[0].referrer, "cls:A");
    EXPECT_EQ(links[0].kind, DepKind::IsA);
    EXPECT_EQ(links[0].first_color, pal.referrer_color);
    EXPECT_EQ(links[0].second_color, pal.referent_color);
    EXPECT_EQ(pal.referrer_color, (Rgba{0, 1, 1, 1}));
    const auto* a = node(b.scene.scene, "building:cls:A");
    EXPECT_DOUBLE_EQ(links[0].points[0][0], a->position[0]);
    EXPECT_DOUBLE_EQ(links[0].points[0][1], a->size[1]);
    // the bend sits at the geometric midpoint in plan
    EXPECT_DOUBLE_EQ(links[0].points[1][0], 0.5 * (links[0].points[0][0] + links[0].points[2][0]));
    EXPECT_DOUBLE_EQ(links[0].points[1][1], 1.0 + 2.0);

    auto doc = Json::parse(export_scene_doc(b.scene.scene));
    ASSERT_EQ(doc["links"].size(), 1u);
    EXPECT_TRUE(doc["links"][0].contains("first_color"));
    EXPECT_TRUE(doc["links"][0].contains("second_color"));
}

TEST(Scene, FidelityAgainstModelOnRandomModels) {
    std::mt19937 rng(83);
    for (int i = 0; i < 100; ++i) {
        auto b = build(testkit::random_model(rng));
        const auto& s = b.scene.scene;
        std::set<std::string> ids;
        for (const auto& n : s.nodes) EXPECT_TRUE(ids.insert(n.id).second) << n.id;
        for (const auto& c : b.model.classes) {
            auto floors = nodes_of(s, NodeKind::Floor, "mth:" + c.id.substr(4) + "::");
            EXPECT_EQ(floors.size(), c.methods.size());
            for (const auto& mt : c.methods) {
                std::size_t w = 0;
                for (const auto& n : s.nodes) w += n.kind == NodeKind::Window && n.entity == mt.id;
                EXPECT_EQ(w, mt.params.size());
            }
        }
    }
}

TEST(Scene, KindToggleRemovesOnlyThoseLinks) {
    auto m = testkit::sample_corpus_model(testkit::sample_corpus_units());
    SceneConfig all;
    auto full = build(m, all).scene.scene;
    for (auto k : kAllDepKinds) {
        SceneConfig cfg;
        cfg.kinds.erase(k);
        auto cut = build(m, cfg).scene.scene;
        EXPECT_EQ(cut.nodes, full.nodes);
        std::vector<SceneLink> expect;
        for (const auto& l : full.links)
            if (l.kind != k) expect.push_back(l);
        EXPECT_EQ(cut.links, expect) << to_string(k);
    }
    bool any_isa = false;
    for (const auto& l : full.links) any_isa |= l.kind == DepKind::IsA;
    EXPECT_TRUE(any_isa);
}

TEST(Scene, OverridesApplyAndUnknownTargetsWarn) {
    SceneConfig cfg;
    VisualOverride o;
    o.target = "cls:A";
    o.color = Rgba{0, 1, 0, 1};
    o.scale = Vec3{1, 2, 1};
    o.texture = "brick";
    cfg.overrides.push_back(o);
    cfg.overrides.push_back(VisualOverride{"cls:Nope", Rgba{0, 0, 0, 1}, {}, {}, {}, {}});
    auto b = build_source("class A { void f(); void g(); };", cfg);
    const auto* n = node(b.scene.scene, "building:cls:A");
    EXPECT_EQ(n->color, (Rgba{0, 1, 0, 1}));
    EXPECT_EQ(n->texture, "brick");
    EXPECT_DOUBLE_EQ(n->size[1], 4.0);
    EXPECT_DOUBLE_EQ(n->position[1] - 0.5 * n->size[1], 0.0);  // still on the ground
    ASSERT_EQ(b.scene.warnings.size(), 1u);
    EXPECT_NE(b.scene.warnings[0].find("cls:Nope"), std::string::npos);
}

TEST(Scene, SmellEffectsCanBeDisabled) {
    SceneConfig cfg;
    auto on = build_source("class P { int x; };", cfg);
    cfg.palette.pod_color = Rgba{0.5, 0.5, 0.5, 1};
    auto with_smells = build_source("class P { int x; };", cfg);
    cfg.smell_effects = false;
    auto without = build_source("class P { int x; };", cfg);
    EXPECT_EQ(node(with_smells.scene.scene, "building:cls:P")->color, (Rgba{1, 0, 0, 1}));
    EXPECT_EQ(node(without.scene.scene, "building:cls:P")->color, (Rgba{0.5, 0.5, 0.5, 1}));
    (void)on;
}

TEST(Obj, SingleUnitCube) {
    SceneGraph s;
    s.nodes.push_back({"cube", NodeKind::Block, "g", {0, 0, 0}, {1, 1, 1}, {1, 1, 1, 1}, 0.0, "", ""});
    auto e = export_obj(s);
    auto c = testkit::read_obj(e.obj);
    EXPECT_EQ(c.vertices, 8u);
    EXPECT_EQ(c.faces, 6u);
    EXPECT_EQ(c.objects, 1u);
    EXPECT_EQ(c.other, 0u);
    EXPECT_TRUE(c.faces_in_range);
    EXPECT_NE(e.obj.find("v -0.500000 -0.500000 -0.500000\n"), std::string::npos);
    EXPECT_NE(e.mtl.find("Kd 1.000000 1.000000 1.000000"), std::string::npos);
}

TEST(Obj, EmptySceneIsHeaderOnly) {
    auto e = export_obj(SceneGraph{});
    std::istringstream in(e.obj);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
        ++lines;
        EXPECT_EQ(line.rfind("#", 0), 0u) << line;
    }
    EXPECT_GT(lines, 0);
}

TEST(Obj, VertexCountIsEightPerNode) {
    auto b = build(testkit::sample_corpus_model(testkit::sample_corpus_units()));
    const auto& s = b.scene.scene;
    auto c = testkit::read_obj(export_obj(s).obj);
    EXPECT_EQ(c.vertices, 8 * s.nodes.size());
    EXPECT_EQ(c.faces, 6 * s.nodes.size());
    EXPECT_EQ(c.objects, s.nodes.size());
    EXPECT_EQ(c.materials_used, s.nodes.size());
    EXPECT_TRUE(c.faces_in_range);
}

TEST(SceneDoc, ByteStableAndRoundTrips) {
    auto b = build(testkit::sample_corpus_model(testkit::sample_corpus_units()));
    const auto doc = export_scene_doc(b.scene.scene);
    EXPECT_EQ(doc, export_scene_doc(b.scene.scene));
    EXPECT_EQ(export_scene_doc(import_scene_doc(doc)), doc);
    EXPECT_EQ(import_scene_doc(doc), b.scene.scene);
    EXPECT_EQ(doc.back(), '\n');
}

TEST(SceneDoc, ImportErrorsCarryPaths) {
    try {
        import_scene_doc(R"({"nodes": [{"id": "x", "kind": "tower"}], "links": []})");
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.path(), "nodes[0].kind");
    }
}

TEST(Config, RoundTripAndPartialMerge) {
    SceneConfig c;
    c.grouping = "recovered:greedy";
    c.kinds = {DepKind::Uses};
    c.sizes.floor_height = 2.5;
    c.thresholds["god_class"] = 10;
    c.overrides.push_back(VisualOverride{"cls:A", {}, {}, 0.5, {}, {}});
    EXPECT_EQ(config_to_json(config_from_json(config_to_json(c))), config_to_json(c));

    auto merged = config_from_json(Json::parse(R"({"sizes": {"window_width": 0.25}})"), c);
    EXPECT_DOUBLE_EQ(merged.sizes.window_width, 0.25);
    EXPECT_DOUBLE_EQ(merged.sizes.floor_height, 2.5);
    EXPECT_EQ(merged.grouping, "recovered:greedy");
}

TEST(Config, ErrorsCarryFieldPaths) {
    auto path_of = [](const char* doc) {
        try {
            config_from_json(Json::parse(doc));
        } catch (const SchemaError& e) {
            return e.path();
        }
        return std::string("<accepted>");
    };
    EXPECT_EQ(path_of(R"({"sizes": {"floor_height": -1}})"), "sizes.floor_height");
    EXPECT_EQ(path_of(R"({"palette": {"pod_color": [1, 0, 0]}})"), "palette.pod_color");
    EXPECT_EQ(path_of(R"({"palette": {"pod_color": [1, 0, 0, 2]}})"), "palette.pod_color");
    EXPECT_EQ(path_of(R"({"kinds": ["isa", "likes"]})"), "kinds[1]");
    EXPECT_EQ(path_of(R"({"block_order": {"criterion": "mood"}})"), "block_order.criterion");
    EXPECT_EQ(path_of(R"({"bogus": 1})"), "bogus");
    EXPECT_EQ(path_of(R"({"thresholds": {"god_class": "x"}})"), "thresholds.god_class");
    EXPECT_EQ(path_of(R"({"sizes": {"floor_height": 2}})"), "<accepted>");
}
