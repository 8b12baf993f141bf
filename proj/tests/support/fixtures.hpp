#pragma once

#include <string>
#include <vector>

#include "arcades/depgraph.hpp"
#include "arcades/pipeline.hpp"

#ifndef ARCADES_SOURCE_DIR
#error "ARCADES_SOURCE_DIR must point at the project root"
#endif

namespace arcades::testkit {

inline std::filesystem::path source_dir() { return ARCADES_SOURCE_DIR; }
inline std::filesystem::path fixture_path(const std::string& name) { return source_dir() / "tests" / "fixtures" / name; }
inline std::filesystem::path corpus_dir() { return source_dir() / "samples" / "corpus"; }
inline std::filesystem::path corpus_log() { return source_dir() / "samples" / "corpus.log"; }

/// The twelve-class fixture parsed and linked.
inline CodeModel twelve_class_model() {
    return extract({SourceUnit{"twelve.moo", read_file(fixture_path("twelve.moo"))}}).model;
}

/// Edges of the twelve-class fixture, derived by hand from the source.
inline std::vector<DepEdge> twelve_class_edges() {
    const std::string fx = "cls:fx::", ut = "cls:fx::util::";
    using K = DepKind;
    return {
        {fx + "Canvas", fx + "Layer", K::Uses, 1},          // Layer* top
        {fx + "Canvas", fx + "Shape", K::Uses, 1},          // add(Shape*)
        {fx + "Canvas", fx + "Shape", K::TemplateArg, 1},   // List<Shape*>
        {fx + "Circle", fx + "Point", K::PartOf, 1},        // Point center
        {fx + "Circle", fx + "Shape", K::IsA, 1},
        {fx + "Document", fx + "Canvas", K::PartOf, 2},     // canvas, backup
        {fx + "Document", fx + "Layer", K::TemplateArg, 1}, // Pair<Shape, Layer>
        {fx + "Document", fx + "Shape", K::TemplateArg, 1},
        {fx + "Document", ut + "Registry", K::Uses, 1},
        {fx + "Document", ut + "Writer", K::Uses, 1},
        {fx + "Group", fx + "Shape", K::IsA, 1},
        {fx + "Group", fx + "Shape", K::PartOf, 1},         // Shape primary
        {fx + "Group", fx + "Shape", K::TemplateArg, 1},    // List<Shape>
        {fx + "Group", ut + "Named", K::IsA, 1},
        {fx + "Layer", fx + "Canvas", K::Uses, 1},
        {fx + "Layer", fx + "Shape", K::TemplateArg, 1},    // Map<String, List<Shape>>
        {fx + "Rect", fx + "Point", K::PartOf, 2},
        {fx + "Rect", fx + "Point", K::Uses, 1},            // contains(Point)
        {fx + "Rect", fx + "Shape", K::IsA, 1},
        {fx + "Shape", fx + "Canvas", K::Uses, 1},
        {ut + "Cache", ut + "Registry", K::IsA, 1},
        {ut + "Cache", ut + "Registry", K::PartOf, 1},
        {ut + "Registry", fx + "Document", K::TemplateArg, 1},
        {ut + "Registry", ut + "Named", K::Uses, 1},
        {ut + "Registry", ut + "Named", K::TemplateArg, 1},
        {ut + "Writer", fx + "Document", K::Uses, 1},
        {ut + "Writer", ut + "Registry", K::Uses, 1},
    };
}

/// Two 4-cliques {a0..a3} and {b0..b3} joined by the single edge a3 - b0.
inline DependencyGraph two_clique_graph() {
    DependencyGraph g;
    for (const char* side : {"a", "b"})
        for (int i = 0; i < 4; ++i) g.nodes.push_back(std::string(side) + std::to_string(i));
    for (const char* side : {"a", "b"})
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                g.edges.push_back({std::string(side) + std::to_string(i), std::string(side) + std::to_string(j), DepKind::Uses, 1});
    g.edges.push_back({"a3", "b0", DepKind::Uses, 1});
    std::sort(g.edges.begin(), g.edges.end(), [](const DepEdge& x, const DepEdge& y) {
        return std::tie(x.referrer, x.referent, x.kind) < std::tie(y.referrer, y.referent, y.kind);
    });
    return g;
}

/// Full sample-corpus chain: extract (with history) -> model bytes.
inline CodeModel sample_corpus_model(std::vector<SourceUnit> units) {
    auto result = extract(units);
    std::map<std::string, std::string> file_map;
    for (const auto& c : result.model.classes) file_map[c.file_id] = c.file_id;
    auto ingested = ingest_repo_stats(read_file(corpus_log()), file_map);
    std::int64_t newest = 0;
    for (const auto& [_, st] : ingested.stats.files) newest = std::max(newest, st.last_modified);
    result.model.reference_time = newest;
    result.model.repo_stats = ingested.stats;
    validate(result.model);
    return result.model;
}

inline std::vector<SourceUnit> sample_corpus_units() { return collect_sources({corpus_dir()}); }

}  // namespace arcades::testkit
