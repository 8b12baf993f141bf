#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "arcades/cityscape.hpp"
#include "arcades/code_model.hpp"
#include "arcades/depgraph.hpp"
#include "arcades/extractor.hpp"
#include "arcades/grouping.hpp"
#include "arcades/metrics_smells.hpp"

namespace arcades {

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view data) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error("cannot write '" + p.string() + "'");
}

/// Resolves a grouping spec: `ns`, `recovered:lp`, `recovered:greedy` or
/// `adhoc:<path>`.
inline Grouping resolve_grouping(const std::string& spec, const CodeModel& m, const DependencyGraph& g) {
    if (spec == "ns") return group_by_namespace(m);
    if (spec == "recovered:lp") return recover_components(g, ClusterAlgorithm::LabelPropagation);
    if (spec == "recovered:greedy") return recover_components(g, ClusterAlgorithm::GreedyModularity);
    if (spec.rfind("adhoc:", 0) == 0) return load_adhoc_grouping(read_file(spec.substr(6)), m);
    throw Error("unknown grouping '" + spec + "' (expected ns, recovered:lp, recovered:greedy or adhoc:<file>)");
}

struct Analysis {
    DependencyGraph graph;
    Grouping grouping;
    MetricsTable metrics;
    std::vector<SmellRecord> smells;
};

inline Analysis analyze(const CodeModel& m, const std::string& grouping_spec,
                        const std::map<std::string, double>& thresholds = {}) {
    Analysis a;
    a.graph = build_graph(m);
    a.grouping = resolve_grouping(grouping_spec, m, a.graph);
    a.metrics = compute_metrics(m, a.graph, a.grouping);
    a.smells = evaluate_smells(a.metrics, a.graph, thresholds);
    return a;
}

inline SceneBuild render_scene(const CodeModel& m, const Analysis& a, const SceneConfig& cfg) {
    const auto placements = layout(m, a.metrics, a.grouping, cfg);
    const auto overrides = smells_to_overrides(a.smells, cfg.smell_style);
    return build_scene(placements, m, a.metrics, a.graph, overrides, cfg);
}

inline Json analysis_to_json(const Analysis& a) {
    return Json{{"metrics", metrics_to_json(a.metrics)},
                {"smells", smells_to_json(a.smells)},
                {"grouping", grouping_to_json(a.grouping)}};
}

/// Collects `.moo` sources from files and directories (recursively). File ids
/// are paths relative to the directory argument, or the file name for direct
/// file arguments.
inline std::vector<SourceUnit> collect_sources(const std::vector<std::filesystem::path>& inputs) {
    namespace fs = std::filesystem;
    std::vector<SourceUnit> units;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            for (const auto& entry : fs::recursive_directory_iterator(in)) {
                if (!entry.is_regular_file() || entry.path().extension() != ".moo") continue;
                units.push_back({fs::relative(entry.path(), in).generic_string(), read_file(entry.path())});
            }
        } else if (fs::is_regular_file(in)) {
            units.push_back({in.filename().generic_string(), read_file(in)});
        } else {
            throw Error("no such file or directory '" + in.string() + "'");
        }
    }
    std::sort(units.begin(), units.end(), [](const auto& a, const auto& b) { return a.file < b.file; });
    return units;
}

}  // namespace arcades
