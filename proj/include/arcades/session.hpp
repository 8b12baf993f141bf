#pragma once

// One loaded model plus the live scene configuration. Every accepted config
// change produces a new immutable snapshot tagged with the next revision;
// readers take a snapshot and never observe a half-applied update.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "arcades/pipeline.hpp"

namespace arcades {

class Session {
public:
    struct Snapshot {
        std::uint64_t revision = 0;
        SceneConfig config;
        Analysis analysis;
        std::string scene_doc;
        std::vector<std::string> warnings;
    };

    explicit Session(CodeModel model, SceneConfig config = {})
        : model_(std::move(model)), graph_(build_graph(model_)) {
        current_ = build(std::move(config), 1);
    }

    const CodeModel& model() const { return model_; }
    const DependencyGraph& graph() const { return graph_; }

    std::shared_ptr<const Snapshot> snapshot() const {
        std::lock_guard lock(snap_mu_);
        return current_;
    }

    /// Applies a partial config document. Throws SchemaError (bad document)
    /// or Error (e.g. unreadable ad-hoc grouping); the current snapshot is
    /// left untouched on failure.
    std::shared_ptr<const Snapshot> update_config(const Json& patch) {
        std::lock_guard writer(write_mu_);
        auto base = snapshot();
        auto cfg = config_from_json(patch, base->config);
        return publish(build(std::move(cfg), base->revision + 1));
    }

    /// Switches to a recovered grouping. Accepts `lp` / `label_propagation`
    /// and `greedy` / `greedy_modularity`.
    std::shared_ptr<const Snapshot> recluster(const std::string& algorithm) {
        std::string spec;
        if (algorithm == "lp" || algorithm == "label_propagation") spec = "recovered:lp";
        else if (algorithm == "greedy" || algorithm == "greedy_modularity") spec = "recovered:greedy";
        else throw SchemaError("algorithm", "expected \"lp\" or \"greedy\"");
        return update_config(Json{{"grouping", spec}});
    }

    Json summary() const {
        auto snap = snapshot();
        std::size_t methods = 0, fields = 0;
        for (const auto& c : model_.classes) {
            methods += c.methods.size();
            fields += c.fields.size();
        }
        return Json{{"packages", model_.packages.size()},
                    {"classes", model_.classes.size()},
                    {"methods", methods},
                    {"fields", fields},
                    {"edges", graph_.edges.size()},
                    {"isa_cycles", isa_cycles(graph_)},
                    {"revision", snap->revision}};
    }

    /// Detail record for a class, method or group id; nullopt when unknown.
    std::optional<Json> entity(const std::string& id) const {
        auto snap = snapshot();
        const auto& a = snap->analysis;
        auto smells_of = [&](const std::string& target) {
            std::vector<SmellRecord> hits;
            for (const auto& r : a.smells)
                if (r.subject.primary == target || r.subject.secondary == target) hits.push_back(r);
            return smells_to_json(hits);
        };

        if (const auto* c = model_.find_class(id)) {
            Json methods = Json::array();
            for (const auto& mt : c->methods) methods.push_back(mt.id);
            const Json cm = metrics_to_json(a.metrics)["classes"][id];
            return Json{{"kind", "class"},         {"id", c->id},
                        {"name", c->name},         {"qualified_name", model_.qualified_name(*c)},
                        {"package_id", c->package_id}, {"file_id", c->file_id},
                        {"methods", methods},      {"metrics", cm},
                        {"smells", smells_of(id)}};
        }
        for (const auto& c : model_.classes) {
            for (const auto& mt : c.methods) {
                if (mt.id != id) continue;
                const auto& mm = a.metrics.methods.at(id);
                return Json{{"kind", "method"},
                            {"id", mt.id},
                            {"name", mt.name},
                            {"class_id", c.id},
                            {"access", std::string(to_string(mt.access))},
                            {"metrics", {{"size_lines", mm.size_lines}, {"formal_args", mm.formal_args}, {"call_sites", mm.call_sites}}},
                            {"smells", smells_of(id)}};
            }
        }
        for (const auto& g : a.grouping.groups) {
            if (g.id != id) continue;
            const Json gm = metrics_to_json(a.metrics)["groups"][id];
            return Json{{"kind", "group"},
                        {"id", g.id},
                        {"label", g.label},
                        {"members", g.members},
                        {"metrics", gm},
                        {"smells", smells_of(id)}};
        }
        return std::nullopt;
    }

private:
    std::shared_ptr<const Snapshot> build(SceneConfig cfg, std::uint64_t revision) {
        auto snap = std::make_shared<Snapshot>();
        snap->revision = revision;
        snap->analysis.graph = graph_;
        snap->analysis.grouping = grouping_for(cfg.grouping);
        snap->analysis.metrics = compute_metrics(model_, graph_, snap->analysis.grouping);
        snap->analysis.smells = evaluate_smells(snap->analysis.metrics, graph_, cfg.thresholds);
        auto scene = render_scene(model_, snap->analysis, cfg);
        snap->scene_doc = export_scene_doc(scene.scene);
        snap->warnings = std::move(scene.warnings);
        snap->config = std::move(cfg);
        return snap;
    }

    Grouping grouping_for(const std::string& spec) {
        // ad-hoc files may change on disk; only derived groupings are cached
        if (spec.rfind("adhoc:", 0) == 0) return resolve_grouping(spec, model_, graph_);
        auto it = grouping_cache_.find(spec);
        if (it == grouping_cache_.end()) it = grouping_cache_.emplace(spec, resolve_grouping(spec, model_, graph_)).first;
        return it->second;
    }

    std::shared_ptr<const Snapshot> publish(std::shared_ptr<const Snapshot> snap) {
        std::lock_guard lock(snap_mu_);
        current_ = snap;
        return snap;
    }

    const CodeModel model_;
    const DependencyGraph graph_;
    std::map<std::string, Grouping> grouping_cache_;  // guarded by write_mu_ after construction
    std::mutex write_mu_;
    mutable std::mutex snap_mu_;
    std::shared_ptr<const Snapshot> current_;
};

}  // namespace arcades
