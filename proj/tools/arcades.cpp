// arcades: MiniOO sources -> model -> dependency graph -> metrics/smells -> 3D city.

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "arcades/pipeline.hpp"
#include "arcades/server.hpp"

namespace fs = std::filesystem;
using namespace arcades;

namespace {

void emit(const std::string& out, std::string_view data) {
    if (out.empty() || out == "-") std::cout << data;
    else write_file(out, data);
}

CodeModel load_model_file(const std::string& path) { return load_model(read_file(path)); }

Ordering parse_ordering(const std::string& s) {
    auto colon = s.find(':');
    Json doc{{"criterion", s.substr(0, colon)}};
    if (colon != std::string::npos) doc["direction"] = s.substr(colon + 1);
    return detail::read_ordering(doc, "--order");
}

int run_extract(const std::vector<std::string>& inputs, const std::string& out, const std::string& repo_log,
                std::optional<std::int64_t> reference_time, bool strict) {
    std::vector<fs::path> paths(inputs.begin(), inputs.end());
    auto result = extract(collect_sources(paths));
    bool errors = false;
    for (const auto& d : result.diagnostics) {
        std::cerr << d.to_string() << "\n";
        errors |= d.severity == Severity::Error;
    }
    auto& m = result.model;
    if (!repo_log.empty()) {
        std::map<std::string, std::string> file_map;
        for (const auto& c : m.classes) file_map[c.file_id] = c.file_id;
        auto ingested = ingest_repo_stats(read_file(repo_log), file_map);
        for (const auto& w : ingested.warnings) std::cerr << repo_log << ": warning: " << w << "\n";
        std::int64_t newest = 0;
        for (const auto& [_, st] : ingested.stats.files) newest = std::max(newest, st.last_modified);
        m.reference_time = reference_time.value_or(newest);
        m.repo_stats = std::move(ingested.stats);
    } else if (reference_time) {
        m.reference_time = *reference_time;
    }
    validate(m);
    emit(out, save_model(m));
    return strict && errors ? 1 : 0;
}

int run_graph(const std::string& model, const std::string& out, const std::string& dot) {
    const auto m = load_model_file(model);
    const auto g = build_graph(m);
    for (const auto& cycle : isa_cycles(g)) {
        std::string names;
        for (const auto& id : cycle) names += (names.empty() ? "" : ", ") + id;
        std::cerr << "warning: inheritance cycle among " << names << "\n";
    }
    emit(out, graph_to_json(g).dump(2) + "\n");
    if (!dot.empty()) emit(dot, graph_to_dot(g));
    return 0;
}

std::map<std::string, double> load_thresholds(const std::string& path) {
    if (path.empty()) return {};
    try {
        return parse_thresholds(Json::parse(read_file(path)));
    } catch (const Json::parse_error& e) {
        throw SchemaError("", path + ": " + e.what());
    }
}

int run_analyze(const std::string& model, const std::string& grouping, const std::string& thresholds,
                const std::string& out) {
    const auto m = load_model_file(model);
    const auto a = analyze(m, grouping, load_thresholds(thresholds));
    emit(out, analysis_to_json(a).dump(2) + "\n");
    return 0;
}

struct SceneArgs {
    std::string model;
    std::string config;
    std::string grouping;
    std::string order;
    std::string class_order;
    std::string kinds;
    std::string thresholds;
    std::string format = "json";
    std::string out;
};

SceneConfig scene_config(const SceneArgs& args) {
    SceneConfig cfg;
    if (!args.config.empty()) cfg = config_from_json(Json::parse(read_file(args.config)));
    Json patch = Json::object();
    if (!args.grouping.empty()) patch["grouping"] = args.grouping;
    if (!args.kinds.empty()) {
        Json kinds = Json::array();
        std::string rest = args.kinds;
        if (rest != "none") {
            for (std::size_t pos = 0; pos <= rest.size();) {
                auto comma = rest.find(',', pos);
                if (comma == std::string::npos) comma = rest.size();
                if (comma > pos) kinds.push_back(rest.substr(pos, comma - pos));
                pos = comma + 1;
            }
        }
        patch["kinds"] = kinds;
    }
    if (!args.thresholds.empty()) patch["thresholds"] = load_thresholds(args.thresholds);
    cfg = config_from_json(patch, cfg);
    if (!args.order.empty()) cfg.block_order = parse_ordering(args.order);
    if (!args.class_order.empty()) cfg.class_order = parse_ordering(args.class_order);
    return cfg;
}

int run_scene(const SceneArgs& args) {
    const auto m = load_model_file(args.model);
    const auto cfg = scene_config(args);
    const auto a = analyze(m, cfg.grouping, cfg.thresholds);
    const auto built = render_scene(m, a, cfg);
    for (const auto& w : built.warnings) std::cerr << "warning: " << w << "\n";

    const bool json = args.format == "json" || args.format == "both";
    const bool obj = args.format == "obj" || args.format == "both";
    if (json) {
        std::string path = args.out;
        if (args.format == "both" && !path.empty()) path = fs::path(path).replace_extension(".json").string();
        emit(path, export_scene_doc(built.scene));
    }
    if (obj) {
        if (args.out.empty() || args.out == "-") {
            std::cout << export_obj(built.scene).obj;
        } else {
            fs::path obj_path = fs::path(args.out).replace_extension(".obj");
            fs::path mtl_path = fs::path(args.out).replace_extension(".mtl");
            auto exported = export_obj(built.scene, mtl_path.filename().string());
            write_file(obj_path, exported.obj);
            write_file(mtl_path, exported.mtl);
        }
    }
    return 0;
}

int run_serve(const std::string& model, const std::string& config, int port, const std::string& host,
              const std::string& static_dir) {
    SceneConfig cfg;
    if (!config.empty()) cfg = config_from_json(Json::parse(read_file(config)));
    Session session(load_model_file(model), cfg);
    httplib::Server server;
    install_routes(server, session, static_dir);
    std::cerr << "serving " << model << " on http://" << host << ":" << port << "/\n";
    if (!server.listen(host, port)) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Turn object-oriented code into an explorable 3D city"};
    app.require_subcommand(1);

    std::vector<std::string> inputs;
    std::string out, repo_log, dot, grouping = "ns", thresholds, config, static_dir, host = "127.0.0.1";
    std::optional<std::int64_t> reference_time;
    bool strict = false;
    int port = default_port();
    SceneArgs scene;

    auto* ext = app.add_subcommand("extract", "Parse MiniOO sources (.moo) into a model document");
    ext->add_option("inputs", inputs, "Source files or directories")->required();
    ext->add_option("-o,--output", out, "Model document (default: stdout)");
    ext->add_option("--repo-log", repo_log, "Commit log with per-commit touched paths");
    ext->add_option("--reference-time", reference_time, "Analysis time, unix seconds (default: newest commit)");
    ext->add_flag("--strict", strict, "Exit nonzero when any syntax error was reported");

    std::string model;
    auto* gr = app.add_subcommand("graph", "Emit the class dependency graph");
    gr->add_option("model", model, "Model document")->required();
    gr->add_option("-o,--output", out, "Edge list JSON (default: stdout)");
    gr->add_option("--dot", dot, "Also write Graphviz text to this file");

    auto* an = app.add_subcommand("analyze", "Compute metrics and the smell catalogue");
    an->add_option("model", model, "Model document")->required();
    an->add_option("--grouping", grouping, "ns | recovered:lp | recovered:greedy | adhoc:<file>");
    an->add_option("--thresholds", thresholds, "JSON map predicate -> threshold");
    an->add_option("-o,--output", out, "Analysis JSON (default: stdout)");

    auto* sc = app.add_subcommand("scene", "Lay out the city and export it");
    sc->add_option("model", scene.model, "Model document")->required();
    sc->add_option("--config", scene.config, "Scene config JSON");
    sc->add_option("--grouping", scene.grouping, "ns | recovered:lp | recovered:greedy | adhoc:<file>");
    sc->add_option("--order", scene.order, "Block order, e.g. loc:desc, class_count:asc, summative_age");
    sc->add_option("--class-order", scene.class_order, "Order of buildings within a block");
    sc->add_option("--kinds", scene.kinds, "Comma list of isa,partof,uses,template (or none)");
    sc->add_option("--thresholds", scene.thresholds, "JSON map predicate -> threshold");
    sc->add_option("--format", scene.format, "json | obj | both")->check(CLI::IsMember({"json", "obj", "both"}));
    sc->add_option("-o,--output", scene.out, "Output path (default: stdout)");

    auto* sv = app.add_subcommand("serve", "Serve the HTTP API and viewer");
    sv->add_option("model", model, "Model document")->required();
    sv->add_option("--config", config, "Initial scene config JSON");
    sv->add_option("--port", port, "Port (default: $ARCADES_PORT or 8080)");
    sv->add_option("--host", host, "Bind address");
    sv->add_option("--static", static_dir, "Viewer files served at /");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ext) return run_extract(inputs, out, repo_log, reference_time, strict);
        if (*gr) return run_graph(model, out, dot);
        if (*an) return run_analyze(model, grouping, thresholds, out);
        if (*sc) return run_scene(scene);
        if (*sv) return run_serve(model, config, port, host, static_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
