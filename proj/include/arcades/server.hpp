#pragma once

// HTTP front door over a Session.
//
//   GET  /api/model/summary     model counts and current revision
//   GET  /api/metrics           metrics table
//   GET  /api/smells            smell catalogue
//   GET  /api/grouping          current grouping with modularity
//   POST /api/recluster         {"algorithm": "lp" | "greedy"}
//   GET  /api/scene             scene document of the current revision
//   GET  /api/config            current config
//   POST /api/config            partial config document
//   GET  /api/entity/{id}       class / method / group detail
//
// Responses carry the revision they were computed from in X-Arcades-Revision.

#include <cstdlib>
#include <filesystem>
#include <string>

#include "arcades/session.hpp"
#include "httplib.h"

namespace arcades {

inline constexpr int kDefaultPort = 8080;

/// Port from ARCADES_PORT, or kDefaultPort when unset or malformed.
inline int default_port() {
    if (const char* env = std::getenv("ARCADES_PORT")) {
        try {
            const int p = std::stoi(env);
            if (p > 0 && p < 65536) return p;
        } catch (const std::exception&) {
        }
    }
    return kDefaultPort;
}

namespace detail {

inline void send_json(httplib::Response& res, const Json& body, std::uint64_t revision, int status = 200) {
    res.status = status;
    res.set_header("X-Arcades-Revision", std::to_string(revision));
    res.set_content(body.dump(2) + "\n", "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& message, const std::string& path = "") {
    Json body{{"error", message}};
    if (!path.empty()) body["path"] = path;
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json");
}

inline const char* kPlaceholderPage =
    "<!doctype html><html><head><title>arcades</title></head><body>"
    "<h1>arcades</h1><p>No viewer bundle is mounted. The JSON API lives under <code>/api/</code>.</p>"
    "</body></html>\n";

}  // namespace detail

/// Registers every endpoint on `server`. `static_dir`, when it exists, is
/// mounted at `/` for the viewer.
inline void install_routes(httplib::Server& server, Session& session, const std::filesystem::path& static_dir = {}) {
    using detail::send_error;
    using detail::send_json;

    server.Get("/api/model/summary", [&session](const httplib::Request&, httplib::Response& res) {
        auto s = session.summary();
        send_json(res, s, s["revision"].get<std::uint64_t>());
    });
    server.Get("/api/metrics", [&session](const httplib::Request&, httplib::Response& res) {
        auto snap = session.snapshot();
        send_json(res, metrics_to_json(snap->analysis.metrics), snap->revision);
    });
    server.Get("/api/smells", [&session](const httplib::Request&, httplib::Response& res) {
        auto snap = session.snapshot();
        send_json(res, smells_to_json(snap->analysis.smells), snap->revision);
    });
    server.Get("/api/grouping", [&session](const httplib::Request&, httplib::Response& res) {
        auto snap = session.snapshot();
        send_json(res, grouping_to_json(snap->analysis.grouping), snap->revision);
    });
    server.Get("/api/scene", [&session](const httplib::Request&, httplib::Response& res) {
        auto snap = session.snapshot();
        res.set_header("X-Arcades-Revision", std::to_string(snap->revision));
        res.set_content(snap->scene_doc, "application/json");
    });
    server.Get("/api/config", [&session](const httplib::Request&, httplib::Response& res) {
        auto snap = session.snapshot();
        send_json(res, config_to_json(snap->config), snap->revision);
    });

    auto guarded = [&session](auto&& mutate) {
        return [&session, mutate](const httplib::Request& req, httplib::Response& res) {
            Json body;
            try {
                body = Json::parse(req.body.empty() ? std::string("{}") : req.body);
            } catch (const Json::parse_error& e) {
                return send_error(res, 400, e.what());
            }
            try {
                auto snap = mutate(session, body);
                send_json(res,
                          Json{{"revision", snap->revision},
                               {"grouping", grouping_to_json(snap->analysis.grouping)},
                               {"warnings", snap->warnings}},
                          snap->revision);
            } catch (const SchemaError& e) {
                send_error(res, 400, e.what(), e.path());
            } catch (const Error& e) {
                send_error(res, 400, e.what());
            }
        };
    };
    server.Post("/api/config", guarded([](Session& s, const Json& body) { return s.update_config(body); }));
    server.Post("/api/recluster", guarded([](Session& s, const Json& body) {
                    if (!body.is_object() || !body.contains("algorithm") || !body["algorithm"].is_string())
                        throw SchemaError("algorithm", "expected string");
                    return s.recluster(body["algorithm"].get<std::string>());
                }));

    server.Get(R"(/api/entity/(.+))", [&session](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        auto detail = session.entity(id);
        if (!detail) return send_error(res, 404, "unknown entity '" + id + "'");
        send_json(res, *detail, session.snapshot()->revision);
    });

    if (!static_dir.empty() && std::filesystem::is_directory(static_dir)) {
        server.set_mount_point("/", static_dir.string());
    } else {
        server.Get("/", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(detail::kPlaceholderPage, "text/html");
        });
    }
}

}  // namespace arcades
