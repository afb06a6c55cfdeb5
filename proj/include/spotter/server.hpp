#pragma once

#include <memory>
#include <optional>
#include <string>

#include <httplib.h>

#include "spotter/api.hpp"

namespace spotter {

inline constexpr const char* kFallbackIndex = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>spotter</title></head>
<body>
<h1>spotter profile server</h1>
<p>No explorer UI directory was mounted (start with <code>--ui-dir</code>). JSON endpoints:</p>
<ul>
<li><a href="/api/session">/api/session</a></li>
<li><a href="/api/tree?order=emitter,receiver,content">/api/tree?order=emitter,receiver,content</a></li>
<li>/api/search?q=&lt;keyword&gt;&amp;order=...</li>
<li>/api/node/&lt;id&gt;?order=...</li>
<li>/api/visible?selected=&lt;id&gt;&amp;order=...</li>
<li><a href="/api/flat">/api/flat</a></li>
</ul>
</body></html>
)";

namespace detail {

inline void reply(httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
}

inline std::string param(const httplib::Request& req, const char* name) {
    return req.has_param(name) ? req.get_param_value(name) : std::string{};
}

}  // namespace detail

/// Registers the API routes. `service` must outlive the returned server.
inline std::unique_ptr<httplib::Server> make_server(const ProfileService& service,
                                                    const std::optional<std::string>& ui_dir = std::nullopt) {
    auto server = std::make_unique<httplib::Server>();
    // SO_REUSEADDR only: the library default (SO_REUSEPORT) lets a second server share a busy port.
    server->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    const ProfileService* svc = &service;

    server->Get("/api/session", [svc](const httplib::Request&, httplib::Response& res) {
        detail::reply(res, svc->get_session());
    });
    server->Get("/api/tree", [svc](const httplib::Request& req, httplib::Response& res) {
        detail::reply(res, svc->get_tree(detail::param(req, "order")));
    });
    server->Get("/api/search", [svc](const httplib::Request& req, httplib::Response& res) {
        detail::reply(res, svc->get_search(detail::param(req, "q"), detail::param(req, "order")));
    });
    server->Get(R"(/api/node/([^/]+))", [svc](const httplib::Request& req, httplib::Response& res) {
        detail::reply(res, svc->get_node(req.matches[1].str(), detail::param(req, "order")));
    });
    server->Get("/api/visible", [svc](const httplib::Request& req, httplib::Response& res) {
        detail::reply(res, svc->get_visible(detail::param(req, "selected"), detail::param(req, "order")));
    });
    server->Get("/api/flat", [svc](const httplib::Request&, httplib::Response& res) {
        detail::reply(res, svc->get_flat());
    });

    bool mounted = ui_dir && server->set_mount_point("/", *ui_dir);
    if (!mounted) {
        server->Get("/", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(kFallbackIndex, "text/html");
        });
    }
    return server;
}

}  // namespace spotter
