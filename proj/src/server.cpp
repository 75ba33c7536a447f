#include "rovwl/server.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace rovwl::http {

std::shared_ptr<const PublishedWhitelist> PublishedWhitelist::from_store(
    const wl::Store& s) {
    auto out = std::make_shared<PublishedWhitelist>();
    out->generation = s.last_run;
    out->entries.reserve(s.whitelist().size());
    for (const auto& [key, entry] : s.whitelist()) {
        out->entries.push_back(entry);
        out->index.emplace(key, entry.provenance);
    }
    return out;
}

std::string PublishedWhitelist::to_json() const {
    nlohmann::json j;
    j["generation"] = generation ? nlohmann::json(generation->str()) : nlohmann::json();
    j["count"] = entries.size();
    auto& arr = j["entries"] = nlohmann::json::array();
    for (const wl::WhitelistEntry& e : entries) {
        arr.push_back({{"origin", e.key.origin.value},
                       {"prefix", e.key.prefix.str()},
                       {"added", e.added.str()},
                       {"last_seen", e.last_seen.str()},
                       {"provenance", wl::to_string(e.provenance)}});
    }
    return j.dump() + "\n";
}

std::string PublishedWhitelist::to_csv() const {
    std::string out = "#rovwl-whitelist-v1\norigin,prefix,added,last_seen,provenance\n";
    for (const wl::WhitelistEntry& e : entries) {
        out += std::to_string(e.key.origin.value) + "," + e.key.prefix.str() + "," +
               e.added.str() + "," + e.last_seen.str() + "," +
               wl::to_string(e.provenance) + "\n";
    }
    return out;
}

struct WhitelistServer::Impl {
    httplib::Server server;
    std::thread thread;
    mutable std::mutex mutex;
    std::shared_ptr<const PublishedWhitelist> snapshot;

    std::shared_ptr<const PublishedWhitelist> get() const {
        std::lock_guard<std::mutex> lock(mutex);
        return snapshot;
    }
};

WhitelistServer::WhitelistServer() : impl_(std::make_unique<Impl>()) {
    Impl* impl = impl_.get();

    impl->server.Get("/health", [impl](const httplib::Request&, httplib::Response& res) {
        auto snap = impl->get();
        nlohmann::json j;
        j["status"] = "ok";
        j["generation"] = snap && snap->generation
                              ? nlohmann::json(snap->generation->str())
                              : nlohmann::json();
        res.set_content(j.dump() + "\n", "application/json");
    });

    impl->server.Get("/whitelist", [impl](const httplib::Request& req,
                                          httplib::Response& res) {
        auto snap = impl->get();
        if (!snap) {
            res.status = 503;
            res.set_content("{\"error\":\"whitelist store unavailable\"}\n",
                            "application/json");
            return;
        }
        res.set_header("X-Whitelist-Generation", snap->generation_str());
        if (req.get_header_value("Accept").find("text/csv") != std::string::npos) {
            res.set_content(snap->to_csv(), "text/csv");
        } else {
            res.set_content(snap->to_json(), "application/json");
        }
    });

    impl->server.Get("/whitelist/check", [impl](const httplib::Request& req,
                                                httplib::Response& res) {
        auto bad = [&res](const char* reason) {
            res.status = 400;
            nlohmann::json j;
            j["error"] = reason;
            res.set_content(j.dump() + "\n", "application/json");
        };
        if (!req.has_param("origin") || !req.has_param("prefix"))
            return bad("origin and prefix query parameters are required");
        auto origin = parse_asn(req.get_param_value("origin"));
        if (!origin) return bad("malformed origin");
        auto prefix = Prefix::parse(req.get_param_value("prefix"));
        if (!prefix) return bad("malformed prefix");
        auto snap = impl->get();
        if (!snap) {
            res.status = 503;
            res.set_content("{\"error\":\"whitelist store unavailable\"}\n",
                            "application/json");
            return;
        }
        res.set_header("X-Whitelist-Generation", snap->generation_str());
        auto it = snap->index.find(RouteKey{*origin, *prefix});
        nlohmann::json j;
        j["listed"] = it != snap->index.end();
        j["provenance"] = it != snap->index.end()
                              ? nlohmann::json(wl::to_string(it->second))
                              : nlohmann::json();
        j["generation"] = snap->generation
                              ? nlohmann::json(snap->generation->str())
                              : nlohmann::json();
        res.set_content(j.dump() + "\n", "application/json");
    });
}

WhitelistServer::~WhitelistServer() { stop(); }

void WhitelistServer::publish(std::shared_ptr<const PublishedWhitelist> snapshot) {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    impl_->snapshot = std::move(snapshot);
}

std::shared_ptr<const PublishedWhitelist> WhitelistServer::snapshot() const {
    return impl_->get();
}

int WhitelistServer::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) return -1;
    } else if (!impl_->server.bind_to_port(host, port)) {
        return -1;
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    for (int i = 0; i < 1000 && !impl_->server.is_running(); ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    return impl_->server.is_running() ? bound : -1;
}

void WhitelistServer::stop() {
    if (impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

}  // namespace rovwl::http
