#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "rovwl/quarantine.hpp"

namespace rovwl::http {

// Immutable view of the whitelist as of one pipeline run. Readers always see
// a complete snapshot; publishing swaps the pointer.
struct PublishedWhitelist {
    std::optional<CalDate> generation;  // last successful run_day date
    std::vector<wl::WhitelistEntry> entries;  // sorted by key
    std::unordered_map<RouteKey, wl::Provenance> index;

    static std::shared_ptr<const PublishedWhitelist> from_store(const wl::Store& s);

    std::string to_json() const;
    std::string to_csv() const;
    std::string generation_str() const {
        return generation ? generation->str() : std::string("none");
    }
};

// Read-only GET API: /whitelist, /whitelist/check?origin&prefix, /health.
class WhitelistServer {
public:
    WhitelistServer();
    ~WhitelistServer();
    WhitelistServer(const WhitelistServer&) = delete;
    WhitelistServer& operator=(const WhitelistServer&) = delete;

    void publish(std::shared_ptr<const PublishedWhitelist> snapshot);
    std::shared_ptr<const PublishedWhitelist> snapshot() const;

    // Binds and serves on a background thread. port == 0 picks a free port.
    // Returns the bound port, or -1 on failure.
    int start(const std::string& host, int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace rovwl::http
