#pragma once

#include "semret/retrieval.hpp"

#include <memory>
#include <string>
#include <string_view>

namespace semret {

struct HttpReply {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// HTTP front end over a SearchEngine.
///   POST /search  {"query": string, "k": int?, "nprobe": int?}
///   GET  /healthz -> "ok"
class SearchServer {
public:
    SearchServer(std::shared_ptr<const SearchEngine> engine, ServeConfig cfg);
    ~SearchServer();
    SearchServer(const SearchServer&) = delete;
    SearchServer& operator=(const SearchServer&) = delete;

    /// Request handling without the network layer.
    HttpReply handle_search(std::string_view body) const;

    /// Binds cfg.host:cfg.port (port 0 picks a free port); returns the bound port.
    int bind();
    /// Serves until stop() is called. bind() must have succeeded.
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Loads artifacts, binds and serves until SIGINT/SIGTERM. Returns a process
/// exit code; startup failures print a diagnostic and return 1.
int serve_until_signal(const ServeConfig& cfg);

} // namespace semret
