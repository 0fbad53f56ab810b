#include "semret/server.hpp"

#include "semret/error.hpp"

#define CPPHTTPLIB_LISTEN_BACKLOG 1024
#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <csignal>
#include <iostream>
#include <pthread.h>
#include <thread>

namespace semret {

using ordered_json = nlohmann::ordered_json;

struct SearchServer::Impl {
    std::shared_ptr<const SearchEngine> engine;
    ServeConfig cfg;
    httplib::Server http;
};

namespace {

HttpReply error_reply(int status, const std::string& message)
{
    ordered_json j;
    j["error"] = message;
    return {status, j.dump(), "application/json"};
}

std::optional<std::size_t> positive_int(const ordered_json& body, const char* key)
{
    if (!body.contains(key) || body[key].is_null()) return std::nullopt;
    const auto& v = body[key];
    if (!v.is_number_integer() || v.get<long long>() < 1)
        throw std::invalid_argument(std::string("'") + key + "' must be a positive integer");
    return static_cast<std::size_t>(v.get<long long>());
}

} // namespace

SearchServer::SearchServer(std::shared_ptr<const SearchEngine> engine, ServeConfig cfg)
    : impl_(std::make_unique<Impl>())
{
    if (!engine) throw Error("SearchServer needs an engine");
    impl_->engine = std::move(engine);
    impl_->cfg = std::move(cfg);
    impl_->cfg.hybrid.validate();

    auto& http = impl_->http;
    const auto threads = impl_->cfg.threads;
    http.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    http.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });
    http.Post("/search", [this](const httplib::Request& req, httplib::Response& res) {
        const auto reply = handle_search(req.body);
        res.status = reply.status;
        res.set_content(reply.body, reply.content_type);
    });
}

SearchServer::~SearchServer() { stop(); }

HttpReply SearchServer::handle_search(std::string_view body) const
{
    const auto start = std::chrono::steady_clock::now();
    ordered_json req;
    try {
        req = ordered_json::parse(body);
    } catch (const std::exception&) {
        return error_reply(400, "request body is not valid JSON");
    }
    if (!req.is_object()) return error_reply(400, "request body must be a JSON object");
    if (!req.contains("query") || !req["query"].is_string()) return error_reply(400, "'query' must be a string");

    auto cfg = impl_->cfg.hybrid;
    try {
        if (auto k = positive_int(req, "k")) cfg.final_k = *k;
        if (auto p = positive_int(req, "nprobe")) cfg.nprobe = *p;
    } catch (const std::invalid_argument& e) {
        return error_reply(400, e.what());
    }

    std::vector<Candidate> candidates;
    try {
        candidates = hybrid_search(req["query"].get<std::string>(), *impl_->engine, cfg);
    } catch (const Error& e) {
        return error_reply(400, e.what());
    }

    ordered_json out;
    out["candidates"] = ordered_json::array();
    for (const auto& c : candidates) {
        ordered_json j;
        j["doc_id"] = c.doc_id;
        j["title"] = c.title;
        j["source"] = std::string(to_string(c.source));
        j["semantic_score"] = c.semantic_score ? ordered_json(*c.semantic_score) : ordered_json(nullptr);
        j["lexical_score"] = c.lexical_score ? ordered_json(*c.lexical_score) : ordered_json(nullptr);
        j["final_score"] = c.final_score;
        out["candidates"].push_back(std::move(j));
    }
    out["timing_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return {200, out.dump(), "application/json"};
}

int SearchServer::bind()
{
    auto& cfg = impl_->cfg;
    if (cfg.port == 0) {
        const int port = impl_->http.bind_to_any_port(cfg.host);
        if (port < 0) throw Error("cannot bind " + cfg.host);
        cfg.port = port;
        return port;
    }
    if (!impl_->http.bind_to_port(cfg.host, cfg.port))
        throw Error("cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
    return cfg.port;
}

void SearchServer::run() { impl_->http.listen_after_bind(); }

void SearchServer::stop()
{
    if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

int serve_until_signal(const ServeConfig& cfg)
{
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    // Blocked before any worker thread exists so only the waiter sees them.
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    std::unique_ptr<SearchServer> server;
    try {
        server = std::make_unique<SearchServer>(load_engine(cfg), cfg);
        const int port = server->bind();
        std::cerr << "serving on " << cfg.host << ":" << port << std::endl;
    } catch (const std::exception& e) {
        std::cerr << "startup failed: " << e.what() << std::endl;
        return 1;
    }

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        server->stop();
    });
    server->run();
    // run() may also return on its own; wake the waiter in that case.
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    std::cerr << "shutdown complete" << std::endl;
    return 0;
}

} // namespace semret
