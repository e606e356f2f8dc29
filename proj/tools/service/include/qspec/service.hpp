#pragma once

#include "qspec/io/payload.hpp"

#include <map>
#include <memory>
#include <string>

namespace qspec::service {

struct ServiceOptions {
    /// Finished jobs kept in memory; older results are evicted (410).
    std::size_t max_finished_jobs = 16;
    std::string cors_origin = "*";
    /// Workers for synchronous single-qubit scans.
    int workers = 1;
};

struct Response {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
    std::map<std::string, std::string> headers;
};

/// Query parameters in request order (repeated keys allowed).
using Query = std::multimap<std::string, std::string>;

/// HTTP API over the engine. handle() is transport independent; listen()
/// serves it with cpp-httplib.
class Service {
public:
    explicit Service(ServiceOptions options = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    Response handle(const std::string& method, const std::string& path, const Query& query, const std::string& body);

    /// Blocks until stop(). port 0 picks a free port, reported by port().
    bool listen(const std::string& host, int port);
    /// Binds and serves on a background thread; returns the bound port or -1.
    int start(const std::string& host, int port = 0);
    void stop();
    int port() const;

    /// Blocks until the job leaves queued/running (for tests and the CLI).
    void wait(const std::string& job_id);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace qspec::service
