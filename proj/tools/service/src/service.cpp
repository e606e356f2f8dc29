#include "qspec/service.hpp"

#include "qspec/error.hpp"
#include "qspec/io/svg.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <atomic>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <regex>
#include <set>
#include <thread>

namespace qspec::service {

using io::Json;

namespace {

enum class State { Queued, Running, Done, Failed };

const char* state_name(State s) {
    switch (s) {
    case State::Queued: return "queued";
    case State::Running: return "running";
    case State::Done: return "done";
    case State::Failed: return "failed";
    }
    return "failed";
}

struct Job {
    std::string id;
    io::SweepRequest request;
    State state = State::Queued;
    std::size_t done = 0;
    std::size_t total = 0;
    Json error;
    std::shared_ptr<const SweepResult> result;
    std::uint64_t last_access = 0;
};

struct Cancelled {};

Response json_response(int status, const Json& body) {
    Response r;
    r.status = status;
    r.body = io::dump_payload(body);
    return r;
}

Response error_response(int status, const std::string& kind, const std::string& message, const std::string& field = {}) {
    Json e{{"kind", kind}, {"message", message}};
    if (!field.empty()) e["field"] = field;
    return json_response(status, Json{{"error", e}});
}

Response engine_error(const Error& e) {
    return error_response(is_input_error(e.kind()) ? 400 : 422, std::string(to_string(e.kind())), e.what(), e.field());
}

}  // namespace

struct Service::Impl {
    ServiceOptions options;

    std::mutex mutex;  // guards the job table
    std::condition_variable changed;
    std::map<std::string, std::shared_ptr<Job>> jobs;
    std::set<std::string> evicted;
    std::deque<std::shared_ptr<Job>> queue;
    std::uint64_t next_id = 1;
    std::uint64_t clock = 0;
    bool stopping = false;
    std::thread runner;

    httplib::Server server;
    std::thread server_thread;
    std::atomic<int> bound_port{-1};

    explicit Impl(ServiceOptions o) : options(std::move(o)) { runner = std::thread([this] { run(); }); }

    ~Impl() {
        {
            std::lock_guard lock(mutex);
            stopping = true;
        }
        changed.notify_all();
        runner.join();
    }

    void run() {
        for (;;) {
            std::shared_ptr<Job> job;
            {
                std::unique_lock lock(mutex);
                changed.wait(lock, [&] { return stopping || !queue.empty(); });
                if (stopping) return;
                job = queue.front();
                queue.pop_front();
                job->state = State::Running;
            }
            changed.notify_all();
            std::shared_ptr<SweepResult> result;
            Json error;
            try {
                result = std::make_shared<SweepResult>(run_sweep(job->request.def, [&](std::size_t done, std::size_t total) {
                    std::lock_guard lock(mutex);
                    if (stopping) throw Cancelled{};
                    job->done = done;
                    job->total = total;
                }));
            } catch (const Cancelled&) {
                error = Json{{"kind", "Cancelled"}, {"message", "service stopped"}};
            } catch (const Error& e) {
                error = Json{{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}, {"field", e.field()}};
            } catch (const std::exception& e) {
                error = Json{{"kind", "InternalError"}, {"message", e.what()}};
            }
            {
                std::lock_guard lock(mutex);
                if (result) {
                    job->result = std::move(result);
                    job->state = State::Done;
                    job->done = job->total;
                } else {
                    job->error = std::move(error);
                    job->state = State::Failed;
                }
                job->last_access = ++clock;
                evict_locked();
            }
            changed.notify_all();
        }
    }

    void evict_locked() {
        for (;;) {
            std::size_t finished = 0;
            std::shared_ptr<Job> oldest;
            for (const auto& [id, job] : jobs) {
                if (job->state != State::Done && job->state != State::Failed) continue;
                ++finished;
                if (!oldest || job->last_access < oldest->last_access) oldest = job;
            }
            if (finished <= options.max_finished_jobs || !oldest) return;
            evicted.insert(oldest->id);
            jobs.erase(oldest->id);
        }
    }

    std::string submit(io::SweepRequest request) {
        auto job = std::make_shared<Job>();
        job->request = std::move(request);
        job->total = job->request.def.axes.empty() ? 0 : 1;
        std::size_t total = 1;
        for (const auto& a : job->request.def.axes) total *= a.values.size();
        job->total = total;
        {
            std::lock_guard lock(mutex);
            job->id = fmt::format("sw{:06d}", next_id++);
            job->last_access = ++clock;
            jobs.emplace(job->id, job);
            queue.push_back(job);
        }
        changed.notify_all();
        return job->id;
    }

    /// Looks up a job and touches it; sets `response` on 404 / 410.
    std::shared_ptr<Job> find(const std::string& id, Response& response) {
        std::lock_guard lock(mutex);
        auto it = jobs.find(id);
        if (it == jobs.end()) {
            if (evicted.count(id))
                response = error_response(410, "Evicted",
                                          "result of job '" + id + "' was evicted; re-submit the sweep definition");
            else
                response = error_response(404, "NotFound", "unknown job '" + id + "'");
            return nullptr;
        }
        it->second->last_access = ++clock;
        return it->second;
    }

    Json status_json(const Job& job) {
        std::lock_guard lock(mutex);
        Json s{{"id", job.id},
               {"state", state_name(job.state)},
               {"progress", job.state == State::Done ? 1.0
                            : job.total ? static_cast<double>(job.done) / static_cast<double>(job.total)
                                        : 0.0},
               {"steps_done", job.done},
               {"steps_total", job.total},
               {"units", std::string(job.request.units.name())},
               {"input", job.request.input}};
        if (job.state == State::Failed) s["error"] = job.error;
        return s;
    }

    Response slice(const std::string& id, const Query& query) {
        Response r;
        auto job = find(id, r);
        if (!job) return r;
        std::shared_ptr<const SweepResult> result;
        {
            std::lock_guard lock(mutex);
            if (job->state == State::Failed) {
                Json body{{"error", job->error}};
                return json_response(422, body);
            }
            if (job->state != State::Done)
                return error_response(409, "NotReady", fmt::format("job '{}' is {}", id, state_name(job->state)));
            result = job->result;
        }
        io::SliceQuery q;
        std::vector<std::string> axes, values;
        for (const auto& [k, v] : query) {
            if (k == "axis")
                axes.push_back(v);
            else if (k == "value")
                values.push_back(v);
            else if (k == "view")
                q.view = v;
            else
                q.params[k] = v;
        }
        if (axes.size() != values.size())
            return error_response(400, "BadQuery", "every axis needs exactly one value", "value");
        for (std::size_t i = 0; i < axes.size(); ++i) {
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(values[i], &used);
                if (used != values[i].size()) throw std::invalid_argument(values[i]);
            } catch (const std::exception&) {
                return error_response(400, "BadQuery", "value '" + values[i] + "' is not a number", "value");
            }
            q.fixes.emplace_back(axes[i], v);
        }
        Response out = json_response(200, io::slice_view_payload(job->request, *result, q));
        out.headers["X-Qspec-Job"] = id;
        return out;
    }

    Response route(const std::string& method, const std::string& path, const Query& query, const std::string& body) {
        static const std::regex job_path(R"(^/v1/sweep/([A-Za-z0-9_-]+)$)");
        static const std::regex slice_path(R"(^/v1/sweep/([A-Za-z0-9_-]+)/slice$)");
        std::smatch m;
        if (method == "OPTIONS") {
            Response r;
            r.status = 204;
            return r;
        }
        if (method == "GET" && path == "/v1/health") {
            Json units = Json::array();
            for (auto u : supported_units()) units.push_back(std::string(u));
            return json_response(200, Json{{"status", "ok"}, {"version", io::kVersion}, {"units", units}});
        }
        if (method == "POST" && path == "/v1/qubit/spectrum")
            return json_response(200, io::spectrum_payload(io::parse_document(body), options.workers));
        if (method == "POST" && path == "/v1/sweep") {
            const std::string id = submit(io::sweep_request(io::parse_document(body)));
            Response r = json_response(202, Json{{"id", id}, {"state", "queued"}, {"status_url", "/v1/sweep/" + id}});
            r.headers["Location"] = "/v1/sweep/" + id;
            return r;
        }
        if (method == "GET" && std::regex_match(path, m, job_path)) {
            Response r;
            auto job = find(m[1].str(), r);
            if (!job) return r;
            return json_response(200, status_json(*job));
        }
        if (method == "GET" && std::regex_match(path, m, slice_path)) return slice(m[1].str(), query);
        return error_response(404, "NotFound", method + " " + path + " is not an endpoint");
    }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() { stop(); }

Response Service::handle(const std::string& method, const std::string& path, const Query& query, const std::string& body) {
    Response r;
    try {
        r = impl_->route(method, path, query, body);
    } catch (const Error& e) {
        r = engine_error(e);
    } catch (const std::exception& e) {
        r = error_response(500, "InternalError", e.what());
    }
    r.headers["Access-Control-Allow-Origin"] = impl_->options.cors_origin;
    r.headers["Access-Control-Allow-Methods"] = "GET, POST, OPTIONS";
    r.headers["Access-Control-Allow-Headers"] = "Content-Type";
    r.headers["Access-Control-Expose-Headers"] = "X-Qspec-Job, Location";
    return r;
}

namespace {

void install_routes(httplib::Server& server, Service& service) {
    auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
        Query q(req.params.begin(), req.params.end());
        Response r = service.handle(req.method, req.path, q, req.body);
        res.status = r.status;
        for (const auto& [k, v] : r.headers) res.set_header(k, v);
        if (!r.body.empty()) res.set_content(r.body, r.content_type);
    };
    server.Get(".*", forward);
    server.Post(".*", forward);
    server.Options(".*", forward);
}

}  // namespace

bool Service::listen(const std::string& host, int port) {
    install_routes(impl_->server, *this);
    if (port == 0) {
        const int p = impl_->server.bind_to_any_port(host);
        if (p < 0) return false;
        impl_->bound_port = p;
        return impl_->server.listen_after_bind();
    }
    impl_->bound_port = port;
    return impl_->server.listen(host, port);
}

int Service::start(const std::string& host, int port) {
    install_routes(impl_->server, *this);
    const int p = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (p < 0) return -1;
    impl_->bound_port = p;
    impl_->server_thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return p;
}

void Service::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->server_thread.joinable()) impl_->server_thread.join();
}

int Service::port() const { return impl_->bound_port; }

void Service::wait(const std::string& job_id) {
    std::unique_lock lock(impl_->mutex);
    impl_->changed.wait(lock, [&] {
        auto it = impl_->jobs.find(job_id);
        return it == impl_->jobs.end() || it->second->state == State::Done || it->second->state == State::Failed;
    });
}

}  // namespace qspec::service
