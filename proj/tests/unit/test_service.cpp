#include "qspec/service.hpp"

#include <doctest.h>
#include <httplib.h>

using namespace qspec;
using service::Query;
using service::Service;
using Json = nlohmann::json;

namespace {

const char* kSweep = R"({"sweep": {
    "hilbertspace": {"subsystems": [{"family": "TunableTransmon", "params": {"EJmax": 20, "EC": 0.25, "ncut": 15, "truncated_dim": 3}},
                                    {"family": "Oscillator", "params": {"E_osc": 6, "truncated_dim": 3}}],
                     "interactions": [{"type": "product", "g": 0.05, "add_hc": true,
                                       "operators": [{"subsystem": 0, "operator": "n_operator"},
                                                     {"subsystem": 1, "operator": "annihilation_operator"}]}]},
    "axes": [{"name": "flux", "values": {"linspace": [0, 0.4, 5]}}, {"name": "ng", "values": [0, 0.5]}],
    "bindings": [{"axis": "flux", "subsystem": 0, "field": "flux"}, {"axis": "ng", "subsystem": 0, "field": "ng"}],
    "evals_count": 6}})";

std::string submit(Service& svc, const std::string& body = kSweep) {
    const auto r = svc.handle("POST", "/v1/sweep", {}, body);
    REQUIRE(r.status == 202);
    return Json::parse(r.body)["id"];
}

}  // namespace

TEST_CASE("health and unknown routes") {
    Service svc;
    const auto health = svc.handle("GET", "/v1/health", {}, "");
    CHECK(health.status == 200);
    CHECK(Json::parse(health.body)["status"] == "ok");
    CHECK(svc.handle("GET", "/v1/nothing", {}, "").status == 404);
    CHECK(svc.handle("GET", "/v1/sweep/sw999999", {}, "").status == 404);
}

TEST_CASE("CORS preflight") {
    service::ServiceOptions opts;
    opts.cors_origin = "http://localhost:5173";
    Service svc(opts);
    const auto r = svc.handle("OPTIONS", "/v1/sweep", {}, "");
    CHECK(r.status == 204);
    CHECK(r.headers.at("Access-Control-Allow-Origin") == "http://localhost:5173");
}

TEST_CASE("synchronous spectrum") {
    Service svc;
    const auto ok = svc.handle("POST", "/v1/qubit/spectrum", {},
                               R"({"qubit": {"family": "Transmon"}, "scan": {"param": "ng", "values": [0, 0.5]}})");
    CHECK(ok.status == 200);
    CHECK(Json::parse(ok.body)["kind"] == "spectrum");
    const auto bad = svc.handle("POST", "/v1/qubit/spectrum", {}, R"({"qubit": {"family": "Qutrit"}})");
    CHECK(bad.status == 400);
    CHECK(Json::parse(bad.body)["error"]["field"] == "qubit.family");
    CHECK(svc.handle("POST", "/v1/qubit/spectrum", {}, "{").status == 400);
}

TEST_CASE("sweep job lifecycle") {
    Service svc;
    const std::string id = submit(svc);
    CHECK(id.rfind("sw", 0) == 0);
    svc.wait(id);
    const auto status = svc.handle("GET", "/v1/sweep/" + id, {}, "");
    CHECK(status.status == 200);
    const Json s = Json::parse(status.body);
    CHECK(s["state"] == "done");
    CHECK(s["steps_done"] == s["steps_total"]);

    const Query q{{"axis", "ng"}, {"value", "0"}, {"view", "evals"}};
    const auto slice = svc.handle("GET", "/v1/sweep/" + id + "/slice", q, "");
    CHECK(slice.status == 200);
    CHECK(slice.headers.at("X-Qspec-Job") == id);
    const Json p = Json::parse(slice.body);
    CHECK(p["evals"].size() == 5);

    const Query reordered{{"view", "evals"}, {"value", "0"}, {"axis", "ng"}};
    CHECK(svc.handle("GET", "/v1/sweep/" + id + "/slice", reordered, "").body == slice.body);

    const Query unknown{{"axis", "phase"}, {"value", "0"}};
    CHECK(svc.handle("GET", "/v1/sweep/" + id + "/slice", unknown, "").status == 400);
    const Query wf{{"view", "wavefunction"}, {"axis", "ng"}, {"value", "0"}};
    CHECK(svc.handle("GET", "/v1/sweep/" + id + "/slice", wf, "").status == 400);
}

TEST_CASE("failed jobs report the error") {
    Service svc;
    Json doc = Json::parse(kSweep);
    doc["sweep"]["axes"][0]["values"] = Json::array({0.1, -1.0});
    doc["sweep"]["bindings"][0]["field"] = "EC";
    const std::string id = submit(svc, doc.dump());
    svc.wait(id);
    const Json s = Json::parse(svc.handle("GET", "/v1/sweep/" + id, {}, "").body);
    CHECK(s["state"] == "failed");
    CHECK(s["error"]["kind"] == "point-failure");
    CHECK(svc.handle("GET", "/v1/sweep/" + id + "/slice", {}, "").status == 422);
}

TEST_CASE("invalid sweeps are rejected before queueing") {
    Service svc;
    Json doc = Json::parse(kSweep);
    doc["sweep"]["bindings"][0]["axis"] = "voltage";
    CHECK(svc.handle("POST", "/v1/sweep", {}, doc.dump()).status == 400);
}

TEST_CASE("finished jobs are evicted oldest first") {
    service::ServiceOptions opts;
    opts.max_finished_jobs = 1;
    Service svc(opts);
    const std::string first = submit(svc);
    svc.wait(first);
    const std::string second = submit(svc);
    svc.wait(second);
    CHECK(svc.handle("GET", "/v1/sweep/" + first, {}, "").status == 410);
    CHECK(svc.handle("GET", "/v1/sweep/" + second, {}, "").status == 200);
}

TEST_CASE("HTTP transport") {
    Service svc;
    const int port = svc.start("127.0.0.1", 0);
    REQUIRE(port > 0);
    httplib::Client client("127.0.0.1", port);
    const auto health = client.Get("/v1/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(health->get_header_value("Access-Control-Allow-Origin") == "*");
    const auto post = client.Post("/v1/sweep", kSweep, "application/json");
    REQUIRE(post);
    CHECK(post->status == 202);
    const std::string id = Json::parse(post->body)["id"];
    svc.wait(id);
    const auto slice = client.Get("/v1/sweep/" + id + "/slice?axis=ng&value=0.5&view=transitions");
    REQUIRE(slice);
    CHECK(slice->status == 200);
    CHECK(Json::parse(slice->body)["view"] == "transitions");
    svc.stop();
}
