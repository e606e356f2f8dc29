#include "cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::vector<const char*> argv{"qspec"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = qspec::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str(), r.err = err.str();
    return r;
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("qspec-cli-test-" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
        return (path / name).string();
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("spectrum writes json, csv and svg") {
    TempDir dir;
    const std::string in = dir.file("t.json", R"({"qubit": {"family": "Transmon"}, "scan": {"param": "ng", "values": [0, 0.5]}})");
    const Run r = run({"spectrum", "--in", in, "--out", (dir.path / "out").string()});
    REQUIRE(r.code == 0);
    for (const char* f : {"spectrum.json", "spectrum.csv", "spectrum.svg"}) CHECK(fs::exists(dir.path / "out" / f));
    CHECK(Json::parse(slurp(dir.path / "out" / "spectrum.json"))["kind"] == "spectrum");
    CHECK(slurp(dir.path / "out" / "spectrum.csv").rfind("# qspec spectrum", 0) == 0);
}

TEST_CASE("bare qubit documents and unit overrides") {
    TempDir dir;
    const std::string in = dir.file("q.json", R"({"family": "Transmon", "params": {"EJ": 15000, "EC": 300}})");
    const Run r = run({"spectrum", "--in", in, "--out", (dir.path / "o").string(), "--units", "MHz"});
    REQUIRE(r.code == 0);
    CHECK(Json::parse(slurp(dir.path / "o" / "spectrum.json"))["units"] == "MHz");
    const Run bad = run({"spectrum", "--in", in, "--out", (dir.path / "o").string(), "--units", "THz"});
    CHECK(bad.code == 2);
    CHECK(Json::parse(bad.err)["error"]["kind"] == "invalid-unit");
}

TEST_CASE("input errors exit with code 2") {
    TempDir dir;
    const Run missing = run({"spectrum", "--in", (dir.path / "nope.json").string()});
    CHECK(missing.code == 2);
    const std::string broken = dir.file("b.json", "{\"qubit\": ");
    const Run syntax = run({"spectrum", "--in", broken});
    CHECK(syntax.code == 2);
    CHECK(Json::parse(syntax.err)["error"]["kind"] == "syntax-error");
    CHECK(run({"frobnicate"}).code == 2);
}

TEST_CASE("validate reports findings") {
    TempDir dir;
    const Run ok = run({"validate", "--in", dir.file("ok.json", R"({"family": "Transmon"})")});
    CHECK(ok.code == 0);
    CHECK(Json::parse(ok.out)["valid"] == true);
    const Run bad = run({"validate", "--in", dir.file("bad.json", R"({"family": "Transmon", "params": {"EC": -1}})")});
    CHECK(bad.code == 2);
    CHECK(Json::parse(bad.out)["findings"][0]["field"] == "qubit.params.EC");
}

TEST_CASE("sweep archive layout") {
    TempDir dir;
    const std::string in = dir.file("s.json", R"({"sweep": {
        "hilbertspace": {"subsystems": [{"family": "Transmon", "params": {"ncut": 10, "truncated_dim": 3}},
                                        {"family": "Oscillator", "params": {"E_osc": 6, "truncated_dim": 2}}]},
        "axes": [{"name": "ng", "values": [0, 0.25, 0.5]}],
        "bindings": [{"axis": "ng", "subsystem": 0, "field": "ng"}], "evals_count": 4}})");
    const fs::path out = dir.path / "archive";
    REQUIRE(run({"sweep", "--in", in, "--out", out.string()}).code == 0);
    for (const char* f : {"axes.json", "evals.csv", "evals.json", "sweep.svg", "evecs.bin"}) CHECK(fs::exists(out / f));
    CHECK(fs::file_size(out / "evecs.bin") == 3u * 6u * 4u * 16u);
    const Json axes = Json::parse(slurp(out / "axes.json"));
    CHECK(axes["axes"][0]["name"] == "ng");
}

TEST_CASE("export-hamiltonian") {
    TempDir dir;
    const std::string in = dir.file("h.json", R"({"hilbertspace": {"subsystems": [{"family": "GenericQubit"}]}})");
    REQUIRE(run({"export-hamiltonian", "--in", in, "--out", (dir.path / "h").string(), "--storage", "coo"}).code == 0);
    const Json h = Json::parse(slurp(dir.path / "h" / "hamiltonian.json"));
    CHECK(h["header"]["storage"] == "coo");
    CHECK(h["matrix"]["re"] == Json::parse("[-2.5, 2.5]"));
}
