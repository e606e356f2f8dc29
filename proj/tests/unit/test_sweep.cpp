#include "qspec/error.hpp"
#include "qspec/sweep.hpp"

#include <doctest.h>

using namespace qspec;

namespace {

SweepDef qubit_resonator(std::size_t points) {
    TunableTransmon t;
    t.EJmax = 20.0, t.EC = 0.25, t.d = 0.0, t.ncut = 15, t.truncated_dim = 3;
    Oscillator o;
    o.E_osc = 6.0, o.truncated_dim = 3;
    SweepDef def;
    def.hilbertspace.subsystems = {t, o};
    ProductTerm g;
    g.g = 0.05;
    g.factors = {OperatorRef{"n_operator", std::nullopt, 0}, OperatorRef{"annihilation_operator", std::nullopt, 1}};
    g.add_hc = true;
    def.hilbertspace.interactions = {g};
    def.axes = {Axis{"flux", linspace(0.0, 0.4, points)}};
    def.bindings = {UpdateBinding{"flux", 0, std::nullopt, "flux", 0.0, 1.0}};
    def.evals_count = 6;
    return def;
}

}  // namespace

TEST_CASE("bindings apply offset and scale") {
    SweepDef def = qubit_resonator(3);
    def.bindings[0].offset = 0.1;
    def.bindings[0].scale = 2.0;
    const HilbertSpaceDef hs = resolve_point(def, {0.2});
    CHECK(get_param(hs.subsystems[0], "flux") == doctest::Approx(0.5));
}

TEST_CASE("interaction strength is sweepable") {
    SweepDef def = qubit_resonator(1);
    def.axes.push_back(Axis{"g", {0.0, 0.1}});
    def.bindings.push_back(UpdateBinding{"g", std::nullopt, 0, "g", 0.0, 1.0});
    const HilbertSpaceDef hs = resolve_point(def, {0.0, 0.1});
    CHECK(std::get<ProductTerm>(hs.interactions[0]).g == cplx(0.1, 0.0));
}

TEST_CASE("result shapes and progress") {
    const SweepDef def = qubit_resonator(5);
    std::size_t last_done = 0, last_total = 0, calls = 0;
    const SweepResult r = run_sweep(def, [&](std::size_t done, std::size_t total) {
        CHECK(done >= last_done);
        last_done = done, last_total = total, ++calls;
    });
    CHECK(calls > 0);
    CHECK(last_done == last_total);
    CHECK(r.evals.shape() == std::vector<std::size_t>{5, 6});
    CHECK(r.evecs.shape() == std::vector<std::size_t>{5, 9, 6});
    CHECK(r.bare_evals.size() == 2);
    CHECK(r.labels.shape() == std::vector<std::size_t>{5, 6});
}

TEST_CASE("slices pick the nearest grid value, ties to the lower index") {
    const SweepResult r = run_sweep(qubit_resonator(5));  // 0, 0.1, ..., 0.4
    const SweepResult s = r.slice("flux", 0.15);
    CHECK(s.axes.empty());
    CHECK(s.evals.data() == std::vector<double>(r.evals.record(1).begin(), r.evals.record(1).end()));
    CHECK_THROWS_AS(r.slice("ng", 0.0), Error);
}

TEST_CASE("evecs can be skipped") {
    SweepDef def = qubit_resonator(2);
    def.store_evecs = false;
    CHECK(run_sweep(def).evecs.data().empty());
}

TEST_CASE("validation") {
    SweepDef def = qubit_resonator(2);
    def.bindings[0].field = "EL";
    CHECK_THROWS_AS(validate(def), Error);
    def = qubit_resonator(2);
    def.bindings[0].axis = "voltage";
    CHECK_THROWS_AS(validate(def), Error);
    def = qubit_resonator(2);
    def.axes.push_back(def.axes[0]);
    CHECK_THROWS_AS(validate(def), Error);
    def = qubit_resonator(2);
    def.bindings[0].field = "ncut";
    CHECK_THROWS_AS(validate(def), Error);
    def = qubit_resonator(2);
    def.axes[0].values.clear();
    CHECK_THROWS_AS(validate(def), Error);
}

TEST_CASE("failing points are named") {
    SweepDef def = qubit_resonator(2);
    def.axes[0] = Axis{"EC", {0.25, -1.0}};
    def.bindings[0] = UpdateBinding{"EC", 0, std::nullopt, "EC", 0.0, 1.0};
    try {
        run_sweep(def);
        FAIL("expected PointFailure");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::PointFailure);
        CHECK(e.field().find("EC") != std::string::npos);
    }
}

TEST_CASE("custom sweeps see each point") {
    SweepResult r = run_sweep(qubit_resonator(3));
    add_custom_sweep(r, "gap", [](const PointContext& p) {
        return std::vector<double>{p.dressed.evals(1) - p.dressed.evals(0), p.axis_values.at("flux")};
    });
    const auto& gap = r.custom.at("gap");
    CHECK(gap.shape() == std::vector<std::size_t>{3, 2});
    CHECK(gap.record(2)[1] == doctest::Approx(0.4));
    CHECK(gap.record(0)[0] == r.evals.record(0)[1] - r.evals.record(0)[0]);
}

TEST_CASE("transitions") {
    const SweepResult r = run_sweep(qubit_resonator(3));
    const TransitionSet all = transitions(r);
    CHECK(all.initial == std::vector<int>{0, 0});
    for (const auto& t : all.transitions) CHECK_FALSE(t.sideband);

    TransitionOptions qubit_only;
    qubit_only.subsystems = std::vector<int>{0};
    for (const auto& t : transitions(r, qubit_only).transitions) CHECK(t.changed_subsystems == std::vector<int>{0});

    TransitionOptions plain;
    plain.coloring = Coloring::Plain;
    const TransitionSet p = transitions(r, plain);
    REQUIRE_FALSE(p.transitions.empty());
    CHECK_FALSE(p.transitions[0].final_state);
    CHECK(p.transitions[0].dressed_index == 1);
    CHECK(p.transitions[0].energies[0] == r.evals.record(0)[1] - r.evals.record(0)[0]);

    TransitionOptions bad;
    bad.initial = std::vector<int>{5, 0};
    CHECK_THROWS_AS(transitions(r, bad), Error);

    const SweepResult two = run_sweep([] {
        SweepDef d = qubit_resonator(2);
        d.axes.push_back(Axis{"E_osc", {6.0, 6.5}});
        d.bindings.push_back(UpdateBinding{"E_osc", 1, std::nullopt, "E_osc", 0.0, 1.0});
        return d;
    }());
    CHECK_THROWS_AS(transitions(two), Error);
}
