#include "oracles.hpp"
#include "qspec/error.hpp"
#include "qspec/qubits.hpp"

#include <doctest.h>

using namespace qspec;

TEST_CASE("transmon matches the charge-basis oracle") {
    Transmon t;
    t.EJ = 12.0, t.EC = 0.35, t.ng = 0.27, t.ncut = 25;
    const RVector ev = eigenvals(t, 5);
    const auto ref = oracle::transmon_levels(12.0, 0.35, 0.27, 25, 5);
    for (int k = 0; k < 5; ++k) CHECK(ev(k) == doctest::Approx(ref[static_cast<std::size_t>(k)]).epsilon(1e-12));
}

TEST_CASE("tunable transmon uses the flux-dependent EJ") {
    TunableTransmon t;
    t.EJmax = 25.0, t.EC = 0.3, t.d = 0.15, t.flux = 0.31, t.ng = 0.1, t.ncut = 25;
    const double ej = oracle::tunable_EJ(25.0, 0.15, 0.31);
    CHECK(effective_EJ(t) == doctest::Approx(ej).epsilon(1e-14));
    const RVector ev = eigenvals(t, 4);
    const auto ref = oracle::transmon_levels(ej, 0.3, 0.1, 25, 4);
    for (int k = 0; k < 4; ++k) CHECK(ev(k) == doctest::Approx(ref[static_cast<std::size_t>(k)]).epsilon(1e-12));
}

TEST_CASE("cutoff estimate") {
    CHECK(min_ncut_estimate(30.02, 0.2) == 8);
    CHECK(min_ncut_estimate(10.0, 0.2) == 6);
}

TEST_CASE("families and defaults") {
    CHECK(family_names().size() == 10);
    for (auto name : family_names()) {
        const QubitSpec s = make_default(name);
        CHECK(family_name(s) == name);
        CHECK(check_spec(s).empty());
    }
    try {
        make_default("Transmonium");
        FAIL("expected SpecValidation");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SpecValidation);
        CHECK(e.field() == "family");
    }
}

TEST_CASE("parameter reflection") {
    const QubitSpec t = Transmon{};
    CHECK(has_param(t, "EJ"));
    CHECK_FALSE(has_param(t, "EL"));
    const QubitSpec u = with_param(t, "ncut", 11.6);
    CHECK(get_param(u, "ncut") == 12.0);
    CHECK_THROWS_AS(get_param(t, "EL"), Error);
    CHECK(std::isnan(get_param(Oscillator{}, "l_osc")));
}

TEST_CASE("validation names the offending field") {
    Transmon t;
    t.EC = -1.0;
    try {
        validate(t);
        FAIL("expected validation error");
    } catch (const Error& e) {
        CHECK(e.field() == "EC");
    }
    Transmon small;
    small.EJ = 30.0, small.EC = 0.2, small.ncut = 5;
    const auto issues = check_spec(small);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].severity == ValidationIssue::Severity::Warning);
    CHECK(issues[0].field == "ncut");
}

TEST_CASE("oscillator operators need a length for phi and n") {
    Oscillator o;
    CHECK_THROWS_AS(qubit_operator(o, "phi_operator"), Error);
    o.l_osc = 1.3;
    const CMatrix phi = qubit_operator(o, "phi_operator").dense();
    const auto [a, ad] = ladder_ops(o.truncated_dim);
    CHECK((phi - (1.3 / std::sqrt(2.0)) * (a + ad)).norm() < 1e-14);
}

TEST_CASE("matrix element tables are Hermitian for observables") {
    Transmon t;
    const CMatrix m = matrixelement_table(t, "n_operator", 5);
    CHECK((m - m.adjoint()).norm() < 1e-12);
    CHECK(std::abs(m(0, 0)) < 1e-10);  // parity at ng = 0
    CHECK(std::abs(m(0, 1)) > 0.1);
    CHECK_THROWS_AS(matrixelement_table(t, "phi_operator", 5), Error);
}

TEST_CASE("fluxonium is symmetric about half flux quantum") {
    Fluxonium f;
    f.cutoff = 60;
    const RVector a = eigenvals(with_param(f, "flux", 0.45), 4);
    const RVector b = eigenvals(with_param(f, "flux", 0.55), 4);
    for (int k = 0; k < 4; ++k) CHECK(a(k) == doctest::Approx(b(k)).epsilon(1e-10));
}

TEST_CASE("phase-space wavefunctions are normalized") {
    Transmon t;
    const std::vector<int> which{0, 1};
    const auto wfs = wavefunction(t, which, Representation::Phase);
    REQUIRE(wfs.size() == 2);
    for (const auto& w : wfs) {
        const auto& g = w.basis.at(0).grid;
        const auto p = w.render(WavefunctionMode::AbsSqr);
        double norm = 0.0;
        for (double v : p) norm += v * g.spacing();
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-3));
    }
    CHECK(has_potential(t));
    CHECK(potential(t, 0.0) == doctest::Approx(-t.EJ));
}

TEST_CASE("parameter scans") {
    Transmon t;
    const auto values = linspace(0.0, 0.5, 5);
    const auto serial = spectrum_vs_param(t, "ng", values, 3, 1);
    const auto parallel = spectrum_vs_param(t, "ng", values, 3, 3);
    CHECK(serial.data() == parallel.data());
    CHECK(serial.shape() == std::vector<std::size_t>{5, 3});
    const auto me = matelem_vs_param(t, "n_operator", "ng", values, 2, 1);
    CHECK(me.shape() == std::vector<std::size_t>{5, 2, 2});
    CHECK_THROWS_AS(spectrum_vs_param(t, "EL", values), Error);
}
