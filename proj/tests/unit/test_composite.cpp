#include "oracles.hpp"
#include "qspec/composite.hpp"
#include "qspec/error.hpp"

#include <doctest.h>

using namespace qspec;

namespace {

ProductTerm coupling(cplx g, int a, const std::string& op_a, int b, const std::string& op_b, bool hc) {
    ProductTerm t;
    t.g = g;
    t.factors = {OperatorRef{op_a, std::nullopt, a}, OperatorRef{op_b, std::nullopt, b}};
    t.add_hc = hc;
    return t;
}

/// Resonant qubit and oscillator, g (sigma_- a^dag + h.c.).
HilbertSpaceDef jaynes_cummings(double w, double g) {
    GenericQubit q;
    q.E = w;
    Oscillator o;
    o.E_osc = w, o.truncated_dim = 5;
    HilbertSpaceDef def;
    def.subsystems = {q, o};
    def.interactions = {coupling(g, 0, "sm_operator", 1, "creation_operator", true)};
    return def;
}

}  // namespace

TEST_CASE("bare index and tuple are inverse") {
    const std::vector<int> dims{3, 2, 4};
    for (int i = 0; i < 24; ++i) CHECK(bare_index(dims, bare_tuple(dims, i)) == i);
    CHECK(bare_index(dims, {1, 0, 2}) == 1 * 8 + 0 * 4 + 2);
    CHECK(bare_index(dims, {3, 0, 0}) == -1);
}

TEST_CASE("vacuum Rabi splitting") {
    const double w = 5.0, g = 0.05;
    const HilbertSpaceDef def = jaynes_cummings(w, g);
    const Eigensystem es = dressed_eigensys(def, 5);
    // one-excitation doublet around E_g + w
    CHECK(es.evals(1) - es.evals(0) == doctest::Approx(w - g).epsilon(1e-12));
    CHECK(es.evals(2) - es.evals(0) == doctest::Approx(w + g).epsilon(1e-12));
    // two-excitation doublet splits by 2 g sqrt(2)
    CHECK(es.evals(4) - es.evals(3) == doctest::Approx(2.0 * g * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("lifted operators are Kronecker products in the bare eigenbasis") {
    const HilbertSpaceDef def = jaynes_cummings(5.0, 0.0);
    const auto bare = bare_spectra(def);
    const CMatrix lifted = lift_operator(def, bare, OperatorRef{"annihilation_operator", std::nullopt, 1});
    const auto [a, ad] = ladder_ops(5);
    (void)ad;
    const CMatrix table = bare[1].evecs.adjoint() * a * bare[1].evecs;
    CHECK((lifted - oracle::kron(CMatrix::Identity(2, 2), table)).norm() < 1e-14);
}

TEST_CASE("validation of interaction terms") {
    HilbertSpaceDef def = jaynes_cummings(5.0, 0.1);
    def.interactions = {coupling(0.1, 0, "sm_operator", 3, "creation_operator", true)};
    CHECK_THROWS_AS(validate(def), Error);
    def.interactions = {coupling(0.1, 0, "sm_operator", 1, "no_such_operator", true)};
    CHECK_THROWS_AS(validate(def), Error);
    def.interactions = {coupling(0.1, 0, "sm_operator", 1, "creation_operator", false)};
    try {
        assemble_hamiltonian(def);
        FAIL("expected NonHermitianTotal");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonHermitianTotal);
    }
    def.interactions = {RawMatrixTerm{CMatrix::Identity(3, 3)}};
    CHECK_THROWS_AS(assemble_hamiltonian(def), Error);
}

TEST_CASE("labels follow the dominant bare state") {
    const HilbertSpaceDef def = jaynes_cummings(5.0, 0.0);
    const auto dims = subsystem_dims(def);
    GenericQubit detuned;
    detuned.E = 6.0;
    HilbertSpaceDef d = def;
    d.subsystems[0] = detuned;
    d.interactions = {coupling(0.05, 0, "sm_operator", 1, "creation_operator", true)};
    const Eigensystem es = dressed_eigensys(d, 4);
    const auto labels = label_dressed_states(dims, es);
    REQUIRE(labels[0]);
    CHECK(labels[0]->excitations == std::vector<int>{0, 0});
    REQUIRE(labels[1]);
    CHECK(labels[1]->excitations == std::vector<int>{0, 1});
    CHECK(labels[1]->overlap > 0.99);
}

TEST_CASE("resonant states stay unlabeled") {
    const HilbertSpaceDef def = jaynes_cummings(5.0, 0.05);
    const Eigensystem es = dressed_eigensys(def, 3);
    const auto labels = label_dressed_states(subsystem_dims(def), es);
    CHECK_FALSE(labels[1]);  // equal superposition: overlap 0.5 is not above threshold
    CHECK_FALSE(labels[2]);
}

TEST_CASE("dispersive coefficients vanish without coupling") {
    const HilbertSpaceDef def = jaynes_cummings(5.0, 0.0);
    HilbertSpaceDef d = def;
    GenericQubit detuned;
    detuned.E = 6.0;
    d.subsystems[0] = detuned;
    const auto bare = bare_spectra(d);
    const auto dims = subsystem_dims(d);
    const Eigensystem es = dressed_eigensys(d, bare, bare_dimension(d));
    const auto c = dispersive_coefficients(dims, bare, es, label_dressed_states(dims, es));
    CHECK(c.chi_at(0, 1, 1, 1) == 0.0);
    CHECK(c.lamb_at(1, 1) == 0.0);
    CHECK(c.kerr_at(1, 1) == 0.0);
}
