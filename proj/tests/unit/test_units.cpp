#include "qspec/error.hpp"
#include "qspec/units.hpp"

#include <doctest.h>

using namespace qspec;

TEST_CASE("default unit is GHz") {
    const UnitContext ctx;
    CHECK(ctx.unit == Unit::GHz);
    CHECK(ctx.scale_to_Hz() == 1e9);
    CHECK(supported_units()[0] == "GHz");
}

TEST_CASE("parse_units covers every supported name") {
    CHECK(parse_units("GHz").scale_to_Hz() == 1e9);
    CHECK(parse_units("MHz").scale_to_Hz() == 1e6);
    CHECK(parse_units("kHz").scale_to_Hz() == 1e3);
    CHECK(parse_units("Hz").scale_to_Hz() == 1.0);
    for (auto name : supported_units()) CHECK(parse_units(name).name() == name);
}

TEST_CASE("unknown unit names are rejected") {
    for (const char* bad : {"ghz", "THz", "", "GHz "}) {
        try {
            parse_units(bad);
            FAIL("expected InvalidUnit for '" << bad << "'");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::InvalidUnit);
            CHECK(is_input_error(e.kind()));
        }
    }
}

TEST_CASE("standard unit conversion round trips") {
    const UnitContext mhz = parse_units("MHz");
    CHECK(to_standard_units(250.0, mhz) == doctest::Approx(2.5e8));
    CHECK(from_standard_units(2.5e8, mhz) == doctest::Approx(250.0));
    CHECK(units_scale_factor(mhz) == 1e6);
    for (double v : {0.0, 1.0, 5.25, 1e-3}) CHECK(from_standard_units(to_standard_units(v, mhz), mhz) == doctest::Approx(v));
}

TEST_CASE("error kinds have stable names") {
    CHECK(to_string(ErrorKind::SpecValidation) == "spec-validation");
    CHECK(to_string(ErrorKind::InvalidUnit) == "invalid-unit");
    CHECK_FALSE(is_input_error(ErrorKind::SolverFailure));
}
