#include "qspec/error.hpp"
#include "qspec/noise.hpp"

#include <doctest.h>

#include <algorithm>

using namespace qspec;

namespace {

TunableTransmon tunable(double flux, double d = 0.1) {
    TunableTransmon t;
    t.EJmax = 20.0, t.EC = 0.5, t.d = d, t.flux = flux, t.ng = 0.3, t.ncut = 20;
    return t;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

TEST_CASE("supported channels follow the family") {
    const auto tt = supported_noise_channels(tunable(0.2));
    CHECK(tt.size() == 6);
    CHECK(contains(tt, "tphi_1_over_f_flux"));
    CHECK(contains(tt, "t1_charge_impedance"));
    CHECK_FALSE(contains(effective_noise_channels(tunable(0.2)), "t1_charge_impedance"));
    const auto fx = supported_noise_channels(Fluxonium{});
    CHECK(contains(fx, "t1_inductive"));
    CHECK(contains(fx, "t1_quasiparticle_tunneling"));
    CHECK(supported_noise_channels(Oscillator{}).empty());
    CHECK(channel_kind("tphi_1_over_f_cc") == ChannelKind::Dephasing);
    CHECK(channel_kind("t1_capacitive") == ChannelKind::Depolarization);
}

TEST_CASE("unsupported channels and bad options are rejected") {
    NoiseCall call;
    try {
        noise_channel(Transmon{}, "tphi_1_over_f_flux", call, {});
        FAIL("expected UnsupportedChannel");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnsupportedChannel);
    }
    call.options["T"] = -1.0;
    CHECK_THROWS_AS(noise_channel(tunable(0.2), "t1_capacitive", call, {}), Error);
    call.options.clear();
    call.options["Q_ind"] = 1e6;
    CHECK_THROWS_AS(noise_channel(tunable(0.2), "t1_capacitive", call, {}), Error);
    call.options.clear();
    call.i = 0, call.j = 0;
    CHECK_THROWS_AS(noise_channel(tunable(0.2), "t1_capacitive", call, {}), Error);
}

TEST_CASE("one over f density") {
    const SpectralDensity s = one_over_f_density(1e-6);
    CHECK(s(2.0) == doctest::Approx(2.0 * 3.141592653589793 * 1e-12 / 2.0));
    CHECK(s(-2.0) == s(2.0));
}

TEST_CASE("golden rule with a user operator and density") {
    const TunableTransmon t = tunable(0.2);
    const Operator n = qubit_operator(t, "n_operator");
    const CMatrix table = matrixelement_table(t, "n_operator", 2);
    const SpectralDensity flat{[](double) { return 1e4; }, std::nullopt};
    const CoherenceEstimate one_way = t1(t, 1, 0, n, flat, false, {}, true);
    const double expected_rate_Hz = std::norm(table(1, 0)) * 1e4;
    CHECK(one_way.value == doctest::Approx(expected_rate_Hz / 1e9).epsilon(1e-10));
    const CoherenceEstimate both = t1(t, 1, 0, n, flat, true, {}, true);
    CHECK(both.value == doctest::Approx(2.0 * one_way.value).epsilon(1e-12));
}

TEST_CASE("dephasing derivative matches a direct difference") {
    const TunableTransmon t = tunable(0.2);
    const double d = d_omega_d_lambda(t, "flux", 0, 1, {});
    auto omega = [&](double f) {
        const RVector ev = eigenvals(with_param(t, "flux", f), 2);
        return 2.0 * 3.141592653589793 * (ev(1) - ev(0)) * 1e9;
    };
    const double h = 1e-5;
    CHECK(d == doctest::Approx((omega(0.2 + h) - omega(0.2 - h)) / (2 * h)).epsilon(1e-6));
    CHECK_THROWS_AS(d_omega_d_lambda(t, "EL", 0, 1, {}), Error);
}

TEST_CASE("sweet spots give infinite dephasing times") {
    NoiseCall call;
    CHECK(std::isinf(noise_channel(tunable(0.0, 0.0), "tphi_1_over_f_flux", call, {}).value));
    CHECK(std::isfinite(noise_channel(tunable(0.2, 0.0), "tphi_1_over_f_flux", call, {}).value));
    call.get_rate = true;
    CHECK(noise_channel(tunable(0.0, 0.0), "tphi_1_over_f_flux", call, {}).value == 0.0);
}

TEST_CASE("rates and times are reciprocal") {
    NoiseCall time_call, rate_call;
    rate_call.get_rate = true;
    for (const auto& ch : supported_noise_channels(tunable(0.2))) {
        const double t = noise_channel(tunable(0.2), ch, time_call, {}).value;
        const double r = noise_channel(tunable(0.2), ch, rate_call, {}).value;
        CHECK(t * r == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("options change the estimate as expected") {
    NoiseCall a, b;
    a.options["Q_cap"] = 1e6;
    b.options["Q_cap"] = 2e6;
    const double ta = noise_channel(tunable(0.2), "t1_capacitive", a, {}).value;
    const double tb = noise_channel(tunable(0.2), "t1_capacitive", b, {}).value;
    CHECK(tb / ta == doctest::Approx(2.0).epsilon(1e-14));
    NoiseCall cold, hot;
    cold.options["T"] = 0.01;
    hot.options["T"] = 0.2;
    CHECK(noise_channel(tunable(0.2), "t1_capacitive", hot, {}).value <
          noise_channel(tunable(0.2), "t1_capacitive", cold, {}).value);
}

TEST_CASE("effective times combine channel rates") {
    EffectiveCall call;
    call.get_rate = true;
    const double total = t1_effective(tunable(0.2), call, {}).value;
    double sum = 0.0;
    NoiseCall nc;
    nc.get_rate = true;
    for (const auto& ch : effective_noise_channels(tunable(0.2)))
        if (channel_kind(ch) == ChannelKind::Depolarization) sum += noise_channel(tunable(0.2), ch, nc, {}).value;
    CHECK(total == doctest::Approx(sum).epsilon(1e-14));
    EffectiveCall bad;
    bad.channels = {std::make_pair(std::string("tphi_1_over_f_flux"), NoiseOptions{})};
    CHECK_THROWS_AS(t1_effective(tunable(0.2), bad, {}), Error);
}

TEST_CASE("coherence scans") {
    NoiseCall call;
    const auto out = coherence_vs_param(tunable(0.2), "flux", linspace(0.1, 0.3, 3),
                                        {"tphi_1_over_f_flux", "t1_capacitive", "t2_effective"}, call, {});
    CHECK(out.size() == 3);
    CHECK(out.at("t2_effective").shape() == std::vector<std::size_t>{3, 1});
    call.options["Q_ind"] = 1.0;
    CHECK_THROWS_AS(coherence_vs_param(tunable(0.2), "flux", {0.1}, {"t1_capacitive"}, call, {}), Error);
}

TEST_CASE("MHz context scales energies and times") {
    TunableTransmon mhz = tunable(0.2);
    mhz.EJmax *= 1e3, mhz.EC *= 1e3;
    NoiseCall call;
    const double t_ghz = noise_channel(tunable(0.2), "t1_capacitive", call, {}).value;  // ns
    const double t_mhz = noise_channel(mhz, "t1_capacitive", call, parse_units("MHz")).value;  // us
    CHECK(t_ghz / t_mhz == doctest::Approx(1e3).epsilon(1e-15));
}
