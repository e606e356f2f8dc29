// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "cli.hpp"
#include "oracles.hpp"
#include "qspec/composite.hpp"
#include "qspec/noise.hpp"
#include "qspec/qubits.hpp"
#include "qspec/service.hpp"
#include "qspec/sweep.hpp"

#include <httplib.h>

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace fs = std::filesystem;
using namespace qspec;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string name;
    std::function<Outcome()> run;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

double rel(double a, double b, double scale) { return std::abs(a - b) / std::max(std::abs(b), scale); }

Outcome within(double err, double tol, const std::string& what = "max error") {
    return {err <= tol, fmt::format("{} {:.3e} (tol {:.0e})", what, err, tol)};
}

template <class T>
bool same_bits(const NamedGridArray<T>& a, const NamedGridArray<T>& b) {
    return a.shape() == b.shape() && a.data().size() == b.data().size() &&
           (a.data().empty() || std::memcmp(a.data().data(), b.data().data(), a.data().size() * sizeof(T)) == 0);
}

bool same_results(const SweepResult& a, const SweepResult& b) {
    bool ok = same_bits(a.evals, b.evals) && same_bits(a.evecs, b.evecs) && same_bits(a.labels, b.labels) &&
              same_bits(a.lamb, b.lamb) && same_bits(a.chi, b.chi) && same_bits(a.kerr, b.kerr) &&
              a.bare_evals.size() == b.bare_evals.size() && a.bare_evecs.size() == b.bare_evecs.size();
    for (std::size_t j = 0; ok && j < a.bare_evals.size(); ++j)
        ok = same_bits(a.bare_evals[j], b.bare_evals[j]) && same_bits(a.bare_evecs[j], b.bare_evecs[j]);
    return ok;
}

// ---- systems ----------------------------------------------------------------

ProductTerm product(double g, int a, const std::string& op_a, int b, const std::string& op_b) {
    ProductTerm t;
    t.g = g;
    t.factors = {OperatorRef{op_a, std::nullopt, a}, OperatorRef{op_b, std::nullopt, b}};
    t.add_hc = true;
    return t;
}

/// Two transmons capacitively coupled to a common oscillator.
HilbertSpaceDef three_mode_system(double g1, double g2) {
    Transmon t1;
    t1.EJ = 40.0, t1.EC = 0.2, t1.ng = 0.3, t1.ncut = 40, t1.truncated_dim = 4;
    Transmon t2;
    t2.EJ = 15.0, t2.EC = 0.15, t2.ng = 0.0, t2.ncut = 30, t2.truncated_dim = 4;
    Oscillator osc;
    osc.E_osc = 4.5, osc.truncated_dim = 4;
    HilbertSpaceDef def;
    def.subsystems = {t1, t2, osc};
    def.interactions = {product(g1, 0, "n_operator", 2, "annihilation_operator"),
                        product(g2, 1, "n_operator", 2, "creation_operator")};
    return def;
}

/// Flux-tunable version of the three-mode system on a flux x ng grid.
SweepDef flux_sweep(std::size_t n_flux, std::size_t n_ng, double g1, double g2) {
    TunableTransmon t1;
    t1.EJmax = 40.0, t1.EC = 0.2, t1.ng = 0.3, t1.ncut = 40, t1.truncated_dim = 4;
    TunableTransmon t2;
    t2.EJmax = 15.0, t2.EC = 0.15, t2.ncut = 30, t2.truncated_dim = 4;
    Oscillator osc;
    osc.E_osc = 4.5, osc.truncated_dim = 4;
    SweepDef def;
    def.hilbertspace.subsystems = {t1, t2, osc};
    def.hilbertspace.interactions = {product(g1, 0, "n_operator", 2, "annihilation_operator"),
                                     product(g2, 1, "n_operator", 2, "creation_operator")};
    def.axes = {Axis{"flux", linspace(0.0, 2.0, n_flux)}};
    def.bindings = {UpdateBinding{"flux", 0, std::nullopt, "flux", 0.0, 1.0},
                    UpdateBinding{"flux", 1, std::nullopt, "flux", 0.0, 1.2}};
    if (n_ng > 0) {
        def.axes.push_back(Axis{"ng", linspace(-0.5, 0.5, n_ng)});
        def.bindings.push_back(UpdateBinding{"ng", 1, std::nullopt, "ng", 0.0, 1.0});
    }
    def.evals_count = 20;
    return def;
}

// ---- criteria -----------------------------------------------------------------

Outcome oscillator_exactness() {
    double worst = 0.0;
    for (double E : {0.7, 5.0, 13.25}) {
        Oscillator o;
        o.E_osc = E, o.truncated_dim = 10;
        const RVector ev = eigenvals(o, 10);
        const auto ref = oracle::oscillator_levels(E, 10);
        for (int k = 0; k < 10; ++k) worst = std::max(worst, rel(ev(k), ref[k], E));
        for (double K : {0.01, 0.05}) {
            KerrOscillator ko;
            ko.E_osc = E, ko.K = K, ko.truncated_dim = 8;
            const RVector kv = eigenvals(ko, 8);
            const auto kref = oracle::kerr_levels(E, K, 8);
            std::vector<double> sorted = kref;
            std::sort(sorted.begin(), sorted.end());
            for (int k = 0; k < 8; ++k) worst = std::max(worst, rel(kv(k), sorted[k], E));
        }
    }
    return within(worst, 1e-12, "max relative error");
}

Outcome generic_qubit() {
    for (double E : {0.3, 5.0, 12.7}) {
        GenericQubit q;
        q.E = E;
        const RVector ev = eigenvals(q, 2);
        if (ev(0) != -E / 2 || ev(1) != E / 2)
            return {false, fmt::format("E = {}: got ({}, {})", E, ev(0), ev(1))};
    }
    return {true, "evals equal -E/2 and E/2 exactly for E in {0.3, 5, 12.7}"};
}

Outcome transmon_asymptotics() {
    const double EC = 0.2, EJ = 50.0 * EC;
    Transmon t;
    t.EJ = EJ, t.EC = EC, t.ng = 0.0;
    const RVector ev = eigenvals(t, 2);
    const double e01 = ev(1) - ev(0);
    const double asym = std::sqrt(8.0 * EJ * EC) - EC;
    const double asym_err = std::abs(e01 - asym) / asym;

    double lo = kInf, hi = -kInf, lib_err = 0.0;
    for (double ng : linspace(0.0, 1.0, 21)) {
        const auto ref = oracle::transmon_levels(EJ, EC, ng, 60, 2);
        const double d = ref[1] - ref[0];
        lo = std::min(lo, d), hi = std::max(hi, d);
        Transmon p = t;
        p.ng = ng;
        const RVector lv = eigenvals(p, 2);
        lib_err = std::max(lib_err, std::abs((lv(1) - lv(0)) - d));
    }
    const double dispersion = hi - lo;
    const bool pass = asym_err <= 0.02 && dispersion < 1e-4 * EC && lib_err <= 1e-9;
    return {pass, fmt::format("E01 {:.6f} vs {:.6f} ({:.2f}% off, tol 2%); dispersion {:.3e} (tol {:.0e}); "
                              "engine vs ncut=60 oracle {:.1e}",
                              e01, asym, 100.0 * asym_err, dispersion, 1e-4 * EC, lib_err)};
}

Outcome cutoff_criterion() {
    double worst = 0.0;
    std::string where;
    for (double ratio : {10.0, 50.0, 150.0}) {
        for (double ng : {0.0, 0.25, 0.5}) {
            const double EC = 0.2, EJ = ratio * EC;
            const int ncut = min_ncut_estimate(EJ, EC);
            Transmon t;
            t.EJ = EJ, t.EC = EC, t.ng = ng, t.ncut = ncut;
            const RVector ev = eigenvals(t, 3);
            const auto ref = oracle::transmon_levels(EJ, EC, ng, 2 * ncut, 3);
            for (int k = 0; k < 3; ++k) {
                const double e = std::abs(ev(k) - ref[k]) / std::abs(ref[k]);
                if (e > worst) worst = e, where = fmt::format("EJ/EC={} ng={} ncut={} level {}", ratio, ng, ncut, k);
            }
        }
    }
    Outcome o = within(worst, 1e-6, "max relative error");
    o.detail += " at " + where;
    return o;
}

Outcome flux_symmetry() {
    double worst = 0.0;
    std::string where;
    auto check = [&](const QubitSpec& base, const std::string& name) {
        for (double delta : {0.01, 0.1}) {
            const RVector a = eigenvals(with_param(base, "flux", 0.5 + delta), 6);
            const RVector b = eigenvals(with_param(base, "flux", 0.5 - delta), 6);
            for (int k = 0; k < 6; ++k) {
                const double e = std::abs(a(k) - b(k));
                if (e > worst) worst = e, where = fmt::format("{} delta={} level {}", name, delta, k);
            }
        }
    };
    check(Fluxonium{}, "Fluxonium");
    check(FluxQubit{}, "FluxQubit");
    Outcome o = within(worst, 1e-8, "max |E(0.5+d) - E(0.5-d)|");
    if (!where.empty()) o.detail += " at " + where;
    return o;
}

Outcome zero_pi_decoupling() {
    ZeroPi zp;
    zp.EJ = 10.0, zp.EL = 0.04, zp.ECJ = 20.0, zp.EC = 0.04, zp.ng = 0.1, zp.flux = 0.23;
    zp.dEJ = 0.05, zp.dCJ = 0.05, zp.ncut = 20;
    zp.grid = Grid1d{-6.0 * oracle::kPi, 6.0 * oracle::kPi, 120};
    FullZeroPi full;
    full.EJ = zp.EJ, full.EL = zp.EL, full.ECJ = zp.ECJ, full.EC = zp.EC, full.ng = zp.ng, full.flux = zp.flux;
    full.dEJ = zp.dEJ, full.dCJ = zp.dCJ, full.ncut = zp.ncut, full.grid = zp.grid;
    full.dC = 0.0, full.dEL = 0.0, full.zeta_cut = 12;

    const int n = 6;
    const RVector core = eigenvals(zp, n);
    const RVector coupled = eigenvals(full, n);
    const double w_zeta = std::sqrt(8.0 * zp.EC * zp.EL);
    const auto sums =
        oracle::sorted_sums({std::vector<double>(core.data(), core.data() + n), oracle::oscillator_levels(w_zeta, n)});
    double worst = 0.0;
    for (int k = 0; k < n; ++k) worst = std::max(worst, std::abs(coupled(k) - sums[static_cast<std::size_t>(k)]));
    return within(worst, 1e-7, "max |E_full - (E_zeropi + k w_zeta)|");
}

Outcome composite_zero_coupling() {
    const HilbertSpaceDef def = three_mode_system(0.0, 0.0);
    const int dim = bare_dimension(def);
    const Eigensystem dressed = dressed_eigensys(def, dim);
    const auto sums = oracle::sorted_sums({oracle::transmon_levels(40.0, 0.2, 0.3, 40, 4),
                                           oracle::transmon_levels(15.0, 0.15, 0.0, 30, 4),
                                           oracle::oscillator_levels(4.5, 4)});
    double worst = 0.0;
    for (int k = 0; k < dim; ++k) worst = std::max(worst, rel(dressed.evals(k), sums[static_cast<std::size_t>(k)], 1.0));
    return within(worst, 1e-10, fmt::format("max relative error over {} levels", dim));
}

Outcome dispersive_oracle() {
    Transmon t;
    t.EJ = 20.0, t.EC = 0.25, t.ng = 0.0, t.ncut = 30, t.truncated_dim = 5;
    Oscillator osc;
    osc.E_osc = 5.0, osc.truncated_dim = 6;
    HilbertSpaceDef def;
    def.subsystems = {t, osc};
    def.interactions = {product(0.02, 0, "n_operator", 1, "annihilation_operator")};

    const auto bare = bare_spectra(def);
    const auto dims = subsystem_dims(def);
    const Eigensystem dressed = dressed_eigensys(def, bare, 12);
    const auto labels = label_dressed_states(dims, dressed);
    const DispersiveCoefficients c = dispersive_coefficients(dims, bare, dressed, labels);

    const CMatrix h = assemble_hamiltonian(def, bare);
    auto pt = [&](int a, int b) { return oracle::second_order_energy(h, bare_index(dims, {a, b})); };
    auto diag = [&](int a, int b) { return h(bare_index(dims, {a, b}), bare_index(dims, {a, b})).real(); };
    const double lamb_q = pt(1, 0) - pt(0, 0) - (diag(1, 0) - diag(0, 0));
    const double lamb_o = pt(0, 1) - pt(0, 0) - (diag(0, 1) - diag(0, 0));
    const double chi = pt(1, 1) - pt(1, 0) - pt(0, 1) + pt(0, 0);

    const double e_lq = std::abs(c.lamb_at(0, 1) - lamb_q) / std::abs(lamb_q);
    const double e_lo = std::abs(c.lamb_at(1, 1) - lamb_o) / std::abs(lamb_o);
    const double e_chi = std::abs(c.chi_at(0, 1, 1, 1) - chi) / std::abs(chi);
    const double worst = std::max({e_lq, e_lo, e_chi});
    return {worst <= 0.10, fmt::format("chi {:.4e} vs PT {:.4e} ({:.2f}%); Lamb qubit {:.4e} vs {:.4e} ({:.2f}%); "
                                       "Lamb oscillator {:.4e} vs {:.4e} ({:.2f}%) (tol 10%)",
                                       c.chi_at(0, 1, 1, 1), chi, 100 * e_chi, c.lamb_at(0, 1), lamb_q, 100 * e_lq,
                                       c.lamb_at(1, 1), lamb_o, 100 * e_lo)};
}

Outcome interface_equivalence() {
    std::mt19937 rng(20240611);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto pick = [&](const std::vector<std::string>& v) { return v[static_cast<std::size_t>(rng() % v.size())]; };
    double worst = 0.0;
    const int trials = 12;
    for (int trial = 0; trial < trials; ++trial) {
        HilbertSpaceDef base;
        const int nsub = 2 + static_cast<int>(rng() % 2);
        for (int s = 0; s < nsub; ++s) {
            switch (rng() % 3) {
            case 0: {
                Transmon t;
                t.EJ = 5.0 + 25.0 * u(rng), t.EC = 0.2 + 0.3 * u(rng), t.ng = u(rng) - 0.5, t.ncut = 10;
                t.truncated_dim = 3 + static_cast<int>(rng() % 2);
                base.subsystems.push_back(t);
                break;
            }
            case 1: {
                Oscillator o;
                o.E_osc = 3.0 + 4.0 * u(rng), o.truncated_dim = 3 + static_cast<int>(rng() % 3);
                o.l_osc = 0.5 + u(rng);
                base.subsystems.push_back(o);
                break;
            }
            default: {
                GenericQubit q;
                q.E = 4.0 + 2.0 * u(rng);
                base.subsystems.push_back(q);
            }
            }
        }
        const int a = static_cast<int>(rng() % static_cast<unsigned>(nsub));
        const int b = (a + 1 + static_cast<int>(rng() % static_cast<unsigned>(nsub - 1))) % nsub;
        const std::string op_a = pick(operator_names(base.subsystems[static_cast<std::size_t>(a)]));
        const std::string op_b = pick(operator_names(base.subsystems[static_cast<std::size_t>(b)]));
        const double g = 0.05 + 0.2 * u(rng);
        const bool add_hc = rng() % 2 == 0;

        // independent lift: truncated-eigenbasis tables placed by Kronecker products
        const auto dims = subsystem_dims(base);
        CMatrix lifted = CMatrix::Identity(1, 1);
        for (int s = 0; s < nsub; ++s) {
            const auto& spec = base.subsystems[static_cast<std::size_t>(s)];
            const int d = dims[static_cast<std::size_t>(s)];
            CMatrix factor = CMatrix::Identity(d, d);
            if (s == a) factor = matrixelement_table(spec, op_a, d);
            if (s == b) factor = matrixelement_table(spec, op_b, d);
            lifted = oracle::kron(lifted, factor);
        }
        // a term without its conjugate must be Hermitian on its own
        const bool hc = add_hc || (lifted - lifted.adjoint()).cwiseAbs().maxCoeff() > 1e-12;
        ProductTerm pt;
        pt.g = g;
        pt.factors = {OperatorRef{op_a, std::nullopt, a}, OperatorRef{op_b, std::nullopt, b}};
        pt.add_hc = hc;
        ExpressionTerm et;
        et.expr = "c * A * B";
        et.bindings = {{"A", OperatorRef{op_a, std::nullopt, a}}, {"B", OperatorRef{op_b, std::nullopt, b}}};
        et.constants = {{"c", g}};
        et.add_hc = hc;

        CMatrix raw = g * lifted;
        if (hc) raw += raw.adjoint().eval();

        HilbertSpaceDef with_product = base, with_expr = base, with_raw = base;
        with_product.interactions = {pt};
        with_expr.interactions = {et};
        with_raw.interactions = {RawMatrixTerm{raw}};
        const CMatrix hp = assemble_hamiltonian(with_product);
        const CMatrix he = assemble_hamiltonian(with_expr);
        const CMatrix hr = assemble_hamiltonian(with_raw);
        const double scale = std::max(1.0, hr.cwiseAbs().maxCoeff());
        worst = std::max({worst, (hp - hr).cwiseAbs().maxCoeff() / scale, (he - hr).cwiseAbs().maxCoeff() / scale});

        // complex coupling through the product and raw paths
        const cplx gc(g, 0.1 * u(rng));
        ProductTerm pc = pt;
        pc.g = gc;
        pc.add_hc = true;
        CMatrix raw_c = gc * lifted;
        raw_c += raw_c.adjoint().eval();
        with_product.interactions = {pc};
        with_raw.interactions = {RawMatrixTerm{raw_c}};
        const CMatrix hpc = assemble_hamiltonian(with_product);
        const CMatrix hrc = assemble_hamiltonian(with_raw);
        worst = std::max(worst, (hpc - hrc).cwiseAbs().maxCoeff() / std::max(1.0, hrc.cwiseAbs().maxCoeff()));
    }
    return within(worst, 1e-12, fmt::format("max relative matrix difference over {} random systems", trials));
}

Outcome sweep_determinism() {
    SweepDef def = flux_sweep(21, 9, 0.1, 0.2);
    def.subsys_update_info = std::map<std::string, std::vector<int>>{{"flux", {0, 1}}, {"ng", {1}}};
    def.worker_count = 1;
    const SweepResult serial = run_sweep(def);
    def.worker_count = 4;
    const SweepResult parallel = run_sweep(def);
    def.worker_count = 1;
    def.subsys_update_info.reset();
    const SweepResult full = run_sweep(def);
    const bool workers_equal = same_results(serial, parallel);
    const bool info_equal = same_results(serial, full);
    return {workers_equal && info_equal,
            fmt::format("21x9 grid: workers 1 vs 4 {}, with vs without update info {}",
                        workers_equal ? "bit-identical" : "DIFFER", info_equal ? "bit-identical" : "DIFFER")};
}

Outcome transitions_criterion() {
    SweepDef def = flux_sweep(11, 0, 0.0, 0.0);
    def.evals_count = bare_dimension(def.hilbertspace);
    const SweepResult result = run_sweep(def);
    TransitionOptions one;
    one.sidebands = true;
    TransitionOptions two = one;
    two.photon_number = 2;
    const TransitionSet t1 = transitions(result, one);
    const TransitionSet t2 = transitions(result, two);
    if (t1.transitions.empty() || t1.transitions.size() != t2.transitions.size())
        return {false, "transition sets are empty or differ in size"};

    std::size_t bare_mismatch = 0, half_mismatch = 0, checked = 0;
    const std::size_t nsub = result.bare_evals.size();
    for (std::size_t k = 0; k < t1.transitions.size(); ++k) {
        const auto& tr = t1.transitions[k];
        const auto& f = *tr.final_state;
        for (std::size_t p = 0; p < result.grid_size(); ++p) {
            double final_energy = 0.0, initial_energy = 0.0;
            for (std::size_t j = 0; j < nsub; ++j) {
                const auto rec = result.bare_evals[j].record(p);
                final_energy += rec[static_cast<std::size_t>(f[j])];
                initial_energy += rec[0];
            }
            const double e = tr.energies[p];
            ++checked;
            if (e != final_energy - initial_energy) ++bare_mismatch;
            if (t2.transitions[k].energies[p] != e / 2.0) ++half_mismatch;
        }
    }
    return {bare_mismatch == 0 && half_mismatch == 0,
            fmt::format("{} transition energies: {} differ from bare differences, {} differ from half at n=2", checked,
                        bare_mismatch, half_mismatch)};
}

Outcome noise_identities() {
    std::vector<std::string> notes;
    bool pass = true;

    // detailed balance
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double db = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double omega = 2.0 * oracle::kPi * std::pow(10.0, 7.0 + 4.5 * u(rng));
        const double T = std::pow(10.0, -2.5 + 2.5 * u(rng));
        const SpectralDensity S = thermal_density([](double w) { return 1e-3 * std::pow(w, 0.3); }, T);
        const double x = phys::hbar * omega / (phys::kB * T);
        if (x > 600.0) continue;
        db = std::max(db, std::abs(S(omega) / S(-omega) / std::exp(x) - 1.0));
    }
    pass &= db <= 1e-8;
    notes.push_back(fmt::format("detailed balance {:.1e} (tol 1e-8)", db));

    const UnitContext ghz;
    TunableTransmon tt;
    tt.EJmax = 20.0, tt.EC = 0.5, tt.d = 0.0, tt.flux = 0.0, tt.ng = 0.3;
    // one-parameter tuning of a channel to T1 = 10 through an option it scales linearly with
    auto tuned = [&](const std::string& channel, const std::string& key, double base, bool time_grows) {
        NoiseCall c;
        c.options[key] = base;
        const double T = noise_channel(tt, channel, c, ghz).value;
        NoiseOptions o;
        o[key] = time_grows ? base * 10.0 / T : base * T / 10.0;
        return o;
    };
    const NoiseOptions cap = tuned("t1_capacitive", "Q_cap", 1e6, true);
    const NoiseOptions fbl = tuned("t1_flux_bias_line", "Z", 50.0, true);

    EffectiveCall e1;
    e1.channels = {{"t1_capacitive", cap}, {"t1_flux_bias_line", fbl}};
    const double t1e = t1_effective(tt, e1, ghz).value;
    const double t1_err = std::abs(t1e - 5.0) / 5.0;
    pass &= t1_err <= 4e-16;
    notes.push_back(fmt::format("T1eff(10, 10) = {:.17g}", t1e));

    EffectiveCall e2;
    e2.channels = {{"t1_capacitive", cap}, {"tphi_1_over_f_flux", {}}};
    NoiseCall flux_call;
    const double tphi = noise_channel(tt, "tphi_1_over_f_flux", flux_call, ghz).value;
    const double t2e = t2_effective(tt, e2, ghz).value;
    const double t2_err = std::abs(t2e - 20.0) / 20.0;
    pass &= std::isinf(tphi) && t2_err <= 4e-16;
    notes.push_back(fmt::format("T2eff(Tphi = {}, T1 = 10) = {:.17g}", tphi, t2e));

    TunableTransmon off = tt;
    off.d = 0.1, off.flux = 0.2;
    NoiseCall ca, cb;
    ca.options["A_flux"] = 1e-6;
    cb.options["A_flux"] = 3e-6;
    const double ta = noise_channel(off, "tphi_1_over_f_flux", ca, ghz).value;
    const double tb = noise_channel(off, "tphi_1_over_f_flux", cb, ghz).value;
    const double scaling = std::abs(ta / tb - 3.0) / 3.0;
    pass &= scaling <= 4e-16;
    notes.push_back(fmt::format("Tphi(A)/Tphi(3A) = {:.17g}", ta / tb));

    std::vector<std::string> sweet;
    for (double flux : {0.0, 0.5}) {
        TunableTransmon s = tt;
        s.flux = flux, s.ng = 0.0;
        const double t = noise_channel(s, "tphi_1_over_f_flux", flux_call, ghz).value;
        pass &= std::isinf(t);
        sweet.push_back(fmt::format("flux {}: {}", flux, t));
    }
    notes.push_back(fmt::format("sweet spots {}", fmt::join(sweet, ", ")));
    return {pass, fmt::format("{}", fmt::join(notes, "; "))};
}

Outcome unit_covariance() {
    const UnitContext ghz{Unit::GHz}, mhz{Unit::MHz};
    double worst = 0.0;
    std::string where;
    int checked = 0;
    auto compare = [&](const std::string& what, double g, double m, bool rate) {
        ++checked;
        if (std::isinf(g) && std::isinf(m)) return;
        const double ratio = rate ? m / g : g / m;
        const double e = std::abs(ratio / 1e3 - 1.0);
        if (!(e <= worst)) worst = e, where = what;
    };
    auto scaled = [](const QubitSpec& spec) {
        QubitSpec out = spec;
        for (const auto& p : param_list(spec))
            if (!p.integer && !p.optional && p.name.front() == 'E') out = with_param(out, p.name, 1e3 * get_param(spec, p.name));
        return out;
    };
    TunableTransmon tt;
    tt.EJmax = 20.0, tt.EC = 0.5, tt.d = 0.1, tt.flux = 0.2, tt.ng = 0.3;
    Fluxonium fx;
    fx.flux = 0.3, fx.cutoff = 60;
    for (const QubitSpec& spec : {QubitSpec{tt}, QubitSpec{fx}}) {
        const QubitSpec big = scaled(spec);
        for (bool rate : {false, true}) {
            NoiseCall call;
            call.get_rate = rate;
            for (const auto& ch : supported_noise_channels(spec))
                compare(fmt::format("{} {}", family_name(spec), ch), noise_channel(spec, ch, call, ghz).value,
                        noise_channel(big, ch, call, mhz).value, rate);
            EffectiveCall ec;
            ec.get_rate = rate;
            compare(fmt::format("{} t1_effective", family_name(spec)), t1_effective(spec, ec, ghz).value,
                    t1_effective(big, ec, mhz).value, rate);
            compare(fmt::format("{} t2_effective", family_name(spec)), t2_effective(spec, ec, ghz).value,
                    t2_effective(big, ec, mhz).value, rate);
        }
    }
    Outcome o = within(worst, 1e-12, fmt::format("max |ratio/1e3 - 1| over {} outputs", checked));
    if (!where.empty()) o.detail += " at " + where;
    return o;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

int run_cli(std::vector<std::string> args) {
    std::vector<const char*> argv{"qspec"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    if (code != 0) std::cerr << err.str();
    return code;
}

Outcome cli_service_parity() {
    const fs::path dir = fs::temp_directory_path() / fmt::format("qspec-acceptance-{}", ::getpid());
    fs::create_directories(dir);
    const std::string spectrum_doc =
        R"({"qubit": {"family": "TunableTransmon", "params": {"EJmax": 30, "EC": 0.4, "d": 0.05, "flux": 0.1, "ng": 0.2, "ncut": 25}},
            "scan": {"param": "flux", "values": {"linspace": [0, 0.5, 11]}}, "evals_count": 4,
            "matrix_elements": {"operator": "n_operator", "select": 3}})";
    const std::string sweep_doc =
        R"({"sweep": {"hilbertspace": {"subsystems": [
              {"family": "TunableTransmon", "params": {"EJmax": 40, "EC": 0.2, "ng": 0.3, "ncut": 30, "truncated_dim": 3}},
              {"family": "Oscillator", "params": {"E_osc": 4.5, "truncated_dim": 3}}],
            "interactions": [{"type": "product", "g": 0.1,
              "operators": [{"subsystem": 0, "operator": "n_operator"}, {"subsystem": 1, "operator": "annihilation_operator"}],
              "add_hc": true}]},
          "axes": [{"name": "flux", "values": {"linspace": [0, 0.5, 6]}}, {"name": "ng", "values": [0, 0.25]}],
          "bindings": [{"axis": "flux", "subsystem": 0, "field": "flux"}, {"axis": "ng", "subsystem": 0, "field": "ng"}],
          "evals_count": 6}})";
    write_text(dir / "spectrum.in.json", spectrum_doc);
    write_text(dir / "sweep.in.json", sweep_doc);

    if (run_cli({"spectrum", "--in", (dir / "spectrum.in.json").string(), "--out", (dir / "spec").string()}) != 0 ||
        run_cli({"transitions", "--in", (dir / "sweep.in.json").string(), "--out", (dir / "tr").string(), "--slice",
                 "ng=0.25", "--sidebands"}) != 0)
        return {false, "CLI run failed"};
    const std::string cli_spectrum = read_file(dir / "spec" / "spectrum.json");
    const std::string cli_transitions = read_file(dir / "tr" / "transitions.json");

    service::Service svc;
    const int port = svc.start("127.0.0.1", 0);
    if (port <= 0) return {false, "service failed to bind"};
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(120, 0);
    const auto spec_res = client.Post("/v1/qubit/spectrum", spectrum_doc, "application/json");
    const auto job_res = client.Post("/v1/sweep", sweep_doc, "application/json");
    std::string svc_spectrum, svc_transitions;
    if (spec_res && spec_res->status == 200) svc_spectrum = spec_res->body;
    if (job_res && job_res->status == 202) {
        const std::string id = nlohmann::json::parse(job_res->body)["id"];
        svc.wait(id);
        const auto tr_res = client.Get("/v1/sweep/" + id + "/slice?axis=ng&value=0.25&view=transitions&sidebands=true");
        if (tr_res && tr_res->status == 200) svc_transitions = tr_res->body;
    }
    svc.stop();
    fs::remove_all(dir);

    const bool spectrum_equal = !cli_spectrum.empty() && cli_spectrum == svc_spectrum;
    const bool transitions_equal = !cli_transitions.empty() && cli_transitions == svc_transitions;
    return {spectrum_equal && transitions_equal,
            fmt::format("spectrum payload {} ({} bytes), transitions payload {} ({} bytes)",
                        spectrum_equal ? "byte-identical" : "DIFFERS", cli_spectrum.size(),
                        transitions_equal ? "byte-identical" : "DIFFERS", cli_transitions.size())};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"oscillator-exactness", oscillator_exactness},
        {"generic-qubit", generic_qubit},
        {"transmon-asymptotics", transmon_asymptotics},
        {"cutoff-criterion", cutoff_criterion},
        {"flux-symmetries", flux_symmetry},
        {"zero-pi-decoupling", zero_pi_decoupling},
        {"composite-zero-coupling", composite_zero_coupling},
        {"dispersive-oracle", dispersive_oracle},
        {"interface-equivalence", interface_equivalence},
        {"sweep-determinism", sweep_determinism},
        {"transitions", transitions_criterion},
        {"noise-identities", noise_identities},
        {"unit-covariance", unit_covariance},
        {"cli-service-parity", cli_service_parity},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        fmt::print("{} {}: {} [{:.2f} s]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail, secs);
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
