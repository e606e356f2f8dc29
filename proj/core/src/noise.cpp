#include "qspec/noise.hpp"

#include "qspec/error.hpp"
#include "qspec/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace qspec {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDefaultT = 0.015;
constexpr double kDefaultOmegaLow = 2.0 * kPi;
constexpr double kDefaultTExp = 1e-5;

struct ChannelInfo {
    const char* name;
    ChannelKind kind;
    std::vector<std::string> keys;
};

const std::vector<ChannelInfo>& registry() {
    static const std::vector<ChannelInfo> r{
        {"tphi_1_over_f_flux", ChannelKind::Dephasing, {"A_flux", "A_noise", "omega_low", "t_exp"}},
        {"tphi_1_over_f_cc", ChannelKind::Dephasing, {"A_cc", "A_noise", "omega_low", "t_exp"}},
        {"tphi_1_over_f_ng", ChannelKind::Dephasing, {"A_ng", "A_noise", "omega_low", "t_exp"}},
        {"t1_capacitive", ChannelKind::Depolarization, {"T", "Q_cap"}},
        {"t1_flux_bias_line", ChannelKind::Depolarization, {"T", "M", "Z"}},
        {"t1_charge_impedance", ChannelKind::Depolarization, {"T", "Z"}},
        {"t1_inductive", ChannelKind::Depolarization, {"T", "Q_ind"}},
        {"t1_quasiparticle_tunneling", ChannelKind::Depolarization, {"T", "x_qp", "Delta", "Y_qp"}},
    };
    return r;
}

const ChannelInfo& info(const std::string& name) {
    for (const auto& c : registry())
        if (name == c.name) return c;
    throw Error(ErrorKind::UnsupportedChannel, fmt::format("unknown noise channel '{}'", name), name);
}

bool is_function_key(const std::string& key) {
    return key == "Q_cap" || key == "Q_ind" || key == "Z" || key == "Y_qp";
}

void check_options(const std::string& channel, const NoiseOptions& options) {
    const auto& keys = info(channel).keys;
    for (const auto& [key, value] : options) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw Error(ErrorKind::BadOverride, fmt::format("{} does not accept option '{}'", channel, key), key);
        if (const auto* d = std::get_if<double>(&value)) {
            if (!std::isfinite(*d) || *d <= 0.0)
                throw Error(ErrorKind::BadOverride, fmt::format("option '{}' must be finite and > 0", key), key);
        } else if (!is_function_key(key)) {
            throw Error(ErrorKind::BadOverride, fmt::format("option '{}' must be a number", key), key);
        }
    }
}

NoiseOptions filter_options(const std::string& channel, const NoiseOptions& options) {
    const auto& keys = info(channel).keys;
    NoiseOptions out;
    for (const auto& [key, value] : options)
        if (std::find(keys.begin(), keys.end(), key) != keys.end()) out.emplace(key, value);
    return out;
}

double number(const NoiseOptions& o, const std::string& key, double fallback) {
    auto it = o.find(key);
    if (it == o.end()) return fallback;
    return std::get<double>(it->second);
}

std::function<double(double)> function_of_omega(const NoiseOptions& o, const std::string& key,
                                                 std::function<double(double)> fallback) {
    auto it = o.find(key);
    if (it == o.end()) return fallback;
    if (const auto* d = std::get_if<double>(&it->second)) {
        const double v = *d;
        return [v](double) { return v; };
    }
    return std::get<std::function<double(double)>>(it->second);
}

double temperature(const NoiseOptions& o) { return number(o, "T", kDefaultT); }

double angular(double energy, const UnitContext& units) { return 2.0 * kPi * energy * units.scale_to_Hz(); }

CoherenceEstimate finish(double gamma, bool get_rate, const UnitContext& units, CoherenceEstimate est) {
    const double scale = units.scale_to_Hz();
    est.is_rate = get_rate;
    if (get_rate)
        est.value = gamma / scale;
    else
        est.value = gamma > 0.0 ? scale / gamma : kInf;
    return est;
}

bool is_ej_field(const std::string& name) { return name.rfind("EJ", 0) == 0; }

QubitSpec shifted(const QubitSpec& spec, const std::string& field, double delta) {
    if (field == "EJ_scale") {
        QubitSpec out = spec;
        for (const auto& p : param_list(spec))
            if (is_ej_field(p.name)) out = with_param(out, p.name, get_param(spec, p.name) * (1.0 + delta));
        return out;
    }
    return with_param(spec, field, get_param(spec, field) + delta);
}

void check_levels(const QubitSpec& spec, int i, int j) {
    if (i < 0 || j < 0) throw Error(ErrorKind::InvalidCount, "level indices must be >= 0", i < 0 ? "i" : "j");
    if (i == j) throw Error(ErrorKind::InvalidCount, "levels i and j must differ", "j");
    const int dim = hilbert_dim(spec);
    if (std::max(i, j) >= dim)
        throw Error(ErrorKind::InvalidCount, fmt::format("level {} exceeds dimension {}", std::max(i, j), dim),
                    i > j ? "i" : "j");
}

double lambda_scale(const QubitSpec& spec, const std::string& field) {
    if (field == "flux" || field == "ng" || field == "EJ_scale") return 1.0;
    const double v = std::abs(get_param(spec, field));
    return v > 0.0 ? v : 1.0;
}

double omega_ij(const QubitSpec& spec, int i, int j, const UnitContext& units) {
    const RVector ev = eigenvals(spec, std::max(i, j) + 1);
    return angular(ev(j) - ev(i), units);
}

void check_lambda(const QubitSpec& spec, const std::string& field) {
    if (field == "EJ_scale") return;
    const auto params = param_list(spec);
    auto it = std::find_if(params.begin(), params.end(), [&](const ParamInfo& p) { return p.name == field; });
    if (it == params.end() || it->integer || it->optional)
        throw Error(ErrorKind::UnknownLambdaField,
                    fmt::format("{} has no continuous parameter '{}'", family_name(spec), field), field);
}

double sweet_spot_threshold(const QubitSpec& spec, const std::string& field, double omega) {
    return std::max(1e-12, 1e-10 * std::abs(omega)) / lambda_scale(spec, field);
}

std::function<double(double)> default_q_cap() {
    return [](double omega) { return 1e6 * std::pow(2.0 * kPi * 6e9 / std::abs(omega), 0.7); };
}

std::function<double(double)> default_q_ind(double T) {
    return [T](double omega) {
        const double x = phys::hbar * std::abs(omega) / (2.0 * phys::kB * T);
        const double x_ref = phys::h * 0.5e9 / (2.0 * phys::kB * T);
        return 500e6 * std::cyl_bessel_k(0.0, x_ref) * std::sinh(x_ref) / (std::cyl_bessel_k(0.0, x) * std::sinh(x));
    };
}

std::function<double(double)> default_y_qp(double EJ_joule, double T, double x_qp, double delta_joule) {
    return [=](double omega) {
        const double w = std::abs(omega);
        const double x = phys::hbar * w / (2.0 * phys::kB * T);
        return std::sqrt(2.0 / kPi) * (8.0 * EJ_joule / (phys::R_k * delta_joule)) *
               std::pow(2.0 * delta_joule / (phys::hbar * w), 1.5) * x_qp * std::sqrt(x) * std::cyl_bessel_k(0.0, x) *
               std::sinh(x);
    };
}

std::string operator_for(const std::string& channel) {
    if (channel == "t1_capacitive" || channel == "t1_charge_impedance") return "n_operator";
    if (channel == "t1_inductive") return "phi_operator";
    if (channel == "t1_quasiparticle_tunneling") return "sin_half_phi_operator";
    return {};
}

/// Integer ratio between GHz and the context unit (1000 for MHz).
double ratio_to_GHz(const UnitContext& units) { return 1e9 / units.scale_to_Hz(); }

/// Spec with every energy parameter expressed in GHz.
QubitSpec in_GHz(const QubitSpec& spec, const UnitContext& units) {
    const double r = ratio_to_GHz(units);
    if (r == 1.0) return spec;
    QubitSpec out = spec;
    for (const auto& p : param_list(spec))
        if (!p.integer && !p.optional && p.name.front() == 'E') out = with_param(out, p.name, get_param(spec, p.name) / r);
    return out;
}

/// Converts a GHz-context estimate back to the caller's unit.
CoherenceEstimate from_GHz(CoherenceEstimate est, const UnitContext& units) {
    const double r = ratio_to_GHz(units);
    if (r == 1.0) return est;
    est.value = est.is_rate ? est.value * r : est.value / r;
    return est;
}

void require_supported(const QubitSpec& spec, const std::string& name) {
    info(name);
    const auto names = supported_noise_channels(spec);
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw Error(ErrorKind::UnsupportedChannel,
                    fmt::format("{} does not support noise channel '{}'", family_name(spec), name), name);
}

}  // namespace

SpectralDensity one_over_f_density(double A) {
    return {[A](double omega) { return 2.0 * kPi * A * A / std::abs(omega); }, std::nullopt};
}

SpectralDensity thermal_density(std::function<double(double)> amplitude, double T) {
    if (!(T > 0.0) || !std::isfinite(T))
        throw Error(ErrorKind::BadOverride, fmt::format("temperature must be > 0 (got {})", T), "T");
    auto S = [a = std::move(amplitude), T](double omega) {
        const double x = phys::hbar * omega / (phys::kB * T);
        const double ax = std::abs(x);
        // 1/tanh(|x|/2) / (1 + e^{-x}) without overflow for large |x|
        const double coth = 1.0 / std::tanh(0.5 * ax);
        const double occupation = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
        return 2.0 * a(std::abs(omega)) * coth * occupation;
    };
    return {std::move(S), T};
}

std::vector<std::string> supported_noise_channels(const QubitSpec& spec) {
    if (std::holds_alternative<TunableTransmon>(spec))
        return {"tphi_1_over_f_flux", "tphi_1_over_f_cc",    "tphi_1_over_f_ng",
                "t1_capacitive",      "t1_flux_bias_line",   "t1_charge_impedance"};
    if (std::holds_alternative<Transmon>(spec))
        return {"tphi_1_over_f_cc", "tphi_1_over_f_ng", "t1_capacitive", "t1_charge_impedance"};
    if (std::holds_alternative<Fluxonium>(spec))
        return {"tphi_1_over_f_cc",  "tphi_1_over_f_flux", "t1_capacitive",
                "t1_charge_impedance", "t1_flux_bias_line", "t1_inductive", "t1_quasiparticle_tunneling"};
    if (std::holds_alternative<FluxQubit>(spec)) return {"tphi_1_over_f_cc", "tphi_1_over_f_flux", "t1_flux_bias_line"};
    if (std::holds_alternative<ZeroPi>(spec) || std::holds_alternative<FullZeroPi>(spec) ||
        std::holds_alternative<Cos2Phi>(spec))
        return {"tphi_1_over_f_cc", "tphi_1_over_f_flux", "tphi_1_over_f_ng", "t1_flux_bias_line", "t1_inductive"};
    return {};
}

std::vector<std::string> effective_noise_channels(const QubitSpec& spec) {
    auto names = supported_noise_channels(spec);
    names.erase(std::remove(names.begin(), names.end(), "t1_charge_impedance"), names.end());
    return names;
}

ChannelKind channel_kind(const std::string& name) { return info(name).kind; }

std::vector<std::string> channel_option_keys(const std::string& name) { return info(name).keys; }

double d_omega_d_lambda(const QubitSpec& spec, const std::string& field, int i, int j, const UnitContext& units) {
    check_lambda(spec, field);
    check_levels(spec, i, j);
    const double omega0 = omega_ij(spec, i, j, units);
    const double thr = sweet_spot_threshold(spec, field, omega0);
    double h = field == "EJ_scale" ? 1e-3 : 1e-3 * lambda_scale(spec, field);
    auto central = [&](double step) {
        return (omega_ij(shifted(spec, field, step), i, j, units) - omega_ij(shifted(spec, field, -step), i, j, units)) /
               (2.0 * step);
    };
    double d_coarse = central(h);
    double previous = std::numeric_limits<double>::quiet_NaN();
    double r = d_coarse;
    for (int k = 0; k < 6; ++k) {
        h *= 0.5;
        const double d_fine = central(h);
        r = (4.0 * d_fine - d_coarse) / 3.0;
        if (!std::isfinite(r))
            throw Error(ErrorKind::NumericalDerivativeFailure,
                        fmt::format("derivative of omega_{}{} with respect to '{}' is not finite", i, j, field), field);
        if (std::abs(r) < thr && std::abs(d_fine) < thr) return r;
        if (k > 0 && std::abs(r - previous) <= 1e-6 * std::abs(r) + thr) return r;
        previous = r;
        d_coarse = d_fine;
    }
    return r;
}

CoherenceEstimate tphi_1_over_f(const QubitSpec& spec, double A, const std::string& lambda_field, int i, int j,
                                const NoiseOptions& options, const UnitContext& units, bool get_rate) {
    if (!(A > 0.0) || !std::isfinite(A)) throw Error(ErrorKind::BadOverride, "noise amplitude must be > 0", "A_noise");
    const double omega_low = number(options, "omega_low", kDefaultOmegaLow);
    const double t_exp = number(options, "t_exp", kDefaultTExp);
    if (!(omega_low * t_exp < 1.0))
        throw Error(ErrorKind::BadOverride, "omega_low * t_exp must be < 1", "omega_low");
    check_lambda(spec, lambda_field);
    check_levels(spec, i, j);

    const double omega0 = omega_ij(spec, i, j, units);
    const double deriv = d_omega_d_lambda(spec, lambda_field, i, j, units);
    const double thr = sweet_spot_threshold(spec, lambda_field, omega0);
    const double gamma =
        std::abs(deriv) < thr ? 0.0 : A * std::abs(deriv) * std::sqrt(2.0 * std::abs(std::log(omega_low * t_exp)));

    CoherenceEstimate est;
    est.i = i;
    est.j = j;
    est.parameters = {{"A", A}, {"omega_low", omega_low}, {"t_exp", t_exp}, {"d_omega_d_lambda", deriv}};
    return finish(gamma, get_rate, units, std::move(est));
}

CoherenceEstimate t1(const QubitSpec& spec, int i, int j, const Operator& B, const SpectralDensity& S, bool total,
                     const UnitContext& units, bool get_rate) {
    check_levels(spec, i, j);
    const Eigensystem es = eigensys(spec, std::max(i, j) + 1);
    if (B.dim() != es.evecs.rows())
        throw Error(ErrorKind::DimensionMismatch, "noise operator does not match the qubit basis", "operator");
    const CVector vi = es.evecs.col(i), vj = es.evecs.col(j);
    const CVector bvi = std::visit([&](const auto& m) -> CVector { return m * vi; }, B.matrix);
    const CVector bvj = std::visit([&](const auto& m) -> CVector { return m * vj; }, B.matrix);
    const double m_ij = std::norm(vi.dot(bvj));  // <i|B|j>
    const double m_ji = std::norm(vj.dot(bvi));

    const double omega = angular(es.evals(i) - es.evals(j), units);  // > 0 for decay i -> j
    auto density = [&](double w) {
        const double s = S(w);
        if (!std::isfinite(s) || s < 0.0)
            throw Error(ErrorKind::SpectralDensityDomain,
                        fmt::format("spectral density undefined at omega = {} rad/s", w), "omega");
        return s;
    };
    double gamma = m_ij == 0.0 ? 0.0 : m_ij * density(omega);
    if (total && m_ji != 0.0) gamma += m_ji * density(-omega);

    CoherenceEstimate est;
    est.i = i;
    est.j = j;
    est.parameters = {{"omega", omega}, {"matrix_element_sq", m_ij}};
    if (S.temperature) est.parameters["T"] = *S.temperature;
    return finish(gamma, get_rate, units, std::move(est));
}

Operator channel_operator(const QubitSpec& spec, const std::string& name, const UnitContext& units) {
    require_supported(spec, name);
    if (name == "t1_flux_bias_line") {
        const double h = 1e-4;
        const double f = get_param(spec, "flux");
        auto H = [&](double df) { return hamiltonian(with_param(spec, "flux", f + df)); };
        const double pref = 2.0 * kPi * units.scale_to_Hz() / (12.0 * h);
        const Operator p2 = H(2 * h), p1 = H(h), m1 = H(-h), m2 = H(-2 * h);
        if (p2.is_sparse()) {
            SparseCMatrix d = pref * (-p2.sparse() + 8.0 * p1.sparse() - 8.0 * m1.sparse() + m2.sparse());
            return {std::move(d), p2.basis};
        }
        CMatrix d = pref * (-p2.dense() + 8.0 * p1.dense() - 8.0 * m1.dense() + m2.dense());
        return {std::move(d), p2.basis};
    }
    const std::string op = operator_for(name);
    if (op.empty())
        throw Error(ErrorKind::UnsupportedChannel, fmt::format("'{}' is not a depolarization channel", name), name);
    return qubit_operator(spec, op);
}

SpectralDensity channel_spectral_density(const QubitSpec& spec, const std::string& name, const NoiseOptions& options,
                                         const UnitContext& units) {
    require_supported(spec, name);
    check_options(name, options);
    const double T = temperature(options);
    if (name == "t1_capacitive") {
        const double ec = angular(get_param(spec, "EC"), units);
        auto q = function_of_omega(options, "Q_cap", default_q_cap());
        return thermal_density([ec, q](double w) { return 8.0 * ec / q(w); }, T);
    }
    if (name == "t1_charge_impedance") {
        auto z = function_of_omega(options, "Z", [](double) { return 50.0; });
        return thermal_density([z](double w) { return w * 8.0 * kPi * z(w) / phys::R_k; }, T);
    }
    if (name == "t1_flux_bias_line") {
        const double M = number(options, "M", 400.0);
        auto z = function_of_omega(options, "Z", [](double) { return 50.0; });
        return thermal_density([M, z](double w) { return M * M * phys::hbar * w / z(w); }, T);
    }
    if (name == "t1_inductive") {
        const double el = angular(get_param(spec, "EL"), units);
        auto q = function_of_omega(options, "Q_ind", default_q_ind(T));
        return thermal_density([el, q](double w) { return el / q(w); }, T);
    }
    if (name == "t1_quasiparticle_tunneling") {
        const double ej_joule = get_param(spec, "EJ") * units.scale_to_Hz() * phys::h;
        const double x_qp = number(options, "x_qp", 3e-6);
        const double delta_joule = number(options, "Delta", 3.4e-4) * phys::e;
        auto y = function_of_omega(options, "Y_qp", default_y_qp(ej_joule, T, x_qp, delta_joule));
        return thermal_density([y](double w) { return w * y(w) * phys::hbar / (phys::e * phys::e); }, T);
    }
    throw Error(ErrorKind::UnsupportedChannel, fmt::format("'{}' is not a depolarization channel", name), name);
}

CoherenceEstimate noise_channel(const QubitSpec& spec, const std::string& name, const NoiseCall& call,
                                const UnitContext& units) {
    require_supported(spec, name);
    check_options(name, call.options);
    if (ratio_to_GHz(units) != 1.0) return from_GHz(noise_channel(in_GHz(spec, units), name, call, {}), units);
    CoherenceEstimate est;
    if (channel_kind(name) == ChannelKind::Dephasing) {
        std::string field, key;
        double A = 0.0;
        if (name == "tphi_1_over_f_flux") field = "flux", key = "A_flux", A = 1e-6;
        if (name == "tphi_1_over_f_ng") field = "ng", key = "A_ng", A = 1e-4;
        if (name == "tphi_1_over_f_cc") field = "EJ_scale", key = "A_cc", A = 1e-7;
        A = number(call.options, key, number(call.options, "A_noise", A));
        est = tphi_1_over_f(spec, A, field, call.i, call.j, call.options, units, call.get_rate);
    } else {
        est = t1(spec, call.i, call.j, channel_operator(spec, name, units),
                 channel_spectral_density(spec, name, call.options, units), call.total, units, call.get_rate);
    }
    est.channel = name;
    return est;
}

namespace {

std::vector<std::pair<std::string, NoiseOptions>> effective_channels(const QubitSpec& spec, const EffectiveCall& call,
                                                                     bool depolarization_only) {
    std::vector<std::pair<std::string, NoiseOptions>> out;
    if (call.channels) {
        for (const auto& [name, opts] : *call.channels) {
            require_supported(spec, name);
            check_options(name, opts);
            if (depolarization_only && channel_kind(name) != ChannelKind::Depolarization)
                throw Error(ErrorKind::UnsupportedChannel,
                            fmt::format("'{}' is not a depolarization channel", name), name);
            NoiseOptions merged = filter_options(name, call.common);
            for (const auto& [k, v] : opts) merged[k] = v;
            out.emplace_back(name, std::move(merged));
        }
        return out;
    }
    for (const auto& name : effective_noise_channels(spec)) {
        if (depolarization_only && channel_kind(name) != ChannelKind::Depolarization) continue;
        out.emplace_back(name, filter_options(name, call.common));
    }
    return out;
}

double rate_of(const QubitSpec& spec, const std::string& name, const NoiseOptions& opts, const EffectiveCall& call,
               const UnitContext& units) {
    NoiseCall nc;
    nc.i = call.i;
    nc.j = call.j;
    nc.total = true;
    nc.get_rate = true;
    nc.options = opts;
    return noise_channel(spec, name, nc, units).value;
}

}  // namespace

CoherenceEstimate t1_effective(const QubitSpec& spec, const EffectiveCall& call, const UnitContext& units) {
    if (ratio_to_GHz(units) != 1.0) return from_GHz(t1_effective(in_GHz(spec, units), call, {}), units);
    double rate = 0.0;
    for (const auto& [name, opts] : effective_channels(spec, call, true)) rate += rate_of(spec, name, opts, call, units);
    CoherenceEstimate est;
    est.i = call.i;
    est.j = call.j;
    est.channel = "t1_effective";
    est.is_rate = call.get_rate;
    est.value = call.get_rate ? rate : (rate > 0.0 ? 1.0 / rate : kInf);
    return est;
}

CoherenceEstimate t2_effective(const QubitSpec& spec, const EffectiveCall& call, const UnitContext& units) {
    if (ratio_to_GHz(units) != 1.0) return from_GHz(t2_effective(in_GHz(spec, units), call, {}), units);
    double rate = 0.0;
    for (const auto& [name, opts] : effective_channels(spec, call, false)) {
        const double r = rate_of(spec, name, opts, call, units);
        rate += channel_kind(name) == ChannelKind::Depolarization ? 0.5 * r : r;
    }
    CoherenceEstimate est;
    est.i = call.i;
    est.j = call.j;
    est.channel = "t2_effective";
    est.is_rate = call.get_rate;
    est.value = call.get_rate ? rate : (rate > 0.0 ? 1.0 / rate : kInf);
    return est;
}

std::map<std::string, NamedGridArray<double>> coherence_vs_param(const QubitSpec& spec, const std::string& param,
                                                                 const std::vector<double>& values,
                                                                 const std::vector<std::string>& channels,
                                                                 const NoiseCall& call, const UnitContext& units,
                                                                 int workers) {
    if (!has_param(spec, param))
        throw Error(ErrorKind::UnknownParameter, fmt::format("{} has no parameter '{}'", family_name(spec), param),
                    param);
    if (values.empty()) throw Error(ErrorKind::SpecValidation, "parameter values must be non-empty", "values");
    if (channels.empty()) throw Error(ErrorKind::SpecValidation, "no noise channels requested", "channels");
    std::set<std::string> accepted;
    for (const auto& name : channels) {
        if (name == "t1_effective" || name == "t2_effective") {
            for (const auto& c : registry()) accepted.insert(c.keys.begin(), c.keys.end());
            continue;
        }
        require_supported(spec, name);
        check_options(name, filter_options(name, call.options));
        for (const auto& k : info(name).keys) accepted.insert(k);
    }
    for (const auto& [key, value] : call.options)
        if (!accepted.count(key))
            throw Error(ErrorKind::BadOverride, fmt::format("no requested channel accepts option '{}'", key), key);

    std::map<std::string, NamedGridArray<double>> out;
    for (const auto& name : channels) out.emplace(name, NamedGridArray<double>({Axis{param, values}}, {1}));
    parallel_for(values.size(), workers, [&](std::size_t p) {
        const QubitSpec point = with_param(spec, param, values[p]);
        for (const auto& name : channels) {
            double v = 0.0;
            try {
                if (name == "t1_effective" || name == "t2_effective") {
                    EffectiveCall ec;
                    ec.common = call.options;
                    ec.i = call.i;
                    ec.j = call.j;
                    ec.get_rate = call.get_rate;
                    v = (name == "t1_effective" ? t1_effective(point, ec, units) : t2_effective(point, ec, units)).value;
                } else {
                    NoiseCall nc = call;
                    nc.options = filter_options(name, call.options);
                    v = noise_channel(point, name, nc, units).value;
                }
            } catch (const Error& e) {
                throw Error(ErrorKind::PointFailure,
                            fmt::format("at {}={}: [{}] {}", param, values[p], to_string(e.kind()), e.what()),
                            fmt::format("{}={}", param, values[p]));
            }
            out.at(name).record(p)[0] = v;
        }
    });
    return out;
}

}  // namespace qspec
