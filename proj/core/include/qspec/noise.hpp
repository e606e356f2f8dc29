#pragma once

#include "qspec/grid_array.hpp"
#include "qspec/qubits.hpp"
#include "qspec/units.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace qspec {

namespace phys {
inline constexpr double hbar = 1.054571817e-34;   // J s
inline constexpr double h = 6.62607015e-34;       // J s
inline constexpr double kB = 1.380649e-23;        // J / K
inline constexpr double e = 1.602176634e-19;      // C
inline constexpr double Phi0 = h / (2.0 * e);     // Wb
inline constexpr double R_k = h / (e * e);        // Ohm
}  // namespace phys

/// A noise option is a number or, for frequency-dependent quantities
/// (Q_cap, Q_ind, Z, Y_qp), a function of angular frequency in rad/s.
using NoiseValue = std::variant<double, std::function<double(double)>>;
using NoiseOptions = std::map<std::string, NoiseValue>;

/// Gamma = |<i|B|j>|^2 * S(omega) with omega in rad/s and Gamma in 1/s.
struct SpectralDensity {
    std::function<double(double)> S;
    std::optional<double> temperature;

    double operator()(double omega) const { return S(omega); }
};

/// 2 pi A^2 / |omega|.
SpectralDensity one_over_f_density(double A);
/// 2 a(|omega|) coth(|x|/2) / (1 + e^{-x}), x = hbar omega / kB T.
/// Satisfies S(omega) / S(-omega) = e^x for any amplitude a.
SpectralDensity thermal_density(std::function<double(double)> amplitude, double T);

enum class ChannelKind { Dephasing, Depolarization };

struct CoherenceEstimate {
    double value = 0.0;  // time in 1/(unit) or rate in unit, +inf at sweet spots
    bool is_rate = false;
    int i = 0;
    int j = 1;
    std::string channel;
    std::map<std::string, double> parameters;
};

struct NoiseCall {
    int i = 0;
    int j = 1;
    bool total = true;
    bool get_rate = false;
    NoiseOptions options;
};

std::vector<std::string> supported_noise_channels(const QubitSpec& spec);
/// Supported channels that enter the effective T1/T2 sums.
std::vector<std::string> effective_noise_channels(const QubitSpec& spec);
ChannelKind channel_kind(const std::string& name);
/// Option keys a channel accepts.
std::vector<std::string> channel_option_keys(const std::string& name);

/// Gamma_phi = A |d omega_ij / d lambda| sqrt(2 |ln(omega_low t_exp)|).
/// `lambda_field` is a spec parameter, or "EJ_scale" for a common relative
/// change of every Josephson energy.
CoherenceEstimate tphi_1_over_f(const QubitSpec& spec, double A, const std::string& lambda_field, int i, int j,
                                const NoiseOptions& options, const UnitContext& units, bool get_rate = false);

/// `B` acts in the native basis of `spec`.
CoherenceEstimate t1(const QubitSpec& spec, int i, int j, const Operator& B, const SpectralDensity& S, bool total,
                     const UnitContext& units, bool get_rate = false);

/// Derivative of omega_ij (rad/s) with respect to a spec parameter, by
/// Richardson-extrapolated central differences.
double d_omega_d_lambda(const QubitSpec& spec, const std::string& lambda_field, int i, int j,
                        const UnitContext& units);

/// Thermal density of a depolarization channel with options applied.
SpectralDensity channel_spectral_density(const QubitSpec& spec, const std::string& name, const NoiseOptions& options,
                                         const UnitContext& units);
/// B operator of a depolarization channel (dH/dflux in rad/s for the flux bias line).
Operator channel_operator(const QubitSpec& spec, const std::string& name, const UnitContext& units);

CoherenceEstimate noise_channel(const QubitSpec& spec, const std::string& name, const NoiseCall& call,
                                const UnitContext& units);

struct EffectiveCall {
    /// (channel, per-channel options); empty = default effective set.
    std::optional<std::vector<std::pair<std::string, NoiseOptions>>> channels;
    NoiseOptions common;
    int i = 0;
    int j = 1;
    bool get_rate = false;
};

/// 1/T1 = sum over depolarization channels.
CoherenceEstimate t1_effective(const QubitSpec& spec, const EffectiveCall& call, const UnitContext& units);
/// 1/T2 = sum 1/Tphi + (1/2) sum 1/T1.
CoherenceEstimate t2_effective(const QubitSpec& spec, const EffectiveCall& call, const UnitContext& units);

/// One array per requested channel (plus "t1_effective" / "t2_effective" when
/// requested), each shaped param x 1.
std::map<std::string, NamedGridArray<double>> coherence_vs_param(const QubitSpec& spec, const std::string& param,
                                                                 const std::vector<double>& values,
                                                                 const std::vector<std::string>& channels,
                                                                 const NoiseCall& call, const UnitContext& units,
                                                                 int workers = 1);

}  // namespace qspec
