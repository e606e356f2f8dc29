#pragma once

#include "qspec/grid_array.hpp"
#include "qspec/linalg.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qspec {

// Energies are in the caller's unit context; flux is in units of the flux
// quantum (phi_ext = 2 pi flux); ng is dimensionless.

struct Transmon {
    double EJ = 15.0;
    double EC = 0.3;
    double ng = 0.0;
    int ncut = 30;
    int truncated_dim = 6;
};

struct TunableTransmon {
    double EJmax = 30.0;
    double EC = 1.2;
    double d = 0.0;  // junction asymmetry
    double flux = 0.0;
    double ng = 0.0;
    int ncut = 30;
    int truncated_dim = 6;
};

struct Fluxonium {
    double EJ = 8.9;
    double EC = 2.5;
    double EL = 0.5;
    double flux = 0.0;
    int cutoff = 110;  // ladder dimension
    int truncated_dim = 6;
};

struct FluxQubit {
    double EJ1 = 35.0;
    double EJ2 = 35.0;
    double EJ3 = 21.0;
    double ECJ1 = 1.0;
    double ECJ2 = 1.0;
    double ECJ3 = 1.0 / 0.6;
    double ECg1 = 50.0;
    double ECg2 = 50.0;
    double ng1 = 0.0;
    double ng2 = 0.0;
    double flux = 0.5;
    int ncut = 10;
    int truncated_dim = 6;
};

struct ZeroPi {
    double EJ = 10.0;
    double dEJ = 0.0;
    double EL = 0.04;
    double ECJ = 20.0;
    double dCJ = 0.0;
    double EC = 0.04;
    double ng = 0.0;
    double flux = 0.0;
    Grid1d grid{-8.0 * 3.141592653589793, 8.0 * 3.141592653589793, 200};
    int ncut = 30;
    int truncated_dim = 6;
};

struct FullZeroPi {
    double EJ = 10.0;
    double dEJ = 0.0;
    double EL = 0.04;
    double ECJ = 20.0;
    double dCJ = 0.0;
    double EC = 0.04;
    double ng = 0.0;
    double flux = 0.0;
    Grid1d grid{-8.0 * 3.141592653589793, 8.0 * 3.141592653589793, 200};
    int ncut = 30;
    double dEL = 0.0;
    double dC = 0.0;
    int zeta_cut = 10;
    int truncated_dim = 6;
};

struct Cos2Phi {
    double EJ = 15.0;
    double ECJ = 2.0;
    double EL = 1.0;
    double EC = 0.04;
    double dEJ = 0.0;
    double dCJ = 0.0;
    double dL = 0.0;
    double flux = 0.5;
    double ng = 0.0;
    int ncut = 7;
    int phi_cut = 7;
    int zeta_cut = 30;
    int truncated_dim = 6;
};

struct Oscillator {
    double E_osc = 5.0;
    std::optional<double> l_osc;
    int truncated_dim = 6;
};

struct KerrOscillator {
    double E_osc = 5.0;
    double K = 0.05;
    std::optional<double> l_osc;
    int truncated_dim = 6;
};

struct GenericQubit {
    double E = 5.0;
    int truncated_dim = 2;
};

using QubitSpec = std::variant<Transmon, TunableTransmon, Fluxonium, FluxQubit, ZeroPi, FullZeroPi, Cos2Phi,
                               Oscillator, KerrOscillator, GenericQubit>;

std::string_view family_name(const QubitSpec& spec) noexcept;
std::vector<std::string_view> family_names();
/// Default-constructed spec for a family name; throws SpecValidation on "family".
QubitSpec make_default(std::string_view family);

// ---- parameter reflection ----------------------------------------------

struct ParamInfo {
    std::string name;
    bool integer = false;
    bool optional = false;  // l_osc
};

std::vector<ParamInfo> param_list(const QubitSpec& spec);
bool has_param(const QubitSpec& spec, std::string_view name);
/// NaN for an unset optional.
double get_param(const QubitSpec& spec, std::string_view name);
/// Copy of `spec` with one field replaced (integers are rounded).
QubitSpec with_param(const QubitSpec& spec, std::string_view name, double value);

int truncated_dim(const QubitSpec& spec);
int hilbert_dim(const QubitSpec& spec);
std::vector<BasisDescriptor> basis_of(const QubitSpec& spec);
bool uses_sparse_solver(const QubitSpec& spec);

struct ValidationIssue {
    enum class Severity { Error, Warning };
    Severity severity = Severity::Error;
    std::string field;
    std::string message;
};

/// All findings for a spec without computing anything.
std::vector<ValidationIssue> check_spec(const QubitSpec& spec);
/// Throws Error(SpecValidation) naming the first offending field.
void validate(const QubitSpec& spec);

// ---- spectra ------------------------------------------------------------

Operator hamiltonian(const QubitSpec& spec);
double effective_EJ(const TunableTransmon& spec);
/// ceil(2 (EJ/EC)^(1/4)).
int min_ncut_estimate(double EJ, double EC);

RVector eigenvals(const QubitSpec& spec, int evals_count = 6);
Eigensystem eigensys(const QubitSpec& spec, int evals_count = 6);

// ---- operators ----------------------------------------------------------

std::vector<std::string> operator_names(const QubitSpec& spec);
/// Family operator in the family's native basis (may be non-Hermitian,
/// e.g. lowering operators).
Operator qubit_operator(const QubitSpec& spec, std::string_view name);

/// M[i][j] = <psi_i|O|psi_j> over the lowest evals_count eigenstates.
CMatrix matrixelement_table(const QubitSpec& spec, std::string_view op_name, int evals_count = 6);
CMatrix matrixelement_table(const Operator& op, const Eigensystem& es);

// ---- wavefunctions ------------------------------------------------------

enum class Representation { Native, Charge, Phase };
enum class WavefunctionMode { Real, Imag, Abs, AbsSqr };

Representation parse_representation(std::string_view name);
WavefunctionMode parse_mode(std::string_view name);
std::string_view to_string(Representation r) noexcept;
std::string_view to_string(WavefunctionMode m) noexcept;

struct Wavefunction {
    int index = 0;
    double energy = 0.0;
    CVector amplitudes;
    /// Tensor factors of the support; a single Grid factor for phase-space
    /// wavefunctions.
    std::vector<BasisDescriptor> basis;

    /// Render-time projection, never stored.
    std::vector<double> render(WavefunctionMode mode) const;
};

/// Wavefunctions for the requested eigenstate indices. `grid` overrides the
/// default phase grid of 1-d families.
std::vector<Wavefunction> wavefunction(const QubitSpec& spec, std::span<const int> which,
                                       Representation representation = Representation::Native,
                                       std::optional<Grid1d> grid = std::nullopt);
Grid1d default_phase_grid(const QubitSpec& spec);

bool has_potential(const QubitSpec& spec);
double potential(const QubitSpec& spec, double phi);
std::vector<double> potential(const QubitSpec& spec, std::span<const double> phi);

// ---- single-qubit parameter scans ---------------------------------------

/// evals: axis `param` x evals_count.
NamedGridArray<double> spectrum_vs_param(const QubitSpec& spec, const std::string& param,
                                         const std::vector<double>& values, int evals_count = 6, int workers = 1);

/// elements: axis `param` x select_elems x select_elems.
NamedGridArray<cplx> matelem_vs_param(const QubitSpec& spec, std::string_view op_name, const std::string& param,
                                      const std::vector<double>& values, int select_elems = 4, int workers = 1);

}  // namespace qspec
