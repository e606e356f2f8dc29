#include "qspec/qubits.hpp"

#include "qspec/error.hpp"
#include "qspec/parallel.hpp"

#include <fmt/format.h>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

namespace qspec {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Constraint { Any, Positive, NonNegative, Disorder, AtLeast1, AtLeast2, AtLeast3 };

template <class T>
struct FieldDesc {
    const char* name;
    bool integer;
    bool optional;
    Constraint constraint;
    double (*get)(const T&);
    void (*set)(T&, double);
};

#define QS_REAL(T, f, c)                                                                              \
    FieldDesc<T> {                                                                                    \
        #f, false, false, Constraint::c, [](const T& s) { return static_cast<double>(s.f); },         \
            [](T& s, double v) { s.f = v; }                                                           \
    }
#define QS_INT(T, f, c)                                                                               \
    FieldDesc<T> {                                                                                    \
        #f, true, false, Constraint::c, [](const T& s) { return static_cast<double>(s.f); },          \
            [](T& s, double v) { s.f = static_cast<int>(std::lround(v)); }                            \
    }
#define QS_OPT(T, f, c)                                                                               \
    FieldDesc<T> {                                                                                    \
        #f, false, true, Constraint::c, [](const T& s) { return s.f ? *s.f : kNaN; },                 \
            [](T& s, double v) {                                                                      \
                if (std::isnan(v))                                                                    \
                    s.f.reset();                                                                      \
                else                                                                                  \
                    s.f = v;                                                                          \
            }                                                                                         \
    }
#define QS_GRID(T)                                                                                    \
    FieldDesc<T>{"grid_min", false, false, Constraint::Any, [](const T& s) { return s.grid.min; },    \
                 [](T& s, double v) { s.grid.min = v; }},                                             \
        FieldDesc<T>{"grid_max", false, false, Constraint::Any, [](const T& s) { return s.grid.max; }, \
                     [](T& s, double v) { s.grid.max = v; }},                                         \
        FieldDesc<T> {                                                                                \
        "grid_points", true, false, Constraint::AtLeast3,                                             \
            [](const T& s) { return static_cast<double>(s.grid.points); },                            \
            [](T& s, double v) { s.grid.points = static_cast<int>(std::lround(v)); }                  \
    }

template <class T>
std::span<const FieldDesc<T>> fields();

template <>
std::span<const FieldDesc<Transmon>> fields<Transmon>() {
    static const std::array f{QS_REAL(Transmon, EJ, NonNegative), QS_REAL(Transmon, EC, Positive),
                              QS_REAL(Transmon, ng, Any), QS_INT(Transmon, ncut, AtLeast1),
                              QS_INT(Transmon, truncated_dim, AtLeast1)};
    return f;
}

template <>
std::span<const FieldDesc<TunableTransmon>> fields<TunableTransmon>() {
    static const std::array f{QS_REAL(TunableTransmon, EJmax, NonNegative), QS_REAL(TunableTransmon, EC, Positive),
                              QS_REAL(TunableTransmon, d, Disorder),       QS_REAL(TunableTransmon, flux, Any),
                              QS_REAL(TunableTransmon, ng, Any),           QS_INT(TunableTransmon, ncut, AtLeast1),
                              QS_INT(TunableTransmon, truncated_dim, AtLeast1)};
    return f;
}

template <>
std::span<const FieldDesc<Fluxonium>> fields<Fluxonium>() {
    static const std::array f{QS_REAL(Fluxonium, EJ, NonNegative), QS_REAL(Fluxonium, EC, Positive),
                              QS_REAL(Fluxonium, EL, Positive),    QS_REAL(Fluxonium, flux, Any),
                              QS_INT(Fluxonium, cutoff, AtLeast2), QS_INT(Fluxonium, truncated_dim, AtLeast1)};
    return f;
}

template <>
std::span<const FieldDesc<FluxQubit>> fields<FluxQubit>() {
    static const std::array f{
        QS_REAL(FluxQubit, EJ1, NonNegative), QS_REAL(FluxQubit, EJ2, NonNegative), QS_REAL(FluxQubit, EJ3, NonNegative),
        QS_REAL(FluxQubit, ECJ1, Positive),   QS_REAL(FluxQubit, ECJ2, Positive),   QS_REAL(FluxQubit, ECJ3, Positive),
        QS_REAL(FluxQubit, ECg1, Positive),   QS_REAL(FluxQubit, ECg2, Positive),   QS_REAL(FluxQubit, ng1, Any),
        QS_REAL(FluxQubit, ng2, Any),         QS_REAL(FluxQubit, flux, Any),        QS_INT(FluxQubit, ncut, AtLeast1),
        QS_INT(FluxQubit, truncated_dim, AtLeast1)};
    return f;
}

template <>
std::span<const FieldDesc<ZeroPi>> fields<ZeroPi>() {
    static const std::array f{QS_REAL(ZeroPi, EJ, NonNegative), QS_REAL(ZeroPi, dEJ, Disorder),
                              QS_REAL(ZeroPi, EL, Positive),    QS_REAL(ZeroPi, ECJ, Positive),
                              QS_REAL(ZeroPi, dCJ, Disorder),   QS_REAL(ZeroPi, EC, Positive),
                              QS_REAL(ZeroPi, ng, Any),         QS_REAL(ZeroPi, flux, Any),
                              QS_GRID(ZeroPi),                  QS_INT(ZeroPi, ncut, AtLeast1),
                              QS_INT(ZeroPi, truncated_dim, AtLeast1)};
    return f;
}

template <>
std::span<const FieldDesc<FullZeroPi>> fields<FullZeroPi>() {
    static const std::array f{
        QS_REAL(FullZeroPi, EJ, NonNegative), QS_REAL(FullZeroPi, dEJ, Disorder), QS_REAL(FullZeroPi, EL, Positive),
        QS_REAL(FullZeroPi, ECJ, Positive),   QS_REAL(FullZeroPi, dCJ, Disorder), QS_REAL(FullZeroPi, EC, Positive),
        QS_REAL(FullZeroPi, ng, Any),         QS_REAL(FullZeroPi, flux, Any),     QS_GRID(FullZeroPi),
        QS_INT(FullZeroPi, ncut, AtLeast1),   QS_REAL(FullZeroPi, dEL, Disorder), QS_REAL(FullZeroPi, dC, Disorder),
        QS_INT(FullZeroPi, zeta_cut, AtLeast2), QS_INT(FullZeroPi, truncated_dim, AtLeast1)};
    return f;
}

template <>
std::span<const FieldDesc<Cos2Phi>> fields<Cos2Phi>() {
    static const std::array f{
        QS_REAL(Cos2Phi, EJ, NonNegative), QS_REAL(Cos2Phi, ECJ, Positive), QS_REAL(Cos2Phi, EL, Positive),
        QS_REAL(Cos2Phi, EC, Positive),    QS_REAL(Cos2Phi, dEJ, Disorder), QS_REAL(Cos2Phi, dCJ, Disorder),
        QS_REAL(Cos2Phi, dL, Disorder),    QS_REAL(Cos2Phi, flux, Any),     QS_REAL(Cos2Phi, ng, Any),
        QS_INT(Cos2Phi, ncut, AtLeast1),   QS_INT(Cos2Phi, phi_cut, AtLeast2), QS_INT(Cos2Phi, zeta_cut, AtLeast2),
        QS_INT(Cos2Phi, truncated_dim, AtLeast1)};
    return f;
}

template <>
std::span<const FieldDesc<Oscillator>> fields<Oscillator>() {
    static const std::array f{QS_REAL(Oscillator, E_osc, Positive), QS_OPT(Oscillator, l_osc, Positive),
                              QS_INT(Oscillator, truncated_dim, AtLeast2)};
    return f;
}

template <>
std::span<const FieldDesc<KerrOscillator>> fields<KerrOscillator>() {
    static const std::array f{QS_REAL(KerrOscillator, E_osc, Positive), QS_REAL(KerrOscillator, K, NonNegative),
                              QS_OPT(KerrOscillator, l_osc, Positive),
                              QS_INT(KerrOscillator, truncated_dim, AtLeast2)};
    return f;
}

template <>
std::span<const FieldDesc<GenericQubit>> fields<GenericQubit>() {
    static const std::array f{QS_REAL(GenericQubit, E, Any), QS_INT(GenericQubit, truncated_dim, AtLeast1)};
    return f;
}

#undef QS_REAL
#undef QS_INT
#undef QS_OPT
#undef QS_GRID

constexpr std::array<std::string_view, 10> kFamilyNames{"Transmon",   "TunableTransmon", "Fluxonium",
                                                        "FluxQubit",  "ZeroPi",          "FullZeroPi",
                                                        "Cos2Phi",    "Oscillator",      "KerrOscillator",
                                                        "GenericQubit"};

template <std::size_t I = 0>
QubitSpec default_by_index(std::size_t index) {
    if constexpr (I < std::variant_size_v<QubitSpec>) {
        if (index == I) return QubitSpec{std::in_place_index<I>};
        return default_by_index<I + 1>(index);
    } else {
        throw Error(ErrorKind::SpecValidation, "unknown family", "family");
    }
}

Error validation_error(const std::string& field, const std::string& message) {
    return Error(ErrorKind::SpecValidation, field + ": " + message, field);
}

// ---- shared operator pieces ----------------------------------------------

CMatrix shifted_charge_sq(int ncut, double offset) {
    CMatrix n = charge_number_op(ncut);
    const CMatrix shifted = n - offset * CMatrix::Identity(n.rows(), n.cols());
    return shifted * shifted;
}

struct LadderMode {
    CMatrix a, adag, phi, n;
};

// phi = l (a + a^dag)/sqrt2 and n = i (a^dag - a)/(sqrt2 l).
LadderMode ladder_mode(int dim, double length) {
    auto [a, adag] = ladder_ops(dim);
    LadderMode m;
    m.phi = (length / std::numbers::sqrt2) * (a + adag);
    m.n = cplx(0.0, 1.0 / (std::numbers::sqrt2 * length)) * (adag - a);
    m.a = std::move(a);
    m.adag = std::move(adag);
    return m;
}

double fluxonium_phi_osc(const Fluxonium& s) { return std::pow(8.0 * s.EC / s.EL, 0.25); }

double zero_pi_ec_sigma(double EC, double ECJ) { return 1.0 / (1.0 / EC + 1.0 / ECJ); }

// zeta mode: kinetic 2 EC n^2, potential EL zeta^2
double zeta_length(double EC, double EL) { return std::pow(2.0 * EC / EL, 0.25); }
double zeta_frequency(double EC, double EL) { return std::sqrt(8.0 * EC * EL); }

// ---- Hamiltonians --------------------------------------------------------

Operator transmon_hamiltonian(double EJ, double EC, double ng, int ncut) {
    CMatrix h = 4.0 * EC * shifted_charge_sq(ncut, ng) - EJ * cos_phase_op(ncut);
    return {std::move(h), {BasisDescriptor::charge(ncut)}};
}

Operator fluxonium_hamiltonian(const Fluxonium& s) {
    const double phi_osc = fluxonium_phi_osc(s);
    const double omega = std::sqrt(8.0 * s.EL * s.EC);
    const LadderMode m = ladder_mode(s.cutoff, phi_osc);
    const CMatrix disp = expi_hermitian(m.phi, 1.0);  // exp(i phi)
    const cplx phase = std::exp(cplx(0.0, -2.0 * kPi * s.flux));
    const CMatrix cos_term = phase * disp;
    CMatrix h = omega * number_op(s.cutoff) - 0.5 * s.EJ * (cos_term + cos_term.adjoint());
    h = 0.5 * (h + h.adjoint()).eval();
    return {std::move(h), {BasisDescriptor::ladder(s.cutoff)}};
}

// Charging-energy matrix (in energy units with e^2/2 = 1): E_C = C^{-1} with
// C11 = CJ1 + CJ3 + Cg1, C22 = CJ2 + CJ3 + Cg2, C12 = -CJ3 and C_x = 1/EC_x.
Eigen::Matrix2d flux_qubit_ec_matrix(const FluxQubit& s) {
    const double cj1 = 1.0 / s.ECJ1, cj2 = 1.0 / s.ECJ2, cj3 = 1.0 / s.ECJ3;
    const double cg1 = 1.0 / s.ECg1, cg2 = 1.0 / s.ECg2;
    Eigen::Matrix2d c;
    c << cj1 + cj3 + cg1, -cj3, -cj3, cj2 + cj3 + cg2;
    return c.inverse();
}

Operator flux_qubit_hamiltonian(const FluxQubit& s) {
    const int nc = s.ncut;
    const Eigen::Index d = 2 * nc + 1;
    const CMatrix id = CMatrix::Identity(d, d);
    const CMatrix n = charge_number_op(nc);
    const CMatrix n1 = kron(CMatrix(n - s.ng1 * id), id);
    const CMatrix n2 = kron(id, CMatrix(n - s.ng2 * id));
    const Eigen::Matrix2d ec = flux_qubit_ec_matrix(s);
    const CMatrix e = exp_i_phase_op(nc);
    const CMatrix cos1 = kron(cos_phase_op(nc), id);
    const CMatrix cos2 = kron(id, cos_phase_op(nc));
    // exp(i(phi1 - phi2 + phi_ext))
    const CMatrix hop = std::exp(cplx(0.0, 2.0 * kPi * s.flux)) * kron(e, CMatrix(e.adjoint()));
    CMatrix h = 4.0 * (ec(0, 0) * n1 * n1 + ec(1, 1) * n2 * n2 + 2.0 * ec(0, 1) * n1 * n2) - s.EJ1 * cos1 -
                s.EJ2 * cos2 - 0.5 * s.EJ3 * (hop + hop.adjoint());
    h = 0.5 * (h + h.adjoint()).eval();
    return {std::move(h), {BasisDescriptor::charge(nc), BasisDescriptor::charge(nc)}};
}

struct ZeroPiCore {
    SparseCMatrix h;
    SparseCMatrix n_theta, phi;
};

// theta (charge) x phi (grid)
ZeroPiCore zero_pi_core(double EJ, double dEJ, double EL, double ECJ, double dCJ, double EC, double ng, double flux,
                        const Grid1d& grid, int ncut) {
    const double ecs = zero_pi_ec_sigma(EC, ECJ);
    const double half_ext = kPi * flux;  // phi_ext / 2
    const SparseCMatrix id_theta = sparse_identity(2 * ncut + 1);
    const SparseCMatrix id_phi = sparse_identity(grid.points);

    const SparseCMatrix n_theta = to_sparse(charge_number_op(ncut));
    const SparseCMatrix n_theta_sq_shift = to_sparse(shifted_charge_sq(ncut, -ng));
    const SparseCMatrix cos_theta = to_sparse(cos_phase_op(ncut));
    const SparseCMatrix sin_theta = to_sparse(sin_phase_op(ncut));

    const SparseCMatrix kinetic_phi = grid_kinetic_op(grid, 2.0 * ECJ);
    const SparseCMatrix n_phi = grid_momentum_op(grid);
    const SparseCMatrix phi_sq = grid_diagonal_op(grid, [](double p) { return p * p; });
    const SparseCMatrix phi = grid_diagonal_op(grid, [](double p) { return p; });
    const SparseCMatrix cos_phi = grid_diagonal_op(grid, [half_ext](double p) { return std::cos(p - half_ext); });
    const SparseCMatrix sin_phi = grid_diagonal_op(grid, [half_ext](double p) { return std::sin(p - half_ext); });

    SparseCMatrix h = kron(id_theta, kinetic_phi);
    h += 2.0 * ecs * kron(n_theta_sq_shift, id_phi);
    h += EL * kron(id_theta, phi_sq);
    h -= 2.0 * EJ * kron(cos_theta, cos_phi);
    if (dCJ != 0.0) h -= 2.0 * ecs * dCJ * kron(n_theta, n_phi);
    if (dEJ != 0.0) h += EJ * dEJ * kron(sin_theta, sin_phi);
    h.prune(cplx(0.0, 0.0));
    return {std::move(h), kron(n_theta, id_phi), kron(id_theta, phi)};
}

Operator zero_pi_hamiltonian(const ZeroPi& s) {
    auto core = zero_pi_core(s.EJ, s.dEJ, s.EL, s.ECJ, s.dCJ, s.EC, s.ng, s.flux, s.grid, s.ncut);
    return {std::move(core.h), {BasisDescriptor::charge(s.ncut), BasisDescriptor::phase_grid(s.grid)}};
}

// theta (charge) x phi (grid) x zeta (ladder)
Operator full_zero_pi_hamiltonian(const FullZeroPi& s) {
    auto core = zero_pi_core(s.EJ, s.dEJ, s.EL, s.ECJ, s.dCJ, s.EC, s.ng, s.flux, s.grid, s.ncut);
    const double ecs = zero_pi_ec_sigma(s.EC, s.ECJ);
    const LadderMode z = ladder_mode(s.zeta_cut, zeta_length(s.EC, s.EL));
    const SparseCMatrix id_core = sparse_identity(core.h.rows());
    const SparseCMatrix id_zeta = sparse_identity(s.zeta_cut);

    SparseCMatrix h = kron(core.h, id_zeta);
    h += zeta_frequency(s.EC, s.EL) * kron(id_core, to_sparse(number_op(s.zeta_cut)));
    if (s.dC != 0.0) h -= 2.0 * ecs * s.dC * kron(core.n_theta, to_sparse(z.n));
    if (s.dEL != 0.0) h += s.EL * s.dEL * kron(core.phi, to_sparse(z.phi));
    h.prune(cplx(0.0, 0.0));
    return {std::move(h),
            {BasisDescriptor::charge(s.ncut), BasisDescriptor::phase_grid(s.grid), BasisDescriptor::ladder(s.zeta_cut)}};
}

struct Cos2PhiModes {
    double ecj_p, el_p;
    LadderMode phi, zeta;
    double omega_phi, omega_zeta;
};

Cos2PhiModes cos2phi_modes(const Cos2Phi& s) {
    Cos2PhiModes m;
    m.ecj_p = s.ECJ / ((1.0 - s.dCJ) * (1.0 - s.dCJ));
    m.el_p = s.EL / ((1.0 - s.dL) * (1.0 - s.dL));
    const double kin_phi = 2.0 * m.ecj_p;
    const double kin_zeta = 4.0 * s.EC + 2.0 * m.ecj_p;
    m.phi = ladder_mode(s.phi_cut, std::pow(kin_phi / m.el_p, 0.25));
    m.zeta = ladder_mode(s.zeta_cut, std::pow(kin_zeta / m.el_p, 0.25));
    m.omega_phi = 2.0 * std::sqrt(kin_phi * m.el_p);
    m.omega_zeta = 2.0 * std::sqrt(kin_zeta * m.el_p);
    return m;
}

SparseCMatrix kron3(const CMatrix& a, const CMatrix& b, const CMatrix& c) {
    return kron(kron(to_sparse(a), to_sparse(b)), to_sparse(c));
}

// phi (ladder) x theta (charge) x zeta (ladder)
Operator cos2phi_hamiltonian(const Cos2Phi& s) {
    const Cos2PhiModes m = cos2phi_modes(s);
    const int dp = s.phi_cut, dz = s.zeta_cut, dt = 2 * s.ncut + 1;
    const CMatrix ip = CMatrix::Identity(dp, dp), it = CMatrix::Identity(dt, dt), iz = CMatrix::Identity(dz, dz);
    const CMatrix half = 0.5 * CMatrix::Identity(dp, dp);

    const CMatrix n_theta_shift = charge_number_op(s.ncut) - s.ng * it;
    const CMatrix cos_phi = hermitian_matrix_function(m.phi.phi, [](double x) { return cplx(std::cos(x), 0.0); });
    const CMatrix sin_phi = hermitian_matrix_function(m.phi.phi, [](double x) { return cplx(std::sin(x), 0.0); });
    const double shift = kPi * s.flux;

    SparseCMatrix h = m.omega_phi * kron3(CMatrix(number_op(dp) + half), it, iz);
    h += m.omega_zeta * kron3(ip, it, CMatrix(number_op(dz) + 0.5 * iz));
    h += 2.0 * m.ecj_p * kron3(ip, CMatrix(n_theta_shift * n_theta_shift), iz);
    h -= 4.0 * m.ecj_p * kron3(ip, n_theta_shift, m.zeta.n);
    // E_L' (phi - pi flux)^2 beyond the harmonic part
    h += m.el_p * kron3(CMatrix(-2.0 * shift * m.phi.phi + shift * shift * ip), it, iz);
    h -= 2.0 * s.EJ * kron3(cos_phi, cos_phase_op(s.ncut), iz);
    if (s.dEJ != 0.0) h += 2.0 * s.dEJ * s.EJ * kron3(sin_phi, sin_phase_op(s.ncut), iz);
    if (s.dCJ != 0.0) {
        h -= 4.0 * s.dCJ * m.ecj_p * kron3(m.phi.n, n_theta_shift, iz);
        h += 4.0 * s.dCJ * m.ecj_p * kron3(m.phi.n, it, m.zeta.n);
    }
    // dL E_L' (2 phi - phi_ext) zeta
    if (s.dL != 0.0) h += s.dL * m.el_p * kron3(CMatrix(2.0 * m.phi.phi - 2.0 * shift * ip), it, m.zeta.phi);
    SparseCMatrix hs = 0.5 * (h + SparseCMatrix(h.adjoint()));
    hs.prune(cplx(0.0, 0.0), 1e-15);
    return {std::move(hs),
            {BasisDescriptor::ladder(dp), BasisDescriptor::charge(s.ncut), BasisDescriptor::ladder(dz)}};
}

Operator oscillator_hamiltonian(double E_osc, double K, int dim) {
    CMatrix h = CMatrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) h(k, k) = E_osc * k - K * k * (k - 1);
    return {std::move(h), {BasisDescriptor::ladder(dim)}};
}

CMatrix pauli(char which) {
    CMatrix m = CMatrix::Zero(2, 2);
    switch (which) {
    case 'x': m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case 'y': m(0, 1) = cplx(0.0, -1.0); m(1, 0) = cplx(0.0, 1.0); break;
    case 'z': m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    case '+': m(0, 1) = 1.0; break;
    case '-': m(1, 0) = 1.0; break;
    default: break;
    }
    return m;
}

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

// Normalized Hermite functions chi_k(phi) for oscillator length `length`.
std::vector<std::vector<double>> hermite_functions(int count, double length, std::span<const double> phi) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(count), std::vector<double>(phi.size()));
    const double norm0 = 1.0 / (std::pow(kPi, 0.25) * std::sqrt(length));
    for (std::size_t p = 0; p < phi.size(); ++p) {
        const double x = phi[p] / length;
        double prev = 0.0;
        double cur = norm0 * std::exp(-0.5 * x * x);
        for (int k = 0; k < count; ++k) {
            out[static_cast<std::size_t>(k)][p] = cur;
            const double next = std::sqrt(2.0 / (k + 1)) * x * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
            prev = cur;
            cur = next;
        }
    }
    return out;
}

void normalize_on_grid(CVector& psi, const Grid1d& grid) {
    const double norm = std::sqrt(grid.spacing() * psi.squaredNorm());
    if (norm > 0.0) psi /= norm;
}

}  // namespace

// ---- families & reflection ---------------------------------------------------

std::string_view family_name(const QubitSpec& spec) noexcept { return kFamilyNames[spec.index()]; }

std::vector<std::string_view> family_names() { return {kFamilyNames.begin(), kFamilyNames.end()}; }

QubitSpec make_default(std::string_view family) {
    for (std::size_t i = 0; i < kFamilyNames.size(); ++i)
        if (kFamilyNames[i] == family) return default_by_index(i);
    throw Error(ErrorKind::SpecValidation, fmt::format("unknown family '{}'", family), "family");
}

std::vector<ParamInfo> param_list(const QubitSpec& spec) {
    return std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            std::vector<ParamInfo> out;
            for (const auto& f : fields<T>()) out.push_back({f.name, f.integer, f.optional});
            return out;
        },
        spec);
}

bool has_param(const QubitSpec& spec, std::string_view name) {
    return std::visit(
        [name](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            for (const auto& f : fields<T>())
                if (name == f.name) return true;
            return false;
        },
        spec);
}

double get_param(const QubitSpec& spec, std::string_view name) {
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            for (const auto& f : fields<T>())
                if (name == f.name) return f.get(s);
            throw Error(ErrorKind::UnknownParameter,
                        fmt::format("{} has no parameter '{}'", family_name(spec), name), std::string(name));
        },
        spec);
}

QubitSpec with_param(const QubitSpec& spec, std::string_view name, double value) {
    QubitSpec out = spec;
    std::visit(
        [&](auto& s) {
            using T = std::decay_t<decltype(s)>;
            for (const auto& f : fields<T>())
                if (name == f.name) {
                    f.set(s, value);
                    return;
                }
            throw Error(ErrorKind::UnknownParameter,
                        fmt::format("{} has no parameter '{}'", family_name(spec), name), std::string(name));
        },
        out);
    return out;
}

int truncated_dim(const QubitSpec& spec) {
    return std::visit([](const auto& s) { return s.truncated_dim; }, spec);
}

std::vector<BasisDescriptor> basis_of(const QubitSpec& spec) {
    return std::visit(
        Overloaded{
            [](const Transmon& s) { return std::vector{BasisDescriptor::charge(s.ncut)}; },
            [](const TunableTransmon& s) { return std::vector{BasisDescriptor::charge(s.ncut)}; },
            [](const Fluxonium& s) { return std::vector{BasisDescriptor::ladder(s.cutoff)}; },
            [](const FluxQubit& s) { return std::vector{BasisDescriptor::charge(s.ncut), BasisDescriptor::charge(s.ncut)}; },
            [](const ZeroPi& s) {
                return std::vector{BasisDescriptor::charge(s.ncut), BasisDescriptor::phase_grid(s.grid)};
            },
            [](const FullZeroPi& s) {
                return std::vector{BasisDescriptor::charge(s.ncut), BasisDescriptor::phase_grid(s.grid),
                                   BasisDescriptor::ladder(s.zeta_cut)};
            },
            [](const Cos2Phi& s) {
                return std::vector{BasisDescriptor::ladder(s.phi_cut), BasisDescriptor::charge(s.ncut),
                                   BasisDescriptor::ladder(s.zeta_cut)};
            },
            [](const Oscillator& s) { return std::vector{BasisDescriptor::ladder(s.truncated_dim)}; },
            [](const KerrOscillator& s) { return std::vector{BasisDescriptor::ladder(s.truncated_dim)}; },
            [](const GenericQubit&) { return std::vector{BasisDescriptor::qubit()}; },
        },
        spec);
}

int hilbert_dim(const QubitSpec& spec) {
    int d = 1;
    for (const auto& b : basis_of(spec)) d *= b.dimension();
    return d;
}

bool uses_sparse_solver(const QubitSpec& spec) {
    return std::holds_alternative<ZeroPi>(spec) || std::holds_alternative<FullZeroPi>(spec) ||
           std::holds_alternative<Cos2Phi>(spec);
}

std::vector<ValidationIssue> check_spec(const QubitSpec& spec) {
    std::vector<ValidationIssue> issues;
    auto error = [&issues](std::string field, std::string msg) {
        issues.push_back({ValidationIssue::Severity::Error, std::move(field), std::move(msg)});
    };

    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            for (const auto& f : fields<T>()) {
                const double v = f.get(s);
                if (f.optional && std::isnan(v)) continue;
                if (!std::isfinite(v)) {
                    error(f.name, "must be finite");
                    continue;
                }
                switch (f.constraint) {
                case Constraint::Any: break;
                case Constraint::Positive:
                    if (!(v > 0.0)) error(f.name, fmt::format("must be > 0 (got {})", v));
                    break;
                case Constraint::NonNegative:
                    if (v < 0.0) error(f.name, fmt::format("must be >= 0 (got {})", v));
                    break;
                case Constraint::Disorder:
                    if (!(std::abs(v) < 1.0)) error(f.name, fmt::format("must satisfy |{}| < 1 (got {})", f.name, v));
                    break;
                case Constraint::AtLeast1:
                    if (v < 1.0) error(f.name, fmt::format("must be >= 1 (got {})", v));
                    break;
                case Constraint::AtLeast2:
                    if (v < 2.0) error(f.name, fmt::format("must be >= 2 (got {})", v));
                    break;
                case Constraint::AtLeast3:
                    if (v < 3.0) error(f.name, fmt::format("must be >= 3 (got {})", v));
                    break;
                }
            }
            if constexpr (std::is_same_v<T, ZeroPi> || std::is_same_v<T, FullZeroPi>) {
                if (!(s.grid.min < s.grid.max)) error("grid", "grid min must be < max");
            }
        },
        spec);

    if (!issues.empty()) return issues;

    const int full = hilbert_dim(spec);
    const int td = truncated_dim(spec);
    if (td > full) error("truncated_dim", fmt::format("truncated_dim {} exceeds basis dimension {}", td, full));

    auto ncut_warning = [&issues](int ncut, double EJ, double EC) {
        if (EJ <= 0.0) return;
        const int recommended = min_ncut_estimate(EJ, EC);
        if (ncut < recommended)
            issues.push_back({ValidationIssue::Severity::Warning, "ncut",
                              fmt::format("ncut below recommended {}", recommended)});
    };
    if (const auto* t = std::get_if<Transmon>(&spec)) ncut_warning(t->ncut, t->EJ, t->EC);
    if (const auto* t = std::get_if<TunableTransmon>(&spec)) ncut_warning(t->ncut, t->EJmax, t->EC);
    return issues;
}

void validate(const QubitSpec& spec) {
    for (const auto& issue : check_spec(spec))
        if (issue.severity == ValidationIssue::Severity::Error) throw validation_error(issue.field, issue.message);
}

// ---- spectra -------------------------------------------------------------

double effective_EJ(const TunableTransmon& s) {
    const double c = std::cos(kPi * s.flux);
    const double sn = std::sin(kPi * s.flux);
    // EJmax |cos| sqrt(1 + d^2 tan^2) written without the tan singularity
    return s.EJmax * std::sqrt(c * c + s.d * s.d * sn * sn);
}

int min_ncut_estimate(double EJ, double EC) {
    return static_cast<int>(std::ceil(2.0 * std::pow(EJ / EC, 0.25) - 1e-12));
}

Operator hamiltonian(const QubitSpec& spec) {
    validate(spec);
    return std::visit(
        Overloaded{
            [](const Transmon& s) { return transmon_hamiltonian(s.EJ, s.EC, s.ng, s.ncut); },
            [](const TunableTransmon& s) { return transmon_hamiltonian(effective_EJ(s), s.EC, s.ng, s.ncut); },
            [](const Fluxonium& s) { return fluxonium_hamiltonian(s); },
            [](const FluxQubit& s) { return flux_qubit_hamiltonian(s); },
            [](const ZeroPi& s) { return zero_pi_hamiltonian(s); },
            [](const FullZeroPi& s) { return full_zero_pi_hamiltonian(s); },
            [](const Cos2Phi& s) { return cos2phi_hamiltonian(s); },
            [](const Oscillator& s) { return oscillator_hamiltonian(s.E_osc, 0.0, s.truncated_dim); },
            [](const KerrOscillator& s) { return oscillator_hamiltonian(s.E_osc, s.K, s.truncated_dim); },
            [](const GenericQubit& s) { return Operator(CMatrix(0.5 * s.E * pauli('z')), {BasisDescriptor::qubit()}); },
        },
        spec);
}

Eigensystem eigensys(const QubitSpec& spec, int evals_count) {
    const Operator h = hamiltonian(spec);
    if (evals_count < 1 || evals_count > h.dim())
        throw Error(ErrorKind::InvalidCount,
                    fmt::format("evals_count {} outside [1, {}] for {}", evals_count, h.dim(), family_name(spec)),
                    "evals_count");
    return eigensolve(h, evals_count, uses_sparse_solver(spec) ? SolverPath::Sparse : SolverPath::Dense);
}

RVector eigenvals(const QubitSpec& spec, int evals_count) { return eigensys(spec, evals_count).evals; }

// ---- operators -----------------------------------------------------------------

std::vector<std::string> operator_names(const QubitSpec& spec) {
    return std::visit(
        Overloaded{
            [](const Transmon&) -> std::vector<std::string> {
                return {"n_operator", "exp_i_phi_operator", "cos_phi_operator", "sin_phi_operator"};
            },
            [](const TunableTransmon&) -> std::vector<std::string> {
                return {"n_operator", "exp_i_phi_operator", "cos_phi_operator", "sin_phi_operator"};
            },
            [](const Fluxonium&) -> std::vector<std::string> {
                return {"n_operator",          "phi_operator",          "cos_phi_operator",
                        "sin_phi_operator",    "sin_half_phi_operator", "annihilation_operator",
                        "creation_operator",   "number_operator"};
            },
            [](const FluxQubit&) -> std::vector<std::string> {
                return {"n_1_operator",       "n_2_operator",       "cos_phi_1_operator",
                        "cos_phi_2_operator", "sin_phi_1_operator", "sin_phi_2_operator"};
            },
            [](const ZeroPi&) -> std::vector<std::string> {
                return {"n_theta_operator", "n_phi_operator",   "phi_operator",
                        "cos_theta_operator", "sin_theta_operator", "cos_phi_operator", "sin_phi_operator"};
            },
            [](const FullZeroPi&) -> std::vector<std::string> {
                return {"n_theta_operator",  "n_phi_operator",   "phi_operator",     "cos_theta_operator",
                        "sin_theta_operator", "cos_phi_operator", "sin_phi_operator", "n_zeta_operator",
                        "zeta_operator"};
            },
            [](const Cos2Phi&) -> std::vector<std::string> {
                return {"n_theta_operator", "n_phi_operator",   "phi_operator",     "n_zeta_operator",
                        "zeta_operator",    "cos_theta_operator", "sin_theta_operator", "cos_phi_operator",
                        "sin_phi_operator"};
            },
            [](const Oscillator&) -> std::vector<std::string> {
                return {"annihilation_operator", "creation_operator", "number_operator", "phi_operator",
                        "n_operator"};
            },
            [](const KerrOscillator&) -> std::vector<std::string> {
                return {"annihilation_operator", "creation_operator", "number_operator", "phi_operator",
                        "n_operator"};
            },
            [](const GenericQubit&) -> std::vector<std::string> {
                return {"sx_operator", "sy_operator", "sz_operator", "sp_operator", "sm_operator"};
            },
        },
        spec);
}

namespace {

Error unknown_operator(const QubitSpec& spec, std::string_view name) {
    return Error(ErrorKind::UnknownOperator, fmt::format("unknown operator '{}' for {}", name, family_name(spec)),
                 std::string(name));
}

std::optional<CMatrix> charge_family_op(int ncut, std::string_view name) {
    if (name == "n_operator") return charge_number_op(ncut);
    if (name == "exp_i_phi_operator") return exp_i_phase_op(ncut);
    if (name == "cos_phi_operator") return cos_phase_op(ncut);
    if (name == "sin_phi_operator") return sin_phase_op(ncut);
    return std::nullopt;
}

std::optional<CMatrix> oscillator_op(int dim, std::optional<double> l_osc, std::string_view name) {
    auto [a, adag] = ladder_ops(dim);
    if (name == "annihilation_operator") return a;
    if (name == "creation_operator") return adag;
    if (name == "number_operator") return number_op(dim);
    if (name == "phi_operator" || name == "n_operator") {
        if (!l_osc)
            throw Error(ErrorKind::MissingOscillatorLength,
                        fmt::format("{} requires l_osc to be set", name), "l_osc");
        const LadderMode m = ladder_mode(dim, *l_osc);
        return name == "phi_operator" ? m.phi : m.n;
    }
    return std::nullopt;
}

std::optional<SparseCMatrix> zero_pi_op(int ncut, const Grid1d& grid, double flux, std::string_view name) {
    const SparseCMatrix it = sparse_identity(2 * ncut + 1);
    const SparseCMatrix ip = sparse_identity(grid.points);
    if (name == "n_theta_operator") return kron(to_sparse(charge_number_op(ncut)), ip);
    if (name == "cos_theta_operator") return kron(to_sparse(cos_phase_op(ncut)), ip);
    if (name == "sin_theta_operator") return kron(to_sparse(sin_phase_op(ncut)), ip);
    if (name == "n_phi_operator") return kron(it, grid_momentum_op(grid));
    if (name == "phi_operator") return kron(it, grid_diagonal_op(grid, [](double p) { return p; }));
    (void)flux;
    if (name == "cos_phi_operator") return kron(it, grid_diagonal_op(grid, [](double p) { return std::cos(p); }));
    if (name == "sin_phi_operator") return kron(it, grid_diagonal_op(grid, [](double p) { return std::sin(p); }));
    return std::nullopt;
}

}  // namespace

Operator qubit_operator(const QubitSpec& spec, std::string_view name) {
    validate(spec);
    const auto basis = basis_of(spec);
    auto fail = [&]() -> Operator { throw unknown_operator(spec, name); };
    return std::visit(
        Overloaded{
            [&](const Transmon& s) -> Operator {
                if (auto m = charge_family_op(s.ncut, name)) return {std::move(*m), basis};
                return fail();
            },
            [&](const TunableTransmon& s) -> Operator {
                if (auto m = charge_family_op(s.ncut, name)) return {std::move(*m), basis};
                return fail();
            },
            [&](const Fluxonium& s) -> Operator {
                const LadderMode m = ladder_mode(s.cutoff, fluxonium_phi_osc(s));
                const double ext = 2.0 * kPi * s.flux;
                if (name == "n_operator") return {m.n, basis};
                if (name == "phi_operator") return {m.phi, basis};
                if (name == "cos_phi_operator")
                    return {hermitian_matrix_function(m.phi, [](double x) { return cplx(std::cos(x), 0.0); }), basis};
                if (name == "sin_phi_operator")
                    return {hermitian_matrix_function(m.phi, [](double x) { return cplx(std::sin(x), 0.0); }), basis};
                if (name == "sin_half_phi_operator")
                    return {hermitian_matrix_function(
                                m.phi, [ext](double x) { return cplx(std::sin(0.5 * (x - ext)), 0.0); }),
                            basis};
                if (name == "annihilation_operator") return {m.a, basis};
                if (name == "creation_operator") return {m.adag, basis};
                if (name == "number_operator") return {number_op(s.cutoff), basis};
                return fail();
            },
            [&](const FluxQubit& s) -> Operator {
                const CMatrix id = CMatrix::Identity(2 * s.ncut + 1, 2 * s.ncut + 1);
                const std::string_view mode_ops[] = {"n", "cos_phi", "sin_phi"};
                for (int mode = 1; mode <= 2; ++mode)
                    for (auto op : mode_ops) {
                        if (name != fmt::format("{}_{}_operator", op, mode)) continue;
                        CMatrix single = op == "n" ? charge_number_op(s.ncut)
                                         : op == "cos_phi" ? cos_phase_op(s.ncut)
                                                           : sin_phase_op(s.ncut);
                        return {mode == 1 ? kron(single, id) : kron(id, single), basis};
                    }
                return fail();
            },
            [&](const ZeroPi& s) -> Operator {
                if (auto m = zero_pi_op(s.ncut, s.grid, s.flux, name)) return {std::move(*m), basis};
                return fail();
            },
            [&](const FullZeroPi& s) -> Operator {
                const SparseCMatrix iz = sparse_identity(s.zeta_cut);
                if (auto m = zero_pi_op(s.ncut, s.grid, s.flux, name)) return {kron(*m, iz), basis};
                const SparseCMatrix core_id = sparse_identity((2 * s.ncut + 1) * s.grid.points);
                const LadderMode z = ladder_mode(s.zeta_cut, zeta_length(s.EC, s.EL));
                if (name == "n_zeta_operator") return {kron(core_id, to_sparse(z.n)), basis};
                if (name == "zeta_operator") return {kron(core_id, to_sparse(z.phi)), basis};
                return fail();
            },
            [&](const Cos2Phi& s) -> Operator {
                const Cos2PhiModes m = cos2phi_modes(s);
                const int dt = 2 * s.ncut + 1;
                const CMatrix ip = CMatrix::Identity(s.phi_cut, s.phi_cut);
                const CMatrix it = CMatrix::Identity(dt, dt);
                const CMatrix iz = CMatrix::Identity(s.zeta_cut, s.zeta_cut);
                if (name == "n_theta_operator") return {kron3(ip, charge_number_op(s.ncut), iz), basis};
                if (name == "cos_theta_operator") return {kron3(ip, cos_phase_op(s.ncut), iz), basis};
                if (name == "sin_theta_operator") return {kron3(ip, sin_phase_op(s.ncut), iz), basis};
                if (name == "n_phi_operator") return {kron3(m.phi.n, it, iz), basis};
                if (name == "phi_operator") return {kron3(m.phi.phi, it, iz), basis};
                if (name == "cos_phi_operator")
                    return {kron3(hermitian_matrix_function(m.phi.phi, [](double x) { return cplx(std::cos(x), 0.0); }),
                                  it, iz),
                            basis};
                if (name == "sin_phi_operator")
                    return {kron3(hermitian_matrix_function(m.phi.phi, [](double x) { return cplx(std::sin(x), 0.0); }),
                                  it, iz),
                            basis};
                if (name == "n_zeta_operator") return {kron3(ip, it, m.zeta.n), basis};
                if (name == "zeta_operator") return {kron3(ip, it, m.zeta.phi), basis};
                return fail();
            },
            [&](const Oscillator& s) -> Operator {
                if (auto m = oscillator_op(s.truncated_dim, s.l_osc, name)) return {std::move(*m), basis};
                return fail();
            },
            [&](const KerrOscillator& s) -> Operator {
                if (auto m = oscillator_op(s.truncated_dim, s.l_osc, name)) return {std::move(*m), basis};
                return fail();
            },
            [&](const GenericQubit&) -> Operator {
                if (name == "sx_operator") return {pauli('x'), basis};
                if (name == "sy_operator") return {pauli('y'), basis};
                if (name == "sz_operator") return {pauli('z'), basis};
                if (name == "sp_operator") return {pauli('+'), basis};
                if (name == "sm_operator") return {pauli('-'), basis};
                return fail();
            },
        },
        spec);
}

CMatrix matrixelement_table(const Operator& op, const Eigensystem& es) {
    if (op.dim() != es.evecs.rows())
        throw Error(ErrorKind::DimensionMismatch, "operator and eigenvectors have different dimensions");
    const CMatrix applied = std::visit([&es](const auto& m) -> CMatrix { return m * es.evecs; }, op.matrix);
    return es.evecs.adjoint() * applied;
}

CMatrix matrixelement_table(const QubitSpec& spec, std::string_view op_name, int evals_count) {
    const Operator op = qubit_operator(spec, op_name);
    return matrixelement_table(op, eigensys(spec, evals_count));
}

// ---- wavefunctions -------------------------------------------------------------

Representation parse_representation(std::string_view name) {
    if (name == "native") return Representation::Native;
    if (name == "charge") return Representation::Charge;
    if (name == "phase" || name == "phi") return Representation::Phase;
    throw Error(ErrorKind::SpecValidation, fmt::format("unknown representation '{}'", name), "representation");
}

WavefunctionMode parse_mode(std::string_view name) {
    if (name == "real") return WavefunctionMode::Real;
    if (name == "imag") return WavefunctionMode::Imag;
    if (name == "abs") return WavefunctionMode::Abs;
    if (name == "abs_sqr") return WavefunctionMode::AbsSqr;
    throw Error(ErrorKind::SpecValidation, fmt::format("unknown mode '{}'", name), "mode");
}

std::string_view to_string(Representation r) noexcept {
    switch (r) {
    case Representation::Native: return "native";
    case Representation::Charge: return "charge";
    case Representation::Phase: return "phase";
    }
    return "native";
}

std::string_view to_string(WavefunctionMode m) noexcept {
    switch (m) {
    case WavefunctionMode::Real: return "real";
    case WavefunctionMode::Imag: return "imag";
    case WavefunctionMode::Abs: return "abs";
    case WavefunctionMode::AbsSqr: return "abs_sqr";
    }
    return "real";
}

std::vector<double> Wavefunction::render(WavefunctionMode mode) const {
    std::vector<double> out(static_cast<std::size_t>(amplitudes.size()));
    for (Eigen::Index i = 0; i < amplitudes.size(); ++i) {
        const cplx a = amplitudes(i);
        double v = 0.0;
        switch (mode) {
        case WavefunctionMode::Real: v = a.real(); break;
        case WavefunctionMode::Imag: v = a.imag(); break;
        case WavefunctionMode::Abs: v = std::abs(a); break;
        case WavefunctionMode::AbsSqr: v = std::norm(a); break;
        }
        out[static_cast<std::size_t>(i)] = v;
    }
    return out;
}

Grid1d default_phase_grid(const QubitSpec& spec) {
    if (std::holds_alternative<Transmon>(spec) || std::holds_alternative<TunableTransmon>(spec))
        return {-kPi, kPi, 151};
    if (const auto* f = std::get_if<Fluxonium>(&spec)) {
        (void)f;
        return {-5.0 * kPi, 5.0 * kPi, 501};
    }
    if (const auto* z = std::get_if<ZeroPi>(&spec)) return z->grid;
    if (const auto* z = std::get_if<FullZeroPi>(&spec)) return z->grid;
    return {-5.0, 5.0, 201};
}

std::vector<Wavefunction> wavefunction(const QubitSpec& spec, std::span<const int> which,
                                       Representation representation, std::optional<Grid1d> grid) {
    validate(spec);
    int needed = 1;
    for (int w : which) {
        if (w < 0) throw Error(ErrorKind::InvalidCount, "wavefunction index must be >= 0", "which");
        needed = std::max(needed, w + 1);
    }
    const int dim = hilbert_dim(spec);
    if (needed > dim)
        throw Error(ErrorKind::InvalidCount, fmt::format("wavefunction index {} exceeds dimension {}", needed - 1, dim),
                    "which");

    const bool charge_family = std::holds_alternative<Transmon>(spec) || std::holds_alternative<TunableTransmon>(spec);
    const bool hermite_family = std::holds_alternative<Fluxonium>(spec) ||
                                std::holds_alternative<Oscillator>(spec) ||
                                std::holds_alternative<KerrOscillator>(spec);

    auto unsupported = [&] {
        return Error(ErrorKind::UnsupportedRepresentation,
                     fmt::format("{} has no {} representation", family_name(spec), to_string(representation)),
                     "representation");
    };

    if (representation == Representation::Charge && !(charge_family || std::holds_alternative<FluxQubit>(spec)))
        throw unsupported();
    if (representation == Representation::Phase) {
        const bool native_grid = std::holds_alternative<ZeroPi>(spec) || std::holds_alternative<FullZeroPi>(spec);
        if (!(charge_family || hermite_family || native_grid)) throw unsupported();
    }

    std::optional<double> length;
    if (representation == Representation::Phase && hermite_family) {
        if (const auto* f = std::get_if<Fluxonium>(&spec)) length = fluxonium_phi_osc(*f);
        if (const auto* o = std::get_if<Oscillator>(&spec)) length = o->l_osc;
        if (const auto* o = std::get_if<KerrOscillator>(&spec)) length = o->l_osc;
        if (!length) throw Error(ErrorKind::MissingOscillatorLength, "phase wavefunction requires l_osc", "l_osc");
    }

    const Eigensystem es = eigensys(spec, needed);
    const auto native_basis = basis_of(spec);
    const Grid1d g = grid.value_or(default_phase_grid(spec));
    if (representation == Representation::Phase && (charge_family || hermite_family)) BasisDescriptor::phase_grid(g);
    const std::vector<double> phis = g.values();

    std::vector<std::vector<double>> hermite;
    if (length) hermite = hermite_functions(static_cast<int>(es.evecs.rows()), *length, phis);

    std::vector<Wavefunction> out;
    for (int w : which) {
        Wavefunction wf;
        wf.index = w;
        wf.energy = es.evals(w);
        const CVector c = es.evecs.col(w);
        if (representation != Representation::Phase || (!charge_family && !hermite_family)) {
            wf.amplitudes = c;
            wf.basis = native_basis;
        } else if (charge_family) {
            const int ncut = native_basis[0].ncut;
            CVector psi = CVector::Zero(static_cast<Eigen::Index>(phis.size()));
            for (std::size_t p = 0; p < phis.size(); ++p) {
                cplx acc(0.0, 0.0);
                for (int i = 0; i < c.size(); ++i) acc += c(i) * std::exp(cplx(0.0, (i - ncut) * phis[p]));
                psi(static_cast<Eigen::Index>(p)) = acc / std::sqrt(2.0 * kPi);
            }
            normalize_on_grid(psi, g);
            wf.amplitudes = std::move(psi);
            wf.basis = {BasisDescriptor::phase_grid(g)};
        } else {
            CVector psi = CVector::Zero(static_cast<Eigen::Index>(phis.size()));
            for (Eigen::Index k = 0; k < c.size(); ++k)
                for (std::size_t p = 0; p < phis.size(); ++p)
                    psi(static_cast<Eigen::Index>(p)) += c(k) * hermite[static_cast<std::size_t>(k)][p];
            normalize_on_grid(psi, g);
            wf.amplitudes = std::move(psi);
            wf.basis = {BasisDescriptor::phase_grid(g)};
        }
        out.push_back(std::move(wf));
    }
    return out;
}

bool has_potential(const QubitSpec& spec) {
    return std::holds_alternative<Transmon>(spec) || std::holds_alternative<TunableTransmon>(spec) ||
           std::holds_alternative<Fluxonium>(spec);
}

double potential(const QubitSpec& spec, double phi) {
    if (const auto* t = std::get_if<Transmon>(&spec)) return -t->EJ * std::cos(phi);
    if (const auto* t = std::get_if<TunableTransmon>(&spec)) return -effective_EJ(*t) * std::cos(phi);
    if (const auto* f = std::get_if<Fluxonium>(&spec))
        return -f->EJ * std::cos(phi - 2.0 * kPi * f->flux) + 0.5 * f->EL * phi * phi;
    throw Error(ErrorKind::UnsupportedRepresentation,
                fmt::format("{} has no one-dimensional potential", family_name(spec)), "potential");
}

std::vector<double> potential(const QubitSpec& spec, std::span<const double> phi) {
    std::vector<double> out;
    out.reserve(phi.size());
    for (double p : phi) out.push_back(potential(spec, p));
    return out;
}

// ---- scans ---------------------------------------------------------------------------

namespace {

void check_scan(const QubitSpec& spec, const std::string& param, const std::vector<double>& values) {
    if (!has_param(spec, param))
        throw Error(ErrorKind::UnknownParameter, fmt::format("{} has no parameter '{}'", family_name(spec), param),
                    param);
    if (values.empty()) throw Error(ErrorKind::SpecValidation, "parameter values must be non-empty", "values");
}

}  // namespace

NamedGridArray<double> spectrum_vs_param(const QubitSpec& spec, const std::string& param,
                                         const std::vector<double>& values, int evals_count, int workers) {
    check_scan(spec, param, values);
    NamedGridArray<double> out({Axis{param, values}}, {static_cast<std::size_t>(evals_count)});
    parallel_for(values.size(), workers, [&](std::size_t i) {
        const RVector ev = eigenvals(with_param(spec, param, values[i]), evals_count);
        auto rec = out.record(i);
        for (int k = 0; k < evals_count; ++k) rec[static_cast<std::size_t>(k)] = ev(k);
    });
    return out;
}

NamedGridArray<cplx> matelem_vs_param(const QubitSpec& spec, std::string_view op_name, const std::string& param,
                                      const std::vector<double>& values, int select_elems, int workers) {
    check_scan(spec, param, values);
    const auto n = static_cast<std::size_t>(select_elems);
    NamedGridArray<cplx> out({Axis{param, values}}, {n, n});
    parallel_for(values.size(), workers, [&](std::size_t i) {
        const CMatrix table = matrixelement_table(with_param(spec, param, values[i]), op_name, select_elems);
        auto rec = out.record(i);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                rec[r * n + c] = table(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    });
    return out;
}

}  // namespace qspec
