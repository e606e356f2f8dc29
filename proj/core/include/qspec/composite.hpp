#pragma once

#include "qspec/linalg.hpp"
#include "qspec/qubits.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace qspec {

/// A subsystem operator: a named family operator or an inline matrix in the
/// subsystem's native basis.
struct OperatorRef {
    std::string name;
    std::optional<CMatrix> matrix;
    int subsystem = 0;
};

/// g * A_1 * A_2 * ... (+ h.c.)
struct ProductTerm {
    cplx g{1.0, 0.0};
    std::vector<OperatorRef> factors;
    bool add_hc = false;
};

struct ExpressionTerm {
    std::string expr;
    std::map<std::string, OperatorRef> bindings;
    std::map<std::string, double> constants;
    bool add_hc = false;
};

/// Matrix over the full bare product basis.
struct RawMatrixTerm {
    CMatrix matrix;
};

using InteractionTerm = std::variant<ProductTerm, ExpressionTerm, RawMatrixTerm>;

struct HilbertSpaceDef {
    std::vector<QubitSpec> subsystems;
    std::vector<InteractionTerm> interactions;
};

/// Product basis: row-major over subsystem order, last subsystem fastest.
std::vector<int> subsystem_dims(const HilbertSpaceDef& def);
int bare_dimension(const HilbertSpaceDef& def);
int bare_index(const std::vector<int>& dims, const std::vector<int>& excitations);
std::vector<int> bare_tuple(const std::vector<int>& dims, int index);

void validate(const HilbertSpaceDef& def);

/// Lowest truncated_dim eigenpairs of every subsystem.
std::vector<Eigensystem> bare_spectra(const HilbertSpaceDef& def);

/// U^dagger O U restricted to the kept states, Kronecker-embedded at `subsystem`.
CMatrix lift_operator(const HilbertSpaceDef& def, const std::vector<Eigensystem>& bare, const OperatorRef& ref);

/// Matrix of a single interaction term in the bare product basis (before the
/// hermiticity check of the total).
CMatrix interaction_matrix(const HilbertSpaceDef& def, const std::vector<Eigensystem>& bare,
                           const InteractionTerm& term);

/// Bare energy sums on the diagonal plus all interaction terms. Throws
/// NonHermitianTotal if the summed interaction is not Hermitian.
CMatrix assemble_hamiltonian(const HilbertSpaceDef& def, const std::vector<Eigensystem>& bare);
CMatrix assemble_hamiltonian(const HilbertSpaceDef& def);

/// Eigenvectors are expressed in the bare product basis.
Eigensystem dressed_eigensys(const HilbertSpaceDef& def, const std::vector<Eigensystem>& bare, int evals_count);
Eigensystem dressed_eigensys(const HilbertSpaceDef& def, int evals_count = 6);

struct DressedLabel {
    std::vector<int> excitations;
    double overlap = 0.0;
};

constexpr double kDefaultLabelThreshold = 0.5;

/// Per dressed state: the bare state of maximal overlap when that overlap
/// exceeds `threshold`; greedy by overlap so no bare label is used twice.
/// Overlaps within 1e-12 of the threshold count as unresolved.
std::vector<std::optional<DressedLabel>> label_dressed_states(const std::vector<int>& dims, const Eigensystem& dressed,
                                                              double threshold = kDefaultLabelThreshold);

/// Layouts (L = largest truncated_dim, missing entries NaN):
///   lamb  [j][k]        = E(k e_j) - E(0) - (eps_j(k) - eps_j(0))
///   chi   [j][l][a][b]  = E(a e_j + b e_l) - E(a e_j) - E(b e_l) + E(0),  j != l
///   kerr  [j][l]        = self-Kerr E(2e_j) - 2E(e_j) + E(0) on the diagonal,
///                         chi_jl(1,1) off the diagonal
struct DispersiveCoefficients {
    int subsystems = 0;
    int levels = 0;
    std::vector<double> lamb;
    std::vector<double> chi;
    std::vector<double> kerr;

    double lamb_at(int j, int k) const;
    double chi_at(int j, int l, int a, int b) const;
    double kerr_at(int j, int l) const;
};

/// strict: throws DispersiveBreakdown naming missing tuples among 0, e_j,
/// 2 e_j and e_j + e_l. Lenient: missing entries become NaN.
DispersiveCoefficients dispersive_coefficients(const std::vector<int>& dims, const std::vector<Eigensystem>& bare,
                                               const Eigensystem& dressed,
                                               const std::vector<std::optional<DressedLabel>>& labels,
                                               bool strict = true);

}  // namespace qspec
