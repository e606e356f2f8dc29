#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace qspec {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using SparseCMatrix = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;

/// Uniform 1-d phase grid including both end points.
struct Grid1d {
    double min = -1.0;
    double max = 1.0;
    int points = 3;

    double spacing() const noexcept { return (max - min) / (points - 1); }
    double at(int i) const noexcept { return min + i * spacing(); }
    std::vector<double> values() const;

    bool operator==(const Grid1d&) const = default;
};

/// Describes one tensor factor of an operator's basis.
struct BasisDescriptor {
    enum class Kind { Charge, Ladder, Grid, Qubit };

    Kind kind = Kind::Ladder;
    int ncut = 0;   // charge: states n = -ncut..ncut
    int dim = 0;    // ladder / qubit
    Grid1d grid{};  // grid

    static BasisDescriptor charge(int ncut);
    static BasisDescriptor ladder(int dim);
    static BasisDescriptor phase_grid(const Grid1d& grid);
    static BasisDescriptor qubit();

    int dimension() const noexcept;
};

/// Matrix together with its basis. Dense or sparse storage; hermiticity is
/// checked where it is promised (Hamiltonians, observables).
struct Operator {
    std::variant<CMatrix, SparseCMatrix> matrix;
    std::vector<BasisDescriptor> basis;

    Operator() = default;
    Operator(CMatrix m, std::vector<BasisDescriptor> b = {});
    Operator(SparseCMatrix m, std::vector<BasisDescriptor> b = {});

    bool is_sparse() const noexcept { return matrix.index() == 1; }
    Eigen::Index dim() const noexcept;
    CMatrix dense() const;
    SparseCMatrix sparse() const;
};

struct Eigensystem {
    RVector evals;    // ascending
    CMatrix evecs;    // column j belongs to evals[j]
};

enum class SolverPath { Auto, Dense, Sparse };

// ---- hermiticity --------------------------------------------------------

double frobenius_norm(const Operator& op);
/// ||A - A^dagger||_F <= tol * ||A||_F (tol defaults to 1e-12).
bool is_hermitian(const Operator& op, double rel_tol = 1e-12);
bool is_hermitian(const CMatrix& m, double rel_tol = 1e-12);
/// Throws Error(HermiticityViolation) naming `what`.
void require_hermitian(const Operator& op, const char* what);

// ---- basis construction kernels ----------------------------------------

CMatrix charge_number_op(int ncut);
/// e^{i phi}|n> = |n+1>.
CMatrix exp_i_phase_op(int ncut);
CMatrix cos_phase_op(int ncut);
CMatrix sin_phase_op(int ncut);

/// (lowering, raising) with a[k-1,k] = sqrt(k).
std::pair<CMatrix, CMatrix> ladder_ops(int dim);
CMatrix number_op(int dim);

/// -prefactor * d^2/dphi^2 by the three-point stencil with hard walls.
SparseCMatrix grid_kinetic_op(const Grid1d& grid, double prefactor);
/// -i d/dphi by central differences with hard walls.
SparseCMatrix grid_momentum_op(const Grid1d& grid);
/// Diagonal operator f(phi_k).
SparseCMatrix grid_diagonal_op(const Grid1d& grid, const std::function<double(double)>& f);

SparseCMatrix sparse_identity(Eigen::Index dim);
SparseCMatrix kron(const SparseCMatrix& a, const SparseCMatrix& b);
CMatrix kron(const CMatrix& a, const CMatrix& b);
SparseCMatrix to_sparse(const CMatrix& m, double drop_tol = 0.0);

// ---- matrix functions ---------------------------------------------------

/// U f(Lambda) U^dagger for Hermitian H. f may be complex-valued, so the
/// result is only Hermitian when f is real.
CMatrix hermitian_matrix_function(const CMatrix& h, const std::function<cplx(double)>& f);
/// exp(i * theta * H) for Hermitian H.
CMatrix expi_hermitian(const CMatrix& h, double theta);

// ---- eigensolvers -------------------------------------------------------

struct LanczosOptions {
    double tol = 1e-13;
    int max_restarts = 400;
    int krylov_dim = 0;  // 0: choose from count
};

/// Lowest `count` eigenpairs (count = 0 means the full spectrum).
/// Auto: dense storage -> dense solver, sparse storage -> shift-invert Lanczos.
Eigensystem eigensolve(const Operator& h, int count = 0, SolverPath path = SolverPath::Auto);
Eigensystem eigensolve_dense(const CMatrix& h, int count = 0);
Eigensystem eigensolve_sparse(const SparseCMatrix& h, int count, const LanczosOptions& opts = {});

/// Rotates every column so its largest-magnitude component is real positive.
void fix_phases(CMatrix& evecs);

/// max_j ||H v_j - lambda_j v_j||.
double max_residual(const Operator& h, const Eigensystem& es);
/// Cheap upper bound on the spectral norm (max absolute column sum).
double norm_bound(const Operator& h);

}  // namespace qspec
