#include "qspec/linalg.hpp"

#include "qspec/error.hpp"

#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>

namespace qspec {

std::vector<double> Grid1d::values() const {
    std::vector<double> v(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) v[static_cast<std::size_t>(i)] = at(i);
    return v;
}

BasisDescriptor BasisDescriptor::charge(int ncut) {
    if (ncut < 1) throw Error(ErrorKind::InvalidCutoff, fmt::format("ncut must be >= 1, got {}", ncut), "ncut");
    BasisDescriptor b;
    b.kind = Kind::Charge;
    b.ncut = ncut;
    b.dim = 2 * ncut + 1;
    return b;
}

BasisDescriptor BasisDescriptor::ladder(int dim) {
    if (dim < 2) throw Error(ErrorKind::InvalidDimension, fmt::format("ladder dimension must be >= 2, got {}", dim));
    BasisDescriptor b;
    b.kind = Kind::Ladder;
    b.dim = dim;
    return b;
}

BasisDescriptor BasisDescriptor::phase_grid(const Grid1d& grid) {
    if (grid.points < 3 || !(grid.min < grid.max))
        throw Error(ErrorKind::InvalidGrid,
                    fmt::format("grid needs min < max and >= 3 points (got [{}, {}], {})", grid.min, grid.max,
                                grid.points),
                    "grid");
    BasisDescriptor b;
    b.kind = Kind::Grid;
    b.grid = grid;
    b.dim = grid.points;
    return b;
}

BasisDescriptor BasisDescriptor::qubit() {
    BasisDescriptor b;
    b.kind = Kind::Qubit;
    b.dim = 2;
    return b;
}

int BasisDescriptor::dimension() const noexcept { return dim; }

Operator::Operator(CMatrix m, std::vector<BasisDescriptor> b) : matrix(std::move(m)), basis(std::move(b)) {}
Operator::Operator(SparseCMatrix m, std::vector<BasisDescriptor> b) : matrix(std::move(m)), basis(std::move(b)) {}

Eigen::Index Operator::dim() const noexcept {
    return std::visit([](const auto& m) { return m.rows(); }, matrix);
}

CMatrix Operator::dense() const {
    if (const auto* d = std::get_if<CMatrix>(&matrix)) return *d;
    return CMatrix(std::get<SparseCMatrix>(matrix));
}

SparseCMatrix Operator::sparse() const {
    if (const auto* s = std::get_if<SparseCMatrix>(&matrix)) return *s;
    return to_sparse(std::get<CMatrix>(matrix));
}

// ---- hermiticity --------------------------------------------------------

double frobenius_norm(const Operator& op) {
    return std::visit([](const auto& m) { return m.norm(); }, op.matrix);
}

bool is_hermitian(const CMatrix& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = m.norm();
    return (m - m.adjoint()).norm() <= rel_tol * std::max(scale, std::numeric_limits<double>::min());
}

bool is_hermitian(const Operator& op, double rel_tol) {
    if (const auto* d = std::get_if<CMatrix>(&op.matrix)) return is_hermitian(*d, rel_tol);
    const auto& s = std::get<SparseCMatrix>(op.matrix);
    if (s.rows() != s.cols()) return false;
    SparseCMatrix adj = s.adjoint();
    SparseCMatrix diff = s - adj;
    return diff.norm() <= rel_tol * std::max(s.norm(), std::numeric_limits<double>::min());
}

void require_hermitian(const Operator& op, const char* what) {
    if (!is_hermitian(op))
        throw Error(ErrorKind::HermiticityViolation, fmt::format("{} is not Hermitian", what));
}

// ---- kernels ------------------------------------------------------------

CMatrix charge_number_op(int ncut) {
    const int dim = BasisDescriptor::charge(ncut).dim;
    CMatrix n = CMatrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) n(i, i) = static_cast<double>(i - ncut);
    return n;
}

CMatrix exp_i_phase_op(int ncut) {
    const int dim = BasisDescriptor::charge(ncut).dim;
    CMatrix e = CMatrix::Zero(dim, dim);
    for (int i = 0; i + 1 < dim; ++i) e(i + 1, i) = 1.0;
    return e;
}

CMatrix cos_phase_op(int ncut) {
    const CMatrix e = exp_i_phase_op(ncut);
    return 0.5 * (e + e.adjoint());
}

CMatrix sin_phase_op(int ncut) {
    const CMatrix e = exp_i_phase_op(ncut);
    return (e - e.adjoint()) / cplx(0.0, 2.0);
}

std::pair<CMatrix, CMatrix> ladder_ops(int dim) {
    BasisDescriptor::ladder(dim);
    CMatrix a = CMatrix::Zero(dim, dim);
    for (int k = 1; k < dim; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    CMatrix adag = a.adjoint();
    return {std::move(a), std::move(adag)};
}

CMatrix number_op(int dim) {
    BasisDescriptor::ladder(dim);
    CMatrix n = CMatrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

SparseCMatrix grid_kinetic_op(const Grid1d& grid, double prefactor) {
    BasisDescriptor::phase_grid(grid);
    const int n = grid.points;
    const double h = grid.spacing();
    const double c = prefactor / (h * h);
    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(static_cast<std::size_t>(3 * n));
    for (int i = 0; i < n; ++i) {
        t.emplace_back(i, i, 2.0 * c);
        if (i + 1 < n) {
            t.emplace_back(i, i + 1, -c);
            t.emplace_back(i + 1, i, -c);
        }
    }
    SparseCMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

SparseCMatrix grid_momentum_op(const Grid1d& grid) {
    BasisDescriptor::phase_grid(grid);
    const int n = grid.points;
    const double h = grid.spacing();
    // -i d/dphi: -i (psi_{k+1} - psi_{k-1}) / 2h
    const cplx c(0.0, -1.0 / (2.0 * h));
    std::vector<Eigen::Triplet<cplx>> t;
    for (int i = 0; i + 1 < n; ++i) {
        t.emplace_back(i, i + 1, c);
        t.emplace_back(i + 1, i, -c);
    }
    SparseCMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

SparseCMatrix grid_diagonal_op(const Grid1d& grid, const std::function<double(double)>& f) {
    BasisDescriptor::phase_grid(grid);
    const int n = grid.points;
    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double v = f(grid.at(i));
        if (v != 0.0) t.emplace_back(i, i, v);
    }
    SparseCMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

SparseCMatrix sparse_identity(Eigen::Index dim) {
    SparseCMatrix id(dim, dim);
    id.setIdentity();
    return id;
}

SparseCMatrix kron(const SparseCMatrix& a, const SparseCMatrix& b) {
    const Eigen::Index rows = a.rows() * b.rows();
    const Eigen::Index cols = a.cols() * b.cols();
    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
    for (Eigen::Index ka = 0; ka < a.outerSize(); ++ka)
        for (SparseCMatrix::InnerIterator ia(a, ka); ia; ++ia)
            for (Eigen::Index kb = 0; kb < b.outerSize(); ++kb)
                for (SparseCMatrix::InnerIterator ib(b, kb); ib; ++ib)
                    t.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                                   ia.value() * ib.value());
    SparseCMatrix m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix m(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            m.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return m;
}

SparseCMatrix to_sparse(const CMatrix& m, double drop_tol) {
    std::vector<Eigen::Triplet<cplx>> t;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (std::abs(m(i, j)) > drop_tol) t.emplace_back(i, j, m(i, j));
    SparseCMatrix s(m.rows(), m.cols());
    s.setFromTriplets(t.begin(), t.end());
    return s;
}

// ---- matrix functions ---------------------------------------------------

CMatrix hermitian_matrix_function(const CMatrix& h, const std::function<cplx(double)>& f) {
    if (!is_hermitian(h)) throw Error(ErrorKind::HermiticityViolation, "matrix function argument is not Hermitian");
    const CMatrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "eigendecomposition failed in matrix function");
    CVector fvals(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < fvals.size(); ++i) fvals(i) = f(es.eigenvalues()(i));
    return es.eigenvectors() * fvals.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix expi_hermitian(const CMatrix& h, double theta) {
    return hermitian_matrix_function(h, [theta](double x) { return std::exp(cplx(0.0, theta * x)); });
}

// ---- eigensolvers -------------------------------------------------------

void fix_phases(CMatrix& evecs) {
    for (Eigen::Index j = 0; j < evecs.cols(); ++j) {
        Eigen::Index best = 0;
        double best_abs = -1.0;
        for (Eigen::Index i = 0; i < evecs.rows(); ++i) {
            const double a = std::abs(evecs(i, j));
            // relative margin so near-ties resolve to the lower index on every solver
            if (a > best_abs * (1.0 + 1e-9)) {
                best_abs = a;
                best = i;
            }
        }
        if (best_abs > 0.0) evecs.col(j) *= std::conj(evecs(best, j)) / best_abs;
    }
}

namespace {

bool is_exactly_diagonal(const CMatrix& h) {
    for (Eigen::Index j = 0; j < h.cols(); ++j)
        for (Eigen::Index i = 0; i < h.rows(); ++i)
            if (i == j ? h(i, i).imag() != 0.0 : h(i, j) != cplx(0.0, 0.0)) return false;
    return true;
}

// Exact spectrum of a real diagonal matrix; ties keep basis order.
Eigensystem diagonal_eigensystem(const CMatrix& h, int count) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(h.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&h](Eigen::Index a, Eigen::Index b) { return h(a, a).real() < h(b, b).real(); });
    Eigensystem out;
    out.evals.resize(count);
    out.evecs = CMatrix::Zero(h.rows(), count);
    for (int k = 0; k < count; ++k) {
        const Eigen::Index i = order[static_cast<std::size_t>(k)];
        out.evals(k) = h(i, i).real();
        out.evecs(i, k) = 1.0;
    }
    return out;
}

}  // namespace

Eigensystem eigensolve_dense(const CMatrix& h, int count) {
    const auto n = static_cast<int>(h.rows());
    if (count == 0) count = n;
    if (count < 1 || count > n)
        throw Error(ErrorKind::InvalidCount, fmt::format("eigenvalue count {} outside [1, {}]", count, n), "evals_count");
    if (is_exactly_diagonal(h)) return diagonal_eigensystem(h, count);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "dense Hermitian eigensolver failed");
    Eigensystem out;
    out.evals = es.eigenvalues().head(count);
    out.evecs = es.eigenvectors().leftCols(count);
    fix_phases(out.evecs);
    return out;
}

namespace {

// Deterministic pseudo-random vector; uses raw engine output so results do not
// depend on the standard library's distribution implementation.
CVector seeded_vector(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    CVector v(n);
    auto draw = [&eng] { return static_cast<double>(eng() >> 11) * 0x1.0p-53 - 0.5; };
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = draw();
        const double im = draw();
        v(i) = cplx(re, im);
    }
    return v;
}

struct RitzPairs {
    RVector values;  // descending
    CMatrix vectors;
    RVector residuals;
    bool converged = false;
    int restarts = 0;
};

// Thick-restart Lanczos with full reorthogonalization for the `k` algebraically
// largest eigenpairs of a Hermitian linear map.
RitzPairs largest_eigenpairs(const std::function<CVector(const CVector&)>& apply, Eigen::Index n, int k, int m,
                             double tol, int max_restarts, std::uint64_t seed) {
    m = static_cast<int>(std::min<Eigen::Index>(m, n));
    k = std::min(k, m);
    CMatrix v(n, m);
    CMatrix w(n, m);
    int j = 0;
    CVector next = seeded_vector(n, seed);
    std::uint64_t reseed = seed;
    RitzPairs out;

    auto orthogonalize = [&](CVector& x, int cols) {
        for (int pass = 0; pass < 2; ++pass) {
            if (cols == 0) break;
            const CVector c = v.leftCols(cols).adjoint() * x;
            x -= v.leftCols(cols) * c;
        }
    };

    for (int restart = 0;; ++restart) {
        while (j < m) {
            double ref = next.norm();
            orthogonalize(next, j);
            double nrm = next.norm();
            if (!(nrm > 1e-10 * ref) || ref == 0.0) {
                // invariant subspace reached: continue with a fresh direction
                bool found = false;
                for (int attempt = 0; attempt < 4 && !found; ++attempt) {
                    next = seeded_vector(n, ++reseed * 0x9E3779B97F4A7C15ULL);
                    ref = next.norm();
                    orthogonalize(next, j);
                    nrm = next.norm();
                    found = nrm > 1e-10 * ref;
                }
                if (!found) break;
            }
            v.col(j) = next / nrm;
            w.col(j) = apply(v.col(j));
            next = w.col(j);
            ++j;
        }

        CMatrix t = v.leftCols(j).adjoint() * w.leftCols(j);
        t = 0.5 * (t + t.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<CMatrix> es(t);
        if (es.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "Lanczos projected eigenproblem failed");

        const int kk = std::min(k, j);
        // descending order
        CMatrix s(j, j);
        RVector theta(j);
        for (int c = 0; c < j; ++c) {
            s.col(c) = es.eigenvectors().col(j - 1 - c);
            theta(c) = es.eigenvalues()(j - 1 - c);
        }
        const CMatrix y = v.leftCols(j) * s;
        const CMatrix ay = w.leftCols(j) * s;
        RVector res(j);
        for (int c = 0; c < j; ++c) res(c) = (ay.col(c) - theta(c) * y.col(c)).norm();

        // relative to each Ritz value: for a shift-invert map this bounds the
        // residual of the original operator by tol ||H - sigma||
        const double scale = std::max(std::abs(theta(0)), std::abs(theta(j - 1)));
        bool converged = true;
        for (int c = 0; c < kk; ++c)
            if (res(c) > tol * std::max(std::abs(theta(c)), 1e-8 * scale)) converged = false;

        if (converged || j >= n || restart >= max_restarts) {
            out.values = theta.head(kk);
            out.vectors = y.leftCols(kk);
            out.residuals = res.head(kk);
            out.converged = converged || j >= n;
            out.restarts = restart;
            return out;
        }

        // last Arnoldi residual is orthogonal to every kept Ritz vector
        CVector f = w.col(j - 1);
        orthogonalize(f, j);

        const int keep = std::max(kk, std::min(j - 2, kk + (j - kk) / 2));
        v.leftCols(keep) = y.leftCols(keep);
        w.leftCols(keep) = ay.leftCols(keep);
        j = keep;
        next = f;
    }
}

double max_abs_column_sum(const SparseCMatrix& h) {
    double best = 0.0;
    for (Eigen::Index k = 0; k < h.outerSize(); ++k) {
        double s = 0.0;
        for (SparseCMatrix::InnerIterator it(h, k); it; ++it) s += std::abs(it.value());
        best = std::max(best, s);
    }
    return best;
}

}  // namespace

Eigensystem eigensolve_sparse(const SparseCMatrix& h, int count, const LanczosOptions& opts) {
    const Eigen::Index n = h.rows();
    if (count < 1 || count > n)
        throw Error(ErrorKind::InvalidCount, fmt::format("eigenvalue count {} outside [1, {}]", count, n), "evals_count");
    if (n <= 2) return eigensolve_dense(CMatrix(h), count);

    const double hnorm = std::max(max_abs_column_sum(h), std::numeric_limits<double>::min());

    // coarse estimate of the ground energy from a few restarts on -H
    const auto neg_apply = [&h](const CVector& x) -> CVector { return -(h * x); };
    const int coarse_m = static_cast<int>(std::min<Eigen::Index>(n, 60));
    const RitzPairs coarse = largest_eigenpairs(neg_apply, n, 1, coarse_m, 1e-6, 2, 0x51EDBA5EULL);
    const double ground_est = -coarse.values(0);
    double delta = std::max({coarse.residuals(0), 1e-6 * hnorm, 1e-300});

    // shift strictly below the spectrum: all LDL^H pivots positive (Sylvester inertia)
    const SparseCMatrix id = sparse_identity(n);
    Eigen::SimplicialLDLT<SparseCMatrix, Eigen::Lower> ldlt;
    double sigma = ground_est - delta;
    bool factored = false;
    for (int attempt = 0; attempt < 80; ++attempt) {
        sigma = ground_est - delta;
        SparseCMatrix shifted = h - sigma * id;
        ldlt.compute(shifted);
        if (ldlt.info() == Eigen::Success) {
            const auto d = ldlt.vectorD();
            bool positive = true;
            for (Eigen::Index i = 0; i < d.size() && positive; ++i) positive = d(i).real() > 0.0;
            if (positive) {
                factored = true;
                break;
            }
        }
        delta *= 4.0;
    }
    if (!factored)
        throw Error(ErrorKind::SolverFailure,
                    fmt::format("sparse eigensolver: no valid shift below spectrum (estimate {}, last delta {})",
                                ground_est, delta));

    const auto inv_apply = [&ldlt](const CVector& x) -> CVector { return ldlt.solve(x); };
    const int m = opts.krylov_dim > 0 ? opts.krylov_dim : std::max(2 * count + 20, 40);
    const RitzPairs rp = largest_eigenpairs(inv_apply, n, count, m, opts.tol, opts.max_restarts, 0xC0FFEEULL);

    Eigensystem out;
    out.evals.resize(count);
    out.evecs = rp.vectors;
    for (int c = 0; c < count; ++c) {
        CVector vcol = out.evecs.col(c);
        vcol.normalize();
        out.evecs.col(c) = vcol;
        out.evals(c) = (vcol.adjoint() * (h * vcol))(0).real();
    }
    // ascending order (largest inverse eigenvalue <=> lowest energy already)
    std::vector<int> order(static_cast<std::size_t>(count));
    for (int c = 0; c < count; ++c) order[static_cast<std::size_t>(c)] = c;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return out.evals(a) < out.evals(b); });
    Eigensystem sorted;
    sorted.evals.resize(count);
    sorted.evecs.resize(n, count);
    for (int c = 0; c < count; ++c) {
        sorted.evals(c) = out.evals(order[static_cast<std::size_t>(c)]);
        sorted.evecs.col(c) = out.evecs.col(order[static_cast<std::size_t>(c)]);
    }
    fix_phases(sorted.evecs);

    double worst = 0.0;
    for (int c = 0; c < count; ++c)
        worst = std::max(worst, (h * sorted.evecs.col(c) - sorted.evals(c) * sorted.evecs.col(c)).norm());
    if (worst > 1e-8 * hnorm)
        throw Error(ErrorKind::SolverFailure,
                    fmt::format("sparse eigensolver did not converge: residual {:.3e} (||H|| ~ {:.3e}, shift {:.6g}, "
                                "{} restarts)",
                                worst, hnorm, sigma, rp.restarts));
    return sorted;
}

Eigensystem eigensolve(const Operator& h, int count, SolverPath path) {
    const auto n = static_cast<int>(h.dim());
    if (count == 0) count = n;
    if (count < 1 || count > n)
        throw Error(ErrorKind::InvalidCount, fmt::format("eigenvalue count {} outside [1, {}]", count, n), "evals_count");
    const bool sparse = path == SolverPath::Sparse || (path == SolverPath::Auto && h.is_sparse());
    if (!sparse) return eigensolve_dense(h.dense(), count);
    return eigensolve_sparse(h.sparse(), count);
}

double norm_bound(const Operator& h) {
    if (const auto* s = std::get_if<SparseCMatrix>(&h.matrix)) return max_abs_column_sum(*s);
    const auto& d = std::get<CMatrix>(h.matrix);
    return d.cwiseAbs().colwise().sum().maxCoeff();
}

double max_residual(const Operator& h, const Eigensystem& es) {
    double worst = 0.0;
    for (Eigen::Index c = 0; c < es.evecs.cols(); ++c) {
        const CVector v = es.evecs.col(c);
        CVector hv = std::visit([&v](const auto& m) -> CVector { return m * v; }, h.matrix);
        worst = std::max(worst, (hv - es.evals(c) * v).norm());
    }
    return worst;
}

}  // namespace qspec
