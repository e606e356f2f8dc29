#include "oracles.hpp"
#include "qspec/error.hpp"
#include "qspec/linalg.hpp"

#include <doctest.h>

#include <random>

using namespace qspec;

TEST_CASE("charge basis kernels") {
    const CMatrix n = charge_number_op(2);
    CHECK(n.rows() == 5);
    for (int k = 0; k < 5; ++k) CHECK(n(k, k).real() == k - 2);
    const CMatrix e = exp_i_phase_op(2);
    CHECK(e(1, 0) == cplx(1.0, 0.0));  // e^{i phi}|n> = |n+1>
    CHECK(e(0, 1) == cplx(0.0, 0.0));
    const CMatrix c = cos_phase_op(2);
    CHECK((c - 0.5 * (e + e.adjoint())).norm() < 1e-15);
}

TEST_CASE("ladder operators") {
    const auto [a, ad] = ladder_ops(6);
    CHECK(a(2, 3).real() == doctest::Approx(std::sqrt(3.0)));
    CHECK((ad - a.adjoint()).norm() == 0.0);
    const CMatrix comm = a * ad - ad * a;
    for (int k = 0; k < 5; ++k) CHECK(comm(k, k).real() == doctest::Approx(1.0));
    CHECK((number_op(6) - ad * a).norm() < 1e-14);
}

TEST_CASE("kron matches the dense oracle") {
    const CMatrix a = CMatrix::Random(2, 3), b = CMatrix::Random(3, 2);
    CHECK((kron(a, b) - oracle::kron(a, b)).norm() < 1e-14);
    const SparseCMatrix s = kron(to_sparse(a), to_sparse(b));
    CHECK((CMatrix(s) - oracle::kron(a, b)).norm() < 1e-14);
}

TEST_CASE("hermiticity checks") {
    CMatrix h = CMatrix::Random(4, 4);
    h = (h + h.adjoint()).eval();
    CHECK(is_hermitian(h));
    h(0, 1) += cplx(0.0, 1e-3);
    CHECK_FALSE(is_hermitian(h));
    CHECK_THROWS_AS(require_hermitian(Operator(h), "test"), Error);
}

TEST_CASE("dense solver on a known 2x2") {
    CMatrix h(2, 2);
    h << 1.0, cplx(0.0, 2.0), cplx(0.0, -2.0), 1.0;
    const Eigensystem es = eigensolve_dense(h);
    CHECK(es.evals(0) == doctest::Approx(-1.0));
    CHECK(es.evals(1) == doctest::Approx(3.0));
    CHECK(max_residual(Operator(h), es) < 1e-12);
}

TEST_CASE("diagonal input gives the exact sorted diagonal") {
    CMatrix h = CMatrix::Zero(4, 4);
    h(0, 0) = 3.1, h(1, 1) = -0.7, h(2, 2) = 3.1, h(3, 3) = 12.123456789;
    const Eigensystem es = eigensolve_dense(h, 4);
    CHECK(es.evals(0) == -0.7);
    CHECK(es.evals(1) == 3.1);
    CHECK(es.evals(2) == 3.1);
    CHECK(es.evals(3) == 12.123456789);
    CHECK(es.evecs(0, 1) == cplx(1.0, 0.0));  // ties keep basis order
    CHECK(es.evecs(2, 2) == cplx(1.0, 0.0));
}

TEST_CASE("sparse Lanczos agrees with the dense solver") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = 400;
    std::vector<Eigen::Triplet<cplx>> trip;
    for (int i = 0; i < n; ++i) {
        trip.emplace_back(i, i, 0.01 * i + u(rng));
        if (i + 1 < n) {
            const cplx off(u(rng), u(rng));
            trip.emplace_back(i, i + 1, off);
            trip.emplace_back(i + 1, i, std::conj(off));
        }
    }
    SparseCMatrix h(n, n);
    h.setFromTriplets(trip.begin(), trip.end());
    const Eigensystem sparse = eigensolve_sparse(h, 6);
    const Eigensystem dense = eigensolve_dense(CMatrix(h), 6);
    for (int k = 0; k < 6; ++k) CHECK(sparse.evals(k) == doctest::Approx(dense.evals(k)).epsilon(1e-11));
    CHECK(max_residual(Operator(h), sparse) < 1e-9);
}

TEST_CASE("fix_phases makes the largest component real positive") {
    CMatrix v(2, 1);
    v << cplx(0.0, -0.8), cplx(0.6, 0.0);
    fix_phases(v);
    CHECK(v(0, 0).real() == doctest::Approx(0.8));
    CHECK(v(0, 0).imag() == doctest::Approx(0.0));
}

TEST_CASE("matrix functions") {
    CMatrix h(2, 2);
    h << 0.0, 1.0, 1.0, 0.0;
    const CMatrix u = expi_hermitian(h, oracle::kPi / 2);  // i sigma_x
    CHECK(std::abs(u(0, 1) - cplx(0.0, 1.0)) < 1e-14);
    CHECK(std::abs(u(0, 0)) < 1e-14);
}

TEST_CASE("grid kinetic operator reproduces the harmonic ladder") {
    const Grid1d grid{-10.0, 10.0, 801};
    SparseCMatrix h = grid_kinetic_op(grid, 0.5);
    h += grid_diagonal_op(grid, [](double x) { return 0.5 * x * x; });
    const Eigensystem es = eigensolve_sparse(h, 3);
    for (int k = 0; k < 3; ++k) CHECK(es.evals(k) == doctest::Approx(k + 0.5).epsilon(1e-3));
}

TEST_CASE("invalid counts are rejected") {
    CHECK_THROWS_AS(eigensolve_dense(CMatrix::Identity(3, 3), 4), Error);
}
