#pragma once

// Independent reference computations for tests. Nothing here calls into the
// engine's spectra; only Eigen is used.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Lowest `count` eigenvalues of 4 EC (n - ng)^2 - EJ/2 (|n><n+1| + h.c.).
inline std::vector<double> transmon_levels(double EJ, double EC, double ng, int ncut, int count) {
    const int dim = 2 * ncut + 1;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) {
        const double n = k - ncut;
        h(k, k) = 4.0 * EC * (n - ng) * (n - ng);
        if (k + 1 < dim) h(k, k + 1) = h(k + 1, k) = -0.5 * EJ;
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues();
    return {ev.data(), ev.data() + std::min(count, dim)};
}

/// EJmax sqrt(cos^2(pi flux) + d^2 sin^2(pi flux)).
inline double tunable_EJ(double EJmax, double d, double flux) {
    const double c = std::cos(kPi * flux), s = std::sin(kPi * flux);
    return EJmax * std::sqrt(c * c + d * d * s * s);
}

inline std::vector<double> oscillator_levels(double E_osc, int count) {
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back(k * E_osc);
    return out;
}

inline std::vector<double> kerr_levels(double E_osc, double K, int count) {
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back(E_osc * k - K * k * (k - 1));
    return out;
}

/// All sums e_0[i0] + e_1[i1] + ..., ascending.
inline std::vector<double> sorted_sums(const std::vector<std::vector<double>>& levels) {
    std::vector<double> sums{0.0};
    for (const auto& l : levels) {
        std::vector<double> next;
        for (double s : sums)
            for (double e : l) next.push_back(s + e);
        sums = std::move(next);
    }
    std::sort(sums.begin(), sums.end());
    return sums;
}

/// Kronecker product A (x) B with A the slow index.
inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Rayleigh-Schroedinger energy of basis state s through second order:
/// H_ss + sum_{t != s} |H_ts|^2 / (H_ss - H_tt).
inline double second_order_energy(const Eigen::MatrixXcd& h, Eigen::Index s) {
    const double es = h(s, s).real();
    double e = es;
    for (Eigen::Index t = 0; t < h.rows(); ++t)
        if (t != s) e += std::norm(h(t, s)) / (es - h(t, t).real());
    return e;
}

}  // namespace oracle
