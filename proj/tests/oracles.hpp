// Independent oracles used by the test suites. These deliberately avoid the
// library's spectral pipeline: radial finite differences with dense
// diagonalization, closed-form special functions, and high-order central
// differences.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>

namespace oracles {

/// Lowest eigenvalue of alpha^-1 (T - V) restricted to s-waves, on a uniform
/// radial grid with Dirichlet ends: u = r * psi, the finite-difference
/// Laplacian L ~ -d^2/dr^2 is diagonalized once and the kinetic symbol
/// sqrt(L + alpha^-2) - alpha^-1 is applied through its eigenbasis.
inline double radial_fd_ground_state(double Z, double alpha, double dr, double rmax) {
    const int M = static_cast<int>(std::round(rmax / dr)) - 1;
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(M, M);
    for (int i = 0; i < M; ++i) {
        L(i, i) = 2.0 / (dr * dr);
        if (i + 1 < M) {
            L(i, i + 1) = -1.0 / (dr * dr);
            L(i + 1, i) = -1.0 / (dr * dr);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    Eigen::VectorXd tsym(M);
    for (int i = 0; i < M; ++i)
        tsym(i) = std::sqrt(es.eigenvalues()(i) + 1.0 / (alpha * alpha)) - 1.0 / alpha;
    Eigen::MatrixXd H =
        es.eigenvectors() * tsym.asDiagonal() * es.eigenvectors().transpose();
    for (int i = 0; i < M; ++i) H(i, i) -= Z * alpha / ((i + 1) * dr);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hs(H);
    return hs.eigenvalues()(0) / alpha;
}

/// Physicists' Hermite polynomials H_0..H_kmax at x.
inline std::vector<double> hermite_all(double x, int kmax) {
    std::vector<double> H(static_cast<size_t>(kmax) + 1);
    H[0] = 1;
    if (kmax >= 1) H[1] = 2 * x;
    for (int k = 1; k < kmax; ++k)
        H[static_cast<size_t>(k) + 1] = 2 * x * H[static_cast<size_t>(k)] - 2 * k * H[static_cast<size_t>(k) - 1];
    return H;
}

/// d^k/dx^k e^{-x^2} = (-1)^k H_k(x) e^{-x^2}.
inline double gaussian_derivative_1d(double x, int k) {
    return ((k % 2) ? -1.0 : 1.0) * hermite_all(x, k)[static_cast<size_t>(k)] * std::exp(-x * x);
}

/// partial^beta e^{-|x|^2} (separable product of 1D derivatives).
inline double gaussian_derivative(const std::array<double, 3>& x, const std::array<int, 3>& beta) {
    return gaussian_derivative_1d(x[0], beta[0]) * gaussian_derivative_1d(x[1], beta[1]) *
           gaussian_derivative_1d(x[2], beta[2]);
}

/// Free-space potential of the normalized isotropic Gaussian with variance
/// s^2: U(x) = erf(|x|/(s sqrt(2)))/|x|.
inline double erf_potential(double r, double s) {
    if (r < 1e-12) return std::sqrt(2.0 / 3.14159265358979323846) / s;
    return std::erf(r / (s * std::sqrt(2.0))) / r;
}

/// Closed-form 2x2 Loewdin transform for Gram [[1, s], [s, 1]]:
/// coefficients (diag a, offdiag b) of S^{-1/2}.
inline std::pair<double, double> loewdin_2x2(double s) {
    const double a = 0.5 * (1 / std::sqrt(1 + s) + 1 / std::sqrt(1 - s));
    const double b = 0.5 * (1 / std::sqrt(1 + s) - 1 / std::sqrt(1 - s));
    return {a, b};
}

/// 8th-order central difference d/dx_axis of a scalar function of R^3.
inline double central_diff(const std::function<double(std::array<double, 3>)>& f,
                           std::array<double, 3> x, int axis, double h) {
    auto at = [&](double off) {
        auto y = x;
        y[static_cast<size_t>(axis)] += off;
        return f(y);
    };
    return (at(-4 * h) * (1.0 / 280) - at(-3 * h) * (4.0 / 105) + at(-2 * h) * (1.0 / 5) -
            at(-1 * h) * (4.0 / 5) + at(1 * h) * (4.0 / 5) - at(2 * h) * (1.0 / 5) +
            at(3 * h) * (4.0 / 105) - at(4 * h) * (1.0 / 280)) / h;
}

/// <1/r> and <|p|> of the normalized 1s exponential e^{-r} by radial
/// quadrature (Simpson), for the Kato example.
inline std::pair<double, double> exponential_1s_moments() {
    // <1/r> = int e^{-2r} r dr / int e^{-2r} r^2 dr = 1
    // <|p|> for psi ~ e^{-r}: known 8/(3 pi); recompute by quadrature in p:
    // psi_hat(p) propto 1/(1+p^2)^2, <|p|> = int p^3/(1+p^2)^4 dp / int p^2/(1+p^2)^4 dp
    auto simp = [](const std::function<double(double)>& f, double a, double b, int M) {
        double acc = 0;
        const double h = (b - a) / M;
        for (int i = 0; i < M; ++i) {
            const double x0 = a + i * h;
            acc += (f(x0) + 4 * f(x0 + h / 2) + f(x0 + h)) * h / 6;
        }
        return acc;
    };
    const double num_r = simp([](double r) { return std::exp(-2 * r) * r; }, 0, 60, 20000);
    const double den_r = simp([](double r) { return std::exp(-2 * r) * r * r; }, 0, 60, 20000);
    const double num_p =
        simp([](double p) { return p * p * p / std::pow(1 + p * p, 4); }, 0, 400, 400000);
    const double den_p =
        simp([](double p) { return p * p / std::pow(1 + p * p, 4); }, 0, 400, 400000);
    return {num_r / den_r, num_p / den_p};
}

} // namespace oracles
