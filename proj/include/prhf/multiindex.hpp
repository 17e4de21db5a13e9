#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace prhf {

using Wide = unsigned __int128;

/// Multi-index in N_0^3 with exact integer combinatorics.
/// Factorials and binomials are exact for |sigma| <= 20 (128-bit arithmetic).
struct MultiIndex {
    std::array<int, 3> v{0, 0, 0};

    constexpr MultiIndex() = default;
    constexpr MultiIndex(int a, int b, int c) : v{a, b, c} {}

    int operator[](int i) const { return v[static_cast<size_t>(i)]; }
    int& operator[](int i) { return v[static_cast<size_t>(i)]; }

    int order() const { return v[0] + v[1] + v[2]; }

    bool operator==(const MultiIndex&) const = default;

    // componentwise mu <= sigma
    friend bool operator<=(const MultiIndex& mu, const MultiIndex& sigma) {
        return mu.v[0] <= sigma.v[0] && mu.v[1] <= sigma.v[1] && mu.v[2] <= sigma.v[2];
    }
    friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
        return {a.v[0] + b.v[0], a.v[1] + b.v[1], a.v[2] + b.v[2]};
    }
    friend MultiIndex operator-(const MultiIndex& a, const MultiIndex& b) {
        return {a.v[0] - b.v[0], a.v[1] - b.v[1], a.v[2] - b.v[2]};
    }

    std::string str() const {
        return "(" + std::to_string(v[0]) + "," + std::to_string(v[1]) + "," +
               std::to_string(v[2]) + ")";
    }
};

inline Wide wide_factorial(int n) {
    if (n < 0) throw std::invalid_argument("factorial of negative");
    if (n > 33) throw std::overflow_error("factorial beyond 128-bit range");
    Wide r = 1;
    for (int k = 2; k <= n; ++k) r *= static_cast<Wide>(k);
    return r;
}

/// sigma! = sigma_1! sigma_2! sigma_3!
inline Wide multi_factorial(const MultiIndex& s) {
    return wide_factorial(s[0]) * wide_factorial(s[1]) * wide_factorial(s[2]);
}

inline double factorial_d(int n) {
    double r = 1.0;
    for (int k = 2; k <= n; ++k) r *= k;
    return r;
}

inline double multi_factorial_d(const MultiIndex& s) {
    return factorial_d(s[0]) * factorial_d(s[1]) * factorial_d(s[2]);
}

/// Exact C(n, k) via the multiplicative formula (each partial product is integral).
inline Wide wide_binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    Wide r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<Wide>(n - k + i) / static_cast<Wide>(i);
    }
    return r;
}

/// C(sigma, mu) = prod_i C(sigma_i, mu_i); equals sigma!/(mu!(sigma-mu)!).
inline Wide multi_binomial(const MultiIndex& sigma, const MultiIndex& mu) {
    return wide_binomial(sigma[0], mu[0]) * wide_binomial(sigma[1], mu[1]) *
           wide_binomial(sigma[2], mu[2]);
}

/// All multi-indices with |beta| = m, deterministic order (lexicographic in (a,b)).
inline std::vector<MultiIndex> compositions(int m) {
    std::vector<MultiIndex> out;
    out.reserve(static_cast<size_t>((m + 1) * (m + 2) / 2));
    for (int a = 0; a <= m; ++a)
        for (int b = 0; b <= m - a; ++b) out.push_back({a, b, m - a - b});
    return out;
}

/// All mu <= sigma with |mu| = k, deterministic order.
inline std::vector<MultiIndex> sub_indices(const MultiIndex& sigma, int k) {
    std::vector<MultiIndex> out;
    for (int a = 0; a <= sigma[0]; ++a)
        for (int b = 0; b <= sigma[1]; ++b) {
            int c = k - a - b;
            if (c >= 0 && c <= sigma[2]) out.push_back({a, b, c});
        }
    return out;
}

/// Sum_{mu<=sigma, |mu|=k} C(sigma,mu) and C(|sigma|,k); the two are equal (A.8).
inline std::pair<Wide, Wide> multinomial_sum_identity(const MultiIndex& sigma, int k) {
    if (k < 0 || k > sigma.order())
        throw std::invalid_argument("multinomial_sum_identity: k out of range");
    Wide lhs = 0;
    for (const auto& mu : sub_indices(sigma, k)) lhs += multi_binomial(sigma, mu);
    return {lhs, wide_binomial(sigma.order(), k)};
}

/// |sigma|! and 3^{|sigma|} sigma!; contract lhs <= rhs (A.5).
inline std::pair<Wide, Wide> factorial_bound(const MultiIndex& sigma) {
    if (sigma.order() > 20)
        throw std::overflow_error("factorial_bound: |sigma| > 20");
    Wide pow3 = 1;
    for (int i = 0; i < sigma.order(); ++i) pow3 *= 3;
    return {wide_factorial(sigma.order()), pow3 * multi_factorial(sigma)};
}

/// Exact C(n,m) vs the Stirling-type majorant
/// e^{1/12}/sqrt(2 pi) * n^{n+1/2} / (m^{m+1/2} (n-m)^{n-m+1/2})   (A.9).
inline std::pair<double, double> stirling_binom_bound(int n, int m) {
    if (!(0 < m && m < n && n <= 60))
        throw std::invalid_argument("stirling_binom_bound: need 0 < m < n <= 60");
    const double binom = static_cast<double>(wide_binomial(n, m));
    const double lg = (n + 0.5) * std::log(static_cast<double>(n)) -
                      (m + 0.5) * std::log(static_cast<double>(m)) -
                      (n - m + 0.5) * std::log(static_cast<double>(n - m));
    const double bound = std::exp(1.0 / 12.0 + lg) / std::sqrt(2.0 * 3.14159265358979323846);
    return {binom, bound};
}

} // namespace prhf
