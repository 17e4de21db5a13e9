#pragma once

#include <cstdint>
#include <map>

#include "prhf/multiindex.hpp"

namespace prhf {

/// Exact closed-form representation of partial^beta (e^{-s r} / r):
/// a sum of terms c * x^a * s^b * r^{-m} * e^{-s r} with integer c.
/// Each partial derivative maps the class to itself:
///   d/dx_nu [x^a s^b r^-m] e^{-sr} = [ -x^{a+e_nu} s^{b+1} r^{-m-1}
///        + a_nu x^{a-e_nu} s^b r^{-m} - m x^{a+e_nu} s^b r^{-m-2} ] e^{-sr}.
struct YukawaDeriv {
    struct TermKey {
        std::array<int, 3> a{0, 0, 0};
        int b = 0;  // power of s
        int m = 1;  // power of 1/r
        bool operator<(const TermKey& o) const {
            if (a != o.a) return a < o.a;
            if (b != o.b) return b < o.b;
            return m < o.m;
        }
    };
    MultiIndex beta;
    std::map<TermKey, long long> terms;

    static YukawaDeriv build(const MultiIndex& beta) {
        YukawaDeriv rep;
        rep.beta = beta;
        rep.terms[TermKey{}] = 1;
        for (int ax = 0; ax < 3; ++ax)
            for (int k = 0; k < beta[ax]; ++k) rep = rep.differentiate(ax);
        return rep;
    }

    YukawaDeriv differentiate(int ax) const {
        YukawaDeriv out;
        out.beta = beta;
        out.beta[ax] += 1;
        auto add = [&](TermKey k, long long c) {
            auto [it, fresh] = out.terms.emplace(k, 0);
            it->second += c;
            if (it->second == 0) out.terms.erase(it);
        };
        for (const auto& [k, c] : terms) {
            TermKey t1 = k;  // -x^{a+e} s^{b+1} r^{-m-1}
            t1.a[static_cast<size_t>(ax)] += 1;
            t1.b += 1;
            t1.m += 1;
            add(t1, -c);
            if (k.a[static_cast<size_t>(ax)] > 0) {  // +a_nu x^{a-e} s^b r^{-m}
                TermKey t2 = k;
                t2.a[static_cast<size_t>(ax)] -= 1;
                add(t2, c * k.a[static_cast<size_t>(ax)]);
            }
            TermKey t3 = k;  // -m x^{a+e} s^b r^{-m-2}
            t3.a[static_cast<size_t>(ax)] += 1;
            t3.m += 2;
            add(t3, -c * static_cast<long long>(k.m));
        }
        return out;
    }

    double evaluate(double s, const std::array<double, 3>& x) const {
        const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        if (!(r > 0)) throw std::invalid_argument("YukawaDeriv: x must be nonzero");
        double sum = 0;
        for (const auto& [k, c] : terms) {
            double t = static_cast<double>(c);
            for (int i = 0; i < 3; ++i)
                for (int q = 0; q < k.a[static_cast<size_t>(i)]; ++q) t *= x[static_cast<size_t>(i)];
            for (int q = 0; q < k.b; ++q) t *= s;
            t *= std::pow(r, -k.m);
            sum += t;
        }
        return sum * std::exp(-s * r);
    }
};

/// partial^beta (e^{-s|x|}/|x|) at x, by the exact recurrence.
inline double yukawa_derivative(const MultiIndex& beta, double s, const std::array<double, 3>& x) {
    return YukawaDeriv::build(beta).evaluate(s, x);
}

/// |value| against the Cauchy-inequality majorant
/// sqrt(2) beta! (8/|x|)^{|beta|} e^{-s|x|/2} / |x|   (C.6).
inline std::pair<double, double> yukawa_bound_check(const MultiIndex& beta, double s,
                                                    const std::array<double, 3>& x) {
    if (beta.order() > 8)
        throw std::invalid_argument("yukawa_bound_check: |beta| <= 8");
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const double val = std::abs(yukawa_derivative(beta, s, x));
    const double bound = std::sqrt(2.0) * multi_factorial_d(beta) *
                         std::pow(8.0 / r, beta.order()) * std::exp(-s * r / 2.0) / r;
    return {val, bound};
}

} // namespace prhf
