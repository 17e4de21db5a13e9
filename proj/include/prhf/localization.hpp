#pragma once

#include <list>
#include <map>

#include "prhf/regularity.hpp"
#include "prhf/rng.hpp"

namespace prhf {

/// Transition profile for the nested-ball cutoffs.
///  - SmoothBump: 1D radial mollification of the shell indicator with the
///    normalized bump exp(-1/(1-t^2)); compact supports hold exactly on the
///    grid. Requires mollifier width >= 2 spacings and <= eps/8.
///  - SpectralErf: clamped erf profile in the r^2 variable (smooth on the
///    whole torus, spectrally clean); no compact-support claims. Used by the
///    identity lab where 1e-8-level residuals are required.
enum class CutoffProfile { SmoothBump, SpectralErf };

namespace detail {

// S(t): integral of exp(-1/(1-u^2)) from -1 to t, normalized to S(1) = 1.
inline double bump_step(double t) {
    static const std::vector<double> table = [] {
        const int n = 8192;
        std::vector<double> cum(static_cast<size_t>(n) + 1, 0.0);
        auto b = [](double u) {
            const double d = 1.0 - u * u;
            return d > 0 ? std::exp(-1.0 / d) : 0.0;
        };
        double acc = 0;
        const double dt = 2.0 / n;
        for (int i = 0; i < n; ++i) {
            const double u0 = -1.0 + i * dt, u1 = u0 + dt;
            acc += (b(u0) + 4.0 * b(0.5 * (u0 + u1)) + b(u1)) * dt / 6.0;
            cum[static_cast<size_t>(i) + 1] = acc;
        }
        for (auto& v : cum) v /= acc;
        return cum;
    }();
    if (t <= -1.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double x = (t + 1.0) / 2.0 * 8192.0;
    const int i = std::min(static_cast<int>(x), 8191);
    const double fr = x - i;
    return table[static_cast<size_t>(i)] * (1 - fr) + table[static_cast<size_t>(i) + 1] * fr;
}

inline double bump_step_deriv(double t) {
    // S'(t) = exp(-1/(1-t^2)) / ||b||_1 with ||b||_1 = 0.443993816168...
    const double d = 1.0 - t * t;
    if (d <= 0) return 0.0;
    return std::exp(-1.0 / d) / 0.44399381616807943;
}

} // namespace detail

template <class Real>
struct LocalizationFamilyT {
    int j = 0;
    Real epsilon = 0;
    Vec3T<Real> x0{};
    Real R = 0;
    Real width = 0;  // transition half-width w
    CutoffProfile profile = CutoffProfile::SmoothBump;
    Real snap = 0;   // clamp threshold (SpectralErf)

    FieldT<Real> Phi;
    std::vector<FieldT<Real>> chi;  // chi_0 .. chi_j
    std::vector<FieldT<Real>> eta;  // eta_0 .. eta_j
    Real C_star_measured = 0;

    /// Transition midpoint radius of M_k.
    Real shell_radius(int k) const {
        return R - epsilon * (Real(j - k) + Real(3) / Real(8));
    }

    /// d(eta_k)/dx_axis, analytic (eta_k = 1 - M_k).
    FieldT<Real> grad_eta(int k, int axis) const;
};

using LocalizationFamily = LocalizationFamilyT<double>;

namespace detail {

template <class Real>
Real profile_value(CutoffProfile prof, Real a, Real w, Real snap, Real rho) {
    if (prof == CutoffProfile::SmoothBump) {
        return static_cast<Real>(bump_step(static_cast<double>((a - rho) / w)));
    }
    const Real z = (a * a - rho * rho) / (Real(2) * std::sqrt(Real(2)) * a * w);
    Real M = (Real(1) + std::erf(z)) / Real(2);
    if (M < snap) M = 0;
    if (M > Real(1) - snap) M = 1;
    return M;
}

// dM/dx_axis at displacement dx from the ball center, distance rho.
template <class Real>
Real profile_grad(CutoffProfile prof, Real a, Real w, Real snap, Real rho, Real dxi) {
    if (prof == CutoffProfile::SmoothBump) {
        if (rho <= 0) return 0;
        const Real t = (a - rho) / w;
        const Real sp = static_cast<Real>(bump_step_deriv(static_cast<double>(t)));
        return -sp / w * dxi / rho;
    }
    const Real z = (a * a - rho * rho) / (Real(2) * std::sqrt(Real(2)) * a * w);
    Real M = (Real(1) + std::erf(z)) / Real(2);
    if (M < snap || M > Real(1) - snap) return 0;
    const Real sp = std::exp(-z * z) / std::sqrt(Grid3T<Real>::pi());
    return sp * (-dxi / (std::sqrt(Real(2)) * a * w));
}

} // namespace detail

template <class Real>
FieldT<Real> LocalizationFamilyT<Real>::grad_eta(int k, int axis) const {
    const auto& g = Phi.grid();
    FieldT<Real> out(g, Space::Real);
    const Real a = shell_radius(k);
    const int n = g.n();
    std::int64_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                const Vec3T<Real> d{g.wrap(g.coord(ix) - x0[0]), g.wrap(g.coord(iy) - x0[1]),
                                    g.wrap(g.coord(iz) - x0[2])};
                const Real rho = norm3(d);
                // eta_k = 1 - M_k
                out[idx] = -detail::profile_grad(profile, a, width, snap, rho,
                                                 d[static_cast<size_t>(axis)]);
            }
    return out;
}

/// Builds the nested family Phi, {chi_k}, {eta_k} on the grid from nested
/// profiles M_0 <= ... <= M_j: chi_0 = M_0, chi_k = M_k - M_{k-1},
/// eta_k = 1 - M_k. The partition identities of the construction hold exactly
/// by telescoping.
template <class Real>
LocalizationFamilyT<Real> build_localization(const Grid3T<Real>& g, int j, Real epsilon,
                                             const Vec3T<Real>& x0, Real R,
                                             Real mollifier_width_factor = 1,
                                             CutoffProfile profile = CutoffProfile::SmoothBump,
                                             Real spectral_snap = Real(1e-12)) {
    if (j < 0) throw std::invalid_argument("build_localization: j >= 0 required");
    if (!(epsilon > 0) || epsilon * (j + 1) > R / Real(2) * (Real(1) + Real(1e-12)))
        throw std::invalid_argument("build_localization: need eps (j+1) <= R/2");
    LocalizationFamilyT<Real> fam;
    fam.j = j;
    fam.epsilon = epsilon;
    fam.x0 = x0;
    fam.R = R;
    fam.profile = profile;
    fam.width = epsilon / Real(8) * mollifier_width_factor;
    fam.snap = spectral_snap;
    if (fam.width < 2 * g.spacing())
        throw std::invalid_argument(
            "build_localization: shells unresolvable (mollifier width < 2 spacing); finer grid needed");
    if (profile == CutoffProfile::SmoothBump) {
        if (mollifier_width_factor > 1)
            throw std::invalid_argument(
                "build_localization: SmoothBump width factor > 1 breaks the support margins");
        const Real a0 = R - epsilon * (Real(j) + Real(3) / Real(8));
        if (a0 - fam.width <= 0)
            throw std::invalid_argument("build_localization: innermost shell crosses the origin");
        if (R + fam.width >= g.box_length() / Real(2))
            throw std::invalid_argument("build_localization: family does not fit in the box");
    }

    const int n = g.n();
    auto build_field = [&](Real a) {
        FieldT<Real> f(g, Space::Real);
        std::int64_t idx = 0;
        for (int iz = 0; iz < n; ++iz)
            for (int iy = 0; iy < n; ++iy)
                for (int ix = 0; ix < n; ++ix, ++idx) {
                    const Real dx = g.wrap(g.coord(ix) - x0[0]);
                    const Real dy = g.wrap(g.coord(iy) - x0[1]);
                    const Real dz = g.wrap(g.coord(iz) - x0[2]);
                    const Real rho = std::sqrt(dx * dx + dy * dy + dz * dz);
                    f[idx] = detail::profile_value(profile, a, fam.width, fam.snap, rho);
                }
        return f;
    };

    std::vector<FieldT<Real>> M;
    for (int k = 0; k <= j; ++k) M.push_back(build_field(fam.shell_radius(k)));
    fam.Phi = build_field(R - epsilon * (Real(j) + Real(7) / Real(8)));
    fam.chi.push_back(M[0]);
    for (int k = 1; k <= j; ++k) {
        FieldT<Real> c = M[static_cast<size_t>(k)];
        c -= M[static_cast<size_t>(k) - 1];
        fam.chi.push_back(std::move(c));
    }
    for (int k = 0; k <= j; ++k) {
        FieldT<Real> e(g, Space::Real);
        for (size_t t = 0; t < e.values().size(); ++t)
            e.values()[t] = Real(1) - M[static_cast<size_t>(k)].values()[t].real();
        fam.eta.push_back(std::move(e));
    }

    // measured C*: eps * sup |grad| over all cutoffs (analytic gradients of
    // the M_k; chi gradients are differences of disjoint-shell gradients for
    // the bump profile, bounded by the same sup)
    Real cstar = 0;
    for (int k = 0; k <= j; ++k) {
        const Real a = fam.shell_radius(k);
        std::int64_t idx = 0;
        for (int iz = 0; iz < n; ++iz)
            for (int iy = 0; iy < n; ++iy)
                for (int ix = 0; ix < n; ++ix, ++idx) {
                    const Real dx = g.wrap(g.coord(ix) - x0[0]);
                    const Real dy = g.wrap(g.coord(iy) - x0[1]);
                    const Real dz = g.wrap(g.coord(iz) - x0[2]);
                    const Real rho = std::sqrt(dx * dx + dy * dy + dz * dz);
                    if (rho <= 0) continue;
                    Real gx = detail::profile_grad(fam.profile, a, fam.width, fam.snap, rho, dx);
                    Real gy = detail::profile_grad(fam.profile, a, fam.width, fam.snap, rho, dy);
                    Real gz = detail::profile_grad(fam.profile, a, fam.width, fam.snap, rho, dz);
                    cstar = std::max(cstar, std::sqrt(gx * gx + gy * gy + gz * gz));
                }
    }
    fam.C_star_measured = epsilon * cstar;
    return fam;
}

/// Worst violation of the partition identities on the grid:
/// chi_0 + eta_0 = 1 everywhere and eta_k = chi_{k+1} + eta_{k+1}.
template <class Real>
Real partition_violation(const LocalizationFamilyT<Real>& fam) {
    Real worst = 0;
    const size_t sz = fam.Phi.values().size();
    for (size_t t = 0; t < sz; ++t)
        worst = std::max(worst,
                         std::abs(fam.chi[0].values()[t].real() + fam.eta[0].values()[t].real() - Real(1)));
    for (int k = 0; k + 1 <= fam.j; ++k)
        for (size_t t = 0; t < sz; ++t) {
            const Real v = fam.eta[static_cast<size_t>(k)].values()[t].real() -
                           fam.chi[static_cast<size_t>(k) + 1].values()[t].real() -
                           fam.eta[static_cast<size_t>(k) + 1].values()[t].real();
            worst = std::max(worst, std::abs(v));
        }
    return worst;
}

/// Indicator-style support checks of the Appendix-B prescription; returns the
/// worst absolute violation over the grid (0 for the bump profile).
template <class Real>
Real support_violation(const LocalizationFamilyT<Real>& fam) {
    const auto& g = fam.Phi.grid();
    const int n = g.n();
    const Real eps = fam.epsilon;
    const int j = fam.j;
    auto omega_r = [&](Real delta) { return fam.R - delta; };  // radius of omega_delta
    Real worst = 0;
    std::int64_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                const Real dx = g.wrap(g.coord(ix) - fam.x0[0]);
                const Real dy = g.wrap(g.coord(iy) - fam.x0[1]);
                const Real dz = g.wrap(g.coord(iz) - fam.x0[2]);
                const Real rho = std::sqrt(dx * dx + dy * dy + dz * dz);
                auto in = [&](Real delta) { return rho < omega_r(delta); };
                // range [0,1]
                auto rng01 = [&](const FieldT<Real>& f) {
                    const Real v = f[idx].real();
                    worst = std::max(worst, std::max(-v, v - Real(1)));
                };
                rng01(fam.Phi);
                for (const auto& f : fam.chi) rng01(f);
                for (const auto& f : fam.eta) rng01(f);
                // Phi: 1 on omega_{eps(j+1)}, 0 outside omega_{eps(j+3/4)}
                if (in(eps * (j + 1)))
                    worst = std::max(worst, std::abs(fam.Phi[idx].real() - Real(1)));
                if (!in(eps * (j + Real(0.75)))) worst = std::max(worst, std::abs(fam.Phi[idx].real()));
                // chi_0: 1 on omega_{eps(j+1/2)}, supported in omega_{eps(j+1/4)}
                if (in(eps * (j + Real(0.5))))
                    worst = std::max(worst, std::abs(fam.chi[0][idx].real() - Real(1)));
                if (!in(eps * (j + Real(0.25)))) worst = std::max(worst, std::abs(fam.chi[0][idx].real()));
                for (int k = 1; k <= j; ++k) {
                    // chi_k: 1 on omega_{eps(j-k+1/2)} \ omega_{eps(j-k+1+1/4)},
                    // 0 outside omega_{eps(j-k+1/4)} \ omega_{eps(j-k+1+1/2)}
                    const auto& c = fam.chi[static_cast<size_t>(k)];
                    if (in(eps * (j - k + Real(0.5))) && !in(eps * (j - k + 1 + Real(0.25))))
                        worst = std::max(worst, std::abs(c[idx].real() - Real(1)));
                    if (!in(eps * (j - k + Real(0.25))) || in(eps * (j - k + 1 + Real(0.5))))
                        worst = std::max(worst, std::abs(c[idx].real()));
                }
                for (int k = 0; k <= j; ++k) {
                    // eta_k: 1 outside omega_{eps(j-k+1/4)}, 0 on omega_{eps(j-k+1/2)}
                    const auto& e = fam.eta[static_cast<size_t>(k)];
                    if (!in(eps * (j - k + Real(0.25))))
                        worst = std::max(worst, std::abs(e[idx].real() - Real(1)));
                    if (in(eps * (j - k + Real(0.5)))) worst = std::max(worst, std::abs(e[idx].real()));
                }
            }
    return worst;
}

/// Periodized Gaussian sum_n exp(-|x + nL|^2 / (2 s^2)), smooth on the torus
/// (the truncated Gaussian has gradient kinks at the box faces that a
/// high-order derivative identity amplifies).
template <class Real>
FieldT<Real> periodized_gaussian(const Grid3T<Real>& g, Real s) {
    auto theta = [&](Real t) {
        Real acc = 0;
        for (int k = -3; k <= 3; ++k) {
            const Real u = t + k * g.box_length();
            acc += std::exp(-u * u / (2 * s * s));
        }
        return acc;
    };
    FieldT<Real> f(g, Space::Real);
    std::vector<Real> th(static_cast<size_t>(g.n()));
    for (int i = 0; i < g.n(); ++i) th[static_cast<size_t>(i)] = theta(g.coord(i));
    const int n = g.n();
    std::int64_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx)
                f[idx] = th[static_cast<size_t>(ix)] * th[static_cast<size_t>(iy)] *
                         th[static_cast<size_t>(iz)];
    return f;
}

/// beta_k chains for Lemma B.1: |beta_k| = k, beta_{k-1} < beta_k,
/// beta_ell <= sigma.
inline std::vector<MultiIndex> canonical_chain(const MultiIndex& sigma, int ell) {
    std::vector<MultiIndex> ch{MultiIndex{}};
    MultiIndex cur;
    for (int k = 0; k < ell; ++k) {
        for (int ax = 0; ax < 3; ++ax)
            if (cur[ax] < sigma[ax]) {
                cur[ax] += 1;
                break;
            }
        ch.push_back(cur);
    }
    return ch;
}

inline std::vector<MultiIndex> random_chain(const MultiIndex& sigma, int ell, Rng& rng) {
    std::vector<MultiIndex> ch{MultiIndex{}};
    MultiIndex cur;
    for (int k = 0; k < ell; ++k) {
        int axes[3], na = 0;
        for (int ax = 0; ax < 3; ++ax)
            if (cur[ax] < sigma[ax]) axes[na++] = ax;
        cur[axes[rng.integer(static_cast<std::uint64_t>(na))]] += 1;
        ch.push_back(cur);
    }
    return ch;
}

/// Relative L^2 residual of the localization identity
///   D^sigma g = sum_k D^{beta_k} chi_k D^{sigma-beta_k} g
///             + sum_k D^{beta_k} [eta_k, D^{mu_k}] D^{sigma-beta_{k+1}} g
///             + D^{beta_ell} eta_ell D^{sigma-beta_ell} g,
/// evaluated with spectral derivatives; the commutator is the multiplication
/// operator -(d^{mu_k} eta_k), computed from the analytic profile gradient.
/// All derivative bookkeeping uses partial derivatives; the identity is
/// homogeneous in the (-i) powers so the D-convention residual is identical.
template <class Real>
Real localization_identity_check(const FieldT<Real>& gfun, const MultiIndex& sigma, int ell,
                                 const LocalizationFamilyT<Real>& fam,
                                 const std::vector<MultiIndex>& chain) {
    if (sigma.order() != fam.j)
        throw std::invalid_argument("localization_identity_check: |sigma| must equal family j");
    if (ell < 1 || ell > sigma.order())
        throw std::invalid_argument("localization_identity_check: need 1 <= ell <= |sigma|");
    if (static_cast<int>(chain.size()) != ell + 1 || !(chain[static_cast<size_t>(ell)] <= sigma))
        throw std::invalid_argument("localization_identity_check: invalid beta chain");
    const auto& g = gfun.grid();
    FieldT<Real> ghat = to_space(gfun, Space::Fourier);

    std::map<std::array<int, 3>, FieldT<Real>> vcache;
    auto deriv_g = [&](const MultiIndex& tau) -> const FieldT<Real>& {
        auto it = vcache.find(tau.v);
        if (it == vcache.end())
            it = vcache.emplace(tau.v, spectral_derivative(gfun, tau, &ghat)).first;
        return it->second;
    };

    FieldT<Real> rhshat(g, Space::Fourier);
    auto accumulate = [&](const FieldT<Real>& product, const MultiIndex& bk) {
        FieldT<Real> ph = forward_dft(product);
        FieldT<Real> dph = spectral_derivative(ph, bk);
        rhshat += dph;
    };
    for (int k = 0; k <= ell; ++k) {
        const MultiIndex& bk = chain[static_cast<size_t>(k)];
        const MultiIndex rem = sigma - bk;
        accumulate(hadamard(fam.chi[static_cast<size_t>(k)], deriv_g(rem)), bk);
    }
    for (int k = 0; k < ell; ++k) {
        const MultiIndex& bk = chain[static_cast<size_t>(k)];
        const MultiIndex mu = chain[static_cast<size_t>(k) + 1] - bk;
        int axis = 0;
        for (int ax = 0; ax < 3; ++ax)
            if (mu[ax] == 1) axis = ax;
        // -(d^mu eta_k) = +dM_k/dx_axis = -grad_eta
        FieldT<Real> scal = fam.grad_eta(k, axis);
        scal *= Real(-1);
        const MultiIndex rem = sigma - chain[static_cast<size_t>(k) + 1];
        accumulate(hadamard(scal, deriv_g(rem)), bk);
    }
    {
        const MultiIndex& bl = chain[static_cast<size_t>(ell)];
        accumulate(hadamard(fam.eta[static_cast<size_t>(ell)], deriv_g(sigma - bl)), bl);
    }
    FieldT<Real> lhshat = spectral_derivative(ghat, sigma);
    Real num = 0, den = 0;
    for (size_t t = 0; t < rhshat.values().size(); ++t) {
        num += std::norm(rhshat.values()[t] - lhshat.values()[t]);
        den += std::norm(lhshat.values()[t]);
    }
    return std::sqrt(num / den);
}

} // namespace prhf
