#pragma once

#include "prhf/localization.hpp"
#include "prhf/operators.hpp"
#include "prhf/rng.hpp"

namespace prhf {

inline Field random_unit_lp_field(const Grid3& g, double p, Rng& rng) {
    Field f(g, Space::Real);
    for (auto& z : f.values()) z = {rng.normal(), rng.normal()};
    const double nrm = norm_lp(f, p);
    f *= 1.0 / nrm;
    return f;
}

/// Random band-limited field: iid Gaussian Fourier coefficients damped by
/// exp(-|p|^2 / (2 (pmax/4)^2)) and cut beyond |p| > pmax/2.
inline Field random_band_limited_field(const Grid3& g, Rng& rng) {
    Field fh(g, Space::Fourier);
    const double pmax = Grid3::pi() / g.spacing();
    const int n = g.n();
    std::int64_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                const double pa = norm3(g.freq_point(ix, iy, iz));
                if (pa > pmax / 2) continue;
                const double damp = std::exp(-pa * pa / (2 * std::pow(pmax / 4, 2)));
                fh[idx] = std::complex<double>(rng.normal(), rng.normal()) * damp;
            }
    Field f = inverse_dft(fh);
    const double nrm = norm_l2(f);
    if (nrm > 0) f *= 1.0 / nrm;
    return f;
}

/// Exponent triple of Lemma C.2: 1/p + 1/q + 1/r = 2, q in (1, inf),
/// p, r in [1, inf); the operator maps L^p -> L^{q*}, 1/q* = 1 - 1/q.
struct ExponentTriple {
    double p = 5, q = 1.25, r = 1;

    double qstar() const { return q / (q - 1.0); }
    void validate(int beta_order) const {
        if (std::abs(1 / p + 1 / q + 1 / r - 2.0) > 1e-9)
            throw std::invalid_argument("ExponentTriple: 1/p + 1/q + 1/r must equal 2");
        if (!(q > 1.0)) throw std::invalid_argument("ExponentTriple: q > 1 required");
        if (p < 1 || r < 1) throw std::invalid_argument("ExponentTriple: p, r >= 1 required");
        if (r == 1.0 && beta_order <= 1)
            throw std::invalid_argument("ExponentTriple: |beta| > 1 required when r = 1");
        if (r * (beta_order + 2) <= 3)
            throw std::invalid_argument("ExponentTriple: r(|beta|+2) > 3 required");
    }
};

struct SmoothingProbeResult {
    double probe_norm = 0;
    double paper_bound = 0;
    double support_distance = 0;
};

/// Paper bound of Eq. (C.2) for || Phi E(p)^-1 D^beta chi ||_{L^p -> L^{q*}}.
inline double smoothing_paper_bound(const MultiIndex& beta, double d, double r, double phi_sup,
                                    double chi_sup) {
    return 4.0 * std::sqrt(2.0) / Grid3::pi() * multi_factorial_d(beta) *
           std::pow(8.0 / d, beta.order()) * std::pow(d, 3.0 / r - 2.0) *
           std::pow(r * (beta.order() + 2) - 3.0, -1.0 / r) * phi_sup * chi_sup;
}

/// Lower-bounds || Phi E^-1 D^beta chi || by random probing: max over trials
/// of the L^{q*} norm of the operator applied to unit-L^p inputs. Requires
/// grid-disjoint supports; d is the measured minimum-image distance between
/// the support sets (capped at L/4 by precondition).
inline SmoothingProbeResult smoothing_norm_probe(const Field& Phi, const Field& chi,
                                                 const MultiIndex& beta,
                                                 const ExponentTriple& expo, const Physics& ph,
                                                 int trials, std::uint64_t seed) {
    expo.validate(beta.order());
    const auto& g = Phi.grid();
    if (chi.grid() != g) throw std::invalid_argument("smoothing_norm_probe: grid mismatch");
    // support sets
    std::vector<std::array<double, 3>> s1, s2;
    const int n = g.n();
    std::int64_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                if (std::abs(Phi[idx]) > 0) s1.push_back({g.coord(ix), g.coord(iy), g.coord(iz)});
                if (std::abs(chi[idx]) > 0) s2.push_back({g.coord(ix), g.coord(iy), g.coord(iz)});
            }
    if (s1.empty() || s2.empty())
        throw std::invalid_argument("smoothing_norm_probe: empty support");
    double d2min = 1e300;
    for (const auto& a : s1)
        for (const auto& b : s2) {
            const double dx = g.wrap(a[0] - b[0]);
            const double dy = g.wrap(a[1] - b[1]);
            const double dz = g.wrap(a[2] - b[2]);
            d2min = std::min(d2min, dx * dx + dy * dy + dz * dz);
        }
    const double d = std::sqrt(d2min);
    if (d <= 0) throw std::invalid_argument("smoothing_norm_probe: overlapping supports");
    if (d > g.box_length() / 4)
        throw std::invalid_argument("smoothing_norm_probe: support distance above L/4");

    Rng rng(seed);
    double probe = 0;
    for (int t = 0; t < trials; ++t) {
        Field f = random_unit_lp_field(g, expo.p, rng);
        Field cf = hadamard(chi, f);
        // D-convention multiplier p^beta / E(p)
        Field out = apply_multiplier(cf, [&](double px, double py, double pz) {
            double m = 1;
            for (int q_ = 0; q_ < beta[0]; ++q_) m *= px;
            for (int q_ = 0; q_ < beta[1]; ++q_) m *= py;
            for (int q_ = 0; q_ < beta[2]; ++q_) m *= pz;
            return m / energy_symbol(px * px + py * py + pz * pz, ph.alpha);
        });
        out = hadamard(Phi, out);
        probe = std::max(probe, norm_lp(out, expo.qstar()));
    }
    SmoothingProbeResult res;
    res.probe_norm = probe;
    res.support_distance = d;
    res.paper_bound = smoothing_paper_bound(beta, d, expo.r, norm_sup(Phi), norm_sup(chi));
    return res;
}

/// Probe of ||S_1||_{B_p}, S_1 = E(p)^{-1} D_1.
inline double multiplier_norm_probe(const Grid3& g, double p, const Physics& ph, int trials,
                                    std::uint64_t seed) {
    if (!(p > 1.0)) throw std::invalid_argument("multiplier_norm_probe: p in (1, inf)");
    Rng rng(seed);
    double probe = 0;
    for (int t = 0; t < trials; ++t) {
        Field f = random_unit_lp_field(g, p, rng);
        Field out = apply_multiplier(f, [&](double px, double py, double pz) {
            return px / energy_symbol(px * px + py * py + pz * pz, ph.alpha);
        });
        probe = std::max(probe, norm_lp(out, p));
    }
    return probe;
}

/// Mollified ball cutoff for probe geometry (bump profile, exact support
/// inside radius rad + width).
inline Field ball_cutoff(const Grid3& g, const Vec3& center, double rad, double width) {
    return sample(g, [&](const Vec3& w) {
        const double rho = norm3(w);
        return detail::profile_value(CutoffProfile::SmoothBump, rad, width, 0.0, rho);
    }, center);
}

} // namespace prhf
