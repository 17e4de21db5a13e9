#pragma once

#include <span>
#include <vector>

#include "prhf/field.hpp"

namespace prhf {

/// Model parameters of the atomic Hamiltonian: kinetic symbol
/// T(p) = sqrt(|p|^2 + alpha^-2) - alpha^-1 and attraction V = Z alpha / |x|.
struct Physics {
    double alpha = 1.0 / 137.0;
    double Z = 1.0;
    int N = 1;

    Physics() = default;
    Physics(double alpha_, double Z_, int N_) : alpha(alpha_), Z(Z_), N(N_) {
        if (!(alpha > 0) || !(Z > 0) || N < 1)
            throw std::invalid_argument("Physics: need alpha > 0, Z > 0, N >= 1");
    }

    /// Z*alpha >= 2/pi: the Hamiltonian is no longer bounded below.
    bool unstable() const { return Z * alpha >= 2.0 / Grid3::pi(); }
};

/// Apply a Fourier multiplier m(p); the result is returned in the caller's
/// space tag.
template <class Real, class Mult>
FieldT<Real> apply_multiplier(const FieldT<Real>& f, Mult&& m) {
    const Space orig = f.space();
    FieldT<Real> fh = to_space(f, Space::Fourier);
    const auto& g = fh.grid();
    const int n = g.n();
    std::int64_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx)
                fh[idx] *= m(g.freq(ix), g.freq(iy), g.freq(iz));
    return orig == Space::Real ? inverse_dft(fh) : fh;
}

/// T(p) = E(p) - 1/alpha evaluated in the cancellation-safe form
/// |p|^2 / (E(p) + 1/alpha).
inline double kinetic_symbol(double p2, double alpha) {
    const double inva = 1.0 / alpha;
    return p2 / (std::sqrt(p2 + inva * inva) + inva);
}

inline double energy_symbol(double p2, double alpha) {
    const double inva = 1.0 / alpha;
    return std::sqrt(p2 + inva * inva);
}

inline Field apply_kinetic(const Field& f, const Physics& ph) {
    return apply_multiplier(f, [&](double px, double py, double pz) {
        return kinetic_symbol(px * px + py * py + pz * pz, ph.alpha);
    });
}

inline Field apply_energy(const Field& f, const Physics& ph) {
    return apply_multiplier(f, [&](double px, double py, double pz) {
        return energy_symbol(px * px + py * py + pz * pz, ph.alpha);
    });
}

inline Field apply_inverse_energy(const Field& f, const Physics& ph) {
    return apply_multiplier(f, [&](double px, double py, double pz) {
        return 1.0 / energy_symbol(px * px + py * py + pz * pz, ph.alpha);
    });
}

/// Equivalent-volume-ball radius of a grid cell: h^3 = (4/3) pi r^3.
inline double cell_ball_radius(const Grid3& g) {
    return g.spacing() * std::cbrt(3.0 / (4.0 * Grid3::pi()));
}

/// V(x) = Z alpha / |x| sampled with the nucleus at the box center; the
/// singular cell (|x| < h/2) carries the cell-average value 3/(2 r_cell).
inline Field coulomb_attraction(const Grid3& g, const Physics& ph) {
    const double rc = cell_ball_radius(g);
    Field out = sample(g, [&](const Vec3& w) {
        const double r = norm3(w);
        if (r < g.spacing() / 2.0) return ph.Z * ph.alpha * 1.5 / rc;
        return ph.Z * ph.alpha / r;
    });
    return out;
}

/// Periodic Poisson solve -Lap U = 4 pi rho with the zero mode gauged to 0.
/// Accepts complex densities (used by pair potentials); the density is taken
/// as-is, componentwise.
inline Field poisson_potential(const Field& density) {
    Field rh = to_space(density, Space::Fourier);
    const auto& g = rh.grid();
    const int n = g.n();
    std::int64_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                const double px = g.freq(ix), py = g.freq(iy), pz = g.freq(iz);
                const double p2 = px * px + py * py + pz * pz;
                rh[idx] = (p2 > 0) ? rh[idx] * (4.0 * Grid3::pi() / p2)
                                   : std::complex<double>(0.0, 0.0);
            }
    return inverse_dft(rh);
}

/// Free-space comparison kernel: convolution with the minimum-image Coulomb
/// kernel 1/|d| (cell-averaged at d = 0). Pointwise nonnegative, so the
/// positive-kernel properties of the direct/exchange forms hold for it
/// exactly; used as the diagnostic route where the gauged spectral kernel's
/// zero-mode convention makes mixed-density forms indefinite.
inline Field poisson_potential_minimage(const Field& density) {
    const auto& g = density.grid();
    const double rc = cell_ball_radius(g);
    Field kern = sample(g, [&](const Vec3& w) {
        const double r = norm3(w);
        if (r < g.spacing() / 2) return 1.5 / rc;
        return 1.0 / r;
    });
    Field kh = forward_dft(kern);
    Field rh = to_space(density, Space::Fourier);
    const double conv = std::pow(2 * Grid3::pi(), 1.5);
    for (size_t i = 0; i < rh.values().size(); ++i)
        rh.values()[i] *= conv * kh.values()[i];
    return inverse_dft(rh);
}

/// Hartree potential of a real density. Rejects densities with a significant
/// imaginary part.
inline Field hartree_potential(const Field& density) {
    if (density.space() != Space::Real)
        throw std::invalid_argument("hartree_potential: density must be real-space");
    double im = 0, tot = 0;
    for (const auto& z : density.values()) {
        im = std::max(im, std::abs(z.imag()));
        tot = std::max(tot, std::abs(z));
    }
    if (tot > 0 && im > 1e-10 * tot)
        throw std::invalid_argument("hartree_potential: density has a significant imaginary part");
    return poisson_potential(density);
}

/// Newtonian potential of phi_a conj(phi_b); satisfies the discrete Poisson
/// identity -Lap U = 4 pi phi_a conj(phi_b) exactly (up to rounding and the
/// gauged zero mode).
struct PairPotential {
    int a = 0, b = 0;
    Field field;
};

inline PairPotential pair_potential(const Field& fa, const Field& fb, int ia = 0, int ib = 0) {
    if (fa.grid() != fb.grid()) throw std::invalid_argument("pair_potential: grid mismatch");
    Field dens = fa;
    for (size_t i = 0; i < dens.values().size(); ++i)
        dens.values()[i] = fa.values()[i] * std::conj(fb.values()[i]);
    return PairPotential{ia, ib, poisson_potential(dens)};
}

/// Total direct (Hartree) potential sum_l U_{l,l} of an orbital list.
inline Field total_direct_potential(std::span<const Field> orbitals) {
    if (orbitals.empty()) throw std::invalid_argument("total_direct_potential: empty orbital set");
    Field dens(orbitals[0].grid(), Space::Real);
    for (const auto& o : orbitals) {
        if (o.grid() != dens.grid())
            throw std::invalid_argument("total_direct_potential: grid mismatch");
        for (size_t i = 0; i < dens.values().size(); ++i)
            dens.values()[i] += std::norm(o.values()[i]);
    }
    return poisson_potential(dens);
}

/// R_phi u = (sum_l U_{l,l}) u. When the total potential is already at hand
/// (one SCF iteration applies R many times) pass it via `precomputed`.
inline Field apply_direct(std::span<const Field> orbitals, const Field& u,
                          const Field* precomputed = nullptr) {
    Field R = precomputed ? *precomputed : total_direct_potential(orbitals);
    if (u.grid() != R.grid()) throw std::invalid_argument("apply_direct: grid mismatch");
    return hadamard(R, u);
}

/// K_phi u = sum_l U_{u,l} phi_l with U_{u,l} the pair potential of
/// conj(phi_l) u; N Poisson solves per application.
inline Field apply_exchange(std::span<const Field> orbitals, const Field& u) {
    if (orbitals.empty()) throw std::invalid_argument("apply_exchange: empty orbital set");
    Field out(u.grid(), Space::Real);
    for (const auto& o : orbitals) {
        if (o.grid() != u.grid()) throw std::invalid_argument("apply_exchange: grid mismatch");
        Field dens(u.grid(), Space::Real);
        for (size_t i = 0; i < dens.values().size(); ++i)
            dens.values()[i] = std::conj(o.values()[i]) * u.values()[i];
        Field U = poisson_potential(dens);
        for (size_t i = 0; i < out.values().size(); ++i)
            out.values()[i] += U.values()[i] * o.values()[i];
    }
    return out;
}

/// Hartree--Fock operator h_phi u = (T - V) u + alpha R u - alpha K u.
/// V and the total direct potential may be passed in to avoid rebuilding them.
inline Field apply_hf(std::span<const Field> orbitals, const Field& u, const Physics& ph,
                      const Field* V = nullptr, const Field* Rtot = nullptr) {
    Field out = apply_kinetic(u, ph);
    Field Vloc = V ? *V : coulomb_attraction(u.grid(), ph);
    for (size_t i = 0; i < out.values().size(); ++i)
        out.values()[i] -= Vloc.values()[i] * u.values()[i];
    Field Ru = apply_direct(orbitals, u, Rtot);
    Field Ku = apply_exchange(orbitals, u);
    for (size_t i = 0; i < out.values().size(); ++i)
        out.values()[i] += ph.alpha * (Ru.values()[i] - Ku.values()[i]);
    return out;
}

} // namespace prhf
