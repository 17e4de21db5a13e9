#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "prhf/fft_backend.hpp"
#include "prhf/grid.hpp"

namespace prhf {

enum class Space { Real, Fourier };

/// Complex scalar function sampled on a Grid3, tagged with the space it lives
/// in. Transforms are scaled so that discrete L^2 norms (with cell-volume
/// weights) match the continuum norms of the band-limited interpolant:
///   fhat(p) = (2 pi)^{-3/2} sum_j f(x_j) e^{-i p x_j} h^3,
///   f(x)    = (2 pi)^{-3/2} sum_k fhat(p_k) e^{+i p_k x} (2 pi / L)^3.
template <class Real>
class FieldT {
  public:
    using Cplx = std::complex<Real>;

    /// Placeholder state (smallest legal grid, zeros); assign before use.
    FieldT() : FieldT(Grid3T<Real>(8, Real(1)), Space::Real) {}

    FieldT(const Grid3T<Real>& g, Space s)
        : grid_(g), space_(s), v_(static_cast<size_t>(g.size())) {}
    FieldT(const Grid3T<Real>& g, Space s, std::vector<Cplx> vals)
        : grid_(g), space_(s), v_(std::move(vals)) {
        if (static_cast<std::int64_t>(v_.size()) != g.size())
            throw std::invalid_argument("Field: value count does not match grid");
    }

    const Grid3T<Real>& grid() const { return grid_; }
    Space space() const { return space_; }
    std::vector<Cplx>& values() { return v_; }
    const std::vector<Cplx>& values() const { return v_; }
    Cplx& operator[](std::int64_t i) { return v_[static_cast<size_t>(i)]; }
    const Cplx& operator[](std::int64_t i) const { return v_[static_cast<size_t>(i)]; }
    Cplx& at(int ix, int iy, int iz) { return v_[static_cast<size_t>(grid_.index(ix, iy, iz))]; }
    const Cplx& at(int ix, int iy, int iz) const {
        return v_[static_cast<size_t>(grid_.index(ix, iy, iz))];
    }

    Real measure() const {
        return space_ == Space::Real ? grid_.cell_volume() : grid_.freq_cell_volume();
    }

  private:
    Grid3T<Real> grid_;
    Space space_;
    std::vector<Cplx> v_;
};

using Field = FieldT<double>;

namespace detail {

// (-1)^{ix+iy+iz} phase: recentres the transform so that coordinates are
// measured from the box center and frequencies carry their natural sign.
template <class Real>
void apply_center_phase(const Grid3T<Real>& g, std::vector<std::complex<Real>>& v) {
    const int n = g.n();
    std::int64_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx)
                if ((ix + iy + iz) & 1) v[static_cast<size_t>(idx)] = -v[static_cast<size_t>(idx)];
}

} // namespace detail

template <class Real>
FieldT<Real> forward_dft(const FieldT<Real>& f) {
    if (f.space() != Space::Real)
        throw std::invalid_argument("forward_dft: field is not in real space");
    FieldT<Real> out(f.grid(), Space::Fourier, f.values());
    detail::FftBackend<Real>::run(f.grid().n(), out.values().data(), FFTW_FORWARD);
    detail::apply_center_phase(f.grid(), out.values());
    const Real twopi = Real(2) * Grid3T<Real>::pi();
    const Real scale = f.grid().cell_volume() / (twopi * std::sqrt(twopi));
    for (auto& z : out.values()) z *= scale;
    return out;
}

template <class Real>
FieldT<Real> inverse_dft(const FieldT<Real>& f) {
    if (f.space() != Space::Fourier)
        throw std::invalid_argument("inverse_dft: field is not in Fourier space");
    FieldT<Real> out(f.grid(), Space::Real, f.values());
    detail::apply_center_phase(f.grid(), out.values());
    detail::FftBackend<Real>::run(f.grid().n(), out.values().data(), FFTW_BACKWARD);
    const Real twopi = Real(2) * Grid3T<Real>::pi();
    const Real scale = f.grid().freq_cell_volume() / (twopi * std::sqrt(twopi));
    for (auto& z : out.values()) z *= scale;
    return out;
}

/// Convert to the requested space (no-op when already there).
template <class Real>
FieldT<Real> to_space(const FieldT<Real>& f, Space s) {
    if (f.space() == s) return f;
    return s == Space::Fourier ? forward_dft(f) : inverse_dft(f);
}

/// Sample fn(x - center) on the grid, minimum-image wrapped. Non-finite values
/// are tolerated only in the cell containing the center (|x - center| <
/// spacing/2) where they are replaced by 0; callers needing a different
/// regularization overwrite that cell themselves.
template <class Real, class Fn>
FieldT<Real> sample(const Grid3T<Real>& g, Fn&& fn, const Vec3T<Real>& center = {0, 0, 0}) {
    FieldT<Real> out(g, Space::Real);
    const int n = g.n();
    std::int64_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                Vec3T<Real> w{g.wrap(g.coord(ix) - center[0]), g.wrap(g.coord(iy) - center[1]),
                              g.wrap(g.coord(iz) - center[2])};
                const Real val = static_cast<Real>(fn(w));
                if (!std::isfinite(static_cast<double>(val))) {
                    if (norm3(w) < g.spacing() / Real(2)) {
                        out[idx] = Real(0);
                        continue;
                    }
                    throw std::domain_error("sample: non-finite value outside the singular cell");
                }
                out[idx] = val;
            }
    return out;
}

template <class Real>
std::complex<Real> inner(const FieldT<Real>& a, const FieldT<Real>& b) {
    if (a.grid() != b.grid() || a.space() != b.space())
        throw std::invalid_argument("inner: mismatched fields");
    std::complex<Real> s{0, 0};
    const auto& av = a.values();
    const auto& bv = b.values();
    for (size_t i = 0; i < av.size(); ++i) s += std::conj(av[i]) * bv[i];
    return s * a.measure();
}

template <class Real>
Real norm_l2(const FieldT<Real>& f) {
    Real s = 0;
    for (const auto& z : f.values()) s += std::norm(z);
    return std::sqrt(s * f.measure());
}

/// Discrete L^p norm (sum |f_i|^p * cell volume)^{1/p}; p = inf -> max.
template <class Real>
Real norm_lp(const FieldT<Real>& f, Real p) {
    Real s = 0;
    for (const auto& z : f.values()) s += std::pow(std::abs(z), p);
    return std::pow(s * f.measure(), Real(1) / p);
}

template <class Real>
Real norm_sup(const FieldT<Real>& f) {
    Real m = 0;
    for (const auto& z : f.values()) m = std::max(m, std::abs(z));
    return m;
}

// elementwise helpers
template <class Real>
FieldT<Real>& operator+=(FieldT<Real>& a, const FieldT<Real>& b) {
    for (size_t i = 0; i < a.values().size(); ++i) a.values()[i] += b.values()[i];
    return a;
}
template <class Real>
FieldT<Real>& operator-=(FieldT<Real>& a, const FieldT<Real>& b) {
    for (size_t i = 0; i < a.values().size(); ++i) a.values()[i] -= b.values()[i];
    return a;
}
template <class Real, class S>
FieldT<Real>& operator*=(FieldT<Real>& a, S s) {
    for (auto& z : a.values()) z *= s;
    return a;
}

template <class Real>
FieldT<Real> operator+(FieldT<Real> a, const FieldT<Real>& b) { return a += b; }
template <class Real>
FieldT<Real> operator-(FieldT<Real> a, const FieldT<Real>& b) { return a -= b; }
template <class Real, class S>
FieldT<Real> operator*(S s, FieldT<Real> a) { return a *= s; }

/// Pointwise product a .* b (real space).
template <class Real>
FieldT<Real> hadamard(const FieldT<Real>& a, const FieldT<Real>& b) {
    if (a.grid() != b.grid()) throw std::invalid_argument("hadamard: grid mismatch");
    FieldT<Real> out = a;
    for (size_t i = 0; i < out.values().size(); ++i) out.values()[i] *= b.values()[i];
    return out;
}

} // namespace prhf
