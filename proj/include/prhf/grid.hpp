#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace prhf {

template <class Real>
using Vec3T = std::array<Real, 3>;
using Vec3 = Vec3T<double>;

template <class Real>
inline Real norm3(const Vec3T<Real>& v) {
    return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

/// Periodic cubic sampling lattice, centered box [-L/2, L/2)^3, nucleus at the
/// box center. Linear index runs x fastest: idx = ix + n*(iy + n*iz).
template <class Real>
class Grid3T {
  public:
    Grid3T(int n_per_axis, Real box_length)
        : n_(n_per_axis), box_(box_length), h_(box_length / static_cast<Real>(n_per_axis)) {
        if (n_ < 8 || n_ % 2 != 0)
            throw std::invalid_argument("Grid3: n_per_axis must be even and >= 8");
        if (!(box_ > Real(0))) throw std::invalid_argument("Grid3: box_length must be > 0");
    }

    int n() const { return n_; }
    std::int64_t size() const { return static_cast<std::int64_t>(n_) * n_ * n_; }
    Real box_length() const { return box_; }
    Real spacing() const { return h_; }
    Real cell_volume() const { return h_ * h_ * h_; }
    /// Frequency-space cell volume (2 pi / L)^3.
    Real freq_cell_volume() const {
        const Real dp = Real(2) * pi() * (Real(1) / box_);
        return dp * dp * dp;
    }

    /// Coordinate along one axis for storage index i in [0, n).
    Real coord(int i) const { return -box_ / Real(2) + h_ * static_cast<Real>(i); }

    /// Angular frequency along one axis for storage index i (FFT ordering):
    /// 2 pi m / L with m = i for i < n/2 and m = i - n otherwise.
    Real freq(int i) const {
        const int m = (i < n_ / 2) ? i : i - n_;
        return Real(2) * pi() * static_cast<Real>(m) / box_;
    }

    Vec3T<Real> point(int ix, int iy, int iz) const {
        return {coord(ix), coord(iy), coord(iz)};
    }
    Vec3T<Real> freq_point(int ix, int iy, int iz) const {
        return {freq(ix), freq(iy), freq(iz)};
    }

    std::int64_t index(int ix, int iy, int iz) const {
        return static_cast<std::int64_t>(ix) +
               static_cast<std::int64_t>(n_) * (iy + static_cast<std::int64_t>(n_) * iz);
    }

    /// Minimum-image displacement component.
    Real wrap(Real d) const {
        return d - box_ * std::round(d / box_);
    }

    bool operator==(const Grid3T& o) const { return n_ == o.n_ && box_ == o.box_; }
    bool operator!=(const Grid3T& o) const { return !(*this == o); }

    static constexpr Real pi() { return Real(3.14159265358979323846264338327950288L); }

  private:
    int n_;
    Real box_;
    Real h_;
};

using Grid3 = Grid3T<double>;

} // namespace prhf
