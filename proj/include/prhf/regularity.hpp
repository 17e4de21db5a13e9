#pragma once

#include <map>
#include <optional>

#include "prhf/multiindex.hpp"
#include "prhf/operators.hpp"
#include "prhf/scf.hpp"

namespace prhf {

inline constexpr int kMaxDerivativeOrder = 10;

/// partial^beta f by Fourier multiplication with (i p)^beta. The i-powers are
/// kept explicit: multiplier = i^{|beta|} * p^beta.
template <class Real>
FieldT<Real> spectral_derivative(const FieldT<Real>& f, const MultiIndex& beta,
                                 const FieldT<Real>* fourier_cache = nullptr) {
    if (beta.order() > kMaxDerivativeOrder)
        throw std::invalid_argument("spectral_derivative: order above cap (noise amplification)");
    const Space orig = f.space();
    FieldT<Real> fh = fourier_cache ? *fourier_cache : to_space(f, Space::Fourier);
    const auto& g = fh.grid();
    const int n = g.n();
    static const std::complex<Real> iphase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const std::complex<Real> ip = iphase[beta.order() % 4];
    std::int64_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                Real m = Real(1);
                const Real px = g.freq(ix), py = g.freq(iy), pz = g.freq(iz);
                for (int t = 0; t < beta[0]; ++t) m *= px;
                for (int t = 0; t < beta[1]; ++t) m *= py;
                for (int t = 0; t < beta[2]; ++t) m *= pz;
                fh[idx] *= ip * m;
            }
    return orig == Space::Real ? inverse_dft(fh) : fh;
}

/// Grid indices inside the open ball |x - center| < radius (minimum image).
template <class Real>
std::vector<std::int64_t> region_indices(const Grid3T<Real>& g, const Vec3T<Real>& center,
                                         Real radius) {
    std::vector<std::int64_t> out;
    const int n = g.n();
    std::int64_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                const Real dx = g.wrap(g.coord(ix) - center[0]);
                const Real dy = g.wrap(g.coord(iy) - center[1]);
                const Real dz = g.wrap(g.coord(iz) - center[2]);
                if (dx * dx + dy * dy + dz * dz < radius * radius) out.push_back(idx);
            }
    return out;
}

template <class Real>
Real norm_lp_region(const FieldT<Real>& f, const std::vector<std::int64_t>& region, Real p) {
    Real s = 0;
    for (auto i : region) s += std::pow(std::abs(f[i]), p);
    return std::pow(s * f.grid().cell_volume(), Real(1) / p);
}

template <class Real>
Real sup_region(const FieldT<Real>& f, const std::vector<std::int64_t>& region) {
    Real m = 0;
    for (auto i : region) m = std::max(m, std::abs(f[i]));
    return m;
}

/// Kato inequality data: lhs = integral |f|^2 / |x| (singular-cell rule),
/// rhs = (pi/2) * sum |p| |fhat(p)|^2 * freq cell volume.
inline std::pair<double, double> kato_check(const Field& f) {
    if (norm_l2(f) <= 0) throw std::invalid_argument("kato_check: zero field");
    const auto& g = f.grid();
    Field fr = to_space(f, Space::Real);
    const double rc = cell_ball_radius(g);
    double lhs = 0;
    {
        const int n = g.n();
        std::int64_t idx = 0;
        for (int iz = 0; iz < n; ++iz)
            for (int iy = 0; iy < n; ++iy)
                for (int ix = 0; ix < n; ++ix, ++idx) {
                    const Vec3 x = g.point(ix, iy, iz);
                    const double r = norm3(x);
                    const double w = (r < g.spacing() / 2) ? 1.5 / rc : 1.0 / r;
                    lhs += std::norm(fr[idx]) * w;
                }
        lhs *= g.cell_volume();
    }
    Field fh = to_space(f, Space::Fourier);
    double rhs = 0;
    {
        const int n = g.n();
        std::int64_t idx = 0;
        for (int iz = 0; iz < n; ++iz)
            for (int iy = 0; iy < n; ++iy)
                for (int ix = 0; ix < n; ++ix, ++idx) {
                    const Vec3 p = g.freq_point(ix, iy, iz);
                    rhs += norm3(p) * std::norm(fh[idx]);
                }
        rhs *= g.freq_cell_volume() * Grid3::pi() / 2.0;
    }
    return {lhs, rhs};
}

struct ScanRow {
    int order = 0;
    double sup_max = 0;       // max over sampled beta of sup_U |partial^beta phi|
    MultiIndex beta_argmax;   // beta attaining max of sup/beta!
    double vmax = 0;          // max over beta of sup/beta!
    double normalized = 0;    // vmax * Rfit^order
};

struct RegularityReport {
    Vec3 x0{};
    double R = 0;
    std::vector<ScanRow> table;
    double C_fit = 0;
    double R_fit = 0;
    bool no_analyticity_evidence = false;
    double decay_rate = 0;             // filled by decay_fit when run
    double kato_lhs = 0, kato_rhs = 0; // filled by kato_check when run
};

/// Tabulates sup_U |partial^beta phi| over |beta| = m for m <= max_order,
/// U = open ball of radius R/2 at x0, R = min(1, |x0|/4); least-squares fit of
/// log(max_beta sup/beta!) against m gives (C_fit, R_fit).
inline RegularityReport derivative_growth_scan(const Field& phi, const Vec3& x0, int max_order) {
    const auto& g = phi.grid();
    if (norm3(x0) < 4 * g.spacing())
        throw std::invalid_argument("derivative_growth_scan: x0 closer than 4 spacings to nucleus");
    if (max_order > kMaxDerivativeOrder)
        throw std::invalid_argument("derivative_growth_scan: max_order above cap");
    RegularityReport rep;
    rep.x0 = x0;
    rep.R = std::min(1.0, norm3(x0) / 4.0);
    const auto U = region_indices(g, x0, rep.R / 2.0);
    if (U.empty())
        throw std::invalid_argument("derivative_growth_scan: no grid points inside U (finer grid needed)");
    Field fh = to_space(phi, Space::Fourier);
    std::vector<double> logs;
    for (int m = 0; m <= max_order; ++m) {
        ScanRow row;
        row.order = m;
        double best_v = -1;
        for (const auto& beta : compositions(m)) {
            Field df = spectral_derivative(phi, beta, &fh);
            const double sup = sup_region(df, U);
            row.sup_max = std::max(row.sup_max, sup);
            const double v = sup / multi_factorial_d(beta);
            if (v > best_v) {
                best_v = v;
                row.beta_argmax = beta;
            }
        }
        row.vmax = best_v;
        logs.push_back(std::log(std::max(best_v, 1e-300)));
        rep.table.push_back(row);
    }
    // least squares log v_m = c - m log Rfit
    const int npt = static_cast<int>(logs.size());
    double sm = 0, sy = 0, smm = 0, smy = 0;
    for (int m = 0; m < npt; ++m) {
        sm += m; sy += logs[static_cast<size_t>(m)];
        smm += m * m; smy += m * logs[static_cast<size_t>(m)];
    }
    const double slope = (npt * smy - sm * sy) / (npt * smm - sm * sm);
    const double inter = (sy - slope * sm) / npt;
    rep.C_fit = std::exp(inter);
    rep.R_fit = std::exp(-slope);
    // tail fit beyond m = 3: positive slope -> no analyticity evidence
    if (npt > 5) {
        double tm = 0, ty = 0, tmm = 0, tmy = 0;
        int cnt = 0;
        for (int m = 4; m < npt; ++m, ++cnt) {
            tm += m; ty += logs[static_cast<size_t>(m)];
            tmm += m * m; tmy += m * logs[static_cast<size_t>(m)];
        }
        const double tslope = (cnt * tmy - tm * ty) / (cnt * tmm - tm * tm);
        if (tslope > 0) rep.no_analyticity_evidence = true;
    }
    for (auto& row : rep.table)
        row.normalized = row.vmax * std::pow(rep.R_fit, row.order);
    return rep;
}

struct LpGrowthRow {
    int j = 0;
    MultiIndex beta;
    double epsilon = 0;
    double value = 0;  // eps^{|beta|} ||D^beta phi||_{L^p(omega_{eps j})}
};

struct LpGrowthResult {
    std::vector<LpGrowthRow> rows;
    double C_prime = 0;
    double B_prime = 0;
};

/// eps^{|beta|} ||D^beta phi||_{L^p(omega_{eps j})} with eps = (R/2)/j for
/// j = 1..j_max (the j = 0 row is ||phi||_{L^p(omega)}); returns the minimal
/// (C', B') in the fitted log-space sense with C' B'^{|beta|} dominating.
inline LpGrowthResult lp_growth_check(const Field& phi, double p, int j_max, const Vec3& x0) {
    if (p < 5) throw std::invalid_argument("lp_growth_check: p >= 5 required");
    const auto& g = phi.grid();
    const double R = std::min(1.0, norm3(x0) / 4.0);
    LpGrowthResult out;
    Field fh = to_space(phi, Space::Fourier);
    {
        LpGrowthRow r0;
        r0.j = 0;
        r0.epsilon = 0;
        r0.value = norm_lp_region(phi, region_indices(g, x0, R), p);
        out.rows.push_back(r0);
    }
    for (int j = 1; j <= j_max; ++j) {
        const double eps = (R / 2.0) / j;
        const auto reg = region_indices(g, x0, R - eps * j);  // = B_{R/2}
        for (int m = 0; m <= j; ++m)
            for (const auto& beta : compositions(m)) {
                Field df = spectral_derivative(phi, beta, &fh);
                LpGrowthRow r;
                r.j = j;
                r.beta = beta;
                r.epsilon = eps;
                r.value = std::pow(eps, m) * norm_lp_region(df, reg, p);
                out.rows.push_back(r);
            }
    }
    // dominate in log space: fit log value ~ c + |beta| log B', then inflate C'
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int npt = 0;
    for (const auto& r : out.rows) {
        if (r.value <= 0) continue;
        const double x = r.beta.order(), y = std::log(r.value);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++npt;
    }
    double slope = 0, inter = 0;
    if (npt >= 2 && npt * sxx - sx * sx > 0) {
        slope = (npt * sxy - sx * sy) / (npt * sxx - sx * sx);
        inter = (sy - slope * sx) / npt;
    } else if (npt >= 1) {
        inter = sy / npt;
    }
    out.B_prime = std::exp(std::max(slope, 0.0));
    double cmax = -1e300;
    for (const auto& r : out.rows)
        if (r.value > 0)
            cmax = std::max(cmax, std::log(r.value) - r.beta.order() * std::log(out.B_prime));
    out.C_prime = npt ? std::exp(cmax) : 0.0;
    (void)inter;
    return out;
}

struct DecayFit {
    double lambda = 0;
    bool super_exponential = false;
    bool partial_tail = false;
};

/// Least-squares slope of log(radial-shell max |phi|) over [L/4, 0.45 L].
inline DecayFit decay_fit(const Field& phi) {
    const auto& g = phi.grid();
    Field fr = to_space(phi, Space::Real);
    const int nb = g.n() / 2;
    const double rmax = g.box_length() / 2.0 * std::sqrt(3.0);
    std::vector<double> shell_max(static_cast<size_t>(nb), 0.0);
    const int n = g.n();
    std::int64_t idx = 0;
    double global_max = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                const double r = norm3(g.point(ix, iy, iz));
                const int b = static_cast<int>(r / rmax * nb);
                const double a = std::abs(fr[idx]);
                global_max = std::max(global_max, a);
                if (b >= 0 && b < nb)
                    shell_max[static_cast<size_t>(b)] = std::max(shell_max[static_cast<size_t>(b)], a);
            }
    DecayFit out;
    std::vector<double> xs, ys;
    const double lo = g.box_length() / 4.0, hi = g.box_length() / 2.0 * 0.9;
    for (int b = 0; b < nb; ++b) {
        const double c = (b + 0.5) * rmax / nb;
        if (c < lo || c > hi) continue;
        const double m = shell_max[static_cast<size_t>(b)];
        if (m < 1e-14 * global_max) {
            out.partial_tail = true;
            continue;
        }
        xs.push_back(c);
        ys.push_back(std::log(m));
    }
    if (xs.size() < 3) {
        out.partial_tail = true;
        return out;
    }
    const int m = static_cast<int>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
        sx += xs[static_cast<size_t>(i)]; sy += ys[static_cast<size_t>(i)];
        sxx += xs[static_cast<size_t>(i)] * xs[static_cast<size_t>(i)];
        sxy += xs[static_cast<size_t>(i)] * ys[static_cast<size_t>(i)];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    out.lambda = -slope;
    // curvature test: quadratic term dominating the linear one marks
    // super-exponential decay (log-quadratic profile)
    Eigen::MatrixXd A(m, 3);
    Eigen::VectorXd Y(m);
    for (int i = 0; i < m; ++i) {
        A(i, 0) = 1; A(i, 1) = xs[static_cast<size_t>(i)];
        A(i, 2) = xs[static_cast<size_t>(i)] * xs[static_cast<size_t>(i)];
        Y(i) = ys[static_cast<size_t>(i)];
    }
    Eigen::Vector3d q = A.colPivHouseholderQr().solve(Y);
    if (q(2) < 0 && std::abs(q(2)) * (xs.front() + xs.back()) > 0.5 * std::abs(q(1)))
        out.super_exponential = true;
    return out;
}

struct KInputs {
    std::optional<double> K1 = 2.0;   // Lemma C.1 multiplier norm (nonconstructive in paper)
    std::optional<double> K2 = 10.0;  // interpolation constant (nonconstructive in paper)
    std::optional<double> K3 = 10.0;  // elliptic estimate constant (nonconstructive in paper)
    std::optional<double> K4 = 10.0;  // Morrey constant (nonconstructive in paper)
};

/// The explicit constants C1, A, C2, C3, C, B of the derivative-growth
/// estimate, plus the localization constant C* and the configured K's.
struct ConstantLedger {
    double C1 = 0, A = 0, C2 = 0, C3 = 0, C = 0, B = 0;
    double C_star = 8.0;
    double K1 = 2, K2 = 10, K3 = 10, K4 = 10;
    Vec3 x0{};
    double R = 0;
    double p = 5;

    std::vector<std::pair<std::string, double>> entries() const {
        return {{"C1", C1}, {"A", A},   {"C2", C2}, {"C3", C3}, {"C", C},
                {"B", B},   {"C_star", C_star}, {"K1", K1}, {"K2", K2},
                {"K3", K3}, {"K4", K4}};
    }
};

/// Measured + configured constants for a converged state at x0. C1 is the
/// measured sup of the pair potentials; A majorizes the Coulomb derivatives
/// on omega (and alpha^-1 + max |eps|); C and B per their listed lower
/// bounds, inflated by 1%.
inline ConstantLedger build_ledger(const OrbitalSet& st, const Vec3& x0, double p,
                                   const KInputs& kin = {}, double c_star = 8.0) {
    {
        std::string missing;
        if (!kin.K1) missing += " K1";
        if (!kin.K2) missing += " K2";
        if (!kin.K3) missing += " K3";
        if (!kin.K4) missing += " K4";
        if (!missing.empty())
            throw std::invalid_argument("build_ledger: missing K inputs:" + missing);
    }
    ConstantLedger led;
    led.K1 = *kin.K1; led.K2 = *kin.K2; led.K3 = *kin.K3; led.K4 = *kin.K4;
    led.C_star = c_star;
    led.x0 = x0;
    led.p = p;
    const double ax0 = norm3(x0);
    led.R = std::min(1.0, ax0 / 4.0);
    const Physics& ph = st.physics;
    const int N = st.count();

    led.C1 = 0;
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            auto U = pair_potential(st.orbitals[static_cast<size_t>(a)],
                                    st.orbitals[static_cast<size_t>(b)], a, b);
            led.C1 = std::max(led.C1, norm_sup(U.field));
        }

    const double d = ax0 - led.R;  // inf_omega |x|
    double Av = 1.0;
    for (int k = 0; k <= 64; ++k) {
        const double c = std::pow(std::sqrt(2.0) * ph.Z * ph.alpha, 1.0 / (k + 1)) *
                         std::pow(8.0, static_cast<double>(k) / (k + 1)) / d;
        Av = std::max(Av, c);
    }
    double emax = 0;
    for (double e : st.epsilons) emax = std::max(emax, std::abs(e));
    led.A = std::max(Av, 1.0 / ph.alpha + emax);

    led.C2 = std::max(led.K1, 256.0 * std::sqrt(2.0) / Grid3::pi());
    led.C3 = std::max(4 * Grid3::pi() * (1 + 2 * led.C1 / (led.R * led.R)) * led.K3,
                      160 * Grid3::pi() * led.K2 * led.K2 * led.K3);

    const auto omega = region_indices(st.orbitals[0].grid(), x0, led.R);
    const auto b2R = region_indices(st.orbitals[0].grid(), x0, 2 * led.R);
    double Cval = 1.0;
    for (const auto& o : st.orbitals) {
        Field fh = to_space(o, Space::Fourier);
        double w1p = norm_lp_region(o, omega, p);
        for (int ax = 0; ax < 3; ++ax) {
            MultiIndex e;
            e[ax] = 1;
            Field d1 = spectral_derivative(o, e, &fh);
            w1p += norm_lp_region(d1, omega, p);
        }
        const double l3p = norm_lp_region(o, b2R, 3 * p);
        const double l2 = norm_l2(o);
        const double l3 = norm_lp(o, 3.0);
        const double c4 = 768.0 / Grid3::pi() * std::pow(ax0, 3 * (2 - p) / (2 * p)) * l2;
        const double c5 = (48 * std::sqrt(2.0) / Grid3::pi() * led.A +
                           48 * std::sqrt(2.0) * led.C1 * N / (ph.Z * Grid3::pi()) +
                           1536 * std::sqrt(2.0) / (Grid3::pi() * Grid3::pi() * ax0)) * l3;
        Cval = std::max({Cval, w1p, l3p, c4, c5});
    }
    led.C = Cval * 1.01;

    led.B = std::max({48 * led.A * led.C2, led.C_star, 16.0 / ax0, 4 * led.C1 * led.C1,
                      std::pow(160 * led.C * led.C * led.K2 * led.C3, 2),
                      std::pow(24 * N * led.C2 / ph.Z, 2), 16 * led.K3}) * 1.01;
    return led;
}

struct AuditRow {
    int orbital = 0;
    int j = 0;
    double epsilon = 0;
    MultiIndex beta;
    double lhs = 0;
    double bound = 0;
    bool pass = false;
};

struct AuditResult {
    std::vector<AuditRow> rows;
    bool all_pass = true;
    double min_margin = 1e300;  // min over rows of bound/lhs
};

/// Checks eps^{|beta|} ||D^beta phi_i||_{L^p(omega_{eps j})} <= C B^{|beta|}
/// for j <= j_max, eps in {R/(2j), R/(4j)}, all beta with |beta| <= j.
inline AuditResult proposition_audit(const OrbitalSet& st, const ConstantLedger& led, double p,
                                     int j_max) {
    if (p < 5) throw std::invalid_argument("proposition_audit: p >= 5 required");
    if (j_max > 8) throw std::invalid_argument("proposition_audit: j_max <= 8 required");
    AuditResult out;
    const auto& g = st.orbitals.at(0).grid();
    for (int i = 0; i < st.count(); ++i) {
        const Field& phi = st.orbitals[static_cast<size_t>(i)];
        Field fh = to_space(phi, Space::Fourier);
        {
            AuditRow r;
            r.orbital = i;
            r.j = 0;
            r.lhs = norm_lp_region(phi, region_indices(g, led.x0, led.R), p);
            r.bound = led.C;
            r.pass = r.lhs <= r.bound;
            out.rows.push_back(r);
        }
        for (int j = 1; j <= j_max; ++j)
            for (double eps : {led.R / (2.0 * j), led.R / (4.0 * j)}) {
                const auto reg = region_indices(g, led.x0, led.R - eps * j);
                for (int m = 0; m <= j; ++m)
                    for (const auto& beta : compositions(m)) {
                        Field df = spectral_derivative(phi, beta, &fh);
                        AuditRow r;
                        r.orbital = i;
                        r.j = j;
                        r.epsilon = eps;
                        r.beta = beta;
                        r.lhs = std::pow(eps, m) * norm_lp_region(df, reg, p);
                        r.bound = led.C * std::pow(led.B, m);
                        r.pass = r.lhs <= r.bound;
                        out.rows.push_back(r);
                    }
            }
    }
    for (const auto& r : out.rows) {
        if (!r.pass) out.all_pass = false;
        if (r.lhs > 0) out.min_margin = std::min(out.min_margin, r.bound / r.lhs);
    }
    return out;
}

} // namespace prhf
