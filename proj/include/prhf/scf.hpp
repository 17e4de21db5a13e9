#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "prhf/operators.hpp"
#include "prhf/rng.hpp"

namespace prhf {

/// State of the self-consistent equations: N occupied orbitals with their
/// multipliers eps_i (eigenvalues of h_phi, "equation units"; divide by alpha
/// for energy units).
struct OrbitalSet {
    std::vector<Field> orbitals;
    std::vector<double> epsilons;
    Physics physics;

    int count() const { return static_cast<int>(orbitals.size()); }

    /// max_ij |<phi_i, phi_j> - delta_ij|
    double gram_deviation() const {
        double dev = 0;
        for (size_t i = 0; i < orbitals.size(); ++i)
            for (size_t j = 0; j < orbitals.size(); ++j) {
                auto s = inner(orbitals[i], orbitals[j]);
                dev = std::max(dev, std::abs(s - (i == j ? 1.0 : 0.0)));
            }
        return dev;
    }
};

enum class ScfMode { Eigen, FixedPoint };

struct ScfConfig {
    ScfMode mode = ScfMode::Eigen;
    double mixing = 0.3;         // damping theta in (0, 1]
    int max_iter = 60;
    double tol_residual = 1e-6;
    double tol_energy = 1e-8;
    int krylov_dim = 0;          // 0 = auto (2N + 6); must be >= N + 2
    std::uint64_t seed = 1;
    bool anderson = false;       // Anderson acceleration for FixedPoint mode
    int anderson_depth = 5;

    void validate(int N) const {
        if (!(tol_residual > 0)) throw std::invalid_argument("ScfConfig: tol_residual must be > 0");
        if (!(mixing > 0) || mixing > 1.0)
            throw std::invalid_argument("ScfConfig: mixing must lie in (0, 1]");
        if (krylov_dim != 0 && krylov_dim < N + 2)
            throw std::invalid_argument("ScfConfig: krylov_dim must be >= N + 2");
    }
};

struct ScfFlags {
    bool converged = false;
    bool stability_warning = false;       // Z*alpha >= 2/pi
    bool epsilon_sign_warning = false;    // some eps_i >= 0 on the final state
    bool residual_tail_monotone = true;   // last 5 residuals decreasing
};

struct ScfReport {
    int iterations = 0;
    double energy = 0.0;
    std::vector<double> residuals;        // per orbital, final state
    std::vector<double> energy_history;   // one entry per iteration
    std::vector<double> residual_history; // max residual per iteration
    ScfFlags flags;
    /// Documented estimate of the periodic-gauge shift left in the two-body
    /// energy by the zero-mode convention: (N^2 - N) * kappa0 / 2 with
    /// kappa0 = 2.837297 / L. Diagnostic only, never applied.
    double gauge_shift_estimate = 0.0;
};

struct EigensolveError : std::runtime_error {
    std::vector<double> best_residuals;
    EigensolveError(const std::string& msg, std::vector<double> res)
        : std::runtime_error(msg), best_residuals(std::move(res)) {}
};

/// Symmetric (Loewdin) orthonormalization: the closest orthonormal set in the
/// least-squares sense. Throws on a rank-deficient Gram matrix, naming the
/// most implicated input index.
inline std::vector<Field> orthonormalize(const std::vector<Field>& in) {
    const int m = static_cast<int>(in.size());
    if (m == 0) return {};
    Eigen::MatrixXcd S(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) S(i, j) = inner(in[static_cast<size_t>(i)], in[static_cast<size_t>(j)]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(S);
    const auto& w = es.eigenvalues();
    const auto& U = es.eigenvectors();
    const double wmax = w(m - 1);
    if (wmax <= 0 || w(0) < 1e-12 * wmax) {
        // name the input most represented in the null direction
        int offender = 0;
        double best = -1;
        for (int i = 0; i < m; ++i) {
            const double c = std::abs(U(i, 0));
            if (c > best) { best = c; offender = i; }
        }
        throw std::invalid_argument("orthonormalize: rank-deficient set (offending index " +
                                    std::to_string(offender) + ")");
    }
    Eigen::MatrixXcd Sm(m, m);
    Eigen::VectorXd wi(m);
    for (int i = 0; i < m; ++i) wi(i) = 1.0 / std::sqrt(w(i));
    Sm = U * wi.asDiagonal() * U.adjoint();
    std::vector<Field> out;
    out.reserve(static_cast<size_t>(m));
    for (int k = 0; k < m; ++k) {
        Field f(in[0].grid(), in[0].space());
        for (int i = 0; i < m; ++i) {
            const std::complex<double> c = Sm(i, k);
            const auto& src = in[static_cast<size_t>(i)].values();
            for (size_t t = 0; t < f.values().size(); ++t) f.values()[t] += c * src[t];
        }
        out.push_back(std::move(f));
    }
    return out;
}

/// Hydrogenic-like Gaussian shells (s and p type, screened Z), Loewdin
/// orthonormalized. Deterministic; the seed is recorded but does not enter
/// the construction.
inline OrbitalSet initial_guess(const Grid3& g, const Physics& ph, std::uint64_t seed = 1) {
    (void)seed;
    const int N = ph.N;
    if (N > 10) throw std::invalid_argument("initial_guess: N exceeds available guess shells (10)");
    if (static_cast<std::int64_t>(N) * 4 > g.size())
        throw std::invalid_argument("initial_guess: N exceeds representable states on this grid");
    const double zeff = std::max(1.0, ph.Z - (N - 1) / 2.0);
    std::vector<Field> cand;
    auto gauss = [&](double zeta) {
        return sample(g, [&](const Vec3& w) {
            const double r2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
            return std::exp(-zeta * r2);
        });
    };
    auto pgauss = [&](double zeta, int axis) {
        return sample(g, [&](const Vec3& w) {
            const double r2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
            return w[static_cast<size_t>(axis)] * std::exp(-zeta * r2);
        });
    };
    const double z1 = 0.28 * zeff * zeff;
    cand.push_back(gauss(z1));
    if (N >= 2) cand.push_back(gauss(z1 / 4));
    for (int ax = 0; ax < 3 && static_cast<int>(cand.size()) < N; ++ax)
        cand.push_back(pgauss(z1 / 4, ax));
    if (static_cast<int>(cand.size()) < N) cand.push_back(gauss(z1 / 9));
    for (int ax = 0; ax < 3 && static_cast<int>(cand.size()) < N; ++ax)
        cand.push_back(pgauss(z1 / 9, ax));
    if (static_cast<int>(cand.size()) < N) cand.push_back(gauss(z1 / 16));
    cand.resize(static_cast<size_t>(N), Field(g, Space::Real));
    OrbitalSet st;
    st.physics = ph;
    st.orbitals = orthonormalize(cand);
    st.epsilons.assign(static_cast<size_t>(N), 0.0);
    return st;
}

using LinearOp = std::function<Field(const Field&)>;

struct EigenOptions {
    double tol = 1e-8;
    int max_iter = 400;
    int krylov_dim = 0;  // 0 = auto
};

/// Lowest `count` eigenpairs of a Hermitian operator by preconditioned block
/// Davidson iteration (preconditioner defaults to apply_inverse_energy at the
/// caller's side). Returns (values ascending, orthonormal vectors).
inline std::pair<std::vector<double>, std::vector<Field>>
lowest_eigenpairs(const LinearOp& op, const LinearOp& precond, std::vector<Field> guess,
                  int count, const EigenOptions& opt = {}) {
    if (count == 0) return {{}, {}};
    if (static_cast<int>(guess.size()) < count)
        throw std::invalid_argument("lowest_eigenpairs: need at least `count` guess vectors");
    const int kdim = opt.krylov_dim > 0 ? opt.krylov_dim : 2 * count + 6;
    std::vector<Field> B = orthonormalize(guess);
    std::vector<Field> HB;
    for (const auto& b : B) HB.push_back(op(b));

    // Gram of the search space, extended incrementally as B grows.
    Eigen::MatrixXcd H;
    int hsize = 0;
    auto extend_gram = [&]() {
        const int m = static_cast<int>(B.size());
        Eigen::MatrixXcd H2(m, m);
        if (hsize > 0) H2.topLeftCorner(hsize, hsize) = H;
        for (int i = 0; i < m; ++i)
            for (int j = (i < hsize ? hsize : 0); j < m; ++j) {
                H2(i, j) = inner(B[static_cast<size_t>(i)], HB[static_cast<size_t>(j)]);
                if (i < hsize) H2(j, i) = std::conj(H2(i, j));
            }
        H = (H2 + H2.adjoint()).eval() / 2.0;
        hsize = m;
    };

    std::vector<double> lam(static_cast<size_t>(count), 0.0);
    std::vector<double> res(static_cast<size_t>(count), 1e300);
    std::vector<Field> X, HX;

    for (int it = 0; it < opt.max_iter; ++it) {
        const int m = static_cast<int>(B.size());
        extend_gram();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
        X.clear(); HX.clear();
        std::vector<Field> R;
        for (int k = 0; k < count; ++k) {
            lam[static_cast<size_t>(k)] = es.eigenvalues()(k);
            Field x(B[0].grid(), B[0].space()), hx(B[0].grid(), B[0].space());
            for (int i = 0; i < m; ++i) {
                const std::complex<double> c = es.eigenvectors()(i, k);
                const auto& bv = B[static_cast<size_t>(i)].values();
                const auto& hbv = HB[static_cast<size_t>(i)].values();
                for (size_t t = 0; t < x.values().size(); ++t) {
                    x.values()[t] += c * bv[t];
                    hx.values()[t] += c * hbv[t];
                }
            }
            Field r = hx;
            for (size_t t = 0; t < r.values().size(); ++t)
                r.values()[t] -= lam[static_cast<size_t>(k)] * x.values()[t];
            res[static_cast<size_t>(k)] = norm_l2(r);
            X.push_back(std::move(x));
            HX.push_back(std::move(hx));
            R.push_back(std::move(r));
        }
        if (*std::max_element(res.begin(), res.end()) <= opt.tol)
            return {lam, X};

        if (m + count > kdim) {  // restart with the Ritz block
            B = X;
            HB = HX;
            hsize = 0;
            H.resize(0, 0);
        }
        bool grew = false;
        for (int k = 0; k < count; ++k) {
            if (res[static_cast<size_t>(k)] <= opt.tol) continue;
            Field t = precond(R[static_cast<size_t>(k)]);
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& b : B) {
                    const auto c = inner(b, t);
                    for (size_t q = 0; q < t.values().size(); ++q)
                        t.values()[q] -= c * b.values()[q];
                }
            const double nt = norm_l2(t);
            if (nt < 1e-13) continue;
            t *= 1.0 / nt;
            HB.push_back(op(t));
            B.push_back(std::move(t));
            grew = true;
        }
        if (!grew)
            throw EigensolveError("lowest_eigenpairs: stagnation (no new directions)", res);
    }
    throw EigensolveError("lowest_eigenpairs: not converged in max_iter", res);
}

/// E^HF of Eq.-style functional: sum_j alpha^-1 <phi_j, h0 phi_j>
/// + 1/2 sum_ij direct - 1/2 sum_ij exchange, by grid quadrature.
inline double hf_energy(const OrbitalSet& st, const Field* Vpre = nullptr) {
    if (st.orbitals.empty()) return 0.0;
    const auto& g = st.orbitals[0].grid();
    const Physics& ph = st.physics;
    Field V = Vpre ? *Vpre : coulomb_attraction(g, ph);
    double e0 = 0;
    for (const auto& o : st.orbitals) {
        Field To = apply_kinetic(o, ph);
        std::complex<double> t = inner(o, To);
        std::complex<double> v = inner(o, hadamard(V, o));
        e0 += (t.real() - v.real()) / ph.alpha;
    }
    const int N = st.count();
    double direct = 0, exch = 0;
    for (int i = 0; i < N; ++i) {
        const Field& oi = st.orbitals[static_cast<size_t>(i)];
        Field rho_i(g, Space::Real);
        for (size_t t = 0; t < rho_i.values().size(); ++t)
            rho_i.values()[t] = std::norm(oi.values()[t]);
        Field Ui = poisson_potential(rho_i);
        for (int j = 0; j < N; ++j) {
            const Field& oj = st.orbitals[static_cast<size_t>(j)];
            Field rho_j(g, Space::Real);
            for (size_t t = 0; t < rho_j.values().size(); ++t)
                rho_j.values()[t] = std::norm(oj.values()[t]);
            direct += inner(rho_j, Ui).real();
        }
        for (int j = 0; j < N; ++j) {
            const Field& oj = st.orbitals[static_cast<size_t>(j)];
            auto Uij = pair_potential(oi, oj, i, j);
            Field cross(g, Space::Real);
            for (size_t t = 0; t < cross.values().size(); ++t)
                cross.values()[t] = std::conj(oj.values()[t]) * oi.values()[t];
            // integral of conj(cross) * U_{i,j} ... both orders give the same real part
            exch += inner(cross, Uij.field).real();
        }
    }
    return e0 + 0.5 * direct - 0.5 * exch;
}

namespace detail {

inline void phase_align(Field& next, const Field& prev) {
    const std::complex<double> ov = inner(prev, next);
    const double a = std::abs(ov);
    if (a > 1e-12) {
        const std::complex<double> ph = std::conj(ov) / a;
        for (auto& z : next.values()) z *= ph;
    }
}

inline std::vector<double> eigen_residuals(const OrbitalSet& st, const Field& V,
                                           const Field& Rtot, std::vector<double>* eps_out) {
    std::span<const Field> orbs(st.orbitals.data(), st.orbitals.size());
    std::vector<double> rr, eps;
    for (const auto& o : st.orbitals) {
        Field ho = apply_hf(orbs, o, st.physics, &V, &Rtot);
        const double e = inner(o, ho).real();
        Field r = ho;
        for (size_t t = 0; t < r.values().size(); ++t) r.values()[t] -= e * o.values()[t];
        eps.push_back(e);
        rr.push_back(norm_l2(r));
    }
    if (eps_out) *eps_out = eps;
    return rr;
}

} // namespace detail

/// One Picard step of the inverted integral equation:
/// phi <- E^-1 [ V phi - alpha R phi + alpha K phi + (alpha^-1 + eps) phi ],
/// with eps the current Rayleigh quotients; proposal orthonormalized, damped
/// against the input, re-orthonormalized.
inline OrbitalSet picard_step(const OrbitalSet& st, double theta) {
    if (theta == 0.0) return st;
    const auto& g = st.orbitals.at(0).grid();
    const Physics& ph = st.physics;
    Field V = coulomb_attraction(g, ph);
    std::span<const Field> orbs(st.orbitals.data(), st.orbitals.size());
    Field Rtot = total_direct_potential(orbs);
    std::vector<Field> prop;
    for (const auto& o : st.orbitals) {
        Field ho = apply_hf(orbs, o, ph, &V, &Rtot);
        const double eps = inner(o, ho).real();
        Field rhs(g, Space::Real);
        // V phi - a R phi + a K phi + (1/a + eps) phi  =  (E + eps - h) phi... assembled directly:
        Field Ru = apply_direct(orbs, o, &Rtot);
        Field Ku = apply_exchange(orbs, o);
        for (size_t t = 0; t < rhs.values().size(); ++t)
            rhs.values()[t] = V.values()[t] * o.values()[t] -
                              ph.alpha * (Ru.values()[t] - Ku.values()[t]) +
                              (1.0 / ph.alpha + eps) * o.values()[t];
        prop.push_back(apply_inverse_energy(rhs, ph));
    }
    prop = orthonormalize(prop);
    std::vector<Field> mixed;
    for (size_t k = 0; k < prop.size(); ++k) {
        detail::phase_align(prop[k], st.orbitals[k]);
        Field m = st.orbitals[k];
        for (size_t t = 0; t < m.values().size(); ++t)
            m.values()[t] = theta * prop[k].values()[t] + (1.0 - theta) * m.values()[t];
        mixed.push_back(std::move(m));
    }
    OrbitalSet out;
    out.physics = ph;
    out.orbitals = orthonormalize(mixed);
    out.epsilons = st.epsilons;
    Field Rtot2 = total_direct_potential(std::span<const Field>(out.orbitals.data(), out.orbitals.size()));
    detail::eigen_residuals(out, V, Rtot2, &out.epsilons);
    return out;
}

struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Self-consistent solve. Eigen mode: lowest-N eigenpairs of h_phi with
/// Aufbau filling and damped orbital mixing. FixedPoint mode: Picard steps on
/// the inverted equation (optionally Anderson-accelerated).
inline std::pair<OrbitalSet, ScfReport> solve(const Grid3& g, const Physics& ph,
                                              const ScfConfig& cfg, bool force = false) {
    cfg.validate(ph.N);
    ScfReport rep;
    if (ph.unstable()) {
        if (!force)
            throw PreconditionError("solve: Z*alpha >= 2/pi (unstable regime); pass force to proceed");
        rep.flags.stability_warning = true;
    }
    rep.gauge_shift_estimate =
        (static_cast<double>(ph.N) * ph.N - ph.N) * (2.837297 / g.box_length()) / 2.0;

    OrbitalSet st = initial_guess(g, ph, cfg.seed);
    Field V = coulomb_attraction(g, ph);
    double Eold = 0;
    bool haveE = false;

    // Anderson history (FixedPoint mode)
    std::vector<std::vector<std::complex<double>>> histX, histF;

    auto flatten = [&](const OrbitalSet& s) {
        std::vector<std::complex<double>> v;
        for (const auto& o : s.orbitals)
            v.insert(v.end(), o.values().begin(), o.values().end());
        return v;
    };
    auto unflatten = [&](const std::vector<std::complex<double>>& v) {
        std::vector<Field> out;
        const size_t m = static_cast<size_t>(g.size());
        for (int k = 0; k < ph.N; ++k) {
            Field f(g, Space::Real);
            std::copy(v.begin() + static_cast<std::ptrdiff_t>(k * m),
                      v.begin() + static_cast<std::ptrdiff_t>((k + 1) * m), f.values().begin());
            out.push_back(std::move(f));
        }
        return out;
    };

    for (int it = 0; it < cfg.max_iter; ++it) {
        if (cfg.mode == ScfMode::Eigen) {
            std::span<const Field> orbs(st.orbitals.data(), st.orbitals.size());
            Field Rtot = total_direct_potential(orbs);
            LinearOp op = [&](const Field& u) { return apply_hf(orbs, u, ph, &V, &Rtot); };
            LinearOp pre = [&](const Field& u) { return apply_inverse_energy(u, ph); };
            EigenOptions eo;
            const double last = rep.residual_history.empty() ? 1.0 : rep.residual_history.back();
            eo.tol = std::max(cfg.tol_residual * 0.2, std::min(1e-2, 0.05 * last));
            eo.krylov_dim = cfg.krylov_dim > 0 ? cfg.krylov_dim : 2 * ph.N + 6;
            eo.max_iter = 400;
            auto [vals, vecs] = lowest_eigenpairs(op, pre, st.orbitals, ph.N, eo);
            // Degenerate Ritz clusters (gap < 1e-10): rotate within the cluster
            // to maximize overlap with the previous iterate's subspace.
            for (size_t lo = 0; lo < vals.size();) {
                size_t hi = lo + 1;
                while (hi < vals.size() && vals[hi] - vals[hi - 1] < 1e-10) ++hi;
                const int c = static_cast<int>(hi - lo);
                if (c > 1) {
                    Eigen::MatrixXcd M(c, c);
                    for (int a = 0; a < c; ++a)
                        for (int b = 0; b < c; ++b) {
                            std::complex<double> s = 0;
                            for (const auto& prev : st.orbitals) {
                                const auto pa = inner(prev, vecs[lo + static_cast<size_t>(a)]);
                                const auto pb = inner(prev, vecs[lo + static_cast<size_t>(b)]);
                                s += std::conj(pa) * pb;
                            }
                            M(a, b) = s;
                        }
                    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> pe(M);
                    std::vector<Field> rot;
                    for (int k = c - 1; k >= 0; --k) {  // descending overlap
                        Field f(g, Space::Real);
                        for (int a = 0; a < c; ++a) {
                            const std::complex<double> coef = pe.eigenvectors()(a, k);
                            const auto& src = vecs[lo + static_cast<size_t>(a)].values();
                            for (size_t t = 0; t < f.values().size(); ++t)
                                f.values()[t] += coef * src[t];
                        }
                        rot.push_back(std::move(f));
                    }
                    for (int a = 0; a < c; ++a) vecs[lo + static_cast<size_t>(a)] = std::move(rot[static_cast<size_t>(a)]);
                }
                lo = hi;
            }
            std::vector<Field> mixed;
            for (size_t k = 0; k < vecs.size(); ++k) {
                detail::phase_align(vecs[k], st.orbitals[k]);
                Field m = st.orbitals[k];
                for (size_t t = 0; t < m.values().size(); ++t)
                    m.values()[t] = cfg.mixing * vecs[k].values()[t] +
                                    (1.0 - cfg.mixing) * m.values()[t];
                mixed.push_back(std::move(m));
            }
            st.orbitals = orthonormalize(mixed);
        } else {
            OrbitalSet next = picard_step(st, cfg.mixing);
            if (cfg.anderson && !histX.empty()) {
                // Anderson on the damped fixed-point map
                auto x = flatten(st);
                auto gx = flatten(next);
                std::vector<std::complex<double>> f(x.size());
                for (size_t t = 0; t < x.size(); ++t) f[t] = gx[t] - x[t];
                histX.push_back(x);
                histF.push_back(f);
                const int depth = cfg.anderson_depth;
                if (static_cast<int>(histX.size()) > depth + 1) {
                    histX.erase(histX.begin());
                    histF.erase(histF.begin());
                }
                const int m = static_cast<int>(histX.size()) - 1;
                if (m >= 1) {
                    Eigen::MatrixXcd dF(static_cast<std::int64_t>(x.size()), m);
                    Eigen::VectorXcd rhs(static_cast<std::int64_t>(x.size()));
                    for (size_t t = 0; t < x.size(); ++t) rhs(static_cast<std::int64_t>(t)) = f[t];
                    for (int c = 0; c < m; ++c)
                        for (size_t t = 0; t < x.size(); ++t)
                            dF(static_cast<std::int64_t>(t), c) =
                                histF[static_cast<size_t>(c + 1)][t] - histF[static_cast<size_t>(c)][t];
                    Eigen::VectorXcd gam = dF.colPivHouseholderQr().solve(rhs);
                    std::vector<std::complex<double>> xnew(x.size());
                    for (size_t t = 0; t < x.size(); ++t) {
                        std::complex<double> corr = 0;
                        for (int c = 0; c < m; ++c) {
                            const auto dX = histX[static_cast<size_t>(c + 1)][t] - histX[static_cast<size_t>(c)][t];
                            const auto dFv = histF[static_cast<size_t>(c + 1)][t] - histF[static_cast<size_t>(c)][t];
                            corr += gam(c) * (dX + dFv);
                        }
                        xnew[t] = x[t] + f[t] - corr;
                    }
                    next.orbitals = orthonormalize(unflatten(xnew));
                    next.physics = ph;
                    next.epsilons = st.epsilons;
                }
            } else if (cfg.anderson) {
                histX.push_back(flatten(st));
                auto gx = flatten(next);
                std::vector<std::complex<double>> f(gx.size());
                for (size_t t = 0; t < gx.size(); ++t) f[t] = gx[t] - histX.back()[t];
                histF.push_back(f);
            }
            st = std::move(next);
        }

        std::span<const Field> orbs2(st.orbitals.data(), st.orbitals.size());
        Field Rtot2 = total_direct_potential(orbs2);
        st.epsilons.clear();
        auto rr = detail::eigen_residuals(st, V, Rtot2, &st.epsilons);

        // Aufbau bookkeeping: keep orbitals sorted by Rayleigh quotient
        std::vector<size_t> ord(st.orbitals.size());
        for (size_t i = 0; i < ord.size(); ++i) ord[i] = i;
        std::stable_sort(ord.begin(), ord.end(),
                         [&](size_t a, size_t b) { return st.epsilons[a] < st.epsilons[b]; });
        {
            std::vector<Field> o2;
            std::vector<double> e2, r2;
            for (size_t i : ord) {
                o2.push_back(std::move(st.orbitals[i]));
                e2.push_back(st.epsilons[i]);
                r2.push_back(rr[i]);
            }
            st.orbitals = std::move(o2);
            st.epsilons = std::move(e2);
            rr = std::move(r2);
        }

        const double E = hf_energy(st, &V);
        const double maxres = *std::max_element(rr.begin(), rr.end());
        rep.energy_history.push_back(E);
        rep.residual_history.push_back(maxres);
        rep.iterations = it + 1;
        rep.residuals = rr;
        rep.energy = E;
        const double dE = haveE ? std::abs(E - Eold) : 1e300;
        Eold = E;
        haveE = true;
        if (maxres <= cfg.tol_residual && dE <= cfg.tol_energy) {
            rep.flags.converged = true;
            break;
        }
    }

    for (double e : st.epsilons)
        if (e >= 0) rep.flags.epsilon_sign_warning = true;
    const auto& h = rep.residual_history;
    for (size_t i = h.size() >= 5 ? h.size() - 4 : 1; i < h.size(); ++i)
        if (h[i] > h[i - 1]) rep.flags.residual_tail_monotone = false;
    return {st, rep};
}

} // namespace prhf
