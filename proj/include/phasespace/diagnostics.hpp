#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "phasespace/evolution.hpp"
#include "phasespace/observables.hpp"
#include "phasespace/states.hpp"
#include "phasespace/transforms.hpp"

namespace phasespace {

namespace detail {

/// Materialize a (z,r)-represented two-point function F(z + r/2, z - r/2) into
/// the full (x,x') matrix: exact for lattice-aligned separations, half-lattice
/// trig interpolation across parities, minimal-|r| representative on the torus.
/// Works for any field (no hermiticity assumed).
inline Matrix position_matrix_from_field(const GridSpec& g, const Matrix& field_zr) {
    const int nz = g.n_z, np = g.n_p;
    Field2D f(g, AxisKind::ZR, field_zr);
    Matrix W = axis_fourier(f, FourierDirection::RtoP).values;  // p representation
    Matrix Wh = half_shift_axis0(g, W);
    PositionPhaseTable phase(g);
    Matrix out(nz, nz);
    const double wp = g.dp / kTwoPi;
    for (int c = 0; c < nz; ++c) {
        for (int a = 0; a < nz; ++a) {
            const auto wr = window_rep(a - c, nz);
            Complex acc = 0.0;
            int reps = 0;
            for (int dm : {wr.rep, wr.rep + nz}) {
                if (reps == 1 && wr.rep != -nz / 2) break;
                const int s = ((2 * a - dm) % (2 * nz) + 2 * nz) % (2 * nz);
                const Matrix& src = (s % 2 == 0) ? W : Wh;
                const int row = (s % 2 == 0) ? s / 2 : (s - 1) / 2;
                Complex cell = 0.0;
                for (int j = 0; j < np; ++j) cell += phase(j - np / 2, dm) * src(row, j);
                acc += cell * wp;
                ++reps;
            }
            out(a, c) = acc / static_cast<double>(reps);
        }
    }
    return out;
}

/// Unweighted shared-y gather: the coarse graining of an arbitrary (possibly
/// non-hermitian) position-basis function, in the (z,r) representation.
inline Matrix gram_gather(const GridSpec& g, const Matrix& psi_t) {
    const int nz = g.n_z, np = g.n_p;
    Matrix out = Matrix::Zero(nz, np);
    for (int k = 0; k < np; ++k) {
        const int kap_k = k - np / 2;
        for (int m = 0; m < np; ++m) {
            const int kap_m = m - np / 2;
            const int k2raw = m - k + np / 2;
            int q = 0;
            int k2 = k2raw;
            while (k2 < 0) { k2 += np; --q; }
            while (k2 >= np) { k2 -= np; ++q; }
            for (int i = 0; i < nz; ++i) {
                const int a1 = g.wrap_z(i + kap_k - kap_m);
                const int a2 = g.wrap_z(i - kap_m + q * np);
                out(i, k) += std::conj(psi_t(a2, k2)) * psi_t(a1, m);
            }
        }
    }
    out *= g.dr;
    return out;
}

/// Gather with a shared-y parametrization and a position-dependent weight:
///   out(i,k) = dr sum_m conj(psi[a2, k2]) weight(x, x', y) psi[a1, m]
/// where x = z_i + kap_k dz, x' = z_i - kap_k dz, y = x - r_m and the r wrap of
/// the second factor co-adjusts the midpoint. Equals the coarse graining when
/// weight == 1 and the input is hermitian.
inline Matrix weighted_gather(const GridSpec& g, const Matrix& psi_t,
                              const std::function<double(double, double, double)>& weight) {
    const int nz = g.n_z, np = g.n_p;
    Matrix out = Matrix::Zero(nz, np);
    for (int k = 0; k < np; ++k) {
        const int kap_k = k - np / 2;
        for (int m = 0; m < np; ++m) {
            const int kap_m = m - np / 2;
            const int k2raw = m - k + np / 2;
            int q = 0;
            int k2 = k2raw;
            while (k2 < 0) { k2 += np; --q; }
            while (k2 >= np) { k2 -= np; ++q; }
            for (int i = 0; i < nz; ++i) {
                const int a1 = g.wrap_z(i + kap_k - kap_m);
                const int a2 = g.wrap_z(i - kap_m + q * np);
                const double x = g.z_wrapped(i + kap_k);
                const double xp = g.z_wrapped(i - kap_k);
                const double y = g.z_wrapped(i + kap_k - 2 * kap_m);
                out(i, k) += std::conj(psi_t(a2, k2)) * weight(x, xp, y) * psi_t(a1, m);
            }
        }
    }
    out *= g.dr;
    return out;
}

} // namespace detail

/// W(x,y) = V'((x+y)/2)(y-x) + V(x): the y-Hamiltonian potential whose
/// x-dependence couples the coarse-grained system to its environment.
inline double coupling_potential_w(const PotentialSpec& V, double x, double y) {
    return V.derivative(0.5 * (x + y)) * (y - x) + V.value(x);
}

/// E(x,x') = sum_y conj(psi(x',y)) [W(x,y) - W(x',y)] psi(x,y) dz.
/// Vanishing diagonal and E(x,x') = -conj E(x',x) hold by construction.
inline Matrix coupling_term(const PositionBasisWaveFunction& psi_t, const PotentialSpec& V) {
    const GridSpec& g = psi_t.field.grid;
    if (V.kind == PotentialKind::Tabulated)
        throw ConfigError("coupling_term: analytic potential required");
    auto weight = [&V](double x, double xp, double y) {
        return coupling_potential_w(V, x, y) - coupling_potential_w(V, xp, y);
    };
    Matrix e_hat = detail::weighted_gather(g, psi_t.field.values, weight);
    return detail::position_matrix_from_field(g, e_hat);
}

/// Weighted least-squares fit of the locality model E(x,x') = [eps(x) - eps(x')] rho(x,x'),
/// weight |rho|^2 per pair, gauge eps(x_0) = 0 at the leftmost grid point.
struct LocalityFit {
    RealVector epsilon;      // over the z lattice, epsilon(0) = 0
    double residual = 0.0;   // ||E - model||_F / ||E||_F (0 when ||E|| ~ 0)
    bool conditioning_flag = false;
};

inline LocalityFit locality_fit(const Matrix& E, const DensityMatrix& rho) {
    const int n = static_cast<int>(E.rows());
    if (rho.size() != n) throw ConfigError("locality_fit: size mismatch");
    LocalityFit fit;
    fit.epsilon = RealVector::Zero(n);
    const double e_norm = E.norm();
    if (e_norm < 1e-12) {
        fit.residual = 0.0;
        return fit;
    }
    // normal equations of min sum_{a,c} |rho_ac|^2 |E_ac - (eps_a - eps_c) rho_ac|^2:
    // graph Laplacian with edge weights |rho_ac|^4
    RealMatrix G(n, n);
    for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a) {
            const double w = std::norm(rho.matrix(a, c));
            G(a, c) = w * w;
        }
    RealVector rhs(n);
    for (int a = 0; a < n; ++a) {
        double s = 0.0;
        for (int c = 0; c < n; ++c)
            s += std::norm(rho.matrix(a, c)) *
                 (std::conj(rho.matrix(a, c)) * E(a, c)).real();
        rhs(a) = s;
    }
    RealMatrix lap = RealMatrix::Zero(n, n);
    for (int a = 0; a < n; ++a) {
        lap(a, a) = G.row(a).sum();
        for (int c = 0; c < n; ++c) lap(a, c) -= G(a, c);
    }
    // gauge: pin eps(0) = 0, solve the reduced system
    RealMatrix A = lap.block(1, 1, n - 1, n - 1);
    RealVector b = rhs.segment(1, n - 1);
    Eigen::LDLT<RealMatrix> solver(A);
    fit.conditioning_flag = solver.info() != Eigen::Success ||
                            A.diagonal().minCoeff() < 1e-12 * A.diagonal().maxCoeff();
    fit.epsilon.segment(1, n - 1) = solver.solve(b);
    Matrix model(n, n);
    for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a)
            model(a, c) = (fit.epsilon(a) - fit.epsilon(c)) * rho.matrix(a, c);
    fit.residual = (E - model).norm() / e_norm;
    return fit;
}

/// Purity and dominant-eigenvalue fraction of the coarse-grained state; a state
/// is declared pure when both exceed 1 - 1e-6.
struct FactorizationReport {
    double purity = 0.0;
    double best_rank1_fidelity = 0.0;
    bool pure = false;
};

inline FactorizationReport factorization_check(const PositionBasisWaveFunction& psi_t) {
    DensityMatrix rho = coarse_grain(psi_t);
    FactorizationReport rep;
    rep.purity = rho.purity();
    Matrix A = 0.5 * (rho.matrix + rho.matrix.adjoint()) * rho.dz;
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    rep.best_rank1_fidelity = es.eigenvalues().maxCoeff();
    rep.pure = rep.purity > 1.0 - 1e-6 && rep.best_rank1_fidelity > 1.0 - 1e-6;
    return rep;
}

/// Snapshot of the coarse-grained state quality along an evolution.
struct UnitarityReport {
    double time = 0.0;
    double purity = 0.0;
    double trace_drift = 0.0;
    double e_norm = 0.0;             // sqrt(sum |E|^2 dz^2), continuum L2 norm
    double locality_residual = 0.0;
    bool conditioning_flag = false;
    RealVector epsilon_fit;
};

/// Evolve under the chosen law, sampling purity, trace drift, the coupling-term
/// norm and the locality residual every sample_every steps (and at t = 0, t_end).
inline std::vector<UnitarityReport> unitarity_monitor(const ClassicalWaveFunction& psi0,
                                                      const PotentialSpec& V,
                                                      const EvolutionConfig& cfg) {
    cfg.validate(psi0.grid(), V);
    Propagator prop(psi0.grid(), V, cfg.law, cfg.dt);
    ClassicalWaveFunction psi = psi0;
    std::vector<UnitarityReport> reports;
    const long every = cfg.sample_every > 0 ? cfg.sample_every : cfg.n_steps;
    auto sample = [&](long step) {
        PositionBasisWaveFunction pt = partial_fourier(psi);
        DensityMatrix rho = coarse_grain(pt);
        UnitarityReport rep;
        rep.time = step * cfg.dt;
        rep.purity = rho.purity();
        // trace drift before renormalization: the recorded correction carries it
        rep.trace_drift = std::abs(rho.normalization_correction - 1.0);
        if (V.kind != PotentialKind::Tabulated) {
            Matrix E = coupling_term(pt, V);
            rep.e_norm = E.norm() * rho.dz;
            LocalityFit fit = locality_fit(E, rho);
            rep.locality_residual = fit.residual;
            rep.conditioning_flag = fit.conditioning_flag;
            rep.epsilon_fit = fit.epsilon;
        }
        reports.push_back(std::move(rep));
    };
    sample(0);
    for (long s = 1; s <= cfg.n_steps; ++s) {
        prop.step(psi);
        if (s % every == 0 || s == cfg.n_steps) sample(s);
    }
    return reports;
}

} // namespace phasespace
