#pragma once

// Reference implementations kept independent of the spectral fast paths: brute
// sums, finite differences, trajectory ensembles and closed forms. Used by the
// test suites and exposed through the CLI `oracle` subcommand. Production code
// must not call into this header.

#include <cmath>
#include <random>
#include <vector>

#include "phasespace/diagnostics.hpp"
#include "phasespace/evolution.hpp"
#include "phasespace/grid.hpp"
#include "phasespace/states.hpp"

namespace phasespace::oracles {

/// Central finite-difference derivative along an axis (periodic). stencil_order
/// 2 or 8; the 8th-order stencil resolves smooth fields to ~1e-8 at desk-scale
/// spacings, tight enough to check the spectral kernels at 1e-6 relative.
inline Field2D finite_difference_derivative(const Field2D& f, int axis, int stencil_order = 8) {
    const GridSpec& g = f.grid;
    Field2D out(g, f.axis);
    const int n = axis == 0 ? g.n_z : g.n_p;
    const double h = axis == 0 ? g.dz : g.dp;
    std::vector<std::pair<int, double>> stencil;
    if (stencil_order == 2) {
        stencil = {{1, 0.5}, {-1, -0.5}};
    } else {
        stencil = {{1, 4.0 / 5}, {-1, -4.0 / 5}, {2, -1.0 / 5}, {-2, 1.0 / 5},
                   {3, 4.0 / 105}, {-3, -4.0 / 105}, {4, -1.0 / 280}, {-4, 1.0 / 280}};
    }
    auto at = [&](int i, int j, int off) {
        if (axis == 0) return f.values(((i + off) % n + n) % n, j);
        return f.values(i, ((j + off) % n + n) % n);
    };
    for (int j = 0; j < g.n_p; ++j)
        for (int i = 0; i < g.n_z; ++i) {
            Complex acc = 0.0;
            for (auto [off, c] : stencil) acc += c * at(i, j, off);
            out.values(i, j) = acc / h;
        }
    return out;
}

/// Literal six-loop evaluation of the fourfold quantum-transform sum (tiny
/// grids only); certifies the kernel-factored direct evaluator.
inline RealMatrix quantum_transform_literal(const ClassicalWaveFunction& psi) {
    const GridSpec& g = psi.grid();
    const int nz = g.n_z, np = g.n_p;
    if (static_cast<long>(nz) * np > 16L * 16L)
        throw ConfigError("quantum_transform_literal: grid too large for the literal sum");
    RealMatrix w = psi.field.values.real();
    RealMatrix out = RealMatrix::Zero(nz, np);
    std::vector<double> cos_table(np);
    for (int m = 0; m < np; ++m) cos_table[m] = std::cos(kTwoPi * m / np);
    for (int i = 0; i < nz; ++i)
        for (int j = 0; j < np; ++j) {
            double acc = 0.0;
            for (int k = 0; k < np; ++k)
                for (int kq = 0; kq < np; ++kq)
                    for (int l = 0; l < np; ++l)
                        for (int lq = 0; lq < np; ++lq) {
                            const int kap = k - np / 2, kapq = kq - np / 2;
                            const int lam = l - np / 2, lamq = lq - np / 2;
                            const double a = w(g.wrap_z(i + kap), (j + lam % np + np) % np);
                            const double b = w(g.wrap_z(i + kapq), (j + lamq % np + np) % np);
                            long ph = (static_cast<long>(lamq) * kap -
                                       static_cast<long>(lam) * kapq) % np;
                            if (ph < 0) ph += np;
                            acc += a * b * cos_table[ph];
                        }
            out(i, j) = acc / (static_cast<double>(np) * np);
        }
    return out;
}

/// Method-of-characteristics moments: advect each grid cell's weight along the
/// classical trajectory (RK4 on zdot = p/m, pdot = -V'(z)) and return the
/// ensemble (<X>, <P>) at time t.
struct EnsembleMoments {
    double x = 0.0;
    double p = 0.0;
};

inline EnsembleMoments characteristics_moments(const ClassicalWaveFunction& psi0,
                                               const PotentialSpec& V, double t, int n_rk4) {
    const GridSpec& g = psi0.grid();
    const double h = t / n_rk4;
    EnsembleMoments m;
    const double meas = psi0.field.measure();
    for (int j = 0; j < g.n_p; ++j)
        for (int i = 0; i < g.n_z; ++i) {
            const double weight = std::norm(psi0.field.values(i, j)) * meas;
            if (weight < 1e-300) continue;
            double z = g.z(i), p = g.p(j);
            for (int s = 0; s < n_rk4; ++s) {
                const double k1z = p / V.mass, k1p = -V.derivative(z);
                const double k2z = (p + 0.5 * h * k1p) / V.mass,
                             k2p = -V.derivative(z + 0.5 * h * k1z);
                const double k3z = (p + 0.5 * h * k2p) / V.mass,
                             k3p = -V.derivative(z + 0.5 * h * k2z);
                const double k4z = (p + h * k3p) / V.mass, k4p = -V.derivative(z + h * k3z);
                z += h / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z);
                p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
            }
            m.x += weight * z;
            m.p += weight * p;
        }
    return m;
}

/// Closed-form quantum widths of the Gaussian packet: D~^2 = D^2 + 1/(16 D_conj^2).
inline double quantum_width_sq(double d, double d_conj) {
    return d * d + 1.0 / (16.0 * d_conj * d_conj);
}

/// Closed-form partial Fourier transform of the Gaussian packet (x,y form):
/// (dp/(pi dx))^{1/2} exp(-(x+y-2x0)^2/(16 dx^2)) exp(-dp^2 (x-y)^2) e^{i p0 (x-y)}.
inline Complex gaussian_position_basis(double x, double y, double x0, double p0, double dx,
                                       double dp) {
    const double amp = std::sqrt(dp / (M_PI * dx));
    const double s = x + y - 2.0 * x0;
    const double d = x - y;
    return std::polar(amp * std::exp(-s * s / (16.0 * dx * dx)) * std::exp(-dp * dp * d * d),
                      p0 * d);
}

/// Closed-form pure-state wave function at the factorization point dx dp = 1/4:
/// psi(x) = (4 dp^2/pi)^{1/4} exp(-2 dp^2 (x-x0)^2) e^{i p0 x}.
inline Complex factorized_pure_state(double x, double x0, double p0, double dp) {
    return std::polar(std::pow(4.0 * dp * dp / M_PI, 0.25) *
                          std::exp(-2.0 * dp * dp * (x - x0) * (x - x0)),
                      p0 * x);
}

/// Classical position density of a pure state (convolution form):
/// w(z) = sum_r |psi(z + r/2)|^2 |psi(z - r/2)|^2 dr.
inline RealVector position_marginal_convolution(const QuantumWaveFunction& psi,
                                                const GridSpec& g) {
    RealVector out = RealVector::Zero(g.n_z);
    for (int k = 0; k < g.n_p; ++k) {
        const int kap = k - g.n_p / 2;
        const int rep = (((2 * kap + g.n_z / 2) % g.n_z) + g.n_z) % g.n_z - g.n_z / 2;
        if (2 * kap != rep) continue;  // torus-aliased separation
        for (int i = 0; i < g.n_z; ++i)
            out(i) += std::norm(psi.values(g.wrap_z(i + kap))) *
                      std::norm(psi.values(g.wrap_z(i - kap))) * g.dr;
    }
    return out;
}

/// Direct evaluation of the quartic locality condition's left side:
/// (lambda/16) sum_y [2(x-x')y^3 - 2(x^3-x'^3)y + (x^4-x'^4)] psi(x,y) conj(psi(x',y)) dy
/// on the lattice-aligned pairs x = z + r/2, x' = z - r/2.
inline Matrix quartic_coupling_direct(const PositionBasisWaveFunction& psi_t, double lambda) {
    const GridSpec& g = psi_t.field.grid;
    const int nz = g.n_z, np = g.n_p;
    Matrix out = Matrix::Zero(nz, np);
    const Matrix& pt = psi_t.field.values;
    for (int k = 0; k < np; ++k) {
        const int kap_k = k - np / 2;
        for (int m = 0; m < np; ++m) {
            const int kap_m = m - np / 2;
            int k2 = m - k;
            int q = 0;
            while (k2 < -np / 2) { k2 += np; ++q; }
            while (k2 >= np / 2) { k2 -= np; --q; }
            const int k2bin = k2 + np / 2;
            for (int i = 0; i < nz; ++i) {
                const double x = g.z_wrapped(i + kap_k);
                const double xp = g.z_wrapped(i - kap_k);
                const double y = g.z_wrapped(i + kap_k - 2 * kap_m);
                const double bracket = 2.0 * (x - xp) * y * y * y -
                                       2.0 * (x * x * x - xp * xp * xp) * y +
                                       (x * x * x * x - xp * xp * xp * xp);
                const Complex a = pt(g.wrap_z(i + kap_k - kap_m), m);
                const Complex b = pt(g.wrap_z(i - kap_m - q * np), k2bin);
                out(i, k) += lambda / 16.0 * bracket * a * std::conj(b);
            }
        }
    }
    out *= g.dr;
    return out;
}

/// Width of a freely spreading Gaussian: s^2(t) = s^2(0) + t^2/(4 s^2(0) m^2).
inline double free_spread_width_sq(double s0_sq, double t, double mass) {
    return s0_sq + t * t / (4.0 * s0_sq * mass * mass);
}

/// Coherent state of the unit oscillator centered at (x0, p0).
inline QuantumWaveFunction coherent_state(const GridSpec& g, double x0, double p0, double mass,
                                          double omega) {
    QuantumWaveFunction psi;
    psi.dz = g.dz;
    psi.z_min = g.z_min;
    psi.values.resize(g.n_z);
    const double a = mass * omega;
    for (int i = 0; i < g.n_z; ++i) {
        const double x = g.z(i);
        psi.values(i) = std::polar(std::pow(a / M_PI, 0.25) *
                                       std::exp(-0.5 * a * (x - x0) * (x - x0)),
                                   p0 * x);
    }
    const double n = psi.norm();
    psi.values /= std::sqrt(n);
    return psi;
}

/// Symbolic quantum correction for a Gaussian density (p-Gaussian, width dp,
/// center pbar): C[w] = -(lambda/8) z [ 3(p-pbar)/(2 dp^4) - (p-pbar)^3/(4 dp^6) ] w.
inline RealMatrix gaussian_correction_closed_form(const GridSpec& g, const RealMatrix& w,
                                                  double lambda, double pbar, double dp) {
    RealMatrix out(g.n_z, g.n_p);
    for (int j = 0; j < g.n_p; ++j) {
        const double u = g.p(j) - pbar;
        const double bracket = 1.5 * u / std::pow(dp, 4) - 0.25 * u * u * u / std::pow(dp, 6);
        for (int i = 0; i < g.n_z; ++i)
            out(i, j) = -(lambda / 8.0) * g.z(i) * bracket * w(i, j);
    }
    return out;
}

/// Ground state of the discretized H = P^2/2m + V on the z lattice via dense
/// diagonalization; independent of the split-step machinery.
inline QuantumWaveFunction discrete_ground_state(const GridSpec& g, const PotentialSpec& V) {
    Matrix P = momentum_operator(g.n_z, g.dz);
    Matrix H = (P * P) / (2.0 * V.mass);
    RealVector v = V.values_on(g);
    for (int i = 0; i < g.n_z; ++i) H(i, i) += v(i);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (H + H.adjoint()));
    QuantumWaveFunction psi;
    psi.dz = g.dz;
    psi.z_min = g.z_min;
    psi.values = es.eigenvectors().col(0) / std::sqrt(g.dz);
    return psi;
}

/// Deterministic random real normalized classical wave function with decayed
/// boundary content (a valid "random smooth state"), seedable.
inline ClassicalWaveFunction random_smooth_state(const GridSpec& g, unsigned seed,
                                                 int n_modes = 8) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-0.6, 0.6);
    std::uniform_real_distribution<double> ph(0.0, kTwoPi);
    std::normal_distribution<double> amp(0.0, 1.0);
    ClassicalWaveFunction psi{Field2D(g, AxisKind::ZP)};
    const double z_scale = 0.13 * g.length_z;
    const double p_scale = 0.13 * g.n_p * g.dp;
    for (int mode = 0; mode < n_modes; ++mode) {
        const double az = uni(rng), ap = uni(rng), f = ph(rng), a0 = amp(rng);
        for (int j = 0; j < g.n_p; ++j)
            for (int i = 0; i < g.n_z; ++i)
                psi.field.values(i, j) += a0 * std::cos(az * g.z(i) + ap * g.p(j) + f);
    }
    const double zc = g.z_min + 0.5 * g.length_z;
    for (int j = 0; j < g.n_p; ++j)
        for (int i = 0; i < g.n_z; ++i) {
            const double dz_ = (g.z(i) - zc) / z_scale;
            const double dp_ = g.p(j) / p_scale;
            psi.field.values(i, j) *= std::exp(-0.5 * (dz_ * dz_ + dp_ * dp_) * 2.0);
        }
    normalize(psi);
    return psi;
}

/// Plain random real field (no smoothness) for exact-identity checks, seedable.
inline ClassicalWaveFunction random_rough_state(const GridSpec& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> amp(0.0, 1.0);
    ClassicalWaveFunction psi{Field2D(g, AxisKind::ZP)};
    for (int j = 0; j < g.n_p; ++j)
        for (int i = 0; i < g.n_z; ++i) psi.field.values(i, j) = amp(rng);
    normalize(psi);
    return psi;
}

} // namespace phasespace::oracles
