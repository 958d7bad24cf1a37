#pragma once

#include <cmath>

#include "phasespace/diagnostics.hpp"
#include "phasespace/evolution.hpp"
#include "phasespace/grid.hpp"
#include "phasespace/observables.hpp"
#include "phasespace/transforms.hpp"

namespace phasespace {

/// Complex-classical-wave-function state psi = sqrt(w) e^{i alpha}, stored as the
/// probability density and the (unwrapped) phase field. A constant alpha is
/// irrelevant to every evaluator in this module.
struct PhasedState {
    Field2D w;         // axis ZP, nonnegative real
    RealMatrix alpha;  // radians, same shape

    void validate() const {
        if (w.axis != AxisKind::ZP) throw ConfigError("phased state: (z,p) density required");
        if (alpha.rows() != w.grid.n_z || alpha.cols() != w.grid.n_p)
            throw ConfigError("phased state: phase shape mismatch");
        if (std::abs(integrate(w).real() - 1.0) > kNormTol)
            throw NumericError("phased state: density not normalized");
    }

    /// sqrt(w) e^{i alpha} as a (complex) classical wave function.
    ClassicalWaveFunction complex_wavefunction() const {
        ClassicalWaveFunction psi{Field2D(w.grid, AxisKind::ZP)};
        for (int j = 0; j < w.grid.n_p; ++j)
            for (int i = 0; i < w.grid.n_z; ++i)
                psi.field.values(i, j) =
                    std::polar(std::sqrt(std::max(w.values(i, j).real(), 0.0)), alpha(i, j));
        return psi;
    }
};

struct PhasedMomentumMoments {
    double p1 = 0.0;          // <P_Q>
    double p2 = 0.0;          // <P_Q^2>
    double masked_fraction = 0.0;
    bool mask_warning = false;
};

/// <P_Q> = int w (p + dz_alpha/2);
/// <P_Q^2> = int [w (p + dz_alpha/2)^2 + (dz w)^2/(16 w)], w floored for the division.
inline PhasedMomentumMoments phased_momentum_moments(const PhasedState& st,
                                                     double floor = 1e-300) {
    st.validate();
    const GridSpec& g = st.w.grid;
    Field2D alpha_f(g, AxisKind::ZP);
    alpha_f.values = st.alpha.cast<Complex>();
    Field2D dz_alpha = spectral_derivative(alpha_f, 0, 1);
    Field2D dz_w = spectral_derivative(st.w, 0, 1);
    PhasedMomentumMoments out;
    long masked = 0;
    floor = std::max(floor, 1e-14 * st.w.values.real().maxCoeff());
    double p1 = 0.0, p2 = 0.0;
    for (int j = 0; j < g.n_p; ++j) {
        const double p = g.p(j);
        for (int i = 0; i < g.n_z; ++i) {
            const double w = st.w.values(i, j).real();
            const double shifted = p + 0.5 * dz_alpha.values(i, j).real();
            p1 += w * shifted;
            const double dw = dz_w.values(i, j).real();
            double wf = w;
            if (wf < floor) {
                ++masked;
                wf = floor;
            }
            const double fluct = (w < floor) ? 0.0 : dw * dw / (16.0 * wf);
            p2 += w * shifted * shifted + fluct;
        }
    }
    const double meas = st.w.measure();
    out.p1 = p1 * meas;
    out.p2 = p2 * meas;
    out.masked_fraction = static_cast<double>(masked) / (static_cast<double>(g.n_z) * g.n_p);
    out.mask_warning = out.masked_fraction > 0.01;
    return out;
}

/// Phase-dependent quantum transform, direct fourfold sum with kernel
/// cos(s'r - s r' + alpha_1 - alpha_2); same size guard and kernel factoring as
/// quantum_transform_direct.
inline WignerFunction phased_quantum_transform_direct(const PhasedState& st) {
    st.validate();
    const GridSpec& g = st.w.grid;
    if (static_cast<long>(g.n_z) * g.n_p > 64L * 64L)
        throw ConfigError("phased_quantum_transform_direct: grid larger than 64^2");
    const int nz = g.n_z, np = g.n_p;
    Matrix kernel(np, np);
    for (int a = 0; a < np; ++a)
        for (int b = 0; b < np; ++b) {
            const long m = (static_cast<long>(a - np / 2) * (b - np / 2)) % np;
            kernel(a, b) = std::polar(1.0, kTwoPi * m / np);
        }
    WignerFunction out{Field2D(g, AxisKind::ZP)};
    Matrix At(np, np);
    for (int i = 0; i < nz; ++i) {
        for (int j = 0; j < np; ++j) {
            for (int l = 0; l < np; ++l) {
                const int col = (j + l - np / 2 + np) % np;
                for (int k = 0; k < np; ++k) {
                    const int row = g.wrap_z(i + k - np / 2);
                    At(k, l) = std::polar(std::sqrt(std::max(st.w.values(row, col).real(), 0.0)),
                                          st.alpha(row, col));
                }
            }
            const Matrix S = (kernel.transpose() * At).conjugate();
            const Matrix T = At * S;
            out.field.values(i, j) = (kernel.array() * T.array()).sum().real() / (np * np);
        }
    }
    return out;
}

/// Fast path: complex-wave-function pipeline (partial Fourier, coarse graining,
/// Wigner). The coarse graining uses the shared-y gather, which does not assume
/// hermiticity of the position-basis function; agrees with the direct sum.
inline WignerFunction phased_quantum_transform(const PhasedState& st) {
    st.validate();
    ClassicalWaveFunction psi = st.complex_wavefunction();
    const GridSpec& g = st.w.grid;
    Matrix psi_t = axis_fourier(psi.field, FourierDirection::PtoR).values;
    Field2D rho_hat(g, AxisKind::ZR, detail::gram_gather(g, psi_t));
    Field2D wig = axis_fourier(rho_hat, FourierDirection::RtoP);
    wig.values = wig.values.real().cast<Complex>();
    return WignerFunction{std::move(wig)};
}

/// Phase-dependent evolution right-hand side for w under the quartic potential:
/// dt w = -L w - (lambda/8) z { 3/4 w^-2 (dp w)^3 - 3/2 w^-1 dp w dp^2 w + dp^3 w
///                              - 3 dp w dp^2 alpha - 6 w dp alpha dp^2 alpha }.
inline CorrectionField phased_evolution_rhs(const PhasedState& st, const PotentialSpec& V,
                                            double floor = 1e-300) {
    st.validate();
    if (V.kind != PotentialKind::Quartic)
        throw ConfigError("phased_evolution_rhs: quartic potential required");
    const GridSpec& g = st.w.grid;
    Field2D alpha_f(g, AxisKind::ZP);
    alpha_f.values = st.alpha.cast<Complex>();
    Field2D dw1 = spectral_derivative(st.w, 1, 1);
    Field2D dw2 = spectral_derivative(st.w, 1, 2);
    Field2D dw3 = spectral_derivative(st.w, 1, 3);
    Field2D da1 = spectral_derivative(alpha_f, 1, 1);
    Field2D da2 = spectral_derivative(alpha_f, 1, 2);
    Field2D lrhs = liouville_rhs(st.w, V);  // already includes the minus sign of -L w
    CorrectionField out{Field2D(g, AxisKind::ZP), 0.0, false};
    long masked = 0;
    floor = std::max(floor, 1e-14 * st.w.values.real().maxCoeff());
    for (int j = 0; j < g.n_p; ++j)
        for (int i = 0; i < g.n_z; ++i) {
            const double w = st.w.values(i, j).real();
            double wf = w;
            bool mask = false;
            if (wf < floor) {
                ++masked;
                mask = true;
                wf = floor;
            }
            const double w1 = dw1.values(i, j).real();
            const double w2 = dw2.values(i, j).real();
            const double w3 = dw3.values(i, j).real();
            const double a1 = da1.values(i, j).real();
            const double a2 = da2.values(i, j).real();
            double brace = w3 - 3.0 * w1 * a2 - 6.0 * w * a1 * a2;
            if (!mask) brace += 0.75 * (w1 * w1 * w1) / (wf * wf) - 1.5 * w1 * w2 / wf;
            out.field.values(i, j) =
                lrhs.values(i, j).real() - (V.lambda / 8.0) * g.z(i) * brace;
        }
    out.masked_fraction = static_cast<double>(masked) / (static_cast<double>(g.n_z) * g.n_p);
    out.mask_warning = out.masked_fraction > 0.01;
    return out;
}

} // namespace phasespace
