#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "phasespace/grid.hpp"
#include "phasespace/states.hpp"
#include "phasespace/transforms.hpp"

namespace phasespace {

enum class PotentialKind { Free, Harmonic, Quartic, Tabulated };

/// V(x) with mass. Harmonic: a + b x + c x^2/2. Quartic: c x^2/2 + lambda x^4/8.
struct PotentialSpec {
    PotentialKind kind = PotentialKind::Free;
    double a = 0.0, b = 0.0, c = 0.0, lambda = 0.0;
    double mass = 1.0;
    RealVector table;  // tabulated values on the z lattice

    double value(double x) const {
        switch (kind) {
            case PotentialKind::Free: return 0.0;
            case PotentialKind::Harmonic: return a + b * x + 0.5 * c * x * x;
            case PotentialKind::Quartic: return 0.5 * c * x * x + 0.125 * lambda * x * x * x * x;
            case PotentialKind::Tabulated: throw ConfigError("tabulated potential needs a lattice index");
        }
        return 0.0;
    }
    double derivative(double x) const {
        switch (kind) {
            case PotentialKind::Free: return 0.0;
            case PotentialKind::Harmonic: return b + c * x;
            case PotentialKind::Quartic: return c * x + 0.5 * lambda * x * x * x;
            case PotentialKind::Tabulated: throw ConfigError("tabulated potential needs a lattice index");
        }
        return 0.0;
    }
    double third_derivative(double x) const {
        switch (kind) {
            case PotentialKind::Free:
            case PotentialKind::Harmonic: return 0.0;
            case PotentialKind::Quartic: return 3.0 * lambda * x;
            case PotentialKind::Tabulated: throw ConfigError("tabulated potential needs a lattice index");
        }
        return 0.0;
    }
    bool is_quadratic() const {
        return kind == PotentialKind::Free || kind == PotentialKind::Harmonic ||
               (kind == PotentialKind::Quartic && lambda == 0.0);
    }

    /// Lattice tabulation of V; for Tabulated kind validates wrap continuity.
    RealVector values_on(const GridSpec& g) const {
        RealVector v(g.n_z);
        if (kind == PotentialKind::Tabulated) {
            if (table.size() != g.n_z)
                throw ConfigError("tabulated potential: table length does not match n_z");
            v = table;
            // a genuine seam discontinuity shows up as an outlier in the periodic
            // second difference at the wrap, far above the interior curvature
            const double range = v.maxCoeff() - v.minCoeff();
            const int n = g.n_z;
            double interior = 0.0;
            for (int j = 1; j < n - 1; ++j)
                interior = std::max(interior, std::abs(v(j + 1) - 2 * v(j) + v(j - 1)));
            const double seam =
                std::max(std::abs(v(0) - 2 * v(n - 1) + v(n - 2)),
                         std::abs(v(1) - 2 * v(0) + v(n - 1)));
            if (seam > 8.0 * interior + 1e-6 * range + 1e-12)
                throw ConfigError("tabulated potential: discontinuous at the periodic wrap");
            return v;
        }
        for (int i = 0; i < g.n_z; ++i) v(i) = value(g.z(i));
        return v;
    }
    RealVector derivative_on(const GridSpec& g) const {
        if (kind == PotentialKind::Tabulated) {
            Field2D f(g, AxisKind::ZP);
            RealVector v = values_on(g);
            for (int j = 0; j < g.n_p; ++j) f.values.col(j) = v.cast<Complex>();
            Field2D d = spectral_derivative(f, 0, 1);
            return d.values.col(0).real();
        }
        RealVector v(g.n_z);
        for (int i = 0; i < g.n_z; ++i) v(i) = derivative(g.z(i));
        return v;
    }
};

enum class EvolutionLaw { Liouville, HW };

/// Strang-split propagation plan; dt guard keeps the maximum phase advance per
/// substep under pi.
struct EvolutionConfig {
    EvolutionLaw law = EvolutionLaw::HW;
    double dt = 1e-3;
    long n_steps = 0;
    long sample_every = 0;

    void validate(const GridSpec& g, const PotentialSpec& V) const {
        if (!(dt != 0.0)) throw ConfigError("evolution: dt must be nonzero");
        if (n_steps < 0) throw ConfigError("evolution: n_steps must be nonnegative");
        const double k_max = M_PI / g.dz;
        const double p_max = 0.5 * g.n_p * g.dp;
        if (k_max * p_max * std::abs(dt) / (2.0 * V.mass) >= M_PI)
            throw ConfigError("evolution: kinetic phase advance per substep exceeds pi; reduce dt");
    }
};

/// Split-step propagator for the classical wave function under the Liouville or
/// the modified (H_W) law. Phase tables are precomputed per (V, dt, law) and
/// immutable afterwards; all substeps are exact diagonal unitaries.
class Propagator {
public:
    Propagator(const GridSpec& g, const PotentialSpec& V, EvolutionLaw law, double dt)
        : grid_(g), law_(law), dt_(dt) {
        EvolutionConfig cfg;
        cfg.law = law;
        cfg.dt = dt;
        cfg.validate(g, V);
        // half kinetic: advection z -> z + p dt/2m, i.e. multiply z modes by e^{-i k p dt/2m}
        kinetic_half_.resize(g.n_z, g.n_p);
        for (int j = 0; j < g.n_p; ++j) {
            const double shift = g.p(j) * dt / (2.0 * V.mass);
            for (int m = 0; m < g.n_z; ++m)
                kinetic_half_(m, j) = std::polar(1.0 / g.n_z, -fft::frequency(m, g.n_z, g.dz) * shift);
        }
        // full potential, diagonal in (z,r). Analytic potentials are evaluated at
        // the unwrapped coordinates z +- r/2 so that quadratic potentials satisfy
        // V(z + r/2) - V(z - r/2) = V'(z) r exactly on every lattice entry;
        // tabulated potentials wrap onto the window.
        potential_full_.resize(g.n_z, g.n_p);
        RealVector v = V.values_on(g);
        RealVector vp = V.derivative_on(g);
        const bool tabulated = V.kind == PotentialKind::Tabulated;
        // phase guard on the populated window: Liouville measures the p-shift
        // phase at quarter-window separation, the modified law the full
        // potential range across the window
        double max_phase;
        if (law == EvolutionLaw::Liouville) {
            max_phase = vp.cwiseAbs().maxCoeff() * std::abs(dt) * (g.length_z / 4.0);
        } else {
            max_phase = (v.maxCoeff() - v.minCoeff()) * std::abs(dt);
        }
        if (max_phase >= M_PI)
            throw ConfigError("evolution: potential phase advance per step exceeds pi; reduce dt");
        for (int k = 0; k < g.n_p; ++k) {
            const int kap = k - g.n_p / 2;
            for (int i = 0; i < g.n_z; ++i) {
                double phase;
                if (law == EvolutionLaw::Liouville) {
                    phase = -vp(i) * g.r(k) * dt;  // exact p shift by -V'(z) dt
                } else if (tabulated) {
                    phase = -(v(g.wrap_z(i + kap)) - v(g.wrap_z(i - kap))) * dt;
                } else {
                    const double half_r = kap * g.dz;
                    phase = -(V.value(g.z(i) + half_r) - V.value(g.z(i) - half_r)) * dt;
                }
                potential_full_(i, k) = std::polar(1.0, phase);
            }
        }
    }

    const GridSpec& grid() const { return grid_; }
    double dt() const { return dt_; }
    EvolutionLaw law() const { return law_; }

    /// One Strang step: half kinetic, full potential, half kinetic.
    void step(ClassicalWaveFunction& psi) const {
        Matrix& m = psi.field.values;
        apply_half_kinetic(m);
        detail::centered_p_to_r(m, grid_.dp);
        m.array() *= potential_full_.array();
        detail::centered_r_to_p(m, grid_.dr);
        apply_half_kinetic(m);
    }

    void advance(ClassicalWaveFunction& psi, long n_steps) const {
        for (long s = 0; s < n_steps; ++s) step(psi);
    }

private:
    void apply_half_kinetic(Matrix& m) const {
        fft::transform_axis0(m, FFTW_FORWARD);
        m.array() *= kinetic_half_.array();
        fft::transform_axis0(m, FFTW_BACKWARD);
    }

    GridSpec grid_;
    EvolutionLaw law_;
    double dt_;
    Matrix kinetic_half_;    // includes the 1/n_z FFT normalization
    Matrix potential_full_;
};

/// One Liouville step (exact advection + exact p shift, Strang split).
inline ClassicalWaveFunction liouville_step(const ClassicalWaveFunction& psi,
                                            const PotentialSpec& V, double dt) {
    Propagator prop(psi.grid(), V, EvolutionLaw::Liouville, dt);
    ClassicalWaveFunction out = psi;
    prop.step(out);
    return out;
}

/// One modified-law step; unitary per substep, preserves hermiticity of the
/// position-basis function and hence reality of psi.
inline ClassicalWaveFunction hw_step(const ClassicalWaveFunction& psi, const PotentialSpec& V,
                                     double dt) {
    Propagator prop(psi.grid(), V, EvolutionLaw::HW, dt);
    ClassicalWaveFunction out = psi;
    prop.step(out);
    return out;
}

/// Reference split-step Schroedinger propagator for psi_Q on the z lattice.
class SchrodingerPropagator {
public:
    SchrodingerPropagator(const GridSpec& g, const PotentialSpec& V, double dt)
        : n_(g.n_z) {
        kinetic_half_.resize(n_);
        for (int m = 0; m < n_; ++m) {
            const double k = fft::frequency(m, n_, g.dz);
            kinetic_half_(m) = std::polar(1.0 / n_, -k * k * dt / (4.0 * V.mass));
        }
        potential_full_.resize(n_);
        RealVector v = V.values_on(g);
        for (int i = 0; i < n_; ++i) potential_full_(i) = std::polar(1.0, -v(i) * dt);
    }

    void step(QuantumWaveFunction& psi) const {
        apply_half_kinetic(psi.values);
        psi.values.array() *= potential_full_.array();
        apply_half_kinetic(psi.values);
    }

    void advance(QuantumWaveFunction& psi, long n_steps) const {
        for (long s = 0; s < n_steps; ++s) step(psi);
    }

private:
    void apply_half_kinetic(Vector& v) const {
        fft::transform(v, FFTW_FORWARD);
        v.array() *= kinetic_half_.array();
        fft::transform(v, FFTW_BACKWARD);
    }
    int n_;
    Vector kinetic_half_;
    Vector potential_full_;
};

inline QuantumWaveFunction schrodinger_step(const QuantumWaveFunction& psi,
                                            const PotentialSpec& V, double dt) {
    GridSpec g(psi.size(), psi.size(), psi.z_min, psi.size() * psi.dz);
    SchrodingerPropagator prop(g, V, dt);
    QuantumWaveFunction out = psi;
    prop.step(out);
    return out;
}

enum class MoyalOrder { First, Third, Exact };

/// Right-hand side of the Wigner-function evolution equation.
/// First:  -(p/m) dz rho + V'(z) dp rho
/// Third:  adds -(1/24) V'''(z) dp^3 rho
/// Exact:  -(p/m) dz rho - i[V(z + r/2) - V(z - r/2)] applied diagonally in r
inline Field2D moyal_rhs(const WignerFunction& rho_w, const PotentialSpec& V, MoyalOrder order) {
    const GridSpec& g = rho_w.grid();
    Field2D rhs(g, AxisKind::ZP);
    Field2D dzr = spectral_derivative(rho_w.field, 0, 1);
    for (int j = 0; j < g.n_p; ++j)
        rhs.values.col(j) = -(g.p(j) / V.mass) * dzr.values.col(j);
    if (order == MoyalOrder::Exact) {
        Matrix m = rho_w.field.values;
        detail::centered_p_to_r(m, g.dp);
        RealVector v = V.values_on(g);
        const bool tabulated = V.kind == PotentialKind::Tabulated;
        for (int k = 0; k < g.n_p; ++k) {
            const int kap = k - g.n_p / 2;
            for (int i = 0; i < g.n_z; ++i) {
                const double dv =
                    tabulated ? v(g.wrap_z(i + kap)) - v(g.wrap_z(i - kap))
                              : V.value(g.z(i) + kap * g.dz) - V.value(g.z(i) - kap * g.dz);
                m(i, k) *= Complex(0.0, -dv);
            }
        }
        detail::centered_r_to_p(m, g.dr);
        rhs.values += m;
    } else {
        Field2D dpr = spectral_derivative(rho_w.field, 1, 1);
        RealVector vp = V.derivative_on(g);
        for (int j = 0; j < g.n_p; ++j)
            rhs.values.col(j).array() += vp.array().cast<Complex>() * dpr.values.col(j).array();
        if (order == MoyalOrder::Third) {
            Field2D dp3 = spectral_derivative(rho_w.field, 1, 3);
            for (int j = 0; j < g.n_p; ++j)
                for (int i = 0; i < g.n_z; ++i)
                    rhs.values(i, j) -= V.third_derivative(g.z(i)) / 24.0 * dp3.values(i, j);
        }
    }
    rhs.values = rhs.values.real().cast<Complex>();
    return rhs;
}

/// Result of the nonlinear quantum-correction evaluation; masked_fraction is the
/// share of grid points where w fell below the log floor.
struct CorrectionField {
    Field2D field;
    double masked_fraction = 0.0;
    bool mask_warning = false;
};

/// Quartic-potential modification of the Liouville equation for w:
/// C[w] = -(lambda/8) z (dp^3 ln w + 3/2 dp^2 ln w dp ln w + 1/4 (dp ln w)^3) w.
/// Diagnostic only; w is floored at 1e-300 and sub-floor points are masked.
inline CorrectionField quantum_correction(const Field2D& w, const PotentialSpec& V,
                                          double floor = 1e-300) {
    if (V.kind != PotentialKind::Quartic)
        throw ConfigError("quantum_correction: quartic potential required");
    const GridSpec& g = w.grid;
    // log-derivatives built from the spectral derivatives of w itself (w is
    // periodic-smooth; ln w is not), divided by the floored density:
    //   dp ln w = w'/w,  dp^2 ln w = w''/w - (w'/w)^2,
    //   dp^3 ln w = w'''/w - 3 (w''/w)(w'/w) + 2 (w'/w)^3
    Field2D d1 = spectral_derivative(w, 1, 1);
    Field2D d2 = spectral_derivative(w, 1, 2);
    Field2D d3 = spectral_derivative(w, 1, 3);
    CorrectionField out{Field2D(g, AxisKind::ZP), 0.0, false};
    long masked = 0;
    // cells below the spectral dust level produce pure rounding noise in the
    // log-derivative ratios; mask them along with the hard floor
    const double dust = 1e-14 * w.values.real().maxCoeff();
    floor = std::max(floor, dust);
    for (int j = 0; j < g.n_p; ++j)
        for (int i = 0; i < g.n_z; ++i) {
            const double wv = w.values(i, j).real();
            if (wv < floor) {
                ++masked;
                continue;  // masked point: correction reported as zero
            }
            const double r1 = d1.values(i, j).real() / wv;
            const double r2 = d2.values(i, j).real() / wv;
            const double r3 = d3.values(i, j).real() / wv;
            const double u1 = r1;
            const double u2 = r2 - r1 * r1;
            const double u3 = r3 - 3.0 * r2 * r1 + 2.0 * r1 * r1 * r1;
            const double bracket = u3 + 1.5 * u2 * u1 + 0.25 * u1 * u1 * u1;
            out.field.values(i, j) = -(V.lambda / 8.0) * g.z(i) * bracket * wv;
        }
    out.masked_fraction = static_cast<double>(masked) / (static_cast<double>(g.n_z) * g.n_p);
    out.mask_warning = out.masked_fraction > 0.01;
    return out;
}

/// Liouville right-hand side for w (or any real field): -(p/m) dz w + V'(z) dp w.
inline Field2D liouville_rhs(const Field2D& w, const PotentialSpec& V) {
    const GridSpec& g = w.grid;
    Field2D dzw = spectral_derivative(w, 0, 1);
    Field2D dpw = spectral_derivative(w, 1, 1);
    RealVector vp = V.derivative_on(g);
    Field2D rhs(g, AxisKind::ZP);
    for (int j = 0; j < g.n_p; ++j)
        for (int i = 0; i < g.n_z; ++i)
            rhs.values(i, j) = -(g.p(j) / V.mass) * dzw.values(i, j) + vp(i) * dpw.values(i, j);
    return rhs;
}

} // namespace phasespace
