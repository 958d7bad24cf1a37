#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "phasespace/grid.hpp"

namespace phasespace {

/// Real wave function on (z,p) with w = psi^2; carries the sign freedom of the
/// square root explicitly. Stored complex, reality enforced to tolerance.
struct ClassicalWaveFunction {
    Field2D field;  // axis ZP

    const GridSpec& grid() const { return field.grid; }
    /// max |Im| / max |Re|
    double imaginary_fraction() const {
        const double re = field.values.real().cwiseAbs().maxCoeff();
        const double im = field.values.imag().cwiseAbs().maxCoeff();
        return re > 0.0 ? im / re : (im > 0.0 ? 1.0 : 0.0);
    }
    double norm() const { return integrate_abs2(field); }
};

/// Position-basis wave function psi(x,y) in the (z,r) representation,
/// z = (x+y)/2, r = x-y. Hermiticity: value at (z,-r) equals conj at (z,r).
struct PositionBasisWaveFunction {
    Field2D field;  // axis ZR

    const GridSpec& grid() const { return field.grid; }
    double norm() const { return integrate_abs2(field); }
    /// max violation of psi(z,-r) = conj psi(z,r), relative to max |psi|
    double hermiticity_violation() const {
        const Matrix& v = field.values;
        const int np = field.grid.n_p;
        double worst = 0.0;
        for (int k = 0; k < np; ++k) {
            const int kneg = (np - k) % np;  // bin with kappa -> -kappa (k = 0 self-paired)
            worst = std::max(worst, (v.col(k) - v.col(kneg).conjugate()).cwiseAbs().maxCoeff());
        }
        const double scale = v.cwiseAbs().maxCoeff();
        return scale > 0.0 ? worst / scale : 0.0;
    }
};

enum class MatrixBasis { Position, Momentum };

/// Coarse-grained density matrix rho(x,x') on the z lattice, weight dz per index.
struct DensityMatrix {
    Matrix matrix;  // n_z x n_z
    double dz = 0.0;
    double z_min = 0.0;
    MatrixBasis basis = MatrixBasis::Position;
    double normalization_correction = 1.0;  // trace factor removed at construction

    int size() const { return static_cast<int>(matrix.rows()); }
    double x(int i) const { return z_min + i * dz; }
    double trace() const { return matrix.trace().real() * dz; }
    double purity() const { return (matrix * matrix).trace().real() * dz * dz; }
    double hermiticity_violation() const {
        return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
    }
};

/// Wigner representation of rho; real, may be negative, integrates to 1.
struct WignerFunction {
    Field2D field;  // axis ZP, values real up to tolerance

    const GridSpec& grid() const { return field.grid; }
    double imaginary_fraction() const {
        const double re = field.values.real().cwiseAbs().maxCoeff();
        const double im = field.values.imag().cwiseAbs().maxCoeff();
        return re > 0.0 ? im / re : (im > 0.0 ? 1.0 : 0.0);
    }
};

/// Pure quantum state on the z lattice, sum |psi|^2 dz = 1.
struct QuantumWaveFunction {
    Vector values;
    double dz = 0.0;
    double z_min = 0.0;

    int size() const { return static_cast<int>(values.size()); }
    double x(int i) const { return z_min + i * dz; }
    double norm() const { return values.squaredNorm() * dz; }
};

inline constexpr double kRealityTol = 1e-9;
inline constexpr double kNormTol = 1e-8;

/// Validate and renormalize a classical wave function in place. Returns the
/// normalization factor that was divided out.
inline double normalize(ClassicalWaveFunction& psi) {
    const double n = psi.norm();
    if (!(n > 0.0)) throw NumericError("classical wave function has zero norm");
    psi.field.values /= std::sqrt(n);
    return std::sqrt(n);
}

inline void check_valid(const ClassicalWaveFunction& psi, const std::string& where) {
    if (psi.imaginary_fraction() > kRealityTol)
        throw NumericError(where + ": classical wave function not real (imaginary fraction " +
                           std::to_string(psi.imaginary_fraction()) + ")");
    if (std::abs(psi.norm() - 1.0) > 1e-6)
        throw NumericError(where + ": classical wave function not normalized");
}

/// psi = sign * sqrt(w). Default sign +1 everywhere. w is renormalized to unit
/// integral first; entries below -1e-12 are rejected with their location.
inline ClassicalWaveFunction wavefunction_from_density(
    const Field2D& w, const RealMatrix* sign_field = nullptr) {
    if (w.axis != AxisKind::ZP) throw ConfigError("wavefunction_from_density: (z,p) field required");
    RealMatrix wr = w.values.real();
    const double max_imag = w.values.imag().cwiseAbs().maxCoeff();
    if (max_imag > 1e-12)
        throw NumericError("wavefunction_from_density: density has imaginary entries");
    for (int j = 0; j < wr.cols(); ++j)
        for (int i = 0; i < wr.rows(); ++i) {
            if (wr(i, j) < -1e-12)
                throw NumericError("wavefunction_from_density: negative density " +
                                   std::to_string(wr(i, j)) + " at (i=" + std::to_string(i) +
                                   ", j=" + std::to_string(j) + ")");
            if (wr(i, j) < 0.0) wr(i, j) = 0.0;
        }
    const double total = wr.sum() * w.measure();
    if (!(total > 0.0)) throw NumericError("wavefunction_from_density: density integrates to zero");
    wr /= total;
    ClassicalWaveFunction psi{Field2D(w.grid, AxisKind::ZP)};
    psi.field.values = wr.cwiseSqrt().cast<Complex>();
    if (sign_field) {
        if (sign_field->rows() != wr.rows() || sign_field->cols() != wr.cols())
            throw ConfigError("wavefunction_from_density: sign field shape mismatch");
        for (int j = 0; j < wr.cols(); ++j)
            for (int i = 0; i < wr.rows(); ++i)
                if ((*sign_field)(i, j) < 0.0) psi.field.values(i, j) = -psi.field.values(i, j);
    }
    normalize(psi);
    return psi;
}

/// w = psi^2 (real part squared after the reality check); nonnegative.
inline Field2D density_from_wavefunction(const ClassicalWaveFunction& psi) {
    if (psi.imaginary_fraction() > kRealityTol)
        throw NumericError("density_from_wavefunction: wave function not real");
    Field2D w(psi.grid(), AxisKind::ZP);
    w.values = psi.field.values.real().cwiseAbs2().cast<Complex>();
    return w;
}

/// Gaussian wave packet psi ~ exp(-(z-x0)^2/4 dx^2) exp(-(p-p0)^2/4 dp^2),
/// renormalized on the grid. Widths must be resolvable and tails must clear the window.
inline ClassicalWaveFunction gaussian_packet(const GridSpec& g, double x0, double p0,
                                             double dx, double dp) {
    if (!(dx > 0.0) || !(dp > 0.0)) throw ConfigError("gaussian_packet: widths must be positive");
    if (dx <= 3.0 * g.dz)
        throw ConfigError("gaussian_packet: dx=" + std::to_string(dx) +
                          " unresolvable (needs > 3 dz = " + std::to_string(3 * g.dz) + ")");
    if (dp <= 3.0 * g.dp)
        throw ConfigError("gaussian_packet: dp=" + std::to_string(dp) +
                          " unresolvable (needs > 3 dp = " + std::to_string(3 * g.dp) + ")");
    ClassicalWaveFunction psi{Field2D(g, AxisKind::ZP)};
    for (int j = 0; j < g.n_p; ++j) {
        const double pp = g.p(j) - p0;
        const double ep = std::exp(-pp * pp / (4.0 * dp * dp));
        for (int i = 0; i < g.n_z; ++i) {
            const double zz = g.z(i) - x0;
            psi.field.values(i, j) = std::exp(-zz * zz / (4.0 * dx * dx)) * ep;
        }
    }
    if (boundary_mass_fraction(psi.field) > 1e-8)
        throw ConfigError("gaussian_packet: boundary mass above 1e-8, widen the window");
    normalize(psi);
    return psi;
}

/// n-th eigenstate of H = P^2/2m + m w^2 X^2 / 2 via the normalized Hermite
/// recurrence, grid-renormalized.
inline QuantumWaveFunction harmonic_eigenstate(const GridSpec& g, int n, double mass,
                                               double omega) {
    if (n < 0 || n > 10) throw ConfigError("harmonic_eigenstate: n must be in [0, 10]");
    if (!(mass > 0.0) || !(omega > 0.0))
        throw ConfigError("harmonic_eigenstate: mass and omega must be positive");
    const double a = std::sqrt(mass * omega);
    QuantumWaveFunction psi;
    psi.dz = g.dz;
    psi.z_min = g.z_min;
    psi.values.resize(g.n_z);
    for (int i = 0; i < g.n_z; ++i) {
        const double xi = a * g.z(i);
        double h0 = std::pow(M_PI, -0.25) * std::exp(-0.5 * xi * xi);
        double h1 = std::sqrt(2.0) * xi * h0;
        double hn = (n == 0) ? h0 : h1;
        for (int m = 1; m < n; ++m) {
            const double next = std::sqrt(2.0 / (m + 1.0)) * xi * hn - std::sqrt(m / (m + 1.0)) * h0;
            h0 = hn;
            hn = next;
        }
        psi.values(i) = std::sqrt(a) * hn;
    }
    const double nrm = psi.norm();
    if (!(nrm > 1e-12))
        throw ConfigError("harmonic_eigenstate: state not resolvable on this grid");
    // tail check: the state must be negligible at the window edge
    const double edge = std::max(std::abs(psi.values(0)), std::abs(psi.values(g.n_z - 1)));
    if (edge * edge * g.dz / nrm > 1e-10)
        throw ConfigError("harmonic_eigenstate: window too small for requested state");
    psi.values /= std::sqrt(nrm);
    return psi;
}

} // namespace phasespace
