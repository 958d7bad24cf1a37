#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "phasespace/errors.hpp"
#include "phasespace/fft.hpp"

namespace phasespace {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kTwoPi = 2.0 * M_PI;

/// Uniform periodic phase-space grid. Position window [z_min, z_min+length_z),
/// conjugate-separation spacing dr = 2 dz so that x = z + r/2 and y = z - r/2
/// land on the z lattice, and dp dr n_p = 2 pi exactly.
struct GridSpec {
    int n_z = 0;
    int n_p = 0;
    double z_min = 0.0;
    double length_z = 0.0;
    double dz = 0.0;
    double dr = 0.0;
    double dp = 0.0;

    GridSpec() = default;
    GridSpec(int nz, int np, double zmin, double lz)
        : n_z(nz), n_p(np), z_min(zmin), length_z(lz) {
        if (n_z < 4 || (n_z & (n_z - 1)) != 0)
            throw ConfigError("grid: n_z must be a power of two >= 4, got " + std::to_string(n_z));
        if (n_p < 4 || (n_p & (n_p - 1)) != 0)
            throw ConfigError("grid: n_p must be a power of two >= 4, got " + std::to_string(n_p));
        if (!(lz > 0.0)) throw ConfigError("grid: length_z must be positive");
        dz = length_z / n_z;
        dr = 2.0 * dz;
        dp = kTwoPi / (n_p * dr);
    }

    double z(int i) const { return z_min + i * dz; }
    double z_wrapped(long i) const {  // lattice value at a wrapped index
        long m = i % n_z;
        if (m < 0) m += n_z;
        return z_min + m * dz;
    }
    double p(int j) const { return (j - n_p / 2) * dp; }
    double r(int k) const { return (k - n_p / 2) * dr; }
    int wrap_z(long i) const {
        long m = i % n_z;
        return static_cast<int>(m < 0 ? m + n_z : m);
    }

    bool operator==(const GridSpec& o) const {
        return n_z == o.n_z && n_p == o.n_p && z_min == o.z_min && length_z == o.length_z;
    }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

/// Axis semantics of a 2-D field; fixes the quadrature measure.
enum class AxisKind {
    ZP,  // (z, p): weight dz dp / 2pi
    ZR,  // (z, r): weight dz dr
    XY,  // (x, y): weight dz dr (same measure, both coordinates on the z lattice)
};

/// Complex field on the n_z x n_p lattice. Rows index z, columns index p (or r).
struct Field2D {
    GridSpec grid;
    AxisKind axis = AxisKind::ZP;
    Matrix values;

    Field2D() = default;
    Field2D(const GridSpec& g, AxisKind a) : grid(g), axis(a), values(Matrix::Zero(g.n_z, g.n_p)) {}
    Field2D(const GridSpec& g, AxisKind a, Matrix v) : grid(g), axis(a), values(std::move(v)) {
        if (values.rows() != grid.n_z || values.cols() != grid.n_p)
            throw ConfigError("field shape does not match grid");
    }

    double measure() const {
        return axis == AxisKind::ZP ? grid.dz * grid.dp / kTwoPi : grid.dz * grid.dr;
    }
};

/// Weighted sum with the axis-appropriate measure; the (z,p) measure carries
/// the 1/2pi momentum factor.
inline Complex integrate(const Field2D& f) {
    return f.values.sum() * f.measure();
}

inline double integrate_abs2(const Field2D& f) {
    return f.values.squaredNorm() * f.measure();
}

/// Fraction of |f|^2 in the top quarter of mode space along one axis.
/// Large values signal aliased (non-smooth) content.
inline double spectral_tail_fraction(const Field2D& f, int axis) {
    Matrix work = f.values;
    if (axis == 0) fft::transform_axis0(work, FFTW_FORWARD);
    else fft::transform_axis1(work, FFTW_FORWARD);
    const int n = axis == 0 ? f.grid.n_z : f.grid.n_p;
    double total = 0.0, tail = 0.0;
    for (int j = 0; j < n; ++j) {
        const int m = (j < n / 2) ? j : n - j;  // |mode|
        const double e = (axis == 0 ? work.row(j).squaredNorm() : work.col(j).squaredNorm());
        total += e;
        if (m >= (3 * n) / 8) tail += e;
    }
    return total > 0.0 ? tail / total : 0.0;
}

/// Mass fraction |f|^2 within two cells of the window edges (both axes).
inline double boundary_mass_fraction(const Field2D& f) {
    const auto& v = f.values;
    const int nz = f.grid.n_z, np = f.grid.n_p;
    double edge = 0.0;
    for (int i : {0, 1, nz - 2, nz - 1}) edge += v.row(i).squaredNorm();
    for (int j : {0, 1, np - 2, np - 1}) edge += v.col(j).squaredNorm();
    const double total = v.squaredNorm();
    return total > 0.0 ? edge / total : 0.0;
}

namespace detail {

// Centered one-axis DFT between the p and r lattices.
// p -> r:  g(r_k) = sum_j e^{+i p_j r_k} f(p_j) dp/2pi
// r -> p:  f(p_j) = sum_k e^{-i p_j r_k} g(r_k) dr
// With p_j = (j - n/2) dp, r_k = (k - n/2) dr, dp dr = 2pi/n this reduces to a
// plain DFT conjugated by (-1)^j, (-1)^k twiddles and an i^n corner phase.
inline void centered_p_to_r(Matrix& m, double dp) {
    const int n = static_cast<int>(m.cols());
    for (int j = 1; j < n; j += 2) m.col(j) = -m.col(j);
    fft::transform_axis1(m, FFTW_BACKWARD);  // kernel e^{+2pi i jk/n}
    static const Complex corner[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const Complex scale0 = corner[n % 4] * (dp / kTwoPi);
    for (int k = 0; k < n; ++k) m.col(k) *= (k % 2 == 0 ? scale0 : -scale0);
}

inline void centered_r_to_p(Matrix& m, double dr) {
    const int n = static_cast<int>(m.cols());
    for (int k = 1; k < n; k += 2) m.col(k) = -m.col(k);
    fft::transform_axis1(m, FFTW_FORWARD);  // kernel e^{-2pi i jk/n}
    static const Complex corner[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    const Complex scale0 = corner[n % 4] * dr;
    for (int j = 0; j < n; ++j) m.col(j) *= (j % 2 == 0 ? scale0 : -scale0);
}

} // namespace detail

enum class FourierDirection { PtoR, RtoP };

/// One-axis Fourier transform between the p and r representations with the
/// continuum convention: p->r uses kernel e^{+ipr} and weight dp/2pi, r->p uses
/// e^{-ipr} and weight dr. The two directions are exact inverses.
inline Field2D axis_fourier(const Field2D& f, FourierDirection dir) {
    if (dir == FourierDirection::PtoR && f.axis != AxisKind::ZP)
        throw ConfigError("axis_fourier: p->r requires a (z,p) field");
    if (dir == FourierDirection::RtoP && f.axis == AxisKind::ZP)
        throw ConfigError("axis_fourier: r->p requires a (z,r) field");
    Field2D out(f.grid, dir == FourierDirection::PtoR ? AxisKind::ZR : AxisKind::ZP);
    out.values = f.values;
    if (dir == FourierDirection::PtoR)
        detail::centered_p_to_r(out.values, f.grid.dp);
    else
        detail::centered_r_to_p(out.values, f.grid.dr);
    return out;
}

/// Spectral derivative of given order along axis 0 (z) or 1 (p).
/// The unpaired (most negative) mode is zeroed for odd orders.
/// If tail_fraction is non-null it receives the input's spectral tail fraction
/// along that axis; aliased inputs are flagged, not rejected.
inline Field2D spectral_derivative(const Field2D& f, int axis, int order,
                                   double* tail_fraction = nullptr) {
    if (order < 1) throw ConfigError("spectral_derivative: order must be >= 1");
    if (tail_fraction) *tail_fraction = spectral_tail_fraction(f, axis);
    Field2D out(f.grid, f.axis);
    out.values = f.values;
    if (axis == 0) {
        fft::transform_axis0(out.values, FFTW_FORWARD);
        const int n = f.grid.n_z;
        for (int j = 0; j < n; ++j) {
            const double k = fft::frequency(j, n, f.grid.dz);
            Complex mult = std::pow(Complex(0.0, k), order);
            if (j == n / 2 && order % 2 == 1) mult = 0.0;
            out.values.row(j) *= mult / static_cast<double>(n);
        }
        fft::transform_axis0(out.values, FFTW_BACKWARD);
    } else {
        if (f.axis != AxisKind::ZP)
            throw ConfigError("spectral_derivative: p-axis derivative requires a (z,p) field");
        // d/dp multiplies the r representation by -i r
        Matrix& m = out.values;
        detail::centered_p_to_r(m, f.grid.dp);
        const int n = f.grid.n_p;
        for (int k = 0; k < n; ++k) {
            Complex mult = std::pow(Complex(0.0, -f.grid.r(k)), order);
            if (k == 0 && order % 2 == 1) mult = 0.0;  // unpaired r bin
            m.col(k) *= mult;
        }
        detail::centered_r_to_p(m, f.grid.dr);
    }
    return out;
}

} // namespace phasespace
