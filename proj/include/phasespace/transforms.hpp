#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "phasespace/grid.hpp"
#include "phasespace/states.hpp"

namespace phasespace {

namespace detail {

/// Minimal representative of v in [-n/2, n/2) plus the wrap count q: v = rep + q n.
struct WindowRep {
    int rep;
    int q;
};
inline WindowRep window_rep(int v, int n) {
    int r = (v + n / 2) % n;
    if (r < 0) r += n;
    r -= n / 2;
    return {r, (v - r) / n};
}

/// Trig interpolation of every column at z + dz/2 (periodic, Nyquist zeroed so
/// that real input stays real).
inline Matrix half_shift_axis0(const GridSpec& g, const Matrix& f) {
    Matrix work = f;
    fft::transform_axis0(work, FFTW_FORWARD);
    const int n = g.n_z;
    for (int j = 0; j < n; ++j) {
        if (j == n / 2) {
            work.row(j).setZero();
            continue;
        }
        const double k = fft::frequency(j, n, g.dz);
        work.row(j) *= std::polar(1.0 / n, k * g.dz / 2.0);
    }
    fft::transform_axis0(work, FFTW_BACKWARD);
    return work;
}

/// Integer-exact phase table: phase(j, d) = e^{i p_j d dz} = e^{i pi lambda_j d / n_p},
/// lambda_j = j - n_p/2. Entries tabulated over (lambda_j * d) mod 2 n_p.
class PositionPhaseTable {
public:
    explicit PositionPhaseTable(const GridSpec& g) : n2_(2 * g.n_p), table_(n2_) {
        for (int m = 0; m < n2_; ++m) table_[m] = std::polar(1.0, M_PI * m / g.n_p);
    }
    Complex operator()(int lambda, int d) const {
        long m = (static_cast<long>(lambda) * d) % n2_;
        if (m < 0) m += n2_;
        return table_[static_cast<int>(m)];
    }

private:
    int n2_;
    std::vector<Complex> table_;
};

/// Coarse graining in the native (z,r) representation:
///   rho_hat(i, m) = dr sum_a conj(psi[(i+kap_a) % n_z, k']) psi[(i+kap_{k'}) % n_z, a]
/// with kap_{k'} the window representative of kap_a - kap_m. Exactly reproduces
/// the direct quantum-transform sum after the r -> p transform.
inline Matrix rho_hat_from_position_basis(const GridSpec& g, const Matrix& psi_t) {
    const int nz = g.n_z, np = g.n_p;
    Matrix out = Matrix::Zero(nz, np);
    std::vector<int> kp(np), z_off1(np), z_off2(np);
    for (int m = 0; m < np; ++m) {
        for (int a = 0; a < np; ++a) {
            const int kap_a = a - np / 2;
            const auto wr = window_rep(kap_a - (m - np / 2), np);
            kp[a] = wr.rep + np / 2;
            z_off1[a] = ((kap_a % nz) + nz) % nz;
            z_off2[a] = ((wr.rep % nz) + nz) % nz;
        }
        for (int a = 0; a < np; ++a) {
            const auto col1 = psi_t.col(kp[a]);
            const auto col2 = psi_t.col(a);
            const int o1 = z_off1[a], o2 = z_off2[a];
            for (int i = 0; i < nz; ++i) {
                const int i1 = i + o1 < nz ? i + o1 : i + o1 - nz;
                const int i2 = i + o2 < nz ? i + o2 : i + o2 - nz;
                out(i, m) += std::conj(col1(i1)) * col2(i2);
            }
        }
    }
    out *= g.dr;
    return out;
}

} // namespace detail

/// psi(z,r) = sum_p e^{ipr} psi(z,p) dp/2pi  (partial Fourier transform).
inline PositionBasisWaveFunction partial_fourier(const ClassicalWaveFunction& psi) {
    PositionBasisWaveFunction out{axis_fourier(psi.field, FourierDirection::PtoR)};
    return out;
}

/// Inverse partial Fourier transform. Hermiticity of the input guarantees a real
/// result; violations above tolerance are rejected.
inline ClassicalWaveFunction inverse_partial_fourier(const PositionBasisWaveFunction& psi_t,
                                                     double* residual_imaginary = nullptr) {
    const double viol = psi_t.hermiticity_violation();
    if (viol > 1e-6)
        throw NumericError("inverse_partial_fourier: input not hermitian (violation " +
                           std::to_string(viol) + ")");
    ClassicalWaveFunction out{axis_fourier(psi_t.field, FourierDirection::RtoP)};
    if (residual_imaginary) *residual_imaginary = out.imaginary_fraction();
    out.field.values = out.field.values.real().cast<Complex>();
    return out;
}

/// Coarse graining: rho(x,x') = sum_y psi(x,y) conj(psi(x',y)) dz.
/// Assembled as an exact Gram matrix of the position-basis samples; cells with
/// odd index sums use half-lattice trig interpolation. Hermitian and positive
/// semidefinite by construction; trace renormalized to 1 (factor recorded).
inline DensityMatrix coarse_grain(const PositionBasisWaveFunction& psi_t) {
    const GridSpec& g = psi_t.field.grid;
    const int nz = g.n_z, np = g.n_p;
    // back to (z,p): M is assembled from the p rows (exact finite p sums)
    Matrix psi_zp = axis_fourier(psi_t.field, FourierDirection::RtoP).values;
    Matrix psi_half = detail::half_shift_axis0(g, psi_zp);
    detail::PositionPhaseTable phase(g);
    Matrix M(nz, nz);
    const double wp = g.dp / kTwoPi;
    for (int b = 0; b < nz; ++b) {
        for (int a = 0; a < nz; ++a) {
            const auto wr = detail::window_rep(a - b, nz);
            Complex acc = 0.0;
            int reps = 0;
            for (int dm : {wr.rep, wr.rep + nz}) {
                if (dm == nz / 2 && wr.rep != -nz / 2) break;  // single representative
                const int s = ((2 * a - dm) % (2 * nz) + 2 * nz) % (2 * nz);
                const Matrix& src = (s % 2 == 0) ? psi_zp : psi_half;
                const int row = (s % 2 == 0) ? s / 2 : (s - 1) / 2;
                Complex cell = 0.0;
                for (int j = 0; j < np; ++j) cell += phase(j - np / 2, dm) * src(row, j);
                acc += cell * wp;
                ++reps;
                if (wr.rep != -nz / 2) break;
            }
            M(a, b) = acc / static_cast<double>(reps);
        }
    }
    DensityMatrix rho;
    rho.dz = g.dz;
    rho.z_min = g.z_min;
    rho.matrix = (M * M.adjoint()) * g.dz;
    const double tr = rho.matrix.trace().real() * g.dz;
    if (!(tr > 0.0)) throw NumericError("coarse_grain: zero-trace output");
    rho.matrix /= tr;
    rho.normalization_correction = tr;
    return rho;
}

/// Wigner transform: rho_w(z,p) = sum_r e^{-ipr} rho(z + r/2, z - r/2) dr.
/// Only faithful separations |r| < L_z/2 exist on the position lattice; the
/// cover-redundant bins of wider r windows are read as zero.
inline WignerFunction wigner_of_density(const DensityMatrix& rho) {
    const int nz = rho.size();
    if (nz < 4 || (nz & (nz - 1)) != 0)
        throw ConfigError("wigner_of_density: matrix size must be a power of two");
    // reconstruct the grid: n_p must be supplied by context; use square layout
    // when the caller does not provide one.
    GridSpec g(nz, nz, rho.z_min, nz * rho.dz);
    Field2D gathered(g, AxisKind::ZR);
    for (int k = 0; k < g.n_p; ++k) {
        const int kap = k - g.n_p / 2;
        const auto wr = detail::window_rep(2 * kap, nz);
        if (wr.q != 0 || wr.rep == -nz / 2) continue;  // aliased on the torus
        for (int i = 0; i < nz; ++i)
            gathered.values(i, k) = rho.matrix(g.wrap_z(i + kap), g.wrap_z(i - kap));
    }
    Field2D wig = axis_fourier(gathered, FourierDirection::RtoP);
    wig.values = wig.values.real().cast<Complex>();
    return WignerFunction{std::move(wig)};
}

/// Same Wigner transform onto a caller-chosen (possibly non-square) grid.
inline WignerFunction wigner_of_density(const DensityMatrix& rho, const GridSpec& g) {
    const int nz = rho.size();
    if (g.n_z != nz || std::abs(g.dz - rho.dz) > 1e-14 * std::abs(rho.dz))
        throw ConfigError("wigner_of_density: grid does not match the matrix lattice");
    Field2D gathered(g, AxisKind::ZR);
    for (int k = 0; k < g.n_p; ++k) {
        const int kap = k - g.n_p / 2;
        const auto wr = detail::window_rep(2 * kap, nz);
        if (wr.q != 0 || wr.rep == -nz / 2) continue;
        for (int i = 0; i < nz; ++i)
            gathered.values(i, k) = rho.matrix(g.wrap_z(i + kap), g.wrap_z(i - kap));
    }
    Field2D wig = axis_fourier(gathered, FourierDirection::RtoP);
    wig.values = wig.values.real().cast<Complex>();
    return WignerFunction{std::move(wig)};
}

/// Fast quantum transform: the composition Wigner . coarse-grain . partial-Fourier
/// evaluated in the native (z,r) representation, where it is an exact identity
/// with the direct fourfold sum.
inline WignerFunction quantum_transform(const ClassicalWaveFunction& psi) {
    const GridSpec& g = psi.grid();
    Matrix psi_t = axis_fourier(psi.field, FourierDirection::PtoR).values;
    Field2D rho_hat(g, AxisKind::ZR, detail::rho_hat_from_position_basis(g, psi_t));
    Field2D wig = axis_fourier(rho_hat, FourierDirection::RtoP);
    wig.values = wig.values.real().cast<Complex>();
    return WignerFunction{std::move(wig)};
}

/// Direct evaluation of the fourfold quantum-transform sum with kernel
/// cos(s'r - s r'). The kernel is factored into complex exponentials so each
/// output point costs two n_p x n_p matrix products; no Fourier machinery from
/// the fast path is used. Guarded to n_z * n_p <= 64^2.
inline WignerFunction quantum_transform_direct(const ClassicalWaveFunction& psi) {
    const GridSpec& g = psi.grid();
    if (static_cast<long>(g.n_z) * g.n_p > 64L * 64L)
        throw ConfigError(
            "quantum_transform_direct: grid larger than 64^2; use the fast quantum_transform");
    const int nz = g.n_z, np = g.n_p;
    Matrix kernel(np, np);  // C(a,b) = e^{i 2pi kap_a kap_b / n_p}
    for (int a = 0; a < np; ++a)
        for (int b = 0; b < np; ++b) {
            const long m = (static_cast<long>(a - np / 2) * (b - np / 2)) % np;
            kernel(a, b) = std::polar(1.0, kTwoPi * m / np);
        }
    const Matrix kernel_h = kernel.adjoint();
    RealMatrix psir = psi.field.values.real();
    WignerFunction out{Field2D(g, AxisKind::ZP)};
    Matrix A(np, np);
    for (int i = 0; i < nz; ++i) {
        for (int j = 0; j < np; ++j) {
            for (int l = 0; l < np; ++l) {
                const int col = (j + l - np / 2 + np) % np;
                for (int k = 0; k < np; ++k)
                    A(k, l) = psir(g.wrap_z(i + k - np / 2), col);
            }
            const Matrix T = A * (kernel_h * A);
            out.field.values(i, j) = (kernel.array() * T.array()).sum().real() / (np * np);
        }
    }
    return out;
}

/// Classical wave function of a pure quantum state (reversed partial Fourier):
/// psi_C(z,p) = sum_r e^{-ipr} psi(z + r/2) conj(psi(z - r/2)) dr, renormalized.
inline ClassicalWaveFunction pure_state_embed(const QuantumWaveFunction& psi_q,
                                              const GridSpec& g) {
    if (psi_q.size() != g.n_z)
        throw ConfigError("pure_state_embed: quantum state does not match grid");
    Field2D prod(g, AxisKind::ZR);
    for (int k = 0; k < g.n_p; ++k) {
        const int kap = k - g.n_p / 2;
        // separations that alias on the position torus are dropped, keeping the
        // r window single-cover and the embed normalization exact
        if (detail::window_rep(2 * kap, g.n_z).q != 0) continue;
        for (int i = 0; i < g.n_z; ++i)
            prod.values(i, k) =
                psi_q.values(g.wrap_z(i + kap)) * std::conj(psi_q.values(g.wrap_z(i - kap)));
    }
    ClassicalWaveFunction out{axis_fourier(prod, FourierDirection::RtoP)};
    out.field.values = out.field.values.real().cast<Complex>();
    normalize(out);
    return out;
}

/// Canonical classical preimage of a mixed state: hermitian principal square
/// root sigma of rho (eigenvalues clipped at zero when within tolerance), read
/// back through the inverse partial Fourier transform.
inline ClassicalWaveFunction mixed_state_embed(const DensityMatrix& rho, const GridSpec& g,
                                               double clip_tol = 1e-8) {
    if (rho.size() != g.n_z) throw ConfigError("mixed_state_embed: size mismatch");
    Matrix A = 0.5 * (rho.matrix + rho.matrix.adjoint()) * rho.dz;  // unit-trace form
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    if (es.info() != Eigen::Success) throw NumericError("mixed_state_embed: eigensolver failed");
    RealVector lam = es.eigenvalues();
    for (int i = 0; i < lam.size(); ++i) {
        if (lam(i) < -clip_tol)
            throw NumericError("mixed_state_embed: density matrix not positive (eigenvalue " +
                               std::to_string(lam(i)) + ")");
        lam(i) = std::sqrt(std::max(lam(i), 0.0));
    }
    Matrix sigma = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
    sigma /= rho.dz;  // back to function normalization: rho(x,y) = sum_v sigma sigma dz
    // gather sigma into the (z,r) representation
    Field2D psi_t(g, AxisKind::ZR);
    for (int k = 0; k < g.n_p; ++k) {
        const int kap = k - g.n_p / 2;
        const auto wr = detail::window_rep(2 * kap, g.n_z);
        if (wr.q != 0 || wr.rep == -g.n_z / 2) continue;
        for (int i = 0; i < g.n_z; ++i)
            psi_t.values(i, k) = sigma(g.wrap_z(i + kap), g.wrap_z(i - kap));
    }
    PositionBasisWaveFunction pb{std::move(psi_t)};
    ClassicalWaveFunction out = inverse_partial_fourier(pb);
    normalize(out);
    return out;
}

/// Alternative coarse graining (momentum trace): rho~(z,z') = sum_p psi(z,p)
/// conj(psi(z',p)) dp/2pi. Hermitian, unit trace; differs from coarse_grain.
inline DensityMatrix momentum_trace_coarse_grain(const ClassicalWaveFunction& psi) {
    const GridSpec& g = psi.grid();
    DensityMatrix rho;
    rho.dz = g.dz;
    rho.z_min = g.z_min;
    rho.matrix = (psi.field.values * psi.field.values.adjoint()) * (g.dp / kTwoPi);
    const double tr = rho.matrix.trace().real() * g.dz;
    if (!(tr > 0.0)) throw NumericError("momentum_trace_coarse_grain: zero trace");
    rho.matrix /= tr;
    rho.normalization_correction = tr;
    return rho;
}

/// Largest-eigenvalue state of a density matrix, unit grid norm.
inline QuantumWaveFunction dominant_eigenstate(const DensityMatrix& rho) {
    Matrix A = 0.5 * (rho.matrix + rho.matrix.adjoint()) * rho.dz;
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    if (es.info() != Eigen::Success) throw NumericError("dominant_eigenstate: eigensolver failed");
    QuantumWaveFunction psi;
    psi.dz = rho.dz;
    psi.z_min = rho.z_min;
    psi.values = es.eigenvectors().col(rho.size() - 1) / std::sqrt(rho.dz);
    return psi;
}

} // namespace phasespace
