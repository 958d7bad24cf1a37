#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "phasespace/evolution.hpp"
#include "phasespace/grid.hpp"
#include "phasespace/states.hpp"
#include "phasespace/transforms.hpp"

namespace phasespace {

/// Polynomial in formal position/momentum symbols, total degree capped at 4
/// (grid-resolution honesty bound). Quantum evaluation is always fully
/// symmetrized, which is automatic when pairing with the Wigner function.
struct MomentPolynomial {
    struct Term {
        int deg_z = 0;
        int deg_p = 0;
        double coeff = 1.0;
    };
    std::vector<Term> terms;

    static MomentPolynomial monomial(int dz_, int dp_, double c = 1.0) {
        MomentPolynomial f;
        f.terms.push_back({dz_, dp_, c});
        f.validate();
        return f;
    }
    void validate() const {
        for (const auto& t : terms) {
            if (t.deg_z < 0 || t.deg_p < 0 || t.deg_z + t.deg_p > 4)
                throw ConfigError("moment polynomial: total degree must be <= 4");
        }
    }
    double eval(double z, double p) const {
        double s = 0.0;
        for (const auto& t : terms)
            s += t.coeff * std::pow(z, t.deg_z) * std::pow(p, t.deg_p);
        return s;
    }
};

namespace detail {

inline double phase_space_moment(const Field2D& f, const MomentPolynomial& F) {
    F.validate();
    const GridSpec& g = f.grid;
    double acc = 0.0;
    for (int j = 0; j < g.n_p; ++j) {
        const double p = g.p(j);
        for (int i = 0; i < g.n_z; ++i)
            acc += F.eval(g.z(i), p) * f.values(i, j).real();
    }
    return acc * f.measure();
}

} // namespace detail

/// <F(X_cl, P_cl)> = integral F(z,p) w(z,p).
inline double classical_expectation(const Field2D& w, const MomentPolynomial& F) {
    if (w.axis != AxisKind::ZP) throw ConfigError("classical_expectation: (z,p) field required");
    return detail::phase_space_moment(w, F);
}

inline double classical_expectation(const ClassicalWaveFunction& psi, const MomentPolynomial& F) {
    return detail::phase_space_moment(density_from_wavefunction(psi), F);
}

/// Derivative-operator ("roughness") observables of the classical wave function.
struct StatisticalMoments {
    double p2 = 0.0;  // <P_s^2> = integral (dz psi)^2
    double x2 = 0.0;  // <X_s^2> = integral (dp psi)^2
    double p1 = 0.0;  // <P_s>, vanishes without boundary terms
    double x1 = 0.0;  // <X_s>
};

inline StatisticalMoments statistical_moments(const ClassicalWaveFunction& psi) {
    Field2D dz_psi = spectral_derivative(psi.field, 0, 1);
    Field2D dp_psi = spectral_derivative(psi.field, 1, 1);
    StatisticalMoments m;
    const double w = psi.field.measure();
    m.p2 = dz_psi.values.real().cwiseAbs2().sum() * w;
    m.x2 = dp_psi.values.real().cwiseAbs2().sum() * w;
    // <P_s> = -i integral psi dz psi ; real part vanishes identically, report the
    // full magnitude as the boundary-term residual
    const Complex p1 = (psi.field.values.conjugate().array() * dz_psi.values.array()).sum() * w;
    const Complex x1 = (psi.field.values.conjugate().array() * dp_psi.values.array()).sum() * w;
    m.p1 = std::abs(Complex(0.0, -1.0) * p1);
    m.x1 = std::abs(Complex(0.0, 1.0) * x1);
    return m;
}

/// <F_s(X_Q, P_Q)> = integral F(z,p) rho_w(z,p): symmetrized quantum moments.
inline double quantum_expectation(const WignerFunction& rho_w, const MomentPolynomial& F) {
    return detail::phase_space_moment(rho_w.field, F);
}

/// Both sides of <P_Q^2> = <p^2>_cl + <P_s^2>/4, evaluated independently.
struct DispersionIdentity {
    double p2_quantum = 0.0;   // Wigner-side second moment
    double p2_classical = 0.0; // classical second moment of w
    double p2_statistical = 0.0; // <P_s^2>
    double residual = 0.0;
};

inline DispersionIdentity momentum_dispersion_identity(const ClassicalWaveFunction& psi) {
    DispersionIdentity d;
    WignerFunction rho_w = quantum_transform(psi);
    const MomentPolynomial p2 = MomentPolynomial::monomial(0, 2);
    d.p2_quantum = quantum_expectation(rho_w, p2);
    d.p2_classical = classical_expectation(psi, p2);
    d.p2_statistical = statistical_moments(psi).p2;
    d.residual = std::abs(d.p2_quantum - d.p2_classical - 0.25 * d.p2_statistical);
    return d;
}

/// w_Q(x) = rho(x,x).
inline RealVector position_distribution(const DensityMatrix& rho) {
    return rho.matrix.diagonal().real();
}

/// Momentum probabilities on the lattice dual to x: k_m = 2 pi m / L, m in
/// [-n/2, n/2), bin weight dk/2pi = 1/L.
struct MomentumDistribution {
    RealVector values;  // w_Q(k_m), ascending in m
    double dk = 0.0;
    double k(int idx) const { return (idx - values.size() / 2) * dk; }
    double sum() const { return values.sum() * dk / kTwoPi; }
};

inline MomentumDistribution momentum_distribution(const DensityMatrix& rho) {
    const int n = rho.size();
    const double L = n * rho.dz;
    // rho~(k,k) = sum_{x,x'} e^{-ikx} rho(x,x') e^{ikx'} dz^2
    Matrix work = rho.matrix;
    fft::transform_axis0(work, FFTW_FORWARD);   // sum_x e^{-i 2pi m x /...} over rows
    fft::transform_axis1(work, FFTW_BACKWARD);  // sum_x' e^{+...} over cols
    MomentumDistribution out;
    out.dk = kTwoPi / L;
    out.values.resize(n);
    for (int idx = 0; idx < n; ++idx) {
        const int m = idx - n / 2;
        const int bin = (m % n + n) % n;
        out.values(idx) = work(bin, bin).real() * rho.dz * rho.dz;
    }
    return out;
}

/// Classical marginals of w: w_C(x) = sum_p w dp/2pi, w_C(p) = sum_z w dz.
struct ClassicalMarginals {
    RealVector position;  // over the z lattice
    RealVector momentum;  // over the p lattice
};

inline ClassicalMarginals classical_marginals(const Field2D& w) {
    if (w.axis != AxisKind::ZP) throw ConfigError("classical_marginals: (z,p) field required");
    ClassicalMarginals m;
    m.position = w.values.real().rowwise().sum() * (w.grid.dp / kTwoPi);
    m.momentum = w.values.real().colwise().sum().transpose() * w.grid.dz;
    return m;
}

/// Conditional (measurement) correlation <P_Q X_Q>_m = integral z p rho_w(z,p),
/// equal to the symmetrized operator expectation 1/2 <{P,X}>.
inline double measurement_correlation(const WignerFunction& rho_w) {
    MomentPolynomial zp = MomentPolynomial::monomial(1, 1);
    return quantum_expectation(rho_w, zp);
}

// ---- operator-side evaluation (dense, used by the trace oracles) ----

inline Matrix position_operator(int n, double dz, double z_min) {
    Matrix x = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) x(i, i) = z_min + i * dz;
    return x;
}

/// Dense spectral momentum operator -i d/dx on the periodic lattice.
inline Matrix momentum_operator(int n, double dz) {
    Matrix p = Matrix::Zero(n, n);
    // apply -i d/dx to each basis column via the FFT
    Matrix id = Matrix::Identity(n, n);
    fft::transform_axis0(id, FFTW_FORWARD);
    for (int m = 0; m < n; ++m) {
        double k = fft::frequency(m, n, dz);
        if (m == n / 2) k = 0.0;  // unpaired mode, hermiticity
        id.row(m) *= k / n;
    }
    fft::transform_axis0(id, FFTW_BACKWARD);
    return id;
}

/// Weyl (fully symmetrized) operator for z^a p^b: average over all distinct
/// orderings of the a+b factor product.
inline Matrix weyl_symmetrized_operator(int deg_z, int deg_p, const Matrix& X, const Matrix& P) {
    const int n = static_cast<int>(X.rows());
    std::vector<int> word(deg_z + deg_p, 0);
    for (int i = 0; i < deg_p; ++i) word[i] = 1;  // 0 = X, 1 = P
    std::sort(word.begin(), word.end());
    Matrix acc = Matrix::Zero(n, n);
    long count = 0;
    do {
        Matrix prod = Matrix::Identity(n, n);
        for (int s : word) prod = prod * (s == 0 ? X : P);
        acc += prod;
        ++count;
    } while (std::next_permutation(word.begin(), word.end()));
    return acc / static_cast<double>(count);
}

/// tr(op rho) dz — the operator-side expectation value.
inline Complex operator_expectation(const DensityMatrix& rho, const Matrix& op) {
    return (op * rho.matrix).trace() * rho.dz;
}

inline Complex operator_expectation(const DensityMatrix& rho, const MomentPolynomial& F) {
    const int n = rho.size();
    const Matrix X = position_operator(n, rho.dz, rho.z_min);
    const Matrix P = momentum_operator(n, rho.dz);
    Matrix op = Matrix::Zero(n, n);
    for (const auto& t : F.terms)
        op += t.coeff * weyl_symmetrized_operator(t.deg_z, t.deg_p, X, P);
    return operator_expectation(rho, op);
}

/// tr(H_Q rho): kinetic from the momentum-basis diagonal, potential from the
/// position diagonal.
inline double energy(const DensityMatrix& rho, const PotentialSpec& V) {
    MomentumDistribution wp = momentum_distribution(rho);
    double kin = 0.0;
    for (int idx = 0; idx < wp.values.size(); ++idx) {
        const double k = wp.k(idx);
        kin += 0.5 * k * k / V.mass * wp.values(idx);
    }
    kin *= wp.dk / kTwoPi;
    double pot = 0.0;
    GridSpec g(rho.size(), rho.size(), rho.z_min, rho.size() * rho.dz);
    RealVector v = V.values_on(g);
    RealVector wx = position_distribution(rho);
    for (int i = 0; i < rho.size(); ++i) pot += v(i) * wx(i);
    pot *= rho.dz;
    return kin + pot;
}

inline double energy(const QuantumWaveFunction& psi, const PotentialSpec& V) {
    const int n = psi.size();
    Vector work = psi.values;
    fft::transform(work, FFTW_FORWARD);
    double kin = 0.0;
    for (int m = 0; m < n; ++m) {
        const double k = fft::frequency(m, n, psi.dz);
        kin += 0.5 * k * k / V.mass * std::norm(work(m));
    }
    kin *= psi.dz / n;  // Parseval: sum |psi_hat|^2 / n = sum |psi|^2
    GridSpec g(n, n, psi.z_min, n * psi.dz);
    RealVector v = V.values_on(g);
    double pot = 0.0;
    for (int i = 0; i < n; ++i) pot += v(i) * std::norm(psi.values(i));
    pot *= psi.dz;
    return kin + pot;
}

/// Interpolated-observable position distribution (beta in [0, pi/2]):
/// p(x) = sum_r |psi(x + r sin^2(beta)/2)|^2 |psi(x - r (1 + cos^2 beta)/2)|^2 dr,
/// normalized. |psi|^2 is sampled with periodic linear interpolation.
inline RealVector sharpened_position_distribution(const QuantumWaveFunction& psi_q, double beta,
                                                  const GridSpec& g) {
    if (beta < -1e-12 || beta > M_PI / 2 + 1e-12)
        throw ConfigError("sharpened_position_distribution: beta must be in [0, pi/2]");
    if (psi_q.size() != g.n_z)
        throw ConfigError("sharpened_position_distribution: state does not match grid");
    const int n = g.n_z;
    RealVector q(n);
    for (int i = 0; i < n; ++i) q(i) = std::norm(psi_q.values(i));
    const double s2 = std::sin(beta) * std::sin(beta);
    const double c2p1 = 1.0 + std::cos(beta) * std::cos(beta);
    auto q_at = [&](double x) {
        double t = (x - g.z_min) / g.dz;
        t -= std::floor(t / n) * n;
        const int i0 = static_cast<int>(std::floor(t)) % n;
        const double fr = t - std::floor(t);
        return q(i0) * (1.0 - fr) + q((i0 + 1) % n) * fr;
    };
    RealVector out = RealVector::Zero(n);
    for (int k = 0; k < g.n_p; ++k) {
        const int kap = k - g.n_p / 2;
        const int rep = (((2 * kap + n / 2) % n) + n) % n - n / 2;
        if (2 * kap != rep) continue;  // keep the r sum single-cover on the torus
        const double r = g.r(k);
        for (int i = 0; i < n; ++i) {
            const double x = g.z(i);
            out(i) += q_at(x + 0.5 * r * s2) * q_at(x - 0.5 * r * c2p1);
        }
    }
    const double total = out.sum() * g.dz;
    if (!(total > 0.0)) throw NumericError("sharpened_position_distribution: zero mass");
    return out / total;
}

} // namespace phasespace
