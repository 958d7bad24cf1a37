#include <catch2/catch_amalgamated.hpp>

#include "phasespace/observables.hpp"
#include "phasespace/oracles.hpp"
#include "phasespace/transforms.hpp"

using namespace phasespace;

namespace {
const GridSpec kGrid(256, 256, -16.0, 32.0);
}

TEST_CASE("classical expectation: Gaussian variance, normalization, factorized moments") {
    const double x0 = 0.4, p0 = -0.6, dx = 0.8, dp = 0.7;
    ClassicalWaveFunction psi = gaussian_packet(kGrid, x0, p0, dx, dp);
    Field2D w = density_from_wavefunction(psi);
    const double z1 = classical_expectation(w, MomentPolynomial::monomial(1, 0));
    const double z2 = classical_expectation(w, MomentPolynomial::monomial(2, 0));
    CHECK(z2 - z1 * z1 == Catch::Approx(dx * dx).margin(1e-8));
    MomentPolynomial one;
    one.terms.push_back({0, 0, 1.0});
    CHECK(classical_expectation(w, one) == Catch::Approx(1.0).margin(1e-12));
    const double zp = classical_expectation(w, MomentPolynomial::monomial(1, 1));
    CHECK(zp == Catch::Approx(x0 * p0).margin(1e-8));
    CHECK_THROWS_AS(MomentPolynomial::monomial(3, 2), ConfigError);
}

TEST_CASE("statistical moments of the Gaussian packet") {
    const double dx = 0.5;
    ClassicalWaveFunction psi = gaussian_packet(kGrid, 0.0, 0.0, dx, 0.5);
    StatisticalMoments m = statistical_moments(psi);
    // integral (dz psi)^2 = 1/(4 dx^2) for the Gaussian root
    CHECK(m.p2 == Catch::Approx(1.0 / (4.0 * dx * dx)).margin(1e-6));
    CHECK(m.p1 < 1e-10);
    CHECK(m.x1 < 1e-10);
}

TEST_CASE("statistical momentum roughness vanishes for z-independent states") {
    GridSpec g(64, 64, -10.0, 20.0);
    ClassicalWaveFunction psi{Field2D(g, AxisKind::ZP)};
    for (int j = 0; j < g.n_p; ++j)
        psi.field.values.col(j).setConstant(std::exp(-0.5 * g.p(j) * g.p(j)));
    normalize(psi);
    StatisticalMoments m = statistical_moments(psi);
    CHECK(m.p2 < 1e-12);
    CHECK(m.x2 > 0.0);
}

TEST_CASE("first statistical moments vanish on random smooth states") {
    GridSpec g(64, 64, -10.0, 20.0);
    for (unsigned seed : {11u, 12u}) {
        ClassicalWaveFunction psi = oracles::random_smooth_state(g, seed);
        StatisticalMoments m = statistical_moments(psi);
        CHECK(m.p1 < 1e-10);
        CHECK(m.x1 < 1e-10);
    }
}

TEST_CASE("quantum expectation: width law and first-moment agreement") {
    ClassicalWaveFunction psi = gaussian_packet(kGrid, 0.3, -0.4, 0.5, 0.5);
    WignerFunction wf = quantum_transform(psi);
    Field2D w = density_from_wavefunction(psi);
    const double xq = quantum_expectation(wf, MomentPolynomial::monomial(1, 0));
    const double pq = quantum_expectation(wf, MomentPolynomial::monomial(0, 1));
    CHECK(xq == Catch::Approx(classical_expectation(w, MomentPolynomial::monomial(1, 0)))
                    .margin(1e-8));
    CHECK(pq == Catch::Approx(classical_expectation(w, MomentPolynomial::monomial(0, 1)))
                    .margin(1e-8));
    const double x2q = quantum_expectation(wf, MomentPolynomial::monomial(2, 0));
    CHECK(x2q - xq * xq == Catch::Approx(0.5).margin(1e-7));  // 0.25 (1 + 1/(16 * 0.0625))
}

TEST_CASE("quantum expectation: first excited oscillator state has <X^2> = 3/2") {
    GridSpec g(128, 128, -12.0, 24.0);
    QuantumWaveFunction e1 = harmonic_eigenstate(g, 1, 1.0, 1.0);
    WignerFunction wf = quantum_transform(pure_state_embed(e1, g));
    CHECK(quantum_expectation(wf, MomentPolynomial::monomial(2, 0)) ==
          Catch::Approx(1.5).margin(1e-6));
    // operator-algebra oracle: <n|x^2|n> = n + 1/2 for m = omega = 1
    DensityMatrix rho;
    rho.dz = g.dz;
    rho.z_min = g.z_min;
    rho.matrix = e1.values * e1.values.adjoint();
    CHECK(operator_expectation(rho, MomentPolynomial::monomial(2, 0)).real() ==
          Catch::Approx(1.5).margin(1e-8));
}

TEST_CASE("momentum dispersion identity on Gaussian, eigenstate and random states") {
    {
        ClassicalWaveFunction psi = gaussian_packet(kGrid, 0.0, 0.0, 0.5, 0.5);
        DispersionIdentity d = momentum_dispersion_identity(psi);
        CHECK(d.p2_quantum == Catch::Approx(0.5).margin(1e-7));
        CHECK(d.p2_classical == Catch::Approx(0.25).margin(1e-7));
        CHECK(d.residual < 1e-8);
    }
    {
        GridSpec g(128, 128, -12.0, 24.0);
        ClassicalWaveFunction psi = pure_state_embed(harmonic_eigenstate(g, 2, 1.0, 1.0), g);
        CHECK(momentum_dispersion_identity(psi).residual < 1e-8);
    }
    {
        GridSpec g(64, 64, -10.0, 20.0);
        ClassicalWaveFunction psi = oracles::random_smooth_state(g, 9);
        CHECK(momentum_dispersion_identity(psi).residual < 1e-8);
    }
}

TEST_CASE("p-sharp but z-dependent states carry quantum momentum dispersion") {
    GridSpec g(256, 256, -16.0, 32.0);
    // narrow in p, structured in z
    ClassicalWaveFunction psi = gaussian_packet(g, 0.0, 0.0, 0.45, 0.35);
    DispersionIdentity d = momentum_dispersion_identity(psi);
    CHECK(d.p2_quantum > d.p2_classical + 1e-3);
    CHECK(0.25 * d.p2_statistical > 1e-3);
}

TEST_CASE("z-independent density has no quantum momentum dispersion") {
    GridSpec g(64, 64, -10.0, 20.0);
    ClassicalWaveFunction psi{Field2D(g, AxisKind::ZP)};
    for (int j = 0; j < g.n_p; ++j)
        psi.field.values.col(j).setConstant(std::exp(-0.5 * g.p(j) * g.p(j)));
    normalize(psi);
    DispersionIdentity d = momentum_dispersion_identity(psi);
    CHECK(d.residual < 1e-10);
    CHECK(0.25 * d.p2_statistical < 1e-10);
}

TEST_CASE("energy of oscillator eigenstates") {
    PotentialSpec V;
    V.kind = PotentialKind::Harmonic;
    V.c = 1.0;
    GridSpec g(128, 128, -12.0, 24.0);
    for (int n : {0, 2}) {
        QuantumWaveFunction psi = harmonic_eigenstate(g, n, 1.0, 1.0);
        DensityMatrix rho;
        rho.dz = g.dz;
        rho.z_min = g.z_min;
        rho.matrix = psi.values * psi.values.adjoint();
        CHECK(energy(rho, V) == Catch::Approx(n + 0.5).margin(1e-6));
    }
}

TEST_CASE("free-particle energy is the kinetic Gaussian moment") {
    PotentialSpec V;  // free
    GridSpec g(256, 256, -16.0, 32.0);
    const double dx = 0.5, dp = 0.5, p0 = 0.8;
    ClassicalWaveFunction psi = gaussian_packet(g, 0.0, p0, dx, dp);
    DensityMatrix rho = coarse_grain(partial_fourier(psi));
    const double expect = (p0 * p0 + oracles::quantum_width_sq(dp, dx)) / 2.0;
    CHECK(energy(rho, V) == Catch::Approx(expect).margin(1e-6));
}

TEST_CASE("marginals are normalized and consistent") {
    GridSpec g(128, 128, -12.0, 24.0);
    ClassicalWaveFunction psi = gaussian_packet(g, 0.3, -0.2, 0.8, 0.6);
    Field2D w = density_from_wavefunction(psi);
    ClassicalMarginals cm = classical_marginals(w);
    CHECK(cm.position.sum() * g.dz == Catch::Approx(1.0).margin(1e-10));
    CHECK(cm.momentum.sum() * g.dp / kTwoPi == Catch::Approx(1.0).margin(1e-10));
    DensityMatrix rho = coarse_grain(partial_fourier(psi));
    RealVector wx = position_distribution(rho);
    CHECK(wx.minCoeff() > -1e-10);
    CHECK(wx.sum() * g.dz == Catch::Approx(1.0).margin(1e-10));
    MomentumDistribution wp = momentum_distribution(rho);
    CHECK(wp.values.minCoeff() > -1e-10);
    CHECK(wp.sum() == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("momentum marginal widths: classical vs quantum") {
    const double dx = 0.5, dp = 0.5;
    ClassicalWaveFunction psi = gaussian_packet(kGrid, 0.0, 0.0, dx, dp);
    ClassicalMarginals cm = classical_marginals(density_from_wavefunction(psi));
    double v_cl = 0.0;
    for (int j = 0; j < kGrid.n_p; ++j) v_cl += kGrid.p(j) * kGrid.p(j) * cm.momentum(j);
    v_cl *= kGrid.dp / kTwoPi;
    CHECK(v_cl == Catch::Approx(dp * dp).margin(1e-6));
    DensityMatrix rho = coarse_grain(partial_fourier(psi));
    MomentumDistribution wp = momentum_distribution(rho);
    double v_q = 0.0;
    for (int idx = 0; idx < wp.values.size(); ++idx)
        v_q += wp.k(idx) * wp.k(idx) * wp.values(idx);
    v_q *= wp.dk / kTwoPi;
    CHECK(v_q == Catch::Approx(oracles::quantum_width_sq(dp, dx)).margin(1e-6));
}

TEST_CASE("measurement correlation: factorized packet gives x0 p0") {
    ClassicalWaveFunction psi = gaussian_packet(kGrid, 0.7, -0.5, 0.5, 0.5);
    WignerFunction wf = quantum_transform(psi);
    CHECK(measurement_correlation(wf) == Catch::Approx(0.7 * -0.5).margin(1e-8));
}

TEST_CASE("measurement correlation agrees with the operator trace on evolved states") {
    GridSpec g(128, 128, -12.0, 24.0);
    PotentialSpec V;
    V.kind = PotentialKind::Harmonic;
    V.c = 1.0;
    ClassicalWaveFunction psi = gaussian_packet(g, 1.0, 0.0, 0.6, 0.6);
    Propagator prop(g, V, EvolutionLaw::HW, 1e-3);
    prop.advance(psi, 600);  // partway through the period: correlated state
    WignerFunction wf = quantum_transform(psi);
    DensityMatrix rho = coarse_grain(partial_fourier(psi));
    const double wigner_side = measurement_correlation(wf);
    const double op_side = operator_expectation(rho, MomentPolynomial::monomial(1, 1)).real();
    CHECK(std::abs(wigner_side) > 0.05);  // genuinely nonzero correlation
    CHECK(wigner_side == Catch::Approx(op_side).margin(1e-8));
}

TEST_CASE("measurement correlation on random pure states matches the operator form") {
    GridSpec g(64, 64, -10.0, 20.0);
    for (unsigned seed : {21u, 22u, 23u}) {
        // random pure state: random smooth quantum wave function
        ClassicalWaveFunction base = oracles::random_smooth_state(g, seed);
        DensityMatrix rho0 = coarse_grain(partial_fourier(base));
        QuantumWaveFunction psi_q = dominant_eigenstate(rho0);
        ClassicalWaveFunction pure = pure_state_embed(psi_q, g);
        WignerFunction wf = quantum_transform(pure);
        DensityMatrix rho = coarse_grain(partial_fourier(pure));
        CHECK(measurement_correlation(wf) ==
              Catch::Approx(operator_expectation(rho, MomentPolynomial::monomial(1, 1)).real())
                  .margin(1e-8));
    }
}

TEST_CASE("commutation witness: tr(rho [X,P]) = i on smooth pure states") {
    GridSpec g(128, 128, -12.0, 24.0);
    QuantumWaveFunction psi_q = harmonic_eigenstate(g, 1, 1.0, 1.0);
    DensityMatrix rho;
    rho.dz = g.dz;
    rho.z_min = g.z_min;
    rho.matrix = psi_q.values * psi_q.values.adjoint();
    const Matrix X = position_operator(g.n_z, g.dz, g.z_min);
    const Matrix P = momentum_operator(g.n_z, g.dz);
    const Complex witness = ((X * P - P * X) * rho.matrix).trace() * g.dz;
    // discrete-grid caveat: the commutator is i only on well-resolved states
    CHECK(std::abs(witness - Complex(0.0, 1.0)) < 1e-8);
}

TEST_CASE("uncertainty floor across a width sweep, minimum at s = 1/4") {
    const GridSpec sweep_grid(512, 512, -20.0, 40.0);
    for (double s : {1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2, 1.0}) {
        const double d = std::sqrt(s);
        ClassicalWaveFunction psi = gaussian_packet(sweep_grid, 0.0, 0.0, d, d);
        WignerFunction wf = quantum_transform(psi);
        const double x2 = quantum_expectation(wf, MomentPolynomial::monomial(2, 0));
        const double p2 = quantum_expectation(wf, MomentPolynomial::monomial(0, 2));
        const double prod = std::sqrt(x2 * p2);
        CHECK(prod == Catch::Approx(s + 1.0 / (16.0 * s)).epsilon(1e-5));
        CHECK(prod >= 0.5 * (1.0 - 1e-6));
    }
}

TEST_CASE("Wigner and operator-side expectations agree for degree <= 2 polynomials") {
    GridSpec g(64, 64, -10.0, 20.0);
    ClassicalWaveFunction psi = oracles::random_smooth_state(g, 33);
    WignerFunction wf = quantum_transform(psi);
    DensityMatrix rho = coarse_grain(partial_fourier(psi));
    for (auto [a, b] : std::vector<std::pair<int, int>>{
             {1, 0}, {0, 1}, {2, 0}, {0, 2}, {1, 1}}) {
        const MomentPolynomial F = MomentPolynomial::monomial(a, b);
        CHECK(quantum_expectation(wf, F) ==
              Catch::Approx(operator_expectation(rho, F).real()).margin(1e-8));
    }
}

TEST_CASE("sharpened distribution endpoints") {
    GridSpec g(512, 512, -24.0, 48.0);
    // interference state: Gaussian envelope times cos(k0 x)
    const double sigma = 1.2, k0 = 1.5;
    QuantumWaveFunction psi;
    psi.dz = g.dz;
    psi.z_min = g.z_min;
    psi.values.resize(g.n_z);
    for (int i = 0; i < g.n_z; ++i) {
        const double x = g.z(i);
        psi.values(i) = std::exp(-x * x / (4 * sigma * sigma)) * std::cos(k0 * x);
    }
    psi.values /= std::sqrt(psi.norm());
    RealVector q(g.n_z);
    for (int i = 0; i < g.n_z; ++i) q(i) = std::norm(psi.values(i));
    q /= q.sum() * g.dz;

    RealVector p0 = sharpened_position_distribution(psi, 0.0, g);
    CHECK((p0 - q).cwiseAbs().maxCoeff() < 1e-8);

    RealVector pc = sharpened_position_distribution(psi, M_PI / 2, g);
    RealVector y16 = oracles::position_marginal_convolution(psi, g);
    y16 /= y16.sum() * g.dz;
    CHECK((pc - y16).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("fringe visibility decreases monotonically with beta") {
    GridSpec g(512, 512, -24.0, 48.0);
    const double sigma = 1.2, k0 = 1.5;
    QuantumWaveFunction psi;
    psi.dz = g.dz;
    psi.z_min = g.z_min;
    psi.values.resize(g.n_z);
    for (int i = 0; i < g.n_z; ++i) {
        const double x = g.z(i);
        psi.values(i) = std::exp(-x * x / (4 * sigma * sigma)) * std::cos(k0 * x);
    }
    psi.values /= std::sqrt(psi.norm());
    // fringe maximum at x = 0, first minimum at x = pi/(2 k0)
    int i_max = 0, i_min = 0;
    double best = 1e9;
    for (int i = 0; i < g.n_z; ++i) {
        if (std::abs(g.z(i)) < 1e-12) i_max = i;
        if (std::abs(g.z(i) - M_PI / (2 * k0)) < best) {
            best = std::abs(g.z(i) - M_PI / (2 * k0));
            i_min = i;
        }
    }
    std::vector<double> vis;
    for (double beta : {0.0, M_PI / 8, M_PI / 4, 3 * M_PI / 8, M_PI / 2}) {
        RealVector p = sharpened_position_distribution(psi, beta, g);
        vis.push_back((p(i_max) - p(i_min)) / (p(i_max) + p(i_min)));
    }
    for (size_t i = 0; i + 1 < vis.size(); ++i) CHECK(vis[i] >= vis[i + 1] - 1e-9);
    CHECK(vis.front() > 0.99);
    CHECK(vis.back() < 0.5);
}
