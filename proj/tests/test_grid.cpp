#include <catch2/catch_amalgamated.hpp>

#include "phasespace/grid.hpp"
#include "phasespace/oracles.hpp"
#include "phasespace/states.hpp"

using namespace phasespace;

TEST_CASE("grid invariants") {
    GridSpec g(64, 32, -8.0, 16.0);
    CHECK(g.dr == 2.0 * g.dz);
    CHECK(g.dp * g.dr * g.n_p == Catch::Approx(kTwoPi).epsilon(1e-15));
    CHECK(g.p(g.n_p / 2) == 0.0);
    CHECK(g.r(g.n_p / 2) == 0.0);
    CHECK_THROWS_AS(GridSpec(100, 64, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(GridSpec(64, 48, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(GridSpec(64, 64, 0.0, -1.0), ConfigError);
}

TEST_CASE("integrate: constant field carries the (z,p) measure") {
    GridSpec g(16, 32, -4.0, 8.0);
    Field2D f(g, AxisKind::ZP);
    f.values.setConstant(1.0);
    const double expected = g.length_z * g.n_p * g.dp / kTwoPi;
    CHECK(integrate(f).real() == Catch::Approx(expected).epsilon(1e-14));
    // (z,r) measure has no 2pi
    Field2D fr(g, AxisKind::ZR);
    fr.values.setConstant(1.0);
    CHECK(integrate(fr).real() ==
          Catch::Approx(g.length_z * g.n_p * g.dr).epsilon(1e-14));
}

TEST_CASE("integrate: normalized Gaussian density") {
    GridSpec g(256, 256, -16.0, 32.0);
    ClassicalWaveFunction psi = gaussian_packet(g, 0.0, 0.0, 0.7, 0.6);
    Field2D w = density_from_wavefunction(psi);
    CHECK(std::abs(integrate(w).real() - 1.0) < 1e-10);
}

TEST_CASE("integrate: odd function vanishes") {
    GridSpec g(64, 64, -8.0, 16.0);
    Field2D f(g, AxisKind::ZP);
    for (int j = 0; j < g.n_p; ++j)
        for (int i = 0; i < g.n_z; ++i) {
            const double z = g.z(i), p = g.p(j);
            f.values(i, j) = p * std::exp(-z * z - p * p);
        }
    CHECK(std::abs(integrate(f).real()) < 1e-12);
}

TEST_CASE("spectral derivative: trig eigenfunction and constants") {
    GridSpec g(64, 16, -4.0, 8.0);
    Field2D f(g, AxisKind::ZP);
    const double k = kTwoPi / g.length_z;
    for (int j = 0; j < g.n_p; ++j)
        for (int i = 0; i < g.n_z; ++i) f.values(i, j) = std::sin(k * g.z(i));
    Field2D d = spectral_derivative(f, 0, 1);
    for (int i = 0; i < g.n_z; ++i)
        CHECK(d.values(i, 3).real() == Catch::Approx(k * std::cos(k * g.z(i))).margin(1e-10));

    Field2D c(g, AxisKind::ZP);
    c.values.setConstant(2.5);
    for (int order : {1, 2, 3}) {
        Field2D dc = spectral_derivative(c, 0, order);
        CHECK(dc.values.cwiseAbs().maxCoeff() < 1e-12);
        Field2D dp_ = spectral_derivative(c, 1, order);
        CHECK(dp_.values.cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("spectral derivative agrees with finite differences on a smooth Gaussian") {
    GridSpec g(256, 256, -16.0, 32.0);
    Field2D f(g, AxisKind::ZP);
    for (int j = 0; j < g.n_p; ++j)
        for (int i = 0; i < g.n_z; ++i) {
            const double z = g.z(i), p = g.p(j);
            f.values(i, j) = std::exp(-0.5 * z * z - 0.5 * p * p);
        }
    const double scale = f.values.cwiseAbs().maxCoeff();
    for (int axis : {0, 1}) {
        Field2D ds = spectral_derivative(f, axis, 1);
        Field2D dfd = oracles::finite_difference_derivative(f, axis);
        CHECK((ds.values - dfd.values).cwiseAbs().maxCoeff() / scale < 1e-6);
        Field2D dfd2 = oracles::finite_difference_derivative(f, axis, 2);
        CHECK((ds.values - dfd2.values).cwiseAbs().maxCoeff() / scale < 1e-2);
    }
    Field2D dz_exact(g, AxisKind::ZP);
    for (int j = 0; j < g.n_p; ++j)
        for (int i = 0; i < g.n_z; ++i)
            dz_exact.values(i, j) = -g.z(i) * f.values(i, j).real();
    Field2D ds = spectral_derivative(f, 0, 1);
    CHECK((ds.values - dz_exact.values).cwiseAbs().maxCoeff() / scale < 1e-6);
}

TEST_CASE("spectral tail fraction flags aliased input") {
    GridSpec g(64, 64, -8.0, 16.0);
    Field2D smooth(g, AxisKind::ZP);
    for (int j = 0; j < g.n_p; ++j)
        for (int i = 0; i < g.n_z; ++i)
            smooth.values(i, j) = std::exp(-0.5 * g.z(i) * g.z(i) - 0.5 * g.p(j) * g.p(j));
    double tail = 1.0;
    spectral_derivative(smooth, 0, 1, &tail);
    CHECK(tail < 1e-12);
    Field2D rough(g, AxisKind::ZP);
    for (int j = 0; j < g.n_p; ++j)
        for (int i = 0; i < g.n_z; ++i) rough.values(i, j) = (i + j) % 2 ? 1.0 : -1.0;
    spectral_derivative(rough, 0, 2, &tail);
    CHECK(tail > 0.5);
}

TEST_CASE("axis_fourier: round trip is the identity") {
    GridSpec g(16, 32, -4.0, 8.0);
    Field2D f(g, AxisKind::ZP);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int j = 0; j < g.n_p; ++j)
        for (int i = 0; i < g.n_z; ++i) f.values(i, j) = Complex(n01(rng), n01(rng));
    Field2D rt = axis_fourier(axis_fourier(f, FourierDirection::PtoR), FourierDirection::RtoP);
    CHECK((rt.values - f.values).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(rt.axis == AxisKind::ZP);
}

TEST_CASE("axis_fourier: Gaussian closed form") {
    // (1/2pi) int dp e^{ipr} e^{-p^2/(4 S^2)} = (S/sqrt(pi)) e^{-S^2 r^2}
    GridSpec g(32, 128, -4.0, 8.0);
    const double S = 0.5;
    Field2D f(g, AxisKind::ZP);
    for (int j = 0; j < g.n_p; ++j)
        f.values.col(j).setConstant(std::exp(-g.p(j) * g.p(j) / (4.0 * S * S)));
    Field2D ft = axis_fourier(f, FourierDirection::PtoR);
    for (int k = 0; k < g.n_p; ++k) {
        const double expect = S / std::sqrt(M_PI) * std::exp(-S * S * g.r(k) * g.r(k));
        CHECK(ft.values(5, k).real() == Catch::Approx(expect).margin(1e-10));
        CHECK(std::abs(ft.values(5, k).imag()) < 1e-12);
    }
}

TEST_CASE("axis_fourier: single r mode maps to a single bin") {
    GridSpec g(8, 16, -2.0, 4.0);
    // f(p) = e^{-i p r_k0} has the p->r transform concentrated at bin k0 (up to dp/2pi scale)
    const int k0 = 11;
    Field2D f(g, AxisKind::ZP);
    for (int j = 0; j < g.n_p; ++j)
        f.values.row(0).col(j).setConstant(std::polar(1.0, -g.p(j) * g.r(k0)));
    for (int i = 1; i < g.n_z; ++i) f.values.row(i) = f.values.row(0);
    Field2D ft = axis_fourier(f, FourierDirection::PtoR);
    for (int k = 0; k < g.n_p; ++k) {
        const double mag = std::abs(ft.values(0, k));
        if (k == k0) CHECK(mag > 1e-6);
        else CHECK(mag < 1e-14);
    }
}

TEST_CASE("Parseval holds across axis_fourier") {
    GridSpec g(32, 64, -4.0, 8.0);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01(0.0, 1.0);
    Field2D f(g, AxisKind::ZP);
    for (int j = 0; j < g.n_p; ++j)
        for (int i = 0; i < g.n_z; ++i) f.values(i, j) = Complex(n01(rng), n01(rng));
    Field2D ft = axis_fourier(f, FourierDirection::PtoR);
    CHECK(integrate_abs2(ft) == Catch::Approx(integrate_abs2(f)).epsilon(1e-12));
}

TEST_CASE("derivative along z commutes with the p-axis transform") {
    GridSpec g(32, 32, -4.0, 8.0);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n01(0.0, 1.0);
    Field2D f(g, AxisKind::ZP);
    for (int j = 0; j < g.n_p; ++j)
        for (int i = 0; i < g.n_z; ++i) f.values(i, j) = Complex(n01(rng), n01(rng));
    Field2D a = axis_fourier(spectral_derivative(f, 0, 1), FourierDirection::PtoR);
    Field2D b = spectral_derivative(axis_fourier(f, FourierDirection::PtoR), 0, 1);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("kernels are linear") {
    GridSpec g(16, 16, -4.0, 8.0);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n01(0.0, 1.0);
    Field2D f(g, AxisKind::ZP), h(g, AxisKind::ZP);
    for (int j = 0; j < g.n_p; ++j)
        for (int i = 0; i < g.n_z; ++i) {
            f.values(i, j) = Complex(n01(rng), n01(rng));
            h.values(i, j) = Complex(n01(rng), n01(rng));
        }
    const Complex alpha(0.7, -0.2), beta(-1.3, 0.4);
    Field2D combo(g, AxisKind::ZP);
    combo.values = alpha * f.values + beta * h.values;
    Field2D lhs = axis_fourier(combo, FourierDirection::PtoR);
    Field2D rhs(g, AxisKind::ZR);
    rhs.values = alpha * axis_fourier(f, FourierDirection::PtoR).values +
                 beta * axis_fourier(h, FourierDirection::PtoR).values;
    CHECK((lhs.values - rhs.values).cwiseAbs().maxCoeff() < 1e-12);
    Field2D dl = spectral_derivative(combo, 0, 1);
    Field2D dr_(g, AxisKind::ZP);
    dr_.values = alpha * spectral_derivative(f, 0, 1).values +
                 beta * spectral_derivative(h, 0, 1).values;
    CHECK((dl.values - dr_.values).cwiseAbs().maxCoeff() < 1e-12);
}
