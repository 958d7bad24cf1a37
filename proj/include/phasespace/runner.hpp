#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "phasespace/config.hpp"
#include "phasespace/diagnostics.hpp"
#include "phasespace/evolution.hpp"
#include "phasespace/io.hpp"
#include "phasespace/observables.hpp"
#include "phasespace/phasespace_version.hpp"
#include "phasespace/states.hpp"
#include "phasespace/transforms.hpp"

namespace phasespace {

namespace detail_run {

inline ClassicalWaveFunction build_initial_state(const RunConfig& cfg, const GridSpec& g,
                                                 std::string& note) {
    switch (cfg.initial) {
        case InitialStateKind::Gaussian:
            note = "gaussian packet";
            return gaussian_packet(g, cfg.x0, cfg.p0, cfg.dx, cfg.dp);
        case InitialStateKind::Eigenstate: {
            note = "harmonic eigenstate n=" + std::to_string(cfg.eigenstate_n);
            QuantumWaveFunction psi_q =
                harmonic_eigenstate(g, cfg.eigenstate_n, cfg.potential.mass, cfg.omega);
            return pure_state_embed(psi_q, g);
        }
        case InitialStateKind::QuantumFile: {
            io::RawGridFile raw = io::read_grid_file(cfg.initial_file);
            if (raw.n_z != static_cast<std::uint32_t>(g.n_z) || raw.n_p != 1)
                throw ConfigError("quantum-file: expected " + std::to_string(g.n_z) +
                                  " x 1 complex state");
            QuantumWaveFunction psi_q;
            psi_q.dz = g.dz;
            psi_q.z_min = g.z_min;
            psi_q.values = raw.values.col(0);
            const double n = psi_q.norm();
            if (!(n > 0.0)) throw NumericError("quantum-file: zero norm");
            psi_q.values /= std::sqrt(n);
            note = "quantum state from " + cfg.initial_file;
            return pure_state_embed(psi_q, g);
        }
        case InitialStateKind::ClassicalFile: {
            io::RawGridFile raw = io::read_grid_file(cfg.initial_file);
            if (raw.n_z != static_cast<std::uint32_t>(g.n_z) ||
                raw.n_p != static_cast<std::uint32_t>(g.n_p) || raw.axis_tag != 0)
                throw ConfigError("classical-file: expected a (z,p) field matching the grid");
            ClassicalWaveFunction psi{Field2D(g, AxisKind::ZP, raw.values)};
            if (psi.imaginary_fraction() > kRealityTol)
                throw NumericError("classical-file: field is not real");
            normalize(psi);
            note = "classical wave function from " + cfg.initial_file;
            return psi;
        }
    }
    throw ConfigError("unreachable initial-state kind");
}

inline void load_tabulated_potential(RunConfig& cfg, const GridSpec& g) {
    if (cfg.potential.kind != PotentialKind::Tabulated) return;
    io::RawGridFile raw = io::read_grid_file(cfg.potential_file);
    if (raw.n_z != static_cast<std::uint32_t>(g.n_z) || raw.n_p != 1)
        throw ConfigError("tabulated potential: expected an n_z x 1 real table");
    cfg.potential.table = raw.values.col(0).real();
}

} // namespace detail_run

/// Execute a validated run configuration; returns the output directory.
/// Outputs: manifest.txt, observables.csv, optional diagnostics.csv,
/// marginal CSVs, sharpened.csv and binary field snapshots. Identical config
/// and version produce byte-identical CSVs.
inline std::filesystem::path run(RunConfig cfg) {
    namespace fs = std::filesystem;
    const auto t_start = std::chrono::steady_clock::now();
    const GridSpec g = cfg.grid();
    detail_run::load_tabulated_potential(cfg, g);
    cfg.evolution.validate(g, cfg.potential);

    std::string initial_note;
    ClassicalWaveFunction psi = detail_run::build_initial_state(cfg, g, initial_note);
    const double boundary = boundary_mass_fraction(psi.field);

    fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string());

    // a numeric failure mid-run leaves a partial-manifest note behind
    auto write_failure_note = [&dir](const std::string& what) {
        std::ofstream note(dir / "manifest_partial.txt");
        note << "status = aborted\nerror = " << what << "\n";
    };
    double final_purity = 0.0;
    double final_trace_correction = 1.0;
    try {

    std::vector<MomentPolynomial> moments;
    for (const auto& tok : cfg.moment_tokens) moments.push_back(parse_moment_token(tok));

    std::vector<std::string> header = {"time", "norm", "energy", "imag_fraction"};
    for (const auto& tok : cfg.moment_tokens) {
        header.push_back("cl_" + tok);
        header.push_back("q_" + tok);
    }
    io::CsvWriter obs_csv((dir / "observables.csv").string(), header);

    std::unique_ptr<io::CsvWriter> diag_csv;
    if (cfg.diag_unitarity || cfg.diag_factorization)
        diag_csv = std::make_unique<io::CsvWriter>(
            (dir / "diagnostics.csv").string(),
            std::vector<std::string>{"time", "purity", "rank1_fidelity", "trace_drift", "e_norm",
                                     "locality_residual", "conditioning_flag"});

    Propagator prop(g, cfg.potential, cfg.evolution.law, cfg.evolution.dt);
    RealVector v_table = cfg.potential.values_on(g);

    auto sample = [&](long step) {
        const double t = step * cfg.evolution.dt;
        // evolved states carry resolution-level imaginary dust; reject only a
        // genuine numeric failure and report the fraction as an observable
        const double imag = psi.imaginary_fraction();
        if (imag > 1e-4)
            throw NumericError("run: state lost reality (imaginary fraction " +
                               std::to_string(imag) + " at t = " + std::to_string(t) + ")");
        WignerFunction rho_w = quantum_transform(psi);
        // Wigner-side energy: integral (p^2/2m) rho_w + sum V(x) w_Q(x)
        double energy_val = quantum_expectation(rho_w, MomentPolynomial::monomial(0, 2)) /
                            (2.0 * cfg.potential.mass);
        RealVector wq_x = rho_w.field.values.real().rowwise().sum() * (g.dp / kTwoPi);
        for (int i = 0; i < g.n_z; ++i) energy_val += v_table(i) * wq_x(i) * g.dz;
        std::vector<double> row = {t, psi.norm(), energy_val, imag};
        Field2D w(g, AxisKind::ZP);
        w.values = psi.field.values.real().cwiseAbs2().cast<Complex>();
        for (const auto& F : moments) {
            row.push_back(classical_expectation(w, F));
            row.push_back(quantum_expectation(rho_w, F));
        }
        obs_csv.row(row);
        if (diag_csv) {
            PositionBasisWaveFunction pt = partial_fourier(psi);
            DensityMatrix rho = coarse_grain(pt);
            double purity = rho.purity();
            double rank1 = 0.0;
            if (cfg.diag_factorization) {
                Matrix A = 0.5 * (rho.matrix + rho.matrix.adjoint()) * rho.dz;
                Eigen::SelfAdjointEigenSolver<Matrix> es(A);
                rank1 = es.eigenvalues().maxCoeff();
            }
            double e_norm = 0.0, resid = 0.0;
            bool flag = false;
            if (cfg.diag_unitarity && cfg.potential.kind != PotentialKind::Tabulated) {
                Matrix E = coupling_term(pt, cfg.potential);
                e_norm = E.norm() * rho.dz;
                LocalityFit fit = locality_fit(E, rho);
                resid = fit.residual;
                flag = fit.conditioning_flag;
            }
            diag_csv->row({t, purity, rank1, std::abs(rho.normalization_correction - 1.0), e_norm,
                           resid, flag ? 1.0 : 0.0});
        }
    };

    if (cfg.snapshots == SnapshotPolicy::Initial || cfg.snapshots == SnapshotPolicy::Both)
        io::write_field((dir / "state_initial.field").string(), psi.field, false);

    sample(0);
    for (long s = 1; s <= cfg.evolution.n_steps; ++s) {
        prop.step(psi);
        if (s % cfg.evolution.sample_every == 0 || s == cfg.evolution.n_steps) sample(s);
    }

    if (cfg.snapshots == SnapshotPolicy::Final || cfg.snapshots == SnapshotPolicy::Both)
        io::write_field((dir / "state_final.field").string(), psi.field, false);

    // end-of-run distribution outputs
    PositionBasisWaveFunction pt_final = partial_fourier(psi);
    DensityMatrix rho_final = coarse_grain(pt_final);
    final_trace_correction = rho_final.normalization_correction;
    if (cfg.marginals) {
        Field2D w(g, AxisKind::ZP);
        w.values = psi.field.values.real().cwiseAbs2().cast<Complex>();
        ClassicalMarginals cm = classical_marginals(w);
        RealVector wq_x = position_distribution(rho_final);
        io::CsvWriter mx((dir / "marginal_x.csv").string(), {"x", "w_q", "w_c"});
        for (int i = 0; i < g.n_z; ++i) mx.row({g.z(i), wq_x(i), cm.position(i)});
        mx.close();
        MomentumDistribution wq_p = momentum_distribution(rho_final);
        io::CsvWriter mp((dir / "marginal_p.csv").string(), {"p", "w_q"});
        for (int idx = 0; idx < wq_p.values.size(); ++idx)
            mp.row({wq_p.k(idx), wq_p.values(idx)});
        mp.close();
        io::CsvWriter mcp((dir / "marginal_p_classical.csv").string(), {"p", "w_c"});
        for (int j = 0; j < g.n_p; ++j) mcp.row({g.p(j), cm.momentum(j)});
        mcp.close();
    }
    final_purity = rho_final.purity();
    if (!cfg.sharpened_beta.empty()) {
        if (final_purity < 1.0 - 1e-3)
            throw NumericError("sharpened observables need a pure final state (purity " +
                               std::to_string(final_purity) + ")");
        QuantumWaveFunction psi_q = dominant_eigenstate(rho_final);
        std::vector<std::string> sh_header = {"x"};
        for (double b : cfg.sharpened_beta) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "beta_%.6g", b);
            sh_header.push_back(buf);
        }
        io::CsvWriter sh((dir / "sharpened.csv").string(), sh_header);
        std::vector<RealVector> cols;
        for (double b : cfg.sharpened_beta)
            cols.push_back(sharpened_position_distribution(psi_q, b, g));
        for (int i = 0; i < g.n_z; ++i) {
            std::vector<double> row = {g.z(i)};
            for (const auto& c : cols) row.push_back(c(i));
            sh.row(row);
        }
        sh.close();
    }
    obs_csv.close();
    if (diag_csv) diag_csv->close();
    } catch (const NumericError& e) {
        write_failure_note(e.what());
        throw;
    }

    const auto t_end = std::chrono::steady_clock::now();
    const double wall_s = std::chrono::duration<double>(t_end - t_start).count();

    std::ofstream man(dir / "manifest.txt");
    if (!man) throw IoError("cannot write manifest");
    man << "tool = phasesim " << kVersion << "\n";
    man << "wall_time_seconds = " << wall_s << "\n";
    man << "initial_state = " << initial_note << "\n";
    man << "initial_boundary_mass_fraction = " << boundary << "\n";
    man << "final_purity = " << final_purity << "\n";
    man << "final_trace_correction = " << final_trace_correction << "\n";
    man << "\n[grid]\nn_z = " << cfg.n_z << "\nn_p = " << cfg.n_p << "\nz_min = " << cfg.z_min
        << "\nlength_z = " << cfg.length_z << "\n";
    man << "\n[potential]\nkind = ";
    switch (cfg.potential.kind) {
        case PotentialKind::Free: man << "free"; break;
        case PotentialKind::Harmonic: man << "harmonic"; break;
        case PotentialKind::Quartic: man << "quartic"; break;
        case PotentialKind::Tabulated: man << "tabulated"; break;
    }
    man << "\na = " << cfg.potential.a << "\nb = " << cfg.potential.b
        << "\nc = " << cfg.potential.c << "\nlambda = " << cfg.potential.lambda
        << "\nmass = " << cfg.potential.mass << "\n";
    if (!cfg.potential_file.empty()) man << "file = " << cfg.potential_file << "\n";
    man << "\n[initial]\ntype = ";
    switch (cfg.initial) {
        case InitialStateKind::Gaussian:
            man << "gaussian\nx0 = " << cfg.x0 << "\np0 = " << cfg.p0 << "\ndx = " << cfg.dx
                << "\ndp = " << cfg.dp;
            break;
        case InitialStateKind::Eigenstate:
            man << "eigenstate\nn = " << cfg.eigenstate_n << "\nomega = " << cfg.omega;
            break;
        case InitialStateKind::QuantumFile:
            man << "quantum-file\nfile = " << cfg.initial_file;
            break;
        case InitialStateKind::ClassicalFile:
            man << "classical-file\nfile = " << cfg.initial_file;
            break;
    }
    man << "\n\n[evolution]\nlaw = "
        << (cfg.evolution.law == EvolutionLaw::HW ? "hw" : "liouville")
        << "\ndt = " << cfg.evolution.dt << "\nn_steps = " << cfg.evolution.n_steps
        << "\nsample_every = " << cfg.evolution.sample_every << "\n";
    man << "\n[observables]\nmoments =";
    for (const auto& tok : cfg.moment_tokens) man << " " << tok;
    man << "\nmarginals = " << (cfg.marginals ? "true" : "false") << "\nsharpened_beta =";
    for (double b : cfg.sharpened_beta) man << " " << b;
    man << "\n\n[diagnostics]\nunitarity = " << (cfg.diag_unitarity ? "true" : "false")
        << "\nfactorization = " << (cfg.diag_factorization ? "true" : "false") << "\n";
    man << "\n[output]\ndirectory = " << cfg.output_dir << "\nsnapshots = ";
    switch (cfg.snapshots) {
        case SnapshotPolicy::None: man << "none"; break;
        case SnapshotPolicy::Initial: man << "initial"; break;
        case SnapshotPolicy::Final: man << "final"; break;
        case SnapshotPolicy::Both: man << "both"; break;
    }
    man << "\n";
    return dir;
}

} // namespace phasespace
