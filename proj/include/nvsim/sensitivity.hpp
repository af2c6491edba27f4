// sensitivity.hpp — angle sensitivity eta and envelope eta* for the
// nuclear-assisted scheme, and the conventional Zeeman-magnetometry
// comparison. Both share one photon shot-noise kernel and differ only in the
// effective angle coupling constant and prefactor.

#pragma once

#include "nvsim/hyperfine.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace nvsim {

struct ReadoutParams {
    double fluorescence_kcps = 100.0;  // F
    double contrast = 0.15;            // C, optical contrast
    double readout_ns = 300.0;         // T_r
    double init_us = 2.0;              // t_ini

    void validate() const {
        if (fluorescence_kcps <= 0.0 || contrast <= 0.0 || readout_ns <= 0.0 || init_us <= 0.0)
            throw std::invalid_argument("ReadoutParams: all parameters must be positive");
        if (contrast > 1.0)
            throw std::invalid_argument("ReadoutParams: contrast must be <= 1");
    }
};

// Raised where the sine modulation suppresses the signal slope entirely;
// the sensitivity is periodically lost and regained as tau varies.
struct SensitivityLost : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// sqrt( (t_ini + tau) / (N_photon tau^2) ) in 1/sqrt(s), with
// N_photon = F T_r the mean photons collected per readout.
inline double shot_noise_kernel(const ReadoutParams& r, double tau_us) {
    if (tau_us <= 0.0)
        throw std::invalid_argument("sensitivity: tau must be positive");
    const double n_photon = r.fluorescence_kcps * 1e3 * r.readout_ns * 1e-9;
    const double tau_s = tau_us * 1e-6;
    const double tini_s = r.init_us * 1e-6;
    return std::sqrt((tini_s + tau_s) / (n_photon * tau_s * tau_s));
}

// Generic sensitivity A / (gamma_eff C) * kernel, in mdeg/sqrt(Hz).
// gamma_eff converts to rad/us per degree, prefactor is dimensionless.
inline double sensitivity_mdeg(double prefactor, double gamma_eff_rad_us_deg,
                               const ReadoutParams& r, double tau_us) {
    return prefactor / (gamma_eff_rad_us_deg * r.contrast) * 1e-3 *
           shot_noise_kernel(r, tau_us);
}

}  // namespace detail

// Envelope eta* = 4 / (gamma_theta C) * sqrt(1/(F T_r tau) * (t_ini+tau)/tau).
inline double eta_star_nuclear(const PhysicalConstants& c, const FieldConfig& f,
                               const ReadoutParams& r, double tau_us) {
    r.validate();
    const GammaTheta g = gamma_theta(c, f.magnitude_g, f.theta_deg);
    if (std::abs(g.value) < 1e-9)
        throw SensitivityLost("eta_nuclear: gamma_theta vanishes at this angle");
    return detail::sensitivity_mdeg(4.0, std::abs(g.value), r, tau_us);
}

// eta = eta* / |sin^2(omega_0 tau/4) sin(omega_- tau/2)|.
inline double eta_nuclear(const PhysicalConstants& c, const FieldConfig& f,
                          const ReadoutParams& r, double tau_us) {
    const double envelope = eta_star_nuclear(c, f, r, tau_us);
    const EigenSystem es = solve_electron(c, f);
    const double w0 =
        nuclear_hamiltonian(c, f, es, StateLabel::zero).splitting_omega;
    const double wm =
        nuclear_hamiltonian(c, f, es, StateLabel::minus).splitting_omega;
    const double s0 = std::sin(w0 * tau_us / 4.0);
    const double mod = std::abs(s0 * s0 * std::sin(wm * tau_us / 2.0));
    if (mod < 1e-6)
        throw SensitivityLost("eta_nuclear: sensitivity lost at this tau");
    return envelope / mod;
}

// Conventional magnetometry: eta_con = eta_Bz / (|B| sin(theta_B)), with the
// B_z coupling reduced by the transition's <Sz> difference as the eigenbasis
// turns. If eta_bz_parallel_nt is given it fixes the parallel-field B_z
// sensitivity; otherwise the shot-noise expression
// eta_Bz = 2/(pi gamma_Bz C) sqrt(1/(F T_r tau) * (t_ini+tau)/tau) is used.
inline double eta_conventional(const PhysicalConstants& c, const FieldConfig& f,
                               const ReadoutParams& r, double tau_us,
                               std::optional<double> eta_bz_parallel_nt = std::nullopt) {
    if (f.theta_deg <= 0.0 || f.theta_deg >= 180.0)
        throw std::invalid_argument("eta_conventional: theta_B must lie strictly in (0, 180) deg");
    if (f.magnitude_g <= 0.0)
        throw std::invalid_argument("eta_conventional: |B| must be positive");
    const EigenSystem es = solve_electron(c, f);
    const double reduction =
        std::abs(es.s(StateLabel::minus).z() - es.s(StateLabel::zero).z());
    if (reduction < 1e-12)
        throw SensitivityLost("eta_conventional: Sz coupling vanishes at this angle");
    const double sin_theta = std::sin(f.theta_deg * deg_to_rad);

    double eta_bz_g;  // G / sqrt(Hz)
    if (eta_bz_parallel_nt) {
        // 1 G = 1e5 nT; the parallel-field value degrades as 1/reduction.
        eta_bz_g = (*eta_bz_parallel_nt / 1e5) / reduction;
    } else {
        r.validate();
        const double gamma_bz = two_pi * c.gamma_b_mhz_per_g * reduction;  // rad/us/G
        eta_bz_g = 2.0 / std::acos(-1.0) / (gamma_bz * r.contrast) *
                   detail::shot_noise_kernel(r, tau_us) * 1e-6;
    }
    const double eta_rad = eta_bz_g / (f.magnitude_g * sin_theta);
    return eta_rad / deg_to_rad * 1e3;  // mdeg/sqrt(Hz)
}

struct OptimalTau {
    double tau_us = 0.0;
    double eta_mdeg = 0.0;
};

// Global search for the tau minimizing eta over (0, tau_max]: coarse grid
// (step <= 2 ns) followed by golden-section refinement around the best point.
inline OptimalTau optimal_tau(const PhysicalConstants& c, const FieldConfig& f,
                              const ReadoutParams& r, double tau_max_us) {
    if (tau_max_us <= 0.0)
        throw std::invalid_argument("optimal_tau: tau_max must be positive");
    r.validate();
    const GammaTheta g = gamma_theta(c, f.magnitude_g, f.theta_deg);
    if (std::abs(g.value) < 1e-9)
        throw SensitivityLost("optimal_tau: gamma_theta vanishes at this angle");
    const EigenSystem es = solve_electron(c, f);
    const double w0 = nuclear_hamiltonian(c, f, es, StateLabel::zero).splitting_omega;
    const double wm = nuclear_hamiltonian(c, f, es, StateLabel::minus).splitting_omega;

    auto eta_at = [&](double tau) {
        const double s0 = std::sin(w0 * tau / 4.0);
        const double mod = std::abs(s0 * s0 * std::sin(wm * tau / 2.0));
        if (mod < 1e-6) return std::numeric_limits<double>::infinity();
        return detail::sensitivity_mdeg(4.0, std::abs(g.value), r, tau) / mod;
    };

    const double step = std::min(0.002, tau_max_us / 16.0);
    double best_tau = tau_max_us, best_eta = eta_at(tau_max_us);
    for (double tau = step; tau < tau_max_us; tau += step) {
        const double e = eta_at(tau);
        if (e < best_eta) { best_eta = e; best_tau = tau; }
    }

    double a = std::max(step / 2, best_tau - step);
    double b = std::min(tau_max_us, best_tau + step);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = eta_at(x1), f2 = eta_at(x2);
    while (b - a > 1e-7) {
        if (f1 < f2) { b = x2; x2 = x1; f2 = f1; x1 = b - gr * (b - a); f1 = eta_at(x1); }
        else { a = x1; x1 = x2; f1 = f2; x2 = a + gr * (b - a); f2 = eta_at(x2); }
    }
    const double tau_ref = 0.5 * (a + b);
    const double eta_ref = eta_at(tau_ref);
    if (eta_ref < best_eta) { best_eta = eta_ref; best_tau = tau_ref; }
    return {best_tau, best_eta};
}

}  // namespace nvsim
