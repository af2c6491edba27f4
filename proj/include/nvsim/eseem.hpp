// eseem.hpp — spin-echo signal with nuclear-induced collapse and revival:
// closed-form expression and the exact 6x6 unitary oracle, plus grid sweeps.

#pragma once

#include "nvsim/hyperfine.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace nvsim {

enum class EchoModel { closed_form, unitary_exact, lindblad };

inline const char* to_string(EchoModel m) {
    switch (m) {
        case EchoModel::closed_form: return "closed_form";
        case EchoModel::unitary_exact: return "unitary_exact";
        case EchoModel::lindblad: return "lindblad";
    }
    return "?";
}

// 2-D echo-amplitude table over (theta_B, tau), row-major over theta.
struct EchoGrid {
    std::vector<double> thetas_deg;
    std::vector<double> taus_us;
    std::vector<double> values;
    EchoModel model = EchoModel::closed_form;

    double at(std::size_t it, std::size_t jt) const {
        return values[it * taus_us.size() + jt];
    }
};

// P = 1 - |w0 x w-|^2 sin^2(w0 tau/4) sin^2(w- tau/4), with the splittings and
// unit axes of the two electron states involved in the transition.
inline double echo_closed_form_from_levels(const NuclearLevels& ground,
                                           const NuclearLevels& excited, double tau_us) {
    const double cross2 = ground.axis_unit.cross(excited.axis_unit).squaredNorm();
    const double s0 = std::sin(ground.splitting_omega * tau_us / 4.0);
    const double se = std::sin(excited.splitting_omega * tau_us / 4.0);
    return 1.0 - cross2 * s0 * s0 * se * se;
}

inline double echo_closed_form(const PhysicalConstants& c, const FieldConfig& f,
                               Transition t, double tau_us) {
    const EigenSystem es = solve_electron(c, f);
    const NuclearLevels n0 = nuclear_hamiltonian(c, f, es, StateLabel::zero);
    const NuclearLevels ne = nuclear_hamiltonian(c, f, es, excited_label(t));
    return echo_closed_form_from_levels(n0, ne, tau_us);
}

namespace detail {

// Echo pulse sequence state shared across tau values at fixed (c, f).
struct EchoSetup {
    EigenDecomposition hd;       // full 6x6 Hamiltonian eigensystem
    ComplexMatrix rho0;          // |psi_e><psi_e| (x) 1/2
    ComplexMatrix r_pi;          // ideal pi swap |0><e| + |e><0| + rest, (x) 1_2
    ComplexMatrix projector;     // |psi_e><psi_e| (x) 1_2
};

inline EchoSetup make_echo_setup(const PhysicalConstants& c, const FieldConfig& f,
                                 Transition t) {
    const EigenSystem es = solve_electron(c, f);
    const Eigen::Vector3cd z = es.psi(StateLabel::zero);
    const Eigen::Vector3cd e = es.psi(excited_label(t));
    const Eigen::Vector3cd r = es.psi(t == Transition::minus_zero ? StateLabel::plus
                                                                  : StateLabel::minus);
    const Eigen::Vector3cd psi = (z + e) / std::sqrt(2.0);
    const ComplexMatrix pe = psi * psi.adjoint();
    const ComplexMatrix swap =
        e * z.adjoint() + z * e.adjoint() + r * r.adjoint();
    EchoSetup setup;
    setup.hd = eigh(build_full_hamiltonian(c, f));
    setup.rho0 = 0.5 * kron(pe, identity(2));
    setup.r_pi = kron(swap, identity(2));
    setup.projector = kron(pe, identity(2));
    return setup;
}

inline double run_echo(const EchoSetup& s, double tau_us) {
    const ComplexMatrix u_half = propagator(s.hd, tau_us / 2.0);
    const ComplexMatrix u = u_half * s.r_pi * u_half;
    const ComplexMatrix rho_f = u * s.rho0 * u.adjoint();
    return std::real((s.projector * rho_f).trace());
}

}  // namespace detail

// Exact echo: rho_0 = |psi_e><psi_e| (x) 1/2 with psi_e = (|0> + |e>)/sqrt(2),
// evolve tau/2 under the full H_gs, apply the ideal pi swap, evolve tau/2,
// project back onto the initial electron state. The echo refocuses the
// deterministic transition phase, so the projector expectation is directly
// the [0, 1] amplitude the closed form approximates.
inline double echo_unitary_exact(const PhysicalConstants& c, const FieldConfig& f,
                                 Transition t, double tau_us) {
    return detail::run_echo(detail::make_echo_setup(c, f, t), tau_us);
}

namespace detail {

inline void check_monotone(const std::vector<double>& axis, const char* name) {
    if (axis.empty())
        throw std::invalid_argument(std::string(name) + " axis is empty");
    for (std::size_t i = 1; i < axis.size(); ++i)
        if (axis[i] <= axis[i - 1])
            throw std::invalid_argument(std::string(name) + " axis must be strictly increasing");
}

}  // namespace detail

inline EchoGrid echo_grid(const PhysicalConstants& c, double magnitude_g,
                          const std::vector<double>& thetas_deg,
                          const std::vector<double>& taus_us, Transition t,
                          EchoModel model) {
    detail::check_monotone(thetas_deg, "theta");
    detail::check_monotone(taus_us, "tau");
    if (model == EchoModel::lindblad)
        throw std::invalid_argument("echo_grid: lindblad grids are built by echo_lindblad_grid");
    EchoGrid grid{thetas_deg, taus_us, {}, model};
    grid.values.reserve(thetas_deg.size() * taus_us.size());
    for (double th : thetas_deg) {
        const FieldConfig f{magnitude_g, th};
        if (model == EchoModel::closed_form) {
            const EigenSystem es = solve_electron(c, f);
            const NuclearLevels n0 = nuclear_hamiltonian(c, f, es, StateLabel::zero);
            const NuclearLevels ne = nuclear_hamiltonian(c, f, es, excited_label(t));
            for (double tau : taus_us)
                grid.values.push_back(echo_closed_form_from_levels(n0, ne, tau));
        } else {
            const detail::EchoSetup setup = detail::make_echo_setup(c, f, t);
            for (double tau : taus_us)
                grid.values.push_back(detail::run_echo(setup, tau));
        }
    }
    return grid;
}

}  // namespace nvsim
