// hamiltonian.hpp — NV ground-state Hamiltonian, electron eigensystem with
// labeled states |0>, |->, |+> and their spin expectation values.

#pragma once

#include "nvsim/linalg.hpp"
#include "nvsim/system.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nvsim {

// Electron sector, |m_S = +1, 0, -1> basis, units rad/us:
//   H_e = 2*pi * (D_gs Sz^2 + gamma_B (B_x Sx + B_z Sz))
inline ComplexMatrix build_electron_hamiltonian(const PhysicalConstants& c,
                                                const FieldConfig& f) {
    c.validate();
    f.validate();
    const SpinOperators s = spin_operators(1.0);
    ComplexMatrix h = c.d_gs_mhz * (s.sz * s.sz)
        + c.gamma_b_mhz_per_g * (f.bx() * s.sx + f.bz() * s.sz);
    return two_pi * h;
}

// Full 6x6 electron (x) nucleus Hamiltonian, units rad/us:
//   H_gs = H_e (x) 1 + sum_i A_ii S_i (x) I_i + gamma_N (B_x 1 (x) I_x + B_z 1 (x) I_z)
inline ComplexMatrix build_full_hamiltonian(const PhysicalConstants& c,
                                            const FieldConfig& f) {
    const SpinOperators s = spin_operators(1.0);
    const SpinOperators n = spin_operators(0.5);
    const ComplexMatrix i3 = identity(3);
    const ComplexMatrix i2 = identity(2);
    ComplexMatrix h = kron(build_electron_hamiltonian(c, f), i2);
    h += two_pi * (c.a_xx_mhz * kron(s.sx, n.sx)
                   + c.a_yy_mhz() * kron(s.sy, n.sy)
                   + c.a_zz_mhz * kron(s.sz, n.sz));
    h += two_pi * c.gamma_n_mhz_per_g()
        * (f.bx() * kron(i3, n.sx) + f.bz() * kron(i3, n.sz));
    return h;
}

// Labeled electron eigensystem at one field setting.
// Label index order: [0] = zero, [1] = minus, [2] = plus.
struct EigenSystem {
    std::array<double, 3> energy_mhz{};
    std::array<Eigen::Vector3cd, 3> state{};
    std::array<Eigen::Vector3d, 3> spin{};   // (<Sx>, <Sy>, <Sz>) per label
    double hybridization_eps = 0.0;          // <Sx>_0 = sqrt(2) * eps

    double energy(StateLabel l) const { return energy_mhz[static_cast<int>(l)]; }
    const Eigen::Vector3cd& psi(StateLabel l) const { return state[static_cast<int>(l)]; }
    const Eigen::Vector3d& s(StateLabel l) const { return spin[static_cast<int>(l)]; }
};

namespace detail {

inline Eigen::Vector3d spin_expectation(const SpinOperators& ops, const Eigen::Vector3cd& v) {
    return {std::real(Complex(v.adjoint() * ops.sx * v)),
            std::real(Complex(v.adjoint() * ops.sy * v)),
            std::real(Complex(v.adjoint() * ops.sz * v))};
}

}  // namespace detail

// Diagonalize H_e and assign labels. |0> is the state of largest |<m_S=0|psi>|^2.
// Of the remaining pair, |-> is the lower-energy one: at theta_B = 90 deg that is
// exactly (|+1> - |-1>)/sqrt(2), and since the pair never crosses for theta_B in
// (0, 180) deg the energy order continues that state smoothly to all angles.
// A tie in either rule (relative 1e-9) raises a degeneracy error.
inline EigenSystem solve_electron(const PhysicalConstants& c, const FieldConfig& f) {
    const ComplexMatrix h = build_electron_hamiltonian(c, f);
    const EigenDecomposition ed = eigh(h);
    const SpinOperators ops = spin_operators(1.0);

    // m_S = 0 is basis index 1 in the (+1, 0, -1) ordering.
    std::array<double, 3> w0{};
    for (int k = 0; k < 3; ++k) w0[k] = std::norm(ed.eigenvectors(1, k));
    int zero_idx = 0;
    for (int k = 1; k < 3; ++k)
        if (w0[k] > w0[zero_idx]) zero_idx = k;
    for (int k = 0; k < 3; ++k) {
        if (k == zero_idx) continue;
        if (std::abs(w0[zero_idx] - w0[k]) <= 1e-9 * std::max(w0[zero_idx], 1e-300))
            throw std::runtime_error("solve_electron: degenerate |0> labeling");
    }

    std::array<int, 2> rest{};
    for (int k = 0, j = 0; k < 3; ++k)
        if (k != zero_idx) rest[j++] = k;
    const double escale = ed.eigenvalues.cwiseAbs().maxCoeff();
    if (std::abs(ed.eigenvalues(rest[0]) - ed.eigenvalues(rest[1])) <=
        1e-9 * std::max(escale, 1e-300))
        throw std::runtime_error("solve_electron: degenerate |+/-> labeling");
    const int minus_idx = ed.eigenvalues(rest[0]) < ed.eigenvalues(rest[1]) ? rest[0] : rest[1];
    const int plus_idx = minus_idx == rest[0] ? rest[1] : rest[0];

    EigenSystem es;
    const std::array<int, 3> order{zero_idx, minus_idx, plus_idx};
    for (int l = 0; l < 3; ++l) {
        es.energy_mhz[l] = ed.eigenvalues(order[l]) / two_pi;
        es.state[l] = ed.eigenvectors.col(order[l]);
        es.spin[l] = detail::spin_expectation(ops, es.state[l]);
    }
    const Eigen::Vector3cd& z = es.state[0];
    es.hybridization_eps = std::real(std::conj(z(1)) * (z(0) + z(2)));
    return es;
}

// Eigensystem sweep over strictly monotone theta values. Labels are assigned
// per point; a continuity pass requires adjacent same-label overlap > 0.5.
inline std::vector<EigenSystem> sweep_eigensystem(const PhysicalConstants& c,
                                                  const std::vector<double>& thetas_deg,
                                                  double magnitude_g) {
    if (thetas_deg.empty())
        throw std::invalid_argument("sweep_eigensystem: empty theta grid");
    for (std::size_t i = 1; i < thetas_deg.size(); ++i) {
        const bool up = thetas_deg[1] > thetas_deg[0];
        if ((up && thetas_deg[i] <= thetas_deg[i - 1]) ||
            (!up && thetas_deg[i] >= thetas_deg[i - 1]))
            throw std::invalid_argument("sweep_eigensystem: thetas must be strictly monotone");
    }
    std::vector<EigenSystem> out;
    out.reserve(thetas_deg.size());
    for (double th : thetas_deg)
        out.push_back(solve_electron(c, FieldConfig{magnitude_g, th}));
    for (std::size_t i = 1; i < out.size(); ++i) {
        for (int l = 0; l < 3; ++l) {
            const double ov = std::abs(Complex(out[i - 1].state[l].adjoint() * out[i].state[l]));
            if (ov <= 0.5)
                throw std::runtime_error(
                    "sweep_eigensystem: label continuity break between theta = " +
                    std::to_string(thetas_deg[i - 1]) + " and " +
                    std::to_string(thetas_deg[i]) + " deg");
        }
    }
    return out;
}

}  // namespace nvsim
