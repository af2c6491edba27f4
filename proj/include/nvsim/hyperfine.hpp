// hyperfine.hpp — conditional nuclear spin Hamiltonian: effective field,
// sublevel splitting omega, quantization axis zeta, and the angle coupling
// constant gamma_theta = d omega_- / d theta_B.

#pragma once

#include "nvsim/hamiltonian.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace nvsim {

// Nuclear sublevel structure conditioned on one electron eigenstate.
// The 2x2 nuclear Hamiltonian is h . I, so the splitting is |h| and the
// quantization axis is h/|h|.
struct NuclearLevels {
    StateLabel electron_label = StateLabel::zero;
    Eigen::Vector3d effective_field{};   // rad/us
    double splitting_omega = 0.0;        // rad/us
    Eigen::Vector3d axis_unit{};         // zeta
    double theta_i_deg = 0.0;            // atan2(zeta_z, zeta_x), (-180, 180]
};

inline NuclearLevels nuclear_hamiltonian(const PhysicalConstants& c, const FieldConfig& f,
                                         const EigenSystem& e, StateLabel label) {
    const Eigen::Vector3d s = e.s(label);
    const double gn = c.gamma_n_mhz_per_g();
    NuclearLevels n;
    n.electron_label = label;
    n.effective_field = two_pi * Eigen::Vector3d(
        c.a_xx_mhz * s.x() + gn * f.bx(),
        c.a_yy_mhz() * s.y(),
        c.a_zz_mhz * s.z() + gn * f.bz());
    n.splitting_omega = n.effective_field.norm();
    if (n.splitting_omega > 0.0)
        n.axis_unit = n.effective_field / n.splitting_omega;
    else
        n.axis_unit = Eigen::Vector3d::UnitX();  // zero field: axis undefined, pick x
    n.theta_i_deg = std::atan2(n.axis_unit.z(), n.axis_unit.x()) / deg_to_rad;
    return n;
}

inline NuclearLevels nuclear_levels(const PhysicalConstants& c, const FieldConfig& f,
                                    StateLabel label) {
    return nuclear_hamiltonian(c, f, solve_electron(c, f), label);
}

struct GammaTheta {
    double value = 0.0;   // rad/us per degree
    bool reliable = true; // false inside the omega_- cusp neighborhood
};

// Slope of omega_-(theta_B) by Richardson-extrapolated central differences
// (steps 1e-3 and 2e-3 degrees). omega_- has a rounded cusp at its minimum
// near 90 deg; if the stencil brackets that minimum or the two central
// differences disagree badly, the raw value is returned flagged unreliable.
inline GammaTheta gamma_theta(const PhysicalConstants& c, double magnitude_g,
                              double theta_deg) {
    const double h = 1e-3;
    auto omega_minus = [&](double th) {
        return nuclear_levels(c, FieldConfig{magnitude_g, th}, StateLabel::minus)
            .splitting_omega;
    };
    const double w_m2 = omega_minus(theta_deg - 2 * h);
    const double w_m1 = omega_minus(theta_deg - h);
    const double w_0 = omega_minus(theta_deg);
    const double w_p1 = omega_minus(theta_deg + h);
    const double w_p2 = omega_minus(theta_deg + 2 * h);
    const double d1 = (w_p1 - w_m1) / (2 * h);
    const double d2 = (w_p2 - w_m2) / (4 * h);
    GammaTheta g;
    g.value = (4.0 * d1 - d2) / 3.0;
    const bool brackets_min = (w_p1 - w_0) * (w_0 - w_m1) < 0.0;
    const double scale = std::max({std::abs(d1), std::abs(d2), 1e-12});
    g.reliable = !brackets_min && std::abs(d1 - d2) <= 0.25 * scale;
    return g;
}

// One of the six H_gs eigenstates, addressed by electron label and nuclear
// sublevel index (0 = lower, 1 = upper within the electron manifold).
struct Sublevel {
    StateLabel electron = StateLabel::zero;
    int nuclear = 0;
};

namespace detail {

struct FullEigensystem {
    EigenDecomposition ed;
    // eigenvector column index for (label, sublevel)
    std::array<std::array<int, 2>, 3> index{};
};

// Group the six H_gs eigenstates by electron label via overlap with the
// electron eigenprojectors; within a manifold, sublevel 0 is the lower one.
inline FullEigensystem solve_full(const PhysicalConstants& c, const FieldConfig& f) {
    FullEigensystem full{eigh(build_full_hamiltonian(c, f)), {}};
    const EigenSystem es = solve_electron(c, f);
    std::array<std::array<int, 2>, 3> found{};
    std::array<int, 3> count{};
    for (int k = 0; k < 6; ++k) {
        const ComplexVector v = full.ed.eigenvectors.col(k);
        int best = 0;
        double wbest = -1.0;
        for (int l = 0; l < 3; ++l) {
            // weight on |psi_l><psi_l| (x) 1_2
            double w = 0.0;
            for (int nuc = 0; nuc < 2; ++nuc) {
                Complex amp = 0.0;
                for (int ei = 0; ei < 3; ++ei)
                    amp += std::conj(es.state[l](ei)) * v(2 * ei + nuc);
                w += std::norm(amp);
            }
            if (w > wbest) { wbest = w; best = l; }
        }
        if (count[best] >= 2)
            throw std::runtime_error("solve_full: electron-manifold grouping failed");
        found[best][count[best]++] = k;
    }
    for (int l = 0; l < 3; ++l) {
        if (count[l] != 2)
            throw std::runtime_error("solve_full: electron-manifold grouping failed");
        const bool ordered = full.ed.eigenvalues(found[l][0]) <= full.ed.eigenvalues(found[l][1]);
        full.index[l][0] = ordered ? found[l][0] : found[l][1];
        full.index[l][1] = ordered ? found[l][1] : found[l][0];
    }
    return full;
}

}  // namespace detail

// Microwave drive matrix element squared |<f| Sx (x) 1 |i>|^2 between two
// H_gs sublevels. The drive couples to the electron spin only (gamma_B >>
// gamma_N), a modeling choice documented in the README.
inline double transition_efficiency(const PhysicalConstants& c, const FieldConfig& f,
                                    Sublevel initial, Sublevel final_) {
    if (initial.electron == final_.electron && initial.nuclear == final_.nuclear)
        throw std::invalid_argument("transition_efficiency: initial and final sublevels coincide");
    if (initial.nuclear < 0 || initial.nuclear > 1 || final_.nuclear < 0 || final_.nuclear > 1)
        throw std::invalid_argument("transition_efficiency: nuclear index must be 0 or 1");
    const detail::FullEigensystem full = detail::solve_full(c, f);
    const SpinOperators s = spin_operators(1.0);
    const ComplexMatrix drive = kron(s.sx, identity(2));
    const ComplexVector vi =
        full.ed.eigenvectors.col(full.index[static_cast<int>(initial.electron)][initial.nuclear]);
    const ComplexVector vf =
        full.ed.eigenvectors.col(full.index[static_cast<int>(final_.electron)][final_.nuclear]);
    return std::norm(Complex(vf.adjoint() * drive * vi));
}

// Exact sublevel splitting from the 6x6 spectrum, used as an oracle against
// the 2x2 effective-field model.
inline double exact_splitting(const PhysicalConstants& c, const FieldConfig& f,
                              StateLabel label) {
    const detail::FullEigensystem full = detail::solve_full(c, f);
    const int l = static_cast<int>(label);
    return full.ed.eigenvalues(full.index[l][1]) - full.ed.eigenvalues(full.index[l][0]);
}

}  // namespace nvsim
