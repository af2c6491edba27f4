// noise.hpp — anisotropic magnetic-noise variance algebra: transition-energy
// fluctuation variance, dipolar single-spin covariance, line-noise model, and
// the maximally-decoupled off-angle search.

#pragma once

#include "nvsim/hamiltonian.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace nvsim {

// 3x3 symmetric covariance of magnetic field fluctuations <dB_i dB_j>, G^2.
struct NoiseCovariance {
    Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();

    void validate() const {
        if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() >
            1e-12 * std::max(sigma.cwiseAbs().maxCoeff(), 1e-300))
            throw std::invalid_argument("NoiseCovariance: matrix must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(sigma);
        if (es.eigenvalues().minCoeff() < -1e-12 * std::max(sigma.trace(), 1e-300))
            throw std::invalid_argument("NoiseCovariance: matrix must be positive semidefinite");
    }
};

// <dE^2> = v^T sigma v with v = gamma_B (<S>_e - <S>_0), in (rad/us)^2.
inline double delta_e_variance(const PhysicalConstants& c, const EigenSystem& e,
                               Transition t, const NoiseCovariance& noise) {
    const Eigen::Vector3d v = two_pi * c.gamma_b_mhz_per_g *
        (e.s(excited_label(t)) - e.s(StateLabel::zero));
    return v.dot(noise.sigma * v);
}

// A randomly flipping spin S at distance r along unit vector u, with dipolar
// prefactor D = mu_0 mu_B g_e / (4 pi r^3); prefactor_ds carries the product
// D*S in Gauss.
struct DipolarSource {
    Eigen::Vector3d direction_u = Eigen::Vector3d::UnitZ();
    double prefactor_ds_g = 0.0;

    void validate() const {
        if (std::abs(direction_u.norm() - 1.0) > 1e-12)
            throw std::invalid_argument("DipolarSource: direction must be a unit vector");
        if (prefactor_ds_g < 0.0)
            throw std::invalid_argument("DipolarSource: prefactor must be >= 0");
    }
};

// Spin-averaged dipolar covariance: diagonal (DS)^2 (3 u_i^2 + 1),
// off-diagonal (DS)^2 (3 u_i u_j); compactly (DS)^2 (3 u u^T + 1).
inline NoiseCovariance dipolar_covariance(const DipolarSource& src) {
    src.validate();
    const double ds2 = src.prefactor_ds_g * src.prefactor_ds_g;
    NoiseCovariance out;
    out.sigma = ds2 * (3.0 * src.direction_u * src.direction_u.transpose() +
                       Eigen::Matrix3d::Identity());
    return out;
}

// Rank-1 covariance of noise fluctuating along one line in the XZ plane,
// at angle_from_x degrees from +x.
inline NoiseCovariance line_noise_covariance(double angle_from_x_deg, double amplitude_g) {
    const double a = angle_from_x_deg * deg_to_rad;
    const Eigen::Vector3d n(std::cos(a), 0.0, std::sin(a));
    NoiseCovariance out;
    out.sigma = amplitude_g * amplitude_g * n * n.transpose();
    return out;
}

inline NoiseCovariance isotropic_covariance(double amplitude_g) {
    NoiseCovariance out;
    out.sigma = amplitude_g * amplitude_g * Eigen::Matrix3d::Identity();
    return out;
}

struct OptimalAngle {
    double theta_deg = 90.0;
    double residual_variance = 0.0;   // (rad/us)^2 at the optimum
    double variance_at_90 = 0.0;
    bool flat = false;                // objective flat over the search window
};

// Golden-section minimization of <dE^2>(theta_B) over [88, 92] deg using the
// exact eigensystem at each angle, tolerance 1e-4 deg.
inline OptimalAngle optimal_off_angle(const PhysicalConstants& c, double magnitude_g,
                                      Transition t, const NoiseCovariance& noise) {
    noise.validate();
    auto variance_at = [&](double theta) {
        return delta_e_variance(c, solve_electron(c, FieldConfig{magnitude_g, theta}),
                                t, noise);
    };
    double a = 88.0, b = 92.0;
    OptimalAngle out;
    out.variance_at_90 = variance_at(90.0);

    double probe_min = out.variance_at_90, probe_max = out.variance_at_90;
    for (double th = a; th <= b; th += 0.25) {
        const double v = variance_at(th);
        probe_min = std::min(probe_min, v);
        probe_max = std::max(probe_max, v);
    }
    if (probe_max - probe_min <= 1e-9 * std::max(probe_max, 1e-300)) {
        out.flat = true;
        out.theta_deg = 90.0;
        out.residual_variance = out.variance_at_90;
        return out;
    }

    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = variance_at(x1), f2 = variance_at(x2);
    while (b - a > 1e-4) {
        if (f1 < f2) { b = x2; x2 = x1; f2 = f1; x1 = b - gr * (b - a); f1 = variance_at(x1); }
        else { a = x1; x1 = x2; f1 = f2; x2 = a + gr * (b - a); f2 = variance_at(x2); }
    }
    out.theta_deg = 0.5 * (a + b);
    out.residual_variance = variance_at(out.theta_deg);
    return out;
}

struct SmallAngleCoefficients {
    double k_per_deg = 0.0;   // <Sz>_- = k * dtheta
    double sx_c = 0.0;        // |<Sx>_0| at 90 deg
};

inline SmallAngleCoefficients small_angle_coefficients(const PhysicalConstants& c,
                                                       double magnitude_g) {
    const double h = 1e-3;
    auto sz_minus = [&](double th) {
        return solve_electron(c, FieldConfig{magnitude_g, th}).s(StateLabel::minus).z();
    };
    const double d1 = (sz_minus(90.0 + h) - sz_minus(90.0 - h)) / (2 * h);
    const double d2 = (sz_minus(90.0 + 2 * h) - sz_minus(90.0 - 2 * h)) / (4 * h);
    SmallAngleCoefficients out;
    out.k_per_deg = (4.0 * d1 - d2) / 3.0;
    out.sx_c = std::abs(
        solve_electron(c, FieldConfig{magnitude_g, 90.0}).s(StateLabel::zero).x());
    return out;
}

}  // namespace nvsim
