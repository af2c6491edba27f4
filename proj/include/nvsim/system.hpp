// system.hpp — physical constants and bias-field configuration for the
// NV electron / 15N nuclear spin system.
//
// Unit conventions used throughout the library:
//   couplings enter in MHz (gamma_N in kHz/G) and are converted to angular
//   frequency rad/us internally, times are in us, fields in Gauss, angles in
//   degrees at API boundaries and radians internally.

#pragma once

#include "nvsim/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace nvsim {

struct PhysicalConstants {
    double d_gs_mhz = 2870.0;            // zero-field splitting
    double gamma_b_mhz_per_g = 2.8;      // electron gyromagnetic ratio
    double gamma_n_khz_per_g = 0.4316;   // 15N nuclear gyromagnetic ratio
    double a_xx_mhz = 3.65;              // hyperfine tensor, A_xx = A_yy
    double a_zz_mhz = 3.03;

    double a_yy_mhz() const { return a_xx_mhz; }
    double gamma_n_mhz_per_g() const { return gamma_n_khz_per_g * 1e-3; }

    void validate() const {
        if (d_gs_mhz <= 0.0 || gamma_b_mhz_per_g <= 0.0 || gamma_n_khz_per_g <= 0.0 ||
            a_xx_mhz <= 0.0 || a_zz_mhz <= 0.0)
            throw std::invalid_argument("PhysicalConstants: all constants must be positive");
    }
};

// Bias field of magnitude |B| tilted by theta_B from the NV axis z, lying in
// the XZ plane with B_x >= 0 (theta_B in [0, 180] degrees).
struct FieldConfig {
    double magnitude_g = 0.0;
    double theta_deg = 90.0;

    double bx() const { return magnitude_g * std::sin(theta_deg * deg_to_rad); }
    double bz() const { return magnitude_g * std::cos(theta_deg * deg_to_rad); }

    void validate() const {
        if (magnitude_g < 0.0)
            throw std::invalid_argument("FieldConfig: magnitude must be >= 0");
        if (theta_deg < 0.0 || theta_deg > 180.0)
            throw std::invalid_argument("FieldConfig: theta_B must lie in [0, 180] degrees");
    }
};

enum class StateLabel { zero = 0, minus = 1, plus = 2 };

enum class Transition { minus_zero, plus_zero };

inline StateLabel excited_label(Transition t) {
    return t == Transition::minus_zero ? StateLabel::minus : StateLabel::plus;
}

inline const char* to_string(StateLabel l) {
    switch (l) {
        case StateLabel::zero: return "zero";
        case StateLabel::minus: return "minus";
        case StateLabel::plus: return "plus";
    }
    return "?";
}

inline const char* to_string(Transition t) {
    return t == Transition::minus_zero ? "minus_zero" : "plus_zero";
}

}  // namespace nvsim
