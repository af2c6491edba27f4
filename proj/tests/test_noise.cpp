#include "nvsim/noise.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace nvsim;
using Catch::Approx;

namespace {
const PhysicalConstants kC;

Eigen::Vector3d random_unit(std::mt19937& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Vector3d u{n(rng), n(rng), n(rng)};
    return u.normalized();
}
}  // namespace

TEST_CASE("isotropic variance at 90 deg reduces to the Sx term") {
    const EigenSystem es = solve_electron(kC, {65.0, 90.0});
    const NoiseCovariance sigma = isotropic_covariance(1.3);
    const double v = delta_e_variance(kC, es, Transition::minus_zero, sigma);
    const double gb = two_pi * kC.gamma_b_mhz_per_g;
    const double sx0 = es.s(StateLabel::zero).x();
    CHECK(v == Approx(1.3 * 1.3 * gb * gb * sx0 * sx0).epsilon(1e-9));
}

TEST_CASE("variance reproduces the explicit covariance expansion") {
    const EigenSystem es = solve_electron(kC, {65.0, 90.4});
    NoiseCovariance sigma;
    sigma.sigma << 0.8, 0.0, -0.3, 0.0, 0.1, 0.0, -0.3, 0.0, 0.5;
    const double gb = two_pi * kC.gamma_b_mhz_per_g;
    for (Transition t : {Transition::minus_zero, Transition::plus_zero}) {
        const Eigen::Vector3d d = es.s(excited_label(t)) - es.s(StateLabel::zero);
        const double expect =
            gb * gb * (sigma.sigma(0, 0) * d.x() * d.x() + sigma.sigma(2, 2) * d.z() * d.z() +
                       sigma.sigma(1, 1) * d.y() * d.y() +
                       2.0 * sigma.sigma(0, 2) * d.x() * d.z());
        CHECK(delta_e_variance(kC, es, t, sigma) == Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("cross-correlation terms have opposite sign for the two transitions") {
    NoiseCovariance corr;  // pure off-diagonal piece plus enough diagonal to stay PSD
    corr.sigma << 1.0, 0.0, -0.9, 0.0, 0.0, 0.0, -0.9, 0.0, 1.0;
    NoiseCovariance uncorr;
    uncorr.sigma << 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0;
    const EigenSystem es = solve_electron(kC, {65.0, 90.4});
    const double dm = delta_e_variance(kC, es, Transition::minus_zero, corr) -
                      delta_e_variance(kC, es, Transition::minus_zero, uncorr);
    const double dp = delta_e_variance(kC, es, Transition::plus_zero, corr) -
                      delta_e_variance(kC, es, Transition::plus_zero, uncorr);
    CHECK(dm * dp < 0.0);
}

TEST_CASE("variance mirror symmetry: flipping the off-angle flips the cross sign") {
    NoiseCovariance corr;
    corr.sigma << 1.0, 0.0, 0.6, 0.0, 0.0, 0.0, 0.6, 0.0, 1.0;
    NoiseCovariance anti = corr;
    anti.sigma(0, 2) = -0.6;
    anti.sigma(2, 0) = -0.6;
    for (double d : {0.1, 0.3, 0.8}) {
        const EigenSystem above = solve_electron(kC, {65.0, 90.0 + d});
        const EigenSystem below = solve_electron(kC, {65.0, 90.0 - d});
        for (Transition t : {Transition::minus_zero, Transition::plus_zero})
            CHECK(delta_e_variance(kC, above, t, corr) ==
                  Approx(delta_e_variance(kC, below, t, anti)).epsilon(1e-8));
    }
}

TEST_CASE("variance is nonnegative for random PSD covariances") {
    std::mt19937 rng(99);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::Matrix3d a;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) a(i, j) = n(rng);
        NoiseCovariance sigma;
        sigma.sigma = a.transpose() * a;
        const double th = 88.0 + 4.0 * (trial % 17) / 16.0;
        const EigenSystem es = solve_electron(kC, {65.0, th});
        CHECK(delta_e_variance(kC, es, Transition::minus_zero, sigma) >= 0.0);
    }
}

TEST_CASE("dipolar covariance matches the closed forms") {
    const double ds = 0.7;
    const NoiseCovariance z = dipolar_covariance({Eigen::Vector3d::UnitZ(), ds});
    CHECK(z.sigma(0, 0) == Approx(ds * ds).epsilon(1e-12));
    CHECK(z.sigma(1, 1) == Approx(ds * ds).epsilon(1e-12));
    CHECK(z.sigma(2, 2) == Approx(4.0 * ds * ds).epsilon(1e-12));
    CHECK(std::abs(z.sigma(0, 2)) < 1e-15);

    const Eigen::Vector3d diag = Eigen::Vector3d(1, 0, 1).normalized();
    const NoiseCovariance d = dipolar_covariance({diag, ds});
    CHECK(d.sigma(0, 2) == Approx(1.5 * ds * ds).epsilon(1e-12));

    const NoiseCovariance x = dipolar_covariance({Eigen::Vector3d::UnitX(), ds});
    CHECK(x.sigma(0, 0) == Approx(4.0 * ds * ds).epsilon(1e-12));
}

TEST_CASE("dipolar covariance is PSD for random directions") {
    std::mt19937 rng(4);
    for (int trial = 0; trial < 1000; ++trial) {
        const NoiseCovariance sigma = dipolar_covariance({random_unit(rng), 1.0});
        CHECK_NOTHROW(sigma.validate());
    }
    CHECK_THROWS_AS(DipolarSource({Eigen::Vector3d(1, 1, 0), 1.0}).validate(),
                    std::invalid_argument);
}

TEST_CASE("dipolar covariance agrees with a spin-flip Monte Carlo oracle") {
    std::mt19937 rng(2024);
    std::bernoulli_distribution coin(0.5);
    const Eigen::Vector3d u = Eigen::Vector3d(0.3, -0.5, 0.8).normalized();
    const double ds = 1.0;
    const NoiseCovariance analytic = dipolar_covariance({u, ds});

    const int samples = 20000;
    Eigen::Matrix3d mean = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d mean_sq = Eigen::Matrix3d::Zero();
    for (int s = 0; s < samples; ++s) {
        const Eigen::Vector3d spin{coin(rng) ? 1.0 : -1.0, coin(rng) ? 1.0 : -1.0,
                                   coin(rng) ? 1.0 : -1.0};
        Eigen::Vector3d db;
        for (int i = 0; i < 3; ++i) {
            double v = 0.0;
            for (int j = 0; j < 3; ++j)
                v += ((i == j ? 3.0 * u(i) * u(i) - 1.0 : 3.0 * u(i) * u(j))) * spin(j);
            db(i) = ds * v;
        }
        const Eigen::Matrix3d outer = db * db.transpose();
        mean += outer;
        mean_sq += outer.cwiseProduct(outer);
    }
    mean /= samples;
    mean_sq /= samples;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            const double se = std::sqrt(
                std::max(mean_sq(i, j) - mean(i, j) * mean(i, j), 0.0) / samples);
            CHECK(std::abs(mean(i, j) - analytic.sigma(i, j)) <= 4.0 * se + 1e-12);
        }
}

TEST_CASE("averaging dipolar noise over random directions washes out the correlation") {
    std::mt19937 rng(31);
    Eigen::Matrix3d sum = Eigen::Matrix3d::Zero();
    const int n = 10000;
    for (int s = 0; s < n; ++s) sum += dipolar_covariance({random_unit(rng), 1.0}).sigma;
    sum /= n;
    const double diag_mean = (sum(0, 0) + sum(1, 1) + sum(2, 2)) / 3.0;
    CHECK(std::abs(sum(0, 2)) < 0.02 * diag_mean);
}

TEST_CASE("line noise covariance structure") {
    const NoiseCovariance m45 = line_noise_covariance(-45.0, 2.0);
    CHECK(m45.sigma(0, 0) == Approx(2.0).epsilon(1e-12));
    CHECK(m45.sigma(2, 2) == Approx(2.0).epsilon(1e-12));
    CHECK(m45.sigma(0, 2) == Approx(-2.0).epsilon(1e-12));
    // delta Bx + delta Bz = 0 along the fluctuation line
    CHECK((m45.sigma * Eigen::Vector3d(1, 0, 1)).norm() < 1e-12);

    const NoiseCovariance x = line_noise_covariance(0.0, 1.0);
    CHECK(x.sigma(0, 0) == Approx(1.0));
    CHECK(x.sigma.cwiseAbs().sum() == Approx(1.0));

    for (double a : {-45.0, 10.0, 120.0}) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(
            line_noise_covariance(a, 1.0).sigma);
        CHECK(es.eigenvalues()(0) == Approx(0.0).margin(1e-12));
        CHECK(es.eigenvalues()(1) == Approx(0.0).margin(1e-12));
        CHECK(es.eigenvalues()(2) == Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("isotropic noise is decoupled best at 90 deg") {
    const OptimalAngle oa =
        optimal_off_angle(kC, 65.0, Transition::minus_zero, isotropic_covariance(1.0));
    CHECK(std::abs(oa.theta_deg - 90.0) < 2e-4);
    CHECK_FALSE(oa.flat);
}

TEST_CASE("line noise at -45 deg is fully suppressed on opposite sides of 90") {
    const NoiseCovariance sigma = line_noise_covariance(-45.0, 1.0);
    const OptimalAngle minus = optimal_off_angle(kC, 65.0, Transition::minus_zero, sigma);
    const OptimalAngle plus = optimal_off_angle(kC, 65.0, Transition::plus_zero, sigma);
    CHECK(minus.theta_deg > 90.0);
    CHECK(plus.theta_deg < 90.0);
    CHECK(minus.residual_variance <= 1e-6 * minus.variance_at_90);
    CHECK(plus.residual_variance <= 1e-6 * plus.variance_at_90);
}

TEST_CASE("optimal angles sit on opposite sides whenever the correlation is nonzero") {
    for (double angle : {-45.0, 30.0, 120.0}) {
        const NoiseCovariance sigma = line_noise_covariance(angle, 1.0);
        const OptimalAngle minus = optimal_off_angle(kC, 80.0, Transition::minus_zero, sigma);
        const OptimalAngle plus = optimal_off_angle(kC, 80.0, Transition::plus_zero, sigma);
        CHECK((minus.theta_deg - 90.0) * (plus.theta_deg - 90.0) < 0.0);
    }
}

TEST_CASE("a zero covariance is reported as flat") {
    const OptimalAngle oa =
        optimal_off_angle(kC, 65.0, Transition::minus_zero, NoiseCovariance{});
    CHECK(oa.flat);
    CHECK(oa.theta_deg == 90.0);
}

TEST_CASE("small-angle coefficients linearize the variance") {
    const SmallAngleCoefficients sac = small_angle_coefficients(kC, 65.0);
    CHECK(sac.k_per_deg > 0.0);
    CHECK(sac.sx_c > 0.0);

    NoiseCovariance sigma;
    sigma.sigma << 0.7, 0.0, -0.25, 0.0, 0.0, 0.0, -0.25, 0.0, 0.4;
    const double gb = two_pi * kC.gamma_b_mhz_per_g;
    for (double d = -0.2; d <= 0.2001; d += 0.04) {
        const EigenSystem es = solve_electron(kC, {65.0, 90.0 + d});
        const double exact = delta_e_variance(kC, es, Transition::minus_zero, sigma);
        const double lin =
            gb * gb *
            (sac.k_per_deg * sac.k_per_deg * d * d * sigma.sigma(2, 2) +
             sac.sx_c * sac.sx_c * sigma.sigma(0, 0) +
             2.0 * sac.sx_c * sac.k_per_deg * d * sigma.sigma(0, 2));
        CHECK(lin == Approx(exact).epsilon(0.05));
    }
}

TEST_CASE("k stays positive and sxC grows with the field") {
    double prev_sx = 0.0;
    for (double b : {60.0, 80.0, 100.0, 140.0, 200.0}) {
        const SmallAngleCoefficients sac = small_angle_coefficients(kC, b);
        CHECK(sac.k_per_deg > 0.0);
        CHECK(sac.sx_c > prev_sx);
        prev_sx = sac.sx_c;
    }
}

TEST_CASE("covariance validation rejects asymmetric or indefinite input") {
    NoiseCovariance bad;
    bad.sigma << 1.0, 0.5, 0.0, 0.4, 1.0, 0.0, 0.0, 0.0, 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    NoiseCovariance indef;
    indef.sigma << 1.0, 0.0, 0.0, 0.0, -0.5, 0.0, 0.0, 0.0, 1.0;
    CHECK_THROWS_AS(indef.validate(), std::invalid_argument);
}
