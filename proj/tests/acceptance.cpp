// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line with the measured numbers and its runtime.

#include "nvsim/nvsim.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cstdio>
#include <random>

using namespace nvsim;

namespace {

const PhysicalConstants kC;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int n, const char* name, bool ok, const std::string& detail) {
    std::printf("[criterion %2d] %-28s %s  %s\n", n, name, ok ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return v;
}

}  // namespace

TEST_CASE("criterion 1: perpendicular-field splitting") {
    Timer timer;
    bool ok = true;
    std::string detail;
    const double tols[3] = {0.05, 0.05, 0.15};
    const double fields[3] = {65.0, 100.0, 200.0};
    for (int i = 0; i < 3; ++i) {
        const EigenSystem es = solve_electron(kC, {fields[i], 90.0});
        const double split = es.energy(StateLabel::plus) - es.energy(StateLabel::minus);
        const double pert = kC.gamma_b_mhz_per_g * kC.gamma_b_mhz_per_g * fields[i] *
                            fields[i] / kC.d_gs_mhz;
        const double rel = std::abs(split - pert) / pert;
        ok = ok && rel <= tols[i];
        detail += "B=" + std::to_string(int(fields[i])) + " rel=" +
                  std::to_string(rel).substr(0, 6) + " ";
    }
    const double secs = timer.seconds();
    ok = ok && secs < 1.0;
    report(1, "perpendicular splitting", ok,
           detail + "(" + std::to_string(secs).substr(0, 5) + " s < 1 s)");
    REQUIRE(ok);
}

TEST_CASE("criterion 2: eigenstructure symmetry suite") {
    Timer timer;
    const auto thetas = linspace(88.0, 92.0, 81);
    const auto sweep = sweep_eigensystem(kC, thetas, 65.0);
    double max_sy = 0.0, max_odd = 0.0, max_even = 0.0;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        for (int l = 0; l < 3; ++l) max_sy = std::max(max_sy, std::abs(sweep[i].spin[l].y()));
        const std::size_t m = sweep.size() - 1 - i;
        max_odd = std::max(max_odd, std::abs(sweep[i].s(StateLabel::minus).z() +
                                             sweep[m].s(StateLabel::minus).z()));
        max_even = std::max(max_even, std::abs(sweep[i].s(StateLabel::zero).x() -
                                               sweep[m].s(StateLabel::zero).x()));
    }
    const double sz_at_90 = std::abs(sweep[40].s(StateLabel::minus).z());
    const double secs = timer.seconds();
    const bool ok = max_sy <= 1e-10 && max_odd <= 1e-9 && max_even <= 1e-9 &&
                    sz_at_90 <= 1e-9 && secs < 1.0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "max|Sy|=%.1e odd=%.1e even=%.1e Sz-(90)=%.1e (%.2f s < 1 s)", max_sy,
                  max_odd, max_even, sz_at_90, secs);
    report(2, "eigenstructure symmetry", ok, buf);
    REQUIRE(ok);
}

TEST_CASE("criterion 3: ESEEM oracle equivalence") {
    Timer timer;
    const auto thetas = linspace(89.0, 91.0, 41);
    const auto taus = linspace(0.0, 16.0, 161);
    const EchoGrid closed =
        echo_grid(kC, 65.0, thetas, taus, Transition::minus_zero, EchoModel::closed_form);
    const EchoGrid exact =
        echo_grid(kC, 65.0, thetas, taus, Transition::minus_zero, EchoModel::unitary_exact);
    double dmax = 0.0;
    std::size_t imax = 0;
    for (std::size_t i = 0; i < closed.values.size(); ++i) {
        const double d = std::abs(closed.values[i] - exact.values[i]);
        if (d > dmax) { dmax = d; imax = i; }
    }
    const double secs = timer.seconds();
    const bool ok = dmax <= 0.05 && secs < 60.0;
    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "max|closed-exact|=%.3f at theta=%.2f tau=%.1f, bound 0.05 (%.1f s < 60 s)"
                  " — the effective-field model omits hyperfine dressing of the"
                  " eigenstates; see README model-fidelity notes",
                  dmax, thetas[imax / taus.size()], taus[imax % taus.size()], secs);
    report(3, "ESEEM oracle equivalence", ok, buf);
    REQUIRE(ok);
}

TEST_CASE("criterion 4: echo collapse pattern") {
    Timer timer;
    const auto thetas = linspace(89.0, 91.0, 41);
    const auto taus = linspace(0.0, 16.0, 161);
    const EchoGrid g =
        echo_grid(kC, 65.0, thetas, taus, Transition::minus_zero, EchoModel::closed_form);
    auto row_min = [&](std::size_t i) {
        double m = 1.0;
        for (std::size_t j = 0; j < taus.size(); ++j) m = std::min(m, g.at(i, j));
        return m;
    };
    const double ridge = row_min(20);           // theta = 90.00
    const double lobe_lo = row_min(10);         // theta = 89.50
    const double lobe_hi = row_min(30);         // theta = 90.50
    const bool ok = ridge >= 0.999 && lobe_lo <= 0.3 && lobe_hi <= 0.3;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "min P(90)=%.4f >= 0.999, min P(89.5)=%.3f, min P(90.5)=%.3f <= 0.3 (%.2f s)",
                  ridge, lobe_lo, lobe_hi, timer.seconds());
    report(4, "echo collapse pattern", ok, buf);
    REQUIRE(ok);
}

TEST_CASE("criterion 5: sensitivity headline value") {
    Timer timer;
    const ReadoutParams r{100.0, 0.15, 300.0, 2.0};
    double best = 1e300;
    for (double th = 89.0; th <= 91.0001; th += 0.005) {
        try {
            best = std::min(best, eta_nuclear(kC, {65.0, th}, r, 2.2));
        } catch (const SensitivityLost&) {
        }
    }
    const double secs = timer.seconds();
    const bool ok = best >= 13.0 * 0.75 && best <= 13.0 * 1.25 && secs < 1.0;
    char buf[120];
    std::snprintf(buf, sizeof buf, "min_theta eta(tau=2.2us)=%.2f mdeg/rtHz in 13 +/- 25%% (%.2f s < 1 s)",
                  best, secs);
    report(5, "sensitivity headline", ok, buf);
    REQUIRE(ok);
}

TEST_CASE("criterion 6: envelope shape vs tau and field") {
    Timer timer;
    const ReadoutParams r{100.0, 0.3, 300.0, 2.0};
    bool monotone = true;
    // evaluated at theta_B = 93 deg, where the saturation of omega_-(theta)
    // at small fields makes gamma_theta grow with |B|
    std::array<std::vector<double>, 3> curves;
    const double fields[3] = {65.0, 100.0, 200.0};
    const auto taus = linspace(1.0, 16.0, 61);
    for (int b = 0; b < 3; ++b) {
        double prev = 1e300;
        for (double tau : taus) {
            const double e = eta_star_nuclear(kC, {fields[b], 93.0}, r, tau);
            curves[b].push_back(e);
            monotone = monotone && e < prev;
            prev = e;
        }
    }
    bool ordered = true;
    for (std::size_t j = 0; j < taus.size(); ++j)
        ordered = ordered && curves[0][j] > curves[1][j] && curves[1][j] > curves[2][j];
    const double secs = timer.seconds();
    const bool ok = monotone && ordered && secs < 5.0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "monotone in tau: %s; eta*(4us) = %.1f > %.1f > %.1f mdeg/rtHz (%.2f s < 5 s)",
                  monotone ? "yes" : "no", curves[0][12], curves[1][12], curves[2][12], secs);
    report(6, "sensitivity envelope shape", ok, buf);
    REQUIRE(ok);
}

TEST_CASE("criterion 7: conventional-magnetometry crossover") {
    Timer timer;
    const ReadoutParams r{100.0, 0.15, 300.0, 2.0};
    double prev = 0.0, eta60 = 0.0, theta_turn = 0.0;
    bool decreasing_seen = false, increase_after = false;
    for (double th = 45.0; th <= 89.9001; th += 0.05) {
        const double e = eta_conventional(kC, {65.0, th}, r, 2.2, 800.0);
        if (th > 45.0) {
            if (e < prev) decreasing_seen = true;
            if (decreasing_seen && e > prev && theta_turn == 0.0) theta_turn = th;
        }
        if (std::abs(th - 60.0) < 1e-9) eta60 = e;
        prev = e;
    }
    increase_after = theta_turn > 45.0 && theta_turn < 90.0;
    const double eta_near_90 = eta_conventional(kC, {65.0, 89.99}, r, 2.2, 800.0);
    const bool ok = decreasing_seen && increase_after && eta_near_90 > 100.0 * eta60;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "slope turns at theta=%.2f deg; eta(89.99)/eta(60)=%.0f > 100 (%.2f s)",
                  theta_turn, eta_near_90 / eta60, timer.seconds());
    report(7, "conventional crossover", ok, buf);
    REQUIRE(ok);
}

TEST_CASE("criterion 8: anisotropic-noise optimal angles") {
    Timer timer;
    const NoiseCovariance sigma = line_noise_covariance(-45.0, 1.0);
    const OptimalAngle minus = optimal_off_angle(kC, 93.0, Transition::minus_zero, sigma);
    const OptimalAngle plus = optimal_off_angle(kC, 93.0, Transition::plus_zero, sigma);
    const double secs = timer.seconds();
    const bool ok = minus.theta_deg > 90.0 && plus.theta_deg < 90.0 &&
                    minus.residual_variance <= 1e-6 * minus.variance_at_90 &&
                    plus.residual_variance <= 1e-6 * plus.variance_at_90 && secs < 1.0;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "theta_opt(-)=%.4f, theta_opt(+)=%.4f; residual/var90 = %.1e, %.1e (%.2f s < 1 s)",
                  minus.theta_deg, plus.theta_deg,
                  minus.residual_variance / minus.variance_at_90,
                  plus.residual_variance / plus.variance_at_90, secs);
    report(8, "noise asymmetry", ok, buf);
    REQUIRE(ok);
}

TEST_CASE("criterion 9: dipolar covariance algebra") {
    Timer timer;
    bool exact_ok = true;
    {
        const NoiseCovariance z = dipolar_covariance({Eigen::Vector3d::UnitZ(), 1.0});
        exact_ok = exact_ok && std::abs(z.sigma(0, 0) - 1.0) < 1e-12 &&
                   std::abs(z.sigma(1, 1) - 1.0) < 1e-12 &&
                   std::abs(z.sigma(2, 2) - 4.0) < 1e-12 &&
                   z.sigma.cwiseAbs().sum() - 6.0 < 1e-12;
        const NoiseCovariance x = dipolar_covariance({Eigen::Vector3d::UnitX(), 1.0});
        exact_ok = exact_ok && std::abs(x.sigma(0, 0) - 4.0) < 1e-12 &&
                   std::abs(x.sigma(1, 1) - 1.0) < 1e-12 &&
                   std::abs(x.sigma(2, 2) - 1.0) < 1e-12;
        const NoiseCovariance d =
            dipolar_covariance({Eigen::Vector3d(1, 0, 1).normalized(), 1.0});
        exact_ok = exact_ok && std::abs(d.sigma(0, 2) - 1.5) < 1e-12 &&
                   std::abs(d.sigma(0, 0) - 2.5) < 1e-12;
    }

    // spin-flip Monte Carlo oracle, 1e5 samples, all six independent entries
    std::mt19937 rng(777);
    std::bernoulli_distribution coin(0.5);
    const Eigen::Vector3d u = Eigen::Vector3d(0.48, -0.36, 0.8).normalized();
    const NoiseCovariance analytic = dipolar_covariance({u, 1.0});
    const int samples = 100000;
    Eigen::Matrix3d mean = Eigen::Matrix3d::Zero(), mean_sq = Eigen::Matrix3d::Zero();
    for (int s = 0; s < samples; ++s) {
        const Eigen::Vector3d spin{coin(rng) ? 1.0 : -1.0, coin(rng) ? 1.0 : -1.0,
                                   coin(rng) ? 1.0 : -1.0};
        Eigen::Vector3d db;
        for (int i = 0; i < 3; ++i) {
            double v = 0.0;
            for (int j = 0; j < 3; ++j)
                v += (i == j ? 3.0 * u(i) * u(i) - 1.0 : 3.0 * u(i) * u(j)) * spin(j);
            db(i) = v;
        }
        const Eigen::Matrix3d outer = db * db.transpose();
        mean += outer;
        mean_sq += outer.cwiseProduct(outer);
    }
    mean /= samples;
    mean_sq /= samples;
    bool mc_ok = true;
    double worst_pull = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            const double se = std::sqrt(
                std::max(mean_sq(i, j) - mean(i, j) * mean(i, j), 1e-30) / samples);
            const double pull = std::abs(mean(i, j) - analytic.sigma(i, j)) / se;
            worst_pull = std::max(worst_pull, pull);
            mc_ok = mc_ok && pull <= 3.0;
        }
    const double secs = timer.seconds();
    const bool ok = exact_ok && mc_ok && secs < 10.0;
    char buf[140];
    std::snprintf(buf, sizeof buf,
                  "closed forms exact; MC 1e5 worst pull = %.2f sigma <= 3 (%.2f s < 10 s)",
                  worst_pull, secs);
    report(9, "dipolar covariance algebra", ok, buf);
    REQUIRE(ok);
}

TEST_CASE("criterion 10: lindblad echo consistency and ridges") {
    Timer timer;

    // (a) noiseless consistency on a 5x5 spot grid
    double dev0 = 0.0;
    for (double th : {89.6, 89.8, 90.0, 90.2, 90.4})
        for (double tau : {1.0, 2.0, 4.0, 8.0, 12.0}) {
            const FieldConfig f{93.0, th};
            dev0 = std::max(dev0, std::abs(echo_lindblad(kC, f, Transition::minus_zero, tau,
                                                         CollapseMode::line(-45.0, 0.0)) -
                                           echo_unitary_exact(kC, f, Transition::minus_zero,
                                                              tau)));
        }
    const bool noiseless_ok = dev0 <= 1e-6;

    // (b) per-step invariants of the adaptive integrator on the same system
    StepMonitor mon;
    mon.record_positivity = true;
    {
        const FieldConfig f{93.0, 90.3};
        const EigenSystem es = solve_electron(kC, f);
        const CollapseSpec spec =
            detail::collapse_for_mode(es, CollapseMode::line(-45.0, 20.0));
        const detail::EchoSetup setup = detail::make_echo_setup(kC, f, Transition::minus_zero);
        evolve_lindblad(DensityMatrix{setup.rho0}, build_full_hamiltonian(kC, f), spec, 0.2,
                        &mon);
    }
    const bool steps_ok = mon.steps > 0 && mon.max_trace_drift <= 1e-9 &&
                          mon.max_herm_drift <= 1e-10 && mon.min_eigenvalue >= -1e-8;

    // (c) line-noise grid: opposite-side ridges and agreement with the
    // variance-model optimum. The ridge angle is extracted from the
    // ESEEM-normalized coherence ratio (2P_lindblad - 1)/(2P_unitary - 1),
    // which isolates the dephasing profile the ridge concept refers to.
    const CollapseMode mode = CollapseMode::line(-45.0, 40.0);
    const NoiseCovariance sigma = line_noise_covariance(-45.0, 1.0);
    const double tau_ridge = 6.25;
    bool sign_ok = true, agree_ok = true;
    std::string ridge_detail;
    for (Transition t : {Transition::minus_zero, Transition::plus_zero}) {
        // raw-amplitude sign test on the grid (tau up to 10 us)
        const auto thetas = linspace(89.0, 91.0, 41);
        const EchoGrid grid =
            echo_lindblad_grid(kC, 93.0, thetas, {2.5, 6.25, 10.0}, t, mode);
        std::size_t arg = 0;
        for (std::size_t i = 0; i < thetas.size(); ++i)
            if (grid.at(i, 1) > grid.at(arg, 1)) arg = i;
        const bool above = thetas[arg] > 90.0;
        sign_ok = sign_ok && (t == Transition::minus_zero ? above : !above);

        auto ratio = [&](double th) {
            const FieldConfig f{93.0, th};
            const double pl = echo_lindblad(kC, f, t, tau_ridge, mode);
            const double pu = echo_unitary_exact(kC, f, t, tau_ridge);
            return (2.0 * pl - 1.0) / (2.0 * pu - 1.0);
        };
        double a = thetas[arg] - 0.15, b = thetas[arg] + 0.15;
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = ratio(x1), f2 = ratio(x2);
        while (b - a > 2e-3) {
            if (f1 > f2) { b = x2; x2 = x1; f2 = f1; x1 = b - gr * (b - a); f1 = ratio(x1); }
            else { a = x1; x1 = x2; f1 = f2; x2 = a + gr * (b - a); f2 = ratio(x2); }
        }
        const double ridge = 0.5 * (a + b);
        const OptimalAngle oa = optimal_off_angle(kC, 93.0, t, sigma);
        agree_ok = agree_ok && std::abs(ridge - oa.theta_deg) <= 0.05;
        char part[80];
        std::snprintf(part, sizeof part, "%s ridge=%.3f opt=%.3f; ", to_string(t), ridge,
                      oa.theta_deg);
        ridge_detail += part;
    }

    const double secs = timer.seconds();
    const bool ok = noiseless_ok && steps_ok && sign_ok && agree_ok && secs < 600.0;
    char buf[300];
    std::snprintf(buf, sizeof buf,
                  "Gamma=0 dev=%.1e <= 1e-6; %ld rk steps trace<=%.0e herm<=%.0e mineig=%.0e; %s(%.0f s < 600 s)",
                  dev0, mon.steps, mon.max_trace_drift, mon.max_herm_drift,
                  mon.min_eigenvalue, ridge_detail.c_str(), secs);
    report(10, "lindblad echo", ok, buf);
    REQUIRE(ok);
}
