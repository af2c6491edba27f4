// runner.hpp — sweep orchestration: fan grid points out to a worker pool
// (capped by NV_SIM_THREADS, 0 = auto) and assemble rows in deterministic
// order regardless of completion order.

#pragma once

#include "nvsim/config.hpp"
#include "nvsim/table.hpp"
#include "nvsim/version.hpp"

#include <atomic>
#include <cstdlib>
#include <ctime>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace nvsim {

namespace detail {

inline unsigned worker_count(std::size_t jobs) {
    unsigned n = 0;
    if (const char* env = std::getenv("NV_SIM_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) n = static_cast<unsigned>(v);
    }
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(n, jobs));
}

// Evaluate fn(i) for i in [0, jobs); results land in slot order.
template <typename Fn>
void parallel_for(std::size_t jobs, Fn&& fn) {
    const unsigned workers = worker_count(jobs);
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= jobs) return;
                try {
                    fn(i);
                } catch (...) {
                    std::scoped_lock lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

inline nlohmann::json make_metadata(const RunConfig& cfg, bool reproducible) {
    nlohmann::json meta;
    meta["config"] = cfg.to_json();
    meta["model"] = to_string(cfg.model);
    meta["tool_version"] = version;
    if (!reproducible) {
        const std::time_t now = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        meta["generated_at"] = buf;
    }
    return meta;
}

inline ResultTable run_eigensweep(const RunConfig& cfg) {
    ResultTable t;
    t.columns = {{"theta_B", "deg"},
                 {"E_zero", "MHz"}, {"E_minus", "MHz"}, {"E_plus", "MHz"},
                 {"Sx_zero", "hbar"}, {"Sy_zero", "hbar"}, {"Sz_zero", "hbar"},
                 {"Sx_minus", "hbar"}, {"Sy_minus", "hbar"}, {"Sz_minus", "hbar"},
                 {"Sx_plus", "hbar"}, {"Sy_plus", "hbar"}, {"Sz_plus", "hbar"},
                 {"hybridization_eps", "1"}};
    const std::vector<double> thetas = cfg.theta_deg.points();
    const std::vector<EigenSystem> sweep =
        thetas.size() > 1 ? sweep_eigensystem(cfg.constants, thetas, cfg.magnitude_g)
                          : std::vector<EigenSystem>{solve_electron(
                                cfg.constants, FieldConfig{cfg.magnitude_g, thetas[0]})};
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        const EigenSystem& es = sweep[i];
        std::vector<double> row{thetas[i]};
        for (int l = 0; l < 3; ++l) row.push_back(es.energy_mhz[l]);
        for (int l = 0; l < 3; ++l)
            for (int ax = 0; ax < 3; ++ax) row.push_back(es.spin[l](ax));
        row.push_back(es.hybridization_eps);
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline ResultTable run_hyperfine(const RunConfig& cfg) {
    ResultTable t;
    t.columns = {{"theta_B", "deg"},
                 {"omega_zero", "MHz"}, {"omega_minus", "MHz"}, {"omega_plus", "MHz"},
                 {"theta_I_zero", "deg"}, {"theta_I_minus", "deg"}, {"theta_I_plus", "deg"},
                 {"gamma_theta", "rad/us/deg"}, {"gamma_theta_reliable", "bool"}};
    const std::vector<double> thetas = cfg.theta_deg.points();
    t.rows.resize(thetas.size());
    parallel_for(thetas.size(), [&](std::size_t i) {
        const FieldConfig f{cfg.magnitude_g, thetas[i]};
        const EigenSystem es = solve_electron(cfg.constants, f);
        std::vector<double> row{thetas[i]};
        std::array<NuclearLevels, 3> levels;
        for (int l = 0; l < 3; ++l)
            levels[l] = nuclear_hamiltonian(cfg.constants, f, es, StateLabel(l));
        for (int l = 0; l < 3; ++l) row.push_back(levels[l].splitting_omega / two_pi);
        for (int l = 0; l < 3; ++l) row.push_back(levels[l].theta_i_deg);
        const GammaTheta g = gamma_theta(cfg.constants, cfg.magnitude_g, thetas[i]);
        row.push_back(g.value);
        row.push_back(g.reliable ? 1.0 : 0.0);
        t.rows[i] = std::move(row);
    });
    return t;
}

inline ResultTable run_echo(const RunConfig& cfg) {
    ResultTable t;
    t.columns = {{"theta_B", "deg"}, {"tau", "us"}, {"P", "amplitude"}};
    const std::vector<double> thetas = cfg.theta_deg.points();
    const std::vector<double> taus = cfg.tau_us.points();
    std::vector<std::vector<double>> values(thetas.size());
    parallel_for(thetas.size(), [&](std::size_t i) {
        const FieldConfig f{cfg.magnitude_g, thetas[i]};
        std::vector<double>& out = values[i];
        out.reserve(taus.size());
        if (cfg.model == Model::echo_closed) {
            const EigenSystem es = solve_electron(cfg.constants, f);
            const NuclearLevels n0 =
                nuclear_hamiltonian(cfg.constants, f, es, StateLabel::zero);
            const NuclearLevels ne =
                nuclear_hamiltonian(cfg.constants, f, es, excited_label(cfg.transition));
            for (double tau : taus)
                out.push_back(echo_closed_form_from_levels(n0, ne, tau));
        } else if (cfg.model == Model::echo_exact) {
            const detail::EchoSetup setup =
                detail::make_echo_setup(cfg.constants, f, cfg.transition);
            for (double tau : taus) out.push_back(detail::run_echo(setup, tau));
        } else {
            const detail::LindbladEchoSetup setup = detail::make_lindblad_setup(
                cfg.constants, f, cfg.transition, cfg.collapse_mode());
            for (double tau : taus) out.push_back(detail::run_lindblad_echo(setup, tau));
        }
    });
    for (std::size_t i = 0; i < thetas.size(); ++i)
        for (std::size_t j = 0; j < taus.size(); ++j)
            t.rows.push_back({thetas[i], taus[j], values[i][j]});
    return t;
}

inline ResultTable run_sensitivity(const RunConfig& cfg) {
    ResultTable t;
    const bool vs_theta = cfg.theta_deg.count > 1;
    const std::vector<double> axis =
        vs_theta ? cfg.theta_deg.points() : cfg.tau_us.points();
    const bool nuclear = cfg.sensitivity.method == SensitivityMethod::nuclear_assisted;
    t.columns = {vs_theta ? Column{"theta_B", "deg"} : Column{"tau", "us"},
                 {"eta", "mdeg/sqrtHz"}};
    if (nuclear) t.columns.push_back({"eta_star", "mdeg/sqrtHz"});
    t.rows.resize(axis.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    parallel_for(axis.size(), [&](std::size_t i) {
        const double theta = vs_theta ? axis[i] : cfg.theta_deg.start;
        const double tau = vs_theta ? cfg.tau_us.start : axis[i];
        const FieldConfig f{cfg.magnitude_g, theta};
        std::vector<double> row{axis[i]};
        if (nuclear) {
            try {
                row.push_back(eta_nuclear(cfg.constants, f, *cfg.readout, tau));
            } catch (const SensitivityLost&) {
                row.push_back(nan);
            }
            try {
                row.push_back(eta_star_nuclear(cfg.constants, f, *cfg.readout, tau));
            } catch (const SensitivityLost&) {
                row.push_back(nan);
            }
        } else {
            try {
                row.push_back(eta_conventional(cfg.constants, f, *cfg.readout, tau,
                                               cfg.sensitivity.eta_bz_nt));
            } catch (const SensitivityLost&) {
                row.push_back(nan);
            } catch (const std::invalid_argument&) {
                row.push_back(nan);
            }
        }
        t.rows[i] = std::move(row);
    });
    return t;
}

inline ResultTable run_noise_variance(const RunConfig& cfg) {
    ResultTable t;
    t.columns = {{"theta_B", "deg"},
                 {"var_minus_zero", "(rad/us)^2"},
                 {"var_plus_zero", "(rad/us)^2"}};
    const NoiseCovariance sigma = cfg.noise_covariance();
    const std::vector<double> thetas = cfg.theta_deg.points();
    t.rows.resize(thetas.size());
    parallel_for(thetas.size(), [&](std::size_t i) {
        const EigenSystem es =
            solve_electron(cfg.constants, FieldConfig{cfg.magnitude_g, thetas[i]});
        t.rows[i] = {thetas[i],
                     delta_e_variance(cfg.constants, es, Transition::minus_zero, sigma),
                     delta_e_variance(cfg.constants, es, Transition::plus_zero, sigma)};
    });
    return t;
}

inline ResultTable run_optimal_angle(const RunConfig& cfg) {
    ResultTable t;
    t.columns = {{"theta_opt", "deg"},
                 {"residual_variance", "(rad/us)^2"},
                 {"variance_at_90", "(rad/us)^2"},
                 {"flat", "bool"}};
    const OptimalAngle oa = optimal_off_angle(cfg.constants, cfg.magnitude_g,
                                              cfg.transition, cfg.noise_covariance());
    t.rows.push_back({oa.theta_deg, oa.residual_variance, oa.variance_at_90,
                      oa.flat ? 1.0 : 0.0});
    return t;
}

}  // namespace detail

inline ResultTable run(const RunConfig& cfg, bool reproducible = false) {
    ResultTable t;
    switch (cfg.model) {
        case Model::eigensweep: t = detail::run_eigensweep(cfg); break;
        case Model::hyperfine: t = detail::run_hyperfine(cfg); break;
        case Model::echo_closed:
        case Model::echo_exact:
        case Model::echo_lindblad: t = detail::run_echo(cfg); break;
        case Model::sensitivity: t = detail::run_sensitivity(cfg); break;
        case Model::noise_variance: t = detail::run_noise_variance(cfg); break;
        case Model::optimal_angle: t = detail::run_optimal_angle(cfg); break;
    }
    t.metadata = detail::make_metadata(cfg, reproducible);
    t.validate();
    return t;
}

}  // namespace nvsim
