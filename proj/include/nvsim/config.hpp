// config.hpp — run configuration: JSON schema (versioned, strict keys),
// parsing with located errors, and normalized re-emission.

#pragma once

#include "nvsim/lindblad.hpp"
#include "nvsim/noise.hpp"
#include "nvsim/sensitivity.hpp"
#include "nvsim/table.hpp"

#include <json.hpp>

#include <optional>
#include <set>
#include <string>

namespace nvsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Model {
    eigensweep,
    hyperfine,
    echo_closed,
    echo_exact,
    echo_lindblad,
    sensitivity,
    noise_variance,
    optimal_angle,
};

inline const char* to_string(Model m) {
    switch (m) {
        case Model::eigensweep: return "eigensweep";
        case Model::hyperfine: return "hyperfine";
        case Model::echo_closed: return "echo_closed";
        case Model::echo_exact: return "echo_exact";
        case Model::echo_lindblad: return "echo_lindblad";
        case Model::sensitivity: return "sensitivity";
        case Model::noise_variance: return "noise_variance";
        case Model::optimal_angle: return "optimal_angle";
    }
    return "?";
}

struct Range {
    double start = 0.0;
    double stop = 0.0;
    int count = 1;

    std::vector<double> points() const {
        std::vector<double> out;
        out.reserve(count);
        for (int i = 0; i < count; ++i)
            out.push_back(count == 1 ? start
                                     : start + (stop - start) * i / double(count - 1));
        return out;
    }
};

enum class NoiseKind { none, line, dipolar, isotropic };

struct NoiseConfig {
    NoiseKind kind = NoiseKind::none;
    double angle_deg = -45.0;                    // line
    std::optional<double> amplitude_g;           // line / isotropic covariance
    std::optional<double> gamma_per_us;          // line / isotropic collapse rate
    Eigen::Vector3d direction_u{0, 0, 1};        // dipolar
    double prefactor_ds_g = 0.0;                 // dipolar
};

enum class SensitivityMethod { nuclear_assisted, conventional };

struct SensitivityConfig {
    SensitivityMethod method = SensitivityMethod::nuclear_assisted;
    std::optional<double> eta_bz_nt;   // conventional fixed-eta_Bz mode
};

struct RunConfig {
    Model model = Model::eigensweep;
    PhysicalConstants constants;
    double magnitude_g = 65.0;
    Range theta_deg{90.0, 90.0, 1};
    Range tau_us{0.0, 0.0, 1};
    bool has_tau = false;
    Transition transition = Transition::minus_zero;
    std::optional<ReadoutParams> readout;
    SensitivityConfig sensitivity;
    NoiseConfig noise;
    std::string output_path = "-";
    OutputFormat output_format = OutputFormat::csv;

    NoiseCovariance noise_covariance() const;
    CollapseMode collapse_mode() const;
    nlohmann::json to_json() const;
};

namespace detail {

using nlohmann::json;

inline void require_keys(const json& obj, const std::string& path,
                         const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("config: unknown key '" + path + it.key() + "'");
}

inline double get_number(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key))
        throw ConfigError("config: missing required key '" + path + key + "'");
    if (!obj.at(key).is_number())
        throw ConfigError("config: '" + path + key + "' must be a number");
    return obj.at(key).get<double>();
}

inline Range parse_range(const json& v, const std::string& path) {
    if (v.is_number()) return {v.get<double>(), v.get<double>(), 1};
    if (!v.is_object())
        throw ConfigError("config: '" + path + "' must be a number or {start, stop, count}");
    require_keys(v, path + ".", {"start", "stop", "count"});
    Range r;
    r.start = get_number(v, path + ".", "start");
    r.stop = get_number(v, path + ".", "stop");
    if (!v.contains("count") || !v.at("count").is_number_integer())
        throw ConfigError("config: '" + path + ".count' must be an integer");
    r.count = v.at("count").get<int>();
    if (r.count < 1)
        throw ConfigError("config: '" + path + ".count' must be >= 1");
    if (r.start > r.stop)
        throw ConfigError("config: '" + path + "' requires start <= stop");
    if (r.count == 1 && r.start != r.stop)
        throw ConfigError("config: '" + path + "' with count=1 requires start == stop");
    return r;
}

inline Model parse_model(const std::string& s) {
    for (Model m : {Model::eigensweep, Model::hyperfine, Model::echo_closed,
                    Model::echo_exact, Model::echo_lindblad, Model::sensitivity,
                    Model::noise_variance, Model::optimal_angle})
        if (s == to_string(m)) return m;
    throw ConfigError("config: unknown model '" + s + "'");
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: parse error at byte " + std::to_string(e.byte) + ": " +
                          e.what());
    }
    if (!j.is_object()) throw ConfigError("config: document must be a JSON object");
    detail::require_keys(j, "", {"schema", "model", "constants", "field", "tau_us",
                                 "transition", "readout", "sensitivity", "noise", "output"});

    if (!j.contains("schema") || !j.at("schema").is_number_integer() ||
        j.at("schema").get<int>() != 1)
        throw ConfigError("config: requires 'schema': 1");
    if (!j.contains("model") || !j.at("model").is_string())
        throw ConfigError("config: missing required key 'model'");

    RunConfig cfg;
    cfg.model = detail::parse_model(j.at("model").get<std::string>());

    if (j.contains("constants")) {
        const json& c = j.at("constants");
        detail::require_keys(c, "constants.",
                             {"D_gs_MHz", "gamma_B_MHz_per_G", "gamma_N_kHz_per_G",
                              "A_xx_MHz", "A_zz_MHz"});
        if (c.contains("D_gs_MHz")) cfg.constants.d_gs_mhz = c.at("D_gs_MHz").get<double>();
        if (c.contains("gamma_B_MHz_per_G"))
            cfg.constants.gamma_b_mhz_per_g = c.at("gamma_B_MHz_per_G").get<double>();
        if (c.contains("gamma_N_kHz_per_G"))
            cfg.constants.gamma_n_khz_per_g = c.at("gamma_N_kHz_per_G").get<double>();
        if (c.contains("A_xx_MHz")) cfg.constants.a_xx_mhz = c.at("A_xx_MHz").get<double>();
        if (c.contains("A_zz_MHz")) cfg.constants.a_zz_mhz = c.at("A_zz_MHz").get<double>();
        try {
            cfg.constants.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config: constants: ") + e.what());
        }
    }

    if (!j.contains("field"))
        throw ConfigError("config: missing required key 'field'");
    {
        const json& f = j.at("field");
        detail::require_keys(f, "field.", {"magnitude_G", "theta_deg"});
        cfg.magnitude_g = detail::get_number(f, "field.", "magnitude_G");
        if (cfg.magnitude_g < 0)
            throw ConfigError("config: 'field.magnitude_G' must be >= 0");
        if (!f.contains("theta_deg"))
            throw ConfigError("config: missing required key 'field.theta_deg'");
        cfg.theta_deg = detail::parse_range(f.at("theta_deg"), "field.theta_deg");
        if (cfg.theta_deg.start < 0.0 || cfg.theta_deg.stop > 180.0)
            throw ConfigError("config: 'field.theta_deg' must lie in [0, 180]");
    }

    if (j.contains("tau_us")) {
        cfg.tau_us = detail::parse_range(j.at("tau_us"), "tau_us");
        cfg.has_tau = true;
        if (cfg.tau_us.start < 0.0)
            throw ConfigError("config: 'tau_us' must be >= 0");
    }

    if (j.contains("transition")) {
        const std::string t = j.at("transition").get<std::string>();
        if (t == "minus_zero") cfg.transition = Transition::minus_zero;
        else if (t == "plus_zero") cfg.transition = Transition::plus_zero;
        else throw ConfigError("config: unknown transition '" + t + "'");
    }

    if (j.contains("readout")) {
        const json& r = j.at("readout");
        detail::require_keys(r, "readout.",
                             {"fluorescence_kcps", "contrast", "readout_ns", "init_us"});
        ReadoutParams rp;
        rp.fluorescence_kcps = detail::get_number(r, "readout.", "fluorescence_kcps");
        rp.contrast = detail::get_number(r, "readout.", "contrast");
        rp.readout_ns = detail::get_number(r, "readout.", "readout_ns");
        rp.init_us = detail::get_number(r, "readout.", "init_us");
        try {
            rp.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config: readout: ") + e.what());
        }
        cfg.readout = rp;
    }

    if (j.contains("sensitivity")) {
        const json& s = j.at("sensitivity");
        detail::require_keys(s, "sensitivity.", {"method", "eta_Bz_nT"});
        if (s.contains("method")) {
            const std::string m = s.at("method").get<std::string>();
            if (m == "nuclear_assisted")
                cfg.sensitivity.method = SensitivityMethod::nuclear_assisted;
            else if (m == "conventional")
                cfg.sensitivity.method = SensitivityMethod::conventional;
            else throw ConfigError("config: unknown sensitivity.method '" + m + "'");
        }
        if (s.contains("eta_Bz_nT"))
            cfg.sensitivity.eta_bz_nt = s.at("eta_Bz_nT").get<double>();
    }

    if (j.contains("noise")) {
        const json& n = j.at("noise");
        detail::require_keys(n, "noise.",
                             {"kind", "angle_deg", "amplitude_G", "gamma_per_us", "u",
                              "prefactor_DS_G"});
        const std::string kind = n.contains("kind") ? n.at("kind").get<std::string>() : "none";
        if (kind == "none") cfg.noise.kind = NoiseKind::none;
        else if (kind == "line") cfg.noise.kind = NoiseKind::line;
        else if (kind == "dipolar") cfg.noise.kind = NoiseKind::dipolar;
        else if (kind == "isotropic") cfg.noise.kind = NoiseKind::isotropic;
        else throw ConfigError("config: unknown noise.kind '" + kind + "'");
        if (n.contains("angle_deg")) cfg.noise.angle_deg = n.at("angle_deg").get<double>();
        if (n.contains("amplitude_G"))
            cfg.noise.amplitude_g = n.at("amplitude_G").get<double>();
        if (n.contains("gamma_per_us"))
            cfg.noise.gamma_per_us = n.at("gamma_per_us").get<double>();
        if (n.contains("u")) {
            const auto& u = n.at("u");
            if (!u.is_array() || u.size() != 3)
                throw ConfigError("config: 'noise.u' must be a 3-vector");
            cfg.noise.direction_u = {u[0].get<double>(), u[1].get<double>(), u[2].get<double>()};
        }
        if (n.contains("prefactor_DS_G"))
            cfg.noise.prefactor_ds_g = n.at("prefactor_DS_G").get<double>();
    }

    if (j.contains("output")) {
        const json& o = j.at("output");
        detail::require_keys(o, "output.", {"path", "format"});
        if (o.contains("path")) cfg.output_path = o.at("path").get<std::string>();
        if (o.contains("format")) {
            const std::string fmt = o.at("format").get<std::string>();
            if (fmt == "csv") cfg.output_format = OutputFormat::csv;
            else if (fmt == "json") cfg.output_format = OutputFormat::json;
            else throw ConfigError("config: unknown output.format '" + fmt + "'");
        }
    }

    // model-required sections
    if (cfg.model == Model::sensitivity && !cfg.readout)
        throw ConfigError("config: model 'sensitivity' requires section 'readout'");
    if (cfg.model == Model::sensitivity && !cfg.has_tau)
        throw ConfigError("config: model 'sensitivity' requires 'tau_us'");
    if ((cfg.model == Model::echo_closed || cfg.model == Model::echo_exact ||
         cfg.model == Model::echo_lindblad) && !cfg.has_tau)
        throw ConfigError("config: echo models require 'tau_us'");
    if (cfg.model == Model::echo_lindblad) {
        if (cfg.noise.kind != NoiseKind::line && cfg.noise.kind != NoiseKind::isotropic)
            throw ConfigError("config: model 'echo_lindblad' requires noise of kind "
                              "'line' or 'isotropic'");
        if (!cfg.noise.gamma_per_us)
            throw ConfigError("config: model 'echo_lindblad' requires 'noise.gamma_per_us'");
    }
    if (cfg.model == Model::noise_variance || cfg.model == Model::optimal_angle) {
        if (cfg.noise.kind == NoiseKind::none)
            throw ConfigError("config: model '" + std::string(to_string(cfg.model)) +
                              "' requires section 'noise'");
        cfg.noise_covariance();  // validates kind-specific parameters
    }
    return cfg;
}

inline NoiseCovariance RunConfig::noise_covariance() const {
    switch (noise.kind) {
        case NoiseKind::line:
            if (!noise.amplitude_g)
                throw ConfigError("config: line-noise covariance requires 'noise.amplitude_G'");
            return line_noise_covariance(noise.angle_deg, *noise.amplitude_g);
        case NoiseKind::dipolar: {
            DipolarSource src{noise.direction_u.normalized(), noise.prefactor_ds_g};
            return dipolar_covariance(src);
        }
        case NoiseKind::isotropic:
            if (!noise.amplitude_g)
                throw ConfigError("config: isotropic covariance requires 'noise.amplitude_G'");
            return isotropic_covariance(*noise.amplitude_g);
        case NoiseKind::none:
            break;
    }
    throw ConfigError("config: no noise covariance configured");
}

inline CollapseMode RunConfig::collapse_mode() const {
    if (!noise.gamma_per_us)
        throw ConfigError("config: collapse mode requires 'noise.gamma_per_us'");
    if (noise.kind == NoiseKind::line)
        return CollapseMode::line(noise.angle_deg, *noise.gamma_per_us);
    if (noise.kind == NoiseKind::isotropic)
        return CollapseMode::isotropic(*noise.gamma_per_us);
    throw ConfigError("config: collapse mode requires line or isotropic noise");
}

inline nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["schema"] = 1;
    j["model"] = to_string(model);
    j["constants"] = {{"D_gs_MHz", constants.d_gs_mhz},
                      {"gamma_B_MHz_per_G", constants.gamma_b_mhz_per_g},
                      {"gamma_N_kHz_per_G", constants.gamma_n_khz_per_g},
                      {"A_xx_MHz", constants.a_xx_mhz},
                      {"A_zz_MHz", constants.a_zz_mhz}};
    j["field"] = {{"magnitude_G", magnitude_g},
                  {"theta_deg", {{"start", theta_deg.start},
                                 {"stop", theta_deg.stop},
                                 {"count", theta_deg.count}}}};
    if (has_tau)
        j["tau_us"] = {{"start", tau_us.start}, {"stop", tau_us.stop}, {"count", tau_us.count}};
    j["transition"] = to_string(transition);
    if (readout)
        j["readout"] = {{"fluorescence_kcps", readout->fluorescence_kcps},
                        {"contrast", readout->contrast},
                        {"readout_ns", readout->readout_ns},
                        {"init_us", readout->init_us}};
    if (model == Model::sensitivity) {
        j["sensitivity"]["method"] = sensitivity.method == SensitivityMethod::nuclear_assisted
                                         ? "nuclear_assisted"
                                         : "conventional";
        if (sensitivity.eta_bz_nt) j["sensitivity"]["eta_Bz_nT"] = *sensitivity.eta_bz_nt;
    }
    if (noise.kind != NoiseKind::none) {
        nlohmann::json n;
        switch (noise.kind) {
            case NoiseKind::line: n["kind"] = "line"; n["angle_deg"] = noise.angle_deg; break;
            case NoiseKind::dipolar:
                n["kind"] = "dipolar";
                n["u"] = {noise.direction_u.x(), noise.direction_u.y(), noise.direction_u.z()};
                n["prefactor_DS_G"] = noise.prefactor_ds_g;
                break;
            case NoiseKind::isotropic: n["kind"] = "isotropic"; break;
            case NoiseKind::none: break;
        }
        if (noise.amplitude_g) n["amplitude_G"] = *noise.amplitude_g;
        if (noise.gamma_per_us) n["gamma_per_us"] = *noise.gamma_per_us;
        j["noise"] = n;
    }
    j["output"] = {{"path", output_path},
                   {"format", output_format == OutputFormat::csv ? "csv" : "json"}};
    return j;
}

}  // namespace nvsim
