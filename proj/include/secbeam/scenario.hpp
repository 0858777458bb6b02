#pragma once

#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "secbeam/common.hpp"
#include "secbeam/rng.hpp"

namespace secbeam {

struct ScaSettings {
    int max_iterations = 50;
    double convergence_tolerance = 1e-4;
};

struct McSettings {
    int outage_samples = 100000;
    int ball_samples = 2000;
    int ascent_steps = 50;
};

struct NoiseVariances {
    std::vector<double> pr;                        // sigma_l^2, one per PR
    std::vector<double> eve_primary;               // one per primary Eve
    std::vector<std::vector<double>> sr;           // per group, per SR
    std::vector<std::vector<double>> eve_secondary;  // per group, per Eve
};

struct OutageTargets {
    std::vector<double> eps_groups;  // eps_g
    double eps_tilde = 0.99;
};

struct SystemConfig {
    int n_antennas = 8;
    int n_groups = 2;
    std::vector<int> srs_per_group = {2, 2};
    int n_prs = 2;
    std::vector<int> eves_per_group = {2, 2};
    int n_primary_eves = 2;
    double pt_power = 100.0;         // linear (mW); 20 dBm
    double st_power_budget = 100.0;  // linear (mW); 20 dBm
    NoiseVariances noise_variances;  // defaults filled by finalize()
    std::vector<double> min_primary_secrecy = {1.0, 1.0};  // bits/s/Hz
    std::vector<double> normalized_error = {0.05, 0.05};   // delta_bar^2
    OutageTargets outage_targets = {{0.99, 0.99}, 0.99};
    ScaSettings sca;
    McSettings mc;
    std::uint64_t seed = 12345;

    // Fills any noise family left empty with unit variances.
    void finalize() {
        auto fill = [](std::vector<double>& v, int n) {
            if (static_cast<int>(v.size()) == 0) v.assign(n, 1.0);
        };
        fill(noise_variances.pr, n_prs);
        fill(noise_variances.eve_primary, n_primary_eves);
        if (noise_variances.sr.empty()) {
            noise_variances.sr.resize(n_groups);
            for (int g = 0; g < n_groups; ++g)
                noise_variances.sr[g].assign(srs_per_group[g], 1.0);
        }
        if (noise_variances.eve_secondary.empty()) {
            noise_variances.eve_secondary.resize(n_groups);
            for (int g = 0; g < n_groups; ++g)
                noise_variances.eve_secondary[g].assign(eves_per_group[g], 1.0);
        }
    }

    int total_srs() const {
        return std::accumulate(srs_per_group.begin(), srs_per_group.end(), 0);
    }
};

inline const SystemConfig& validate_config(const SystemConfig& cfg) {
    auto fail = [](const std::string& msg) { throw config_error(msg); };
    if (cfg.n_antennas < 1) fail("n_antennas must be positive");
    if (cfg.n_groups < 1) fail("n_groups must be positive");
    if (cfg.n_prs < 1) fail("n_prs must be positive");
    if (cfg.n_primary_eves < 1) fail("n_primary_eves must be positive");
    if (static_cast<int>(cfg.srs_per_group.size()) != cfg.n_groups)
        fail("srs_per_group size must equal n_groups");
    if (static_cast<int>(cfg.eves_per_group.size()) != cfg.n_groups)
        fail("eves_per_group size must equal n_groups");
    for (int m : cfg.srs_per_group)
        if (m < 1) fail("srs_per_group entries must be positive");
    for (int k : cfg.eves_per_group)
        if (k < 1) fail("eves_per_group entries must be positive");
    if (!(cfg.pt_power > 0)) fail("pt_power must be positive");
    if (!(cfg.st_power_budget > 0)) fail("st_power_budget must be positive");
    auto check_noise = [&](const std::vector<double>& v, const char* name) {
        for (double s : v)
            if (!(s > 0)) fail(std::string(name) + " noise variance must be positive");
    };
    check_noise(cfg.noise_variances.pr, "pr");
    check_noise(cfg.noise_variances.eve_primary, "eve_primary");
    for (const auto& v : cfg.noise_variances.sr) check_noise(v, "sr");
    for (const auto& v : cfg.noise_variances.eve_secondary)
        check_noise(v, "eve_secondary");
    if (static_cast<int>(cfg.min_primary_secrecy.size()) != cfg.n_prs)
        fail("min_primary_secrecy size must equal n_prs");
    for (double r : cfg.min_primary_secrecy)
        if (!(r > 0)) fail("min_primary_secrecy must be positive");
    if (static_cast<int>(cfg.normalized_error.size()) != cfg.n_prs)
        fail("normalized_error size must equal n_prs");
    for (double d : cfg.normalized_error)
        if (d < 0 || d >= 1) fail("normalized_error out of [0,1)");
    if (static_cast<int>(cfg.outage_targets.eps_groups.size()) != cfg.n_groups)
        fail("eps_groups size must equal n_groups");
    for (double e : cfg.outage_targets.eps_groups)
        if (!(e > 0 && e < 1)) fail("epsilon_g out of (0,1)");
    if (!(cfg.outage_targets.eps_tilde > 0 && cfg.outage_targets.eps_tilde < 1))
        fail("epsilon_tilde out of (0,1)");
    if (cfg.sca.max_iterations < 1) fail("sca.max_iterations must be positive");
    if (!(cfg.sca.convergence_tolerance > 0))
        fail("sca.convergence_tolerance must be positive");
    if (cfg.mc.outage_samples < 1 || cfg.mc.ball_samples < 1)
        fail("mc sample counts must be positive");
    return cfg;
}

// ---------------------------------------------------------------------------
// Channels

struct ChannelSet {
    std::vector<cplx> h_pr;       // PT -> PR, one per l
    std::vector<cplx> g_eve_p;    // PT -> primary Eve, one per k_p
    std::vector<cvec> f_st_pr_true;  // ST -> PR
    std::vector<cvec> f_st_pr_est;   // estimates f_hat_l
    std::vector<double> f_err_radius;  // delta_l
    std::vector<cvec> f_st_evep;  // ST -> primary Eve
    std::vector<std::vector<cvec>> h_sr;      // ST -> SR, [g][m]
    std::vector<std::vector<cvec>> g_eve_s;   // ST -> secondary Eve, [g][k]
    std::vector<std::vector<cplx>> f_pt_sr;   // PT -> SR, [g][m]
    std::vector<std::vector<cplx>> f_pt_eves;  // PT -> secondary Eve, [g][k]
};

inline ChannelSet draw_channels(const SystemConfig& cfg, std::uint64_t seed) {
    const int n = cfg.n_antennas;
    ChannelSet ch;

    {
        Rng r(substream_seed(seed, "h_pr"));
        for (int l = 0; l < cfg.n_prs; ++l) ch.h_pr.push_back(r.cn01());
    }
    {
        Rng r(substream_seed(seed, "g_eve_p"));
        for (int k = 0; k < cfg.n_primary_eves; ++k)
            ch.g_eve_p.push_back(r.cn01());
    }
    {
        Rng r(substream_seed(seed, "f_st_pr"));
        for (int l = 0; l < cfg.n_prs; ++l)
            ch.f_st_pr_true.push_back(r.cn01_vec(n));
    }
    {
        Rng r(substream_seed(seed, "f_st_evep"));
        for (int k = 0; k < cfg.n_primary_eves; ++k)
            ch.f_st_evep.push_back(r.cn01_vec(n));
    }
    {
        Rng r(substream_seed(seed, "h_sr"));
        ch.h_sr.resize(cfg.n_groups);
        for (int g = 0; g < cfg.n_groups; ++g)
            for (int m = 0; m < cfg.srs_per_group[g]; ++m)
                ch.h_sr[g].push_back(r.cn01_vec(n));
    }
    {
        Rng r(substream_seed(seed, "g_eve_s"));
        ch.g_eve_s.resize(cfg.n_groups);
        for (int g = 0; g < cfg.n_groups; ++g)
            for (int k = 0; k < cfg.eves_per_group[g]; ++k)
                ch.g_eve_s[g].push_back(r.cn01_vec(n));
    }
    {
        Rng r(substream_seed(seed, "f_pt_sr"));
        ch.f_pt_sr.resize(cfg.n_groups);
        for (int g = 0; g < cfg.n_groups; ++g)
            for (int m = 0; m < cfg.srs_per_group[g]; ++m)
                ch.f_pt_sr[g].push_back(r.cn01());
    }
    {
        Rng r(substream_seed(seed, "f_pt_eves"));
        ch.f_pt_eves.resize(cfg.n_groups);
        for (int g = 0; g < cfg.n_groups; ++g)
            for (int k = 0; k < cfg.eves_per_group[g]; ++k)
                ch.f_pt_eves[g].push_back(r.cn01());
    }
    {
        // True channel first, then the error; the estimate is their difference.
        Rng r(substream_seed(seed, "f_err"));
        for (int l = 0; l < cfg.n_prs; ++l) {
            const double delta =
                std::sqrt(cfg.normalized_error[l] * ch.f_st_pr_true[l].squaredNorm());
            ch.f_err_radius.push_back(delta);
            const cvec df = r.uniform_ball(n, delta);
            ch.f_st_pr_est.push_back(ch.f_st_pr_true[l] - df);
        }
    }
    return ch;
}

struct ErrorSample {
    cvec delta;
};

inline std::vector<ErrorSample> sample_error_ball(double radius, int count,
                                                  std::uint64_t seed, int dim) {
    if (radius < 0) throw config_error("negative ball radius");
    Rng r(substream_seed(seed, "error_ball"));
    std::vector<ErrorSample> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        cvec d = r.uniform_ball(dim, radius);
        if (i % 2 == 0) {  // worst cases sit on the sphere; pin half there
            const double nrm = d.norm();
            if (nrm > 0) d *= radius / nrm;
        }
        out.push_back({std::move(d)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON config I/O (field names mirror SystemConfig)

inline SystemConfig config_from_json(const nlohmann::json& j) {
    SystemConfig cfg;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).template get<std::decay_t<decltype(field)>>();
    };
    get("n_antennas", cfg.n_antennas);
    get("n_groups", cfg.n_groups);
    get("srs_per_group", cfg.srs_per_group);
    get("n_prs", cfg.n_prs);
    get("eves_per_group", cfg.eves_per_group);
    get("n_primary_eves", cfg.n_primary_eves);
    get("pt_power", cfg.pt_power);
    get("st_power_budget", cfg.st_power_budget);
    get("min_primary_secrecy", cfg.min_primary_secrecy);
    get("normalized_error", cfg.normalized_error);
    get("seed", cfg.seed);
    if (j.contains("noise_variances")) {
        const auto& nj = j.at("noise_variances");
        if (nj.contains("pr")) cfg.noise_variances.pr = nj.at("pr").get<std::vector<double>>();
        if (nj.contains("eve_primary"))
            cfg.noise_variances.eve_primary = nj.at("eve_primary").get<std::vector<double>>();
        if (nj.contains("sr"))
            cfg.noise_variances.sr = nj.at("sr").get<std::vector<std::vector<double>>>();
        if (nj.contains("eve_secondary"))
            cfg.noise_variances.eve_secondary =
                nj.at("eve_secondary").get<std::vector<std::vector<double>>>();
    }
    if (j.contains("outage_targets")) {
        const auto& oj = j.at("outage_targets");
        if (oj.contains("eps_groups"))
            cfg.outage_targets.eps_groups = oj.at("eps_groups").get<std::vector<double>>();
        if (oj.contains("eps_tilde"))
            cfg.outage_targets.eps_tilde = oj.at("eps_tilde").get<double>();
    }
    if (j.contains("sca")) {
        const auto& sj = j.at("sca");
        if (sj.contains("max_iterations"))
            cfg.sca.max_iterations = sj.at("max_iterations").get<int>();
        if (sj.contains("convergence_tolerance"))
            cfg.sca.convergence_tolerance = sj.at("convergence_tolerance").get<double>();
    }
    if (j.contains("mc")) {
        const auto& mj = j.at("mc");
        if (mj.contains("outage_samples"))
            cfg.mc.outage_samples = mj.at("outage_samples").get<int>();
        if (mj.contains("ball_samples"))
            cfg.mc.ball_samples = mj.at("ball_samples").get<int>();
        if (mj.contains("ascent_steps"))
            cfg.mc.ascent_steps = mj.at("ascent_steps").get<int>();
    }
    cfg.finalize();
    return cfg;
}

inline nlohmann::json config_to_json(const SystemConfig& cfg) {
    nlohmann::json j;
    j["n_antennas"] = cfg.n_antennas;
    j["n_groups"] = cfg.n_groups;
    j["srs_per_group"] = cfg.srs_per_group;
    j["n_prs"] = cfg.n_prs;
    j["eves_per_group"] = cfg.eves_per_group;
    j["n_primary_eves"] = cfg.n_primary_eves;
    j["pt_power"] = cfg.pt_power;
    j["st_power_budget"] = cfg.st_power_budget;
    j["noise_variances"] = {{"pr", cfg.noise_variances.pr},
                            {"eve_primary", cfg.noise_variances.eve_primary},
                            {"sr", cfg.noise_variances.sr},
                            {"eve_secondary", cfg.noise_variances.eve_secondary}};
    j["min_primary_secrecy"] = cfg.min_primary_secrecy;
    j["normalized_error"] = cfg.normalized_error;
    j["outage_targets"] = {{"eps_groups", cfg.outage_targets.eps_groups},
                           {"eps_tilde", cfg.outage_targets.eps_tilde}};
    j["sca"] = {{"max_iterations", cfg.sca.max_iterations},
                {"convergence_tolerance", cfg.sca.convergence_tolerance}};
    j["mc"] = {{"outage_samples", cfg.mc.outage_samples},
               {"ball_samples", cfg.mc.ball_samples},
               {"ascent_steps", cfg.mc.ascent_steps}};
    j["seed"] = cfg.seed;
    return j;
}

inline SystemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    SystemConfig cfg = config_from_json(j);
    validate_config(cfg);
    return cfg;
}

}  // namespace secbeam
