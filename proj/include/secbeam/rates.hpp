#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "secbeam/common.hpp"
#include "secbeam/rng.hpp"
#include "secbeam/scenario.hpp"

namespace secbeam {

struct BeamDesign {
    std::vector<cvec> w;  // one beamformer per group
    cmat u_cov;           // jamming covariance

    static BeamDesign zeros(int n_antennas, int n_groups) {
        BeamDesign d;
        d.w.assign(n_groups, cvec::Zero(n_antennas));
        d.u_cov = cmat::Zero(n_antennas, n_antennas);
        return d;
    }

    double total_power() const {
        double p = u_cov.real().trace();
        for (const auto& wg : w) p += wg.squaredNorm();
        return p;
    }
};

inline void check_design(const BeamDesign& d, const SystemConfig& cfg) {
    if (static_cast<int>(d.w.size()) != cfg.n_groups ||
        d.u_cov.rows() != cfg.n_antennas || d.u_cov.cols() != cfg.n_antennas)
        throw dimension_error("design does not match config");
    for (const auto& wg : d.w)
        if (wg.size() != cfg.n_antennas)
            throw dimension_error("beamformer length mismatch");
    if ((d.u_cov - d.u_cov.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw dimension_error("jamming covariance not Hermitian");
}

struct SinrTable {
    std::vector<double> primary;        // per PR
    std::vector<double> primary_eve;    // per primary Eve
    std::vector<std::vector<double>> secondary;      // [group][SR]
    std::vector<std::vector<double>> secondary_eve;  // [group][Eve]
};

struct SecrecyReport {
    std::vector<double> primary_rates;
    std::vector<std::vector<double>> secondary_rates;
    double min_secondary = 0.0;
};

inline double quadform(const cmat& M, const cvec& v) {
    return std::real(v.dot(M * v));
}

// Interference-plus-jamming power seen on an ST-side channel vector.
inline double st_leakage(const BeamDesign& d, const cvec& f) {
    double p = quadform(d.u_cov, f);
    for (const auto& wg : d.w) p += std::norm(wg.dot(f));
    return p;
}

inline SinrTable sinr_all(const BeamDesign& d, const ChannelSet& ch,
                          const SystemConfig& cfg) {
    check_design(d, cfg);
    SinrTable t;

    for (int l = 0; l < cfg.n_prs; ++l) {
        const double num = cfg.pt_power * std::norm(ch.h_pr[l]);
        const double den =
            st_leakage(d, ch.f_st_pr_true[l]) + cfg.noise_variances.pr[l];
        t.primary.push_back(num / den);
    }
    for (int k = 0; k < cfg.n_primary_eves; ++k) {
        const double num = cfg.pt_power * std::norm(ch.g_eve_p[k]);
        const double den =
            st_leakage(d, ch.f_st_evep[k]) + cfg.noise_variances.eve_primary[k];
        t.primary_eve.push_back(num / den);
    }
    t.secondary.resize(cfg.n_groups);
    t.secondary_eve.resize(cfg.n_groups);
    for (int g = 0; g < cfg.n_groups; ++g) {
        for (int m = 0; m < cfg.srs_per_group[g]; ++m) {
            const cvec& h = ch.h_sr[g][m];
            const double num = std::norm(d.w[g].dot(h));
            double den = quadform(d.u_cov, h) +
                         cfg.pt_power * std::norm(ch.f_pt_sr[g][m]) +
                         cfg.noise_variances.sr[g][m];
            for (int i = 0; i < cfg.n_groups; ++i)
                if (i != g) den += std::norm(d.w[i].dot(h));
            t.secondary[g].push_back(num / den);
        }
        for (int k = 0; k < cfg.eves_per_group[g]; ++k) {
            const cvec& gv = ch.g_eve_s[g][k];
            const double num = std::norm(d.w[g].dot(gv));
            double den = quadform(d.u_cov, gv) +
                         cfg.pt_power * std::norm(ch.f_pt_eves[g][k]) +
                         cfg.noise_variances.eve_secondary[g][k];
            for (int i = 0; i < cfg.n_groups; ++i)
                if (i != g) den += std::norm(d.w[i].dot(gv));
            t.secondary_eve[g].push_back(num / den);
        }
    }
    return t;
}

// Same SR SINR computed through the aggregate interference covariance; kept
// as an independent route so the two can be cross-checked.
inline double secondary_sinr_quadform(const BeamDesign& d, const ChannelSet& ch,
                                      const SystemConfig& cfg, int g, int m) {
    cmat Q = d.u_cov;
    for (int i = 0; i < cfg.n_groups; ++i)
        if (i != g) Q += d.w[i] * d.w[i].adjoint();
    const cvec& h = ch.h_sr[g][m];
    const double chi = quadform(Q, h) +
                       cfg.pt_power * std::norm(ch.f_pt_sr[g][m]) +
                       cfg.noise_variances.sr[g][m];
    return std::norm(d.w[g].dot(h)) / chi;
}

inline SecrecyReport secrecy_report(const BeamDesign& d, const ChannelSet& ch,
                                    const SystemConfig& cfg) {
    const SinrTable t = sinr_all(d, ch, cfg);
    SecrecyReport rep;

    double eve_p = 0.0;
    for (double s : t.primary_eve) eve_p = std::max(eve_p, s);
    for (int l = 0; l < cfg.n_prs; ++l) {
        const double r = std::log1p(t.primary[l]) - std::log1p(eve_p);
        rep.primary_rates.push_back(clip_nonneg(r) / kLn2);
    }
    rep.secondary_rates.resize(cfg.n_groups);
    rep.min_secondary = std::numeric_limits<double>::infinity();
    for (int g = 0; g < cfg.n_groups; ++g) {
        double eve_g = 0.0;
        for (double s : t.secondary_eve[g]) eve_g = std::max(eve_g, s);
        for (int m = 0; m < cfg.srs_per_group[g]; ++m) {
            const double r = std::log1p(t.secondary[g][m]) - std::log1p(eve_g);
            const double bits = clip_nonneg(r) / kLn2;
            rep.secondary_rates[g].push_back(bits);
            rep.min_secondary = std::min(rep.min_secondary, bits);
        }
    }
    if (!std::isfinite(rep.min_secondary)) rep.min_secondary = 0.0;
    return rep;
}

inline std::vector<double> worst_case_primary(const BeamDesign& d,
                                              const ChannelSet& ch,
                                              const SystemConfig& cfg,
                                              int n_samples) {
    check_design(d, cfg);
    if (n_samples < 1) throw config_error("n_samples must be positive");
    const int n = cfg.n_antennas;
    cmat Q = d.u_cov;
    for (const auto& wg : d.w) Q += wg * wg.adjoint();

    std::vector<double> out;
    for (int l = 0; l < cfg.n_prs; ++l) {
        const cvec& fh = ch.f_st_pr_est[l];
        const double delta = ch.f_err_radius[l];
        const double num = cfg.pt_power * std::norm(ch.h_pr[l]);
        const double sigma2 = cfg.noise_variances.pr[l];
        auto leak = [&](const cvec& df) {
            const cvec f = fh + df;
            return quadform(Q, f);
        };

        double worst = leak(cvec::Zero(n));
        cvec best_df = cvec::Zero(n);
        if (delta > 0) {
            const auto samples = sample_error_ball(
                delta, n_samples, substream_seed(cfg.seed, "worst_case", l), n);
            for (const auto& s : samples) {
                const double p = leak(s.delta);
                if (p > worst) {
                    worst = p;
                    best_df = s.delta;
                }
            }
            // Ascent on the convex leakage quadratic: the maximizer lies on
            // the sphere, so each step projects the gradient point back out.
            cvec df = best_df;
            for (int step = 0; step < cfg.mc.ascent_steps; ++step) {
                const cvec grad = Q * (fh + df);
                const double gn = grad.norm();
                if (gn < 1e-14) break;
                df = delta * grad / gn;
                const double p = leak(df);
                if (p > worst) {
                    worst = p;
                } else {
                    break;
                }
            }
        }
        out.push_back(num / (worst + sigma2));
    }
    return out;
}

constexpr int kPrimarySide = -1;

inline double eve_outage_mc(const BeamDesign& d, const SystemConfig& cfg,
                            double threshold, int side_group, int n_samples,
                            std::uint64_t seed) {
    if (!(threshold > 0)) throw config_error("threshold must be positive");
    const int n = cfg.n_antennas;
    constexpr int kPartitions = 64;
    long long hits = 0;

    for (int p = 0; p < kPartitions; ++p) {
        Rng r(substream_seed(seed, "eve_mc", p));
        const int lo = static_cast<int>(static_cast<long long>(n_samples) * p / kPartitions);
        const int hi = static_cast<int>(static_cast<long long>(n_samples) * (p + 1) / kPartitions);
        for (int s = lo; s < hi; ++s) {
            double peak = 0.0;
            if (side_group == kPrimarySide) {
                for (int k = 0; k < cfg.n_primary_eves; ++k) {
                    const cplx g = r.cn01();
                    const cvec f = r.cn01_vec(n);
                    const double num = cfg.pt_power * std::norm(g);
                    const double den =
                        st_leakage(d, f) + cfg.noise_variances.eve_primary[k];
                    peak = std::max(peak, num / den);
                }
            } else {
                const int g = side_group;
                for (int k = 0; k < cfg.eves_per_group[g]; ++k) {
                    const cvec gv = r.cn01_vec(n);
                    const cplx f = r.cn01();
                    const double num = std::norm(d.w[g].dot(gv));
                    double den = quadform(d.u_cov, gv) +
                                 cfg.pt_power * std::norm(f) +
                                 cfg.noise_variances.eve_secondary[g][k];
                    for (int i = 0; i < cfg.n_groups; ++i)
                        if (i != g) den += std::norm(d.w[i].dot(gv));
                    peak = std::max(peak, num / den);
                }
            }
            if (peak <= threshold) ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(n_samples);
}

struct RateCaps {
    double z = 0.0;
    double beta = 0.0;
};

inline double objective_value(const BeamDesign& d, const ChannelSet& ch,
                              const SystemConfig& cfg,
                              const std::vector<double>& phi,
                              const RateCaps& caps) {
    for (double p : phi)
        if (!(p > 0)) throw config_error("phi must be positive");
    if (!(caps.beta > 0)) throw config_error("beta must be positive");
    const SinrTable t = sinr_all(d, ch, cfg);
    double obj = std::numeric_limits<double>::infinity();
    for (int g = 0; g < cfg.n_groups; ++g) {
        const double cap = std::log1p(phi[g]);
        for (double s : t.secondary[g]) {
            const double r = clip_nonneg(std::log1p(s) - cap) / kLn2;
            obj = std::min(obj, r);
        }
    }
    return std::isfinite(obj) ? obj : 0.0;
}

}  // namespace secbeam
