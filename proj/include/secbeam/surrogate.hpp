#pragma once

#include <cmath>
#include <vector>

#include "secbeam/common.hpp"
#include "secbeam/rates.hpp"
#include "secbeam/scenario.hpp"

namespace secbeam {

struct IterateState {
    BeamDesign design;
    std::vector<double> alpha;  // per PR
    std::vector<double> phi;    // per group
    double beta = 1.0;
    double r = 1.0;
    double eta = 1.0;
    double theta = 0.0;
    double vartheta = 0.0;
    std::vector<double> t;  // per group
    double z = 0.0;
    double varphi = 0.0;
    std::vector<std::vector<double>> mu;  // [PR][group]
    std::vector<double> mu_tilde;         // per PR
    std::vector<std::vector<double>> omega;
    std::vector<double> omega_tilde;
};

inline void check_state(const IterateState& st, const SystemConfig& cfg) {
    check_design(st.design, cfg);
    if (static_cast<int>(st.alpha.size()) != cfg.n_prs)
        throw dimension_error("alpha size mismatch");
    if (static_cast<int>(st.phi.size()) != cfg.n_groups)
        throw dimension_error("phi size mismatch");
    for (double a : st.alpha)
        if (!(a > 0)) throw config_error("alpha must be positive");
    for (double p : st.phi)
        if (!(p > 0)) throw config_error("phi must be positive");
    if (!(st.beta > 0)) throw config_error("beta must be positive");
    if (!(st.r > 0)) throw config_error("r must be positive");
}

struct Affine1 {
    double c0 = 0.0;
    double c1 = 0.0;
    double operator()(double x) const { return c0 + c1 * x; }
};

// Concave lower bound of the log-rate ln(1 + SINR) for one SR, expanded at
// the previous iterate. quad_scale multiplies the full received interference
// plus the own-beam power, so the assembled function is concave in (w, U).
struct ConcaveQuadratic {
    double constant = 0.0;
    std::vector<cvec> linear_w;  // term: Re{linear_w[g]^H w_g}
    double quad_scale = 0.0;
    int group = 0;
    cvec h;               // receiver channel the quadratic term contracts
    double noise_floor = 0.0;  // primary interference plus thermal noise

    double eval(const BeamDesign& d) const {
        double v = constant;
        for (size_t g = 0; g < linear_w.size(); ++g)
            v += std::real(linear_w[g].dot(d.w[g]));
        double q = quadform(d.u_cov, h) + noise_floor;
        for (size_t i = 0; i < d.w.size(); ++i)
            if (static_cast<int>(i) != group) q += std::norm(d.w[i].dot(h));
        q += std::norm(d.w[group].dot(h));
        return v + quad_scale * q;
    }
};

inline ConcaveQuadratic build_f_surrogate(const IterateState& st, int g, int m,
                                          const ChannelSet& ch,
                                          const SystemConfig& cfg) {
    check_state(st, cfg);
    const cvec& h = ch.h_sr[g][m];
    const BeamDesign& d = st.design;

    double chi_n = quadform(d.u_cov, h) +
                   cfg.pt_power * std::norm(ch.f_pt_sr[g][m]) +
                   cfg.noise_variances.sr[g][m];
    for (int i = 0; i < cfg.n_groups; ++i)
        if (i != g) chi_n += std::norm(d.w[i].dot(h));
    if (!(chi_n > 0)) throw config_error("interference floor must be positive");

    const double own_n = std::norm(d.w[g].dot(h));
    const double gamma_n = own_n / chi_n;
    const double phi_n = gamma_n / (1.0 + gamma_n);

    ConcaveQuadratic f;
    f.group = g;
    f.h = h;
    f.noise_floor = cfg.pt_power * std::norm(ch.f_pt_sr[g][m]) +
                    cfg.noise_variances.sr[g][m];
    f.constant = -std::log1p(-phi_n) - gamma_n;
    f.linear_w.assign(cfg.n_groups, cvec::Zero(cfg.n_antennas));
    f.linear_w[g] = (2.0 / chi_n) * (h * h.dot(d.w[g]));
    f.quad_scale = -gamma_n / (chi_n + own_n);
    return f;
}

inline Affine1 linearize_inverse_alpha(double alpha_n, double gain) {
    if (!(alpha_n > 0)) throw config_error("alpha expansion point must be positive");
    if (!(gain > 0)) throw config_error("gain must be positive");
    return {2.0 * gain / alpha_n, -gain / (alpha_n * alpha_n)};
}

inline Affine1 tangent_log_overestimator(double x_n) {
    if (!(x_n > -1)) throw config_error("tangent point must exceed -1");
    return {std::log1p(x_n) - x_n / (1.0 + x_n), 1.0 / (1.0 + x_n)};
}

inline Affine1 bilinear_inner_bound(double r_n) {
    if (!(r_n > 0)) throw config_error("r expansion point must be positive");
    return {-r_n * r_n, 2.0 * r_n};
}

inline cmat build_schur_lmi_beam(const cvec& w, const cvec& f_hat, double delta,
                                 double mu, double omega) {
    if (w.size() != f_hat.size()) throw dimension_error("beam/channel mismatch");
    if (delta < 0) throw config_error("negative ball radius");
    const int n = static_cast<int>(w.size());
    cmat C = cmat::Zero(n + 2, n + 2);
    C(0, 0) = 1.0;
    C.block(0, 1, 1, n) = w.adjoint();
    C.block(1, 0, n, 1) = w;
    C(0, n + 1) = -w.dot(f_hat);
    C(n + 1, 0) = std::conj(C(0, n + 1));
    C.block(1, 1, n, n) = omega * cmat::Identity(n, n);
    C(n + 1, n + 1) = -omega * delta * delta + mu;
    return C;
}

inline cmat build_schur_lmi_jn(const cmat& U, const cvec& f_hat, double delta,
                               double mu_tilde, double omega_tilde) {
    const int n = static_cast<int>(f_hat.size());
    if (U.rows() != n || U.cols() != n) throw dimension_error("covariance/channel mismatch");
    if ((U - U.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw dimension_error("jamming covariance not Hermitian");
    cmat C = cmat::Zero(n + 1, n + 1);
    const cvec Uf = U * f_hat;
    C.block(0, 0, n, n) = omega_tilde * cmat::Identity(n, n) - U;
    C.block(0, n, n, 1) = -Uf;
    C.block(n, 0, 1, n) = -Uf.adjoint();
    C(n, n) = -std::real(f_hat.dot(Uf)) - omega_tilde * delta * delta + mu_tilde;
    return C;
}

// Smallest isotropic jamming level that certifies the primary-side outage
// target at Eve-SINR cap beta. Uses the most pessimistic (smallest) Eve
// noise when they differ.
inline double xi_tilde(double beta, const SystemConfig& cfg) {
    if (!(beta > 0)) throw config_error("beta must be positive");
    double s2 = cfg.noise_variances.eve_primary[0];
    for (double s : cfg.noise_variances.eve_primary) s2 = std::min(s2, s);
    const double n = cfg.n_antennas;
    const double c = std::pow(
        1.0 - std::pow(cfg.outage_targets.eps_tilde, 1.0 / cfg.n_primary_eves),
        1.0 / n);
    return (std::exp(-beta * s2 / (n * cfg.pt_power)) / c - 1.0) *
           cfg.pt_power / beta;
}

inline double xi_secondary(const SystemConfig& cfg, int g) {
    double s2 = cfg.noise_variances.eve_secondary[g][0];
    for (double s : cfg.noise_variances.eve_secondary[g]) s2 = std::min(s2, s);
    const double n = cfg.n_antennas;
    const double k = cfg.eves_per_group[g];
    const double eps = cfg.outage_targets.eps_groups[g];
    return (std::exp(s2 / (n * cfg.pt_power)) * std::pow(eps, -1.0 / (n * k)) -
            1.0) *
           cfg.pt_power;
}

// Affine inner bound of the secondary-outage budget: own-beam power per unit
// phi may not exceed this. The convex cross-group power is replaced by its
// tangent, the jamming floor by the variable it dominates.
struct OutageBudget {
    double constant = 0.0;
    std::vector<cvec> linear_w;  // term: Re{linear_w[i]^H w_i}
    double vartheta_coeff = 1.0;

    double eval(const std::vector<cvec>& w, double vartheta) const {
        double v = constant + vartheta_coeff * vartheta;
        for (size_t i = 0; i < linear_w.size(); ++i)
            v += std::real(linear_w[i].dot(w[i]));
        return v;
    }
};

inline OutageBudget secondary_outage_budget(const IterateState& st, int g,
                                      const SystemConfig& cfg) {
    check_state(st, cfg);
    OutageBudget b;
    b.constant = xi_secondary(cfg, g);
    b.linear_w.assign(cfg.n_groups, cvec::Zero(cfg.n_antennas));
    for (int i = 0; i < cfg.n_groups; ++i) {
        if (i == g) continue;
        b.constant -= st.design.w[i].squaredNorm();
        b.linear_w[i] = 2.0 * st.design.w[i];
    }
    return b;
}

}  // namespace secbeam
