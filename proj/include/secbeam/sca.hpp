#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <secbeam/conic/program.hpp>
#include <secbeam/conic/solver.hpp>
#include <secbeam/rates.hpp>
#include <secbeam/scenario.hpp>
#include <secbeam/surrogate.hpp>

namespace secbeam {

struct infeasible_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class AlgoStatus { converged, max_iters, infeasible_scenario };

inline const char* algo_status_name(AlgoStatus s) {
    switch (s) {
        case AlgoStatus::converged: return "converged";
        case AlgoStatus::max_iters: return "max_iters";
        case AlgoStatus::infeasible_scenario: return "infeasible_scenario";
    }
    return "unknown";
}

struct AlgorithmReport {
    AlgoStatus status = AlgoStatus::converged;
    std::vector<double> trace;
    IterateState final_state;
    int iterations_used = 0;
    DimensionSummary dimensions;
};

struct BuildOptions {
    bool jamming = true;
    bool robust = true;
    bool init_phase = false;
};

// Certified secondary secrecy of a design under the optimized Eve caps,
// without the reporting clip; the per-iteration trace stores this quantity.
inline double certified_objective(const BeamDesign& d, const ChannelSet& ch,
                                  const SystemConfig& cfg,
                                  const std::vector<double>& phi) {
    const SinrTable tab = sinr_all(d, ch, cfg);
    double v = std::numeric_limits<double>::infinity();
    for (int g = 0; g < cfg.n_groups; ++g) {
        const double cap = std::log1p(phi[g]);
        for (double s : tab.secondary[g])
            v = std::min(v, (std::log1p(s) - cap) / kLn2);
    }
    return v;
}

namespace detail {

inline int u_param_count(int n) { return n * n; }

inline rvec u_params(const cmat& U) {
    const int n = static_cast<int>(U.rows());
    rvec p(u_param_count(n));
    for (int k = 0; k < n; ++k) p[k] = U(k, k).real();
    int at = n;
    for (int j = 0; j < n; ++j)
        for (int i = j + 1; i < n; ++i) {
            p[at++] = U(i, j).real();
            p[at++] = U(i, j).imag();
        }
    return p;
}

inline cmat u_cov(const rvec& p, int n) {
    cmat U = cmat::Zero(n, n);
    for (int k = 0; k < n; ++k) U(k, k) = p[k];
    int at = n;
    for (int j = 0; j < n; ++j)
        for (int i = j + 1; i < n; ++i) {
            U(i, j) = cplx(p[at], p[at + 1]);
            U(j, i) = std::conj(U(i, j));
            at += 2;
        }
    return U;
}

// Coefficients of f^H U f over the covariance parameter vector.
inline rvec u_quad_coeffs(const cvec& f) {
    const int n = static_cast<int>(f.size());
    rvec c(u_param_count(n));
    for (int k = 0; k < n; ++k) c[k] = std::norm(f[k]);
    int at = n;
    for (int j = 0; j < n; ++j)
        for (int i = j + 1; i < n; ++i) {
            const cplx b = std::conj(f[i]) * f[j];
            c[at++] = 2.0 * b.real();
            c[at++] = -2.0 * b.imag();
        }
    return c;
}

// Appends +scale*Re(a^H w_g) to a slack row; w_g is stored Re-then-Im.
inline void slack_re_dot(ConstraintBlock& b, int row, int off, const cvec& a,
                         double scale) {
    const int n = static_cast<int>(a.size());
    for (int k = 0; k < n; ++k) {
        if (a[k].real() != 0.0)
            b.coeffs.push_back({row, off + k, -scale * a[k].real()});
        if (a[k].imag() != 0.0)
            b.coeffs.push_back({row, off + n + k, -scale * a[k].imag()});
    }
}

// Appends +scale*Im(a^H w_g) to a slack row.
inline void slack_im_dot(ConstraintBlock& b, int row, int off, const cvec& a,
                         double scale) {
    const int n = static_cast<int>(a.size());
    for (int k = 0; k < n; ++k) {
        if (a[k].imag() != 0.0)
            b.coeffs.push_back({row, off + k, scale * a[k].imag()});
        if (a[k].real() != 0.0)
            b.coeffs.push_back({row, off + n + k, -scale * a[k].real()});
    }
}

inline void slack_term(ConstraintBlock& b, int row, int col, double scale) {
    b.coeffs.push_back({row, col, -scale});
}

inline void add_affine_lmi(ConicProgram& p, const std::string& label,
                           const std::function<cmat(const rvec&)>& build,
                           const std::vector<int>& cols) {
    const int npar = static_cast<int>(cols.size());
    const cmat M0 = build(rvec::Zero(npar));
    std::vector<std::pair<int, cmat>> terms;
    for (int k = 0; k < npar; ++k) {
        rvec e = rvec::Zero(npar);
        e[k] = 1.0;
        const cmat D = build(e) - M0;
        if (D.norm() > 0) terms.push_back({cols[k], D});
    }
    add_hermitian_lmi(p, label, M0, terms);
}

inline double min_primary_eve_noise(const SystemConfig& cfg) {
    double s2 = cfg.noise_variances.eve_primary[0];
    for (double s : cfg.noise_variances.eve_primary) s2 = std::min(s2, s);
    return s2;
}

inline double primary_tail_factor(const SystemConfig& cfg) {
    return std::pow(
        1.0 - std::pow(cfg.outage_targets.eps_tilde, 1.0 / cfg.n_primary_eves),
        1.0 / cfg.n_antennas);
}

inline ConicProgram assemble(const IterateState& st, const ChannelSet& ch,
                             const SystemConfig& cfg, const BuildOptions& opt) {
    check_state(st, cfg);
    const int N = cfg.n_antennas;
    const int G = cfg.n_groups;
    const int L = cfg.n_prs;
    const double Pp = cfg.pt_power;
    const double sig_ep = min_primary_eve_noise(cfg);
    const double c_tail = primary_tail_factor(cfg);

    std::vector<double> delta(L);
    for (int l = 0; l < L; ++l)
        delta[l] = opt.robust ? ch.f_err_radius[l] : 0.0;

    ConicProgram p;
    std::vector<int> w_off(G);
    for (int g = 0; g < G; ++g)
        w_off[g] = p.add_var("w" + std::to_string(g), 2 * N);
    const int u_off = opt.jamming ? p.add_var("U", u_param_count(N)) : -1;
    const int alpha_off = p.add_var("alpha", L);
    const int z_col = p.add_var("z");
    const int beta_col = p.add_var("beta");
    const int nu_col = p.add_var("nu");
    const int s_col = p.add_var("s");
    const int r_col = opt.jamming ? p.add_var("r") : -1;
    const int theta_col = opt.jamming ? p.add_var("theta") : -1;
    const int mu_off = p.add_var("mu", L * G);
    const int omega_off = p.add_var("omega", L * G);
    const int mut_off = opt.jamming ? p.add_var("mu_tilde", L) : -1;
    const int omt_off = opt.jamming ? p.add_var("omega_tilde", L) : -1;
    int varphi_col = -1, t_off = -1, cap_off = -1, vth_col = -1, rho_col = -1;
    if (opt.init_phase) {
        rho_col = p.add_var("rho");
        p.objective[rho_col] = 1.0;
    } else {
        varphi_col = p.add_var("varphi");
        t_off = p.add_var("t", G);
        cap_off = p.add_var("phi", G);
        if (opt.jamming) vth_col = p.add_var("vartheta");
        p.objective[varphi_col] = 1.0;
    }

    {
        ConstraintBlock b;
        b.label = "power";
        b.cone = ConeTag::rsoc;
        b.dim = 2 + 2 * N * G;
        b.rhs.assign(b.dim, 0.0);
        b.rhs[0] = cfg.st_power_budget;
        b.rhs[1] = 0.5;
        if (opt.jamming)
            for (int k = 0; k < N; ++k) b.coeffs.push_back({0, u_off + k, 1.0});
        for (int g = 0; g < G; ++g)
            for (int k = 0; k < 2 * N; ++k)
                b.coeffs.push_back({2 + 2 * N * g + k, w_off[g] + k, -1.0});
        p.blocks.push_back(std::move(b));
    }

    if (!opt.init_phase) {
        for (int g = 0; g < G; ++g) {
            for (int m = 0; m < cfg.srs_per_group[g]; ++m) {
                const ConcaveQuadratic f = build_f_surrogate(st, g, m, ch, cfg);
                const double kappa = -f.quad_scale;
                const std::string label =
                    "secrecy" + std::to_string(g) + "m" + std::to_string(m);
                ConstraintBlock b;
                b.label = label;
                const bool quad = kappa > 1e-12;
                b.cone = quad ? ConeTag::rsoc : ConeTag::nonneg;
                b.dim = quad ? 2 + 2 * G : 1;
                b.rhs.assign(b.dim, 0.0);
                b.rhs[0] = f.constant - kappa * f.noise_floor;
                for (int i = 0; i < G; ++i)
                    slack_re_dot(b, 0, w_off[i], f.linear_w[i], 1.0);
                if (opt.jamming) {
                    const rvec cu = kappa * u_quad_coeffs(f.h);
                    for (int k = 0; k < cu.size(); ++k)
                        if (cu[k] != 0.0)
                            b.coeffs.push_back({0, u_off + k, cu[k]});
                }
                slack_term(b, 0, varphi_col, -kLn2);
                slack_term(b, 0, t_off + g, -kLn2);
                if (quad) {
                    b.rhs[1] = 0.5;
                    const double root = std::sqrt(kappa);
                    for (int i = 0; i < G; ++i) {
                        slack_re_dot(b, 2 + 2 * i, w_off[i], f.h, root);
                        slack_im_dot(b, 3 + 2 * i, w_off[i], f.h, root);
                    }
                }
                p.blocks.push_back(std::move(b));
            }
        }

        for (int g = 0; g < G; ++g) {
            const Affine1 aff = tangent_log_overestimator(st.phi[g]);
            ConstraintBlock b;
            b.label = "eve2-rate" + std::to_string(g);
            b.cone = ConeTag::nonneg;
            b.dim = 1;
            b.rhs = {-aff.c0};
            slack_term(b, 0, t_off + g, kLn2);
            slack_term(b, 0, cap_off + g, -aff.c1);
            p.blocks.push_back(std::move(b));
        }
    }

    {
        const Affine1 aff = tangent_log_overestimator(st.beta);
        ConstraintBlock b;
        b.label = "eve1-rate";
        b.cone = ConeTag::nonneg;
        b.dim = 1;
        b.rhs = {-aff.c0};
        slack_term(b, 0, z_col, kLn2);
        slack_term(b, 0, beta_col, -aff.c1);
        p.blocks.push_back(std::move(b));
    }

    for (int l = 0; l < L; ++l) {
        ConstraintBlock b;
        b.label = (opt.init_phase ? "qos" : "primary-rate") + std::to_string(l);
        b.cone = ConeTag::expcone;
        b.dim = 3;
        b.rhs = {1.0, 1.0, cfg.min_primary_secrecy[l] * kLn2};
        slack_term(b, 0, alpha_off + l, 1.0);
        slack_term(b, 2, z_col, kLn2);
        if (opt.init_phase) slack_term(b, 2, rho_col, kLn2);
        p.blocks.push_back(std::move(b));
    }

    for (int l = 0; l < L; ++l) {
        const double gain = Pp * std::norm(ch.h_pr[l]);
        const Affine1 aff = linearize_inverse_alpha(st.alpha[l], gain);
        ConstraintBlock b;
        b.label = "interference" + std::to_string(l);
        b.cone = ConeTag::nonneg;
        b.dim = 1;
        b.rhs = {aff.c0 - cfg.noise_variances.pr[l]};
        slack_term(b, 0, alpha_off + l, aff.c1);
        for (int g = 0; g < G; ++g) slack_term(b, 0, mu_off + l * G + g, -1.0);
        if (opt.jamming) slack_term(b, 0, mut_off + l, -1.0);
        p.blocks.push_back(std::move(b));
    }

    for (int l = 0; l < L; ++l) {
        for (int g = 0; g < G; ++g) {
            std::vector<int> cols;
            for (int k = 0; k < 2 * N; ++k) cols.push_back(w_off[g] + k);
            cols.push_back(omega_off + l * G + g);
            cols.push_back(mu_off + l * G + g);
            const cvec fhat = ch.f_st_pr_est[l];
            const double dl = delta[l];
            add_affine_lmi(
                p, "robust-beam" + std::to_string(l) + "g" + std::to_string(g),
                [N, fhat, dl](const rvec& q) {
                    cvec wv(N);
                    for (int k = 0; k < N; ++k) wv[k] = cplx(q[k], q[N + k]);
                    return build_schur_lmi_beam(wv, fhat, dl, q[2 * N + 1],
                                                q[2 * N]);
                },
                cols);
        }
    }

    if (opt.jamming) {
        const int nu_par = u_param_count(N);
        for (int l = 0; l < L; ++l) {
            std::vector<int> cols;
            for (int k = 0; k < nu_par; ++k) cols.push_back(u_off + k);
            cols.push_back(mut_off + l);
            cols.push_back(omt_off + l);
            const cvec fhat = ch.f_st_pr_est[l];
            const double dl = delta[l];
            add_affine_lmi(
                p, "robust-jam" + std::to_string(l),
                [N, nu_par, fhat, dl](const rvec& q) {
                    return build_schur_lmi_jn(u_cov(q.head(nu_par), N), fhat,
                                              dl, q[nu_par], q[nu_par + 1]);
                },
                cols);
        }
    }

    {
        ConstraintBlock b;
        b.label = "eve1-prob-a";
        b.cone = ConeTag::nonneg;
        b.dim = 1;
        b.rhs = {0.0};
        slack_term(b, 0, nu_col, 2.0);
        slack_term(b, 0, beta_col, sig_ep / (N * Pp));
        p.blocks.push_back(std::move(b));
    }
    {
        ConstraintBlock b;
        b.label = "eve1-prob-exp";
        b.cone = ConeTag::expcone;
        b.dim = 3;
        b.rhs = {0.0, 1.0, 0.0};
        slack_term(b, 0, s_col, 1.0);
        slack_term(b, 2, nu_col, 2.0);
        p.blocks.push_back(std::move(b));
    }
    {
        ConstraintBlock b;
        b.label = "eve1-prob-b";
        b.cone = ConeTag::nonneg;
        b.dim = 1;
        if (opt.jamming) {
            b.rhs = {Pp - st.r * st.r};
            const Affine1 aff = bilinear_inner_bound(st.r);
            slack_term(b, 0, r_col, aff.c1);
        } else {
            b.rhs = {Pp};
        }
        slack_term(b, 0, s_col, -Pp / c_tail);
        p.blocks.push_back(std::move(b));
    }
    if (opt.jamming) {
        ConstraintBlock b;
        b.label = "eve1-prob-cone";
        b.cone = ConeTag::rsoc;
        b.dim = 3;
        b.rhs = {0.0, 0.0, 0.0};
        slack_term(b, 0, beta_col, 1.0);
        slack_term(b, 1, theta_col, 0.5);
        slack_term(b, 2, r_col, 1.0);
        p.blocks.push_back(std::move(b));

        const int nu_par = u_param_count(N);
        std::vector<int> cols;
        for (int k = 0; k < nu_par; ++k) cols.push_back(u_off + k);
        cols.push_back(theta_col);
        add_affine_lmi(
            p, "jam-floor",
            [N, nu_par](const rvec& q) {
                return cmat(u_cov(q.head(nu_par), N) -
                            q[nu_par] * cmat::Identity(N, N));
            },
            cols);
        if (!opt.init_phase) {
            cols.back() = vth_col;
            add_affine_lmi(
                p, "jam-floor-aux",
                [N, nu_par](const rvec& q) {
                    return cmat(u_cov(q.head(nu_par), N) -
                                q[nu_par] * cmat::Identity(N, N));
                },
                cols);
        }
    }

    if (!opt.init_phase) {
        for (int g = 0; g < G; ++g) {
            const OutageBudget bud = secondary_outage_budget(st, g, cfg);
            ConstraintBlock b;
            b.label = "eve2-prob" + std::to_string(g);
            b.cone = ConeTag::rsoc;
            b.dim = 2 + 2 * N;
            b.rhs.assign(b.dim, 0.0);
            slack_term(b, 0, cap_off + g, 1.0);
            b.rhs[1] = 0.5 * bud.constant;
            for (int i = 0; i < G; ++i)
                slack_re_dot(b, 1, w_off[i], bud.linear_w[i], 0.5);
            if (opt.jamming)
                slack_term(b, 1, vth_col, 0.5 * bud.vartheta_coeff);
            for (int k = 0; k < 2 * N; ++k)
                b.coeffs.push_back({2 + k, w_off[g] + k, -1.0});
            p.blocks.push_back(std::move(b));
        }
    }

    validate(p);
    return p;
}

inline rvec pack(const ConicProgram& p, const IterateState& st,
                 const SystemConfig& cfg, const BuildOptions& opt) {
    const int N = cfg.n_antennas;
    const int G = cfg.n_groups;
    const int L = cfg.n_prs;
    rvec x = rvec::Zero(p.n_vars());
    auto put = [&](const std::string& name, int idx, double v) {
        x[p.var(name).offset + idx] = v;
    };
    for (int g = 0; g < G; ++g) {
        const int off = p.var("w" + std::to_string(g)).offset;
        for (int k = 0; k < N; ++k) {
            x[off + k] = st.design.w[g][k].real();
            x[off + N + k] = st.design.w[g][k].imag();
        }
    }
    if (opt.jamming) {
        const rvec up = u_params(st.design.u_cov);
        x.segment(p.var("U").offset, up.size()) = up;
        put("r", 0, st.r);
        put("theta", 0, st.theta);
        for (int l = 0; l < L; ++l) {
            put("mu_tilde", l, st.mu_tilde[l]);
            put("omega_tilde", l, st.omega_tilde[l]);
        }
    }
    for (int l = 0; l < L; ++l) {
        put("alpha", l, st.alpha[l]);
        for (int g = 0; g < G; ++g) {
            put("mu", l * G + g, st.mu[l][g]);
            put("omega", l * G + g, st.omega[l][g]);
        }
    }
    put("z", 0, st.z);
    put("beta", 0, st.beta);
    const double nu = std::log(st.eta);
    put("nu", 0, nu);
    put("s", 0, st.eta * st.eta);
    if (opt.init_phase) {
        double rho = std::numeric_limits<double>::infinity();
        for (int l = 0; l < L; ++l)
            rho = std::min(rho, std::log2(1.0 + st.alpha[l]) - st.z -
                                    cfg.min_primary_secrecy[l]);
        put("rho", 0, rho);
    } else {
        put("varphi", 0, st.varphi);
        for (int g = 0; g < G; ++g) {
            put("t", g, st.t[g]);
            put("phi", g, st.phi[g]);
        }
        if (opt.jamming) put("vartheta", 0, st.vartheta);
    }
    return x;
}

inline IterateState unpack(const ConicProgram& p, const rvec& x,
                           const SystemConfig& cfg, const BuildOptions& opt) {
    const int N = cfg.n_antennas;
    const int G = cfg.n_groups;
    const int L = cfg.n_prs;
    IterateState st;
    st.design = BeamDesign::zeros(N, G);
    for (int g = 0; g < G; ++g) {
        const int off = p.var("w" + std::to_string(g)).offset;
        for (int k = 0; k < N; ++k)
            st.design.w[g][k] = cplx(x[off + k], x[off + N + k]);
    }
    auto at = [&](const std::string& name, int idx = 0) {
        return x[p.var(name).offset + idx];
    };
    if (opt.jamming) {
        st.design.u_cov = u_cov(x.segment(p.var("U").offset, N * N), N);
        st.theta = at("theta");
        st.r = std::max(std::sqrt(std::max(at("beta") * st.theta, 0.0)), 1e-6);
    } else {
        st.design.u_cov = cmat::Zero(N, N);
        st.theta = 0.0;
        st.r = 1e-6;
    }
    st.alpha.resize(L);
    for (int l = 0; l < L; ++l) st.alpha[l] = std::max(at("alpha", l), 1e-12);
    st.z = at("z");
    st.beta = std::max(at("beta"), 1e-12);
    st.eta = std::exp(at("nu"));
    st.mu.assign(L, std::vector<double>(G, 0.0));
    st.omega.assign(L, std::vector<double>(G, 0.0));
    st.mu_tilde.assign(L, 0.0);
    st.omega_tilde.assign(L, 0.0);
    for (int l = 0; l < L; ++l) {
        for (int g = 0; g < G; ++g) {
            st.mu[l][g] = at("mu", l * G + g);
            st.omega[l][g] = at("omega", l * G + g);
        }
        if (opt.jamming) {
            st.mu_tilde[l] = at("mu_tilde", l);
            st.omega_tilde[l] = at("omega_tilde", l);
        }
    }
    if (opt.init_phase) {
        st.phi.assign(G, 1e-6);
        st.t.assign(G, std::log2(1.0 + 1e-6));
        st.varphi = 0.0;
        st.vartheta = 0.0;
    } else {
        st.varphi = at("varphi");
        st.phi.resize(G);
        st.t.resize(G);
        for (int g = 0; g < G; ++g) {
            st.phi[g] = std::max(at("phi", g), 1e-12);
            st.t[g] = at("t", g);
        }
        st.vartheta = opt.jamming ? at("vartheta") : 0.0;
    }
    return st;
}

inline ConicSolution solve_with_retry(const ConicProgram& p) {
    SolveOptions o;
    ConicSolution s = solve(p, o);
    if (s.status == ConicSolution::Status::optimal) return s;
    o.tol *= 10.0;
    const ConicSolution relaxed = solve(p, o);
    if (relaxed.status == ConicSolution::Status::optimal) return relaxed;
    throw numerical_error(std::string("subproblem solve failed: ") +
                          status_name(relaxed.status));
}

inline IterateState start_state(const ChannelSet& ch, const SystemConfig& cfg,
                                const BuildOptions& opt) {
    const int N = cfg.n_antennas;
    const int G = cfg.n_groups;
    const int L = cfg.n_prs;
    IterateState st;
    st.design = BeamDesign::zeros(N, G);
    st.theta = opt.jamming ? cfg.st_power_budget / (2.0 * N) : 0.0;
    st.design.u_cov = st.theta * cmat::Identity(N, N);

    if (opt.robust) {
        st.alpha = worst_case_primary(st.design, ch, cfg, cfg.mc.ball_samples);
    } else {
        st.alpha.resize(L);
        for (int l = 0; l < L; ++l) {
            const double leak = st_leakage(st.design, ch.f_st_pr_est[l]);
            st.alpha[l] = cfg.pt_power * std::norm(ch.h_pr[l]) /
                          (leak + cfg.noise_variances.pr[l]);
        }
    }

    double lo = 1e-6, hi = 1e6;
    if (xi_tilde(lo, cfg) < st.theta) {
        st.beta = lo;
    } else {
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (xi_tilde(mid, cfg) > st.theta)
                lo = mid;
            else
                hi = mid;
        }
        st.beta = 0.5 * (lo + hi);
    }
    st.r = std::max(std::sqrt(std::max(st.beta * st.theta, 0.0)), 1e-6);
    const double sig_ep = min_primary_eve_noise(cfg);
    st.eta = std::exp(-st.beta * sig_ep / (2.0 * N * cfg.pt_power));
    st.z = std::log2(1.0 + st.beta);
    st.phi.assign(G, 1e-6);
    st.t.assign(G, std::log2(1.0 + 1e-6));
    st.varphi = certified_objective(st.design, ch, cfg, st.phi);
    st.vartheta = st.theta;
    st.mu.assign(L, std::vector<double>(G, 0.0));
    st.omega.assign(L, std::vector<double>(G, 0.0));
    st.mu_tilde.assign(L, 0.0);
    st.omega_tilde.assign(L, 0.0);
    for (int l = 0; l < L; ++l) {
        const double fn = ch.f_st_pr_est[l].norm();
        const double dl = opt.robust ? ch.f_err_radius[l] : 0.0;
        if (opt.jamming) {
            st.mu_tilde[l] =
                st.theta * (fn + dl) * (fn + dl) * (dl > 0 ? 1.0 : 1.001);
            st.omega_tilde[l] = st.theta * (1.0 + fn / std::max(dl, 1e-3));
        }
    }
    return st;
}

inline IterateState run_initialization(const ChannelSet& ch,
                                       const SystemConfig& cfg,
                                       IterateState st,
                                       const BuildOptions& main_opt) {
    BuildOptions opt = main_opt;
    opt.init_phase = true;
    for (int pass = 0; pass < cfg.sca.max_iterations; ++pass) {
        const ConicProgram p = assemble(st, ch, cfg, opt);
        const ConicSolution sol = solve_with_retry(p);
        IterateState next = unpack(p, sol.x, cfg, opt);
        next.phi = st.phi;
        next.t = st.t;
        next.varphi = st.varphi;
        next.vartheta = st.vartheta;
        st = std::move(next);
        if (sol.objective >= 0.0) {
            const int G = cfg.n_groups;
            st.vartheta =
                opt.jamming ? clip_nonneg(min_eigenvalue(st.design.u_cov)) : 0.0;
            st.phi.resize(G);
            st.t.resize(G);
            for (int g = 0; g < G; ++g) {
                double denom = xi_secondary(cfg, g) + st.vartheta;
                for (int i = 0; i < G; ++i)
                    if (i != g) denom += st.design.w[i].squaredNorm();
                st.phi[g] =
                    std::max(st.design.w[g].squaredNorm() / denom, 1e-6);
                st.t[g] = std::log2(1.0 + st.phi[g]);
            }
            st.varphi = certified_objective(st.design, ch, cfg, st.phi);
            return st;
        }
    }
    throw infeasible_error(
        "primary quality target unreachable for this channel draw");
}

inline AlgorithmReport run_pipeline(const ChannelSet& ch,
                                    const SystemConfig& cfg, bool jamming,
                                    bool robust) {
    const BuildOptions opt{jamming, robust, false};
    AlgorithmReport rep;
    IterateState st = start_state(ch, cfg, opt);
    rep.dimensions = dimension_summary(assemble(st, ch, cfg, opt));
    try {
        st = run_initialization(ch, cfg, st, opt);
    } catch (const infeasible_error&) {
        rep.status = AlgoStatus::infeasible_scenario;
        rep.final_state = st;
        return rep;
    }
    rep.trace.push_back(certified_objective(st.design, ch, cfg, st.phi));
    for (int k = 0; k < cfg.sca.max_iterations; ++k) {
        const ConicProgram p = assemble(st, ch, cfg, opt);
        const ConicSolution sol = solve_with_retry(p);
        st = unpack(p, sol.x, cfg, opt);
        rep.trace.push_back(st.varphi);
        rep.iterations_used = k + 1;
        if (std::abs(rep.trace[k + 1] - rep.trace[k]) <=
            cfg.sca.convergence_tolerance) {
            rep.status = AlgoStatus::converged;
            rep.final_state = st;
            return rep;
        }
    }
    rep.status = AlgoStatus::max_iters;
    rep.final_state = st;
    return rep;
}

}  // namespace detail

inline IterateState heuristic_start(const ChannelSet& ch,
                                    const SystemConfig& cfg) {
    return detail::start_state(ch, cfg, BuildOptions{});
}

inline IterateState solve_initialization(const ChannelSet& ch,
                                         const SystemConfig& cfg,
                                         const IterateState& start) {
    return detail::run_initialization(ch, cfg, start, BuildOptions{});
}

inline ConicProgram build_subproblem(const IterateState& st,
                                     const ChannelSet& ch,
                                     const SystemConfig& cfg) {
    return detail::assemble(st, ch, cfg, BuildOptions{});
}

inline AlgorithmReport run_algorithm1(const ChannelSet& ch,
                                      const SystemConfig& cfg) {
    return detail::run_pipeline(ch, cfg, true, true);
}

inline AlgorithmReport run_no_jn(const ChannelSet& ch,
                                 const SystemConfig& cfg) {
    return detail::run_pipeline(ch, cfg, false, true);
}

inline AlgorithmReport run_non_robust(const ChannelSet& ch,
                                      const SystemConfig& cfg) {
    return detail::run_pipeline(ch, cfg, true, false);
}

struct ComplexityReport {
    int n = 0;
    double sqrt_term = 0.0;
    double bracket = 0.0;
    double operand = 0.0;
    DimensionSummary census;
};

inline ComplexityReport complexity_report(const SystemConfig& cfg) {
    const double N = cfg.n_antennas;
    const double G = cfg.n_groups;
    const double L = cfg.n_prs;
    ComplexityReport r;
    r.n = static_cast<int>(G * (L + 3) + N * (N + G) + 2 * L + 6);
    r.sqrt_term = G * L * (N + 2) + L * (N + 1) + 2 * N;
    auto cube = [](double v) { return v * v * v; };
    auto sq = [](double v) { return v * v; };
    r.bracket = G * L * cube(N + 2) + L * cube(N + 1) + 2 * cube(N) +
                r.n * G * L * sq(N + 2) + r.n * L * sq(N + 1) +
                2 * r.n * sq(N) + sq(r.n);
    r.operand = r.n * std::sqrt(r.sqrt_term) * r.bracket;
    const ChannelSet ch = draw_channels(cfg, cfg.seed);
    const BuildOptions opt{};
    const IterateState st = detail::start_state(ch, cfg, opt);
    r.census = dimension_summary(detail::assemble(st, ch, cfg, opt));
    return r;
}

}  // namespace secbeam
