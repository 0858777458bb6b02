#include <gtest/gtest.h>

#include <cmath>

#include <secbeam/rng.hpp>
#include <secbeam/sca.hpp>

using namespace secbeam;

namespace {

SystemConfig defaults() {
    SystemConfig cfg;
    cfg.finalize();
    validate_config(cfg);
    return cfg;
}

// Operating point with quiet primary eavesdroppers: the certified primary
// chain is loose there, so initialization succeeds on almost every draw.
SystemConfig far_eves() {
    SystemConfig cfg;
    cfg.min_primary_secrecy = {0.05, 0.05};
    cfg.noise_variances.eve_primary = {4000.0, 4000.0};
    cfg.finalize();
    validate_config(cfg);
    return cfg;
}

IterateState random_state(const SystemConfig& cfg, std::uint64_t seed) {
    Rng r(seed);
    const int n = cfg.n_antennas;
    IterateState st;
    st.design = BeamDesign::zeros(n, cfg.n_groups);
    for (auto& w : st.design.w) w = 0.7 * r.cn01_vec(n);
    cmat A(n, n);
    for (int i = 0; i < n; ++i) A.col(i) = r.cn01_vec(n);
    st.design.u_cov = 0.5 * (A * A.adjoint()) / n + cmat::Identity(n, n);
    st.alpha.assign(cfg.n_prs, 2.0);
    st.phi.assign(cfg.n_groups, 0.3);
    st.t.assign(cfg.n_groups, std::log2(1.3));
    st.beta = 4.0;
    st.theta = clip_nonneg(min_eigenvalue(st.design.u_cov));
    st.vartheta = st.theta;
    st.r = std::sqrt(st.beta * st.theta);
    st.eta = 0.8;
    st.z = std::log2(5.0);
    st.mu.assign(cfg.n_prs, std::vector<double>(cfg.n_groups, 1.0));
    st.omega.assign(cfg.n_prs, std::vector<double>(cfg.n_groups, 1.0));
    st.mu_tilde.assign(cfg.n_prs, 1.0);
    st.omega_tilde.assign(cfg.n_prs, 1.0);
    return st;
}

TEST(Packing, CovarianceParameterRoundTrip) {
    Rng r(9);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(r.uniform() * 7);
        cmat A(n, n);
        for (int i = 0; i < n; ++i) A.col(i) = r.cn01_vec(n);
        const cmat U = 0.5 * (A + A.adjoint());
        const rvec p = detail::u_params(U);
        ASSERT_EQ(p.size(), n * n);
        EXPECT_NEAR((detail::u_cov(p, n) - U).norm(), 0.0, 0.0);
        const cvec f = r.cn01_vec(n);
        EXPECT_NEAR(detail::u_quad_coeffs(f).dot(p), quadform(U, f),
                    1e-12 * (1.0 + U.norm() * f.squaredNorm()));
    }
}

TEST(Packing, StateRoundTripThroughProgram) {
    const SystemConfig cfg = defaults();
    const ChannelSet ch = draw_channels(cfg, 31);
    const IterateState st = random_state(cfg, 32);
    const BuildOptions opt{};
    const ConicProgram p = detail::assemble(st, ch, cfg, opt);
    const rvec x = detail::pack(p, st, cfg, opt);
    const IterateState back = detail::unpack(p, x, cfg, opt);
    for (int g = 0; g < cfg.n_groups; ++g)
        EXPECT_NEAR((back.design.w[g] - st.design.w[g]).norm(), 0.0, 0.0);
    EXPECT_NEAR((back.design.u_cov - st.design.u_cov).norm(), 0.0, 0.0);
    for (int l = 0; l < cfg.n_prs; ++l)
        EXPECT_EQ(back.alpha[l], st.alpha[l]);
    EXPECT_EQ(back.z, st.z);
    EXPECT_EQ(back.beta, st.beta);
    EXPECT_NEAR(back.eta, st.eta, 1e-15);
    EXPECT_EQ(back.varphi, st.varphi);
    EXPECT_EQ(back.mu[1][1], st.mu[1][1]);
    EXPECT_EQ(back.omega_tilde[0], st.omega_tilde[0]);
    // r is re-derived from the certified product, not copied
    EXPECT_NEAR(back.r, std::sqrt(back.beta * back.theta), 1e-12);
}

TEST(Heuristic, StartValuesMatchHandArithmetic) {
    SystemConfig cfg = defaults();
    cfg.st_power_budget = dbm_to_linear(15.0);
    cfg.finalize();
    const ChannelSet ch = draw_channels(cfg, 7);
    const IterateState st = heuristic_start(ch, cfg);

    const double theta0 = cfg.st_power_budget / 16.0;
    EXPECT_NEAR(st.theta, theta0, 1e-12);
    EXPECT_NEAR(st.theta, 1.98, 0.01);
    EXPECT_NEAR(st.design.total_power(), cfg.st_power_budget / 2.0, 1e-9);
    EXPECT_LE(st.design.total_power(), cfg.st_power_budget);
    for (const auto& w : st.design.w) EXPECT_EQ(w.norm(), 0.0);

    EXPECT_NEAR(xi_tilde(st.beta, cfg), st.theta, 1e-8 * st.theta);
    EXPECT_NEAR(st.r, std::sqrt(st.beta * st.theta), 1e-12);
    for (double f : st.phi) EXPECT_EQ(f, 1e-6);
    for (double a : st.alpha) EXPECT_GT(a, 0.0);
}

TEST(Assemble, ConstraintCensus) {
    const SystemConfig cfg = defaults();
    const ChannelSet ch = draw_channels(cfg, 11);
    const IterateState st = random_state(cfg, 12);
    const ConicProgram p = build_subproblem(st, ch, cfg);
    const DimensionSummary s = dimension_summary(p);

    EXPECT_EQ(s.count(ConeTag::psd, 10), 4);  // one per (PR, group) pair
    EXPECT_EQ(s.count(ConeTag::psd, 9), 2);   // one per PR
    int embedded16 = 0;
    for (const auto& e : s.entries)
        if (e.cone == ConeTag::psd && e.dim == 16) ++embedded16;
    EXPECT_GE(embedded16, 2);  // covariance floor cones, embedded ordering

    int power_blocks = 0, surrogate_rows = 0;
    for (const auto& e : s.entries) {
        if (e.label == "power") {
            ++power_blocks;
            EXPECT_EQ(e.cone, ConeTag::rsoc);
            EXPECT_EQ(e.dim, 2 + 2 * cfg.n_antennas * cfg.n_groups);
        }
        if (e.label.rfind("secrecy", 0) == 0) ++surrogate_rows;
    }
    EXPECT_EQ(power_blocks, 1);
    EXPECT_EQ(surrogate_rows, 4);  // G groups x M_g receivers
}

TEST(Assemble, DoublingPrsDoublesRobustBlocks) {
    SystemConfig cfg;
    cfg.n_prs = 4;
    cfg.min_primary_secrecy = {1.0, 1.0, 1.0, 1.0};
    cfg.normalized_error = {0.05, 0.05, 0.05, 0.05};
    cfg.finalize();
    validate_config(cfg);
    const ChannelSet ch = draw_channels(cfg, 13);
    const ConicProgram p = build_subproblem(random_state(cfg, 14), ch, cfg);
    const DimensionSummary s = dimension_summary(p);
    EXPECT_EQ(s.count(ConeTag::psd, 10), 8);
    EXPECT_EQ(s.count(ConeTag::psd, 9), 4);
}

TEST(Assemble, ZeroErrorRadiusCollapsesToNominal) {
    const SystemConfig cfg = defaults();
    const ChannelSet ch = draw_channels(cfg, 15);
    Rng r(16);
    const cvec w = r.cn01_vec(cfg.n_antennas);
    const cvec fhat = ch.f_st_pr_est[0];
    const double nominal = std::norm(fhat.dot(w));

    // with a huge multiplier the certified budget approaches the nominal
    // leakage; below it no multiplier rescues feasibility
    const cmat ok =
        build_schur_lmi_beam(w, fhat, 0.0, nominal * (1.0 + 1e-5), 1e8);
    EXPECT_GE(min_eigenvalue(ok), -1e-9);
    for (double omega : {1e-3, 1.0, 1e3, 1e6, 1e9}) {
        const cmat bad =
            build_schur_lmi_beam(w, fhat, 0.0, nominal * 0.999, omega);
        EXPECT_LT(min_eigenvalue(bad), 0.0);
    }

    // the assembler wires the zero radius through when robustness is off
    const BuildOptions opt{true, false, false};
    const IterateState st = random_state(cfg, 17);
    const ConicProgram p = detail::assemble(st, ch, cfg, opt);
    bool found = false;
    for (const auto& b : p.blocks)
        if (b.label == "robust-beam0g0") found = true;
    EXPECT_TRUE(found);
}

TEST(Initialization, FarEvesFeasibleAndQosCertified) {
    const SystemConfig cfg = far_eves();
    const ChannelSet ch = draw_channels(cfg, 101);
    const IterateState start = heuristic_start(ch, cfg);
    const IterateState st = solve_initialization(ch, cfg, start);

    for (int l = 0; l < cfg.n_prs; ++l) {
        EXPECT_GE(std::log2(1.0 + st.alpha[l]) - st.z,
                  cfg.min_primary_secrecy[l] - 1e-9);
    }
    const std::vector<double> wc =
        worst_case_primary(st.design, ch, cfg, cfg.mc.ball_samples);
    for (int l = 0; l < cfg.n_prs; ++l)
        EXPECT_GE(std::log2(1.0 + wc[l]) - st.z,
                  cfg.min_primary_secrecy[l] - 0.01);
    for (double f : st.phi) EXPECT_GE(f, 1e-6);
    EXPECT_LE(st.design.total_power(),
              cfg.st_power_budget * (1.0 + 1e-8));
}

TEST(Initialization, UnattainableQosReported) {
    SystemConfig cfg = far_eves();
    cfg.min_primary_secrecy = {50.0, 50.0};
    cfg.sca.max_iterations = 3;
    cfg.finalize();
    const ChannelSet ch = draw_channels(cfg, 102);
    const IterateState start = heuristic_start(ch, cfg);
    EXPECT_THROW(solve_initialization(ch, cfg, start), infeasible_error);
}

TEST(Algorithm, CarriedPointStaysFeasible) {
    const SystemConfig cfg = far_eves();
    const ChannelSet ch = draw_channels(cfg, 103);
    const BuildOptions opt{};
    IterateState st = solve_initialization(ch, cfg, heuristic_start(ch, cfg));

    for (int k = 0; k < 3; ++k) {
        const ConicProgram p = detail::assemble(st, ch, cfg, opt);
        const rvec carried = detail::pack(p, st, cfg, opt);
        const CheckReport rep = check_solution(p, carried, 1e-7);
        ASSERT_TRUE(rep.ok()) << "iteration " << k << ": "
                              << (rep.flagged.empty()
                                      ? ""
                                      : rep.flagged[0].label)
                              << " violated by " << rep.worst;
        const ConicSolution sol = detail::solve_with_retry(p);
        st = detail::unpack(p, sol.x, cfg, opt);
    }
}

TEST(Algorithm, MonotoneTraceAndFinalInvariants) {
    const SystemConfig cfg = far_eves();
    for (std::uint64_t seed : {201ull, 202ull, 203ull}) {
        const ChannelSet ch = draw_channels(cfg, seed);
        const AlgorithmReport rep = run_algorithm1(ch, cfg);
        if (rep.status == AlgoStatus::infeasible_scenario) continue;
        ASSERT_GE(rep.trace.size(), 2u);
        for (size_t i = 1; i < rep.trace.size(); ++i)
            EXPECT_GE(rep.trace[i], rep.trace[i - 1] - 1e-6)
                << "seed " << seed << " step " << i;
        const BeamDesign& d = rep.final_state.design;
        EXPECT_LE(d.total_power(), cfg.st_power_budget * (1.0 + 1e-8));
        EXPECT_GE(min_eigenvalue(d.u_cov), -1e-9);
        EXPECT_EQ(rep.iterations_used,
                  static_cast<int>(rep.trace.size()) - 1);
    }
}

TEST(Algorithm, DefaultOperatingPointReportsInfeasible) {
    const SystemConfig cfg = defaults();
    int infeasible = 0;
    for (std::uint64_t seed : {301ull, 302ull, 303ull}) {
        const ChannelSet ch = draw_channels(cfg, seed);
        const AlgorithmReport rep = run_algorithm1(ch, cfg);
        if (rep.status == AlgoStatus::infeasible_scenario) {
            ++infeasible;
            EXPECT_TRUE(rep.trace.empty());
        }
    }
    EXPECT_EQ(infeasible, 3);
}

TEST(Variants, NoJammingPinsCovariance) {
    const SystemConfig cfg = far_eves();
    const ChannelSet ch = draw_channels(cfg, 401);
    const AlgorithmReport base = run_algorithm1(ch, cfg);
    const AlgorithmReport nojn = run_no_jn(ch, cfg);
    ASSERT_NE(base.status, AlgoStatus::infeasible_scenario);
    ASSERT_NE(nojn.status, AlgoStatus::infeasible_scenario);
    EXPECT_EQ(nojn.final_state.design.u_cov.norm(), 0.0);
    for (size_t i = 1; i < nojn.trace.size(); ++i)
        EXPECT_GE(nojn.trace[i], nojn.trace[i - 1] - 1e-6);
    EXPECT_LE(nojn.trace.back(), base.trace.back() + 1e-6);
}

TEST(Variants, NonRobustMatchesWhenErrorFree) {
    SystemConfig cfg = far_eves();
    cfg.normalized_error = {0.0, 0.0};
    cfg.finalize();
    const ChannelSet ch = draw_channels(cfg, 402);
    const AlgorithmReport a = run_algorithm1(ch, cfg);
    const AlgorithmReport b = run_non_robust(ch, cfg);
    ASSERT_EQ(a.status, b.status);
    ASSERT_NE(a.status, AlgoStatus::infeasible_scenario);
    EXPECT_NEAR(a.final_state.varphi, b.final_state.varphi, 1e-9);
}

TEST(Complexity, PrintedFormulaAndCensus) {
    const SystemConfig cfg = defaults();
    const ComplexityReport r = complexity_report(cfg);
    EXPECT_EQ(r.n, 100);
    EXPECT_EQ(r.sqrt_term, 74.0);
    EXPECT_EQ(r.bracket, 85482.0);
    EXPECT_NEAR(r.operand, 100.0 * std::sqrt(74.0) * 85482.0, 1.0);
    EXPECT_EQ(r.census.count(ConeTag::psd, 10), 4);
    EXPECT_EQ(r.census.count(ConeTag::psd, 9), 2);

    SystemConfig wide;
    wide.n_prs = 4;
    wide.min_primary_secrecy = {1.0, 1.0, 1.0, 1.0};
    wide.normalized_error = {0.05, 0.05, 0.05, 0.05};
    wide.finalize();
    validate_config(wide);
    const ComplexityReport r2 = complexity_report(wide);
    EXPECT_EQ(r2.census.count(ConeTag::psd, 10), 8);
    EXPECT_EQ(r2.census.count(ConeTag::psd, 9), 4);
}

}  // namespace
