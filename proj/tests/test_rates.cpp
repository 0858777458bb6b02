#include <gtest/gtest.h>

#include <cmath>

#include <secbeam/rates.hpp>

using namespace secbeam;

namespace {

SystemConfig defaults() {
    SystemConfig cfg;
    cfg.finalize();
    return cfg;
}

BeamDesign random_design(const SystemConfig& cfg, std::uint64_t seed,
                         double beam_scale = 1.0, double jam_scale = 1.0) {
    Rng r(seed);
    BeamDesign d = BeamDesign::zeros(cfg.n_antennas, cfg.n_groups);
    for (auto& wg : d.w) wg = beam_scale * r.cn01_vec(cfg.n_antennas);
    cmat A(cfg.n_antennas, cfg.n_antennas);
    for (int i = 0; i < cfg.n_antennas; ++i) A.col(i) = r.cn01_vec(cfg.n_antennas);
    d.u_cov = jam_scale * (A * A.adjoint()) / cfg.n_antennas;
    return d;
}

TEST(Sinr, SilentSecondary) {
    const SystemConfig cfg = defaults();
    const ChannelSet ch = draw_channels(cfg, 2);
    const BeamDesign d = BeamDesign::zeros(cfg.n_antennas, cfg.n_groups);
    const SinrTable t = sinr_all(d, ch, cfg);
    for (int l = 0; l < cfg.n_prs; ++l) {
        const double expect = cfg.pt_power * std::norm(ch.h_pr[l]) /
                              cfg.noise_variances.pr[l];
        EXPECT_NEAR(t.primary[l], expect, 1e-12 * expect);
    }
    for (const auto& grp : t.secondary)
        for (double s : grp) EXPECT_DOUBLE_EQ(s, 0.0);
}

TEST(Sinr, UnitScalarCase) {
    SystemConfig cfg;
    cfg.n_antennas = 1;
    cfg.n_groups = 1;
    cfg.srs_per_group = {1};
    cfg.eves_per_group = {1};
    cfg.pt_power = 1e-300;  // no primary transmission
    cfg.finalize();
    ChannelSet ch = draw_channels(cfg, 1);
    ch.h_sr[0][0] = cvec::Ones(1);
    ch.f_pt_sr[0][0] = 0.0;
    BeamDesign d = BeamDesign::zeros(1, 1);
    d.w[0] = cvec::Ones(1);
    const SinrTable t = sinr_all(d, ch, cfg);
    EXPECT_NEAR(t.secondary[0][0], 1.0, 1e-12);
}

TEST(Sinr, TwoCodingsAgree) {
    const SystemConfig cfg = defaults();
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const ChannelSet ch = draw_channels(cfg, s);
        const BeamDesign d = random_design(cfg, s + 5000);
        const SinrTable t = sinr_all(d, ch, cfg);
        for (int g = 0; g < cfg.n_groups; ++g)
            for (int m = 0; m < cfg.srs_per_group[g]; ++m) {
                const double alt = secondary_sinr_quadform(d, ch, cfg, g, m);
                ASSERT_NEAR(t.secondary[g][m], alt,
                            1e-12 * std::max(1.0, std::abs(alt)));
            }
    }
}

TEST(Sinr, JammingMonotone) {
    const SystemConfig cfg = defaults();
    const ChannelSet ch = draw_channels(cfg, 9);
    const BeamDesign d = random_design(cfg, 77);
    BeamDesign heavier = d;
    Rng r(123);
    cmat B(cfg.n_antennas, cfg.n_antennas);
    for (int i = 0; i < cfg.n_antennas; ++i) B.col(i) = r.cn01_vec(cfg.n_antennas);
    heavier.u_cov += B * B.adjoint();
    const SinrTable a = sinr_all(d, ch, cfg);
    const SinrTable b = sinr_all(heavier, ch, cfg);
    for (int l = 0; l < cfg.n_prs; ++l) EXPECT_LE(b.primary[l], a.primary[l]);
    for (int k = 0; k < cfg.n_primary_eves; ++k)
        EXPECT_LE(b.primary_eve[k], a.primary_eve[k]);
    for (int g = 0; g < cfg.n_groups; ++g) {
        for (size_t m = 0; m < a.secondary[g].size(); ++m)
            EXPECT_LE(b.secondary[g][m], a.secondary[g][m]);
        for (size_t k = 0; k < a.secondary_eve[g].size(); ++k)
            EXPECT_LE(b.secondary_eve[g][k], a.secondary_eve[g][k]);
    }
}

TEST(Sinr, ScaleInvariance) {
    SystemConfig cfg = defaults();
    const ChannelSet ch = draw_channels(cfg, 14);
    const BeamDesign d = random_design(cfg, 15);
    const SinrTable base = sinr_all(d, ch, cfg);

    const double c = 7.3;
    SystemConfig scaled_cfg = cfg;
    scaled_cfg.pt_power *= c;
    auto scale_all = [&](std::vector<double>& v) {
        for (double& x : v) x *= c;
    };
    scale_all(scaled_cfg.noise_variances.pr);
    scale_all(scaled_cfg.noise_variances.eve_primary);
    for (auto& v : scaled_cfg.noise_variances.sr) scale_all(v);
    for (auto& v : scaled_cfg.noise_variances.eve_secondary) scale_all(v);
    BeamDesign sd = d;
    for (auto& wg : sd.w) wg *= std::sqrt(c);
    sd.u_cov *= c;

    const SinrTable s = sinr_all(sd, ch, scaled_cfg);
    for (int l = 0; l < cfg.n_prs; ++l)
        EXPECT_NEAR(s.primary[l], base.primary[l], 1e-10 * base.primary[l]);
    for (int g = 0; g < cfg.n_groups; ++g)
        for (size_t m = 0; m < base.secondary[g].size(); ++m)
            EXPECT_NEAR(s.secondary[g][m], base.secondary[g][m],
                        1e-10 * std::max(1.0, base.secondary[g][m]));
}

TEST(Secrecy, ClipAndAnalytic) {
    SystemConfig cfg = defaults();
    const ChannelSet ch = draw_channels(cfg, 3);
    const BeamDesign d = random_design(cfg, 4);
    const SecrecyReport rep = secrecy_report(d, ch, cfg);
    for (double r : rep.primary_rates) EXPECT_GE(r, 0.0);
    double lo = 1e300;
    for (const auto& grp : rep.secondary_rates)
        for (double r : grp) {
            EXPECT_GE(r, 0.0);
            lo = std::min(lo, r);
        }
    EXPECT_DOUBLE_EQ(rep.min_secondary, lo);
}

TEST(Secrecy, MaxEveBinds) {
    // legit SINR 7 against Eve SINRs {1, 3}: log2(8) - log2(4) = 1.
    EXPECT_NEAR(std::log2(1.0 + 7.0) - std::log2(1.0 + 3.0), 1.0, 1e-15);
    SystemConfig cfg = defaults();
    cfg.n_antennas = 1;
    cfg.finalize();
    ChannelSet ch = draw_channels(cfg, 6);
    const BeamDesign d = BeamDesign::zeros(1, cfg.n_groups);
    // with w = 0, U = 0 the primary SINRs are P_p|h|^2 / sigma^2; pick channels
    ch.h_pr[0] = std::sqrt(7.0 / cfg.pt_power);
    ch.h_pr[1] = std::sqrt(7.0 / cfg.pt_power);
    ch.g_eve_p[0] = std::sqrt(1.0 / cfg.pt_power);
    ch.g_eve_p[1] = std::sqrt(3.0 / cfg.pt_power);
    const SecrecyReport rep = secrecy_report(d, ch, cfg);
    EXPECT_NEAR(rep.primary_rates[0], 1.0, 1e-12);
    EXPECT_NEAR(rep.primary_rates[1], 1.0, 1e-12);
}

TEST(Objective, Examples) {
    SystemConfig cfg = defaults();
    cfg.n_antennas = 2;
    cfg.srs_per_group = {1, 1};
    cfg.finalize();
    ChannelSet ch = draw_channels(cfg, 8);
    BeamDesign d = BeamDesign::zeros(2, 2);
    d.w[0] = cvec::Zero(2);
    d.w[0][0] = 1.0;
    d.w[1] = cvec::Zero(2);
    d.w[1][1] = 1.0;
    // orthogonal channels so each SR hears only its own beam
    ch.h_sr[0][0] = cvec::Zero(2);
    ch.h_sr[0][0][0] = std::sqrt(7.0);
    ch.h_sr[1][0] = cvec::Zero(2);
    ch.h_sr[1][0][1] = std::sqrt(3.0);
    ch.f_pt_sr[0][0] = 0.0;
    ch.f_pt_sr[1][0] = 0.0;
    const double v = objective_value(d, ch, cfg, {1.0, 1.0}, {0.1, 0.5});
    EXPECT_NEAR(v, 1.0, 1e-12);  // second group binds: log2(4) - log2(2)

    const SinrTable t = sinr_all(d, ch, cfg);
    const double zero =
        objective_value(d, ch, cfg, {t.secondary[0][0], t.secondary[1][0]},
                        {0.1, 0.5});
    EXPECT_NEAR(zero, 0.0, 1e-12);
    EXPECT_THROW(objective_value(d, ch, cfg, {0.0, 1.0}, {0.1, 0.5}),
                 config_error);
}

TEST(WorstCase, EmptyBallIsNominal) {
    SystemConfig cfg = defaults();
    cfg.normalized_error = {0.0, 0.0};
    const ChannelSet ch = draw_channels(cfg, 21);
    const BeamDesign d = random_design(cfg, 22);
    const SinrTable t = sinr_all(d, ch, cfg);
    const auto wc = worst_case_primary(d, ch, cfg, 64);
    for (int l = 0; l < cfg.n_prs; ++l)
        EXPECT_NEAR(wc[l], t.primary[l], 1e-12 * t.primary[l]);
}

TEST(WorstCase, SingleBeamClosedForm) {
    SystemConfig cfg = defaults();
    cfg.n_groups = 1;
    cfg.srs_per_group = {2};
    cfg.eves_per_group = {2};
    cfg.finalize();
    const ChannelSet ch = draw_channels(cfg, 31);
    Rng r(32);
    BeamDesign d = BeamDesign::zeros(cfg.n_antennas, 1);
    d.w[0] = 2.0 * r.cn01_vec(cfg.n_antennas);
    const auto wc = worst_case_primary(d, ch, cfg, 400);
    for (int l = 0; l < cfg.n_prs; ++l) {
        const double amp = std::abs(ch.f_st_pr_est[l].dot(d.w[0])) +
                           ch.f_err_radius[l] * d.w[0].norm();
        const double expect = cfg.pt_power * std::norm(ch.h_pr[l]) /
                              (amp * amp + cfg.noise_variances.pr[l]);
        EXPECT_NEAR(wc[l], expect, 0.005 * expect);
    }
}

TEST(WorstCase, IsotropicJamClosedForm) {
    SystemConfig cfg = defaults();
    const ChannelSet ch = draw_channels(cfg, 41);
    BeamDesign d = BeamDesign::zeros(cfg.n_antennas, cfg.n_groups);
    d.u_cov = cmat::Identity(cfg.n_antennas, cfg.n_antennas);
    const auto wc = worst_case_primary(d, ch, cfg, 400);
    for (int l = 0; l < cfg.n_prs; ++l) {
        const double nrm = ch.f_st_pr_est[l].norm() + ch.f_err_radius[l];
        const double expect = cfg.pt_power * std::norm(ch.h_pr[l]) /
                              (nrm * nrm + cfg.noise_variances.pr[l]);
        EXPECT_NEAR(wc[l], expect, 0.005 * expect);
    }
}

TEST(WorstCase, NeverAboveNominalAtEstimate) {
    const SystemConfig cfg = defaults();
    for (std::uint64_t s = 50; s < 60; ++s) {
        const ChannelSet ch = draw_channels(cfg, s);
        const BeamDesign d = random_design(cfg, s + 1);
        const auto wc = worst_case_primary(d, ch, cfg, 128);
        for (int l = 0; l < cfg.n_prs; ++l) {
            cmat Q = d.u_cov;
            for (const auto& wg : d.w) Q += wg * wg.adjoint();
            const double nominal =
                cfg.pt_power * std::norm(ch.h_pr[l]) /
                (quadform(Q, ch.f_st_pr_est[l]) + cfg.noise_variances.pr[l]);
            ASSERT_LE(wc[l], nominal * (1 + 1e-12));
        }
    }
}

TEST(WorstCase, MonotoneInRadius) {
    SystemConfig small = defaults();
    small.normalized_error = {0.02, 0.02};
    SystemConfig big = small;
    big.normalized_error = {0.08, 0.08};
    for (std::uint64_t s = 70; s < 80; ++s) {
        const ChannelSet cs = draw_channels(small, s);
        const ChannelSet cb = draw_channels(big, s);
        const BeamDesign d = random_design(small, s + 2);
        // same estimate so the two balls are concentric
        ChannelSet cb2 = cb;
        cb2.f_st_pr_est = cs.f_st_pr_est;
        const auto ws = worst_case_primary(d, cs, small, 256);
        const auto wb = worst_case_primary(d, cb2, big, 256);
        for (int l = 0; l < small.n_prs; ++l)
            ASSERT_LE(wb[l], ws[l] * (1 + 1e-7));
    }
}

// Exact tail probability for the primary-side Eve MC: with fresh Gaussian
// Eve channels, Pr(SINR_k <= t) = 1 - exp(-t s2/Pp) prod_i (1 + t lam_i/Pp)^-1
// over the eigenvalues of the total ST transmit covariance.
double primary_tail_exact(const BeamDesign& d, const SystemConfig& cfg,
                          double t) {
    cmat Q = d.u_cov;
    for (const auto& wg : d.w) Q += wg * wg.adjoint();
    Eigen::SelfAdjointEigenSolver<cmat> es(Q);
    double total = 1.0;
    for (int k = 0; k < cfg.n_primary_eves; ++k) {
        double miss = std::exp(-t * cfg.noise_variances.eve_primary[k] / cfg.pt_power);
        for (int i = 0; i < Q.rows(); ++i)
            miss /= 1.0 + t * std::max(0.0, es.eigenvalues()[i]) / cfg.pt_power;
        total *= 1.0 - miss;
    }
    return total;
}

TEST(EveOutage, VacuousThreshold) {
    const SystemConfig cfg = defaults();
    const BeamDesign d = random_design(cfg, 90);
    EXPECT_DOUBLE_EQ(eve_outage_mc(d, cfg, 1e12, kPrimarySide, 2000, 1), 1.0);
    EXPECT_DOUBLE_EQ(eve_outage_mc(d, cfg, 1e12, 0, 2000, 1), 1.0);
}

TEST(EveOutage, SilentBeamSecondary) {
    const SystemConfig cfg = defaults();
    BeamDesign d = random_design(cfg, 91);
    d.w[1] = cvec::Zero(cfg.n_antennas);
    EXPECT_DOUBLE_EQ(eve_outage_mc(d, cfg, 1e-9, 1, 2000, 2), 1.0);
}

TEST(EveOutage, PrimaryMatchesExactTail) {
    const SystemConfig cfg = defaults();
    for (std::uint64_t s = 0; s < 3; ++s) {
        const BeamDesign d = random_design(cfg, 100 + s, 1.5, 2.0);
        const double t = 1.0 + 0.7 * s;
        const double exact = primary_tail_exact(d, cfg, t);
        const int n = 20000;
        const double mc = eve_outage_mc(d, cfg, t, kPrimarySide, n, 7 + s);
        const double sd = std::sqrt(exact * (1 - exact) / n);
        ASSERT_NEAR(mc, exact, 4.5 * sd + 1e-6);
    }
}

TEST(EveOutage, SecondaryMatchesExactTail) {
    // single active beam, no jamming: the Eve SINR tail has a closed form
    SystemConfig cfg = defaults();
    cfg.finalize();
    BeamDesign d = BeamDesign::zeros(cfg.n_antennas, cfg.n_groups);
    Rng r(333);
    d.w[0] = 1.7 * r.cn01_vec(cfg.n_antennas);
    const double p2 = d.w[0].squaredNorm();
    const double t = 0.8;
    const double s2 = cfg.noise_variances.eve_secondary[0][0];
    const double per_eve =
        1.0 - std::exp(-t * s2 / p2) / (1.0 + t * cfg.pt_power / p2);
    const double exact = std::pow(per_eve, cfg.eves_per_group[0]);
    const int n = 20000;
    const double mc = eve_outage_mc(d, cfg, t, 0, n, 17);
    const double sd = std::sqrt(exact * (1 - exact) / n);
    EXPECT_NEAR(mc, exact, 4.5 * sd + 1e-6);
}

TEST(EveOutage, IsotropicJamCertificateTight) {
    // theta chosen so the designed tail sits exactly at the target: the MC
    // estimate must land within binomial noise of 0.99, and a 5% stronger
    // jam must clear the target with room.
    const SystemConfig cfg = defaults();
    const int n = cfg.n_antennas;
    const double eps = cfg.outage_targets.eps_tilde;
    const double beta = 2.0;
    const double c = std::pow(1.0 - std::pow(eps, 1.0 / cfg.n_primary_eves),
                              1.0 / n);
    const double theta =
        (std::exp(-beta * 1.0 / (n * cfg.pt_power)) / c - 1.0) *
        cfg.pt_power / beta;
    BeamDesign d = BeamDesign::zeros(n, cfg.n_groups);
    d.u_cov = theta * cmat::Identity(n, n);

    const double exact = primary_tail_exact(d, cfg, beta);
    EXPECT_NEAR(exact, eps, 1e-9);

    const int samples = 100000;
    const double mc = eve_outage_mc(d, cfg, beta, kPrimarySide, samples, 23);
    const double sd = std::sqrt(eps * (1 - eps) / samples);
    EXPECT_NEAR(mc, eps, 4.0 * sd);

    BeamDesign stronger = d;
    stronger.u_cov *= 1.05;
    const double mc2 =
        eve_outage_mc(stronger, cfg, beta, kPrimarySide, samples, 23);
    EXPECT_GE(mc2, eps);
}

}  // namespace
