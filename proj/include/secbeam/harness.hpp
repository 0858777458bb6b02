#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include <secbeam/rates.hpp>
#include <secbeam/sca.hpp>
#include <secbeam/scenario.hpp>
#include <secbeam/version.hpp>

namespace secbeam {

enum class Scheme { proposed, no_jn, non_robust };

inline const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::proposed: return "proposed";
        case Scheme::no_jn: return "no_jn";
        case Scheme::non_robust: return "non_robust";
    }
    return "unknown";
}

inline Scheme scheme_from_name(const std::string& name) {
    if (name == "proposed") return Scheme::proposed;
    if (name == "no_jn") return Scheme::no_jn;
    if (name == "non_robust") return Scheme::non_robust;
    throw config_error("unknown scheme: " + name);
}

struct ExperimentSpec {
    enum class Kind { convergence, power_sweep, cdf };
    Kind kind = Kind::convergence;
    std::vector<double> sweep;
    int trials = 1;
    std::vector<Scheme> schemes = {Scheme::proposed};
    std::string out_path;
    std::uint64_t master_seed = 12345;
    int threads = 1;
    bool timing = false;
};

inline const char* kind_name(ExperimentSpec::Kind k) {
    switch (k) {
        case ExperimentSpec::Kind::convergence: return "convergence";
        case ExperimentSpec::Kind::power_sweep: return "power_sweep";
        case ExperimentSpec::Kind::cdf: return "cdf";
    }
    return "unknown";
}

struct ResultRow {
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::proposed;
    double sweep = 0.0;
    int iterations = 0;
    std::string status;
    double objective_bps = 0.0;
    double sampled_secrecy_bps = 0.0;
    double primary_margin_bps = 0.0;
    double outage_secondary = 0.0;
    double outage_primary = 0.0;
    double ms = 0.0;
};

// Final design of one converged trial, kept so emitted rates can be
// re-derived from the rates oracle after the fact.
struct AuditRecord {
    std::size_t row_index = 0;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::proposed;
    double sweep = 0.0;
    BeamDesign design;
    std::vector<double> phi;
    double beta = 0.0;
    double z = 0.0;
};

struct RunResult {
    std::vector<ResultRow> rows;
    std::vector<AuditRecord> audits;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

inline void validate_spec(const ExperimentSpec& spec) {
    if (spec.trials < 1) throw config_error("trials must be at least 1");
    if (spec.sweep.empty()) throw config_error("sweep must be nonempty");
    if (spec.schemes.empty()) throw config_error("schemes must be nonempty");
}

// Applies the operating point an experiment kind pins down: convergence
// sweeps the antenna count at R = 2 bps/Hz and 15 dBm, the power sweep
// scans the budget in dBm at R = 1 and N = 8, the CDF study fixes 20 dBm
// at R = 1 and N = 8. Everything else comes from the base config.
inline SystemConfig experiment_config(const ExperimentSpec& spec,
                                      const SystemConfig& base,
                                      double sweep_value) {
    SystemConfig cfg = base;
    switch (spec.kind) {
        case ExperimentSpec::Kind::convergence: {
            const int n = static_cast<int>(sweep_value);
            if (n < 1 || static_cast<double>(n) != sweep_value)
                throw config_error(
                    "antenna sweep values must be positive integers");
            cfg.n_antennas = n;
            cfg.min_primary_secrecy.assign(cfg.n_prs, 2.0);
            cfg.st_power_budget = dbm_to_mw(15.0);
            break;
        }
        case ExperimentSpec::Kind::power_sweep:
            cfg.n_antennas = 8;
            cfg.min_primary_secrecy.assign(cfg.n_prs, 1.0);
            cfg.st_power_budget = dbm_to_mw(sweep_value);
            break;
        case ExperimentSpec::Kind::cdf:
            cfg.n_antennas = 8;
            cfg.min_primary_secrecy.assign(cfg.n_prs, 1.0);
            cfg.st_power_budget = dbm_to_mw(20.0);
            break;
    }
    return cfg;
}

namespace detail {

inline AlgorithmReport dispatch_scheme(Scheme s, const ChannelSet& ch,
                                       const SystemConfig& cfg) {
    switch (s) {
        case Scheme::no_jn: return run_no_jn(ch, cfg);
        case Scheme::non_robust: return run_non_robust(ch, cfg);
        default: return run_algorithm1(ch, cfg);
    }
}

struct EvalMetrics {
    double sampled_secrecy = 0.0;
    double primary_margin = 0.0;
    double outage_secondary = 0.0;
    double outage_primary = 0.0;
};

// Scores a finished design with the rates oracle: sampled secondary
// secrecy under the optimized Eve caps, the worst primary secrecy margin
// over the error ball, and empirical outage on both Eve populations.
inline EvalMetrics evaluate_design(const IterateState& st,
                                   const ChannelSet& ch,
                                   const SystemConfig& cfg,
                                   std::uint64_t trial_seed) {
    EvalMetrics m;
    m.sampled_secrecy =
        objective_value(st.design, ch, cfg, st.phi, RateCaps{st.z, st.beta});
    const std::vector<double> wc =
        worst_case_primary(st.design, ch, cfg, cfg.mc.ball_samples);
    double margin = std::numeric_limits<double>::infinity();
    for (int l = 0; l < cfg.n_prs; ++l)
        margin = std::min(margin, std::log2(1.0 + wc[l]) - st.z -
                                      cfg.min_primary_secrecy[l]);
    m.primary_margin = margin;
    double osec = std::numeric_limits<double>::infinity();
    for (int g = 0; g < cfg.n_groups; ++g)
        osec = std::min(
            osec, eve_outage_mc(st.design, cfg, st.phi[g], g,
                                cfg.mc.outage_samples,
                                substream_seed(trial_seed, "outage_sec", g)));
    m.outage_secondary = osec;
    m.outage_primary =
        eve_outage_mc(st.design, cfg, st.beta, kPrimarySide,
                      cfg.mc.outage_samples,
                      substream_seed(trial_seed, "outage_pri"));
    return m;
}

struct TrialResult {
    std::vector<ResultRow> rows;
    bool converged = false;
    IterateState final_state;
};

inline ResultRow base_row(std::uint64_t seed, Scheme scheme, double sweep) {
    ResultRow r;
    r.seed = seed;
    r.scheme = scheme;
    r.sweep = sweep;
    return r;
}

// Runs one scheme on one channel draw and renders it as rows. Sweep and
// CDF trials produce a single row; convergence trials produce one row per
// iteration with the full metric set on the last. A numerical failure is
// reported as a status row rather than aborting the batch.
inline TrialResult run_trial(const ExperimentSpec& spec, Scheme scheme,
                             double sweep_value, const SystemConfig& base,
                             std::uint64_t trial_seed) {
    SystemConfig cfg = experiment_config(spec, base, sweep_value);
    cfg.seed = trial_seed;
    const ChannelSet ch = draw_channels(cfg, trial_seed);

    TrialResult out;
    const auto t0 = std::chrono::steady_clock::now();
    AlgorithmReport rep;
    try {
        rep = dispatch_scheme(scheme, ch, cfg);
    } catch (const numerical_error&) {
        ResultRow r = base_row(trial_seed, scheme, sweep_value);
        r.status = "numerical_failure";
        out.rows.push_back(r);
        return out;
    }
    const double ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - t0)
            .count();

    if (rep.status == AlgoStatus::infeasible_scenario) {
        ResultRow r = base_row(trial_seed, scheme, sweep_value);
        r.status = algo_status_name(rep.status);
        if (spec.timing) r.ms = ms;
        out.rows.push_back(r);
        return out;
    }

    const EvalMetrics m = evaluate_design(rep.final_state, ch, cfg, trial_seed);
    ResultRow last = base_row(trial_seed, scheme, sweep_value);
    last.iterations = rep.iterations_used;
    last.status = algo_status_name(rep.status);
    last.objective_bps = std::max(rep.trace.back(), 0.0);
    last.sampled_secrecy_bps = m.sampled_secrecy;
    last.primary_margin_bps = m.primary_margin;
    last.outage_secondary = m.outage_secondary;
    last.outage_primary = m.outage_primary;
    if (spec.timing) last.ms = ms;

    if (spec.kind == ExperimentSpec::Kind::convergence) {
        for (int i = 1; i < rep.iterations_used; ++i) {
            ResultRow r = base_row(trial_seed, scheme, sweep_value);
            r.iterations = i;
            r.status = last.status;
            r.objective_bps = std::max(rep.trace[i], 0.0);
            out.rows.push_back(r);
        }
    }
    out.rows.push_back(last);
    out.converged = rep.status == AlgoStatus::converged;
    out.final_state = rep.final_state;
    return out;
}

inline void run_tasks(int threads, int n_tasks,
                      const std::function<void(int)>& fn) {
    if (threads == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        threads = hw ? static_cast<int>(hw) : 1;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1))
            fn(i);
    };
    if (threads <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

inline bool row_order(const ResultRow& a, const ResultRow& b) {
    if (a.sweep != b.sweep) return a.sweep < b.sweep;
    const int sc = std::strcmp(scheme_name(a.scheme), scheme_name(b.scheme));
    if (sc != 0) return sc < 0;
    return a.seed < b.seed;
}

inline std::size_t locate_final_row(const std::vector<ResultRow>& rows,
                                    const AuditRecord& rec) {
    std::size_t best = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const ResultRow& r = rows[i];
        if (r.seed != rec.seed || r.scheme != rec.scheme ||
            r.sweep != rec.sweep || r.status == "aggregate")
            continue;
        if (best == rows.size() || r.iterations > rows[best].iterations)
            best = i;
    }
    return best;
}

inline RunResult run_grid(const ExperimentSpec& spec, const SystemConfig& base,
                          bool with_aggregates) {
    validate_spec(spec);
    const int n_points = static_cast<int>(spec.sweep.size());
    const int n_schemes = static_cast<int>(spec.schemes.size());
    const int n_tasks = n_points * n_schemes * spec.trials;

    std::vector<TrialResult> slots(n_tasks);
    run_tasks(spec.threads, n_tasks, [&](int task) {
        const int point = task / (n_schemes * spec.trials);
        const int scheme = (task / spec.trials) % n_schemes;
        const int trial = task % spec.trials;
        const std::uint64_t seed =
            substream_seed(spec.master_seed, "trial", trial);
        slots[task] = run_trial(spec, spec.schemes[scheme], spec.sweep[point],
                                base, seed);
    });

    RunResult out;
    constexpr std::size_t kMaxAudits = 10;
    for (int task = 0; task < n_tasks; ++task) {
        TrialResult& t = slots[task];
        if (t.converged && out.audits.size() < kMaxAudits) {
            const ResultRow& last = t.rows.back();
            AuditRecord rec;
            rec.seed = last.seed;
            rec.scheme = last.scheme;
            rec.sweep = last.sweep;
            rec.design = t.final_state.design;
            rec.phi = t.final_state.phi;
            rec.beta = t.final_state.beta;
            rec.z = t.final_state.z;
            out.audits.push_back(std::move(rec));
        }
        for (auto& r : t.rows) out.rows.push_back(std::move(r));
    }

    if (with_aggregates) {
        for (int point = 0; point < n_points; ++point)
            for (int scheme = 0; scheme < n_schemes; ++scheme) {
                ResultRow agg;
                agg.scheme = spec.schemes[scheme];
                agg.sweep = spec.sweep[point];
                agg.status = "aggregate";
                agg.iterations = spec.trials;
                int converged = 0;
                for (const auto& r : out.rows) {
                    if (r.scheme != agg.scheme || r.sweep != agg.sweep ||
                        r.status != "converged")
                        continue;
                    ++converged;
                    agg.objective_bps += r.objective_bps;
                    agg.sampled_secrecy_bps += r.sampled_secrecy_bps;
                    agg.primary_margin_bps += r.primary_margin_bps;
                    agg.outage_secondary += r.outage_secondary;
                    agg.outage_primary += r.outage_primary;
                }
                if (converged > 0) {
                    agg.objective_bps /= converged;
                    agg.sampled_secrecy_bps /= converged;
                    agg.primary_margin_bps /= converged;
                    agg.outage_secondary /= converged;
                    agg.outage_primary /= converged;
                }
                agg.seed = static_cast<std::uint64_t>(converged);
                out.rows.push_back(agg);
            }
    }

    std::stable_sort(out.rows.begin(), out.rows.end(), row_order);
    for (auto& rec : out.audits) rec.row_index = locate_final_row(out.rows, rec);
    return out;
}

}  // namespace detail

inline RunResult run_convergence(const ExperimentSpec& spec,
                                 const SystemConfig& cfg) {
    if (spec.kind != ExperimentSpec::Kind::convergence)
        throw config_error("spec kind is not convergence");
    return detail::run_grid(spec, cfg, false);
}

inline RunResult run_power_sweep(const ExperimentSpec& spec,
                                 const SystemConfig& cfg) {
    if (spec.kind != ExperimentSpec::Kind::power_sweep)
        throw config_error("spec kind is not power_sweep");
    return detail::run_grid(spec, cfg, true);
}

inline RunResult run_cdf(const ExperimentSpec& spec, const SystemConfig& cfg) {
    if (spec.kind != ExperimentSpec::Kind::cdf)
        throw config_error("spec kind is not cdf");
    ExperimentSpec fixed = spec;
    fixed.sweep = {20.0};
    return detail::run_grid(fixed, cfg, false);
}

// Per-scheme empirical CDF of the certified objective over converged
// trials: sorted values with probability coordinates (i+1)/n.
inline nlohmann::json cdf_extras(const std::vector<ResultRow>& rows) {
    nlohmann::json out = nlohmann::json::object();
    for (Scheme s : {Scheme::proposed, Scheme::no_jn, Scheme::non_robust}) {
        std::vector<double> obj;
        int trials = 0;
        for (const auto& r : rows) {
            if (r.scheme != s || r.status == "aggregate") continue;
            ++trials;
            if (r.status == "converged") obj.push_back(r.objective_bps);
        }
        if (trials == 0) continue;
        std::sort(obj.begin(), obj.end());
        std::vector<double> prob(obj.size());
        for (std::size_t i = 0; i < obj.size(); ++i)
            prob[i] = static_cast<double>(i + 1) / obj.size();
        out[scheme_name(s)] = {{"objective_bps", obj},
                               {"probability", prob},
                               {"converged", obj.size()},
                               {"trials", trials}};
    }
    return out;
}

inline nlohmann::json design_to_json(const BeamDesign& d) {
    nlohmann::json j;
    auto pack = [](const cplx& c) {
        return nlohmann::json::array({c.real(), c.imag()});
    };
    j["w"] = nlohmann::json::array();
    for (const auto& wg : d.w) {
        nlohmann::json col = nlohmann::json::array();
        for (int i = 0; i < wg.size(); ++i) col.push_back(pack(wg[i]));
        j["w"].push_back(col);
    }
    j["u"] = nlohmann::json::array();
    for (int r = 0; r < d.u_cov.rows(); ++r)
        for (int c = 0; c < d.u_cov.cols(); ++c)
            j["u"].push_back(pack(d.u_cov(r, c)));
    return j;
}

inline BeamDesign design_from_json(const nlohmann::json& j) {
    auto unpack = [](const nlohmann::json& e) {
        return cplx(e.at(0).get<double>(), e.at(1).get<double>());
    };
    BeamDesign d;
    for (const auto& col : j.at("w")) {
        cvec wg(col.size());
        for (std::size_t i = 0; i < col.size(); ++i) wg[i] = unpack(col[i]);
        d.w.push_back(wg);
    }
    const int n = d.w.empty() ? 0 : static_cast<int>(d.w[0].size());
    d.u_cov = cmat::Zero(n, n);
    const auto& u = j.at("u");
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) d.u_cov(r, c) = unpack(u[r * n + c]);
    return d;
}

inline nlohmann::json sidecar_json(const ExperimentSpec& spec,
                                   const SystemConfig& cfg,
                                   const std::vector<AuditRecord>& audits,
                                   const nlohmann::json& extras) {
    nlohmann::json side;
    side["version"] = kVersion;
    side["kind"] = kind_name(spec.kind);
    side["master_seed"] = spec.master_seed;
    side["trials"] = spec.trials;
    side["sweep"] = spec.sweep;
    nlohmann::json schemes = nlohmann::json::array();
    for (Scheme s : spec.schemes) schemes.push_back(scheme_name(s));
    side["schemes"] = schemes;
    side["config"] = config_to_json(cfg);
    nlohmann::json aj = nlohmann::json::array();
    for (const auto& rec : audits) {
        nlohmann::json a;
        a["row_index"] = rec.row_index;
        a["seed"] = rec.seed;
        a["scheme"] = scheme_name(rec.scheme);
        a["sweep"] = rec.sweep;
        a["design"] = design_to_json(rec.design);
        a["phi"] = rec.phi;
        a["beta"] = rec.beta;
        a["z"] = rec.z;
        aj.push_back(a);
    }
    side["audits"] = aj;
    if (!extras.is_null() && !extras.empty()) side["extras"] = extras;
    return side;
}

// Writes rows as CSV in the given order, plus a JSON sidecar at
// <path>.json holding the config, version, audit designs, and any
// kind-specific extras.
inline void emit_results(const std::vector<ResultRow>& rows,
                         const std::string& path, const ExperimentSpec& spec,
                         const SystemConfig& cfg,
                         const std::vector<AuditRecord>& audits = {},
                         const nlohmann::json& extras = {}) {
    if (rows.empty()) throw config_error("no rows to emit");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open output file: " + path);
    out << "seed,scheme,sweep,iterations,status,objective_bps,"
           "sampled_secrecy_bps,primary_margin_bps,outage_secondary,"
           "outage_primary,ms\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.9g", v);
        return std::string(buf);
    };
    for (const auto& r : rows) {
        out << r.seed << ',' << scheme_name(r.scheme) << ',' << num(r.sweep)
            << ',' << r.iterations << ',' << r.status << ','
            << num(r.objective_bps) << ',' << num(r.sampled_secrecy_bps) << ','
            << num(r.primary_margin_bps) << ',' << num(r.outage_secondary)
            << ',' << num(r.outage_primary) << ',' << num(r.ms) << '\n';
    }
    if (!out) throw config_error("write failed: " + path);
    out.close();

    std::ofstream side(path + ".json", std::ios::binary);
    if (!side) throw config_error("cannot open output file: " + path + ".json");
    side << sidecar_json(spec, cfg, audits, extras).dump(2) << '\n';
}

}  // namespace secbeam
