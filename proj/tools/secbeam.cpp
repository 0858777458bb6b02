#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <secbeam/harness.hpp>

namespace {

struct Args {
    std::string config;
    std::string out;
    std::string dump;
    std::uint64_t seed = 0;
    int trials = 0;
    std::vector<std::string> schemes;
    std::vector<double> sweep;
    int threads = 1;
    bool timing = false;
    CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* sub, Args& a) {
    sub->add_option("--config", a.config, "JSON config file");
    a.seed_opt = sub->add_option("--seed", a.seed, "master seed");
    sub->add_option("--trials", a.trials, "seeded trials per point");
    sub->add_option("--out", a.out, "output CSV path")->required();
    sub->add_option("--schemes", a.schemes,
                    "schemes to run: proposed,no_jn,non_robust")
        ->delimiter(',');
    sub->add_option("--sweep", a.sweep, "override the sweep grid")
        ->delimiter(',');
    sub->add_option("--dump-program", a.dump,
                    "also write the first trial's initial subproblem here");
    sub->add_option("--threads", a.threads, "worker threads (0 = hardware)");
    sub->add_flag("--timing", a.timing, "record wall times in the ms column");
}

secbeam::ExperimentSpec build_spec(secbeam::ExperimentSpec::Kind kind,
                                   const Args& a,
                                   const secbeam::SystemConfig& cfg) {
    using Kind = secbeam::ExperimentSpec::Kind;
    secbeam::ExperimentSpec spec;
    spec.kind = kind;
    spec.out_path = a.out;
    spec.master_seed = a.seed_opt->count() ? a.seed : cfg.seed;
    spec.threads = a.threads;
    spec.timing = a.timing;

    switch (kind) {
        case Kind::convergence:
            spec.sweep = {4.0, 6.0, 8.0};
            spec.trials = 1;
            spec.schemes = {secbeam::Scheme::proposed};
            break;
        case Kind::power_sweep:
            spec.sweep = {0.0, 4.0, 8.0, 12.0, 16.0, 20.0};
            spec.trials = 50;
            spec.schemes = {secbeam::Scheme::proposed, secbeam::Scheme::no_jn,
                            secbeam::Scheme::non_robust};
            break;
        case Kind::cdf:
            spec.sweep = {20.0};
            spec.trials = 200;
            spec.schemes = {secbeam::Scheme::proposed, secbeam::Scheme::no_jn,
                            secbeam::Scheme::non_robust};
            break;
    }
    if (!a.sweep.empty()) spec.sweep = a.sweep;
    if (a.trials > 0) spec.trials = a.trials;
    if (!a.schemes.empty()) {
        spec.schemes.clear();
        for (const auto& name : a.schemes)
            spec.schemes.push_back(secbeam::scheme_from_name(name));
    }
    return spec;
}

void dump_first_subproblem(const secbeam::ExperimentSpec& spec,
                           const secbeam::SystemConfig& cfg,
                           const std::string& path) {
    secbeam::SystemConfig c0 =
        secbeam::experiment_config(spec, cfg, spec.sweep.front());
    const std::uint64_t s0 =
        secbeam::substream_seed(spec.master_seed, "trial", 0);
    c0.seed = s0;
    const secbeam::ChannelSet ch = secbeam::draw_channels(c0, s0);
    const secbeam::ConicProgram p =
        secbeam::build_subproblem(secbeam::heuristic_start(ch, c0), ch, c0);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw secbeam::config_error("cannot open dump path: " + path);
    secbeam::dump_program(p, out);
}

int run(secbeam::ExperimentSpec::Kind kind, const Args& a) {
    using Kind = secbeam::ExperimentSpec::Kind;
    secbeam::SystemConfig cfg;
    if (a.config.empty())
        cfg.finalize();
    else
        cfg = secbeam::load_config(a.config);

    const secbeam::ExperimentSpec spec = build_spec(kind, a, cfg);
    if (!a.dump.empty()) dump_first_subproblem(spec, cfg, a.dump);

    secbeam::RunResult res;
    switch (kind) {
        case Kind::convergence: res = secbeam::run_convergence(spec, cfg); break;
        case Kind::power_sweep: res = secbeam::run_power_sweep(spec, cfg); break;
        case Kind::cdf: res = secbeam::run_cdf(spec, cfg); break;
    }

    nlohmann::json extras;
    if (kind == Kind::cdf) extras = secbeam::cdf_extras(res.rows);
    secbeam::emit_results(res.rows, spec.out_path, spec, cfg, res.audits,
                          extras);

    int trials = 0, converged = 0, failed = 0;
    for (const auto& r : res.rows) {
        if (r.status == "aggregate") continue;
        ++trials;
        if (r.status == "converged") ++converged;
        if (r.status == "numerical_failure") ++failed;
    }
    std::printf("%s: %zu rows -> %s (converged %d, failed %d)\n",
                secbeam::kind_name(kind), res.rows.size(),
                spec.out_path.c_str(), converged, failed);
    return failed == trials ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust secrecy-rate beamforming experiments"};
    app.require_subcommand(1);

    using Kind = secbeam::ExperimentSpec::Kind;
    CLI::App* conv = app.add_subcommand(
        "convergence", "per-iteration objective traces over antenna counts");
    CLI::App* sweep = app.add_subcommand(
        "sweep", "secrecy rate versus transmit power budget");
    CLI::App* cdf = app.add_subcommand(
        "cdf", "empirical secrecy-rate distribution at fixed power");
    Args conv_args, sweep_args, cdf_args;
    add_common(conv, conv_args);
    add_common(sweep, sweep_args);
    add_common(cdf, cdf_args);

    try {
        app.parse(argc, argv);
        if (sweep->parsed()) return run(Kind::power_sweep, sweep_args);
        if (cdf->parsed()) return run(Kind::cdf, cdf_args);
        return run(Kind::convergence, conv_args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const secbeam::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const secbeam::dimension_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
