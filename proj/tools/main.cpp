// Command-line driver: single two-step estimation runs, Monte Carlo sweeps,
// and the analysis checks, with CSV/JSON/SVG artifacts.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qid/analysis.hpp"
#include "qid/artifacts.hpp"
#include "qid/config.hpp"
#include "qid/sim.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace qid;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitCheckFailed = 4;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<double> noise_output;
    std::optional<double> noise_input;
    bool plots = false;
    int jobs = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "run configuration file");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "noise seed");
    cmd->add_option("--noise-output", o.noise_output, "output noise std (enables noise)");
    cmd->add_option("--noise-input", o.noise_input, "input noise std (enables noise)");
    cmd->add_option("--jobs", o.jobs, "concurrent Monte Carlo runs")->check(CLI::PositiveNumber);
    cmd->add_flag("--plots", o.plots, "emit SVG plots");
}

cli::RunConfig make_config(const CommonOpts& o) {
    cli::RunConfig cfg = o.config_path.empty() ? cli::parse_config("")
                                               : cli::load_config_file(o.config_path);
    cfg.out_dir = o.out_dir;
    if (o.plots) cfg.emit_plots = true;
    if (o.noise_output) {
        cfg.noise.output_std = *o.noise_output;
        cfg.noise_enabled = true;
    }
    if (o.noise_input) {
        cfg.noise.input_std = *o.noise_input;
        cfg.noise_enabled = true;
    }
    if (o.seed) cfg.noise.seed = *o.seed;
    cfg.validate();
    return cfg;
}

void ensure_out_dir(const std::string& dir) {
    fs::create_directories(dir);
    if (!fs::is_directory(dir))
        throw std::runtime_error("not a directory: " + dir);
}

json result_to_json(const sim::EstimationResult& r, bool noisy) {
    json j;
    j["omega12_hat"] = r.omega12_hat_final;
    j["omega23_hat"] = r.omega23_hat_final;
    j["rel_err12"] = r.rel_err12;
    j["rel_err23"] = r.rel_err23;
    if (r.tconv12) j["tconv12"] = *r.tconv12; else j["tconv12"] = nullptr;
    if (r.tconv23) j["tconv23"] = *r.tconv23; else j["tconv23"] = nullptr;
    j["seed"] = r.seed;
    j["noisy"] = noisy;
    return j;
}

int cmd_estimate(const CommonOpts& o) {
    const cli::RunConfig cfg = make_config(o);
    ensure_out_dir(cfg.out_dir);

    const sim::TwoStepOutput run = sim::run_two_step(
        cfg.params, cfg.gains12, cfg.gains23, cfg.noise_opt(), cfg.sim, cfg.init);

    artifacts::write_atomic(cfg.out_dir + "/trajectory.csv",
                            artifacts::trajectory_csv(run.trajectory));
    artifacts::write_atomic(cfg.out_dir + "/summary.json",
                            result_to_json(run.result, cfg.noise_enabled).dump(2) + "\n");

    if (cfg.emit_plots) {
        artifacts::PlotSeries w12{"omega12_hat", "#1f77b4", {}};
        artifacts::PlotSeries w23{"omega23_hat", "#d62728", {}};
        artifacts::PlotSeries t12{"omega12 true", "#1f77b4", {}};
        artifacts::PlotSeries t23{"omega23 true", "#d62728", {}};
        for (const sim::Sample& s : run.trajectory) {
            w12.points.emplace_back(s.t, s.omega12_hat);
            w23.points.emplace_back(s.t, s.omega23_hat);
        }
        t12.points = {{0, cfg.params.omega12},
                      {cfg.sim.t2_end, cfg.params.omega12}};
        t23.points = {{0, cfg.params.omega23},
                      {cfg.sim.t2_end, cfg.params.omega23}};
        t12.color = "#9ecae1";
        t23.color = "#ff9896";
        artifacts::write_atomic(
            cfg.out_dir + "/estimates.svg",
            artifacts::svg_line_plot("Two-step Rabi amplitude estimation",
                                     {t12, t23, w12, w23}, "t", "estimate"));
    }

    std::cout << "estimate: omega12_hat=" << run.result.omega12_hat_final
              << " omega23_hat=" << run.result.omega23_hat_final
              << " rel_err12=" << run.result.rel_err12
              << " rel_err23=" << run.result.rel_err23 << "\n";
    return kExitOk;
}

int cmd_sweep(const CommonOpts& o, int n_runs) {
    const cli::RunConfig cfg = make_config(o);
    ensure_out_dir(cfg.out_dir);

    sim::MonteCarloConfig mc{cfg.params, cfg.gains12, cfg.gains23, cfg.noise,
                             cfg.sim, cfg.init};
    if (!cfg.noise_enabled) {
        mc.noise.output_std = 0;
        mc.noise.input_std = 0;
    }
    const std::uint64_t seed0 = o.seed.value_or(cfg.noise.seed);
    const sim::MonteCarloOutput out = sim::monte_carlo(mc, n_runs, seed0, o.jobs);

    artifacts::write_atomic(cfg.out_dir + "/sweep.csv", artifacts::sweep_csv(out.runs));

    json j;
    j["n_runs"] = n_runs;
    j["seed0"] = seed0;
    auto stats = [](const sim::SummaryStats& s) {
        return json{{"median", s.median}, {"iqr", s.iqr}, {"count", s.count}};
    };
    j["rel_err12"] = stats(out.rel_err12);
    j["rel_err23"] = stats(out.rel_err23);
    j["tconv12"] = stats(out.tconv12);
    j["tconv23"] = stats(out.tconv23);
    artifacts::write_atomic(cfg.out_dir + "/summary.json", j.dump(2) + "\n");

    std::cout << "sweep: n=" << n_runs
              << " median rel_err12=" << out.rel_err12.median
              << " median rel_err23=" << out.rel_err23.median << "\n";
    return kExitOk;
}

int cmd_analyze(const CommonOpts& o, const std::string& which) {
    const cli::RunConfig cfg = make_config(o);
    ensure_out_dir(cfg.out_dir);

    std::ostringstream rep;
    bool pass = false;

    if (which == "linearization") {
        analysis::LinearizedParams p{0.5, cfg.gains12.epsilon,
                                     cfg.gains12.gamma_big, cfg.gains12.gamma_small};
        const auto spectrum = analysis::linearized12_spectrum(p);
        rep << "linearization check\n";
        rep << "eigenvalues at a=0.5:";
        for (const auto& ev : spectrum)
            rep << " (" << ev.real() << (ev.imag() >= 0 ? "+" : "") << ev.imag() << "i)";
        rep << "\n";
        pass = true;
        for (double a = 0.1; a < 0.95; a += 0.1) {
            p.a = a;
            for (const auto& ev : analysis::linearized12_spectrum(p))
                if (!(ev.real() < 0)) pass = false;
        }
        rep << "all real parts negative over a in {0.1..0.9}: "
            << (pass ? "true" : "false") << "\n";
    } else if (which == "lyapunov") {
        const double worst = analysis::lyapunov_max_step_increase(
            cfg.gains12, 50, 0.05, 40.0, 0.005, 7);
        pass = worst <= 1e-9;
        rep << "lyapunov check\n";
        rep << "max per-step increase over 50 trajectories: " << worst << "\n";
        rep << "nonincreasing: " << (pass ? "true" : "false") << "\n";
    } else if (which == "averaging") {
        const std::vector<double> eps = {0.1, 0.05, 0.025, 0.0125};
        const double slope = analysis::averaging_order_slope(
            eps, cfg.params.omega12, cfg.gains12.gamma_big, cfg.gains12.gamma_small);
        pass = std::abs(slope - 1.0) <= 0.15;
        rep << "averaging-order check\n";
        rep << "log-log slope of trajectory gap vs epsilon: " << slope << "\n";
        rep << "within 1.0 +/- 0.15: " << (pass ? "true" : "false") << "\n";
    } else if (which == "demodulation") {
        const double period = 2 * M_PI / cfg.params.omega12;
        const analysis::DemodFrozenResult r = analysis::demodulation_frozen_error(
            cfg.params.omega12, 3 * period, 1e-3, 5 * period, 11);
        pass = r.err_p1 <= 1e-3 && r.err_p2 <= 1e-3;
        rep << "demodulation check (frozen rotating-frame state)\n";
        rep << "err_p1=" << r.err_p1 << " err_p2=" << r.err_p2 << "\n";
        rep << "within 1e-3: " << (pass ? "true" : "false") << "\n";
    } else if (which == "rwa") {
        const double rabi = cfg.labframe.rabi12();
        const double horizon = 2 * M_PI / rabi;
        const double gap = analysis::labframe_compare(cfg.labframe, 1.0, 0.0, horizon);
        pass = gap <= 0.05;
        rep << "rotating-wave validation (lab-frame Schrodinger vs model)\n";
        rep << "sup-norm population gap over one Rabi period: " << gap << "\n";
        rep << "within 0.05: " << (pass ? "true" : "false") << "\n";
    } else {
        throw ValidationError("unknown analysis check: " + which);
    }

    rep << "result: " << (pass ? "PASS" : "FAIL") << "\n";
    artifacts::write_atomic(cfg.out_dir + "/analyze_" + which + ".txt", rep.str());
    std::cout << rep.str();
    return pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-step Rabi amplitude estimation for a 3-level system"};
    app.require_subcommand(1);

    CommonOpts o_est, o_sweep, o_analyze, o_rwa;
    int n_runs = 20;
    std::string which;

    CLI::App* est = app.add_subcommand("estimate", "single two-step estimation run");
    add_common(est, o_est);

    CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over seeds");
    add_common(sweep, o_sweep);
    sweep->add_option("-n,--runs", n_runs, "number of runs")->check(CLI::PositiveNumber);

    CLI::App* analyze = app.add_subcommand("analyze", "run an analysis check");
    add_common(analyze, o_analyze);
    analyze->add_option("which", which, "averaging|linearization|lyapunov|demodulation|rwa")
        ->required();

    CLI::App* rwa = app.add_subcommand("validate-rwa", "alias for analyze rwa");
    add_common(rwa, o_rwa);

    CLI11_PARSE(app, argc, argv);

    try {
        if (est->parsed()) return cmd_estimate(o_est);
        if (sweep->parsed()) return cmd_sweep(o_sweep, n_runs);
        if (analyze->parsed()) return cmd_analyze(o_analyze, which);
        if (rwa->parsed()) return cmd_analyze(o_rwa, "rwa");
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitConfig;
}
